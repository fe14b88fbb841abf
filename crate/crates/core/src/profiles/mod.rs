//! Travelling-wave profiles of `q'' + c q' + q(1 - q) = 0` by phase-plane shooting.
//!
//! * [`solve_semi_wave`]: the semi-wave on `z <= 0` with `q(-inf) = 1`,
//!   `q(0) = 0` and the Stefan compatibility `mu |q'(0)| = c`; its speed is
//!   the asymptotic spreading speed `c*`.
//! * [`solve_compact_wave`]: for `0 < c < c*`, the compactly supported wave
//!   on `[0, L_c]` with `mu |V'(L_c)| = c`.
//! * [`elliptic_profile`]: the positive Dirichlet solution of
//!   `w'' + C w' + w(1 - w) = 0` on `[-l, l]`.

mod compact_wave;
mod elliptic;
mod semi_wave;

pub use compact_wave::{compact_wave_shoot, solve_compact_wave, CompactShot, CompactWave};
pub use elliptic::{elliptic_profile, EllipticProfile};
pub use semi_wave::{semi_wave_slope, solve_semi_wave, SemiWave};

use crate::interp::Profile;
use crate::ode::State;

/// Numerical knobs shared by the shooting solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    /// Residual tolerance of the outer root solve (`mu |slope| - c`).
    pub tol: f64,
    /// Local error tolerance of the integrator.
    pub ode_tol: f64,
    /// Launch offset along the unstable eigenvector of `(1, 0)`.
    pub launch_offset: f64,
    /// Tabulation nodes.
    pub nodes: usize,
    /// Longest trajectory (in `z`) before a shot is declared non-returning.
    pub span: f64,
}

impl ShootingOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ode_tol: (1e-2 * tol).clamp(1e-13, 1e-8),
            launch_offset: 1e-8,
            nodes: 2048,
            span: 400.0,
        }
    }
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self::with_tol(1e-10)
    }
}

pub(crate) fn fisher_field(c: f64) -> impl Fn(f64, &State) -> State {
    move |_, y| [y[1], -c * y[1] - y[0] * (1.0 - y[0])]
}

/// Max-norm residual of `u'' + c u' + u(1 - u)` on a tabulated profile.
///
/// Derivatives use sixth-order central differences on a sub-lattice of the
/// table with spacing at least `min_spacing` (finer spacings only amplify
/// round-off in the stored values).
pub fn ode_residual(profile: &Profile, c: f64, min_spacing: f64) -> f64 {
    let stride = ((min_spacing / profile.step()).ceil() as usize).max(1);
    let h = profile.step() * stride as f64;
    let vals: Vec<f64> = profile.values().iter().step_by(stride).copied().collect();
    const D2: [f64; 7] = [
        1.0 / 90.0,
        -3.0 / 20.0,
        3.0 / 2.0,
        -49.0 / 18.0,
        3.0 / 2.0,
        -3.0 / 20.0,
        1.0 / 90.0,
    ];
    const D1: [f64; 7] = [
        -1.0 / 60.0,
        3.0 / 20.0,
        -3.0 / 4.0,
        0.0,
        3.0 / 4.0,
        -3.0 / 20.0,
        1.0 / 60.0,
    ];
    vals.windows(7)
        .map(|w| {
            let d2: f64 = w.iter().zip(D2).map(|(v, k)| v * k).sum::<f64>() / (h * h);
            let d1: f64 = w.iter().zip(D1).map(|(v, k)| v * k).sum::<f64>() / h;
            let u = w[3];
            (d2 + c * d1 + u * (1.0 - u)).abs()
        })
        .fold(0.0, f64::max)
}

/// Key-value lines describing a profile, for sidecar files.
pub trait ProfileMetadata {
    fn metadata(&self) -> Vec<(&'static str, String)>;
}
