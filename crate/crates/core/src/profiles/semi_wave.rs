use super::{fisher_field, ode_residual, ProfileMetadata, ShootingOptions};
use crate::error::{ensure_positive, Error, Result};
use crate::interp::Profile;
use crate::ode::{integrate_ivp, Event, IvpOptions, Trajectory};
use crate::roots::{bracketed_root, RootOptions};

/// The pair `(c*, q*)` for a Stefan coefficient `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiWave {
    pub mu: f64,
    pub c_star: f64,
    /// `q*` on `[-z_max, 0]`; equal to 1 to the left, 0 to the right.
    pub profile: Profile,
    /// `q*'(0)`, negative.
    pub slope0: f64,
    pub tol: f64,
}

impl SemiWave {
    /// Length of the tabulated window; `1 - q*(-z_max)` is the launch offset.
    pub fn z_max(&self) -> f64 {
        -self.profile.start()
    }

    pub fn sample(&self, z: f64) -> f64 {
        self.profile.sample(z)
    }

    pub fn residual(&self) -> f64 {
        ode_residual(&self.profile, self.c_star, 0.01)
    }
}

impl ProfileMetadata for SemiWave {
    fn metadata(&self) -> Vec<(&'static str, String)> {
        vec![
            ("kind", "semi-wave".into()),
            ("mu", self.mu.to_string()),
            ("c_star", self.c_star.to_string()),
            ("slope0", self.slope0.to_string()),
            ("z_max", self.z_max().to_string()),
            ("nodes", self.profile.len().to_string()),
            ("tol", self.tol.to_string()),
            ("residual", self.residual().to_string()),
        ]
    }
}

fn launch_shot(c: f64, eps: f64, opts: &ShootingOptions) -> Result<Trajectory> {
    let lambda = 0.5 * (-c + (c * c + 4.0).sqrt());
    let traj = integrate_ivp(
        fisher_field(c),
        0.0,
        [1.0 - eps, -lambda * eps],
        opts.span,
        &IvpOptions::with_tol(opts.ode_tol),
        &[Event::falling(0, 0.0)],
    )?;
    if traj.event.is_none() {
        return Err(Error::NoSemiWave {
            c,
            reason: format!(
                "unstable manifold did not reach q = 0 within z = {}",
                opts.span
            ),
        });
    }
    Ok(traj)
}

fn slope_with(c: f64, opts: &ShootingOptions) -> Result<f64> {
    if !(0.0..2.0).contains(&c) {
        return Err(Error::NoSemiWave {
            c,
            reason: "speed must lie in [0, 2)".into(),
        });
    }
    let eps = opts.launch_offset;
    let coarse = -launch_shot(c, eps, opts)?.end().1[1];
    let fine = -launch_shot(c, 0.5 * eps, opts)?.end().1[1];
    // The launch error is quadratic in the offset.
    Ok((4.0 * fine - coarse) / 3.0)
}

/// `|q_c'(0)|` along the unstable manifold of `(1, 0)`, for `0 <= c < 2`.
///
/// `tol` is the local error tolerance handed to the integrator.
pub fn semi_wave_slope(c: f64, tol: f64) -> Result<f64> {
    ensure_positive("tol", tol)?;
    let opts = ShootingOptions {
        ode_tol: tol,
        ..ShootingOptions::default()
    };
    slope_with(c, &opts)
}

/// Solves `mu s(c) = c` for the spreading speed and tabulates `q*`.
pub fn solve_semi_wave(mu: f64, tol: f64) -> Result<SemiWave> {
    solve_semi_wave_with(mu, &ShootingOptions::with_tol(tol))
}

pub fn solve_semi_wave_with(mu: f64, opts: &ShootingOptions) -> Result<SemiWave> {
    ensure_positive("mu", mu)?;
    ensure_positive("tol", opts.tol)?;
    let g = |c: f64| slope_with(c, opts).map(|s| mu * s - c);

    // g(0) = mu / sqrt(3) > 0; walk towards 2 until g changes sign.
    let (mut lo, mut g_lo) = (0.0, g(0.0)?);
    let mut bracket = None;
    for k in 1..=30 {
        let c = 2.0 - 2.0_f64.powi(1 - k);
        let gc = g(c)?;
        if gc < 0.0 {
            bracket = Some((c, gc));
            break;
        }
        lo = c;
        g_lo = gc;
    }
    let (hi, g_hi) = bracket.ok_or_else(|| {
        Error::Bracket(format!(
            "mu s(c) - c stays positive on (0, 2) for mu = {mu}"
        ))
    })?;

    let root = bracketed_root(
        g,
        lo,
        hi,
        g_lo,
        g_hi,
        &RootOptions {
            tol_residual: opts.tol,
            max_iter: 200,
        },
    )?;
    let c_star = root.x;
    let slope0 = -slope_with(c_star, opts)?;

    let traj = launch_shot(c_star, opts.launch_offset, opts)?;
    let (z_end, y_end) = traj.end();
    let n = opts.nodes;
    let step = z_end / (n - 1) as f64;
    let mut values: Vec<f64> = (0..n).map(|i| traj.eval(i as f64 * step)[0]).collect();
    values[n - 1] = y_end[0];
    let profile = Profile::new(-z_end, step, values, 1.0, 0.0);

    Ok(SemiWave {
        mu,
        c_star,
        profile,
        slope0,
        tol: opts.tol,
    })
}
