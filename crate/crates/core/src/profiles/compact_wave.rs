use super::{fisher_field, ode_residual, ProfileMetadata, ShootingOptions};
use crate::error::{ensure_positive, Error, Result};
use crate::interp::Profile;
use crate::ode::{integrate_ivp, Event, IvpOptions, Trajectory};
use crate::roots::{bracketed_root, RootOptions};

/// The pair `(L_c, V_c)`: `V_c(x - ct)` on `[ct, ct + L_c]` solves the full
/// free boundary problem exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactWave {
    pub c: f64,
    pub mu: f64,
    /// Support length `L_c`.
    pub length: f64,
    /// `V_c` on `[0, L_c]`, zero outside.
    pub profile: Profile,
    /// `V_c'(L_c)`, negative.
    pub slope_end: f64,
    /// Launch slope `V_c'(0)`.
    pub alpha: f64,
    pub tol: f64,
}

impl CompactWave {
    pub fn sample(&self, z: f64) -> f64 {
        self.profile.sample(z)
    }

    pub fn max_value(&self) -> f64 {
        self.profile.max_value()
    }

    pub fn residual(&self) -> f64 {
        ode_residual(&self.profile, self.c, 0.01)
    }
}

impl ProfileMetadata for CompactWave {
    fn metadata(&self) -> Vec<(&'static str, String)> {
        vec![
            ("kind", "compact-wave".into()),
            ("c", self.c.to_string()),
            ("mu", self.mu.to_string()),
            ("length", self.length.to_string()),
            ("slope_end", self.slope_end.to_string()),
            ("alpha", self.alpha.to_string()),
            ("max_value", self.max_value().to_string()),
            ("nodes", self.profile.len().to_string()),
            ("tol", self.tol.to_string()),
            ("residual", self.residual().to_string()),
        ]
    }
}

/// Outcome of one shot from `(V, V') = (0, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompactShot {
    /// First return to `V = 0` at `z = length` with slope `slope < 0`.
    Return { length: f64, slope: f64 },
    /// Crossed `V = 1` or used up the span without returning.
    NoReturn,
}

fn shoot(c: f64, alpha: f64, opts: &ShootingOptions) -> Result<(CompactShot, Trajectory)> {
    let traj = integrate_ivp(
        fisher_field(c),
        0.0,
        [0.0, alpha],
        opts.span,
        &IvpOptions::with_tol(opts.ode_tol),
        &[Event::falling(0, 0.0), Event::rising(0, 1.0)],
    )?;
    let shot = match traj.event {
        Some(hit) if hit.index == 0 => CompactShot::Return {
            length: hit.t,
            slope: hit.y[1],
        },
        _ => CompactShot::NoReturn,
    };
    Ok((shot, traj))
}

/// Shoots `V'' + c V' + V(1 - V) = 0` from `(0, alpha)` to its first return.
pub fn compact_wave_shoot(c: f64, alpha: f64) -> Result<CompactShot> {
    check_speed(c)?;
    ensure_positive("alpha", alpha)?;
    shoot(c, alpha, &ShootingOptions::default()).map(|(s, _)| s)
}

fn check_speed(c: f64) -> Result<()> {
    if c > 0.0 && c < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "c",
            value: c,
            reason: "compact waves need 0 < c < 2".into(),
        })
    }
}

pub fn solve_compact_wave(c: f64, mu: f64, tol: f64) -> Result<CompactWave> {
    solve_compact_wave_with(c, mu, &ShootingOptions::with_tol(tol))
}

/// Finds the launch slope with `mu |V'(L)| = c` on the returning branch.
pub fn solve_compact_wave_with(c: f64, mu: f64, opts: &ShootingOptions) -> Result<CompactWave> {
    check_speed(c)?;
    ensure_positive("mu", mu)?;
    ensure_positive("tol", opts.tol)?;
    let no_wave = |reason: String| Error::NoCompactWave { c, mu, reason };
    let mismatch = |alpha: f64| -> Result<Option<f64>> {
        Ok(match shoot(c, alpha, opts)?.0 {
            CompactShot::Return { slope, .. } => Some(mu * slope.abs() - c),
            CompactShot::NoReturn => None,
        })
    };

    // Geometric scan from 1e-6 until a sign change or the branch ends.
    let mut below: Option<(f64, f64)> = None;
    let mut above: Option<(f64, f64)> = None;
    let mut escape: Option<f64> = None;
    let mut alpha = 1e-6;
    for _ in 0..80 {
        match mismatch(alpha)? {
            Some(g) if g < 0.0 => below = Some((alpha, g)),
            Some(g) => {
                above = Some((alpha, g));
                break;
            }
            None => {
                escape = Some(alpha);
                break;
            }
        }
        alpha *= 2.0;
    }
    let (a_lo, g_lo) =
        below.ok_or_else(|| no_wave("mismatch already positive at the smallest slope".into()))?;

    // The sign change may sit just below the separatrix; bisect towards it.
    if above.is_none() {
        let mut lo = a_lo;
        let mut hi =
            escape.ok_or_else(|| no_wave("returning branch did not end within the scan".into()))?;
        let mut best_lo = (a_lo, g_lo);
        for _ in 0..200 {
            if hi - lo <= 1e-15 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            match mismatch(mid)? {
                None => hi = mid,
                Some(g) if g < 0.0 => {
                    lo = mid;
                    best_lo = (mid, g);
                }
                Some(g) => {
                    above = Some((mid, g));
                    break;
                }
            }
        }
        below = Some(best_lo);
        if above.is_none() {
            return Err(no_wave(format!(
                "mu |V'(L)| - c < 0 on the whole returning branch (alpha < {hi}); expected when c >= c*"
            )));
        }
    }
    let (a_lo, g_lo) = below.unwrap();
    let (a_hi, g_hi) = above.unwrap();

    let root = bracketed_root(
        |a| Ok(mismatch(a)?.unwrap_or(c)),
        a_lo,
        a_hi,
        g_lo,
        g_hi,
        &RootOptions {
            tol_residual: opts.tol,
            max_iter: 300,
        },
    )?;
    let alpha = root.x;
    let (shot, traj) = shoot(c, alpha, opts)?;
    let CompactShot::Return { length, slope } = shot else {
        return Err(no_wave(format!("root alpha = {alpha} does not return")));
    };

    let n = opts.nodes;
    let step = length / (n - 1) as f64;
    let mut values: Vec<f64> = (0..n).map(|i| traj.eval(i as f64 * step)[0]).collect();
    let end_value = traj.end().1[0];
    if end_value.abs() > opts.tol {
        return Err(no_wave(format!("return located with |V(L)| = {end_value}")));
    }
    values[0] = 0.0;
    values[n - 1] = 0.0;

    Ok(CompactWave {
        c,
        mu,
        length,
        profile: Profile::compact(0.0, step, values),
        slope_end: slope,
        alpha,
        tol: opts.tol,
    })
}
