use super::{ode_residual, ProfileMetadata, ShootingOptions};
use crate::error::{ensure_positive, Error, Result};
use crate::interp::Profile;
use crate::ode::{integrate_ivp, Event, IvpOptions, State, Trajectory};
use crate::roots::{bracketed_root, RootOptions};

/// Positive solution of `w'' + C w' + w(1 - w) = 0`, `w(-l) = w(l) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticProfile {
    pub drift: f64,
    pub half_length: f64,
    /// `w` on `[-l, l]`.
    pub profile: Profile,
    /// `w'(-l)`, the shooting slope the profile corresponds to.
    pub alpha: f64,
    /// Location and value of the maximum.
    pub peak: (f64, f64),
}

impl EllipticProfile {
    pub fn sample(&self, x: f64) -> f64 {
        self.profile.sample(x)
    }

    pub fn residual(&self) -> f64 {
        ode_residual(&self.profile, self.drift, 0.01)
    }
}

impl ProfileMetadata for EllipticProfile {
    fn metadata(&self) -> Vec<(&'static str, String)> {
        vec![
            ("kind", "elliptic".into()),
            ("drift", self.drift.to_string()),
            ("half_length", self.half_length.to_string()),
            ("alpha", self.alpha.to_string()),
            ("peak_x", self.peak.0.to_string()),
            ("peak_value", self.peak.1.to_string()),
            ("nodes", self.profile.len().to_string()),
        ]
    }
}

/// Deficit `u = 1 - w` from the peak `(u, u') = (gap, 0)` until `u = 1`.
///
/// Working with the deficit keeps full relative precision when the peak is
/// within round-off of 1, which is where long intervals put it.
fn half_shot(drift: f64, gap: f64, opts: &ShootingOptions) -> Result<Option<Trajectory>> {
    let field = move |_: f64, y: &State| [y[1], -drift * y[1] + y[0] * (1.0 - y[0])];
    let traj = integrate_ivp(
        field,
        0.0,
        [gap, 0.0],
        opts.span,
        &IvpOptions::with_tol(opts.ode_tol),
        &[Event::rising(0, 1.0)],
    )?;
    Ok(traj.event.is_some().then_some(traj))
}

struct Shot {
    forward: Trajectory,
    backward: Trajectory,
}

impl Shot {
    fn lengths(&self) -> (f64, f64) {
        (self.backward.end().0, self.forward.end().0)
    }

    fn total(&self) -> f64 {
        let (b, f) = self.lengths();
        b + f
    }
}

fn shot_from_peak(drift: f64, gap: f64, opts: &ShootingOptions) -> Result<Option<Shot>> {
    // Leftwards from the peak the equation reads W'' - C W' + W(1 - W) = 0.
    let Some(forward) = half_shot(drift, gap, opts)? else {
        return Ok(None);
    };
    let Some(backward) = half_shot(-drift, gap, opts)? else {
        return Ok(None);
    };
    Ok(Some(Shot { forward, backward }))
}

/// Solves the Dirichlet problem by shooting from the interior maximum.
///
/// The unknown is the peak deficit `1 - max w`; the total distance between
/// the two zeros must equal `2l`. The profile is reported together with the
/// equivalent boundary slope `w'(-l)`.
pub fn elliptic_profile(drift: f64, half_length: f64, tol: f64) -> Result<EllipticProfile> {
    ensure_positive("l", half_length)?;
    ensure_positive("tol", tol)?;
    if !(0.0..2.0).contains(&drift) {
        return Err(Error::InvalidParameter {
            name: "C",
            value: drift,
            reason: "drift must lie in [0, 2)".into(),
        });
    }
    let opts = ShootingOptions::with_tol(tol);
    let target = 2.0 * half_length;
    let fail = |reason: String| Error::NoEllipticProfile {
        drift,
        half_length,
        reason,
    };
    let mismatch = |log_gap: f64| -> Result<f64> {
        match shot_from_peak(drift, log_gap.exp(), &opts)? {
            Some(shot) => Ok(shot.total() - target),
            None => Err(fail(format!(
                "shot with peak deficit {} did not reach zero",
                log_gap.exp()
            ))),
        }
    };

    // Small peaks give the linear spacing pi / sqrt(1 - C^2/4) < 2l is needed.
    let small = (1.0 - 1e-4_f64).ln();
    let g_small = mismatch(small)?;
    if g_small >= 0.0 {
        return Err(fail(format!(
            "interval too short: small-amplitude zero spacing {} >= 2l",
            g_small + target
        )));
    }
    let (mut lo, mut g_lo) = (small, g_small);
    let mut bracket = None;
    for k in 1..=52 {
        let lg = -(k as f64) * std::f64::consts::LN_2;
        let g = mismatch(lg)?;
        if g >= 0.0 {
            bracket = Some((lg, g));
            break;
        }
        lo = lg;
        g_lo = g;
    }
    let (hi, g_hi) =
        bracket.ok_or_else(|| fail("peak deficit below 2^-52 still too short".into()))?;
    let root = bracketed_root(
        mismatch,
        lo,
        hi,
        g_lo,
        g_hi,
        &RootOptions {
            tol_residual: tol,
            max_iter: 300,
        },
    )?;
    let gap = root.x.exp();
    let shot = shot_from_peak(drift, gap, &opts)?.ok_or_else(|| fail("root shot lost".into()))?;
    let (left_len, right_len) = shot.lengths();
    let peak_x = -half_length + left_len;

    let n = opts.nodes;
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let x = -half_length + target * i as f64 / (n - 1) as f64;
            let u = if x <= peak_x {
                shot.backward.eval(peak_x - x)[0]
            } else {
                shot.forward.eval((x - peak_x).min(right_len))[0]
            };
            1.0 - u
        })
        .collect();
    let alpha = shot.backward.end().1[1];

    Ok(EllipticProfile {
        drift,
        half_length,
        profile: Profile::compact(-half_length, target / (n - 1) as f64, values),
        alpha,
        peak: (peak_x, 1.0 - gap),
    })
}
