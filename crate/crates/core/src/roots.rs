//! Bracketed scalar root finding: bisection with secant acceleration.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Converged once `|f(x)| <= tol_residual`.
    pub tol_residual: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            tol_residual: 1e-10,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `f(x) = 0` on `[lo, hi]` given `f(lo)` and `f(hi)` of opposite sign.
///
/// Each iteration tries a secant step through the bracket endpoints and falls
/// back to bisection when the secant lands outside the bracket or the last
/// step failed to halve it. Errors from `f` are propagated unchanged.
pub fn bracketed_root<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_hi: f64,
    opts: &RootOptions,
) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    if f_lo == 0.0 {
        return Ok(Root {
            x: lo,
            residual: 0.0,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Root {
            x: hi,
            residual: 0.0,
            iterations: 0,
        });
    }
    if (f_lo > 0.0) == (f_hi > 0.0) || !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::Bracket(format!(
            "f({lo}) = {f_lo} and f({hi}) = {f_hi} do not bracket a root"
        )));
    }
    let (mut a, mut fa, mut b, mut fb) = (lo, f_lo, hi, f_hi);
    let mut best = if f_lo.abs() < f_hi.abs() {
        (a, fa)
    } else {
        (b, fb)
    };
    let mut width = (b - a).abs();
    let mut use_secant = true;

    for it in 1..=opts.max_iter {
        let mid = 0.5 * (a + b);
        let mut x = if use_secant {
            b - fb * (b - a) / (fb - fa)
        } else {
            mid
        };
        if !(x > a.min(b) && x < a.max(b)) {
            x = mid;
        }
        let fx = f(x)?;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= opts.tol_residual {
            return Ok(Root {
                x,
                residual: fx,
                iterations: it,
            });
        }
        if (fx > 0.0) == (fa > 0.0) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        let new_width = (b - a).abs();
        use_secant = new_width <= 0.5 * width;
        width = new_width;
        if width <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
    }
    if best.1.abs() <= opts.tol_residual {
        Ok(Root {
            x: best.0,
            residual: best.1,
            iterations: opts.max_iter,
        })
    } else {
        Err(Error::Bracket(format!(
            "residual {} at x = {} above tolerance {} after bracket collapse",
            best.1, best.0, opts.tol_residual
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = bracketed_root(
            |x| Ok(x * x - 2.0),
            1.0,
            2.0,
            -1.0,
            2.0,
            &RootOptions {
                tol_residual: 1e-14,
                max_iter: 100,
            },
        )
        .unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-13);
        assert!(r.iterations < 20);
    }

    #[test]
    fn no_sign_change_is_bracket_error() {
        let err = bracketed_root(
            |x| Ok(x * x + 1.0),
            -1.0,
            1.0,
            2.0,
            2.0,
            &RootOptions::default(),
        );
        assert!(matches!(err, Err(Error::Bracket(_))));
    }

    #[test]
    fn flat_tail_still_converges() {
        // Secant stalls on a flat tail; bisection fallback must rescue it.
        let f = |x: f64| Ok((x - 0.3).powi(3));
        let r = bracketed_root(
            f,
            0.0,
            1.0,
            -0.027,
            0.343,
            &RootOptions {
                tol_residual: 1e-15,
                max_iter: 200,
            },
        )
        .unwrap();
        assert!((r.x - 0.3).abs() < 1e-4);
    }

    #[test]
    fn propagates_callee_errors() {
        let r = bracketed_root(
            |_| Err(Error::Bracket("inner".into())),
            0.0,
            1.0,
            -1.0,
            1.0,
            &RootOptions::default(),
        );
        assert_eq!(r.unwrap_err(), Error::Bracket("inner".into()));
    }
}
