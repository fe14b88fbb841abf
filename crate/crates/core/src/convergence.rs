//! Refinement ladders `(N, dt) -> (2N, dt/4) -> ...` and observed orders.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::profiles::solve_compact_wave;
use crate::solver::{
    boundary_flux, simulate, step_with_source, Controls, DtPolicy, FrontFixedState, InitialData,
    ProblemSpec, Source,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ladder {
    pub n0: usize,
    pub dt0: f64,
    pub levels: usize,
    pub t_end: f64,
}

impl Ladder {
    pub fn level(&self, k: usize) -> (usize, f64) {
        (self.n0 << k, self.dt0 / 4f64.powi(k as i32))
    }

    fn validate(&self) -> Result<()> {
        if self.levels < 3 {
            return Err(Error::Convergence(format!(
                "an order estimate needs at least 3 levels, got {}",
                self.levels
            )));
        }
        if self.n0 < 16 || !(self.dt0 > 0.0) || !(self.t_end > 0.0) {
            return Err(Error::Convergence(
                "need N0 >= 16, dt0 > 0 and T_end > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub n: usize,
    pub dt: f64,
    pub width_end: f64,
    /// Error of `H(T_end)` against an exact value, or the difference to the
    /// next finer level in a self-convergence study.
    pub width_error: Option<f64>,
    /// Same for the profile in max norm (on this level's nodes).
    pub profile_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub case: String,
    pub levels: Vec<Level>,
    /// `log2(e_k / e_{k+1})` for consecutive errors.
    pub width_orders: Vec<f64>,
    pub profile_orders: Vec<f64>,
}

impl ConvergenceTable {
    fn new(case: impl Into<String>, levels: Vec<Level>) -> Self {
        let orders = |pick: fn(&Level) -> Option<f64>| {
            let e: Vec<f64> = levels.iter().filter_map(pick).collect();
            e.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
        };
        Self {
            case: case.into(),
            width_orders: orders(|l| l.width_error),
            profile_orders: orders(|l| l.profile_error),
            levels,
        }
    }

    pub fn min_width_order(&self) -> f64 {
        self.width_orders
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_profile_order(&self) -> f64 {
        self.profile_orders
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `N,dt,H_end,H_error,profile_error,H_order,profile_order` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,dt,H_end,H_error,profile_error,H_order,profile_order\n");
        let opt = |x: Option<f64>| x.map_or_else(|| "NaN".to_string(), |v| v.to_string());
        for (k, l) in self.levels.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                l.n,
                l.dt,
                l.width_end,
                opt(l.width_error),
                opt(l.profile_error),
                opt(k
                    .checked_sub(1)
                    .and_then(|i| self.width_orders.get(i).copied())),
                opt(k
                    .checked_sub(1)
                    .and_then(|i| self.profile_orders.get(i).copied())),
            );
        }
        out
    }
}

/// `v* = a(t) (sin(pi y) + 0.2 sin(2 pi y))`, `a = 0.5 + 0.25 sin t`,
/// `H* = 2 + 0.5 sin t`, forced into the front-fixed system.
#[derive(Debug, Clone, PartialEq)]
pub struct Manufactured {
    pub spec: ProblemSpec,
}

impl Manufactured {
    pub fn new(c: f64, mu: f64) -> Result<Self> {
        Ok(Self {
            spec: ProblemSpec::logistic(c, mu, 2.0)?,
        })
    }

    fn amp(t: f64) -> (f64, f64) {
        (0.5 + 0.25 * t.sin(), 0.25 * t.cos())
    }

    pub fn exact_width(&self, t: f64) -> f64 {
        2.0 + 0.5 * t.sin()
    }

    fn width_prime(t: f64) -> f64 {
        0.5 * t.cos()
    }

    pub fn exact(&self, t: f64, y: f64) -> f64 {
        Self::amp(t).0 * ((PI * y).sin() + 0.2 * (2.0 * PI * y).sin())
    }

    pub fn initial_state(&self, n: usize) -> FrontFixedState {
        let mut v: Vec<f64> = (0..=n)
            .map(|j| self.exact(0.0, j as f64 / n as f64))
            .collect();
        v[0] = 0.0;
        v[n] = 0.0;
        FrontFixedState {
            t: 0.0,
            c: self.spec.c,
            width: self.exact_width(0.0),
            width_rate: Self::width_prime(0.0),
            v,
        }
    }
}

impl Source for Manufactured {
    fn pde(&self, t: f64, y: f64) -> f64 {
        let (a, da) = Self::amp(t);
        let (s1, s2) = ((PI * y).sin(), (2.0 * PI * y).sin());
        let shape = s1 + 0.2 * s2;
        let vy = a * PI * ((PI * y).cos() + 0.4 * (2.0 * PI * y).cos());
        let vyy = -a * PI * PI * (s1 + 0.8 * s2);
        let h = self.exact_width(t);
        let v = a * shape;
        da * shape
            - vyy / (h * h)
            - (self.spec.c + y * Self::width_prime(t)) * vy / h
            - self.spec.f.eval(v)
    }

    fn width(&self, t: f64) -> f64 {
        // v*_y(t, 1) = -0.6 pi a(t).
        let flux = -0.6 * PI * Self::amp(t).0;
        Self::width_prime(t) + self.spec.mu * flux / self.exact_width(t) + self.spec.c
    }
}

pub fn manufactured_study(m: &Manufactured, ladder: &Ladder) -> Result<ConvergenceTable> {
    ladder.validate()?;
    let levels = (0..ladder.levels)
        .map(|k| {
            let (n, dt) = ladder.level(k);
            let steps = (ladder.t_end / dt).round() as usize;
            let mut s = m.initial_state(n);
            for _ in 0..steps {
                s = step_with_source(&s, &m.spec, dt, m)?;
            }
            let err = (0..=n)
                .map(|j| (s.v[j] - m.exact(s.t, j as f64 / n as f64)).abs())
                .fold(0.0, f64::max);
            Ok(Level {
                n,
                dt,
                width_end: s.width,
                width_error: Some((s.width - m.exact_width(s.t)).abs()),
                profile_error: Some(err),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable::new("manufactured", levels))
}

/// Richardson-style study: differences between consecutive levels.
pub fn self_convergence(
    case: &str,
    spec: &ProblemSpec,
    data: &InitialData,
    ladder: &Ladder,
) -> Result<ConvergenceTable> {
    ladder.validate()?;
    let finals = (0..ladder.levels)
        .map(|k| {
            let (n, dt) = ladder.level(k);
            let controls = Controls::new(n, ladder.t_end)
                .with_dt(DtPolicy::Fixed(dt))
                .with_record_every(ladder.t_end);
            let trace = simulate(spec, data, &controls)?;
            if trace.end_time() < ladder.t_end {
                return Err(Error::Convergence(format!(
                    "level N = {n} ended with {} at t = {}",
                    trace.terminal.tag(),
                    trace.end_time()
                )));
            }
            Ok(trace.final_state)
        })
        .collect::<Result<Vec<_>>>()?;
    let levels = finals
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let next = finals.get(k + 1);
            Level {
                n: s.n(),
                dt: ladder.level(k).1,
                width_end: s.width,
                width_error: next.map(|f| (s.width - f.width).abs()),
                profile_error: next.map(|f| {
                    (0..=s.n())
                        .map(|j| (s.v[j] - f.v[2 * j]).abs())
                        .fold(0.0, f64::max)
                }),
            }
        })
        .collect();
    Ok(ConvergenceTable::new(case, levels))
}

/// Self-convergence from `V_c` data with `h0 = L_c`.
pub fn traveling_wave_study(c: f64, mu: f64, ladder: &Ladder) -> Result<ConvergenceTable> {
    let wave = solve_compact_wave(c, mu, 1e-10)?;
    let spec = ProblemSpec::logistic(c, mu, wave.length)?;
    let data = InitialData::compact_wave(&wave, wave.length, 0.0, 1.0);
    self_convergence("traveling-wave", &spec, &data, ladder)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub t_end: f64,
    pub width_main: f64,
    pub width_reference: f64,
    /// Richardson estimates of each integrator's error in `H(T)`, from a rerun at `2N`.
    pub truncation_main: f64,
    pub truncation_reference: f64,
    /// `max(1e-2, 3 (truncation_main + truncation_reference))`.
    pub tolerance: f64,
}

impl Agreement {
    pub fn difference(&self) -> f64 {
        (self.width_main - self.width_reference).abs()
    }

    pub fn holds(&self) -> bool {
        self.difference() <= self.tolerance
    }
}

/// Compares `H(T)` of the two integrators on the same grid.
///
/// The main scheme is second order (`dt` quartered on refinement), the
/// reference is first order through its boundary flux.
pub fn oracle_agreement(
    spec: &ProblemSpec,
    data: &InitialData,
    controls: &Controls,
) -> Result<Agreement> {
    let finish = |trace: crate::solver::Trace| -> Result<f64> {
        if trace.end_time() < controls.t_max {
            return Err(Error::Convergence(format!(
                "run ended with {} at t = {}",
                trace.terminal.tag(),
                trace.end_time()
            )));
        }
        Ok(trace.final_state.width)
    };
    let mut fine = controls.clone();
    fine.n *= 2;
    fine.h_floor = Some(controls.floor(spec.h0));
    fine.dt = match controls.dt {
        DtPolicy::Fixed(dt) => DtPolicy::Fixed(dt / 4.0),
        DtPolicy::Adaptive { dt_max } => DtPolicy::Adaptive {
            dt_max: dt_max / 4.0,
        },
    };
    let main = finish(simulate(spec, data, controls)?)?;
    let main_fine = finish(simulate(spec, data, &fine)?)?;
    let reference = finish(crate::solver::reference_simulate(spec, data, controls)?)?;
    let reference_fine = finish(crate::solver::reference_simulate(spec, data, &fine)?)?;
    let truncation_main = (main - main_fine).abs() * 4.0 / 3.0;
    let truncation_reference = (reference - reference_fine).abs() * 2.0;
    Ok(Agreement {
        t_end: controls.t_max,
        width_main: main,
        width_reference: reference,
        truncation_main,
        truncation_reference,
        tolerance: 1e-2_f64.max(3.0 * (truncation_main + truncation_reference)),
    })
}

/// Flux of the exact manufactured profile, for diagnostics.
pub fn manufactured_flux(m: &Manufactured, n: usize) -> f64 {
    boundary_flux(&m.initial_state(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manufactured_orders_match_design() {
        // dt shrinks with dy^2, so O(dt + dy^2) shows as order 2 per halving of dy.
        let m = Manufactured::new(0.3, 1.0).unwrap();
        let t = manufactured_study(
            &m,
            &Ladder {
                n0: 32,
                dt0: 4e-3,
                levels: 3,
                t_end: 0.5,
            },
        )
        .unwrap();
        assert!(t.min_width_order() >= 1.8, "{:?}", t.width_orders);
        assert!(t.min_profile_order() >= 1.8, "{:?}", t.profile_orders);
    }

    #[test]
    fn traveling_wave_second_order() {
        let t = traveling_wave_study(
            0.18,
            1.0,
            &Ladder {
                n0: 100,
                dt0: 0.04,
                levels: 3,
                t_end: 5.0,
            },
        )
        .unwrap();
        assert!(t.min_width_order() >= 1.8, "{:?}", t.width_orders);
    }

    #[test]
    fn two_levels_rejected() {
        let m = Manufactured::new(0.3, 1.0).unwrap();
        let err = manufactured_study(
            &m,
            &Ladder {
                n0: 32,
                dt0: 1e-3,
                levels: 2,
                t_end: 0.1,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Convergence(_)));
        assert!((manufactured_flux(&m, 1024) + 0.6 * PI * 0.5).abs() < 1e-5);
    }
}
