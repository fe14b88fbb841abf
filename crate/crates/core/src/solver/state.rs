use std::fmt::Write as _;

use super::Nonlinearity;
use crate::error::{ensure_positive, Result};
use crate::interp::Profile;

/// Fixed parameters: erosion speed `c`, Stefan coefficient `mu`, initial
/// length `h0` and the reaction term.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub c: f64,
    pub mu: f64,
    pub h0: f64,
    pub f: Nonlinearity,
}

impl ProblemSpec {
    pub fn new(c: f64, mu: f64, h0: f64, f: Nonlinearity) -> Result<Self> {
        let spec = Self { c, mu, h0, f };
        spec.validate()?;
        Ok(spec)
    }

    pub fn logistic(c: f64, mu: f64, h0: f64) -> Result<Self> {
        Self::new(c, mu, h0, Nonlinearity::logistic())
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("c", self.c)?;
        ensure_positive("mu", self.mu)?;
        ensure_positive("h0", self.h0)?;
        self.f.validate()
    }

    pub fn with_h0(&self, h0: f64) -> Self {
        Self { h0, ..self.clone() }
    }
}

/// Solution in front-fixed variables: `v(t, y) = u(t, ct + y H)`, `H = h - ct`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontFixedState {
    pub t: f64,
    pub c: f64,
    /// `H(t)`.
    pub width: f64,
    /// Last computed `H'(t)`.
    pub width_rate: f64,
    /// `v` on `y_j = j / N`, `j = 0..=N`; both ends are 0.
    pub v: Vec<f64>,
}

impl FrontFixedState {
    pub fn n(&self) -> usize {
        self.v.len() - 1
    }

    pub fn dy(&self) -> f64 {
        1.0 / self.n() as f64
    }

    /// Left end `ct`.
    pub fn left(&self) -> f64 {
        self.c * self.t
    }

    /// Free boundary `h = ct + H`.
    pub fn front(&self) -> f64 {
        self.left() + self.width
    }

    pub fn front_speed(&self) -> f64 {
        self.c + self.width_rate
    }

    pub fn umax(&self) -> f64 {
        self.v.iter().copied().fold(0.0, f64::max)
    }

    /// Physical position of node `j`.
    pub fn node_x(&self, j: usize) -> f64 {
        self.left() + self.width * j as f64 / self.n() as f64
    }

    /// `u(t, x)`: linear interpolation of `v` at `(x - ct) / H`, 0 outside the habitat.
    pub fn to_physical(&self, x: f64) -> f64 {
        let s = (x - self.left()) / self.width * self.n() as f64;
        let n = self.n();
        if !(0.0..=n as f64).contains(&s) {
            return 0.0;
        }
        let nearest = s.round();
        if (s - nearest).abs() < 1e-9 {
            return self.v[nearest as usize];
        }
        let j = (s.floor() as usize).min(n - 1);
        let w = s - j as f64;
        (1.0 - w) * self.v[j] + w * self.v[j + 1]
    }

    /// `u(t, .)` as a compactly supported profile on `[ct, h]`.
    pub fn physical_profile(&self) -> Profile {
        Profile::compact(self.left(), self.width / self.n() as f64, self.v.clone())
    }

    /// `x,u` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,u\n");
        for (j, v) in self.v.iter().enumerate() {
            let _ = writeln!(out, "{},{}", self.node_x(j), v);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    /// `H`.
    pub width: f64,
    /// `h = ct + H`.
    pub front: f64,
    pub umax: f64,
    /// `v_y(t, 1)`.
    pub flux: f64,
    /// `H'`.
    pub width_rate: f64,
}

impl TraceSample {
    pub fn front_speed(&self, c: f64) -> f64 {
        c + self.width_rate
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TerminalEvent {
    /// `H` dropped to the floor: the numerical stand-in for collapse.
    FloorHit {
        t: f64,
    },
    HorizonReached,
    StepFailure {
        t: f64,
        reason: String,
    },
}

impl TerminalEvent {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::FloorHit { .. } => "floor-hit",
            Self::HorizonReached => "horizon-reached",
            Self::StepFailure { .. } => "step-failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub c: f64,
    pub samples: Vec<TraceSample>,
    pub snapshots: Vec<FrontFixedState>,
    pub terminal: TerminalEvent,
    pub final_state: FrontFixedState,
    pub steps: usize,
}

impl Trace {
    pub fn last(&self) -> &TraceSample {
        self.samples
            .last()
            .expect("trace always holds the initial sample")
    }

    pub fn end_time(&self) -> f64 {
        self.last().t
    }

    /// `t,H,h,umax,flux,Hdot` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * 100);
        out.push_str("t,H,h,umax,flux,Hdot\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.t, s.width, s.front, s.umax, s.flux, s.width_rate
            );
        }
        out
    }

    /// Appends a continuation that started from this trace's final state.
    pub fn join(mut self, next: Trace) -> Trace {
        self.samples.extend(next.samples.into_iter().skip(1));
        let last = self.snapshots.last().map(|s| s.t);
        self.snapshots
            .extend(next.snapshots.into_iter().filter(|s| Some(s.t) != last));
        Trace {
            terminal: next.terminal,
            final_state: next.final_state,
            steps: self.steps + next.steps,
            ..self
        }
    }

    /// Snapshot closest to `t`.
    pub fn snapshot_at(&self, t: f64) -> Option<&FrontFixedState> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    /// Stability-limited step, capped at `dt_max`.
    Adaptive {
        dt_max: f64,
    },
    Fixed(f64),
}

impl DtPolicy {
    pub fn nominal(&self) -> f64 {
        match *self {
            Self::Adaptive { dt_max } => dt_max,
            Self::Fixed(dt) => dt,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Controls {
    pub n: usize,
    pub dt: DtPolicy,
    pub t_max: f64,
    /// Defaults to `max(10 h0 / N, 1e-4 h0)`.
    pub h_floor: Option<f64>,
    pub snapshot_times: Vec<f64>,
    /// Minimum spacing between recorded trace samples; 0 records every step.
    pub record_every: f64,
}

impl Controls {
    pub fn new(n: usize, t_max: f64) -> Self {
        Self {
            n,
            dt: DtPolicy::Adaptive { dt_max: 1e-2 },
            t_max,
            h_floor: None,
            snapshot_times: Vec::new(),
            record_every: 0.0,
        }
    }

    pub fn with_dt(mut self, dt: DtPolicy) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_snapshots(mut self, times: impl IntoIterator<Item = f64>) -> Self {
        self.snapshot_times = times.into_iter().collect();
        self
    }

    pub fn with_record_every(mut self, every: f64) -> Self {
        self.record_every = every;
        self
    }

    pub fn floor(&self, h0: f64) -> f64 {
        self.h_floor.unwrap_or_else(|| default_floor(h0, self.n))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 16 {
            return Err(crate::Error::InvalidParameter {
                name: "N",
                value: self.n as f64,
                reason: "need at least 16 intervals".into(),
            });
        }
        ensure_positive("T_max", self.t_max)?;
        ensure_positive("dt", self.dt.nominal())?;
        if let Some(f) = self.h_floor {
            ensure_positive("H_floor", f)?;
        }
        if self.record_every < 0.0 || !self.record_every.is_finite() {
            return Err(crate::Error::InvalidParameter {
                name: "record_every",
                value: self.record_every,
                reason: "must be nonnegative".into(),
            });
        }
        Ok(())
    }
}

pub fn default_floor(h0: f64, n: usize) -> f64 {
    (10.0 * h0 / n as f64).max(1e-4 * h0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state() -> FrontFixedState {
        FrontFixedState {
            t: 2.0,
            c: 0.5,
            width: 4.0,
            width_rate: 0.0,
            v: (0..=16)
                .map(|j| (std::f64::consts::PI * j as f64 / 16.0).sin())
                .collect(),
        }
    }

    #[test]
    fn physical_map_inverts_front_fixing() {
        let s = state();
        assert_eq!(s.to_physical(1.0), s.v[0]);
        assert_eq!(s.to_physical(5.0), s.v[16]);
        assert_eq!(s.to_physical(0.5), 0.0);
        assert_eq!(s.to_physical(5.5), 0.0);
        for j in 0..=16 {
            assert_eq!(s.to_physical(1.0 + 4.0 * j as f64 / 16.0), s.v[j]);
        }
    }

    #[test]
    fn front_is_left_plus_width() {
        let s = state();
        assert_eq!(s.front(), 5.0);
        assert_eq!(default_floor(1.0, 400), 0.025);
        assert_eq!(default_floor(1.0, 1_000_000), 1e-4);
    }
}
