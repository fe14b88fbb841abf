use std::fmt;

use super::{
    estimate_extinction_time, estimate_speed, estimate_speed_over, spreading_certificate,
    transition_distance, vanishing_constant, vanishing_majorant,
};
use crate::error::{Error, Result};
use crate::profiles::{solve_compact_wave, solve_semi_wave, CompactWave, SemiWave};
use crate::solver::{
    init_state, simulate_from, Controls, DtPolicy, InitialData, ProblemSpec, TerminalEvent, Trace,
};

/// Finite-time verdict on the long-time behaviour.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Vanishing { extinction_time: f64 },
    Spreading { speed: f64, shift: f64 },
    Transition { width: f64, distance: f64 },
    Undetermined(Diagnostics),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub final_width: f64,
    /// `H(T) - L_c`; `None` when no compact wave exists.
    pub distance_to_lc: Option<f64>,
    /// Mean `H'` over the last tenth of the trace.
    pub trend: f64,
}

impl Outcome {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Vanishing { .. } => "vanishing",
            Self::Spreading { .. } => "spreading",
            Self::Transition { .. } => "transition",
            Self::Undetermined(_) => "undetermined",
        }
    }

    /// The carried number: extinction time, speed, width or final width.
    pub fn value(&self) -> f64 {
        match self {
            Self::Vanishing { extinction_time } => *extinction_time,
            Self::Spreading { speed, .. } => *speed,
            Self::Transition { width, .. } => *width,
            Self::Undetermined(d) => d.final_width,
        }
    }

    pub fn is_vanishing(&self) -> bool {
        matches!(self, Self::Vanishing { .. })
    }

    pub fn is_spreading(&self) -> bool {
        matches!(self, Self::Spreading { .. })
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Vanishing { extinction_time } => write!(f, "vanishing (T* ~ {extinction_time})"),
            Self::Spreading { speed, shift } => {
                write!(f, "spreading (speed {speed}, certificate shift {shift})")
            }
            Self::Transition { width, distance } => {
                write!(f, "transition (H ~ {width}, distance {distance})")
            }
            Self::Undetermined(d) => {
                write!(f, "undetermined (H = {}, trend {})", d.final_width, d.trend)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertificateKind {
    VanishMajorant { eps: f64 },
    VanishConstant { constant: f64 },
    SpreadProfile { shift: f64, margin: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub checked_at: f64,
}

impl Certificate {
    pub fn label(&self) -> String {
        match &self.kind {
            CertificateKind::VanishMajorant { eps } => format!("vanish-majorant(eps={eps})"),
            CertificateKind::VanishConstant { constant } => {
                format!("vanish-constant(C={constant})")
            }
            CertificateKind::SpreadProfile { shift, margin } => {
                format!(
                    "spread-profile(b={shift};margin={margin};t={})",
                    self.checked_at
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Budget {
    pub t_max: f64,
    pub n: usize,
    pub dt: DtPolicy,
    pub h_floor: Option<f64>,
    /// Relative tolerance on `|H(T) - L_c|` (and on the transition distance
    /// relative to `max V_c`) for a transition verdict.
    pub tol_trans: f64,
    /// Spreading certificate margin; defaults to `1e-6 max V_c`.
    pub margin: Option<f64>,
    /// Time between spreading certificate checks.
    pub poll_every: f64,
    pub record_every: f64,
    pub snapshot_times: Vec<f64>,
    /// Window fraction for the speed fit.
    pub speed_window: f64,
    /// Extra horizons granted when collapse is guaranteed but not yet seen.
    pub collapse_extensions: u32,
    pub profile_tol: f64,
}

impl Budget {
    pub fn new(t_max: f64, n: usize) -> Self {
        Self {
            t_max,
            n,
            dt: DtPolicy::Adaptive { dt_max: 1e-2 },
            h_floor: None,
            tol_trans: 0.1,
            margin: None,
            poll_every: 1.0,
            record_every: 0.05,
            snapshot_times: Vec::new(),
            speed_window: 0.5,
            collapse_extensions: 4,
            profile_tol: 1e-10,
        }
    }

    pub fn controls(&self) -> Controls {
        Controls {
            n: self.n,
            dt: self.dt,
            t_max: self.t_max,
            h_floor: self.h_floor,
            snapshot_times: self.snapshot_times.clone(),
            record_every: self.record_every,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub outcome: Outcome,
    pub certificates: Vec<Certificate>,
    pub trace: Trace,
}

impl Classification {
    /// The certificate that supports the verdict, if any.
    pub fn primary_certificate(&self) -> Option<&Certificate> {
        let want_spread = self.outcome.is_spreading();
        self.certificates
            .iter()
            .find(|c| matches!(c.kind, CertificateKind::SpreadProfile { .. }) == want_spread)
    }
}

/// Profiles for one `(c, mu)`, reused across many classifications.
#[derive(Debug, Clone)]
pub struct Classifier {
    pub c: f64,
    pub mu: f64,
    pub semi_wave: SemiWave,
    /// `None` when `c >= c*`.
    pub wave: Option<CompactWave>,
    pub budget: Budget,
}

impl Classifier {
    pub fn new(c: f64, mu: f64, budget: Budget) -> Result<Self> {
        let semi_wave = solve_semi_wave(mu, budget.profile_tol)?;
        let wave = if c < semi_wave.c_star {
            Some(solve_compact_wave(c, mu, budget.profile_tol)?)
        } else {
            None
        };
        Ok(Self {
            c,
            mu,
            semi_wave,
            wave,
            budget,
        })
    }

    pub fn c_star(&self) -> f64 {
        self.semi_wave.c_star
    }

    pub fn classify(&self, spec: &ProblemSpec, data: &InitialData) -> Result<Classification> {
        if !spec.f.is_logistic() {
            return Err(Error::NotLogistic);
        }
        if spec.c != self.c || spec.mu != self.mu {
            return Err(Error::InvalidParameter {
                name: "c",
                value: spec.c,
                reason: format!(
                    "classifier was prepared for (c, mu) = ({}, {})",
                    self.c, self.mu
                ),
            });
        }
        let b = &self.budget;
        let controls = b.controls();
        let state = init_state(spec, data, b.n)?;
        let c1 = state.umax().max(1.0);
        let k = spec.f.lipschitz_cap(c1);

        let mut certificates = Vec::new();
        let c_van = vanishing_constant(spec.h0, spec.c, spec.mu, k);
        if state.umax() <= c_van {
            certificates.push(Certificate {
                kind: CertificateKind::VanishConstant { constant: c_van },
                checked_at: 0.0,
            });
        }
        let maj = vanishing_majorant(spec.h0, spec.c, spec.mu, k);
        if (0..=state.n()).all(|j| state.v[j] <= maj.eval(state.node_x(j))) {
            certificates.push(Certificate {
                kind: CertificateKind::VanishMajorant { eps: maj.eps },
                checked_at: 0.0,
            });
        }
        let collapse_expected = self.wave.is_none() || !certificates.is_empty();

        let margin = self
            .wave
            .as_ref()
            .map(|w| b.margin.unwrap_or(1e-6 * w.max_value()));
        let mut spread: Option<Certificate> = None;
        let mut next_poll = 0.0;
        let mut poll = |s: &crate::solver::FrontFixedState| {
            let (Some(w), Some(m)) = (self.wave.as_ref(), margin) else {
                return;
            };
            if spread.is_some() || s.t < next_poll {
                return;
            }
            next_poll = s.t + b.poll_every;
            if let Some(shift) = spreading_certificate(s, w, m) {
                spread = Some(Certificate {
                    kind: CertificateKind::SpreadProfile { shift, margin: m },
                    checked_at: s.t,
                });
            }
        };
        let mut trace = simulate_from(spec, state, &controls, &mut poll)?;
        let mut extension = 0;
        while collapse_expected
            && trace.terminal == TerminalEvent::HorizonReached
            && extension < b.collapse_extensions
        {
            extension += 1;
            let more = Controls {
                t_max: trace.end_time() + b.t_max,
                ..controls.clone()
            };
            let next = simulate_from(spec, trace.final_state.clone(), &more, &mut poll)?;
            trace = trace.join(next);
        }

        if let TerminalEvent::StepFailure { t, reason } = &trace.terminal {
            return Err(Error::StepFailure {
                t: *t,
                reason: reason.clone(),
            });
        }
        if let (TerminalEvent::FloorHit { t }, Some(cert)) = (&trace.terminal, &spread) {
            return Err(Error::Inconsistent(format!(
                "spreading certificate at t = {} but the habitat collapsed at t = {t}",
                cert.checked_at
            )));
        }

        let outcome = if matches!(trace.terminal, TerminalEvent::FloorHit { .. }) {
            Outcome::Vanishing {
                extinction_time: estimate_extinction_time(&trace)?,
            }
        } else if let Some(cert) = &spread {
            let CertificateKind::SpreadProfile { shift, .. } = cert.kind else {
                unreachable!()
            };
            let speed = estimate_speed(&trace, b.speed_window)
                .or_else(|_| estimate_speed_over(&trace, cert.checked_at, trace.end_time()))
                .map(|e| e.speed)
                .unwrap_or_else(|_| trace.last().front_speed(spec.c));
            Outcome::Spreading { speed, shift }
        } else {
            self.horizon_verdict(&trace)
        };
        certificates.extend(spread);
        Ok(Classification {
            outcome,
            certificates,
            trace,
        })
    }

    fn horizon_verdict(&self, trace: &Trace) -> Outcome {
        let last = trace.final_state.width;
        let tail_start = trace.end_time() * 0.9;
        let tail: Vec<f64> = trace
            .samples
            .iter()
            .filter(|s| s.t >= tail_start)
            .map(|s| s.width_rate)
            .collect();
        let trend = tail.iter().sum::<f64>() / tail.len().max(1) as f64;
        let diagnostics = |distance_to_lc| {
            Outcome::Undetermined(Diagnostics {
                final_width: last,
                distance_to_lc,
                trend,
            })
        };
        let Some(w) = &self.wave else {
            return diagnostics(None);
        };
        let gap = last - w.length;
        let d = transition_distance(&trace.final_state, w);
        let tol = self.budget.tol_trans;
        if gap.abs() <= tol * w.length && d <= tol * w.max_value() {
            Outcome::Transition {
                width: last,
                distance: d,
            }
        } else {
            diagnostics(Some(gap))
        }
    }
}

/// One-off classification; prefer [`Classifier`] when classifying many data.
pub fn classify(spec: &ProblemSpec, data: &InitialData, budget: &Budget) -> Result<Classification> {
    if !spec.f.is_logistic() {
        return Err(Error::NotLogistic);
    }
    Classifier::new(spec.c, spec.mu, budget.clone())?.classify(spec, data)
}
