use super::{InitialData, ProblemSpec, Trace};
use crate::error::Result;

/// A priori bounds `0 < u <= C1` and `0 < h' <= mu C2` for given data.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundMonitor {
    /// `max(1, sup u0)`.
    pub c1: f64,
    /// `max(sqrt(2K) / 2, |u0'|_max / C1)`.
    pub m: f64,
    /// `2 C1 M`.
    pub c2: f64,
    pub mu: f64,
    pub c: f64,
    pub tol_sup: f64,
    pub tol_speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// `sup u > C1`.
    SupNorm,
    /// `h' <= 0`.
    FrontRetreat,
    /// `h' > mu C2`.
    FrontTooFast,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub kind: ViolationKind,
    /// How far past the bound the sample went.
    pub magnitude: f64,
}

impl BoundMonitor {
    /// Bounds for `data` under `spec`, slopes measured on an `8N` sampling.
    pub fn new(spec: &ProblemSpec, data: &InitialData, n: usize) -> Result<Self> {
        let sampled = data.check(n)?;
        let c1 = sampled.sup.max(1.0);
        let k = spec.f.lipschitz_cap(c1);
        Ok(Self::from_constants(
            spec.c,
            spec.mu,
            c1,
            sampled.max_slope,
            k,
        ))
    }

    pub fn from_constants(c: f64, mu: f64, c1: f64, max_slope: f64, k: f64) -> Self {
        let m = ((2.0 * k).sqrt() / 2.0).max(max_slope / c1);
        Self {
            c1,
            m,
            c2: 2.0 * c1 * m,
            mu,
            c,
            tol_sup: 1e-8,
            tol_speed: 1e-6,
        }
    }

    pub fn speed_cap(&self) -> f64 {
        self.mu * self.c2
    }

    pub fn check(&self, trace: &Trace) -> Vec<Violation> {
        let mut out = Vec::new();
        for s in &trace.samples {
            if s.umax > self.c1 + self.tol_sup {
                out.push(Violation {
                    t: s.t,
                    kind: ViolationKind::SupNorm,
                    magnitude: s.umax - self.c1,
                });
            }
            // h' = -mu v_y(1) / H directly: c + H' cancels when h' << c.
            let speed = -self.mu * s.flux / s.width;
            if speed <= 0.0 {
                out.push(Violation {
                    t: s.t,
                    kind: ViolationKind::FrontRetreat,
                    magnitude: -speed,
                });
            } else if speed > self.speed_cap() + self.tol_speed {
                out.push(Violation {
                    t: s.t,
                    kind: ViolationKind::FrontTooFast,
                    magnitude: speed - self.speed_cap(),
                });
            }
        }
        out
    }
}
