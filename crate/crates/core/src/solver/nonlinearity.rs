use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Logistic,
    Custom {
        label: String,
        f: ScalarFn,
        df: ScalarFn,
    },
}

/// Reaction term `f` with `f(0) = f(1) = 0`, `f'(1) < 0` and `f < 0` above 1.
#[derive(Clone)]
pub struct Nonlinearity {
    kind: Kind,
}

impl Nonlinearity {
    /// `f(u) = u (1 - u)`.
    pub fn logistic() -> Self {
        Self {
            kind: Kind::Logistic,
        }
    }

    /// A user-supplied `f` with its derivative; checked on a sample of points.
    pub fn custom(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let nl = Self {
            kind: Kind::Custom {
                label: label.into(),
                f: Arc::new(f),
                df: Arc::new(df),
            },
        };
        nl.validate()?;
        Ok(nl)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.eval(0.0).abs() > 1e-12 {
            problems.push(format!("f(0) = {}", self.eval(0.0)));
        }
        if self.eval(1.0).abs() > 1e-12 {
            problems.push(format!("f(1) = {}", self.eval(1.0)));
        }
        let d1 = self.fprime_at_1();
        if !(d1 < 0.0) {
            problems.push(format!("f'(1) = {d1} is not negative"));
        }
        for u in [1.001, 1.01, 1.1, 1.5, 2.0, 4.0, 10.0] {
            let fu = self.eval(u);
            if !(fu < 0.0) {
                problems.push(format!("f({u}) = {fu} is not negative"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidNonlinearity(problems.join("; ")))
        }
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Logistic => u * (1.0 - u),
            Kind::Custom { f, .. } => f(u),
        }
    }

    #[inline]
    pub fn derivative(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Logistic => 1.0 - 2.0 * u,
            Kind::Custom { df, .. } => df(u),
        }
    }

    pub fn fprime_at_1(&self) -> f64 {
        self.derivative(1.0)
    }

    pub fn is_logistic(&self) -> bool {
        matches!(self.kind, Kind::Logistic)
    }

    pub fn label(&self) -> &str {
        match &self.kind {
            Kind::Logistic => "logistic",
            Kind::Custom { label, .. } => label,
        }
    }

    /// `K = max |f'|` over `[0, c1]`.
    ///
    /// Closed form for the logistic term, otherwise sampled on 2049 points.
    pub fn lipschitz_cap(&self, c1: f64) -> f64 {
        let c1 = c1.max(0.0);
        match &self.kind {
            Kind::Logistic => 1.0_f64.max((1.0 - 2.0 * c1).abs()),
            Kind::Custom { df, .. } => (0..=2048)
                .map(|i| df(c1 * i as f64 / 2048.0).abs())
                .fold(f64::MIN_POSITIVE, f64::max),
        }
    }
}

impl Default for Nonlinearity {
    fn default() -> Self {
        Self::logistic()
    }
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Nonlinearity({})", self.label())
    }
}

impl PartialEq for Nonlinearity {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (Kind::Logistic, Kind::Logistic) => true,
            (Kind::Custom { f: a, .. }, Kind::Custom { f: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}
