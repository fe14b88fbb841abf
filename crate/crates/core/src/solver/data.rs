use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{ensure_positive, Error, Result};
use crate::profiles::CompactWave;

type Shape = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Initial profile `u0` on `[0, h0]`.
#[derive(Clone)]
pub struct InitialData {
    h0: f64,
    label: String,
    shape: Shape,
}

/// `u0` sampled on `x_j = j h0 / N` together with the class check.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledData {
    pub values: Vec<f64>,
    /// `u0'(0) > 0`, `u0'(h0) < 0` (one-sided differences) and `u0 > 0` inside.
    pub in_x_class: bool,
    pub sup: f64,
    /// Largest `|u0'|` seen on a fine sampling.
    pub max_slope: f64,
}

impl InitialData {
    pub fn from_fn(
        h0: f64,
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            h0,
            label: label.into(),
            shape: Arc::new(f),
        }
    }

    /// `sigma sin(pi x / h0)`.
    pub fn sine(h0: f64, sigma: f64) -> Self {
        Self::from_fn(h0, format!("sine(sigma={sigma})"), move |x| {
            sigma * (PI * x / h0).sin()
        })
    }

    /// `sigma 4 x (h0 - x) / h0^2`.
    pub fn bump(h0: f64, sigma: f64) -> Self {
        Self::from_fn(h0, format!("bump(sigma={sigma})"), move |x| {
            sigma * 4.0 * x * (h0 - x) / (h0 * h0)
        })
    }

    /// `sigma V_c(x - shift)` on `[0, h0]`.
    pub fn compact_wave(wave: &CompactWave, h0: f64, shift: f64, sigma: f64) -> Self {
        let profile = wave.profile.clone();
        Self::from_fn(
            h0,
            format!("compact-wave(shift={shift}, sigma={sigma})"),
            move |x| sigma * profile.sample(x - shift),
        )
    }

    /// Piecewise linear data through `(xs, us)`; `xs` must run from 0 to `h0`.
    pub fn from_samples(xs: Vec<f64>, us: Vec<f64>) -> Result<Self> {
        let mut problems = Vec::new();
        if xs.len() != us.len() || xs.len() < 2 {
            problems.push(format!(
                "need matching x and u columns with at least 2 rows ({} vs {})",
                xs.len(),
                us.len()
            ));
        } else {
            if xs[0] != 0.0 {
                problems.push(format!("first x must be 0, found {}", xs[0]));
            }
            if !xs.windows(2).all(|w| w[1] > w[0]) {
                problems.push("x must be strictly increasing".into());
            }
            if !us.iter().chain(&xs).all(|v| v.is_finite()) {
                problems.push("non-finite entries".into());
            }
        }
        if !problems.is_empty() {
            return Err(Error::InvalidData(problems));
        }
        let h0 = *xs.last().unwrap();
        ensure_positive("h0", h0)?;
        Ok(Self::from_fn(h0, "custom", move |x| {
            let i = xs.partition_point(|&p| p <= x);
            if i == 0 {
                return us[0];
            }
            if i == xs.len() {
                return us[xs.len() - 1];
            }
            let w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            (1.0 - w) * us[i - 1] + w * us[i]
        }))
    }

    /// Parses two-column `x,u` CSV; a non-numeric first line is a header.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut us = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                return Err(Error::InvalidData(vec![format!(
                    "line {}: expected two columns",
                    k + 1
                )]));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(u)) => {
                    xs.push(x);
                    us.push(u);
                }
                _ if xs.is_empty() => continue,
                _ => {
                    return Err(Error::InvalidData(vec![format!(
                        "line {}: not numeric",
                        k + 1
                    )]))
                }
            }
        }
        Self::from_samples(xs, us)
    }

    pub fn scaled(&self, sigma: f64) -> Self {
        let shape = self.shape.clone();
        Self {
            h0: self.h0,
            label: format!("{sigma}*{}", self.label),
            shape: Arc::new(move |x| sigma * shape(x)),
        }
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.shape)(x)
    }

    /// Values at `j h0 / N`; the last node is evaluated exactly at `h0`.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..=n)
            .map(|j| {
                self.eval(if j == n {
                    self.h0
                } else {
                    self.h0 * j as f64 / n as f64
                })
            })
            .collect()
    }

    /// Samples and validates: finite, nonnegative, zero at both ends.
    pub fn check(&self, n: usize) -> Result<SampledData> {
        let values = self.sample(n);
        let sup = values.iter().copied().fold(0.0, f64::max);
        let scale = sup.max(1.0);
        let mut problems = Vec::new();
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            problems.push(format!(
                "u0 is not finite at x = {}",
                self.h0 * j as f64 / n as f64
            ));
        }
        if values[0].abs() > 1e-12 * scale {
            problems.push(format!("u0(0) = {} is not 0", values[0]));
        }
        if values[n].abs() > 1e-12 * scale {
            problems.push(format!("u0(h0) = {} is not 0", values[n]));
        }
        if let Some(j) = values.iter().position(|&v| v < -1e-14 * scale) {
            problems.push(format!("u0 < 0 at x = {}", self.h0 * j as f64 / n as f64));
        }
        if !problems.is_empty() {
            return Err(Error::InvalidData(problems));
        }
        let in_x_class = values[1] > values[0]
            && values[n - 1] > values[n]
            && values[1..n].iter().all(|&v| v > 0.0);

        let fine = 8 * n;
        let dx = self.h0 / fine as f64;
        let max_slope = (0..fine)
            .map(|i| ((self.eval((i + 1) as f64 * dx) - self.eval(i as f64 * dx)) / dx).abs())
            .fold(0.0, f64::max);
        Ok(SampledData {
            values,
            in_x_class,
            sup,
            max_slope,
        })
    }
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialData")
            .field("h0", &self.h0)
            .field("label", &self.label)
            .finish()
    }
}
