//! Uniformly tabulated profiles with shape-preserving interpolation.

use std::fmt::Write as _;

/// A profile tabulated on a uniform grid `start + i * step`.
///
/// Evaluation uses piecewise cubic Hermite interpolation with Fritsch-Carlson
/// slopes, so the interpolant never leaves the range of the two neighbouring
/// node values. Outside the grid the profile takes the constant fill values.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    start: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    left_fill: f64,
    right_fill: f64,
}

impl Profile {
    /// Builds a profile that vanishes outside `[start, start + (n-1) * step]`.
    pub fn compact(start: f64, step: f64, values: Vec<f64>) -> Self {
        Self::new(start, step, values, 0.0, 0.0)
    }

    pub fn new(start: f64, step: f64, values: Vec<f64>, left_fill: f64, right_fill: f64) -> Self {
        assert!(values.len() >= 2, "profile needs at least two nodes");
        assert!(step > 0.0, "profile step must be positive");
        let slopes = pchip_slopes(&values, step);
        Self {
            start,
            step,
            values,
            slopes,
            left_fill,
            right_fill,
        }
    }

    /// Tabulates `f` on `n` uniform nodes over `[a, b]`.
    pub fn from_fn(
        a: f64,
        b: f64,
        n: usize,
        left_fill: f64,
        right_fill: f64,
        f: impl Fn(f64) -> f64,
    ) -> Self {
        let step = (b - a) / (n - 1) as f64;
        let values = (0..n)
            .map(|i| f(if i + 1 == n { b } else { a + i as f64 * step }))
            .collect();
        Self::new(a, step, values, left_fill, right_fill)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.start + (self.values.len() - 1) as f64 * self.step
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.node(i), v))
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Interpolated value at `x`; exact at nodes.
    pub fn sample(&self, x: f64) -> f64 {
        let n = self.values.len();
        let s = (x - self.start) / self.step;
        if s < 0.0 {
            // Rounding at the left node still returns the node value.
            return if s > -1e-9 {
                self.values[0]
            } else {
                self.left_fill
            };
        }
        let last = (n - 1) as f64;
        if s > last {
            return if s < last + 1e-9 {
                self.values[n - 1]
            } else {
                self.right_fill
            };
        }
        let nearest = s.round();
        if (s - nearest).abs() < 1e-9 {
            return self.values[nearest as usize];
        }
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1
    }

    /// Writes `header` followed by `x,value` rows at round-trip precision.
    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::with_capacity(self.values.len() * 40);
        out.push_str(header);
        out.push('\n');
        for (x, v) in self.nodes() {
            let _ = writeln!(out, "{x},{v}");
        }
        out
    }
}

fn pchip_slopes(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let delta: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for i in 1..n - 1 {
        let (a, b) = (delta[i - 1], delta[i]);
        if a * b > 0.0 {
            d[i] = 2.0 / (1.0 / a + 1.0 / b);
        }
    }
    d[0] = pchip_end(delta[0], delta[1]);
    d[n - 1] = pchip_end(delta[n - 2], delta[n - 3]);
    d
}

fn pchip_end(d0: f64, d1: f64) -> f64 {
    let m = 0.5 * (3.0 * d0 - d1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}
