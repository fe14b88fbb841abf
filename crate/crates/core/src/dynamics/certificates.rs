use std::f64::consts::PI;

use crate::interp::Profile;
use crate::profiles::CompactWave;
use crate::solver::{FrontFixedState, InitialData};

const PSI_NODES: usize = 2048;

/// `psi(x) = eps^2 exp(-c x / 2) sin(pi x / h0)`, a super-solution that collapses.
#[derive(Debug, Clone, PartialEq)]
pub struct Majorant {
    pub h0: f64,
    pub c: f64,
    pub mu: f64,
    pub k: f64,
    /// `C = c / (2 sqrt(2K) mu)`.
    pub drift_constant: f64,
    /// `c h0 / (mu pi C)`, `C exp(-2K h0 / c)`, `1` and `sqrt(c / (4 mu (c/2 + pi/h0)))`.
    pub bounds: [f64; 4],
    pub eps: f64,
    pub psi: Profile,
}

impl Majorant {
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= self.h0 {
            return 0.0;
        }
        self.eps * self.eps * (-0.5 * self.c * x).exp() * (PI * x / self.h0).sin()
    }

    /// `psi` as initial data (closed form, exactly zero at both ends).
    pub fn data(&self) -> InitialData {
        let m = self.clone();
        InitialData::from_fn(self.h0, "psi", move |x| m.eval(x))
    }
}

/// Picks the largest admissible `C` and `eps` at 0.99 of the tightest bound.
pub fn vanishing_majorant(h0: f64, c: f64, mu: f64, k: f64) -> Majorant {
    let big_c = c / (2.0 * (2.0 * k).sqrt() * mu);
    let bounds = [
        c * h0 / (mu * PI * big_c),
        big_c * (-2.0 * k * h0 / c).exp(),
        1.0,
        (c / (4.0 * mu * (0.5 * c + PI / h0))).sqrt(),
    ];
    let eps = 0.99 * bounds.iter().copied().fold(f64::INFINITY, f64::min);
    let mut m = Majorant {
        h0,
        c,
        mu,
        k,
        drift_constant: big_c,
        bounds,
        eps,
        psi: Profile::compact(0.0, 1.0, vec![0.0, 0.0]),
    };
    let step = h0 / (PSI_NODES - 1) as f64;
    let mut values: Vec<f64> = (0..PSI_NODES).map(|i| m.eval(i as f64 * step)).collect();
    values[PSI_NODES - 1] = 0.0;
    m.psi = Profile::compact(0.0, step, values);
    m
}

/// `inf psi_{2 h0}` over the nodes in `[h0 / 2, 3 h0 / 2]`: data with smaller sup vanish.
pub fn vanishing_constant(h0: f64, c: f64, mu: f64, k: f64) -> f64 {
    let m = vanishing_majorant(2.0 * h0, c, mu, k);
    let tol = 1e-12 * h0;
    m.psi
        .nodes()
        .filter(|&(x, _)| x >= 0.5 * h0 - tol && x <= 1.5 * h0 + tol)
        .map(|(_, v)| v)
        .fold(f64::INFINITY, f64::min)
}

/// Smallest node shift `b` with `u(t, x) >= V_c(x - b) + margin` on `[b, b + L_c]`.
///
/// Shifts run over the physical nodes with `ct <= b` and `b + L_c <= h(t)`.
/// The two boundary nodes of the habitat, where `u = 0` is imposed, are not
/// tested; `V_c(x - b)` vanishes there whenever they fall inside the window.
pub fn spreading_certificate(
    state: &FrontFixedState,
    wave: &CompactWave,
    margin: f64,
) -> Option<f64> {
    let n = state.n();
    let dx = state.width / n as f64;
    if state.width < wave.length || state.umax() < wave.max_value() + margin {
        return None;
    }
    let slack = 1e-12 * state.width.max(1.0);
    for jb in 0..n {
        let b = state.node_x(jb);
        if b + wave.length > state.front() + slack {
            break;
        }
        let last = (((b + wave.length) - state.left()) / dx + 1e-9).floor() as usize;
        let ok = (jb.max(1)..=last.min(n - 1)).all(|k| {
            let x = state.node_x(k);
            state.v[k] >= wave.sample(x - b) + margin
        });
        if ok {
            return Some(b);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::solve_compact_wave;
    use crate::solver::{init_state, ProblemSpec};

    // Direct evaluation at 30 digits (mpmath) of the four bounds and of the
    // node minimum of psi_{2 h0} on the 2048-node table, h0 = 1, c = 0.5, mu = 1, K = 1.
    const DRIFT: f64 = 0.176_776_695_296_636_9;
    const BOUNDS: [f64; 4] = [
        0.900_316_316_157_106_1,
        0.003_237_778_114_996_995,
        1.0,
        0.191_978_751_752_845_18,
    ];
    const EPS: f64 = 0.003_205_400_333_847_025;
    const C_VAN_H1: f64 = 1.675_816_103_347_508_9e-9;
    const C_VAN_H2: f64 = 1.296_226_029_798_120_8e-16;

    #[test]
    fn majorant_matches_formula_oracle() {
        let m = vanishing_majorant(1.0, 0.5, 1.0, 1.0);
        assert!((m.drift_constant - DRIFT).abs() < 1e-15);
        for (a, b) in m.bounds.iter().zip(BOUNDS) {
            assert!((a - b).abs() < 1e-14 * b.max(1e-3), "{a} vs {b}");
        }
        assert!((m.eps - EPS).abs() < 1e-16);
        assert_eq!(m.psi.values()[0], 0.0);
        assert_eq!(*m.psi.values().last().unwrap(), 0.0);
        assert_eq!(m.eval(1.0), 0.0);
    }

    #[test]
    fn vanishing_constant_matches_oracle() {
        let a = vanishing_constant(1.0, 0.5, 1.0, 1.0);
        let b = vanishing_constant(2.0, 0.5, 1.0, 1.0);
        assert!(a > 0.0 && b > 0.0);
        assert!((a - C_VAN_H1).abs() < 1e-12 * C_VAN_H1, "{a}");
        assert!((b - C_VAN_H2).abs() < 1e-10 * C_VAN_H2, "{b}");
    }

    fn wave() -> CompactWave {
        solve_compact_wave(0.18, 1.0, 1e-10).unwrap()
    }

    #[test]
    fn dominating_data_is_certified() {
        let w = wave();
        let maxv = w.max_value();
        let spec = ProblemSpec::logistic(0.18, 1.0, w.length).unwrap();
        let data = InitialData::compact_wave(&w, w.length, 0.0, 1.2);
        let s = init_state(&spec, &data, 400).unwrap();
        assert_eq!(spreading_certificate(&s, &wave(), 1e-6 * maxv), Some(0.0));
    }

    #[test]
    fn exact_wave_is_not_strictly_dominated() {
        let w = wave();
        let spec = ProblemSpec::logistic(0.18, 1.0, w.length).unwrap();
        let s = init_state(
            &spec,
            &InitialData::compact_wave(&w, w.length, 0.0, 1.0),
            400,
        )
        .unwrap();
        assert_eq!(spreading_certificate(&s, &w, 1e-6 * w.max_value()), None);
        let low = init_state(
            &spec,
            &InitialData::sine(w.length, 0.5 * w.max_value()),
            400,
        )
        .unwrap();
        assert_eq!(spreading_certificate(&low, &w, 0.0), None);
    }
}
