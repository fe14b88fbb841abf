//! Independent explicit integrator used to cross-check [`simulate`](super::simulate).
//!
//! Forward Euler for everything, first-order boundary flux `-v[N-1] / dy`,
//! and `dt = 0.4 (H dy)^2`.

use super::record::Recorder;
use super::{Controls, FrontFixedState, InitialData, ProblemSpec, TerminalEvent, Trace};
use crate::error::{Error, Result};

fn reference_flux(v: &[f64]) -> f64 {
    let n = v.len() - 1;
    -v[n - 1] * n as f64
}

#[allow(clippy::needless_range_loop)]
pub fn reference_simulate(
    spec: &ProblemSpec,
    data: &InitialData,
    controls: &Controls,
) -> Result<Trace> {
    controls.validate()?;
    spec.validate()?;
    let n = controls.n;
    if (data.h0() - spec.h0).abs() > 1e-12 * spec.h0 {
        return Err(Error::InvalidData(vec![format!(
            "data length {} differs from h0 = {}",
            data.h0(),
            spec.h0
        )]));
    }
    let mut v = data.check(n)?.values;
    v[0] = 0.0;
    v[n] = 0.0;
    let (c, mu) = (spec.c, spec.mu);
    let dy = 1.0 / n as f64;
    let k = spec.f.lipschitz_cap(v.iter().copied().fold(1.0, f64::max));
    let floor = controls.floor(spec.h0);

    let mut state = FrontFixedState {
        t: 0.0,
        c,
        width: spec.h0,
        width_rate: -mu * reference_flux(&v) / spec.h0 - c,
        v,
    };
    let mut rec = Recorder::new(controls, &state, reference_flux(&state.v));
    let mut next = state.v.clone();
    let mut steps = 0;

    let terminal = loop {
        if state.width <= floor {
            break TerminalEvent::FloorHit { t: state.t };
        }
        if state.t >= controls.t_max {
            break TerminalEvent::HorizonReached;
        }
        let h = state.width;
        let rate = state.width_rate;
        let speed = c.max((c + rate).abs());
        let base = (0.4 * (h * dy).powi(2))
            .min(0.4 * dy * h / speed)
            .min(0.1 / k)
            .min(controls.dt.nominal());
        let mut dt = base;
        while dt > base / 256.0 && h + dt * rate < floor {
            dt *= 0.5;
        }
        let stop = rec.next_stop(state.t, controls.t_max);
        let landing = stop - state.t <= dt * (1.0 + 1e-9);
        if landing {
            dt = stop - state.t;
        }

        let d = 1.0 / (h * h * dy * dy);
        let mut bad = None;
        for j in 1..n {
            let a = (c + j as f64 * dy * rate) / h;
            let (vm, v0, vp) = (state.v[j - 1], state.v[j], state.v[j + 1]);
            let x =
                v0 + dt * (d * (vp - 2.0 * v0 + vm) + a * (vp - vm) * 0.5 / dy + spec.f.eval(v0));
            if !x.is_finite() || x < -1e-8 {
                bad = Some(format!("value {x} at node {j}"));
                break;
            }
            next[j] = x.max(0.0);
        }
        if let Some(reason) = bad {
            break TerminalEvent::StepFailure { t: state.t, reason };
        }
        next[0] = 0.0;
        next[n] = 0.0;
        std::mem::swap(&mut state.v, &mut next);
        state.width = h + dt * rate;
        state.t = if landing { stop } else { state.t + dt };
        if !(state.width > 0.0) {
            state.width = state.width.max(0.0);
            break TerminalEvent::FloorHit { t: state.t };
        }
        let flux = reference_flux(&state.v);
        state.width_rate = -mu * flux / state.width - c;
        steps += 1;
        rec.push(&state, flux);
    };
    Ok(rec.finish(terminal, state, steps))
}
