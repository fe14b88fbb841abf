use super::record::Recorder;
use super::{
    default_floor, Controls, DtPolicy, FrontFixedState, InitialData, ProblemSpec, TerminalEvent,
    Trace,
};
use crate::error::{Error, Result};
use crate::tridiag::solve_tridiagonal;

/// Extra forcing for manufactured-solution checks:
/// `v_t = ... + pde(t, y)` and `H' = ... + width(t)`.
pub trait Source {
    fn pde(&self, t: f64, y: f64) -> f64;
    fn width(&self, t: f64) -> f64;
}

/// Samples the data onto `N + 1` front-fixed nodes with `H = h0`, `t = 0`.
pub fn init_state(spec: &ProblemSpec, data: &InitialData, n: usize) -> Result<FrontFixedState> {
    spec.validate()?;
    if n < 16 {
        return Err(Error::InvalidParameter {
            name: "N",
            value: n as f64,
            reason: "need at least 16 intervals".into(),
        });
    }
    if (data.h0() - spec.h0).abs() > 1e-12 * spec.h0 {
        return Err(Error::InvalidData(vec![format!(
            "data is defined on [0, {}] but h0 = {}",
            data.h0(),
            spec.h0
        )]));
    }
    let sampled = data.check(n)?;
    if !sampled.in_x_class {
        log::warn!(
            "initial data `{}` fails the sign conditions of the admissible class",
            data.label()
        );
    }
    let mut v = sampled.values;
    v[0] = 0.0;
    v[n] = 0.0;
    let flux = flux_of(&v);
    Ok(FrontFixedState {
        t: 0.0,
        c: spec.c,
        width: spec.h0,
        width_rate: -spec.mu * flux / spec.h0 - spec.c,
        v,
    })
}

/// `v_y(t, 1)` by the second-order one-sided stencil `(v[N-2] - 4 v[N-1]) / (2 dy)`.
pub fn boundary_flux(state: &FrontFixedState) -> f64 {
    flux_of(&state.v)
}

fn flux_of(v: &[f64]) -> f64 {
    let n = v.len() - 1;
    (v[n - 2] - 4.0 * v[n - 1]) * n as f64 * 0.5
}

pub fn step(state: &FrontFixedState, spec: &ProblemSpec, dt: f64) -> Result<FrontFixedState> {
    advance(state, spec, dt, None)
}

pub fn step_with_source(
    state: &FrontFixedState,
    spec: &ProblemSpec,
    dt: f64,
    source: &dyn Source,
) -> Result<FrontFixedState> {
    advance(state, spec, dt, Some(source))
}

/// One step: H predicted explicitly, then diffusion and advection implicit at
/// the predicted width, reaction explicit, and a trapezoidal correction of H.
fn advance(
    state: &FrontFixedState,
    spec: &ProblemSpec,
    dt: f64,
    source: Option<&dyn Source>,
) -> Result<FrontFixedState> {
    let fail = |reason: String| Error::StepFailure { t: state.t, reason };
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(fail(format!("invalid dt = {dt}")));
    }
    let (c, mu) = (spec.c, spec.mu);
    let n = state.n();
    let dy = 1.0 / n as f64;
    let t_new = state.t + dt;
    let extra_h = |t: f64| source.map_or(0.0, |s| s.width(t));

    let rate_old = extra_h(state.t) - mu * flux_of(&state.v) / state.width - c;
    let h_star = state.width + dt * rate_old;
    if !(h_star > 0.0) {
        return Err(fail(format!("predicted width {h_star} is not positive")));
    }

    let m = n - 1;
    let diff = dt / (h_star * h_star * dy * dy);
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let mut scratch = vec![0.0; m];
    for i in 0..m {
        let j = i + 1;
        let y = j as f64 * dy;
        let adv = dt * (c + y * rate_old) / (h_star * 2.0 * dy);
        lower[i] = -diff + adv;
        diag[i] = 1.0 + 2.0 * diff;
        upper[i] = -diff - adv;
        let vj = state.v[j];
        rhs[i] = vj + dt * (spec.f.eval(vj) + source.map_or(0.0, |s| s.pde(t_new, y)));
    }
    if !solve_tridiagonal(&lower, &diag, &upper, &mut rhs, &mut scratch) {
        return Err(fail("tridiagonal solve hit a zero pivot".into()));
    }

    let mut v = Vec::with_capacity(n + 1);
    v.push(0.0);
    for (i, &x) in rhs.iter().enumerate() {
        if !x.is_finite() {
            return Err(fail(format!("non-finite value at node {}", i + 1)));
        }
        if x < -1e-8 {
            return Err(fail(format!("undershoot {x} at node {}", i + 1)));
        }
        v.push(if x < 0.0 && x > -1e-12 { 0.0 } else { x });
    }
    v.push(0.0);

    let flux = flux_of(&v);
    let rate_star = extra_h(t_new) - mu * flux / h_star - c;
    let width = state.width + 0.5 * dt * (rate_old + rate_star);
    if !width.is_finite() {
        return Err(fail("non-finite width".into()));
    }
    let width_rate = extra_h(t_new) - mu * flux / width - c;
    Ok(FrontFixedState {
        t: t_new,
        c,
        width,
        width_rate,
        v,
    })
}

fn stable_dt(state: &FrontFixedState, spec: &ProblemSpec, policy: DtPolicy, k: f64) -> f64 {
    match policy {
        DtPolicy::Fixed(dt) => dt,
        DtPolicy::Adaptive { dt_max } => {
            let speed = spec.c.max((spec.c + state.width_rate).abs());
            dt_max
                .min(0.4 * state.dy() * state.width / speed)
                .min(0.1 / k)
        }
    }
}

/// Steps until `T_max`, the width floor, or a failure.
pub fn simulate(spec: &ProblemSpec, data: &InitialData, controls: &Controls) -> Result<Trace> {
    simulate_observed(spec, data, controls, |_| {})
}

/// As [`simulate`], calling `observer` on the initial and every accepted state.
pub fn simulate_observed(
    spec: &ProblemSpec,
    data: &InitialData,
    controls: &Controls,
    observer: impl FnMut(&FrontFixedState),
) -> Result<Trace> {
    controls.validate()?;
    let state = init_state(spec, data, controls.n)?;
    simulate_from(spec, state, controls, observer)
}

/// Continues from `state` until the absolute time `controls.t_max`.
///
/// `controls.n` is ignored in favour of the state's own grid; the floor
/// default still refers to `spec.h0`.
pub fn simulate_from(
    spec: &ProblemSpec,
    mut state: FrontFixedState,
    controls: &Controls,
    mut observer: impl FnMut(&FrontFixedState),
) -> Result<Trace> {
    controls.validate()?;
    let c1 = state.umax().max(1.0);
    let k = spec.f.lipschitz_cap(c1);
    let floor = controls
        .h_floor
        .unwrap_or_else(|| default_floor(spec.h0, state.n()));
    let mut rec = Recorder::new(controls, &state, boundary_flux(&state));
    observer(&state);
    let mut steps = 0;

    let terminal = loop {
        if state.width <= floor {
            break TerminalEvent::FloorHit { t: state.t };
        }
        if state.t >= controls.t_max {
            break TerminalEvent::HorizonReached;
        }
        let base = stable_dt(&state, spec, controls.dt, k);
        let mut dt = base;
        // Shrink on approach so the floor crossing is resolved to base / 256.
        while dt > base / 256.0 && state.width + dt * state.width_rate < floor {
            dt *= 0.5;
        }
        let stop = rec.next_stop(state.t, controls.t_max);
        let landing = stop - state.t <= dt * (1.0 + 1e-9);
        if landing {
            dt = stop - state.t;
        }
        match advance(&state, spec, dt, None) {
            Ok(mut next) => {
                if landing {
                    next.t = stop;
                }
                state = next;
            }
            Err(Error::StepFailure { t, reason }) => {
                break TerminalEvent::StepFailure { t, reason }
            }
            Err(e) => return Err(e),
        }
        steps += 1;
        rec.push(&state, boundary_flux(&state));
        observer(&state);
    };
    if let TerminalEvent::StepFailure { t, reason } = &terminal {
        log::warn!("step failure at t = {t}: {reason}");
    }
    Ok(rec.finish(terminal, state, steps))
}
