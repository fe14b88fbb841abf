//! Adaptive Dormand-Prince 5(4) integrator for planar systems.
//!
//! Every accepted step keeps its continuous extension, so the returned
//! [`Trajectory`] can be evaluated anywhere in its span. Terminal events
//! (a component crossing a level) are located by re-stepping from the start
//! of the bracketing step with a shortened step, which keeps the located
//! state at full local accuracy instead of interpolation accuracy.

use crate::error::{Error, Result};

pub type State = [f64; 2];

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub first_step: Option<f64>,
    pub max_step: f64,
    pub max_steps: usize,
}

impl IvpOptions {
    /// Tolerance-driven defaults: `rtol = tol`, `atol = 1e-3 * tol`.
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: 1e-3 * tol,
            first_step: None,
            max_step: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Rising,
    Falling,
    Either,
}

/// Terminal event: component `component` of the state crosses `level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub component: usize,
    pub level: f64,
    pub direction: Direction,
}

impl Event {
    pub fn falling(component: usize, level: f64) -> Self {
        Self {
            component,
            level,
            direction: Direction::Falling,
        }
    }

    pub fn rising(component: usize, level: f64) -> Self {
        Self {
            component,
            level,
            direction: Direction::Rising,
        }
    }

    fn value(&self, y: &State) -> f64 {
        y[self.component] - self.level
    }

    fn triggered(&self, before: f64, after: f64) -> bool {
        match self.direction {
            Direction::Falling => before > 0.0 && after <= 0.0,
            Direction::Rising => before < 0.0 && after >= 0.0,
            Direction::Either => (before > 0.0 && after <= 0.0) || (before < 0.0 && after >= 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventHit {
    /// Index into the event list passed to [`integrate_ivp`].
    pub index: usize,
    pub t: f64,
    pub y: State,
}

#[derive(Debug, Clone, Copy)]
struct DenseStep {
    t: f64,
    h: f64,
    r: [State; 5],
}

impl DenseStep {
    fn eval(&self, t: f64) -> State {
        let theta = (t - self.t) / self.h;
        let theta1 = 1.0 - theta;
        let mut out = [0.0; 2];
        for (i, o) in out.iter_mut().enumerate() {
            let r = &self.r;
            *o = r[0][i]
                + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
        }
        out
    }
}

/// Dense-output solution of an initial value problem.
#[derive(Debug, Clone)]
pub struct Trajectory {
    t0: f64,
    y0: State,
    steps: Vec<DenseStep>,
    t_end: f64,
    y_end: State,
    pub event: Option<EventHit>,
}

impl Trajectory {
    pub fn start(&self) -> (f64, State) {
        (self.t0, self.y0)
    }

    /// Final time and state (the event location when an event fired).
    pub fn end(&self) -> (f64, State) {
        (self.t_end, self.y_end)
    }

    pub fn steps(&self) -> usize {
        self.steps.len()
    }

    /// Evaluates the continuous extension; `t` is clamped to the span.
    pub fn eval(&self, t: f64) -> State {
        let (lo, hi) = if self.t_end >= self.t0 {
            (self.t0, self.t_end)
        } else {
            (self.t_end, self.t0)
        };
        let t = t.clamp(lo, hi);
        if t == self.t_end {
            return self.y_end;
        }
        if self.steps.is_empty() {
            return self.y0;
        }
        let forward = self.t_end >= self.t0;
        let idx = self.steps.partition_point(|s| {
            if forward {
                s.t + s.h <= t
            } else {
                s.t + s.h >= t
            }
        });
        let step = &self.steps[idx.min(self.steps.len() - 1)];
        step.eval(t)
    }
}

#[derive(Clone, Copy)]
struct StepResult {
    y: State,
    k7: State,
    err: f64,
    r: [State; 5],
}

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (coef, k) in terms {
        out[0] += h * coef * k[0];
        out[1] += h * coef * k[1];
    }
    out
}

fn dp_step<F>(field: &F, t: f64, y: &State, k1: &State, h: f64, opts: &IvpOptions) -> StepResult
where
    F: Fn(f64, &State) -> State,
{
    let k2 = field(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = field(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = field(
        t + C4 * h,
        &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
    );
    let k5 = field(
        t + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = field(
        t + h,
        &axpy(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    );
    let y_new = axpy(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = field(t + h, &y_new);

    let mut err = 0.0_f64;
    let mut r = [[0.0; 2]; 5];
    for i in 0..2 {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
        err += (e / scale).powi(2);

        let dy = y_new[i] - y[i];
        let bspl = h * k1[i] - dy;
        r[0][i] = y[i];
        r[1][i] = dy;
        r[2][i] = bspl;
        r[3][i] = dy - h * k7[i] - bspl;
        r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    StepResult {
        y: y_new,
        k7,
        err: (err / 2.0).sqrt(),
        r,
    }
}

fn initial_step<F>(field: &F, t: f64, y: &State, f0: &State, dir: f64, opts: &IvpOptions) -> f64
where
    F: Fn(f64, &State) -> State,
{
    let sc = |i: usize| opts.atol + opts.rtol * y[i].abs();
    let d0 = ((y[0] / sc(0)).powi(2) + (y[1] / sc(1)).powi(2)).sqrt() / 2f64.sqrt();
    let d1 = ((f0[0] / sc(0)).powi(2) + (f0[1] / sc(1)).powi(2)).sqrt() / 2f64.sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = axpy(y, dir * h0, &[(1.0, f0)]);
    let f1 = field(t + dir * h0, &y1);
    let d2 = (((f1[0] - f0[0]) / sc(0)).powi(2) + ((f1[1] - f0[1]) / sc(1)).powi(2)).sqrt()
        / 2f64.sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(opts.max_step)
}

/// Integrates `y' = field(t, y)` from `(t0, y0)` towards `t_end`.
///
/// Stops at `t_end` or at the first triggered event, whichever comes first.
/// An event is located so that its component lies within `opts.atol` of the
/// level (or the bracketing interval has collapsed to round-off).
pub fn integrate_ivp<F>(
    field: F,
    t0: f64,
    y0: State,
    t_end: f64,
    opts: &IvpOptions,
    events: &[Event],
) -> Result<Trajectory>
where
    F: Fn(f64, &State) -> State,
{
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: opts.rtol.min(opts.atol),
            reason: "tolerances must be positive".into(),
        });
    }
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut traj = Trajectory {
        t0,
        y0,
        steps: Vec::new(),
        t_end: t0,
        y_end: y0,
        event: None,
    };
    if t_end == t0 {
        return Ok(traj);
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = field(t, &y);
    let mut h = opts
        .first_step
        .unwrap_or_else(|| initial_step(&field, t, &y, &k1, dir, opts))
        .abs()
        .min(opts.max_step);
    let mut last_rejected = false;

    for _ in 0..opts.max_steps {
        let remaining = (t_end - t).abs();
        if remaining <= 1e-15 * t.abs().max(1.0) {
            break;
        }
        let h_try = h.min(remaining);
        if h_try < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Integration {
                t,
                state: y,
                reason: "step size underflow".into(),
            });
        }
        let step = dp_step(&field, t, &y, &k1, dir * h_try, opts);
        if !step.y[0].is_finite() || !step.y[1].is_finite() || !step.err.is_finite() {
            h = 0.25 * h_try;
            last_rejected = true;
            continue;
        }
        if step.err > 1.0 {
            let fac = (0.9 * step.err.powf(-0.2)).max(0.2);
            h = h_try * fac;
            last_rejected = true;
            continue;
        }

        let t_new = if h_try == remaining {
            t_end
        } else {
            t + dir * h_try
        };

        for (index, ev) in events.iter().enumerate() {
            let before = ev.value(&y);
            let after = ev.value(&step.y);
            if ev.triggered(before, after) {
                let (te, ye) = locate_event(&field, t, &y, &k1, dir * h_try, ev, opts);
                traj.steps.push(DenseStep {
                    t,
                    h: te - t,
                    r: dp_step(&field, t, &y, &k1, te - t, opts).r,
                });
                traj.t_end = te;
                traj.y_end = ye;
                traj.event = Some(EventHit {
                    index,
                    t: te,
                    y: ye,
                });
                return Ok(traj);
            }
        }

        traj.steps.push(DenseStep {
            t,
            h: t_new - t,
            r: step.r,
        });
        t = t_new;
        y = step.y;
        k1 = step.k7;

        let mut fac = if step.err == 0.0 {
            5.0
        } else {
            0.9 * step.err.powf(-0.2)
        };
        fac = fac.clamp(0.2, 5.0);
        if last_rejected {
            fac = fac.min(1.0);
        }
        last_rejected = false;
        h = (h_try * fac).min(opts.max_step);
    }

    if (t_end - t).abs() > 1e-15 * t.abs().max(1.0) {
        return Err(Error::Integration {
            t,
            state: y,
            reason: format!("step budget of {} exhausted", opts.max_steps),
        });
    }
    traj.t_end = t;
    traj.y_end = y;
    Ok(traj)
}

/// Finds the event time inside `[t, t + h]` by Illinois-modified regula falsi
/// on the step fraction, re-stepping from `(t, y)` at each trial.
fn locate_event<F>(
    field: &F,
    t: f64,
    y: &State,
    k1: &State,
    h: f64,
    ev: &Event,
    opts: &IvpOptions,
) -> (f64, State)
where
    F: Fn(f64, &State) -> State,
{
    let g = |frac: f64| -> (f64, State) {
        let s = dp_step(field, t, y, k1, frac * h, opts);
        (ev.value(&s.y), s.y)
    };
    let (mut a, mut ga) = (0.0_f64, ev.value(y));
    let (mut b, (mut gb, yb)) = (1.0_f64, g(1.0));
    let mut best = (b, gb, yb);
    let mut side = 0i8;
    for _ in 0..200 {
        if best.1.abs() <= 0.5 * opts.atol || (b - a).abs() <= 1e-15 {
            break;
        }
        let mut m = (a * gb - b * ga) / (gb - ga);
        if !(m > a && m < b) {
            m = 0.5 * (a + b);
        }
        let (gm, ym) = g(m);
        if gm.abs() < best.1.abs() {
            best = (m, gm, ym);
        }
        if (gm > 0.0) == (gb > 0.0) {
            b = m;
            gb = gm;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = m;
            ga = gm;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    let (frac, _, ye) = best;
    (t + frac * h, ye)
}
