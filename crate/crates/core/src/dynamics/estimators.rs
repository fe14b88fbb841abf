use crate::error::{Error, Result};
use crate::interp::Profile;
use crate::profiles::CompactWave;
use crate::solver::{BoundMonitor, FrontFixedState, TerminalEvent, Trace, Violation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedEstimate {
    /// Least-squares slope of `h(t)`.
    pub speed: f64,
    /// `max (h(t) - speed t)` over the window.
    pub max_offset: f64,
    pub samples: usize,
}

/// Fits `h(t)` over `[window T_end, T_end]`.
pub fn estimate_speed(trace: &Trace, window: f64) -> Result<SpeedEstimate> {
    let t_end = trace.end_time();
    estimate_speed_over(trace, window * t_end, t_end)
}

pub fn estimate_speed_over(trace: &Trace, t0: f64, t1: f64) -> Result<SpeedEstimate> {
    let pts: Vec<(f64, f64)> = trace
        .samples
        .iter()
        .filter(|s| s.t >= t0 && s.t <= t1)
        .map(|s| (s.t, s.front))
        .collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientSamples {
            needed: 10,
            found: pts.len(),
        });
    }
    let k = pts.len() as f64;
    let (mt, mh) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(t, h)| (a + t / k, b + h / k));
    let (sth, stt) = pts.iter().fold((0.0, 0.0), |(a, b), &(t, h)| {
        (a + (t - mt) * (h - mh), b + (t - mt) * (t - mt))
    });
    let speed = sth / stt;
    let max_offset = pts
        .iter()
        .map(|&(t, h)| h - speed * t)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(SpeedEstimate {
        speed,
        max_offset,
        samples: pts.len(),
    })
}

/// Extrapolates `H` linearly through the last two samples to zero.
pub fn estimate_extinction_time(trace: &Trace) -> Result<f64> {
    let TerminalEvent::FloorHit { t: t_event } = trace.terminal else {
        return Err(Error::WrongTerminalEvent {
            expected: "floor-hit",
            found: trace.terminal.tag().into(),
        });
    };
    let n = trace.samples.len();
    if n < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            found: n,
        });
    }
    let (a, b) = (&trace.samples[n - 2], &trace.samples[n - 1]);
    let t = if a.width > b.width {
        b.t + b.width * (b.t - a.t) / (a.width - b.width)
    } else {
        b.t
    };
    Ok(t.max(t_event))
}

/// `max |u(t, x) - V_c(x - h(t) + L_c)|` over the nodes.
pub fn transition_distance(state: &FrontFixedState, wave: &CompactWave) -> f64 {
    let shift = state.front() - wave.length;
    (0..=state.n())
        .map(|j| {
            let x = state.node_x(j);
            (state.v[j] - wave.sample(x - shift)).abs()
        })
        .fold(0.0, f64::max)
}

/// Default noise floor of [`sign_changes`].
pub const SIGN_NOISE: f64 = 1e-9;

/// Sign alternations of `u(t, x) - reference(x - shift)` along the nodes.
pub fn sign_changes(state: &FrontFixedState, reference: &Profile, shift: f64) -> usize {
    sign_changes_with(state, reference, shift, SIGN_NOISE)
}

pub fn sign_changes_with(
    state: &FrontFixedState,
    reference: &Profile,
    shift: f64,
    noise: f64,
) -> usize {
    let mut last = 0.0_f64;
    let mut count = 0;
    for j in 0..=state.n() {
        let d = state.v[j] - reference.sample(state.node_x(j) - shift);
        if d.abs() <= noise {
            continue;
        }
        if last != 0.0 && d.signum() != last {
            count += 1;
        }
        last = d.signum();
    }
    count
}

pub fn bound_monitor(trace: &Trace, bounds: &BoundMonitor) -> Vec<Violation> {
    bounds.check(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{TraceSample, ViolationKind};

    fn trace_of(c: f64, samples: Vec<(f64, f64)>, terminal: TerminalEvent) -> Trace {
        let samples: Vec<TraceSample> = samples
            .into_iter()
            .map(|(t, h)| TraceSample {
                t,
                width: h - c * t,
                front: h,
                umax: 0.5,
                flux: -1.0,
                width_rate: 0.0,
            })
            .collect();
        let final_state = FrontFixedState {
            t: samples.last().unwrap().t,
            c,
            width: samples.last().unwrap().width,
            width_rate: 0.0,
            v: vec![0.0; 17],
        };
        Trace {
            c,
            samples,
            snapshots: vec![],
            terminal,
            final_state,
            steps: 0,
        }
    }

    #[test]
    fn exact_linear_front() {
        let tr = trace_of(
            0.3,
            (0..=100)
                .map(|i| (i as f64, 0.3 * i as f64 + 2.0))
                .collect(),
            TerminalEvent::HorizonReached,
        );
        let est = estimate_speed(&tr, 0.5).unwrap();
        assert!((est.speed - 0.3).abs() < 1e-12);
        assert!((est.max_offset - 2.0).abs() < 1e-9);
    }

    #[test]
    fn oscillating_front() {
        // Closed-form least squares of 1.3 t + sin t on [100, 200] deviates from 1.3 by < 1e-3.
        let tr = trace_of(
            0.5,
            (0..=2000)
                .map(|i| {
                    let t = 0.1 * i as f64;
                    (t, 1.3 * t + t.sin())
                })
                .collect(),
            TerminalEvent::HorizonReached,
        );
        let est = estimate_speed(&tr, 0.5).unwrap();
        assert!((est.speed - 1.3).abs() < 0.01, "{}", est.speed);
    }

    #[test]
    fn too_few_samples() {
        let tr = trace_of(
            0.5,
            (0..5).map(|i| (i as f64, i as f64)).collect(),
            TerminalEvent::HorizonReached,
        );
        assert_eq!(
            estimate_speed(&tr, 0.0).unwrap_err(),
            Error::InsufficientSamples {
                needed: 10,
                found: 5
            }
        );
    }

    #[test]
    fn extinction_needs_floor_hit() {
        let tr = trace_of(
            0.5,
            vec![(0.0, 1.0), (1.0, 1.0)],
            TerminalEvent::HorizonReached,
        );
        assert!(matches!(
            estimate_extinction_time(&tr),
            Err(Error::WrongTerminalEvent { .. })
        ));
        // A flat width cannot be extrapolated; the event time is returned.
        let tr = trace_of(
            0.5,
            vec![(1.8, 0.95), (1.9, 1.0)],
            TerminalEvent::FloorHit { t: 1.9 },
        );
        assert!((estimate_extinction_time(&tr).unwrap() - 1.9).abs() < 1e-12);
        let mut tr = tr;
        tr.samples[0].width = 0.1;
        tr.samples[1].width = 0.05;
        assert!((estimate_extinction_time(&tr).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn counts_alternations() {
        let state = FrontFixedState {
            t: 0.0,
            c: 0.1,
            width: 1.0,
            width_rate: 0.0,
            v: vec![0.0, 0.5, 0.5, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0],
        };
        let zero = Profile::compact(0.0, 1.0, vec![0.0, 0.0]);
        assert_eq!(sign_changes(&state, &zero, 0.0), 0);
        let flat = Profile::new(-1.0, 1.0, vec![0.25; 4], 0.25, 0.25);
        // Differences: -, +, +, -, -, +, +, -, - (ends at u = 0 against 0.25).
        assert_eq!(sign_changes(&state, &flat, 0.0), 4);
        let three = FrontFixedState {
            v: vec![0.0, 0.5, 0.5, 0.1, 0.1, 0.5, 0.5, 0.0, 0.0],
            ..state
        };
        // Reference 0.25 on nodes 1..=6, 0 elsewhere: +, +, -, -, +, + inside.
        let inner = Profile::compact(0.125, 0.125, vec![0.25; 6]);
        assert_eq!(sign_changes(&three, &inner, 0.0), 2);
    }

    #[test]
    fn monitor_flags_injected_violations() {
        let mut tr = trace_of(
            0.5,
            (0..10)
                .map(|i| (i as f64, 1.0 + 0.5 * i as f64 + 0.01 * i as f64))
                .collect(),
            TerminalEvent::HorizonReached,
        );
        let bounds = BoundMonitor::from_constants(0.5, 1.0, 1.0, 1.0, 1.0);
        // The monitor reads h' = -mu v_y(1) / H; mu = 1 here.
        for s in &mut tr.samples {
            s.width_rate = 0.01;
            s.flux = -0.51 * s.width;
        }
        assert!(bound_monitor(&tr, &bounds).is_empty());
        tr.samples[3].flux = 0.1 * tr.samples[3].width;
        let v = bound_monitor(&tr, &bounds);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::FrontRetreat);
        tr.samples[3].flux = -0.51 * tr.samples[3].width;
        tr.samples[5].umax = 2.0;
        let v = bound_monitor(&tr, &bounds);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::SupNorm);
    }
}
