use super::{Controls, FrontFixedState, TerminalEvent, Trace, TraceSample};

/// Thins trace samples and collects snapshots; shared by both integrators.
pub(crate) struct Recorder {
    c: f64,
    every: f64,
    samples: Vec<TraceSample>,
    /// Up to two most recent samples not yet written, oldest first.
    pending: Vec<TraceSample>,
    snapshot_times: Vec<f64>,
    next_snapshot: usize,
    snapshots: Vec<FrontFixedState>,
}

impl Recorder {
    pub fn new(controls: &Controls, first: &FrontFixedState, flux: f64) -> Self {
        let mut snapshot_times: Vec<f64> = controls
            .snapshot_times
            .iter()
            .copied()
            .filter(|&t| t >= 0.0 && t <= controls.t_max)
            .collect();
        snapshot_times.sort_by(f64::total_cmp);
        snapshot_times.dedup();
        let mut rec = Self {
            c: first.c,
            every: controls.record_every,
            samples: Vec::new(),
            pending: Vec::new(),
            snapshot_times,
            next_snapshot: 0,
            snapshots: Vec::new(),
        };
        rec.samples.push(sample(first, flux));
        rec.snapshot(first);
        rec
    }

    /// Next time the integrator must land on exactly.
    pub fn next_stop(&self, t: f64, t_max: f64) -> f64 {
        self.snapshot_times[self.next_snapshot..]
            .iter()
            .copied()
            .find(|&s| s > t)
            .unwrap_or(t_max)
            .min(t_max)
    }

    pub fn push(&mut self, state: &FrontFixedState, flux: f64) {
        let s = sample(state, flux);
        let last = self.samples.last().map_or(f64::NEG_INFINITY, |p| p.t);
        if s.t - last >= self.every * (1.0 - 1e-9) {
            self.pending.clear();
            self.samples.push(s);
        } else {
            if self.pending.len() == 2 {
                self.pending.remove(0);
            }
            self.pending.push(s);
        }
        self.snapshot(state);
    }

    fn snapshot(&mut self, state: &FrontFixedState) {
        while self.next_snapshot < self.snapshot_times.len()
            && self.snapshot_times[self.next_snapshot] <= state.t + 1e-12
        {
            if (self.snapshot_times[self.next_snapshot] - state.t).abs() <= 1e-9 {
                self.snapshots.push(state.clone());
            }
            self.next_snapshot += 1;
        }
    }

    pub fn finish(
        mut self,
        terminal: TerminalEvent,
        final_state: FrontFixedState,
        steps: usize,
    ) -> Trace {
        // The last two steps are always kept so collapse times can be extrapolated.
        self.samples.append(&mut self.pending);
        Trace {
            c: self.c,
            samples: self.samples,
            snapshots: self.snapshots,
            terminal,
            final_state,
            steps,
        }
    }
}

fn sample(state: &FrontFixedState, flux: f64) -> TraceSample {
    TraceSample {
        t: state.t,
        width: state.width,
        front: state.front(),
        umax: state.umax(),
        flux,
        width_rate: state.width_rate,
    }
}
