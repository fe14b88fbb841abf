//! Sharp threshold in the amplitude `sigma` of data `sigma phi`, and sweeps.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::dynamics::{transition_distance, Budget, Classifier, Outcome};
use crate::error::{Error, Result};
use crate::solver::{simulate, InitialData, ProblemSpec, TerminalEvent};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOptions {
    /// Stop once `(hi - lo) / hi` of the certified bracket is this small.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Doublings of the upper end before giving up on a spreading verdict.
    pub max_expansions: u32,
    /// Largest amplitude ever probed.
    pub cap: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-2,
            max_iter: 20,
            max_expansions: 10,
            cap: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    /// Largest amplitude with a vanishing verdict.
    pub sigma_lo: f64,
    /// Smallest amplitude with a spreading verdict; infinite if none was found.
    pub sigma_hi: f64,
    /// Bisection steps taken.
    pub iterations: usize,
    pub verdicts: Vec<(f64, Outcome)>,
    pub infinite_flag: bool,
    /// Inner bracket refined by undetermined probes, when any occurred.
    pub soft_bracket: Option<(f64, f64)>,
    pub c_star: f64,
    /// `L_c`, when the compact wave exists.
    pub wave_length: Option<f64>,
}

impl ThresholdResult {
    pub fn is_finite(&self) -> bool {
        self.sigma_hi.is_finite()
    }

    pub fn relative_width(&self) -> f64 {
        (self.sigma_hi - self.sigma_lo) / self.sigma_hi
    }

    /// `sigma,outcome,value` rows in probe order.
    pub fn verdicts_csv(&self) -> String {
        let mut out = String::from("sigma,outcome,value\n");
        for (s, o) in &self.verdicts {
            let _ = writeln!(out, "{s},{},{}", o.tag(), o.value());
        }
        out
    }
}

fn check_order(verdicts: &[(f64, Outcome)]) -> Result<()> {
    let lowest_spread = verdicts
        .iter()
        .filter(|(_, o)| o.is_spreading())
        .map(|&(s, _)| s)
        .fold(f64::INFINITY, f64::min);
    let highest_vanish = verdicts
        .iter()
        .filter(|(_, o)| o.is_vanishing())
        .map(|&(s, _)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    if lowest_spread < highest_vanish {
        return Err(Error::NonMonotone {
            spreading: lowest_spread,
            vanishing: highest_vanish,
        });
    }
    Ok(())
}

pub fn find_threshold(
    spec: &ProblemSpec,
    phi: &InitialData,
    sigma_range: (f64, f64),
    budget: &Budget,
    max_iter: usize,
) -> Result<ThresholdResult> {
    let classifier = Classifier::new(spec.c, spec.mu, budget.clone())?;
    let opts = ThresholdOptions {
        max_iter,
        ..ThresholdOptions::default()
    };
    find_threshold_with(&classifier, spec, phi, sigma_range, &opts)
}

/// Bisection on verdicts: vanishing moves the lower end, spreading the upper.
///
/// Undetermined or transition verdicts leave the certified bracket alone and
/// shrink a soft inner bracket, taking the side given by the width trend.
pub fn find_threshold_with(
    classifier: &Classifier,
    spec: &ProblemSpec,
    phi: &InitialData,
    (lo, hi): (f64, f64),
    opts: &ThresholdOptions,
) -> Result<ThresholdResult> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Range(format!("need 0 < lo < hi, got ({lo}, {hi})")));
    }
    if hi > opts.cap {
        return Err(Error::Range(format!(
            "upper end {hi} exceeds the cap {}",
            opts.cap
        )));
    }
    let mut verdicts: Vec<(f64, Outcome)> = Vec::new();
    let mut probe = |sigma: f64| -> Result<Outcome> {
        let outcome = classifier.classify(spec, &phi.scaled(sigma))?.outcome;
        log::info!("sigma = {sigma}: {outcome}");
        verdicts.push((sigma, outcome.clone()));
        check_order(&verdicts)?;
        Ok(outcome)
    };

    if !probe(lo)?.is_vanishing() {
        return Err(Error::Range(format!(
            "no vanishing verdict at the lower end sigma = {lo}"
        )));
    }
    let c_star = classifier.c_star();
    let wave_length = classifier.wave.as_ref().map(|w| w.length);
    let mut cert_lo = lo;

    if classifier.wave.is_none() {
        // c >= c*: collapse is expected for every amplitude.
        let top = probe(hi)?;
        if top.is_vanishing() {
            cert_lo = hi;
        }
        return Ok(ThresholdResult {
            sigma_lo: cert_lo,
            sigma_hi: f64::INFINITY,
            iterations: 0,
            infinite_flag: verdicts.iter().all(|(_, o)| o.is_vanishing()),
            verdicts,
            soft_bracket: None,
            c_star,
            wave_length,
        });
    }

    let mut top = hi;
    let mut expansions = 0;
    let cert_hi = loop {
        let o = probe(top)?;
        if o.is_spreading() {
            break top;
        }
        if o.is_vanishing() {
            cert_lo = top;
        }
        if expansions == opts.max_expansions {
            let infinite_flag = verdicts.iter().all(|(_, o)| o.is_vanishing());
            return Ok(ThresholdResult {
                sigma_lo: cert_lo,
                sigma_hi: f64::INFINITY,
                iterations: 0,
                verdicts,
                infinite_flag,
                soft_bracket: None,
                c_star,
                wave_length,
            });
        }
        top *= 2.0;
        expansions += 1;
        if top > opts.cap {
            return Err(Error::Range(format!(
                "no spreading verdict below the cap {}",
                opts.cap
            )));
        }
    };

    let mut cert_hi = cert_hi;
    let (mut work_lo, mut work_hi) = (cert_lo, cert_hi);
    let mut soft = false;
    let mut iterations = 0;
    while iterations < opts.max_iter && (cert_hi - cert_lo) / cert_hi > opts.rel_tol {
        let mid = 0.5 * (work_lo + work_hi);
        iterations += 1;
        match probe(mid)? {
            Outcome::Vanishing { .. } => {
                cert_lo = mid;
                work_lo = mid;
            }
            Outcome::Spreading { .. } => {
                cert_hi = mid;
                work_hi = mid;
            }
            Outcome::Undetermined(d) => {
                soft = true;
                if d.trend >= 0.0 {
                    work_hi = mid;
                } else {
                    work_lo = mid;
                }
            }
            Outcome::Transition { width, .. } => {
                soft = true;
                if width >= wave_length.unwrap_or(f64::INFINITY) {
                    work_hi = mid;
                } else {
                    work_lo = mid;
                }
            }
        }
    }
    Ok(ThresholdResult {
        sigma_lo: cert_lo,
        sigma_hi: cert_hi,
        iterations,
        verdicts,
        infinite_flag: false,
        soft_bracket: soft.then_some((work_lo, work_hi)),
        c_star,
        wave_length,
    })
}

/// A run at the bracket midpoint with a longer horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    /// `None` when no finite threshold is available.
    pub sigma: Option<f64>,
    pub t_end: f64,
    pub final_width: f64,
    /// `|H(T_end) - L_c| / L_c`.
    pub relative_gap: f64,
    /// `(t, transition distance)` at each snapshot.
    pub distances: Vec<(f64, f64)>,
    pub terminal: String,
    pub message: String,
}

impl ProbeReport {
    /// Whether the distance is nonincreasing over the last half of the snapshots, up to `noise`.
    pub fn distance_settles(&self, noise: f64) -> bool {
        let tail = &self.distances[self.distances.len() / 2..];
        tail.windows(2).all(|w| w[1].1 <= w[0].1 + noise)
    }
}

/// Runs `sigma_mid` to `horizon` with `snapshots` evenly spaced snapshots.
pub fn near_threshold_probe(
    spec: &ProblemSpec,
    phi: &InitialData,
    result: &ThresholdResult,
    classifier: &Classifier,
    horizon: f64,
    snapshots: usize,
) -> Result<ProbeReport> {
    let (Some(wave), true) = (classifier.wave.as_ref(), result.is_finite()) else {
        return Ok(ProbeReport {
            sigma: None,
            t_end: 0.0,
            final_width: f64::NAN,
            relative_gap: f64::NAN,
            distances: Vec::new(),
            terminal: "none".into(),
            message: "no finite threshold: nothing to probe".into(),
        });
    };
    let sigma = 0.5 * (result.sigma_lo + result.sigma_hi);
    let mut controls = classifier.budget.controls();
    controls.t_max = horizon;
    controls.snapshot_times = (1..=snapshots)
        .map(|k| horizon * k as f64 / snapshots as f64)
        .collect();
    let trace = simulate(spec, &phi.scaled(sigma), &controls)?;
    let distances = trace
        .snapshots
        .iter()
        .map(|s| (s.t, transition_distance(s, wave)))
        .collect();
    let final_width = trace.final_state.width;
    let message = match &trace.terminal {
        TerminalEvent::HorizonReached => "horizon reached".to_string(),
        other => format!("run ended early: {}", other.tag()),
    };
    Ok(ProbeReport {
        sigma: Some(sigma),
        t_end: trace.end_time(),
        final_width,
        relative_gap: (final_width - wave.length).abs() / wave.length,
        distances,
        terminal: trace.terminal.tag().into(),
        message,
    })
}

/// Cells of a `(c, mu, sigma)` phase diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub c: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub c: f64,
    pub mu: f64,
    pub sigma: f64,
    /// Verdict, or the error message of a failed cell.
    pub outcome: std::result::Result<Outcome, String>,
    pub certificate: String,
}

/// Classifies every cell; `phi` is scaled by `sigma` and `h0` is taken from `phi`.
pub fn sweep(
    grid: &SweepGrid,
    phi: &InitialData,
    budget: &Budget,
    workers: usize,
) -> Result<Vec<SweepRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Inconsistent(format!("worker pool: {e}")))?;
    let pairs: Vec<(f64, f64)> = grid
        .c
        .iter()
        .flat_map(|&c| grid.mu.iter().map(move |&mu| (c, mu)))
        .collect();
    let rows = pool.install(|| {
        pairs
            .par_iter()
            .flat_map_iter(|&(c, mu)| {
                let classifier = Classifier::new(c, mu, budget.clone());
                let spec = ProblemSpec::logistic(c, mu, phi.h0());
                grid.sigma
                    .iter()
                    .map(move |&sigma| {
                        let res = match (&classifier, &spec) {
                            (Ok(cl), Ok(sp)) => cl
                                .classify(sp, &phi.scaled(sigma))
                                .map_err(|e| e.to_string()),
                            (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
                        };
                        match res {
                            Ok(cls) => SweepRow {
                                c,
                                mu,
                                sigma,
                                certificate: cls
                                    .primary_certificate()
                                    .map_or_else(|| "none".into(), |c| c.label()),
                                outcome: Ok(cls.outcome),
                            },
                            Err(msg) => SweepRow {
                                c,
                                mu,
                                sigma,
                                outcome: Err(msg),
                                certificate: "none".into(),
                            },
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    });
    Ok(rows)
}

/// `c,mu,sigma,outcome,value,certificate` rows.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("c,mu,sigma,outcome,value,certificate\n");
    for r in rows {
        let (tag, value) = match &r.outcome {
            Ok(o) => (o.tag().to_string(), o.value().to_string()),
            Err(msg) => (
                format!("error: {}", msg.replace([',', '\n'], ";")),
                "NaN".to_string(),
            ),
        };
        let _ = writeln!(
            out,
            "{},{},{},{tag},{value},{}",
            r.c,
            r.mu,
            r.sigma,
            r.certificate.replace(',', ";")
        );
    }
    out
}

/// `(c, mu, spreading sigma, vanishing sigma)` for every order inversion along sigma.
pub fn sweep_inversions(rows: &[SweepRow]) -> Vec<(f64, f64, f64, f64)> {
    let mut out = Vec::new();
    for a in rows {
        for b in rows {
            if a.c == b.c && a.mu == b.mu && a.sigma < b.sigma {
                if let (Ok(oa), Ok(ob)) = (&a.outcome, &b.outcome) {
                    if oa.is_spreading() && ob.is_vanishing() {
                        out.push((a.c, a.mu, a.sigma, b.sigma));
                    }
                }
            }
        }
    }
    out
}
