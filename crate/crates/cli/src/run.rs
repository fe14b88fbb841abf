//! Dispatch of a validated config into a run directory.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use kppfront::convergence::{
    manufactured_study, self_convergence, traveling_wave_study, Ladder, Manufactured,
};
use kppfront::dynamics::{estimate_speed, transition_distance, Budget, Classifier, Outcome};
use kppfront::profiles::{elliptic_profile, solve_compact_wave, solve_semi_wave, ProfileMetadata};
use kppfront::solver::{simulate, BoundMonitor, Controls, DtPolicy, InitialData, ProblemSpec};
use kppfront::threshold::{
    find_threshold_with, near_threshold_probe, sweep, sweep_csv, sweep_inversions, SweepGrid,
    ThresholdOptions,
};
use kppfront::Trace;

use crate::config::{Case, Command, ConfigError, Family, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;
pub const EXIT_UNDETERMINED: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Io { .. } => EXIT_COMPUTE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub dir: PathBuf,
    pub status: i32,
    /// `key=value` pairs of the summary file, without the timestamp.
    pub summary: Vec<(String, String)>,
}

type Summary = Vec<(String, String)>;

struct Out<'a> {
    dir: &'a Path,
}

impl Out<'_> {
    fn write(&self, name: &str, body: &str) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|source| RunError::Io { path, source })
    }
}

fn put(s: &mut Summary, key: &str, value: impl ToString) {
    s.push((key.to_string(), value.to_string()));
}

fn dat(header: &str, rows: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut out = format!("# {header}\n");
    for (a, b) in rows {
        let _ = writeln!(out, "{a} {b}");
    }
    out
}

fn spec_of(cfg: &RunConfig) -> kppfront::Result<ProblemSpec> {
    let p = &cfg.problem;
    ProblemSpec::logistic(p.c.unwrap_or(0.0), p.mu.unwrap_or(0.0), p.h0.unwrap_or(0.0))
}

fn dt_policy(cfg: &RunConfig) -> DtPolicy {
    match cfg.numerics.dt_fixed {
        Some(dt) => DtPolicy::Fixed(dt),
        None => DtPolicy::Adaptive {
            dt_max: cfg.numerics.dt_max.unwrap_or(1e-2),
        },
    }
}

fn controls(cfg: &RunConfig) -> Controls {
    let nm = &cfg.numerics;
    let mut c = Controls::new(nm.n, nm.t_max)
        .with_dt(dt_policy(cfg))
        .with_snapshots(nm.snapshot_times.clone())
        .with_record_every(nm.record_every);
    c.h_floor = nm.h_floor;
    c
}

fn budget(cfg: &RunConfig) -> Budget {
    let nm = &cfg.numerics;
    let mut b = Budget::new(nm.t_max, nm.n);
    b.dt = dt_policy(cfg);
    b.h_floor = nm.h_floor;
    b.record_every = nm.record_every;
    b.snapshot_times = nm.snapshot_times.clone();
    b.profile_tol = nm.profile_tol;
    if let Some(o) = &cfg.classify {
        b.tol_trans = o.tol_trans;
        b.margin = o.margin;
        b.poll_every = o.poll_every;
        b.speed_window = o.speed_window;
        b.collapse_extensions = o.collapse_extensions;
    }
    b
}

enum Prepared {
    Data(InitialData),
    Failed(kppfront::Error),
}

/// Builds the initial data and fills `h0` when the data determine it.
fn prepare_data(cfg: &mut RunConfig) -> Result<Prepared, RunError> {
    let d = cfg.data.clone();
    let data = match d.family {
        Family::Sine => InitialData::sine(cfg.problem.h0.unwrap_or(0.0), d.sigma),
        Family::Bump => InitialData::bump(cfg.problem.h0.unwrap_or(0.0), d.sigma),
        Family::CompactWave => {
            let (c, mu) = (cfg.problem.c.unwrap_or(0.0), cfg.problem.mu.unwrap_or(0.0));
            let wave = match solve_compact_wave(c, mu, cfg.numerics.profile_tol) {
                Ok(w) => w,
                Err(e) => return Ok(Prepared::Failed(e)),
            };
            let shift = d.shift.unwrap_or(0.0);
            let h0 = cfg.problem.h0.unwrap_or(shift + wave.length);
            InitialData::compact_wave(&wave, h0, shift, d.sigma)
        }
        Family::Custom => {
            let path = d.path.clone().unwrap_or_default();
            let text = fs::read_to_string(&path).map_err(|source| RunError::Io {
                path: path.clone(),
                source,
            })?;
            let base = match InitialData::from_csv(&text) {
                Ok(b) => b,
                Err(e) => return Ok(Prepared::Failed(e)),
            };
            if let Some(h0) = cfg.problem.h0 {
                if (h0 - base.h0()).abs() > 1e-12 * h0 {
                    return Err(ConfigError {
                        key: "problem.h0".into(),
                        message: format!("{h0} differs from the data support end {}", base.h0()),
                    }
                    .into());
                }
            }
            base.scaled(d.sigma)
        }
    };
    cfg.resolve_h0(data.h0());
    Ok(Prepared::Data(data))
}

/// Runs `cfg` and writes its directory; compute errors are recorded, not returned.
pub fn run(mut cfg: RunConfig) -> Result<RunReport, RunError> {
    cfg.validate()?;
    let uses_data = matches!(
        cfg.command,
        Command::Simulate | Command::Classify | Command::Threshold | Command::Sweep
    ) || (cfg.command == Command::Convergence
        && cfg.convergence.as_ref().map(|c| c.case) == Some(Case::Run));
    let data = if uses_data {
        match prepare_data(&mut cfg)? {
            Prepared::Data(d) => Ok(Some(d)),
            Prepared::Failed(e) => Err(e),
        }
    } else {
        Ok(None)
    };

    let dir = cfg.run_dir();
    fs::create_dir_all(&dir).map_err(|source| RunError::Io {
        path: dir.clone(),
        source,
    })?;
    let out = Out { dir: &dir };
    out.write("config.toml", &cfg.to_toml())?;

    let mut summary: Summary = Vec::new();
    put(&mut summary, "command", cfg.command.as_str());
    let result = data.and_then(|d| dispatch(&cfg, d, &out));
    let status = match result {
        Ok((s, status)) => {
            summary.extend(s?);
            status
        }
        Err(e) => {
            put(&mut summary, "error", e);
            EXIT_COMPUTE
        }
    };
    put(&mut summary, "exit_status", status);

    let mut text = String::new();
    for (k, v) in &summary {
        let _ = writeln!(text, "{k}={}", v.replace('\n', " "));
    }
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let _ = writeln!(text, "timestamp={stamp}");
    out.write("summary.txt", &text)?;
    Ok(RunReport {
        dir,
        status,
        summary,
    })
}

type Dispatched = (Result<Summary, RunError>, i32);

fn dispatch(cfg: &RunConfig, data: Option<InitialData>, out: &Out) -> kppfront::Result<Dispatched> {
    let tol = cfg.numerics.profile_tol;
    let p = &cfg.problem;
    let mut s = Summary::new();
    let mut status = EXIT_OK;
    let files: Result<(), RunError> = match cfg.command {
        Command::Semiwave => {
            let w = solve_semi_wave(p.mu.unwrap_or(0.0), tol)?;
            meta(&mut s, &w);
            out.write("semiwave.csv", &w.profile.to_csv("z,q"))
                .and_then(|_| out.write("semiwave.dat", &dat("z q", w.profile.nodes())))
        }
        Command::Wave => {
            let w = solve_compact_wave(p.c.unwrap_or(0.0), p.mu.unwrap_or(0.0), tol)?;
            meta(&mut s, &w);
            out.write("wave.csv", &w.profile.to_csv("z,V"))
                .and_then(|_| out.write("wave.dat", &dat("z V", w.profile.nodes())))
        }
        Command::Elliptic => {
            let e = cfg.elliptic.clone().unwrap_or_default();
            let w = elliptic_profile(e.drift.unwrap_or(0.0), e.half_length.unwrap_or(0.0), tol)?;
            meta(&mut s, &w);
            out.write("elliptic.csv", &w.profile.to_csv("x,w"))
                .and_then(|_| out.write("elliptic.dat", &dat("x w", w.profile.nodes())))
        }
        Command::Simulate => {
            let data = data.expect("simulate has data");
            let spec = spec_of(cfg)?;
            let trace = simulate(&spec, &data, &controls(cfg))?;
            trace_summary(&mut s, &trace, spec.c);
            let bounds = BoundMonitor::new(&spec, &data, cfg.numerics.n)?;
            put(&mut s, "bound_violations", bounds.check(&trace).len());
            write_trace(out, &trace, spec.c)
        }
        Command::Classify => {
            let data = data.expect("classify has data");
            let spec = spec_of(cfg)?;
            let classifier = Classifier::new(spec.c, spec.mu, budget(cfg))?;
            put(&mut s, "c_star", classifier.c_star());
            let cls = classifier.classify(&spec, &data)?;
            put(&mut s, "outcome", cls.outcome.tag());
            put(&mut s, "outcome_value", cls.outcome.value());
            put(&mut s, "outcome_detail", &cls.outcome);
            let labels: Vec<String> = cls.certificates.iter().map(|c| c.label()).collect();
            put(
                &mut s,
                "certificates",
                if labels.is_empty() {
                    "none".into()
                } else {
                    labels.join(" ")
                },
            );
            if let Some(w) = &classifier.wave {
                let fin = &cls.trace.final_state;
                put(&mut s, "wave_length", w.length);
                put(&mut s, "width_gap", fin.width - w.length);
                put(
                    &mut s,
                    "relative_width_gap",
                    (fin.width - w.length).abs() / w.length,
                );
                put(&mut s, "transition_distance", transition_distance(fin, w));
            }
            trace_summary(&mut s, &cls.trace, spec.c);
            if matches!(cls.outcome, Outcome::Undetermined(_)) {
                status = EXIT_UNDETERMINED;
            }
            write_trace(out, &cls.trace, spec.c)
        }
        Command::Threshold => {
            let phi = data.expect("threshold has data");
            let spec = spec_of(cfg)?;
            let t = cfg.threshold.clone().unwrap_or_default();
            let defaults = ThresholdOptions::default();
            let opts = ThresholdOptions {
                rel_tol: t.rel_tol.unwrap_or(defaults.rel_tol),
                max_iter: t.max_iter.unwrap_or(defaults.max_iter),
                max_expansions: t.max_expansions.unwrap_or(defaults.max_expansions),
                cap: defaults.cap,
            };
            let classifier = Classifier::new(spec.c, spec.mu, budget(cfg))?;
            let range = (t.sigma_lo.unwrap_or(0.0), t.sigma_hi.unwrap_or(0.0));
            let res = find_threshold_with(&classifier, &spec, &phi, range, &opts)?;
            put(&mut s, "c_star", res.c_star);
            put(
                &mut s,
                "wave_length",
                res.wave_length.map_or("none".into(), |l| l.to_string()),
            );
            put(&mut s, "sigma_lo", res.sigma_lo);
            put(&mut s, "sigma_hi", res.sigma_hi);
            put(&mut s, "relative_width", res.relative_width());
            put(&mut s, "iterations", res.iterations);
            put(&mut s, "infinite_flag", res.infinite_flag);
            put(
                &mut s,
                "soft_bracket",
                res.soft_bracket
                    .map_or("none".into(), |(a, b)| format!("{a} {b}")),
            );
            let horizon = t.probe_horizon.unwrap_or(2.0 * cfg.numerics.t_max);
            let probe = near_threshold_probe(
                &spec,
                &phi,
                &res,
                &classifier,
                horizon,
                t.probe_snapshots.unwrap_or(20),
            )?;
            put(
                &mut s,
                "probe_sigma",
                probe.sigma.map_or("none".into(), |x| x.to_string()),
            );
            put(&mut s, "probe_terminal", &probe.terminal);
            put(&mut s, "probe_t_end", probe.t_end);
            put(&mut s, "probe_relative_gap", probe.relative_gap);
            put(&mut s, "probe_message", &probe.message);
            let mut csv = String::from("t,distance\n");
            for (t, d) in &probe.distances {
                let _ = writeln!(csv, "{t},{d}");
            }
            out.write("verdicts.csv", &res.verdicts_csv())
                .and_then(|_| out.write("probe.csv", &csv))
                .and_then(|_| {
                    out.write(
                        "probe_distance.dat",
                        &dat("t distance", probe.distances.iter().copied()),
                    )
                })
        }
        Command::Sweep => {
            let phi = data.expect("sweep has data");
            let sw = cfg.sweep.clone().unwrap_or_default();
            let grid = SweepGrid {
                c: sw.c,
                mu: sw.mu,
                sigma: sw.sigma,
            };
            let rows = sweep(&grid, &phi, &budget(cfg), sw.workers.unwrap_or(1))?;
            put(&mut s, "cells", rows.len());
            put(
                &mut s,
                "failed_cells",
                rows.iter().filter(|r| r.outcome.is_err()).count(),
            );
            put(&mut s, "inversions", sweep_inversions(&rows).len());
            let mut phase = String::from(
                "# c mu sigma code (-1 vanishing, 0 transition or undetermined, 1 spreading)\n",
            );
            for r in &rows {
                let code = match &r.outcome {
                    Ok(o) if o.is_vanishing() => "-1",
                    Ok(o) if o.is_spreading() => "1",
                    Ok(_) => "0",
                    Err(_) => "nan",
                };
                let _ = writeln!(phase, "{} {} {} {code}", r.c, r.mu, r.sigma);
            }
            out.write("sweep.csv", &sweep_csv(&rows))
                .and_then(|_| out.write("phase.dat", &phase))
        }
        Command::Convergence => {
            let conv = cfg.convergence.clone().expect("validated");
            let ladder = Ladder {
                n0: conv.n0,
                dt0: conv.dt0,
                levels: conv.levels,
                t_end: conv.t_end,
            };
            let (c, mu) = (p.c.unwrap_or(0.0), p.mu.unwrap_or(0.0));
            let table = match conv.case {
                Case::TravelingWave => traveling_wave_study(c, mu, &ladder)?,
                Case::Manufactured => manufactured_study(&Manufactured::new(c, mu)?, &ladder)?,
                Case::Run => {
                    let data = data.expect("run case has data");
                    self_convergence("run", &spec_of(cfg)?, &data, &ladder)?
                }
            };
            put(&mut s, "case", &table.case);
            put(&mut s, "width_orders", join(&table.width_orders));
            put(&mut s, "profile_orders", join(&table.profile_orders));
            put(&mut s, "min_width_order", table.min_width_order());
            put(&mut s, "min_profile_order", table.min_profile_order());
            out.write("convergence.csv", &table.to_csv())
        }
    };
    Ok((files.map(|_| s), status))
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

fn meta(s: &mut Summary, p: &dyn ProfileMetadata) {
    for (k, v) in p.metadata() {
        put(s, k, v);
    }
}

/// Speed used for the `h - c_hat t` plot: fitted when possible, else `c`.
fn fitted_speed(trace: &Trace, c: f64) -> f64 {
    estimate_speed(trace, 0.5).map_or(c, |e| e.speed)
}

fn trace_summary(s: &mut Summary, trace: &Trace, c: f64) {
    put(s, "terminal", trace.terminal.tag());
    put(s, "t_end", trace.end_time());
    put(s, "final_width", trace.final_state.width);
    put(s, "final_front", trace.final_state.front());
    put(s, "final_umax", trace.final_state.umax());
    put(s, "steps", trace.steps);
    put(s, "fitted_speed", fitted_speed(trace, c));
}

fn write_trace(out: &Out, trace: &Trace, c: f64) -> Result<(), RunError> {
    out.write("trace.csv", &trace.to_csv())?;
    out.write(
        "width.dat",
        &dat("t H", trace.samples.iter().map(|p| (p.t, p.width))),
    )?;
    let speed = fitted_speed(trace, c);
    out.write(
        "front_offset.dat",
        &dat(
            &format!("t h-c_hat*t (c_hat = {speed})"),
            trace.samples.iter().map(|p| (p.t, p.front - speed * p.t)),
        ),
    )?;
    for (k, snap) in trace.snapshots.iter().enumerate() {
        out.write(&format!("snapshot_{k:03}.csv"), &snap.to_csv())?;
        out.write(
            &format!("profile_{k:03}.dat"),
            &dat(
                &format!("x u at t = {}", snap.t),
                (0..=snap.n()).map(|j| (snap.node_x(j), snap.v[j])),
            ),
        )?;
    }
    Ok(())
}
