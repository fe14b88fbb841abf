//! Run configurations in TOML.
//!
//! ```toml
//! command = "classify"          # semiwave | wave | elliptic | simulate | classify
//!                               # | threshold | sweep | convergence
//! name = "v-c-run"              # optional, names the run directory
//! output = "runs/v-c-run"       # optional, overrides $KPPFRONT_OUTPUT_ROOT/<name>
//!
//! [problem]
//! c = 0.18
//! mu = 1.0
//! h0 = 7.05                     # optional for compact-wave and custom data
//!
//! [data]
//! family = "sine"               # sine | bump | compact-wave | custom
//! sigma = 1.0
//! shift = 0.0                   # compact-wave only
//! path = "u0.csv"               # custom only, two-column x,u
//!
//! [numerics]
//! n = 400
//! dt_max = 0.01                 # adaptive steps, or
//! dt_fixed = 0.005              # a fixed step
//! t_max = 100.0
//! h_floor = 0.05                # default max(10 h0 / N, 1e-4 h0)
//! record_every = 0.05
//! snapshot_times = [10.0, 20.0]
//! profile_tol = 1e-10
//! ```
//!
//! Command sections `[elliptic]`, `[classify]`, `[threshold]`, `[sweep]` and
//! `[convergence]` are listed on their structs below. Unknown keys are errors.

use std::fmt;
use std::path::{Path, PathBuf};

use kppfront::solver::default_floor;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Semiwave,
    Wave,
    Elliptic,
    Simulate,
    Classify,
    Threshold,
    Sweep,
    Convergence,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Semiwave => "semiwave",
            Self::Wave => "wave",
            Self::Elliptic => "elliptic",
            Self::Simulate => "simulate",
            Self::Classify => "classify",
            Self::Threshold => "threshold",
            Self::Sweep => "sweep",
            Self::Convergence => "convergence",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Sine,
    Bump,
    CompactWave,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Data {
    #[serde(default = "Data::default_family")]
    pub family: Family,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl Data {
    fn default_family() -> Family {
        Family::Sine
    }
}

impl Default for Data {
    fn default() -> Self {
        Self {
            family: Family::Sine,
            sigma: 1.0,
            shift: None,
            path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default = "Numerics::default_n")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_fixed: Option<f64>,
    #[serde(default = "Numerics::default_t_max")]
    pub t_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_floor: Option<f64>,
    #[serde(default = "Numerics::default_record_every")]
    pub record_every: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "Numerics::default_profile_tol")]
    pub profile_tol: f64,
}

impl Numerics {
    fn default_n() -> usize {
        400
    }
    fn default_t_max() -> f64 {
        100.0
    }
    fn default_record_every() -> f64 {
        0.05
    }
    fn default_profile_tol() -> f64 {
        1e-10
    }
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            n: Self::default_n(),
            dt_max: None,
            dt_fixed: None,
            t_max: Self::default_t_max(),
            h_floor: None,
            record_every: Self::default_record_every(),
            snapshot_times: Vec::new(),
            profile_tol: Self::default_profile_tol(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Elliptic {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyOptions {
    #[serde(default = "ClassifyOptions::default_tol_trans")]
    pub tol_trans: f64,
    /// Spreading certificate margin; default `1e-6 max V_c`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default = "one")]
    pub poll_every: f64,
    #[serde(default = "ClassifyOptions::default_speed_window")]
    pub speed_window: f64,
    #[serde(default = "ClassifyOptions::default_extensions")]
    pub collapse_extensions: u32,
}

impl ClassifyOptions {
    fn default_tol_trans() -> f64 {
        0.1
    }
    fn default_speed_window() -> f64 {
        0.5
    }
    fn default_extensions() -> u32 {
        4
    }
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            tol_trans: Self::default_tol_trans(),
            margin: None,
            poll_every: 1.0,
            speed_window: Self::default_speed_window(),
            collapse_extensions: Self::default_extensions(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_expansions: Option<u32>,
    /// Default `2 t_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_snapshots: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub c: Vec<f64>,
    #[serde(default)]
    pub mu: Vec<f64>,
    #[serde(default)]
    pub sigma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    TravelingWave,
    Manufactured,
    /// Self-convergence of the run described by `[problem]` and `[data]`.
    Run,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    pub case: Case,
    pub n0: usize,
    pub dt0: f64,
    pub levels: usize,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub problem: Problem,
    #[serde(default)]
    pub data: Data,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elliptic: Option<Elliptic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifyOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSection>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// Dotted key path, empty for syntax errors.
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config key `{}`: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.into(),
        message: message.into(),
    }
}

fn positive(key: &str, v: Option<f64>) -> Result<(), ConfigError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => {
            Err(err(key, format!("must be positive, got {x}")))
        }
        _ => Ok(()),
    }
}

fn required(key: &str, v: Option<f64>) -> Result<f64, ConfigError> {
    positive(key, v)?;
    v.ok_or_else(|| err(key, "required for this command"))
}

/// Parses, validates and fills defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    // Unknown or mistyped keys are reported by toml with the offending line.
    let cfg: RunConfig = toml::from_str(text).map_err(|e| err("", e.to_string().trim_end()))?;
    cfg.validate()?;
    Ok(cfg.with_defaults())
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| err("", format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    if let (Some(p), Some(dir)) = (&cfg.data.path, path.parent()) {
        if p.is_relative() {
            cfg.data.path = Some(dir.join(p));
        }
    }
    if cfg.name.is_none() {
        cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.problem;
        positive("problem.c", p.c)?;
        positive("problem.mu", p.mu)?;
        positive("problem.h0", p.h0)?;
        let nm = &self.numerics;
        if nm.n < 16 {
            return Err(err(
                "numerics.n",
                format!("need at least 16 cells, got {}", nm.n),
            ));
        }
        positive("numerics.dt_max", nm.dt_max)?;
        positive("numerics.dt_fixed", nm.dt_fixed)?;
        if nm.dt_max.is_some() && nm.dt_fixed.is_some() {
            return Err(err("numerics.dt_fixed", "give either dt_max or dt_fixed"));
        }
        positive("numerics.t_max", Some(nm.t_max))?;
        positive("numerics.h_floor", nm.h_floor)?;
        positive("numerics.profile_tol", Some(nm.profile_tol))?;
        if nm.record_every.is_nan() || nm.record_every < 0.0 {
            return Err(err("numerics.record_every", "must be nonnegative"));
        }
        if let Some(t) = nm
            .snapshot_times
            .iter()
            .find(|t| !(**t > 0.0 && **t <= nm.t_max))
        {
            return Err(err(
                "numerics.snapshot_times",
                format!("{t} is outside (0, t_max]"),
            ));
        }
        positive("data.sigma", Some(self.data.sigma))?;

        match self.command {
            Command::Semiwave => {
                required("problem.mu", p.mu)?;
            }
            Command::Wave => {
                required("problem.c", p.c)?;
                required("problem.mu", p.mu)?;
            }
            Command::Elliptic => {
                let e = self.elliptic.clone().unwrap_or_default();
                match e.drift {
                    Some(d) if !(0.0..2.0).contains(&d) => {
                        return Err(err(
                            "elliptic.drift",
                            format!("must lie in [0, 2), got {d}"),
                        ))
                    }
                    None => return Err(err("elliptic.drift", "required for this command")),
                    _ => {}
                }
                required("elliptic.half_length", e.half_length)?;
            }
            Command::Convergence => {
                let conv = self
                    .convergence
                    .as_ref()
                    .ok_or_else(|| err("convergence", "section required for this command"))?;
                if conv.levels < 3 {
                    return Err(err(
                        "convergence.levels",
                        format!(
                            "an order estimate needs at least 3 levels, got {}",
                            conv.levels
                        ),
                    ));
                }
                if conv.n0 < 16 {
                    return Err(err("convergence.n0", "need at least 16 cells"));
                }
                positive("convergence.dt0", Some(conv.dt0))?;
                positive("convergence.t_end", Some(conv.t_end))?;
                match conv.case {
                    Case::Manufactured | Case::TravelingWave => {
                        required("problem.c", p.c)?;
                        required("problem.mu", p.mu)?;
                    }
                    Case::Run => self.validate_run()?,
                }
            }
            _ => self.validate_run()?,
        }
        if self.command == Command::Threshold {
            let t = self.threshold.clone().unwrap_or_default();
            let lo = required("threshold.sigma_lo", t.sigma_lo)?;
            let hi = required("threshold.sigma_hi", t.sigma_hi)?;
            if hi <= lo {
                return Err(err("threshold.sigma_hi", "must exceed sigma_lo"));
            }
            positive("threshold.rel_tol", t.rel_tol)?;
            positive("threshold.probe_horizon", t.probe_horizon)?;
        }
        if self.command == Command::Sweep {
            let s = self
                .sweep
                .as_ref()
                .ok_or_else(|| err("sweep", "section required for this command"))?;
            for (key, v) in [
                ("sweep.c", &s.c),
                ("sweep.mu", &s.mu),
                ("sweep.sigma", &s.sigma),
            ] {
                if v.is_empty() {
                    return Err(err(key, "needs at least one value"));
                }
                for &x in v {
                    positive(key, Some(x))?;
                }
            }
        }
        if let Some(cl) = &self.classify {
            positive("classify.tol_trans", Some(cl.tol_trans))?;
            positive("classify.margin", cl.margin)?;
            positive("classify.poll_every", Some(cl.poll_every))?;
            if !(cl.speed_window > 0.0 && cl.speed_window < 1.0) {
                return Err(err("classify.speed_window", "must lie in (0, 1)"));
            }
        }
        Ok(())
    }

    fn validate_run(&self) -> Result<(), ConfigError> {
        let p = &self.problem;
        if self.command != Command::Sweep {
            required("problem.c", p.c)?;
            required("problem.mu", p.mu)?;
        }
        match self.data.family {
            Family::Custom => {
                if self.data.path.is_none() {
                    return Err(err("data.path", "required for custom data"));
                }
            }
            Family::CompactWave => {
                if self.command == Command::Sweep {
                    return Err(err(
                        "data.family",
                        "compact-wave data depend on (c, mu); not sweepable",
                    ));
                }
                if let Some(s) = self.data.shift {
                    if s.is_nan() || s < 0.0 {
                        return Err(err("data.shift", "must be nonnegative"));
                    }
                }
            }
            Family::Sine | Family::Bump => {
                required("problem.h0", p.h0)?;
            }
        }
        if self.data.shift.is_some() && self.data.family != Family::CompactWave {
            return Err(err("data.shift", "only used by compact-wave data"));
        }
        Ok(())
    }

    /// Fills the floor and the step policy so the echo records them.
    fn with_defaults(mut self) -> Self {
        if self.numerics.dt_max.is_none() && self.numerics.dt_fixed.is_none() {
            self.numerics.dt_max = Some(1e-2);
        }
        if let (None, Some(h0)) = (self.numerics.h_floor, self.problem.h0) {
            self.numerics.h_floor = Some(default_floor(h0, self.numerics.n));
        }
        if self.command == Command::Classify && self.classify.is_none() {
            self.classify = Some(ClassifyOptions::default());
        }
        self
    }

    /// Adds `h0` once it is known from the data (compact-wave or custom).
    pub fn resolve_h0(&mut self, h0: f64) {
        if self.problem.h0.is_none() {
            self.problem.h0 = Some(h0);
            if self.numerics.h_floor.is_none() {
                self.numerics.h_floor = Some(default_floor(h0, self.numerics.n));
            }
        }
    }

    pub fn run_dir(&self) -> PathBuf {
        if let Some(o) = &self.output {
            return o.clone();
        }
        let root = std::env::var_os("KPPFRONT_OUTPUT_ROOT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("runs"));
        root.join(
            self.name
                .clone()
                .unwrap_or_else(|| self.command.as_str().to_string()),
        )
    }
}
