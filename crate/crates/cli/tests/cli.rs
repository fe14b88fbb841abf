use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use kppfront::solver::default_floor;
use kppfront_cli::{
    parse_config, run, RunConfig, EXIT_COMPUTE, EXIT_CONFIG, EXIT_OK, EXIT_UNDETERMINED,
};

const C_HALF: f64 = 0.1821853616575184;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn with_output(text: &str, dir: &Path) -> RunConfig {
    let mut cfg = parse_config(text).unwrap();
    cfg.output = Some(dir.to_path_buf());
    cfg
}

fn summary_value(dir: &Path, key: &str) -> String {
    let text = fs::read_to_string(dir.join("summary.txt")).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in summary:\n{text}"))
        .to_string()
}

#[test]
fn minimal_simulate_gets_defaults() {
    let cfg =
        parse_config("command = \"simulate\"\n[problem]\nc = 0.2\nmu = 1.0\nh0 = 4.0\n").unwrap();
    assert_eq!(cfg.numerics.n, 400);
    assert_eq!(cfg.numerics.h_floor, Some(default_floor(4.0, 400)));
    assert_eq!(cfg.numerics.dt_max, Some(1e-2));
    assert_eq!(cfg.data.sigma, 1.0);
}

#[test]
fn negative_mu_names_the_key() {
    let e = parse_config("command = \"wave\"\n[problem]\nc = 0.2\nmu = -1.0\n").unwrap_err();
    assert_eq!(e.key, "problem.mu");
    assert!(e.to_string().contains("problem.mu"), "{e}");
}

#[test]
fn missing_and_unknown_keys_are_reported() {
    let e = parse_config("command = \"wave\"\n[problem]\nmu = 1.0\n").unwrap_err();
    assert_eq!(e.key, "problem.c");
    let e =
        parse_config("command = \"wave\"\n[problem]\nc = 0.2\nmu = 1.0\nspeed = 3\n").unwrap_err();
    assert!(e.to_string().contains("speed"), "{e}");
}

#[test]
fn single_level_convergence_is_rejected() {
    let text = "command = \"convergence\"\n[problem]\nc = 0.2\nmu = 1.0\n\
                [convergence]\ncase = \"manufactured\"\nn0 = 32\ndt0 = 0.004\nlevels = 1\nt_end = 0.5\n";
    let e = parse_config(text).unwrap_err();
    assert_eq!(e.key, "convergence.levels");
    assert!(e.message.contains("at least 3"), "{e}");
}

#[test]
fn shipped_configs_round_trip() {
    let mut seen = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let cfg = parse_config(&fs::read_to_string(&path).unwrap()).unwrap();
        let again = parse_config(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 8);
}

#[test]
fn semiwave_writes_speed_and_profile() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run(with_output(
        "command = \"semiwave\"\n[problem]\nmu = 1.0\n",
        tmp.path(),
    ))
    .unwrap();
    assert_eq!(report.status, EXIT_OK);
    let c_star: f64 = summary_value(tmp.path(), "c_star").parse().unwrap();
    assert!((c_star - 0.364_370_723_315_036_8).abs() < 1e-6);
    let csv = fs::read_to_string(tmp.path().join("semiwave.csv")).unwrap();
    assert!(csv.starts_with("z,q\n"));
    assert_eq!(csv.lines().count(), 2049);
}

#[test]
fn wave_run_reports_invariance_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!(
        "command = \"classify\"\n[problem]\nc = {C_HALF}\nmu = 1.0\n[data]\nfamily = \"compact-wave\"\n\
         [numerics]\nt_max = 10.0\n"
    );
    let report = run(with_output(&text, tmp.path())).unwrap();
    assert_eq!(report.status, EXIT_OK);
    assert_eq!(summary_value(tmp.path(), "outcome"), "transition");
    let gap: f64 = summary_value(tmp.path(), "relative_width_gap")
        .parse()
        .unwrap();
    assert!(gap < 1e-3, "{gap}");
    // h0 = L_c is filled in from the wave and echoed.
    let echo = parse_config(&fs::read_to_string(tmp.path().join("config.toml")).unwrap()).unwrap();
    let l: f64 = summary_value(tmp.path(), "wave_length").parse().unwrap();
    assert_eq!(echo.problem.h0, Some(l));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs_dir().join("simulate.toml")).unwrap();
    for dir in [a.path(), b.path()] {
        let mut cfg = with_output(&text, dir);
        cfg.numerics.t_max = 20.0;
        cfg.numerics.snapshot_times = vec![10.0, 20.0];
        assert_eq!(run(cfg).unwrap().status, EXIT_OK);
    }
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 8, "{names:?}");
    for name in names {
        let (x, y) = (
            fs::read_to_string(a.path().join(&name)).unwrap(),
            fs::read_to_string(b.path().join(&name)).unwrap(),
        );
        if name == "config.toml" {
            // The echo records the output directory, which differs by construction.
            let strip = |s: &str| {
                let mut c = parse_config(s).unwrap();
                c.output = None;
                c
            };
            assert_eq!(strip(&x), strip(&y));
        } else if name == "summary.txt" {
            let strip = |s: &str| {
                s.lines()
                    .filter(|l| !l.starts_with("timestamp="))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            assert_eq!(strip(&x), strip(&y));
        } else {
            assert_eq!(x, y, "{name:?}");
        }
    }
}

#[test]
fn compute_errors_are_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run(with_output(
        "command = \"wave\"\n[problem]\nc = 0.5\nmu = 1.0\n",
        tmp.path(),
    ))
    .unwrap();
    assert_eq!(report.status, EXIT_COMPUTE);
    assert!(summary_value(tmp.path(), "error").contains("no compact-support wave"));
}

#[test]
fn undetermined_classification_exits_four() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "command = \"classify\"\n[problem]\nc = 0.4\nmu = 1.0\nh0 = 6.0\n\
                [numerics]\nn = 64\nt_max = 1.0\n[classify]\ncollapse_extensions = 0\n";
    let report = run(with_output(text, tmp.path())).unwrap();
    assert_eq!(report.status, EXIT_UNDETERMINED);
    assert_eq!(summary_value(tmp.path(), "outcome"), "undetermined");
}

#[test]
fn binary_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "command = \"wave\"\n[problem]\nc = 0.2\nmu = -1.0\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_kppfront"))
        .arg("run")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&out.stderr).contains("problem.mu"));

    let out = Command::new(env!("CARGO_BIN_EXE_kppfront"))
        .arg("run")
        .arg(configs_dir().join("wave.toml"))
        .env("KPPFRONT_OUTPUT_ROOT", tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert!(tmp.path().join("wave").join("wave.csv").exists());
}
