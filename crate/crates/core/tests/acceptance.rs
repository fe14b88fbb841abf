//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fail.

use std::f64::consts::PI;
use std::time::Instant;

use kppfront::convergence::{
    manufactured_study, oracle_agreement, traveling_wave_study, Ladder, Manufactured,
};
use kppfront::dynamics::{
    classify, estimate_extinction_time, vanishing_constant, vanishing_majorant, Budget,
    CertificateKind, Classifier,
};
use kppfront::profiles::{semi_wave_slope, solve_compact_wave, solve_semi_wave, CompactWave};
use kppfront::solver::{
    reference_simulate, simulate, BoundMonitor, Controls, DtPolicy, InitialData, ProblemSpec,
};
use kppfront::threshold::{
    find_threshold_with, near_threshold_probe, sweep, sweep_inversions, SweepGrid, ThresholdOptions,
};
use kppfront::{Error, Result, Trace};

const PROFILE_TOL: f64 = 1e-10;
const STEFAN_TOL: f64 = 1e-8;
const RESIDUAL_TOL: f64 = 1e-6;
const SLOPE_ZERO_TOL: f64 = 1e-6;
const SPEED_GAP_MU100: f64 = 0.1;
const LINEAR_LENGTH_REL: f64 = 0.02;
const INVARIANCE_REL: f64 = 1e-3;
const VANISH_TIME_FACTOR: f64 = 1.1;
const SPEED_REL: f64 = 0.05;
const OFFSET_SPREAD: f64 = 1.0;
const THRESHOLD_REL: f64 = 1e-2;
const THRESHOLD_ITER: usize = 20;
const PROBE_GAP_REL: f64 = 0.1;
const PROBE_NOISE: f64 = 1e-9;
const DESIGN_ORDER: f64 = 2.0;
const ORDER_SLACK: f64 = 0.2;
const SELF_ORDER: f64 = 1.8;
const SUP_SLACK: f64 = 1e-8;
const COMPARISON_SLACK: f64 = 1e-8;

type Criterion = fn() -> Result<Verdict>;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

fn c_star(mu: f64) -> Result<f64> {
    Ok(solve_semi_wave(mu, PROFILE_TOL)?.c_star)
}

fn half_critical() -> Result<(ProblemSpec, CompactWave)> {
    let c = 0.5 * c_star(1.0)?;
    let wave = solve_compact_wave(c, 1.0, PROFILE_TOL)?;
    Ok((ProblemSpec::logistic(c, 1.0, 2.0 * wave.length)?, wave))
}

fn semi_wave_correctness() -> Result<Verdict> {
    let mut worst_stefan: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for mu in [0.5, 1.0, 2.0] {
        let w = solve_semi_wave(mu, PROFILE_TOL)?;
        worst_stefan = worst_stefan.max((mu * w.slope0.abs() - w.c_star).abs());
        worst_res = worst_res.max(w.residual());
    }
    let s0 = semi_wave_slope(0.0, 1e-12)?;
    let gap0 = (s0 - 1.0 / 3f64.sqrt()).abs();
    verdict(
        worst_stefan <= STEFAN_TOL && worst_res <= RESIDUAL_TOL && gap0 <= SLOPE_ZERO_TOL,
        format!("stefan {worst_stefan:.2e}, residual {worst_res:.2e}, |s(0) - 1/sqrt3| {gap0:.2e}"),
    )
}

fn speed_bounds() -> Result<Verdict> {
    let speeds = [0.5, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&mu| c_star(mu))
        .collect::<Result<Vec<_>>>()?;
    let increasing = speeds.windows(2).all(|w| w[1] > w[0]);
    let below = speeds.iter().all(|&c| c < 2.0);
    let gap = 2.0 - c_star(100.0)?;
    verdict(
        increasing && below && gap <= SPEED_GAP_MU100,
        format!("c* = {speeds:.5?}, 2 - c*(100) = {gap:.4} (need <= {SPEED_GAP_MU100})"),
    )
}

fn compact_wave_checks() -> Result<Verdict> {
    let (c, mu) = (0.05, 1.0);
    let w = solve_compact_wave(c, mu, PROFILE_TOL)?;
    let stefan = (mu * w.slope_end.abs() - c).abs();
    let res = w.residual();
    let lin = PI / (1.0 - 0.25 * c * c).sqrt();
    let rel = (w.length - lin).abs() / lin;
    let clean = matches!(
        solve_compact_wave(1.05 * c_star(mu)?, mu, PROFILE_TOL),
        Err(Error::NoCompactWave { .. })
    );
    verdict(
        stefan <= STEFAN_TOL && res <= RESIDUAL_TOL && rel <= LINEAR_LENGTH_REL && clean,
        format!(
            "stefan {stefan:.2e}, residual {res:.2e}, L_c = {:.6} vs {lin:.6} ({:.2}% , need <= 2%), clean failure {clean}",
            w.length,
            100.0 * rel
        ),
    )
}

fn max_width_gap(trace: &Trace, l: f64) -> f64 {
    trace
        .samples
        .iter()
        .map(|s| (s.width - l).abs())
        .fold(0.0, f64::max)
}

fn wave_invariance() -> Result<Verdict> {
    let c = 0.5 * c_star(1.0)?;
    let wave = solve_compact_wave(c, 1.0, PROFILE_TOL)?;
    let l = wave.length;
    let spec = ProblemSpec::logistic(c, 1.0, l)?;
    let data = InitialData::compact_wave(&wave, l, 0.0, 1.0);
    let controls = Controls::new(400, 20.0 / c).with_record_every(0.05);
    let main = simulate(&spec, &data, &controls)?;
    let reference = reference_simulate(&spec, &data, &controls)?;
    let (gm, gr) = (max_width_gap(&main, l), max_width_gap(&reference, l));
    let tol = INVARIANCE_REL * l;
    verdict(
        gm <= tol && gr <= tol,
        format!(
            "max |H - L_c|: main {gm:.3e} ({}), reference {gr:.3e} ({}), tolerance {tol:.3e}",
            main.terminal.tag(),
            reference.terminal.tag()
        ),
    )
}

fn certified_vanishing() -> Result<Verdict> {
    let (h0, c, mu) = (1.0, 0.5, 1.0);
    let spec = ProblemSpec::logistic(c, mu, h0)?;
    let psi = vanishing_majorant(h0, c, mu, 1.0);
    let cls = classify(
        &spec,
        &psi.data(),
        &Budget::new(2.0 * h0 / c * VANISH_TIME_FACTOR, 400),
    )?;
    let t_hat = estimate_extinction_time(&cls.trace)?;
    let limit = 2.0 * h0 / c * VANISH_TIME_FACTOR;
    let cv = vanishing_constant(h0, c, mu, 1.0);
    let budget = Budget::new(20.0, 200);
    let small = [InitialData::sine(h0, cv), InitialData::bump(h0, cv)]
        .iter()
        .map(|d| classify(&spec, d, &budget).map(|r| r.outcome.is_vanishing()))
        .collect::<Result<Vec<_>>>()?;
    verdict(
        cls.outcome.is_vanishing() && t_hat <= limit && small.iter().all(|&v| v),
        format!(
            "psi: {} T* = {t_hat:.4} (limit {limit:.2}); sup <= C = {cv:.3e} vanishing: {small:?}",
            cls.outcome.tag()
        ),
    )
}

fn spreading_speed() -> Result<Verdict> {
    let (spec, wave) = half_critical()?;
    let cs = c_star(1.0)?;
    let dominating = InitialData::compact_wave(&wave, spec.h0, 0.25 * wave.length, 1.5);
    let dom = classify(&spec, &dominating, &Budget::new(40.0, 200))?;
    let dom_ok = dom.outcome.is_spreading()
        && matches!(
            dom.primary_certificate().map(|c| &c.kind),
            Some(CertificateKind::SpreadProfile { .. })
        );
    let cls = classify(
        &spec,
        &InitialData::sine(spec.h0, 1.0),
        &Budget::new(200.0, 400),
    )?;
    let est = kppfront::dynamics::estimate_speed_over(&cls.trace, 100.0, 200.0)?;
    let offsets: Vec<f64> = cls
        .trace
        .samples
        .iter()
        .filter(|s| s.t >= 100.0)
        .map(|s| s.front - est.speed * s.t)
        .collect();
    let spread = offsets.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - offsets.iter().copied().fold(f64::INFINITY, f64::min);
    let rel = (est.speed - cs).abs() / cs;
    verdict(
        dom_ok && cls.outcome.is_spreading() && rel <= SPEED_REL && spread <= OFFSET_SPREAD,
        format!(
            "dominating data {}; fitted speed {:.5} vs c* {cs:.5} ({:.2}%), h - ct oscillation {spread:.3e}",
            dom.outcome.tag(),
            est.speed,
            100.0 * rel
        ),
    )
}

fn supercritical_vanishing() -> Result<Verdict> {
    let cs = c_star(1.0)?;
    let c = 1.05 * cs;
    let l = solve_compact_wave(0.5 * cs, 1.0, PROFILE_TOL)?.length;
    let h0 = 2.0 * l;
    let spec = ProblemSpec::logistic(c, 1.0, h0)?;
    let classifier = Classifier::new(c, 1.0, Budget::new(200.0, 400))?;
    let mut tags = Vec::new();
    for sigma in [0.5, 2.0, 10.0] {
        let o = classifier
            .classify(&spec, &InitialData::sine(h0, sigma))?
            .outcome;
        tags.push(format!("{sigma}: {}", o.tag()));
        if !o.is_vanishing() {
            return verdict(false, tags.join(", "));
        }
    }
    verdict(true, tags.join(", "))
}

fn sharp_threshold() -> Result<Verdict> {
    let (spec, _) = half_critical()?;
    let budget = Budget::new(200.0, 400);
    let horizon = 2.0 * budget.t_max;
    let classifier = Classifier::new(spec.c, spec.mu, budget)?;
    let phi = InitialData::sine(spec.h0, 1.0);
    let opts = ThresholdOptions {
        rel_tol: THRESHOLD_REL,
        max_iter: THRESHOLD_ITER,
        ..ThresholdOptions::default()
    };
    let res = find_threshold_with(&classifier, &spec, &phi, (1e-7, 1e-5), &opts)?;
    let bracket_ok = res.is_finite()
        && res.relative_width() <= THRESHOLD_REL
        && res.iterations <= THRESHOLD_ITER;
    let probe = near_threshold_probe(&spec, &phi, &res, &classifier, horizon, 20)?;
    let probe_ok = probe.relative_gap <= PROBE_GAP_REL && probe.distance_settles(PROBE_NOISE);
    verdict(
        bracket_ok && probe_ok,
        format!(
            "bracket ({:.4e}, {:.4e}) rel. width {:.2e} in {} bisections; probe {} at t = {:.1}, |H - L_c|/L_c = {:.3}, distance settles {}",
            res.sigma_lo,
            res.sigma_hi,
            res.relative_width(),
            res.iterations,
            probe.terminal,
            probe.t_end,
            probe.relative_gap,
            probe.distance_settles(PROBE_NOISE)
        ),
    )
}

fn orders_and_agreement() -> Result<Verdict> {
    let m = Manufactured::new(0.3, 1.0)?;
    let mms = manufactured_study(
        &m,
        &Ladder {
            n0: 32,
            dt0: 4e-3,
            levels: 4,
            t_end: 0.5,
        },
    )?;
    let mms_orders: Vec<f64> = mms
        .width_orders
        .iter()
        .chain(&mms.profile_orders)
        .copied()
        .collect();
    let mms_ok = mms_orders
        .iter()
        .all(|o| (o - DESIGN_ORDER).abs() <= ORDER_SLACK);

    let c = 0.5 * c_star(1.0)?;
    let tw = traveling_wave_study(
        c,
        1.0,
        &Ladder {
            n0: 100,
            dt0: 0.04,
            levels: 4,
            t_end: 10.0,
        },
    )?;
    let tw_order = tw.min_profile_order().min(tw.min_width_order());

    let (spec, _) = half_critical()?;
    let agree = oracle_agreement(
        &spec,
        &InitialData::sine(spec.h0, 1.0),
        &Controls::new(200, 20.0),
    )?;
    verdict(
        mms_ok && tw_order >= SELF_ORDER && agree.holds(),
        format!(
            "manufactured orders {mms_orders:.3?}; wave self-convergence order {tw_order:.3}; H(T) main vs reference {:.3e} (tol {:.3e})",
            agree.difference(),
            agree.tolerance
        ),
    )
}

fn structural_invariants() -> Result<Verdict> {
    let (spec, _) = half_critical()?;
    let h0 = spec.h0;
    let mut notes = Vec::new();

    let mut bound_violations = 0;
    for data in [
        InitialData::sine(h0, 0.3),
        InitialData::sine(h0, 1.0),
        InitialData::bump(h0, 2.0),
        InitialData::sine(h0, 1e-3),
    ] {
        let trace = simulate(&spec, &data, &Controls::new(200, 40.0))?;
        let monitor = BoundMonitor::new(&spec, &data, 200)?;
        let monitor = BoundMonitor {
            tol_sup: SUP_SLACK,
            ..monitor
        };
        bound_violations += monitor.check(&trace).len();
    }
    notes.push(format!("bound violations {bound_violations}"));

    let controls = Controls::new(200, 30.0)
        .with_dt(DtPolicy::Fixed(5e-3))
        .with_snapshots((1..=6).map(|k| 5.0 * k as f64));
    let lo = simulate(&spec, &InitialData::sine(h0, 0.2), &controls)?;
    let hi = simulate(&spec, &InitialData::sine(h0, 0.4), &controls)?;
    let mut ordered = true;
    for (a, b) in lo.snapshots.iter().zip(&hi.snapshots) {
        ordered &= a.width <= b.width + COMPARISON_SLACK;
        // b is read off its own grid by linear interpolation: allow dx^2 |u_xx| / 8.
        let dx = b.width * b.dy();
        let curvature =
            b.v.windows(3)
                .map(|w| (w[0] - 2.0 * w[1] + w[2]).abs())
                .fold(0.0, f64::max)
                / (dx * dx);
        let slack = COMPARISON_SLACK + dx * dx * curvature / 8.0;
        ordered &= (0..=a.n()).all(|j| a.v[j] <= b.to_physical(a.node_x(j)) + slack);
    }
    notes.push(format!("comparison ordered {ordered}"));

    let grid = SweepGrid {
        c: vec![spec.c],
        mu: vec![1.0],
        sigma: vec![1e-8, 1e-7, 1e-5, 1e-3, 1.0],
    };
    let phi = InitialData::sine(h0, 1.0);
    let budget = Budget::new(80.0, 100);
    let rows = sweep(&grid, &phi, &budget, 4)?;
    let inversions = sweep_inversions(&rows).len();
    let errors = rows.iter().filter(|r| r.outcome.is_err()).count();
    notes.push(format!(
        "sweep inversions {inversions}, failed cells {errors}"
    ));

    let again = sweep(&grid, &phi, &budget, 1)?;
    let t1 = simulate(&spec, &phi, &Controls::new(200, 20.0))?;
    let t2 = simulate(&spec, &phi, &Controls::new(200, 20.0))?;
    let deterministic =
        again == rows && t1.to_csv() == t2.to_csv() && t1.final_state == t2.final_state;
    notes.push(format!("deterministic {deterministic}"));

    verdict(
        bound_violations == 0 && ordered && inversions == 0 && errors == 0 && deterministic,
        notes.join(", "),
    )
}

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("semi-wave correctness", semi_wave_correctness),
        ("spreading speed bounds and monotonicity", speed_bounds),
        ("compact wave", compact_wave_checks),
        ("traveling-wave invariance", wave_invariance),
        ("certified vanishing", certified_vanishing),
        ("certified spreading and speed", spreading_speed),
        ("supercritical erosion vanishes", supercritical_vanishing),
        ("sharp threshold", sharp_threshold),
        ("orders and oracle agreement", orders_and_agreement),
        ("structural invariants", structural_invariants),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run().unwrap_or_else(|e| Verdict {
            pass: false,
            detail: format!("error: {e}"),
        });
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
