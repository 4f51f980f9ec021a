//! Exit criteria. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p nopa-bell --test acceptance -- --nocapture` to see them.

use std::f64::consts::SQRT_2;
use std::time::{Duration, Instant};

use nopa_bell::analytic::{bmax_analytic, ChannelParams, DEFAULT_SERIES_TOL};
use nopa_bell::audit::{fock_bell, run_audit, AuditSpec};
use nopa_bell::fock::{
    eve_state, eve_state_purified, lossy_state_purified, pseudo_spin_ops, tmsv_state, trace_distance, FockCutoff,
};
use nopa_bell::nonlocality::{chsh_value, horodecki_bmax, verify_settings_optimal};
use nopa_bell::threshold::{
    fit_rmax, gamma_from_r, rmax, squeezing_for_rmax, Scenario, ScenarioMode, DEFAULT_BISECTION_TOL,
};
use nopa_bell::Execution;

fn report(id: u32, pass: bool, detail: String) {
    println!("criterion {id:>2} [{}] {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

#[test]
fn criterion_01_symmetric_threshold_r1() {
    let (p, dt) = timed(|| rmax(Scenario::new(ScenarioMode::Symmetric, 1.0), DEFAULT_BISECTION_TOL).unwrap());
    let pass = (p.r_max - 0.42).abs() <= 0.01 && dt <= Duration::from_secs(10);
    report(1, pass, format!("symmetric r=1: R_max = {:.5} (0.42 ± 0.01), {:.2?} (≤ 10 s)", p.r_max, dt));
}

#[test]
fn criterion_02_asymmetric_threshold_r2() {
    let (p, dt) = timed(|| rmax(Scenario::new(ScenarioMode::Asymmetric, 2.0), DEFAULT_BISECTION_TOL).unwrap());
    let pass = (p.r_max - 0.24).abs() <= 0.01 && dt <= Duration::from_secs(30);
    report(2, pass, format!("asymmetric r=2: R_max = {:.5} (0.24 ± 0.01), {:.2?} (≤ 30 s)", p.r_max, dt));
}

#[test]
fn criterion_03_symmetric_crossing_of_013() {
    let at = |r: f64| rmax(Scenario::new(ScenarioMode::Symmetric, r), DEFAULT_BISECTION_TOL).unwrap().r_max;
    let (lo, hi) = (at(2.0), at(3.0));
    let crossing = squeezing_for_rmax(ScenarioMode::Symmetric, 0.13, 2.0, 3.0, 1e-4).unwrap();
    let pass = lo > 0.13 && hi < 0.13 && crossing > 2.0 && crossing <= 3.0;
    report(
        3,
        pass,
        format!("R_max(2) = {lo:.5}, R_max(3) = {hi:.5}, R_max = 0.13 at r = {crossing:.4} (in (2, 3])"),
    );
}

#[test]
fn criterion_04_absorption_conversion() {
    let g_ours = gamma_from_r(0.42).unwrap();
    let g_prior = gamma_from_r(0.13).unwrap();
    let ratio = g_ours / g_prior;
    let pass = (g_ours - 0.097).abs() <= 0.002 && (g_prior - 0.0085).abs() <= 0.0002 && (ratio - 10.0).abs() / 10.0 <= 0.15;
    report(
        4,
        pass,
        format!("γ(0.42) = {g_ours:.5} (0.097 ± 0.002), γ(0.13) = {g_prior:.6} (0.0085 ± 0.0002), ratio {ratio:.3} (10 ± 15%)"),
    );
}

#[test]
fn criterion_05_fit_formulas() {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for mode in [ScenarioMode::Symmetric, ScenarioMode::Asymmetric] {
        for r in [1.5, 2.0, 2.5, 3.0] {
            let s = Scenario::new(mode, r);
            let exact = rmax(s, DEFAULT_BISECTION_TOL).unwrap().r_max;
            let fit = fit_rmax(s).value;
            let rel = (exact - fit).abs() / exact;
            worst = worst.max(rel);
            lines.push(format!("{} r={r}: R_max={exact:.4} fit={fit:.4} rel={rel:.3}", mode.name()));
        }
    }
    for l in &lines {
        println!("    {l}");
    }
    report(5, worst <= 0.10, format!("worst |R_max - fit|/R_max = {worst:.3} (≤ 0.10)"));
}

#[test]
fn criterion_06_lossless_limit() {
    let mut worst: f64 = 0.0;
    let mut at3 = 0.0;
    for r in [0.5, 1.0, 2.0, 3.0] {
        let p = ChannelParams::new(r, 0.0, 0.0).unwrap();
        let l = p.lambda();
        let closed = 2.0 * (1.0 + 4.0 * l * l / (1.0 + l * l).powi(2)).sqrt();
        let b = bmax_analytic(&p, DEFAULT_SERIES_TOL).unwrap().bmax;
        worst = worst.max((b - closed).abs());
        if r == 3.0 {
            at3 = b;
        }
    }
    let pass = worst <= 1e-10 && at3 >= 2.82 && at3 <= 2.0 * SQRT_2;
    report(6, pass, format!("max |B - closed form| = {worst:.2e} (≤ 1e-10), B(r=3) = {at3:.6} in [2.82, 2√2]"));
}

#[test]
fn criterion_07_oracle_equivalence() {
    let spec = AuditSpec::default();
    let (audit, dt) = timed(|| run_audit(&spec, Execution::Parallel).unwrap());
    let worst_b = audit.worst_delta().unwrap();
    let worst_t = audit.worst_trace_distance().unwrap();
    for p in audit.failures() {
        println!(
            "    λ={:.6} R_A={} R_B={}: ΔB={:.3e} trace distance={:.3e} deficit={:.3e}",
            p.lambda, p.r_a, p.r_b, p.delta_bmax, p.trace_distance, p.trace_deficit
        );
    }
    let pass = audit.passed() && dt <= Duration::from_secs(300);
    report(
        7,
        pass,
        format!(
            "dim 40, {} points: worst ΔB = {:.3e} at λ={:.4} (< 1e-6), worst trace distance = {:.3e} (< 1e-10), {:.1?} (≤ 5 min)",
            audit.points.len(),
            worst_b.delta_bmax,
            worst_b.lambda,
            worst_t.trace_distance,
            dt
        ),
    );
}

#[test]
fn criterion_08_pseudo_spin_algebra() {
    let worst = [2, 4, 8, 16, 40]
        .iter()
        .map(|&d| pseudo_spin_ops(FockCutoff::new(d).unwrap()).algebra_residual())
        .fold(0.0, f64::max);
    report(8, worst <= 1e-14, format!("max algebra residual over dims {{2,4,8,16,40}} = {worst:.1e} (≤ 1e-14)"));
}

#[test]
fn criterion_09_chsh_consistency() {
    let cutoff = FockCutoff::new(40).unwrap();
    let mut worst_attain: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut largest_bmax: f64 = 0.0;
    let cases = [(1.0, 0.2, 0.2), (1.0, 0.3, 0.3), (0.5, 0.0, 0.0), (1.5, 0.4, 0.0), (1.0, 0.75, 0.25)];
    for (i, &(r, ra, rb)) in cases.iter().enumerate() {
        let state = lossy_state_purified(f64::tanh(r), ra, rb, cutoff).unwrap();
        let v = fock_bell(&state, cutoff).unwrap().correlations;
        let h = horodecki_bmax(&v);
        worst_attain = worst_attain.max((chsh_value(&v, &h.settings).unwrap() - h.bmax).abs());
        let search = verify_settings_optimal(&v, 10_000, 1000 + i as u64).unwrap();
        worst_excess = worst_excess.max(search.max_found - search.bound);
        largest_bmax = largest_bmax.max(h.bmax);
    }
    for r in [0.5, 1.0, 2.0, 3.0, 4.0] {
        for k in 0..=10 {
            let big_r = 0.1 * k as f64;
            for p in [ChannelParams::new(r, big_r, big_r).unwrap(), ChannelParams::new(r, big_r, 0.0).unwrap()] {
                largest_bmax = largest_bmax.max(bmax_analytic(&p, DEFAULT_SERIES_TOL).unwrap().bmax);
            }
        }
    }
    let pass = worst_attain <= 1e-9 && worst_excess <= 1e-9 && largest_bmax <= 2.0 * SQRT_2 + 1e-9;
    report(
        9,
        pass,
        format!(
            "attainment error {worst_attain:.1e} (≤ 1e-9), random-search excess {worst_excess:.3e} (≤ 1e-9), largest B_max {largest_bmax:.9} (≤ 2√2 + 1e-9)"
        ),
    );
}

#[test]
fn criterion_10_eve_construction() {
    let cutoff = FockCutoff::new(40).unwrap();
    let mut worst: f64 = 0.0;
    for lambda in [0.3, 1.0_f64.tanh(), 0.85] {
        for r_b in [0.0, 0.3, 0.7, 1.0] {
            let a = eve_state(lambda, r_b, cutoff).unwrap();
            let b = eve_state_purified(lambda, r_b, cutoff).unwrap();
            worst = worst.max(trace_distance(&a, &b).unwrap());
        }
    }
    let lambda = 1.0_f64.tanh();
    let to_nopa = trace_distance(&eve_state(lambda, 1.0, cutoff).unwrap(), &tmsv_state(lambda, cutoff).unwrap()).unwrap();
    let pass = worst < 1e-10 && to_nopa < 1e-10;
    report(
        10,
        pass,
        format!("3×4 grid: worst substitution-vs-purification trace distance {worst:.2e} (< 1e-10); R_B=1 vs NOPA {to_nopa:.1e}"),
    );
}
