use nopa_bell::threshold::{
    fit_rmax, refit_coefficient, rmax, threshold_curve, Scenario, ScenarioMode, DEFAULT_BISECTION_TOL,
};
use nopa_bell::Execution;

const MODES: [ScenarioMode; 2] = [ScenarioMode::Symmetric, ScenarioMode::Asymmetric];

#[test]
fn thresholds_fall_with_squeezing() {
    let rs: Vec<f64> = (0..=8).map(|i| 1.0 + 0.25 * i as f64).collect();
    for mode in MODES {
        let pts: Vec<_> = threshold_curve(mode, &rs, DEFAULT_BISECTION_TOL, Execution::Parallel)
            .into_iter()
            .map(Result::unwrap)
            .collect();
        for w in pts.windows(2) {
            assert!(w[1].r_max < w[0].r_max, "{mode:?}: {:?} then {:?}", w[0], w[1]);
        }
    }
}

#[test]
fn every_threshold_brackets_its_root() {
    let tol = DEFAULT_BISECTION_TOL;
    for mode in MODES {
        for r in [0.3, 1.5, 2.5, 3.0] {
            let s = Scenario::new(mode, r);
            let p = rmax(s, tol).unwrap();
            assert!(s.bmax_at(p.r_max - tol).unwrap() > 2.0);
            assert!(s.bmax_at(p.r_max + tol).unwrap() < 2.0);
            assert!((p.gamma_max + 0.5 * (1.0 - p.r_max * p.r_max).ln()).abs() < 1e-12);
        }
    }
}

#[test]
fn fit_rules_flag_their_validity_range() {
    for r in [0.5, 1.0, 1.49] {
        assert!(!fit_rmax(Scenario::new(ScenarioMode::Symmetric, r)).in_validity_range);
    }
    for r in [1.5, 2.0, 3.5] {
        assert!(fit_rmax(Scenario::new(ScenarioMode::Asymmetric, r)).in_validity_range);
    }
}

/// The computed thresholds follow `c·e^{-r}` to within 10% on [1.5, 3], but
/// with the two rule coefficients attached to the opposite scenarios.
#[test]
fn exponential_law_holds_with_exchanged_coefficients() {
    let rs = [1.5, 2.0, 2.5, 3.0];
    for (mode, other) in [(ScenarioMode::Symmetric, ScenarioMode::Asymmetric), (ScenarioMode::Asymmetric, ScenarioMode::Symmetric)] {
        let pts: Vec<_> = threshold_curve(mode, &rs, DEFAULT_BISECTION_TOL, Execution::Parallel)
            .into_iter()
            .map(Result::unwrap)
            .collect();
        for p in &pts {
            let coef = other.fit_coefficient() * (-p.r).exp();
            assert!((p.r_max - coef).abs() / p.r_max <= 0.10, "{mode:?} r={}: {} vs {coef}", p.r, p.r_max);
        }
        let c = refit_coefficient(&pts).unwrap();
        assert!((c - other.fit_coefficient()).abs() / other.fit_coefficient() < 0.06, "{mode:?}: c = {c}");
    }
}
