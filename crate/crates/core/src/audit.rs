//! Closed-form versus Fock-space cross-checks.

use crate::analytic::{bmax_analytic, ChannelParams};
use crate::error::Result;
use crate::exec::{map_points, Execution};
use crate::fock::{
    correlation_matrix, eve_state_purified, lossy_state_direct, lossy_state_purified, pseudo_spin_ops,
    trace_distance, CorrelationMatrix, FockCutoff, StateDiagnostics, TruncatedState,
};
use crate::nonlocality::{horodecki_bmax, HorodeckiResult};

/// Bell factor of a truncated two-mode state via its correlation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockBell {
    pub correlations: CorrelationMatrix,
    pub horodecki: HorodeckiResult,
    pub diagnostics: StateDiagnostics,
}

pub fn fock_bell(state: &TruncatedState, cutoff: FockCutoff) -> Result<FockBell> {
    let correlations = correlation_matrix(state, &pseudo_spin_ops(cutoff))?;
    Ok(FockBell { correlations, horodecki: horodecki_bmax(&correlations), diagnostics: state.diagnostics() })
}

/// Fock path for the damped state, built by beamsplitter purification.
pub fn fock_bell_damped(params: &ChannelParams, cutoff: FockCutoff) -> Result<FockBell> {
    let state = lossy_state_purified(params.lambda(), params.r_a(), params.r_b(), cutoff)?;
    fock_bell(&state, cutoff)
}

/// Fock path for the Alice–Eve state, built by purification.
pub fn fock_bell_eve(lambda: f64, r_b: f64, cutoff: FockCutoff) -> Result<FockBell> {
    fock_bell(&eve_state_purified(lambda, r_b, cutoff)?, cutoff)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditSpec {
    pub lambdas: Vec<f64>,
    /// Values used for both `R_A` and `R_B`.
    pub dampings: Vec<f64>,
    pub cutoff: FockCutoff,
    /// Bound on `|ΔB_max|`.
    pub tol: f64,
    /// Bound on the direct-vs-purified trace distance.
    pub trace_tol: f64,
    pub series_tol: f64,
}

impl Default for AuditSpec {
    fn default() -> Self {
        Self {
            lambdas: vec![0.3, 1.0_f64.tanh(), 1.5_f64.tanh()],
            dampings: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            cutoff: FockCutoff::new(40).expect("even cutoff"),
            tol: 1e-6,
            trace_tol: 1e-10,
            series_tol: crate::analytic::DEFAULT_SERIES_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditPoint {
    pub lambda: f64,
    pub r_a: f64,
    pub r_b: f64,
    pub bmax_analytic: f64,
    pub bmax_fock: f64,
    pub delta_bmax: f64,
    pub trace_distance: f64,
    pub trace_deficit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub points: Vec<AuditPoint>,
    pub tol: f64,
    pub trace_tol: f64,
}

impl AuditReport {
    pub fn worst_delta(&self) -> Option<&AuditPoint> {
        self.points.iter().max_by(|a, b| a.delta_bmax.total_cmp(&b.delta_bmax))
    }

    pub fn worst_trace_distance(&self) -> Option<&AuditPoint> {
        self.points.iter().max_by(|a, b| a.trace_distance.total_cmp(&b.trace_distance))
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditPoint> {
        self.points.iter().filter(|p| !(p.delta_bmax < self.tol && p.trace_distance < self.trace_tol))
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }
}

pub fn audit_point(lambda: f64, r_a: f64, r_b: f64, spec: &AuditSpec) -> Result<AuditPoint> {
    let params = ChannelParams::from_lambda(lambda, r_a, r_b)?;
    let analytic = bmax_analytic(&params, spec.series_tol)?;
    let purified = lossy_state_purified(lambda, r_a, r_b, spec.cutoff)?;
    let direct = lossy_state_direct(lambda, r_a, r_b, spec.cutoff)?;
    let fock = fock_bell(&purified, spec.cutoff)?;
    Ok(AuditPoint {
        lambda,
        r_a,
        r_b,
        bmax_analytic: analytic.bmax,
        bmax_fock: fock.horodecki.bmax,
        delta_bmax: (analytic.bmax - fock.horodecki.bmax).abs(),
        trace_distance: trace_distance(&direct, &purified)?,
        trace_deficit: purified.trace_deficit(),
    })
}

/// Every `(λ, R_A, R_B)` of the grid, in lexicographic order.
pub fn run_audit(spec: &AuditSpec, exec: Execution) -> Result<AuditReport> {
    let grid: Vec<(f64, f64, f64)> = spec
        .lambdas
        .iter()
        .flat_map(|&l| spec.dampings.iter().flat_map(move |&a| spec.dampings.iter().map(move |&b| (l, a, b))))
        .collect();
    let points = map_points(&grid, exec, |&(l, a, b)| audit_point(l, a, b, spec))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(AuditReport { points, tol: spec.tol, trace_tol: spec.trace_tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::eve_bmax_analytic;

    #[test]
    fn vacuum_row_is_exact() {
        let spec = AuditSpec { cutoff: FockCutoff::new(8).unwrap(), ..AuditSpec::default() };
        let p = audit_point(0.0, 0.3, 0.6, &spec).unwrap();
        assert_eq!(p.delta_bmax, 0.0);
        assert_eq!(p.bmax_fock, 2.0);
    }

    #[test]
    fn coarse_cutoff_fails() {
        let spec = AuditSpec {
            lambdas: vec![1.0_f64.tanh()],
            dampings: vec![0.0, 0.5],
            cutoff: FockCutoff::new(2).unwrap(),
            ..AuditSpec::default()
        };
        let report = run_audit(&spec, Execution::Sequential).unwrap();
        assert!(!report.passed());
        assert!(report.worst_delta().unwrap().delta_bmax > 0.1);
    }

    #[test]
    fn eve_paths_agree() {
        let lambda = 0.6_f64;
        let cutoff = FockCutoff::new(40).unwrap();
        for r_b in [0.0, 0.3, 0.7, 1.0] {
            let fock = fock_bell_eve(lambda, r_b, cutoff).unwrap();
            let analytic = eve_bmax_analytic(lambda.atanh(), r_b, 1e-12).unwrap();
            assert!((fock.horodecki.bmax - analytic.bmax).abs() < 1e-8, "R_B={r_b}");
        }
    }
}
