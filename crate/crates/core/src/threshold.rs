//! Loss thresholds `R_max(r)`, the exponential fit rules and the
//! reflectivity ↔ absorption-coefficient conversion.

use crate::analytic::{bmax_analytic, ChannelParams, DEFAULT_SERIES_TOL};
use crate::error::{Error, Result};
use crate::exec::{map_points, Execution};

/// Default bisection tolerance on `R`.
pub const DEFAULT_BISECTION_TOL: f64 = 1e-4;

const MAX_BISECTIONS: usize = 60;
const SCAN_STEP: f64 = 0.01;

/// `B_max(R = 0)` must exceed `2 + NONLOCAL_MARGIN` for a threshold to exist.
const NONLOCAL_MARGIN: f64 = 1e-12;

/// Lower edge of the squeezing range where the fit rules are quoted.
pub const FIT_VALIDITY_MIN_R: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioMode {
    /// `R_A = R_B = R`
    Symmetric,
    /// `R_A = R`, `R_B = 0`
    Asymmetric,
}

impl ScenarioMode {
    pub fn fit_coefficient(self) -> f64 {
        match self {
            ScenarioMode::Symmetric => 1.64,
            ScenarioMode::Asymmetric => 1.2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioMode::Symmetric => "symmetric",
            ScenarioMode::Asymmetric => "asymmetric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub mode: ScenarioMode,
    pub r: f64,
}

impl Scenario {
    pub fn new(mode: ScenarioMode, r: f64) -> Self {
        Self { mode, r }
    }

    /// Channel parameters at damping `big_r`.
    pub fn channel(&self, big_r: f64) -> Result<ChannelParams> {
        match self.mode {
            ScenarioMode::Symmetric => ChannelParams::new(self.r, big_r, big_r),
            ScenarioMode::Asymmetric => ChannelParams::new(self.r, big_r, 0.0),
        }
    }

    pub fn bmax_at(&self, big_r: f64) -> Result<f64> {
        Ok(bmax_analytic(&self.channel(big_r)?, DEFAULT_SERIES_TOL)?.bmax)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPoint {
    pub r: f64,
    pub r_max: f64,
    pub bmax_at_threshold: f64,
    /// Exponential fit rule at the same `r`.
    pub fit_value: f64,
    pub gamma_max: f64,
}

impl ThresholdPoint {
    /// `|R_max - fit| / R_max`.
    pub fn rel_fit_error(&self) -> f64 {
        (self.r_max - self.fit_value).abs() / self.r_max
    }
}

/// Largest damping that keeps `B_max > 2`, by bisection on `B_max(R) - 2`.
///
/// `B_max ≤ 2` counts as local, so the symmetric end point `R = 1` (where
/// `B_max = 2` exactly) closes the bracket.
pub fn rmax(scenario: Scenario, tol: f64) -> Result<ThresholdPoint> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Config(format!("bisection tolerance {tol} must be positive")));
    }
    if !(scenario.r > 0.0) {
        return Err(Error::Domain(format!("threshold needs r > 0, got {}", scenario.r)));
    }
    let excess = |big_r: f64| scenario.bmax_at(big_r).map(|b| b - 2.0);

    let at_zero = excess(0.0)?;
    if at_zero <= NONLOCAL_MARGIN {
        return Err(Error::NeverNonlocal { r: scenario.r, bmax_at_zero: at_zero + 2.0 });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    if excess(hi)? > 0.0 {
        // monotonicity failed at the end points; bracket from a coarse scan
        let mut scan = Vec::new();
        let steps = (1.0 / SCAN_STEP).round() as usize;
        let mut found = None;
        for i in 1..=steps {
            let big_r = i as f64 * SCAN_STEP;
            let g = excess(big_r)?;
            scan.push((big_r, g + 2.0));
            if g <= 0.0 {
                found = Some(big_r);
                break;
            }
        }
        match found {
            Some(x) => {
                hi = x;
                lo = x - SCAN_STEP;
            }
            None => return Err(Error::Bracketing { r: scenario.r, scan }),
        }
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo < tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_max = 0.5 * (lo + hi);
    Ok(ThresholdPoint {
        r: scenario.r,
        r_max,
        bmax_at_threshold: scenario.bmax_at(r_max)?,
        fit_value: fit_rmax(scenario).value,
        gamma_max: gamma_from_r(r_max)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitEstimate {
    pub value: f64,
    /// `false` below `r = 1.5`, where the rule is not claimed to hold.
    pub in_validity_range: bool,
}

/// `1.64 e^{-r}` (symmetric) or `1.2 e^{-r}` (asymmetric).
pub fn fit_rmax(scenario: Scenario) -> FitEstimate {
    FitEstimate {
        value: scenario.mode.fit_coefficient() * (-scenario.r).exp(),
        in_validity_range: scenario.r >= FIT_VALIDITY_MIN_R,
    }
}

/// Least-squares `c` in `R_max ≈ c e^{-r}` over the given threshold points.
pub fn refit_coefficient(points: &[ThresholdPoint]) -> Option<f64> {
    let (num, den) = points.iter().fold((0.0, 0.0), |(n, d), p| {
        let basis = (-p.r).exp();
        (n + p.r_max * basis, d + basis * basis)
    });
    (den > 0.0).then(|| num / den)
}

/// Dimensionless absorption coefficient `γ = -½ ln(1 - R²)`.
pub fn gamma_from_r(big_r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&big_r) {
        return Err(Error::Domain(format!("damping R = {big_r} must lie in [0, 1)")));
    }
    if big_r == 1.0 {
        return Err(Error::InfiniteLoss);
    }
    Ok(-0.5 * (-big_r * big_r).ln_1p())
}

/// Inverse of [`gamma_from_r`]: `R = sqrt(1 - e^{-2γ})`.
pub fn r_from_gamma(gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) || gamma.is_nan() {
        return Err(Error::Domain(format!("absorption coefficient {gamma} must be >= 0")));
    }
    Ok((-(-2.0 * gamma).exp_m1()).sqrt())
}

/// Threshold at every squeezing value in `rs`, in order.
pub fn threshold_curve(mode: ScenarioMode, rs: &[f64], tol: f64, exec: Execution) -> Vec<Result<ThresholdPoint>> {
    map_points(rs, exec, |&r| rmax(Scenario::new(mode, r), tol))
}

/// Squeezing in `[r_lo, r_hi]` at which `R_max(r)` equals `target`,
/// assuming `R_max` decreases with `r` on the interval.
pub fn squeezing_for_rmax(mode: ScenarioMode, target: f64, r_lo: f64, r_hi: f64, tol: f64) -> Result<f64> {
    let gap = |r: f64| rmax(Scenario::new(mode, r), DEFAULT_BISECTION_TOL * 0.01).map(|p| p.r_max - target);
    let (mut lo, mut hi) = (r_lo, r_hi);
    let (g_lo, g_hi) = (gap(lo)?, gap(hi)?);
    if !(g_lo > 0.0 && g_hi <= 0.0) {
        return Err(Error::Bracketing { r: r_lo, scan: vec![(r_lo, g_lo + target), (r_hi, g_hi + target)] });
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo < tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
