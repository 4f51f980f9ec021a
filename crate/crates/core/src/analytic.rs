//! Closed-form Bell factor of the damped two-mode squeezed vacuum.
//!
//! The pseudo-spin correlation matrix of the damped state is diagonal with
//! entries `(±α, ±α, β)`, so the Horodecki bound collapses to
//! `B_max = 2·sqrt(α² + max(α², β²))`. `β` is closed form; `α` is an
//! infinite series summed here with an adaptive stopping rule.

use crate::error::{Error, Result};
use crate::special::{ln_binomial, CompensatedSum};

/// Default relative tolerance of [`alpha_series`].
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;

/// Hard limit on the number of series terms.
pub const TERM_CAP: usize = 100_000;

/// Largest accepted squeezing parameter.
pub const SQUEEZING_CAP: f64 = 5.0;

/// Consecutive negligible terms required before the doubling check.
const STOP_RUN: usize = 5;

/// `λ = tanh r`.
pub fn lambda_from_r(r: f64) -> Result<f64> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain(format!("squeezing r = {r} must be finite and >= 0")));
    }
    if r > SQUEEZING_CAP {
        return Err(Error::Domain(format!("squeezing r = {r} exceeds the cap {SQUEEZING_CAP}")));
    }
    Ok(r.tanh())
}

fn check_damping(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::Domain(format!("damping {name} = {value} must lie in [0, 1]")));
    }
    Ok(())
}

/// Squeezing and the two beamsplitter reflectivities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    r: f64,
    lambda: f64,
    r_a: f64,
    r_b: f64,
}

impl ChannelParams {
    /// From the squeezing parameter `r`.
    pub fn new(r: f64, r_a: f64, r_b: f64) -> Result<Self> {
        let lambda = lambda_from_r(r)?;
        check_damping("R_A", r_a)?;
        check_damping("R_B", r_b)?;
        Ok(Self { r, lambda, r_a, r_b })
    }

    /// From `λ = tanh r` directly.
    pub fn from_lambda(lambda: f64, r_a: f64, r_b: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::Domain(format!("lambda = {lambda} must lie in [0, 1)")));
        }
        let r = lambda.atanh();
        if r > SQUEEZING_CAP {
            return Err(Error::Domain(format!(
                "lambda = {lambda} corresponds to r = {r} above the cap {SQUEEZING_CAP}"
            )));
        }
        check_damping("R_A", r_a)?;
        check_damping("R_B", r_b)?;
        Ok(Self { r, lambda, r_a, r_b })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn r_a(&self) -> f64 {
        self.r_a
    }

    pub fn r_b(&self) -> f64 {
        self.r_b
    }

    /// Same squeezing with the two arms exchanged.
    pub fn swapped(&self) -> Self {
        Self { r_a: self.r_b, r_b: self.r_a, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellResult {
    pub alpha: f64,
    pub beta: f64,
    pub bmax: f64,
    /// `bmax > 2`.
    pub violated: bool,
    pub terms_used: usize,
    /// Contribution of the last validation block, an upper estimate of the
    /// neglected tail of `α`.
    pub tail_estimate: f64,
}

/// `Λ_i(m)` in its unregrouped form.
///
/// `R/sqrt(1-R²)` diverges at `R = 1`, so that point is rejected for `m ≥ 1`.
/// Large `m` near `R = 1` overflows to infinity; [`regrouped_factor`] is the
/// form used by the series.
pub fn capital_lambda(m: usize, r_i: f64) -> Result<f64> {
    check_damping("R", r_i)?;
    if r_i == 1.0 {
        return if m == 0 { Ok(1.0) } else { Err(Error::Divergence { m }) };
    }
    let ratio = r_i / ((1.0 - r_i) * (1.0 + r_i)).sqrt();
    let ln_ratio = ratio.ln();
    let mut sum = CompensatedSum::default();
    for k in 0..=m / 2 {
        let exponent = 2 * m - 4 * k;
        let power = if exponent == 0 {
            1.0
        } else if ratio == 0.0 {
            0.0
        } else {
            (exponent as f64 * ln_ratio).exp()
        };
        let binom = ln_binomial(m, 2 * k).exp();
        sum.add(binom * power / ((2 * k + 1) as f64).sqrt());
    }
    Ok(sum.value())
}

/// Per-mode factor `F(m) = Σ_k C(m,2k) (2k+1)^{-1/2} R^{2(m-2k)} (1-R²)^{(4k+1)/2}`.
///
/// Equal to `(1-R²)^{(2m+1)/2} Λ(m)`, finite on all of `R ∈ [0, 1]`.
#[derive(Debug, Clone, Copy)]
struct ModeFactor {
    /// `1 - R²`
    transmissivity: f64,
    ln_transmissivity: f64,
    ln_reflectivity: f64,
    sqrt_transmissivity: f64,
}

impl ModeFactor {
    fn new(r_i: f64) -> Self {
        let transmissivity = (1.0 - r_i) * (1.0 + r_i);
        Self {
            transmissivity,
            ln_transmissivity: transmissivity.ln(),
            ln_reflectivity: 2.0 * r_i.ln(),
            sqrt_transmissivity: transmissivity.sqrt(),
        }
    }

    /// The sum equals `sqrt(t)·E[1{J even}/sqrt(J+1)]` with `J ~ Bin(m, t)`,
    /// so only a window of `J` around the binomial mean contributes.
    fn at(&self, m: usize) -> f64 {
        let t = self.transmissivity;
        if t == 0.0 {
            return 0.0;
        }
        if t == 1.0 {
            return if m.is_multiple_of(2) { 1.0 / ((m + 1) as f64).sqrt() } else { 0.0 };
        }
        let mf = m as f64;
        let mean = mf * t;
        let width = 40.0 * (mf * t * (1.0 - t)).sqrt() + 40.0;
        let lo = (mean - width).floor().max(0.0) as usize;
        let hi = ((mean + width).ceil() as usize).min(m);
        let mut j = lo + lo % 2;
        let mut sum = CompensatedSum::default();
        while j <= hi {
            let ln_pmf = ln_binomial(m, j)
                + j as f64 * self.ln_transmissivity
                + (m - j) as f64 * self.ln_reflectivity;
            sum.add(ln_pmf.exp() / ((j + 1) as f64).sqrt());
            j += 2;
        }
        self.sqrt_transmissivity * sum.value()
    }
}

/// `F_i(m)`, the regrouped per-mode factor of the `α` series.
pub fn regrouped_factor(m: usize, r_i: f64) -> Result<f64> {
    check_damping("R", r_i)?;
    Ok(ModeFactor::new(r_i).at(m))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaSeries {
    pub alpha: f64,
    pub terms_used: usize,
    pub tail_estimate: f64,
}

/// `α = 2(1-λ²) Σ_m (m+1) λ^{2m+1} F_A(m) F_B(m)`.
///
/// Summation stops once [`STOP_RUN`] consecutive terms are each below `tol`
/// relative to the partial sum; the term count is then doubled until the
/// added block is within `10·tol` of the total.
pub fn alpha_series(params: &ChannelParams, tol: f64) -> Result<AlphaSeries> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Config(format!("series tolerance {tol} must be positive")));
    }
    let lambda = params.lambda();
    let prefactor = 2.0 * (1.0 - lambda) * (1.0 + lambda);
    if lambda == 0.0 {
        return Ok(AlphaSeries { alpha: 0.0, terms_used: 1, tail_estimate: 0.0 });
    }
    let ln_lambda = lambda.ln();
    let fa = ModeFactor::new(params.r_a());
    let fb = if params.r_b() == params.r_a() { fa } else { ModeFactor::new(params.r_b()) };
    let term = |m: usize| -> f64 {
        let (a, b) = (fa.at(m), fb.at(m));
        if a == 0.0 || b == 0.0 {
            return 0.0;
        }
        (m + 1) as f64 * ((2 * m + 1) as f64 * ln_lambda).exp() * a * b
    };

    let mut sum = CompensatedSum::default();
    let mut run = 0;
    let mut n = 0;
    while run < STOP_RUN {
        if n >= TERM_CAP {
            return Err(Error::Convergence { partial: prefactor * sum.value(), terms: n });
        }
        let t = term(n);
        sum.add(t);
        n += 1;
        if t <= tol * sum.value() {
            run += 1;
        } else {
            run = 0;
        }
    }

    loop {
        if 2 * n > TERM_CAP {
            return Err(Error::Convergence { partial: prefactor * sum.value(), terms: n });
        }
        let mut block = CompensatedSum::default();
        for m in n..2 * n {
            block.add(term(m));
        }
        let block = block.value();
        sum.add(block);
        n *= 2;
        if block <= 10.0 * tol * sum.value() {
            return Ok(AlphaSeries {
                alpha: prefactor * sum.value(),
                terms_used: n,
                tail_estimate: prefactor * block,
            });
        }
    }
}

/// `β = (1-λ²) / (1 - λ²(1-2R_A²)(1-2R_B²))`.
pub fn beta(params: &ChannelParams) -> f64 {
    let l2 = params.lambda() * params.lambda();
    let ca = 1.0 - 2.0 * params.r_a() * params.r_a();
    let cb = 1.0 - 2.0 * params.r_b() * params.r_b();
    (1.0 - l2) / (1.0 - l2 * ca * cb)
}

/// `2·sqrt(α² + max(α², β²))`.
pub fn bmax_from(alpha: f64, beta: f64) -> f64 {
    let a2 = alpha * alpha;
    2.0 * (a2 + a2.max(beta * beta)).sqrt()
}

pub fn bmax_analytic(params: &ChannelParams, tol: f64) -> Result<BellResult> {
    let series = alpha_series(params, tol)?;
    let beta = beta(params);
    let bmax = bmax_from(series.alpha, beta);
    Ok(BellResult {
        alpha: series.alpha,
        beta,
        bmax,
        violated: bmax > 2.0,
        terms_used: series.terms_used,
        tail_estimate: series.tail_estimate,
    })
}

/// Bell factor shared by Alice and the eavesdropper holding Bob's loss.
///
/// The exchange `R_B ↔ sqrt(1-R_B²)` maps the Alice–Eve state onto a
/// damped state with Bob-side reflectivity `sqrt(1-R_B²)`; any sign picked
/// up by the exchange only flips `α`, which enters squared.
pub fn eve_bmax_analytic(r: f64, r_b: f64, tol: f64) -> Result<BellResult> {
    check_damping("R_B", r_b)?;
    let swapped = ((1.0 - r_b) * (1.0 + r_b)).sqrt();
    bmax_analytic(&ChannelParams::new(r, 0.0, swapped)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lossless_bmax(lambda: f64) -> f64 {
        let a = 2.0 * lambda / (1.0 + lambda * lambda);
        2.0 * (1.0 + a * a).sqrt()
    }

    #[test]
    fn lambda_from_r_values() {
        assert_eq!(lambda_from_r(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(lambda_from_r(1.0).unwrap(), 0.7615941559557649, epsilon = 1e-15);
        assert_abs_diff_eq!(lambda_from_r(2.0).unwrap(), 0.9640275800758169, epsilon = 1e-15);
        assert!(matches!(lambda_from_r(5.5), Err(Error::Domain(_))));
        assert!(matches!(lambda_from_r(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn params_validate_ranges() {
        assert!(ChannelParams::new(1.0, 1.1, 0.0).is_err());
        assert!(ChannelParams::new(1.0, 0.0, -0.1).is_err());
        assert!(ChannelParams::from_lambda(1.0, 0.0, 0.0).is_err());
        let p = ChannelParams::from_lambda(0.5, 0.2, 0.3).unwrap();
        assert_abs_diff_eq!(p.r().tanh(), 0.5, epsilon = 1e-14);
        let p = ChannelParams::new(1.3, 0.2, 0.3).unwrap();
        assert_abs_diff_eq!(p.lambda(), 1.3_f64.tanh(), epsilon = 1e-14);
    }

    #[test]
    fn capital_lambda_examples() {
        assert_eq!(capital_lambda(0, 0.37).unwrap(), 1.0);
        assert_eq!(capital_lambda(0, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(capital_lambda(2, 0.0).unwrap(), 1.0 / 3.0_f64.sqrt(), epsilon = 1e-15);
        assert_eq!(capital_lambda(1, 0.0).unwrap(), 0.0);
        assert!(matches!(capital_lambda(3, 1.0), Err(Error::Divergence { m: 3 })));
    }

    #[test]
    fn capital_lambda_matches_hand_sum() {
        // m = 3, x = R/sqrt(1-R²): x^6 + 3 x^2 / sqrt(3)
        let r: f64 = 0.6;
        let x2 = r * r / (1.0 - r * r);
        let expected = x2.powi(3) + 3.0 * x2 / 3.0_f64.sqrt();
        assert_abs_diff_eq!(capital_lambda(3, r).unwrap(), expected, epsilon = 1e-13);
    }

    #[test]
    fn regrouped_factor_agrees_with_unregrouped_form() {
        for &r in &[0.0, 0.1, 0.42, 0.7, 0.95] {
            let t: f64 = 1.0 - r * r;
            for m in [0usize, 1, 2, 5, 17, 60] {
                let direct = t.powf((2 * m + 1) as f64 / 2.0) * capital_lambda(m, r).unwrap();
                let regrouped = regrouped_factor(m, r).unwrap();
                assert!(
                    (direct - regrouped).abs() <= 1e-13 * direct.abs().max(1e-300),
                    "m={m} R={r}: {direct} vs {regrouped}"
                );
            }
        }
    }

    #[test]
    fn regrouped_factor_at_full_loss_vanishes() {
        for m in 0..10 {
            assert_eq!(regrouped_factor(m, 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn regrouped_factor_window_matches_full_sum() {
        // full sum without the window, in log space
        let full = |m: usize, r: f64| {
            let t: f64 = 1.0 - r * r;
            let mut s = 0.0;
            for j in (0..=m).step_by(2) {
                let lp = ln_binomial(m, j) + j as f64 * t.ln() + (m - j) as f64 * (r * r).ln();
                s += lp.exp() / ((j + 1) as f64).sqrt();
            }
            t.sqrt() * s
        };
        for &r in &[0.05, 0.3, 0.8, 0.999] {
            for m in [100usize, 1000, 5000] {
                let a = full(m, r);
                let b = regrouped_factor(m, r).unwrap();
                assert!((a - b).abs() <= 1e-12 * a, "m={m} R={r}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn alpha_edge_cases() {
        let p = ChannelParams::new(0.0, 0.3, 0.4).unwrap();
        assert_eq!(alpha_series(&p, 1e-12).unwrap().alpha, 0.0);
        for (ra, rb) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
            let p = ChannelParams::new(1.2, ra, rb).unwrap();
            assert_eq!(alpha_series(&p, 1e-12).unwrap().alpha, 0.0);
        }
        let p = ChannelParams::new(1.0, 0.0, 0.0).unwrap();
        assert!(matches!(alpha_series(&p, 0.0), Err(Error::Config(_))));
    }

    #[test]
    fn alpha_lossless_closed_form() {
        for r in [0.1, 0.5, 1.0, 2.0, 3.0] {
            let p = ChannelParams::new(r, 0.0, 0.0).unwrap();
            let l = p.lambda();
            let a = alpha_series(&p, 1e-12).unwrap();
            assert_abs_diff_eq!(a.alpha, 2.0 * l / (1.0 + l * l), epsilon = 1e-11);
        }
        let p = ChannelParams::new(1.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(alpha_series(&p, 1e-12).unwrap().alpha, 0.9640275800758169, epsilon = 1e-12);
    }

    #[test]
    fn alpha_series_reports_truncation() {
        let p = ChannelParams::new(1.0, 0.3, 0.5).unwrap();
        let a = alpha_series(&p, 1e-12).unwrap();
        assert!(a.terms_used > 10);
        assert!(a.tail_estimate >= 0.0 && a.tail_estimate <= 10.0 * 1e-12 * a.alpha);
        assert!(a.alpha > 0.0 && a.alpha < 1.0);
        // tighter tolerance moves the value by at most the tail
        let b = alpha_series(&p, 1e-14).unwrap();
        assert!((a.alpha - b.alpha).abs() < 1e-10);
    }

    #[test]
    fn alpha_near_the_cap_runs_out_of_terms() {
        let p = ChannelParams::new(5.0, 0.0, 0.0).unwrap();
        assert!(matches!(alpha_series(&p, 1e-12), Err(Error::Convergence { .. })));
    }

    #[test]
    fn beta_examples() {
        let p = ChannelParams::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(beta(&p), 1.0);
        let p = ChannelParams::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(beta(&p), 1.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = ChannelParams::new(1.0, s, s).unwrap();
        assert_abs_diff_eq!(beta(&p), 0.41997434161402614, epsilon = 1e-14);
    }

    #[test]
    fn bmax_examples() {
        let b = bmax_analytic(&ChannelParams::new(0.0, 0.5, 0.5).unwrap(), 1e-12).unwrap();
        assert_eq!(b.bmax, 2.0);
        assert!(!b.violated);

        let p = ChannelParams::new(1.0, 0.0, 0.0).unwrap();
        let b = bmax_analytic(&p, 1e-12).unwrap();
        assert_abs_diff_eq!(b.bmax, lossless_bmax(p.lambda()), epsilon = 1e-10);
        assert_abs_diff_eq!(b.bmax, 2.7780202844089064, epsilon = 1e-10);
        assert!(b.violated);

        let b = bmax_analytic(&ChannelParams::new(1.0, 0.42, 0.42).unwrap(), 1e-12).unwrap();
        assert!((b.bmax - 2.0).abs() < 0.02, "bmax {}", b.bmax);

        let b = bmax_analytic(&ChannelParams::new(1.7, 1.0, 1.0).unwrap(), 1e-12).unwrap();
        assert_eq!(b.bmax, 2.0);
    }

    #[test]
    fn eve_bell_factor_at_extremes() {
        // Eve holding the whole of Bob's mode shares the undamped state with Alice.
        let full = eve_bmax_analytic(1.0, 1.0, 1e-12).unwrap();
        let nopa = bmax_analytic(&ChannelParams::new(1.0, 0.0, 0.0).unwrap(), 1e-12).unwrap();
        assert_abs_diff_eq!(full.bmax, nopa.bmax, epsilon = 1e-14);
        // no loss: Eve holds vacuum
        let none = eve_bmax_analytic(1.0, 0.0, 1e-12).unwrap();
        assert!(!none.violated);
    }

    #[test]
    fn monotone_degradation_while_nonlocal() {
        for r in [0.5, 1.0, 2.0] {
            let mut prev = f64::INFINITY;
            for i in 0..=100 {
                let big_r = i as f64 * 0.01;
                let b = bmax_analytic(&ChannelParams::new(r, big_r, big_r).unwrap(), 1e-12).unwrap();
                if prev <= 2.0 {
                    break;
                }
                assert!(b.bmax <= prev + 1e-12, "r={r} R={big_r}: {} > {prev}", b.bmax);
                prev = b.bmax;
            }
        }
    }

    #[test]
    fn symmetric_bell_factor_recovers_towards_vacuum() {
        // below the threshold B_max has a minimum and climbs back to 2 at R = 1
        let at = |big_r: f64| bmax_analytic(&ChannelParams::new(0.5, big_r, big_r).unwrap(), 1e-12).unwrap().bmax;
        assert!(at(0.84) > at(0.83));
        assert!(at(0.99) < 2.0);
        assert_eq!(at(1.0), 2.0);
    }
}
