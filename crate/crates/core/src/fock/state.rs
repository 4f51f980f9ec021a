use std::collections::HashMap;

use num_complex::Complex64;

use super::sparse::SparseMatrix;
use super::{check_lambda, check_reflectivity, FockCutoff};
use crate::error::{Error, Result};
use crate::special::sqrt_binomial;

/// Density operator on a product of truncated Fock spaces.
///
/// Basis index of `|n_0, n_1, ...⟩` is row-major in the mode order.
/// `trace_deficit` is the probability weight that fell outside the grid; it
/// is never renormalised away.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState {
    dims: Vec<usize>,
    matrix: SparseMatrix,
    trace_deficit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub trace_deficit: f64,
}

impl StateDiagnostics {
    /// Hermitian to 1e-12, PSD to -1e-10, trace plus deficit one to 1e-12.
    pub fn is_physical(&self) -> bool {
        self.hermiticity_error <= 1e-12
            && self.min_eigenvalue >= -1e-10
            && (self.trace + self.trace_deficit - 1.0).abs() <= 1e-12
    }
}

impl TruncatedState {
    pub fn new(dims: Vec<usize>, matrix: SparseMatrix, trace_deficit: f64) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total != matrix.dim() {
            return Err(Error::DimensionMismatch { expected: total, found: matrix.dim() });
        }
        Ok(Self { dims, matrix, trace_deficit })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Fock occupation of every mode for a basis index.
    pub fn levels(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    pub fn index(&self, levels: &[usize]) -> usize {
        levels.iter().zip(&self.dims).fold(0, |acc, (&n, &d)| acc * d + n)
    }

    /// `⟨n⟩` of one mode.
    pub fn mean_photon_number(&self, mode: usize) -> f64 {
        self.matrix
            .entries()
            .iter()
            .filter(|(i, j, _)| i == j)
            .map(|&(i, _, v)| v.re * self.levels(i)[mode] as f64)
            .sum()
    }

    /// `P ρ P` with `P = (-1)^{N}` acting on one mode.
    pub fn conjugate_by_parity(&self, mode: usize) -> Self {
        let matrix = self.matrix.map_values(|i, j, v| {
            if (self.levels(i)[mode] + self.levels(j)[mode]) % 2 == 1 {
                -v
            } else {
                v
            }
        });
        Self { dims: self.dims.clone(), matrix, trace_deficit: self.trace_deficit }
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        let eig = self.matrix.hermitian_eigenvalues();
        let mut min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if eig.len() < self.matrix.dim() {
            // indices outside every block carry implicit zero eigenvalues
            min = min.min(0.0);
        }
        StateDiagnostics {
            hermiticity_error: self.matrix.hermiticity_error(),
            min_eigenvalue: if min.is_finite() { min } else { 0.0 },
            trace: self.trace(),
            trace_deficit: self.trace_deficit,
        }
    }
}

/// `½ Σ |eig(ρ₁ - ρ₂)|`.
pub fn trace_distance(a: &TruncatedState, b: &TruncatedState) -> Result<f64> {
    if a.dims != b.dims {
        let (ea, eb) = (a.dims.iter().product(), b.dims.iter().product());
        return Err(Error::DimensionMismatch { expected: ea, found: eb });
    }
    Ok(0.5 * a.matrix.sub(&b.matrix).trace_norm())
}

/// `(1-λ²) Σ_{m,n<dim} λ^{m+n} |m,m⟩⟨n,n|`.
pub fn tmsv_state(lambda: f64, cutoff: FockCutoff) -> Result<TruncatedState> {
    check_lambda(lambda)?;
    let d = cutoff.dim();
    let norm = (1.0 - lambda) * (1.0 + lambda);
    let powers: Vec<f64> = (0..d as i32).map(|m| lambda.powi(m)).collect();
    let triplets = (0..d).flat_map(|m| {
        let powers = &powers;
        (0..d).map(move |n| (m * d + m, n * d + n, Complex64::new(norm * powers[m] * powers[n], 0.0)))
    });
    let matrix = SparseMatrix::from_triplets(d * d, triplets);
    TruncatedState::new(vec![d, d], matrix, lambda.powi(2 * d as i32))
}

/// `c[m][k] = sqrt(C(m,k)) · keep^{m-k} · lose^k`: amplitude of `m` photons
/// leaving `m-k` in the mode. Powers are combined before multiplying, so no
/// `R/sqrt(1-R²)` ratio ever appears.
fn mode_coefficients(keep: f64, lose: f64, d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|m| {
            (0..=m)
                .map(|k| sqrt_binomial(m, k) * keep.powi((m - k) as i32) * lose.powi(k as i32))
                .collect()
        })
        .collect()
}

/// Generic damped sum: `(1-λ²) Σ λ^{m+n} Σ_{k,l} c_A[m][k] c_A[n][k] c_B[m][l] c_B[n][l]
/// |m-k, m-l⟩⟨n-k, n-l|`.
fn damped_sum(lambda: f64, d: usize, ca: &[Vec<f64>], cb: &[Vec<f64>]) -> Result<TruncatedState> {
    let norm = (1.0 - lambda) * (1.0 + lambda);
    let powers: Vec<f64> = (0..d as i32).map(|m| lambda.powi(m)).collect();
    let mut acc: HashMap<(usize, usize), Complex64> = HashMap::new();
    for m in 0..d {
        for n in 0..d {
            let weight = norm * powers[m] * powers[n];
            if weight == 0.0 {
                continue;
            }
            let top = m.min(n);
            for k in 0..=top {
                let fa = ca[m][k] * ca[n][k];
                if fa == 0.0 {
                    continue;
                }
                for l in 0..=top {
                    let fb = cb[m][l] * cb[n][l];
                    if fb == 0.0 {
                        continue;
                    }
                    let row = (m - k) * d + (m - l);
                    let col = (n - k) * d + (n - l);
                    *acc.entry((row, col)).or_insert(Complex64::new(0.0, 0.0)) +=
                        Complex64::new(weight * fa * fb, 0.0);
                }
            }
        }
    }
    TruncatedState::new(vec![d, d], SparseMatrix::from_map(d * d, acc), lambda.powi(2 * d as i32))
}

/// Damped two-mode state evaluated from the closed-form Fock sum.
pub fn lossy_state_direct(lambda: f64, r_a: f64, r_b: f64, cutoff: FockCutoff) -> Result<TruncatedState> {
    check_lambda(lambda)?;
    check_reflectivity("R_A", r_a)?;
    check_reflectivity("R_B", r_b)?;
    let d = cutoff.dim();
    let ca = mode_coefficients(((1.0 - r_a) * (1.0 + r_a)).sqrt(), r_a, d);
    let cb = mode_coefficients(((1.0 - r_b) * (1.0 + r_b)).sqrt(), r_b, d);
    damped_sum(lambda, d, &ca, &cb)
}

fn eve_with_sign(lambda: f64, r_b: f64, cutoff: FockCutoff, sign: f64) -> Result<TruncatedState> {
    check_lambda(lambda)?;
    check_reflectivity("R_B", r_b)?;
    let d = cutoff.dim();
    let ca = mode_coefficients(1.0, 0.0, d);
    let cb = mode_coefficients(sign * r_b, ((1.0 - r_b) * (1.0 + r_b)).sqrt(), d);
    damped_sum(lambda, d, &ca, &cb)
}

/// Joint state of Alice and the eavesdropper who holds the light reflected
/// out of Bob's arm (`R_A = 0`), modes ordered `(A, E)`.
///
/// Obtained from the damped sum by exchanging the roles of `R_B` and
/// `sqrt(1-R_B²)`, with the real reflection convention (`+R_B`).
pub fn eve_state(lambda: f64, r_b: f64, cutoff: FockCutoff) -> Result<TruncatedState> {
    eve_with_sign(lambda, r_b, cutoff, 1.0)
}

/// Alice–Eve state with the exchange `sqrt(1-R_B²) → -R_B` taken literally.
///
/// Differs from [`eve_state`] by the local unitary `(-1)^{N_E}` on Eve's
/// mode, so every local-unitary invariant (and the Bell factor) agrees.
pub fn eve_state_literal(lambda: f64, r_b: f64, cutoff: FockCutoff) -> Result<TruncatedState> {
    eve_with_sign(lambda, r_b, cutoff, -1.0)
}
