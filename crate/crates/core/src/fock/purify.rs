//! Beamsplitter purification: the damped state rebuilt as a pure state of
//! signal modes plus vacuum ancillas, with the ancillas traced out.
//!
//! The beamsplitter is `exp(θ(a b† - a† b))`, `sin θ = R`, exponentiated
//! numerically on each fixed-photon-number block. A single photon goes to
//! `√(1-R²)|1,0⟩ + R|0,1⟩`.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::sparse::SparseMatrix;
use super::state::TruncatedState;
use super::{check_lambda, check_reflectivity, FockCutoff};
use crate::error::{Error, Result};

/// Largest cutoff accepted by the purification constructions.
///
/// The four-mode intermediate holds `O(dim³)` amplitudes and the partial
/// trace costs `O(dim⁴)`.
pub const MAX_PURIFICATION_DIM: usize = 128;

/// Sparse pure state of `M` modes on a common truncated grid.
#[derive(Debug, Clone)]
struct FockKet<const M: usize> {
    dim: usize,
    amps: BTreeMap<[usize; M], Complex64>,
    /// Norm² pushed outside the grid.
    dropped: f64,
}

impl<const M: usize> FockKet<M> {
    /// `sqrt(1-λ²) Σ λ^m |m, m, 0, ...⟩`.
    fn nopa(lambda: f64, dim: usize) -> Self {
        let norm = ((1.0 - lambda) * (1.0 + lambda)).sqrt();
        let mut amps = BTreeMap::new();
        for m in 0..dim {
            let a = norm * lambda.powi(m as i32);
            if a != 0.0 {
                let mut key = [0; M];
                key[0] = m;
                key[1] = m;
                amps.insert(key, Complex64::new(a, 0.0));
            }
        }
        Self { dim, amps, dropped: 0.0 }
    }

    /// Reduced density matrix of the modes in `keep`.
    fn reduce(&self, keep: [usize; 2]) -> SparseMatrix {
        let d = self.dim;
        let mut groups: BTreeMap<Vec<usize>, Vec<(usize, Complex64)>> = BTreeMap::new();
        for (key, &amp) in &self.amps {
            let traced: Vec<usize> =
                (0..M).filter(|i| !keep.contains(i)).map(|i| key[i]).collect();
            groups.entry(traced).or_default().push((key[keep[0]] * d + key[keep[1]], amp));
        }
        let mut acc: HashMap<(usize, usize), Complex64> = HashMap::new();
        for members in groups.values() {
            for &(i, ai) in members {
                for &(j, aj) in members {
                    *acc.entry((i, j)).or_insert(Complex64::new(0.0, 0.0)) += ai * aj.conj();
                }
            }
        }
        SparseMatrix::from_map(d * d, acc)
    }
}

/// Block-diagonal beamsplitter unitary.
struct BeamSplitter {
    /// `blocks[N][(k_out, k_in)]`, `k` = ancilla photons, `N - k` in the signal mode.
    blocks: Vec<DMatrix<f64>>,
}

impl BeamSplitter {
    fn new(reflectivity: f64, max_total: usize) -> Self {
        let theta = reflectivity.asin();
        let blocks = (0..=max_total)
            .map(|total| {
                let s = total + 1;
                let mut g = DMatrix::<f64>::zeros(s, s);
                for k in 0..s {
                    let sys = (total - k) as f64;
                    // a b†: one photon from signal to ancilla
                    if k < total {
                        g[(k + 1, k)] += (sys * (k + 1) as f64).sqrt();
                    }
                    // -a† b: one photon back from ancilla to signal
                    if k > 0 {
                        g[(k - 1, k)] -= ((sys + 1.0) * k as f64).sqrt();
                    }
                }
                (g * theta).exp()
            })
            .collect();
        Self { blocks }
    }

    fn apply<const M: usize>(&self, ket: &FockKet<M>, signal: usize, ancilla: usize) -> FockKet<M> {
        let d = ket.dim;
        let mut amps: BTreeMap<[usize; M], Complex64> = BTreeMap::new();
        let mut outside: HashMap<[usize; M], Complex64> = HashMap::new();
        for (key, &amp) in &ket.amps {
            let k_in = key[ancilla];
            let total = key[signal] + k_in;
            let u = &self.blocks[total];
            for k_out in 0..=total {
                let c = u[(k_out, k_in)];
                if c == 0.0 {
                    continue;
                }
                let mut out = *key;
                out[signal] = total - k_out;
                out[ancilla] = k_out;
                if out[signal] < d && out[ancilla] < d {
                    *amps.entry(out).or_insert(Complex64::new(0.0, 0.0)) += amp * c;
                } else {
                    *outside.entry(out).or_insert(Complex64::new(0.0, 0.0)) += amp * c;
                }
            }
        }
        let dropped = ket.dropped + outside.values().map(|a| a.norm_sqr()).sum::<f64>();
        FockKet { dim: d, amps, dropped }
    }
}

fn deficit(lambda: f64, d: usize, ket_dropped: f64) -> f64 {
    lambda.powi(2 * d as i32) + ket_dropped
}

fn check_dim(cutoff: FockCutoff) -> Result<usize> {
    let d = cutoff.dim();
    if d > MAX_PURIFICATION_DIM {
        return Err(Error::ResourceLimit { dim: d, max: MAX_PURIFICATION_DIM });
    }
    Ok(d)
}

/// Damped two-mode state from `NOPA ⊗ |0⟩_A' ⊗ |0⟩_B'`, beamsplitters
/// `A–A'` (reflectivity `R_A`) and `B–B'` (`R_B`), ancillas traced out.
pub fn lossy_state_purified(lambda: f64, r_a: f64, r_b: f64, cutoff: FockCutoff) -> Result<TruncatedState> {
    check_lambda(lambda)?;
    check_reflectivity("R_A", r_a)?;
    check_reflectivity("R_B", r_b)?;
    let d = check_dim(cutoff)?;
    let ket = FockKet::<4>::nopa(lambda, d);
    let ket = BeamSplitter::new(r_a, d - 1).apply(&ket, 0, 2);
    let ket = BeamSplitter::new(r_b, d - 1).apply(&ket, 1, 3);
    TruncatedState::new(vec![d, d], ket.reduce([0, 1]), deficit(lambda, d, ket.dropped))
}

/// Alice–Eve state from `NOPA ⊗ |0⟩_E`, a beamsplitter `B–E` with
/// reflectivity `R_B`, Bob traced out. Modes ordered `(A, E)`.
pub fn eve_state_purified(lambda: f64, r_b: f64, cutoff: FockCutoff) -> Result<TruncatedState> {
    check_lambda(lambda)?;
    check_reflectivity("R_B", r_b)?;
    let d = check_dim(cutoff)?;
    let ket = FockKet::<3>::nopa(lambda, d);
    let ket = BeamSplitter::new(r_b, d - 1).apply(&ket, 1, 2);
    TruncatedState::new(vec![d, d], ket.reduce([0, 2]), deficit(lambda, d, ket.dropped))
}
