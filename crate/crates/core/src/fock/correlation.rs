use num_complex::Complex64;

use super::spin::PseudoSpinSet;
use super::state::TruncatedState;
use crate::error::{Error, Result};

/// `V_ij = Tr(ρ S_i^A S_j^B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationMatrix {
    pub v: [[f64; 3]; 3],
    /// Largest imaginary part discarded from the nine traces.
    pub imag_residue: f64,
}

impl CorrelationMatrix {
    pub fn new(v: [[f64; 3]; 3]) -> Self {
        Self { v, imag_residue: 0.0 }
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Self::new([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.v[i][j]
    }

    /// Largest off-diagonal magnitude.
    pub fn off_diagonal(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    worst = worst.max(self.v[i][j].abs());
                }
            }
        }
        worst
    }
}

pub fn correlation_matrix(state: &TruncatedState, spins: &PseudoSpinSet) -> Result<CorrelationMatrix> {
    let d = spins.dim();
    if state.dims().len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: state.dims().len() });
    }
    for &found in state.dims() {
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    let mut acc = [[Complex64::new(0.0, 0.0); 3]; 3];
    // Tr(ρ X) = Σ ρ_{(a b),(a' b')} X_{(a' b'),(a b)}, X = S_i ⊗ S_j
    for &(row, col, rho) in state.matrix().entries() {
        let (a, b) = (row / d, row % d);
        let (ap, bp) = (col / d, col % d);
        for (i, acc_row) in acc.iter_mut().enumerate() {
            let sa = spins.get(i)[(ap, a)];
            if sa == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, slot) in acc_row.iter_mut().enumerate() {
                let sb = spins.get(j)[(bp, b)];
                if sb != Complex64::new(0.0, 0.0) {
                    *slot += rho * sa * sb;
                }
            }
        }
    }
    let mut v = [[0.0; 3]; 3];
    let mut imag_residue: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            v[i][j] = acc[i][j].re;
            imag_residue = imag_residue.max(acc[i][j].im.abs());
        }
    }
    Ok(CorrelationMatrix { v, imag_residue })
}
