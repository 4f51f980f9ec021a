use nalgebra::DMatrix;
use num_complex::Complex64;

use super::FockCutoff;

/// Pseudo-spin operators built from the Fock pairs `|2m⟩, |2m+1⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSpinSet {
    dim: usize,
    ops: [DMatrix<Complex64>; 3],
}

impl PseudoSpinSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s1(&self) -> &DMatrix<Complex64> {
        &self.ops[0]
    }

    pub fn s2(&self) -> &DMatrix<Complex64> {
        &self.ops[1]
    }

    pub fn s3(&self) -> &DMatrix<Complex64> {
        &self.ops[2]
    }

    /// `S_{i+1}` for `i = 0, 1, 2`.
    pub fn get(&self, i: usize) -> &DMatrix<Complex64> {
        &self.ops[i]
    }

    /// Largest deviation from `S_i² = 1`, `S_i = S_i†` and
    /// `[S_i, S_j] = 2i ε_ijk S_k`.
    pub fn algebra_residual(&self) -> f64 {
        let id = DMatrix::<Complex64>::identity(self.dim, self.dim);
        let two_i = Complex64::new(0.0, 2.0);
        let mut worst: f64 = 0.0;
        for s in &self.ops {
            worst = worst.max((s * s - &id).camax());
            worst = worst.max((s - s.adjoint()).camax());
        }
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let (a, b, c) = (&self.ops[i], &self.ops[j], &self.ops[k]);
            let comm = a * b - b * a;
            worst = worst.max((comm - c * two_i).camax());
        }
        worst
    }
}

/// `S₁ = Σ |2m⟩⟨2m+1| + h.c.`, `S₂ = i Σ (|2m+1⟩⟨2m| - |2m⟩⟨2m+1|)`,
/// `S₃ = Σ |2m⟩⟨2m| - |2m+1⟩⟨2m+1|`, truncated to `cutoff`.
pub fn pseudo_spin_ops(cutoff: FockCutoff) -> PseudoSpinSet {
    let d = cutoff.dim();
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut s1 = DMatrix::zeros(d, d);
    let mut s2 = DMatrix::zeros(d, d);
    let mut s3 = DMatrix::zeros(d, d);
    for m in 0..d / 2 {
        let (even, odd) = (2 * m, 2 * m + 1);
        s1[(even, odd)] = one;
        s1[(odd, even)] = one;
        s2[(odd, even)] = i;
        s2[(even, odd)] = -i;
        s3[(even, even)] = one;
        s3[(odd, odd)] = -one;
    }
    PseudoSpinSet { dim: d, ops: [s1, s2, s3] }
}
