//! Sparse complex matrices with exact block decomposition.
//!
//! Damped two-mode states only couple Fock pairs with equal photon-number
//! difference, so they split into many small Hermitian blocks. Spectra are
//! computed block by block.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Square matrix stored as row-major sorted `(row, col, value)` triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    /// Builds from accumulated entries, dropping exact zeros.
    pub fn from_map(n: usize, map: HashMap<(usize, usize), Complex64>) -> Self {
        let mut entries: Vec<_> = map
            .into_iter()
            .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
            .map(|((i, j), v)| (i, j, v))
            .collect();
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        debug_assert!(entries.iter().all(|&(i, j, _)| i < n && j < n));
        Self { n, entries }
    }

    /// Sums duplicate positions.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut map = HashMap::new();
        for (i, j, v) in triplets {
            *map.entry((i, j)).or_insert(Complex64::new(0.0, 0.0)) += v;
        }
        Self::from_map(n, map)
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        let n = m.nrows();
        let triplets = (0..n).flat_map(|i| (0..n).map(move |j| (i, j, m[(i, j)])));
        Self::from_triplets(n, triplets)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self.entries.binary_search_by_key(&(i, j), |&(a, b, _)| (a, b)) {
            Ok(pos) => self.entries[pos].2,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.iter().filter(|(i, j, _)| i == j).map(|e| e.2).sum()
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let triplets = self
            .entries
            .iter()
            .copied()
            .chain(other.entries.iter().map(|&(i, j, v)| (i, j, -v)));
        Self::from_triplets(self.n, triplets)
    }

    pub fn map_values(&self, f: impl Fn(usize, usize, Complex64) -> Complex64) -> SparseMatrix {
        Self::from_triplets(self.n, self.entries.iter().map(|&(i, j, v)| (i, j, f(i, j, v))))
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
        }
        m
    }

    /// Index sets of the connected components of the sparsity graph.
    /// Indices that touch no entry are omitted.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut parent: HashMap<usize, usize> = HashMap::new();
        fn find(parent: &mut HashMap<usize, usize>, x: usize) -> usize {
            let mut root = x;
            while parent[&root] != root {
                root = parent[&root];
            }
            let mut cur = x;
            while parent[&cur] != root {
                let next = parent[&cur];
                parent.insert(cur, root);
                cur = next;
            }
            root
        }
        for &(i, j, _) in &self.entries {
            parent.entry(i).or_insert(i);
            parent.entry(j).or_insert(j);
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                let (lo, hi) = if ri < rj { (ri, rj) } else { (rj, ri) };
                parent.insert(hi, lo);
            }
        }
        let mut keys: Vec<usize> = parent.keys().copied().collect();
        keys.sort_unstable();
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for k in keys {
            let root = find(&mut parent, k);
            groups.entry(root).or_default().push(k);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort_unstable_by_key(|g| g[0]);
        out
    }

    /// Eigenvalues of the Hermitian part, one block at a time. Indices
    /// outside every block contribute implicit zeros, which are not listed.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for block in self.blocks() {
            let pos: HashMap<usize, usize> = block.iter().enumerate().map(|(p, &i)| (i, p)).collect();
            let s = block.len();
            let mut m = DMatrix::<Complex64>::zeros(s, s);
            for &(i, j, v) in &self.entries {
                if let (Some(&p), Some(&q)) = (pos.get(&i), pos.get(&j)) {
                    m[(p, q)] += 0.5 * v;
                    m[(q, p)] += 0.5 * v.conj();
                }
            }
            if s == 1 {
                out.push(m[(0, 0)].re);
            } else {
                out.extend(SymmetricEigen::new(m).eigenvalues.iter().copied());
            }
        }
        out
    }

    /// `Σ |eigenvalue|` of the Hermitian part.
    pub fn trace_norm(&self) -> f64 {
        self.hermitian_eigenvalues().iter().fold(0.0, |acc, e| acc + e.abs())
    }
}
