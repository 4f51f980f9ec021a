//! Truncated Fock-space construction of the damped two-mode squeezed vacuum.
//!
//! Everything here is brute force: explicit density matrices, explicit
//! pseudo-spin matrices, explicit traces. It exists to check the closed
//! forms in [`crate::analytic`] by independent arithmetic.

mod correlation;
mod purify;
mod sparse;
mod spin;
mod state;

pub use correlation::{correlation_matrix, CorrelationMatrix};
pub use purify::{eve_state_purified, lossy_state_purified, MAX_PURIFICATION_DIM};
pub use sparse::SparseMatrix;
pub use spin::{pseudo_spin_ops, PseudoSpinSet};
pub use state::{
    eve_state, eve_state_literal, lossy_state_direct, tmsv_state, trace_distance, StateDiagnostics,
    TruncatedState,
};

use crate::error::{Error, Result};

/// Single-mode truncation: Fock levels `0..dim`.
///
/// `dim` is even so every pseudo-spin pair `|2m⟩, |2m+1⟩` is complete.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockCutoff(usize);

impl FockCutoff {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Config(format!("Fock cutoff {dim} must be at least 2")));
        }
        if !dim.is_multiple_of(2) {
            return Err(Error::Config(format!("Fock cutoff {dim} must be even")));
        }
        Ok(Self(dim))
    }

    /// `max(40, ceil(10·(1 + sinh² r)))`, rounded up to even.
    pub fn for_squeezing(r: f64) -> Self {
        let want = (10.0 * (1.0 + r.sinh().powi(2))).ceil() as usize;
        let dim = want.max(40);
        Self(dim + dim % 2)
    }

    pub fn dim(self) -> usize {
        self.0
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda = {lambda} must lie in [0, 1)")));
    }
    Ok(())
}

pub(crate) fn check_reflectivity(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::Domain(format!("{name} = {value} must lie in [0, 1]")));
    }
    Ok(())
}
