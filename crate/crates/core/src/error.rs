use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A physical parameter lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid numerical configuration (cutoff, tolerance, grid).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("series did not converge within {terms} terms (partial sum {partial})")]
    Convergence { partial: f64, terms: usize },

    /// The unregrouped `Λ(m)` form blows up at full loss.
    #[error("Λ({m}) diverges at R = 1")]
    Divergence { m: usize },

    #[error("state is never nonlocal: B_max(R=0) = {bmax_at_zero} at r = {r}")]
    NeverNonlocal { r: f64, bmax_at_zero: f64 },

    /// No sign change of `B_max - 2` was found; the coarse scan is attached.
    #[error("could not bracket the threshold at r = {r} ({} scan points)", scan.len())]
    Bracketing { r: f64, scan: Vec<(f64, f64)> },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cutoff {dim} exceeds the purification limit of {max}")]
    ResourceLimit { dim: usize, max: usize },

    #[error("infinite loss: R = 1 has no finite absorption coefficient")]
    InfiniteLoss,
}

pub type Result<T> = std::result::Result<T, Error>;
