//! Convergence machinery for the Dyson-series construction of the
//! stationary state: Hermite eigenbasis tooling, weighted Sobolev
//! interaction norms, contraction-tree combinatorics, the time-decay
//! constant, and the resulting convergence certificate.

mod certificate;
mod hermite;
mod interaction;
mod series;
mod trees;

pub use certificate::{
    certify, theorem_bound, time_decay_constant, time_decay_constant_quadrature, Certificate,
};
pub use hermite::{
    hermite_eval, hermite_l1_norm, hermite_values, l1_norm_bound_check, propagator_overlap,
    propagator_overlap_bound, L1BoundRow,
};
pub use interaction::{
    interaction_norm, interaction_norm_from_parts, BodyTermNorm, InteractionNorm,
};
pub use series::{
    seminorm_translation_invariant, sobolev_norm, sobolev_norm_translated, HermiteSeries,
    ShiftSearch,
};
pub use trees::{incidence_sum_identity, tree_count, tree_enumerate};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DysonError {
    #[error("dimension {0} too low: the time-decay integral diverges for d <= 2")]
    DimensionTooLow(u32),
    #[error("invalid incidence profile: {0}")]
    InvalidIncidence(String),
    #[error("Hermite truncation insufficient: estimated tail fraction {tail_fraction:.3e}")]
    TruncationInsufficient { tail_fraction: f64 },
    #[error("numerically verified bound violated: {0}")]
    BoundViolated(String),
    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),
    #[error(transparent)]
    Quadrature(#[from] crate::quadrature::QuadratureError),
}
