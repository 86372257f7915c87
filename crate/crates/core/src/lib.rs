//! Replicable learning algorithms, the transformations between them, and
//! instruments for measuring replicability empirically.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod composition;
pub mod correlated;
pub mod error;
pub mod lowerbound;
pub mod meter;
pub mod problems;
pub mod replicable;
pub mod scalar;
pub mod seed;
pub mod transforms;

pub use error::{Error, Result};
pub use replicable::ReplicableAlgorithm;
pub use seed::SeedKey;

/// Double-precision instances of the generic composition calculators.
pub type CompositionParams = composition::CompositionParams<f64>;
pub type Constants = composition::Constants<f64>;
pub type PgParams = composition::PgParams<f64>;
pub type HetComposition = composition::HetComposition<f64>;
