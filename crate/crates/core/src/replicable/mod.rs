//! Replicable algorithms and the contract they share.

mod best_arm;
mod grid;
mod heavy;
mod sign;
mod simple;
mod sq;

use std::fmt::Debug;

use crate::error::Result;
use crate::problems::FiniteDistribution;
use crate::seed::SeedKey;

pub use best_arm::{replicable_best_arm, BestArmConfig, ReplicableBestArm};
pub use grid::{FixedGridConfig, FixedGridSq};
pub use heavy::{replicable_heavy_hitters, DEFAULT_HH_C, HeavyHittersConfig, ReplicableHeavyHitters};
pub use sign::{replicable_sign_test, SignTest};
pub use simple::{Constant, FirstSample, IndicatorQuery, RawMean};
pub use sq::{replicable_sq_estimate, DEFAULT_SQ_C, sq_round, SqEstimateConfig, SqEstimator};

/// `(samples, shared seed) → output`.
///
/// Implementations must be pure: equal data and key give equal output.
pub trait ReplicableAlgorithm: Send + Sync {
    type Data;
    type Output: Clone + PartialEq + Debug + Send + Sync;

    fn run(&self, data: &Self::Data, key: &SeedKey) -> Result<Self::Output>;

    /// Number of samples the algorithm expects.
    fn sample_complexity(&self) -> usize;

    /// The full, ordered output space when it is finite and small.
    fn output_space(&self) -> Option<Vec<Self::Output>> {
        None
    }

    /// Exact law of the output over the internal randomness, when cheaply
    /// computable.
    fn output_distribution(&self, _data: &Self::Data) -> Option<Result<FiniteDistribution<Self::Output>>> {
        None
    }
}

impl<A: ReplicableAlgorithm + ?Sized> ReplicableAlgorithm for &A {
    type Data = A::Data;
    type Output = A::Output;

    fn run(&self, data: &Self::Data, key: &SeedKey) -> Result<Self::Output> {
        (**self).run(data, key)
    }

    fn sample_complexity(&self) -> usize {
        (**self).sample_complexity()
    }

    fn output_space(&self) -> Option<Vec<Self::Output>> {
        (**self).output_space()
    }

    fn output_distribution(&self, data: &Self::Data) -> Option<Result<FiniteDistribution<Self::Output>>> {
        (**self).output_distribution(data)
    }
}

impl<A: ReplicableAlgorithm + ?Sized> ReplicableAlgorithm for Box<A> {
    type Data = A::Data;
    type Output = A::Output;

    fn run(&self, data: &Self::Data, key: &SeedKey) -> Result<Self::Output> {
        (**self).run(data, key)
    }

    fn sample_complexity(&self) -> usize {
        (**self).sample_complexity()
    }

    fn output_space(&self) -> Option<Vec<Self::Output>> {
        (**self).output_space()
    }

    fn output_distribution(&self, data: &Self::Data) -> Option<Result<FiniteDistribution<Self::Output>>> {
        (**self).output_distribution(data)
    }
}

/// Standard replicable sample budget
/// `⌈C·ln(1/min(ρ, β)) / (α²·ρ²)⌉` for rounding-based estimators.
pub fn rounding_budget(c: f64, rho: f64, alpha: f64, beta: f64) -> usize {
    (c * (1.0 / rho.min(beta)).ln() / (alpha * alpha * rho * rho)).ceil() as usize
}
