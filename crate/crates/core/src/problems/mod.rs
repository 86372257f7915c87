//! Distributions, samples and validity predicates.

mod bernoulli;
mod dist;
mod histogram;
mod sample;
mod validity;

pub use bernoulli::{
    Bernoulli, BernoulliProduct, BitCount, CoinCounts, CoinFlips, Summarized, MAX_COINS,
};
pub(crate) use dist::CumulativeTable;
pub use dist::{tv_distance, FiniteDistribution};
pub use histogram::{FrequencyData, Histogram};
pub use sample::{
    Chunked, MeanStatistic, PerArm, SampleLen, SampleSet, SampleSource, ThreeParts, UniformUnit, UnitValue,
};
pub use validity::{is_valid, ElementId, GridPoint, GroundTruth, Output, Sign, StatProblem};

/// Draws `n` i.i.d. samples from `source`.
pub fn sample<S: SampleSource>(source: &S, n: usize, key: &crate::SeedKey) -> crate::Result<S::Data> {
    source.draw(n, key)
}
