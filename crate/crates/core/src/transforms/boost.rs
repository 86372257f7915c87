//! Success boosting: replicable attempt, test on fresh samples, fall back.
//!
//! Data is supplied pre-split as `(replicable part, tester part, fallback
//! part)`; no stage ever sees another stage's samples.

use crate::error::{param, Result};
use crate::problems::{MeanStatistic, SampleLen};
use crate::replicable::{ReplicableAlgorithm, SqEstimateConfig, SqEstimator};
use crate::seed::SeedKey;

use super::testers::{EmpiricalMean, Fallback, MeanTester, Tester};

/// Runs `replicable` on part 1 with `key`; returns its output if `tester`
/// accepts it on part 2, else `fallback` on part 3.
pub fn boost_success<R, T, F>(
    replicable: &R,
    tester: &T,
    fallback: &F,
    data: &(R::Data, T::Data, F::Data),
    key: &SeedKey,
) -> Result<R::Output>
where
    R: ReplicableAlgorithm,
    R::Data: SampleLen,
    T: Tester<Candidate = R::Output>,
    F: Fallback<Output = R::Output>,
{
    let have = data.0.sample_len();
    if have < replicable.sample_complexity() {
        return Err(param(format!(
            "replicable part holds {have} samples, needs {}",
            replicable.sample_complexity()
        )));
    }
    let u = replicable.run(&data.0, key)?;
    if tester.test(&u, &data.1)?.accepted() {
        Ok(u)
    } else {
        fallback.solve(&data.2)
    }
}

#[derive(Clone, Debug)]
pub struct Boosted<R, T, F> {
    pub replicable: R,
    pub tester: T,
    pub fallback: F,
}

impl<R, T, F> Boosted<R, T, F>
where
    R: ReplicableAlgorithm,
    T: Tester,
    F: Fallback,
{
    /// Sizes of the three parts.
    pub fn part_sizes(&self) -> [usize; 3] {
        [self.replicable.sample_complexity(), self.tester.sample_complexity(), self.fallback.sample_complexity()]
    }
}

impl<R, T, F> ReplicableAlgorithm for Boosted<R, T, F>
where
    R: ReplicableAlgorithm,
    R::Data: SampleLen,
    T: Tester<Candidate = R::Output>,
    F: Fallback<Output = R::Output>,
{
    type Data = (R::Data, T::Data, F::Data);
    type Output = R::Output;

    fn run(&self, data: &Self::Data, key: &SeedKey) -> Result<R::Output> {
        boost_success(&self.replicable, &self.tester, &self.fallback, data, key)
    }

    fn sample_complexity(&self) -> usize {
        self.part_sizes().iter().sum()
    }
}

pub type BoostedSq<D> = Boosted<SqEstimator<D>, MeanTester<D>, EmpiricalMean<D>>;

/// Boosted SQ estimation: SQ at `(ρ/4, α/2, ρ/4)`, mean tester at
/// `(α/2, min(ρ,β)/4)`, empirical-mean fallback at `(α, β/2)`.
pub fn boosted_sq<D: MeanStatistic>(rho: f64, alpha: f64, beta: f64, sq_c: f64) -> Result<BoostedSq<D>> {
    Ok(Boosted {
        replicable: SqEstimator::new(SqEstimateConfig::new(rho / 4.0, alpha / 2.0, rho / 4.0, sq_c)?),
        tester: MeanTester::new(alpha / 2.0, rho.min(beta) / 4.0)?,
        fallback: EmpiricalMean::new(alpha, beta / 2.0)?,
    })
}
