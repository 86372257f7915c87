//! Small reference algorithms used by the harness and tests.

use std::fmt::Debug;
use std::marker::PhantomData;

use crate::error::{param, Result};
use crate::problems::{BitCount, FiniteDistribution, MeanStatistic, SampleSet};
use crate::seed::SeedKey;

use super::ReplicableAlgorithm;

/// Ignores its input. Perfectly replicable.
#[derive(Clone, Debug)]
pub struct Constant<Y, D> {
    pub value: Y,
    pub n: usize,
    _data: PhantomData<fn(&D)>,
}

impl<Y, D> Constant<Y, D> {
    pub fn new(value: Y, n: usize) -> Self {
        Self { value, n, _data: PhantomData }
    }
}

impl<Y, D> ReplicableAlgorithm for Constant<Y, D>
where
    Y: Clone + PartialEq + Debug + Send + Sync,
{
    type Data = D;
    type Output = Y;

    fn run(&self, _data: &D, _key: &SeedKey) -> Result<Y> {
        Ok(self.value.clone())
    }

    fn sample_complexity(&self) -> usize {
        self.n
    }

    fn output_space(&self) -> Option<Vec<Y>> {
        Some(vec![self.value.clone()])
    }

    fn output_distribution(&self, _data: &D) -> Option<Result<FiniteDistribution<Y>>> {
        Some(Ok(FiniteDistribution::point(self.value.clone())))
    }
}

/// The unrounded empirical mean. Accurate but not replicable on continuous
/// data.
#[derive(Debug)]
pub struct RawMean<D> {
    pub n: usize,
    _data: PhantomData<fn(&D)>,
}

impl<D> Clone for RawMean<D> {
    fn clone(&self) -> Self {
        Self { n: self.n, _data: PhantomData }
    }
}

impl<D> RawMean<D> {
    pub fn new(n: usize) -> Self {
        Self { n, _data: PhantomData }
    }
}

impl<D: MeanStatistic> ReplicableAlgorithm for RawMean<D> {
    type Data = D;
    type Output = f64;

    fn run(&self, data: &D, _key: &SeedKey) -> Result<f64> {
        data.empirical_mean()
    }

    fn sample_complexity(&self) -> usize {
        self.n
    }
}

/// Returns the first sample. Depends on sample order.
#[derive(Debug)]
pub struct FirstSample<X> {
    pub n: usize,
    _data: PhantomData<fn(&X)>,
}

impl<X> Clone for FirstSample<X> {
    fn clone(&self) -> Self {
        Self { n: self.n, _data: PhantomData }
    }
}

impl<X> FirstSample<X> {
    pub fn new(n: usize) -> Self {
        Self { n, _data: PhantomData }
    }
}

impl<X: Clone + PartialEq + Debug + Send + Sync> ReplicableAlgorithm for FirstSample<X> {
    type Data = SampleSet<X>;
    type Output = X;

    fn run(&self, data: &SampleSet<X>, _key: &SeedKey) -> Result<X> {
        data.items().first().cloned().ok_or_else(|| param("empty sample"))
    }

    fn sample_complexity(&self) -> usize {
        self.n
    }
}

/// The statistical query "fraction of samples equal to `target`", answered
/// by a count-based algorithm.
#[derive(Clone, Debug)]
pub struct IndicatorQuery<A, X> {
    pub target: X,
    pub alg: A,
}

impl<A, X: PartialEq> IndicatorQuery<A, X> {
    fn count(&self, data: &SampleSet<X>) -> Result<BitCount> {
        let ones = data.iter().filter(|x| **x == self.target).count();
        BitCount::new(ones as u64, data.n() as u64)
    }
}

impl<A, X> ReplicableAlgorithm for IndicatorQuery<A, X>
where
    A: ReplicableAlgorithm<Data = BitCount>,
    X: PartialEq + Send + Sync,
{
    type Data = SampleSet<X>;
    type Output = A::Output;

    fn run(&self, data: &SampleSet<X>, key: &SeedKey) -> Result<A::Output> {
        self.alg.run(&self.count(data)?, key)
    }

    fn sample_complexity(&self) -> usize {
        self.alg.sample_complexity()
    }

    fn output_space(&self) -> Option<Vec<A::Output>> {
        self.alg.output_space()
    }

    fn output_distribution(&self, data: &SampleSet<X>) -> Option<Result<FiniteDistribution<A::Output>>> {
        match self.count(data) {
            Ok(c) => self.alg.output_distribution(&c),
            Err(e) => Some(Err(e)),
        }
    }
}
