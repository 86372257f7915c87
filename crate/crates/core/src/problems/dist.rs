use std::collections::HashSet;
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::scalar::Probability;
use crate::seed::SeedKey;

use super::sample::{SampleSet, SampleSource};

/// Explicit probability vector over a finite, ordered support.
///
/// The support order is part of the distribution's identity: two
/// distributions are only comparable (and only correlate under shared
/// randomness) when they list the same support in the same order.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDistribution<Y, T = f64> {
    support: Vec<Y>,
    probs: Vec<T>,
}

impl<Y, T> FiniteDistribution<Y, T>
where
    Y: Eq + Hash,
    T: Probability,
{
    pub fn new(support: Vec<Y>, probs: Vec<T>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Validation("distribution support is empty".into()));
        }
        if support.len() != probs.len() {
            return Err(Error::Validation(format!(
                "support has {} elements but {} probabilities were given",
                support.len(),
                probs.len()
            )));
        }
        let mut seen = HashSet::with_capacity(support.len());
        if !support.iter().all(|y| seen.insert(y)) {
            return Err(Error::Validation("support elements are not distinct".into()));
        }
        let mut sum = T::zero();
        for (i, p) in probs.iter().enumerate() {
            if *p < T::zero() {
                return Err(Error::Validation(format!("probability {i} is negative: {p:?}")));
            }
            sum = sum + p.clone();
        }
        let dev = (sum.clone() - T::one()).abs();
        if !(dev <= T::normalization_tolerance(probs.len())) {
            return Err(Error::Validation(format!("probabilities sum to {sum:?}, not 1")));
        }
        Ok(Self { support, probs })
    }
}

impl<Y: PartialEq, T: Probability> FiniteDistribution<Y, T> {
    /// Builds a distribution whose support is already sorted, so
    /// distinctness only needs checking between neighbours.
    pub(crate) fn from_sorted_support(support: Vec<Y>, probs: Vec<T>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::Validation("support and probabilities must be nonempty and equally long".into()));
        }
        if support.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("support elements are not distinct".into()));
        }
        if probs.iter().any(|p| *p < T::zero()) {
            return Err(Error::Validation("negative probability".into()));
        }
        let sum = probs.iter().cloned().fold(T::zero(), |a, b| a + b);
        if !((sum.clone() - T::one()).abs() <= T::normalization_tolerance(probs.len())) {
            return Err(Error::Validation(format!("probabilities sum to {sum:?}, not 1")));
        }
        Ok(Self { support, probs })
    }
}

impl<Y, T: Probability> FiniteDistribution<Y, T> {
    /// For supports whose distinctness is guaranteed by construction;
    /// only the masses are validated.
    pub(crate) fn with_trusted_support(support: Vec<Y>, probs: Vec<T>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::Validation("support and probabilities must be nonempty and equally long".into()));
        }
        if probs.iter().any(|p| *p < T::zero()) {
            return Err(Error::Validation("negative probability".into()));
        }
        let sum = probs.iter().cloned().fold(T::zero(), |a, b| a + b);
        if !((sum.clone() - T::one()).abs() <= T::normalization_tolerance(probs.len())) {
            return Err(Error::Validation(format!("probabilities sum to {sum:?}, not 1")));
        }
        Ok(Self { support, probs })
    }

    /// Point mass on `y`.
    pub fn point(y: Y) -> Self {
        Self { support: vec![y], probs: vec![T::one()] }
    }

    pub fn support(&self) -> &[Y] {
        &self.support
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn prob_of(&self, y: &Y) -> T
    where
        Y: PartialEq,
    {
        self.support
            .iter()
            .position(|s| s == y)
            .map(|i| self.probs[i].clone())
            .unwrap_or_else(T::zero)
    }

    /// Masses converted to `f64`.
    pub fn probs_f64(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

/// Total variation distance `½·Σ|p_i − q_i|` between two distributions on
/// the same ordered support.
pub fn tv_distance<Y, T>(p: &FiniteDistribution<Y, T>, q: &FiniteDistribution<Y, T>) -> Result<T>
where
    Y: PartialEq,
    T: Probability,
{
    if p.support != q.support {
        return Err(Error::Domain("total variation requires identical supports".into()));
    }
    let mut total = T::zero();
    for (a, b) in p.probs.iter().zip(&q.probs) {
        total = total + (a.clone() - b.clone()).abs();
    }
    let two = T::one() + T::one();
    Ok(total / two)
}

/// Inverse-CDF sampler over a precomputed cumulative table.
#[derive(Clone, Debug)]
pub(crate) struct CumulativeTable {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl CumulativeTable {
    pub(crate) fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last_positive = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        Self { cumulative, last_positive }
    }

    #[inline]
    pub(crate) fn index(&self, u: f64) -> usize {
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.last_positive)
    }
}

impl<Y> SampleSource for FiniteDistribution<Y, f64>
where
    Y: Clone + Send + Sync,
{
    type Data = SampleSet<Y>;

    fn draw(&self, n: usize, key: &SeedKey) -> Result<SampleSet<Y>> {
        if n == 0 {
            return Err(Error::Parameter("sample size must be at least 1".into()));
        }
        let table = CumulativeTable::new(&self.probs);
        let mut stream = key.stream();
        let items = (0..n)
            .map(|_| self.support[table.index(stream.next_f64())].clone())
            .collect();
        Ok(SampleSet::new(items))
    }
}
