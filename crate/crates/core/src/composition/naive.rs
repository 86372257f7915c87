use std::marker::PhantomData;

use crate::error::{param, Result};
use crate::problems::{BitCount, CoinCounts, FiniteDistribution, SampleLen};
use crate::replicable::ReplicableAlgorithm;
use crate::seed::SeedKey;

/// Runs every algorithm on the same samples with key `key.child("alg", i)`.
pub fn naive_compose<A>(algs: &[A], samples: &A::Data, key: &SeedKey) -> Result<Vec<A::Output>>
where
    A: ReplicableAlgorithm,
    A::Data: SampleLen,
{
    let n = samples.sample_len();
    algs.iter()
        .enumerate()
        .map(|(i, a)| {
            if a.sample_complexity() != n {
                return Err(param(format!("algorithm {i} expects {} samples, got {n}", a.sample_complexity())));
            }
            a.run(samples, &key.child("alg", i as u64))
        })
        .collect()
}

/// [`naive_compose`] as an algorithm with tuple output.
#[derive(Clone, Debug)]
pub struct NaiveComposition<A>(pub Vec<A>);

impl<A> ReplicableAlgorithm for NaiveComposition<A>
where
    A: ReplicableAlgorithm,
    A::Data: SampleLen,
{
    type Data = A::Data;
    type Output = Vec<A::Output>;

    fn run(&self, data: &A::Data, key: &SeedKey) -> Result<Vec<A::Output>> {
        naive_compose(&self.0, data, key)
    }

    fn sample_complexity(&self) -> usize {
        self.0.first().map_or(0, |a| a.sample_complexity())
    }
}

/// Views coordinate `j` of product-coin counts as single-coin data.
#[derive(Debug)]
pub struct Coordinate<A> {
    pub j: usize,
    pub alg: A,
    _p: PhantomData<fn()>,
}

impl<A: Clone> Clone for Coordinate<A> {
    fn clone(&self) -> Self {
        Self { j: self.j, alg: self.alg.clone(), _p: PhantomData }
    }
}

impl<A> Coordinate<A> {
    pub fn new(j: usize, alg: A) -> Self {
        Self { j, alg, _p: PhantomData }
    }
}

fn project(data: &CoinCounts, j: usize) -> Result<BitCount> {
    if j >= data.ones.len() {
        return Err(param(format!("coordinate {j} out of range for {} coins", data.ones.len())));
    }
    Ok(data.coord(j))
}

impl<A: ReplicableAlgorithm<Data = BitCount>> ReplicableAlgorithm for Coordinate<A> {
    type Data = CoinCounts;
    type Output = A::Output;

    fn run(&self, data: &CoinCounts, key: &SeedKey) -> Result<A::Output> {
        self.alg.run(&project(data, self.j)?, key)
    }

    fn sample_complexity(&self) -> usize {
        self.alg.sample_complexity()
    }

    fn output_space(&self) -> Option<Vec<A::Output>> {
        self.alg.output_space()
    }

    fn output_distribution(&self, data: &CoinCounts) -> Option<Result<FiniteDistribution<A::Output>>> {
        match project(data, self.j) {
            Ok(d) => self.alg.output_distribution(&d),
            Err(e) => Some(Err(e)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replicable::{Constant, SqEstimateConfig, SqEstimator};

    #[test]
    fn single_and_constant() {
        let cfg = SqEstimateConfig::new(0.5, 0.5, 0.5, 1.0).unwrap();
        let sq = Coordinate::new(0, SqEstimator::<BitCount>::new(cfg));
        let data = CoinCounts { n: cfg.n as u64, ones: vec![3, 1] };
        let key = SeedKey::from_u64(1);
        let out = naive_compose(std::slice::from_ref(&sq), &data, &key).unwrap();
        assert_eq!(out, vec![sq.run(&data, &key.child("alg", 0)).unwrap()]);

        let consts = vec![Constant::<u8, CoinCounts>::new(7, cfg.n); 4];
        assert_eq!(naive_compose(&consts, &data, &key).unwrap(), vec![7; 4]);
        let short = CoinCounts { n: 1, ones: vec![0, 0] };
        assert!(naive_compose(&consts, &short, &key).is_err());
    }
}
