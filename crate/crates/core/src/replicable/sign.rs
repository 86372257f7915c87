use std::marker::PhantomData;

use crate::error::{param, Result};
use crate::problems::{FiniteDistribution, MeanStatistic, Sign};
use crate::seed::SeedKey;

use super::ReplicableAlgorithm;

/// `+` iff the empirical mean is at least ½. The key is ignored: this is the
/// canonical fixed-coins rule.
pub fn replicable_sign_test<D: MeanStatistic + ?Sized>(samples: &D, _key: &SeedKey) -> Result<Sign> {
    if samples.sample_len() == 0 {
        return Err(param("sign test needs at least one sample"));
    }
    Ok(if samples.empirical_mean()? >= 0.5 { Sign::Plus } else { Sign::Minus })
}

#[derive(Debug)]
pub struct SignTest<D> {
    pub m: usize,
    _data: PhantomData<fn(&D)>,
}

impl<D> Clone for SignTest<D> {
    fn clone(&self) -> Self {
        Self { m: self.m, _data: PhantomData }
    }
}

impl<D> SignTest<D> {
    pub fn new(m: usize) -> Self {
        Self { m, _data: PhantomData }
    }
}

impl<D: MeanStatistic> ReplicableAlgorithm for SignTest<D> {
    type Data = D;
    type Output = Sign;

    fn run(&self, data: &D, key: &SeedKey) -> Result<Sign> {
        replicable_sign_test(data, key)
    }

    fn sample_complexity(&self) -> usize {
        self.m
    }

    fn output_space(&self) -> Option<Vec<Sign>> {
        Some(vec![Sign::Minus, Sign::Plus])
    }

    fn output_distribution(&self, data: &D) -> Option<Result<FiniteDistribution<Sign>>> {
        Some(replicable_sign_test(data, &SeedKey::from_u64(0)).and_then(|s| {
            let p = if s == Sign::Plus { 1.0 } else { 0.0 };
            FiniteDistribution::new(vec![Sign::Minus, Sign::Plus], vec![1.0 - p, p])
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{BitCount, SampleSet};

    #[test]
    fn constant_inputs() {
        let k = SeedKey::from_u64(0);
        assert_eq!(replicable_sign_test(&SampleSet::new(vec![true; 5]), &k).unwrap(), Sign::Plus);
        assert_eq!(replicable_sign_test(&SampleSet::new(vec![false; 5]), &k).unwrap(), Sign::Minus);
        assert_eq!(replicable_sign_test(&BitCount::new(2, 4).unwrap(), &k).unwrap(), Sign::Plus);
        assert!(replicable_sign_test(&SampleSet::<bool>::new(vec![]), &k).is_err());
    }

    #[test]
    fn key_is_ignored() {
        let d = BitCount::new(49, 100).unwrap();
        let a = replicable_sign_test(&d, &SeedKey::from_u64(1)).unwrap();
        assert_eq!(a, replicable_sign_test(&d, &SeedKey::from_u64(2)).unwrap());
    }
}
