//! Bernoulli and product-Bernoulli sources.
//!
//! Each source can emit raw samples or, wrapped in [`Summarized`], only the
//! count of ones. For any algorithm that reads nothing but the count, the
//! two are equal in law; the summarized form costs O(1) per draw instead of
//! O(n), which is what makes million-sample budgets affordable in the
//! Monte Carlo harness.

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::SeedKey;

use super::sample::{MeanStatistic, SampleLen, SampleSet, SampleSource};

/// Largest number of coordinates a [`CoinFlips`] word can hold.
pub const MAX_COINS: usize = 64;

fn check_prob(p: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Validation(format!("{what} = {p} is not a probability")))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Parameter("sample size must be at least 1".into()))
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bernoulli {
    p: f64,
}

impl Bernoulli {
    pub fn new(p: f64) -> Result<Self> {
        check_prob(p, "bernoulli mean")?;
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl SampleSource for Bernoulli {
    type Data = SampleSet<bool>;

    fn draw(&self, n: usize, key: &SeedKey) -> Result<SampleSet<bool>> {
        check_n(n)?;
        let mut s = key.stream();
        Ok(SampleSet::new((0..n).map(|_| s.next_f64() < self.p).collect()))
    }
}

/// Independent coins with means `p[0], …, p[k-1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernoulliProduct {
    p: Vec<f64>,
}

impl BernoulliProduct {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() || p.len() > MAX_COINS {
            return Err(Error::Validation(format!(
                "product needs 1..={MAX_COINS} coordinates, got {}",
                p.len()
            )));
        }
        for (j, &pj) in p.iter().enumerate() {
            check_prob(pj, &format!("coordinate {j} mean"))?;
        }
        Ok(Self { p })
    }

    pub fn uniform(k: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; k])
    }

    pub fn means(&self) -> &[f64] {
        &self.p
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }
}

/// One draw from a product of at most 64 coins, bit `j` = coordinate `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoinFlips(pub u64);

impl CoinFlips {
    #[inline]
    pub fn coord(self, j: usize) -> bool {
        (self.0 >> j) & 1 == 1
    }
}

impl SampleSource for BernoulliProduct {
    type Data = SampleSet<CoinFlips>;

    fn draw(&self, n: usize, key: &SeedKey) -> Result<SampleSet<CoinFlips>> {
        check_n(n)?;
        let mut s = key.stream();
        let items = (0..n)
            .map(|_| {
                let mut w = 0u64;
                for (j, &pj) in self.p.iter().enumerate() {
                    if s.next_f64() < pj {
                        w |= 1 << j;
                    }
                }
                CoinFlips(w)
            })
            .collect();
        Ok(SampleSet::new(items))
    }
}

/// Sufficient statistic of a bit sample: its size and number of ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitCount {
    pub ones: u64,
    pub n: u64,
}

impl BitCount {
    pub fn new(ones: u64, n: u64) -> Result<Self> {
        if ones > n {
            return Err(Error::Validation(format!("{ones} ones in a sample of {n}")));
        }
        Ok(Self { ones, n })
    }

    pub fn of(bits: &SampleSet<bool>) -> Self {
        Self { ones: bits.iter().filter(|&&b| b).count() as u64, n: bits.n() as u64 }
    }
}

impl SampleLen for BitCount {
    fn sample_len(&self) -> usize {
        self.n as usize
    }
}

impl MeanStatistic for BitCount {
    fn empirical_mean(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::Domain("empirical mean of an empty sample".into()));
        }
        Ok(self.ones as f64 / self.n as f64)
    }
}

/// Per-coordinate counts of a product-Bernoulli sample.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoinCounts {
    pub n: u64,
    pub ones: Vec<u64>,
}

impl CoinCounts {
    pub fn coord(&self, j: usize) -> BitCount {
        BitCount { ones: self.ones[j], n: self.n }
    }

    pub fn of(flips: &SampleSet<CoinFlips>, k: usize) -> Self {
        let mut ones = vec![0u64; k];
        for f in flips.iter() {
            for (j, o) in ones.iter_mut().enumerate() {
                *o += f.coord(j) as u64;
            }
        }
        Self { n: flips.n() as u64, ones }
    }
}

impl SampleLen for CoinCounts {
    fn sample_len(&self) -> usize {
        self.n as usize
    }
}

/// A source that emits the count statistic instead of raw bits.
#[derive(Clone, Debug, PartialEq)]
pub struct Summarized<D>(pub D);

pub(crate) fn binomial(n: usize, p: f64, stream: &mut crate::seed::UniformStream) -> Result<u64> {
    let b = Binomial::new(n as u64, p).map_err(|e| Error::Validation(e.to_string()))?;
    Ok(b.sample(stream))
}

impl SampleSource for Summarized<Bernoulli> {
    type Data = BitCount;

    fn draw(&self, n: usize, key: &SeedKey) -> Result<BitCount> {
        check_n(n)?;
        let ones = binomial(n, self.0.p, &mut key.stream())?;
        Ok(BitCount { ones, n: n as u64 })
    }
}

impl SampleSource for Summarized<BernoulliProduct> {
    type Data = CoinCounts;

    fn draw(&self, n: usize, key: &SeedKey) -> Result<CoinCounts> {
        check_n(n)?;
        let mut s = key.stream();
        let ones = self.0.p.iter().map(|&p| binomial(n, p, &mut s)).collect::<Result<_>>()?;
        Ok(CoinCounts { n: n as u64, ones })
    }
}
