//! Element-frequency data for heavy-hitters style problems.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::SeedKey;

use super::bernoulli::{binomial, Summarized};
use super::dist::FiniteDistribution;
use super::sample::{SampleLen, SampleSet, SampleSource};
use super::validity::ElementId;

/// Sample data from which per-element counts can be read.
pub trait FrequencyData: SampleLen {
    /// `(element, count)` pairs with nonzero count, sorted by element.
    fn counts(&self) -> Vec<(ElementId, u64)>;
}

impl FrequencyData for SampleSet<ElementId> {
    fn counts(&self) -> Vec<(ElementId, u64)> {
        let mut map: FxHashMap<ElementId, u64> = FxHashMap::default();
        for &x in self.iter() {
            *map.entry(x).or_insert(0) += 1;
        }
        let mut v: Vec<_> = map.into_iter().collect();
        v.sort_unstable();
        v
    }
}

/// Sorted element counts of `n` samples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub n: u64,
    counts: Vec<(ElementId, u64)>,
}

impl Histogram {
    pub fn new(mut counts: Vec<(ElementId, u64)>) -> Result<Self> {
        counts.retain(|&(_, c)| c > 0);
        counts.sort_unstable();
        if counts.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Validation("histogram lists an element twice".into()));
        }
        let n = counts.iter().map(|&(_, c)| c).sum();
        Ok(Self { n, counts })
    }

    pub fn of(samples: &SampleSet<ElementId>) -> Self {
        Self { n: samples.n() as u64, counts: samples.counts() }
    }
}

impl SampleLen for Histogram {
    fn sample_len(&self) -> usize {
        self.n as usize
    }
}

impl FrequencyData for Histogram {
    fn counts(&self) -> Vec<(ElementId, u64)> {
        self.counts.clone()
    }
}

/// Multinomial counts drawn as a chain of conditional binomials.
impl SampleSource for Summarized<FiniteDistribution<ElementId>> {
    type Data = Histogram;

    fn draw(&self, n: usize, key: &SeedKey) -> Result<Histogram> {
        if n == 0 {
            return Err(Error::Parameter("sample size must be at least 1".into()));
        }
        let mut stream = key.stream();
        let mut left = n;
        let mut mass_left = 1.0;
        let mut counts = Vec::new();
        let d = &self.0;
        for (i, (&x, &p)) in d.support().iter().zip(d.probs()).enumerate() {
            if left == 0 {
                break;
            }
            let c = if i + 1 == d.len() || p >= mass_left {
                left as u64
            } else {
                binomial(left, (p / mass_left).clamp(0.0, 1.0), &mut stream)?
            };
            if c > 0 {
                counts.push((x, c));
            }
            left -= c as usize;
            mass_left -= p;
        }
        Histogram::new(counts)
    }
}
