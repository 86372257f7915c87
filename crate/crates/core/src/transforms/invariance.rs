//! Wrappers that make an algorithm's output invariant to sample order,
//! domain labels, or everything but a sufficient statistic.
//!
//! Every wrapper splits its key into `r = key.child("alg", 0)`, handed to
//! the wrapped algorithm, and `r′` for its own randomness.

use std::fmt::Debug;
use std::hash::Hash;

use rustc_hash::FxHashMap;

use crate::correlated::correlated_sample;
use crate::error::{domain, Error, Result};
use crate::problems::{BitCount, FiniteDistribution, SampleSet};
use crate::replicable::ReplicableAlgorithm;
use crate::seed::{random_permutation, SeedKey};

/// Exact enumeration limit for the pointwise label-invariance oracle.
pub const EXACT_PERMUTATION_LIMIT: u64 = 1 << 20;
/// Inner keys used when enumeration is too large.
pub const DEFAULT_ORACLE_KEYS: usize = 10_000;

fn alg_key(key: &SeedKey) -> SeedKey {
    key.child("alg", 0)
}

/// A statistic `f` together with a sampler of `S | f(S)`.
pub trait SufficientStatistic: Send + Sync {
    type Sample;
    type Stat: Clone + PartialEq + Debug;

    fn stat(&self, samples: &Self::Sample) -> Result<Self::Stat>;
    fn resample(&self, stat: &Self::Stat, key: &SeedKey) -> Result<Self::Sample>;
}

/// Number of ones in a bit sample; resampling places them uniformly.
#[derive(Clone, Copy, Debug, Default)]
pub struct BernoulliSum;

impl SufficientStatistic for BernoulliSum {
    type Sample = SampleSet<bool>;
    type Stat = BitCount;

    fn stat(&self, samples: &SampleSet<bool>) -> Result<BitCount> {
        Ok(BitCount::of(samples))
    }

    fn resample(&self, stat: &BitCount, key: &SeedKey) -> Result<SampleSet<bool>> {
        if stat.ones > stat.n {
            return Err(Error::Config(format!("{} ones cannot fit in {} positions", stat.ones, stat.n)));
        }
        let n = stat.n as usize;
        let mut bits = vec![false; n];
        if n > 0 {
            for &i in &random_permutation(key, n)?[..stat.ones as usize] {
                bits[i] = true;
            }
        }
        Ok(SampleSet::new(bits))
    }
}

/// `alg` run on a fresh sample drawn from `S | f(S)`.
pub fn suff_stat_wrap<A, F>(alg: &A, stat: &F, samples: &F::Sample, key: &SeedKey) -> Result<A::Output>
where
    A: ReplicableAlgorithm<Data = F::Sample> + ?Sized,
    F: SufficientStatistic,
{
    let fresh = stat.resample(&stat.stat(samples)?, &key.child("resample", 0))?;
    alg.run(&fresh, &alg_key(key))
}

fn sorted<X: PartialOrd + Clone>(samples: &SampleSet<X>) -> Result<Vec<X>> {
    let mut v = samples.items().to_vec();
    let mut unordered = false;
    v.sort_by(|a, b| {
        a.partial_cmp(b).unwrap_or_else(|| {
            unordered = true;
            std::cmp::Ordering::Equal
        })
    });
    if unordered {
        return Err(Error::Config("sample values are not totally ordered".into()));
    }
    Ok(v)
}

/// `alg` on the sorted sample, reshuffled by a permutation drawn from `r′`.
pub fn order_invariant_wrap<A, X>(alg: &A, samples: &SampleSet<X>, key: &SeedKey) -> Result<A::Output>
where
    A: ReplicableAlgorithm<Data = SampleSet<X>> + ?Sized,
    X: PartialOrd + Clone,
{
    let s = sorted(samples)?;
    let data = if s.is_empty() {
        SampleSet::new(s)
    } else {
        let sigma = random_permutation(&key.child("perm", 0), s.len())?;
        SampleSet::new(sigma.iter().map(|&i| s[i].clone()).collect())
    };
    alg.run(&data, &alg_key(key))
}

fn relabel<X: Eq + Hash + Clone>(domain_: &[X], pi: &[usize], samples: &SampleSet<X>) -> Result<SampleSet<X>> {
    let index: FxHashMap<&X, usize> = domain_.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let items = samples
        .iter()
        .map(|x| match index.get(x) {
            Some(&i) => Ok(domain_[pi[i]].clone()),
            None => Err(domain("sample element lies outside the declared domain")),
        })
        .collect::<Result<_>>()?;
    Ok(SampleSet::new(items))
}

/// `alg` on the sample relabeled by a random permutation of `domain`.
pub fn label_invariant_wrap<A, X>(alg: &A, domain_: &[X], samples: &SampleSet<X>, key: &SeedKey) -> Result<A::Output>
where
    A: ReplicableAlgorithm<Data = SampleSet<X>> + ?Sized,
    X: Eq + Hash + Clone,
{
    let pi = random_permutation(&key.child("perm", 0), domain_.len())?;
    alg.run(&relabel(domain_, &pi, samples)?, &alg_key(key))
}

/// Correlated sample from the oracle's distribution for `samples`.
pub fn pointwise_label_invariant_wrap<Y, S, O>(oracle: O, samples: &S, key: &SeedKey) -> Result<Y>
where
    Y: Clone,
    O: FnOnce(&S) -> Result<FiniteDistribution<Y>>,
{
    correlated_sample(&oracle(samples)?, key)
}

/// Steps `p` to the next lexicographic permutation; false after the last.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&x| x > p[i]).expect("a larger element exists right of i");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

fn factorial_at_most(n: usize, cap: u64) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k).filter(|&v| v <= cap))
}

/// Mixes weighted contributions into a distribution whose support is
/// sorted and whose masses are summed in a canonical order, so equal
/// multisets of contributions give bit-identical results.
fn mix<Y: PartialOrd + Clone>(mut terms: Vec<(Y, f64)>, total_weight: f64) -> Result<FiniteDistribution<Y>> {
    terms.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.total_cmp(&b.1))
    });
    let mut support: Vec<Y> = Vec::new();
    let mut probs: Vec<f64> = Vec::new();
    for (y, w) in terms {
        match support.last() {
            Some(last) if *last == y => *probs.last_mut().expect("parallel vectors") += w,
            _ => {
                support.push(y);
                probs.push(w);
            }
        }
    }
    for p in &mut probs {
        *p /= total_weight;
    }
    let z: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= z;
    }
    FiniteDistribution::from_sorted_support(support, probs)
}

/// The output law of [`label_invariant_wrap`] on `samples`, and whether it
/// is exact.
///
/// With at most [`EXACT_PERMUTATION_LIMIT`] relabelings and an algorithm
/// that reports its own output distribution, every relabeling is
/// enumerated; the result is then identical for any relabeled input.
/// Otherwise `inner_keys` Monte Carlo keys under `key` are averaged.
pub fn label_invariant_distribution<A, X>(
    alg: &A,
    domain_: &[X],
    samples: &SampleSet<X>,
    inner_keys: usize,
    key: &SeedKey,
) -> Result<(FiniteDistribution<A::Output>, bool)>
where
    A: ReplicableAlgorithm<Data = SampleSet<X>> + ?Sized,
    A::Output: PartialOrd,
    X: Eq + Hash + Clone,
{
    if domain_.is_empty() {
        return Err(Error::EmptyDomain("label-invariance over an empty domain".into()));
    }
    let exact = factorial_at_most(domain_.len(), EXACT_PERMUTATION_LIMIT).is_some()
        && alg.output_distribution(samples).is_some();
    let mut terms = Vec::new();
    if exact {
        let mut pi: Vec<usize> = (0..domain_.len()).collect();
        let mut count = 0u64;
        loop {
            let d = alg.output_distribution(&relabel(domain_, &pi, samples)?).expect("checked above")?;
            terms.extend(d.support().iter().cloned().zip(d.probs().iter().cloned()));
            count += 1;
            if !next_permutation(&mut pi) {
                break;
            }
        }
        return Ok((mix(terms, count as f64)?, true));
    }
    if inner_keys == 0 {
        return Err(Error::Parameter("Monte Carlo oracle needs at least one inner key".into()));
    }
    for j in 0..inner_keys {
        let k = key.child("inner", j as u64);
        let pi = random_permutation(&k.child("perm", 0), domain_.len())?;
        let relabeled = relabel(domain_, &pi, samples)?;
        match alg.output_distribution(&relabeled) {
            Some(d) => {
                let d = d?;
                terms.extend(d.support().iter().cloned().zip(d.probs().iter().cloned()));
            }
            None => terms.push((alg.run(&relabeled, &alg_key(&k))?, 1.0)),
        }
    }
    Ok((mix(terms, inner_keys as f64)?, false))
}

/// [`suff_stat_wrap`] as an algorithm.
#[derive(Clone, Debug)]
pub struct SuffStatWrapped<A, F> {
    pub alg: A,
    pub stat: F,
}

impl<A, F> ReplicableAlgorithm for SuffStatWrapped<A, F>
where
    A: ReplicableAlgorithm<Data = F::Sample>,
    F: SufficientStatistic,
{
    type Data = F::Sample;
    type Output = A::Output;

    fn run(&self, data: &F::Sample, key: &SeedKey) -> Result<A::Output> {
        suff_stat_wrap(&self.alg, &self.stat, data, key)
    }

    fn sample_complexity(&self) -> usize {
        self.alg.sample_complexity()
    }

    fn output_space(&self) -> Option<Vec<A::Output>> {
        self.alg.output_space()
    }
}

/// [`order_invariant_wrap`] as an algorithm.
#[derive(Clone, Debug)]
pub struct OrderInvariant<A>(pub A);

impl<A, X> ReplicableAlgorithm for OrderInvariant<A>
where
    A: ReplicableAlgorithm<Data = SampleSet<X>>,
    X: PartialOrd + Clone,
{
    type Data = SampleSet<X>;
    type Output = A::Output;

    fn run(&self, data: &SampleSet<X>, key: &SeedKey) -> Result<A::Output> {
        order_invariant_wrap(&self.0, data, key)
    }

    fn sample_complexity(&self) -> usize {
        self.0.sample_complexity()
    }

    fn output_space(&self) -> Option<Vec<A::Output>> {
        self.0.output_space()
    }
}

/// [`label_invariant_wrap`] as an algorithm.
#[derive(Clone, Debug)]
pub struct LabelInvariant<A, X> {
    pub alg: A,
    pub domain: Vec<X>,
}

impl<A, X> ReplicableAlgorithm for LabelInvariant<A, X>
where
    A: ReplicableAlgorithm<Data = SampleSet<X>>,
    X: Eq + Hash + Clone + Send + Sync,
{
    type Data = SampleSet<X>;
    type Output = A::Output;

    fn run(&self, data: &SampleSet<X>, key: &SeedKey) -> Result<A::Output> {
        label_invariant_wrap(&self.alg, &self.domain, data, key)
    }

    fn sample_complexity(&self) -> usize {
        self.alg.sample_complexity()
    }

    fn output_space(&self) -> Option<Vec<A::Output>> {
        self.alg.output_space()
    }
}

/// Pointwise label invariance through [`label_invariant_distribution`].
/// The Monte Carlo fallback draws its inner keys from `oracle_key`, fixed
/// at construction, so the oracle stays a function of the sample alone.
#[derive(Clone, Debug)]
pub struct PointwiseLabelInvariant<A, X> {
    pub alg: A,
    pub domain: Vec<X>,
    pub inner_keys: usize,
    pub oracle_key: SeedKey,
}

impl<A, X> ReplicableAlgorithm for PointwiseLabelInvariant<A, X>
where
    A: ReplicableAlgorithm<Data = SampleSet<X>>,
    A::Output: PartialOrd,
    X: Eq + Hash + Clone + Send + Sync,
{
    type Data = SampleSet<X>;
    type Output = A::Output;

    fn run(&self, data: &SampleSet<X>, key: &SeedKey) -> Result<A::Output> {
        pointwise_label_invariant_wrap(
            |s| label_invariant_distribution(&self.alg, &self.domain, s, self.inner_keys, &self.oracle_key).map(|d| d.0),
            data,
            key,
        )
    }

    fn sample_complexity(&self) -> usize {
        self.alg.sample_complexity()
    }

    fn output_space(&self) -> Option<Vec<A::Output>> {
        self.alg.output_space()
    }

    fn output_distribution(&self, data: &SampleSet<X>) -> Option<Result<FiniteDistribution<A::Output>>> {
        Some(label_invariant_distribution(&self.alg, &self.domain, data, self.inner_keys, &self.oracle_key).map(|d| d.0))
    }
}
