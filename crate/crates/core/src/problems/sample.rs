use crate::error::{Error, Result};
use crate::seed::SeedKey;

/// An ordered sample `S = (x_1, …, x_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SampleSet<X> {
    items: Vec<X>,
}

impl<X> SampleSet<X> {
    pub fn new(items: Vec<X>) -> Self {
        Self { items }
    }

    pub fn items(&self) -> &[X] {
        &self.items
    }

    pub fn into_items(self) -> Vec<X> {
        self.items
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, X> {
        self.items.iter()
    }

    pub fn map<Z>(&self, f: impl FnMut(&X) -> Z) -> SampleSet<Z> {
        SampleSet { items: self.items.iter().map(f).collect() }
    }

    /// Splits into `parts` contiguous chunks of equal size, dropping the
    /// remainder.
    pub fn chunks(&self, parts: usize) -> Result<Vec<SampleSet<X>>>
    where
        X: Clone,
    {
        if parts == 0 || self.items.len() < parts {
            return Err(Error::Parameter(format!(
                "cannot split {} samples into {parts} non-empty chunks",
                self.items.len()
            )));
        }
        let size = self.items.len() / parts;
        Ok(self.items.chunks_exact(size).take(parts).map(|c| SampleSet::new(c.to_vec())).collect())
    }
}

impl<X> From<Vec<X>> for SampleSet<X> {
    fn from(items: Vec<X>) -> Self {
        Self::new(items)
    }
}

/// Anything that produces i.i.d. sample data from a seed key.
pub trait SampleSource: Sync {
    type Data: Send;

    fn draw(&self, n: usize, key: &SeedKey) -> Result<Self::Data>;
}

/// Number of samples held by a data set.
pub trait SampleLen {
    fn sample_len(&self) -> usize;
}

impl<X> SampleLen for SampleSet<X> {
    fn sample_len(&self) -> usize {
        self.n()
    }
}

/// Per-arm data: the budget is the smallest arm's.
impl<D: SampleLen> SampleLen for Vec<D> {
    fn sample_len(&self) -> usize {
        self.iter().map(SampleLen::sample_len).min().unwrap_or(0)
    }
}

/// A sample value that a statistical query maps into `[0, 1]`.
pub trait UnitValue {
    fn unit_value(&self) -> f64;
}

impl UnitValue for bool {
    fn unit_value(&self) -> f64 {
        if *self {
            1.0
        } else {
            0.0
        }
    }
}

impl UnitValue for f64 {
    fn unit_value(&self) -> f64 {
        *self
    }
}

impl UnitValue for f32 {
    fn unit_value(&self) -> f64 {
        *self as f64
    }
}

impl UnitValue for u8 {
    fn unit_value(&self) -> f64 {
        *self as f64
    }
}

/// Data whose empirical mean of a `[0, 1]`-valued query is available.
pub trait MeanStatistic: SampleLen {
    fn empirical_mean(&self) -> Result<f64>;
}

impl<X: UnitValue> MeanStatistic for SampleSet<X> {
    fn empirical_mean(&self) -> Result<f64> {
        if self.items.is_empty() {
            return Err(Error::Domain("empirical mean of an empty sample".into()));
        }
        let mut sum = 0.0;
        for x in &self.items {
            let v = x.unit_value();
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("sample value {v} lies outside [0, 1]")));
            }
            sum += v;
        }
        Ok(sum / self.items.len() as f64)
    }
}

/// Continuous uniform samples on `[0, 1)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformUnit;

impl SampleSource for UniformUnit {
    type Data = SampleSet<f64>;

    fn draw(&self, n: usize, key: &SeedKey) -> Result<SampleSet<f64>> {
        if n == 0 {
            return Err(Error::Parameter("sample size must be at least 1".into()));
        }
        let mut s = key.stream();
        Ok(SampleSet::new((0..n).map(|_| s.next_f64()).collect()))
    }
}

/// Draws three independent parts of fixed sizes, for algorithms that
/// consume disjoint sample sets per stage.
#[derive(Clone, Debug)]
pub struct ThreeParts<S> {
    pub source: S,
    pub sizes: [usize; 3],
}

impl<S: SampleSource> SampleSource for ThreeParts<S> {
    type Data = (S::Data, S::Data, S::Data);

    /// `n` must equal the sum of the part sizes.
    fn draw(&self, n: usize, key: &SeedKey) -> Result<Self::Data> {
        let total: usize = self.sizes.iter().sum();
        if n != total {
            return Err(Error::Parameter(format!(
                "three-part source expects n = {total}, got {n}"
            )));
        }
        Ok((
            self.source.draw(self.sizes[0], &key.child("part", 0))?,
            self.source.draw(self.sizes[1], &key.child("part", 1))?,
            self.source.draw(self.sizes[2], &key.child("part", 2))?,
        ))
    }
}

/// Draws `parts` independent equal-size chunks, e.g. for algorithms that
/// run a base procedure once per chunk.
#[derive(Clone, Debug)]
pub struct Chunked<S> {
    pub source: S,
    pub parts: usize,
}

impl<S: SampleSource> SampleSource for Chunked<S> {
    type Data = Vec<S::Data>;

    /// `n` must be a positive multiple of the chunk count.
    fn draw(&self, n: usize, key: &SeedKey) -> Result<Self::Data> {
        if self.parts == 0 || n == 0 || !n.is_multiple_of(self.parts) {
            return Err(Error::Parameter(format!(
                "cannot split {n} samples into {} equal chunks",
                self.parts
            )));
        }
        (0..self.parts)
            .map(|j| self.source.draw(n / self.parts, &key.child("chunk", j as u64)))
            .collect()
    }
}

/// Draws one data set per arm, each with `n` samples.
#[derive(Clone, Debug)]
pub struct PerArm<S> {
    pub arms: Vec<S>,
}

impl<S: SampleSource> SampleSource for PerArm<S> {
    type Data = Vec<S::Data>;

    fn draw(&self, n: usize, key: &SeedKey) -> Result<Self::Data> {
        self.arms
            .iter()
            .enumerate()
            .map(|(a, s)| s.draw(n, &key.child("arm", a as u64)))
            .collect()
    }
}

impl<A: SampleLen, B: SampleLen, C: SampleLen> SampleLen for (A, B, C) {
    fn sample_len(&self) -> usize {
        self.0.sample_len() + self.1.sample_len() + self.2.sample_len()
    }
}
