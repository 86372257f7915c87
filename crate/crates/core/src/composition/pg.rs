//! Replicable ↔ perfectly generalizing conversions.
//!
//! [`PgSurrogate`] stands in for the exponential-mechanism construction
//! that turns a replicable algorithm into a perfectly generalizing one:
//! run the base algorithm on disjoint chunks, tally the outputs, and pick
//! an output with probability `∝ exp(ε·tally/2)`. Its generalization is
//! measured, not assumed.

use crate::correlated::correlated_sample;
use crate::error::{param, Error, Result};
use crate::problems::{CumulativeTable, FiniteDistribution};
use crate::replicable::ReplicableAlgorithm;
use crate::seed::{uniform01, SeedKey};

#[derive(Clone, Debug)]
pub struct PgSurrogate<A: ReplicableAlgorithm> {
    pub base: A,
    pub eps: f64,
    /// Nominal δ of the conversion, carried for reporting.
    pub delta: f64,
    pub m_runs: usize,
    space: Vec<A::Output>,
}

/// Wraps `alg` as a PG surrogate; `alg` must expose its output space.
pub fn replicability_to_pg<A: ReplicableAlgorithm>(alg: A, eps: f64, delta: f64, m_runs: usize) -> Result<PgSurrogate<A>> {
    if m_runs < 2 {
        return Err(param(format!("m_runs = {m_runs} must be at least 2")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(param(format!("eps = {eps} must be positive")));
    }
    let space = alg
        .output_space()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| param("the PG surrogate needs a finite, nonempty output space"))?;
    Ok(PgSurrogate { base: alg, eps, delta, m_runs, space })
}

impl<A: ReplicableAlgorithm> PgSurrogate<A> {
    pub fn output_space(&self) -> &[A::Output] {
        &self.space
    }

    fn check(&self, chunks: &[A::Data]) -> Result<()> {
        if chunks.len() != self.m_runs {
            return Err(param(format!("expected {} chunks, got {}", self.m_runs, chunks.len())));
        }
        Ok(())
    }

    fn index_of(&self, y: &A::Output) -> Result<usize> {
        self.space
            .iter()
            .position(|s| s == y)
            .ok_or_else(|| Error::Internal(format!("base output {y:?} is outside its declared space")))
    }

    /// Exponential-mechanism probabilities for a tally.
    pub fn mechanism(&self, tally: &[u64]) -> Vec<f64> {
        let top = tally.iter().copied().max().unwrap_or(0);
        let w: Vec<f64> = tally.iter().map(|&c| (self.eps * (c as f64 - top as f64) / 2.0).exp()).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    }

    /// Tally of base outputs, chunk `j` run with `key.child("run", j)`.
    pub fn tally(&self, chunks: &[A::Data], key: &SeedKey) -> Result<Vec<u64>> {
        self.check(chunks)?;
        let mut t = vec![0u64; self.space.len()];
        for (j, c) in chunks.iter().enumerate() {
            t[self.index_of(&self.base.run(c, &key.child("run", j as u64))?)?] += 1;
        }
        Ok(t)
    }

    /// Monte Carlo estimate of the output law on `chunks`: the mechanism's
    /// exact probabilities averaged over `inner_trials` tallies drawn under
    /// `key.child("inner", t)`. When the base reports its per-chunk output
    /// law, tallies are drawn from it directly, which is equal in law to
    /// running the base with fresh keys.
    pub fn estimate_distribution(&self, chunks: &[A::Data], inner_trials: usize, key: &SeedKey) -> Result<FiniteDistribution<A::Output>> {
        self.check(chunks)?;
        if inner_trials == 0 {
            return Err(param("inner_trials must be at least 1"));
        }
        let tables = chunks
            .iter()
            .map(|c| match self.base.output_distribution(c) {
                Some(d) => {
                    let d = d?;
                    let mut probs = vec![0.0; self.space.len()];
                    for (y, p) in d.support().iter().zip(d.probs()) {
                        probs[self.index_of(y)?] += p;
                    }
                    Ok(Some(CumulativeTable::new(&probs)))
                }
                None => Ok(None),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut acc = vec![0.0; self.space.len()];
        for t in 0..inner_trials {
            let inner = key.child("inner", t as u64);
            let mut stream = inner.stream();
            let mut tally = vec![0u64; self.space.len()];
            for (j, (c, table)) in chunks.iter().zip(&tables).enumerate() {
                let i = match table {
                    Some(table) => table.index(stream.next_f64()),
                    None => self.index_of(&self.base.run(c, &inner.child("run", j as u64))?)?,
                };
                tally[i] += 1;
            }
            for (a, p) in acc.iter_mut().zip(self.mechanism(&tally)) {
                *a += p;
            }
        }
        let probs = acc.into_iter().map(|a| a / inner_trials as f64).collect();
        FiniteDistribution::with_trusted_support(self.space.clone(), probs)
    }
}

impl<A: ReplicableAlgorithm> ReplicableAlgorithm for PgSurrogate<A> {
    type Data = Vec<A::Data>;
    type Output = A::Output;

    fn run(&self, chunks: &Vec<A::Data>, key: &SeedKey) -> Result<A::Output> {
        let probs = self.mechanism(&self.tally(chunks, &key.child("runs", 0))?);
        let i = CumulativeTable::new(&probs).index(uniform01(&key.child("select", 0), 0));
        Ok(self.space[i].clone())
    }

    fn sample_complexity(&self) -> usize {
        self.m_runs * self.base.sample_complexity()
    }

    fn output_space(&self) -> Option<Vec<A::Output>> {
        Some(self.space.clone())
    }
}

/// Correlated sample from the PG algorithm's output law on `samples`.
pub fn pg_to_replicable<Y, S, O>(pg_output_dist: O, samples: &S, key: &SeedKey) -> Result<Y>
where
    Y: Clone,
    O: FnOnce(&S) -> Result<FiniteDistribution<Y>>,
{
    correlated_sample(&pg_output_dist(samples)?, key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::BitCount;
    use crate::replicable::{Constant, FixedGridConfig, FixedGridSq};

    #[test]
    fn constant_base() {
        let pg = replicability_to_pg(Constant::<u8, BitCount>::new(3, 10), 0.1, 0.01, 5).unwrap();
        let chunks = vec![BitCount::new(1, 10).unwrap(); 5];
        let root = SeedKey::from_u64(0);
        for t in 0..20 {
            assert_eq!(pg.run(&chunks, &root.child("k", t)).unwrap(), 3);
        }
        assert!(pg.run(&chunks[..4].to_vec(), &root).is_err());
        assert!(replicability_to_pg(Constant::<u8, BitCount>::new(3, 10), 0.1, 0.01, 1).is_err());
    }

    #[test]
    fn mechanism_weights() {
        let pg = replicability_to_pg(Constant::<u8, BitCount>::new(3, 10), 2.0, 0.01, 5).unwrap();
        let p = pg.mechanism(&[0, 1]);
        assert!((p[1] / p[0] - 1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn outputs_stay_in_the_base_space() {
        let base = FixedGridSq::<BitCount>::new(FixedGridConfig::with_n(5, 20).unwrap());
        let space = base.output_space().unwrap();
        let pg = replicability_to_pg(base, 0.5, 0.01, 10).unwrap();
        let chunks: Vec<BitCount> = (0..10).map(|j| BitCount::new(j + 5, 20).unwrap()).collect();
        let root = SeedKey::from_u64(4);
        for t in 0..200 {
            assert!(space.contains(&pg.run(&chunks, &root.child("k", t)).unwrap()));
        }
        let d = pg.estimate_distribution(&chunks, 50, &root).unwrap();
        assert_eq!(d.support(), &space[..]);
    }

    #[test]
    fn point_mass_oracle() {
        let root = SeedKey::from_u64(6);
        for t in 0..50 {
            let y = pg_to_replicable(|_: &()| Ok(FiniteDistribution::point(9u8)), &(), &root.child("k", t)).unwrap();
            assert_eq!(y, 9);
        }
    }
}
