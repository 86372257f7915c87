//! Replicable composition through perfect generalization, at desk scale.
//!
//! Per coordinate `i`: a [`PgSurrogate`] at the budget `ε_i` picked by
//! [`theorem1_params`](super::theorem1_params), whose output law on the
//! sample is estimated under `key.child("coord", i)`. The joint law is the
//! product of those marginals, and the output is a correlated sample from
//! it under `key.child("select", 0)`.

use std::marker::PhantomData;

use serde::{Deserialize, Serialize};

use crate::correlated::correlated_index;
use crate::error::{param, Error, Result};
use crate::problems::FiniteDistribution;
use crate::replicable::ReplicableAlgorithm;
use crate::seed::SeedKey;

use super::params::{params_for, CompositionParams, Constants};
use super::pg::{replicability_to_pg, PgSurrogate};

/// Largest joint output space the pipeline will enumerate.
pub const MAX_PRODUCT_SPACE: usize = 10_000;
pub const DEFAULT_INNER_TRIALS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub rho: f64,
    pub beta0: f64,
    pub constants: Constants<f64>,
    /// Chunks per coordinate, i.e. base runs per PG surrogate.
    pub m_runs: usize,
    /// Monte Carlo tallies per marginal estimate.
    pub inner_trials: usize,
}

/// The pipeline over algorithms `A` reading coordinate views of chunk data
/// `D`. `project(chunk, i)` extracts coordinate `i`'s data.
pub struct Pipeline<A: ReplicableAlgorithm, D, P> {
    pub surrogates: Vec<PgSurrogate<A>>,
    pub params: CompositionParams<f64>,
    pub cfg: PipelineConfig,
    project: P,
    _data: PhantomData<fn(&D)>,
}

impl<A, D, P> Pipeline<A, D, P>
where
    A: ReplicableAlgorithm,
    P: Fn(&D, usize) -> Result<A::Data> + Send + Sync,
{
    pub fn new(algs: Vec<A>, project: P, cfg: PipelineConfig) -> Result<Self> {
        if algs.is_empty() {
            return Err(param("the pipeline needs at least one algorithm"));
        }
        let mut size = 1usize;
        for (i, a) in algs.iter().enumerate() {
            let s = a.output_space().map(|s| s.len()).ok_or_else(|| param(format!("algorithm {i} has no finite output space")))?;
            size = size.saturating_mul(s);
        }
        if size > MAX_PRODUCT_SPACE {
            return Err(Error::Scale(format!(
                "joint output space has {size} points, above {MAX_PRODUCT_SPACE}; use naive composition instead"
            )));
        }
        let n_list: Vec<u64> = algs.iter().map(|a| (a.sample_complexity() * cfg.m_runs) as u64).collect();
        let params = params_for(&n_list, cfg.rho, cfg.beta0, &cfg.constants)?;
        let surrogates = algs
            .into_iter()
            .zip(params.eps_i.iter().zip(&params.delta_i))
            .map(|(a, (&e, &d))| replicability_to_pg(a, e, d, cfg.m_runs))
            .collect::<Result<_>>()?;
        Ok(Self { surrogates, params, cfg, project, _data: PhantomData })
    }

    fn coordinate_chunks(&self, chunks: &[D], i: usize) -> Result<Vec<A::Data>> {
        chunks.iter().map(|c| (self.project)(c, i)).collect()
    }

    /// Estimated output law of coordinate `i`.
    pub fn marginal(&self, chunks: &[D], i: usize, key: &SeedKey) -> Result<FiniteDistribution<A::Output>> {
        let c = self.coordinate_chunks(chunks, i)?;
        self.surrogates[i].estimate_distribution(&c, self.cfg.inner_trials, &key.child("coord", i as u64))
    }

    /// Product of the estimated marginals, in odometer order (last
    /// coordinate fastest).
    pub fn joint(&self, chunks: &[D], key: &SeedKey) -> Result<FiniteDistribution<Vec<A::Output>>> {
        let marginals = (0..self.surrogates.len()).map(|i| self.marginal(chunks, i, key)).collect::<Result<Vec<_>>>()?;
        let mut support: Vec<Vec<A::Output>> = vec![Vec::new()];
        let mut probs = vec![1.0];
        for m in &marginals {
            let mut s2 = Vec::with_capacity(support.len() * m.len());
            let mut p2 = Vec::with_capacity(support.len() * m.len());
            for (prefix, &p) in support.iter().zip(&probs) {
                for (y, &q) in m.support().iter().zip(m.probs()) {
                    let mut t = prefix.clone();
                    t.push(y.clone());
                    s2.push(t);
                    p2.push(p * q);
                }
            }
            support = s2;
            probs = p2;
        }
        FiniteDistribution::with_trusted_support(support, probs)
    }
}

impl<A, D, P> ReplicableAlgorithm for Pipeline<A, D, P>
where
    A: ReplicableAlgorithm,
    D: Send + Sync,
    P: Fn(&D, usize) -> Result<A::Data> + Send + Sync,
{
    type Data = Vec<D>;
    type Output = Vec<A::Output>;

    fn run(&self, chunks: &Vec<D>, key: &SeedKey) -> Result<Vec<A::Output>> {
        if chunks.len() != self.cfg.m_runs {
            return Err(param(format!("expected {} chunks, got {}", self.cfg.m_runs, chunks.len())));
        }
        let joint = self.joint(chunks, key)?;
        let i = correlated_index(&joint, &key.child("select", 0))?;
        Ok(joint.support()[i].clone())
    }

    fn sample_complexity(&self) -> usize {
        self.surrogates.iter().map(|s| s.sample_complexity()).max().unwrap_or(0)
    }
}

/// Builds and runs the pipeline once.
pub fn compose_pipeline<A, D, P>(algs: Vec<A>, project: P, cfg: PipelineConfig, chunks: &Vec<D>, key: &SeedKey) -> Result<Vec<A::Output>>
where
    A: ReplicableAlgorithm,
    D: Send + Sync,
    P: Fn(&D, usize) -> Result<A::Data> + Send + Sync,
{
    Pipeline::new(algs, project, cfg)?.run(chunks, key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::pg::pg_to_replicable;
    use crate::problems::{BitCount, CoinCounts};
    use crate::replicable::{FixedGridConfig, FixedGridSq};

    fn cfg() -> PipelineConfig {
        PipelineConfig { rho: 0.5, beta0: 0.01, constants: Constants::default(), m_runs: 20, inner_trials: 10 }
    }

    fn grid(points: u32) -> FixedGridSq<BitCount> {
        FixedGridSq::new(FixedGridConfig::with_n(points, 50).unwrap())
    }

    fn coord(c: &CoinCounts, i: usize) -> Result<BitCount> {
        Ok(c.coord(i))
    }

    #[test]
    fn single_coordinate_is_the_two_conversions() {
        let p = Pipeline::new(vec![grid(5)], coord, cfg()).unwrap();
        let chunks: Vec<CoinCounts> = (0..20).map(|j| CoinCounts { n: 50, ones: vec![10 + j] }).collect();
        let root = SeedKey::from_u64(3);
        for t in 0..20 {
            let key = root.child("k", t);
            let bits: Vec<BitCount> = chunks.iter().map(|c| c.coord(0)).collect();
            let direct = pg_to_replicable(
                |c: &Vec<BitCount>| p.surrogates[0].estimate_distribution(c, 10, &key.child("coord", 0)),
                &bits,
                &key.child("select", 0),
            )
            .unwrap();
            assert_eq!(p.run(&chunks, &key).unwrap(), vec![direct]);
        }
    }

    #[test]
    fn oversized_product_is_a_scale_error() {
        let algs = vec![grid(101), grid(101)];
        assert!(matches!(Pipeline::new(algs, coord, cfg()), Err(Error::Scale(_))));
    }
}
