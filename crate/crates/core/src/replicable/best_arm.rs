use std::marker::PhantomData;

use serde::{Deserialize, Serialize};

use crate::correlated::correlated_index;
use crate::error::{check_open, domain, param, Result};
use crate::problems::{FiniteDistribution, MeanStatistic};
use crate::seed::SeedKey;

use super::ReplicableAlgorithm;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestArmConfig {
    pub arms: usize,
    pub alpha: f64,
    pub rho: f64,
    pub beta: f64,
    /// Gibbs inverse temperature.
    pub lambda: f64,
    /// Per-arm sample budget.
    pub n: usize,
}

impl BestArmConfig {
    /// `λ = scale·(2/α)·ln(|A|/ρ)` and per-arm budget
    /// `⌈c·λ²·ln(|A|/min(ρ,β))/ρ²⌉`.
    pub fn new(arms: usize, alpha: f64, rho: f64, beta: f64, lambda_scale: f64, c: f64) -> Result<Self> {
        if arms == 0 {
            return Err(domain("best arm needs at least one arm"));
        }
        check_open("alpha", alpha, 0.0, 1.0)?;
        check_open("rho", rho, 0.0, 1.0)?;
        check_open("beta", beta, 0.0, 1.0)?;
        if !(lambda_scale > 0.0 && c > 0.0) {
            return Err(param("bestarm.lambda_scale and the budget constant must be positive"));
        }
        let a = arms as f64;
        let lambda = lambda_scale * (2.0 / alpha) * (a / rho).ln();
        let n = (c * lambda * lambda * (a / rho.min(beta)).ln() / (rho * rho)).ceil().max(1.0) as usize;
        Ok(Self { arms, alpha, rho, beta, lambda, n })
    }

    pub fn with_default_scale(arms: usize, alpha: f64, rho: f64, beta: f64) -> Result<Self> {
        Self::new(arms, alpha, rho, beta, 1.0, 1.0)
    }

    /// Gibbs weights `∝ exp(λ·μ̂_a)`, shifted by the maximum for stability.
    pub fn gibbs(&self, means: &[f64]) -> Result<FiniteDistribution<usize>> {
        if means.is_empty() {
            return Err(domain("best arm needs at least one arm"));
        }
        let top = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = means.iter().map(|m| (self.lambda * (m - top)).exp()).collect();
        let z: f64 = w.iter().sum();
        FiniteDistribution::new((0..means.len()).collect(), w.into_iter().map(|x| x / z).collect())
    }
}

fn arm_means<D: MeanStatistic>(arm_samples: &[D], cfg: &BestArmConfig) -> Result<Vec<f64>> {
    if arm_samples.is_empty() {
        return Err(domain("best arm needs at least one arm"));
    }
    if arm_samples.len() != cfg.arms {
        return Err(param(format!("configured for {} arms, got {}", cfg.arms, arm_samples.len())));
    }
    arm_samples
        .iter()
        .enumerate()
        .map(|(a, s)| {
            if s.sample_len() != cfg.n {
                return Err(param(format!("arm {a} holds {} samples, budget is {}", s.sample_len(), cfg.n)));
            }
            s.empirical_mean()
        })
        .collect()
}

/// Correlated sample from the Gibbs distribution over empirical arm means.
pub fn replicable_best_arm<D: MeanStatistic>(
    arm_samples: &[D],
    cfg: &BestArmConfig,
    key: &SeedKey,
) -> Result<usize> {
    let p = cfg.gibbs(&arm_means(arm_samples, cfg)?)?;
    correlated_index(&p, key)
}

#[derive(Debug)]
pub struct ReplicableBestArm<D> {
    pub cfg: BestArmConfig,
    _data: PhantomData<fn(&D)>,
}

impl<D> Clone for ReplicableBestArm<D> {
    fn clone(&self) -> Self {
        Self { cfg: self.cfg, _data: PhantomData }
    }
}

impl<D> ReplicableBestArm<D> {
    pub fn new(cfg: BestArmConfig) -> Self {
        Self { cfg, _data: PhantomData }
    }
}

impl<D: MeanStatistic> ReplicableAlgorithm for ReplicableBestArm<D> {
    type Data = Vec<D>;
    type Output = usize;

    fn run(&self, data: &Vec<D>, key: &SeedKey) -> Result<usize> {
        replicable_best_arm(data, &self.cfg, key)
    }

    fn sample_complexity(&self) -> usize {
        self.cfg.n
    }

    fn output_space(&self) -> Option<Vec<usize>> {
        Some((0..self.cfg.arms).collect())
    }

    fn output_distribution(&self, data: &Vec<D>) -> Option<Result<FiniteDistribution<usize>>> {
        Some(arm_means(data, &self.cfg).and_then(|m| self.cfg.gibbs(&m)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::BitCount;

    #[test]
    fn single_arm_always_wins() {
        let cfg = BestArmConfig::with_default_scale(1, 0.2, 0.1, 0.1).unwrap();
        let data = vec![BitCount::new(3, cfg.n as u64).unwrap()];
        let root = SeedKey::from_u64(0);
        for t in 0..100 {
            assert_eq!(replicable_best_arm(&data, &cfg, &root.child("k", t)).unwrap(), 0);
        }
    }

    #[test]
    fn zero_arms_is_a_domain_error() {
        assert!(matches!(BestArmConfig::with_default_scale(0, 0.2, 0.1, 0.1), Err(crate::Error::Domain(_))));
        let cfg = BestArmConfig::with_default_scale(1, 0.2, 0.1, 0.1).unwrap();
        assert!(matches!(
            replicable_best_arm::<BitCount>(&[], &cfg, &SeedKey::from_u64(0)),
            Err(crate::Error::Domain(_))
        ));
    }

    #[test]
    fn gibbs_mass_outside_alpha_optimal_is_small() {
        let cfg = BestArmConfig::with_default_scale(4, 0.2, 0.1, 0.1).unwrap();
        let p = cfg.gibbs(&[0.9, 0.7, 0.5, 0.1]).unwrap();
        let outside: f64 = p.probs()[2..].iter().sum();
        assert!(outside <= cfg.rho / 2.0, "{outside}");
        let s: f64 = p.probs().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budget_formula() {
        let cfg = BestArmConfig::with_default_scale(2, 0.2, 0.1, 0.05).unwrap();
        let lambda = 10.0 * 20f64.ln();
        assert!((cfg.lambda - lambda).abs() < 1e-12);
        assert_eq!(cfg.n, (lambda * lambda * 40f64.ln() / 0.01).ceil() as usize);
    }
}
