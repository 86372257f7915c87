use std::marker::PhantomData;

use serde::{Deserialize, Serialize};

use crate::error::{check_open, param, Result};
use crate::problems::MeanStatistic;
use crate::seed::{uniform01, SeedKey};

use super::{rounding_budget, ReplicableAlgorithm};

/// Default constant of the SQ sample budget.
pub const DEFAULT_SQ_C: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqEstimateConfig {
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Grid step; always equal to `alpha`.
    pub spacing: f64,
    pub n: usize,
    pub c: f64,
}

impl SqEstimateConfig {
    /// Config with the budget `⌈C·ln(1/min(ρ,β))/(α²ρ²)⌉`.
    pub fn new(rho: f64, alpha: f64, beta: f64, c: f64) -> Result<Self> {
        check_open("rho", rho, 0.0, 1.0)?;
        check_open("alpha", alpha, 0.0, 1.0)?;
        check_open("beta", beta, 0.0, 1.0)?;
        if !(c > 0.0) {
            return Err(param(format!("sq.C = {c} must be positive")));
        }
        Ok(Self { rho, alpha, beta, spacing: alpha, n: rounding_budget(c, rho, alpha, beta), c })
    }

    pub fn with_default_c(rho: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(rho, alpha, beta, DEFAULT_SQ_C)
    }

    /// Raises the sample budget; budgets below the formula are rejected.
    pub fn with_budget(mut self, n: usize) -> Result<Self> {
        if n < self.n {
            return Err(param(format!("budget {n} is below the required {}", self.n)));
        }
        self.n = n;
        Ok(self)
    }
}

/// Rounds `mean` to the nearest point of `{offset + j·spacing}`, ties
/// upward, then clips to `[0, 1]`.
pub fn sq_round(mean: f64, offset: f64, spacing: f64) -> f64 {
    let j = ((mean - offset) / spacing + 0.5).floor();
    (offset + j * spacing).clamp(0.0, 1.0)
}

/// Random-offset grid rounding of the empirical mean.
pub fn replicable_sq_estimate<D: MeanStatistic + ?Sized>(
    samples: &D,
    cfg: &SqEstimateConfig,
    key: &SeedKey,
) -> Result<f64> {
    if samples.sample_len() != cfg.n {
        return Err(param(format!(
            "SQ estimator configured for {} samples, got {}",
            cfg.n,
            samples.sample_len()
        )));
    }
    let mean = samples.empirical_mean()?;
    let offset = cfg.spacing * uniform01(key, 0);
    Ok(sq_round(mean, offset, cfg.spacing))
}

/// [`replicable_sq_estimate`] as a [`ReplicableAlgorithm`] over data `D`.
#[derive(Debug)]
pub struct SqEstimator<D> {
    pub cfg: SqEstimateConfig,
    _data: PhantomData<fn(&D)>,
}

impl<D> Clone for SqEstimator<D> {
    fn clone(&self) -> Self {
        Self { cfg: self.cfg, _data: PhantomData }
    }
}

impl<D> SqEstimator<D> {
    pub fn new(cfg: SqEstimateConfig) -> Self {
        Self { cfg, _data: PhantomData }
    }
}

impl<D: MeanStatistic> ReplicableAlgorithm for SqEstimator<D> {
    type Data = D;
    type Output = f64;

    fn run(&self, data: &D, key: &SeedKey) -> Result<f64> {
        replicable_sq_estimate(data, &self.cfg, key)
    }

    fn sample_complexity(&self) -> usize {
        self.cfg.n
    }
}
