use std::marker::PhantomData;

use serde::{Deserialize, Serialize};

use crate::error::{check_open, param, Result};
use crate::problems::{ElementId, FrequencyData};
use crate::seed::{uniform01, SeedKey};

use super::ReplicableAlgorithm;

pub const DEFAULT_HH_C: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeavyHittersConfig {
    pub nu: f64,
    pub eps: f64,
    pub rho: f64,
    pub beta: f64,
    pub c: f64,
    pub n: usize,
}

impl HeavyHittersConfig {
    /// Budget `⌈C·ln(1/min(ρ,β))/(ν·ε²·ρ²)⌉`.
    pub fn new(nu: f64, eps: f64, rho: f64, beta: f64, c: f64) -> Result<Self> {
        check_open("nu", nu, 0.0, 1.0)?;
        check_open("rho", rho, 0.0, 1.0)?;
        check_open("beta", beta, 0.0, 1.0)?;
        if !(eps > 0.0 && eps <= nu / 2.0) {
            return Err(param(format!("heavy hitters need 0 < eps ≤ nu/2, got eps = {eps}, nu = {nu}")));
        }
        if !(c > 0.0) {
            return Err(param(format!("hh.C = {c} must be positive")));
        }
        let n = (c * (1.0 / rho.min(beta)).ln() / (nu * eps * eps * rho * rho)).ceil() as usize;
        Ok(Self { nu, eps, rho, beta, c, n })
    }

    /// The shared threshold `(ν − ε/2) + (ε/2)·u`.
    pub fn threshold(&self, key: &SeedKey) -> f64 {
        (self.nu - self.eps / 2.0) + (self.eps / 2.0) * uniform01(key, 0)
    }
}

/// Every element whose empirical frequency reaches a shared random threshold
/// in `(ν − ε/2, ν)`, sorted.
pub fn replicable_heavy_hitters<D: FrequencyData + ?Sized>(
    samples: &D,
    cfg: &HeavyHittersConfig,
    key: &SeedKey,
) -> Result<Vec<ElementId>> {
    let n = samples.sample_len();
    if n != cfg.n {
        return Err(param(format!("heavy hitters configured for {} samples, got {n}", cfg.n)));
    }
    let v = cfg.threshold(key);
    Ok(samples
        .counts()
        .into_iter()
        .filter(|&(_, c)| c as f64 / n as f64 >= v)
        .map(|(x, _)| x)
        .collect())
}

#[derive(Debug)]
pub struct ReplicableHeavyHitters<D> {
    pub cfg: HeavyHittersConfig,
    _data: PhantomData<fn(&D)>,
}

impl<D> Clone for ReplicableHeavyHitters<D> {
    fn clone(&self) -> Self {
        Self { cfg: self.cfg, _data: PhantomData }
    }
}

impl<D> ReplicableHeavyHitters<D> {
    pub fn new(cfg: HeavyHittersConfig) -> Self {
        Self { cfg, _data: PhantomData }
    }
}

impl<D: FrequencyData> ReplicableAlgorithm for ReplicableHeavyHitters<D> {
    type Data = D;
    type Output = Vec<ElementId>;

    fn run(&self, data: &D, key: &SeedKey) -> Result<Vec<ElementId>> {
        replicable_heavy_hitters(data, &self.cfg, key)
    }

    fn sample_complexity(&self) -> usize {
        self.cfg.n
    }
}
