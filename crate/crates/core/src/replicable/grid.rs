use std::marker::PhantomData;

use serde::{Deserialize, Serialize};

use crate::error::{check_open, param, Result};
use crate::problems::{FiniteDistribution, GridPoint, MeanStatistic};
use crate::seed::{uniform01, SeedKey};

use super::{rounding_budget, ReplicableAlgorithm};

/// Replicable mean estimation onto the fixed grid `{0, h, 2h, …, 1}`,
/// `h = 1/(points − 1)`.
///
/// The empirical mean falls in a cell `[g_j, g_{j+1}]`; with shared
/// threshold `t ~ U[0,1)` the output is `g_{j+1}` when `t` is below the
/// fractional position inside the cell, else `g_j`. Two runs disagree with
/// probability about `|μ̂₁ − μ̂₂|/h` and the error never exceeds `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedGridConfig {
    pub points: u32,
    pub n: usize,
}

impl FixedGridConfig {
    /// Budget `⌈C·ln(1/min(ρ,β))/(h²ρ²)⌉`, the SQ formula with α = h.
    pub fn new(points: u32, rho: f64, beta: f64, c: f64) -> Result<Self> {
        if points < 2 {
            return Err(param(format!("grid needs at least 2 points, got {points}")));
        }
        check_open("rho", rho, 0.0, 1.0)?;
        check_open("beta", beta, 0.0, 1.0)?;
        let h = 1.0 / (points - 1) as f64;
        Ok(Self { points, n: rounding_budget(c, rho, h, beta) })
    }

    pub fn with_n(points: u32, n: usize) -> Result<Self> {
        if points < 2 || n == 0 {
            return Err(param("grid needs at least 2 points and 1 sample"));
        }
        Ok(Self { points, n })
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.points - 1) as f64
    }

    /// Lower cell index and the probability of rounding up.
    fn cell(&self, mean: f64) -> (u32, f64) {
        let x = mean * (self.points - 1) as f64;
        let j = (x.floor() as u32).min(self.points - 2);
        (j, (x - j as f64).clamp(0.0, 1.0))
    }
}

#[derive(Debug)]
pub struct FixedGridSq<D> {
    pub cfg: FixedGridConfig,
    _data: PhantomData<fn(&D)>,
}

impl<D> Clone for FixedGridSq<D> {
    fn clone(&self) -> Self {
        Self { cfg: self.cfg, _data: PhantomData }
    }
}

impl<D> FixedGridSq<D> {
    pub fn new(cfg: FixedGridConfig) -> Self {
        Self { cfg, _data: PhantomData }
    }

    fn point(&self, index: u32) -> GridPoint {
        GridPoint { index, points: self.cfg.points }
    }
}

impl<D: MeanStatistic> ReplicableAlgorithm for FixedGridSq<D> {
    type Data = D;
    type Output = GridPoint;

    fn run(&self, data: &D, key: &SeedKey) -> Result<GridPoint> {
        let (j, frac) = self.cfg.cell(data.empirical_mean()?);
        let up = uniform01(key, 0) < frac;
        Ok(self.point(j + up as u32))
    }

    fn sample_complexity(&self) -> usize {
        self.cfg.n
    }

    fn output_space(&self) -> Option<Vec<GridPoint>> {
        Some((0..self.cfg.points).map(|i| self.point(i)).collect())
    }

    fn output_distribution(&self, data: &D) -> Option<Result<FiniteDistribution<GridPoint>>> {
        Some(data.empirical_mean().and_then(|mean| {
            let (j, frac) = self.cfg.cell(mean);
            let mut probs = vec![0.0; self.cfg.points as usize];
            probs[j as usize] = 1.0 - frac;
            probs[j as usize + 1] += frac;
            FiniteDistribution::new(self.output_space().unwrap_or_default(), probs)
        }))
    }
}
