//! Monte Carlo certification of replicability and failure rates.
//!
//! Trial `t` derives everything from `key.child("trial", t)`: the shared
//! algorithm seed `r` and two independent sample seeds. Trials run on the
//! rayon pool and only integer counts are reduced, so a report does not
//! depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{param, Result};
use crate::problems::{is_valid, GroundTruth, Output, SampleSource, StatProblem};
use crate::replicable::ReplicableAlgorithm;
use crate::seed::SeedKey;

pub const MIN_TRIALS: u64 = 100;
pub const DEFAULT_LEVEL: f64 = 0.95;

pub const CSV_HEADER: &str =
    "experiment,trials,disagreements,failures,rho_hat,rho_lo,rho_hi,beta_hat,beta_lo,beta_hi";

/// Wilson score interval for a binomial proportion.
pub fn wilson_ci(successes: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(param(format!("wilson_ci needs 0 ≤ successes ≤ trials, trials ≥ 1; got {successes}/{trials}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(param(format!("confidence level {level} outside (0, 1)")));
    }
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - level) / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let hi = if successes == trials { 1.0 } else { (center + half).clamp(p, 1.0) };
    Ok((lo, hi))
}

/// A proportion with its Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub hat: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Estimate {
    pub fn new(count: u64, trials: u64, level: f64) -> Result<Self> {
        let (lo, hi) = wilson_ci(count, trials, level)?;
        Ok(Self { hat: count as f64 / trials as f64, lo, hi })
    }

    pub fn half_width(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }

    /// `hi ≤ target + k·half_width`.
    pub fn upper_within(&self, target: f64, k: f64) -> bool {
        self.hi <= target + k * self.half_width()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trials: u64,
    pub disagreements: u64,
    pub failures: u64,
    pub level: f64,
    /// Absent when the run did not measure disagreement.
    pub rho: Option<Estimate>,
    /// Absent when the run did not measure failures.
    pub beta: Option<Estimate>,
}

impl TrialReport {
    pub fn new(trials: u64, disagreements: Option<u64>, failures: Option<u64>, level: f64) -> Result<Self> {
        Ok(Self {
            trials,
            disagreements: disagreements.unwrap_or(0),
            failures: failures.unwrap_or(0),
            level,
            rho: disagreements.map(|d| Estimate::new(d, trials, level)).transpose()?,
            beta: failures.map(|f| Estimate::new(f, trials, level)).transpose()?,
        })
    }

    pub fn rho_hat(&self) -> f64 {
        self.rho.map_or(f64::NAN, |e| e.hat)
    }

    pub fn beta_hat(&self) -> f64 {
        self.beta.map_or(f64::NAN, |e| e.hat)
    }

    /// One CSV row matching [`CSV_HEADER`]; unmeasured columns are empty.
    pub fn csv_row(&self, experiment: &str) -> String {
        let cols = |e: Option<Estimate>| match e {
            Some(e) => format!("{},{},{}", e.hat, e.lo, e.hi),
            None => ",,".to_string(),
        };
        format!(
            "{experiment},{},{},{},{},{}",
            self.trials,
            self.disagreements,
            self.failures,
            cols(self.rho),
            cols(self.beta)
        )
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(param(format!("at least {MIN_TRIALS} trials are required, got {trials}")));
    }
    Ok(())
}

/// Per-trial keys: the shared seed and the two sample seeds.
pub fn trial_keys(key: &SeedKey, t: u64) -> (SeedKey, SeedKey, SeedKey) {
    let tk = key.child("trial", t);
    (tk.child("r", 0), tk.child("sample", 1), tk.child("sample", 2))
}

/// Runs `f` for every trial index in parallel and sums the returned counts.
pub fn count_parallel<const K: usize, F>(trials: u64, f: F) -> Result<[u64; K]>
where
    F: Fn(u64) -> Result<[u64; K]> + Sync + Send,
{
    (0..trials).into_par_iter().map(f).try_reduce(
        || [0; K],
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            Ok(a)
        },
    )
}

/// Paired-run disagreement rate of `alg` on `n` samples from `dist`.
pub fn estimate_replicability<A, S>(alg: &A, dist: &S, n: usize, trials: u64, key: &SeedKey, level: f64) -> Result<TrialReport>
where
    A: ReplicableAlgorithm<Data = S::Data>,
    S: SampleSource,
{
    check_trials(trials)?;
    let [d] = count_parallel(trials, |t| {
        let (r, k1, k2) = trial_keys(key, t);
        let a = alg.run(&dist.draw(n, &k1)?, &r)?;
        let b = alg.run(&dist.draw(n, &k2)?, &r)?;
        Ok([(a != b) as u64])
    })?;
    TrialReport::new(trials, Some(d), None, level)
}

/// Failure rate of `alg` against `problem` under `truth`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_failure<A, S>(
    alg: &A,
    problem: &StatProblem,
    truth: &GroundTruth,
    dist: &S,
    n: usize,
    trials: u64,
    key: &SeedKey,
    level: f64,
) -> Result<TrialReport>
where
    A: ReplicableAlgorithm<Data = S::Data>,
    A::Output: Into<Output>,
    S: SampleSource,
{
    check_trials(trials)?;
    let [f] = count_parallel(trials, |t| {
        let (r, k1, _) = trial_keys(key, t);
        let out = alg.run(&dist.draw(n, &k1)?, &r)?;
        Ok([!is_valid(problem, truth, &out.into())? as u64])
    })?;
    TrialReport::new(trials, None, Some(f), level)
}

/// Both rates from the same trials; failures are scored on the first run.
#[allow(clippy::too_many_arguments)]
pub fn estimate_both<A, S>(
    alg: &A,
    problem: &StatProblem,
    truth: &GroundTruth,
    dist: &S,
    n: usize,
    trials: u64,
    key: &SeedKey,
    level: f64,
) -> Result<TrialReport>
where
    A: ReplicableAlgorithm<Data = S::Data>,
    A::Output: Into<Output>,
    S: SampleSource,
{
    check_trials(trials)?;
    let [d, f] = count_parallel(trials, |t| {
        let (r, k1, k2) = trial_keys(key, t);
        let a = alg.run(&dist.draw(n, &k1)?, &r)?;
        let b = alg.run(&dist.draw(n, &k2)?, &r)?;
        let fail = !is_valid(problem, truth, &a.clone().into())?;
        Ok([(a != b) as u64, fail as u64])
    })?;
    TrialReport::new(trials, Some(d), Some(f), level)
}
