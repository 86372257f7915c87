//! Testers and non-replicable fallbacks used by the boosting wrapper.

use std::marker::PhantomData;

use serde::{Deserialize, Serialize};

use crate::error::{check_open, domain, param, Result};
use crate::problems::{ElementId, FrequencyData, MeanStatistic, SampleLen};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    fn from_bool(accept: bool) -> Self {
        if accept {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }

    pub fn accepted(self) -> bool {
        self == Verdict::Accept
    }
}

/// Decides whether a candidate output looks valid on fresh samples.
pub trait Tester: Send + Sync {
    type Candidate;
    type Data;

    fn test(&self, candidate: &Self::Candidate, data: &Self::Data) -> Result<Verdict>;
    fn sample_complexity(&self) -> usize;
}

/// A non-replicable solver, used when the tester rejects.
pub trait Fallback: Send + Sync {
    type Data;
    type Output;

    fn solve(&self, data: &Self::Data) -> Result<Self::Output>;
    fn sample_complexity(&self) -> usize;
}

fn need(what: &str, have: usize, want: usize) -> Result<()> {
    if have < want {
        return Err(param(format!("{what} needs {want} samples, got {have}")));
    }
    Ok(())
}

fn nonempty_mean<D: MeanStatistic + ?Sized>(s: &D) -> Result<f64> {
    if s.sample_len() == 0 {
        return Err(domain("tester received no samples"));
    }
    s.empirical_mean()
}

/// Accept iff `|candidate − μ̂| ≤ 3α/2`.
pub fn mean_tester<D: MeanStatistic + ?Sized>(candidate: f64, samples: &D, alpha: f64) -> Result<Verdict> {
    let mu = nonempty_mean(samples)?;
    Ok(Verdict::from_bool((candidate - mu).abs() <= 1.5 * alpha))
}

/// Accept iff the empirical rate is at least `3α/2`.
pub fn bernoulli_rate_tester<D: MeanStatistic + ?Sized>(samples: &D, alpha: f64) -> Result<Verdict> {
    Ok(Verdict::from_bool(nonempty_mean(samples)? >= 1.5 * alpha))
}

/// Accept iff `μ̂_candidate ≥ max_a μ̂_a − 3α/2`.
pub fn best_arm_tester<D: MeanStatistic>(candidate: usize, arm_samples: &[D], alpha: f64) -> Result<Verdict> {
    if candidate >= arm_samples.len() {
        return Err(domain(format!("candidate arm {candidate} out of range for {} arms", arm_samples.len())));
    }
    let means = arm_samples.iter().map(nonempty_mean).collect::<Result<Vec<_>>>()?;
    let top = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(Verdict::from_bool(means[candidate] >= top - 1.5 * alpha))
}

/// `n = ⌈32·ln(2/β)/α²⌉`, enough for `±α/4` accuracy.
#[derive(Debug)]
pub struct MeanTester<D> {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    _data: PhantomData<fn(&D)>,
}

impl<D> Clone for MeanTester<D> {
    fn clone(&self) -> Self {
        Self { _data: PhantomData, ..*self }
    }
}

impl<D> MeanTester<D> {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_open("alpha", alpha, 0.0, 1.0)?;
        check_open("beta", beta, 0.0, 1.0)?;
        let n = (32.0 * (2.0 / beta).ln() / (alpha * alpha)).ceil() as usize;
        Ok(Self { alpha, beta, n, _data: PhantomData })
    }
}

impl<D: MeanStatistic> Tester for MeanTester<D> {
    type Candidate = f64;
    type Data = D;

    fn test(&self, candidate: &f64, data: &D) -> Result<Verdict> {
        need("mean tester", data.sample_len(), self.n)?;
        mean_tester(*candidate, data, self.alpha)
    }

    fn sample_complexity(&self) -> usize {
        self.n
    }
}

/// `n = ⌈24·ln(1/β)/α⌉`. Accepts rates `≥ 2α` and rejects rates `≤ α`,
/// each with probability at least `1 − β`.
#[derive(Debug)]
pub struct BernoulliRateTester<D> {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    _data: PhantomData<fn(&D)>,
}

impl<D> Clone for BernoulliRateTester<D> {
    fn clone(&self) -> Self {
        Self { _data: PhantomData, ..*self }
    }
}

impl<D> BernoulliRateTester<D> {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_open("alpha", alpha, 0.0, 1.0)?;
        check_open("beta", beta, 0.0, 1.0)?;
        let n = (24.0 * (1.0 / beta).ln() / alpha).ceil() as usize;
        Ok(Self { alpha, beta, n, _data: PhantomData })
    }
}

impl<D: MeanStatistic> Tester for BernoulliRateTester<D> {
    type Candidate = ();
    type Data = D;

    fn test(&self, _: &(), data: &D) -> Result<Verdict> {
        need("rate tester", data.sample_len(), self.n)?;
        bernoulli_rate_tester(data, self.alpha)
    }

    fn sample_complexity(&self) -> usize {
        self.n
    }
}

/// Rigorous Hoeffding constant for `±ε/32` frequency estimates.
pub const HH_ESTIMATE_C: f64 = 512.0;

/// Stage sizes shared by the heavy-hitters tester and fallback.
///
/// Failure probability is split evenly over the list estimate, the
/// discovery draw and the discovery estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HhTestConfig {
    pub nu: f64,
    pub eps: f64,
    pub beta: f64,
    /// Frequency-estimation constant; [`HH_ESTIMATE_C`] gives `±ε/32`.
    pub estimate_c: f64,
    /// Samples for estimating the candidate list's frequencies.
    pub n_list: usize,
    /// Discovery sample size `n₁`.
    pub n_discover: usize,
    /// Samples for estimating the discovered elements' frequencies `n₂`.
    pub n_estimate: usize,
}

impl HhTestConfig {
    pub fn new(nu: f64, eps: f64, beta: f64, estimate_c: f64) -> Result<Self> {
        check_open("nu", nu, 0.0, 1.0)?;
        check_open("beta", beta, 0.0, 1.0)?;
        if !(eps > 0.0 && eps <= nu / 2.0) {
            return Err(param(format!("heavy hitters need 0 < eps ≤ nu/2, got eps = {eps}, nu = {nu}")));
        }
        if !(estimate_c > 0.0) {
            return Err(param("estimation constant must be positive"));
        }
        let max_list = (4.0 / nu).floor().max(1.0);
        let n_list = (estimate_c * (6.0 * max_list / beta).ln() / (eps * eps)).ceil() as usize;
        let n_discover = (2.0 * (6.0 / (nu * beta)).ln() / nu).ceil() as usize;
        let n_estimate = (estimate_c * (6.0 * n_discover as f64 / beta).ln() / (eps * eps)).ceil() as usize;
        Ok(Self { nu, eps, beta, estimate_c, n_list, n_discover, n_estimate })
    }

    /// Lower acceptance bound for listed elements: `ν′ − ε′ − ε/16` with
    /// `ν′ = ν − ε/4`, `ε′ = ε/2`.
    pub fn keep_floor(&self) -> f64 {
        (self.nu - self.eps / 4.0) - self.eps / 2.0 - self.eps / 16.0
    }

    /// Estimates at or above this mark count as heavy.
    pub fn heavy_mark(&self) -> f64 {
        self.nu - self.eps / 16.0
    }
}

fn frequencies<D: FrequencyData + ?Sized>(d: &D) -> Result<(Vec<(ElementId, u64)>, f64)> {
    let n = d.sample_len();
    if n == 0 {
        return Err(domain("frequency estimate from an empty sample"));
    }
    Ok((d.counts(), n as f64))
}

fn freq_of(counts: &[(ElementId, u64)], n: f64, x: ElementId) -> f64 {
    counts.binary_search_by_key(&x, |&(e, _)| e).map_or(0.0, |i| counts[i].1 as f64 / n)
}

/// Heavy-hitters tester on three sample parts: list estimate, discovery,
/// discovery estimate.
pub fn heavy_hitters_tester<D: FrequencyData>(
    list: &[ElementId],
    parts: &(D, D, D),
    cfg: &HhTestConfig,
) -> Result<Verdict> {
    if list.len() as f64 > 4.0 / cfg.nu {
        return Ok(Verdict::Reject);
    }
    let (counts, n) = frequencies(&parts.0)?;
    if list.iter().any(|&x| freq_of(&counts, n, x) < cfg.keep_floor()) {
        return Ok(Verdict::Reject);
    }
    let discovered = parts.1.counts();
    let (est, n2) = frequencies(&parts.2)?;
    let missed = discovered
        .iter()
        .any(|&(x, _)| !list.contains(&x) && freq_of(&est, n2, x) >= cfg.heavy_mark());
    Ok(Verdict::from_bool(!missed))
}

/// Discovery set from the first part, frequency estimates from the second;
/// keeps elements estimated at `ν − ε/16` or more.
pub fn nonreplicable_heavy_hitters<D: FrequencyData>(parts: &(D, D), cfg: &HhTestConfig) -> Result<Vec<ElementId>> {
    let (est, n) = frequencies(&parts.1)?;
    Ok(parts
        .0
        .counts()
        .into_iter()
        .map(|(x, _)| x)
        .filter(|&x| freq_of(&est, n, x) >= cfg.heavy_mark())
        .collect())
}

#[derive(Debug)]
pub struct HeavyHittersTester<D> {
    pub cfg: HhTestConfig,
    _data: PhantomData<fn(&D)>,
}

impl<D> Clone for HeavyHittersTester<D> {
    fn clone(&self) -> Self {
        Self { cfg: self.cfg, _data: PhantomData }
    }
}

impl<D> HeavyHittersTester<D> {
    pub fn new(cfg: HhTestConfig) -> Self {
        Self { cfg, _data: PhantomData }
    }
}

impl<D: FrequencyData> Tester for HeavyHittersTester<D> {
    type Candidate = Vec<ElementId>;
    type Data = (D, D, D);

    fn test(&self, list: &Vec<ElementId>, data: &(D, D, D)) -> Result<Verdict> {
        need("list estimate", data.0.sample_len(), self.cfg.n_list)?;
        need("discovery", data.1.sample_len(), self.cfg.n_discover)?;
        need("discovery estimate", data.2.sample_len(), self.cfg.n_estimate)?;
        heavy_hitters_tester(list, data, &self.cfg)
    }

    fn sample_complexity(&self) -> usize {
        self.cfg.n_list + self.cfg.n_discover + self.cfg.n_estimate
    }
}

#[derive(Debug)]
pub struct HeavyHittersFallback<D> {
    pub cfg: HhTestConfig,
    _data: PhantomData<fn(&D)>,
}

impl<D> Clone for HeavyHittersFallback<D> {
    fn clone(&self) -> Self {
        Self { cfg: self.cfg, _data: PhantomData }
    }
}

impl<D> HeavyHittersFallback<D> {
    pub fn new(cfg: HhTestConfig) -> Self {
        Self { cfg, _data: PhantomData }
    }
}

impl<D: FrequencyData> Fallback for HeavyHittersFallback<D> {
    type Data = (D, D);
    type Output = Vec<ElementId>;

    fn solve(&self, data: &(D, D)) -> Result<Vec<ElementId>> {
        need("discovery", data.0.sample_len(), self.cfg.n_discover)?;
        need("discovery estimate", data.1.sample_len(), self.cfg.n_estimate)?;
        nonreplicable_heavy_hitters(data, &self.cfg)
    }

    fn sample_complexity(&self) -> usize {
        self.cfg.n_discover + self.cfg.n_estimate
    }
}

/// Per-arm budget `⌈128·ln(2|A|/β)/α²⌉` for `±α/16` estimates.
#[derive(Debug)]
pub struct BestArmTester<D> {
    pub arms: usize,
    pub alpha: f64,
    pub n: usize,
    _data: PhantomData<fn(&D)>,
}

impl<D> Clone for BestArmTester<D> {
    fn clone(&self) -> Self {
        Self { _data: PhantomData, ..*self }
    }
}

impl<D> BestArmTester<D> {
    pub fn new(arms: usize, alpha: f64, beta: f64) -> Result<Self> {
        if arms == 0 {
            return Err(domain("best arm needs at least one arm"));
        }
        check_open("alpha", alpha, 0.0, 1.0)?;
        check_open("beta", beta, 0.0, 1.0)?;
        let n = (128.0 * (2.0 * arms as f64 / beta).ln() / (alpha * alpha)).ceil() as usize;
        Ok(Self { arms, alpha, n, _data: PhantomData })
    }
}

impl<D: MeanStatistic + Send + Sync> Tester for BestArmTester<D> {
    type Candidate = usize;
    type Data = Vec<D>;

    fn test(&self, candidate: &usize, data: &Vec<D>) -> Result<Verdict> {
        if data.len() != self.arms {
            return Err(param(format!("configured for {} arms, got {}", self.arms, data.len())));
        }
        need("best-arm tester", data.sample_len(), self.n)?;
        best_arm_tester(*candidate, data, self.alpha)
    }

    fn sample_complexity(&self) -> usize {
        self.n
    }
}

/// Plain empirical mean with `n = ⌈ln(2/β)/(2α²)⌉`.
#[derive(Debug)]
pub struct EmpiricalMean<D> {
    pub n: usize,
    _data: PhantomData<fn(&D)>,
}

impl<D> Clone for EmpiricalMean<D> {
    fn clone(&self) -> Self {
        Self { n: self.n, _data: PhantomData }
    }
}

impl<D> EmpiricalMean<D> {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_open("alpha", alpha, 0.0, 1.0)?;
        check_open("beta", beta, 0.0, 1.0)?;
        Ok(Self { n: ((2.0 / beta).ln() / (2.0 * alpha * alpha)).ceil() as usize, _data: PhantomData })
    }
}

impl<D: MeanStatistic> Fallback for EmpiricalMean<D> {
    type Data = D;
    type Output = f64;

    fn solve(&self, data: &D) -> Result<f64> {
        need("empirical mean", data.sample_len(), self.n)?;
        data.empirical_mean()
    }

    fn sample_complexity(&self) -> usize {
        self.n
    }
}

/// Empirical argmax with per-arm `n = ⌈2·ln(2|A|/β)/α²⌉`; ties go to the
/// lowest index.
#[derive(Debug)]
pub struct EmpiricalArgmax<D> {
    pub arms: usize,
    pub n: usize,
    _data: PhantomData<fn(&D)>,
}

impl<D> Clone for EmpiricalArgmax<D> {
    fn clone(&self) -> Self {
        Self { _data: PhantomData, ..*self }
    }
}

impl<D> EmpiricalArgmax<D> {
    pub fn new(arms: usize, alpha: f64, beta: f64) -> Result<Self> {
        if arms == 0 {
            return Err(domain("best arm needs at least one arm"));
        }
        check_open("alpha", alpha, 0.0, 1.0)?;
        check_open("beta", beta, 0.0, 1.0)?;
        let n = (2.0 * (2.0 * arms as f64 / beta).ln() / (alpha * alpha)).ceil() as usize;
        Ok(Self { arms, n, _data: PhantomData })
    }
}

impl<D: MeanStatistic + Send + Sync> Fallback for EmpiricalArgmax<D> {
    type Data = Vec<D>;
    type Output = usize;

    fn solve(&self, data: &Vec<D>) -> Result<usize> {
        if data.len() != self.arms {
            return Err(param(format!("configured for {} arms, got {}", self.arms, data.len())));
        }
        need("empirical argmax", data.sample_len(), self.n)?;
        let mut best = (0, f64::NEG_INFINITY);
        for (a, d) in data.iter().enumerate() {
            let m = d.empirical_mean()?;
            if m > best.1 {
                best = (a, m);
            }
        }
        Ok(best.0)
    }

    fn sample_complexity(&self) -> usize {
        self.n
    }
}
