//! Experiments behind the adaptive-composition lower bound.
//!
//! The hard instance: each round draws a coin bias θ from a three-part
//! mixture around ½ and asks for the sign of θ − ½. Two runs share the
//! algorithm's coins but see independent samples; a third "phantom" run
//! shares run 2's history and draws fresh samples.

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::composition::{naive_compose, Coordinate};
use crate::error::{param, Error, Result};
use crate::meter::{count_parallel, Estimate, DEFAULT_LEVEL};
use crate::problems::{BernoulliProduct, BitCount, SampleSet, SampleSource, Sign, Summarized};
use crate::replicable::{replicable_sign_test, ReplicableAlgorithm};
use crate::seed::SeedKey;

/// Bias mixture: `½−τ`, `½+τ`, or uniform on `(½−τ, ½+τ)`, each w.p. ⅓.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryDist {
    tau: f64,
}

impl AdversaryDist {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 0.25) {
            return Err(param(format!("tau = {tau} must lie in (0, 1/4)")));
        }
        Ok(Self { tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

pub fn sample_theta(adv: &AdversaryDist, key: &SeedKey) -> f64 {
    let mut s = key.stream();
    let u = s.next_f64();
    if u < 1.0 / 3.0 {
        0.5 - adv.tau
    } else if u < 2.0 / 3.0 {
        0.5 + adv.tau
    } else {
        0.5 - adv.tau + 2.0 * adv.tau * s.next_open01()
    }
}

/// Bit data drawable for a given bias.
pub trait BernoulliData: Sized + Send + Sync {
    fn draw(theta: f64, m: usize, key: &SeedKey) -> Result<Self>;
}

impl BernoulliData for SampleSet<bool> {
    fn draw(theta: f64, m: usize, key: &SeedKey) -> Result<Self> {
        let mut s = key.stream();
        Ok(SampleSet::new((0..m).map(|_| s.next_f64() < theta).collect()))
    }
}

impl BernoulliData for BitCount {
    fn draw(theta: f64, m: usize, key: &SeedKey) -> Result<Self> {
        let b = Binomial::new(m as u64, theta).map_err(|e| Error::Validation(e.to_string()))?;
        BitCount::new(b.sample(&mut key.stream()), m as u64)
    }
}

/// An algorithm for the adaptive game: each round it sees its own prior
/// outputs and that round's samples.
pub trait AdaptiveAlgorithm: Send + Sync {
    type Data: BernoulliData;
    type Output: Clone + PartialEq + std::fmt::Debug + Send + Sync;

    fn respond(&self, history: &[Self::Output], data: &Self::Data, key: &SeedKey) -> Result<Self::Output>;
}

/// Runs a fixed per-round algorithm, ignoring history, with round key
/// `coins.child("round", i)`.
#[derive(Clone, Debug)]
pub struct Historyless<A>(pub A);

impl<A> AdaptiveAlgorithm for Historyless<A>
where
    A: ReplicableAlgorithm,
    A::Data: BernoulliData,
{
    type Data = A::Data;
    type Output = A::Output;

    fn respond(&self, history: &[A::Output], data: &A::Data, key: &SeedKey) -> Result<A::Output> {
        self.0.run(data, &key.child("round", history.len() as u64))
    }
}

/// The canonical sign tester as a per-round algorithm.
#[derive(Clone, Copy, Debug, Default)]
pub struct SignTester;

impl AdaptiveAlgorithm for SignTester {
    type Data = BitCount;
    type Output = Sign;

    fn respond(&self, _: &[Sign], data: &BitCount, key: &SeedKey) -> Result<Sign> {
        replicable_sign_test(data, key)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRound<Y> {
    pub theta: f64,
    /// `[run 1, run 2, phantom]`.
    pub outputs: [Y; 3],
    pub agree_12: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameTranscript<Y> {
    pub k: usize,
    pub m: usize,
    pub rounds: Vec<GameRound<Y>>,
}

impl<Y> GameTranscript<Y> {
    /// Whether runs 1 and 2 produced the same output sequence.
    pub fn replicated(&self) -> bool {
        self.rounds.iter().all(|r| r.agree_12)
    }
}

struct GameKeys {
    coins: SeedKey,
    theta: SeedKey,
    run1: SeedKey,
    run2: SeedKey,
    phantom: SeedKey,
}

impl GameKeys {
    fn new(key: &SeedKey) -> Self {
        Self {
            coins: key.child("coins", 0),
            theta: key.child("theta", 0),
            run1: key.child("run1", 0),
            run2: key.child("run2", 0),
            phantom: key.child("phantom", 0),
        }
    }
}

fn check_km(k: usize, m: usize) -> Result<()> {
    if k == 0 || m == 0 {
        return Err(param(format!("the game needs k ≥ 1 and m ≥ 1, got k = {k}, m = {m}")));
    }
    Ok(())
}

/// Plays the k-round game once.
pub fn run_adaptive_game<A: AdaptiveAlgorithm>(
    alg: &A,
    k: usize,
    m: usize,
    adv: &AdversaryDist,
    key: &SeedKey,
) -> Result<GameTranscript<A::Output>> {
    check_km(k, m)?;
    let keys = GameKeys::new(key);
    let (mut h1, mut h2) = (Vec::with_capacity(k), Vec::with_capacity(k));
    let mut rounds = Vec::with_capacity(k);
    for i in 0..k as u64 {
        let theta = sample_theta(adv, &keys.theta.child("round", i));
        let s1 = A::Data::draw(theta, m, &keys.run1.child("round", i))?;
        let s2 = A::Data::draw(theta, m, &keys.run2.child("round", i))?;
        let s3 = A::Data::draw(theta, m, &keys.phantom.child("round", i))?;
        let y1 = alg.respond(&h1, &s1, &keys.coins)?;
        let y2 = alg.respond(&h2, &s2, &keys.coins)?;
        let y3 = alg.respond(&h2, &s3, &keys.coins)?;
        let agree_12 = y1 == y2;
        h1.push(y1.clone());
        h2.push(y2.clone());
        rounds.push(GameRound { theta, outputs: [y1, y2, y3], agree_12 });
    }
    Ok(GameTranscript { k, m, rounds })
}

/// Runs 1 and 2 only, stopping at the first disagreement.
fn game_replicates<A: AdaptiveAlgorithm>(alg: &A, k: usize, m: usize, adv: &AdversaryDist, key: &SeedKey) -> Result<bool> {
    let keys = GameKeys::new(key);
    let (mut h1, mut h2) = (Vec::with_capacity(k), Vec::with_capacity(k));
    for i in 0..k as u64 {
        let theta = sample_theta(adv, &keys.theta.child("round", i));
        let y1 = alg.respond(&h1, &A::Data::draw(theta, m, &keys.run1.child("round", i))?, &keys.coins)?;
        let y2 = alg.respond(&h2, &A::Data::draw(theta, m, &keys.run2.child("round", i))?, &keys.coins)?;
        if y1 != y2 {
            return Ok(false);
        }
        h1.push(y1);
        h2.push(y2);
    }
    Ok(true)
}

/// Disagreement probability of a full k-round game, over `games` games
/// keyed `key.child("game", g)`.
pub fn measure_game_disagreement<A: AdaptiveAlgorithm>(
    alg: &A,
    k: usize,
    m: usize,
    adv: &AdversaryDist,
    games: u64,
    key: &SeedKey,
) -> Result<Estimate> {
    check_km(k, m)?;
    if games == 0 {
        return Err(param("at least one game is required"));
    }
    let [d] = count_parallel(games, |g| Ok([!game_replicates(alg, k, m, adv, &key.child("game", g))? as u64]))?;
    Estimate::new(d, games, DEFAULT_LEVEL)
}

pub const MIN_DIVERGENCE_TRIALS: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub m: usize,
    pub estimate: Estimate,
}

/// Single-round disagreement `E_θ Pr[alg(S) ≠ alg(S′)]` with shared coins.
pub fn measure_round_divergence<A: AdaptiveAlgorithm>(
    alg: &A,
    m: usize,
    adv: &AdversaryDist,
    trials: u64,
    key: &SeedKey,
) -> Result<Divergence> {
    if trials < MIN_DIVERGENCE_TRIALS {
        return Err(param(format!("at least {MIN_DIVERGENCE_TRIALS} trials are required, got {trials}")));
    }
    let estimate = measure_game_disagreement(alg, 1, m, adv, trials, key)?;
    Ok(Divergence { m, estimate })
}

/// Exact single-round disagreement of the sign tester at `m = 1`:
/// `2θ(1−θ)` averaged over the mixture.
pub fn sign_test_m1_divergence(adv: &AdversaryDist) -> f64 {
    let t = adv.tau;
    let at = |th: f64| 2.0 * th * (1.0 - th);
    // Uniform part: E[θ(1−θ)] = ¼ − Var = ¼ − (2τ)²/12.
    (at(0.5 - t) + at(0.5 + t) + 2.0 * (0.25 - t * t / 3.0)) / 3.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub k: usize,
    pub m_min: usize,
    pub estimate: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `ln m_min` against `ln k`; NaN with fewer
    /// than two distinct k.
    pub exponent: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub rho_target: f64,
    pub games_per_probe: u64,
    pub m_start: usize,
    pub m_max: usize,
    /// Ratio between neighbouring grid points.
    pub growth: f64,
    /// Bisect over integers inside the final grid cell.
    pub refine: bool,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self { rho_target: 0.1, games_per_probe: 100_000, m_start: 1, m_max: 1 << 24, growth: 1.25, refine: true }
    }
}

/// Grid point `j`: `⌈m_start·growth^j⌉`, forced strictly increasing.
fn grid_m(cfg: &ScalingConfig, j: usize) -> usize {
    let mut m = cfg.m_start.max(1);
    for _ in 0..j {
        m = ((m as f64 * cfg.growth).ceil() as usize).max(m + 1);
    }
    m
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Per k, the smallest `m` whose measured game disagreement is at most
/// `rho_target`: doubling then bisection over grid indices, then (with
/// `refine`) integer bisection inside the last grid cell. Each
/// probe is keyed by `(k, m)` only, so results do not depend on the search
/// path.
pub fn scaling_experiment<A: AdaptiveAlgorithm>(
    alg: &A,
    ks: &[usize],
    adv: &AdversaryDist,
    cfg: &ScalingConfig,
    key: &SeedKey,
) -> Result<ScalingTable> {
    if ks.is_empty() || ks.contains(&0) || ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(param("ks must be nonempty, strictly ascending and positive"));
    }
    if !(cfg.growth > 1.0) || cfg.games_per_probe == 0 {
        return Err(param("grid growth must exceed 1 and probes need games"));
    }
    let mut rows: Vec<ScalingRow> = Vec::new();
    for &k in ks {
        let kk = key.child("k", k as u64);
        let probe_m = |m: usize| measure_game_disagreement(alg, k, m, adv, cfg.games_per_probe, &kk.child("m", m as u64));
        let probe = |j: usize| probe_m(grid_m(cfg, j));
        let ok = |e: &Estimate| e.hat <= cfg.rho_target;
        // Smallest passing index, bracketed by doubling.
        let (mut lo, mut hi) = (0usize, 1usize);
        let first = probe(0)?;
        let found = if ok(&first) {
            Some((0, first))
        } else {
            let mut found = None;
            loop {
                if grid_m(cfg, hi) > cfg.m_max {
                    break;
                }
                let e = probe(hi)?;
                if ok(&e) {
                    found = Some((hi, e));
                    break;
                }
                lo = hi;
                hi *= 2;
            }
            found
        };
        let Some((mut best, mut best_e)) = found else {
            let partial: Vec<String> = rows.iter().map(|r| format!("k={} m={}", r.k, r.m_min)).collect();
            return Err(Error::Scale(format!(
                "no m ≤ {} reached disagreement {} at k = {k}; completed: [{}]",
                cfg.m_max,
                cfg.rho_target,
                partial.join(", ")
            )));
        };
        // Invariant: lo fails (or is below the first probe), best passes.
        while best > 0 && best - lo > 1 {
            let mid = lo + (best - lo) / 2;
            let e = probe(mid)?;
            if ok(&e) {
                best = mid;
                best_e = e;
            } else {
                lo = mid;
            }
        }
        let mut m_best = grid_m(cfg, best);
        if cfg.refine && best > 0 {
            let mut m_lo = grid_m(cfg, lo);
            while m_best - m_lo > 1 {
                let mid = m_lo + (m_best - m_lo) / 2;
                let e = probe_m(mid)?;
                if ok(&e) {
                    m_best = mid;
                    best_e = e;
                } else {
                    m_lo = mid;
                }
            }
        }
        rows.push(ScalingRow { k, m_min: m_best, estimate: best_e });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.k as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| (r.m_min as f64).ln()).collect();
    let exponent = if rows.len() >= 2 { fit_slope(&xs, &ys) } else { f64::NAN };
    Ok(ScalingTable { rows, exponent })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NaiveTightness {
    pub k: usize,
    /// Mean per-coordinate disagreement.
    pub p0: f64,
    pub joint: Estimate,
    /// `min(k·p₀, 1)/2`.
    pub bound: f64,
    /// `1 − (1 − p₀)^k`.
    pub independent: f64,
}

pub const MIN_NAIVE_TRIALS: u64 = 1000;

/// Naive composition of `k` copies of `alg`, one per coin of `coins`, on
/// shared product samples. Coordinate `j` runs with `key.child("alg", j)`
/// inside each trial, so error events are independent across coordinates.
pub fn naive_tightness_experiment<A>(
    alg: &A,
    coins: &BernoulliProduct,
    trials: u64,
    key: &SeedKey,
) -> Result<NaiveTightness>
where
    A: ReplicableAlgorithm<Data = BitCount> + Clone,
{
    if trials < MIN_NAIVE_TRIALS {
        return Err(param(format!("at least {MIN_NAIVE_TRIALS} trials are required, got {trials}")));
    }
    let k = coins.k();
    let algs: Vec<Coordinate<A>> = (0..k).map(|j| Coordinate::new(j, alg.clone())).collect();
    let n = alg.sample_complexity();
    let src = Summarized(coins.clone());
    let [coord, joint] = count_parallel(trials, |t| {
        let tk = key.child("trial", t);
        let r = tk.child("r", 0);
        let a = naive_compose(&algs, &src.draw(n, &tk.child("sample", 1))?, &r)?;
        let b = naive_compose(&algs, &src.draw(n, &tk.child("sample", 2))?, &r)?;
        let d = a.iter().zip(&b).filter(|(x, y)| x != y).count() as u64;
        Ok([d, (d > 0) as u64])
    })?;
    let p0 = coord as f64 / (trials as f64 * k as f64);
    Ok(NaiveTightness {
        k,
        p0,
        joint: Estimate::new(joint, trials, DEFAULT_LEVEL)?,
        bound: (k as f64 * p0).min(1.0) / 2.0,
        independent: 1.0 - (1.0 - p0).powi(k as i32),
    })
}
