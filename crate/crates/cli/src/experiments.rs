//! The experiments behind `replicalab run`.
//!
//! Each experiment derives all randomness from
//! `root_seed → (experiment name, 0)` and produces a JSON results object
//! plus its CSV tables. CSV cells are formatted with Rust's shortest
//! round-trip float printing, so equal numbers give equal bytes.

use rayon::prelude::*;
use serde_json::{json, Value as Json};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use replicalab::composition::{
    naive_compose, pg_compose_het_params, pg_compose_simple_unchecked, theorem1_params, Coordinate, Pipeline,
    PipelineConfig,
};
use replicalab::lowerbound::{
    measure_round_divergence, naive_tightness_experiment, scaling_experiment, sign_test_m1_divergence, AdversaryDist,
    ScalingConfig, SignTester,
};
use replicalab::meter::{estimate_both, trial_keys, TrialReport, CSV_HEADER};
use replicalab::problems::{
    is_valid, Bernoulli, BernoulliProduct, BitCount, CoinCounts, ElementId, FiniteDistribution,
    GroundTruth, Histogram, Output, PerArm, SampleSet, SampleSource, StatProblem, Summarized, ThreeParts,
    UniformUnit,
};
use replicalab::replicable::{
    BestArmConfig, Constant, FirstSample, FixedGridConfig, FixedGridSq, HeavyHittersConfig, IndicatorQuery, RawMean,
    ReplicableAlgorithm, ReplicableBestArm, ReplicableHeavyHitters, SqEstimateConfig, SqEstimator,
};
use replicalab::seed::random_permutation;
use replicalab::transforms::{
    boosted_sq, label_invariant_distribution, label_invariant_wrap, order_invariant_wrap, BernoulliSum,
    LabelInvariant, OrderInvariant, PointwiseLabelInvariant, SuffStatWrapped, DEFAULT_ORACLE_KEYS,
};
use replicalab::{Constants, SeedKey};

use crate::config::{Experiment, ExperimentConfig};
use crate::CliError;

type Result<T, E = replicalab::Error> = std::result::Result<T, E>;

/// One CSV file.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file: &'static str,
    pub header: &'static str,
    pub rows: Vec<String>,
}

impl Table {
    pub fn text(&self) -> String {
        let mut s = String::with_capacity(64 * (self.rows.len() + 1));
        s.push_str(self.header);
        s.push('\n');
        for r in &self.rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub results: Json,
    pub tables: Vec<Table>,
}

pub const DIVERGENCE_HEADER: &str = "m,p_hat,lo,hi";
pub const SCALING_HEADER: &str = "k,m_min,exponent";
pub const NAIVE_HEADER: &str = "k,p0,joint,bound";
pub const THEOREM1_HEADER: &str = "i,n,eps,delta";
pub const PG_HEADER: &str = "j,eps_j,delta_j";
pub const CHECKS_HEADER: &str = "check,cases,mismatches";

fn experiment_key(cfg: &ExperimentConfig) -> SeedKey {
    cfg.seed().derive(cfg.experiment.name(), 0).expect("experiment names are valid labels")
}

/// Shortest round-trip form, in scientific notation for very small or large
/// magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn meter_table(rows: Vec<String>) -> Table {
    Table { file: "meter.csv", header: CSV_HEADER, rows }
}

fn to_json<T: serde::Serialize>(x: &T) -> Json {
    serde_json::to_value(x).expect("results serialize")
}

/// Sums per-trial count vectors of length `width` over all trials.
fn tally<F>(trials: u64, width: usize, f: F) -> Result<Vec<u64>>
where
    F: Fn(u64) -> Result<Vec<u64>> + Sync + Send,
{
    (0..trials).into_par_iter().map(f).try_reduce(
        || vec![0; width],
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            Ok(a)
        },
    )
}

fn constants(cfg: &ExperimentConfig) -> Constants {
    Constants {
        c: cfg.real("constants.c"),
        c1: cfg.real("constants.c1"),
        c2: cfg.real("constants.c2"),
        c3: cfg.real("constants.c3"),
        c4: cfg.real("constants.c4"),
    }
}

fn sq_config(cfg: &ExperimentConfig) -> Result<SqEstimateConfig> {
    SqEstimateConfig::new(cfg.real("rho"), cfg.real("alpha"), cfg.real("beta"), cfg.real("sq.C"))
}

fn masses(weights: &[f64]) -> Result<FiniteDistribution<ElementId>> {
    FiniteDistribution::new((0..weights.len() as ElementId).collect(), weights.to_vec())
}

fn hh_setup(cfg: &ExperimentConfig) -> Result<(HeavyHittersConfig, FiniteDistribution<ElementId>)> {
    let hh = HeavyHittersConfig::new(cfg.real("hh.nu"), cfg.real("hh.eps"), cfg.real("rho"), cfg.real("beta"), cfg.real("hh.C"))?;
    Ok((hh, masses(cfg.reals("hh.masses"))?))
}

fn bestarm_config(cfg: &ExperimentConfig) -> Result<BestArmConfig> {
    let arms = cfg.reals("bestarm.means").len();
    BestArmConfig::new(arms, cfg.real("alpha"), cfg.real("rho"), cfg.real("beta"), cfg.real("bestarm.lambda_scale"), 1.0)
}

fn pipeline_setup(cfg: &ExperimentConfig) -> Result<(FixedGridSq<BitCount>, PipelineConfig, BernoulliProduct)> {
    let grid = FixedGridSq::new(FixedGridConfig::with_n(cfg.count("grid.points") as u32, cfg.count("n") as usize)?);
    let pc = PipelineConfig {
        rho: cfg.real("rho"),
        beta0: cfg.real("beta0"),
        constants: constants(cfg),
        m_runs: cfg.count("pipeline.m_runs") as usize,
        inner_trials: cfg.count("pipeline.inner_trials") as usize,
    };
    Ok((grid, pc, BernoulliProduct::new(cfg.reals("pipeline.means").to_vec())?))
}

fn scaling_config(cfg: &ExperimentConfig) -> ScalingConfig {
    ScalingConfig {
        rho_target: cfg.real("rho_target"),
        games_per_probe: cfg.count("games_per_probe"),
        m_start: cfg.count("m_start") as usize,
        m_max: cfg.count("m_max") as usize,
        growth: cfg.real("growth"),
        refine: cfg.flag("refine"),
    }
}

fn invariance_sq(cfg: &ExperimentConfig) -> Result<SqEstimateConfig> {
    SqEstimateConfig::new(cfg.real("rho"), 0.2, 0.1, cfg.real("sq.C"))
}

fn invariance_grid(cfg: &ExperimentConfig) -> Result<FixedGridConfig> {
    FixedGridConfig::new(5, cfg.real("rho"), 0.1, cfg.real("sq.C"))
}

fn semantic(cfg: &ExperimentConfig) -> Result<()> {
    match cfg.experiment {
        Experiment::Meter => match cfg.word("meter.algorithm") {
            "sq" => sq_config(cfg).map(drop),
            "fixed_grid" => FixedGridConfig::new(cfg.count("grid.points") as u32, cfg.real("rho"), cfg.real("beta"), cfg.real("sq.C")).map(drop),
            "heavy_hitters" => hh_setup(cfg).map(drop),
            "best_arm" => bestarm_config(cfg).map(drop),
            _ => Ok(()),
        },
        Experiment::Boost => {
            boosted_sq::<BitCount>(cfg.real("rho"), cfg.real("alpha"), cfg.real("beta"), cfg.real("sq.C")).map(drop)
        }
        Experiment::ComposeNaive => {
            sq_config(cfg)?;
            BernoulliProduct::new(cfg.reals("coins").to_vec()).map(drop)
        }
        Experiment::ComposePipeline => {
            let (grid, pc, coins) = pipeline_setup(cfg)?;
            Pipeline::new(vec![grid; coins.k()], project, pc).map(drop)
        }
        Experiment::CalcTheorem1 => theorem1_params(cfg.counts("n_list"), cfg.real("rho"), cfg.real("beta0"), &constants(cfg)).map(drop),
        Experiment::CalcPg => {
            pg_compose_het_params(cfg.reals("pg.eps"), cfg.reals("pg.delta"), cfg.reals("pg.gamma"), cfg.real("pg.delta_prime")).map(drop)
        }
        Experiment::LowerboundDivergence => AdversaryDist::new(cfg.real("tau")).map(drop),
        Experiment::LowerboundScaling => {
            let ks = cfg.counts("ks");
            if ks.windows(2).any(|w| w[0] >= w[1]) {
                return Err(replicalab::Error::Config("`ks` must be strictly ascending".into()));
            }
            if cfg.count("m_start") > cfg.count("m_max") {
                return Err(replicalab::Error::Config("`m_start` exceeds `m_max`".into()));
            }
            AdversaryDist::new(cfg.real("tau")).map(drop)
        }
        Experiment::NaiveTightness => sq_config(cfg).map(drop),
        Experiment::Invariance => {
            invariance_sq(cfg)?;
            invariance_grid(cfg)?;
            masses(cfg.reals("invariance.masses")).map(drop)
        }
    }
}

/// Cross-key checks that need the library's constructors. Returns every
/// problem as a message.
pub fn check(cfg: &ExperimentConfig) -> Vec<String> {
    let mut errors = Vec::new();
    if cfg.experiment == Experiment::CalcPg {
        let lens = [cfg.reals("pg.eps").len(), cfg.reals("pg.delta").len(), cfg.reals("pg.gamma").len()];
        if lens.iter().any(|&l| l != lens[0]) {
            errors.push(format!("`pg.eps`, `pg.delta` and `pg.gamma` must have equal lengths, got {lens:?}"));
            return errors;
        }
    }
    if let Err(e) = semantic(cfg) {
        errors.push(e.to_string());
    }
    errors
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Permits the experiments marked slow.
    pub slow: bool,
}

pub fn is_slow(e: Experiment) -> bool {
    e == Experiment::LowerboundScaling
}

pub fn run(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Outcome, CliError> {
    if is_slow(cfg.experiment) && !opts.slow {
        return Err(CliError::Validation(vec![format!(
            "{} is a long run; pass --slow to allow it",
            cfg.experiment
        )]));
    }
    let out = match cfg.experiment {
        Experiment::Meter => meter(cfg),
        Experiment::Boost => boost(cfg),
        Experiment::ComposeNaive => compose_naive(cfg),
        Experiment::ComposePipeline => compose_pipeline(cfg),
        Experiment::CalcTheorem1 => calc_theorem1(cfg),
        Experiment::CalcPg => calc_pg(cfg),
        Experiment::LowerboundDivergence => lowerbound_divergence(cfg),
        Experiment::LowerboundScaling => lowerbound_scaling(cfg),
        Experiment::NaiveTightness => naive_tightness(cfg),
        Experiment::Invariance => invariance(cfg),
    };
    out.map_err(CliError::from)
}

fn meter(cfg: &ExperimentConfig) -> Result<Outcome> {
    let key = experiment_key(cfg);
    let (trials, level) = (cfg.count("trials"), cfg.real("level"));
    let (p, alpha) = (cfg.real("p"), cfg.real("alpha"));
    let name = cfg.word("meter.algorithm");
    let coin = Summarized(Bernoulli::new(p)?);
    let mean_problem = StatProblem::MeanEstimation { alpha };
    let (report, n) = match name {
        "sq" => {
            let alg = SqEstimator::<BitCount>::new(sq_config(cfg)?);
            let n = alg.sample_complexity();
            (estimate_both(&alg, &mean_problem, &GroundTruth::Mean(p), &coin, n, trials, &key, level)?, n)
        }
        "constant" => {
            let n = cfg.count("n") as usize;
            let alg = Constant::<f64, BitCount>::new(p, n);
            (estimate_both(&alg, &mean_problem, &GroundTruth::Mean(p), &coin, n, trials, &key, level)?, n)
        }
        "raw_mean" => {
            let n = cfg.count("n") as usize;
            let alg = RawMean::<SampleSet<f64>>::new(n);
            (estimate_both(&alg, &mean_problem, &GroundTruth::Mean(0.5), &UniformUnit, n, trials, &key, level)?, n)
        }
        "fixed_grid" => {
            let gc = FixedGridConfig::new(cfg.count("grid.points") as u32, cfg.real("rho"), cfg.real("beta"), cfg.real("sq.C"))?;
            let problem = StatProblem::MeanEstimation { alpha: gc.spacing() };
            (estimate_both(&FixedGridSq::<BitCount>::new(gc), &problem, &GroundTruth::Mean(p), &coin, gc.n, trials, &key, level)?, gc.n)
        }
        "heavy_hitters" => {
            let (hh, dist) = hh_setup(cfg)?;
            let truth = GroundTruth::Masses(dist.support().iter().cloned().zip(dist.probs().iter().cloned()).collect());
            let problem = StatProblem::HeavyHitters { nu: hh.nu, eps: hh.eps };
            let alg = ReplicableHeavyHitters::<Histogram>::new(hh);
            (estimate_both(&alg, &problem, &truth, &Summarized(dist), hh.n, trials, &key, level)?, hh.n)
        }
        "best_arm" => {
            let bc = bestarm_config(cfg)?;
            let means = cfg.reals("bestarm.means").to_vec();
            let arms = PerArm { arms: means.iter().map(|&m| Bernoulli::new(m).map(Summarized)).collect::<Result<Vec<_>>>()? };
            let alg = ReplicableBestArm::<BitCount>::new(bc);
            let problem = StatProblem::BestArm { alpha };
            (estimate_both(&alg, &problem, &GroundTruth::ArmMeans(means), &arms, bc.n, trials, &key, level)?, bc.n)
        }
        other => unreachable!("schema admits no algorithm {other}"),
    };
    let label = format!("meter.{name}");
    Ok(Outcome {
        results: json!({ "algorithm": name, "sample_complexity": n, "report": to_json(&report) }),
        tables: vec![meter_table(vec![report.csv_row(&label)])],
    })
}

fn boost(cfg: &ExperimentConfig) -> Result<Outcome> {
    let key = experiment_key(cfg);
    let p = cfg.real("p");
    let alg = boosted_sq::<BitCount>(cfg.real("rho"), cfg.real("alpha"), cfg.real("beta"), cfg.real("sq.C"))?;
    let src = ThreeParts { source: Summarized(Bernoulli::new(p)?), sizes: alg.part_sizes() };
    let report = estimate_both(
        &alg,
        &StatProblem::MeanEstimation { alpha: cfg.real("alpha") },
        &GroundTruth::Mean(p),
        &src,
        alg.sample_complexity(),
        cfg.count("trials"),
        &key,
        cfg.real("level"),
    )?;
    Ok(Outcome {
        results: json!({ "part_sizes": alg.part_sizes(), "report": to_json(&report) }),
        tables: vec![meter_table(vec![report.csv_row("boost")])],
    })
}

fn mean_valid(alpha: f64, mean: f64, out: impl Into<Output>) -> Result<bool> {
    is_valid(&StatProblem::MeanEstimation { alpha }, &GroundTruth::Mean(mean), &out.into())
}

/// Reports from a joint count pair followed by per-coordinate pairs.
fn joint_and_coordinates(
    label: &str,
    counts: &[u64],
    trials: u64,
    level: f64,
) -> Result<(TrialReport, Vec<TrialReport>, Vec<String>)> {
    let joint = TrialReport::new(trials, Some(counts[0]), Some(counts[1]), level)?;
    let mut rows = vec![joint.csv_row(label)];
    let mut coords = Vec::new();
    for (j, pair) in counts[2..].chunks(2).enumerate() {
        let r = TrialReport::new(trials, Some(pair[0]), Some(pair[1]), level)?;
        rows.push(r.csv_row(&format!("{label}.coord{j}")));
        coords.push(r);
    }
    Ok((joint, coords, rows))
}

fn compose_naive(cfg: &ExperimentConfig) -> Result<Outcome> {
    let key = experiment_key(cfg);
    let (trials, level, alpha) = (cfg.count("trials"), cfg.real("level"), cfg.real("alpha"));
    let sq = SqEstimator::<BitCount>::new(sq_config(cfg)?);
    let coins = BernoulliProduct::new(cfg.reals("coins").to_vec())?;
    let k = coins.k();
    let algs: Vec<_> = (0..k).map(|j| Coordinate::new(j, sq.clone())).collect();
    let n = sq.sample_complexity();
    let src = Summarized(coins.clone());
    let counts = tally(trials, 2 + 2 * k, |t| {
        let (r, k1, k2) = trial_keys(&key, t);
        let a = naive_compose(&algs, &src.draw(n, &k1)?, &r)?;
        let b = naive_compose(&algs, &src.draw(n, &k2)?, &r)?;
        let mut c = vec![0u64; 2 + 2 * k];
        for j in 0..k {
            c[2 + 2 * j] = (a[j] != b[j]) as u64;
            c[3 + 2 * j] = !mean_valid(alpha, coins.means()[j], a[j])? as u64;
        }
        c[0] = (a != b) as u64;
        c[1] = (0..k).any(|j| c[3 + 2 * j] == 1) as u64;
        Ok(c)
    })?;
    let (joint, coords, rows) = joint_and_coordinates("compose_naive", &counts, trials, level)?;
    Ok(Outcome {
        results: json!({ "k": k, "sample_complexity": n, "joint": to_json(&joint), "coordinates": to_json(&coords) }),
        tables: vec![meter_table(rows)],
    })
}

fn project(c: &CoinCounts, i: usize) -> Result<BitCount> {
    Ok(c.coord(i))
}

fn compose_pipeline(cfg: &ExperimentConfig) -> Result<Outcome> {
    let key = experiment_key(cfg);
    let (trials, level, alpha) = (cfg.count("trials"), cfg.real("level"), cfg.real("alpha"));
    let (grid, pc, coins) = pipeline_setup(cfg)?;
    let k = coins.k();
    let pipe = Pipeline::new(vec![grid; k], project, pc)?;
    let n = cfg.count("n") as usize * pc.m_runs;
    let src = replicalab::problems::Chunked { source: Summarized(coins.clone()), parts: pc.m_runs };
    let counts = tally(trials, 2 + 2 * k, |t| {
        let (r, k1, k2) = trial_keys(&key, t);
        let a = pipe.run(&src.draw(n, &k1)?, &r)?;
        let b = pipe.run(&src.draw(n, &k2)?, &r)?;
        let mut c = vec![0u64; 2 + 2 * k];
        for j in 0..k {
            c[2 + 2 * j] = (a[j] != b[j]) as u64;
            c[3 + 2 * j] = !mean_valid(alpha, coins.means()[j], a[j])? as u64;
        }
        c[0] = (a != b) as u64;
        c[1] = (0..k).any(|j| c[3 + 2 * j] == 1) as u64;
        Ok(c)
    })?;
    let (joint, coords, rows) = joint_and_coordinates("compose_pipeline", &counts, trials, level)?;
    let validity: Vec<f64> = coords.iter().map(|r| 1.0 - r.beta_hat()).collect();
    Ok(Outcome {
        results: json!({
            "k": k,
            "samples_per_run": n,
            "params": to_json(&pipe.params),
            "validity_floor": 1.0 - pipe.params.beta_bound - 0.05,
            "validity": validity,
            "joint": to_json(&joint),
            "coordinates": to_json(&coords),
        }),
        tables: vec![meter_table(rows)],
    })
}

fn calc_theorem1(cfg: &ExperimentConfig) -> Result<Outcome> {
    let n_list = cfg.counts("n_list");
    let (rho, beta0, consts) = (cfg.real("rho"), cfg.real("beta0"), constants(cfg));
    let params = theorem1_params(n_list, rho, beta0, &consts)?;
    let sum_sq: f64 = params.eps_i.iter().map(|e| e * e).sum();
    let k = n_list.len() as f64;
    let closed_form = 2.0 * consts.c * consts.c * rho * rho / (k / (rho * beta0)).ln();
    let rows = (0..n_list.len())
        .map(|i| format!("{},{},{},{}", i + 1, n_list[i], num(params.eps_i[i]), num(params.delta_i[i])))
        .collect();
    Ok(Outcome {
        results: json!({ "params": to_json(&params), "sum_eps_sq": sum_sq, "sum_eps_sq_closed_form": closed_form }),
        tables: vec![Table { file: "theorem1.csv", header: THEOREM1_HEADER, rows }],
    })
}

fn calc_pg(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (eps, delta, gamma) = (cfg.reals("pg.eps"), cfg.reals("pg.delta"), cfg.reals("pg.gamma"));
    let dp = cfg.real("pg.delta_prime");
    let het = pg_compose_het_params(eps, delta, gamma, dp)?;
    let consts = constants(cfg);
    let (simple_eps, simple_delta) = pg_compose_simple_unchecked(eps, delta, dp, consts.c2, consts.c4);
    let rows = (0..eps.len()).map(|j| format!("{},{},{}", j + 1, num(het.eps_path[j]), num(het.delta_path[j]))).collect();
    Ok(Outcome {
        results: json!({
            "het": to_json(&het),
            "simple": { "eps_star": simple_eps, "delta_star": simple_delta },
        }),
        tables: vec![Table { file: "pg.csv", header: PG_HEADER, rows }],
    })
}

fn lowerbound_divergence(cfg: &ExperimentConfig) -> Result<Outcome> {
    let key = experiment_key(cfg);
    let adv = AdversaryDist::new(cfg.real("tau"))?;
    let trials = cfg.count("trials");
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &m in cfg.counts("m_list") {
        let d = measure_round_divergence(&SignTester, m as usize, &adv, trials, &key.child("m", m))?;
        let e = d.estimate;
        rows.push(format!("{m},{},{},{}", num(e.hat), num(e.lo), num(e.hi)));
        points.push(json!({
            "m": m,
            "estimate": to_json(&e),
            "scaled": e.hat * adv.tau() * (m as f64).sqrt(),
        }));
    }
    Ok(Outcome {
        results: json!({ "tau": adv.tau(), "exact_m1": sign_test_m1_divergence(&adv), "points": points }),
        tables: vec![Table { file: "divergence.csv", header: DIVERGENCE_HEADER, rows }],
    })
}

fn lowerbound_scaling(cfg: &ExperimentConfig) -> Result<Outcome> {
    let key = experiment_key(cfg);
    let adv = AdversaryDist::new(cfg.real("tau"))?;
    let ks: Vec<usize> = cfg.counts("ks").iter().map(|&k| k as usize).collect();
    let table = scaling_experiment(&SignTester, &ks, &adv, &scaling_config(cfg), &key)?;
    let rows = table.rows.iter().map(|r| format!("{},{},{}", r.k, r.m_min, num(table.exponent))).collect();
    Ok(Outcome {
        results: to_json(&table),
        tables: vec![Table { file: "scaling.csv", header: SCALING_HEADER, rows }],
    })
}

fn naive_tightness(cfg: &ExperimentConfig) -> Result<Outcome> {
    let key = experiment_key(cfg);
    let sq = SqEstimator::<BitCount>::new(sq_config(cfg)?);
    let coins = BernoulliProduct::uniform(cfg.count("k") as usize, cfg.real("p"))?;
    let r = naive_tightness_experiment(&sq, &coins, cfg.count("trials"), &key)?;
    Ok(Outcome {
        results: to_json(&r),
        tables: vec![Table {
            file: "naive.csv",
            header: NAIVE_HEADER,
            rows: vec![format!("{},{},{},{}", r.k, num(r.p0), num(r.joint.hat), num(r.bound))],
        }],
    })
}

/// p-value of the chi-square homogeneity test between two histograms;
/// bins empty in both are dropped.
pub fn two_sample_p(a: &[u64], b: &[u64]) -> f64 {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let mut stat = 0.0;
    let mut bins = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let pooled = (x + y) as f64 / (na + nb);
        if pooled == 0.0 {
            continue;
        }
        bins += 1;
        let (ea, eb) = (pooled * na, pooled * nb);
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    if bins < 2 {
        return 1.0;
    }
    ChiSquared::new((bins - 1) as f64).expect("positive degrees of freedom").sf(stat)
}

fn invariance(cfg: &ExperimentConfig) -> Result<Outcome> {
    let key = experiment_key(cfg);
    let (trials, level) = (cfg.count("trials"), cfg.real("level"));
    let triples = cfg.count("invariance.triples");

    // Pointwise order invariance of an order-dependent algorithm.
    let first = FirstSample::<f64>::new(20);
    let order_key = key.child("order", 0);
    let order_mismatch = tally(triples, 1, |t| {
        let k = order_key.child("t", t);
        let mut s = k.child("s", 0).stream();
        let items: Vec<f64> = (0..20).map(|_| s.next_f64()).collect();
        let tau = random_permutation(&k.child("tau", 0), 20)?;
        let permuted = SampleSet::new(tau.iter().map(|&i| items[i]).collect());
        let w = k.child("key", 0);
        let same = order_invariant_wrap(&first, &SampleSet::new(items), &w)? == order_invariant_wrap(&first, &permuted, &w)?;
        Ok(vec![!same as u64])
    })?[0];

    let ordered = OrderInvariant(SqEstimator::<SampleSet<f64>>::new(invariance_sq(cfg)?));
    let order_report = replicalab::meter::estimate_replicability(
        &ordered,
        &UniformUnit,
        ordered.sample_complexity(),
        trials,
        &key.child("order_sq", 0),
        level,
    )?;

    // Label invariance on a small categorical distribution.
    let dist = masses(cfg.reals("invariance.masses"))?;
    let domain: Vec<ElementId> = dist.support().to_vec();
    let d = domain.len() as ElementId;
    let gc = invariance_grid(cfg)?;
    let query = IndicatorQuery { target: 0, alg: FixedGridSq::<BitCount>::new(gc) };
    let labeled = LabelInvariant { alg: query.clone(), domain: domain.clone() };
    let label_report = replicalab::meter::estimate_replicability(&labeled, &dist, gc.n, trials, &key.child("label", 0), level)?;

    let sample = dist.draw(gc.n, &key.child("label_sample", 0))?;
    let relabeled = sample.map(|&x| (x + 1) % d);
    let keys = cfg.count("invariance.label_keys");
    let hist = |data: &SampleSet<ElementId>, tag: &'static str| -> Result<Vec<u64>> {
        let root = key.child(tag, 0);
        tally(keys, gc.points as usize, |t| {
            let mut h = vec![0u64; gc.points as usize];
            h[label_invariant_wrap(&query, &domain, data, &root.child("k", t))?.index as usize] = 1;
            Ok(h)
        })
    };
    let label_p = two_sample_p(&hist(&sample, "label_a")?, &hist(&relabeled, "label_b")?);
    let (law_a, exact_a) = label_invariant_distribution(&query, &domain, &sample, 0, &key)?;
    let (law_b, exact_b) = label_invariant_distribution(&query, &domain, &relabeled, 0, &key)?;
    let exact_law_equal = exact_a && exact_b && law_a == law_b;

    let pointwise = PointwiseLabelInvariant {
        alg: query.clone(),
        domain: domain.clone(),
        inner_keys: DEFAULT_ORACLE_KEYS,
        oracle_key: key.child("oracle", 0),
    };
    let pointwise_report =
        replicalab::meter::estimate_replicability(&pointwise, &dist, gc.n, trials, &key.child("pointwise", 0), level)?;
    let pointwise_cases = triples.min(200);
    let pw_key = key.child("pointwise_check", 0);
    let pointwise_mismatch = tally(pointwise_cases, 1, |t| {
        let k = pw_key.child("t", t);
        let s = dist.draw(gc.n, &k.child("s", 0))?;
        let shift = 1 + t as ElementId % (d - 1).max(1);
        let r = s.map(|&x| (x + shift) % d);
        Ok(vec![(pointwise.run(&s, &k)? != pointwise.run(&r, &k)?) as u64])
    })?[0];

    // Sufficient-statistic wrapper on coin flips.
    let coin = Bernoulli::new(cfg.real("invariance.coin"))?;
    let wrapped = SuffStatWrapped { alg: SqEstimator::<SampleSet<bool>>::new(invariance_sq(cfg)?), stat: BernoulliSum };
    let n = wrapped.sample_complexity();
    let suff_report = replicalab::meter::estimate_replicability(&wrapped, &coin, n, trials, &key.child("suff", 0), level)?;
    let suff_key = key.child("suff_check", 0);
    let suff_mismatch = tally(triples, 1, |t| {
        let k = suff_key.child("t", t);
        let s = coin.draw(n, &k.child("s", 0))?;
        let pi = random_permutation(&k.child("pi", 0), n)?;
        let shuffled = SampleSet::new(pi.iter().map(|&i| s.items()[i]).collect());
        Ok(vec![(wrapped.run(&s, &k)? != wrapped.run(&shuffled, &k)?) as u64])
    })?[0];

    let rows = vec![
        order_report.csv_row("invariance.order_sq"),
        label_report.csv_row("invariance.label"),
        pointwise_report.csv_row("invariance.pointwise_label"),
        suff_report.csv_row("invariance.suff_stat"),
    ];
    let checks = vec![
        format!("order_pointwise,{triples},{order_mismatch}"),
        format!("pointwise_label,{pointwise_cases},{pointwise_mismatch}"),
        format!("suff_stat_count_only,{triples},{suff_mismatch}"),
    ];
    Ok(Outcome {
        results: json!({
            "rho": cfg.real("rho"),
            "order": { "pointwise_cases": triples, "pointwise_mismatches": order_mismatch, "sq": to_json(&order_report) },
            "label": {
                "report": to_json(&label_report),
                "keys": keys,
                "chi_square_p": label_p,
                "exact_law_equal": exact_law_equal,
            },
            "pointwise_label": {
                "report": to_json(&pointwise_report),
                "cases": pointwise_cases,
                "mismatches": pointwise_mismatch,
            },
            "suff_stat": { "report": to_json(&suff_report), "cases": triples, "mismatches": suff_mismatch },
        }),
        tables: vec![meter_table(rows), Table { file: "invariance_checks.csv", header: CHECKS_HEADER, rows: checks }],
    })
}
