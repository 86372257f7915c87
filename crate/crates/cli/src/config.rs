//! Flat `key = value` experiment configuration.
//!
//! One entry per line, `#` starts a comment, keys may be dotted
//! (`sq.C = 8`). Lists are comma separated. Every experiment has a fixed
//! key schema; absent keys take their documented defaults and unknown keys
//! are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use replicalab::seed::DEFAULT_ROOT_SEED;
use replicalab::SeedKey;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    Meter,
    Boost,
    ComposeNaive,
    ComposePipeline,
    CalcTheorem1,
    CalcPg,
    LowerboundDivergence,
    LowerboundScaling,
    NaiveTightness,
    Invariance,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::Meter,
        Experiment::Boost,
        Experiment::ComposeNaive,
        Experiment::ComposePipeline,
        Experiment::CalcTheorem1,
        Experiment::CalcPg,
        Experiment::LowerboundDivergence,
        Experiment::LowerboundScaling,
        Experiment::NaiveTightness,
        Experiment::Invariance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Meter => "meter",
            Experiment::Boost => "boost",
            Experiment::ComposeNaive => "compose_naive",
            Experiment::ComposePipeline => "compose_pipeline",
            Experiment::CalcTheorem1 => "calc_theorem1",
            Experiment::CalcPg => "calc_pg",
            Experiment::LowerboundDivergence => "lowerbound_divergence",
            Experiment::LowerboundScaling => "lowerbound_scaling",
            Experiment::NaiveTightness => "naive_tightness",
            Experiment::Invariance => "invariance",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!("unknown experiment `{s}` (expected one of {})", names.join(", "))
            })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Real(f64),
    Count(u64),
    Flag(bool),
    Reals(Vec<f64>),
    Counts(Vec<u64>),
    Word(String),
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(x) => write!(f, "{x}"),
            Value::Count(n) => write!(f, "{n}"),
            Value::Flag(b) => write!(f, "{b}"),
            Value::Reals(v) => f.write_str(&join(v)),
            Value::Counts(v) => f.write_str(&join(v)),
            Value::Word(w) => f.write_str(w),
        }
    }
}

/// An interval of reals; `None` ends are unbounded.
#[derive(Clone, Copy, Debug)]
pub struct Range {
    lo: Option<(f64, bool)>,
    hi: Option<(f64, bool)>,
}

impl Range {
    const fn open(lo: f64, hi: f64) -> Self {
        Self { lo: Some((lo, false)), hi: Some((hi, false)) }
    }

    const fn closed(lo: f64, hi: f64) -> Self {
        Self { lo: Some((lo, true)), hi: Some((hi, true)) }
    }

    const fn positive() -> Self {
        Self { lo: Some((0.0, false)), hi: None }
    }

    const fn left_open(lo: f64, hi: f64) -> Self {
        Self { lo: Some((lo, false)), hi: Some((hi, true)) }
    }

    fn contains(&self, x: f64) -> bool {
        let above = match self.lo {
            Some((lo, true)) => x >= lo,
            Some((lo, false)) => x > lo,
            None => true,
        };
        let below = match self.hi {
            Some((hi, true)) => x <= hi,
            Some((hi, false)) => x < hi,
            None => true,
        };
        above && below && x.is_finite()
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lo {
            Some((lo, closed)) => write!(f, "{}{lo}, ", if closed { '[' } else { '(' })?,
            None => write!(f, "(-inf, ")?,
        }
        match self.hi {
            Some((hi, closed)) => write!(f, "{hi}{}", if closed { ']' } else { ')' }),
            None => write!(f, "inf)"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Kind {
    Real(Range),
    Count { min: u64, max: u64 },
    Flag,
    Reals(Range),
    Counts { min: u64, max: u64 },
    Word(&'static [&'static str]),
}

#[derive(Clone, Copy, Debug)]
pub struct Param {
    pub key: &'static str,
    pub kind: Kind,
    pub default: &'static str,
}

const fn p(key: &'static str, kind: Kind, default: &'static str) -> Param {
    Param { key, kind, default }
}

const UNIT: Kind = Kind::Real(Range::open(0.0, 1.0));
const PROB: Kind = Kind::Real(Range::closed(0.0, 1.0));
const POS: Kind = Kind::Real(Range::positive());

const fn trials(min: u64, default: &'static str) -> Param {
    p("trials", Kind::Count { min, max: u64::MAX }, default)
}

const CONSTANTS: [Param; 5] = [
    p("constants.c", UNIT, "0.1"),
    p("constants.c1", POS, "0.01"),
    p("constants.c2", POS, "6"),
    p("constants.c3", POS, "0.5"),
    p("constants.c4", POS, "5"),
];

pub const METER_ALGORITHMS: &[&str] = &["sq", "constant", "raw_mean", "fixed_grid", "heavy_hitters", "best_arm"];

/// Keys accepted by `e`, besides `experiment`, `root_seed`, `output_dir`
/// and `threads`.
pub fn schema(e: Experiment) -> Vec<Param> {
    let mut s = vec![p("level", UNIT, "0.95")];
    match e {
        Experiment::Meter => s.extend([
            p("meter.algorithm", Kind::Word(METER_ALGORITHMS), "sq"),
            trials(100, "10000"),
            p("rho", UNIT, "0.1"),
            p("alpha", UNIT, "0.1"),
            p("beta", UNIT, "0.05"),
            p("p", PROB, "0.5"),
            p("n", Kind::Count { min: 1, max: 1 << 40 }, "100"),
            p("sq.C", POS, "8"),
            p("grid.points", Kind::Count { min: 2, max: 1 << 20 }, "5"),
            p("hh.nu", UNIT, "0.4"),
            p("hh.eps", UNIT, "0.1"),
            p("hh.C", POS, "8"),
            p("hh.masses", Kind::Reals(Range::closed(0.0, 1.0)), "0.5,0.3,0.2"),
            p("bestarm.means", Kind::Reals(Range::closed(0.0, 1.0)), "0.9,0.1"),
            p("bestarm.lambda_scale", POS, "1"),
        ]),
        Experiment::Boost => s.extend([
            trials(100, "100000"),
            p("rho", UNIT, "0.2"),
            p("alpha", UNIT, "0.1"),
            p("beta", UNIT, "0.001"),
            p("p", PROB, "0.5"),
            p("sq.C", POS, "8"),
        ]),
        Experiment::ComposeNaive => s.extend([
            trials(100, "10000"),
            p("coins", Kind::Reals(Range::closed(0.0, 1.0)), "0.1,0.4,0.6,0.9"),
            p("rho", UNIT, "0.2"),
            p("alpha", UNIT, "0.1"),
            p("beta", UNIT, "0.1"),
            p("sq.C", POS, "8"),
        ]),
        Experiment::ComposePipeline => {
            s.extend([
                trials(100, "10000"),
                p("pipeline.means", Kind::Reals(Range::closed(0.0, 1.0)), "0.5,0.3"),
                p("grid.points", Kind::Count { min: 2, max: 100 }, "5"),
                p("n", Kind::Count { min: 1, max: 1 << 30 }, "50"),
                p("alpha", UNIT, "0.25"),
                p("rho", UNIT, "0.5"),
                p("beta0", UNIT, "0.01"),
                p("pipeline.m_runs", Kind::Count { min: 2, max: 1 << 20 }, "500"),
                p("pipeline.inner_trials", Kind::Count { min: 1, max: 1 << 30 }, "20"),
            ]);
            s.extend(CONSTANTS);
        }
        Experiment::CalcTheorem1 => {
            s.extend([
                p("n_list", Kind::Counts { min: 1, max: u64::MAX }, "100,100"),
                p("rho", UNIT, "0.5"),
                p("beta0", UNIT, "0.01"),
            ]);
            s.extend(CONSTANTS);
        }
        Experiment::CalcPg => {
            s.extend([
                p("pg.eps", Kind::Reals(Range::left_open(0.0, 1.0)), "0.05,0.05,0.05"),
                p("pg.delta", Kind::Reals(Range::positive()), "0.0001,0.0001,0.0001"),
                p("pg.gamma", Kind::Reals(Range::open(0.0, 1.0)), "0.0001,0.0001,0.0001"),
                p("pg.delta_prime", Kind::Real(Range::open(0.0, 0.5)), "0.001"),
            ]);
            s.extend(CONSTANTS);
        }
        Experiment::LowerboundDivergence => s.extend([
            trials(1000, "100000"),
            p("tau", Kind::Real(Range::open(0.0, 0.25)), "0.1"),
            p("m_list", Kind::Counts { min: 1, max: 1 << 40 }, "1,100,1000,10000"),
        ]),
        Experiment::LowerboundScaling => s.extend([
            p("tau", Kind::Real(Range::open(0.0, 0.25)), "0.1"),
            p("ks", Kind::Counts { min: 1, max: 1 << 20 }, "1,2,4,8"),
            p("rho_target", UNIT, "0.1"),
            p("games_per_probe", Kind::Count { min: 100, max: u64::MAX }, "100000"),
            p("m_start", Kind::Count { min: 1, max: 1 << 40 }, "1"),
            p("m_max", Kind::Count { min: 1, max: 1 << 40 }, "16777216"),
            p("growth", Kind::Real(Range { lo: Some((1.0, false)), hi: None }), "1.25"),
            p("refine", Kind::Flag, "true"),
        ]),
        Experiment::NaiveTightness => s.extend([
            trials(1000, "100000"),
            p("k", Kind::Count { min: 1, max: replicalab::problems::MAX_COINS as u64 }, "10"),
            p("p", PROB, "0.5"),
            p("rho", UNIT, "0.2"),
            p("alpha", UNIT, "0.1"),
            p("beta", UNIT, "0.1"),
            p("sq.C", POS, "8"),
        ]),
        Experiment::Invariance => s.extend([
            trials(100, "3000"),
            p("rho", UNIT, "0.2"),
            p("sq.C", POS, "8"),
            p("invariance.triples", Kind::Count { min: 1, max: u64::MAX }, "1000"),
            p("invariance.label_keys", Kind::Count { min: 100, max: u64::MAX }, "20000"),
            p("invariance.masses", Kind::Reals(Range::closed(0.0, 1.0)), "0.5,0.3,0.2"),
            p("invariance.coin", PROB, "0.35"),
        ]),
    }
    s
}

/// A validated configuration with every schema key present.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// 64 hex characters.
    pub root_seed: String,
    pub output_dir: PathBuf,
    pub threads: Option<usize>,
    pub params: BTreeMap<String, Value>,
}

impl ExperimentConfig {
    pub fn seed(&self) -> SeedKey {
        SeedKey::from_hex(&self.root_seed).expect("validated root seed")
    }

    fn get(&self, key: &str) -> &Value {
        self.params.get(key).unwrap_or_else(|| panic!("`{key}` is not a key of {}", self.experiment))
    }

    pub fn real(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Real(x) => *x,
            v => panic!("`{key}` holds {v:?}, not a real"),
        }
    }

    pub fn count(&self, key: &str) -> u64 {
        match self.get(key) {
            Value::Count(n) => *n,
            v => panic!("`{key}` holds {v:?}, not a count"),
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        match self.get(key) {
            Value::Flag(b) => *b,
            v => panic!("`{key}` holds {v:?}, not a flag"),
        }
    }

    pub fn reals(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Value::Reals(v) => v,
            v => panic!("`{key}` holds {v:?}, not a real list"),
        }
    }

    pub fn counts(&self, key: &str) -> &[u64] {
        match self.get(key) {
            Value::Counts(v) => v,
            v => panic!("`{key}` holds {v:?}, not a count list"),
        }
    }

    pub fn word(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Word(w) => w,
            v => panic!("`{key}` holds {v:?}, not a word"),
        }
    }

    /// Replaces one parameter, checking it against the schema.
    pub fn set(&mut self, key: &str, text: &str) -> Result<(), String> {
        let param = schema(self.experiment)
            .into_iter()
            .find(|p| p.key == key)
            .ok_or_else(|| format!("unknown key `{key}` for experiment {}", self.experiment))?;
        self.params.insert(key.to_string(), parse_value(&param, text)?);
        Ok(())
    }

    /// Canonical text form: fixed keys first, then parameters sorted.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "experiment = {}\nroot_seed = {}\noutput_dir = {}\n",
            self.experiment,
            self.root_seed,
            self.output_dir.display()
        );
        if let Some(t) = self.threads {
            out.push_str(&format!("threads = {t}\n"));
        }
        for (k, v) in &self.params {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

/// Result of validation: the config plus any warnings to print.
#[derive(Clone, Debug)]
pub struct Validated {
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
}

fn parse_real(text: &str) -> Option<f64> {
    text.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_count(text: &str) -> Option<u64> {
    text.replace('_', "").parse::<u64>().ok()
}

fn list<T>(text: &str, f: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    let v: Option<Vec<T>> = text.split(',').map(|s| f(s.trim())).collect();
    v.filter(|v| !v.is_empty())
}

fn parse_value(param: &Param, text: &str) -> Result<Value, String> {
    let key = param.key;
    let text = text.trim();
    let bad = |what: &str| format!("`{key}` = {text:?} is not {what}");
    let count_in = |n: u64, min: u64, max: u64| -> Result<u64, String> {
        if n < min || n > max {
            Err(format!("`{key}` = {n} is out of range [{min}, {max}]"))
        } else {
            Ok(n)
        }
    };
    match param.kind {
        Kind::Real(r) => {
            let x = parse_real(text).ok_or_else(|| bad("a finite real"))?;
            if !r.contains(x) {
                return Err(format!("`{key}` = {x} is out of range {r}"));
            }
            Ok(Value::Real(x))
        }
        Kind::Count { min, max } => {
            let n = parse_count(text).ok_or_else(|| bad("a non-negative integer"))?;
            Ok(Value::Count(count_in(n, min, max)?))
        }
        Kind::Flag => match text {
            "true" => Ok(Value::Flag(true)),
            "false" => Ok(Value::Flag(false)),
            _ => Err(bad("`true` or `false`")),
        },
        Kind::Reals(r) => {
            let v = list(text, parse_real).ok_or_else(|| bad("a comma-separated list of reals"))?;
            if let Some(x) = v.iter().find(|&&x| !r.contains(x)) {
                return Err(format!("`{key}` entry {x} is out of range {r}"));
            }
            Ok(Value::Reals(v))
        }
        Kind::Counts { min, max } => {
            let v = list(text, parse_count).ok_or_else(|| bad("a comma-separated list of integers"))?;
            for &n in &v {
                count_in(n, min, max)?;
            }
            Ok(Value::Counts(v))
        }
        Kind::Word(words) => {
            if words.contains(&text) {
                Ok(Value::Word(text.to_string()))
            } else {
                Err(format!("`{key}` = {text:?} is not one of {}", words.join(", ")))
            }
        }
    }
}

/// Splits `key = value`.
pub fn split_entry(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    let k = k.trim();
    (!k.is_empty()).then_some((k, v.trim()))
}

/// Parses, type-checks and range-checks `text` with `overrides` applied on
/// top. Every problem found is reported.
pub fn validate_config(text: &str, overrides: &[String]) -> Result<Validated, Vec<String>> {
    let mut errors = Vec::new();
    let mut entries: BTreeMap<String, (String, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = format!("line {}", i + 1);
        match split_entry(line) {
            None => errors.push(format!("{at}: expected `key = value`, found {line:?}")),
            Some((k, v)) => {
                if let Some((prev, _)) = entries.get(k) {
                    errors.push(format!("{at}: duplicate key `{k}` (first set at {prev})"));
                } else {
                    entries.insert(k.to_string(), (at, v.to_string()));
                }
            }
        }
    }
    for o in overrides {
        match split_entry(o) {
            None => errors.push(format!("--override {o:?}: expected `key=value`")),
            Some((k, v)) => {
                entries.insert(k.to_string(), (format!("--override {o:?}"), v.to_string()));
            }
        }
    }

    let experiment = match entries.remove("experiment") {
        None => {
            errors.push("missing required key `experiment`".to_string());
            None
        }
        Some((at, v)) => match v.parse::<Experiment>() {
            Ok(e) => Some(e),
            Err(msg) => {
                errors.push(format!("{at}: {msg}"));
                None
            }
        },
    };

    let mut warnings = Vec::new();
    let root_seed = match entries.remove("root_seed") {
        None => {
            warnings.push(format!("warning: root_seed not set; using the default seed {DEFAULT_ROOT_SEED}"));
            DEFAULT_ROOT_SEED.to_string()
        }
        Some((at, v)) => {
            if let Err(e) = SeedKey::from_hex(&v) {
                errors.push(format!("{at}: `root_seed`: {e}"));
            }
            v.to_ascii_lowercase()
        }
    };

    let output_dir = match entries.remove("output_dir") {
        Some((at, v)) if v.is_empty() => {
            errors.push(format!("{at}: `output_dir` is empty"));
            PathBuf::new()
        }
        Some((_, v)) => PathBuf::from(v),
        None => PathBuf::from("out").join(experiment.map_or("unknown", |e| e.name())),
    };

    let threads = entries.remove("threads").and_then(|(at, v)| match parse_count(&v) {
        Some(n) if n >= 1 => Some(n as usize),
        _ => {
            errors.push(format!("{at}: `threads` = {v:?} must be a positive integer"));
            None
        }
    });

    let Some(experiment) = experiment else {
        return Err(errors);
    };

    let schema = schema(experiment);
    let mut params = BTreeMap::new();
    for (k, (at, v)) in &entries {
        match schema.iter().find(|p| p.key == k) {
            None => errors.push(format!("{at}: unknown key `{k}` for experiment {experiment}")),
            Some(param) => match parse_value(param, v) {
                Ok(val) => {
                    params.insert(k.clone(), val);
                }
                Err(msg) => errors.push(format!("{at}: {msg}")),
            },
        }
    }
    for param in &schema {
        if !params.contains_key(param.key) && !entries.contains_key(param.key) {
            let v = parse_value(param, param.default).expect("schema defaults are valid");
            params.insert(param.key.to_string(), v);
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }

    let config = ExperimentConfig { experiment, root_seed, output_dir, threads, params };
    let semantic = crate::experiments::check(&config);
    if semantic.is_empty() {
        Ok(Validated { config, warnings })
    } else {
        Err(semantic)
    }
}
