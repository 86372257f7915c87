use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Identifier of a domain element in heavy-hitters style problems.
pub type ElementId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

/// A point of the fixed uniform grid `{0, 1/(points-1), …, 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: u32,
    pub points: u32,
}

impl GridPoint {
    pub fn value(self) -> f64 {
        self.index as f64 / (self.points - 1) as f64
    }
}

/// A statistical problem: for each ground truth, the set of acceptable
/// outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StatProblem {
    /// `|output − μ| ≤ α`, outputs in `[0, 1]`.
    MeanEstimation { alpha: f64 },
    /// Lists containing every element of mass ≥ ν and none of mass ≤ ν − ε.
    HeavyHitters { nu: f64, eps: f64 },
    /// An arm whose mean is within α of the best.
    BestArm { alpha: f64 },
    /// Sign of θ − ½ with an indifference window of half-width τ.
    Threshold { tau: f64 },
    /// All coordinates valid simultaneously.
    Composed(Vec<StatProblem>),
}

/// What the harness knows about the data-generating distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GroundTruth {
    Mean(f64),
    Masses(Vec<(ElementId, f64)>),
    ArmMeans(Vec<f64>),
    Theta(f64),
    Composed(Vec<GroundTruth>),
}

/// A type-erased algorithm output, as seen by [`is_valid`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Output {
    Real(f64),
    List(Vec<ElementId>),
    Arm(usize),
    Sign(Sign),
    Tuple(Vec<Output>),
}

impl From<f64> for Output {
    fn from(x: f64) -> Self {
        Output::Real(x)
    }
}

impl From<GridPoint> for Output {
    fn from(g: GridPoint) -> Self {
        Output::Real(g.value())
    }
}

impl From<Vec<ElementId>> for Output {
    fn from(l: Vec<ElementId>) -> Self {
        Output::List(l)
    }
}

impl From<usize> for Output {
    fn from(a: usize) -> Self {
        Output::Arm(a)
    }
}

impl From<Sign> for Output {
    fn from(s: Sign) -> Self {
        Output::Sign(s)
    }
}

impl From<Vec<GridPoint>> for Output {
    fn from(v: Vec<GridPoint>) -> Self {
        Output::Tuple(v.into_iter().map(Output::from).collect())
    }
}

impl From<Vec<f64>> for Output {
    fn from(v: Vec<f64>) -> Self {
        Output::Tuple(v.into_iter().map(Output::Real).collect())
    }
}

fn mismatch(problem: &StatProblem, truth: &GroundTruth, output: &Output) -> crate::Error {
    domain(format!(
        "output {output:?} / truth {truth:?} do not belong to problem {problem:?}"
    ))
}

/// Whether `output` is acceptable for `problem` under `truth`.
pub fn is_valid(problem: &StatProblem, truth: &GroundTruth, output: &Output) -> Result<bool> {
    match (problem, truth, output) {
        (StatProblem::MeanEstimation { alpha }, GroundTruth::Mean(mu), Output::Real(x)) => {
            if !(0.0..=1.0).contains(x) {
                return Err(domain(format!("mean estimate {x} lies outside [0, 1]")));
            }
            Ok((x - mu).abs() <= *alpha)
        }
        (StatProblem::HeavyHitters { nu, eps }, GroundTruth::Masses(masses), Output::List(list)) => {
            let mass_of = |x: ElementId| {
                masses.iter().find(|(e, _)| *e == x).map(|(_, m)| *m).unwrap_or(0.0)
            };
            let heavy_missing = masses.iter().any(|(e, m)| *m >= *nu && !list.contains(e));
            let light_present = list.iter().any(|&x| mass_of(x) <= nu - eps);
            Ok(!heavy_missing && !light_present)
        }
        (StatProblem::BestArm { alpha }, GroundTruth::ArmMeans(means), Output::Arm(a)) => {
            let Some(&mu) = means.get(*a) else {
                return Err(domain(format!("arm {a} out of range for {} arms", means.len())));
            };
            let best = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Ok(mu >= best - alpha)
        }
        (StatProblem::Threshold { tau }, GroundTruth::Theta(theta), Output::Sign(s)) => {
            Ok(match s {
                Sign::Minus => *theta < 0.5 + tau,
                Sign::Plus => *theta > 0.5 - tau,
            })
        }
        (StatProblem::Composed(ps), GroundTruth::Composed(ts), Output::Tuple(os))
            if ps.len() == ts.len() && ps.len() == os.len() =>
        {
            for ((p, t), o) in ps.iter().zip(ts).zip(os) {
                if !is_valid(p, t, o)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => Err(mismatch(problem, truth, output)),
    }
}
