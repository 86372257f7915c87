//! Correlated sampling over a finite support.
//!
//! Rejection scheme over the key's shared stream: in round `t` draw a
//! uniform support index `y_t` and a uniform `u_t`, accept the first round
//! with `u_t < P(y_t)`. Each caller's output has law exactly `P`. Two
//! callers holding `P` and `Q` on the same ordered support can only split
//! on a round that lands under `max(P,Q)` but above `min(P,Q)`, so they
//! disagree with probability at most `1 − Σmin/Σmax = 2·TV/(1+TV)`. The
//! bound is not tight: the caller that rejects may later land on the same
//! element.

use crate::error::{Error, Result};
use crate::problems::FiniteDistribution;
use crate::scalar::{Probability, Real};
use crate::seed::SeedKey;

/// Round budget before giving up. For supports of at most 10⁴ elements the
/// chance of exhausting it is below `(1 − 10⁻⁴)^(10⁶) < 2⁻⁴⁰`.
pub const MAX_ROUNDS: u64 = 1_000_000;

/// Index into the support chosen by correlated sampling.
pub fn correlated_index<Y, T: Probability>(p: &FiniteDistribution<Y, T>, key: &SeedKey) -> Result<usize> {
    let probs: Vec<f64> = p.probs().iter().map(|x| x.to_f64().unwrap_or(0.0)).collect();
    correlated_index_f64(&probs, key)
}

pub(crate) fn correlated_index_f64(probs: &[f64], key: &SeedKey) -> Result<usize> {
    let n = probs.len();
    if n == 0 {
        return Err(Error::Validation("correlated sampling over an empty support".into()));
    }
    let mut stream = key.stream();
    for _ in 0..MAX_ROUNDS {
        let y = stream.next_index(n);
        let u = stream.next_f64();
        if u < probs[y] {
            return Ok(y);
        }
    }
    Err(Error::Internal(format!("correlated sampling exceeded {MAX_ROUNDS} rounds")))
}

/// Correlated sample from `p` under the shared key.
pub fn correlated_sample<Y: Clone, T: Probability>(
    p: &FiniteDistribution<Y, T>,
    key: &SeedKey,
) -> Result<Y> {
    correlated_index(p, key).map(|i| p.support()[i].clone())
}

/// The disagreement ceiling `2·tv/(1+tv)` of correlated sampling.
pub fn disagreement_bound<T: Real>(tv: T) -> Result<T> {
    if !(tv >= T::zero() && tv <= T::one()) {
        return Err(Error::Domain(format!("total variation {tv:?} outside [0, 1]")));
    }
    let two = T::one() + T::one();
    Ok(two * tv / (T::one() + tv))
}
