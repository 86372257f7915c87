//! Boosting, testers and invariance wrappers.

mod boost;
mod invariance;
mod testers;

pub use boost::{boost_success, boosted_sq, Boosted, BoostedSq};
pub use invariance::{
    label_invariant_distribution, label_invariant_wrap, order_invariant_wrap, pointwise_label_invariant_wrap,
    suff_stat_wrap, BernoulliSum, LabelInvariant, OrderInvariant, PointwiseLabelInvariant, SuffStatWrapped,
    SufficientStatistic, DEFAULT_ORACLE_KEYS, EXACT_PERMUTATION_LIMIT,
};
pub use testers::{
    bernoulli_rate_tester, best_arm_tester, heavy_hitters_tester, mean_tester, nonreplicable_heavy_hitters,
    BernoulliRateTester, BestArmTester, EmpiricalArgmax, EmpiricalMean, Fallback, HeavyHittersFallback,
    HeavyHittersTester, HhTestConfig, MeanTester, Tester, Verdict, HH_ESTIMATE_C,
};
