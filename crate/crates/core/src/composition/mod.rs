//! Naive and PG-based composition, and the parameter calculus behind them.

mod naive;
mod params;
mod pg;
mod pipeline;

pub use naive::{naive_compose, Coordinate, NaiveComposition};
pub use params::{
    pg_compose_het_params, pg_compose_simple, pg_compose_simple_unchecked, theorem1_params, CompositionParams,
    Constants, HetComposition, PgParams,
};
pub use pg::{pg_to_replicable, replicability_to_pg, PgSurrogate};
pub use pipeline::{compose_pipeline, Pipeline, PipelineConfig, DEFAULT_INNER_TRIALS, MAX_PRODUCT_SPACE};
