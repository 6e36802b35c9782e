//! Matching, rewriting and the stochastic reduction driver.

mod apply;
mod matcher;
mod strategy;

pub use apply::{apply_rewrite, arrow_loops, comb_at, comb_pass, RewriteError, StepRecord};
pub use matcher::{comb_ready, find_transform, has_redex, match_schema, matches_at, Match};
pub use strategy::{
    candidates, pass_rng, reduce, BadWeight, Outcome, PassSummary, Reducer, RunResult, StrategyConfig, DEFAULT_SEED,
    DEFAULT_WEIGHT, PARALLEL_SCAN_THRESHOLD,
};
