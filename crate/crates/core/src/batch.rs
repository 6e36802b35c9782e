//! Many independent reductions at once.

use crate::engine::{reduce, RunResult, StrategyConfig};
use crate::mol::MolGraph;
use crate::token::Ledger;

#[derive(Clone, Debug)]
pub struct Job {
    pub graph: MolGraph,
    pub ledger: Ledger,
    pub cfg: StrategyConfig,
    pub max_passes: u64,
}

/// How a batch is spread over threads. Without the `parallel` feature,
/// `Parallel` runs sequentially.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

/// Runs every job; results come back in job order whatever `exec` is.
pub fn reduce_batch(jobs: Vec<Job>, exec: Exec) -> Vec<RunResult> {
    let run = |j: Job| reduce(j.graph, j.ledger, &j.cfg, j.max_passes);
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            jobs.into_par_iter().map(run).collect()
        }
        _ => jobs.into_iter().map(run).collect(),
    }
}

/// Maps `f` over `items`, in parallel when enabled.
pub fn par_map<T: Send, R: Send>(items: Vec<T>, exec: Exec, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.into_par_iter().map(f).collect()
        }
        _ => items.into_iter().map(f).collect(),
    }
}
