use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::CostVector;
use crate::mol::{serialize_mol, LineSep, MolGraph, NodeId};
use crate::schema::{reduction_table, RewriteKind, RewriteSchema};
use crate::token::{Ledger, TokenMode};

use super::apply::{apply_rewrite, comb_pass, RewriteError, StepRecord};
use super::matcher::{has_redex, matches_at, Match};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_WEIGHT: f64 = 0.5;

/// Graphs at least this large have their candidate scan split across
/// threads when the `parallel` feature is on.
pub const PARALLEL_SCAN_THRESHOLD: usize = 2048;

/// Knobs of the stochastic driver. `weight` moves between SLIM (0, favour
/// BETA and TERMINATION) and GROW (1, favour DIST).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct StrategyConfig {
    pub weight: f64,
    pub seed: u64,
    pub token_mode: TokenMode,
    /// Cap on rewrites accepted per pass, COMB excluded.
    pub max_steps_per_pass: Option<usize>,
    /// Attach a mol snapshot to every step whose index is a multiple of this.
    pub snapshot_every: Option<u64>,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            weight: DEFAULT_WEIGHT,
            seed: DEFAULT_SEED,
            token_mode: TokenMode::Open,
            max_steps_per_pass: None,
            snapshot_every: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("weight must lie in [0, 1], got {0}")]
pub struct BadWeight(pub f64);

impl StrategyConfig {
    pub fn check(&self) -> Result<(), BadWeight> {
        if (0.0..=1.0).contains(&self.weight) {
            Ok(())
        } else {
            Err(BadWeight(self.weight))
        }
    }

    pub fn acceptance(&self, kind: RewriteKind) -> f64 {
        match kind {
            RewriteKind::Dist => self.weight,
            RewriteKind::Beta | RewriteKind::Termination => 1.0 - self.weight,
            _ => 1.0,
        }
    }
}

/// The RNG for pass `pass`: one ChaCha stream per pass, so a pass depends
/// only on the seed, its index and the graph it starts from.
pub fn pass_rng(seed: u64, pass: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pass);
    rng
}

/// Every match anchored at each node of `order`, in that order.
pub fn candidates<'t>(g: &MolGraph, order: &[NodeId], table: &'t [RewriteSchema]) -> Vec<Match<'t>> {
    #[cfg(feature = "parallel")]
    if order.len() >= PARALLEL_SCAN_THRESHOLD {
        use rayon::prelude::*;
        let chunks: Vec<_> = order.par_iter().map(|id| matches_at(g, *id, table)).collect();
        return chunks.into_iter().flatten().collect();
    }
    order.iter().flat_map(|id| matches_at(g, *id, table)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    NormalForm,
    BudgetExhausted,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PassSummary {
    pub pass: u64,
    pub records: Vec<StepRecord>,
    /// Rewrites applied, COMB included.
    pub applied: usize,
    pub blocked: usize,
    /// Set when the pass applied nothing and no rewrite matches anywhere.
    pub normal_form: bool,
}

/// A reduction in progress: graph, ledger and the full trace so far.
#[derive(Clone, Debug)]
pub struct Reducer {
    pub graph: MolGraph,
    pub ledger: Ledger,
    pub cfg: StrategyConfig,
    pub costs: CostVector,
    pub trace: Vec<StepRecord>,
    pass: u64,
    step: u64,
    outcome: Option<Outcome>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub graph: MolGraph,
    pub ledger: Ledger,
    pub trace: Vec<StepRecord>,
    pub outcome: Outcome,
    pub passes: u64,
}

impl Reducer {
    /// The ledger's mint is moved past any minted name already in `graph`.
    pub fn new(graph: MolGraph, mut ledger: Ledger, cfg: StrategyConfig) -> Self {
        ledger.mint.skip_past(&graph);
        Reducer { graph, ledger, cfg, costs: CostVector::default(), trace: Vec::new(), pass: 0, step: 0, outcome: None }
    }

    pub fn with_costs(mut self, costs: CostVector) -> Self {
        self.costs = costs;
        self
    }

    /// Passes run so far.
    pub fn passes(&self) -> u64 {
        self.pass
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn is_normal(&self) -> bool {
        self.outcome == Some(Outcome::NormalForm)
    }

    fn record(&mut self, mut r: StepRecord, out: &mut Vec<StepRecord>) {
        r.step = self.step;
        r.pass = self.pass;
        if let Some(n) = self.cfg.snapshot_every {
            if n > 0 && self.step.is_multiple_of(n) {
                r.mol = Some(serialize_mol(&self.graph, LineSep::Newline));
            }
        }
        self.step += 1;
        out.push(r);
    }

    /// One pass: shuffle, collect candidates, greedily accept node-disjoint
    /// ones by kind, apply them, then run COMB to fixpoint.
    pub fn step_pass(&mut self) -> PassSummary {
        let table = reduction_table();
        let mut rng = pass_rng(self.cfg.seed, self.pass);
        let mut order: Vec<NodeId> = self.graph.node_ids().collect();
        order.shuffle(&mut rng);

        let mut accepted = Vec::new();
        {
            let found = candidates(&self.graph, &order, table);
            let mut used: HashSet<NodeId> = HashSet::new();
            let cap = self.cfg.max_steps_per_pass.unwrap_or(usize::MAX);
            for m in found {
                if accepted.len() >= cap {
                    break;
                }
                if m.nodes.iter().any(|n| used.contains(n)) {
                    continue;
                }
                if rng.random::<f64>() < self.cfg.acceptance(m.schema.kind) {
                    used.extend(m.nodes.iter().copied());
                    accepted.push(m);
                }
            }
        }

        let mut records = Vec::new();
        let (mut applied, mut blocked) = (0, 0);
        for m in &accepted {
            match apply_rewrite(&mut self.graph, m, &mut self.ledger, self.cfg.token_mode, &self.costs) {
                Ok(r) => {
                    applied += 1;
                    self.record(r, &mut records);
                }
                Err(RewriteError::Ledger(_)) => {
                    blocked += 1;
                    let r = StepRecord::blocked(m.schema, m.anchor, self.graph.len());
                    self.record(r, &mut records);
                }
                Err(e @ RewriteError::StaleMatch { .. }) => unreachable!("disjoint matches stay valid: {e}"),
            }
        }
        for r in comb_pass(&mut self.graph, &mut self.ledger, &self.costs) {
            applied += 1;
            self.record(r, &mut records);
        }

        let normal_form = applied == 0 && !has_redex(&self.graph, table);
        if normal_form {
            self.outcome = Some(Outcome::NormalForm);
        }
        self.trace.extend(records.iter().cloned());
        let summary = PassSummary { pass: self.pass, records, applied, blocked, normal_form };
        self.pass += 1;
        summary
    }

    /// Runs passes until normal form or until `max_passes` passes have run
    /// in total.
    pub fn run(&mut self, max_passes: u64) -> Outcome {
        self.run_observed(max_passes, |_, _| {})
    }

    /// Like [`Reducer::run`], calling `observe` after every pass.
    pub fn run_observed(&mut self, max_passes: u64, mut observe: impl FnMut(&PassSummary, &Reducer)) -> Outcome {
        while self.outcome.is_none() && self.pass < max_passes {
            let s = self.step_pass();
            observe(&s, self);
        }
        self.outcome.unwrap_or(Outcome::BudgetExhausted)
    }

    pub fn finish(self) -> RunResult {
        let outcome = self.outcome.unwrap_or(Outcome::BudgetExhausted);
        RunResult { graph: self.graph, ledger: self.ledger, trace: self.trace, outcome, passes: self.pass }
    }
}

/// Reduces `g` for at most `max_passes` passes.
pub fn reduce(g: MolGraph, ledger: Ledger, cfg: &StrategyConfig, max_passes: u64) -> RunResult {
    let mut r = Reducer::new(g, ledger, cfg.clone());
    r.run(max_passes);
    r.finish()
}
