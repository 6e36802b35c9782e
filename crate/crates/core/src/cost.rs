//! Token costs and run accounting.
//!
//! Each rewrite has an in cost (its consumed tokens) and an out cost (its
//! produced tokens); the net cost of a rewrite is out minus in, and the cost
//! of a reduction is the sum over the rewrites performed.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::StepRecord;
use crate::mol::MolGraph;
use crate::schema::RewriteSchema;
use crate::token::{TokenBag, TokenType};

/// Integer cost per token type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostVector(BTreeMap<TokenType, i64>);

impl Default for CostVector {
    fn default() -> Self {
        default_costs()
    }
}

/// Cost of a token = number of unique names it carries, except Arrow,
/// whose nodes are short-lived and cost nothing.
pub fn default_costs() -> CostVector {
    let mut m = BTreeMap::new();
    for t in TokenType::ALL {
        let c = if t == TokenType::Arrow { 0 } else { t.names_carried() as i64 };
        m.insert(t, c);
    }
    CostVector(m)
}

impl CostVector {
    pub fn get(&self, t: TokenType) -> i64 {
        self.0.get(&t).copied().unwrap_or(0)
    }

    pub fn set(&mut self, t: TokenType, c: i64) {
        self.0.insert(t, c);
    }

    /// Defaults overridden by whatever `overrides` specifies.
    pub fn with_overrides(overrides: &BTreeMap<TokenType, i64>) -> Self {
        let mut c = default_costs();
        for (t, v) in overrides {
            c.set(*t, *v);
        }
        c
    }

    pub fn scaled(&self, k: i64) -> Self {
        CostVector(self.0.iter().map(|(t, c)| (*t, c * k)).collect())
    }

    pub fn cost_of(&self, bag: &TokenBag) -> i64 {
        bag.iter().map(|(t, n)| self.get(t) * n as i64).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RewriteCost {
    pub cost_in: i64,
    pub cost_out: i64,
    pub net: i64,
}

pub fn rewrite_cost(s: &RewriteSchema, c: &CostVector) -> RewriteCost {
    let cost_in = c.cost_of(s.tokens_in());
    let cost_out = c.cost_of(s.tokens_out());
    RewriteCost { cost_in, cost_out, net: cost_out - cost_in }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CostReport {
    pub per_step: Vec<RewriteCost>,
    pub cumulative_in: i64,
    pub cumulative_out: i64,
    pub cumulative_net: i64,
    pub blocked_rewrites: u64,
    /// Cumulative net cost after each pass.
    pub net_by_pass: Vec<i64>,
}

/// Recomputes every step's cost from its token multisets.
pub fn account(trace: &[StepRecord], c: &CostVector) -> CostReport {
    let passes = trace.iter().map(|r| r.pass + 1).max().unwrap_or(0);
    account_passes(trace, c, passes)
}

/// Like [`account`], with `net_by_pass` covering exactly `passes` passes.
pub fn account_passes(trace: &[StepRecord], c: &CostVector, passes: u64) -> CostReport {
    let mut report = CostReport::default();
    let mut by_pass = vec![0i64; passes as usize];
    for r in trace {
        if r.blocked {
            report.blocked_rewrites += 1;
            continue;
        }
        let cost_in = c.cost_of(&r.tokens_in);
        let cost_out = c.cost_of(&r.tokens_out);
        let net = cost_out - cost_in;
        report.per_step.push(RewriteCost { cost_in, cost_out, net });
        report.cumulative_in += cost_in;
        report.cumulative_out += cost_out;
        if let Some(slot) = by_pass.get_mut(r.pass as usize) {
            *slot += net;
        }
    }
    report.cumulative_net = report.cumulative_out - report.cumulative_in;
    let mut acc = 0;
    report.net_by_pass = by_pass
        .into_iter()
        .map(|n| {
            acc += n;
            acc
        })
        .collect();
    report
}

/// A cost assigned to whole graphs.
pub trait GraphCost {
    fn cost(&self, g: &MolGraph) -> i64;
}

impl<F: Fn(&MolGraph) -> i64> GraphCost for F {
    fn cost(&self, g: &MolGraph) -> i64 {
        self(g)
    }
}

pub struct ZeroCost;

impl GraphCost for ZeroCost {
    fn cost(&self, _: &MolGraph) -> i64 {
        0
    }
}

/// `per_node` times the node count.
pub struct NodeCountCost(pub i64);

impl GraphCost for NodeCountCost {
    fn cost(&self, g: &MolGraph) -> i64 {
        self.0 * g.len() as i64
    }
}

/// φ(initial) + InCost(all) − φ(final) − OutCost(all). Zero means φ balances
/// the run's accounting.
pub fn balance_audit(
    initial: &MolGraph,
    last: &MolGraph,
    trace: &[StepRecord],
    c: &CostVector,
    phi: &dyn GraphCost,
) -> i64 {
    let r = account(trace, c);
    phi.cost(initial) + r.cumulative_in - phi.cost(last) - r.cumulative_out
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:>10}", "rewrites", self.per_step.len())?;
        writeln!(f, "{:<12} {:>10}", "blocked", self.blocked_rewrites)?;
        writeln!(f, "{:<12} {:>10}", "in cost", self.cumulative_in)?;
        writeln!(f, "{:<12} {:>10}", "out cost", self.cumulative_out)?;
        write!(f, "{:<12} {:>10}", "net", self.cumulative_net)
    }
}
