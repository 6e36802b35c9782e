use std::collections::BTreeMap;
use std::fmt::Write as _;

use chemski_core::cost::{account_passes, CostReport, CostVector};
use chemski_core::mol::{cap_free_edges, serialize_mol, validate, CapError, LineSep, MolGraph};
use chemski_core::schema::{conservation_table, verify_table, PublishedCheck, SchemaForms, TableReport};
use chemski_core::ski::{decode_root, frout_roots};
use chemski_core::token::plain_names;
use chemski_core::{Outcome, Reducer, StepRecord};

use crate::input::{InputError, RunSpec, Source};

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Cap(#[from] CapError),
}

pub struct Parsed {
    pub mol: String,
    /// Notes on capped edges and polarity, for stderr.
    pub notes: Vec<String>,
}

/// Term to mol, or mol to capped, normalized mol. Minted edge names are
/// replaced by plain ones so the output parses again.
pub fn parse(src: &Source) -> Result<Parsed, CommandError> {
    match src {
        Source::Term(_) => {
            let (g, notes) = src.load()?;
            Ok(Parsed { mol: serialize_mol(&plain_names(&g), LineSep::Newline), notes })
        }
        Source::Mol(text) => {
            let g = chemski_core::parse_mol(text).map_err(InputError::from)?;
            let capped = cap_free_edges(&g)?;
            let mut notes: Vec<String> =
                capped.added.iter().map(|(ty, e)| format!("free edge `{e}` capped with {ty}")).collect();
            notes.extend(validate(&capped.graph).warnings.iter().map(ToString::to_string));
            Ok(Parsed { mol: serialize_mol(&plain_names(&capped.graph), LineSep::Newline), notes })
        }
    }
}

/// One line per FROUT root: the decoded term, or why it is not one.
pub fn decoded_roots(g: &MolGraph) -> Vec<Result<String, String>> {
    frout_roots(g).into_iter().map(|id| decode_root(g, id).map(|t| t.to_string()).map_err(|e| e.to_string())).collect()
}

/// The single decoded term, when the graph has exactly one root and it decodes.
pub fn decoded_term(g: &MolGraph) -> Option<String> {
    match decoded_roots(g).as_slice() {
        [Ok(t)] => Some(t.clone()),
        _ => None,
    }
}

pub struct Reduced {
    pub reducer: Reducer,
    pub outcome: Outcome,
    pub warnings: Vec<String>,
}

impl Reduced {
    pub fn exit_code(&self) -> u8 {
        match self.outcome {
            Outcome::NormalForm => 0,
            Outcome::BudgetExhausted => 2,
        }
    }

    pub fn report(&self) -> CostReport {
        account_passes(&self.reducer.trace, &self.reducer.costs, self.reducer.passes())
    }
}

pub fn reduce(src: &Source, spec: &RunSpec, max_passes: u64) -> Result<Reduced, CommandError> {
    let (g, warnings) = src.load()?;
    let mut reducer = spec.reducer(g)?;
    let outcome = reducer.run(max_passes);
    Ok(Reduced { reducer, outcome, warnings })
}

pub fn verify(forms: Option<&[SchemaForms]>) -> TableReport {
    match forms {
        Some(f) => verify_table(f),
        None => verify_table(conservation_table().into_iter().map(|s| &s.forms)),
    }
}

pub fn verify_text(r: &TableReport) -> String {
    let mut out = String::new();
    for s in &r.schemas {
        let status = if s.conserved() { "ok  " } else { "FAIL" };
        let witness = match &s.witness {
            Some(_) => "witness found",
            None => "no witness",
        };
        let published = match &s.published {
            PublishedCheck::Absent => String::new(),
            PublishedCheck::Agrees => ", published permutation agrees".into(),
            p => format!(", published permutation: {}", serde_json::to_string(p).unwrap_or_default()),
        };
        let _ = writeln!(out, "{status} {:<14} {witness}{published}", s.name);
        for i in &s.imbalances {
            let _ = writeln!(out, "       {:?} `{}`: lhs {} rhs {}", i.role, i.symbol, i.lhs, i.rhs);
        }
        for p in &s.problems {
            let _ = writeln!(out, "       {p}");
        }
    }
    let ok = r.schemas.iter().filter(|s| s.conserved()).count();
    let _ = writeln!(out, "{ok}/{} conserved", r.schemas.len());
    out
}

/// Per-rewrite totals of a cost report over `trace`.
pub fn cost_table(trace: &[StepRecord], costs: &CostVector, report: &CostReport) -> String {
    let mut rows: BTreeMap<&str, (u64, i64, i64)> = BTreeMap::new();
    for (s, c) in trace.iter().filter(|s| !s.blocked).zip(&report.per_step) {
        let row = rows.entry(&s.rewrite).or_default();
        row.0 += 1;
        row.1 += c.cost_in;
        row.2 += c.cost_out;
    }
    let mut out = format!("{:<8} {:>8} {:>10} {:>10} {:>10}\n", "rewrite", "steps", "in", "out", "net");
    for (name, (n, i, o)) in &rows {
        let _ = writeln!(out, "{name:<8} {n:>8} {i:>10} {o:>10} {:>10}", o - i);
    }
    let _ = writeln!(
        out,
        "{:<8} {:>8} {:>10} {:>10} {:>10}",
        "total",
        report.per_step.len(),
        report.cumulative_in,
        report.cumulative_out,
        report.cumulative_net
    );
    let _ = writeln!(out, "blocked {}", report.blocked_rewrites);
    let prices: Vec<String> = chemski_core::TokenType::ALL.iter().map(|t| format!("{t}={}", costs.get(*t))).collect();
    let _ = writeln!(out, "costs   {}", prices.join(" "));
    out
}
