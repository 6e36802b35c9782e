use std::collections::BTreeMap;

use chemski_core::cost::CostVector;
use chemski_core::mol::{validate, EdgeCount, MolGraph, ParseError};
use chemski_core::ski::{parse_term_with_warnings, term_to_mol, TermError};
use chemski_core::token::{FreshNameSource, Ledger, TokenMode, TokenType};
use chemski_core::{parse_mol, Reducer, StrategyConfig};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Mol(#[from] ParseError),
    #[error("mol is not closed: {}", list_edges(.0))]
    Unbalanced(Vec<EdgeCount>),
    #[error("give exactly one of a term or a mol")]
    Ambiguous,
    #[error("a funded ledger needs strict token mode")]
    FundedOpen,
    #[error(transparent)]
    Weight(#[from] chemski_core::engine::BadWeight),
}

fn list_edges(errs: &[EdgeCount]) -> String {
    errs.iter().map(|e| format!("edge `{}` occurs {} times", e.edge, e.count)).collect::<Vec<_>>().join(", ")
}

#[derive(Clone, Debug)]
pub enum Source {
    Term(String),
    Mol(String),
}

impl Source {
    pub fn pick(term: Option<String>, mol: Option<String>) -> Result<Source, InputError> {
        match (term, mol) {
            (Some(t), None) => Ok(Source::Term(t)),
            (None, Some(m)) => Ok(Source::Mol(m)),
            _ => Err(InputError::Ambiguous),
        }
    }

    /// The graph to reduce. Terms are translated; mols must already be closed.
    pub fn load(&self) -> Result<(MolGraph, Vec<String>), InputError> {
        match self {
            Source::Term(text) => {
                let (t, warnings) = parse_term_with_warnings(text)?;
                let g = term_to_mol(&t, &mut FreshNameSource::new());
                Ok((g, warnings.iter().map(ToString::to_string).collect()))
            }
            Source::Mol(text) => {
                let g = parse_mol(text)?;
                let report = validate(&g);
                if !report.is_valid() {
                    return Err(InputError::Unbalanced(report.errors));
                }
                Ok((g, report.warnings.iter().map(ToString::to_string).collect()))
            }
        }
    }
}

/// Cost overrides as a JSON object, e.g. `{"S-A": 5}`. Missing types keep
/// their default cost.
pub fn parse_costs(json: &str) -> Result<CostVector, serde_json::Error> {
    let overrides: BTreeMap<TokenType, i64> = serde_json::from_str(json)?;
    Ok(CostVector::with_overrides(&overrides))
}

/// Everything needed to start a reduction.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct RunSpec {
    pub seed: Option<u64>,
    pub weight: Option<f64>,
    pub token_mode: Option<TokenMode>,
    /// Tokens of each type in a strict ledger at the start.
    pub fund: Option<u64>,
    pub costs: Option<BTreeMap<TokenType, i64>>,
    pub max_steps_per_pass: Option<usize>,
    pub snapshot_every: Option<u64>,
}

impl RunSpec {
    pub fn config(&self) -> Result<StrategyConfig, InputError> {
        let d = StrategyConfig::default();
        let cfg = StrategyConfig {
            weight: self.weight.unwrap_or(d.weight),
            seed: self.seed.unwrap_or(d.seed),
            token_mode: self.token_mode.unwrap_or(d.token_mode),
            max_steps_per_pass: self.max_steps_per_pass,
            snapshot_every: self.snapshot_every,
        };
        cfg.check()?;
        if self.fund.is_some() && cfg.token_mode == TokenMode::Open {
            return Err(InputError::FundedOpen);
        }
        Ok(cfg)
    }

    pub fn reducer(&self, g: MolGraph) -> Result<Reducer, InputError> {
        let cfg = self.config()?;
        let ledger = match self.fund {
            Some(n) => Ledger::funded(FreshNameSource::new(), n),
            None => Ledger::default(),
        };
        let costs = self.costs.as_ref().map(CostVector::with_overrides).unwrap_or_default();
        Ok(Reducer::new(g, ledger, cfg).with_costs(costs))
    }
}
