//! A conservative graph-rewrite engine for SKI combinators.
//!
//! Terms are translated to port graphs ("molecules", see [`mol`]) and
//! reduced by local rewrites ([`engine`]) that consume and produce tokens
//! held in a [`token::Ledger`], so that nodes and edge names are conserved.
//! [`cost`] accounts for the tokens moved by a run.

pub mod batch;
pub mod cost;
pub mod engine;
pub mod mol;
pub mod schema;
pub mod ski;
pub mod synth;
pub mod token;
pub mod waste;

pub use engine::{reduce, Outcome, Reducer, RunResult, StepRecord, StrategyConfig};
pub use mol::{parse_mol, serialize_mol, MolGraph};
pub use ski::{decode, decode_root, parse_term, term_to_mol, SkiTerm};
pub use token::{Ledger, TokenMode, TokenType};
