use serde::{Deserialize, Serialize};

use crate::cost::CostVector;
use crate::mol::{EdgeName, MolGraph, Node, NodeId, NodeType, PortRef};
use crate::schema::{schema_by_name, RewriteSchema};
use crate::token::{AutoMint, Ledger, LedgerError, TokenBag, TokenMode, TokenType};

use super::matcher::{comb_ready, Match};

/// One entry of a reduction trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StepRecord {
    pub step: u64,
    pub pass: u64,
    pub rewrite: String,
    pub anchor: NodeId,
    pub tokens_in: TokenBag,
    pub tokens_out: TokenBag,
    pub minted: Vec<EdgeName>,
    pub cost_in: i64,
    pub cost_out: i64,
    /// Graph node count after the step.
    pub nodes: usize,
    /// Strict mode only: the rewrite matched but its input tokens were
    /// missing, so nothing changed.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub blocked: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub auto_minted: Vec<AutoMint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mol: Option<String>,
}

impl StepRecord {
    fn new(schema: &RewriteSchema, anchor: NodeId, costs: &CostVector) -> Self {
        StepRecord {
            step: 0,
            pass: 0,
            rewrite: schema.name().to_owned(),
            anchor,
            tokens_in: schema.tokens_in().clone(),
            tokens_out: schema.tokens_out().clone(),
            minted: Vec::new(),
            cost_in: costs.cost_of(schema.tokens_in()),
            cost_out: costs.cost_of(schema.tokens_out()),
            nodes: 0,
            blocked: false,
            auto_minted: Vec::new(),
            mol: None,
        }
    }

    /// A strict-mode rewrite that could not be paid for.
    pub fn blocked(schema: &RewriteSchema, anchor: NodeId, nodes: usize) -> Self {
        StepRecord {
            blocked: true,
            nodes,
            cost_in: 0,
            cost_out: 0,
            ..StepRecord::new(schema, anchor, &CostVector::default())
        }
    }

    pub fn net(&self) -> i64 {
        self.cost_out - self.cost_in
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("match for {rewrite} at node {anchor} no longer holds")]
    StaleMatch { rewrite: String, anchor: NodeId },
}

fn still_holds(g: &MolGraph, m: &Match<'_>) -> bool {
    m.schema.lhs.nodes.iter().zip(&m.nodes).all(|(pat, id)| {
        g.node(*id).is_some_and(|n| n.ty == pat.ty && pat.vars.iter().zip(&n.ports).all(|(&v, e)| m.edges[v] == *e))
    })
}

/// Replaces the matched LHS by the RHS: RHS variables shared with the LHS
/// keep their bound edge names, RHS-only variables get fresh names. Input
/// tokens are debited and output tokens credited.
pub fn apply_rewrite(
    g: &mut MolGraph,
    m: &Match<'_>,
    ledger: &mut Ledger,
    mode: TokenMode,
    costs: &CostVector,
) -> Result<StepRecord, RewriteError> {
    let schema = m.schema;
    if !still_holds(g, m) {
        return Err(RewriteError::StaleMatch { rewrite: schema.name().to_owned(), anchor: m.anchor });
    }
    let auto_minted = ledger.debit(schema.tokens_in(), mode)?;
    for id in &m.nodes {
        g.remove_node(*id);
    }
    let bound = schema.lhs.vars.len();
    let minted: Vec<EdgeName> = (bound..schema.rhs.vars.len()).map(|_| ledger.mint.fresh()).collect();
    for pat in &schema.rhs.nodes {
        let ports = pat.vars.iter().map(|&v| if v < bound { m.edges[v].clone() } else { minted[v - bound].clone() });
        g.add_node(Node::new(pat.ty, ports));
    }
    ledger.credit(schema.tokens_out());
    let mut rec = StepRecord::new(schema, m.anchor, costs);
    rec.minted = minted;
    rec.auto_minted = auto_minted;
    rec.nodes = g.len();
    Ok(rec)
}

fn comb_schema() -> &'static RewriteSchema {
    schema_by_name("COMB").expect("COMB is in the table")
}

/// Removes one Arrow node `a -> b`, renaming `a` to `b` at its other end.
/// Returns `None` if the node is not eliminable.
pub fn comb_at(g: &mut MolGraph, id: NodeId, ledger: &mut Ledger, costs: &CostVector) -> Option<StepRecord> {
    if !comb_ready(g, id) {
        return None;
    }
    // Either end may be renamed; keep a variable or user name over a bare mint.
    let [source, target] = [0, 1].map(|p| g.node(id).expect("live arrow").ports[p].clone());
    let bare = |e: &EdgeName| e.is_reserved();
    let (port, keep) = if bare(&target) && !bare(&source) && g.opposite(PortRef { node: id, port: 1 }).is_some() {
        (1, source)
    } else {
        (0, target)
    };
    let other = g.opposite(PortRef { node: id, port })?;
    g.remove_node(id);
    g.set_port(other.node, other.port, keep);
    ledger.deposit(TokenType::Arrow, 1);
    let mut rec = StepRecord::new(comb_schema(), id, costs);
    rec.nodes = g.len();
    Some(rec)
}

/// Eliminates Arrow nodes until none is left that COMB can remove. Closed
/// loops `Arrow a a` stay in place.
pub fn comb_pass(g: &mut MolGraph, ledger: &mut Ledger, costs: &CostVector) -> Vec<StepRecord> {
    let mut out = Vec::new();
    loop {
        let arrows: Vec<NodeId> = g.nodes().filter(|(_, n)| n.ty == NodeType::Arrow).map(|(id, _)| id).collect();
        let before = out.len();
        for id in arrows {
            out.extend(comb_at(g, id, ledger, costs));
        }
        if out.len() == before {
            return out;
        }
    }
}

/// Arrow nodes whose two ports share an edge.
pub fn arrow_loops(g: &MolGraph) -> Vec<NodeId> {
    g.nodes().filter(|(_, n)| n.ty == NodeType::Arrow && n.ports[0] == n.ports[1]).map(|(id, _)| id).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::matcher::find_transform;
    use crate::mol::{isomorphic, parse_mol, validate};
    use crate::schema::reduction_table;
    use crate::token::FreshNameSource;

    fn first_match(g: &MolGraph) -> Match<'static> {
        g.node_ids().find_map(|id| find_transform(g, id, reduction_table())).unwrap()
    }

    #[test]
    fn ka_with_tokens() {
        let mut g = parse_mol("K 1, A 1 a 2, A 2 b c").unwrap();
        let mut l = Ledger::new(FreshNameSource::new());
        l.deposit(TokenType::Arrow, 2);
        let m = first_match(&g);
        let rec = apply_rewrite(&mut g, &m, &mut l, TokenMode::Strict, &CostVector::default()).unwrap();
        assert!(isomorphic(&g, &parse_mol("K e, Arrow a c, Arrow b e").unwrap()));
        assert_eq!(rec.minted.len(), 1);
        assert_eq!(l.count(TokenType::Arrow), 0);
        assert_eq!(l.count(TokenType::AA), 1);
        assert_eq!((rec.cost_in, rec.cost_out), (0, 3));
    }

    #[test]
    fn sa_is_token_neutral() {
        let mut g = parse_mol("S 1 1 2, A 2 a 3, A 3 b 4, A 4 c d").unwrap();
        let mut l = Ledger::default();
        let m = first_match(&g);
        apply_rewrite(&mut g, &m, &mut l, TokenMode::Strict, &CostVector::default()).unwrap();
        assert!(isomorphic(&g, &parse_mol("S c 1 2, A a 1 3, A b 2 4, A 3 4 d").unwrap()));
        assert!(l.tokens().is_empty());
    }

    #[test]
    fn strict_mode_without_tokens() {
        let mut g = parse_mol("K 1, A 1 a 2, A 2 b c").unwrap();
        let before = g.clone();
        let mut l = Ledger::default();
        let m = first_match(&g);
        let err = apply_rewrite(&mut g, &m, &mut l, TokenMode::Strict, &CostVector::default()).unwrap_err();
        assert!(matches!(err, RewriteError::Ledger(LedgerError::InsufficientTokens { .. })));
        assert_eq!(g, before);
    }

    #[test]
    fn open_mode_mints_the_deficit() {
        let mut g = parse_mol("I 1, A 1 a b").unwrap();
        let mut l = Ledger::default();
        let m = first_match(&g);
        let rec = apply_rewrite(&mut g, &m, &mut l, TokenMode::Open, &CostVector::default()).unwrap();
        assert_eq!(rec.auto_minted, vec![AutoMint { token: TokenType::Arrow, count: 1 }]);
        assert_eq!(l.count(TokenType::IA), 1);
        assert_eq!(l.count(TokenType::Arrow), 0);
    }

    #[test]
    fn stale_match() {
        let mut g = parse_mol("I 1, A 1 a b").unwrap();
        let m = first_match(&g);
        let a = m.nodes[1];
        g.set_port(a, 1, "z".into());
        let err = apply_rewrite(&mut g, &m, &mut Ledger::default(), TokenMode::Open, &CostVector::default());
        assert!(matches!(err, Err(RewriteError::StaleMatch { .. })));
    }

    #[test]
    fn comb_single() {
        let mut g = parse_mol("I x, Arrow x y, FROUT y").unwrap();
        let mut l = Ledger::default();
        let recs = comb_pass(&mut g, &mut l, &CostVector::default());
        assert_eq!(recs.len(), 1);
        assert_eq!(g, parse_mol("I y, FROUT y").unwrap());
        assert_eq!(l.count(TokenType::Arrow), 1);
    }

    #[test]
    fn comb_chain_and_loops() {
        let mut g = parse_mol("Arrow a b, Arrow b c, FRIN a, FROUT c").unwrap();
        let mut l = Ledger::default();
        assert_eq!(comb_pass(&mut g, &mut l, &CostVector::default()).len(), 2);
        assert!(isomorphic(&g, &parse_mol("FRIN z, FROUT z").unwrap()));
        assert_eq!(l.count(TokenType::Arrow), 2);

        let mut g = parse_mol("Arrow a b, Arrow b a").unwrap();
        assert_eq!(comb_pass(&mut g, &mut l, &CostVector::default()).len(), 1);
        assert_eq!(arrow_loops(&g).len(), 1);
        assert!(validate(&g).is_valid());

        let mut g = parse_mol("K a, FROUT a").unwrap();
        assert!(comb_pass(&mut g, &mut l, &CostVector::default()).is_empty());
    }
}
