//! Synthesis rewrites: combine two rooted terms with the help of a token.

use crate::engine::StepRecord;
use crate::mol::{EdgeName, MolGraph, Node, NodeId, NodeType, PortRef};
use crate::schema::schema_by_name;
use crate::token::{Ledger, LedgerError, TokenBag, TokenMode, TokenType};
use crate::waste::components;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("both roots are node {0}")]
    SameRoot(NodeId),
    #[error("node {0} is not a FROUT node")]
    NotAFrout(NodeId),
    #[error("roots {0} and {1} are in the same component")]
    SharedSubgraph(NodeId, NodeId),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

/// The two FROUT roots after synthesis, and the step performed.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub roots: [NodeId; 2],
    pub record: StepRecord,
}

fn root_edge(g: &MolGraph, id: NodeId) -> Result<EdgeName, SynthError> {
    match g.node(id) {
        Some(n) if n.ty == NodeType::Frout => Ok(n.ports[0].clone()),
        _ => Err(SynthError::NotAFrout(id)),
    }
}

fn check_roots(g: &MolGraph, a: NodeId, b: NodeId) -> Result<(EdgeName, EdgeName), SynthError> {
    if a == b {
        return Err(SynthError::SameRoot(a));
    }
    let ea = root_edge(g, a)?;
    let eb = root_edge(g, b)?;
    if components(g).iter().any(|c| c.contains(&a) && c.contains(&b)) {
        return Err(SynthError::SharedSubgraph(a, b));
    }
    Ok((ea, eb))
}

/// Shared shape of both synthesis rewrites: remove the FROUTs on `a` and
/// `b`, add two new FROUTs on the first two fresh edges, then the rest of
/// the RHS from `build(a, b, fresh)`.
fn synthesize(
    g: &mut MolGraph,
    roots: (NodeId, NodeId),
    ledger: &mut Ledger,
    mode: TokenMode,
    rewrite: &str,
    token: TokenType,
    build: impl FnOnce(&mut MolGraph, EdgeName, EdgeName, &[EdgeName]),
) -> Result<Synthesis, SynthError> {
    let (fa, fb) = roots;
    let (a, b) = check_roots(g, fa, fb)?;
    let auto = ledger.debit(&TokenBag::of(&[(token, 1)]), mode)?;
    ledger.mint.skip_past(g);
    g.remove_node(fa);
    g.remove_node(fb);
    let schema = schema_by_name(rewrite).expect("synthesis schema");
    let minted: Vec<EdgeName> = (schema.lhs.vars.len()..schema.rhs.vars.len()).map(|_| ledger.mint.fresh()).collect();
    let r1 = g.add_node(Node::new(NodeType::Frout, [minted[0].clone()]));
    let r2 = g.add_node(Node::new(NodeType::Frout, [minted[1].clone()]));
    build(g, a, b, &minted);
    let record = StepRecord {
        step: 0,
        pass: 0,
        rewrite: rewrite.to_owned(),
        anchor: fa,
        tokens_in: schema.tokens_in().clone(),
        tokens_out: schema.tokens_out().clone(),
        minted,
        cost_in: 0,
        cost_out: 0,
        nodes: g.len(),
        blocked: false,
        auto_minted: auto,
        mol: None,
    };
    Ok(Synthesis { roots: [r1, r2], record })
}

/// `FROUT a, FROUT b` + S-K → `FROUT e, FROUT c, S a e c, K b`: the term on
/// `a` is shared between both new roots and the one on `b` is erased.
pub fn synth_duplicate_erase(
    g: &mut MolGraph,
    fa: NodeId,
    fb: NodeId,
    ledger: &mut Ledger,
    mode: TokenMode,
) -> Result<Synthesis, SynthError> {
    synthesize(g, (fa, fb), ledger, mode, "synth-S-K", TokenType::SK, |g, a, b, f| {
        g.add_node(Node::new(NodeType::S, [a, f[0].clone(), f[1].clone()]));
        g.add_node(Node::new(NodeType::K, [b]));
    })
}

/// `FROUT a, FROUT b` + S-A → `FROUT e, FROUT c, S a e d, A d b c`: one
/// root keeps the term on `a`, the other gets it applied to the term on `b`.
pub fn synth_apply(
    g: &mut MolGraph,
    fa: NodeId,
    fb: NodeId,
    ledger: &mut Ledger,
    mode: TokenMode,
) -> Result<Synthesis, SynthError> {
    synthesize(g, (fa, fb), ledger, mode, "synth-S-A", TokenType::SA, |g, a, b, f| {
        g.add_node(Node::new(NodeType::S, [a, f[0].clone(), f[2].clone()]));
        g.add_node(Node::new(NodeType::A, [f[2].clone(), b, f[1].clone()]));
    })
}

/// The edge feeding a FROUT root.
pub fn root_input(g: &MolGraph, frout: NodeId) -> Option<PortRef> {
    g.opposite(PortRef { node: frout, port: 0 })
}
