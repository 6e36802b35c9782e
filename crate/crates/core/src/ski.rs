//! SKI terms: parsing, translation to molecules, and decoding back.

use std::collections::HashSet;
use std::fmt;

use crate::mol::{EdgeName, MolGraph, Node, NodeId, NodeType, PortRef};
use crate::token::{untagged, FreshNameSource};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SkiTerm {
    S,
    K,
    I,
    Var(String),
    App(Box<SkiTerm>, Box<SkiTerm>),
}

impl SkiTerm {
    pub fn app(f: SkiTerm, a: SkiTerm) -> SkiTerm {
        SkiTerm::App(Box::new(f), Box::new(a))
    }

    /// Number of atoms plus applications.
    pub fn size(&self) -> usize {
        match self {
            SkiTerm::App(f, a) => 1 + f.size() + a.size(),
            _ => 1,
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            SkiTerm::App(f, a) => f.leaves() + a.leaves(),
            _ => 1,
        }
    }

    pub fn vars(&self) -> usize {
        match self {
            SkiTerm::App(f, a) => f.vars() + a.vars(),
            SkiTerm::Var(_) => 1,
            _ => 0,
        }
    }
}

/// Left-associated chains print without parentheses: `S K K I`, `S (K I)`.
impl fmt::Display for SkiTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkiTerm::S => f.write_str("S"),
            SkiTerm::K => f.write_str("K"),
            SkiTerm::I => f.write_str("I"),
            SkiTerm::Var(v) => f.write_str(v),
            SkiTerm::App(l, r) => {
                write!(f, "{l} ")?;
                if matches!(**r, SkiTerm::App(..)) {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}

impl std::str::FromStr for SkiTerm {
    type Err = TermError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_term(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TermError {
    #[error("empty term")]
    Empty,
    #[error("unbalanced parenthesis at column {column}")]
    Unbalanced { column: usize },
    #[error("empty parentheses at column {column}")]
    EmptyGroup { column: usize },
    #[error("unexpected character `{found}` at column {column}")]
    Unexpected { column: usize, found: char },
    #[error("lambda terms are out of scope (column {column}); only S, K, I and variables are accepted")]
    Lambda { column: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermWarning {
    pub column: usize,
    pub message: String,
}

impl fmt::Display for TermWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

pub fn parse_term(text: &str) -> Result<SkiTerm, TermError> {
    parse_term_with_warnings(text).map(|(t, _)| t)
}

/// Parses a term, also reporting identifiers like `SII` that look like
/// applications written without spaces.
pub fn parse_term_with_warnings(text: &str) -> Result<(SkiTerm, Vec<TermWarning>), TermError> {
    let mut p = TermParser { chars: text.chars().collect(), pos: 0, warnings: Vec::new() };
    let t = p.sequence(0)?;
    match t {
        Some(t) => Ok((t, p.warnings)),
        None => Err(TermError::Empty),
    }
}

struct TermParser {
    chars: Vec<char>,
    pos: usize,
    warnings: Vec<TermWarning>,
}

impl TermParser {
    /// Juxtaposed atoms and groups up to a `)` (depth > 0) or the end.
    fn sequence(&mut self, depth: usize) -> Result<Option<SkiTerm>, TermError> {
        let mut acc: Option<SkiTerm> = None;
        loop {
            while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
                self.pos += 1;
            }
            let column = self.pos + 1;
            let Some(&c) = self.chars.get(self.pos) else {
                if depth > 0 {
                    return Err(TermError::Unbalanced { column });
                }
                return Ok(acc);
            };
            let item = match c {
                '(' => {
                    self.pos += 1;
                    match self.sequence(depth + 1)? {
                        Some(t) => t,
                        None => return Err(TermError::EmptyGroup { column }),
                    }
                }
                ')' => {
                    if depth == 0 {
                        return Err(TermError::Unbalanced { column });
                    }
                    self.pos += 1;
                    return Ok(acc);
                }
                '\\' | 'λ' | '.' => return Err(TermError::Lambda { column }),
                c if c.is_ascii_alphanumeric() => self.atom(),
                found => return Err(TermError::Unexpected { column, found }),
            };
            acc = Some(match acc {
                None => item,
                Some(f) => SkiTerm::app(f, item),
            });
        }
    }

    fn atom(&mut self) -> SkiTerm {
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        let word: String = self.chars[start..self.pos].iter().collect();
        match word.as_str() {
            "S" => SkiTerm::S,
            "K" => SkiTerm::K,
            "I" => SkiTerm::I,
            _ => {
                if word.chars().all(|c| matches!(c, 'S' | 'K' | 'I')) {
                    self.warnings.push(TermWarning {
                        column: start + 1,
                        message: format!("`{word}` is read as a variable; separate combinators with spaces"),
                    });
                }
                SkiTerm::Var(word)
            }
        }
    }
}

/// The syntax tree as a molecule: S becomes `S x x r`, K and I leaves,
/// variables FRIN leaves, applications A nodes; the root is capped by FROUT.
/// Variable edges are named after the variable.
pub fn term_to_mol(t: &SkiTerm, mint: &mut FreshNameSource) -> MolGraph {
    let mut g = MolGraph::new();
    let root = edge_for(t, mint);
    g.add_node(Node::new(NodeType::Frout, [root.clone()]));
    build(&mut g, t, root, mint);
    g
}

fn edge_for(t: &SkiTerm, mint: &mut FreshNameSource) -> EdgeName {
    match t {
        SkiTerm::Var(v) => mint.tagged(v),
        _ => mint.fresh(),
    }
}

fn build(g: &mut MolGraph, t: &SkiTerm, out: EdgeName, mint: &mut FreshNameSource) {
    match t {
        SkiTerm::S => {
            let x = mint.fresh();
            g.add_node(Node::new(NodeType::S, [x.clone(), x, out]));
        }
        SkiTerm::K => {
            g.add_node(Node::new(NodeType::K, [out]));
        }
        SkiTerm::I => {
            g.add_node(Node::new(NodeType::I, [out]));
        }
        SkiTerm::Var(_) => {
            g.add_node(Node::new(NodeType::Frin, [out]));
        }
        SkiTerm::App(f, a) => {
            let ef = edge_for(f, mint);
            let ea = edge_for(a, mint);
            build(g, f, ef.clone(), mint);
            g.add_node(Node::new(NodeType::A, [ef, ea.clone(), out]));
            build(g, a, ea, mint);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NotATermReason {
    FanoutNode,
    ArrowNode,
    Cycle,
    Dangling,
}

impl fmt::Display for NotATermReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NotATermReason::FanoutNode => "fanout-node",
            NotATermReason::ArrowNode => "arrow-node",
            NotATermReason::Cycle => "cycle",
            NotATermReason::Dangling => "dangling",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("not a term: {reason}{}", node.map(|n| format!(" at node {n}")).unwrap_or_default())]
    NotATerm { reason: NotATermReason, node: Option<NodeId> },
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("node {0} is not a FROUT node")]
    NotAFrout(NodeId),
}

impl DecodeError {
    pub fn reason(&self) -> Option<NotATermReason> {
        match self {
            DecodeError::NotATerm { reason, .. } => Some(*reason),
            _ => None,
        }
    }
}

fn not_a_term(reason: NotATermReason, node: Option<NodeId>) -> DecodeError {
    DecodeError::NotATerm { reason, node }
}

/// Decodes the term produced on `root`. The producer is the endpoint that
/// is not an in port (K and I count as producers).
pub fn decode(g: &MolGraph, root: &EdgeName) -> Result<SkiTerm, DecodeError> {
    let slots = g.slots(root);
    if slots.is_empty() {
        return Err(DecodeError::UnknownEdge(root.to_string()));
    }
    let producer = slots.iter().find(|s| {
        let ty = g.node(s.node).expect("indexed node").ty;
        ty.polarity(s.port) != crate::mol::Polarity::In
    });
    match producer {
        Some(p) => Decoder { g, path: HashSet::new() }.term(*p),
        None => Err(not_a_term(NotATermReason::Dangling, None)),
    }
}

/// Decodes the term feeding the FROUT node `frout`.
pub fn decode_root(g: &MolGraph, frout: NodeId) -> Result<SkiTerm, DecodeError> {
    match g.node(frout) {
        Some(n) if n.ty == NodeType::Frout => {}
        _ => return Err(DecodeError::NotAFrout(frout)),
    }
    let p = g.opposite(PortRef { node: frout, port: 0 }).ok_or(not_a_term(NotATermReason::Dangling, Some(frout)))?;
    Decoder { g, path: HashSet::new() }.term(p)
}

/// FROUT nodes in graph order.
pub fn frout_roots(g: &MolGraph) -> Vec<NodeId> {
    g.nodes().filter(|(_, n)| n.ty == NodeType::Frout).map(|(id, _)| id).collect()
}

struct Decoder<'g> {
    g: &'g MolGraph,
    path: HashSet<NodeId>,
}

impl Decoder<'_> {
    fn input(&mut self, node: NodeId, port: usize) -> Result<SkiTerm, DecodeError> {
        let p = self.g.opposite(PortRef { node, port }).ok_or(not_a_term(NotATermReason::Dangling, Some(node)))?;
        self.term(p)
    }

    fn term(&mut self, at: PortRef) -> Result<SkiTerm, DecodeError> {
        let id = at.node;
        let n = self.g.node(id).expect("slot of a live node");
        let bad = |r| Err(not_a_term(r, Some(id)));
        match (n.ty, at.port) {
            (NodeType::K, _) => Ok(SkiTerm::K),
            (NodeType::I, _) => Ok(SkiTerm::I),
            (NodeType::Frin, _) => Ok(SkiTerm::Var(untagged(n.ports[0].as_str()).to_owned())),
            (NodeType::S, 2) if n.ports[0] == n.ports[1] => Ok(SkiTerm::S),
            (NodeType::S, _) if n.ports[0] != n.ports[1] => bad(NotATermReason::FanoutNode),
            (NodeType::Arrow, _) => bad(NotATermReason::ArrowNode),
            (NodeType::A, 2) => {
                if !self.path.insert(id) {
                    return bad(NotATermReason::Cycle);
                }
                let f = self.input(id, 0)?;
                let a = self.input(id, 1)?;
                self.path.remove(&id);
                Ok(SkiTerm::app(f, a))
            }
            _ => bad(NotATermReason::Dangling),
        }
    }
}
