//! Molecules: typed nodes whose numbered ports carry edge names.
//!
//! A [`MolGraph`] is the universe every rewrite acts on. Nodes keep their
//! insertion order (which is also the order of lines in a mol file) and an
//! edge index maps every edge name to the port slots it occupies, so the
//! matcher can walk from a node to its neighbours in constant time.

mod iso;
mod text;
mod validate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

pub use iso::isomorphic;
pub use text::{parse_mol, parse_mol_with, serialize_mol, LineSep, ParseError, ParseOptions};
pub use validate::{cap_free_edges, validate, CapError, Capped, EdgeCount, PolarityWarning, ValidationReport};

/// Leading character reserved for engine-minted edge names.
pub const RESERVED_PREFIX: char = '_';

/// Direction tag of a node port.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    In,
    Out,
    /// Ports of the 1-valent combinators K and I, which act both as leaves
    /// feeding an application and as caps fed by other nodes.
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeType {
    S,
    K,
    I,
    A,
    Arrow,
    #[serde(rename = "FRIN")]
    Frin,
    #[serde(rename = "FROUT")]
    Frout,
}

impl NodeType {
    pub const ALL: [NodeType; 7] =
        [NodeType::S, NodeType::K, NodeType::I, NodeType::A, NodeType::Arrow, NodeType::Frin, NodeType::Frout];

    pub fn arity(self) -> usize {
        match self {
            NodeType::S | NodeType::A => 3,
            NodeType::Arrow => 2,
            NodeType::K | NodeType::I | NodeType::Frin | NodeType::Frout => 1,
        }
    }

    pub fn polarity(self, port: usize) -> Polarity {
        use Polarity::*;
        let table: &[Polarity] = match self {
            NodeType::S => &[In, Out, Out],
            NodeType::A => &[In, In, Out],
            NodeType::Arrow => &[In, Out],
            NodeType::Frin => &[Out],
            NodeType::Frout => &[In],
            NodeType::K | NodeType::I => &[Free],
        };
        table[port]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeType::S => "S",
            NodeType::K => "K",
            NodeType::I => "I",
            NodeType::A => "A",
            NodeType::Arrow => "Arrow",
            NodeType::Frin => "FRIN",
            NodeType::Frout => "FROUT",
        }
    }

    pub fn from_name(name: &str) -> Option<NodeType> {
        NodeType::ALL.into_iter().find(|t| t.as_str() == name)
    }
}

impl fmt::Display for NodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Name of an edge. Cheap to clone; compared by exact string equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeName(Arc<str>);

impl EdgeName {
    pub fn new(name: impl Into<Arc<str>>) -> Self {
        EdgeName(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_reserved(&self) -> bool {
        self.0.starts_with(RESERVED_PREFIX)
    }
}

impl fmt::Debug for EdgeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for EdgeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EdgeName {
    fn from(s: &str) -> Self {
        EdgeName::new(s)
    }
}

impl From<String> for EdgeName {
    fn from(s: String) -> Self {
        EdgeName::new(s)
    }
}

/// Engine-assigned node identifier. Never serialized into mol text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PortRef {
    pub node: NodeId,
    pub port: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub ty: NodeType,
    pub ports: SmallVec<[EdgeName; 3]>,
}

impl Node {
    pub fn new(ty: NodeType, ports: impl IntoIterator<Item = EdgeName>) -> Self {
        let ports: SmallVec<[EdgeName; 3]> = ports.into_iter().collect();
        assert_eq!(ports.len(), ty.arity(), "{ty} takes {} ports", ty.arity());
        Node { ty, ports }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.ty.as_str())?;
        for e in &self.ports {
            write!(f, " {e}")?;
        }
        Ok(())
    }
}

type Slots = SmallVec<[PortRef; 2]>;

#[derive(Clone, Debug, Default)]
pub struct MolGraph {
    nodes: BTreeMap<NodeId, Node>,
    edges: HashMap<EdgeName, Slots>,
    next_id: u64,
}

impl MolGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn add_node(&mut self, node: Node) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        for (port, e) in node.ports.iter().enumerate() {
            self.edges.entry(e.clone()).or_default().push(PortRef { node: id, port });
        }
        self.nodes.insert(id, node);
        id
    }

    pub fn add(&mut self, ty: NodeType, ports: &[&str]) -> NodeId {
        self.add_node(Node::new(ty, ports.iter().map(|p| EdgeName::from(*p))))
    }

    pub fn remove_node(&mut self, id: NodeId) -> Option<Node> {
        let node = self.nodes.remove(&id)?;
        for (port, e) in node.ports.iter().enumerate() {
            self.unlink(e, PortRef { node: id, port });
        }
        Some(node)
    }

    fn unlink(&mut self, e: &EdgeName, slot: PortRef) {
        if let Some(slots) = self.edges.get_mut(e) {
            slots.retain(|s| *s != slot);
            if slots.is_empty() {
                self.edges.remove(e);
            }
        }
    }

    /// Reconnects one port to a different edge.
    pub fn set_port(&mut self, id: NodeId, port: usize, edge: EdgeName) {
        let old = {
            let node = self.nodes.get_mut(&id).expect("set_port on missing node");
            std::mem::replace(&mut node.ports[port], edge.clone())
        };
        let slot = PortRef { node: id, port };
        self.unlink(&old, slot);
        self.edges.entry(edge).or_default().push(slot);
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    /// Nodes in insertion order.
    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> + '_ {
        self.nodes.iter().map(|(id, n)| (*id, n))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    /// Port slots currently carrying `edge`.
    pub fn slots(&self, edge: &EdgeName) -> &[PortRef] {
        self.edges.get(edge).map(|s| s.as_slice()).unwrap_or(&[])
    }

    /// The slot at the other end of the edge attached to `at`, if the edge
    /// has exactly one other endpoint.
    pub fn opposite(&self, at: PortRef) -> Option<PortRef> {
        let edge = &self.nodes.get(&at.node)?.ports[at.port];
        let mut others = self.slots(edge).iter().filter(|s| **s != at);
        let first = *others.next()?;
        others.next().is_none().then_some(first)
    }

    pub fn edge_names(&self) -> impl Iterator<Item = &EdgeName> + '_ {
        self.edges.keys()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn count_of(&self, ty: NodeType) -> usize {
        self.nodes.values().filter(|n| n.ty == ty).count()
    }

    /// Appends every node of `other`, keeping its order.
    pub fn extend_from(&mut self, other: &MolGraph) -> Vec<NodeId> {
        other.nodes.values().map(|n| self.add_node(n.clone())).collect()
    }

    /// Whether the S node at `id` has ports 1 and 2 on the same edge, i.e.
    /// represents the S combinator rather than a fan-out.
    pub fn s_is_combinator(&self, id: NodeId) -> Result<bool, NotAnS> {
        match self.nodes.get(&id) {
            Some(n) if n.ty == NodeType::S => Ok(n.ports[0] == n.ports[1]),
            Some(n) => Err(NotAnS { id, found: Some(n.ty) }),
            None => Err(NotAnS { id, found: None }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("node {id} is not an S node (found {found:?})")]
pub struct NotAnS {
    pub id: NodeId,
    pub found: Option<NodeType>,
}

/// Node-for-node equality: same order, same types, same edge names.
/// Node ids are ignored.
impl PartialEq for MolGraph {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.nodes.values().eq(other.nodes.values())
    }
}

impl Eq for MolGraph {}

impl fmt::Display for MolGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_mol(self, LineSep::Newline))
    }
}

impl std::str::FromStr for MolGraph {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_mol(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arities_and_polarities() {
        assert_eq!(NodeType::S.arity(), 3);
        assert_eq!(NodeType::A.arity(), 3);
        assert_eq!(NodeType::Arrow.arity(), 2);
        for t in [NodeType::K, NodeType::I, NodeType::Frin, NodeType::Frout] {
            assert_eq!(t.arity(), 1);
        }
        assert_eq!(NodeType::S.polarity(1), Polarity::Out);
        assert_eq!(NodeType::A.polarity(1), Polarity::In);
        assert_eq!(NodeType::K.polarity(0), Polarity::Free);
    }

    #[test]
    fn edge_index_follows_mutations() {
        let mut g = MolGraph::new();
        let i = g.add(NodeType::I, &["x"]);
        let a = g.add(NodeType::Arrow, &["x", "y"]);
        g.add(NodeType::Frout, &["y"]);
        assert_eq!(g.slots(&"x".into()).len(), 2);
        assert_eq!(g.opposite(PortRef { node: i, port: 0 }), Some(PortRef { node: a, port: 0 }));
        g.remove_node(a);
        g.set_port(i, 0, "y".into());
        assert_eq!(g.slots(&"x".into()).len(), 0);
        assert_eq!(g.slots(&"y".into()).len(), 2);
    }

    #[test]
    fn s_combinator_vs_fanout() {
        let g: MolGraph = "S 1 1 2\nS a b c\nS b b a\nK z".parse().unwrap();
        let ids: Vec<_> = g.node_ids().collect();
        assert_eq!(g.s_is_combinator(ids[0]), Ok(true));
        assert_eq!(g.s_is_combinator(ids[1]), Ok(false));
        assert_eq!(g.s_is_combinator(ids[2]), Ok(true));
        assert!(g.s_is_combinator(ids[3]).is_err());
    }
}
