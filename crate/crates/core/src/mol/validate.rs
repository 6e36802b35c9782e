use std::collections::BTreeMap;

use serde::Serialize;

use super::{EdgeName, MolGraph, Node, NodeType, Polarity};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeCount {
    pub edge: EdgeName,
    pub count: usize,
}

/// An edge joining two strictly typed ports of the same direction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolarityWarning {
    pub edge: EdgeName,
    pub ends: [(NodeType, usize); 2],
    pub polarity: &'static str,
}

impl std::fmt::Display for PolarityWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [(ta, pa), (tb, pb)] = self.ends;
        write!(f, "edge `{}` joins {ta} port {pa} and {tb} port {pb} ({})", self.edge, self.polarity)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub edges: Vec<EdgeCount>,
    /// Edges not occurring exactly twice.
    pub errors: Vec<EdgeCount>,
    pub warnings: Vec<PolarityWarning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

pub fn validate(g: &MolGraph) -> ValidationReport {
    let mut counts: BTreeMap<&EdgeName, usize> = BTreeMap::new();
    for (_, n) in g.nodes() {
        for e in &n.ports {
            *counts.entry(e).or_default() += 1;
        }
    }
    let mut report = ValidationReport::default();
    for (edge, count) in counts {
        let ec = EdgeCount { edge: edge.clone(), count };
        if count != 2 {
            report.errors.push(ec.clone());
        } else if let [a, b] = g.slots(edge) {
            let ta = g.node(a.node).map(|n| n.ty).unwrap();
            let tb = g.node(b.node).map(|n| n.ty).unwrap();
            let (pa, pb) = (ta.polarity(a.port), tb.polarity(b.port));
            if pa == pb && pa != Polarity::Free {
                report.warnings.push(PolarityWarning {
                    edge: edge.clone(),
                    ends: [(ta, a.port + 1), (tb, b.port + 1)],
                    polarity: if pa == Polarity::In { "in-in" } else { "out-out" },
                });
            }
        }
        report.edges.push(ec);
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("edge `{edge}` occurs {count} times; capping needs at most 2")]
pub struct CapError {
    pub edge: EdgeName,
    pub count: usize,
}

#[derive(Clone, Debug)]
pub struct Capped {
    pub graph: MolGraph,
    /// Cap nodes appended, in order.
    pub added: Vec<(NodeType, EdgeName)>,
    /// Dangling K/I ports, capped with FROUT by treating the leaf as a
    /// producer feeding nothing.
    pub leaf_caps: Vec<EdgeName>,
}

/// Caps every edge that occurs once: FROUT on an out (or K/I) port, FRIN on
/// an in port. The cap reuses the dangling edge's name.
pub fn cap_free_edges(g: &MolGraph) -> Result<Capped, CapError> {
    let mut graph = g.clone();
    let mut added = Vec::new();
    let mut leaf_caps = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (_, n) in g.nodes() {
        for (port, e) in n.ports.iter().enumerate() {
            if !seen.insert(e.clone()) {
                continue;
            }
            let count = g.slots(e).len();
            match count {
                2 => {}
                1 => {
                    let cap = match n.ty.polarity(port) {
                        Polarity::In => NodeType::Frin,
                        Polarity::Out => NodeType::Frout,
                        Polarity::Free => {
                            leaf_caps.push(e.clone());
                            NodeType::Frout
                        }
                    };
                    graph.add_node(Node::new(cap, [e.clone()]));
                    added.push((cap, e.clone()));
                }
                _ => return Err(CapError { edge: e.clone(), count }),
            }
        }
    }
    Ok(Capped { graph, added, leaf_caps })
}
