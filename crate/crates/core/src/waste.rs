//! Inert two-node components and their excision into the ledger.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::engine::{comb_ready, find_transform};
use crate::mol::{MolGraph, NodeId, NodeType};
use crate::schema::reduction_table;
use crate::token::{Ledger, WasteKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WasteComponent {
    pub kind: WasteKind,
    pub nodes: [NodeId; 2],
}

/// Connected components, each listed in node order.
pub fn components(g: &MolGraph) -> Vec<Vec<NodeId>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for start in g.node_ids() {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(id) = queue.pop_front() {
            for e in &g.node(id).expect("live node").ports {
                for s in g.slots(e) {
                    if seen.insert(s.node) {
                        comp.push(s.node);
                        queue.push_back(s.node);
                    }
                }
            }
        }
        comp.sort();
        out.push(comp);
    }
    out
}

fn classify(a: NodeType, b: NodeType) -> Option<WasteKind> {
    use NodeType::*;
    match (a.min(b), a.max(b)) {
        (K, K) => Some(WasteKind::KK),
        (K, I) => Some(WasteKind::IK),
        (I, I) => Some(WasteKind::II),
        (K, A) => Some(WasteKind::AK),
        _ => None,
    }
}

/// Two-node components of kind K-K, I-K, I-I or A-K on which no rewrite
/// applies.
pub fn detect_waste(g: &MolGraph) -> Vec<WasteComponent> {
    let table = reduction_table();
    components(g)
        .into_iter()
        .filter_map(|c| {
            let [x, y] = c.as_slice() else { return None };
            let kind = classify(g.node(*x)?.ty, g.node(*y)?.ty)?;
            let live = [*x, *y].iter().any(|id| comb_ready(g, *id) || find_transform(g, *id, table).is_some());
            (!live).then_some(WasteComponent { kind, nodes: [*x, *y] })
        })
        .collect()
}

/// Removes every inert component from `g` and counts it in the ledger.
pub fn excise_waste(g: &mut MolGraph, ledger: &mut Ledger) -> Vec<WasteComponent> {
    let found = detect_waste(g);
    for w in &found {
        for id in w.nodes {
            g.remove_node(id);
        }
        ledger.add_waste(w.kind, 1);
    }
    found
}
