use std::collections::{HashMap, HashSet};

use super::{EdgeName, MolGraph, NodeId, NodeType};

/// Port-preserving isomorphism up to node order and edge renaming.
pub fn isomorphic(g1: &MolGraph, g2: &MolGraph) -> bool {
    if g1.len() != g2.len() || g1.edge_count() != g2.edge_count() {
        return false;
    }
    for t in NodeType::ALL {
        if g1.count_of(t) != g2.count_of(t) {
            return false;
        }
    }
    let order = walk_order(g1);
    let mut st =
        State { g1, g2, nodes: HashMap::new(), used: HashSet::new(), e12: HashMap::new(), e21: HashMap::new() };
    st.search(&order, 0)
}

/// Node order in which every node after a component's first is adjacent to
/// an earlier one, so most candidates are forced by already mapped edges.
fn walk_order(g: &MolGraph) -> Vec<NodeId> {
    let mut seen = HashSet::new();
    let mut order = Vec::with_capacity(g.len());
    for start in g.node_ids() {
        if !seen.insert(start) {
            continue;
        }
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(id) = queue.pop_front() {
            order.push(id);
            for e in &g.node(id).unwrap().ports {
                for s in g.slots(e) {
                    if seen.insert(s.node) {
                        queue.push_back(s.node);
                    }
                }
            }
        }
    }
    order
}

struct State<'a> {
    g1: &'a MolGraph,
    g2: &'a MolGraph,
    nodes: HashMap<NodeId, NodeId>,
    used: HashSet<NodeId>,
    e12: HashMap<EdgeName, EdgeName>,
    e21: HashMap<EdgeName, EdgeName>,
}

impl State<'_> {
    fn search(&mut self, order: &[NodeId], k: usize) -> bool {
        let Some(&n1) = order.get(k) else {
            return true;
        };
        for n2 in self.candidates(n1) {
            let saved = (self.e12.clone(), self.e21.clone());
            if self.try_pair(n1, n2) {
                self.nodes.insert(n1, n2);
                self.used.insert(n2);
                if self.search(order, k + 1) {
                    return true;
                }
                self.nodes.remove(&n1);
                self.used.remove(&n2);
            }
            (self.e12, self.e21) = saved;
        }
        false
    }

    fn candidates(&self, n1: NodeId) -> Vec<NodeId> {
        let node = self.g1.node(n1).unwrap();
        for (port, e) in node.ports.iter().enumerate() {
            if let Some(e2) = self.e12.get(e) {
                return self
                    .g2
                    .slots(e2)
                    .iter()
                    .filter(|s| s.port == port && !self.used.contains(&s.node))
                    .filter(|s| self.g2.node(s.node).unwrap().ty == node.ty)
                    .map(|s| s.node)
                    .collect();
            }
        }
        self.g2.nodes().filter(|(id, n)| n.ty == node.ty && !self.used.contains(id)).map(|(id, _)| id).collect()
    }

    fn try_pair(&mut self, n1: NodeId, n2: NodeId) -> bool {
        let a = self.g1.node(n1).unwrap();
        let b = self.g2.node(n2).unwrap();
        if a.ty != b.ty {
            return false;
        }
        for (e1, e2) in a.ports.iter().zip(&b.ports) {
            match (self.e12.get(e1), self.e21.get(e2)) {
                (Some(x), Some(y)) if x == e2 && y == e1 => {}
                (None, None) => {
                    if self.g1.slots(e1).len() != self.g2.slots(e2).len() {
                        return false;
                    }
                    self.e12.insert(e1.clone(), e2.clone());
                    self.e21.insert(e2.clone(), e1.clone());
                }
                _ => return false,
            }
        }
        true
    }
}
