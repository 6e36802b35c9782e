use smallvec::SmallVec;

use crate::mol::{EdgeName, MolGraph, NodeId, NodeType, PortRef};
use crate::schema::RewriteSchema;

/// An embedding of a rewrite's LHS into the graph.
#[derive(Clone, Debug)]
pub struct Match<'t> {
    pub schema: &'t RewriteSchema,
    pub anchor: NodeId,
    /// Graph node for each LHS pattern node, in pattern order.
    pub nodes: SmallVec<[NodeId; 4]>,
    /// Graph edge for each LHS variable.
    pub edges: SmallVec<[EdgeName; 10]>,
}

impl Match<'_> {
    pub fn edge_for(&self, var: &str) -> Option<&EdgeName> {
        let i = self.schema.lhs.vars.iter().position(|v| v.as_str() == var)?;
        self.edges.get(i)
    }
}

struct Binder<'g> {
    g: &'g MolGraph,
    nodes: SmallVec<[Option<NodeId>; 4]>,
    edges: SmallVec<[Option<EdgeName>; 10]>,
}

impl Binder<'_> {
    /// Binds pattern node `p` to graph node `id`. Distinct pattern nodes go
    /// to distinct graph nodes. An S written with distinct variables on
    /// ports 1 and 2 only matches a fan-out.
    fn bind(&mut self, schema: &RewriteSchema, p: usize, id: NodeId) -> bool {
        let Some(node) = self.g.node(id) else {
            return false;
        };
        let pat = &schema.lhs.nodes[p];
        if node.ty != pat.ty || self.nodes.contains(&Some(id)) {
            return false;
        }
        if pat.ty == NodeType::S && pat.vars[0] != pat.vars[1] && node.ports[0] == node.ports[1] {
            return false;
        }
        for (&var, edge) in pat.vars.iter().zip(&node.ports) {
            match &self.edges[var] {
                Some(bound) if bound == edge => {}
                Some(_) => return false,
                None => self.edges[var] = Some(edge.clone()),
            }
        }
        self.nodes[p] = Some(id);
        true
    }
}

/// Tries to embed `schema`'s LHS with its anchor node at `anchor`, walking
/// the graph along the pattern's edges.
pub fn match_schema<'t>(g: &MolGraph, schema: &'t RewriteSchema, anchor: NodeId) -> Option<Match<'t>> {
    if !schema.is_matchable() {
        return None;
    }
    let mut b = Binder {
        g,
        nodes: SmallVec::from_elem(None, schema.lhs.nodes.len()),
        edges: SmallVec::from_elem(None, schema.lhs.vars.len()),
    };
    if !b.bind(schema, schema.anchor, anchor) {
        return None;
    }
    for step in &schema.walk {
        let from = b.nodes[step.from]?;
        let other = g.opposite(PortRef { node: from, port: step.port })?;
        if other.port != step.to_port {
            return None;
        }
        match b.nodes[step.to] {
            Some(already) if already == other.node => {}
            Some(_) => return None,
            None => {
                if !b.bind(schema, step.to, other.node) {
                    return None;
                }
            }
        }
    }
    Some(Match {
        schema,
        anchor,
        nodes: b.nodes.into_iter().map(|n| n.expect("walk covers pattern")).collect(),
        edges: b.edges.into_iter().map(|e| e.expect("every var is on a node")).collect(),
    })
}

/// Every rewrite in `table` whose LHS embeds at `anchor`.
pub fn matches_at<'t>(g: &MolGraph, anchor: NodeId, table: &'t [RewriteSchema]) -> SmallVec<[Match<'t>; 2]> {
    let Some(ty) = g.node(anchor).map(|n| n.ty) else {
        return SmallVec::new();
    };
    table.iter().filter(|s| s.right == ty).filter_map(|s| match_schema(g, s, anchor)).collect()
}

/// The first rewrite in table order whose LHS embeds at `anchor`.
pub fn find_transform<'t>(g: &MolGraph, anchor: NodeId, table: &'t [RewriteSchema]) -> Option<Match<'t>> {
    let ty = g.node(anchor)?.ty;
    table.iter().filter(|s| s.right == ty).find_map(|s| match_schema(g, s, anchor))
}

/// An Arrow node COMB can remove: distinct ports, and the input edge has a
/// node on its other end.
pub fn comb_ready(g: &MolGraph, id: NodeId) -> bool {
    let Some(n) = g.node(id) else { return false };
    n.ty == NodeType::Arrow && n.ports[0] != n.ports[1] && g.opposite(PortRef { node: id, port: 0 }).is_some()
}

/// Whether any rewrite, COMB included, applies anywhere in `g`.
pub fn has_redex(g: &MolGraph, table: &[RewriteSchema]) -> bool {
    g.node_ids().any(|id| comb_ready(g, id) || find_transform(g, id, table).is_some())
}
