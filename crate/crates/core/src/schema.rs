//! The rewrite table and static conservation checks.
//!
//! Every rewrite carries its plain LHS/RHS patterns plus the "with tokens"
//! forms, where the consumed tokens are appended to the left side and the
//! produced ones to the right. Written as flat symbol strings the two token
//! forms must be permutations of each other; [`verify_schema`] checks this
//! and recomputes a witness permutation.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::mol::{parse_mol, EdgeName, MolGraph, NodeType};
use crate::token::{TokenBag, TokenType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RewriteKind {
    Beta,
    Termination,
    Dist,
    Compose,
    /// Token-only rewrites, applied to the ledger.
    Token,
    /// Rewires two roots with the help of a token; applied on request only.
    Synthesis,
}

/// The textual description of a rewrite, sufficient for verification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SchemaForms {
    pub name: String,
    #[serde(default)]
    pub lhs: String,
    #[serde(default)]
    pub rhs: String,
    pub lhs_tokens: String,
    pub rhs_tokens: String,
    #[serde(default)]
    pub tokens_in: TokenBag,
    #[serde(default)]
    pub tokens_out: TokenBag,
    /// Second row of a published permutation, hex digits separated by
    /// spaces: position `i` of the RHS-with-tokens string holds the symbol
    /// at position `p[i]` of the LHS-with-tokens string.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published_permutation: Option<String>,
}

/// Pattern with edge names replaced by variable indices.
#[derive(Clone, Debug)]
pub struct Pattern {
    pub nodes: Vec<PatNode>,
    pub vars: Vec<EdgeName>,
}

#[derive(Clone, Debug)]
pub struct PatNode {
    pub ty: NodeType,
    pub vars: Vec<usize>,
}

impl Pattern {
    fn from_text(text: &str, vars: &mut Vec<EdgeName>) -> Pattern {
        let g = parse_pattern(text);
        let nodes = g
            .nodes()
            .map(|(_, n)| PatNode {
                ty: n.ty,
                vars: n
                    .ports
                    .iter()
                    .map(|e| match vars.iter().position(|v| v == e) {
                        Some(i) => i,
                        None => {
                            vars.push(e.clone());
                            vars.len() - 1
                        }
                    })
                    .collect(),
            })
            .collect();
        Pattern { nodes, vars: vars.clone() }
    }
}

fn parse_pattern(text: &str) -> MolGraph {
    if text.trim().is_empty() {
        MolGraph::new()
    } else {
        parse_mol(text).unwrap_or_else(|e| panic!("bad pattern `{text}`: {e}"))
    }
}

/// One step of the matcher's walk: from a bound pattern node through one of
/// its ports to the pattern node on the other end.
#[derive(Clone, Copy, Debug)]
pub struct WalkStep {
    pub from: usize,
    pub port: usize,
    pub to: usize,
    pub to_port: usize,
}

#[derive(Clone, Debug)]
pub struct RewriteSchema {
    pub forms: SchemaForms,
    /// `None` means any node type (COMB).
    pub left: Option<NodeType>,
    pub right: NodeType,
    pub action: &'static str,
    pub kind: RewriteKind,
    /// Index of the LHS node the search starts from; it has type `right`.
    pub anchor: usize,
    pub lhs: Pattern,
    /// RHS over the same variable space as `lhs`; indices at or past
    /// `lhs.vars.len()` are RHS-only edges and get fresh names.
    pub rhs: Pattern,
    pub walk: Vec<WalkStep>,
}

impl RewriteSchema {
    #[allow(clippy::too_many_arguments)]
    fn new(
        name: &str,
        left: Option<NodeType>,
        right: NodeType,
        action: &'static str,
        kind: RewriteKind,
        anchor: usize,
        lhs: &str,
        rhs: &str,
        lhs_tokens: &str,
        rhs_tokens: &str,
        tokens_in: &[(TokenType, u64)],
        tokens_out: &[(TokenType, u64)],
        published: Option<&str>,
    ) -> Self {
        let mut vars = Vec::new();
        let lhs_pat = Pattern::from_text(lhs, &mut vars);
        let rhs_pat = Pattern::from_text(rhs, &mut vars);
        let matchable = matches!(kind, RewriteKind::Beta | RewriteKind::Termination | RewriteKind::Dist);
        let walk = if matchable { plan_walk(&lhs_pat, anchor) } else { Vec::new() };
        RewriteSchema {
            forms: SchemaForms {
                name: name.into(),
                lhs: lhs.into(),
                rhs: rhs.into(),
                lhs_tokens: lhs_tokens.into(),
                rhs_tokens: rhs_tokens.into(),
                tokens_in: TokenBag::of(tokens_in),
                tokens_out: TokenBag::of(tokens_out),
                published_permutation: published.map(Into::into),
            },
            left,
            right,
            action,
            kind,
            anchor,
            lhs: lhs_pat,
            rhs: rhs_pat,
            walk,
        }
    }

    pub fn name(&self) -> &str {
        &self.forms.name
    }

    pub fn tokens_in(&self) -> &TokenBag {
        &self.forms.tokens_in
    }

    pub fn tokens_out(&self) -> &TokenBag {
        &self.forms.tokens_out
    }

    /// Whether the generic matcher can find this rewrite. COMB is driven by
    /// its own pass, token and synthesis rewrites by explicit calls.
    pub fn is_matchable(&self) -> bool {
        !self.walk.is_empty()
    }
}

fn plan_walk(p: &Pattern, anchor: usize) -> Vec<WalkStep> {
    let mut reached = vec![false; p.nodes.len()];
    let mut steps = Vec::new();
    if p.nodes.is_empty() {
        return steps;
    }
    reached[anchor] = true;
    let mut queue = std::collections::VecDeque::from([anchor]);
    while let Some(from) = queue.pop_front() {
        for (port, &v) in p.nodes[from].vars.iter().enumerate() {
            for (to, n) in p.nodes.iter().enumerate() {
                for (to_port, &w) in n.vars.iter().enumerate() {
                    if w == v && !reached[to] {
                        reached[to] = true;
                        steps.push(WalkStep { from, port, to, to_port });
                        queue.push_back(to);
                    }
                }
            }
        }
    }
    assert!(reached.iter().all(|r| *r), "pattern is not connected");
    steps
}

use NodeType::{Arrow, Frout, A, I, K, S};
use RewriteKind::*;
use TokenType as T;

static REDUCTION_TABLE: LazyLock<Vec<RewriteSchema>> = LazyLock::new(|| {
    vec![
        RewriteSchema::new(
            "K-A",
            Some(K),
            A,
            "KA",
            Beta,
            1,
            "K 1, A 1 a 2, A 2 b c",
            "K e, Arrow a c, Arrow b e",
            "K 1, A 1 a 2, A 2 b c, Arrow d d, Arrow e e",
            "K e, A 1 d 1, A 2 d 2, Arrow a c, Arrow b e",
            &[(T::Arrow, 2)],
            &[(T::AA, 1)],
            Some("0 e 2 1 b 3 6 5 c 7 a 4 9 d 8 f"),
        ),
        RewriteSchema::new(
            "I-A",
            Some(I),
            A,
            "termIA",
            Termination,
            1,
            "I 1, A 1 a b",
            "Arrow a b",
            "I 1, A 1 a b, Arrow c c",
            "I 1, A c 1 c, Arrow a b",
            &[(T::Arrow, 1)],
            &[(T::IA, 1)],
            Some("0 1 2 7 3 8 6 4 5"),
        ),
        RewriteSchema::new(
            "I-S",
            Some(I),
            S,
            "terminIS",
            Termination,
            1,
            "I a, S a b c",
            "I b, I c",
            "I a, S a b c, I d, A e d e",
            "I b, S a d a, I c, A e d e",
            &[(T::IA, 1)],
            &[(T::SA, 1)],
            Some("0 4 2 1 7 3 6 5 8 9 a b"),
        ),
        RewriteSchema::new(
            "K-S",
            Some(K),
            S,
            "terminKS",
            Termination,
            1,
            "K a, S a b c",
            "K b, K c",
            "K a, S a b c, K d, S e d e",
            "K b, S a d a, K c, S e d e",
            &[(T::SK, 1)],
            &[(T::SS, 1)],
            Some("0 4 2 1 7 3 6 5 8 9 a b"),
        ),
        RewriteSchema::new(
            "S-K1",
            Some(S),
            K,
            "terminSK",
            Termination,
            1,
            "S a b c, K c",
            "Arrow a b",
            "S a b c, K c, Arrow d d",
            "S d c d, K c, Arrow a b",
            &[(T::Arrow, 1)],
            &[(T::SK, 1)],
            Some("0 7 3 8 4 5 6 1 2"),
        ),
        RewriteSchema::new(
            "S-K2",
            Some(S),
            K,
            "terminSK",
            Termination,
            1,
            "S a c b, K c",
            "Arrow a b",
            "S a c b, K c, Arrow d d",
            "S d c d, K c, Arrow a b",
            &[(T::Arrow, 1)],
            &[(T::SK, 1)],
            Some("0 7 2 8 4 5 6 1 3"),
        ),
        RewriteSchema::new(
            "A-K",
            Some(A),
            K,
            "termAK",
            Termination,
            1,
            "A a b c, K c",
            "K a, K b",
            "A a b c, K c, S d e d, K e",
            "A c e c, K a, S d e d, K b",
            &[(T::SK, 1)],
            &[(T::SA, 1)],
            Some("0 3 8 5 4 1 6 7 8 9 a 2"),
        ),
        RewriteSchema::new(
            "A-S",
            Some(A),
            S,
            "DIST1",
            Dist,
            1,
            "A a b e, S e c d",
            "S a e f, S b g h, A e g c, A f h d",
            "S e c d, S f h f, A a b e, A g h g",
            "S a e f, S b g h, A e g c, A f h d",
            &[(T::SA, 1)],
            &[],
            Some("0 9 1 5 4 a d 6 8 b f 2 c 7 e 3"),
        ),
        RewriteSchema::new(
            "S-S",
            Some(S),
            S,
            "SS",
            Dist,
            1,
            "S a a b, S b c d",
            "S a a c, S b b d",
            "S a a b, S b c d",
            "S a a c, S b b d",
            &[],
            &[],
            Some("0 1 2 6 4 3 5 7"),
        ),
        RewriteSchema::new(
            "S-A",
            Some(S),
            A,
            "SA",
            Dist,
            1,
            "S 1 1 2, A 2 a 3, A 3 b 4, A 4 c d",
            "S c 1 2, A a 1 3, A b 2 4, A 3 4 d",
            "S 1 1 2, A 2 a 3, A 3 b 4, A 4 c d",
            "S c 1 2, A a 1 3, A b 2 4, A 3 4 d",
            &[],
            &[],
            Some("0 e 1 3 4 6 2 7 8 a 5 b c 9 d f"),
        ),
        // The node on the far side of `a` is arbitrary; FRIN stands in for it
        // so the forms can be checked like any other rewrite.
        RewriteSchema::new(
            "COMB",
            None,
            Arrow,
            "arrow",
            Compose,
            1,
            "FRIN a, Arrow a b",
            "FRIN b",
            "FRIN a, Arrow a b",
            "FRIN b, Arrow a a",
            &[],
            &[(T::Arrow, 1)],
            None,
        ),
    ]
});

static EXTRA_TABLE: LazyLock<Vec<RewriteSchema>> = LazyLock::new(|| {
    vec![
        RewriteSchema::new(
            "S-S+A-A",
            None,
            S,
            "tokenSSAA",
            Token,
            0,
            "",
            "",
            "S a b a, S c b c, A d e d, A f e f",
            "S a b a, S c e c, A d b d, A f e f",
            &[(T::SS, 1), (T::AA, 1)],
            &[(T::SA, 2)],
            Some("0 1 2 3 4 5 a 7 8 9 6 b c d e f"),
        ),
        RewriteSchema::new(
            "synth-S-K",
            Some(Frout),
            Frout,
            "synthSK",
            Synthesis,
            0,
            "FROUT a, FROUT b",
            "FROUT e, FROUT c, S a e c, K b",
            "FROUT a, FROUT b, S c e c, K e",
            "FROUT e, FROUT c, S a e c, K b",
            &[(T::SK, 1)],
            &[],
            Some("0 6 2 5 4 1 9 7 8 3"),
        ),
        RewriteSchema::new(
            "synth-S-A",
            Some(Frout),
            Frout,
            "synthSA",
            Synthesis,
            0,
            "FROUT a, FROUT b",
            "FROUT e, FROUT c, S a e d, A d b c",
            "FROUT a, FROUT b, S c e c, A d e d",
            "FROUT e, FROUT c, S a e d, A d b c",
            &[(T::SA, 1)],
            &[],
            Some("0 6 2 5 4 1 a 9 8 b 3 7"),
        ),
    ]
});

/// The rewrites used during reduction, COMB included.
pub fn reduction_table() -> &'static [RewriteSchema] {
    &REDUCTION_TABLE
}

/// The token rewrite and the two synthesis rewrites.
pub fn extra_table() -> &'static [RewriteSchema] {
    &EXTRA_TABLE
}

/// Every rewrite with token forms: the reduction table followed by the
/// extra table.
pub fn conservation_table() -> Vec<&'static RewriteSchema> {
    reduction_table().iter().chain(extra_table()).collect()
}

pub fn schema_by_name(name: &str) -> Option<&'static RewriteSchema> {
    reduction_table().iter().chain(extra_table()).find(|s| s.name() == name)
}

// ---------------------------------------------------------------------------
// Verification

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolRole {
    Node,
    Edge,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Imbalance {
    pub role: SymbolRole,
    pub symbol: String,
    pub lhs: usize,
    pub rhs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "camelCase")]
pub enum PublishedCheck {
    Absent,
    Agrees,
    WrongLength { expected: usize, found: usize },
    NotBijective { repeated: Vec<usize>, missing: Vec<usize> },
    Disagrees { positions: Vec<usize> },
    Unparsable { token: String },
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub name: String,
    pub node_types_balanced: bool,
    pub edge_names_balanced: bool,
    pub node_count_conserved: bool,
    /// The token forms equal the plain forms plus the declared tokens.
    pub token_forms_consistent: bool,
    pub imbalances: Vec<Imbalance>,
    pub witness: Option<Vec<usize>>,
    pub published: PublishedCheck,
    pub problems: Vec<String>,
}

impl VerificationReport {
    pub fn conserved(&self) -> bool {
        self.node_types_balanced
            && self.edge_names_balanced
            && self.node_count_conserved
            && self.token_forms_consistent
            && self.witness.is_some()
            && self.problems.is_empty()
    }
}

fn flatten(g: &MolGraph) -> Vec<(SymbolRole, String)> {
    let mut out = Vec::new();
    for (_, n) in g.nodes() {
        out.push((SymbolRole::Node, n.ty.to_string()));
        out.extend(n.ports.iter().map(|e| (SymbolRole::Edge, e.to_string())));
    }
    out
}

fn try_parse(text: &str, problems: &mut Vec<String>, what: &str) -> MolGraph {
    if text.trim().is_empty() {
        return MolGraph::new();
    }
    parse_mol(text).unwrap_or_else(|e| {
        problems.push(format!("{what}: {e}"));
        MolGraph::new()
    })
}

pub fn verify_schema(s: &RewriteSchema) -> VerificationReport {
    verify_forms(&s.forms)
}

pub fn verify_forms(f: &SchemaForms) -> VerificationReport {
    let mut problems = Vec::new();
    let lhs = try_parse(&f.lhs, &mut problems, "lhs");
    let rhs = try_parse(&f.rhs, &mut problems, "rhs");
    let lt = try_parse(&f.lhs_tokens, &mut problems, "lhsTokens");
    let rt = try_parse(&f.rhs_tokens, &mut problems, "rhsTokens");

    let left = flatten(&lt);
    let right = flatten(&rt);

    let mut tally: BTreeMap<(SymbolRole, &str), (usize, usize)> = BTreeMap::new();
    for (r, s) in &left {
        tally.entry((*r, s.as_str())).or_default().0 += 1;
    }
    for (r, s) in &right {
        tally.entry((*r, s.as_str())).or_default().1 += 1;
    }
    let imbalances: Vec<Imbalance> = tally
        .iter()
        .filter(|(_, (l, r))| l != r)
        .map(|((role, sym), (l, r))| Imbalance { role: *role, symbol: sym.to_string(), lhs: *l, rhs: *r })
        .collect();
    let node_types_balanced = !imbalances.iter().any(|i| i.role == SymbolRole::Node);
    let edge_names_balanced = !imbalances.iter().any(|i| i.role == SymbolRole::Edge);

    let nin = f.tokens_in.embodied_nodes() as usize;
    let nout = f.tokens_out.embodied_nodes() as usize;
    let node_count_conserved = lhs.len() + nin == rhs.len() + nout;
    let token_forms_consistent = lt.len() == lhs.len() + nin && rt.len() == rhs.len() + nout;

    let witness = imbalances.is_empty().then(|| witness_permutation(&left, &right));
    let published = match &f.published_permutation {
        None => PublishedCheck::Absent,
        Some(p) => check_published(p, &left, &right),
    };

    VerificationReport {
        name: f.name.clone(),
        node_types_balanced,
        edge_names_balanced,
        node_count_conserved,
        token_forms_consistent,
        imbalances,
        witness,
        published,
        problems,
    }
}

/// For each RHS position, an LHS position holding the same symbol, keeping
/// a symbol in place whenever possible. Requires balanced multisets.
fn witness_permutation(left: &[(SymbolRole, String)], right: &[(SymbolRole, String)]) -> Vec<usize> {
    let mut used = vec![false; left.len()];
    let mut perm = vec![usize::MAX; right.len()];
    for (i, sym) in right.iter().enumerate() {
        if left.get(i) == Some(sym) {
            used[i] = true;
            perm[i] = i;
        }
    }
    for (i, sym) in right.iter().enumerate() {
        if perm[i] != usize::MAX {
            continue;
        }
        let j = (0..left.len()).find(|&j| !used[j] && &left[j] == sym).expect("balanced multisets");
        used[j] = true;
        perm[i] = j;
    }
    perm
}

fn check_published(text: &str, left: &[(SymbolRole, String)], right: &[(SymbolRole, String)]) -> PublishedCheck {
    let mut perm = Vec::new();
    for tok in text.split_whitespace() {
        match usize::from_str_radix(tok, 16) {
            Ok(v) => perm.push(v),
            Err(_) => return PublishedCheck::Unparsable { token: tok.into() },
        }
    }
    if perm.len() != right.len() || left.len() != right.len() {
        return PublishedCheck::WrongLength { expected: right.len(), found: perm.len() };
    }
    let mut seen = vec![0usize; perm.len()];
    for &p in &perm {
        if p >= seen.len() {
            return PublishedCheck::WrongLength { expected: right.len(), found: p + 1 };
        }
        seen[p] += 1;
    }
    let repeated: Vec<usize> = (0..seen.len()).filter(|&i| seen[i] > 1).collect();
    let missing: Vec<usize> = (0..seen.len()).filter(|&i| seen[i] == 0).collect();
    if !repeated.is_empty() {
        return PublishedCheck::NotBijective { repeated, missing };
    }
    let positions: Vec<usize> = (0..perm.len()).filter(|&i| right[i] != left[perm[i]]).collect();
    if positions.is_empty() {
        PublishedCheck::Agrees
    } else {
        PublishedCheck::Disagrees { positions }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TableReport {
    pub schemas: Vec<VerificationReport>,
    pub warnings: Vec<String>,
}

impl TableReport {
    pub fn all_conserved(&self) -> bool {
        self.schemas.iter().all(|r| r.conserved())
    }
}

pub fn verify_table<'a>(forms: impl IntoIterator<Item = &'a SchemaForms>) -> TableReport {
    let schemas: Vec<_> = forms.into_iter().map(verify_forms).collect();
    let mut warnings = Vec::new();
    if schemas.is_empty() {
        warnings.push("empty schema table: nothing to verify".to_string());
    }
    for r in &schemas {
        if matches!(r.published, PublishedCheck::NotBijective { .. } | PublishedCheck::Disagrees { .. }) {
            warnings.push(format!("{}: published permutation does not describe this rewrite", r.name));
        }
    }
    TableReport { schemas, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_table_shape() {
        let t = reduction_table();
        assert_eq!(t.len(), 11);
        for s in t {
            if s.kind != Compose {
                assert_eq!(s.lhs.nodes[s.anchor].ty, s.right, "{}", s.name());
            }
        }
    }

    #[test]
    fn every_schema_conserves() {
        for s in conservation_table() {
            let r = verify_schema(s);
            assert!(r.conserved(), "{}: {r:?}", s.name());
        }
    }

    #[test]
    fn published_permutations() {
        for s in conservation_table() {
            let r = verify_schema(s);
            match s.name() {
                "A-K" => assert_eq!(r.published, PublishedCheck::NotBijective { repeated: vec![8], missing: vec![11] }),
                "COMB" => assert_eq!(r.published, PublishedCheck::Absent),
                _ => assert_eq!(r.published, PublishedCheck::Agrees, "{}", s.name()),
            }
        }
    }

    #[test]
    fn ka_witness_is_a_bijection() {
        let r = verify_schema(schema_by_name("K-A").unwrap());
        let w = r.witness.unwrap();
        let mut sorted = w.clone();
        sorted.sort();
        assert_eq!(sorted, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn neutral_rewrite_tokens_equal_plain_forms() {
        let s = schema_by_name("S-S").unwrap();
        assert_eq!(s.forms.lhs, s.forms.lhs_tokens);
        assert_eq!(s.forms.rhs, s.forms.rhs_tokens);
        assert!(verify_schema(s).conserved());
    }

    #[test]
    fn corrupted_rhs_is_reported() {
        let mut f = schema_by_name("I-A").unwrap().forms.clone();
        f.rhs_tokens = "I 1, A c 1 c, Arrow a a".into();
        let r = verify_forms(&f);
        assert!(!r.conserved());
        assert!(!r.edge_names_balanced);
        assert!(r.imbalances.iter().any(|i| i.symbol == "b" && i.lhs == 1 && i.rhs == 0));
        assert!(r.witness.is_none());
    }

    #[test]
    fn empty_table_passes_with_warning() {
        let r = verify_table(std::iter::empty());
        assert!(r.all_conserved());
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn rhs_only_variables() {
        let ka = schema_by_name("K-A").unwrap();
        let fresh: Vec<_> = ka.rhs.vars[ka.lhs.vars.len()..].iter().map(|v| v.to_string()).collect();
        assert_eq!(fresh, vec!["e"]);
        let as_ = schema_by_name("A-S").unwrap();
        let fresh: Vec<_> = as_.rhs.vars[as_.lhs.vars.len()..].iter().map(|v| v.to_string()).collect();
        assert_eq!(fresh, vec!["f", "g", "h"]);
    }
}
