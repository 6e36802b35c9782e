//! Tokens, the ledger that holds them, and the fresh-name mint.
//!
//! Tokens are small fixed graphs consumed and produced by rewrites so that
//! every rewrite conserves nodes and edge names. The engine keeps them as
//! counters; their canonical mol forms are only instantiated by [`mint`] and
//! by schema verification.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::mol::{parse_mol, EdgeName, MolGraph, Node, RESERVED_PREFIX};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TokenType {
    Arrow,
    #[serde(rename = "I-A")]
    IA,
    #[serde(rename = "S-K")]
    SK,
    #[serde(rename = "S-A")]
    SA,
    #[serde(rename = "A-A")]
    AA,
    #[serde(rename = "S-S")]
    SS,
}

impl TokenType {
    pub const ALL: [TokenType; 6] =
        [TokenType::Arrow, TokenType::IA, TokenType::SK, TokenType::SA, TokenType::AA, TokenType::SS];

    pub fn as_str(self) -> &'static str {
        match self {
            TokenType::Arrow => "Arrow",
            TokenType::IA => "I-A",
            TokenType::SK => "S-K",
            TokenType::SA => "S-A",
            TokenType::AA => "A-A",
            TokenType::SS => "S-S",
        }
    }

    pub fn from_name(s: &str) -> Option<TokenType> {
        TokenType::ALL.into_iter().find(|t| t.as_str() == s)
    }

    /// Mol form of the token, with placeholder edge names.
    pub fn canonical_form(self) -> &'static str {
        match self {
            TokenType::Arrow => "Arrow d d",
            TokenType::IA => "I x, A y x y",
            TokenType::SK => "S d c d, K c",
            TokenType::SA => "S f h f, A g h g",
            TokenType::AA => "A x d x, A y d y",
            TokenType::SS => "S a b a, S c b c",
        }
    }

    pub fn names_carried(self) -> usize {
        match self {
            TokenType::Arrow => 1,
            TokenType::IA | TokenType::SK => 2,
            TokenType::SA | TokenType::AA | TokenType::SS => 3,
        }
    }

    pub fn nodes_embodied(self) -> usize {
        match self {
            TokenType::Arrow => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for TokenType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A multiset of tokens.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenBag(BTreeMap<TokenType, u64>);

impl TokenBag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn of(items: &[(TokenType, u64)]) -> Self {
        let mut bag = TokenBag::new();
        for &(t, n) in items {
            bag.add(t, n);
        }
        bag
    }

    pub fn add(&mut self, t: TokenType, n: u64) {
        if n > 0 {
            *self.0.entry(t).or_default() += n;
        }
    }

    pub fn get(&self, t: TokenType) -> u64 {
        self.0.get(&t).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (TokenType, u64)> + '_ {
        self.0.iter().map(|(t, n)| (*t, *n))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn embodied_nodes(&self) -> u64 {
        self.iter().map(|(t, n)| t.nodes_embodied() as u64 * n).sum()
    }
}

impl fmt::Display for TokenBag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("-");
        }
        let parts: Vec<String> =
            self.iter().map(|(t, n)| if n == 1 { t.to_string() } else { format!("{n} {t}") }).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Source of globally fresh edge names. Names carry the reserved prefix,
/// which parsed user input may not use, plus a monotone counter.
#[derive(Clone, Debug)]
pub struct FreshNameSource {
    prefix: String,
    counter: u64,
    issued: u64,
}

impl Default for FreshNameSource {
    fn default() -> Self {
        FreshNameSource { prefix: RESERVED_PREFIX.to_string(), counter: 0, issued: 0 }
    }
}

impl FreshNameSource {
    pub fn new() -> Self {
        Self::default()
    }

    /// A source whose names cannot clash with any `_N`-suffixed name already
    /// in `g` (used when re-reading graphs the engine wrote earlier).
    pub fn above(g: &MolGraph) -> Self {
        let max = g.edge_names().filter_map(|e| minted_index(e.as_str())).max();
        FreshNameSource { counter: max.map_or(0, |m| m + 1), ..Self::default() }
    }

    /// Moves the counter past every minted name in `g`.
    pub fn skip_past(&mut self, g: &MolGraph) {
        if let Some(m) = g.edge_names().filter_map(|e| minted_index(e.as_str())).max() {
            self.counter = self.counter.max(m + 1);
        }
    }

    pub fn fresh(&mut self) -> EdgeName {
        self.tagged("")
    }

    /// A fresh name with a leading tag, e.g. `x_12` for an occurrence of
    /// variable `x`.
    pub fn tagged(&mut self, tag: &str) -> EdgeName {
        let name = format!("{tag}{}{}", self.prefix, self.counter);
        self.counter += 1;
        self.issued += 1;
        EdgeName::from(name)
    }

    /// Number of names issued by this source.
    pub fn issued(&self) -> u64 {
        self.issued
    }
}

fn minted_index(name: &str) -> Option<u64> {
    let (_, digits) = name.rsplit_once(RESERVED_PREFIX)?;
    digits.parse().ok()
}

/// Strips a mint suffix: `x_12` becomes `x`. Names without one are returned
/// unchanged.
pub fn untagged(name: &str) -> &str {
    match name.rsplit_once(RESERVED_PREFIX) {
        Some((tag, digits)) if !tag.is_empty() && !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) => {
            tag
        }
        _ => name,
    }
}

/// A minted token: its canonical form with fresh names.
#[derive(Clone, Debug)]
pub struct TokenInstance {
    pub token: TokenType,
    pub graph: MolGraph,
    pub names: Vec<EdgeName>,
}

pub fn mint(t: TokenType, src: &mut FreshNameSource) -> TokenInstance {
    let form = parse_mol(t.canonical_form()).expect("canonical token forms parse");
    let mut rename: Vec<(EdgeName, EdgeName)> = Vec::new();
    let mut graph = MolGraph::new();
    for (_, n) in form.nodes() {
        let ports = n.ports.iter().map(|p| match rename.iter().find(|(k, _)| k == p) {
            Some((_, v)) => v.clone(),
            None => {
                let v = src.fresh();
                rename.push((p.clone(), v.clone()));
                v
            }
        });
        let ports: Vec<_> = ports.collect();
        graph.add_node(Node::new(n.ty, ports));
    }
    let names = rename.into_iter().map(|(_, v)| v).collect();
    TokenInstance { token: t, graph, names }
}

/// Strict mode refuses rewrites whose input tokens are missing; open mode
/// mints the deficit on the spot and logs it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenMode {
    Strict,
    #[default]
    Open,
}

impl std::str::FromStr for TokenMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(TokenMode::Strict),
            "open" => Ok(TokenMode::Open),
            other => Err(format!("unknown token mode `{other}` (expected strict or open)")),
        }
    }
}

/// Inert two-node components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum WasteKind {
    #[serde(rename = "K-K")]
    KK,
    #[serde(rename = "I-K")]
    IK,
    #[serde(rename = "I-I")]
    II,
    #[serde(rename = "A-K")]
    AK,
}

impl WasteKind {
    pub const ALL: [WasteKind; 4] = [WasteKind::KK, WasteKind::IK, WasteKind::II, WasteKind::AK];

    pub fn as_str(self) -> &'static str {
        match self {
            WasteKind::KK => "K-K",
            WasteKind::IK => "I-K",
            WasteKind::II => "I-I",
            WasteKind::AK => "A-K",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LedgerError {
    #[error("insufficient tokens: need {needed} {token}, have {available}")]
    InsufficientTokens { token: TokenType, needed: u64, available: u64 },
    #[error("insufficient waste: need {needed} {kind:?}, have {available}")]
    InsufficientWaste { kind: WasteKind, needed: u64, available: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AutoMint {
    pub token: TokenType,
    pub count: u64,
}

/// `g` with every minted name replaced so that [`parse_mol`] accepts it.
/// Variable occurrences get their variable's name back when no other edge
/// uses it; everything else minted is numbered from 1 in order of first
/// occurrence, skipping names already taken.
pub fn plain_names(g: &MolGraph) -> MolGraph {
    let minted = |e: &EdgeName| e.as_str().contains(RESERVED_PREFIX);
    let mut taken: HashSet<String> = g.edge_names().filter(|e| !minted(e)).map(|e| e.to_string()).collect();
    let mut map: HashMap<EdgeName, EdgeName> = HashMap::new();
    let mut next = 1u64;
    let mut out = MolGraph::new();
    for (_, n) in g.nodes() {
        let ports = n.ports.iter().map(|e| {
            if !minted(e) {
                return e.clone();
            }
            map.entry(e.clone())
                .or_insert_with(|| {
                    let tag = untagged(e.as_str());
                    if tag != e.as_str() && taken.insert(tag.to_owned()) {
                        return EdgeName::from(tag);
                    }
                    loop {
                        let name = next.to_string();
                        next += 1;
                        if taken.insert(name.clone()) {
                            return EdgeName::from(name);
                        }
                    }
                })
                .clone()
        });
        out.add_node(Node::new(n.ty, ports.collect::<Vec<_>>()));
    }
    out
}

/// Token counts, waste counters, and the session's name mint.
#[derive(Clone, Debug, Default)]
pub struct Ledger {
    tokens: TokenBag,
    waste: BTreeMap<WasteKind, u64>,
    pub mint: FreshNameSource,
    mint_log: Vec<AutoMint>,
}

impl Ledger {
    pub fn new(mint: FreshNameSource) -> Self {
        Ledger { mint, ..Self::default() }
    }

    /// A ledger holding `n` of every token type.
    pub fn funded(mint: FreshNameSource, n: u64) -> Self {
        let mut l = Ledger::new(mint);
        for t in TokenType::ALL {
            l.tokens.add(t, n);
        }
        l
    }

    pub fn count(&self, t: TokenType) -> u64 {
        self.tokens.get(t)
    }

    pub fn tokens(&self) -> &TokenBag {
        &self.tokens
    }

    pub fn waste(&self, k: WasteKind) -> u64 {
        self.waste.get(&k).copied().unwrap_or(0)
    }

    pub fn mint_log(&self) -> &[AutoMint] {
        &self.mint_log
    }

    /// Tokens injected by open-mode minting so far.
    pub fn auto_minted(&self) -> TokenBag {
        let mut bag = TokenBag::new();
        for m in &self.mint_log {
            bag.add(m.token, m.count);
        }
        bag
    }

    pub fn credit(&mut self, bag: &TokenBag) {
        for (t, n) in bag.iter() {
            self.tokens.add(t, n);
        }
    }

    pub fn deposit(&mut self, t: TokenType, n: u64) {
        self.tokens.add(t, n);
    }

    /// Removes `bag`. In open mode, missing tokens are minted first and the
    /// mints returned; in strict mode nothing changes on failure.
    pub fn debit(&mut self, bag: &TokenBag, mode: TokenMode) -> Result<Vec<AutoMint>, LedgerError> {
        let mut mints = Vec::new();
        for (t, n) in bag.iter() {
            let have = self.count(t);
            if have < n {
                match mode {
                    TokenMode::Strict => {
                        return Err(LedgerError::InsufficientTokens { token: t, needed: n, available: have })
                    }
                    TokenMode::Open => mints.push(AutoMint { token: t, count: n - have }),
                }
            }
        }
        for m in &mints {
            self.tokens.add(m.token, m.count);
            self.mint_log.push(m.clone());
        }
        for (t, n) in bag.iter() {
            let c = self.tokens.0.get_mut(&t).expect("checked above");
            *c -= n;
            if *c == 0 {
                self.tokens.0.remove(&t);
            }
        }
        Ok(mints)
    }

    pub fn add_waste(&mut self, k: WasteKind, n: u64) {
        *self.waste.entry(k).or_default() += n;
    }

    fn take_waste(&mut self, k: WasteKind, n: u64) -> Result<(), LedgerError> {
        let have = self.waste(k);
        if have < n {
            return Err(LedgerError::InsufficientWaste { kind: k, needed: n, available: have });
        }
        self.waste.insert(k, have - n);
        Ok(())
    }

    /// Nodes held by the ledger: token nodes plus two per waste pair.
    pub fn embodied_nodes(&self) -> u64 {
        self.tokens.embodied_nodes() + 2 * self.waste.values().sum::<u64>()
    }
}

impl Serialize for Ledger {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        #[serde(rename_all = "camelCase")]
        struct View<'a> {
            #[serde(flatten)]
            tokens: BTreeMap<TokenType, u64>,
            waste: BTreeMap<WasteKind, u64>,
            mint_count: u64,
            auto_minted: &'a TokenBag,
        }
        let auto = self.auto_minted();
        View {
            tokens: TokenType::ALL.iter().map(|t| (*t, self.count(*t))).collect(),
            waste: WasteKind::ALL.iter().map(|k| (*k, self.waste(*k))).collect(),
            mint_count: self.mint.issued(),
            auto_minted: &auto,
        }
        .serialize(s)
    }
}

/// S-S + A-A = 2 S-A: turns the two token types no rewrite consumes into
/// one that A-S does.
pub fn token_rewrite_ss_aa(ledger: &mut Ledger) -> Result<(), LedgerError> {
    let need = TokenBag::of(&[(TokenType::SS, 1), (TokenType::AA, 1)]);
    ledger.debit(&need, TokenMode::Strict)?;
    ledger.deposit(TokenType::SA, 2);
    Ok(())
}

/// Ledger-level waste recycling equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WasteEquation {
    /// K-K + S-S = 2 S-K
    KkSs,
    /// I-I + A-A = 2 I-A
    IiAa,
    /// I-K + A-A = A-K + I-A
    IkAa,
    /// A-K + S-S = S-A + S-K
    AkSs,
}

impl WasteEquation {
    pub const ALL: [WasteEquation; 4] =
        [WasteEquation::KkSs, WasteEquation::IiAa, WasteEquation::IkAa, WasteEquation::AkSs];

    /// (waste in, token in, waste out, tokens out)
    pub fn sides(self) -> (WasteKind, TokenType, Option<WasteKind>, TokenBag) {
        use TokenType::*;
        match self {
            WasteEquation::KkSs => (WasteKind::KK, SS, None, TokenBag::of(&[(SK, 2)])),
            WasteEquation::IiAa => (WasteKind::II, AA, None, TokenBag::of(&[(IA, 2)])),
            WasteEquation::IkAa => (WasteKind::IK, AA, Some(WasteKind::AK), TokenBag::of(&[(IA, 1)])),
            WasteEquation::AkSs => (WasteKind::AK, SS, None, TokenBag::of(&[(SA, 1), (SK, 1)])),
        }
    }
}

pub fn waste_rewrite(eq: WasteEquation, ledger: &mut Ledger) -> Result<(), LedgerError> {
    let (waste_in, token_in, waste_out, tokens_out) = eq.sides();
    if ledger.waste(waste_in) < 1 {
        return Err(LedgerError::InsufficientWaste { kind: waste_in, needed: 1, available: ledger.waste(waste_in) });
    }
    ledger.debit(&TokenBag::of(&[(token_in, 1)]), TokenMode::Strict)?;
    ledger.take_waste(waste_in, 1)?;
    if let Some(w) = waste_out {
        ledger.add_waste(w, 1);
    }
    ledger.credit(&tokens_out);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mol::{parse_mol_with, serialize_mol, LineSep, ParseOptions};

    #[test]
    fn mint_arrow_and_sa() {
        let mut src = FreshNameSource::new();
        let a = mint(TokenType::Arrow, &mut src);
        assert_eq!(serialize_mol(&a.graph, LineSep::Comma), "Arrow _0 _0");
        assert_eq!(a.names.len(), 1);
        let sa = mint(TokenType::SA, &mut src);
        assert_eq!(serialize_mol(&sa.graph, LineSep::Comma), "S _1 _2 _1, A _3 _2 _3");
        assert_eq!(sa.names.len(), 3);
        assert!(a.names.iter().all(|n| !sa.names.contains(n)));
        assert_eq!(src.issued(), 4);
    }

    #[test]
    fn names_carried_match_forms() {
        let mut src = FreshNameSource::new();
        for t in TokenType::ALL {
            let inst = mint(t, &mut src);
            assert_eq!(inst.names.len(), t.names_carried(), "{t}");
            assert_eq!(inst.graph.len(), t.nodes_embodied(), "{t}");
            assert!(crate::mol::validate(&inst.graph).is_valid(), "{t}");
        }
    }

    #[test]
    fn untagging() {
        assert_eq!(untagged("x_12"), "x");
        assert_eq!(untagged("_12"), "_12");
        assert_eq!(untagged("foo"), "foo");
        assert_eq!(untagged("x_y"), "x_y");
    }

    #[test]
    fn above_skips_existing_mints() {
        let g = crate::mol::parse_mol_with(
            "I _7, A _7 x_9 r, FRIN x_9, FROUT r",
            crate::mol::ParseOptions { allow_reserved: true },
        )
        .unwrap();
        let mut src = FreshNameSource::above(&g);
        assert_eq!(src.fresh().as_str(), "_10");
    }

    #[test]
    fn ss_aa_token_rewrite() {
        let mut l = Ledger::new(FreshNameSource::new());
        l.deposit(TokenType::SS, 1);
        l.deposit(TokenType::AA, 1);
        token_rewrite_ss_aa(&mut l).unwrap();
        assert_eq!(l.tokens(), &TokenBag::of(&[(TokenType::SA, 2)]));

        let mut l = Ledger::new(FreshNameSource::new());
        l.credit(&TokenBag::of(&[(TokenType::SS, 2), (TokenType::AA, 1), (TokenType::SA, 1)]));
        token_rewrite_ss_aa(&mut l).unwrap();
        assert_eq!(l.tokens(), &TokenBag::of(&[(TokenType::SS, 1), (TokenType::SA, 3)]));

        let mut l = Ledger::new(FreshNameSource::new());
        l.deposit(TokenType::SS, 1);
        assert!(matches!(token_rewrite_ss_aa(&mut l), Err(LedgerError::InsufficientTokens { .. })));
        assert_eq!(l.count(TokenType::SS), 1);
    }

    #[test]
    fn strict_debit_leaves_ledger_untouched_on_failure() {
        let mut l = Ledger::new(FreshNameSource::new());
        l.deposit(TokenType::Arrow, 1);
        let bag = TokenBag::of(&[(TokenType::Arrow, 2)]);
        assert!(l.debit(&bag, TokenMode::Strict).is_err());
        assert_eq!(l.count(TokenType::Arrow), 1);
        let mints = l.debit(&bag, TokenMode::Open).unwrap();
        assert_eq!(mints, vec![AutoMint { token: TokenType::Arrow, count: 1 }]);
        assert_eq!(l.count(TokenType::Arrow), 0);
        assert_eq!(l.auto_minted(), TokenBag::of(&[(TokenType::Arrow, 1)]));
    }

    #[test]
    fn waste_equations() {
        let mut l = Ledger::new(FreshNameSource::new());
        l.add_waste(WasteKind::KK, 1);
        l.deposit(TokenType::SS, 1);
        waste_rewrite(WasteEquation::KkSs, &mut l).unwrap();
        assert_eq!(l.tokens(), &TokenBag::of(&[(TokenType::SK, 2)]));
        assert_eq!(l.waste(WasteKind::KK), 0);

        let mut l = Ledger::new(FreshNameSource::new());
        l.add_waste(WasteKind::IK, 1);
        l.deposit(TokenType::AA, 1);
        waste_rewrite(WasteEquation::IkAa, &mut l).unwrap();
        assert_eq!(l.waste(WasteKind::AK), 1);
        assert_eq!(l.tokens(), &TokenBag::of(&[(TokenType::IA, 1)]));

        let mut l = Ledger::new(FreshNameSource::new());
        l.add_waste(WasteKind::AK, 1);
        assert!(matches!(waste_rewrite(WasteEquation::AkSs, &mut l), Err(LedgerError::InsufficientTokens { .. })));
        assert_eq!(l.waste(WasteKind::AK), 1);
    }

    #[test]
    fn ledger_json_shape() {
        let mut l = Ledger::new(FreshNameSource::new());
        l.deposit(TokenType::SA, 2);
        l.add_waste(WasteKind::II, 1);
        let v = serde_json::to_value(&l).unwrap();
        assert_eq!(v["S-A"], 2);
        assert_eq!(v["Arrow"], 0);
        assert_eq!(v["waste"]["I-I"], 1);
        assert_eq!(v["mintCount"], 0);
    }

    #[test]
    fn plain_names_reparse() {
        let g = parse_mol_with(
            "FRIN x_3, FRIN x_5, A x_3 x_5 _0, FROUT _0, K 1, K 1",
            ParseOptions { allow_reserved: true },
        )
        .unwrap();
        let p = plain_names(&g);
        assert_eq!(serialize_mol(&p, LineSep::Comma), "FRIN x, FRIN 2, A x 2 3, FROUT 3, K 1, K 1");
        assert_eq!(parse_mol(&serialize_mol(&p, LineSep::Newline)).unwrap(), p);
        assert!(crate::mol::isomorphic(&g, &p));
    }
}
