//! Shared test support: an independent SKI reducer and the frozen corpus.
#![allow(dead_code)]

use chemski_core::mol::{validate, MolGraph};
use chemski_core::ski::{decode_root, frout_roots, parse_term, term_to_mol, SkiTerm};
use chemski_core::token::FreshNameSource;

/// Oracle terms, kept separate from the library's own term type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum T {
    S,
    K,
    I,
    V(String),
    Ap(Box<T>, Box<T>),
}

fn ap(f: T, a: T) -> T {
    T::Ap(Box::new(f), Box::new(a))
}

/// Minimal parser: atoms, identifiers, parentheses, left-associative
/// juxtaposition.
pub fn oracle_parse(text: &str) -> T {
    fn seq(toks: &[String], pos: &mut usize) -> T {
        let mut acc: Option<T> = None;
        while *pos < toks.len() && toks[*pos] != ")" {
            let item = if toks[*pos] == "(" {
                *pos += 1;
                let t = seq(toks, pos);
                *pos += 1;
                t
            } else {
                let t = match toks[*pos].as_str() {
                    "S" => T::S,
                    "K" => T::K,
                    "I" => T::I,
                    v => T::V(v.to_owned()),
                };
                *pos += 1;
                t
            };
            acc = Some(match acc {
                None => item,
                Some(f) => ap(f, item),
            });
        }
        acc.expect("nonempty group")
    }
    let toks: Vec<String> =
        text.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_owned).collect();
    seq(&toks, &mut 0)
}

pub fn oracle_show(t: &T) -> String {
    match t {
        T::S => "S".into(),
        T::K => "K".into(),
        T::I => "I".into(),
        T::V(v) => v.clone(),
        T::Ap(f, a) => match **a {
            T::Ap(..) => format!("{} ({})", oracle_show(f), oracle_show(a)),
            _ => format!("{} {}", oracle_show(f), oracle_show(a)),
        },
    }
}

fn root_step(t: &T) -> Option<T> {
    let T::Ap(f, a) = t else { return None };
    if **f == T::I {
        return Some((**a).clone());
    }
    if let T::Ap(f2, x) = &**f {
        if **f2 == T::K {
            return Some((**x).clone());
        }
        if let T::Ap(f3, x0) = &**f2 {
            if **f3 == T::S {
                let (x, y, z) = ((**x0).clone(), (**x).clone(), (**a).clone());
                return Some(ap(ap(x, z.clone()), ap(y, z)));
            }
        }
    }
    None
}

/// One leftmost-outermost step.
fn step(t: &T) -> Option<T> {
    if let Some(r) = root_step(t) {
        return Some(r);
    }
    let T::Ap(f, a) = t else { return None };
    if let Some(g) = step(f) {
        return Some(ap(g, (**a).clone()));
    }
    step(a).map(|b| ap((**f).clone(), b))
}

/// Normal-order normal form, or `None` if `fuel` steps do not suffice.
pub fn oracle_normal_form(t: &T, fuel: usize) -> Option<T> {
    let mut t = t.clone();
    for _ in 0..fuel {
        match step(&t) {
            Some(r) => t = r,
            None => return Some(t),
        }
    }
    None
}

pub struct CorpusEntry {
    pub term: String,
    /// Normal form recorded when the corpus was generated.
    pub recorded: String,
}

pub fn corpus() -> Vec<CorpusEntry> {
    include_str!("../data/corpus.txt")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (term, nf) = l.split_once('\t').expect("term<TAB>normal form");
            CorpusEntry { term: term.to_owned(), recorded: nf.to_owned() }
        })
        .collect()
}

pub fn mol_of(term: &str) -> MolGraph {
    term_to_mol(&parse_term(term).unwrap(), &mut FreshNameSource::new())
}

/// Decodes the graph's only FROUT root.
pub fn decode_single_root(g: &MolGraph) -> Result<SkiTerm, String> {
    let roots = frout_roots(g);
    if roots.len() != 1 {
        return Err(format!("{} FROUT roots", roots.len()));
    }
    decode_root(g, roots[0]).map_err(|e| e.to_string())
}

pub fn assert_valid(g: &MolGraph) {
    let r = validate(g);
    assert!(r.is_valid(), "invalid graph: {:?}\n{g}", r.errors);
}
