//! Mol text: one node per line, node type followed by its edge names.
//!
//! Lines may be separated by newlines, by `^` (the single-line form used by
//! the playground), or by `,` (the form rewrite patterns are written in).
//! A single line holding several nodes back to back is also accepted, since
//! arities make the split unambiguous.

use super::{EdgeName, MolGraph, Node, NodeType, RESERVED_PREFIX};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LineSep {
    #[default]
    Newline,
    Caret,
    Comma,
}

impl LineSep {
    fn as_str(self) -> &'static str {
        match self {
            LineSep::Newline => "\n",
            LineSep::Caret => " ^ ",
            LineSep::Comma => ", ",
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Accept edge names containing the reserved mint character. Off for
    /// user input; on when re-reading files the engine wrote.
    pub allow_reserved: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("empty mol input")]
    Empty,
    #[error("line {line}, column {column}: unknown node type `{found}`")]
    UnknownNodeType { line: usize, column: usize, found: String },
    #[error("line {line}: {ty} takes {expected} edge names, found {found}")]
    Arity { line: usize, ty: NodeType, expected: usize, found: usize },
    #[error("line {line}, column {column}: illegal edge name `{name}` (allowed: a-z, A-Z, 0-9)")]
    BadEdgeName { line: usize, column: usize, name: String },
    #[error("line {line}, column {column}: edge name `{name}` uses the reserved character `{RESERVED_PREFIX}`")]
    ReservedName { line: usize, column: usize, name: String },
}

struct Tok<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn segments(text: &str) -> Vec<Vec<Tok<'_>>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let mut seg = Vec::new();
        let mut start: Option<usize> = None;
        let mut col = 0;
        let mut byte_col = Vec::new();
        for (b, ch) in line.char_indices() {
            col += 1;
            byte_col.push((b, col));
            let sep = ch == '^' || ch == ',';
            if ch.is_whitespace() || sep {
                if let Some(s) = start.take() {
                    seg.push(tok(line, s, b, lineno, &byte_col));
                }
                if sep {
                    out.push(std::mem::take(&mut seg));
                }
            } else if start.is_none() {
                start = Some(b);
            }
        }
        if let Some(s) = start {
            seg.push(tok(line, s, line.len(), lineno, &byte_col));
        }
        out.push(seg);
    }
    out.retain(|s| !s.is_empty());
    out
}

fn tok<'a>(line: &'a str, s: usize, e: usize, lineno: usize, cols: &[(usize, usize)]) -> Tok<'a> {
    let column = cols.iter().find(|(b, _)| *b == s).map(|(_, c)| *c).unwrap_or(1);
    Tok { text: &line[s..e], line: lineno + 1, column }
}

fn edge_name(t: &Tok<'_>, opts: ParseOptions) -> Result<EdgeName, ParseError> {
    let ok = !t.text.is_empty() && t.text.chars().all(|c| c.is_ascii_alphanumeric() || c == RESERVED_PREFIX);
    if !ok {
        return Err(ParseError::BadEdgeName { line: t.line, column: t.column, name: t.text.into() });
    }
    if !opts.allow_reserved && t.text.contains(RESERVED_PREFIX) {
        return Err(ParseError::ReservedName { line: t.line, column: t.column, name: t.text.into() });
    }
    Ok(EdgeName::from(t.text))
}

fn node_type(t: &Tok<'_>) -> Result<NodeType, ParseError> {
    NodeType::from_name(t.text).ok_or_else(|| ParseError::UnknownNodeType {
        line: t.line,
        column: t.column,
        found: t.text.into(),
    })
}

/// Parses user-supplied mol text. Reserved (minted) edge names are rejected.
pub fn parse_mol(text: &str) -> Result<MolGraph, ParseError> {
    parse_mol_with(text, ParseOptions::default())
}

pub fn parse_mol_with(text: &str, opts: ParseOptions) -> Result<MolGraph, ParseError> {
    let segs = segments(text);
    if segs.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut g = MolGraph::new();

    // One segment holding more fields than its leading type needs: a flat
    // stream of nodes.
    if segs.len() == 1 {
        let toks = &segs[0];
        let ty = node_type(&toks[0])?;
        if toks.len() > ty.arity() + 1 {
            let mut i = 0;
            while i < toks.len() {
                let ty = node_type(&toks[i])?;
                let end = i + 1 + ty.arity();
                if end > toks.len() {
                    return Err(ParseError::Arity {
                        line: toks[i].line,
                        ty,
                        expected: ty.arity(),
                        found: toks.len() - i - 1,
                    });
                }
                let ports = toks[i + 1..end].iter().map(|t| edge_name(t, opts));
                g.add_node(Node::new(ty, ports.collect::<Result<Vec<_>, _>>()?));
                i = end;
            }
            return Ok(g);
        }
    }

    for toks in &segs {
        let ty = node_type(&toks[0])?;
        if toks.len() - 1 != ty.arity() {
            return Err(ParseError::Arity { line: toks[0].line, ty, expected: ty.arity(), found: toks.len() - 1 });
        }
        let ports = toks[1..].iter().map(|t| edge_name(t, opts));
        g.add_node(Node::new(ty, ports.collect::<Result<Vec<_>, _>>()?));
    }
    Ok(g)
}

pub fn serialize_mol(g: &MolGraph, sep: LineSep) -> String {
    let lines: Vec<String> = g.nodes().map(|(_, n)| n.to_string()).collect();
    lines.join(sep.as_str())
}
