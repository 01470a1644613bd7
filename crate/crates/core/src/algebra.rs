//! Query algebra for the supported subset: quad patterns, joins, grouping
//! with COUNT, and projection.

use std::fmt::Write;

use crate::term::{escape_string, Term, TermKind};

/// A pattern position: either a variable or a concrete term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermOrVar {
    Var(String),
    Term(Term),
}

/// The graph position of a quad pattern. The reserved metadata IRI is
/// mapped to [`GraphTerm::Metadata`] by the parser.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphTerm {
    Var(String),
    Iri(String),
    Metadata,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadPatternNode {
    pub s: TermOrVar,
    pub p: TermOrVar,
    pub o: TermOrVar,
    pub g: GraphTerm,
}

/// Argument of a COUNT aggregate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CountArg {
    Var(String),
    Star,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregate {
    pub alias: String,
    pub arg: CountArg,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    All,
    /// Projected names in order: pattern variables or aggregate aliases.
    Vars(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgebraNode {
    QuadPattern(QuadPatternNode),
    Join { left: Box<AlgebraNode>, right: Box<AlgebraNode> },
    Group { sub: Box<AlgebraNode>, keys: Vec<String>, aggregates: Vec<Aggregate> },
    Project { sub: Box<AlgebraNode>, projection: Projection },
}

impl AlgebraNode {
    /// Variables visible at this node, in first-mention order. Grouping
    /// narrows the scope to its keys plus aggregate aliases.
    pub fn scope_variables(&self) -> Vec<String> {
        match self {
            AlgebraNode::QuadPattern(qp) => {
                let mut vars = Vec::new();
                let mut push = |name: &str| {
                    if !vars.iter().any(|v| v == name) {
                        vars.push(name.to_string());
                    }
                };
                for position in [&qp.s, &qp.p, &qp.o] {
                    if let TermOrVar::Var(name) = position {
                        push(name);
                    }
                }
                if let GraphTerm::Var(name) = &qp.g {
                    push(name);
                }
                vars
            }
            AlgebraNode::Join { left, right } => {
                let mut vars = left.scope_variables();
                for name in right.scope_variables() {
                    if !vars.contains(&name) {
                        vars.push(name);
                    }
                }
                vars
            }
            AlgebraNode::Group { keys, aggregates, .. } => {
                let mut vars = keys.clone();
                vars.extend(aggregates.iter().map(|a| a.alias.clone()));
                vars
            }
            AlgebraNode::Project { sub, projection } => match projection {
                Projection::All => sub.scope_variables(),
                Projection::Vars(names) => names.clone(),
            },
        }
    }

    /// Serializes to canonical query text; reparsing yields the same tree.
    /// The metadata marker is rendered with the default reserved IRI.
    pub fn to_query_text(&self) -> String {
        let (projection, inner) = match self {
            AlgebraNode::Project { sub, projection } => (Some(projection), sub.as_ref()),
            other => (None, other),
        };
        let (group, pattern_root) = match inner {
            AlgebraNode::Group { sub, keys, aggregates } => {
                (Some((keys, aggregates)), sub.as_ref())
            }
            other => (None, other),
        };
        let mut patterns = Vec::new();
        flatten_joins(pattern_root, &mut patterns);
        let pattern_lines: Vec<String> = patterns.iter().map(|qp| pattern_text(qp)).collect();

        if projection.is_none() && group.is_none() {
            return pattern_lines.join("\n");
        }

        let mut out = String::from("SELECT");
        let aggregates = group.map(|(_, aggs)| aggs.as_slice()).unwrap_or(&[]);
        match projection {
            None | Some(Projection::All) => out.push_str(" *"),
            Some(Projection::Vars(names)) => {
                for name in names {
                    match aggregates.iter().find(|a| &a.alias == name) {
                        Some(agg) => {
                            let arg = match &agg.arg {
                                CountArg::Var(v) => format!("?{v}"),
                                CountArg::Star => "*".to_string(),
                            };
                            write!(out, " (COUNT({arg}) AS ?{name})").unwrap();
                        }
                        None => write!(out, " ?{name}").unwrap(),
                    }
                }
            }
        }
        out.push_str("\nWHERE {\n");
        for line in &pattern_lines {
            writeln!(out, "  {line}").unwrap();
        }
        out.push('}');
        if let Some((keys, _)) = group {
            if !keys.is_empty() {
                out.push_str("\nGROUP BY");
                for key in keys {
                    write!(out, " ?{key}").unwrap();
                }
            }
        }
        out
    }
}

fn flatten_joins<'a>(node: &'a AlgebraNode, out: &mut Vec<&'a QuadPatternNode>) {
    match node {
        AlgebraNode::QuadPattern(qp) => out.push(qp),
        AlgebraNode::Join { left, right } => {
            flatten_joins(left, out);
            flatten_joins(right, out);
        }
        AlgebraNode::Group { sub, .. } | AlgebraNode::Project { sub, .. } => {
            flatten_joins(sub, out)
        }
    }
}

fn pattern_text(qp: &QuadPatternNode) -> String {
    let graph = match &qp.g {
        GraphTerm::Var(name) => format!("?{name}"),
        GraphTerm::Iri(iri) => format!("<{iri}>"),
        GraphTerm::Metadata => format!("<{}>", crate::parser::DEFAULT_METADATA_GRAPH_IRI),
    };
    format!(
        "{} {} {} {graph} .",
        term_or_var_text(&qp.s),
        term_or_var_text(&qp.p),
        term_or_var_text(&qp.o)
    )
}

fn term_or_var_text(position: &TermOrVar) -> String {
    match position {
        TermOrVar::Var(name) => format!("?{name}"),
        TermOrVar::Term(t) => match t.kind() {
            TermKind::Iri => format!("<{}>", t.lexical()),
            TermKind::Blank => format!("_:{}", t.lexical()),
            TermKind::Literal => {
                let mut out = format!("\"{}\"", escape_string(t.lexical()));
                if let Some(lang) = t.lang() {
                    write!(out, "@{lang}").unwrap();
                } else if let Some(dt) = t.datatype() {
                    write!(out, "^^<{dt}>").unwrap();
                }
                out
            }
        },
    }
}
