//! Translation of query algebra into condensed plans.
//!
//! Plans work over typed columns. A variable bound from the data positions
//! of a quad carries a plain id (`v$x`); a graph variable carries the
//! condensed pair of a graph id and a validity bitstring (`ng$x`, `bs$x`).
//! Joins align representations by lowering the condensed side, combine
//! shared bitstrings with bitwise AND, and guard every produced bitstring
//! with a nonzero-popcount filter. Grouping lowers condensed keys and
//! counts through bitstring popcounts.

use thiserror::Error;

use crate::algebra::{AlgebraNode, CountArg, GraphTerm, Projection, QuadPatternNode, TermOrVar};
use crate::store::Store;
use crate::term::{Term, TermId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("unknown variable ?{0}")]
    UnknownVariable(String),
    #[error("variable ?{0} is used both as the graph and in a data position of one pattern")]
    MixedGraphVariable(String),
}

/// Representation of a variable inside a plan. The order matters for join
/// alignment: the side with the greater representation is lowered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Repr {
    Id,
    Condensed,
}

/// One output column of a plan node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanCol {
    /// Plain id column `v$var`.
    Id { var: String },
    /// Condensed pair `ng$var`, `bs$var`. Anonymous pairs track the
    /// validity of scans whose graph position is bound; they have no
    /// user-visible variable and always pass through projections.
    Condensed { var: String, anonymous: bool },
    /// Aggregate output `agg{n}`, projected as `v$alias`.
    Agg { name: String, alias: String },
}

impl PlanCol {
    /// The variable or alias this column answers for.
    pub fn var(&self) -> &str {
        match self {
            PlanCol::Id { var } | PlanCol::Condensed { var, .. } => var,
            PlanCol::Agg { alias, .. } => alias,
        }
    }

    pub fn repr(&self) -> Repr {
        match self {
            PlanCol::Condensed { .. } => Repr::Condensed,
            _ => Repr::Id,
        }
    }

    fn is_anonymous(&self) -> bool {
        matches!(self, PlanCol::Condensed { anonymous: true, .. })
    }
}

/// A pattern position: a variable or a term resolved against the
/// dictionary. A bound term absent from the dictionary keeps `id: None`
/// and makes the scan unsatisfiable (the query simply has no answers).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternBinding {
    Var(String),
    Term { term: Term, id: Option<TermId> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanSource {
    Quads,
    Metadata,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanNode {
    pub source: ScanSource,
    /// Subject, predicate, object.
    pub spo: [PatternBinding; 3],
    /// Graph position; `None` for metadata scans.
    pub graph: Option<PatternBinding>,
    /// Positions within `spo` constrained to be equal because they hold
    /// the same variable: (first occurrence, repeat).
    pub same_var: Vec<(usize, usize)>,
    cols: Vec<PlanCol>,
}

impl ScanNode {
    /// True when a bound term was not found in the dictionary.
    pub fn unsatisfiable(&self) -> bool {
        let missing =
            |b: &PatternBinding| matches!(b, PatternBinding::Term { id: None, .. });
        self.spo.iter().any(missing) || self.graph.as_ref().is_some_and(missing)
    }

    pub fn columns(&self) -> &[PlanCol] {
        &self.cols
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitJoinNode {
    pub left: Box<PlanNode>,
    pub right: Box<PlanNode>,
    /// Shared variables joined on id equality.
    pub id_keys: Vec<String>,
    /// Shared condensed variables: joined on graph-id equality, with the
    /// output bitstring the AND of both sides.
    pub cond_keys: Vec<String>,
    cols: Vec<PlanCol>,
}

impl BitJoinNode {
    pub fn columns(&self) -> &[PlanCol] {
        &self.cols
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerNode {
    pub sub: Box<PlanNode>,
    pub var: String,
    cols: Vec<PlanCol>,
}

impl LowerNode {
    pub fn columns(&self) -> &[PlanCol] {
        &self.cols
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggSpec {
    /// Output column name, `agg0`, `agg1`, ...
    pub name: String,
    pub alias: String,
    pub arg: CountArg,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupByNode {
    pub sub: Box<PlanNode>,
    pub keys: Vec<String>,
    pub aggregates: Vec<AggSpec>,
    cols: Vec<PlanCol>,
}

impl GroupByNode {
    pub fn columns(&self) -> &[PlanCol] {
        &self.cols
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalizeNode {
    pub sub: Box<PlanNode>,
    pub projected: Vec<String>,
    cols: Vec<PlanCol>,
}

impl FinalizeNode {
    pub fn columns(&self) -> &[PlanCol] {
        &self.cols
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanNode {
    Scan(ScanNode),
    BitJoin(BitJoinNode),
    Lower(LowerNode),
    GroupBy(GroupByNode),
    Finalize(FinalizeNode),
}

impl PlanNode {
    pub fn columns(&self) -> &[PlanCol] {
        match self {
            PlanNode::Scan(n) => &n.cols,
            PlanNode::BitJoin(n) => &n.cols,
            PlanNode::Lower(n) => &n.cols,
            PlanNode::GroupBy(n) => &n.cols,
            PlanNode::Finalize(n) => &n.cols,
        }
    }

    pub fn column_for(&self, var: &str) -> Option<&PlanCol> {
        self.columns().iter().find(|c| c.var() == var)
    }

    /// Canonical one-node-per-line rendering, for snapshots and --explain.
    pub fn explain(&self) -> String {
        let mut out = String::new();
        self.explain_into(&mut out, 0);
        out
    }

    fn explain_into(&self, out: &mut String, depth: usize) {
        let indent = "  ".repeat(depth);
        match self {
            PlanNode::Scan(n) => {
                let source = match n.source {
                    ScanSource::Quads => "versioned_quad",
                    ScanSource::Metadata => "metadata",
                };
                let binding = |b: &PatternBinding| match b {
                    PatternBinding::Var(v) => format!("?{v}"),
                    PatternBinding::Term { term, .. } => term.to_string(),
                };
                let mut positions = format!(
                    "s={}, p={}, o={}",
                    binding(&n.spo[0]),
                    binding(&n.spo[1]),
                    binding(&n.spo[2])
                );
                if let Some(g) = &n.graph {
                    positions.push_str(&format!(", g={}", binding(g)));
                }
                let note = if n.unsatisfiable() { " [empty: term not in dictionary]" } else { "" };
                out.push_str(&format!("{indent}Scan {source} ({positions}){note}\n"));
            }
            PlanNode::BitJoin(n) => {
                out.push_str(&format!(
                    "{indent}BitJoin id_keys=[{}] bitand_keys=[{}]\n",
                    n.id_keys.join(", "),
                    n.cond_keys.join(", ")
                ));
                n.left.explain_into(out, depth + 1);
                n.right.explain_into(out, depth + 1);
            }
            PlanNode::Lower(n) => {
                out.push_str(&format!("{indent}Lower ?{}\n", n.var));
                n.sub.explain_into(out, depth + 1);
            }
            PlanNode::GroupBy(n) => {
                let aggs: Vec<String> = n
                    .aggregates
                    .iter()
                    .map(|a| {
                        let arg = match &a.arg {
                            CountArg::Var(v) => format!("?{v}"),
                            CountArg::Star => "*".to_string(),
                        };
                        format!("{}=COUNT({arg})", a.name)
                    })
                    .collect();
                out.push_str(&format!(
                    "{indent}GroupBy keys=[{}] aggs=[{}]\n",
                    n.keys.join(", "),
                    aggs.join(", ")
                ));
                n.sub.explain_into(out, depth + 1);
            }
            PlanNode::Finalize(n) => {
                out.push_str(&format!("{indent}Finalize [{}]\n", n.projected.join(", ")));
                n.sub.explain_into(out, depth + 1);
            }
        }
    }
}

/// Translates an algebra tree into a condensed plan rooted at a Finalize
/// node. Trees without an explicit projection finalize all variables in
/// scope, in first-mention order.
pub fn plan(algebra: &AlgebraNode, store: &Store) -> Result<PlanNode, PlanError> {
    let mut scan_ordinal = 0;
    let node = translate(algebra, store, &mut scan_ordinal)?;
    match node {
        finalized @ PlanNode::Finalize(_) => Ok(finalized),
        other => {
            let all: Vec<String> =
                other.columns().iter().filter(|c| !c.is_anonymous()).map(|c| c.var().to_string()).collect();
            finalize(other, &all)
        }
    }
}

fn translate(
    algebra: &AlgebraNode,
    store: &Store,
    scan_ordinal: &mut usize,
) -> Result<PlanNode, PlanError> {
    match algebra {
        AlgebraNode::QuadPattern(qp) => {
            let ordinal = *scan_ordinal;
            *scan_ordinal += 1;
            plan_quad_pattern(qp, store, ordinal)
        }
        AlgebraNode::Join { left, right } => {
            let left = translate(left, store, scan_ordinal)?;
            let right = translate(right, store, scan_ordinal)?;
            plan_join(left, right)
        }
        AlgebraNode::Group { sub, keys, aggregates } => {
            let sub = translate(sub, store, scan_ordinal)?;
            let aggregates: Vec<(String, CountArg)> =
                aggregates.iter().map(|a| (a.alias.clone(), a.arg.clone())).collect();
            plan_group(sub, keys, &aggregates)
        }
        AlgebraNode::Project { sub, projection } => {
            let planned = translate(sub, store, scan_ordinal)?;
            let names: Vec<String> = match projection {
                Projection::All => planned
                    .columns()
                    .iter()
                    .filter(|c| !c.is_anonymous())
                    .map(|c| c.var().to_string())
                    .collect(),
                Projection::Vars(names) => names.clone(),
            };
            finalize(planned, &names)
        }
    }
}

/// Plans a single quad pattern as an index scan. Patterns whose graph is
/// the metadata marker scan the metadata relation and carry no validity;
/// all other patterns scan the versioned quads, with the graph variable
/// in condensed representation and an implicit nonzero-validity filter.
pub fn plan_quad_pattern(
    qp: &QuadPatternNode,
    store: &Store,
    scan_ordinal: usize,
) -> Result<PlanNode, PlanError> {
    let dict = store.dictionary();
    let resolve = |tv: &TermOrVar| match tv {
        TermOrVar::Var(name) => PatternBinding::Var(name.clone()),
        TermOrVar::Term(term) => {
            PatternBinding::Term { term: term.clone(), id: dict.lookup(term) }
        }
    };
    let spo = [resolve(&qp.s), resolve(&qp.p), resolve(&qp.o)];

    let mut cols: Vec<PlanCol> = Vec::new();
    let mut same_var: Vec<(usize, usize)> = Vec::new();
    let mut seen: Vec<(String, usize)> = Vec::new();
    for (pos, binding) in spo.iter().enumerate() {
        if let PatternBinding::Var(name) = binding {
            match seen.iter().find(|(n, _)| n == name) {
                Some(&(_, first)) => same_var.push((first, pos)),
                None => {
                    seen.push((name.clone(), pos));
                    cols.push(PlanCol::Id { var: name.clone() });
                }
            }
        }
    }

    match &qp.g {
        GraphTerm::Metadata => Ok(PlanNode::Scan(ScanNode {
            source: ScanSource::Metadata,
            spo,
            graph: None,
            same_var,
            cols,
        })),
        GraphTerm::Var(name) => {
            if seen.iter().any(|(n, _)| n == name) {
                return Err(PlanError::MixedGraphVariable(name.clone()));
            }
            cols.push(PlanCol::Condensed { var: name.clone(), anonymous: false });
            Ok(PlanNode::Scan(ScanNode {
                source: ScanSource::Quads,
                spo,
                graph: Some(PatternBinding::Var(name.clone())),
                same_var,
                cols,
            }))
        }
        GraphTerm::Iri(iri) => {
            let term = Term::iri(iri.clone());
            let id = dict.lookup(&term);
            // bound graph: the validity still rides along under an
            // anonymous condensed pair so multiplicity is preserved; the
            // '$' cannot occur in parsed variable names, so no clash
            cols.push(PlanCol::Condensed { var: format!("$q{scan_ordinal}"), anonymous: true });
            Ok(PlanNode::Scan(ScanNode {
                source: ScanSource::Quads,
                spo,
                graph: Some(PatternBinding::Term { term, id }),
                same_var,
                cols,
            }))
        }
    }
}

/// Joins two subplans. Shared variables with differing representations
/// are first aligned by lowering the condensed side; shared id variables
/// become equality keys; shared condensed variables join on graph id and
/// AND their bitstrings.
pub fn plan_join(mut left: PlanNode, mut right: PlanNode) -> Result<PlanNode, PlanError> {
    let shared: Vec<String> = left
        .columns()
        .iter()
        .filter(|c| !c.is_anonymous())
        .map(|c| c.var().to_string())
        .filter(|v| right.column_for(v).is_some_and(|c| !c.is_anonymous()))
        .collect();

    for var in &shared {
        let l_repr = left.column_for(var).unwrap().repr();
        let r_repr = right.column_for(var).unwrap().repr();
        if l_repr < r_repr {
            right = lower(right, var);
        } else if r_repr < l_repr {
            left = lower(left, var);
        }
    }

    let mut id_keys = Vec::new();
    let mut cond_keys = Vec::new();
    for var in &shared {
        match left.column_for(var).unwrap().repr() {
            Repr::Id => id_keys.push(var.clone()),
            Repr::Condensed => cond_keys.push(var.clone()),
        }
    }

    let mut cols = left.columns().to_vec();
    for col in right.columns() {
        if !shared.iter().any(|v| v == col.var()) {
            cols.push(col.clone());
        }
    }
    Ok(PlanNode::BitJoin(BitJoinNode {
        left: Box::new(left),
        right: Box::new(right),
        id_keys,
        cond_keys,
        cols,
    }))
}

/// Rewrites a condensed variable to id representation: one output row per
/// set validity bit, carrying the id of the versioned named graph for
/// that (graph, version). The `ng$`/`bs$` pair is consumed.
///
/// Panics if `var` is not a condensed column of `sub`; callers align
/// representations only for variables they just looked up.
pub fn lower(sub: PlanNode, var: &str) -> PlanNode {
    let cols: Vec<PlanCol> = sub
        .columns()
        .iter()
        .map(|c| match c {
            PlanCol::Condensed { var: v, .. } if v == var => PlanCol::Id { var: v.clone() },
            other => other.clone(),
        })
        .collect();
    assert!(
        matches!(sub.column_for(var), Some(PlanCol::Condensed { .. })),
        "lower(..) requires a condensed variable, got ?{var}"
    );
    PlanNode::Lower(LowerNode { sub: Box::new(sub), var: var.to_string(), cols })
}

/// Plans grouping. Condensed keys are lowered first; COUNT aggregates the
/// per-row multiplicity, the product of the popcounts of every bitstring
/// column still in scope (none in scope reduces to a plain row count).
pub fn plan_group(
    mut sub: PlanNode,
    keys: &[String],
    aggregates: &[(String, CountArg)],
) -> Result<PlanNode, PlanError> {
    for key in keys {
        match sub.column_for(key) {
            None => return Err(PlanError::UnknownVariable(key.clone())),
            Some(PlanCol::Condensed { .. }) => sub = lower(sub, key),
            Some(_) => {}
        }
    }
    for (_, arg) in aggregates {
        if let CountArg::Var(name) = arg {
            if sub.column_for(name).is_none() {
                return Err(PlanError::UnknownVariable(name.clone()));
            }
        }
    }
    let aggregates: Vec<AggSpec> = aggregates
        .iter()
        .enumerate()
        .map(|(i, (alias, arg))| AggSpec {
            name: format!("agg{i}"),
            alias: alias.clone(),
            arg: arg.clone(),
        })
        .collect();
    let mut cols: Vec<PlanCol> = keys.iter().map(|k| PlanCol::Id { var: k.clone() }).collect();
    cols.extend(
        aggregates
            .iter()
            .map(|a| PlanCol::Agg { name: a.name.clone(), alias: a.alias.clone() }),
    );
    Ok(PlanNode::GroupBy(GroupByNode { sub: Box::new(sub), keys: keys.to_vec(), aggregates, cols }))
}

/// Restricts the output to the projected variables (condensed variables
/// keep their pair). Anonymous validity columns always pass through: they
/// carry the version multiplicity of bound-graph patterns.
pub fn finalize(sub: PlanNode, projected: &[String]) -> Result<PlanNode, PlanError> {
    let mut cols = Vec::new();
    for name in projected {
        match sub.column_for(name) {
            None => return Err(PlanError::UnknownVariable(name.clone())),
            Some(col) => cols.push(col.clone()),
        }
    }
    for col in sub.columns() {
        if col.is_anonymous() {
            cols.push(col.clone());
        }
    }
    Ok(PlanNode::Finalize(FinalizeNode {
        sub: Box::new(sub),
        projected: projected.to_vec(),
        cols,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::sample;

    fn sample_plan(query: &str) -> PlanNode {
        let store = sample::sample_store();
        plan(&parse(query).unwrap(), &store).unwrap()
    }

    #[test]
    fn quad_pattern_scan_columns_and_predicate() {
        let store = sample::sample_store();
        let algebra = parse(sample::QUERY_KNOWS).unwrap();
        let AlgebraNode::QuadPattern(qp) = &algebra else { panic!() };
        let node = plan_quad_pattern(qp, &store, 0).unwrap();
        let PlanNode::Scan(scan) = &node else { panic!("expected scan") };
        assert_eq!(scan.source, ScanSource::Quads);
        assert!(!scan.unsatisfiable());
        match &scan.spo[1] {
            PatternBinding::Term { id, .. } => {
                assert_eq!(*id, store.dictionary().lookup(&Term::iri("ex:knows")));
            }
            other => panic!("predicate should be bound, got {other:?}"),
        }
        assert_eq!(
            node.columns(),
            &[
                PlanCol::Id { var: "s".into() },
                PlanCol::Id { var: "o".into() },
                PlanCol::Condensed { var: "g".into(), anonymous: false },
            ]
        );
    }

    #[test]
    fn metadata_pattern_scans_metadata_without_validity() {
        let store = sample::sample_store();
        let algebra = parse("?x <v:in-version> ?v <ng:Metadata> .").unwrap();
        let AlgebraNode::QuadPattern(qp) = &algebra else { panic!() };
        let node = plan_quad_pattern(qp, &store, 0).unwrap();
        let PlanNode::Scan(scan) = &node else { panic!("expected scan") };
        assert_eq!(scan.source, ScanSource::Metadata);
        assert!(scan.graph.is_none());
        assert_eq!(
            node.columns(),
            &[PlanCol::Id { var: "x".into() }, PlanCol::Id { var: "v".into() }]
        );
    }

    #[test]
    fn fully_bound_pattern_keeps_only_implicit_validity() {
        let node = sample_plan("<:alice> <ex:knows> <:bob> <:g1> .");
        let PlanNode::Finalize(f) = &node else { panic!() };
        assert!(f.projected.is_empty());
        assert_eq!(node.columns(), &[PlanCol::Condensed { var: "$q0".into(), anonymous: true }]);
    }

    #[test]
    fn unknown_term_plans_to_empty_scan() {
        let store = sample::sample_store();
        let algebra = parse("?s <ex:never-seen> ?o ?g .").unwrap();
        let AlgebraNode::QuadPattern(qp) = &algebra else { panic!() };
        let node = plan_quad_pattern(qp, &store, 0).unwrap();
        let PlanNode::Scan(scan) = &node else { panic!() };
        assert!(scan.unsatisfiable());
        assert!(node.explain().contains("[empty: term not in dictionary]"));
    }

    #[test]
    fn shared_condensed_graph_becomes_bitand_key() {
        let node = sample_plan(sample::QUERY_KNOWS_LIKES);
        let PlanNode::Finalize(f) = &node else { panic!() };
        let PlanNode::BitJoin(join) = f.sub.as_ref() else { panic!("expected join") };
        assert_eq!(join.id_keys, vec!["o"]);
        assert_eq!(join.cond_keys, vec!["g"]);
        // alignment soundness: both inputs keep ?g condensed
        assert_eq!(join.left.column_for("g").unwrap().repr(), Repr::Condensed);
        assert_eq!(join.right.column_for("g").unwrap().repr(), Repr::Condensed);
    }

    #[test]
    fn condensed_id_mismatch_lowers_the_condensed_side() {
        let node = sample_plan(sample::QUERY_KNOWS_VERSIONS);
        let PlanNode::Finalize(f) = &node else { panic!() };
        let PlanNode::BitJoin(join) = f.sub.as_ref() else { panic!("expected join") };
        assert_eq!(join.id_keys, vec!["g"]);
        assert!(join.cond_keys.is_empty());
        assert!(matches!(join.left.as_ref(), PlanNode::Lower(l) if l.var == "g"));
        assert!(node.explain().contains("Lower ?g"));
    }

    #[test]
    fn cartesian_join_passes_distinct_graph_bitstrings_through() {
        let node = sample_plan("?s <ex:knows> ?o ?g .\n?x <ex:likes> ?y ?h .");
        let PlanNode::Finalize(f) = &node else { panic!() };
        let PlanNode::BitJoin(join) = f.sub.as_ref() else { panic!("expected join") };
        assert!(join.id_keys.is_empty() && join.cond_keys.is_empty());
        let condensed: Vec<&str> = node
            .columns()
            .iter()
            .filter(|c| c.repr() == Repr::Condensed)
            .map(|c| c.var())
            .collect();
        assert_eq!(condensed, vec!["g", "h"]);
    }

    #[test]
    fn group_by_condensed_key_lowers_beneath_group() {
        let node = sample_plan("SELECT ?g (COUNT(?s) AS ?n) WHERE { ?s ?p ?o ?g } GROUP BY ?g");
        let PlanNode::Finalize(f) = &node else { panic!() };
        let PlanNode::GroupBy(group) = f.sub.as_ref() else { panic!("expected group") };
        assert!(matches!(group.sub.as_ref(), PlanNode::Lower(l) if l.var == "g"));
        assert_eq!(group.keys, vec!["g"]);
        assert_eq!(group.aggregates[0].name, "agg0");
    }

    #[test]
    fn listing_style_group_plan() {
        let node = sample_plan(sample::QUERY_COUNT_KNOWS);
        let PlanNode::Finalize(f) = &node else { panic!() };
        assert_eq!(f.projected, vec!["o", "count"]);
        let PlanNode::GroupBy(group) = f.sub.as_ref() else { panic!("expected group") };
        assert_eq!(group.keys, vec!["o"]);
        // the key is already an id column; no Lower is inserted
        assert!(matches!(group.sub.as_ref(), PlanNode::Scan(_)));
    }

    #[test]
    fn projection_errors_and_column_restriction() {
        let store = sample::sample_store();
        let algebra = parse("SELECT ?s ?o WHERE { ?s <ex:knows> ?o ?g }").unwrap();
        let node = plan(&algebra, &store).unwrap();
        assert_eq!(
            node.columns(),
            &[PlanCol::Id { var: "s".into() }, PlanCol::Id { var: "o".into() }]
        );

        let algebra = parse("SELECT ?nope WHERE { ?s <ex:knows> ?o ?g }").unwrap();
        assert_eq!(plan(&algebra, &store), Err(PlanError::UnknownVariable("nope".into())));
    }

    #[test]
    fn select_star_exposes_condensed_pairs() {
        let node = sample_plan("SELECT * WHERE { ?s <ex:knows> ?o ?g }");
        let PlanNode::Finalize(f) = &node else { panic!() };
        assert_eq!(f.projected, vec!["s", "o", "g"]);
        assert_eq!(
            node.columns().last().unwrap(),
            &PlanCol::Condensed { var: "g".into(), anonymous: false }
        );
    }

    #[test]
    fn graph_variable_reused_in_data_position_of_same_pattern_is_rejected() {
        let store = sample::sample_store();
        let algebra = parse("?g <ex:knows> ?o ?g .").unwrap();
        assert_eq!(plan(&algebra, &store), Err(PlanError::MixedGraphVariable("g".into())));
    }

    #[test]
    fn plans_are_deterministic() {
        let a = sample_plan(sample::QUERY_KNOWS_VERSIONS);
        let b = sample_plan(sample::QUERY_KNOWS_VERSIONS);
        assert_eq!(a, b);
        assert_eq!(a.explain(), b.explain());
    }

    #[test]
    fn explain_snapshot_for_metadata_join() {
        let expected = "\
Finalize [s, o, g, v]
  BitJoin id_keys=[g] bitand_keys=[]
    Lower ?g
      Scan versioned_quad (s=?s, p=ex:knows, o=?o, g=?g)
    Scan metadata (s=?g, p=v:in-version, o=?v)
";
        assert_eq!(sample_plan(sample::QUERY_KNOWS_VERSIONS).explain(), expected);
    }
}
