//! Brute-force baseline: one row per (quad, version), evaluated by plain
//! nested loops. This module exists to check the condensed path and is
//! kept deliberately naive; clarity beats speed here, always.

use std::collections::BTreeMap;

use crate::algebra::{AlgebraNode, GraphTerm, Projection, QuadPatternNode, TermOrVar};
use crate::store::Store;
use crate::term::TermId;

/// One row of the expanded baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatQuadRow {
    pub s: TermId,
    pub p: TermId,
    pub o: TermId,
    pub vng_id: TermId,
    pub graph_id: TermId,
    pub version_index: u32,
}

/// The flat baseline store. Dictionary and metadata are shared with the
/// condensed store it was derived from.
pub struct FlatStore<'a> {
    pub rows: Vec<FlatQuadRow>,
    pub store: &'a Store,
}

/// A solution: variable name to term id. Graph variables bind to the id
/// of the versioned-named-graph resource of their (graph, version).
pub type OracleBinding = BTreeMap<String, TermId>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleResult {
    Solutions(Vec<OracleBinding>),
    /// Grouped rows: key bindings plus the row count of the group.
    Grouped(Vec<(OracleBinding, u64)>),
}

/// Expands every condensed quad through the registry into per-version rows.
pub fn materialize_flat(store: &Store) -> FlatStore<'_> {
    let mut rows = Vec::new();
    for quad in store.quads() {
        for version_index in quad.validity.versions() {
            let vng_id = store
                .vng_id_for(quad.g, version_index)
                .expect("every set bit has a registered versioned graph");
            rows.push(FlatQuadRow {
                s: quad.s,
                p: quad.p,
                o: quad.o,
                vng_id,
                graph_id: quad.g,
                version_index,
            });
        }
    }
    FlatStore { rows, store }
}

impl<'a> FlatStore<'a> {
    pub fn evaluate(&self, algebra: &AlgebraNode) -> OracleResult {
        self.evaluate_counting(algebra).0
    }

    /// Evaluates and reports how many baseline rows the nested loops
    /// visited.
    pub fn evaluate_counting(&self, algebra: &AlgebraNode) -> (OracleResult, u64) {
        let mut visited = 0u64;
        let result = match algebra {
            AlgebraNode::Project { sub, projection } => {
                match self.eval_inner(sub, &mut visited) {
                    OracleResult::Solutions(rows) => {
                        let rows = match projection {
                            Projection::All => rows,
                            Projection::Vars(names) => rows
                                .into_iter()
                                .map(|b| {
                                    names
                                        .iter()
                                        .filter_map(|n| b.get(n).map(|&id| (n.clone(), id)))
                                        .collect()
                                })
                                .collect(),
                        };
                        OracleResult::Solutions(rows)
                    }
                    grouped => grouped,
                }
            }
            other => self.eval_inner(other, &mut visited),
        };
        (result, visited)
    }

    fn eval_inner(&self, algebra: &AlgebraNode, visited: &mut u64) -> OracleResult {
        match algebra {
            AlgebraNode::Group { sub, keys, aggregates: _ } => {
                let rows = self.eval_patterns(sub, visited);
                let mut order: Vec<OracleBinding> = Vec::new();
                let mut counts: BTreeMap<Vec<(String, TermId)>, u64> = BTreeMap::new();
                for binding in rows {
                    let key: OracleBinding = keys
                        .iter()
                        .filter_map(|k| binding.get(k).map(|&id| (k.clone(), id)))
                        .collect();
                    let flat_key: Vec<(String, TermId)> =
                        key.iter().map(|(k, v)| (k.clone(), *v)).collect();
                    if !counts.contains_key(&flat_key) {
                        order.push(key);
                    }
                    *counts.entry(flat_key).or_insert(0) += 1;
                }
                if keys.is_empty() && order.is_empty() {
                    order.push(OracleBinding::new());
                    counts.insert(Vec::new(), 0);
                }
                OracleResult::Grouped(
                    order
                        .into_iter()
                        .map(|key| {
                            let flat_key: Vec<(String, TermId)> =
                                key.iter().map(|(k, v)| (k.clone(), *v)).collect();
                            let count = counts[&flat_key];
                            (key, count)
                        })
                        .collect(),
                )
            }
            other => OracleResult::Solutions(self.eval_patterns(other, visited)),
        }
    }

    fn eval_patterns(&self, algebra: &AlgebraNode, visited: &mut u64) -> Vec<OracleBinding> {
        let mut patterns = Vec::new();
        collect_patterns(algebra, &mut patterns);
        let mut bindings = vec![OracleBinding::new()];
        for pattern in patterns {
            let mut next = Vec::new();
            for binding in &bindings {
                self.match_pattern(pattern, binding, &mut next, visited);
            }
            bindings = next;
        }
        bindings
    }

    fn match_pattern(
        &self,
        pattern: &QuadPatternNode,
        binding: &OracleBinding,
        out: &mut Vec<OracleBinding>,
        visited: &mut u64,
    ) {
        let dict = self.store.dictionary();
        let resolve = |tv: &TermOrVar| match tv {
            TermOrVar::Var(_) => Ok(None),
            // a term absent from the dictionary matches nothing
            TermOrVar::Term(t) => dict.lookup(t).map(Some).ok_or(()),
        };
        let (Ok(s), Ok(p), Ok(o)) =
            (resolve(&pattern.s), resolve(&pattern.p), resolve(&pattern.o))
        else {
            return;
        };

        let unify = |binding: &mut OracleBinding, position: &TermOrVar, value: TermId| -> bool {
            match position {
                TermOrVar::Term(_) => true,
                TermOrVar::Var(name) => match binding.get(name) {
                    Some(&bound) => bound == value,
                    None => {
                        binding.insert(name.clone(), value);
                        true
                    }
                },
            }
        };

        if pattern.g == GraphTerm::Metadata {
            for triple in self.store.metadata() {
                *visited += 1;
                if s.is_some_and(|id| id != triple.s)
                    || p.is_some_and(|id| id != triple.p)
                    || o.is_some_and(|id| id != triple.o)
                {
                    continue;
                }
                let mut extended = binding.clone();
                if unify(&mut extended, &pattern.s, triple.s)
                    && unify(&mut extended, &pattern.p, triple.p)
                    && unify(&mut extended, &pattern.o, triple.o)
                {
                    out.push(extended);
                }
            }
            return;
        }

        let bound_graph = match &pattern.g {
            GraphTerm::Iri(iri) => match dict.lookup(&crate::term::Term::iri(iri.clone())) {
                Some(id) => Some(id),
                None => return,
            },
            _ => None,
        };
        for row in &self.rows {
            *visited += 1;
            if s.is_some_and(|id| id != row.s)
                || p.is_some_and(|id| id != row.p)
                || o.is_some_and(|id| id != row.o)
                || bound_graph.is_some_and(|id| id != row.graph_id)
            {
                continue;
            }
            let mut extended = binding.clone();
            let mut ok = unify(&mut extended, &pattern.s, row.s)
                && unify(&mut extended, &pattern.p, row.p)
                && unify(&mut extended, &pattern.o, row.o);
            if let GraphTerm::Var(name) = &pattern.g {
                ok = ok
                    && match extended.get(name) {
                        Some(&bound) => bound == row.vng_id,
                        None => {
                            extended.insert(name.clone(), row.vng_id);
                            true
                        }
                    };
            }
            if ok {
                out.push(extended);
            }
        }
    }
}

fn collect_patterns<'a>(node: &'a AlgebraNode, out: &mut Vec<&'a QuadPatternNode>) {
    match node {
        AlgebraNode::QuadPattern(qp) => out.push(qp),
        AlgebraNode::Join { left, right } => {
            collect_patterns(left, out);
            collect_patterns(right, out);
        }
        AlgebraNode::Group { sub, .. } | AlgebraNode::Project { sub, .. } => {
            collect_patterns(sub, out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::sample;
    use crate::store::TermQuad;
    use crate::term::Term;

    #[test]
    fn sample_flattens_to_popcount_sum() {
        let store = sample::sample_store();
        let flat = materialize_flat(&store);
        // popcounts 3 + 2 + 2 + 1 + 2
        assert_eq!(flat.rows.len(), 10);
        assert_eq!(flat.rows.len() as u64, store.stats().flat_row_count);
    }

    #[test]
    fn empty_store_has_no_flat_rows() {
        let store = Store::new();
        assert!(materialize_flat(&store).rows.is_empty());
    }

    #[test]
    fn single_version_bit_lands_on_its_version() {
        let mut store = Store::new();
        let quad =
            TermQuad::new(Term::iri(":a"), Term::iri(":p"), Term::iri(":b"), Term::iri(":g"));
        store.ingest_version_with(&[], crate::store::IngestOptions { allow_empty: true, label: None }).unwrap();
        store.ingest_version(&[quad]).unwrap();
        let flat = materialize_flat(&store);
        assert_eq!(flat.rows.len(), 1);
        assert_eq!(flat.rows[0].version_index, 2);
        assert_eq!(store.quads()[0].validity.to_string(), "01");
    }

    #[test]
    fn single_pattern_yields_one_row_per_version() {
        let store = sample::sample_store();
        let flat = materialize_flat(&store);
        let algebra = parse(sample::QUERY_KNOWS).unwrap();
        let OracleResult::Solutions(rows) = flat.evaluate(&algebra) else { panic!() };
        // Σ popcount over the three matching quads: 3 + 1 + 2
        assert_eq!(rows.len(), 6);
    }

    #[test]
    fn shared_graph_join_matches_versions_pairwise() {
        let store = sample::sample_store();
        let flat = materialize_flat(&store);
        let algebra = parse(sample::QUERY_KNOWS_LIKES).unwrap();
        let OracleResult::Solutions(rows) = flat.evaluate(&algebra) else { panic!() };
        // the single condensed row of the worked example has validity 011
        assert_eq!(rows.len(), 2);
        let dict = store.dictionary();
        let mut versions: Vec<u32> = rows
            .iter()
            .map(|b| {
                let vng = b["g"];
                let (graph, version) = store.vng_entry(vng).unwrap();
                assert_eq!(dict.resolve(graph).unwrap().lexical(), ":g1");
                version
            })
            .collect();
        versions.sort();
        assert_eq!(versions, vec![2, 3]);
    }

    #[test]
    fn group_query_counts_rows_per_group() {
        let store = sample::sample_store();
        let flat = materialize_flat(&store);
        let algebra = parse(sample::QUERY_COUNT_KNOWS).unwrap();
        let OracleResult::Grouped(groups) = flat.evaluate(&algebra) else { panic!() };
        let dict = store.dictionary();
        let mut got: Vec<(String, u64)> = groups
            .into_iter()
            .map(|(key, count)| {
                (dict.resolve(key["o"]).unwrap().lexical().to_string(), count)
            })
            .collect();
        got.sort();
        let mut expected: Vec<(String, u64)> = sample::expected_count_knows()
            .into_iter()
            .map(|(o, n)| (o.to_string(), n))
            .collect();
        expected.sort();
        assert_eq!(got, expected);
    }
}
