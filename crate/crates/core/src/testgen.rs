//! Seeded generation of random stores and subset queries, plus the
//! equivalence check between condensed execution and the flat baseline.
//! Drives the self-test command and the randomized suites.

use std::collections::BTreeMap;
use std::fmt;

use rand::prelude::*;

use crate::algebra::{AlgebraNode, Projection};
use crate::exec::{self, Cell, ExecOptions};
use crate::oracle::{materialize_flat, OracleResult};
use crate::parser::parse;
use crate::plan::plan;
use crate::store::{IngestOptions, Store, TermQuad};
use crate::term::Term;

#[derive(Debug, Clone)]
pub struct GenParams {
    pub max_versions: u32,
    pub max_quads: usize,
    pub max_graphs: usize,
    /// Probability that a master quad appears in any given version.
    pub persist_probability: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { max_versions: 5, max_quads: 60, max_graphs: 4, persist_probability: 0.6 }
    }
}

/// A failed equivalence trial, with enough context to reproduce it.
#[derive(Debug)]
pub struct Mismatch {
    pub query: String,
    pub details: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "query:\n{}\n{}", self.query, self.details)
    }
}

fn subject_pool() -> Vec<Term> {
    (0..6).map(|i| Term::iri(format!(":s{i}"))).collect()
}

fn predicate_pool() -> Vec<Term> {
    (0..4).map(|i| Term::iri(format!(":p{i}"))).collect()
}

fn object_pool() -> Vec<Term> {
    vec![
        Term::iri(":s0"),
        Term::iri(":s1"),
        Term::iri(":s2"),
        Term::literal("alpha"),
        Term::literal("beta"),
        Term::typed_literal("1", "http://www.w3.org/2001/XMLSchema#integer"),
        Term::lang_literal("chat", "fr"),
    ]
}

fn graph_pool(max_graphs: usize) -> Vec<Term> {
    (0..max_graphs.max(1)).map(|i| Term::iri(format!(":g{i}"))).collect()
}

/// Builds a store from random snapshots of a random master quad set.
pub fn random_store(rng: &mut impl Rng, params: &GenParams) -> Store {
    let subjects = subject_pool();
    let predicates = predicate_pool();
    let objects = object_pool();
    let graphs = graph_pool(params.max_graphs);

    let master_len = rng.gen_range(1..=params.max_quads);
    let master: Vec<TermQuad> = (0..master_len)
        .map(|_| {
            TermQuad::new(
                subjects.choose(rng).unwrap().clone(),
                predicates.choose(rng).unwrap().clone(),
                objects.choose(rng).unwrap().clone(),
                graphs.choose(rng).unwrap().clone(),
            )
        })
        .collect();

    let mut store = Store::new();
    let versions = rng.gen_range(1..=params.max_versions);
    for _ in 0..versions {
        let mut snapshot: Vec<TermQuad> = master
            .iter()
            .filter(|_| rng.gen_bool(params.persist_probability))
            .cloned()
            .collect();
        if snapshot.is_empty() {
            snapshot.push(master.choose(rng).unwrap().clone());
        }
        store.ingest_version(&snapshot).expect("generated snapshot ingests");
    }
    store
}

/// Builds a store whose versions share a fixed core of quads: every
/// version contains the whole core plus a random slice of the rest.
pub fn overlap_store(
    rng: &mut impl Rng,
    versions: u32,
    master_quads: usize,
    core_fraction: f64,
    max_graphs: usize,
) -> Store {
    let subjects = subject_pool();
    let predicates = predicate_pool();
    let objects = object_pool();
    let graphs = graph_pool(max_graphs);

    let master: Vec<TermQuad> = (0..master_quads)
        .map(|i| {
            TermQuad::new(
                Term::iri(format!(":s{i}")),
                predicates.choose(rng).unwrap().clone(),
                objects.choose(rng).unwrap().clone(),
                graphs.choose(rng).unwrap().clone(),
            )
        })
        .collect();
    let _ = subjects;
    let core_len = ((master_quads as f64) * core_fraction).round() as usize;

    let mut store = Store::new();
    for _ in 0..versions {
        let mut snapshot: Vec<TermQuad> = master[..core_len].to_vec();
        snapshot.extend(master[core_len..].iter().filter(|_| rng.gen_bool(0.5)).cloned());
        if snapshot.is_empty() {
            snapshot.push(master[0].clone());
        }
        store
            .ingest_version_with(&snapshot, IngestOptions::default())
            .expect("generated snapshot ingests");
    }
    store
}

fn term_text(term: &Term) -> String {
    if term.is_iri() {
        format!("<{}>", term.lexical())
    } else {
        term.to_string()
    }
}

/// A data term drawn from an actual stored quad, so patterns usually
/// match something.
fn sample_term(rng: &mut impl Rng, store: &Store, position: usize) -> Term {
    if store.quads().is_empty() || rng.gen_bool(0.1) {
        return Term::iri(":never-seen");
    }
    let quad = &store.quads()[rng.gen_range(0..store.quads().len())];
    let id = [quad.s, quad.p, quad.o, quad.g][position];
    store.dictionary().resolve(id).expect("stored id resolves").clone()
}

struct PatternSketch {
    s: String,
    p: String,
    o: String,
    g: String,
}

/// Generates a query over the store: a basic graph pattern, a pattern
/// block joined with the metadata relation, or a grouped COUNT.
pub fn random_query(rng: &mut impl Rng, store: &Store) -> String {
    let id_vars = ["x", "y", "z", "w"];
    let graph_vars = ["g", "h"];
    let mut used_graph_vars: Vec<&str> = Vec::new();

    let pattern_count = rng.gen_range(1..=3);
    let mut patterns: Vec<PatternSketch> = Vec::new();
    for _ in 0..pattern_count {
        let mut position = |pos: usize, bound_probability: f64| -> String {
            if rng.gen_bool(bound_probability) {
                term_text(&sample_term(rng, store, pos))
            } else {
                format!("?{}", id_vars.choose(rng).unwrap())
            }
        };
        let s = position(0, 0.25);
        let p = position(1, 0.6);
        let o = position(2, 0.25);
        let g = match rng.gen_range(0..4) {
            // bound graph
            0 => term_text(&sample_term(rng, store, 3)),
            // occasionally join a graph variable against data positions
            1 if !used_graph_vars.is_empty() && rng.gen_bool(0.2) => {
                format!("?{}", used_graph_vars.choose(rng).unwrap())
            }
            _ => {
                let var = graph_vars.choose(rng).unwrap();
                if !used_graph_vars.contains(var) {
                    used_graph_vars.push(var);
                }
                format!("?{var}")
            }
        };
        patterns.push(PatternSketch { s, p, o, g });
    }

    let mut lines: Vec<String> = patterns
        .iter()
        .map(|p| format!("{} {} {} {} .", p.s, p.p, p.o, p.g))
        .collect();

    let shape = rng.gen_range(0..3);
    if shape == 1 {
        // metadata-mixed join through a graph variable
        let graph_var = used_graph_vars.first().copied().unwrap_or("g");
        if !used_graph_vars.contains(&graph_var) {
            // make sure the variable actually occurs in a data pattern
            lines.push(format!("?x ?y ?z ?{graph_var} ."));
        }
        let meta_predicate =
            if rng.gen_bool(0.5) { "v:in-version" } else { "v:version-of" };
        lines.push(format!("?{graph_var} <{meta_predicate}> ?m <ng:Metadata> ."));
        return lines.join("\n");
    }
    if shape == 2 {
        // grouped count over one key
        let mut vars: Vec<String> = Vec::new();
        for line in &lines {
            for token in line.split_whitespace() {
                if let Some(name) = token.strip_prefix('?') {
                    let name = name.trim_end_matches('.').to_string();
                    if !name.is_empty() && !vars.contains(&name) {
                        vars.push(name);
                    }
                }
            }
        }
        if !vars.is_empty() {
            let key = vars.choose(rng).unwrap().clone();
            let counted = vars.choose(rng).unwrap().clone();
            let arg = if rng.gen_bool(0.3) { "*".to_string() } else { format!("?{counted}") };
            return format!(
                "SELECT ?{key} (COUNT({arg}) AS ?tally) WHERE {{\n{}\n}} GROUP BY ?{key}",
                lines.join("\n")
            );
        }
    }
    lines.join("\n")
}

type CanonicalRow = BTreeMap<String, String>;

fn bag(rows: Vec<CanonicalRow>) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for row in rows {
        let key = row
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

fn bag_diff(expected: &BTreeMap<String, usize>, got: &BTreeMap<String, usize>) -> String {
    let mut lines = Vec::new();
    for (row, n) in expected {
        let have = got.get(row).copied().unwrap_or(0);
        if have != *n {
            lines.push(format!("  expected x{n}, got x{have}: {row}"));
        }
    }
    for (row, n) in got {
        if !expected.contains_key(row) {
            lines.push(format!("  expected x0, got x{n}: {row}"));
        }
    }
    if lines.len() > 12 {
        let extra = lines.len() - 12;
        lines.truncate(12);
        lines.push(format!("  ... and {extra} more differing rows"));
    }
    lines.join("\n")
}

/// Names projected by a grouped query, when the query groups.
fn grouped_projection(algebra: &AlgebraNode) -> Option<Vec<String>> {
    match algebra {
        AlgebraNode::Group { .. } => Some(algebra.scope_variables()),
        AlgebraNode::Project { sub, projection } => match sub.as_ref() {
            AlgebraNode::Group { .. } => Some(match projection {
                Projection::All => sub.scope_variables(),
                Projection::Vars(names) => names.clone(),
            }),
            _ => None,
        },
        _ => None,
    }
}

/// Runs one query both ways and demands bag-equal results: the flattened
/// condensed execution against the naive evaluation over the flat store.
pub fn check_equivalence(store: &Store, query: &str) -> Result<(), Mismatch> {
    check_equivalence_with(store, query, &ExecOptions::default())
}

pub fn check_equivalence_with(
    store: &Store,
    query: &str,
    options: &ExecOptions,
) -> Result<(), Mismatch> {
    let fail = |details: String| Mismatch { query: query.to_string(), details };

    let algebra = parse(query).map_err(|e| fail(format!("parse error: {e}")))?;
    let planned = plan(&algebra, store).map_err(|e| fail(format!("plan error: {e}")))?;
    let (table, _) = exec::execute_with_stats(&planned, store, options);
    let flat = materialize_flat(store);

    if let Some(projected) = grouped_projection(&algebra) {
        let OracleResult::Grouped(groups) = flat.evaluate(&algebra) else {
            return Err(fail("oracle did not group a grouped query".into()));
        };
        let expected: Vec<CanonicalRow> = groups
            .iter()
            .map(|(key, count)| {
                projected
                    .iter()
                    .map(|name| match key.get(name) {
                        Some(id) => (name.clone(), format!("id:{id}")),
                        None => (name.clone(), format!("n:{count}")),
                    })
                    .collect()
            })
            .collect();
        let got: Vec<CanonicalRow> = table
            .rows
            .iter()
            .map(|row| {
                projected
                    .iter()
                    .map(|name| {
                        let idx = table
                            .column_index(&format!("v${name}"))
                            .expect("projected column exists");
                        let value = match &row[idx] {
                            Cell::Id(id) => format!("id:{id}"),
                            Cell::Num(n) => format!("n:{n}"),
                            Cell::Bits(b) => format!("bs:{b}"),
                        };
                        (name.clone(), value)
                    })
                    .collect()
            })
            .collect();
        let expected = bag(expected);
        let got = bag(got);
        if expected != got {
            return Err(fail(format!(
                "grouped results differ:\n{}",
                bag_diff(&expected, &got)
            )));
        }
        return Ok(());
    }

    let OracleResult::Solutions(solutions) = flat.evaluate(&algebra) else {
        return Err(fail("oracle grouped an ungrouped query".into()));
    };
    let expected: Vec<CanonicalRow> = solutions
        .iter()
        .map(|binding| {
            binding.iter().map(|(var, id)| (var.clone(), format!("id:{id}"))).collect()
        })
        .collect();
    let got: Vec<CanonicalRow> = exec::flatten(&table)
        .into_iter()
        .map(|row| {
            let mut canonical: CanonicalRow = row
                .bindings
                .iter()
                .map(|(var, id)| (var.clone(), format!("id:{id}")))
                .collect();
            for (var, (graph, version)) in &row.graph_versions {
                if var.starts_with('$') {
                    continue; // anonymous validity of a bound-graph pattern
                }
                let vng = store
                    .vng_id_for(*graph, *version)
                    .expect("flattened pair is registered");
                canonical.insert(var.clone(), format!("id:{vng}"));
            }
            for (var, n) in &row.counts {
                canonical.insert(var.clone(), format!("n:{n}"));
            }
            canonical
        })
        .collect();
    let expected = bag(expected);
    let got = bag(got);
    if expected != got {
        return Err(fail(format!("results differ:\n{}", bag_diff(&expected, &got))));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_stores_respect_the_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = GenParams::default();
        for _ in 0..20 {
            let store = random_store(&mut rng, &params);
            let stats = store.stats();
            assert!(stats.version_count >= 1 && stats.version_count <= params.max_versions);
            assert!(stats.quad_count >= 1 && stats.quad_count <= params.max_quads as u64);
        }
    }

    #[test]
    fn generated_queries_parse_and_plan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let store = random_store(&mut rng, &GenParams::default());
        for _ in 0..100 {
            let query = random_query(&mut rng, &store);
            let algebra = parse(&query).unwrap_or_else(|e| {
                panic!("generated query failed to parse: {e}\n{query}")
            });
            plan(&algebra, &store).unwrap_or_else(|e| {
                panic!("generated query failed to plan: {e}\n{query}")
            });
        }
    }

    #[test]
    fn sample_queries_are_equivalent() {
        let store = crate::sample::sample_store();
        for query in [
            crate::sample::QUERY_KNOWS,
            crate::sample::QUERY_KNOWS_LIKES,
            crate::sample::QUERY_KNOWS_VERSIONS,
            crate::sample::QUERY_COUNT_KNOWS,
        ] {
            check_equivalence(&store, query).unwrap();
        }
    }

    #[test]
    fn quick_randomized_round() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let params = GenParams::default();
        for _ in 0..25 {
            let store = random_store(&mut rng, &params);
            let query = random_query(&mut rng, &store);
            if let Err(mismatch) = check_equivalence(&store, &query) {
                panic!("equivalence failed\n{mismatch}");
            }
        }
    }

    #[test]
    fn fault_hook_is_caught_by_the_harness() {
        let store = crate::sample::sample_store();
        let faulty = ExecOptions { fault_and_join: true };
        let result =
            check_equivalence_with(&store, crate::sample::QUERY_KNOWS_LIKES, &faulty);
        assert!(result.is_err(), "the corrupted AND route must be detected");
    }
}
