//! SQL text generation for condensed plans, plus the schema DDL and CSV
//! export used to load a PostgreSQL backend.
//!
//! Emission is deterministic: aliases t0, t1, ... are assigned bottom-up
//! in emission order, clauses are assembled in a fixed order, and the
//! same plan always yields byte-identical text.

use std::fs;
use std::path::Path;

use crate::dictionary::term_digest;
use crate::plan::{
    BitJoinNode, FinalizeNode, GroupByNode, LowerNode, PatternBinding, PlanCol, PlanNode,
    ScanNode, ScanSource,
};
use crate::store::Store;
use crate::term::TermKind;

#[derive(Debug, Clone, Copy, Default)]
pub struct EmitOptions {
    /// Render bound terms as their resolved integer ids instead of
    /// dictionary subqueries.
    pub inline_ids: bool,
}

/// An emitted query and its output column names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqlQuery {
    pub text: String,
    pub columns: Vec<String>,
}

/// Emits executable SQL for a plan.
pub fn emit(plan: &PlanNode, options: &EmitOptions) -> SqlQuery {
    let mut emitter = Emitter { next_alias: 0, inline_ids: options.inline_ids };
    let (text, cols) = emitter.emit_select(plan);
    SqlQuery { text, columns: cols.into_iter().map(|c| c.name).collect() }
}

#[derive(Debug, Clone)]
struct SqlCol {
    name: String,
    expr: String,
    bits: bool,
}

/// A relation in flattenable form: base tables or derived tables with the
/// conjuncts split by role so joins can compose them the way the listings
/// do (popcount guards first, then join keys, then term conditions).
struct Rel {
    from: Vec<String>,
    /// Nonzero-popcount guards keyed by the bitstring column they protect.
    guards: Vec<(String, String)>,
    keys: Vec<String>,
    preds: Vec<String>,
    cols: Vec<SqlCol>,
}

impl Rel {
    fn col(&self, name: &str) -> &SqlCol {
        self.cols
            .iter()
            .find(|c| c.name == name)
            .unwrap_or_else(|| panic!("emitted relation lacks column {name}"))
    }
}

struct Emitter {
    next_alias: usize,
    inline_ids: bool,
}

impl Emitter {
    fn alias(&mut self) -> String {
        let alias = format!("t{}", self.next_alias);
        self.next_alias += 1;
        alias
    }

    /// Full SELECT text plus output columns for any node.
    fn emit_select(&mut self, node: &PlanNode) -> (String, Vec<SqlCol>) {
        match node {
            PlanNode::Scan(_) | PlanNode::BitJoin(_) => {
                let rel = self.emit_rel(node);
                (render(&rel), rel.cols)
            }
            PlanNode::Lower(lower) => self.emit_lower(lower),
            PlanNode::GroupBy(group) => self.emit_group(group),
            PlanNode::Finalize(finalize) => self.emit_finalize(finalize),
        }
    }

    /// Flattenable form: scans and joins merge into one FROM list; other
    /// nodes become derived tables.
    fn emit_rel(&mut self, node: &PlanNode) -> Rel {
        match node {
            PlanNode::Scan(scan) => self.emit_scan(scan),
            PlanNode::BitJoin(join) => self.emit_join(join),
            other => {
                let (text, cols) = self.emit_select(other);
                let alias = self.alias();
                let cols = cols
                    .into_iter()
                    .map(|c| SqlCol {
                        expr: format!("{alias}.{}", c.name),
                        name: c.name,
                        bits: c.bits,
                    })
                    .collect();
                Rel {
                    from: vec![format!("({text}) {alias}")],
                    guards: Vec::new(),
                    keys: Vec::new(),
                    preds: Vec::new(),
                    cols,
                }
            }
        }
    }

    fn term_sql(&self, binding: &PatternBinding) -> Option<String> {
        let PatternBinding::Term { term, id } = binding else { return None };
        if self.inline_ids {
            // no term ever has id 0, so an unresolved term matches nothing
            return Some(id.map(|i| i.to_string()).unwrap_or_else(|| "0".to_string()));
        }
        Some(format!(
            "(SELECT id_resource_or_literal FROM resource_or_literal WHERE digest = '{}')",
            term_digest(term)
        ))
    }

    fn emit_scan(&mut self, scan: &ScanNode) -> Rel {
        let alias = self.alias();
        let (table, position_cols): (&str, [&str; 4]) = match scan.source {
            ScanSource::Quads => (
                "versioned_quad",
                ["id_subject", "id_predicate", "id_object", "id_named_graph"],
            ),
            ScanSource::Metadata => ("metadata", ["id_subject", "id_predicate", "id_object", ""]),
        };

        let expr_for_var = |var: &str| -> String {
            for (pos, binding) in scan.spo.iter().enumerate() {
                if matches!(binding, PatternBinding::Var(v) if v == var) {
                    return format!("{alias}.{}", position_cols[pos]);
                }
            }
            unreachable!("scan column without a pattern position: ?{var}")
        };
        let mut cols = Vec::new();
        for col in scan.columns() {
            match col {
                PlanCol::Id { var } => cols.push(SqlCol {
                    name: format!("v${var}"),
                    expr: expr_for_var(var),
                    bits: false,
                }),
                PlanCol::Condensed { var, .. } => {
                    cols.push(SqlCol {
                        name: format!("ng${var}"),
                        expr: format!("{alias}.id_named_graph"),
                        bits: false,
                    });
                    cols.push(SqlCol {
                        name: format!("bs${var}"),
                        expr: format!("{alias}.validity"),
                        bits: true,
                    });
                }
                PlanCol::Agg { .. } => unreachable!("scans have no aggregate columns"),
            }
        }

        let mut guards = Vec::new();
        if scan.source == ScanSource::Quads {
            let bs_name = scan
                .columns()
                .iter()
                .find_map(|c| match c {
                    PlanCol::Condensed { var, .. } => Some(format!("bs${var}")),
                    _ => None,
                })
                .expect("quad scans carry a validity column");
            guards.push((bs_name, format!("bit_count({alias}.validity) <> 0")));
        }

        let mut preds = Vec::new();
        for (pos, binding) in scan.spo.iter().enumerate() {
            if let Some(rhs) = self.term_sql(binding) {
                preds.push(format!("{alias}.{} = {rhs}", position_cols[pos]));
            }
        }
        if let Some(graph) = &scan.graph {
            if let Some(rhs) = self.term_sql(graph) {
                preds.push(format!("{alias}.id_named_graph = {rhs}"));
            }
        }
        for &(a, b) in &scan.same_var {
            preds.push(format!("{alias}.{} = {alias}.{}", position_cols[a], position_cols[b]));
        }

        Rel { from: vec![format!("{table} {alias}")], guards, keys: Vec::new(), preds, cols }
    }

    fn emit_join(&mut self, join: &BitJoinNode) -> Rel {
        let left = self.emit_rel(&join.left);
        let right = self.emit_rel(&join.right);

        let mut keys: Vec<String> = Vec::new();
        for var in &join.id_keys {
            let name = format!("v${var}");
            keys.push(format!("{} = {}", left.col(&name).expr, right.col(&name).expr));
        }
        for var in &join.cond_keys {
            let name = format!("ng${var}");
            keys.push(format!("{} = {}", left.col(&name).expr, right.col(&name).expr));
        }

        // shared condensed variables: AND the bitstrings and replace the
        // per-side guards with one guard over the combination
        let mut combined_guards = Vec::new();
        let mut dropped_guards: Vec<String> = Vec::new();
        let mut combined_exprs: Vec<(String, String)> = Vec::new();
        for var in &join.cond_keys {
            let name = format!("bs${var}");
            let expr = format!("({} & {})", left.col(&name).expr, right.col(&name).expr);
            combined_guards.push((
                name.clone(),
                format!(
                    "bit_count({} & {}) <> 0",
                    left.col(&name).expr,
                    right.col(&name).expr
                ),
            ));
            dropped_guards.push(name.clone());
            combined_exprs.push((name, expr));
        }

        let mut cols = Vec::new();
        for col in join.columns() {
            match col {
                PlanCol::Id { var } => {
                    let name = format!("v${var}");
                    let expr = if left.cols.iter().any(|c| c.name == name) {
                        left.col(&name).expr.clone()
                    } else {
                        right.col(&name).expr.clone()
                    };
                    cols.push(SqlCol { name, expr, bits: false });
                }
                PlanCol::Condensed { var, .. } => {
                    for (name, bits) in [(format!("ng${var}"), false), (format!("bs${var}"), true)]
                    {
                        let expr = match combined_exprs.iter().find(|(n, _)| *n == name) {
                            Some((_, combined)) => combined.clone(),
                            None if left.cols.iter().any(|c| c.name == name) => {
                                left.col(&name).expr.clone()
                            }
                            None => right.col(&name).expr.clone(),
                        };
                        cols.push(SqlCol { name, expr, bits });
                    }
                }
                PlanCol::Agg { name, .. } => {
                    let expr = if left.cols.iter().any(|c| c.name == *name) {
                        left.col(name).expr.clone()
                    } else {
                        right.col(name).expr.clone()
                    };
                    cols.push(SqlCol { name: name.clone(), expr, bits: false });
                }
            }
        }

        let mut guards = combined_guards;
        for (name, guard) in left.guards.into_iter().chain(right.guards) {
            if !dropped_guards.contains(&name) {
                guards.push((name, guard));
            }
        }
        let mut all_keys = keys;
        all_keys.extend(left.keys);
        all_keys.extend(right.keys);
        let mut preds = left.preds;
        preds.extend(right.preds);
        let mut from = left.from;
        from.extend(right.from);

        Rel { from, guards, keys: all_keys, preds, cols }
    }

    fn emit_lower(&mut self, lower: &LowerNode) -> (String, Vec<SqlCol>) {
        let (sub_text, _) = self.emit_select(&lower.sub);
        let alias = self.alias();
        let mut cols = Vec::new();
        for col in lower.columns() {
            match col {
                PlanCol::Id { var } if var == &lower.var => cols.push(SqlCol {
                    name: format!("v${var}"),
                    expr: "vng.id_versioned_named_graph".to_string(),
                    bits: false,
                }),
                PlanCol::Id { var } => cols.push(SqlCol {
                    name: format!("v${var}"),
                    expr: format!("{alias}.v${var}"),
                    bits: false,
                }),
                PlanCol::Condensed { var, .. } => {
                    cols.push(SqlCol {
                        name: format!("ng${var}"),
                        expr: format!("{alias}.ng${var}"),
                        bits: false,
                    });
                    cols.push(SqlCol {
                        name: format!("bs${var}"),
                        expr: format!("{alias}.bs${var}"),
                        bits: true,
                    });
                }
                PlanCol::Agg { name, .. } => cols.push(SqlCol {
                    name: name.clone(),
                    expr: format!("{alias}.{name}"),
                    bits: false,
                }),
            }
        }
        let select_list = select_list(&cols);
        let text = format!(
            "SELECT {select_list} FROM ({sub_text}) {alias} \
             JOIN versioned_named_graph vng \
             ON {alias}.ng${var} = vng.id_named_graph \
             AND get_bit({alias}.bs${var}, vng.index_version - 1) = 1",
            var = lower.var
        );
        let cols =
            cols.into_iter().map(|c| SqlCol { expr: c.name.clone(), ..c }).collect();
        (text, cols)
    }

    fn emit_group(&mut self, group: &GroupByNode) -> (String, Vec<SqlCol>) {
        let (sub_text, sub_cols) = self.emit_select(&group.sub);
        let alias = self.alias();

        let bs_cols: Vec<&SqlCol> = sub_cols.iter().filter(|c| c.bits).collect();
        let count_expr = if bs_cols.is_empty() {
            "COUNT(*)".to_string()
        } else {
            let product = bs_cols
                .iter()
                .map(|c| format!("bit_count({})", c.name))
                .collect::<Vec<_>>()
                .join(" * ");
            format!("SUM({product})")
        };

        let mut items: Vec<String> = Vec::new();
        let mut out_cols = Vec::new();
        for key in &group.keys {
            let name = key_column(&sub_cols, key);
            items.push(name.clone());
            out_cols.push(SqlCol { expr: name.clone(), name, bits: false });
        }
        for agg in &group.aggregates {
            items.push(format!("{count_expr} AS {}", agg.name));
            out_cols.push(SqlCol { name: agg.name.clone(), expr: agg.name.clone(), bits: false });
        }

        let group_by = match group.keys.len() {
            0 => String::new(),
            1 => format!(" GROUP BY ({})", key_column(&sub_cols, &group.keys[0])),
            _ => {
                let keys: Vec<String> =
                    group.keys.iter().map(|k| key_column(&sub_cols, k)).collect();
                format!(" GROUP BY {}", keys.join(", "))
            }
        };
        let text =
            format!("SELECT {} FROM ({sub_text}) {alias}{group_by}", items.join(", "));
        (text, out_cols)
    }

    fn emit_finalize(&mut self, finalize: &FinalizeNode) -> (String, Vec<SqlCol>) {
        let (sub_text, _) = self.emit_select(&finalize.sub);
        let alias = self.alias();
        let mut items = Vec::new();
        let mut out_cols = Vec::new();
        for col in finalize.columns() {
            match col {
                PlanCol::Id { var } => {
                    let name = format!("v${var}");
                    items.push(name.clone());
                    out_cols.push(SqlCol { expr: name.clone(), name, bits: false });
                }
                PlanCol::Condensed { var, .. } => {
                    for (name, bits) in [(format!("ng${var}"), false), (format!("bs${var}"), true)]
                    {
                        items.push(name.clone());
                        out_cols.push(SqlCol { expr: name.clone(), name, bits });
                    }
                }
                PlanCol::Agg { name, alias: agg_alias } => {
                    let out = format!("v${agg_alias}");
                    items.push(format!("{name} AS {out}"));
                    out_cols.push(SqlCol { name: out.clone(), expr: out, bits: false });
                }
            }
        }
        let text = format!("SELECT {} FROM ({sub_text}) {alias}", items.join(", "));
        (text, out_cols)
    }
}

fn key_column(sub_cols: &[SqlCol], key: &str) -> String {
    let v_name = format!("v${key}");
    if sub_cols.iter().any(|c| c.name == v_name) {
        v_name
    } else {
        // grouping by an aggregate output of a nested group
        key.to_string()
    }
}

fn select_list(cols: &[SqlCol]) -> String {
    cols.iter()
        .map(|c| {
            if c.expr == c.name {
                c.name.clone()
            } else {
                format!("{} AS {}", c.expr, c.name)
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn render(rel: &Rel) -> String {
    let select = select_list(&rel.cols);
    let from = rel.from.join(", ");
    let mut conjuncts: Vec<&str> = rel.guards.iter().map(|(_, g)| g.as_str()).collect();
    conjuncts.extend(rel.keys.iter().map(|k| k.as_str()));
    conjuncts.extend(rel.preds.iter().map(|p| p.as_str()));
    if conjuncts.is_empty() {
        format!("SELECT {select} FROM {from}")
    } else {
        format!("SELECT {select} FROM {from} WHERE {}", conjuncts.join(" AND "))
    }
}

/// DDL for the five relations and their indexes: the six composite
/// permutations over (graph, subject, predicate, object) plus the digest
/// index of the dictionary. Bitstrings are sized to the store's current
/// version count.
pub fn emit_schema_ddl(version_count: u32) -> String {
    let width = version_count.max(1);
    let mut out = String::new();
    out.push_str(&format!(
        "CREATE TABLE IF NOT EXISTS resource_or_literal (\n\
         \x20 id_resource_or_literal BIGINT PRIMARY KEY,\n\
         \x20 name TEXT NOT NULL,\n\
         \x20 type TEXT NOT NULL,\n\
         \x20 datatype TEXT,\n\
         \x20 lang TEXT,\n\
         \x20 digest TEXT NOT NULL\n\
         );\n\
         CREATE TABLE IF NOT EXISTS versioned_quad (\n\
         \x20 id_subject BIGINT NOT NULL,\n\
         \x20 id_predicate BIGINT NOT NULL,\n\
         \x20 id_object BIGINT NOT NULL,\n\
         \x20 id_named_graph BIGINT NOT NULL,\n\
         \x20 validity BIT({width}) NOT NULL,\n\
         \x20 PRIMARY KEY (id_subject, id_predicate, id_object, id_named_graph)\n\
         );\n\
         CREATE TABLE IF NOT EXISTS version (\n\
         \x20 index_version INTEGER PRIMARY KEY,\n\
         \x20 label TEXT\n\
         );\n\
         CREATE TABLE IF NOT EXISTS versioned_named_graph (\n\
         \x20 id_versioned_named_graph BIGINT PRIMARY KEY,\n\
         \x20 id_named_graph BIGINT NOT NULL,\n\
         \x20 index_version INTEGER NOT NULL,\n\
         \x20 UNIQUE (id_named_graph, index_version)\n\
         );\n\
         CREATE TABLE IF NOT EXISTS metadata (\n\
         \x20 id_subject BIGINT NOT NULL,\n\
         \x20 id_predicate BIGINT NOT NULL,\n\
         \x20 id_object BIGINT NOT NULL\n\
         );\n"
    ));
    let index_orders = [
        ("gspo", "id_named_graph, id_subject, id_predicate, id_object"),
        ("gsop", "id_named_graph, id_subject, id_object, id_predicate"),
        ("gpos", "id_named_graph, id_predicate, id_object, id_subject"),
        ("gpso", "id_named_graph, id_predicate, id_subject, id_object"),
        ("gops", "id_named_graph, id_object, id_predicate, id_subject"),
        ("gosp", "id_named_graph, id_object, id_subject, id_predicate"),
    ];
    for (suffix, columns) in index_orders {
        out.push_str(&format!(
            "CREATE INDEX IF NOT EXISTS versioned_quad_{suffix} ON versioned_quad ({columns});\n"
        ));
    }
    out.push_str(
        "CREATE INDEX IF NOT EXISTS resource_or_literal_digest ON resource_or_literal (digest);\n",
    );
    out
}

/// Writes one CSV per relation into `dir`, suitable for COPY ... WITH
/// (FORMAT csv, HEADER true).
pub fn export_csv(store: &Store, dir: impl AsRef<Path>) -> std::io::Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;

    let mut writer = csv::Writer::from_path(dir.join("resource_or_literal.csv"))?;
    writer.write_record(["id_resource_or_literal", "name", "type", "datatype", "lang", "digest"])?;
    for (id, term) in store.dictionary().iter() {
        let kind = match term.kind() {
            TermKind::Iri => "resource",
            TermKind::Literal => "literal",
            TermKind::Blank => "blank",
        };
        writer.write_record([
            id.to_string().as_str(),
            term.lexical(),
            kind,
            term.datatype().unwrap_or(""),
            term.lang().unwrap_or(""),
            &term_digest(term),
        ])?;
    }
    writer.flush()?;

    let mut writer = csv::Writer::from_path(dir.join("versioned_quad.csv"))?;
    writer.write_record(["id_subject", "id_predicate", "id_object", "id_named_graph", "validity"])?;
    for quad in store.quads() {
        writer.write_record([
            quad.s.to_string(),
            quad.p.to_string(),
            quad.o.to_string(),
            quad.g.to_string(),
            quad.validity.to_string(),
        ])?;
    }
    writer.flush()?;

    let mut writer = csv::Writer::from_path(dir.join("version.csv"))?;
    writer.write_record(["index_version", "label"])?;
    for index in 1..=store.version_count() {
        writer.write_record([
            index.to_string().as_str(),
            store.version_label(index).unwrap_or(""),
        ])?;
    }
    writer.flush()?;

    let mut writer = csv::Writer::from_path(dir.join("versioned_named_graph.csv"))?;
    writer.write_record(["id_versioned_named_graph", "id_named_graph", "index_version"])?;
    for vng in store.vngs() {
        writer.write_record([
            vng.vng_id.to_string(),
            vng.graph_id.to_string(),
            vng.version_index.to_string(),
        ])?;
    }
    writer.flush()?;

    let mut writer = csv::Writer::from_path(dir.join("metadata.csv"))?;
    writer.write_record(["id_subject", "id_predicate", "id_object"])?;
    for triple in store.metadata() {
        writer.write_record([triple.s.to_string(), triple.p.to_string(), triple.o.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::plan::plan;
    use crate::sample;

    fn emit_sample(query: &str, options: &EmitOptions) -> SqlQuery {
        let store = sample::sample_store();
        emit(&plan(&parse(query).unwrap(), &store).unwrap(), options)
    }

    #[test]
    fn single_pattern_sql_has_the_guard_and_projection() {
        let sql = emit_sample(sample::QUERY_KNOWS, &EmitOptions::default());
        assert!(sql.text.contains("bit_count(t0.validity) <> 0"), "{}", sql.text);
        assert!(sql.text.contains("t0.validity AS bs$g"), "{}", sql.text);
        assert!(sql.text.contains("FROM versioned_quad t0"), "{}", sql.text);
        assert!(sql.text.contains("t0.id_predicate = (SELECT id_resource_or_literal FROM resource_or_literal WHERE digest = '"), "{}", sql.text);
        assert_eq!(sql.columns, vec!["v$s", "v$o", "ng$g", "bs$g"]);
    }

    #[test]
    fn join_sql_ands_validities_with_one_combined_guard() {
        let sql = emit_sample(sample::QUERY_KNOWS_LIKES, &EmitOptions::default());
        assert!(sql.text.contains("(t0.validity & t1.validity) AS bs$g"), "{}", sql.text);
        assert!(sql.text.contains("bit_count(t0.validity & t1.validity) <> 0"), "{}", sql.text);
        assert!(sql.text.contains("versioned_quad t0, versioned_quad t1"), "{}", sql.text);
        assert!(sql.text.contains("t0.id_object = t1.id_subject"), "{}", sql.text);
        assert!(sql.text.contains("t0.id_named_graph = t1.id_named_graph"), "{}", sql.text);
        // the per-scan guards are subsumed by the combined one
        assert!(!sql.text.contains("bit_count(t0.validity) <>"), "{}", sql.text);
    }

    #[test]
    fn metadata_join_sql_flattens_through_the_registry() {
        let sql = emit_sample(sample::QUERY_KNOWS_VERSIONS, &EmitOptions::default());
        assert!(sql.text.contains("JOIN versioned_named_graph vng"), "{}", sql.text);
        assert!(sql.text.contains("get_bit("), "{}", sql.text);
        assert!(sql.text.contains("vng.index_version - 1"), "{}", sql.text);
        assert!(sql.text.contains("vng.id_versioned_named_graph AS v$g"), "{}", sql.text);
        assert!(sql.text.contains(", metadata t"), "{}", sql.text);
    }

    #[test]
    fn group_sql_sums_popcounts() {
        let sql = emit_sample(sample::QUERY_COUNT_KNOWS, &EmitOptions::default());
        assert!(sql.text.contains("SUM(bit_count(bs$g)) AS agg0"), "{}", sql.text);
        assert!(sql.text.contains("GROUP BY (v$o)"), "{}", sql.text);
        assert!(sql.text.contains("agg0 AS v$count"), "{}", sql.text);
        assert_eq!(sql.columns, vec!["v$o", "v$count"]);
    }

    #[test]
    fn group_without_bitstrings_counts_rows() {
        let sql = emit_sample(
            "SELECT ?v (COUNT(*) AS ?n) WHERE { ?x <v:in-version> ?v <ng:Metadata> } GROUP BY ?v",
            &EmitOptions::default(),
        );
        assert!(sql.text.contains("COUNT(*) AS agg0"), "{}", sql.text);
        assert!(!sql.text.contains("SUM("), "{}", sql.text);
    }

    #[test]
    fn inline_ids_replace_subqueries() {
        let store = sample::sample_store();
        let plan = plan(&parse(sample::QUERY_KNOWS).unwrap(), &store).unwrap();
        let inline = emit(&plan, &EmitOptions { inline_ids: true });
        assert!(!inline.text.contains("SELECT id_resource_or_literal"), "{}", inline.text);
        let knows = store.dictionary().lookup(&crate::term::Term::iri("ex:knows")).unwrap();
        assert!(inline.text.contains(&format!("t0.id_predicate = {knows}")), "{}", inline.text);
    }

    #[test]
    fn unknown_inline_term_matches_nothing() {
        let sql = emit_sample("?s <ex:never> ?o ?g .", &EmitOptions { inline_ids: true });
        assert!(sql.text.contains("t0.id_predicate = 0"), "{}", sql.text);
    }

    #[test]
    fn emission_is_deterministic() {
        let store = sample::sample_store();
        for query in [
            sample::QUERY_KNOWS,
            sample::QUERY_KNOWS_LIKES,
            sample::QUERY_KNOWS_VERSIONS,
            sample::QUERY_COUNT_KNOWS,
        ] {
            let plan_a = plan(&parse(query).unwrap(), &store).unwrap();
            let plan_b = plan(&parse(query).unwrap(), &store).unwrap();
            assert_eq!(
                emit(&plan_a, &EmitOptions::default()).text,
                emit(&plan_b, &EmitOptions::default()).text
            );
        }
    }

    #[test]
    fn ddl_contains_all_six_permutations_and_five_tables() {
        let ddl = emit_schema_ddl(3);
        for columns in [
            "(id_named_graph, id_subject, id_predicate, id_object)",
            "(id_named_graph, id_subject, id_object, id_predicate)",
            "(id_named_graph, id_predicate, id_object, id_subject)",
            "(id_named_graph, id_predicate, id_subject, id_object)",
            "(id_named_graph, id_object, id_predicate, id_subject)",
            "(id_named_graph, id_object, id_subject, id_predicate)",
        ] {
            assert!(ddl.contains(columns), "missing index {columns}");
        }
        assert_eq!(ddl.matches("CREATE TABLE").count(), 5);
        // idempotent application
        assert_eq!(ddl.matches("CREATE TABLE IF NOT EXISTS").count(), 5);
        assert_eq!(ddl.matches("CREATE INDEX IF NOT EXISTS").count(), 7);
        assert!(ddl.contains("BIT(3)"));
        assert!(emit_schema_ddl(0).contains("BIT(1)"));
    }

    #[test]
    fn csv_export_writes_one_file_per_relation() {
        let dir = tempfile::tempdir().unwrap();
        let store = sample::sample_store();
        export_csv(&store, dir.path()).unwrap();
        for (file, rows) in [
            ("resource_or_literal.csv", store.dictionary().len() as u64),
            ("versioned_quad.csv", 5),
            ("version.csv", 3),
            ("versioned_named_graph.csv", 5),
            ("metadata.csv", 10),
        ] {
            let text = std::fs::read_to_string(dir.path().join(file)).unwrap();
            assert_eq!(text.lines().count() as u64, rows + 1, "{file} rows");
        }
        let quads = std::fs::read_to_string(dir.path().join("versioned_quad.csv")).unwrap();
        assert!(quads.contains(",111"), "{quads}");
    }
}
