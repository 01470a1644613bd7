//! Embedded evaluation of condensed plans over a store snapshot.
//!
//! Results are columnar with bag semantics; row order is unspecified but
//! deterministic for a given store. Bitstring columns can be expanded to
//! per-version rows with [`flatten`], and ids decoded to terms with
//! [`decode`].

use std::collections::{BTreeMap, HashMap};

use crate::dictionary::DictionaryError;
use crate::plan::{
    BitJoinNode, FinalizeNode, GroupByNode, LowerNode, PatternBinding, PlanCol, PlanNode,
    ScanNode, ScanSource,
};
use crate::store::{QuadPattern, Store, TriplePattern};
use crate::term::TermId;
use crate::validity::Validity;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColKind {
    Id,
    Bits,
    Num,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnDesc {
    /// Physical name carrying the representation prefix: `v$x`, `ng$x`,
    /// `bs$x`, or an aggregate column.
    pub name: String,
    pub kind: ColKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cell {
    Id(TermId),
    Bits(Validity),
    Num(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultTable {
    pub columns: Vec<ColumnDesc>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }
}

/// One fully expanded result row: plain id bindings, the (graph, version)
/// pair chosen for each flattened bitstring column, and numeric cells.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FlatRow {
    pub bindings: BTreeMap<String, TermId>,
    pub graph_versions: BTreeMap<String, (TermId, u32)>,
    pub counts: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl DecodedTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Rows sorted lexicographically, for reproducible output.
    pub fn sorted(mut self) -> Self {
        self.rows.sort();
        self
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExecOptions {
    /// Test hook: corrupt the bitstring combination of joins so that
    /// equivalence harnesses can prove they catch a broken AND route.
    pub fault_and_join: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExecStats {
    /// Index entries and metadata rows visited by scans.
    pub rows_scanned: u64,
    /// Bitwise ANDs applied while joining.
    pub and_ops: u64,
}

pub fn execute(plan: &PlanNode, store: &Store) -> ResultTable {
    execute_with_stats(plan, store, &ExecOptions::default()).0
}

pub fn execute_with_stats(
    plan: &PlanNode,
    store: &Store,
    options: &ExecOptions,
) -> (ResultTable, ExecStats) {
    let mut stats = ExecStats::default();
    let table = eval(plan, store, options, &mut stats);
    (table, stats)
}

fn columns_for(cols: &[PlanCol], finalized: bool) -> Vec<ColumnDesc> {
    let mut out = Vec::new();
    for col in cols {
        match col {
            PlanCol::Id { var } => {
                out.push(ColumnDesc { name: format!("v${var}"), kind: ColKind::Id })
            }
            PlanCol::Condensed { var, .. } => {
                out.push(ColumnDesc { name: format!("ng${var}"), kind: ColKind::Id });
                out.push(ColumnDesc { name: format!("bs${var}"), kind: ColKind::Bits });
            }
            PlanCol::Agg { name, alias } => {
                let name = if finalized { format!("v${alias}") } else { name.clone() };
                out.push(ColumnDesc { name, kind: ColKind::Num });
            }
        }
    }
    out
}

fn eval(plan: &PlanNode, store: &Store, options: &ExecOptions, stats: &mut ExecStats) -> ResultTable {
    match plan {
        PlanNode::Scan(scan) => eval_scan(scan, store, stats),
        PlanNode::BitJoin(join) => eval_join(join, store, options, stats),
        PlanNode::Lower(lower) => eval_lower(lower, store, options, stats),
        PlanNode::GroupBy(group) => eval_group(group, store, options, stats),
        PlanNode::Finalize(finalize) => eval_finalize(finalize, store, options, stats),
    }
}

fn bound_id(binding: &PatternBinding) -> Option<TermId> {
    match binding {
        PatternBinding::Var(_) => None,
        PatternBinding::Term { id, .. } => *id,
    }
}

fn eval_scan(scan: &ScanNode, store: &Store, stats: &mut ExecStats) -> ResultTable {
    let columns = columns_for(scan.columns(), false);
    let mut table = ResultTable { columns, rows: Vec::new() };
    if scan.unsatisfiable() {
        return table;
    }
    // first position bound by each variable, for projecting cells
    let var_pos: HashMap<&str, usize> = {
        let mut map = HashMap::new();
        for (pos, binding) in scan.spo.iter().enumerate() {
            if let PatternBinding::Var(name) = binding {
                map.entry(name.as_str()).or_insert(pos);
            }
        }
        map
    };

    match scan.source {
        ScanSource::Quads => {
            let pattern = QuadPattern {
                s: bound_id(&scan.spo[0]),
                p: bound_id(&scan.spo[1]),
                o: bound_id(&scan.spo[2]),
                g: scan.graph.as_ref().and_then(bound_id),
            };
            let mut matched = store.quads_matching(&pattern);
            for quad in matched.by_ref() {
                let spo = [quad.s, quad.p, quad.o];
                if !scan.same_var.iter().all(|&(a, b)| spo[a] == spo[b]) {
                    continue;
                }
                if !quad.validity.any() {
                    continue;
                }
                let mut row = Vec::new();
                for col in scan.columns() {
                    match col {
                        PlanCol::Id { var } => row.push(Cell::Id(spo[var_pos[var.as_str()]])),
                        PlanCol::Condensed { .. } => {
                            row.push(Cell::Id(quad.g));
                            row.push(Cell::Bits(quad.validity.clone()));
                        }
                        PlanCol::Agg { .. } => unreachable!("scans have no aggregate columns"),
                    }
                }
                table.rows.push(row);
            }
            stats.rows_scanned += matched.touched();
        }
        ScanSource::Metadata => {
            let pattern = TriplePattern {
                s: bound_id(&scan.spo[0]),
                p: bound_id(&scan.spo[1]),
                o: bound_id(&scan.spo[2]),
            };
            let mut matched = store.metadata_matching(&pattern);
            for triple in matched.by_ref() {
                let spo = [triple.s, triple.p, triple.o];
                if !scan.same_var.iter().all(|&(a, b)| spo[a] == spo[b]) {
                    continue;
                }
                let row = scan
                    .columns()
                    .iter()
                    .map(|col| match col {
                        PlanCol::Id { var } => Cell::Id(spo[var_pos[var.as_str()]]),
                        _ => unreachable!("metadata scans emit id columns only"),
                    })
                    .collect();
                table.rows.push(row);
            }
            stats.rows_scanned += matched.touched();
        }
    }
    table
}

fn eval_join(
    join: &BitJoinNode,
    store: &Store,
    options: &ExecOptions,
    stats: &mut ExecStats,
) -> ResultTable {
    let left = eval(&join.left, store, options, stats);
    let right = eval(&join.right, store, options, stats);
    let columns = columns_for(join.columns(), false);
    let mut table = ResultTable { columns, rows: Vec::new() };

    let key_names: Vec<String> = join
        .id_keys
        .iter()
        .map(|k| physical_key_name(&left, k))
        .chain(join.cond_keys.iter().map(|k| format!("ng${k}")))
        .collect();
    let left_keys: Vec<usize> =
        key_names.iter().map(|n| left.column_index(n).expect("left key column")).collect();
    let right_keys: Vec<usize> =
        key_names.iter().map(|n| right.column_index(n).expect("right key column")).collect();

    let key_of = |row: &[Cell], idxs: &[usize]| -> Vec<Cell> {
        idxs.iter().map(|&i| row[i].clone()).collect()
    };

    // hash join with the smaller input as build side
    let left_is_build = left.rows.len() <= right.rows.len();
    let (build, build_keys, probe, probe_keys) = if left_is_build {
        (&left, &left_keys, &right, &right_keys)
    } else {
        (&right, &right_keys, &left, &left_keys)
    };
    let mut index: HashMap<Vec<Cell>, Vec<usize>> = HashMap::new();
    for (i, row) in build.rows.iter().enumerate() {
        index.entry(key_of(row, build_keys)).or_default().push(i);
    }

    let bs_pairs: Vec<(usize, usize, usize)> = join
        .cond_keys
        .iter()
        .map(|k| {
            let name = format!("bs${k}");
            (
                left.column_index(&name).expect("left bitstring column"),
                right.column_index(&name).expect("right bitstring column"),
                table.column_index(&name).expect("output bitstring column"),
            )
        })
        .collect();

    for probe_row in &probe.rows {
        let Some(matches) = index.get(&key_of(probe_row, probe_keys)) else { continue };
        for &build_idx in matches {
            let build_row = &build.rows[build_idx];
            let (left_row, right_row) =
                if left_is_build { (build_row, probe_row) } else { (probe_row, build_row) };
            let mut out: Vec<Cell> = Vec::with_capacity(table.columns.len());
            for col in &table.columns {
                let cell = match left.column_index(&col.name) {
                    Some(i) => left_row[i].clone(),
                    None => {
                        let i = right.column_index(&col.name).expect("output column source");
                        right_row[i].clone()
                    }
                };
                out.push(cell);
            }
            let mut keep = true;
            for &(li, ri, oi) in &bs_pairs {
                let (Cell::Bits(a), Cell::Bits(b)) = (&left_row[li], &right_row[ri]) else {
                    unreachable!("bitstring columns hold bits")
                };
                if options.fault_and_join {
                    // fault hook: keep the left side untouched
                    out[oi] = Cell::Bits(a.clone());
                    continue;
                }
                let combined = a.and(b);
                stats.and_ops += 1;
                if !combined.any() {
                    keep = false;
                    break;
                }
                out[oi] = Cell::Bits(combined);
            }
            if keep {
                table.rows.push(out);
            }
        }
    }
    table
}

fn physical_key_name(table: &ResultTable, var: &str) -> String {
    let v_name = format!("v${var}");
    if table.column_index(&v_name).is_some() {
        v_name
    } else {
        // aggregate alias used as a join key
        var.to_string()
    }
}

fn eval_lower(
    lower: &LowerNode,
    store: &Store,
    options: &ExecOptions,
    stats: &mut ExecStats,
) -> ResultTable {
    let sub = eval(&lower.sub, store, options, stats);
    let columns = columns_for(lower.columns(), false);
    let mut table = ResultTable { columns, rows: Vec::new() };

    let ng_idx = sub.column_index(&format!("ng${}", lower.var)).expect("ng column");
    let bs_idx = sub.column_index(&format!("bs${}", lower.var)).expect("bs column");
    let out_sources: Vec<Option<usize>> = table
        .columns
        .iter()
        .map(|c| if c.name == format!("v${}", lower.var) { None } else { sub.column_index(&c.name) })
        .collect();

    for row in &sub.rows {
        let Cell::Id(graph) = row[ng_idx] else { unreachable!("ng column holds an id") };
        let Cell::Bits(bits) = &row[bs_idx] else { unreachable!("bs column holds bits") };
        for version in bits.versions() {
            let Some(vng_id) = store.vng_id_for(graph, version) else {
                debug_assert!(false, "set bit without a registered versioned graph");
                continue;
            };
            let out = out_sources
                .iter()
                .map(|src| match src {
                    Some(i) => row[*i].clone(),
                    None => Cell::Id(vng_id),
                })
                .collect();
            table.rows.push(out);
        }
    }
    table
}

fn eval_group(
    group: &GroupByNode,
    store: &Store,
    options: &ExecOptions,
    stats: &mut ExecStats,
) -> ResultTable {
    let sub = eval(&group.sub, store, options, stats);
    let columns = columns_for(group.columns(), false);
    let mut table = ResultTable { columns, rows: Vec::new() };

    let key_idxs: Vec<usize> = group
        .keys
        .iter()
        .map(|k| sub.column_index(&physical_key_name(&sub, k)).expect("group key column"))
        .collect();
    let bs_idxs: Vec<usize> = sub
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind == ColKind::Bits)
        .map(|(i, _)| i)
        .collect();

    // groups in first-encounter order for deterministic output
    let mut order: Vec<Vec<Cell>> = Vec::new();
    let mut totals: HashMap<Vec<Cell>, u64> = HashMap::new();
    for row in &sub.rows {
        let key: Vec<Cell> = key_idxs.iter().map(|&i| row[i].clone()).collect();
        let multiplicity: u64 = bs_idxs
            .iter()
            .map(|&i| match &row[i] {
                Cell::Bits(b) => b.popcount() as u64,
                _ => unreachable!("bits column"),
            })
            .product();
        if !totals.contains_key(&key) {
            order.push(key.clone());
        }
        *totals.entry(key).or_insert(0) += multiplicity;
    }
    if group.keys.is_empty() && order.is_empty() {
        // a global aggregate over no rows still reports one zero count
        order.push(Vec::new());
        totals.insert(Vec::new(), 0);
    }

    for key in order {
        let total = totals[&key];
        let mut row = key.clone();
        row.extend(group.aggregates.iter().map(|_| Cell::Num(total)));
        table.rows.push(row);
    }
    table
}

fn eval_finalize(
    finalize: &FinalizeNode,
    store: &Store,
    options: &ExecOptions,
    stats: &mut ExecStats,
) -> ResultTable {
    let sub = eval(&finalize.sub, store, options, stats);
    let cols = finalize.columns();
    let columns = columns_for(cols, true);
    // map each output column to the physical column of the child
    let sources: Vec<usize> = {
        let mut out = Vec::new();
        for col in cols {
            match col {
                PlanCol::Id { var } => {
                    out.push(sub.column_index(&format!("v${var}")).expect("id column"))
                }
                PlanCol::Condensed { var, .. } => {
                    out.push(sub.column_index(&format!("ng${var}")).expect("ng column"));
                    out.push(sub.column_index(&format!("bs${var}")).expect("bs column"));
                }
                PlanCol::Agg { name, .. } => {
                    out.push(sub.column_index(name).expect("aggregate column"))
                }
            }
        }
        out
    };
    let rows = sub
        .rows
        .iter()
        .map(|row| sources.iter().map(|&i| row[i].clone()).collect())
        .collect();
    ResultTable { columns, rows }
}

/// Expands every bitstring column of every row into explicit
/// (graph, version) choices: a row with bitstring popcounts k1..kn yields
/// their product in flat rows.
pub fn flatten(table: &ResultTable) -> Vec<FlatRow> {
    // pair bs$x with its ng$x column
    let pairs: Vec<(String, usize, usize)> = table
        .columns
        .iter()
        .enumerate()
        .filter_map(|(bs_idx, c)| {
            let var = c.name.strip_prefix("bs$")?;
            let ng_idx = table.column_index(&format!("ng${var}"))?;
            Some((var.to_string(), ng_idx, bs_idx))
        })
        .collect();

    let mut out = Vec::new();
    for row in &table.rows {
        let mut base = FlatRow {
            bindings: BTreeMap::new(),
            graph_versions: BTreeMap::new(),
            counts: BTreeMap::new(),
        };
        for (i, col) in table.columns.iter().enumerate() {
            if let Some(var) = col.name.strip_prefix("v$") {
                match &row[i] {
                    Cell::Id(id) => {
                        base.bindings.insert(var.to_string(), *id);
                    }
                    Cell::Num(n) => {
                        base.counts.insert(var.to_string(), *n);
                    }
                    Cell::Bits(_) => unreachable!("v$ columns are ids or counts"),
                }
            } else if let Cell::Num(n) = &row[i] {
                base.counts.insert(col.name.clone(), *n);
            }
        }
        let mut expanded = vec![base];
        for (var, ng_idx, bs_idx) in &pairs {
            let Cell::Id(graph) = row[*ng_idx] else { unreachable!("ng column holds an id") };
            let Cell::Bits(bits) = &row[*bs_idx] else { unreachable!("bs column holds bits") };
            let versions = bits.versions();
            let mut next = Vec::with_capacity(expanded.len() * versions.len());
            for flat in &expanded {
                for &version in &versions {
                    let mut copy = flat.clone();
                    copy.graph_versions.insert(var.clone(), (graph, version));
                    next.push(copy);
                }
            }
            expanded = next;
        }
        out.extend(expanded);
    }
    out
}

/// Resolves every id cell through the dictionary, rendering bitstrings as
/// '0'/'1' text and counts as decimals.
pub fn decode(table: &ResultTable, store: &Store) -> Result<DecodedTable, DictionaryError> {
    let dict = store.dictionary();
    let mut rows = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let mut decoded = Vec::with_capacity(row.len());
        for cell in row {
            decoded.push(match cell {
                Cell::Id(id) => dict.resolve(*id)?.to_string(),
                Cell::Bits(bits) => bits.to_string(),
                Cell::Num(n) => n.to_string(),
            });
        }
        rows.push(decoded);
    }
    Ok(DecodedTable { columns: table.columns.iter().map(|c| c.name.clone()).collect(), rows })
}
