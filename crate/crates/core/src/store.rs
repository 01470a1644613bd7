//! The condensed store: unique quads annotated with validity bitstrings,
//! the versioned-named-graph registry, metadata triples, six composite
//! indexes over (graph, subject, predicate, object), and persistence.
//!
//! Writers need `&mut Store`; readers share `&Store`. Query execution
//! always runs against such an immutable borrow, so the single-writer /
//! many-reader discipline is enforced by the borrow checker.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::ops::Bound;
use std::path::Path;

use thiserror::Error;

use crate::dictionary::Dictionary;
use crate::term::{escape_string, unescape_string, Term, TermId, TermKind};
use crate::validity::Validity;

/// Predicate linking a versioned-named-graph resource to its version number.
pub const IN_VERSION_IRI: &str = "v:in-version";
/// Predicate linking a versioned-named-graph resource to its named graph.
pub const VERSION_OF_IRI: &str = "v:version-of";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("empty version snapshot")]
    EmptySnapshot,
    #[error("invalid graph term: {0}")]
    InvalidGraphTerm(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("store format error at line {line}: {message}")]
    Format { line: usize, message: String },
}

/// A quad of concrete terms, the unit of ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermQuad {
    pub s: Term,
    pub p: Term,
    pub o: Term,
    pub g: Term,
}

impl TermQuad {
    pub fn new(s: Term, p: Term, o: Term, g: Term) -> Self {
        TermQuad { s, p, o, g }
    }
}

/// One row of the versioned-quad relation: a unique quad plus the
/// bitstring of versions it belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondensedQuad {
    pub s: TermId,
    pub p: TermId,
    pub o: TermId,
    pub g: TermId,
    pub validity: Validity,
}

/// Registry entry binding a named graph to one version index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VersionedNamedGraph {
    /// Id of the synthesized versioned-named-graph resource.
    pub vng_id: TermId,
    pub graph_id: TermId,
    /// 1-based version index.
    pub version_index: u32,
}

/// A version-free metadata triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetadataTriple {
    pub s: TermId,
    pub p: TermId,
    pub o: TermId,
}

/// A quad pattern: each position either bound to an id or a wildcard.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QuadPattern {
    pub s: Option<TermId>,
    pub p: Option<TermId>,
    pub o: Option<TermId>,
    pub g: Option<TermId>,
}

/// A metadata pattern over (subject, predicate, object).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TriplePattern {
    pub s: Option<TermId>,
    pub p: Option<TermId>,
    pub o: Option<TermId>,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    /// Accept an empty snapshot instead of treating it as a caller bug.
    pub allow_empty: bool,
    /// Optional descriptive label stored for the new version.
    pub label: Option<String>,
}

/// Read-only counters describing the store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoreStats {
    pub version_count: u32,
    pub quad_count: u64,
    pub term_count: u64,
    pub vng_count: u64,
    /// Rows a flat per-(quad, version) baseline would hold: the sum of
    /// validity popcounts.
    pub flat_row_count: u64,
}

// Key component order per permutation, over (g, s, p, o) = (0, 1, 2, 3).
const PERMS: [[usize; 4]; 6] = [
    [0, 1, 2, 3], // g s p o
    [0, 1, 3, 2], // g s o p
    [0, 2, 3, 1], // g p o s
    [0, 2, 1, 3], // g p s o
    [0, 3, 2, 1], // g o p s
    [0, 3, 1, 2], // g o s p
];

const FORMAT_MAGIC: &str = "condyr-store";
const FORMAT_VERSION: u32 = 1;

/// The condensed versioned quad store.
#[derive(Debug, Default, Clone)]
pub struct Store {
    dict: Dictionary,
    version_labels: Vec<Option<String>>,
    quads: Vec<CondensedQuad>,
    quad_slots: HashMap<(TermId, TermId, TermId, TermId), usize>,
    perms: [BTreeMap<[u64; 4], u32>; 6],
    vngs: Vec<VersionedNamedGraph>,
    vng_by_graph: BTreeMap<(TermId, u32), TermId>,
    vng_by_id: HashMap<TermId, (TermId, u32)>,
    metadata: Vec<MetadataTriple>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    /// Current global version count V.
    pub fn version_count(&self) -> u32 {
        self.version_labels.len() as u32
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn quads(&self) -> &[CondensedQuad] {
        &self.quads
    }

    pub fn metadata(&self) -> &[MetadataTriple] {
        &self.metadata
    }

    pub fn vngs(&self) -> &[VersionedNamedGraph] {
        &self.vngs
    }

    pub fn version_label(&self, version_index: u32) -> Option<&str> {
        self.version_labels
            .get(version_index as usize - 1)
            .and_then(|l| l.as_deref())
    }

    /// Ingests one snapshot as the next version. Every existing validity
    /// is extended with a '0'; each snapshot quad is upserted with the new
    /// bit set; a versioned named graph is registered for each distinct
    /// graph in the snapshot. Returns the new version index.
    pub fn ingest_version(&mut self, snapshot: &[TermQuad]) -> Result<u32, StoreError> {
        self.ingest_version_with(snapshot, IngestOptions::default())
    }

    pub fn ingest_version_with(
        &mut self,
        snapshot: &[TermQuad],
        options: IngestOptions,
    ) -> Result<u32, StoreError> {
        if snapshot.is_empty() && !options.allow_empty {
            return Err(StoreError::EmptySnapshot);
        }
        for quad in snapshot {
            if quad.g.kind() == TermKind::Literal {
                return Err(StoreError::InvalidGraphTerm(format!(
                    "literal graph label {}",
                    quad.g
                )));
            }
            if quad.g.lexical().is_empty() {
                return Err(StoreError::InvalidGraphTerm("empty graph label".into()));
            }
        }

        self.version_labels.push(options.label);
        let version = self.version_labels.len() as u32;
        for quad in &mut self.quads {
            quad.validity.push_zero();
        }

        let mut graphs_in_order: Vec<TermId> = Vec::new();
        for quad in snapshot {
            let s = self.dict.intern(&quad.s);
            let p = self.dict.intern(&quad.p);
            let o = self.dict.intern(&quad.o);
            let g = self.dict.intern(&quad.g);
            if !graphs_in_order.contains(&g) {
                graphs_in_order.push(g);
            }
            match self.quad_slots.get(&(s, p, o, g)) {
                Some(&slot) => self.quads[slot].validity.set(version as usize - 1),
                None => {
                    let mut validity = Validity::zeros(version as usize);
                    validity.set(version as usize - 1);
                    let slot = self.quads.len();
                    self.quads.push(CondensedQuad { s, p, o, g, validity });
                    self.quad_slots.insert((s, p, o, g), slot);
                    let key_of = |pos: usize| [g, s, p, o][pos].as_u64();
                    for (perm, map) in PERMS.iter().zip(self.perms.iter_mut()) {
                        map.insert(perm.map(key_of), slot as u32);
                    }
                }
            }
        }

        for graph_id in graphs_in_order {
            self.register_vng(graph_id, version);
        }
        Ok(version)
    }

    fn register_vng(&mut self, graph_id: TermId, version_index: u32) {
        debug_assert!(!self.vng_by_graph.contains_key(&(graph_id, version_index)));
        let ordinal = self.vngs.len() + 1;
        let vng_id = self.dict.intern(&Term::iri(format!(":vng{ordinal}")));
        self.vngs.push(VersionedNamedGraph { vng_id, graph_id, version_index });
        self.vng_by_graph.insert((graph_id, version_index), vng_id);
        self.vng_by_id.insert(vng_id, (graph_id, version_index));

        let in_version = self.dict.intern(&Term::iri(IN_VERSION_IRI));
        let version_of = self.dict.intern(&Term::iri(VERSION_OF_IRI));
        let version_literal = self.dict.intern(&Term::literal(version_index.to_string()));
        self.metadata.push(MetadataTriple { s: vng_id, p: in_version, o: version_literal });
        self.metadata.push(MetadataTriple { s: vng_id, p: version_of, o: graph_id });
    }

    /// Streams the stored quads agreeing with all bound positions of the
    /// pattern, served by the permutation index whose leading columns
    /// cover the bound positions. With an unbound graph no permutation
    /// has a usable prefix and the scan degrades to a filtered full scan.
    pub fn quads_matching(&self, pattern: &QuadPattern) -> QuadScan<'_> {
        let gspo = [pattern.g, pattern.s, pattern.p, pattern.o];
        let (perm_idx, prefix_len) = PERMS
            .iter()
            .enumerate()
            .map(|(i, perm)| {
                let len = perm.iter().take_while(|&&pos| gspo[pos].is_some()).count();
                (i, len)
            })
            .max_by_key(|&(_, len)| len)
            .unwrap();
        let perm = &PERMS[perm_idx];
        let mut lo = [0u64; 4];
        let mut hi = [u64::MAX; 4];
        for i in 0..prefix_len {
            let v = gspo[perm[i]].unwrap().as_u64();
            lo[i] = v;
            hi[i] = v;
        }
        QuadScan {
            quads: &self.quads,
            range: self.perms[perm_idx].range((Bound::Included(lo), Bound::Included(hi))),
            pattern: *pattern,
            touched: 0,
        }
    }

    /// Exact-match streaming over the metadata relation.
    pub fn metadata_matching(&self, pattern: &TriplePattern) -> MetadataScan<'_> {
        MetadataScan { triples: self.metadata.iter(), pattern: *pattern, touched: 0 }
    }

    /// Registry entries for one graph, ordered by version index.
    pub fn vng_for_graph(&self, graph_id: TermId) -> Vec<VersionedNamedGraph> {
        self.vng_by_graph
            .range((graph_id, 0)..=(graph_id, u32::MAX))
            .map(|(&(g, version_index), &vng_id)| VersionedNamedGraph {
                vng_id,
                graph_id: g,
                version_index,
            })
            .collect()
    }

    pub fn vng_id_for(&self, graph_id: TermId, version_index: u32) -> Option<TermId> {
        self.vng_by_graph.get(&(graph_id, version_index)).copied()
    }

    pub fn vng_entry(&self, vng_id: TermId) -> Option<(TermId, u32)> {
        self.vng_by_id.get(&vng_id).copied()
    }

    pub fn stats(&self) -> StoreStats {
        StoreStats {
            version_count: self.version_count(),
            quad_count: self.quads.len() as u64,
            term_count: self.dict.len() as u64,
            vng_count: self.vngs.len() as u64,
            flat_row_count: self.quads.iter().map(|q| q.validity.popcount() as u64).sum(),
        }
    }

    /// Writes the store as a single self-describing text archive.
    /// Deterministic: two saves of the same store are byte-identical.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), StoreError> {
        let mut out = String::new();
        out.push_str(&format!("{FORMAT_MAGIC} {FORMAT_VERSION}\n"));
        out.push_str(&format!("versions {}\n", self.version_labels.len()));
        for (i, label) in self.version_labels.iter().enumerate() {
            let escaped = label.as_deref().map(escape_string).unwrap_or_default();
            out.push_str(&format!("{}\t{}\n", i + 1, escaped));
        }
        out.push_str(&format!("terms {}\n", self.dict.len()));
        for (id, term) in self.dict.iter() {
            let kind = match term.kind() {
                TermKind::Iri => "iri",
                TermKind::Literal => "literal",
                TermKind::Blank => "blank",
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                id,
                kind,
                escape_string(term.lexical()),
                term.datatype().map(escape_string).unwrap_or_default(),
                term.lang().unwrap_or(""),
            ));
        }
        out.push_str(&format!("quads {}\n", self.quads.len()));
        for q in &self.quads {
            out.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", q.s, q.p, q.o, q.g, q.validity));
        }
        out.push_str(&format!("vngs {}\n", self.vngs.len()));
        for v in &self.vngs {
            out.push_str(&format!("{}\t{}\t{}\n", v.vng_id, v.graph_id, v.version_index));
        }
        out.push_str(&format!("metadata {}\n", self.metadata.len()));
        for m in &self.metadata {
            out.push_str(&format!("{}\t{}\t{}\n", m.s, m.p, m.o));
        }
        out.push_str("end\n");

        let tmp = path.as_ref().with_extension("tmp");
        let mut file = fs::File::create(&tmp)?;
        file.write_all(out.as_bytes())?;
        file.sync_all()?;
        fs::rename(&tmp, path.as_ref())?;
        Ok(())
    }

    /// Loads an archive produced by [`save`](Self::save).
    pub fn load(path: impl AsRef<Path>) -> Result<Store, StoreError> {
        let text = fs::read_to_string(path.as_ref())?;
        Loader::new(&text).run()
    }
}

/// Index-backed quad scan. After draining, [`touched`](Self::touched)
/// reports how many index entries were visited.
pub struct QuadScan<'a> {
    quads: &'a [CondensedQuad],
    range: std::collections::btree_map::Range<'a, [u64; 4], u32>,
    pattern: QuadPattern,
    touched: u64,
}

impl<'a> QuadScan<'a> {
    pub fn touched(&self) -> u64 {
        self.touched
    }
}

impl<'a> Iterator for QuadScan<'a> {
    type Item = &'a CondensedQuad;

    fn next(&mut self) -> Option<Self::Item> {
        for (_, &slot) in self.range.by_ref() {
            self.touched += 1;
            let quad = &self.quads[slot as usize];
            let ok = self.pattern.s.is_none_or(|s| s == quad.s)
                && self.pattern.p.is_none_or(|p| p == quad.p)
                && self.pattern.o.is_none_or(|o| o == quad.o)
                && self.pattern.g.is_none_or(|g| g == quad.g);
            if ok {
                return Some(quad);
            }
        }
        None
    }
}

/// Linear scan over the metadata relation.
pub struct MetadataScan<'a> {
    triples: std::slice::Iter<'a, MetadataTriple>,
    pattern: TriplePattern,
    touched: u64,
}

impl<'a> MetadataScan<'a> {
    pub fn touched(&self) -> u64 {
        self.touched
    }
}

impl<'a> Iterator for MetadataScan<'a> {
    type Item = &'a MetadataTriple;

    fn next(&mut self) -> Option<Self::Item> {
        for triple in self.triples.by_ref() {
            self.touched += 1;
            let ok = self.pattern.s.is_none_or(|s| s == triple.s)
                && self.pattern.p.is_none_or(|p| p == triple.p)
                && self.pattern.o.is_none_or(|o| o == triple.o);
            if ok {
                return Some(triple);
            }
        }
        None
    }
}

struct Loader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Loader<'a> {
    fn new(text: &'a str) -> Self {
        Loader { lines: text.lines().enumerate() }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str), StoreError> {
        self.lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or(StoreError::Format { line: 0, message: "unexpected end of file".into() })
    }

    fn err(line: usize, message: impl Into<String>) -> StoreError {
        StoreError::Format { line, message: message.into() }
    }

    fn section(&mut self, name: &str) -> Result<usize, StoreError> {
        let (line, text) = self.next_line()?;
        let (head, count) = text
            .split_once(' ')
            .ok_or_else(|| Self::err(line, format!("expected '{name} <count>'")))?;
        if head != name {
            return Err(Self::err(line, format!("expected section '{name}', found '{head}'")));
        }
        count.parse().map_err(|_| Self::err(line, "invalid count"))
    }

    fn run(mut self) -> Result<Store, StoreError> {
        let (line, header) = self.next_line()?;
        if header != format!("{FORMAT_MAGIC} {FORMAT_VERSION}") {
            return Err(Self::err(line, "unrecognized archive header"));
        }
        let mut store = Store::new();

        let version_count = self.section("versions")?;
        for _ in 0..version_count {
            let (line, text) = self.next_line()?;
            let (_, label) = text.split_once('\t').ok_or_else(|| Self::err(line, "bad version record"))?;
            let label = if label.is_empty() {
                None
            } else {
                Some(unescape_string(label).map_err(|e| Self::err(line, e))?)
            };
            store.version_labels.push(label);
        }

        let term_count = self.section("terms")?;
        for i in 0..term_count {
            let (line, text) = self.next_line()?;
            let fields: Vec<&str> = text.split('\t').collect();
            if fields.len() != 5 {
                return Err(Self::err(line, "term record must have 5 fields"));
            }
            let lexical = unescape_string(fields[2]).map_err(|e| Self::err(line, e))?;
            let term = match fields[1] {
                "iri" => Term::iri(lexical),
                "blank" => Term::blank(lexical),
                "literal" => {
                    if !fields[3].is_empty() {
                        let dt = unescape_string(fields[3]).map_err(|e| Self::err(line, e))?;
                        Term::typed_literal(lexical, dt)
                    } else if !fields[4].is_empty() {
                        Term::lang_literal(lexical, fields[4])
                    } else {
                        Term::literal(lexical)
                    }
                }
                other => return Err(Self::err(line, format!("unknown term kind '{other}'"))),
            };
            let id = store.dict.intern(&term);
            if id.as_u64() != i as u64 + 1 || fields[0] != id.to_string() {
                return Err(Self::err(line, "term ids must be contiguous from 1"));
            }
        }

        let quad_count = self.section("quads")?;
        for _ in 0..quad_count {
            let (line, text) = self.next_line()?;
            let fields: Vec<&str> = text.split('\t').collect();
            if fields.len() != 5 {
                return Err(Self::err(line, "quad record must have 5 fields"));
            }
            let id = |f: &str| -> Result<TermId, StoreError> {
                let raw: u64 = f.parse().map_err(|_| Self::err(line, "invalid term id"))?;
                if raw == 0 || raw > store.dict.len() as u64 {
                    return Err(Self::err(line, format!("dangling term id {raw}")));
                }
                Ok(TermId(raw))
            };
            let (s, p, o, g) = (id(fields[0])?, id(fields[1])?, id(fields[2])?, id(fields[3])?);
            let validity = Validity::parse(fields[4]).map_err(|e| Self::err(line, e))?;
            if validity.len() != store.version_labels.len() {
                return Err(Self::err(line, "validity length differs from version count"));
            }
            if !validity.any() {
                return Err(Self::err(line, "stored quad with all-zero validity"));
            }
            let slot = store.quads.len();
            if store.quad_slots.insert((s, p, o, g), slot).is_some() {
                return Err(Self::err(line, "duplicate quad record"));
            }
            store.quads.push(CondensedQuad { s, p, o, g, validity });
            let key_of = |pos: usize| [g, s, p, o][pos].as_u64();
            for (perm, map) in PERMS.iter().zip(store.perms.iter_mut()) {
                map.insert(perm.map(key_of), slot as u32);
            }
        }

        let vng_count = self.section("vngs")?;
        for _ in 0..vng_count {
            let (line, text) = self.next_line()?;
            let fields: Vec<&str> = text.split('\t').collect();
            if fields.len() != 3 {
                return Err(Self::err(line, "vng record must have 3 fields"));
            }
            let vng_id = TermId(fields[0].parse().map_err(|_| Self::err(line, "invalid id"))?);
            let graph_id = TermId(fields[1].parse().map_err(|_| Self::err(line, "invalid id"))?);
            let version_index: u32 =
                fields[2].parse().map_err(|_| Self::err(line, "invalid version"))?;
            if version_index == 0 || version_index > store.version_labels.len() as u32 {
                return Err(Self::err(line, "vng version out of range"));
            }
            store.vngs.push(VersionedNamedGraph { vng_id, graph_id, version_index });
            if store.vng_by_graph.insert((graph_id, version_index), vng_id).is_some() {
                return Err(Self::err(line, "duplicate vng for (graph, version)"));
            }
            store.vng_by_id.insert(vng_id, (graph_id, version_index));
        }

        let metadata_count = self.section("metadata")?;
        for _ in 0..metadata_count {
            let (line, text) = self.next_line()?;
            let fields: Vec<&str> = text.split('\t').collect();
            if fields.len() != 3 {
                return Err(Self::err(line, "metadata record must have 3 fields"));
            }
            let id = |f: &str| -> Result<TermId, StoreError> {
                Ok(TermId(f.parse().map_err(|_| Self::err(line, "invalid term id"))?))
            };
            store.metadata.push(MetadataTriple {
                s: id(fields[0])?,
                p: id(fields[1])?,
                o: id(fields[2])?,
            });
        }

        let (line, tail) = self.next_line()?;
        if tail != "end" {
            return Err(Self::err(line, "expected trailing 'end'"));
        }
        Ok(store)
    }
}
