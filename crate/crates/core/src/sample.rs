//! The worked sample dataset: three snapshots of a small social graph,
//! plus the four reference queries over it and their expected answers.
//! Used by the self-test command and the integration suites.

use crate::store::{Store, TermQuad};
use crate::term::Term;

fn iri(s: &str) -> Term {
    Term::iri(s)
}

fn quad(s: &str, p: &str, o: Term, g: &str) -> TermQuad {
    TermQuad::new(iri(s), iri(p), o, iri(g))
}

/// The three version snapshots. Condensing them yields five unique quads
/// with validities 111, 011, 101, 001, 011.
pub fn snapshots() -> [Vec<TermQuad>; 3] {
    let knows_ab = || quad(":alice", "ex:knows", iri(":bob"), ":g1");
    let likes_pizza = || quad(":bob", "ex:likes", Term::literal("pizza"), ":g1");
    let likes_sushi = || quad(":alice", "ex:likes", Term::literal("sushi"), ":g1");
    let knows_ca = || quad(":carol", "ex:knows", iri(":alice"), ":g2");
    let knows_bc = || quad(":bob", "ex:knows", iri(":carol"), ":g2");
    [
        vec![knows_ab(), likes_sushi()],
        vec![knows_ab(), likes_pizza(), knows_bc()],
        vec![knows_ab(), likes_pizza(), likes_sushi(), knows_ca(), knows_bc()],
    ]
}

/// Builds the sample store by ingesting the three snapshots in order.
pub fn sample_store() -> Store {
    let mut store = Store::new();
    for snapshot in snapshots() {
        store.ingest_version(&snapshot).expect("sample snapshot ingests");
    }
    store
}

/// The sample snapshots in N-Quads text form, one document per version.
pub fn snapshot_nquads() -> [String; 3] {
    snapshots().map(|quads| {
        let mut text = String::new();
        for q in quads {
            let object = match q.o.is_iri() {
                true => format!("<{}>", q.o.lexical()),
                false => q.o.to_string(),
            };
            text.push_str(&format!(
                "<{}> <{}> {} <{}> .\n",
                q.s.lexical(),
                q.p.lexical(),
                object,
                q.g.lexical()
            ));
        }
        text
    })
}

/// Single quad pattern on a shared predicate.
pub const QUERY_KNOWS: &str = "?s <ex:knows> ?o ?g .";

/// Two patterns joined on an object variable and a shared graph variable.
pub const QUERY_KNOWS_LIKES: &str = "?s <ex:knows> ?o ?g .\n?o <ex:likes> ?liked ?g .";

/// Data pattern joined with a metadata pattern through the graph variable.
pub const QUERY_KNOWS_VERSIONS: &str =
    "?s <ex:knows> ?o ?g .\n?g <v:in-version> ?v <ng:Metadata> .";

/// Grouping query counting, per object, the versions of matching quads.
pub const QUERY_COUNT_KNOWS: &str =
    "SELECT ?o (COUNT(?s) AS ?count)\nWHERE {\n    ?s <ex:knows> ?o ?g .\n}\nGROUP BY ?o";

/// Expected decoded rows for [`QUERY_KNOWS`]: (s, o, graph, validity).
pub fn expected_knows() -> Vec<(&'static str, &'static str, &'static str, &'static str)> {
    vec![
        (":alice", ":bob", ":g1", "111"),
        (":carol", ":alice", ":g2", "001"),
        (":bob", ":carol", ":g2", "011"),
    ]
}

/// Expected decoded row for [`QUERY_KNOWS_LIKES`]:
/// (s, o, liked literal, graph, validity).
pub fn expected_knows_likes() -> Vec<(&'static str, &'static str, &'static str, &'static str, &'static str)>
{
    vec![(":alice", ":bob", "pizza", ":g1", "011")]
}

/// Expected rows for [`QUERY_KNOWS_VERSIONS`], with the graph variable
/// resolved through the registry to its (graph, version) pair:
/// (s, o, graph, version index, version literal).
pub fn expected_knows_versions(
) -> Vec<(&'static str, &'static str, &'static str, u32, &'static str)> {
    vec![
        (":alice", ":bob", ":g1", 1, "1"),
        (":alice", ":bob", ":g1", 2, "2"),
        (":alice", ":bob", ":g1", 3, "3"),
        (":carol", ":alice", ":g2", 3, "3"),
        (":bob", ":carol", ":g2", 2, "2"),
        (":bob", ":carol", ":g2", 3, "3"),
    ]
}

/// Expected groups for [`QUERY_COUNT_KNOWS`]: object term to version count.
pub fn expected_count_knows() -> Vec<(&'static str, u64)> {
    vec![(":bob", 3), (":alice", 1), (":carol", 2)]
}
