//! Line-based N-Quads reader for version snapshots.
//!
//! One document is one version snapshot. The graph field is mandatory
//! here since every quad must belong to a named graph to be versioned.

use std::io::BufRead;

use thiserror::Error;

use crate::store::TermQuad;
use crate::term::{unescape_string, Term};

#[derive(Debug, Error)]
pub enum NQuadsError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Parses an N-Quads document. Blank node labels are scoped by `scope` so
/// that labels from different files never collide.
pub fn parse_nquads(input: impl BufRead, scope: &str) -> Result<Vec<TermQuad>, NQuadsError> {
    let mut quads = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if let Some(quad) = parse_line(&line, i + 1, scope)? {
            quads.push(quad);
        }
    }
    Ok(quads)
}

pub fn parse_nquads_str(input: &str, scope: &str) -> Result<Vec<TermQuad>, NQuadsError> {
    parse_nquads(input.as_bytes(), scope)
}

fn parse_line(line: &str, number: usize, scope: &str) -> Result<Option<TermQuad>, NQuadsError> {
    let mut cursor = Cursor { text: line, pos: 0, line: number, scope };
    cursor.skip_ws();
    if cursor.at_end() || cursor.peek() == Some('#') {
        return Ok(None);
    }
    let s = cursor.term()?;
    let p = cursor.term()?;
    let o = cursor.term()?;
    cursor.skip_ws();
    if cursor.peek() == Some('.') {
        return Err(cursor.err("graph label is required (triple has no graph field)"));
    }
    let g = cursor.term()?;
    cursor.skip_ws();
    if cursor.peek() != Some('.') {
        return Err(cursor.err("expected terminating '.'"));
    }
    cursor.pos += 1;
    cursor.skip_ws();
    if !cursor.at_end() && cursor.peek() != Some('#') {
        return Err(cursor.err("unexpected trailing content"));
    }
    if s.is_literal() || p.is_literal() || g.is_literal() {
        return Err(cursor.err("literal allowed in object position only"));
    }
    Ok(Some(TermQuad::new(s, p, o, g)))
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    scope: &'a str,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> NQuadsError {
        NQuadsError::Syntax { line: self.line, message: message.into() }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start_matches([' ', '\t']);
        self.pos = self.text.len() - trimmed.len();
    }

    fn term(&mut self) -> Result<Term, NQuadsError> {
        self.skip_ws();
        match self.peek() {
            Some('<') => self.iri(),
            Some('_') => self.blank(),
            Some('"') => self.literal(),
            Some(c) => Err(self.err(format!("unexpected character '{c}'"))),
            None => Err(self.err("unexpected end of line")),
        }
    }

    fn iri(&mut self) -> Result<Term, NQuadsError> {
        let rest = self.rest();
        let end = rest.find('>').ok_or_else(|| self.err("unterminated IRI"))?;
        let raw = &rest[1..end];
        if raw.is_empty() {
            return Err(self.err("empty IRI"));
        }
        if raw.chars().any(|c| c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`')) {
            return Err(self.err(format!("invalid character in IRI <{raw}>")));
        }
        self.pos += end + 1;
        let lexical =
            unescape_string(raw).map_err(|e| self.err(format!("bad IRI escape: {e}")))?;
        Ok(Term::iri(lexical))
    }

    fn blank(&mut self) -> Result<Term, NQuadsError> {
        let rest = self.rest();
        if !rest.starts_with("_:") {
            return Err(self.err("expected blank node label"));
        }
        let label: String = rest[2..]
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == '_' || *c == '-' || *c == '.')
            .collect();
        let label = label.trim_end_matches('.').to_string();
        if label.is_empty() {
            return Err(self.err("empty blank node label"));
        }
        self.pos += 2 + label.len();
        // file-scoped: the same label in another document is another node
        Ok(Term::blank(format!("{}!{label}", self.scope)))
    }

    fn literal(&mut self) -> Result<Term, NQuadsError> {
        let rest = self.rest();
        let mut end = None;
        let mut escaped = false;
        for (i, c) in rest.char_indices().skip(1) {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                end = Some(i);
                break;
            }
        }
        let end = end.ok_or_else(|| self.err("unterminated string literal"))?;
        let value = unescape_string(&rest[1..end])
            .map_err(|e| self.err(format!("bad string escape: {e}")))?;
        self.pos += end + 1;

        if self.rest().starts_with("^^") {
            self.pos += 2;
            if self.peek() != Some('<') {
                return Err(self.err("expected datatype IRI after '^^'"));
            }
            let datatype = self.iri()?;
            return Ok(Term::typed_literal(value, datatype.lexical()));
        }
        if self.peek() == Some('@') {
            let rest = self.rest();
            let tag: String = rest[1..]
                .chars()
                .take_while(|c| c.is_ascii_alphanumeric() || *c == '-')
                .collect();
            if tag.is_empty() {
                return Err(self.err("empty language tag"));
            }
            self.pos += 1 + tag.len();
            return Ok(Term::lang_literal(value, tag));
        }
        Ok(Term::literal(value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_term_shapes() {
        let doc = concat!(
            "# a comment\n",
            "\n",
            "<:alice> <ex:knows> <:bob> <:g1> .\n",
            "<:bob> <ex:likes> \"pizza\" <:g1> . # trailing comment\n",
            "<:a> <ex:age> \"30\"^^<http://www.w3.org/2001/XMLSchema#integer> <:g1> .\n",
            "<:a> <ex:says> \"salut\\nhi\"@fr <:g2> .\n",
            "_:b0 <ex:near> _:b1 <:g2> .\n",
        );
        let quads = parse_nquads_str(doc, "f0").unwrap();
        assert_eq!(quads.len(), 5);
        assert_eq!(quads[0].s, Term::iri(":alice"));
        assert_eq!(quads[1].o, Term::literal("pizza"));
        assert_eq!(
            quads[2].o,
            Term::typed_literal("30", "http://www.w3.org/2001/XMLSchema#integer")
        );
        assert_eq!(quads[3].o, Term::lang_literal("salut\nhi", "fr"));
        assert_eq!(quads[4].s, Term::blank("f0!b0"));
        assert_eq!(quads[4].o, Term::blank("f0!b1"));
    }

    #[test]
    fn blank_labels_are_file_scoped() {
        let doc = "_:x <ex:p> <:o> <:g> .\n";
        let a = parse_nquads_str(doc, "a").unwrap();
        let b = parse_nquads_str(doc, "b").unwrap();
        assert_ne!(a[0].s, b[0].s);
    }

    #[test]
    fn missing_graph_is_rejected() {
        let err = parse_nquads_str("<:a> <:p> <:b> .\n", "f").unwrap_err();
        assert!(err.to_string().contains("graph label is required"), "{err}");
    }

    #[test]
    fn error_carries_line_number() {
        let doc = "<:a> <:p> <:b> <:g> .\n<:a> <:p .\n";
        match parse_nquads_str(doc, "f").unwrap_err() {
            NQuadsError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn literals_rejected_outside_object_position() {
        assert!(parse_nquads_str("\"lit\" <:p> <:b> <:g> .\n", "f").is_err());
        assert!(parse_nquads_str("<:a> <:p> <:b> \"g\" .\n", "f").is_err());
    }

    #[test]
    fn sample_documents_parse_to_the_sample_snapshots() {
        let docs = crate::sample::snapshot_nquads();
        let expected = crate::sample::snapshots();
        for (doc, quads) in docs.iter().zip(expected) {
            assert_eq!(parse_nquads_str(doc, "v").unwrap(), quads);
        }
    }
}
