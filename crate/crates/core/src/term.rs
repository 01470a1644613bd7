//! RDF terms and their dictionary identifiers.

use std::fmt;

/// What kind of RDF term a lexical form denotes.
///
/// Blank nodes are kept as a third namespace so that data files containing
/// them round-trip; labels are scoped by the loader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Iri,
    Literal,
    Blank,
}

/// An RDF resource or literal.
///
/// Equality is structural over all four fields. IRIs and blank nodes never
/// carry a datatype or language tag; the constructors enforce this.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    kind: TermKind,
    lexical: String,
    datatype: Option<String>,
    lang: Option<String>,
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Self {
        Term { kind: TermKind::Iri, lexical: iri.into(), datatype: None, lang: None }
    }

    pub fn literal(value: impl Into<String>) -> Self {
        Term { kind: TermKind::Literal, lexical: value.into(), datatype: None, lang: None }
    }

    pub fn typed_literal(value: impl Into<String>, datatype: impl Into<String>) -> Self {
        Term {
            kind: TermKind::Literal,
            lexical: value.into(),
            datatype: Some(datatype.into()),
            lang: None,
        }
    }

    pub fn lang_literal(value: impl Into<String>, lang: impl Into<String>) -> Self {
        Term { kind: TermKind::Literal, lexical: value.into(), datatype: None, lang: Some(lang.into()) }
    }

    pub fn blank(label: impl Into<String>) -> Self {
        Term { kind: TermKind::Blank, lexical: label.into(), datatype: None, lang: None }
    }

    pub fn kind(&self) -> TermKind {
        self.kind
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Option<&str> {
        self.datatype.as_deref()
    }

    pub fn lang(&self) -> Option<&str> {
        self.lang.as_deref()
    }

    pub fn is_iri(&self) -> bool {
        self.kind == TermKind::Iri
    }

    pub fn is_literal(&self) -> bool {
        self.kind == TermKind::Literal
    }
}

impl fmt::Display for Term {
    /// Renders the term in N-Quads-like form: IRIs bare, literals quoted
    /// with escapes and any `@lang`/`^^datatype` suffix, blanks as `_:label`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TermKind::Iri => write!(f, "{}", self.lexical),
            TermKind::Blank => write!(f, "_:{}", self.lexical),
            TermKind::Literal => {
                write!(f, "\"{}\"", escape_string(&self.lexical))?;
                if let Some(lang) = &self.lang {
                    write!(f, "@{lang}")?;
                } else if let Some(dt) = &self.datatype {
                    write!(f, "^^<{dt}>")?;
                }
                Ok(())
            }
        }
    }
}

/// Dictionary identifier of an interned term. Ids are positive and are
/// never reused or reassigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u64);

impl TermId {
    pub fn as_u64(self) -> u64 {
        self.0
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Escapes a string per N-Quads string escaping rules.
pub fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{08}' => out.push_str("\\b"),
            '\u{0c}' => out.push_str("\\f"),
            _ => out.push(c),
        }
    }
    out
}

/// Reverses [`escape_string`]. Also accepts `\uXXXX` and `\UXXXXXXXX`.
pub fn unescape_string(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('"') => out.push('"'),
            Some('\'') => out.push('\''),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('t') => out.push('\t'),
            Some('b') => out.push('\u{08}'),
            Some('f') => out.push('\u{0c}'),
            Some('u') => out.push(read_codepoint(&mut chars, 4)?),
            Some('U') => out.push(read_codepoint(&mut chars, 8)?),
            Some(other) => return Err(format!("invalid escape '\\{other}'")),
            None => return Err("dangling backslash".to_string()),
        }
    }
    Ok(out)
}

fn read_codepoint(chars: &mut std::str::Chars<'_>, len: usize) -> Result<char, String> {
    let mut value = 0u32;
    for _ in 0..len {
        let c = chars.next().ok_or("truncated unicode escape")?;
        let digit = c.to_digit(16).ok_or(format!("invalid hex digit '{c}'"))?;
        value = value * 16 + digit;
    }
    char::from_u32(value).ok_or(format!("invalid code point U+{value:X}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_distinguishes_terms() {
        assert_ne!(Term::literal("pizza"), Term::iri("pizza"));
        assert_ne!(Term::blank("pizza"), Term::iri("pizza"));
    }

    #[test]
    fn literal_equality_covers_datatype_and_lang() {
        assert_ne!(Term::literal("1"), Term::typed_literal("1", "http://www.w3.org/2001/XMLSchema#integer"));
        assert_ne!(Term::lang_literal("chat", "fr"), Term::lang_literal("chat", "en"));
        assert_eq!(Term::lang_literal("chat", "fr"), Term::lang_literal("chat", "fr"));
    }

    #[test]
    fn escape_round_trip() {
        let s = "line\nwith \"quotes\" and \\slashes\\ and tab\t.";
        assert_eq!(unescape_string(&escape_string(s)).unwrap(), s);
    }

    #[test]
    fn unescape_unicode_forms() {
        assert_eq!(unescape_string("\\u0041\\U0001F600").unwrap(), "A\u{1F600}");
        assert!(unescape_string("\\q").is_err());
        assert!(unescape_string("\\u00").is_err());
    }

    #[test]
    fn display_forms() {
        assert_eq!(Term::iri("ex:knows").to_string(), "ex:knows");
        assert_eq!(Term::literal("pizza").to_string(), "\"pizza\"");
        assert_eq!(
            Term::typed_literal("1", "http://www.w3.org/2001/XMLSchema#integer").to_string(),
            "\"1\"^^<http://www.w3.org/2001/XMLSchema#integer>"
        );
        assert_eq!(Term::lang_literal("chat", "fr").to_string(), "\"chat\"@fr");
        assert_eq!(Term::blank("b0").to_string(), "_:b0");
    }
}
