//! Bidirectional interning of RDF terms to integer identifiers.

use std::collections::HashMap;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::term::{Term, TermId, TermKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DictionaryError {
    #[error("unknown term id {0}")]
    UnknownId(TermId),
}

/// Interns terms and resolves ids back to terms.
///
/// Ids are assigned from 1 upward in interning order and are never reused.
/// Lookup goes through a hash index over the full term, so it never interns.
#[derive(Debug, Default, Clone)]
pub struct Dictionary {
    terms: Vec<Term>,
    index: HashMap<Term, TermId>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the existing id for a previously interned term, or assigns
    /// the next fresh id. Idempotent.
    pub fn intern(&mut self, term: &Term) -> TermId {
        if let Some(&id) = self.index.get(term) {
            return id;
        }
        let id = TermId(self.terms.len() as u64 + 1);
        self.terms.push(term.clone());
        self.index.insert(term.clone(), id);
        id
    }

    /// Resolves an id issued by [`intern`](Self::intern).
    pub fn resolve(&self, id: TermId) -> Result<&Term, DictionaryError> {
        if id.0 == 0 {
            return Err(DictionaryError::UnknownId(id));
        }
        self.terms.get(id.0 as usize - 1).ok_or(DictionaryError::UnknownId(id))
    }

    /// Read-only lookup: `Some(id)` iff the term was interned before.
    pub fn lookup(&self, term: &Term) -> Option<TermId> {
        self.index.get(term).copied()
    }

    /// Number of distinct terms ever interned.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in id order, starting at id 1.
    pub fn iter(&self) -> impl Iterator<Item = (TermId, &Term)> {
        self.terms.iter().enumerate().map(|(i, t)| (TermId(i as u64 + 1), t))
    }
}

/// Hex digest of a term's full identity, used for the `digest` column of
/// the relational dictionary and its lookup index.
pub fn term_digest(term: &Term) -> String {
    let mut hasher = Sha256::new();
    hasher.update([match term.kind() {
        TermKind::Iri => 1u8,
        TermKind::Literal => 2,
        TermKind::Blank => 3,
    }]);
    hasher.update(term.lexical().as_bytes());
    hasher.update([0u8]);
    hasher.update(term.datatype().unwrap_or("").as_bytes());
    hasher.update([0u8]);
    hasher.update(term.lang().unwrap_or("").as_bytes());
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}
