//! An embedded versioned quad store. Concurrent dataset versions are
//! condensed into unique quads annotated with validity bitstrings; a
//! query subset is answered either in-process over bitwise operations or
//! translated to SQL for a PostgreSQL backend.

pub mod algebra;
pub mod dictionary;
pub mod exec;
pub mod nquads;
pub mod oracle;
pub mod parser;
pub mod plan;
pub mod sample;
pub mod sql;
pub mod store;
pub mod term;
pub mod testgen;
pub mod validity;

pub use dictionary::Dictionary;
pub use store::{Store, TermQuad};
pub use term::{Term, TermId, TermKind};
pub use validity::Validity;
