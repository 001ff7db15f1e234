//! Bilingual sentence alignment driven by lexical chunk matching.
//!
//! The toolkit aligns a source text with its translation in three stages:
//! sentences are split into shallow noun/verb chunks, every candidate
//! sentence pair is scored by the fraction of chunks that translate into
//! each other, and a greedy scan over the scores builds the alignment
//! under two rules (no sentence joins two groups, accepted pairs never
//! cross). Unaligned sentences can then be attached to adjacent groups to
//! form one-many alignments. Because the scoring is lexical rather than
//! length-based, the aligner keeps working on texts with large insertions
//! and deletions, which is exactly where character-length methods drift.
//!
//! The crate also ships a character-length dynamic-programming baseline
//! ([`gale_church`]), an evaluation harness ([`evaluator`]) and a
//! deterministic synthetic parallel-corpus generator ([`syncorpus`]) so
//! the two approaches can be compared on corpora with a known gold
//! alignment.

pub mod aligner;
pub mod chunker;
pub mod cli;
pub mod corpus;
pub mod evaluator;
pub mod gale_church;
pub mod many_many;
pub mod matcher;
pub mod syncorpus;

use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type. Variants map onto the CLI exit codes: I/O and
/// UTF-8 problems exit 3, format and data problems exit 4, bad
/// configuration exits 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: not valid UTF-8")]
    InvalidUtf8 { path: PathBuf },

    #[error("{path}: empty corpus")]
    EmptyCorpus { path: PathBuf },

    /// Malformed content in a corpus, lexicon, rule or alignment file.
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A chunk with no content token; no headword can be selected.
    #[error("headless chunk: no content token to select as head")]
    HeadlessChunk,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Mismatched or out-of-range data handed to the evaluator.
    #[error("evaluation error: {0}")]
    Eval(String),
}

impl Error {
    pub(crate) fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Read a file as UTF-8, reporting I/O and encoding failures separately.
pub(crate) fn read_utf8(path: &std::path::Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|_| Error::InvalidUtf8 { path: path.into() })
}
