//! Dataset records and newline-delimited JSON I/O.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{RelationalContext, RelationalError};
use crate::oracle::{execute, OracleError};
use crate::query::{parse_form, render_text, QueryClass, QueryError, QueryForm};
use crate::world::{ActionRecord, Memid};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationMetadata {
    pub seed: u64,
    pub sample_index: u64,
    pub config_digest: String,
    pub world_size: i32,
    /// Agent commands executed during the episode. Not part of the context.
    pub action_log: Vec<ActionRecord>,
}

/// One (context, query, answer) record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub format_version: u32,
    pub id: String,
    pub split: Split,
    pub query_class: QueryClass,
    pub context_text: String,
    pub context_relational: RelationalContext,
    pub query_text: String,
    pub query_logical_form: QueryForm,
    pub answer_text: String,
    pub answer_memids: Vec<Memid>,
    pub generation_metadata: GenerationMetadata,
}

pub fn sample_id(seed: u64, index: u64) -> String {
    format!("{seed}-{index:08}")
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RecordError + '_ {
    move |source| RecordError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write one JSON record per line. Returns the number written.
pub fn write_samples<'a>(samples: impl IntoIterator<Item = &'a Sample>, path: &Path) -> Result<usize, RecordError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut n = 0;
    for s in samples {
        let line = serde_json::to_string(s).expect("samples serialize");
        writeln!(w, "{line}").map_err(io_err(path))?;
        n += 1;
    }
    w.flush().map_err(io_err(path))?;
    Ok(n)
}

pub fn read_samples(path: &Path) -> Result<Vec<Sample>, RecordError> {
    read_jsonl(path)
}

/// Read a newline-delimited JSON file, skipping blank lines.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, RecordError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(&line).map_err(|e| RecordError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(v);
    }
    Ok(out)
}

#[derive(Debug, Error, PartialEq)]
pub enum ValidationError {
    #[error("unsupported format_version {0}")]
    Version(u32),
    #[error("relational context: {0}")]
    Relational(#[from] RelationalError),
    #[error("answer memid {0} is not in the relational context")]
    UnknownMemid(Memid),
    #[error("query text does not parse: {0}")]
    Query(#[from] QueryError),
    #[error("query text and logical form disagree")]
    FormMismatch,
    #[error("query_class {recorded} does not match the logical form ({actual})")]
    ClassMismatch { recorded: QueryClass, actual: QueryClass },
    #[error("oracle failed on the stored context: {0}")]
    Oracle(#[from] OracleError),
    #[error("stored answer {stored:?} differs from the oracle's {computed:?}")]
    AnswerMismatch { stored: String, computed: String },
    #[error("stored answer memids differ from the oracle's")]
    MemidMismatch,
}

/// Check that a record is self-consistent: the relational context rebuilds,
/// every answer memid resolves, the query text parses to the stored form,
/// and the oracle reproduces the stored answer from the stored context.
pub fn validate_sample(s: &Sample) -> Result<(), ValidationError> {
    if s.format_version != FORMAT_VERSION {
        return Err(ValidationError::Version(s.format_version));
    }
    let snapshots = s.context_relational.to_snapshots()?;
    let known: BTreeSet<Memid> = s.context_relational.memids();
    if let Some(m) = s.answer_memids.iter().find(|m| !known.contains(m)) {
        return Err(ValidationError::UnknownMemid(*m));
    }
    let form = parse_form(&s.query_text)?;
    if form != s.query_logical_form || render_text(&form) != s.query_text {
        return Err(ValidationError::FormMismatch);
    }
    if form.class() != s.query_class {
        return Err(ValidationError::ClassMismatch {
            recorded: s.query_class,
            actual: form.class(),
        });
    }
    let answer = execute(&form, &snapshots, &s.generation_metadata.action_log)?;
    if answer.text != s.answer_text {
        return Err(ValidationError::AnswerMismatch {
            stored: s.answer_text.clone(),
            computed: answer.text,
        });
    }
    if answer.relevant_memids != s.answer_memids {
        return Err(ValidationError::MemidMismatch);
    }
    Ok(())
}
