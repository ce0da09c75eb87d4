//! Exact-match scoring of predicted answers against a dataset.
//!
//! The error is the fraction of samples whose predicted answer differs from
//! the reference after collapsing whitespace.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::query::QueryClass;
use crate::record::{read_jsonl, RecordError};

/// A predicted answer. Dataset records also deserialize as predictions, so
/// a dataset scored against itself has error 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub answer_text: String,
}

/// The fields of a dataset record that scoring needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub id: String,
    pub answer_text: String,
    pub query_class: QueryClass,
}

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("no references to score")]
    Empty,
    #[error("predictions and references are not aligned: {}", describe_alignment(.missing, .unknown, .duplicates))]
    Alignment {
        /// Reference ids without a prediction.
        missing: Vec<String>,
        /// Prediction ids without a reference.
        unknown: Vec<String>,
        duplicates: Vec<String>,
    },
}

fn describe_alignment(missing: &[String], unknown: &[String], duplicates: &[String]) -> String {
    let list = |v: &[String]| {
        let mut s = v.iter().take(5).cloned().collect::<Vec<_>>().join(", ");
        if v.len() > 5 {
            s.push_str(&format!(" and {} more", v.len() - 5));
        }
        s
    };
    let mut parts = Vec::new();
    if !missing.is_empty() {
        parts.push(format!("missing predictions for [{}]", list(missing)));
    }
    if !unknown.is_empty() {
        parts.push(format!("unknown prediction ids [{}]", list(unknown)));
    }
    if !duplicates.is_empty() {
        parts.push(format!("duplicate ids [{}]", list(duplicates)));
    }
    parts.join("; ")
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub n: usize,
    pub errors: usize,
    pub exact_match_error: f64,
}

impl Tally {
    fn add(&mut self, wrong: bool) {
        self.n += 1;
        self.errors += usize::from(wrong);
        self.exact_match_error = self.errors as f64 / self.n as f64;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub overall: Tally,
    pub per_class: BTreeMap<String, Tally>,
}

pub fn normalize_answer(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn duplicates<'a>(ids: impl Iterator<Item = &'a str>) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    ids.filter(|id| !seen.insert(*id)).map(str::to_string).collect()
}

pub fn score(predictions: &[Prediction], references: &[Reference]) -> Result<ScoreReport, ScoreError> {
    if references.is_empty() {
        return Err(ScoreError::Empty);
    }
    let mut dups = duplicates(references.iter().map(|r| r.id.as_str()));
    dups.extend(duplicates(predictions.iter().map(|p| p.id.as_str())));
    let by_id: BTreeMap<&str, &Prediction> = predictions.iter().map(|p| (p.id.as_str(), p)).collect();
    let ref_ids: BTreeSet<&str> = references.iter().map(|r| r.id.as_str()).collect();
    let missing: Vec<String> = references
        .iter()
        .filter(|r| !by_id.contains_key(r.id.as_str()))
        .map(|r| r.id.clone())
        .collect();
    let unknown: Vec<String> = predictions
        .iter()
        .filter(|p| !ref_ids.contains(p.id.as_str()))
        .map(|p| p.id.clone())
        .collect();
    if !(missing.is_empty() && unknown.is_empty() && dups.is_empty()) {
        return Err(ScoreError::Alignment {
            missing,
            unknown,
            duplicates: dups.into_iter().collect(),
        });
    }
    let mut report = ScoreReport::default();
    for r in references {
        let wrong = normalize_answer(&by_id[r.id.as_str()].answer_text) != normalize_answer(&r.answer_text);
        report.overall.add(wrong);
        report.per_class.entry(r.query_class.as_str().to_string()).or_default().add(wrong);
    }
    Ok(report)
}

pub fn score_files(predictions: &Path, references: &Path) -> Result<ScoreReport, ScoreError> {
    let p: Vec<Prediction> = read_jsonl(predictions)?;
    let r: Vec<Reference> = read_jsonl(references)?;
    score(&p, &r)
}
