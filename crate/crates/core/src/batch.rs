//! Shared data model: numeric batches, per-row anomaly scores, naming
//! schemes, and detector configuration.

use serde::{Deserialize, Serialize};
use std::str::FromStr;
use thiserror::Error;

/// Task description appended to every serialized column.
pub const DEFAULT_PROMPT_TEXT: &str =
    "Abnormal data are different from the majority. Which data are abnormal?";

#[derive(Debug, Error, PartialEq)]
pub enum BatchError {
    #[error("batch must have at least one row and one column")]
    Empty,
    #[error("row {row} has {len} columns, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },
    #[error("labels length {labels} does not match row count {rows}")]
    LabelLength { labels: usize, rows: usize },
    #[error("label for row {row} is {value}, expected 0 or 1")]
    NonBinaryLabel { row: usize, value: u8 },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("row_ids must be {rows} unique positive integers, got {reason}")]
    BadRowIds { rows: usize, reason: String },
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
}

/// A batch of N rows by K columns of real numbers, optionally labeled.
///
/// Labels mark anomalies (1) against normal rows (0) and are only used for
/// evaluation; detection never sees them. `row_ids` are 1-based display
/// indices, contiguous `1..=N` unless the batch was subsampled from a
/// larger one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataBatch {
    rows: Vec<Vec<f64>>,
    labels: Option<Vec<u8>>,
    row_ids: Vec<usize>,
}

impl DataBatch {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, BatchError> {
        Self::build(rows, None, None)
    }

    pub fn with_labels(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self, BatchError> {
        Self::build(rows, Some(labels), None)
    }

    /// Construct with explicit row ids (used when subsampling keeps the
    /// original identities).
    pub fn with_parts(
        rows: Vec<Vec<f64>>,
        labels: Option<Vec<u8>>,
        row_ids: Vec<usize>,
    ) -> Result<Self, BatchError> {
        Self::build(rows, labels, Some(row_ids))
    }

    fn build(
        rows: Vec<Vec<f64>>,
        labels: Option<Vec<u8>>,
        row_ids: Option<Vec<usize>>,
    ) -> Result<Self, BatchError> {
        let n = rows.len();
        let row_ids = row_ids.unwrap_or_else(|| (1..=n).collect());
        let batch = DataBatch { rows, labels, row_ids };
        validate_batch(&batch)?;
        Ok(batch)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Copy of column `k` in row order.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[k]).collect()
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }
}

/// Checks every `DataBatch` invariant and returns the batch's shape errors.
///
/// Idempotent: constructors already enforce the invariants, but batches
/// arriving through deserialization are re-checked before detection.
pub fn validate_batch(batch: &DataBatch) -> Result<(), BatchError> {
    let n = batch.rows.len();
    if n == 0 {
        return Err(BatchError::Empty);
    }
    let k = batch.rows[0].len();
    if k == 0 {
        return Err(BatchError::Empty);
    }
    for (i, row) in batch.rows.iter().enumerate() {
        if row.len() != k {
            return Err(BatchError::RaggedRow { row: i + 1, len: row.len(), expected: k });
        }
        for (j, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(BatchError::NonFinite { row: i + 1, col: j + 1 });
            }
        }
    }
    if let Some(labels) = &batch.labels {
        if labels.len() != n {
            return Err(BatchError::LabelLength { labels: labels.len(), rows: n });
        }
        for (i, &l) in labels.iter().enumerate() {
            if l > 1 {
                return Err(BatchError::NonBinaryLabel { row: i + 1, value: l });
            }
        }
    }
    if batch.row_ids.len() != n {
        return Err(BatchError::BadRowIds {
            rows: n,
            reason: format!("{} ids", batch.row_ids.len()),
        });
    }
    let mut seen = batch.row_ids.clone();
    seen.sort_unstable();
    if seen.first() == Some(&0) {
        return Err(BatchError::BadRowIds { rows: n, reason: "id 0".into() });
    }
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(BatchError::BadRowIds { rows: n, reason: "duplicate id".into() });
    }
    Ok(())
}

/// Per-row anomaly scores: the number of columns that flagged each row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnomalyScores {
    scores: Vec<u32>,
}

impl AnomalyScores {
    pub fn from_counts(scores: Vec<u32>) -> Self {
        AnomalyScores { scores }
    }

    pub fn counts(&self) -> &[u32] {
        &self.scores
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.scores.iter().map(|&s| s as f64).collect()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// How rows are referred to in prompts and responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamingScheme {
    Data,
    Row,
}

impl NamingScheme {
    pub fn noun(self) -> &'static str {
        match self {
            NamingScheme::Data => "Data",
            NamingScheme::Row => "Row",
        }
    }

    pub fn system_message(self) -> &'static str {
        match self {
            NamingScheme::Data => "Only answer data indices.",
            NamingScheme::Row => "Only answer row numbers.",
        }
    }

    /// Canonical response for a batch with no anomalies.
    pub fn clean_response(self) -> &'static str {
        match self {
            NamingScheme::Data => "All data are normal.",
            NamingScheme::Row => "All rows are normal.",
        }
    }

    /// The full output grammar for this naming as a regular expression,
    /// suitable for [`crate::constrain::PatternAutomaton::compile`].
    pub fn response_pattern(self) -> String {
        format!(
            r"(({noun} [0-9]+(, [0-9]+)* are abnormal\.)|({clean}))",
            noun = self.noun(),
            clean = self.clean_response().replace('.', r"\.")
        )
    }
}

impl FromStr for NamingScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "data" => Ok(NamingScheme::Data),
            "row" => Ok(NamingScheme::Row),
            other => Err(format!("unknown naming scheme `{other}` (expected `data` or `row`)")),
        }
    }
}

/// Detection pipeline settings shared by every column request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub naming: NamingScheme,
    pub max_parallel_columns: usize,
    pub prompt_text: String,
    pub decimal_places: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            naming: NamingScheme::Data,
            max_parallel_columns: 4,
            prompt_text: DEFAULT_PROMPT_TEXT.to_string(),
            decimal_places: 2,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), BatchError> {
        if self.decimal_places < 1 {
            return Err(BatchError::InvalidConfig("decimal_places must be >= 1".into()));
        }
        if self.max_parallel_columns < 1 {
            return Err(BatchError::InvalidConfig("max_parallel_columns must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_labeled_batch() {
        let b = DataBatch::with_labels(
            vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            vec![0, 0, 1],
        )
        .unwrap();
        assert_eq!(b.n_rows(), 3);
        assert_eq!(b.n_cols(), 2);
        assert_eq!(b.row_ids(), &[1, 2, 3]);
        assert_eq!(b.column(1), vec![2.0, 4.0, 6.0]);
    }

    #[test]
    fn label_length_mismatch_rejected() {
        let err = DataBatch::with_labels(
            vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            vec![0, 1],
        )
        .unwrap_err();
        assert_eq!(err, BatchError::LabelLength { labels: 2, rows: 3 });
    }

    #[test]
    fn non_finite_rejected() {
        let err = DataBatch::new(vec![vec![1.0], vec![f64::NAN]]).unwrap_err();
        assert_eq!(err, BatchError::NonFinite { row: 2, col: 1 });
        let err = DataBatch::new(vec![vec![f64::INFINITY]]).unwrap_err();
        assert_eq!(err, BatchError::NonFinite { row: 1, col: 1 });
    }

    #[test]
    fn empty_and_ragged_rejected() {
        assert_eq!(DataBatch::new(vec![]).unwrap_err(), BatchError::Empty);
        assert_eq!(DataBatch::new(vec![vec![]]).unwrap_err(), BatchError::Empty);
        let err = DataBatch::new(vec![vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert_eq!(err, BatchError::RaggedRow { row: 2, len: 1, expected: 2 });
    }

    #[test]
    fn validate_is_idempotent() {
        let b = DataBatch::new(vec![vec![1.0], vec![2.0]]).unwrap();
        validate_batch(&b).unwrap();
        validate_batch(&b).unwrap();
    }

    #[test]
    fn row_ids_must_be_unique_positive() {
        let err = DataBatch::with_parts(vec![vec![1.0], vec![2.0]], None, vec![1, 1]);
        assert!(matches!(err, Err(BatchError::BadRowIds { .. })));
        let err = DataBatch::with_parts(vec![vec![1.0]], None, vec![0]);
        assert!(matches!(err, Err(BatchError::BadRowIds { .. })));
        // non-contiguous ids are fine (subsampled batch)
        DataBatch::with_parts(vec![vec![1.0], vec![2.0]], None, vec![7, 3]).unwrap();
    }

    #[test]
    fn naming_wordings() {
        assert_eq!(NamingScheme::Data.system_message(), "Only answer data indices.");
        assert_eq!(NamingScheme::Row.system_message(), "Only answer row numbers.");
        assert_eq!(NamingScheme::Data.clean_response(), "All data are normal.");
        assert_eq!(NamingScheme::Row.clean_response(), "All rows are normal.");
        assert_eq!("ROW".parse::<NamingScheme>().unwrap(), NamingScheme::Row);
        assert!("column".parse::<NamingScheme>().is_err());
    }

    #[test]
    fn config_bounds() {
        let cfg = DetectorConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.decimal_places, 2);
        let bad = DetectorConfig { decimal_places: 0, ..DetectorConfig::default() };
        assert!(bad.validate().is_err());
        let bad = DetectorConfig { max_parallel_columns: 0, ..DetectorConfig::default() };
        assert!(bad.validate().is_err());
    }
}
