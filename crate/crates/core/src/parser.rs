//! Extracts predicted anomaly indices from model responses and renders
//! canonical ground-truth answers.
//!
//! `parse_response` is total: any input yields a prediction. It mirrors the
//! reference extraction procedure step for step — strip trailing periods,
//! keep only what follows the last ":->" marker, turn colons into spaces,
//! delete commas, split on whitespace, honor an explicit "no"/"No"/"None"
//! abstention token, then collect plain integer tokens within the guard
//! bound. Under 1-based indexing the token "0" is never a valid row, so it
//! is dropped along with out-of-range values.

use crate::batch::NamingScheme;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("indices must be strictly ascending (no duplicates)")]
    NotAscending,
    #[error("index 0 is not a valid 1-based row index")]
    ZeroIndex,
}

/// Anomaly indices read from one response.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ParsedPrediction {
    /// Predicted anomalous rows, 1-based.
    pub indices: BTreeSet<usize>,
    /// True when the response explicitly asserted there are no anomalies.
    pub abstained: bool,
}

impl ParsedPrediction {
    pub fn abstention() -> Self {
        ParsedPrediction { indices: BTreeSet::new(), abstained: true }
    }
}

/// Parses a response into the set of predicted anomaly indices, keeping
/// only integers in `1..=max_index`.
pub fn parse_response(text: &str, max_index: usize) -> ParsedPrediction {
    let stripped = text.trim_end_matches('.');
    let after_marker = match stripped.rfind(":->") {
        Some(pos) => &stripped[pos + 3..],
        None => stripped,
    };
    let cleaned = after_marker.replace(':', " ").replace(',', "");
    let tokens: Vec<&str> = cleaned.split_whitespace().collect();

    if tokens.iter().any(|t| matches!(*t, "no" | "No" | "None")) {
        return ParsedPrediction::abstention();
    }

    let mut indices = BTreeSet::new();
    for token in tokens {
        if token.bytes().all(|b| b.is_ascii_digit()) {
            // overflowing tokens are necessarily beyond the guard
            if let Ok(value) = token.parse::<usize>() {
                if (1..=max_index).contains(&value) {
                    indices.insert(value);
                }
            }
        }
    }
    ParsedPrediction { indices, abstained: false }
}

/// Renders the canonical response for a sorted list of anomaly indices:
/// "<noun> i1, i2, ... are abnormal." or the clean-batch sentence when the
/// list is empty.
pub fn render_response(indices: &[usize], naming: NamingScheme) -> Result<String, RenderError> {
    if indices.first() == Some(&0) {
        return Err(RenderError::ZeroIndex);
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(RenderError::NotAscending);
    }
    if indices.is_empty() {
        return Ok(naming.clean_response().to_string());
    }
    let list = indices.iter().map(usize::to_string).collect::<Vec<_>>().join(", ");
    Ok(format!("{} {list} are abnormal.", naming.noun()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn indices(pred: &ParsedPrediction) -> Vec<usize> {
        pred.indices.iter().copied().collect()
    }

    #[test]
    fn parse_plain_listing() {
        let p = parse_response("Data 3, 7 are abnormal.", 150);
        assert_eq!(indices(&p), vec![3, 7]);
        assert!(!p.abstained);
    }

    #[test]
    fn parse_clean_batch_answer() {
        let p = parse_response("All data are normal.", 150);
        assert!(p.indices.is_empty());
        assert!(!p.abstained);
    }

    #[test]
    fn parse_abstention_token() {
        let p = parse_response("No abnormal data found", 150);
        assert!(p.abstained);
        assert!(p.indices.is_empty());
        assert!(parse_response("the answer is None", 10).abstained);
        assert!(parse_response("no", 10).abstained);
        // only exact tokens abstain
        assert!(!parse_response("normal 3", 10).abstained);
        assert!(!parse_response("NO 3", 10).abstained);
    }

    #[test]
    fn parse_marker_and_guard() {
        let p = parse_response("Answer:-> 1 2 200", 150);
        assert_eq!(indices(&p), vec![1, 2]);
        // only the text after the *last* marker counts
        let p = parse_response("draft:-> 9 final:-> 4", 150);
        assert_eq!(indices(&p), vec![4]);
    }

    #[test]
    fn parse_colons_commas_and_dots() {
        assert_eq!(indices(&parse_response("rows:3:5", 150)), vec![3, 5]);
        assert_eq!(indices(&parse_response("1,2,3", 150)), vec![1, 2, 3]);
        // decimal tokens are not indices
        assert_eq!(indices(&parse_response("value 3.5 is off", 150)), vec![]);
        // trailing periods are stripped before tokenization
        assert_eq!(indices(&parse_response("Data 12 are abnormal..", 150)), vec![12]);
    }

    #[test]
    fn parse_rejects_zero_and_out_of_range() {
        let p = parse_response("0 1 151 99999999999999999999999", 150);
        assert_eq!(indices(&p), vec![1]);
    }

    #[test]
    fn parse_is_total_on_junk() {
        for text in ["", ".", ":->", "....", "\u{1F600} \u{FFFD}", ": , :-> ,,"] {
            let p = parse_response(text, 10);
            assert!(p.indices.is_empty(), "junk {text:?} produced {p:?}");
        }
    }

    #[test]
    fn render_forms() {
        assert_eq!(render_response(&[], NamingScheme::Data).unwrap(), "All data are normal.");
        assert_eq!(render_response(&[], NamingScheme::Row).unwrap(), "All rows are normal.");
        assert_eq!(
            render_response(&[5, 10, 13], NamingScheme::Data).unwrap(),
            "Data 5, 10, 13 are abnormal."
        );
        assert_eq!(render_response(&[2], NamingScheme::Row).unwrap(), "Row 2 are abnormal.");
        assert_eq!(render_response(&[2, 2], NamingScheme::Data), Err(RenderError::NotAscending));
        assert_eq!(render_response(&[3, 1], NamingScheme::Data), Err(RenderError::NotAscending));
        assert_eq!(render_response(&[0, 1], NamingScheme::Data), Err(RenderError::ZeroIndex));
    }

    #[test]
    fn render_parse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let n: usize = rng.random_range(1..=150);
            let count = rng.random_range(0..=n.min(12));
            let mut set = BTreeSet::new();
            while set.len() < count {
                set.insert(rng.random_range(1..=n));
            }
            let sorted: Vec<usize> = set.iter().copied().collect();
            for naming in [NamingScheme::Data, NamingScheme::Row] {
                let text = render_response(&sorted, naming).unwrap();
                let parsed = parse_response(&text, n);
                assert_eq!(parsed.indices, set, "text {text:?}");
            }
        }
    }

    #[test]
    fn parse_accepts_prose_variant_with_and() {
        // the alternative ground-truth phrasing with a final "and"
        let p = parse_response("Data 3, 5, and 9 are abnormal.", 150);
        assert_eq!(indices(&p), vec![3, 5, 9]);
        let p = parse_response("All rows are normal.", 150);
        assert!(p.indices.is_empty());
    }

    #[test]
    fn parse_never_exceeds_guard() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let alphabet: Vec<char> =
            "0123456789 ,.:->NoneNO no\tabnormal".chars().collect();
        for _ in 0..1000 {
            let len = rng.random_range(0..60);
            let text: String =
                (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect();
            let guard = rng.random_range(1..=30);
            let p = parse_response(&text, guard);
            assert!(p.indices.iter().all(|&i| i >= 1 && i <= guard));
            if p.abstained {
                assert!(p.indices.is_empty());
            }
        }
    }
}
