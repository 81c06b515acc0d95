//! Column-to-text serialization: renders a numeric column as indexed
//! sentences ("Data 1 is 1.00. Data 2 is 2.26.") and builds the chat
//! prompt around it. Also provides the exact inverse used by the mock
//! oracle to recover the numbers from a prompt.

use crate::batch::{DetectorConfig, NamingScheme};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SerializeError {
    #[error("non-finite value at position {position}")]
    NonFinite { position: usize },
    #[error("cannot serialize an empty column")]
    EmptyColumn,
}

/// System and user message for one column of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system: String,
    pub user: String,
    pub column_index: usize,
    pub n_rows: usize,
}

/// Fixed-point rendering of `x` with exactly `decimal_places` fractional
/// digits, rounding half away from zero.
///
/// The rounding is exact: it works on the integer mantissa and binary
/// exponent of `x`, never on a scaled float, so values on a decimal
/// boundary (0.125 at two places) always round away (to "0.13").
/// `decimal_places = 0` renders a bare integer without a point.
pub fn format_value(x: f64, decimal_places: usize) -> Result<String, SerializeError> {
    if !x.is_finite() {
        return Err(SerializeError::NonFinite { position: 0 });
    }
    let negative = x.is_sign_negative();
    let scaled = round_scaled(x.abs(), decimal_places);
    let digits = scaled.to_str_radix(10);
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if decimal_places == 0 {
        out.push_str(&digits);
        return Ok(out);
    }
    let padded = if digits.len() <= decimal_places {
        format!("{digits:0>width$}", width = decimal_places + 1)
    } else {
        digits
    };
    let split = padded.len() - decimal_places;
    out.push_str(&padded[..split]);
    out.push('.');
    out.push_str(&padded[split..]);
    Ok(out)
}

/// round(|x| * 10^places) with ties away from zero, computed exactly from
/// the binary representation: |x| = m * 2^e.
fn round_scaled(x: f64, places: usize) -> BigUint {
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, exponent) = if exp_bits == 0 {
        (frac, -1074i64) // subnormal
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    let scaled = BigUint::from(mantissa) * BigUint::from(10u32).pow(places as u32);
    if exponent >= 0 {
        scaled << exponent as u64
    } else {
        let denom = BigUint::from(1u32) << (-exponent) as u64;
        let quotient = &scaled / &denom;
        let remainder = scaled - &quotient * &denom;
        if remainder * 2u32 >= denom {
            quotient + 1u32
        } else {
            quotient
        }
    }
}

/// Renders every value of a column as "<noun> i is <value>." with 1-based
/// indices, sentences joined by single spaces.
pub fn serialize_column(
    column: &[f64],
    naming: NamingScheme,
    decimal_places: usize,
) -> Result<String, SerializeError> {
    if column.is_empty() {
        return Err(SerializeError::EmptyColumn);
    }
    let noun = naming.noun();
    let mut out = String::with_capacity(column.len() * 16);
    for (i, &x) in column.iter().enumerate() {
        let value = format_value(x, decimal_places)
            .map_err(|_| SerializeError::NonFinite { position: i + 1 })?;
        if i > 0 {
            out.push(' ');
        }
        out.push_str(noun);
        out.push(' ');
        out.push_str(&(i + 1).to_string());
        out.push_str(" is ");
        out.push_str(&value);
        out.push('.');
    }
    Ok(out)
}

/// Builds the full prompt for one column: serialized data followed by the
/// task description as the user message, and the naming-appropriate
/// instruction as the system message.
pub fn build_prompt(
    column: &[f64],
    config: &DetectorConfig,
    column_index: usize,
) -> Result<PromptBundle, SerializeError> {
    let serialized = serialize_column(column, config.naming, config.decimal_places)?;
    let user = format!("{serialized} {}", config.prompt_text);
    Ok(PromptBundle {
        system: config.naming.system_message().to_string(),
        user,
        column_index,
        n_rows: column.len(),
    })
}

/// Inverts the serialization template: reads values back from text that
/// starts with "<noun> 1 is <v>. <noun> 2 is <v>. ...". Parsing stops at
/// the first sentence that does not continue the indexed template (the
/// task description); returns `None` when not even the first sentence
/// matches.
pub fn parse_serialized_column(text: &str, naming: NamingScheme) -> Option<Vec<f64>> {
    let noun = naming.noun();
    let mut rest = text;
    let mut values = Vec::new();
    loop {
        let prefix = format!("{noun} {} is ", values.len() + 1);
        let Some(tail) = rest.strip_prefix(&prefix) else { break };
        let Some((value, after)) = split_leading_number(tail) else { break };
        let Some(after) = after.strip_prefix('.') else { break };
        values.push(value);
        rest = after.strip_prefix(' ').unwrap_or(after);
    }
    if values.is_empty() {
        None
    } else {
        Some(values)
    }
}

/// Splits "<number><rest>" where number is `-?[0-9]+(\.[0-9]+)?`. The
/// fractional part is only consumed when a digit follows the dot, so the
/// sentence-terminating period stays in `rest`.
fn split_leading_number(text: &str) -> Option<(f64, &str)> {
    let bytes = text.as_bytes();
    let mut end = 0;
    if bytes.first() == Some(&b'-') {
        end = 1;
    }
    let int_start = end;
    while end < bytes.len() && bytes[end].is_ascii_digit() {
        end += 1;
    }
    if end == int_start {
        return None;
    }
    if bytes.get(end) == Some(&b'.') && bytes.get(end + 1).is_some_and(u8::is_ascii_digit) {
        end += 1;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
    }
    let value: f64 = text[..end].parse().ok()?;
    Some((value, &text[end..]))
}
