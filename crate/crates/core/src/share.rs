//! Exact rational shares.
//!
//! Bias thresholds and report emission both depend on answer shares. To keep
//! flagging decisions and emitted digits independent of float evaluation
//! order, shares are carried as integer rationals and only rounded (half-up,
//! three decimals) at the output boundary.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// A non-negative rational `num / den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Share {
    pub num: u64,
    pub den: u64,
}

impl Share {
    /// Creates `num / den`. Panics if `den == 0`; shares always come from
    /// non-empty histograms.
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "share denominator must be positive");
        Share { num, den }
    }

    /// Exact comparison against `thousandths / 1000`.
    pub fn cmp_thousandths(&self, thousandths: u32) -> Ordering {
        let lhs = self.num as u128 * 1000;
        let rhs = self.den as u128 * thousandths as u128;
        lhs.cmp(&rhs)
    }

    /// The share rounded half-up to thousandths.
    pub fn thousandths_half_up(&self) -> u64 {
        round_half_up(self.num as u128 * 1000, self.den as u128) as u64
    }

    /// Decimal rendering with exactly three fractional digits (`0.517`).
    pub fn display_3dp(&self) -> String {
        format_thousandths(self.thousandths_half_up() as i64)
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for Share {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Share {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Share {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_3dp())
    }
}

/// `round(a / b)` with halves rounded up, for non-negative integers.
pub fn round_half_up(a: u128, b: u128) -> u128 {
    assert!(b > 0, "division by zero");
    (2 * a + b) / (2 * b)
}

/// Convenience wrapper for `u64` quantities that provably fit.
pub fn round_half_up_u64(a: u64, b: u64) -> u64 {
    round_half_up(a as u128, b as u128) as u64
}

/// Renders a signed thousandths quantity as a fixed three-decimal string
/// (`-330` becomes `-0.330`).
pub fn format_thousandths(thousandths: i64) -> String {
    let sign = if thousandths < 0 { "-" } else { "" };
    let abs = thousandths.unsigned_abs();
    format!("{}{}.{:03}", sign, abs / 1000, abs % 1000)
}

/// Parses a decimal fraction string (`"0.2"`, `"0.125"`) into exact
/// thousandths. Rejects more than three fractional digits and values outside
/// `(0, 1)` when `open_unit` is set.
pub fn parse_thousandths(s: &str, open_unit: bool) -> Result<u32, String> {
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("invalid fraction: {s:?}"));
    }
    if frac_part.len() > 3 {
        return Err(format!(
            "fraction {s:?} has more than three decimal places; thresholds and fractions are \
             resolved in thousandths"
        ));
    }
    let int: u32 = if int_part.is_empty() {
        0
    } else {
        int_part
            .parse()
            .map_err(|_| format!("invalid fraction: {s:?}"))?
    };
    let mut frac: u32 = if frac_part.is_empty() {
        0
    } else {
        frac_part
            .parse()
            .map_err(|_| format!("invalid fraction: {s:?}"))?
    };
    for _ in frac_part.len()..3 {
        frac *= 10;
    }
    let thousandths = int * 1000 + frac;
    if open_unit && (thousandths == 0 || thousandths >= 1000) {
        return Err(format!("fraction {s:?} must lie strictly between 0 and 1"));
    }
    Ok(thousandths)
}
