//! Probability formatting: round-trippable decimal strings and small rationals.

use crate::error::{Error, Result};

const SIGNIFICANT: i32 = 17;

/// Fixed-point decimal with 17 significant digits; parses back to the same `f64`.
pub fn decimal(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.1}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT - 1 - magnitude).max(1) as usize;
    format!("{x:.decimals$}")
}

pub fn parse_decimal(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::UnknownLabel(format!("not a decimal: {s}")))
}

/// Nearest fraction `p/q` with `q ≤ max_den`, if it lies within `tol` of `x`.
pub fn nearest_rational(x: f64, max_den: u64, tol: f64) -> Option<(i64, u64)> {
    (1..=max_den)
        .filter_map(|q| {
            let p = (x * q as f64).round();
            let err = (x - p / q as f64).abs();
            (err <= tol).then_some((p as i64, q))
        })
        .next()
}

/// Decimal with 15 significant digits followed by the small rational, if any.
pub fn display_probability(x: f64) -> String {
    let dec = if x == 0.0 {
        "0".to_string()
    } else {
        let magnitude = x.abs().log10().floor() as i32;
        let decimals = (14 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    };
    match nearest_rational(x, 144, 1e-12) {
        Some((0, _)) => format!("{dec} (0)"),
        Some((p, 1)) => format!("{dec} ({p})"),
        Some((p, q)) => format!("{dec} ({p}/{q})"),
        None => dec,
    }
}

/// serde adapter storing an `f64` as a [`decimal`] string.
pub mod decimal_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&super::decimal(*x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        let s = String::deserialize(deserializer)?;
        super::parse_decimal(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_round_trip() {
        for x in [1.0 / 12.0, 0.75, 5.0 / 12.0, 1.0 / 3.0, 2.0 * 2f64.sqrt(), 1e-7, 0.0, 1.0] {
            assert_eq!(parse_decimal(&decimal(x)).unwrap(), x, "{}", decimal(x));
        }
        assert_eq!(decimal(0.25), "0.25000000000000000");
    }

    #[test]
    fn at_least_fifteen_significant_digits() {
        let s = decimal(1.0 / 12.0);
        let digits = s.trim_start_matches("0.").trim_start_matches('0');
        assert!(digits.len() >= 15, "{s}");
    }

    #[test]
    fn small_rationals() {
        assert_eq!(nearest_rational(1.0 / 12.0, 144, 1e-12), Some((1, 12)));
        assert_eq!(nearest_rational(5.0 / 12.0, 144, 1e-12), Some((5, 12)));
        assert_eq!(nearest_rational(0.0, 144, 1e-12), Some((0, 1)));
        assert_eq!(nearest_rational(2f64.sqrt(), 144, 1e-12), None);
        assert_eq!(display_probability(0.75), "0.750000000000000 (3/4)");
    }
}
