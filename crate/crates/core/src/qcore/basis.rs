//! Local bases and outcome labels for the coin and spin qubits.
//!
//! Every label is expressed in computational coordinates with index 0 = `h`/`↓`
//! and index 1 = `t`/`↑`:
//!
//! | basis  | label 0                    | label 1                   |
//! |--------|----------------------------|---------------------------|
//! | `Zbar` | `h`                        | `t`                       |
//! | `Wbar` | `okbar = (h − t)/√2`       | `failbar = (h + t)/√2`    |
//! | `Z`    | `down`                     | `up`                      |
//! | `W`    | `ok = (↑ − ↓)/√2`          | `fail = (↑ + ↓)/√2`       |
//! | `Axis` | `plus_a = sin(θ/2)↓+cos(θ/2)↑` | `minus_a = cos(θ/2)↓−sin(θ/2)↑` |

use std::cmp::Ordering;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use nalgebra::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Coin,
    Spin,
}

impl SystemKind {
    pub fn computational(self) -> Basis {
        match self {
            SystemKind::Coin => Basis::Zbar,
            SystemKind::Spin => Basis::Z,
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemKind::Coin => f.write_str("coin"),
            SystemKind::Spin => f.write_str("spin"),
        }
    }
}

/// Measurement angle on the x–z great circle, reduced to `[0, 2π)`.
#[derive(Clone, Copy, Debug)]
pub struct Angle(f64);

impl Angle {
    pub fn new(radians: f64) -> Self {
        let r = radians.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU
        Angle(if r >= TAU { 0.0 } else { r })
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

impl PartialEq for Angle {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Angle {}

impl Hash for Angle {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl PartialOrd for Angle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Angle {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    Zbar,
    Wbar,
    Z,
    W,
    Axis(Angle),
}

impl Basis {
    pub fn axis(radians: f64) -> Self {
        Basis::Axis(Angle::new(radians))
    }

    pub fn system_kind(self) -> SystemKind {
        match self {
            Basis::Zbar | Basis::Wbar => SystemKind::Coin,
            Basis::Z | Basis::W | Basis::Axis(_) => SystemKind::Spin,
        }
    }

    pub fn outcomes(self) -> [Outcome; 2] {
        [Outcome { basis: self, index: 0 }, Outcome { basis: self, index: 1 }]
    }

    /// The two basis vectors in label order, in computational coordinates.
    pub fn vectors(self) -> [[C64; 2]; 2] {
        let r = |x: f64| C64::new(x, 0.0);
        let s = FRAC_1_SQRT_2;
        match self {
            Basis::Zbar | Basis::Z => [[r(1.0), r(0.0)], [r(0.0), r(1.0)]],
            Basis::Wbar => [[r(s), r(-s)], [r(s), r(s)]],
            Basis::W => [[r(-s), r(s)], [r(s), r(s)]],
            Basis::Axis(a) => {
                let (sin, cos) = (a.radians() / 2.0).sin_cos();
                [[r(sin), r(cos)], [r(cos), r(-sin)]]
            }
        }
    }

    pub fn name(self) -> String {
        match self {
            Basis::Zbar => "Zbar".into(),
            Basis::Wbar => "Wbar".into(),
            Basis::Z => "Z".into(),
            Basis::W => "W".into(),
            Basis::Axis(a) => format!("Axis({})", a.radians()),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// One outcome of a two-outcome local measurement: a basis plus the label index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome {
    basis: Basis,
    index: usize,
}

impl Outcome {
    pub const H: Outcome = Outcome { basis: Basis::Zbar, index: 0 };
    pub const T: Outcome = Outcome { basis: Basis::Zbar, index: 1 };
    pub const OK_BAR: Outcome = Outcome { basis: Basis::Wbar, index: 0 };
    pub const FAIL_BAR: Outcome = Outcome { basis: Basis::Wbar, index: 1 };
    pub const DOWN: Outcome = Outcome { basis: Basis::Z, index: 0 };
    pub const UP: Outcome = Outcome { basis: Basis::Z, index: 1 };
    pub const OK: Outcome = Outcome { basis: Basis::W, index: 0 };
    pub const FAIL: Outcome = Outcome { basis: Basis::W, index: 1 };

    pub fn new(basis: Basis, index: usize) -> Result<Self> {
        if index > 1 {
            return Err(Error::UnknownLabel(format!("index {index} in basis {basis}")));
        }
        Ok(Outcome { basis, index })
    }

    pub fn plus(radians: f64) -> Self {
        Outcome { basis: Basis::axis(radians), index: 0 }
    }

    pub fn minus(radians: f64) -> Self {
        Outcome { basis: Basis::axis(radians), index: 1 }
    }

    pub fn basis(self) -> Basis {
        self.basis
    }

    pub fn index(self) -> usize {
        self.index
    }

    pub fn system_kind(self) -> SystemKind {
        self.basis.system_kind()
    }

    /// The orthogonal label of the same basis.
    pub fn negation(self) -> Self {
        Outcome { basis: self.basis, index: 1 - self.index }
    }

    /// `+1` for label index 0, `−1` for index 1.
    pub fn sign(self) -> f64 {
        if self.index == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn vector(self) -> [C64; 2] {
        self.basis.vectors()[self.index]
    }

    pub fn name(self) -> String {
        match (self.basis, self.index) {
            (Basis::Zbar, 0) => "h".into(),
            (Basis::Zbar, _) => "t".into(),
            (Basis::Wbar, 0) => "okbar".into(),
            (Basis::Wbar, _) => "failbar".into(),
            (Basis::Z, 0) => "down".into(),
            (Basis::Z, _) => "up".into(),
            (Basis::W, 0) => "ok".into(),
            (Basis::W, _) => "fail".into(),
            (Basis::Axis(a), 0) => format!("plus_a({})", a.radians()),
            (Basis::Axis(a), _) => format!("minus_a({})", a.radians()),
        }
    }

    /// Short symbol used in rendered tables.
    pub fn symbol(self) -> String {
        match (self.basis, self.index) {
            (Basis::Z, 0) => "↓".into(),
            (Basis::Z, _) => "↑".into(),
            _ => self.name(),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let angled = |prefix: &str| -> Option<f64> {
            s.strip_prefix(prefix)?.strip_suffix(')')?.parse().ok()
        };
        Ok(match s {
            "h" => Outcome::H,
            "t" => Outcome::T,
            "okbar" => Outcome::OK_BAR,
            "failbar" => Outcome::FAIL_BAR,
            "down" => Outcome::DOWN,
            "up" => Outcome::UP,
            "ok" => Outcome::OK,
            "fail" => Outcome::FAIL,
            _ => {
                if let Some(a) = angled("plus_a(") {
                    Outcome::plus(a)
                } else if let Some(a) = angled("minus_a(") {
                    Outcome::minus(a)
                } else {
                    return Err(Error::UnknownLabel(s.to_string()));
                }
            }
        })
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Serialize for Basis {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Basis {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        match s.as_str() {
            "Zbar" => Ok(Basis::Zbar),
            "Wbar" => Ok(Basis::Wbar),
            "Z" => Ok(Basis::Z),
            "W" => Ok(Basis::W),
            _ => s
                .strip_prefix("Axis(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|r| r.parse::<f64>().ok())
                .map(Basis::axis)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown basis {s}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inner(a: [C64; 2], b: [C64; 2]) -> C64 {
        a[0].conj() * b[0] + a[1].conj() * b[1]
    }

    #[test]
    fn every_basis_is_orthonormal() {
        for basis in [Basis::Zbar, Basis::Wbar, Basis::Z, Basis::W, Basis::axis(0.3), Basis::axis(-2.0)] {
            let [a, b] = basis.vectors();
            assert!((inner(a, a).re - 1.0).abs() < 1e-15);
            assert!((inner(b, b).re - 1.0).abs() < 1e-15);
            assert!(inner(a, b).norm() < 1e-15);
        }
    }

    #[test]
    fn ok_and_fail_follow_the_stated_signs() {
        let s = FRAC_1_SQRT_2;
        // ok = (up - down)/√2, okbar = (h - t)/√2
        assert_eq!(Outcome::OK.vector(), [C64::new(-s, 0.0), C64::new(s, 0.0)]);
        assert_eq!(Outcome::OK_BAR.vector(), [C64::new(s, 0.0), C64::new(-s, 0.0)]);
        assert_eq!(Outcome::FAIL.vector(), [C64::new(s, 0.0), C64::new(s, 0.0)]);
    }

    #[test]
    fn labels_belong_to_their_system() {
        for o in [Outcome::H, Outcome::T, Outcome::OK_BAR, Outcome::FAIL_BAR] {
            assert_eq!(o.system_kind(), SystemKind::Coin);
        }
        for o in [Outcome::UP, Outcome::DOWN, Outcome::OK, Outcome::FAIL, Outcome::plus(1.0)] {
            assert_eq!(o.system_kind(), SystemKind::Spin);
        }
    }

    #[test]
    fn names_parse_back() {
        for o in [Outcome::H, Outcome::FAIL_BAR, Outcome::UP, Outcome::OK, Outcome::minus(0.75)] {
            assert_eq!(o.name().parse::<Outcome>().unwrap(), o);
        }
        assert!("sideways".parse::<Outcome>().is_err());
    }

    #[test]
    fn angles_reduce_mod_two_pi() {
        assert_eq!(Angle::new(-std::f64::consts::PI), Angle::new(std::f64::consts::PI));
        assert_eq!(Angle::new(TAU).radians(), 0.0);
    }
}
