use std::fmt;

use serde::{Serialize, Serializer};

/// An exact ratio kept unreduced, so that `14/1024` prints as the count over
/// the table size it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        Fraction { num, den }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Value equality regardless of representation.
    pub fn value_eq(self, other: Fraction) -> bool {
        self.num as u128 * other.den as u128 == other.num as u128 * self.den as u128
    }

    /// Decimal value rounded to `places` digits.
    pub fn rounded(self, places: i32) -> f64 {
        let scale = 10f64.powi(places);
        (self.to_f64() * scale).round() / scale
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
