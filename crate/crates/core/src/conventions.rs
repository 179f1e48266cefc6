//! Conventions the construction depends on that the algebra alone does not pin
//! down. [`Conventions::DEFAULT`] is the variant that reproduces the published
//! metric triple (nonlinearity 434, differential uniformity 14, boomerang
//! uniformity 24); `casbox calibrate` re-derives it from scratch.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::Error;

/// How a rule number maps onto the 32-entry truth table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BitOrder {
    /// Bit `x` of the number is `f(x)`.
    LsbFirst,
    /// Bit `31 - x` of the number is `f(x)` (Wolfram-style).
    MsbFirst,
}

/// Which ring cell feeds which rule variable.
///
/// Cell `i` is updated from the five cells at offsets `-2..=2` around it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Neighborhood {
    /// `x0..x4` read offsets `-2, -1, 0, +1, +2`.
    Ascending,
    /// `x0..x4` read offsets `+2, +1, 0, -1, -2`.
    Descending,
}

impl Neighborhood {
    /// Ring offset read by variable `var` (0..5).
    pub const fn offset(self, var: usize) -> isize {
        match self {
            Neighborhood::Ascending => var as isize - 2,
            Neighborhood::Descending => 2 - var as isize,
        }
    }
}

/// Which half of a 10-bit block is the Feistel left half.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HalfPacking {
    /// `block = L * 32 + R`.
    LeftHigh,
    /// `block = R * 32 + L`.
    LeftLow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Conventions {
    pub bit_order: BitOrder,
    pub neighborhood: Neighborhood,
    pub packing: HalfPacking,
    /// Swap the halves once more after the last layer.
    pub final_swap: bool,
}

impl Conventions {
    pub const DEFAULT: Conventions = Conventions {
        bit_order: BitOrder::LsbFirst,
        neighborhood: Neighborhood::Descending,
        packing: HalfPacking::LeftLow,
        final_swap: false,
    };

    /// All 16 combinations, in a fixed order.
    pub fn all() -> Vec<Conventions> {
        let mut out = Vec::with_capacity(16);
        for bit_order in [BitOrder::LsbFirst, BitOrder::MsbFirst] {
            for neighborhood in [Neighborhood::Ascending, Neighborhood::Descending] {
                for packing in [HalfPacking::LeftHigh, HalfPacking::LeftLow] {
                    for final_swap in [false, true] {
                        out.push(Conventions {
                            bit_order,
                            neighborhood,
                            packing,
                            final_swap,
                        });
                    }
                }
            }
        }
        out
    }
}

impl Default for Conventions {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for BitOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BitOrder::LsbFirst => "lsb-first",
            BitOrder::MsbFirst => "msb-first",
        })
    }
}

impl fmt::Display for Neighborhood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Neighborhood::Ascending => "ascending",
            Neighborhood::Descending => "descending",
        })
    }
}

impl fmt::Display for HalfPacking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HalfPacking::LeftHigh => "left-high",
            HalfPacking::LeftLow => "left-low",
        })
    }
}

impl fmt::Display for Conventions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "bit-order={} neighborhood={} packing={} final-swap={}",
            self.bit_order, self.neighborhood, self.packing, self.final_swap
        )
    }
}

macro_rules! parse_enum {
    ($ty:ty, $kind:literal, $($text:literal => $variant:expr),+ $(,)?) => {
        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self, Error> {
                match s {
                    $($text => Ok($variant),)+
                    _ => Err(Error::UnknownName { kind: $kind, name: s.to_string() }),
                }
            }
        }
    };
}

parse_enum!(BitOrder, "bit order", "lsb-first" => BitOrder::LsbFirst, "msb-first" => BitOrder::MsbFirst);
parse_enum!(Neighborhood, "neighborhood", "ascending" => Neighborhood::Ascending, "descending" => Neighborhood::Descending);
parse_enum!(HalfPacking, "half packing", "left-high" => HalfPacking::LeftHigh, "left-low" => HalfPacking::LeftLow);
