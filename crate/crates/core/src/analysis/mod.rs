//! Cryptanalytic metrics of an S-box of any width up to 16 bits.

pub mod avalanche;
pub mod degree;
pub mod gf;
pub mod tables;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fraction::Fraction;
use crate::sbox::SBox;

pub use avalanche::{bic_parameter, sac_matrix, SacMatrix};
pub use degree::component_degrees;
pub use gf::{algebraic_complexity, default_modulus, interpolant, GaloisField, Interpolant, AES_MODULUS, GF1024_MODULUS};
pub use tables::{
    bct, boomerang_uniformity, ddt, differential_uniformity, lat, nonlinearity, nonlinearity_from_lat,
    DistributionTable, TableKind,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub bits: u32,
    pub min_degree: u32,
    pub max_degree: u32,
    /// Dense coefficient count of the interpolant, `degree + 1`.
    pub algebraic_complexity: u32,
    pub interpolation_terms: u32,
    pub interpolation_degree: u32,
    pub field_modulus: String,
    pub nonlinearity: u32,
    pub linear_prob_max: Fraction,
    pub sac_avg: Fraction,
    pub sac_min: Fraction,
    pub sac_max: Fraction,
    pub bic_parameter: f64,
    /// Maximal linear bias `(2^(n-1) - NL) / 2^n`.
    pub lap: Fraction,
    pub dap: Fraction,
    pub differential_uniformity: u32,
    pub boomerang_uniformity: u32,
}

impl MetricsReport {
    pub fn check_invariants(&self) -> Result<()> {
        let size = 1u64 << self.bits;
        let half = size / 2;
        let mut broken = Vec::new();
        if !self.dap.value_eq(Fraction::new(self.differential_uniformity as u64, size)) {
            broken.push("dap != DU / 2^n");
        }
        let bias = half.saturating_sub(self.nonlinearity as u64);
        if !self.lap.value_eq(Fraction::new(bias, size)) {
            broken.push("lap != (2^(n-1) - NL) / 2^n");
        }
        if !self.linear_prob_max.value_eq(Fraction::new(half + bias, size)) {
            broken.push("linear_prob_max != 1/2 + lap");
        }
        if self.algebraic_complexity != self.interpolation_degree + 1 {
            broken.push("algebraic_complexity != interpolation_degree + 1");
        }
        if self.interpolation_terms > self.algebraic_complexity || self.algebraic_complexity >= size as u32 {
            broken.push("interpolant larger than the field allows");
        }
        if broken.is_empty() {
            Ok(())
        } else {
            Err(Error::Parse(format!("inconsistent report: {}", broken.join(", "))))
        }
    }
}

/// `lap` as the bias, and the corresponding maximal probability `1/2 + bias`.
pub fn linear_probabilities(bits: u32, nonlinearity: u32) -> (Fraction, Fraction) {
    let size = 1u64 << bits;
    let bias = (size / 2).saturating_sub(nonlinearity as u64);
    (Fraction::new(bias, size), Fraction::new(size / 2 + bias, size))
}

pub fn dap(s: &SBox) -> Fraction {
    Fraction::new(differential_uniformity(s) as u64, s.len() as u64)
}

/// Every metric, with the interpolation over `field_modulus` (or the default
/// modulus for the width).
pub fn full_report(s: &SBox, field_modulus: Option<u64>) -> Result<MetricsReport> {
    if s.bits() > 16 {
        return Err(Error::UnsupportedWidth(s.bits()));
    }
    let size = s.len() as u64;
    let modulus = field_modulus.unwrap_or_else(|| default_modulus(s.bits()));
    let poly = interpolant(s, modulus)?;
    let (min_degree, max_degree) = component_degrees(s);
    let nl = nonlinearity(s);
    let (lap, linear_prob_max) = linear_probabilities(s.bits(), nl);
    let du = differential_uniformity(s);
    let sac = sac_matrix(s);
    let report = MetricsReport {
        bits: s.bits(),
        min_degree,
        max_degree,
        algebraic_complexity: poly.complexity(),
        interpolation_terms: poly.terms,
        interpolation_degree: poly.degree,
        field_modulus: format!("{modulus:#x}"),
        nonlinearity: nl,
        linear_prob_max,
        sac_avg: sac.average(),
        sac_min: sac.min(),
        sac_max: sac.max(),
        bic_parameter: bic_parameter(s),
        lap,
        dap: Fraction::new(du as u64, size),
        differential_uniformity: du,
        boomerang_uniformity: boomerang_uniformity(s),
    };
    report.check_invariants()?;
    Ok(report)
}
