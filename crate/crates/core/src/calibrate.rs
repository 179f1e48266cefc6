//! Sweep over every convention combination, scoring each S-box against
//! reference metrics.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{boomerang_uniformity, differential_uniformity, nonlinearity};
use crate::boolfn::BooleanRule;
use crate::conventions::Conventions;
use crate::error::Result;
use crate::sbox::{build_sbox, LayerSpec};

/// Nonlinearity, differential uniformity and boomerang uniformity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Target {
    pub nonlinearity: u32,
    pub differential_uniformity: u32,
    pub boomerang_uniformity: u32,
}

/// Published metrics of the selected rule's S-box.
pub const REFERENCE: Target = Target {
    nonlinearity: 434,
    differential_uniformity: 14,
    boomerang_uniformity: 24,
};

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationRow {
    pub conventions: Conventions,
    pub metrics: Target,
    pub matches: bool,
}

/// One row per combination, in [`Conventions::all`] order.
pub fn calibrate(rule_number: u32, target: Target) -> Result<Vec<CalibrationRow>> {
    Conventions::all()
        .into_par_iter()
        .map(|conventions| {
            let rule = BooleanRule::from_number_with(rule_number as u64, conventions.bit_order)?;
            let s = build_sbox(&LayerSpec::eleven_layer_with(rule, &conventions))?;
            let metrics = Target {
                nonlinearity: nonlinearity(&s),
                differential_uniformity: differential_uniformity(&s),
                boomerang_uniformity: boomerang_uniformity(&s),
            };
            Ok(CalibrationRow {
                conventions,
                metrics,
                matches: metrics == target,
            })
        })
        .collect()
}

pub fn first_match(rows: &[CalibrationRow]) -> Option<Conventions> {
    rows.iter().find(|r| r.matches).map(|r| r.conventions)
}
