//! Construction and cryptanalysis of a 10-bit S-box built from a Feistel
//! network whose round permutations are one step of a 5-cell ring cellular
//! automaton.
//!
//! The crate is split along the pipeline:
//!
//! * [`boolfn`] - 5-variable Boolean rules: truth table, ANF, Walsh spectrum and
//!   the cryptographic predicates used to filter rules.
//! * [`ca`] - ring cellular automaton (5-cell permutation, 1024-cell PRNG).
//! * [`fips`] - FIPS 140-2 statistical battery.
//! * [`rulesearch`] - staged filtering of the 2^32 rule space with checkpoints.
//! * [`sbox`] - the eleven-layer affine/Feistel S-box builder.
//! * [`analysis`] - DDT/LAT/BCT and the full metric suite for any S-box.
//! * [`calibrate`] - sweep over the convention choices.
//!
//! Every convention the construction depends on but that is not fixed by the
//! algebra lives in [`conventions`]; the defaults there are frozen by tests.

pub mod analysis;
pub mod boolfn;
pub mod ca;
pub mod calibrate;
pub mod conventions;
pub mod error;
pub mod fips;
pub mod fraction;
pub mod rulesearch;
pub mod sbox;

pub use boolfn::{Anf, BooleanRule, WalshSpectrum};
pub use ca::{CaRule, PrngConfig, RingState};
pub use conventions::Conventions;
pub use error::{Error, Result};
pub use fraction::Fraction;
pub use sbox::{LayerSpec, SBox};

/// Decimal number of the rule selected by the search.
pub const SELECTED_RULE: u32 = 1_438_886_595;

/// Writes to a temporary file in the target directory, then renames it over
/// `path`, so readers never see a partial file.
pub fn write_atomic(path: &std::path::Path, contents: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(std::path::Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
