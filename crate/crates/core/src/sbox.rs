//! The 10-bit S-box: three whole-block affine maps `x -> a*x + b mod 1024`
//! interleaved with eight Feistel rounds whose round function is the 5-cell
//! CA permutation.
//!
//! Default layer order: `Affine(5,3)`, 4 rounds, `Affine(7,11)`, 3 rounds,
//! `Affine(13,17)`, 1 round.

use std::fmt;
use std::io::{BufRead, Write};

use crate::boolfn::BooleanRule;
use crate::ca::CaRule;
use crate::conventions::{Conventions, HalfPacking};
use crate::error::{Error, Result};

pub const BLOCK_BITS: u32 = 10;
pub const BLOCK_SIZE: usize = 1 << BLOCK_BITS;
const HALF_MASK: u32 = 31;

/// A permutation of `0..2^bits`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SBox {
    bits: u32,
    table: Vec<u32>,
}

impl SBox {
    pub fn from_table(table: Vec<u32>) -> Result<Self> {
        let len = table.len();
        if len < 2 || !len.is_power_of_two() || len > 1 << 20 {
            return Err(Error::NotPermutation(format!(
                "length {len} is not a power of two in 2..=2^20"
            )));
        }
        let mut seen = vec![false; len];
        for (x, &y) in table.iter().enumerate() {
            let slot = seen.get_mut(y as usize).ok_or_else(|| {
                Error::NotPermutation(format!("entry {x} = {y} out of range"))
            })?;
            if *slot {
                return Err(Error::NotPermutation(format!("value {y} appears twice")));
            }
            *slot = true;
        }
        Ok(SBox {
            bits: len.trailing_zeros(),
            table,
        })
    }

    pub fn identity(bits: u32) -> Self {
        SBox {
            bits,
            table: (0..1u32 << bits).collect(),
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn apply(&self, x: u32) -> Result<u32> {
        self.table
            .get(x as usize)
            .copied()
            .ok_or(Error::ValueOutOfRange {
                value: x as u64,
                bits: self.bits,
            })
    }

    pub fn inverse(&self) -> SBox {
        let mut inv = vec![0u32; self.table.len()];
        for (x, &y) in self.table.iter().enumerate() {
            inv[y as usize] = x as u32;
        }
        SBox {
            bits: self.bits,
            table: inv,
        }
    }

    pub fn fixed_points(&self) -> usize {
        self.table
            .iter()
            .enumerate()
            .filter(|&(x, &y)| x as u32 == y)
            .count()
    }

    /// Whitespace-separated values in index order; decimal or hex (with or
    /// without `0x`).
    pub fn read<R: BufRead>(reader: R, format: SBoxFormat) -> Result<Self> {
        let mut table = Vec::new();
        for line in reader.lines() {
            let line = line?;
            for tok in line.split_whitespace() {
                let v = match format {
                    SBoxFormat::Decimal => tok.parse::<u32>().ok(),
                    SBoxFormat::Hex => {
                        let t = tok.trim_start_matches("0x").trim_start_matches("0X");
                        u32::from_str_radix(t, 16).ok()
                    }
                };
                table.push(v.ok_or_else(|| Error::Parse(format!("bad S-box value `{tok}`")))?);
            }
        }
        SBox::from_table(table)
    }

    /// Sixteen values per line. Hex values are zero-padded to four digits.
    pub fn write<W: Write>(&self, mut writer: W, format: SBoxFormat) -> Result<()> {
        for row in self.table.chunks(16) {
            let line: Vec<String> = row
                .iter()
                .map(|v| match format {
                    SBoxFormat::Decimal => v.to_string(),
                    SBoxFormat::Hex => format!("{v:04x}"),
                })
                .collect();
            writeln!(writer, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SBoxFormat {
    Decimal,
    Hex,
}

impl std::str::FromStr for SBoxFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dec" | "decimal" => Ok(SBoxFormat::Decimal),
            "hex" => Ok(SBoxFormat::Hex),
            _ => Err(Error::UnknownName {
                kind: "S-box format",
                name: s.to_string(),
            }),
        }
    }
}

/// `(a*x + b) mod 1024`; `a` must be odd.
pub fn affine_layer(x: u32, a: u32, b: u32) -> Result<u32> {
    if a % 2 == 0 {
        return Err(Error::EvenMultiplier(a));
    }
    if x as usize >= BLOCK_SIZE {
        return Err(Error::ValueOutOfRange {
            value: x as u64,
            bits: BLOCK_BITS,
        });
    }
    Ok(affine(x, a, b))
}

#[inline]
fn affine(x: u32, a: u32, b: u32) -> u32 {
    (a.wrapping_mul(x).wrapping_add(b)) & (BLOCK_SIZE as u32 - 1)
}

/// Multiplicative inverse of an odd `a` modulo 1024 (Newton iteration).
pub fn inverse_mod_1024(a: u32) -> Option<u32> {
    if a % 2 == 0 {
        return None;
    }
    let mut inv = a; // correct to 3 bits
    for _ in 0..3 {
        inv = inv.wrapping_mul(2u32.wrapping_sub(a.wrapping_mul(inv)));
    }
    Some(inv & (BLOCK_SIZE as u32 - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeistelState {
    pub left: u8,
    pub right: u8,
}

impl FeistelState {
    pub fn new(left: u8, right: u8) -> Self {
        FeistelState {
            left: left & 31,
            right: right & 31,
        }
    }

    pub fn unpack(block: u32, packing: HalfPacking) -> Self {
        let (hi, lo) = (((block >> 5) & HALF_MASK) as u8, (block & HALF_MASK) as u8);
        match packing {
            HalfPacking::LeftHigh => FeistelState::new(hi, lo),
            HalfPacking::LeftLow => FeistelState::new(lo, hi),
        }
    }

    pub fn pack(self, packing: HalfPacking) -> u32 {
        let (hi, lo) = match packing {
            HalfPacking::LeftHigh => (self.left, self.right),
            HalfPacking::LeftLow => (self.right, self.left),
        };
        (hi as u32) << 5 | lo as u32
    }

    pub fn swapped(self) -> Self {
        FeistelState::new(self.right, self.left)
    }
}

/// `(L, R) -> (R, L ^ P(R))` with `P` the 5-cell CA permutation.
pub fn feistel_round(state: FeistelState, rule: &CaRule) -> FeistelState {
    FeistelState::new(state.right, state.left ^ rule.permute5(state.right))
}

pub fn feistel_round_inverse(state: FeistelState, rule: &CaRule) -> FeistelState {
    FeistelState::new(state.right ^ rule.permute5(state.left), state.left)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Affine { a: u32, b: u32 },
    CaRound(CaRule),
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layer::Affine { a, b } => write!(f, "affine({a},{b})"),
            Layer::CaRound(r) => write!(f, "ca({})", r.rule.number()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerSpec {
    pub layers: Vec<Layer>,
    pub packing: HalfPacking,
    pub final_swap: bool,
}

impl LayerSpec {
    pub fn new(layers: Vec<Layer>, packing: HalfPacking, final_swap: bool) -> Result<Self> {
        for l in &layers {
            if let Layer::Affine { a, .. } = l {
                if a % 2 == 0 {
                    return Err(Error::EvenMultiplier(*a));
                }
            }
        }
        Ok(LayerSpec {
            layers,
            packing,
            final_swap,
        })
    }

    pub fn empty() -> Self {
        LayerSpec {
            layers: Vec::new(),
            packing: Conventions::DEFAULT.packing,
            final_swap: false,
        }
    }

    /// The eleven-layer construction with the default conventions.
    pub fn eleven_layer(rule: BooleanRule) -> Self {
        Self::eleven_layer_with(rule, &Conventions::DEFAULT)
    }

    /// The eleven-layer construction; `rule` must already be decoded with
    /// `conventions.bit_order`.
    pub fn eleven_layer_with(rule: BooleanRule, conventions: &Conventions) -> Self {
        let ca = Layer::CaRound(CaRule::with_neighborhood(rule, conventions.neighborhood));
        let mut layers = vec![Layer::Affine { a: 5, b: 3 }];
        layers.extend(std::iter::repeat(ca).take(4));
        layers.push(Layer::Affine { a: 7, b: 11 });
        layers.extend(std::iter::repeat(ca).take(3));
        layers.push(Layer::Affine { a: 13, b: 17 });
        layers.push(ca);
        LayerSpec {
            layers,
            packing: conventions.packing,
            final_swap: conventions.final_swap,
        }
    }

    /// The same rounds with every affine layer removed.
    pub fn without_affine(&self) -> Self {
        LayerSpec {
            layers: self
                .layers
                .iter()
                .filter(|l| matches!(l, Layer::CaRound(_)))
                .copied()
                .collect(),
            packing: self.packing,
            final_swap: self.final_swap,
        }
    }

    /// Runs one 10-bit block through every layer.
    pub fn apply(&self, x: u32) -> u32 {
        let mut block = x & (BLOCK_SIZE as u32 - 1);
        for layer in &self.layers {
            block = match layer {
                Layer::Affine { a, b } => affine(block, *a, *b),
                Layer::CaRound(rule) => {
                    feistel_round(FeistelState::unpack(block, self.packing), rule).pack(self.packing)
                }
            };
        }
        if self.final_swap {
            block = FeistelState::unpack(block, self.packing)
                .swapped()
                .pack(self.packing);
        }
        block
    }
}

/// Tabulates the layer composition over all 1024 inputs.
pub fn build_sbox(spec: &LayerSpec) -> Result<SBox> {
    if let Some(Layer::Affine { a, .. }) = spec
        .layers
        .iter()
        .find(|l| matches!(l, Layer::Affine { a, .. } if a % 2 == 0))
    {
        return Err(Error::EvenMultiplier(*a));
    }
    let table = (0..BLOCK_SIZE as u32).map(|x| spec.apply(x)).collect();
    SBox::from_table(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conventions::Neighborhood;
    use crate::SELECTED_RULE;
    use proptest::prelude::*;

    fn selected() -> CaRule {
        CaRule::new(BooleanRule::from_truth_table(SELECTED_RULE))
    }

    #[test]
    fn affine_examples() {
        assert_eq!(affine_layer(0, 5, 3).unwrap(), 3);
        assert_eq!(affine_layer(1023, 5, 3).unwrap(), 1022);
        assert!(matches!(affine_layer(1, 4, 3), Err(Error::EvenMultiplier(4))));
        assert!(affine_layer(1024, 5, 3).is_err());
        let mut seen = [false; 1024];
        for x in 0..1024 {
            seen[affine_layer(x, 7, 11).unwrap() as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn modular_inverse() {
        assert_eq!(inverse_mod_1024(5), Some(205));
        assert_eq!(inverse_mod_1024(6), None);
        for a in (1..1024).step_by(2) {
            assert_eq!(a * inverse_mod_1024(a).unwrap() % 1024, 1);
        }
    }

    #[test]
    fn feistel_examples() {
        assert_eq!(feistel_round(FeistelState::new(0, 0), &selected()), FeistelState::new(0, 31));
        assert_eq!(feistel_round(FeistelState::new(31, 31), &selected()), FeistelState::new(31, 31));
    }

    #[test]
    fn feistel_round_invertible_everywhere() {
        // Holds for any round function, bijective or not.
        for rule in [selected(), CaRule::new(BooleanRule::ZERO), CaRule::new(BooleanRule::from_truth_table(0xDEAD_BEEF))] {
            for block in 0..1024 {
                let s = FeistelState::unpack(block, HalfPacking::LeftHigh);
                let two = feistel_round(feistel_round(s, &rule), &rule);
                assert_eq!(feistel_round_inverse(feistel_round_inverse(two, &rule), &rule), s);
            }
        }
    }

    #[test]
    fn packing_round_trip() {
        for p in [HalfPacking::LeftHigh, HalfPacking::LeftLow] {
            for b in 0..1024 {
                assert_eq!(FeistelState::unpack(b, p).pack(p), b);
            }
        }
        assert_eq!(FeistelState::unpack(0b00001_00010, HalfPacking::LeftHigh), FeistelState::new(1, 2));
        assert_eq!(FeistelState::unpack(0b00001_00010, HalfPacking::LeftLow), FeistelState::new(2, 1));
    }

    #[test]
    fn default_spec_shape() {
        let spec = LayerSpec::eleven_layer(BooleanRule::from_truth_table(SELECTED_RULE));
        assert_eq!(spec.layers.len(), 11);
        let names: Vec<String> = spec.layers.iter().map(|l| l.to_string()).collect();
        let ca = format!("ca({SELECTED_RULE})");
        assert_eq!(names[0], "affine(5,3)");
        assert!(names[1..5].iter().all(|n| *n == ca));
        assert_eq!(names[5], "affine(7,11)");
        assert!(names[6..9].iter().all(|n| *n == ca));
        assert_eq!(names[9], "affine(13,17)");
        assert_eq!(names[10], ca);
    }

    #[test]
    fn build_examples() {
        let s = build_sbox(&LayerSpec::eleven_layer(BooleanRule::from_truth_table(SELECTED_RULE))).unwrap();
        assert_eq!(s.len(), 1024);
        assert_eq!(s.bits(), 10);
        assert!(s.fixed_points() <= 10, "{} fixed points", s.fixed_points());

        let single = LayerSpec::new(vec![Layer::Affine { a: 5, b: 3 }], HalfPacking::LeftLow, false).unwrap();
        let s1 = build_sbox(&single).unwrap();
        assert!((0..1024u32).all(|x| s1.apply(x).unwrap() == (5 * x + 3) % 1024));
        let inv = s1.inverse();
        assert!((0..1024u32).all(|y| inv.apply(y).unwrap() == (205 * y + 409) % 1024));

        assert_eq!(build_sbox(&LayerSpec::empty()).unwrap(), SBox::identity(10));
    }

    #[test]
    fn non_bijective_round_is_fine_but_even_affine_is_not() {
        assert!(LayerSpec::new(vec![Layer::Affine { a: 2, b: 0 }], HalfPacking::LeftLow, false).is_err());
        let raw = LayerSpec {
            layers: vec![Layer::Affine { a: 2, b: 0 }],
            packing: HalfPacking::LeftLow,
            final_swap: false,
        };
        assert!(matches!(build_sbox(&raw), Err(Error::EvenMultiplier(2))));
    }

    #[test]
    fn affine_free_construction_is_degenerate() {
        // f(00000) = 1 and f(11111) = 0, so the round permutation swaps the
        // uniform halves 0 and 31. (31,31) is then a fixed point and (0,0)
        // sits on the 3-cycle (0,0) -> (0,31) -> (31,0); 8 rounds end at (31,0).
        let rule = BooleanRule::from_truth_table(SELECTED_RULE);
        assert!(rule.eval(0) && !rule.eval(31));
        for nb in [Neighborhood::Ascending, Neighborhood::Descending] {
            for packing in [HalfPacking::LeftHigh, HalfPacking::LeftLow] {
                let conv = Conventions { neighborhood: nb, packing, ..Conventions::DEFAULT };
                let spec = LayerSpec::eleven_layer_with(rule, &conv).without_affine();
                assert_eq!(spec.layers.len(), 8);
                let s = build_sbox(&spec).unwrap();
                assert_eq!(s.apply(1023).unwrap(), 1023);
                assert_eq!(s.apply(0).unwrap(), FeistelState::new(31, 0).pack(packing));
                let uniform = [0, 31, 992, 1023];
                for x in uniform {
                    assert!(uniform.contains(&s.apply(x).unwrap()));
                }
            }
        }
    }

    #[test]
    fn apply_and_inverse() {
        let id = SBox::identity(10);
        assert_eq!(id.apply(777).unwrap(), 777);
        assert_eq!(id.inverse(), id);
        assert!(matches!(id.apply(1024), Err(Error::ValueOutOfRange { .. })));
        let s = build_sbox(&LayerSpec::eleven_layer(BooleanRule::from_truth_table(SELECTED_RULE))).unwrap();
        assert_eq!(s.inverse().inverse(), s);
        let inv = s.inverse();
        for x in 0..1024 {
            assert_eq!(inv.apply(s.apply(x).unwrap()).unwrap(), x);
        }
    }

    #[test]
    fn build_is_deterministic() {
        let spec = LayerSpec::eleven_layer(BooleanRule::from_truth_table(SELECTED_RULE));
        assert_eq!(build_sbox(&spec).unwrap(), build_sbox(&spec).unwrap());
    }

    #[test]
    fn from_table_rejects_non_permutations() {
        assert!(SBox::from_table(vec![0, 0]).is_err());
        assert!(SBox::from_table(vec![0, 1, 2]).is_err());
        assert!(SBox::from_table(vec![0, 5]).is_err());
        assert!(SBox::from_table(vec![1, 0]).is_ok());
    }

    #[test]
    fn text_formats() {
        let s = build_sbox(&LayerSpec::eleven_layer(BooleanRule::from_truth_table(SELECTED_RULE))).unwrap();
        for fmt in [SBoxFormat::Decimal, SBoxFormat::Hex] {
            let mut buf = Vec::new();
            s.write(&mut buf, fmt).unwrap();
            assert_eq!(SBox::read(buf.as_slice(), fmt).unwrap(), s);
        }
        let mut buf = Vec::new();
        SBox::identity(10).write(&mut buf, SBoxFormat::Hex).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("0000 0001 0002"));
        assert!(SBox::read("1 0 x".as_bytes(), SBoxFormat::Decimal).is_err());
    }

    proptest! {
        #[test]
        fn random_specs_are_permutations(
            layers in proptest::collection::vec((any::<bool>(), 0u32..512, 0u32..1024, any::<u32>()), 0..12),
            left_low in any::<bool>(),
            final_swap in any::<bool>(),
        ) {
            // Bijective CA rounds are drawn from the center projection and
            // the selected rule; affine multipliers are forced odd.
            let layers = layers.into_iter().map(|(affine, a, b, pick)| {
                if affine {
                    Layer::Affine { a: 2 * a + 1, b }
                } else {
                    let rule = if pick % 2 == 0 { SELECTED_RULE } else { BooleanRule::projection(2).number() };
                    Layer::CaRound(CaRule::new(BooleanRule::from_truth_table(rule)))
                }
            }).collect();
            let packing = if left_low { HalfPacking::LeftLow } else { HalfPacking::LeftHigh };
            let spec = LayerSpec::new(layers, packing, final_swap).unwrap();
            prop_assert!(build_sbox(&spec).is_ok());
        }
    }
}
