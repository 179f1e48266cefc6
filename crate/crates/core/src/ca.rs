//! Radius-2 ring cellular automaton.
//!
//! Cell `i` of a ring of `N` cells is bit `i` of the state. One step updates
//! every cell at once from the five cells at offsets `-2..=2` (mod `N`); which
//! offset feeds which rule variable is set by [`Neighborhood`].
//!
//! Large rings are stepped word-parallel: the five neighbor planes are built
//! by rotating the packed state, and the rule is evaluated on 64 cells at a
//! time through its ANF.

use crate::boolfn::BooleanRule;
use crate::conventions::Neighborhood;
use crate::error::{Error, Result};

/// Smallest ring the radius-2 neighborhood fits in.
pub const MIN_RING: usize = 5;
/// Ring sizes at or below this are rejected for PRNG use unless overridden.
pub const PRNG_MIN_RING: usize = 1000;
pub const DEFAULT_RING_SIZE: usize = 1024;
pub const DEFAULT_TAP: usize = 512;

/// A local rule together with its neighborhood wiring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CaRule {
    pub rule: BooleanRule,
    pub neighborhood: Neighborhood,
}

impl CaRule {
    pub fn new(rule: BooleanRule) -> Self {
        CaRule {
            rule,
            neighborhood: Neighborhood::Descending,
        }
    }

    pub fn with_neighborhood(rule: BooleanRule, neighborhood: Neighborhood) -> Self {
        CaRule { rule, neighborhood }
    }

    /// Loads `value` into a 5-cell ring (bit `i` to cell `i`), runs one step
    /// and reads the ring back.
    pub fn permute5(&self, value: u8) -> u8 {
        let v = (value & 31) as u32;
        let mut out = 0u8;
        for cell in 0..5 {
            let mut idx = 0u32;
            for var in 0..5 {
                let pos = (cell as isize + self.neighborhood.offset(var)).rem_euclid(5);
                idx |= ((v >> pos) & 1) << var;
            }
            out |= (self.rule.eval(idx) as u8) << cell;
        }
        out
    }

    pub fn permutation_table(&self) -> [u8; 32] {
        let mut t = [0u8; 32];
        for (v, slot) in t.iter_mut().enumerate() {
            *slot = self.permute5(v as u8);
        }
        t
    }

    pub fn is_bijective5(&self) -> bool {
        let mut seen = 0u32;
        for v in 0..32 {
            seen |= 1 << self.permute5(v);
        }
        seen == u32::MAX
    }
}

/// Packed ring state; bits past `len` are always zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RingState {
    len: usize,
    words: Vec<u64>,
}

impl RingState {
    pub fn zeros(len: usize) -> Self {
        RingState {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = RingState {
            len,
            words: vec![u64::MAX; len.div_ceil(64)],
        };
        s.clear_tail();
        s
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut s = RingState::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    /// Ring of `len` cells holding the low bits of `value`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        let mut s = RingState::zeros(len);
        if len > 0 {
            s.words[0] = value;
            s.clear_tail();
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        let (w, b) = (i / 64, i % 64);
        if value {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// The ring read `by` cells further on: cell `i` of the result is cell
    /// `i + by` (mod len) of `self`.
    pub fn rotated(&self, by: isize) -> RingState {
        let mut out = RingState::zeros(self.len);
        let mut scratch = vec![0; self.words.len()];
        rotate_into(&self.words, self.len, by, &mut out.words, &mut scratch);
        out
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Parses a seed: hexadecimal, most-significant nibble first, of exactly
    /// `len / 4` digits; cell `i` is bit `i` of the number. A trailing newline
    /// is allowed.
    pub fn from_hex(text: &str, len: usize) -> Result<Self> {
        let text = text.strip_suffix('\n').unwrap_or(text);
        let text = text.strip_suffix('\r').unwrap_or(text);
        if len % 4 != 0 {
            return Err(Error::InvalidSeed(format!(
                "ring size {len} is not a multiple of 4"
            )));
        }
        if text.len() != len / 4 {
            return Err(Error::InvalidSeed(format!(
                "expected {} hex digits, found {}",
                len / 4,
                text.len()
            )));
        }
        let mut s = RingState::zeros(len);
        for (p, c) in text.chars().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::InvalidSeed(format!("non-hex character {c:?}")))?;
            let base = 4 * (len / 4 - 1 - p);
            for k in 0..4 {
                s.set(base + k, (nibble >> k) & 1 == 1);
            }
        }
        Ok(s)
    }

    /// Inverse of [`RingState::from_hex`], lowercase, no newline.
    pub fn to_hex(&self) -> String {
        let digits = self.len / 4;
        (0..digits)
            .map(|p| {
                let base = 4 * (digits - 1 - p);
                let nibble = (0..4).fold(0u32, |acc, k| acc | (self.get(base + k) as u32) << k);
                char::from_digit(nibble, 16).unwrap()
            })
            .collect()
    }
}

/// out[i] = src[(i + by) mod len], working on packed words.
fn rotate_into(src: &[u64], len: usize, by: isize, out: &mut [u64], scratch: &mut [u64]) {
    let o = by.rem_euclid(len as isize) as usize;
    if o == 0 {
        out.copy_from_slice(src);
        return;
    }
    // (src >> o) | (src << (len - o)), masked to len bits.
    shift_down(src, o, out);
    shift_up(src, len - o, scratch);
    for (a, b) in out.iter_mut().zip(scratch.iter()) {
        *a |= *b;
    }
    let rem = len % 64;
    if rem != 0 {
        if let Some(last) = out.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}

/// out bit i = src bit i + k.
fn shift_down(src: &[u64], k: usize, out: &mut [u64]) {
    let (q, r) = (k / 64, k % 64);
    let n = src.len();
    for w in 0..n {
        let lo = src.get(w + q).copied().unwrap_or(0);
        let hi = src.get(w + q + 1).copied().unwrap_or(0);
        out[w] = if r == 0 { lo } else { (lo >> r) | (hi << (64 - r)) };
    }
}

/// out bit i = src bit i - k.
fn shift_up(src: &[u64], k: usize, out: &mut [u64]) {
    let (q, r) = (k / 64, k % 64);
    for w in 0..src.len() {
        let lo = if w >= q { src[w - q] } else { 0 };
        let lower = if w > q { src[w - q - 1] } else { 0 };
        out[w] = if r == 0 { lo } else { (lo << r) | (lower >> (64 - r)) };
    }
}

/// A rule compiled for word-parallel stepping, with reusable scratch planes.
#[derive(Debug, Clone)]
pub struct RingStepper {
    monomials: Vec<u8>,
    offsets: [isize; 5],
    planes: [Vec<u64>; 5],
    scratch: Vec<u64>,
    next: Vec<u64>,
}

impl RingStepper {
    pub fn new(rule: &CaRule, len: usize) -> Result<Self> {
        if len < MIN_RING {
            return Err(Error::RingTooSmall(len));
        }
        let words = len.div_ceil(64);
        let mut offsets = [0; 5];
        for (var, o) in offsets.iter_mut().enumerate() {
            *o = rule.neighborhood.offset(var);
        }
        Ok(RingStepper {
            monomials: rule.rule.anf().monomials().map(|u| u as u8).collect(),
            offsets,
            planes: std::array::from_fn(|_| vec![0; words]),
            scratch: vec![0; words],
            next: vec![0; words],
        })
    }

    /// Advances `state` by one synchronous step, in place.
    pub fn step(&mut self, state: &mut RingState) {
        let len = state.len;
        for (plane, &o) in self.planes.iter_mut().zip(self.offsets.iter()) {
            rotate_into(&state.words, len, o, plane, &mut self.scratch);
        }
        for (w, slot) in self.next.iter_mut().enumerate() {
            let mut acc = 0u64;
            for &u in &self.monomials {
                let mut term = u64::MAX;
                let mut bits = u;
                while bits != 0 {
                    let var = bits.trailing_zeros() as usize;
                    term &= self.planes[var][w];
                    bits &= bits - 1;
                }
                acc ^= term;
            }
            *slot = acc;
        }
        std::mem::swap(&mut state.words, &mut self.next);
        state.clear_tail();
    }
}

/// One synchronous step of the whole ring.
pub fn ring_step(state: &RingState, rule: &CaRule) -> Result<RingState> {
    let mut stepper = RingStepper::new(rule, state.len())?;
    let mut next = state.clone();
    stepper.step(&mut next);
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrngConfig {
    pub rule: CaRule,
    pub ring_size: usize,
    pub tap_index: usize,
    pub seed: RingState,
}

impl PrngConfig {
    /// Default tap (cell 512); the seed's length sets the ring size, which
    /// must exceed 1000 cells.
    pub fn new(rule: CaRule, seed: RingState) -> Result<Self> {
        if seed.len() <= PRNG_MIN_RING {
            return Err(Error::InvalidPrngConfig(format!(
                "ring of {} cells; more than {PRNG_MIN_RING} required",
                seed.len()
            )));
        }
        Self::with_small_ring(rule, seed, DEFAULT_TAP)
    }

    /// Skips the ring-size floor (tests, experiments); the tap must still be
    /// inside the ring.
    pub fn with_small_ring(rule: CaRule, seed: RingState, tap_index: usize) -> Result<Self> {
        if seed.len() < MIN_RING {
            return Err(Error::RingTooSmall(seed.len()));
        }
        if tap_index >= seed.len() {
            return Err(Error::InvalidPrngConfig(format!(
                "tap {tap_index} outside ring of {} cells",
                seed.len()
            )));
        }
        Ok(PrngConfig {
            rule,
            ring_size: seed.len(),
            tap_index,
            seed,
        })
    }

    pub fn with_tap(mut self, tap_index: usize) -> Result<Self> {
        if tap_index >= self.ring_size {
            return Err(Error::InvalidPrngConfig(format!(
                "tap {tap_index} outside ring of {} cells",
                self.ring_size
            )));
        }
        self.tap_index = tap_index;
        Ok(self)
    }

    pub fn generator(&self) -> Prng {
        Prng {
            stepper: RingStepper::new(&self.rule, self.ring_size).expect("size validated"),
            state: self.seed.clone(),
            tap: self.tap_index,
        }
    }

    /// `count` bits: step, emit the tap cell, repeat.
    pub fn stream(&self, count: usize) -> Vec<bool> {
        self.generator().take(count).collect()
    }
}

/// Bit generator owning its ring. Not shared between threads; make one per
/// worker.
#[derive(Debug, Clone)]
pub struct Prng {
    stepper: RingStepper,
    state: RingState,
    tap: usize,
}

impl Prng {
    pub fn state(&self) -> &RingState {
        &self.state
    }

    pub fn fill(&mut self, out: &mut [bool]) {
        for slot in out {
            self.stepper.step(&mut self.state);
            *slot = self.state.get(self.tap);
        }
    }
}

impl Iterator for Prng {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        self.stepper.step(&mut self.state);
        Some(self.state.get(self.tap))
    }
}

/// Packs bits eight to a byte, first bit in the most significant position;
/// a short final byte is zero-padded.
pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (b as u8) << (7 - i))
        })
        .collect()
}

pub fn unpack_bits(bytes: &[u8], count: usize) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&byte| (0..8).map(move |i| (byte >> (7 - i)) & 1 == 1))
        .take(count)
        .collect()
}
