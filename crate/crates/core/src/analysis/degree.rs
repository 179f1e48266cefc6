//! Algebraic degrees of the component functions `x -> b . S(x)`.

use rayon::prelude::*;

use crate::sbox::SBox;

const LOW_HALF: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

/// Möbius transform of a packed truth table over `bits` variables.
pub fn mobius_packed(words: &mut [u64], bits: u32) {
    for i in 0..bits.min(6) {
        for w in words.iter_mut() {
            *w ^= (*w & LOW_HALF[i as usize]) << (1 << i);
        }
    }
    for i in 6..bits {
        let stride = 1usize << (i - 6);
        for w in 0..words.len() {
            if w & stride != 0 {
                words[w] ^= words[w ^ stride];
            }
        }
    }
}

/// Degree of the Boolean function with the given packed truth table.
pub fn packed_degree(truth_table: &[u64], bits: u32) -> u32 {
    let mut anf = truth_table.to_vec();
    mobius_packed(&mut anf, bits);
    let mut best = 0;
    for (w, &word) in anf.iter().enumerate() {
        let mut rest = word;
        while rest != 0 {
            let u = (w * 64) as u32 + rest.trailing_zeros();
            best = best.max(u.count_ones());
            rest &= rest - 1;
        }
    }
    best
}

fn component_table(s: &SBox, mask: u32) -> Vec<u64> {
    let mut words = vec![0u64; s.len().div_ceil(64)];
    for (x, &y) in s.table().iter().enumerate() {
        if (y & mask).count_ones() & 1 == 1 {
            words[x / 64] |= 1 << (x % 64);
        }
    }
    words
}

/// `(min, max)` degree over every nonzero output mask.
pub fn component_degrees(s: &SBox) -> (u32, u32) {
    let degrees: Vec<u32> = (1..s.len() as u32)
        .into_par_iter()
        .map(|b| packed_degree(&component_table(s, b), s.bits()))
        .collect();
    (
        degrees.iter().copied().min().unwrap_or(0),
        degrees.iter().copied().max().unwrap_or(0),
    )
}
