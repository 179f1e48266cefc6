//! GF(2^n) arithmetic with log/antilog tables, and univariate interpolation
//! of an S-box over the field.

use crate::error::{Error, Result};
use crate::sbox::SBox;

/// `x^8 + x^4 + x^3 + x + 1`.
pub const AES_MODULUS: u64 = 0x11B;
/// `x^10 + x^3 + 1`.
pub const GF1024_MODULUS: u64 = 0x409;

fn degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

/// Remainder of carry-less division.
fn poly_rem(mut a: u64, b: u64) -> u64 {
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

fn clmul_mod(a: u64, b: u64, modulus: u64) -> u64 {
    let mut acc = 0u64;
    let mut a = a;
    let mut b = b;
    let n = degree(modulus);
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if degree(a) == n {
            a ^= modulus;
        }
    }
    acc
}

/// Irreducible iff no polynomial of degree `1..=n/2` divides it.
pub fn is_irreducible(p: u64) -> bool {
    let n = degree(p);
    if n < 1 {
        return false;
    }
    (2u64..1 << (n / 2 + 1)).all(|d| poly_rem(p, d) != 0)
}

/// `AES_MODULUS` for 8 bits, `GF1024_MODULUS` for 10, otherwise the smallest
/// irreducible polynomial of that degree.
pub fn default_modulus(bits: u32) -> u64 {
    match bits {
        8 => AES_MODULUS,
        10 => GF1024_MODULUS,
        _ => (1u64 << bits..1 << (bits + 1))
            .find(|&p| is_irreducible(p))
            .expect("irreducible polynomials exist in every degree"),
    }
}

#[derive(Debug, Clone)]
pub struct GaloisField {
    bits: u32,
    modulus: u64,
    generator: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl GaloisField {
    pub fn new(bits: u32, modulus: u64) -> Result<Self> {
        if !(1..=20).contains(&bits) || degree(modulus) != bits as i32 || !is_irreducible(modulus) {
            return Err(Error::ReducibleModulus(modulus, bits));
        }
        let order = (1usize << bits) - 1;
        // Smallest element of full multiplicative order.
        let generator = (1u64..=order as u64)
            .find(|&g| {
                let mut v = g;
                for k in 1..order {
                    if v == 1 {
                        return k == order;
                    }
                    v = clmul_mod(v, g, modulus);
                }
                v == 1 || order == 1
            })
            .expect("multiplicative group is cyclic") as u32;
        let mut exp = vec![0u32; order];
        let mut log = vec![0u32; order + 1];
        let mut v = 1u64;
        for (i, slot) in exp.iter_mut().enumerate() {
            *slot = v as u32;
            log[v as usize] = i as u32;
            v = clmul_mod(v, generator as u64, modulus);
        }
        Ok(GaloisField {
            bits,
            modulus,
            generator,
            exp,
            log,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn generator(&self) -> u32 {
        self.generator
    }

    fn order(&self) -> usize {
        self.exp.len()
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let e = (self.log[a as usize] as usize + self.log[b as usize] as usize) % self.order();
        self.exp[e]
    }

    pub fn pow(&self, a: u32, k: u64) -> u32 {
        if k == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let e = (self.log[a as usize] as u64 * (k % self.order() as u64)) % self.order() as u64;
        self.exp[e as usize]
    }

    pub fn inverse(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.exp[(self.order() - self.log[a as usize] as usize) % self.order()])
    }

    /// Coefficients `c_0..c_{q-1}` of the unique polynomial of degree `< q`
    /// agreeing with `s` on the whole field, from the closed-form Lagrange
    /// interpolant `P(X) = sum_a S(a) (1 - (X - a)^(q-1))`:
    /// `c_0 = S(0)`, `c_k = sum_{a != 0} S(a) a^(q-1-k)` for `0 < k < q-1`, and
    /// `c_{q-1} = sum_a S(a)`.
    pub fn interpolate(&self, s: &SBox) -> Result<Vec<u32>> {
        if s.bits() != self.bits {
            return Err(Error::UnsupportedWidth(s.bits()));
        }
        let q = 1usize << self.bits;
        let order = self.order();
        let t = s.table();
        // S(g^i) as logs, or None where S(g^i) = 0.
        let logs: Vec<Option<usize>> = (0..order)
            .map(|i| {
                let y = t[self.exp[i] as usize];
                (y != 0).then(|| self.log[y as usize] as usize)
            })
            .collect();
        let mut coeffs = vec![0u32; q];
        coeffs[0] = t[0];
        for (k, c) in coeffs.iter_mut().enumerate().take(q - 1).skip(1) {
            let m = order - k;
            let mut acc = 0u32;
            for (i, l) in logs.iter().enumerate() {
                if let Some(l) = l {
                    acc ^= self.exp[(l + i * m) % order];
                }
            }
            *c = acc;
        }
        coeffs[q - 1] = t.iter().fold(0, |acc, &y| acc ^ y);
        Ok(coeffs)
    }

    /// Horner evaluation of a coefficient vector.
    pub fn evaluate(&self, coeffs: &[u32], x: u32) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| self.mul(acc, x) ^ c)
    }
}

/// Shape of the interpolation polynomial of an S-box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interpolant {
    /// Nonzero coefficients.
    pub terms: u32,
    /// Degree of the polynomial; 0 for constants.
    pub degree: u32,
}

impl Interpolant {
    /// Length of the dense coefficient list `c_0 .. c_deg`. At most `2^n - 1`
    /// for a permutation, whose interpolant has no `X^(2^n - 1)` term.
    pub fn complexity(self) -> u32 {
        self.degree + 1
    }
}

pub fn interpolant(s: &SBox, modulus: u64) -> Result<Interpolant> {
    let field = GaloisField::new(s.bits(), modulus)?;
    let coeffs = field.interpolate(s)?;
    Ok(Interpolant {
        terms: coeffs.iter().filter(|&&c| c != 0).count() as u32,
        degree: coeffs.iter().rposition(|&c| c != 0).unwrap_or(0) as u32,
    })
}

/// Dense coefficient count of the interpolant over `GF(2^n)` defined by
/// `modulus`: 255 for AES, whose interpolant has 9 nonzero terms up to `X^254`.
pub fn algebraic_complexity(s: &SBox, modulus: u64) -> Result<u32> {
    Ok(interpolant(s, modulus)?.complexity())
}
