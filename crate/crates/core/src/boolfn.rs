//! 5-variable Boolean functions, the local rules of the cellular automaton.
//!
//! A rule is stored as its 32-entry truth table packed into a `u32`: bit `x`
//! holds `f(x)`, where bit `i` of the input `x` is variable `x_i`. With the
//! default least-significant-first numbering the rule number *is* the packed
//! truth table, e.g. rule 1438886595 has ANF
//! `x0*x3 + x1*x3 + x2*x3 + x3*x4 + x1 + x2 + x3 + 1`.

use std::fmt;
use std::io::{BufRead, Write};

use crate::conventions::BitOrder;
use crate::error::{Error, Result};

pub const VARIABLES: usize = 5;
pub const TABLE_LEN: usize = 1 << VARIABLES;

/// `LOW_HALF[i]` selects the inputs whose bit `i` is 0.
const LOW_HALF: [u32; VARIABLES] = [0x5555_5555, 0x3333_3333, 0x0F0F_0F0F, 0x00FF_00FF, 0x0000_FFFF];

/// Truth table of the linear form `x -> w . x` for every mask `w`.
const LINEAR: [u32; TABLE_LEN] = linear_tables();

/// Nonzero masks ordered by Hamming weight; `WEIGHT_END[k]` is the number of
/// masks of weight `1..=k`.
const MASKS_BY_WEIGHT: [u32; TABLE_LEN - 1] = masks_by_weight();
const WEIGHT_END: [usize; VARIABLES + 1] = [0, 5, 15, 25, 30, 31];

const fn masks_by_weight() -> [u32; TABLE_LEN - 1] {
    let mut out = [0u32; TABLE_LEN - 1];
    let mut n = 0;
    let mut weight = 1;
    while weight <= VARIABLES as u32 {
        let mut w = 1;
        while w < TABLE_LEN as u32 {
            if w.count_ones() == weight {
                out[n] = w;
                n += 1;
            }
            w += 1;
        }
        weight += 1;
    }
    out
}

const fn linear_tables() -> [u32; TABLE_LEN] {
    let mut out = [0u32; TABLE_LEN];
    let mut w = 0;
    while w < TABLE_LEN {
        let mut tt = 0u32;
        let mut x = 0;
        while x < TABLE_LEN {
            if (x & w).count_ones() & 1 == 1 {
                tt |= 1 << x;
            }
            x += 1;
        }
        out[w] = tt;
        w += 1;
    }
    out
}

/// Binary Möbius transform on a packed 32-entry table. It is an involution,
/// so the same routine maps truth table to ANF and back.
pub const fn mobius(mut v: u32) -> u32 {
    let mut i = 0;
    while i < VARIABLES {
        v ^= (v & LOW_HALF[i]) << (1 << i);
        i += 1;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BooleanRule {
    truth_table: u32,
}

impl BooleanRule {
    pub const ZERO: BooleanRule = BooleanRule { truth_table: 0 };
    pub const ONE: BooleanRule = BooleanRule { truth_table: u32::MAX };

    pub const fn from_truth_table(truth_table: u32) -> Self {
        BooleanRule { truth_table }
    }

    /// Decodes a rule number with the default least-significant-first order.
    pub fn from_number(number: u64) -> Result<Self> {
        Self::from_number_with(number, BitOrder::LsbFirst)
    }

    pub fn from_number_with(number: u64, order: BitOrder) -> Result<Self> {
        let n = u32::try_from(number).map_err(|_| Error::RuleOutOfRange(number))?;
        Ok(match order {
            BitOrder::LsbFirst => BooleanRule::from_truth_table(n),
            BitOrder::MsbFirst => BooleanRule::from_truth_table(n.reverse_bits()),
        })
    }

    /// The projection `f(x) = x_var`.
    pub const fn projection(var: usize) -> Self {
        BooleanRule::from_truth_table(LINEAR[1 << var])
    }

    /// The linear form `f(x) = mask . x`.
    pub const fn linear(mask: u32) -> Self {
        BooleanRule::from_truth_table(LINEAR[(mask & 31) as usize])
    }

    pub const fn truth_table(self) -> u32 {
        self.truth_table
    }

    pub const fn number(self) -> u32 {
        self.truth_table
    }

    pub const fn number_with(self, order: BitOrder) -> u32 {
        match order {
            BitOrder::LsbFirst => self.truth_table,
            BitOrder::MsbFirst => self.truth_table.reverse_bits(),
        }
    }

    #[inline]
    pub const fn eval(self, x: u32) -> bool {
        (self.truth_table >> (x & 31)) & 1 == 1
    }

    pub const fn complement(self) -> Self {
        BooleanRule::from_truth_table(!self.truth_table)
    }

    pub const fn anf(self) -> Anf {
        Anf(mobius(self.truth_table))
    }

    /// Largest monomial in the ANF; 0 for constants.
    pub fn degree(self) -> u32 {
        self.anf().degree()
    }

    pub const fn hamming_weight(self) -> u32 {
        self.truth_table.count_ones()
    }

    pub const fn is_balanced(self) -> bool {
        self.hamming_weight() == 16
    }

    /// A single Walsh coefficient, `32 - 2 * d(f, w.x)`.
    #[inline]
    pub const fn walsh_at(self, w: u32) -> i32 {
        32 - 2 * (self.truth_table ^ LINEAR[(w & 31) as usize]).count_ones() as i32
    }

    /// Full spectrum by the in-place butterfly.
    pub fn walsh_spectrum(self) -> WalshSpectrum {
        let mut v = [0i32; TABLE_LEN];
        for (x, slot) in v.iter_mut().enumerate() {
            *slot = if self.eval(x as u32) { -1 } else { 1 };
        }
        let mut h = 1;
        while h < TABLE_LEN {
            for block in (0..TABLE_LEN).step_by(2 * h) {
                for j in block..block + h {
                    let (a, b) = (v[j], v[j + h]);
                    v[j] = a + b;
                    v[j + h] = a - b;
                }
            }
            h *= 2;
        }
        WalshSpectrum(v)
    }

    /// Correlation immunity of order `order` (Xiao-Massey: the spectrum
    /// vanishes on every mask of weight `1..=order`).
    pub fn is_correlation_immune(self, order: u32) -> Result<bool> {
        if !(1..=VARIABLES as u32).contains(&order) {
            return Err(Error::InvalidOrder(order));
        }
        Ok(MASKS_BY_WEIGHT[..WEIGHT_END[order as usize]]
            .iter()
            .all(|&w| self.walsh_at(w) == 0))
    }

    /// Distance to the closest affine function, `16 - max|W(w)| / 2`.
    pub fn nonlinearity(self) -> u32 {
        let max = (0..TABLE_LEN as u32)
            .map(|w| self.walsh_at(w).unsigned_abs())
            .max()
            .unwrap_or(0);
        16 - max / 2
    }

    pub fn is_affine(self) -> bool {
        self.degree() <= 1
    }

    /// `#{x : f(x) != f(x ^ e_var)}`.
    pub const fn avalanche_count(self, var: usize) -> u32 {
        let s = 1 << var;
        let low = LOW_HALF[var];
        let t = self.truth_table;
        let flipped = ((t & low) << s) | ((t >> s) & low);
        (t ^ flipped).count_ones()
    }

    pub fn satisfies_sac(self) -> bool {
        (0..VARIABLES).all(|i| self.avalanche_count(i) == 16)
    }
}

impl fmt::Display for BooleanRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.truth_table)
    }
}

/// Algebraic normal form: bit `u` is the coefficient of the monomial
/// `prod_{i in u} x_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Anf(pub u32);

impl Anf {
    pub const fn coefficients(self) -> u32 {
        self.0
    }

    pub const fn to_rule(self) -> BooleanRule {
        BooleanRule::from_truth_table(mobius(self.0))
    }

    pub fn degree(self) -> u32 {
        self.monomials().map(u32::count_ones).max().unwrap_or(0)
    }

    /// Monomial masks with a nonzero coefficient, ascending.
    pub fn monomials(self) -> impl Iterator<Item = u32> {
        (0..TABLE_LEN as u32).filter(move |u| (self.0 >> u) & 1 == 1)
    }
}

/// `x0*x3 + x1 + 1` style: monomials by decreasing degree, then by variable
/// indices; the constant last. The zero polynomial prints as `0`.
impl fmt::Display for Anf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<u32> = self.monomials().collect();
        if terms.is_empty() {
            return f.write_str("0");
        }
        let vars = |u: u32| (0..VARIABLES as u32).filter(move |i| (u >> i) & 1 == 1);
        terms.sort_by(|&a, &b| {
            b.count_ones()
                .cmp(&a.count_ones())
                .then_with(|| vars(a).cmp(vars(b)))
        });
        let rendered: Vec<String> = terms
            .into_iter()
            .map(|u| {
                if u == 0 {
                    "1".to_string()
                } else {
                    vars(u).map(|i| format!("x{i}")).collect::<Vec<_>>().join("*")
                }
            })
            .collect();
        f.write_str(&rendered.join(" + "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalshSpectrum(pub [i32; TABLE_LEN]);

impl WalshSpectrum {
    pub fn values(&self) -> &[i32; TABLE_LEN] {
        &self.0
    }

    pub fn at(&self, w: u32) -> i32 {
        self.0[(w & 31) as usize]
    }

    pub fn max_abs(&self) -> u32 {
        self.0.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn sum_of_squares(&self) -> i64 {
        self.0.iter().map(|&v| (v as i64) * (v as i64)).sum()
    }
}

/// Reads decimal rule numbers, one per line; blank lines and `#` comments are
/// skipped.
pub fn read_rule_list<R: BufRead>(reader: R) -> Result<Vec<BooleanRule>> {
    let mut rules = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let n: u64 = line
            .parse()
            .map_err(|_| Error::Parse(format!("bad rule number `{line}`")))?;
        rules.push(BooleanRule::from_number(n)?);
    }
    Ok(rules)
}

pub fn write_rule_list<W: Write>(mut writer: W, rules: &[BooleanRule]) -> Result<()> {
    for r in rules {
        writeln!(writer, "{}", r.number())?;
    }
    Ok(())
}
