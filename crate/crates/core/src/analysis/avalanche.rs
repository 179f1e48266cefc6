//! Strict avalanche matrix and bit independence.

use crate::fraction::Fraction;
use crate::sbox::SBox;

/// `counts[i][j]` = inputs `x` for which flipping input bit `i` flips output
/// bit `j`; every entry is over `2^n` inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SacMatrix {
    pub bits: usize,
    pub counts: Vec<Vec<u64>>,
    pub inputs: u64,
}

impl SacMatrix {
    pub fn entry(&self, i: usize, j: usize) -> Fraction {
        Fraction::new(self.counts[i][j], self.inputs)
    }

    pub fn average(&self) -> Fraction {
        let total: u64 = self.counts.iter().flatten().sum();
        Fraction::new(total, self.inputs * (self.bits * self.bits) as u64)
    }

    pub fn min(&self) -> Fraction {
        Fraction::new(*self.counts.iter().flatten().min().unwrap(), self.inputs)
    }

    pub fn max(&self) -> Fraction {
        Fraction::new(*self.counts.iter().flatten().max().unwrap(), self.inputs)
    }
}

pub fn sac_matrix(s: &SBox) -> SacMatrix {
    let n = s.bits() as usize;
    let t = s.table();
    let mut counts = vec![vec![0u64; n]; n];
    for (i, row) in counts.iter_mut().enumerate() {
        for x in 0..t.len() {
            let d = t[x] ^ t[x ^ (1 << i)];
            for (j, c) in row.iter_mut().enumerate() {
                *c += ((d >> j) & 1) as u64;
            }
        }
    }
    SacMatrix {
        bits: n,
        counts,
        inputs: t.len() as u64,
    }
}

/// Largest absolute Pearson correlation between two avalanche bits
/// `d_j(x), d_k(x)` (`j < k`) for any single input-bit flip. Pairs where
/// either bit is constant count as 0.
pub fn bic_parameter(s: &SBox) -> f64 {
    let n = s.bits() as usize;
    let t = s.table();
    let total = t.len() as f64;
    let mut worst = 0.0f64;
    for i in 0..n {
        let diffs: Vec<u32> = (0..t.len()).map(|x| t[x] ^ t[x ^ (1 << i)]).collect();
        let ones: Vec<f64> = (0..n)
            .map(|j| diffs.iter().filter(|&&d| (d >> j) & 1 == 1).count() as f64)
            .collect();
        for j in 0..n {
            for k in j + 1..n {
                let both = diffs.iter().filter(|&&d| (d >> j) & (d >> k) & 1 == 1).count() as f64;
                let var_j = ones[j] * (total - ones[j]);
                let var_k = ones[k] * (total - ones[k]);
                if var_j == 0.0 || var_k == 0.0 {
                    continue;
                }
                let cov = total * both - ones[j] * ones[k];
                worst = worst.max((cov / (var_j * var_k).sqrt()).abs());
            }
        }
    }
    worst
}
