//! Difference, linear and boomerang tables.

use rayon::prelude::*;
use serde::Serialize;

use crate::sbox::SBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Ddt,
    Lat,
    Bct,
}

impl std::str::FromStr for TableKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "ddt" => Ok(TableKind::Ddt),
            "lat" => Ok(TableKind::Lat),
            "bct" => Ok(TableKind::Bct),
            _ => Err(crate::Error::UnknownName {
                kind: "table",
                name: s.to_string(),
            }),
        }
    }
}

impl std::fmt::Display for TableKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TableKind::Ddt => "ddt",
            TableKind::Lat => "lat",
            TableKind::Bct => "bct",
        })
    }
}

/// Square `2^n x 2^n` table, row index `a` (input side), column `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionTable {
    pub kind: TableKind,
    size: usize,
    entries: Vec<i32>,
}

impl DistributionTable {
    fn from_columns(kind: TableKind, size: usize, columns: Vec<Vec<i32>>) -> Self {
        let mut entries = vec![0; size * size];
        for (b, col) in columns.into_iter().enumerate() {
            for (a, v) in col.into_iter().enumerate() {
                entries[a * size + b] = v;
            }
        }
        DistributionTable { kind, size, entries }
    }

    pub fn from_entries(kind: TableKind, size: usize, entries: Vec<i32>) -> Self {
        assert_eq!(entries.len(), size * size);
        DistributionTable { kind, size, entries }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> i32 {
        self.entries[a * self.size + b]
    }

    pub fn row(&self, a: usize) -> &[i32] {
        &self.entries[a * self.size..(a + 1) * self.size]
    }

    pub fn transpose(&self) -> Self {
        let n = self.size;
        let mut entries = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                entries[b * n + a] = self.get(a, b);
            }
        }
        DistributionTable { kind: self.kind, size: n, entries }
    }

    /// Largest entry with `a != 0` and, if `skip_zero_col`, `b != 0`.
    pub fn max_nontrivial(&self, skip_zero_col: bool, absolute: bool) -> i32 {
        let start_b = usize::from(skip_zero_col);
        (1..self.size)
            .flat_map(|a| (start_b..self.size).map(move |b| (a, b)))
            .map(|(a, b)| {
                let v = self.get(a, b);
                if absolute {
                    v.abs()
                } else {
                    v
                }
            })
            .max()
            .unwrap_or(0)
    }

    /// Decimal CSV, one table row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.entries.len() * 3);
        for a in 0..self.size {
            let row: Vec<String> = self.row(a).iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// `DDT(a, b) = #{x : S(x ^ a) ^ S(x) = b}`.
pub fn ddt(s: &SBox) -> DistributionTable {
    let n = s.len();
    let t = s.table();
    let rows: Vec<Vec<i32>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut row = vec![0i32; n];
            for x in 0..n {
                row[(t[x ^ a] ^ t[x]) as usize] += 1;
            }
            row
        })
        .collect();
    DistributionTable {
        kind: TableKind::Ddt,
        size: n,
        entries: rows.concat(),
    }
}

pub fn differential_uniformity(s: &SBox) -> u32 {
    ddt(s).max_nontrivial(false, false) as u32
}

/// In-place Walsh-Hadamard butterfly on a `+-1` vector.
pub(crate) fn walsh_in_place(v: &mut [i32]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for j in block..block + h {
                let (x, y) = (v[j], v[j + h]);
                v[j] = x + y;
                v[j + h] = x - y;
            }
        }
        h *= 2;
    }
}

/// Correlation-form LAT: `LAT(a, b) = sum_x (-1)^(b.S(x) ^ a.x)`, one fast
/// Walsh transform per output mask `b`.
pub fn lat(s: &SBox) -> DistributionTable {
    let n = s.len();
    let t = s.table();
    let columns: Vec<Vec<i32>> = (0..n)
        .into_par_iter()
        .map(|b| {
            let mut v: Vec<i32> = t
                .iter()
                .map(|&y| if (y & b as u32).count_ones() & 1 == 1 { -1 } else { 1 })
                .collect();
            walsh_in_place(&mut v);
            v
        })
        .collect();
    DistributionTable::from_columns(TableKind::Lat, n, columns)
}

/// `2^(n-1) - max_{a, b != 0} |LAT(a, b)| / 2`.
pub fn nonlinearity_from_lat(lat: &DistributionTable) -> u32 {
    let max = (0..lat.size())
        .flat_map(|a| (1..lat.size()).map(move |b| (a, b)))
        .map(|(a, b)| lat.get(a, b).unsigned_abs())
        .max()
        .unwrap_or(0);
    (lat.size() as u32 / 2).saturating_sub(max / 2)
}

pub fn nonlinearity(s: &SBox) -> u32 {
    nonlinearity_from_lat(&lat(s))
}

/// `BCT(a, b) = #{x : S^-1(S(x) ^ b) ^ S^-1(S(x ^ a) ^ b) = a}`.
///
/// With `t(x) = S^-1(S(x) ^ b) ^ x` the condition is `t(x) = t(x ^ a)`, so each
/// column is the XOR-difference histogram of pairs inside the level sets of
/// `t`.
pub fn bct(s: &SBox) -> DistributionTable {
    let n = s.len();
    let t = s.table();
    let inv = s.inverse();
    let inv = inv.table();
    let columns: Vec<Vec<i32>> = (0..n)
        .into_par_iter()
        .map(|b| {
            let level: Vec<u32> = (0..n).map(|x| inv[(t[x] ^ b as u32) as usize] ^ x as u32).collect();
            // Counting sort of x by level value.
            let mut start = vec![0usize; n + 1];
            for &l in &level {
                start[l as usize + 1] += 1;
            }
            for i in 0..n {
                start[i + 1] += start[i];
            }
            let mut fill = start.clone();
            let mut members = vec![0u32; n];
            for (x, &l) in level.iter().enumerate() {
                members[fill[l as usize]] = x as u32;
                fill[l as usize] += 1;
            }
            let mut col = vec![0i32; n];
            for l in 0..n {
                let group = &members[start[l]..start[l + 1]];
                for &x in group {
                    for &y in group {
                        col[(x ^ y) as usize] += 1;
                    }
                }
            }
            col
        })
        .collect();
    DistributionTable::from_columns(TableKind::Bct, n, columns)
}

pub fn boomerang_uniformity(s: &SBox) -> u32 {
    bct(s).max_nontrivial(true, false) as u32
}
