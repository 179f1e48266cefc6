//! The fast DDT/LAT/BCT paths against literal triple loops, plus structural
//! identities of the three tables.

use casbox::analysis::{bct, boomerang_uniformity, ddt, differential_uniformity, lat, nonlinearity};
use casbox::SBox;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_permutation(bits: u32, rng: &mut ChaCha8Rng) -> SBox {
    let mut table: Vec<u32> = (0..1u32 << bits).collect();
    table.shuffle(rng);
    SBox::from_table(table).unwrap()
}

fn naive_ddt(t: &[u32]) -> Vec<Vec<i32>> {
    let n = t.len();
    let mut out = vec![vec![0; n]; n];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            *cell = (0..n).filter(|&x| (t[x ^ a] ^ t[x]) as usize == b).count() as i32;
        }
    }
    out
}

fn dot(a: usize, b: usize) -> i32 {
    ((a & b).count_ones() & 1) as i32
}

fn naive_lat(t: &[u32]) -> Vec<Vec<i32>> {
    let n = t.len();
    let mut out = vec![vec![0; n]; n];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            *cell = (0..n)
                .map(|x| if dot(a, x) ^ dot(b, t[x] as usize) == 0 { 1 } else { -1 })
                .sum();
        }
    }
    out
}

fn naive_bct(t: &[u32]) -> Vec<Vec<i32>> {
    let n = t.len();
    let mut inv = vec![0usize; n];
    for (x, &y) in t.iter().enumerate() {
        inv[y as usize] = x;
    }
    let mut out = vec![vec![0; n]; n];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            *cell = (0..n)
                .filter(|&x| inv[t[x] as usize ^ b] ^ inv[t[x ^ a] as usize ^ b] == a)
                .count() as i32;
        }
    }
    out
}

fn assert_table_eq(fast: &casbox::analysis::DistributionTable, naive: &[Vec<i32>]) {
    for (a, row) in naive.iter().enumerate() {
        assert_eq!(fast.row(a), row.as_slice(), "row {a}");
    }
}

#[test]
fn fast_tables_match_triple_loops_on_4_bit_permutations() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5b0c);
    for _ in 0..150 {
        let s = random_permutation(4, &mut rng);
        assert_table_eq(&ddt(&s), &naive_ddt(s.table()));
        assert_table_eq(&lat(&s), &naive_lat(s.table()));
        assert_table_eq(&bct(&s), &naive_bct(s.table()));
    }
}

#[test]
fn fast_tables_match_triple_loops_on_6_bit_permutations() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..5 {
        let s = random_permutation(6, &mut rng);
        assert_table_eq(&ddt(&s), &naive_ddt(s.table()));
        assert_table_eq(&lat(&s), &naive_lat(s.table()));
        assert_table_eq(&bct(&s), &naive_bct(s.table()));
    }
}

#[test]
fn ddt_rows_and_columns_sum_to_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for bits in [3, 5, 8] {
        let s = random_permutation(bits, &mut rng);
        let d = ddt(&s);
        let n = s.len();
        for a in 0..n {
            assert_eq!(d.row(a).iter().sum::<i32>(), n as i32);
            assert_eq!((0..n).map(|b| d.get(b, a)).sum::<i32>(), n as i32);
            // Solutions come in pairs {x, x ^ a}.
            if a != 0 {
                assert!(d.row(a).iter().all(|v| v % 2 == 0));
            }
        }
        assert_eq!(d.get(0, 0), n as i32);
    }
}

#[test]
fn lat_rows_satisfy_parseval() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = random_permutation(6, &mut rng);
    let l = lat(&s);
    let n = s.len() as i64;
    for b in 0..s.len() {
        let col: i64 = (0..s.len()).map(|a| (l.get(a, b) as i64).pow(2)).sum();
        assert_eq!(col, n * n);
    }
}

#[test]
fn inverse_transposes_every_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for bits in [4, 6] {
        let s = random_permutation(bits, &mut rng);
        let inv = s.inverse();
        assert_eq!(ddt(&inv), ddt(&s).transpose());
        assert_eq!(lat(&inv), lat(&s).transpose());
        assert_eq!(bct(&inv), bct(&s).transpose());
        assert_eq!(differential_uniformity(&inv), differential_uniformity(&s));
        assert_eq!(nonlinearity(&inv), nonlinearity(&s));
        assert_eq!(boomerang_uniformity(&inv), boomerang_uniformity(&s));
    }
}

#[test]
fn bct_dominates_ddt() {
    // BCT(a, b) >= DDT(a, b), and the first row and column are all 2^n.
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let s = random_permutation(5, &mut rng);
    let (d, b) = (ddt(&s), bct(&s));
    let n = s.len();
    for x in 0..n {
        assert_eq!(b.get(0, x), n as i32);
        assert_eq!(b.get(x, 0), n as i32);
        for y in 0..n {
            assert!(b.get(x, y) >= d.get(x, y));
        }
    }
    assert!(boomerang_uniformity(&s) >= differential_uniformity(&s));
}
