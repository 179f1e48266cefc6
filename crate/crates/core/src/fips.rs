//! FIPS 140-2 power-up statistical tests (change-notice bounds).
//!
//! | test           | statistic                              | pass when                    |
//! |----------------|----------------------------------------|------------------------------|
//! | monobit        | ones in 20 000 bits                    | 9 725 < ones < 10 275        |
//! | poker          | X = 16/5000 * sum f_i^2 - 5000         | 2.16 < X < 46.17             |
//! | runs           | runs of 0s and of 1s, lengths 1..5, 6+ | each count in its interval   |
//! | long run       | longest run                            | longest < 26                 |
//! | continuous run | adjacent 16-bit words                  | no two adjacent words equal  |
//!
//! Runs intervals (inclusive): 1: 2315-2685, 2: 1114-1386, 3: 527-723,
//! 4: 240-384, 5: 103-209, 6+: 103-209.
//!
//! The four block tests run on each 20 000-bit block; the continuous test runs
//! over the whole stream.

use serde::Serialize;

use crate::error::{Error, Result};

pub const BLOCK_BITS: usize = 20_000;
pub const DEFAULT_BLOCKS: usize = 5;
pub const DEFAULT_STREAM_BITS: usize = BLOCK_BITS * DEFAULT_BLOCKS;
pub const CONTINUOUS_WIDTH: usize = 16;

pub const MONOBIT_LOW: usize = 9_725;
pub const MONOBIT_HIGH: usize = 10_275;
/// Poker bounds scaled by 5000 so the comparison is exact integer arithmetic.
pub const POKER_LOW_X5000: i64 = 10_800;
pub const POKER_HIGH_X5000: i64 = 230_850;
pub const RUNS_INTERVALS: [(usize, usize); 6] = [
    (2_315, 2_685),
    (1_114, 1_386),
    (527, 723),
    (240, 384),
    (103, 209),
    (103, 209),
];
pub const LONG_RUN: usize = 26;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub name: &'static str,
    /// Block index; `None` for whole-stream tests.
    pub block: Option<usize>,
    pub passed: bool,
    pub statistic: String,
    pub values: Vec<f64>,
    pub bounds: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FipsReport {
    pub blocks: usize,
    pub results: Vec<TestResult>,
    pub passed: bool,
}

impl FipsReport {
    pub fn failures(&self) -> impl Iterator<Item = &TestResult> {
        self.results.iter().filter(|r| !r.passed)
    }
}

/// A test applied to each 20 000-bit block.
pub trait BlockTest: Send + Sync {
    fn name(&self) -> &'static str;
    fn bounds(&self) -> String;
    /// Evaluates an already length-checked block.
    fn evaluate(&self, block: &[bool]) -> (bool, String, Vec<f64>);

    fn run(&self, block: &[bool], index: Option<usize>) -> Result<TestResult> {
        check_block(block)?;
        let (passed, statistic, values) = self.evaluate(block);
        Ok(TestResult {
            name: self.name(),
            block: index,
            passed,
            statistic,
            values,
            bounds: self.bounds(),
        })
    }
}

fn check_block(block: &[bool]) -> Result<()> {
    if block.len() != BLOCK_BITS {
        return Err(Error::BlockLength {
            expected: BLOCK_BITS,
            actual: block.len(),
        });
    }
    Ok(())
}

pub struct Monobit;

impl BlockTest for Monobit {
    fn name(&self) -> &'static str {
        "monobit"
    }

    fn bounds(&self) -> String {
        format!("{MONOBIT_LOW} < ones < {MONOBIT_HIGH}")
    }

    fn evaluate(&self, block: &[bool]) -> (bool, String, Vec<f64>) {
        let ones = block.iter().filter(|&&b| b).count();
        let passed = MONOBIT_LOW < ones && ones < MONOBIT_HIGH;
        (passed, ones.to_string(), vec![ones as f64])
    }
}

pub struct Poker;

impl Poker {
    /// `5000 * X`, exact.
    fn scaled_statistic(block: &[bool]) -> i64 {
        let mut hist = [0i64; 16];
        for nibble in block.chunks_exact(4) {
            let v = nibble.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            hist[v] += 1;
        }
        let sum_sq: i64 = hist.iter().map(|f| f * f).sum();
        16 * sum_sq - 5_000 * 5_000
    }
}

impl BlockTest for Poker {
    fn name(&self) -> &'static str {
        "poker"
    }

    fn bounds(&self) -> String {
        "2.16 < X < 46.17".to_string()
    }

    fn evaluate(&self, block: &[bool]) -> (bool, String, Vec<f64>) {
        let scaled = Self::scaled_statistic(block);
        let x = scaled as f64 / 5_000.0;
        let passed = POKER_LOW_X5000 < scaled && scaled < POKER_HIGH_X5000;
        (passed, format!("{x:.4}"), vec![x])
    }
}

/// Run-length histogram: `counts[bit][min(len, 6) - 1]`, plus the longest run.
fn run_lengths(bits: &[bool]) -> ([[usize; 6]; 2], usize) {
    let mut counts = [[0usize; 6]; 2];
    let mut longest = 0;
    let mut iter = bits.iter().peekable();
    while let Some(&b) = iter.next() {
        let mut len = 1;
        while iter.next_if(|&&next| next == b).is_some() {
            len += 1;
        }
        counts[b as usize][len.min(6) - 1] += 1;
        longest = longest.max(len);
    }
    (counts, longest)
}

pub struct Runs;

impl BlockTest for Runs {
    fn name(&self) -> &'static str {
        "runs"
    }

    fn bounds(&self) -> String {
        RUNS_INTERVALS
            .iter()
            .enumerate()
            .map(|(i, (lo, hi))| {
                let len = if i == 5 { "6+".to_string() } else { (i + 1).to_string() };
                format!("{len}:[{lo},{hi}]")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn evaluate(&self, block: &[bool]) -> (bool, String, Vec<f64>) {
        let (counts, _) = run_lengths(block);
        let passed = counts.iter().all(|per_bit| {
            per_bit
                .iter()
                .zip(RUNS_INTERVALS.iter())
                .all(|(&c, &(lo, hi))| lo <= c && c <= hi)
        });
        let fmt = |c: &[usize; 6]| c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        let statistic = format!("zeros=[{}] ones=[{}]", fmt(&counts[0]), fmt(&counts[1]));
        let values = counts.iter().flatten().map(|&c| c as f64).collect();
        (passed, statistic, values)
    }
}

pub struct LongRun;

impl BlockTest for LongRun {
    fn name(&self) -> &'static str {
        "long_run"
    }

    fn bounds(&self) -> String {
        format!("longest < {LONG_RUN}")
    }

    fn evaluate(&self, block: &[bool]) -> (bool, String, Vec<f64>) {
        let (_, longest) = run_lengths(block);
        (longest < LONG_RUN, longest.to_string(), vec![longest as f64])
    }
}

/// Name-keyed set of block tests, run in registration order.
pub struct BlockTestRegistry {
    tests: Vec<Box<dyn BlockTest>>,
}

impl BlockTestRegistry {
    pub fn empty() -> Self {
        BlockTestRegistry { tests: Vec::new() }
    }

    /// Monobit, poker, runs and long run.
    pub fn standard() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(Monobit));
        reg.register(Box::new(Poker));
        reg.register(Box::new(Runs));
        reg.register(Box::new(LongRun));
        reg
    }

    /// Replaces a test of the same name, otherwise appends.
    pub fn register(&mut self, test: Box<dyn BlockTest>) {
        match self.tests.iter().position(|t| t.name() == test.name()) {
            Some(i) => self.tests[i] = test,
            None => self.tests.push(test),
        }
    }

    pub fn get(&self, name: &str) -> Option<&dyn BlockTest> {
        self.tests.iter().find(|t| t.name() == name).map(|t| t.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.tests.iter().map(|t| t.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn BlockTest> {
        self.tests.iter().map(|t| t.as_ref())
    }
}

impl Default for BlockTestRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

pub fn monobit(block: &[bool]) -> Result<TestResult> {
    Monobit.run(block, None)
}

pub fn poker(block: &[bool]) -> Result<TestResult> {
    Poker.run(block, None)
}

pub fn runs(block: &[bool]) -> Result<TestResult> {
    Runs.run(block, None)
}

pub fn long_run(block: &[bool]) -> Result<TestResult> {
    LongRun.run(block, None)
}

/// Index of the first 16-bit word equal to its predecessor.
fn first_repeat(stream: &[bool]) -> Option<usize> {
    let words: Vec<u16> = stream
        .chunks_exact(CONTINUOUS_WIDTH)
        .map(|c| c.iter().fold(0u16, |acc, &b| (acc << 1) | b as u16))
        .collect();
    words.windows(2).position(|w| w[0] == w[1]).map(|i| i + 1)
}

pub fn continuous_run(stream: &[bool]) -> Result<TestResult> {
    if stream.len() < 2 * CONTINUOUS_WIDTH {
        return Err(Error::StreamTooShort {
            min: 2 * CONTINUOUS_WIDTH,
            actual: stream.len(),
        });
    }
    let repeat = first_repeat(stream);
    Ok(TestResult {
        name: "continuous_run",
        block: None,
        passed: repeat.is_none(),
        statistic: match repeat {
            Some(i) => format!("repeat at word {i}"),
            None => "no repeat".to_string(),
        },
        values: vec![repeat.map_or(-1.0, |i| i as f64)],
        bounds: format!("no two adjacent {CONTINUOUS_WIDTH}-bit words equal"),
    })
}

/// Full battery over `blocks` blocks of 20 000 bits.
pub fn battery_with(stream: &[bool], blocks: usize, tests: &BlockTestRegistry) -> Result<FipsReport> {
    let expected = blocks * BLOCK_BITS;
    if blocks == 0 || stream.len() != expected {
        return Err(Error::BlockLength {
            expected,
            actual: stream.len(),
        });
    }
    let mut results = Vec::with_capacity(blocks * 4 + 1);
    for (i, block) in stream.chunks_exact(BLOCK_BITS).enumerate() {
        for test in tests.iter() {
            results.push(test.run(block, Some(i))?);
        }
    }
    results.push(continuous_run(stream)?);
    let passed = results.iter().all(|r| r.passed);
    Ok(FipsReport {
        blocks,
        results,
        passed,
    })
}

/// The standard 100 000-bit battery (five blocks).
pub fn battery(stream: &[bool]) -> Result<FipsReport> {
    battery_with(stream, DEFAULT_BLOCKS, &BlockTestRegistry::standard())
}

/// Pass/fail of the standard battery over bits pulled from `source`, one block
/// at a time, stopping at the first failure. Agrees with
/// `battery_with(..).passed` on the same bits.
pub fn passes_incremental(mut source: impl FnMut(&mut [bool]), blocks: usize) -> bool {
    let tests = [&Monobit as &dyn BlockTest, &Poker, &LongRun, &Runs];
    let mut buf = vec![false; BLOCK_BITS + CONTINUOUS_WIDTH];
    for i in 0..blocks {
        // The last word of the previous block sits in front for the
        // continuous test across the boundary.
        let start = if i == 0 { CONTINUOUS_WIDTH } else { 0 };
        if i > 0 {
            buf.copy_within(BLOCK_BITS.., 0);
        }
        source(&mut buf[CONTINUOUS_WIDTH..]);
        let block = &buf[CONTINUOUS_WIDTH..];
        if !tests.iter().all(|t| t.evaluate(block).0) {
            return false;
        }
        if first_repeat(&buf[start..]).is_some() {
            return false;
        }
    }
    blocks > 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn alternating(len: usize) -> Vec<bool> {
        (0..len).map(|i| i % 2 == 1).collect()
    }

    fn random_block(rng: &mut ChaCha8Rng) -> Vec<bool> {
        (0..BLOCK_BITS).map(|_| rng.gen()).collect()
    }

    #[test]
    fn monobit_examples() {
        assert!(monobit(&alternating(BLOCK_BITS)).unwrap().passed);
        assert!(!monobit(&vec![false; BLOCK_BITS]).unwrap().passed);
        let mut b = vec![false; BLOCK_BITS];
        b[..9_725].iter_mut().for_each(|x| *x = true);
        assert!(!monobit(&b).unwrap().passed);
        b[9_725] = true;
        assert!(monobit(&b).unwrap().passed);
        b[..10_275].iter_mut().for_each(|x| *x = true);
        assert!(!monobit(&b).unwrap().passed);
        assert!(matches!(
            monobit(&[true; 10]),
            Err(Error::BlockLength { expected: 20_000, actual: 10 })
        ));
    }

    #[test]
    fn poker_examples() {
        let zero = poker(&vec![false; BLOCK_BITS]).unwrap();
        assert!(!zero.passed);
        assert_eq!(zero.values[0], 75_000.0);
        let alt = poker(&alternating(BLOCK_BITS)).unwrap();
        assert!(!alt.passed);
        assert_eq!(alt.values[0], 75_000.0);

        // 8 nibble values seen 313 times, 8 seen 312 times: X = 0.0128, which
        // is below the lower bound 2.16.
        let mut block = Vec::with_capacity(BLOCK_BITS);
        for v in 0..16u8 {
            let reps = if v < 8 { 313 } else { 312 };
            for _ in 0..reps {
                block.extend((0..4).rev().map(|k| (v >> k) & 1 == 1));
            }
        }
        let r = poker(&block).unwrap();
        assert!((r.values[0] - 0.0128).abs() < 1e-9);
        assert!(!r.passed);
        assert!(poker(&[false; 3]).is_err());
    }

    #[test]
    fn poker_statistic_against_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let block = random_block(&mut rng);
        let mut f = [0f64; 16];
        for n in block.chunks(4) {
            f[n.iter().fold(0, |a, &b| a * 2 + b as usize)] += 1.0;
        }
        let x = 16.0 / 5000.0 * f.iter().map(|v| v * v).sum::<f64>() - 5000.0;
        assert!((poker(&block).unwrap().values[0] - x).abs() < 1e-9);
    }

    #[test]
    fn runs_examples() {
        let alt = runs(&alternating(BLOCK_BITS)).unwrap();
        assert!(!alt.passed);
        assert_eq!(alt.values[0], 10_000.0);
        assert_eq!(alt.values[6], 10_000.0);
        assert!(!long_run(&vec![false; BLOCK_BITS]).unwrap().passed);
        assert!(runs(&[true; 5]).is_err());
        assert!(long_run(&[true; 5]).is_err());
    }

    #[test]
    fn long_run_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // Random data with runs capped at 10, then an isolated run of 25 ones.
        let mut block = Vec::with_capacity(BLOCK_BITS);
        while block.len() < BLOCK_BITS {
            let b: bool = rng.gen();
            if block.len() >= 10 && block[block.len() - 10..].iter().all(|&x| x == b) {
                block.push(!b);
            } else {
                block.push(b);
            }
        }
        block[1000] = false;
        block[1001..1026].iter_mut().for_each(|x| *x = true);
        block[1026] = false;
        let r = long_run(&block).unwrap();
        assert_eq!(r.values[0], 25.0);
        assert!(r.passed);
        block[1026] = true;
        block[1027] = false;
        assert!(!long_run(&block).unwrap().passed);
    }

    #[test]
    fn run_lengths_reference() {
        let bits = [true, true, false, true, false, false, false, false, false, false, false, true];
        let (counts, longest) = run_lengths(&bits);
        assert_eq!(counts[1], [2, 1, 0, 0, 0, 0]);
        assert_eq!(counts[0], [1, 0, 0, 0, 0, 1]);
        assert_eq!(longest, 7);
    }

    #[test]
    fn continuous_examples() {
        assert!(!continuous_run(&[false; 32]).unwrap().passed);
        let mut s = vec![true; 16];
        s.extend([false; 16]);
        assert!(continuous_run(&s).unwrap().passed);
        assert!(continuous_run(&[true; 31]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let long: Vec<bool> = (0..100_000).map(|_| rng.gen()).collect();
        assert!(continuous_run(&long).unwrap().passed);
    }

    #[test]
    fn battery_zero_stream_fails_everything() {
        let r = battery(&vec![false; DEFAULT_STREAM_BITS]).unwrap();
        assert!(!r.passed);
        assert_eq!(r.results.len(), 21);
        assert!(r.results.iter().all(|t| !t.passed));
        assert!(battery(&[false; 100]).is_err());
    }

    #[test]
    fn battery_random_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let s: Vec<bool> = (0..DEFAULT_STREAM_BITS).map(|_| rng.gen()).collect();
        let a = battery(&s).unwrap();
        assert_eq!(a, battery(&s).unwrap());
        assert!(a.passed, "{:?}", a.failures().collect::<Vec<_>>());
    }

    #[test]
    fn incremental_agrees_with_battery() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for case in 0..6 {
            let mut s: Vec<bool> = (0..DEFAULT_STREAM_BITS).map(|_| rng.gen()).collect();
            match case {
                1 => s[40_000..40_030].iter_mut().for_each(|x| *x = true),
                2 => {
                    // Repeat straddling the block boundary at 20 000.
                    let w: Vec<bool> = s[19_984..20_000].to_vec();
                    s[20_000..20_016].copy_from_slice(&w);
                }
                3 => s[60_000..80_000].iter_mut().for_each(|x| *x = false),
                4 => {
                    let w: Vec<bool> = s[99_968..99_984].to_vec();
                    s[99_984..].copy_from_slice(&w);
                }
                _ => {}
            }
            let mut pos = 0;
            let inc = passes_incremental(
                |buf| {
                    buf.copy_from_slice(&s[pos..pos + buf.len()]);
                    pos += buf.len();
                },
                DEFAULT_BLOCKS,
            );
            assert_eq!(inc, battery(&s).unwrap().passed, "case {case}");
        }
    }

    #[test]
    fn monobit_pass_rate_on_coin_flips() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let passes = (0..1000)
            .filter(|_| monobit(&random_block(&mut rng)).unwrap().passed)
            .count();
        assert!(passes as f64 / 1000.0 > 0.995, "pass rate {passes}/1000");
    }

    #[test]
    fn registry_lookup() {
        let reg = BlockTestRegistry::standard();
        assert_eq!(reg.names(), vec!["monobit", "poker", "runs", "long_run"]);
        assert!(reg.get("poker").is_some());
        assert!(reg.get("serial").is_none());
    }
}
