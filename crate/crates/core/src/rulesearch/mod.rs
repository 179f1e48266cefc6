//! Staged search over the 2^32 local rules.
//!
//! Stages run in a fixed order; each one reads the previous stage's
//! checkpoint and writes its own, so a run can stop and resume at any stage
//! boundary. The balanced stage is never materialized: its checkpoint stores
//! only a count and the next stage re-enumerates it.

pub mod checkpoint;
pub mod enumerate;
pub mod filters;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub use checkpoint::{checkpoint_path, SearchCheckpoint, Survivors};
pub use enumerate::{split_range, BalancedRules, ShardSpec, RULE_SPACE};
pub use filters::{FilterConstructor, FilterRegistry, RuleFilter, Stage, StageContext};

use crate::boolfn::BooleanRule;
use crate::ca::RingState;
use crate::error::{Error, Result};
use crate::fips;

/// Pieces the enumeration of one shard is cut into for work splitting and
/// progress reports.
const ENUMERATION_CHUNKS: usize = 4096;
/// Explicit lists are filtered in chunks of this many rules.
const LIST_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StageOrder {
    #[default]
    Canonical,
    /// Bijectivity before FIPS; the final survivor set is the same.
    Cheap,
}

impl StageOrder {
    pub fn stages(self) -> [Stage; 6] {
        use Stage::*;
        match self {
            StageOrder::Canonical => [Balanced, Ci1, Nonlinear, Sac, Fips, Bijective],
            StageOrder::Cheap => [Balanced, Ci1, Nonlinear, Sac, Bijective, Fips],
        }
    }

    fn position(self, stage: Stage) -> usize {
        self.stages().iter().position(|&s| s == stage).expect("every stage is in every order")
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub from: Stage,
    pub to: Stage,
    pub checkpoint_dir: PathBuf,
    pub shard: ShardSpec,
    pub order: StageOrder,
    pub context: StageContext,
}

impl PipelineConfig {
    pub fn new(checkpoint_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            from: Stage::Balanced,
            to: Stage::Bijective,
            checkpoint_dir: checkpoint_dir.into(),
            shard: ShardSpec::WHOLE,
            order: StageOrder::Canonical,
            context: StageContext::default(),
        }
    }
}

/// Running totals for one stage; `chunks_done` of `chunks_total` work units
/// have finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progress {
    pub stage: Stage,
    pub scanned: u64,
    pub survivors: u64,
    pub chunks_done: u64,
    pub chunks_total: u64,
}

/// Called from worker threads.
pub trait Observer: Sync {
    fn progress(&self, _progress: Progress) {}
    fn stage_done(&self, _report: &StageReport) {}
}

pub struct Silent;

impl Observer for Silent {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageReport {
    pub stage: Stage,
    pub shard: ShardSpec,
    pub count: u64,
    pub path: PathBuf,
    pub checksum: String,
}

/// Keeps the rules accepted by `filter`, preserving order.
pub fn stage_filter(rules: &[u32], filter: &dyn RuleFilter) -> Vec<u32> {
    rules
        .par_iter()
        .copied()
        .filter(|&r| filter.keep(BooleanRule::from_truth_table(r)))
        .collect()
}

/// All balanced rules, ascending.
pub fn stage_balanced() -> BalancedRules {
    BalancedRules::all()
}

/// FIPS stage with a seed read from a hex file and a stream of `bits` bits
/// (a multiple of the 20 000-bit block).
pub fn stage_fips(rules: &[u32], seed_path: &Path, bits: usize, ctx: &StageContext) -> Result<Vec<u32>> {
    if bits == 0 || bits % fips::BLOCK_BITS != 0 {
        return Err(Error::BlockLength {
            expected: fips::BLOCK_BITS,
            actual: bits,
        });
    }
    let text = std::fs::read_to_string(seed_path)?;
    let seed = RingState::from_hex(&text, crate::ca::DEFAULT_RING_SIZE)?;
    let ctx = StageContext {
        seed: Some(seed),
        fips_blocks: bits / fips::BLOCK_BITS,
        ..ctx.clone()
    };
    let filter = FilterRegistry::standard().create(Stage::Fips, &ctx)?;
    Ok(stage_filter(rules, filter.as_ref()))
}

struct Tally {
    stage: Stage,
    scanned: AtomicU64,
    survivors: AtomicU64,
    chunks_done: AtomicU64,
    chunks_total: u64,
}

impl Tally {
    fn new(stage: Stage, chunks_total: u64) -> Self {
        Tally {
            stage,
            scanned: AtomicU64::new(0),
            survivors: AtomicU64::new(0),
            chunks_done: AtomicU64::new(0),
            chunks_total,
        }
    }

    /// Totals are a snapshot; concurrent chunks may interleave.
    fn add(&self, scanned: u64, survivors: u64) -> Progress {
        Progress {
            stage: self.stage,
            scanned: self.scanned.fetch_add(scanned, Ordering::Relaxed) + scanned,
            survivors: self.survivors.fetch_add(survivors, Ordering::Relaxed) + survivors,
            chunks_done: self.chunks_done.fetch_add(1, Ordering::Relaxed) + 1,
            chunks_total: self.chunks_total,
        }
    }
}

/// Counts the balanced rules in `range` and keeps those accepted by `filter`.
fn enumerate_and_filter(
    range: std::ops::Range<u64>,
    filter: Option<&dyn RuleFilter>,
    stage: Stage,
    observer: &dyn Observer,
) -> (u64, Vec<u32>) {
    let chunks = split_range(range, ENUMERATION_CHUNKS);
    let tally = Tally::new(stage, chunks.len() as u64);
    let parts: Vec<(u64, Vec<u32>)> = chunks
        .into_par_iter()
        .map(|r| {
            let mut count = 0u64;
            let mut kept = Vec::new();
            for v in BalancedRules::in_range(r) {
                count += 1;
                if filter.is_some_and(|f| f.keep(BooleanRule::from_truth_table(v))) {
                    kept.push(v);
                }
            }
            observer.progress(tally.add(count, kept.len() as u64));
            (count, kept)
        })
        .collect();
    let count = parts.iter().map(|p| p.0).sum();
    (count, parts.into_iter().flat_map(|p| p.1).collect())
}

fn filter_list(rules: &[u32], filter: &dyn RuleFilter, observer: &dyn Observer) -> Vec<u32> {
    let tally = Tally::new(filter.stage(), rules.len().div_ceil(LIST_CHUNK) as u64);
    let parts: Vec<Vec<u32>> = rules
        .par_chunks(LIST_CHUNK)
        .map(|chunk| {
            let kept: Vec<u32> = chunk
                .iter()
                .copied()
                .filter(|&r| filter.keep(BooleanRule::from_truth_table(r)))
                .collect();
            observer.progress(tally.add(chunk.len() as u64, kept.len() as u64));
            kept
        })
        .collect();
    parts.concat()
}

/// The previous stage's output for `shard`: its own shard file if present,
/// otherwise the unsharded file cut down to the shard's range.
fn load_input(dir: &Path, stage: Stage, shard: ShardSpec) -> Result<SearchCheckpoint> {
    let own = checkpoint_path(dir, stage, shard);
    if own.exists() || shard.is_whole() {
        return SearchCheckpoint::load(&own);
    }
    let whole_path = checkpoint_path(dir, stage, ShardSpec::WHOLE);
    let whole = SearchCheckpoint::load(&whole_path).map_err(|e| match e {
        Error::MissingCheckpoint(_) => Error::MissingCheckpoint(own.clone()),
        other => other,
    })?;
    let checksum = whole.checksum();
    Ok(match whole.survivors {
        Survivors::Listed(rules) => {
            let rules: Vec<u32> = rules.into_iter().filter(|&r| shard.contains(r)).collect();
            SearchCheckpoint {
                stage,
                count: rules.len() as u64,
                input_checksum: checksum,
                shard,
                survivors: Survivors::Listed(rules),
            }
        }
        Survivors::Enumerated => SearchCheckpoint {
            stage,
            count: BalancedRules::in_range(shard.range()).count() as u64,
            input_checksum: checksum,
            shard,
            survivors: Survivors::Enumerated,
        },
    })
}

fn save_stage(
    cfg: &PipelineConfig,
    ckpt: &SearchCheckpoint,
    observer: &dyn Observer,
) -> Result<()> {
    let path = checkpoint_path(&cfg.checkpoint_dir, ckpt.stage, cfg.shard);
    ckpt.save(&path)?;
    observer.stage_done(&StageReport {
        stage: ckpt.stage,
        shard: cfg.shard,
        count: ckpt.count,
        path,
        checksum: ckpt.checksum(),
    });
    Ok(())
}

/// Runs stages `from..=to` of `cfg.order` on `cfg.shard`, writing one
/// checkpoint per stage, and returns the last one.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    registry: &FilterRegistry,
    observer: &dyn Observer,
) -> Result<SearchCheckpoint> {
    let order = cfg.order.stages();
    let (first, last) = (cfg.order.position(cfg.from), cfg.order.position(cfg.to));
    if first > last {
        return Err(Error::Parse(format!(
            "stage `{}` comes after `{}`",
            cfg.from, cfg.to
        )));
    }
    // Build every filter up front so a bad context fails before any work.
    let filters = order[first..=last]
        .iter()
        .map(|&s| registry.create(s, &cfg.context))
        .collect::<Result<Vec<_>>>()?;

    let mut current = if first == 0 {
        None
    } else {
        Some(load_input(&cfg.checkpoint_dir, order[first - 1], cfg.shard)?)
    };

    for (offset, filter) in filters.iter().enumerate() {
        let stage = order[first + offset];
        let next = match &current {
            None => {
                // Balanced: fused with the following stage when that one runs
                // too, so the 6e8 balanced rules are walked only once.
                let fused = filters.get(offset + 1);
                let (count, kept) = enumerate_and_filter(
                    cfg.shard.range(),
                    fused.map(|f| f.as_ref()),
                    stage,
                    observer,
                );
                let balanced = SearchCheckpoint {
                    stage,
                    count,
                    input_checksum: "none".into(),
                    shard: cfg.shard,
                    survivors: Survivors::Enumerated,
                };
                save_stage(cfg, &balanced, observer)?;
                if let Some(f) = fused {
                    let ckpt = SearchCheckpoint::listed(f.stage(), kept, balanced.checksum(), cfg.shard);
                    save_stage(cfg, &ckpt, observer)?;
                    current = Some(ckpt);
                    // The fused stage is done; skip it below.
                    continue;
                }
                balanced
            }
            Some(input) if input.stage == stage => continue,
            Some(input) => {
                let kept = match &input.survivors {
                    Survivors::Listed(rules) => filter_list(rules, filter.as_ref(), observer),
                    Survivors::Enumerated => {
                        enumerate_and_filter(input.shard.range(), Some(filter.as_ref()), stage, observer).1
                    }
                };
                let ckpt = SearchCheckpoint::listed(stage, kept, input.checksum(), cfg.shard);
                save_stage(cfg, &ckpt, observer)?;
                ckpt
            }
        };
        current = Some(next);
    }
    Ok(current.expect("at least one stage ran"))
}

/// Concatenates the `count` shard checkpoints of `stage` into the unsharded
/// checkpoint, which is written and returned.
pub fn merge_shards(dir: &Path, stage: Stage, count: usize) -> Result<SearchCheckpoint> {
    let mut total = 0u64;
    let mut rules = Vec::new();
    let mut enumerated = None;
    let mut inputs = Sha256::new();
    for shard in ShardSpec::all(count) {
        let path = checkpoint_path(dir, stage, shard);
        let part = SearchCheckpoint::load(&path)?;
        if part.stage != stage || part.shard != shard {
            return Err(Error::CorruptCheckpoint {
                path,
                reason: format!("holds stage {} shard {}", part.stage, part.shard),
            });
        }
        let is_enumerated = matches!(part.survivors, Survivors::Enumerated);
        if *enumerated.get_or_insert(is_enumerated) != is_enumerated {
            return Err(Error::CorruptCheckpoint {
                path,
                reason: "mixes enumerated and explicit shards".into(),
            });
        }
        inputs.update(part.checksum().as_bytes());
        total += part.count;
        if let Survivors::Listed(r) = part.survivors {
            rules.extend(r);
        }
    }
    let merged = SearchCheckpoint {
        stage,
        count: total,
        input_checksum: format!("merged-{}", hex::encode(inputs.finalize())),
        shard: ShardSpec::WHOLE,
        survivors: if enumerated == Some(true) {
            Survivors::Enumerated
        } else {
            Survivors::Listed(rules)
        },
    };
    merged.save(&checkpoint_path(dir, stage, ShardSpec::WHOLE))?;
    Ok(merged)
}
