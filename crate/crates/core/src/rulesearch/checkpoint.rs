//! Plain-text stage checkpoints.
//!
//! ```text
//! casbox-checkpoint 1
//! stage sac
//! count 7080
//! input 3f2a...            (checksum of the input checkpoint, or `none`)
//! shard 0/1
//! list explicit            (or `enumerated` for the implicit balanced stage)
//! 1438886595
//! ...
//! checksum 9c1e...         (SHA-256 of every preceding byte)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::enumerate::ShardSpec;
use super::filters::Stage;
use crate::error::{Error, Result};
use crate::write_atomic;

const MAGIC: &str = "casbox-checkpoint 1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Survivors {
    Listed(Vec<u32>),
    /// Every balanced rule in the shard's range; only `count` is stored.
    Enumerated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchCheckpoint {
    pub stage: Stage,
    pub count: u64,
    pub input_checksum: String,
    pub shard: ShardSpec,
    pub survivors: Survivors,
}

impl SearchCheckpoint {
    pub fn listed(stage: Stage, rules: Vec<u32>, input_checksum: String, shard: ShardSpec) -> Self {
        SearchCheckpoint {
            stage,
            count: rules.len() as u64,
            input_checksum,
            shard,
            survivors: Survivors::Listed(rules),
        }
    }

    pub fn rules(&self) -> Option<&[u32]> {
        match &self.survivors {
            Survivors::Listed(r) => Some(r),
            Survivors::Enumerated => None,
        }
    }

    fn body(&self) -> String {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        out.push_str(&format!("stage {}\n", self.stage));
        out.push_str(&format!("count {}\n", self.count));
        out.push_str(&format!("input {}\n", self.input_checksum));
        out.push_str(&format!("shard {}\n", self.shard));
        match &self.survivors {
            Survivors::Listed(rules) => {
                out.push_str("list explicit\n");
                for r in rules {
                    out.push_str(&r.to_string());
                    out.push('\n');
                }
            }
            Survivors::Enumerated => out.push_str("list enumerated\n"),
        }
        out
    }

    /// SHA-256 of the serialized body, lowercase hex.
    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.body().as_bytes()))
    }

    pub fn to_text(&self) -> String {
        let body = self.body();
        let sum = hex::encode(Sha256::digest(body.as_bytes()));
        format!("{body}checksum {sum}\n")
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let corrupt = |reason: String| Error::CorruptCheckpoint {
            path: path.to_path_buf(),
            reason,
        };
        let body_end = text
            .rfind("checksum ")
            .ok_or_else(|| corrupt("missing checksum line".into()))?;
        let (body, trailer) = text.split_at(body_end);
        let stated = trailer.trim_start_matches("checksum ").trim();
        let actual = hex::encode(Sha256::digest(body.as_bytes()));
        if stated != actual {
            return Err(corrupt(format!("checksum mismatch (stated {stated}, actual {actual})")));
        }

        let mut lines = body.lines();
        if lines.next() != Some(MAGIC) {
            return Err(corrupt("bad header".into()));
        }
        let mut field = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| corrupt(format!("missing `{name}`")))?;
            line.strip_prefix(name)
                .and_then(|rest| rest.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| corrupt(format!("expected `{name}`, found `{line}`")))
        };
        let stage: Stage = field("stage")?.parse()?;
        let count: u64 = field("count")?
            .parse()
            .map_err(|_| corrupt("bad count".into()))?;
        let input_checksum = field("input")?;
        let shard_text = field("shard")?;
        let (i, k) = shard_text
            .split_once('/')
            .and_then(|(i, k)| Some((i.parse().ok()?, k.parse().ok()?)))
            .ok_or_else(|| corrupt(format!("bad shard `{shard_text}`")))?;
        let shard = ShardSpec::new(i, k)?;
        let list_kind = field("list")?;
        let survivors = match list_kind.as_str() {
            "enumerated" => {
                if lines.next().is_some() {
                    return Err(corrupt("enumerated checkpoint has a rule list".into()));
                }
                Survivors::Enumerated
            }
            "explicit" => {
                let mut rules = Vec::with_capacity(count as usize);
                for line in lines {
                    let r: u32 = line
                        .parse()
                        .map_err(|_| corrupt(format!("bad rule `{line}`")))?;
                    if rules.last().is_some_and(|&prev| prev >= r) {
                        return Err(corrupt(format!("rules not strictly increasing at {r}")));
                    }
                    rules.push(r);
                }
                if rules.len() as u64 != count {
                    return Err(corrupt(format!("count {count} but {} rules", rules.len())));
                }
                Survivors::Listed(rules)
            }
            other => return Err(corrupt(format!("unknown list kind `{other}`"))),
        };
        Ok(SearchCheckpoint {
            stage,
            count,
            input_checksum,
            shard,
            survivors,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingCheckpoint(path.to_path_buf()));
        }
        Self::parse(&fs::read_to_string(path)?, path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }
}

/// `<dir>/<stage>.ckpt`, or `<dir>/<stage>.shard-<i>-of-<k>.ckpt`.
pub fn checkpoint_path(dir: &Path, stage: Stage, shard: ShardSpec) -> PathBuf {
    if shard.is_whole() {
        dir.join(format!("{stage}.ckpt"))
    } else {
        dir.join(format!("{stage}.shard-{}-of-{}.ckpt", shard.index, shard.count))
    }
}
