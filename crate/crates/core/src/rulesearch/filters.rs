//! Rule predicates as interchangeable filters, looked up by stage name.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::boolfn::BooleanRule;
use crate::ca::{CaRule, PrngConfig, RingState};
use crate::conventions::Neighborhood;
use crate::error::{Error, Result};
use crate::fips;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Balanced,
    Ci1,
    Nonlinear,
    Sac,
    Fips,
    Bijective,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Balanced,
        Stage::Ci1,
        Stage::Nonlinear,
        Stage::Sac,
        Stage::Fips,
        Stage::Bijective,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Balanced => "balanced",
            Stage::Ci1 => "ci1",
            Stage::Nonlinear => "nonlinear",
            Stage::Sac => "sac",
            Stage::Fips => "fips",
            Stage::Bijective => "bijective",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "stage",
                name: s.to_string(),
            })
    }
}

/// Everything a filter may need beyond the rule itself.
#[derive(Debug, Clone)]
pub struct StageContext {
    pub neighborhood: Neighborhood,
    /// PRNG seed for the FIPS stage; its length is the ring size.
    pub seed: Option<RingState>,
    pub fips_blocks: usize,
}

impl Default for StageContext {
    fn default() -> Self {
        StageContext {
            neighborhood: Neighborhood::Descending,
            seed: None,
            fips_blocks: fips::DEFAULT_BLOCKS,
        }
    }
}

pub trait RuleFilter: Send + Sync {
    fn stage(&self) -> Stage;
    fn keep(&self, rule: BooleanRule) -> bool;
}

struct Balanced;

impl RuleFilter for Balanced {
    fn stage(&self) -> Stage {
        Stage::Balanced
    }

    fn keep(&self, rule: BooleanRule) -> bool {
        rule.is_balanced()
    }
}

struct FirstOrderImmune;

impl RuleFilter for FirstOrderImmune {
    fn stage(&self) -> Stage {
        Stage::Ci1
    }

    fn keep(&self, rule: BooleanRule) -> bool {
        rule.is_correlation_immune(1).expect("order 1 is valid")
    }
}

/// Drops affine functions (degree <= 1).
struct Nonlinear;

impl RuleFilter for Nonlinear {
    fn stage(&self) -> Stage {
        Stage::Nonlinear
    }

    fn keep(&self, rule: BooleanRule) -> bool {
        !rule.is_affine()
    }
}

struct Avalanche;

impl RuleFilter for Avalanche {
    fn stage(&self) -> Stage {
        Stage::Sac
    }

    fn keep(&self, rule: BooleanRule) -> bool {
        rule.satisfies_sac()
    }
}

struct FipsFilter {
    neighborhood: Neighborhood,
    seed: RingState,
    blocks: usize,
}

impl RuleFilter for FipsFilter {
    fn stage(&self) -> Stage {
        Stage::Fips
    }

    fn keep(&self, rule: BooleanRule) -> bool {
        let config = PrngConfig::new(
            CaRule::with_neighborhood(rule, self.neighborhood),
            self.seed.clone(),
        )
        .expect("seed validated when the filter was built");
        let mut generator = config.generator();
        fips::passes_incremental(|buf| generator.fill(buf), self.blocks)
    }
}

struct Bijective {
    neighborhood: Neighborhood,
}

impl RuleFilter for Bijective {
    fn stage(&self) -> Stage {
        Stage::Bijective
    }

    fn keep(&self, rule: BooleanRule) -> bool {
        CaRule::with_neighborhood(rule, self.neighborhood).is_bijective5()
    }
}

pub type FilterConstructor = fn(&StageContext) -> Result<Box<dyn RuleFilter>>;

/// Stage name to filter constructor.
pub struct FilterRegistry {
    constructors: BTreeMap<&'static str, FilterConstructor>,
}

impl FilterRegistry {
    pub fn empty() -> Self {
        FilterRegistry {
            constructors: BTreeMap::new(),
        }
    }

    pub fn standard() -> Self {
        let mut reg = Self::empty();
        reg.register(Stage::Balanced, |_| Ok(Box::new(Balanced)));
        reg.register(Stage::Ci1, |_| Ok(Box::new(FirstOrderImmune)));
        reg.register(Stage::Nonlinear, |_| Ok(Box::new(Nonlinear)));
        reg.register(Stage::Sac, |_| Ok(Box::new(Avalanche)));
        reg.register(Stage::Fips, |ctx| {
            let seed = ctx
                .seed
                .clone()
                .ok_or_else(|| Error::InvalidSeed("the fips stage needs a seed".into()))?;
            // Validate once here so `keep` can't fail.
            PrngConfig::new(CaRule::new(BooleanRule::ZERO), seed.clone())?;
            Ok(Box::new(FipsFilter {
                neighborhood: ctx.neighborhood,
                seed,
                blocks: ctx.fips_blocks,
            }))
        });
        reg.register(Stage::Bijective, |ctx| {
            Ok(Box::new(Bijective {
                neighborhood: ctx.neighborhood,
            }))
        });
        reg
    }

    pub fn register(&mut self, stage: Stage, constructor: FilterConstructor) {
        self.constructors.insert(stage.name(), constructor);
    }

    pub fn create(&self, stage: Stage, ctx: &StageContext) -> Result<Box<dyn RuleFilter>> {
        let ctor = self
            .constructors
            .get(stage.name())
            .ok_or_else(|| Error::UnknownName {
                kind: "filter",
                name: stage.name().to_string(),
            })?;
        ctor(ctx)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.constructors.keys().copied()
    }
}

impl Default for FilterRegistry {
    fn default() -> Self {
        Self::standard()
    }
}
