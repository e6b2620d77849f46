//! JSON run configuration and its validation into a cover, a character and a support.

use crate::error::{Error, Result};
use crate::gf::{FieldCtx, Fel};
use crate::kummer::{BranchRule, KummerCover};
use crate::moduli::RhoAction;
use crate::pfrac::{Place, PuncturedLine};
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;
use std::sync::Arc;

pub const DEFAULT_BUDGET: u128 = 1_000_000;
pub const BUDGET_ENV: &str = "ASMODULI_BUDGET";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldCfg {
    pub p: u64,
    pub m: u32,
    #[serde(rename = "M")]
    pub big_m: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseCfg {
    pub punctures: Vec<String>,
    #[serde(default = "yes")]
    pub infinity: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverCfg {
    pub n: u64,
    pub exponents: Vec<i64>,
    #[serde(default)]
    pub unit_const: Option<String>,
    /// "smallest" (default) or "largest" n-th root fixing branch 0 at each puncture.
    #[serde(default)]
    pub zeta_choice: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhoCfg {
    pub s: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    #[serde(default)]
    pub name: Option<String>,
    pub field: FieldCfg,
    pub base: BaseCfg,
    pub cover: CoverCfg,
    pub rho: RhoCfg,
    /// Places kept tamely ramified: excluded from the pole support.
    #[serde(default)]
    pub tame_support: Option<Vec<String>>,
    #[serde(default)]
    pub levels: Option<String>,
    #[serde(default)]
    pub budget: Option<u128>,
}

/// A validated configuration.
#[derive(Clone, Debug)]
pub struct Setup {
    pub name: String,
    pub ctx: Arc<FieldCtx>,
    pub cover: KummerCover,
    pub rho: RhoAction,
    pub support: Vec<Place>,
    pub levels: RangeInclusive<usize>,
    pub budget: u128,
    pub rule: BranchRule,
}

pub fn parse_levels(s: &str) -> Result<RangeInclusive<usize>> {
    let bad = || Error::ConfigInvalid(format!("levels must look like a..b, got {s:?}"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

/// `ASMODULI_BUDGET` if set, else the given value, else the default.
pub fn budget_from_env(configured: Option<u128>) -> Result<u128> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::ConfigInvalid(format!("{BUDGET_ENV} is not an integer: {v:?}"))),
        Err(_) => Ok(configured.unwrap_or(DEFAULT_BUDGET)),
    }
}

fn invalid(e: Error) -> Error {
    match e {
        Error::ConfigInvalid(_) => e,
        other => Error::ConfigInvalid(other.to_string()),
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn setup(&self) -> Result<Setup> {
        self.setup_inner().map_err(invalid)
    }

    fn setup_inner(&self) -> Result<Setup> {
        let fc = &self.field;
        if !self.base.infinity {
            return Err(Error::ConfigInvalid("the base always contains ∞ as a place".into()));
        }
        if self.cover.n.is_multiple_of(fc.p) {
            return Err(Error::NotCoprime {
                n: self.cover.n,
                p: fc.p,
            });
        }
        let ctx = Arc::new(FieldCtx::new(fc.p, fc.m, fc.big_m)?);
        let punctures = self
            .base
            .punctures
            .iter()
            .map(|s| ctx.parse(s))
            .collect::<Result<Vec<_>>>()?;
        let base = PuncturedLine::new(ctx.clone(), punctures.clone())?;
        let unit = match &self.cover.unit_const {
            Some(s) => ctx.parse(s)?,
            None => Fel::ONE,
        };
        let cover = KummerCover::new(base, self.cover.n, self.cover.exponents.clone(), unit)?;
        let rho = RhoAction::new(&cover, self.rho.s)?;
        let tame = self
            .tame_support
            .iter()
            .flatten()
            .map(|s| {
                if s == "inf" {
                    return Ok(Place::Infinity);
                }
                let a = ctx.parse(s)?;
                punctures
                    .iter()
                    .position(|&b| b == a)
                    .map(Place::Finite)
                    .ok_or_else(|| Error::UnknownPuncture(s.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let support: Vec<Place> = cover.places().into_iter().filter(|p| !tame.contains(p)).collect();
        let rule = match self.cover.zeta_choice.as_deref() {
            None | Some("smallest") => BranchRule::Smallest,
            Some("largest") => BranchRule::Largest,
            Some(other) => {
                return Err(Error::ConfigInvalid(format!("unknown zeta_choice {other:?}")));
            }
        };
        for &place in &support {
            cover.branch_root(place, &rule)?;
        }
        let levels = match &self.levels {
            Some(s) => parse_levels(s)?,
            None => 0..=2,
        };
        Ok(Setup {
            name: self.name.clone().unwrap_or_else(|| "config".into()),
            ctx,
            cover,
            rho,
            support,
            levels,
            budget: budget_from_env(self.budget)?,
            rule,
        })
    }
}

/// The four bundled configurations of the acceptance matrix.
pub fn acceptance_matrix() -> Vec<Config> {
    [
        include_str!("../configs/cfg_a.json"),
        include_str!("../configs/cfg_b.json"),
        include_str!("../configs/cfg_c.json"),
        include_str!("../configs/cfg_d.json"),
    ]
    .iter()
    .map(|t| Config::from_json(t).expect("bundled config parses"))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_validate() {
        for c in acceptance_matrix() {
            let s = c.setup().unwrap();
            assert_eq!(s.levels, 0..=3);
        }
        let d = acceptance_matrix()[3].setup().unwrap();
        assert_eq!(d.support, vec![Place::Finite(0), Place::Infinity]);
    }

    #[test]
    fn bad_n_names_gcd() {
        let c = Config::from_json(include_str!("../configs/bad_n.json")).unwrap();
        let e = c.setup().unwrap_err();
        assert!(matches!(e, Error::ConfigInvalid(ref m) if m.contains("gcd(n,p)≠1")), "{e}");
    }

    #[test]
    fn levels_syntax() {
        assert_eq!(parse_levels("1..3").unwrap(), 1..=3);
        assert_eq!(parse_levels("1..=3").unwrap(), 1..=3);
        assert!(parse_levels("3..1").is_err());
    }
}
