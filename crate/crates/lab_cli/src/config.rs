//! TOML configuration.
//!
//! ```toml
//! kappa = 3            # >= 3
//! lambda = 2           # profile sequence parameter, >= 2
//! delta = "1/4"        # smoothing width of the bijective profile
//! seed = 1
//! m_max = 12           # profile sequence length
//! r_max = 40           # cutoff for majorant series
//!
//! [budgets]
//! enumeration = 4194304
//! samples = 20000
//!
//! [n]
//! min = 1
//! max = 2
//!
//! [source]
//! profile = { family = "power", num = 1, den = 1 }
//! levels = [{ k = 3, group = "s3" }, { k = 9, group = "a5" }]
//!
//! [target]
//! profile = { family = "identity" }
//! levels = []          # lamplighter
//!
//! [[tasks]]
//! kind = "zcoupling_verify"
//! n = 1
//! ```
//!
//! A level group is `"s3"`, `"a5"` or `{ table = "file.txt" }` in the group text
//! format, resolved relative to the config file.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use dd_coupler::DDParams;
use delta_core::{DeltaParams, Level};
use group_kernel::{a5_fiber, s3_fiber, MarkedGamma};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use profile_forge::ProfileSpec;
use serde::{Deserialize, Serialize};

use crate::tasks::Task;
use crate::{LabError, Result};

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default = "default_enumeration")]
    pub enumeration: u64,
    #[serde(default = "default_samples")]
    pub samples: u64,
}

fn default_enumeration() -> u64 {
    1 << 22
}

fn default_samples() -> u64 {
    20_000
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            enumeration: default_enumeration(),
            samples: default_samples(),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct NRange {
    pub min: usize,
    pub max: usize,
}

impl Default for NRange {
    fn default() -> Self {
        Self { min: 1, max: 2 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum GroupSpec {
    Named(String),
    Table { table: PathBuf },
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub k: u64,
    pub group: GroupSpec,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Side {
    #[serde(default = "identity")]
    pub profile: ProfileSpec,
    #[serde(default)]
    pub levels: Vec<LevelSpec>,
}

fn identity() -> ProfileSpec {
    ProfileSpec::Identity
}

impl Default for Side {
    fn default() -> Self {
        Self {
            profile: ProfileSpec::Identity,
            levels: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    pub kappa: u64,
    #[serde(default = "two")]
    pub lambda: u64,
    #[serde(default = "quarter")]
    pub delta: String,
    #[serde(default = "one")]
    pub seed: u64,
    #[serde(default = "two")]
    pub a_order: u64,
    #[serde(default = "three")]
    pub b_order: u64,
    #[serde(default = "twelve")]
    pub m_max: usize,
    #[serde(default = "forty")]
    pub r_max: usize,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub n: NRange,
    #[serde(default)]
    pub source: Side,
    #[serde(default)]
    pub target: Side,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tasks: Vec<Task>,
    /// Directory that relative table paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn one() -> u64 {
    1
}
fn two() -> u64 {
    2
}
fn three() -> u64 {
    3
}
fn twelve() -> usize {
    12
}
fn forty() -> usize {
    40
}
fn quarter() -> String {
    "1/4".into()
}

impl Default for LabConfig {
    /// Lamplighter on both sides with `κ = 3`.
    fn default() -> Self {
        toml::from_str("kappa = 3").expect("default config parses")
    }
}

impl LabConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: LabConfig =
            toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if self.kappa < 3 {
            return bad(format!("kappa must be at least 3, got {}", self.kappa));
        }
        if self.lambda < 2 {
            return bad(format!("lambda must be at least 2, got {}", self.lambda));
        }
        if self.budgets.enumeration == 0 || self.budgets.samples == 0 {
            return bad("budgets must be positive".into());
        }
        if self.n.min == 0 || self.n.min > self.n.max {
            return bad(format!(
                "n range {}..={} is empty or starts at 0",
                self.n.min, self.n.max
            ));
        }
        if self.m_max == 0 || self.r_max == 0 {
            return bad("m_max and r_max must be positive".into());
        }
        let d = self.delta()?;
        if d <= BigRational::zero() || d >= BigRational::one() {
            return bad(format!("delta must lie in (0, 1), got {d}"));
        }
        for side in [&self.source, &self.target] {
            side.profile.validate()?;
            if side.levels.windows(2).any(|w| w[0].k >= w[1].k) {
                return bad("level offsets must increase".into());
            }
        }
        Ok(())
    }

    pub fn delta(&self) -> Result<BigRational> {
        let parse = |s: &str| s.trim().parse::<BigInt>().ok();
        let (num, den) = match self.delta.split_once('/') {
            Some((a, b)) => (parse(a), parse(b)),
            None => (parse(&self.delta), Some(BigInt::one())),
        };
        match (num, den) {
            (Some(n), Some(d)) if !d.is_zero() => Ok(BigRational::new(n, d)),
            _ => Err(LabError::Config(format!(
                "delta {:?} is not a rational",
                self.delta
            ))),
        }
    }

    pub fn base(&self) -> Result<Arc<MarkedGamma>> {
        MarkedGamma::abelian_base(self.a_order as usize, self.b_order as usize)
            .map(Arc::new)
            .map_err(|e| LabError::Config(e.to_string()))
    }

    /// Loads a level group; a malformed table is an invariant failure.
    pub fn group(&self, spec: &GroupSpec) -> Result<MarkedGamma> {
        match spec {
            GroupSpec::Named(name) => match name.as_str() {
                "s3" => Ok(s3_fiber()),
                "a5" => Ok(a5_fiber()),
                other => Err(LabError::Config(format!(
                    "unknown group {other:?}; use s3, a5 or a table"
                ))),
            },
            GroupSpec::Table { table } => {
                let path = self.base_dir.join(table);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    LabError::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                group_kernel::text::from_text(&text).map_err(|e| {
                    LabError::invariant("group", "table", format!("{}: {e}", path.display()))
                })
            }
        }
    }

    fn side_params(&self, side: &Side) -> Result<DeltaParams> {
        let levels = side
            .levels
            .iter()
            .map(|l| {
                Ok(Level {
                    k: l.k,
                    gamma: Arc::new(self.group(&l.group)?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DeltaParams::new(self.kappa, self.base()?, levels, None)
            .map_err(|e| LabError::Config(e.to_string()))?)
    }

    pub fn source_params(&self) -> Result<DeltaParams> {
        self.side_params(&self.source)
    }

    pub fn target_params(&self) -> Result<DeltaParams> {
        self.side_params(&self.target)
    }

    pub fn dd_params(&self) -> Result<DDParams> {
        Ok(DDParams::new(
            self.source_params()?,
            self.target_params()?,
            self.source.profile.clone(),
            self.target.profile.clone(),
            self.lambda,
            self.m_max,
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_below_three_is_rejected() {
        let err = LabConfig::parse("kappa = 2", Path::new(".")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(LabConfig::parse("kappa = 3", Path::new(".")).is_ok());
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        for text in [
            "kappa = 3\nbogus = 1",
            "kappa = 3\n[budgets]\nsamples = 0",
            "kappa = 3\ndelta = \"x\"",
            "kappa = 3\n[n]\nmin = 3\nmax = 2",
            "kappa = 3\n[source]\nlevels = [{ k = 9, group = \"s3\" }, { k = 3, group = \"a5\" }]",
        ] {
            assert_eq!(
                LabConfig::parse(text, Path::new("."))
                    .unwrap_err()
                    .exit_code(),
                2,
                "{text}"
            );
        }
    }

    #[test]
    fn power_pair_builds() {
        let text = r#"
            kappa = 3
            [source]
            profile = { family = "power", num = 1, den = 1 }
            levels = [{ k = 3, group = "s3" }, { k = 9, group = "a5" }, { k = 27, group = "a5" }]
        "#;
        let cfg = LabConfig::parse(text, Path::new(".")).unwrap();
        let p = cfg.dd_params().unwrap();
        assert!(p.hypotheses().holds);
        assert_eq!(cfg.delta().unwrap(), BigRational::new(1.into(), 4.into()));
    }
}
