//! Run configuration, read from a TOML file with environment overrides.
//!
//! Every key can be overridden by an environment variable named
//! `STEMSIM_` followed by the upper-cased key path joined with `_`, e.g.
//! `STEMSIM_TOP_K=50` or `STEMSIM_THRESHOLDS_GIT=0.2`.
//!
//! ```toml
//! corpus_path = "corpus"
//! index_path = "index"
//! top_k = 100
//! seed = 42
//! threads = 0            # 0 = one worker per core
//!
//! [thresholds]           # significance thresholds per measure
//! histo = 0.56
//! lcis = 0.76
//! git = 0.15
//! bc = 0.13
//! lccs = 0.22
//! gct = 0.10
//! enco = 0.06
//!
//! [gates]
//! min_shared_identifiers = 20
//! min_references = 3
//! min_identifier_tile = 5
//! min_citation_tile = 2
//!
//! [consolidation]
//! max_edits = 2
//! max_edit_fraction = 0.1
//!
//! [explore]
//! min_histo = 0.25
//!
//! [calibration]
//! sample_size = 100000
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calibration::ThresholdConfig;
use crate::error::{Error, Result};
use crate::features::ConsolidationConfig;
use crate::measures::GateConfig;
use crate::retrieval::DEFAULT_TOP_K;

pub const ENV_PREFIX: &str = "STEMSIM_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus_path: PathBuf,
    pub index_path: PathBuf,
    pub top_k: usize,
    pub seed: u64,
    pub threads: usize,
    pub thresholds: ThresholdConfig,
    pub gates: GateConfig,
    pub consolidation: ConsolidationConfig,
    pub explore: ExploreConfig,
    pub calibration: CalibrationConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus_path: PathBuf::from("corpus"),
            index_path: PathBuf::from("index"),
            top_k: DEFAULT_TOP_K,
            seed: 42,
            threads: 0,
            thresholds: ThresholdConfig::default(),
            gates: GateConfig::default(),
            consolidation: ConsolidationConfig::default(),
            explore: ExploreConfig::default(),
            calibration: CalibrationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploreConfig {
    /// Pairs below this Histo score are dropped from the exploratory ranking.
    pub min_histo: f64,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig { min_histo: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub sample_size: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            sample_size: 100_000,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Apply `STEMSIM_*` overrides from the given variables.
    pub fn with_env<I, K, V>(self, vars: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut value = toml::Value::try_from(&self).map_err(|e| Error::Config(e.to_string()))?;
        let vars: Vec<(String, String)> = vars
            .into_iter()
            .filter(|(k, _)| k.as_ref().starts_with(ENV_PREFIX))
            .map(|(k, v)| (k.as_ref().to_string(), v.as_ref().to_string()))
            .collect();
        if vars.is_empty() {
            return Ok(self);
        }
        apply_overrides(&mut value, ENV_PREFIX.trim_end_matches('_'), &vars)?;
        let cfg: RunConfig = value.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_process_env(self) -> Result<Self> {
        self.with_env(std::env::vars())
    }

    pub fn validate(&self) -> Result<()> {
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be at least 1".into()));
        }
        let g = &self.gates;
        for (name, v) in [
            ("gates.min_shared_identifiers", g.min_shared_identifiers),
            ("gates.min_references", g.min_references),
            ("gates.min_identifier_tile", g.min_identifier_tile),
            ("gates.min_citation_tile", g.min_citation_tile),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..=1.0).contains(&self.explore.min_histo) {
            return Err(Error::Config("explore.min_histo must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.consolidation.max_edit_fraction) {
            return Err(Error::Config(
                "consolidation.max_edit_fraction must lie in [0, 1]".into(),
            ));
        }
        self.thresholds.validate()
    }
}

fn apply_overrides(value: &mut toml::Value, prefix: &str, vars: &[(String, String)]) -> Result<()> {
    let toml::Value::Table(table) = value else {
        return Ok(());
    };
    for (key, slot) in table.iter_mut() {
        let name = format!("{prefix}_{}", key.to_uppercase());
        if let toml::Value::Table(_) = slot {
            apply_overrides(slot, &name, vars)?;
            continue;
        }
        let Some((_, raw)) = vars.iter().find(|(k, _)| *k == name) else {
            continue;
        };
        let bad = |e: &dyn std::fmt::Display| Error::Config(format!("{name}: {e}"));
        *slot = match slot {
            toml::Value::Integer(_) => toml::Value::Integer(raw.trim().parse().map_err(|e| bad(&e))?),
            toml::Value::Float(_) => toml::Value::Float(raw.trim().parse().map_err(|e| bad(&e))?),
            toml::Value::Boolean(_) => toml::Value::Boolean(raw.trim().parse().map_err(|e| bad(&e))?),
            _ => toml::Value::String(raw.clone()),
        };
    }
    Ok(())
}
