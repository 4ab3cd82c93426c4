//! TOML experiment configuration.
//!
//! One file drives the whole pipeline: simulation parameters, mechanism
//! parameters, the load map and quality technology, solver settings, and the
//! estimation spec. Unknown keys are rejected. A fully resolved copy (all
//! defaults filled in) can be re-serialized next to any output for
//! reproducibility.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::did::DidSpec;
use crate::error::{Error, Result};
use crate::market::PricingRule;
use crate::mechanisms::MechanismParams;
use crate::model::{LoadMap, QualityTechnology};
use crate::sim::SimConfig;
use crate::solver::SolverConfig;

/// Estimation settings layered on top of the [`DidSpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimationConfig {
    /// Event-study window: periods before and after adoption (endpoints
    /// binned).
    pub event_study_window: [usize; 2],
    pub placebo_draws: usize,
    pub placebo_seed: u64,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            event_study_window: [6, 8],
            placebo_draws: 200,
            placebo_seed: 777,
        }
    }
}

fn default_did_spec() -> DidSpec {
    DidSpec {
        outcome: "log_speed".into(),
        treatment: "treated".into(),
        controls: vec!["log_mktcap".into(), "inst_own".into(), "analyst_cov".into()],
        unit: "firm_id".into(),
        time: "period".into(),
        cluster: "firm_id".into(),
        demean_tolerance: 1e-10,
        max_demean_sweeps: 200,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub sim: SimConfig,
    pub mechanisms: MechanismParams,
    pub quality: QualityTechnology,
    pub load_map: LoadMap,
    pub solver: SolverConfig,
    pub pricing_rule: PricingRule,
    pub did: DidSpec,
    pub estimation: EstimationConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig::default(),
            mechanisms: MechanismParams::default(),
            quality: QualityTechnology::default(),
            load_map: LoadMap::default(),
            solver: SolverConfig::default(),
            pricing_rule: PricingRule::default(),
            did: default_did_spec(),
            estimation: EstimationConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.mechanisms.validate()?;
        self.quality.validate()?;
        self.load_map.validate()?;
        self.solver.validate()?;
        if self.estimation.placebo_draws < 100 {
            return Err(Error::Config("placebo_draws must be at least 100".into()));
        }
        Ok(())
    }

    /// Serialize the fully resolved configuration (defaults filled in).
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }
}
