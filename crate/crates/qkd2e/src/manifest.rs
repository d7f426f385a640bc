//! Run manifests: what `qkd2e reproduce` ran and where it wrote it.

use std::collections::BTreeSet;
use std::time::{SystemTime, UNIX_EPOCH};

use qkd2e_core::info::ErrorModel;
use qkd2e_core::protocol::{Channel, SessionConfig};
use serde::{Deserialize, Serialize};

use crate::output::Format;
use crate::scenario::ScenarioName;

/// What a manifest entry ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScenarioConfig {
    Session(SessionConfig),
    PaperTable {
        model: Option<ErrorModel>,
    },
    Wigner {
        angles_deg: [f64; 3],
        rel_uncertainty: f64,
        eta: f64,
        pairs: Option<u64>,
        channel: Channel,
        efficiency: f64,
    },
    So4 {
        pairs: u64,
        bootstrap: u32,
    },
    Scenario {
        scenario: ScenarioName,
        pairs: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub config: ScenarioConfig,
    pub output_path: String,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub seed: u64,
    pub scenarios: Vec<ScenarioSpec>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("duplicate scenario name `{0}` in manifest")]
pub struct DuplicateName(pub String);

impl RunManifest {
    pub fn new(seed: u64) -> Self {
        RunManifest {
            tool_version: crate::TOOL_VERSION.to_string(),
            seed,
            scenarios: Vec::new(),
            timestamp: timestamp(),
        }
    }

    pub fn push(&mut self, spec: ScenarioSpec) -> Result<(), DuplicateName> {
        if self.scenarios.iter().any(|s| s.name == spec.name) {
            return Err(DuplicateName(spec.name));
        }
        self.scenarios.push(spec);
        Ok(())
    }

    pub fn validate(&self) -> Result<(), DuplicateName> {
        let mut seen = BTreeSet::new();
        for s in &self.scenarios {
            if !seen.insert(&s.name) {
                return Err(DuplicateName(s.name.clone()));
            }
        }
        Ok(())
    }
}

/// `SOURCE_DATE_EPOCH` when set, so reproduced trees can be byte-identical.
pub fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}
