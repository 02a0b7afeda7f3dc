//! Run manifests written next to every CLI output.
//!
//! A manifest carries the fully resolved command (inputs embedded), so
//! replaying it reproduces deterministic outputs byte for byte. It holds no
//! timestamps or host information for the same reason.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bell::MeasurementSettings;
use crate::error::{Error, Result};
use crate::optimizer::{Functional, OptimizationConfig};
use crate::shotsim::PlanFile;
use crate::stateclasses::PartitionClass;
use crate::witness::CorrelationRecord;

pub const TOOL: &str = "mermin3";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A command with every input resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ResolvedCommand {
    Eval {
        state: String,
        /// Amplitudes as `[re, im]`, recorded when the state came from a file.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitudes: Option<Vec<[f64; 2]>>,
        functional: Functional,
        settings: MeasurementSettings,
    },
    Optimize {
        class: PartitionClass,
        functional: Functional,
        config: OptimizationConfig,
    },
    Witness {
        source: String,
        record: CorrelationRecord,
        confidence: f64,
    },
    Simulate {
        plan: PlanFile,
    },
}

impl ResolvedCommand {
    pub fn name(&self) -> &'static str {
        match self {
            ResolvedCommand::Eval { .. } => "eval",
            ResolvedCommand::Optimize { .. } => "optimize",
            ResolvedCommand::Witness { .. } => "witness",
            ResolvedCommand::Simulate { .. } => "simulate",
        }
    }

    /// Master seed, where the command has one.
    pub fn seed(&self) -> Option<u64> {
        match self {
            ResolvedCommand::Optimize { config, .. } => Some(config.seed),
            ResolvedCommand::Simulate { plan } => Some(plan.seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub json: bool,
    pub resolved: ResolvedCommand,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(resolved: ResolvedCommand, json: bool, outputs: Vec<String>) -> Self {
        RunManifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: resolved.name().into(),
            seed: resolved.seed(),
            json,
            resolved,
            outputs,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let m: RunManifest = serde_json::from_str(&text).map_err(Error::from_json)?;
        if m.tool != TOOL {
            return Err(Error::rejected(format!("manifest written by {:?}", m.tool)));
        }
        Ok(m)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }
}

/// `<output>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip() {
        let m = RunManifest::new(
            ResolvedCommand::Optimize {
                class: PartitionClass::Bisep12_3,
                functional: Functional::SigmaGeneral,
                config: OptimizationConfig::default(),
            },
            false,
            vec!["out.json".into()],
        );
        assert_eq!(m.seed, Some(0));
        assert_eq!(m.command, "optimize");
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        m.store(&p).unwrap();
        assert_eq!(RunManifest::load(&p).unwrap(), m);
        assert_eq!(
            manifest_path(Path::new("a/b.json")),
            PathBuf::from("a/b.json.manifest.json")
        );
    }
}
