use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::args::{KappaArgs, OptimizeArgs, SerArgs};

pub const MANIFEST_FILE: &str = "manifest.json";

/// The command and fully resolved configuration of a run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "command", content = "config", rename_all = "kebab-case")]
pub enum RunPlan {
    KappaHist(KappaArgs),
    SerCurve(SerArgs),
    Optimize(OptimizeArgs),
}

impl RunPlan {
    pub fn seed(&self) -> u64 {
        match self {
            RunPlan::KappaHist(a) => a.scene.seed,
            RunPlan::SerCurve(a) => a.scene.seed,
            RunPlan::Optimize(a) => a.scene.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    #[serde(flatten)]
    pub run: RunPlan,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub snr_definition: Option<String>,
    pub duration_seconds: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(run: RunPlan, duration_seconds: f64, outputs: Vec<String>) -> Self {
        let snr_definition = matches!(run, RunPlan::SerCurve(_))
            .then(|| ris_forge::linksim::SNR_DEFINITION.to_string());
        Self {
            tool: "ris-forge".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: run.seed(),
            run,
            snr_definition,
            duration_seconds,
            outputs,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(MANIFEST_FILE), self)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
