use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use mpath_core::{RouterConfig, RoutingOutcome};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to reproduce one `route` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub input: PathBuf,
    pub resolution_bps: u64,
    pub config: RouterConfig,
    pub seed: u64,
    pub outcome: OutcomeSummary,
    /// Files written next to the manifest.
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSummary {
    pub iterations: u64,
    pub final_delta_kbps: String,
    pub stop_reason: String,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub kind: String,
    pub path: String,
}

impl OutcomeSummary {
    pub fn new(o: &RoutingOutcome, final_delta_kbps: String) -> Self {
        OutcomeSummary {
            iterations: o.iterations,
            final_delta_kbps,
            stop_reason: o.stop_reason.to_string(),
            records: o.routing_list.len(),
        }
    }
}
