//! JSON network description files.
//!
//! ```json
//! {
//!   "nodes": 5,
//!   "edges": [{"u": 0, "v": 1, "rate_kbps": 0.5}],
//!   "target": 0.2,
//!   "router": {"M": 2, "delta_r_kbps": 0.1, "r_max": null, "seed": 0,
//!              "hop_limit": null, "strict_guard": true}
//! }
//! ```
//!
//! `target` is either a scalar applied to every pair or a full `nodes x nodes`
//! matrix. All rates are in kbit/s. The optional top-level `resolution_bps`
//! sets the integer base unit (default 1 bit/s).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{NetworkGraph, NodeId, RateScale, TargetMatrix};
use crate::routing::RouterConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub nodes: usize,
    pub edges: Vec<EdgeSpec>,
    pub target: TargetSpec,
    #[serde(default)]
    pub router: RouterSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution_bps: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub u: usize,
    pub v: usize,
    pub rate_kbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Uniform(f64),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouterSpec {
    #[serde(rename = "M", alias = "m", default = "default_m")]
    pub m: usize,
    #[serde(default = "default_delta_r")]
    pub delta_r_kbps: f64,
    #[serde(default)]
    pub r_max: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub hop_limit: Option<usize>,
    #[serde(default = "default_strict_guard")]
    pub strict_guard: bool,
}

fn default_m() -> usize {
    2
}

fn default_delta_r() -> f64 {
    0.01
}

fn default_strict_guard() -> bool {
    true
}

impl Default for RouterSpec {
    fn default() -> Self {
        RouterSpec {
            m: default_m(),
            delta_r_kbps: default_delta_r(),
            r_max: None,
            seed: 0,
            hop_limit: None,
            strict_guard: default_strict_guard(),
        }
    }
}

impl NetworkFile {
    /// Converts to validated domain objects. Connectivity is not checked.
    pub fn into_parts(&self) -> Result<(NetworkGraph, TargetMatrix, RouterConfig)> {
        let scale = RateScale::new(self.resolution_bps.unwrap_or(1))?;
        let edges = self
            .edges
            .iter()
            .map(|e| {
                if e.rate_kbps < 0.0 {
                    return Err(Error::Schema(format!(
                        "edge ({}, {}) has negative rate {}",
                        e.u, e.v, e.rate_kbps
                    )));
                }
                Ok((NodeId(e.u), NodeId(e.v), scale.from_kbps(e.rate_kbps)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let graph = NetworkGraph::new(self.nodes, edges, scale)?;

        let target = match &self.target {
            TargetSpec::Uniform(t) => {
                if *t < 0.0 {
                    return Err(Error::Schema(format!("negative target {t}")));
                }
                TargetMatrix::uniform(self.nodes, scale.from_kbps(*t)?)?
            }
            TargetSpec::Matrix(rows) => {
                if rows.len() != self.nodes {
                    return Err(Error::Schema(format!(
                        "target matrix has {} rows for {} nodes",
                        rows.len(),
                        self.nodes
                    )));
                }
                let rows = rows
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|&x| scale.from_kbps(x))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                TargetMatrix::from_rows(&rows)?
            }
        };

        let r = &self.router;
        let cfg = RouterConfig {
            m: r.m,
            delta_r: scale.from_kbps(r.delta_r_kbps)?,
            r_max: r.r_max,
            seed: r.seed,
            hop_limit: r.hop_limit,
            strict_guard: r.strict_guard,
        };
        cfg.check()?;
        Ok((graph, target, cfg))
    }

    /// Inverse of [`NetworkFile::into_parts`].
    pub fn from_parts(g: &NetworkGraph, t: &TargetMatrix, cfg: &RouterConfig) -> Self {
        let scale = g.scale();
        let kbps = |r| scale.to_kbps_f64(r);
        let target = match t.as_uniform() {
            Some(u) => TargetSpec::Uniform(kbps(u)),
            None => TargetSpec::Matrix(
                t.rows()
                    .into_iter()
                    .map(|row| row.into_iter().map(kbps).collect())
                    .collect(),
            ),
        };
        NetworkFile {
            nodes: g.node_count(),
            edges: g
                .edges()
                .map(|(u, v, r)| EdgeSpec {
                    u: u.0,
                    v: v.0,
                    rate_kbps: kbps(r),
                })
                .collect(),
            target,
            router: RouterSpec {
                m: cfg.m,
                delta_r_kbps: kbps(cfg.delta_r),
                r_max: cfg.r_max,
                seed: cfg.seed,
                hop_limit: cfg.hop_limit,
                strict_guard: cfg.strict_guard,
            },
            resolution_bps: (scale.resolution_bps != 1).then_some(scale.resolution_bps),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network file serializes")
    }
}

/// Parses a network description without the connectivity check.
pub fn parse_network(text: &str) -> Result<(NetworkGraph, TargetMatrix, RouterConfig)> {
    let file: NetworkFile = serde_json::from_str(text)?;
    file.into_parts()
}

/// Reads and parses a network file, rejecting disconnected graphs.
pub fn load_network(path: impl AsRef<Path>) -> Result<(NetworkGraph, TargetMatrix, RouterConfig)> {
    let text = read_text(path.as_ref())?;
    let parts = parse_network(&text)?;
    if !parts.0.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(parts)
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Rate;

    const WALKTHROUGH: &str = r#"{
        "nodes": 5,
        "edges": [
            {"u": 0, "v": 1, "rate_kbps": 0.5}, {"u": 0, "v": 2, "rate_kbps": 0.4},
            {"u": 0, "v": 3, "rate_kbps": 0.5}, {"u": 1, "v": 2, "rate_kbps": 0.5},
            {"u": 1, "v": 4, "rate_kbps": 0.4}, {"u": 2, "v": 3, "rate_kbps": 0.5},
            {"u": 2, "v": 4, "rate_kbps": 0.3}, {"u": 3, "v": 4, "rate_kbps": 0.6}
        ],
        "target": 0.2,
        "router": {"M": 2, "delta_r_kbps": 0.1}
    }"#;

    #[test]
    fn parses_walkthrough_network() {
        let (g, t, cfg) = parse_network(WALKTHROUGH).unwrap();
        assert_eq!(g.edge_count(), 8);
        assert_eq!(g.rate(NodeId(4), NodeId(2)), Rate(300));
        assert_eq!(t.get(NodeId(0), NodeId(4)), Rate(200));
        assert_eq!(cfg.m, 2);
        assert_eq!(cfg.delta_r, Rate(100));
        assert!(cfg.strict_guard);
        assert_eq!(cfg.r_max, None);
    }

    #[test]
    fn negative_rate_is_schema_error() {
        let text = r#"{"nodes": 2, "edges": [{"u": 0, "v": 1, "rate_kbps": -1}], "target": 0}"#;
        assert!(matches!(parse_network(text), Err(Error::Schema(_))));
    }

    #[test]
    fn smallest_network() {
        let text = r#"{"nodes": 2, "edges": [{"u": 0, "v": 1, "rate_kbps": 1}], "target": 0}"#;
        let (g, _, _) = parse_network(text).unwrap();
        assert_eq!(g.remote_pairs().count(), 0);
    }

    #[test]
    fn malformed_is_parse_error() {
        assert!(matches!(parse_network("{nodes: 2"), Err(Error::Parse(_))));
        let unknown = r#"{"nodes": 2, "edges": [], "target": 0, "extra": 1}"#;
        assert!(matches!(parse_network(unknown), Err(Error::Parse(_))));
    }

    #[test]
    fn asymmetric_target_matrix_rejected() {
        let text = r#"{"nodes": 2, "edges": [{"u": 0, "v": 1, "rate_kbps": 1}],
                      "target": [[0, 0.1], [0.2, 0]]}"#;
        assert!(matches!(parse_network(text), Err(Error::Schema(_))));
    }

    #[test]
    fn off_grid_rate_rejected() {
        let text = r#"{"nodes": 2, "edges": [{"u": 0, "v": 1, "rate_kbps": 0.0001}], "target": 0}"#;
        assert!(matches!(
            parse_network(text),
            Err(Error::NotRepresentable { .. })
        ));
    }

    #[test]
    fn round_trip_preserves_everything() {
        let (g, t, cfg) = parse_network(WALKTHROUGH).unwrap();
        let text = NetworkFile::from_parts(&g, &t, &cfg).to_json();
        let (g2, t2, cfg2) = parse_network(&text).unwrap();
        assert_eq!(g, g2);
        assert_eq!(t, t2);
        assert_eq!(cfg, cfg2);
    }
}
