use std::path::PathBuf;

use crate::network::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed network file: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("rate {value} kbit/s is not a multiple of the {resolution_bps} bit/s base resolution")]
    NotRepresentable { value: f64, resolution_bps: u64 },

    #[error("network is disconnected")]
    Disconnected,

    #[error("node {node} has degree {degree}, fewer than M = {m}")]
    DegreeTooLow { node: NodeId, degree: usize, m: usize },

    #[error("invalid router configuration: {0}")]
    Config(String),

    #[error("set endpoints {set:?} do not match the selected pair {pair:?}")]
    EndpointMismatch {
        set: (NodeId, NodeId),
        pair: (NodeId, NodeId),
    },

    #[error("edge ({0}, {1}) has effective rate below the increment")]
    GuardViolation(NodeId, NodeId),

    #[error("edge ({u}, {v}) needs {needed} key bits but its pool holds {available}")]
    CapacityExceeded {
        u: NodeId,
        v: NodeId,
        needed: u64,
        available: u64,
    },

    #[error("no relay segment allocated on edge ({0}, {1}) for this record")]
    MissingAllocation(NodeId, NodeId),

    #[error("routing list does not match the network: {0}")]
    RoutingMismatch(String),

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}
