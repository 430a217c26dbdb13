//! Multi-path (M-path) key routing for trusted-node QKD networks.
//!
//! A remote node pair receives its key as the XOR of `M` keys relayed over
//! `M` internally node-disjoint paths, so that an adversary has to hold at
//! least one trusted node on every path to learn anything. This crate
//! provides:
//!
//! * [`network`]: the rate-weighted network graph, target and effective rate
//!   matrices, and structural validation.
//! * [`io`]: the JSON network description format.
//! * [`paths`]: simple-path and disjoint path-set enumeration.
//! * [`routing`]: the greedy iterative routing engine that produces a
//!   [`routing::RoutingList`].
//! * [`keysim`]: a bit-level key pool simulator that relays keys along the
//!   routing list with one-time-pad hopping, checks endpoint agreement and
//!   analyses node compromise.
//! * [`export`]: CSV and text renderings of routing results.
//!
//! All rates are exact integers in a configurable base resolution (see
//! [`network::RateScale`]), so the routing loop is free of floating-point
//! drift.

pub mod error;
pub mod exec;
pub mod export;
pub mod io;
pub mod keysim;
pub mod network;
pub mod paths;
pub mod routing;

pub use error::{Error, Result};
pub use exec::Exec;
pub use network::{
    EffectiveRateMatrix, NetworkGraph, NodeId, Rate, RateScale, TargetMatrix, ValidationReport,
};
pub use paths::{MPathSet, Path};
pub use routing::{Router, RouterConfig, RoutingList, RoutingOutcome, StopReason};
