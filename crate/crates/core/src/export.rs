//! Text, JSON and CSV renderings of routing results.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{EffectiveRateMatrix, NetworkGraph, NodeId, Rate, RateScale};
use crate::paths::{MPathSet, Path};
use crate::routing::{IterationTrace, RoutingList, RoutingRecord};

/// Human-readable routing list, one `{paths}: rate` line per record.
pub fn routing_list_text(list: &RoutingList, scale: RateScale) -> String {
    let mut out = String::from("routing_list = [\n");
    for (set, rate) in list.iter() {
        out.push_str(&format!("    {set}: {},\n", scale.format_kbps(rate)));
    }
    out.push_str("]\n");
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingListFile {
    pub resolution_bps: u64,
    pub records: Vec<RecordEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub pair: (NodeId, NodeId),
    pub paths: Vec<Path>,
    /// Exact rate in base units; authoritative when reading back.
    pub rate_units: i64,
    pub rate_kbps: String,
}

impl RoutingListFile {
    pub fn new(list: &RoutingList, scale: RateScale) -> Self {
        RoutingListFile {
            resolution_bps: scale.resolution_bps,
            records: list
                .iter()
                .map(|(set, rate)| RecordEntry {
                    pair: set.endpoints(),
                    paths: set.paths().to_vec(),
                    rate_units: rate.units(),
                    rate_kbps: scale.format_kbps(rate),
                })
                .collect(),
        }
    }

    /// Rebuilds the list, checking it against the network it was routed on.
    pub fn into_list(self, g: &NetworkGraph) -> Result<RoutingList> {
        if self.resolution_bps != g.scale().resolution_bps {
            return Err(Error::RoutingMismatch(format!(
                "list uses {} bit/s units, network uses {}",
                self.resolution_bps,
                g.scale().resolution_bps
            )));
        }
        self.records
            .into_iter()
            .map(|e| {
                let set = MPathSet::new(e.paths)?;
                if set.endpoints() != crate::network::ordered(e.pair.0, e.pair.1) {
                    return Err(Error::RoutingMismatch(format!("record {set} lists pair {:?}", e.pair)));
                }
                if !set.is_valid_in(g) {
                    return Err(Error::RoutingMismatch(format!("set {set} uses links absent from the network")));
                }
                if e.rate_units <= 0 {
                    return Err(Error::RoutingMismatch(format!("set {set} has non-positive rate")));
                }
                Ok(RoutingRecord {
                    set,
                    rate: Rate(e.rate_units),
                })
            })
            .collect()
    }
}

/// Effective rate matrix in kbit/s, exact decimals, with a header row.
pub fn write_matrix_csv<W: Write>(eff: &EffectiveRateMatrix, scale: RateScale, out: W) -> Result<()> {
    let n = eff.node_count();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["node".to_string()];
    header.extend((0..n).map(|j| j.to_string()));
    w.write_record(&header)?;
    for i in 0..n {
        let mut row = vec![i.to_string()];
        row.extend((0..n).map(|j| scale.format_kbps(eff.get(NodeId(i), NodeId(j)))));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One row per accepted iteration: `r, i, j, pairs_tied, candidates_tied,
/// set, delta_before, delta_after, stop_reason`. Rates in kbit/s.
pub fn write_trace_csv<W: Write>(trace: &[IterationTrace], scale: RateScale, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "r",
        "i",
        "j",
        "pairs_tied",
        "candidates_tied",
        "set",
        "delta_before",
        "delta_after",
        "stop_reason",
    ])?;
    for t in trace {
        w.write_record([
            t.r.to_string(),
            t.selected_pair.0.to_string(),
            t.selected_pair.1.to_string(),
            t.pairs_tied.to_string(),
            t.candidates_tied.to_string(),
            t.chosen_set.to_string(),
            scale.format_kbps(t.delta_before),
            scale.format_kbps(t.delta_after),
            t.stop_reason.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
