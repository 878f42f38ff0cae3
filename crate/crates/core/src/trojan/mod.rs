//! Performance-degrading Trojans in a trace-driven pipeline model.
//!
//! Two payloads are modeled: `BranchFlip` inverts every counter of the
//! branch history table when its trigger fires, and `BufferStall` raises a
//! false stall that re-fetches the current instruction. Neither changes
//! which instructions retire or in what order; both only cost cycles.

mod footprint;
mod pipeline;
mod predictor;
mod tracegen;

use std::fmt::Write as _;

pub use footprint::{footprint_csv, footprint_delta, footprint_table, FootprintRow};
pub use pipeline::{
    ipc_degradation, run, run_traced, EventCounter, InstructionKind, InstructionRecord,
    PipelineConfig, PipelineStats, Trigger, TrojanKind, TrojanSpec, DEFAULT_BUFFER_CAPACITY,
    DEFAULT_MISPREDICT_PENALTY, DEFAULT_REFETCH_PENALTY, STAGE_NAMES,
};
pub use predictor::{BranchPredictor, DEFAULT_BHT_ENTRIES};
pub use tracegen::{generate_trace, parse_trace_csv, trace_to_csv, TraceGenParams};

/// One line of a healthy-versus-infected comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub trace: String,
    pub trojan: Option<TrojanSpec>,
    pub stats: PipelineStats,
    pub degradation_pct: f64,
}

impl ResultRow {
    pub fn new(
        trace: impl Into<String>,
        trojan: Option<TrojanSpec>,
        healthy: &PipelineStats,
        stats: PipelineStats,
    ) -> crate::Result<Self> {
        Ok(Self {
            trace: trace.into(),
            trojan,
            degradation_pct: ipc_degradation(healthy, &stats)?,
            stats,
        })
    }
}

/// `trace,trojan,period,cycles,retired,ipc,mispred,refetch,degradation_pct`.
pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out =
        String::from("trace,trojan,period,cycles,retired,ipc,mispred,refetch,degradation_pct\n");
    for r in rows {
        let (name, period) = match &r.trojan {
            None => ("none".to_string(), String::new()),
            Some(t) => (
                t.kind.to_string(),
                match t.trigger {
                    Trigger::ClockCounter { period } => period.to_string(),
                    Trigger::Condition { threshold, .. } => format!("cond:{threshold}"),
                },
            ),
        };
        let s = &r.stats;
        let _ = writeln!(
            out,
            "{},{name},{period},{},{},{:.9},{},{},{:.9}",
            r.trace,
            s.cycles,
            s.retired,
            s.ipc(),
            s.mispredictions,
            s.refetches,
            r.degradation_pct
        );
    }
    out
}
