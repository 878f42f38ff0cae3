//! Penalty-accounting timing model of a ten-stage superscalar pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::predictor::{BranchPredictor, DEFAULT_BHT_ENTRIES};
use crate::{Error, Result};

pub const STAGE_NAMES: [&str; 10] = [
    "Fetch",
    "Decode",
    "Rename",
    "Dispatch",
    "Issue",
    "Reg Read",
    "Execute",
    "Load/Store Unit",
    "Writeback",
    "Retire",
];

pub const DEFAULT_MISPREDICT_PENALTY: u64 = 9;
pub const DEFAULT_REFETCH_PENALTY: u64 = 3;
pub const DEFAULT_BUFFER_CAPACITY: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstructionKind {
    Alu,
    Load,
    Store,
    Branch { taken: bool, target: u64 },
}

impl InstructionKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Alu => "alu",
            Self::Load => "load",
            Self::Store => "store",
            Self::Branch { .. } => "branch",
        }
    }

    pub fn is_branch(self) -> bool {
        matches!(self, Self::Branch { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstructionRecord {
    /// Instruction address; predictor indexing uses it directly.
    pub pc: u64,
    pub kind: InstructionKind,
}

impl InstructionRecord {
    pub fn alu(pc: u64) -> Self {
        Self { pc, kind: InstructionKind::Alu }
    }

    pub fn branch(pc: u64, taken: bool, target: u64) -> Self {
        Self {
            pc,
            kind: InstructionKind::Branch { taken, target },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub fetch_width: usize,
    pub mispredict_penalty: u64,
    pub refetch_penalty: u64,
    pub bht_entries: usize,
    pub buffer_capacity: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            fetch_width: 1,
            mispredict_penalty: DEFAULT_MISPREDICT_PENALTY,
            refetch_penalty: DEFAULT_REFETCH_PENALTY,
            bht_entries: DEFAULT_BHT_ENTRIES,
            buffer_capacity: DEFAULT_BUFFER_CAPACITY,
        }
    }
}

impl PipelineConfig {
    pub fn stage_names(&self) -> &'static [&'static str; 10] {
        &STAGE_NAMES
    }

    /// Cycles to drain the last instruction through the remaining stages.
    pub fn fill_cycles(&self) -> u64 {
        STAGE_NAMES.len() as u64 - 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.fetch_width == 0 {
            return Err(Error::invalid("fetch_width must be >= 1"));
        }
        if self.mispredict_penalty == 0 || self.refetch_penalty == 0 {
            return Err(Error::invalid("penalties must be >= 1"));
        }
        if self.buffer_capacity == 0 {
            return Err(Error::invalid("buffer_capacity must be >= 1"));
        }
        BranchPredictor::new(self.bht_entries).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrojanKind {
    BranchFlip,
    BufferStall,
}

impl TrojanKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::BranchFlip => "branchflip",
            Self::BufferStall => "bufferstall",
        }
    }
}

impl fmt::Display for TrojanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrojanKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "branchflip" => Ok(Self::BranchFlip),
            "bufferstall" => Ok(Self::BufferStall),
            _ => Err(Error::invalid(format!("unknown trojan kind `{s}`"))),
        }
    }
}

/// Event counters a condition trigger can watch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventCounter {
    Instructions,
    Branches,
    TakenBranches,
    Loads,
    Stores,
    Mispredictions,
}

impl FromStr for EventCounter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "instructions" => Self::Instructions,
            "branches" => Self::Branches,
            "taken-branches" => Self::TakenBranches,
            "loads" => Self::Loads,
            "stores" => Self::Stores,
            "mispredictions" => Self::Mispredictions,
            _ => return Err(Error::invalid(format!("unknown event counter `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trigger {
    /// Fires every `period` clock cycles.
    ClockCounter { period: u64 },
    /// Fires each time `counter` reaches a new multiple of `threshold`.
    Condition { counter: EventCounter, threshold: u64 },
}

impl Trigger {
    fn validate(&self) -> Result<()> {
        match *self {
            Trigger::ClockCounter { period: 0 } => Err(Error::invalid("period must be >= 1")),
            Trigger::Condition { threshold: 0, .. } => Err(Error::invalid("threshold must be >= 1")),
            _ => Ok(()),
        }
    }

    fn step(&self) -> u64 {
        match *self {
            Trigger::ClockCounter { period } => period,
            Trigger::Condition { threshold, .. } => threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrojanSpec {
    pub kind: TrojanKind,
    pub trigger: Trigger,
}

impl TrojanSpec {
    pub fn branch_flip(period: u64) -> Self {
        Self {
            kind: TrojanKind::BranchFlip,
            trigger: Trigger::ClockCounter { period },
        }
    }

    pub fn buffer_stall(period: u64) -> Self {
        Self {
            kind: TrojanKind::BufferStall,
            trigger: Trigger::ClockCounter { period },
        }
    }

    /// The clock period, when the trigger is clock-driven.
    pub fn period(&self) -> Option<u64> {
        match self.trigger {
            Trigger::ClockCounter { period } => Some(period),
            Trigger::Condition { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PipelineStats {
    pub cycles: u64,
    pub retired: u64,
    pub mispredictions: u64,
    pub refetches: u64,
    pub trojan_activations: u64,
}

impl PipelineStats {
    pub fn ipc(&self) -> f64 {
        self.retired as f64 / self.cycles as f64
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Events {
    instructions: u64,
    branches: u64,
    taken: u64,
    loads: u64,
    stores: u64,
    mispredictions: u64,
}

impl Events {
    fn get(&self, c: EventCounter) -> u64 {
        match c {
            EventCounter::Instructions => self.instructions,
            EventCounter::Branches => self.branches,
            EventCounter::TakenBranches => self.taken,
            EventCounter::Loads => self.loads,
            EventCounter::Stores => self.stores,
            EventCounter::Mispredictions => self.mispredictions,
        }
    }
}

/// Counts trigger firings between polls.
struct TriggerState {
    trigger: Trigger,
    last_epoch: u64,
}

impl TriggerState {
    fn new(trigger: Trigger) -> Self {
        Self { trigger, last_epoch: 0 }
    }

    fn poll(&mut self, cycle: u64, events: &Events) -> u64 {
        let value = match self.trigger {
            Trigger::ClockCounter { .. } => cycle,
            Trigger::Condition { counter, .. } => events.get(counter),
        };
        let epoch = value / self.trigger.step();
        let fired = epoch.saturating_sub(self.last_epoch);
        self.last_epoch = self.last_epoch.max(epoch);
        fired
    }
}

/// [`run`] plus the trace indices in retirement order.
pub fn run_traced(
    trace: &[InstructionRecord],
    cfg: &PipelineConfig,
    trojan: Option<&TrojanSpec>,
) -> Result<(PipelineStats, Vec<usize>)> {
    if trace.is_empty() {
        return Err(Error::domain("trace is empty"));
    }
    cfg.validate()?;
    if let Some(t) = trojan {
        t.trigger.validate()?;
    }
    let mut bp = BranchPredictor::new(cfg.bht_entries)?;
    let mut trig = trojan.map(|t| (t.kind, TriggerState::new(t.trigger)));
    let mut stats = PipelineStats::default();
    let mut ev = Events::default();
    let mut cycle = 0u64;
    let mut slot = 0usize;
    let mut retired = Vec::with_capacity(trace.len());

    for (i, rec) in trace.iter().enumerate() {
        if slot == 0 {
            cycle += 1;
        }
        slot = (slot + 1) % cfg.fetch_width;

        ev.instructions += 1;
        match rec.kind {
            InstructionKind::Alu => {}
            InstructionKind::Load => ev.loads += 1,
            InstructionKind::Store => ev.stores += 1,
            InstructionKind::Branch { taken, .. } => {
                ev.branches += 1;
                ev.taken += taken as u64;
            }
        }

        // A false stall re-fetches the instruction; it only costs cycles.
        if let Some((TrojanKind::BufferStall, state)) = trig.as_mut() {
            if state.poll(cycle, &ev) > 0 {
                stats.trojan_activations += 1;
                stats.refetches += 1;
                cycle += cfg.refetch_penalty;
            }
        }

        if let InstructionKind::Branch { taken, .. } = rec.kind {
            // Firings latch until the next predictor access, which sees the
            // whole table inverted once.
            if let Some((TrojanKind::BranchFlip, state)) = trig.as_mut() {
                if state.poll(cycle, &ev) > 0 {
                    stats.trojan_activations += 1;
                    bp.flip_all();
                }
            }
            if bp.predict(rec.pc) != taken {
                stats.mispredictions += 1;
                ev.mispredictions += 1;
                cycle += cfg.mispredict_penalty;
                slot = 0;
            }
            bp.update(rec.pc, taken);
        }

        retired.push(i);
    }

    stats.retired = retired.len() as u64;
    stats.cycles = cycle + cfg.fill_cycles();
    Ok((stats, retired))
}

/// Runs `trace` through the timing model, optionally with a Trojan.
pub fn run(
    trace: &[InstructionRecord],
    cfg: &PipelineConfig,
    trojan: Option<&TrojanSpec>,
) -> Result<PipelineStats> {
    run_traced(trace, cfg, trojan).map(|(s, _)| s)
}

/// IPC loss of `infected` relative to `healthy`, percent.
pub fn ipc_degradation(healthy: &PipelineStats, infected: &PipelineStats) -> Result<f64> {
    if healthy.retired != infected.retired {
        return Err(Error::NotComparable {
            healthy: healthy.retired,
            infected: infected.retired,
        });
    }
    let h = healthy.ipc();
    Ok(100.0 * (h - infected.ipc()) / h)
}
