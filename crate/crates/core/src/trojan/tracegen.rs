//! Seeded synthetic instruction streams and the trace CSV format.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pipeline::{InstructionKind, InstructionRecord};
use crate::{Error, Result};

/// Parameters of the loop-nest generator.
///
/// The stream is a sequence of loops. Each loop body is a fixed block of
/// instructions ending in a backward branch; `branch_fraction` of the other
/// body slots are forward branches, each biased toward taken with
/// probability `taken_bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceGenParams {
    pub n_instructions: usize,
    pub branch_fraction: f64,
    pub taken_bias: f64,
    pub body_min: usize,
    pub body_max: usize,
    pub iterations_min: usize,
    pub iterations_max: usize,
    /// Probability a forward branch follows its bias on a given execution.
    pub bias_strength: f64,
    pub seed: u64,
}

impl Default for TraceGenParams {
    fn default() -> Self {
        Self {
            n_instructions: 10_000,
            branch_fraction: 0.2,
            taken_bias: 0.6,
            body_min: 4,
            body_max: 32,
            iterations_min: 2,
            iterations_max: 50,
            bias_strength: 0.9,
            seed: 0,
        }
    }
}

impl TraceGenParams {
    /// Branch-dense preset used for Trojan sweeps.
    pub fn branch_heavy(n_instructions: usize, seed: u64) -> Self {
        Self {
            n_instructions,
            branch_fraction: 0.4,
            body_min: 3,
            body_max: 12,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} {v} outside [0, 1]")))
            }
        };
        unit("branch_fraction", self.branch_fraction)?;
        unit("taken_bias", self.taken_bias)?;
        unit("bias_strength", self.bias_strength)?;
        if self.n_instructions == 0 {
            return Err(Error::invalid("n_instructions must be >= 1"));
        }
        if self.body_min < 2 || self.body_min > self.body_max {
            return Err(Error::invalid("need 2 <= body_min <= body_max"));
        }
        if self.iterations_min < 1 || self.iterations_min > self.iterations_max {
            return Err(Error::invalid("need 1 <= iterations_min <= iterations_max"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Slot {
    Plain(InstructionKind),
    Forward { bias_taken: bool },
}

/// Generates exactly `n_instructions` records. PCs are word addresses.
pub fn generate_trace(params: &TraceGenParams) -> Result<Vec<InstructionRecord>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n_instructions;
    let mut out = Vec::with_capacity(n);
    let mut base = 0u64;

    while out.len() < n {
        let len = rng.random_range(params.body_min..=params.body_max);
        let iterations = rng.random_range(params.iterations_min..=params.iterations_max);
        let body: Vec<Slot> = (0..len - 1)
            .map(|_| {
                if rng.random_bool(params.branch_fraction) {
                    Slot::Forward {
                        bias_taken: rng.random_bool(params.taken_bias),
                    }
                } else {
                    let r: f64 = rng.random();
                    Slot::Plain(if r < 0.6 {
                        InstructionKind::Alu
                    } else if r < 0.85 {
                        InstructionKind::Load
                    } else {
                        InstructionKind::Store
                    })
                }
            })
            .collect();
        let back_edge = base + len as u64 - 1;

        'iter: for it in 0..iterations {
            let mut j = 0;
            while j < body.len() {
                if out.len() == n {
                    break 'iter;
                }
                let pc = base + j as u64;
                match body[j] {
                    Slot::Plain(kind) => {
                        out.push(InstructionRecord { pc, kind });
                        j += 1;
                    }
                    Slot::Forward { bias_taken } => {
                        let taken = bias_taken == rng.random_bool(params.bias_strength);
                        out.push(InstructionRecord::branch(pc, taken, pc + 2));
                        j += if taken { 2 } else { 1 };
                    }
                }
            }
            if out.len() == n {
                break;
            }
            let taken = it + 1 < iterations;
            out.push(InstructionRecord::branch(back_edge, taken, base));
        }
        base += len as u64 + rng.random_range(1..=8u64);
    }
    Ok(out)
}

fn parse_hex(field: &str, line: usize) -> Result<u64> {
    let s = field.trim();
    let digits = s
        .strip_prefix("0x")
        .or_else(|| s.strip_prefix("0X"))
        .unwrap_or(s);
    u64::from_str_radix(digits, 16)
        .map_err(|_| Error::Parse(format!("line {line}: bad hex address `{s}`")))
}

/// Parses `pc,kind,taken,target`; lines starting with `#` are skipped.
pub fn parse_trace_csv(text: &str) -> Result<Vec<InstructionRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["pc", "kind", "taken", "target"] {
        return Err(Error::Parse(format!(
            "expected header `pc,kind,taken,target`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(i + 2);
        let pc = parse_hex(&row[0], line)?;
        let kind = match row[1].to_ascii_lowercase().as_str() {
            "alu" => InstructionKind::Alu,
            "load" => InstructionKind::Load,
            "store" => InstructionKind::Store,
            "branch" => {
                let taken = match &row[2] {
                    "1" | "true" | "t" => true,
                    "0" | "false" | "n" => false,
                    other => {
                        return Err(Error::Parse(format!("line {line}: bad taken flag `{other}`")))
                    }
                };
                InstructionKind::Branch {
                    taken,
                    target: parse_hex(&row[3], line)?,
                }
            }
            other => return Err(Error::Parse(format!("line {line}: unknown kind `{other}`"))),
        };
        if !kind.is_branch() && !(row[2].is_empty() && row[3].is_empty()) {
            return Err(Error::Parse(format!(
                "line {line}: taken/target only allowed on branches"
            )));
        }
        out.push(InstructionRecord { pc, kind });
    }
    Ok(out)
}

pub fn trace_to_csv(trace: &[InstructionRecord]) -> String {
    let mut out = String::from("pc,kind,taken,target\n");
    for r in trace {
        match r.kind {
            InstructionKind::Branch { taken, target } => {
                let _ = writeln!(out, "{:#x},branch,{},{target:#x}", r.pc, taken as u8);
            }
            k => {
                let _ = writeln!(out, "{:#x},{},,", r.pc, k.name());
            }
        }
    }
    out
}
