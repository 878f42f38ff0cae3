//! Bimodal branch history table of 2-bit saturating counters.

use crate::{Error, Result};

pub const DEFAULT_BHT_ENTRIES: usize = 2;

/// Weakly not-taken.
const INITIAL_COUNTER: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchPredictor {
    table: Vec<u8>,
}

impl BranchPredictor {
    pub fn new(entries: usize) -> Result<Self> {
        if entries == 0 || !entries.is_power_of_two() {
            return Err(Error::invalid(format!(
                "bht_entries {entries} must be a nonzero power of two"
            )));
        }
        Ok(Self {
            table: vec![INITIAL_COUNTER; entries],
        })
    }

    pub fn entries(&self) -> usize {
        self.table.len()
    }

    pub fn index(&self, pc: u64) -> usize {
        (pc % self.table.len() as u64) as usize
    }

    pub fn counter(&self, pc: u64) -> u8 {
        self.table[self.index(pc)]
    }

    pub fn set_counter(&mut self, pc: u64, value: u8) -> Result<()> {
        if value > 3 {
            return Err(Error::domain(format!("counter value {value} outside 0..=3")));
        }
        let i = self.index(pc);
        self.table[i] = value;
        Ok(())
    }

    pub fn counters(&self) -> &[u8] {
        &self.table
    }

    pub fn predict(&self, pc: u64) -> bool {
        self.counter(pc) >= 2
    }

    pub fn update(&mut self, pc: u64, taken: bool) {
        let i = self.index(pc);
        let c = &mut self.table[i];
        *c = if taken { (*c + 1).min(3) } else { c.saturating_sub(1) };
    }

    /// Inverts both bits of every counter.
    pub fn flip_all(&mut self) {
        self.table.iter_mut().for_each(|c| *c ^= 0b11);
    }
}
