//! Models for comparing tunnel-FET and CMOS logic on area, average power,
//! correlation power analysis leakage and hardware-Trojan footprint.
//!
//! The crate is organised bottom-up:
//!
//! - [`device`]: analytic drain-current models and I-V sweeps.
//! - [`power`]: cell libraries, module inventories and the area/power
//!   estimators, together with the bundled reference tables.
//! - [`ciphers`]: AES S-Box / single round and KATAN32.
//! - [`synth`]: synthetic power traces under SL and CML leakage.
//! - [`cpa`]: Pearson correlation, the CPA attack and key ranking.
//! - [`trojan`]: the penalty-accounting pipeline model, the two Trojan
//!   payloads and footprint deltas.

pub mod ciphers;
pub mod cpa;
pub mod device;
mod error;
pub mod power;
pub mod synth;
mod tech;
pub mod trojan;

pub use error::{Error, Result};
pub use tech::{LogicStyle, PerTech, Technology};
