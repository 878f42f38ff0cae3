//! Synthetic power traces for the S-Box engine.
//!
//! Each trace has `n_samples` points. Static logic leaks the Hamming
//! weight of the S-Box output at the leak sample with gain `alpha`;
//! current-mode logic draws a constant bias whose data-dependent ripple is
//! a small fraction of it. Gaussian noise is added to every sample.
//!
//! Noise comes from a ChaCha8 stream keyed by `(seed, stream)` and is drawn
//! in sample order, so every `(seed, row, sample)` triple maps to one fixed
//! value no matter how rows are scheduled.

use std::fmt::Write as _;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ciphers::sbox;
use crate::power::{estimate_avg_power, InventorySet, TechLibrary, DEFAULT_ACTIVITY};
use crate::{Error, LogicStyle, Result, Technology};

pub const DEFAULT_SAMPLES: usize = 2000;
/// 5 ps; with the default sample count this spans a 10 ns window.
pub const DEFAULT_TIME_STEP: f64 = 5e-12;
pub const DEFAULT_NOISE_SIGMA: f64 = 0.01;

#[inline]
pub fn hamming_weight(v: u8) -> u32 {
    v.count_ones()
}

/// How per-row noise streams are keyed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReseedMode {
    #[default]
    RowIndex,
    PlaintextValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageConfig {
    pub technology: Technology,
    pub style: LogicStyle,
    pub n_samples: usize,
    /// Seconds per sample.
    pub time_step: f64,
    pub leak_sample: usize,
    /// Additional `(sample, gain)` leak points; the primary leak has gain 1.
    pub extra_leaks: Vec<(usize, f64)>,
    /// SL gain per Hamming-weight unit.
    pub alpha: f64,
    /// SL constant offset.
    pub baseline: f64,
    /// CML constant draw.
    pub bias_power: f64,
    /// CML data-dependent fraction of the bias.
    pub ripple: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    pub reseed: ReseedMode,
}

impl LeakageConfig {
    /// Presets derived from the library's S-Box estimates.
    ///
    /// SL: `baseline = P_sl / 2`, `alpha = P_sl / 8`, so the mean leak
    /// sample (Hamming weight 4) equals the S-Box SL average power.
    /// CML: `bias_power = P_cml`, `ripple` the bias-weighted mean ripple
    /// coefficient of the S-Box CML cells.
    pub fn preset(
        technology: Technology,
        style: LogicStyle,
        lib: &TechLibrary,
        set: &InventorySet,
    ) -> Result<Self> {
        let sl = set.get("sbox", LogicStyle::Sl)?;
        let cml = set.get("sbox", LogicStyle::Cml)?;
        let p_sl = estimate_avg_power(sl, lib, technology, DEFAULT_ACTIVITY)?;
        let p_cml = estimate_avg_power(cml, lib, technology, DEFAULT_ACTIVITY)?;
        let mut weighted = 0.0;
        for (name, &count) in &cml.counts {
            let cell = lib.cell(name).ok_or_else(|| Error::UnknownCell {
                module: cml.module_name.clone(),
                cell: name.clone(),
            })?;
            weighted += count as f64 * cell.cml_bias_power.get(technology) * cell.cml_ripple_coeff;
        }
        let ripple = if p_cml > 0.0 { weighted / p_cml } else { 0.0 };
        Ok(Self {
            technology,
            style,
            n_samples: DEFAULT_SAMPLES,
            time_step: DEFAULT_TIME_STEP,
            leak_sample: DEFAULT_SAMPLES / 2,
            extra_leaks: Vec::new(),
            alpha: p_sl / 8.0,
            baseline: p_sl / 2.0,
            bias_power: p_cml,
            ripple,
            noise_sigma: DEFAULT_NOISE_SIGMA,
            seed: 0,
            reseed: ReseedMode::RowIndex,
        })
    }

    /// Presets from the bundled library.
    pub fn bundled(technology: Technology, style: LogicStyle) -> Self {
        Self::preset(
            technology,
            style,
            &TechLibrary::bundled(),
            &InventorySet::bundled(),
        )
        .expect("bundled S-Box inventories resolve")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples must be >= 1"));
        }
        if self.leak_sample >= self.n_samples {
            return Err(Error::invalid(format!(
                "leak_sample {} outside [0, {})",
                self.leak_sample, self.n_samples
            )));
        }
        if let Some(&(s, _)) = self.extra_leaks.iter().find(|(s, _)| *s >= self.n_samples) {
            return Err(Error::invalid(format!("extra leak sample {s} outside trace")));
        }
        if self.style == LogicStyle::Sl && !(self.alpha > 0.0) {
            return Err(Error::invalid("alpha must be > 0 for static logic"));
        }
        if !(0.0..1.0).contains(&self.ripple) {
            return Err(Error::invalid(format!("ripple {} outside [0, 1)", self.ripple)));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid("noise_sigma must be finite and >= 0"));
        }
        if !(self.time_step > 0.0) {
            return Err(Error::invalid("time_step must be > 0"));
        }
        Ok(())
    }

    /// Total simulated window in seconds.
    pub fn window(&self) -> f64 {
        self.n_samples as f64 * self.time_step
    }

    fn leak_points(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        std::iter::once((self.leak_sample, 1.0)).chain(self.extra_leaks.iter().copied())
    }
}

/// Standard-normal draws for one noise stream, in sample order.
fn noise_stream(seed: u64, stream: u64) -> impl Iterator<Item = f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    std::iter::repeat_with(move || rng.sample::<f64, _>(StandardNormal))
}

/// One power trace for plaintext byte `p` under key byte `k`.
pub fn synth_trace(p: u8, k: u8, cfg: &LeakageConfig, stream: u64) -> Vec<f64> {
    let hw = hamming_weight(sbox(p ^ k)) as f64;
    let (level, leak) = match cfg.style {
        LogicStyle::Sl => (cfg.baseline, cfg.alpha * hw),
        LogicStyle::Cml => (
            cfg.bias_power,
            cfg.ripple * cfg.bias_power * (hw / 8.0 - 0.5),
        ),
    };
    let mut out = vec![level; cfg.n_samples];
    for (s, gain) in cfg.leak_points() {
        out[s] += gain * leak;
    }
    if cfg.noise_sigma > 0.0 {
        for (v, z) in out.iter_mut().zip(noise_stream(cfg.seed, stream)) {
            *v += cfg.noise_sigma * z;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    /// `n_traces × n_samples`.
    pub traces: Array2<f64>,
    pub plaintexts: Vec<u8>,
    pub config: LeakageConfig,
    /// Kept for evaluation only; the attack never reads it.
    pub true_key: Option<u8>,
}

pub fn synth_traceset(plaintexts: &[u8], k: u8, cfg: &LeakageConfig) -> Result<TraceSet> {
    if plaintexts.is_empty() {
        return Err(Error::domain("at least one plaintext is required"));
    }
    cfg.validate()?;
    let rows: Vec<Vec<f64>> = plaintexts
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let stream = match cfg.reseed {
                ReseedMode::RowIndex => i as u64,
                ReseedMode::PlaintextValue => p as u64,
            };
            synth_trace(p, k, cfg, stream)
        })
        .collect();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let traces = Array2::from_shape_vec((plaintexts.len(), cfg.n_samples), flat)
        .expect("rows have n_samples entries");
    Ok(TraceSet {
        traces,
        plaintexts: plaintexts.to_vec(),
        config: cfg.clone(),
        true_key: Some(k),
    })
}

const TSET_MAGIC: &[u8; 5] = b"TSET1";

impl TraceSet {
    pub fn n_traces(&self) -> usize {
        self.traces.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.traces.ncols()
    }

    /// `trace_id,plaintext_hex,s0..s{n-1}`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trace_id,plaintext_hex");
        for s in 0..self.n_samples() {
            let _ = write!(out, ",s{s}");
        }
        out.push('\n');
        for (i, row) in self.traces.rows().into_iter().enumerate() {
            let _ = write!(out, "{i},{:02x}", self.plaintexts[i]);
            for v in row {
                let _ = write!(out, ",{v:e}");
            }
            out.push('\n');
        }
        out
    }

    /// `TSET1`, u32 n_traces, u32 n_samples, row-major f64, plaintext bytes; little-endian.
    pub fn to_binary(&self) -> Vec<u8> {
        let (n, m) = self.traces.dim();
        let mut out = Vec::with_capacity(13 + 8 * n * m + n);
        out.extend_from_slice(TSET_MAGIC);
        out.extend_from_slice(&(n as u32).to_le_bytes());
        out.extend_from_slice(&(m as u32).to_le_bytes());
        for v in self.traces.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.plaintexts);
        out
    }
}

/// Decodes the binary container into the trace matrix and plaintext bytes.
pub fn decode_binary(bytes: &[u8]) -> Result<(Array2<f64>, Vec<u8>)> {
    let header = bytes
        .get(..13)
        .ok_or_else(|| Error::Parse("trace container shorter than its header".into()))?;
    if &header[..5] != TSET_MAGIC {
        return Err(Error::Parse("bad trace container magic".into()));
    }
    let n = u32::from_le_bytes(header[5..9].try_into().unwrap()) as usize;
    let m = u32::from_le_bytes(header[9..13].try_into().unwrap()) as usize;
    let body = &bytes[13..];
    let expected = n
        .checked_mul(m)
        .and_then(|nm| nm.checked_mul(8))
        .and_then(|b| b.checked_add(n))
        .ok_or_else(|| Error::Parse("trace container dimensions overflow".into()))?;
    if body.len() != expected {
        return Err(Error::Parse(format!(
            "trace container body is {} bytes, expected {expected}",
            body.len()
        )));
    }
    let (data, plaintexts) = body.split_at(8 * n * m);
    let values = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let traces = Array2::from_shape_vec((n, m), values).expect("length checked above");
    Ok((traces, plaintexts.to_vec()))
}

/// Four 128-bit plaintexts and sixteen key bytes used for the S-Box attack.
pub fn table3_inputs() -> ([[u8; 16]; 4], [u8; 16]) {
    (
        [
            [
                0x03, 0xF4, 0x5A, 0x49, 0x50, 0xDF, 0x5B, 0xD1, 0x22, 0x1A, 0x0E, 0x23, 0xC9, 0x85,
                0x10, 0x39,
            ],
            [
                0x0D, 0x28, 0x33, 0x84, 0x12, 0xB9, 0x0A, 0x2F, 0xB1, 0xBE, 0xD1, 0x73, 0x41, 0xD5,
                0xDD, 0xF9,
            ],
            [
                0x03, 0x11, 0xE4, 0x16, 0xD5, 0x02, 0xC3, 0xFA, 0xC2, 0x44, 0x5E, 0x17, 0x47, 0x4A,
                0x1C, 0xEB,
            ],
            [
                0x05, 0x35, 0x39, 0x20, 0x3F, 0xA8, 0x4E, 0x96, 0xC9, 0x17, 0x43, 0x98, 0x31, 0x82,
                0xEB, 0xB4,
            ],
        ],
        [
            0xDE, 0x36, 0x97, 0xF3, 0x70, 0x88, 0x17, 0x1E, 0xE2, 0x0E, 0x0D, 0x6C, 0x12, 0x2A,
            0xF5, 0xC8,
        ],
    )
}
