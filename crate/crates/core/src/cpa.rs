//! Correlation power analysis against the S-Box output Hamming weight.

use std::fmt::Write as _;

use ndarray::Array2;

use crate::ciphers::sbox;
use crate::synth::{hamming_weight, TraceSet};
use crate::{Error, LogicStyle, Result, Technology};

pub const N_GUESSES: usize = 256;

/// A series centered on its mean, ready for correlation.
#[derive(Debug, Clone)]
struct Centered {
    dev: Vec<f64>,
    norm: f64,
    constant: bool,
}

impl Centered {
    fn new(values: impl ExactSizeIterator<Item = f64> + Clone) -> Self {
        let n = values.len() as f64;
        let mut first = None;
        let mut constant = true;
        let mut sum = 0.0;
        let mut comp = 0.0;
        for v in values.clone() {
            match first {
                None => first = Some(v),
                Some(f) if f != v => constant = false,
                _ => {}
            }
            // Neumaier summation
            let t = sum + v;
            if sum.abs() >= v.abs() {
                comp += (sum - t) + v;
            } else {
                comp += (v - t) + sum;
            }
            sum = t;
        }
        let mean = (sum + comp) / n;
        let dev: Vec<f64> = values.map(|v| v - mean).collect();
        let norm = dev.iter().map(|d| d * d).sum::<f64>().sqrt();
        Self {
            dev,
            norm,
            constant: constant || norm == 0.0,
        }
    }

    fn correlate(&self, other: &Centered) -> f64 {
        if self.constant || other.constant {
            return 0.0;
        }
        let dot: f64 = self.dev.iter().zip(&other.dev).map(|(a, b)| a * b).sum();
        (dot / (self.norm * other.norm)).clamp(-1.0, 1.0)
    }
}

/// Pearson correlation coefficient.
///
/// Returns exactly 0 when either series is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::domain(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::domain("pearson needs at least two points"));
    }
    let cx = Centered::new(x.iter().copied());
    let cy = Centered::new(y.iter().copied());
    Ok(cx.correlate(&cy))
}

/// `entry[g][i] = HW(sbox(plaintexts[i] ^ g))`.
pub fn hypothesis_matrix(plaintexts: &[u8]) -> Array2<u8> {
    Array2::from_shape_fn((N_GUESSES, plaintexts.len()), |(g, i)| {
        hamming_weight(sbox(plaintexts[i] ^ g as u8)) as u8
    })
}

/// Correlation per key guess (rows) and time sample (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub values: Array2<f64>,
}

impl CorrelationMatrix {
    pub fn n_samples(&self) -> usize {
        self.values.ncols()
    }

    pub fn get(&self, guess: u8, sample: usize) -> f64 {
        self.values[(guess as usize, sample)]
    }

    /// `guess,s0..s{n-1}`, one row per guess.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("guess");
        for s in 0..self.n_samples() {
            let _ = write!(out, ",s{s}");
        }
        out.push('\n');
        for (g, row) in self.values.rows().into_iter().enumerate() {
            let _ = write!(out, "{g:02x}");
            for v in row {
                let _ = write!(out, ",{v:e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Centers each column of `m` in place; returns per-column norms, with
/// constant columns reported as `None`.
fn center_columns(m: &mut Array2<f64>) -> Vec<Option<f64>> {
    m.columns_mut()
        .into_iter()
        .map(|mut col| {
            let c = Centered::new(col.iter().copied().collect::<Vec<_>>().into_iter());
            col.iter_mut().zip(&c.dev).for_each(|(v, d)| *v = *d);
            (!c.constant).then_some(c.norm)
        })
        .collect()
}

/// Runs the attack over every guess and sample.
///
/// Correlations come from one product of the centered hypothesis and trace
/// matrices; for fixed inputs the result is bit-identical across runs.
pub fn cpa_attack(ts: &TraceSet) -> Result<CorrelationMatrix> {
    cpa_attack_raw(&ts.traces, &ts.plaintexts)
}

/// [`cpa_attack`] on a bare trace matrix and its plaintext bytes.
pub fn cpa_attack_raw(traces: &Array2<f64>, plaintexts: &[u8]) -> Result<CorrelationMatrix> {
    let n = traces.nrows();
    if n != plaintexts.len() {
        return Err(Error::domain(format!(
            "{n} traces but {} plaintexts",
            plaintexts.len()
        )));
    }
    if n < 2 {
        return Err(Error::domain("CPA needs at least two traces"));
    }
    // n × 256 and n × m, both centered per column
    let mut hyp = hypothesis_matrix(plaintexts).t().mapv(f64::from);
    let hyp_norms = center_columns(&mut hyp);
    let mut centered = traces.to_owned();
    let trace_norms = center_columns(&mut centered);

    let mut values = hyp.t().dot(&centered);
    for ((g, t), v) in values.indexed_iter_mut() {
        *v = match (hyp_norms[g], trace_norms[t]) {
            (Some(a), Some(b)) => (*v / (a * b)).clamp(-1.0, 1.0),
            _ => 0.0,
        };
    }
    Ok(CorrelationMatrix { values })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyRanking {
    /// Max over time of |correlation|, per guess.
    pub peaks: Vec<f64>,
    /// Guesses by peak, descending; ties go to the smaller guess.
    pub ranking: Vec<u8>,
    /// Best peak minus second-best peak.
    pub margin: f64,
    /// Population standard deviation of the peaks.
    pub dispersion: f64,
    pub recovered_key: u8,
    pub true_key: Option<u8>,
}

impl KeyRanking {
    pub fn peak(&self) -> f64 {
        self.peaks[self.recovered_key as usize]
    }

    pub fn success(&self) -> Option<bool> {
        self.true_key.map(|k| k == self.recovered_key)
    }

    /// Zero-based position of `key` in the ranking.
    pub fn rank_of(&self, key: u8) -> usize {
        self.ranking
            .iter()
            .position(|&g| g == key)
            .expect("ranking is a permutation of all guesses")
    }
}

pub fn rank_keys(cm: &CorrelationMatrix, true_key: Option<u8>) -> KeyRanking {
    let peaks: Vec<f64> = cm
        .values
        .rows()
        .into_iter()
        .map(|row| row.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();
    let mut ranking: Vec<u8> = (0..=255u8).collect();
    ranking.sort_by(|&a, &b| {
        peaks[b as usize]
            .total_cmp(&peaks[a as usize])
            .then(a.cmp(&b))
    });
    let best = peaks[ranking[0] as usize];
    let second = peaks[ranking[1] as usize];
    let mean = peaks.iter().sum::<f64>() / peaks.len() as f64;
    let var = peaks.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / peaks.len() as f64;
    KeyRanking {
        margin: best - second,
        dispersion: var.sqrt(),
        recovered_key: ranking[0],
        true_key,
        peaks,
        ranking,
    }
}

/// One completed attack on a single key byte.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub tech: Technology,
    pub style: LogicStyle,
    pub key_byte_index: usize,
    pub ranking: KeyRanking,
    pub correlations: CorrelationMatrix,
}

impl Experiment {
    pub fn run(ts: &TraceSet, key_byte_index: usize) -> Result<Self> {
        let correlations = cpa_attack(ts)?;
        let ranking = rank_keys(&correlations, ts.true_key);
        Ok(Self {
            tech: ts.config.technology,
            style: ts.config.style,
            key_byte_index,
            ranking,
            correlations,
        })
    }
}

/// Aggregate over all experiments sharing one technology and style.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSummary {
    pub tech: Technology,
    pub style: LogicStyle,
    pub experiments: usize,
    pub mean_margin: f64,
    pub mean_dispersion: f64,
    pub success_rate: f64,
    /// Differences against the first configuration in the report.
    pub delta_margin: f64,
    pub delta_dispersion: f64,
    pub delta_success: f64,
}

#[derive(Debug, Clone, Default)]
pub struct AttackReport {
    pub experiments: Vec<Experiment>,
}

impl AttackReport {
    pub fn new(experiments: Vec<Experiment>) -> Self {
        Self { experiments }
    }

    /// `tech,style,key_byte_index,recovered,true,peak,margin,dispersion,success`.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("tech,style,key_byte_index,recovered,true,peak,margin,dispersion,success\n");
        for e in &self.experiments {
            let r = &e.ranking;
            let truth = r.true_key.map(|k| format!("{k:02x}")).unwrap_or_default();
            let success = r.success().map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{:02x},{truth},{:.12},{:.12},{:.12},{success}",
                e.tech,
                e.style,
                e.key_byte_index,
                r.recovered_key,
                r.peak(),
                r.margin,
                r.dispersion,
            );
        }
        out
    }

    /// Per-configuration means, in first-seen order.
    pub fn summary(&self) -> Vec<ConfigSummary> {
        let mut keys: Vec<(Technology, LogicStyle)> = Vec::new();
        for e in &self.experiments {
            if !keys.contains(&(e.tech, e.style)) {
                keys.push((e.tech, e.style));
            }
        }
        let mut out: Vec<ConfigSummary> = keys
            .into_iter()
            .map(|(tech, style)| {
                let group: Vec<&Experiment> = self
                    .experiments
                    .iter()
                    .filter(|e| e.tech == tech && e.style == style)
                    .collect();
                let n = group.len() as f64;
                let successes = group
                    .iter()
                    .filter(|e| e.ranking.success() == Some(true))
                    .count() as f64;
                ConfigSummary {
                    tech,
                    style,
                    experiments: group.len(),
                    mean_margin: group.iter().map(|e| e.ranking.margin).sum::<f64>() / n,
                    mean_dispersion: group.iter().map(|e| e.ranking.dispersion).sum::<f64>() / n,
                    success_rate: successes / n,
                    delta_margin: 0.0,
                    delta_dispersion: 0.0,
                    delta_success: 0.0,
                }
            })
            .collect();
        if let Some(first) = out.first().cloned() {
            for s in &mut out {
                s.delta_margin = s.mean_margin - first.mean_margin;
                s.delta_dispersion = s.mean_dispersion - first.mean_dispersion;
                s.delta_success = s.success_rate - first.success_rate;
            }
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "tech,style,experiments,mean_margin,mean_dispersion,success_rate,delta_margin,delta_dispersion,delta_success\n",
        );
        for s in self.summary() {
            let _ = writeln!(
                out,
                "{},{},{},{:.12},{:.12},{:.6},{:.12},{:.12},{:.6}",
                s.tech,
                s.style,
                s.experiments,
                s.mean_margin,
                s.mean_dispersion,
                s.success_rate,
                s.delta_margin,
                s.delta_dispersion,
                s.delta_success
            );
        }
        out
    }
}
