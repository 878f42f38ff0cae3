//! Experiment configuration file.
//!
//! TOML with one table per subcommand. Every key is optional and unknown
//! keys are rejected. Command-line flags override file values.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tfetsec_core::trojan::{PipelineConfig, TraceGenParams};


#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub iv_sweep: IvSweepSection,
    pub estimate: EstimateSection,
    pub leakage: LeakageSection,
    pub cpa: CpaSection,
    pub trojan: TrojanSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IvSweepSection {
    pub tech: String,
    pub points: usize,
}

impl Default for IvSweepSection {
    fn default() -> Self {
        Self { tech: "tfet".into(), points: 101 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateSection {
    /// Library TOML; the bundled library when unset.
    pub library: Option<PathBuf>,
    /// Inventory TOML; the bundled inventories when unset.
    pub inventories: Option<PathBuf>,
    pub activity: f64,
    pub tolerance: f64,
}

impl Default for EstimateSection {
    fn default() -> Self {
        Self {
            library: None,
            inventories: None,
            activity: tfetsec_core::power::DEFAULT_ACTIVITY,
            tolerance: tfetsec_core::power::DEFAULT_TOLERANCE,
        }
    }
}

/// Overrides applied on top of the library-derived presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeakageSection {
    pub samples: usize,
    pub leak_sample: Option<usize>,
    pub noise: f64,
    pub alpha: Option<f64>,
    pub baseline: Option<f64>,
    pub bias: Option<f64>,
    pub ripple: Option<f64>,
}

impl Default for LeakageSection {
    fn default() -> Self {
        Self {
            samples: tfetsec_core::synth::DEFAULT_SAMPLES,
            leak_sample: None,
            noise: tfetsec_core::synth::DEFAULT_NOISE_SIGMA,
            alpha: None,
            baseline: None,
            bias: None,
            ripple: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CpaSection {
    pub tech: Vec<String>,
    pub style: Vec<String>,
    pub traces: usize,
    pub table3: bool,
    /// Indices into the sixteen published key bytes.
    pub key_bytes: Vec<usize>,
    /// `none`, `first` or `all`.
    pub dump: String,
}

impl Default for CpaSection {
    fn default() -> Self {
        Self {
            tech: vec!["cmos".into(), "tfet".into()],
            style: vec!["sl".into(), "cml".into()],
            traces: 256,
            table3: false,
            key_bytes: (0..16).collect(),
            dump: "first".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrojanSection {
    /// Trace CSV; synthetic traces when unset.
    pub trace: Option<PathBuf>,
    /// `branchflip`, `bufferstall` or both.
    pub kinds: Vec<String>,
    pub periods: Vec<u64>,
    /// Condition trigger as `counter:threshold`; replaces the clock trigger.
    pub condition: Option<String>,
    /// Number of synthetic traces, seeded from the top-level seed.
    pub traces: usize,
    pub generator: GeneratorSection,
    pub pipeline: PipelineConfig,
    pub activity: f64,
}

impl Default for TrojanSection {
    fn default() -> Self {
        Self {
            trace: None,
            kinds: vec!["branchflip".into(), "bufferstall".into()],
            periods: vec![64, 32, 16, 8, 4, 2, 1],
            condition: None,
            traces: 1,
            generator: GeneratorSection::default(),
            pipeline: PipelineConfig::default(),
            activity: tfetsec_core::power::DEFAULT_ACTIVITY,
        }
    }
}

/// Synthetic trace shape. Seeds come from the top-level seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSection {
    pub instructions: usize,
    pub branch_fraction: f64,
    pub taken_bias: f64,
    pub bias_strength: f64,
    pub body_min: usize,
    pub body_max: usize,
    pub iterations_min: usize,
    pub iterations_max: usize,
}

impl Default for GeneratorSection {
    fn default() -> Self {
        let p = TraceGenParams::branch_heavy(10_000, 0);
        Self {
            instructions: p.n_instructions,
            branch_fraction: p.branch_fraction,
            taken_bias: p.taken_bias,
            bias_strength: p.bias_strength,
            body_min: p.body_min,
            body_max: p.body_max,
            iterations_min: p.iterations_min,
            iterations_max: p.iterations_max,
        }
    }
}

impl GeneratorSection {
    pub fn params(&self, seed: u64) -> TraceGenParams {
        TraceGenParams {
            n_instructions: self.instructions,
            branch_fraction: self.branch_fraction,
            taken_bias: self.taken_bias,
            bias_strength: self.bias_strength,
            body_min: self.body_min,
            body_max: self.body_max,
            iterations_min: self.iterations_min,
            iterations_max: self.iterations_max,
            seed,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
