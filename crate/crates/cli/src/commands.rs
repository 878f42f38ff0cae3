use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::anyhow;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tfetsec_core::cpa::{AttackReport, Experiment};
use tfetsec_core::device::{iv_sweep, DeviceParams};
use tfetsec_core::power::{
    compare_reference, estimate_area, estimate_avg_power, reproduce_reference_table, Deviation,
    InventorySet, ReferenceData, TechLibrary,
};
use tfetsec_core::synth::{synth_traceset, table3_inputs, LeakageConfig};
use tfetsec_core::trojan::{
    footprint_csv, footprint_table, parse_trace_csv, results_csv, run, EventCounter,
    InstructionRecord, ResultRow, Trigger, TrojanKind, TrojanSpec,
};
use tfetsec_core::{Error, LogicStyle, Technology};

use crate::config::{ExperimentConfig, LeakageSection};
use crate::output::Output;
use crate::{Cli, Command, LeakageArgs};

const DEFAULT_OUT: &str = "tfetsec-out";

/// Exit-code class of a failed command.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or configuration (exit 2).
    Usage(anyhow::Error),
    /// Unreadable or malformed input data, or an I/O failure (exit 3).
    Data(anyhow::Error),
}

type Outcome<T> = Result<T, Failure>;

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow!("{msg}"))
}

fn data_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Data(e.into())
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid(_) | Error::Domain(_) | Error::UndefinedSlope { .. } => {
                Failure::Usage(e.into())
            }
            _ => Failure::Data(e.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.into())
    }
}

pub fn execute(cli: Cli) -> Outcome<Vec<PathBuf>> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            ExperimentConfig::from_toml_str(&text)
                .map_err(|e| usage(format!("config {}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    apply_flags(&mut cfg, &cli.command);
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let out = Output::new(&dir, &cfg)?;

    match &cli.command {
        Command::IvSweep(_) => cmd_iv_sweep(&cfg, &out),
        Command::Estimate(_) => cmd_estimate(&cfg, &out),
        Command::Synth(a) => cmd_synth(&cfg, &out, a),
        Command::Cpa(_) => cmd_cpa(&cfg, &out),
        Command::Trojan(_) => cmd_trojan(&cfg, &out),
        Command::Report => cmd_report(&cfg, &out),
    }
}

fn apply_leakage(l: &mut LeakageSection, a: &LeakageArgs) {
    if let Some(v) = a.noise {
        l.noise = v;
    }
    if let Some(v) = a.ripple {
        l.ripple = Some(v);
    }
    if let Some(v) = a.samples {
        l.samples = v;
    }
    if let Some(v) = a.leak_sample {
        l.leak_sample = Some(v);
    }
}

/// Folds command-line flags into the config so the hash covers them.
fn apply_flags(cfg: &mut ExperimentConfig, cmd: &Command) {
    match cmd {
        Command::IvSweep(a) => {
            if let Some(t) = &a.tech {
                cfg.iv_sweep.tech = t.clone();
            }
            if let Some(n) = a.points {
                cfg.iv_sweep.points = n;
            }
        }
        Command::Estimate(a) => {
            if a.library.is_some() {
                cfg.estimate.library = a.library.clone();
            }
            if a.inventories.is_some() {
                cfg.estimate.inventories = a.inventories.clone();
            }
            if let Some(v) = a.activity {
                cfg.estimate.activity = v;
            }
        }
        Command::Synth(a) => {
            apply_leakage(&mut cfg.leakage, &a.leakage);
            if let Some(n) = a.traces {
                cfg.cpa.traces = n;
            }
            cfg.cpa.table3 |= a.table3;
        }
        Command::Cpa(a) => {
            apply_leakage(&mut cfg.leakage, &a.leakage);
            if let Some(v) = &a.tech {
                cfg.cpa.tech = v.clone();
            }
            if let Some(v) = &a.style {
                cfg.cpa.style = v.clone();
            }
            if let Some(n) = a.traces {
                cfg.cpa.traces = n;
            }
            cfg.cpa.table3 |= a.table3;
            if let Some(v) = &a.key_bytes {
                cfg.cpa.key_bytes = v.clone();
            }
            if let Some(v) = &a.dump {
                cfg.cpa.dump = v.clone();
            }
        }
        Command::Trojan(a) => {
            let t = &mut cfg.trojan;
            if a.trace.is_some() {
                t.trace = a.trace.clone();
            }
            if let Some(v) = &a.kind {
                t.kinds = v.clone();
            }
            if let Some(v) = &a.periods {
                t.periods = v.clone();
            }
            if a.condition.is_some() {
                t.condition = a.condition.clone();
            }
            if let Some(v) = a.traces {
                t.traces = v;
            }
            if let Some(v) = a.instructions {
                t.generator.instructions = v;
            }
            if let Some(v) = a.branch_fraction {
                t.generator.branch_fraction = v;
            }
            if let Some(v) = a.taken_bias {
                t.generator.taken_bias = v;
            }
            if let Some(v) = a.bht_entries {
                t.pipeline.bht_entries = v;
            }
            if let Some(v) = a.fetch_width {
                t.pipeline.fetch_width = v;
            }
            if let Some(v) = a.mispredict_penalty {
                t.pipeline.mispredict_penalty = v;
            }
            if let Some(v) = a.refetch_penalty {
                t.pipeline.refetch_penalty = v;
            }
        }
        Command::Report => {}
    }
}

fn parse_tech(s: &str) -> Outcome<Technology> {
    s.parse()
        .map_err(|_| usage(format!("unknown technology `{s}` (expected tfet, mosfet or cmos)")))
}

fn parse_style(s: &str) -> Outcome<LogicStyle> {
    s.parse()
        .map_err(|_| usage(format!("unknown logic style `{s}` (expected sl or cml)")))
}

/// Independent 64-bit seed for stream `index` of the top-level seed.
fn derived_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.next_u64()
}

fn load_power(cfg: &ExperimentConfig) -> Outcome<(TechLibrary, InventorySet)> {
    let lib = match &cfg.estimate.library {
        Some(p) => TechLibrary::load(p)
            .map_err(|e| data_err(anyhow!("library {}: {e}", p.display())))?,
        None => TechLibrary::bundled(),
    };
    let set = match &cfg.estimate.inventories {
        Some(p) => InventorySet::load(p)
            .map_err(|e| data_err(anyhow!("inventories {}: {e}", p.display())))?,
        None => InventorySet::bundled(),
    };
    set.validate(&lib).map_err(data_err)?;
    Ok((lib, set))
}

fn cmd_iv_sweep(cfg: &ExperimentConfig, out: &Output) -> Outcome<Vec<PathBuf>> {
    let tech = parse_tech(&cfg.iv_sweep.tech)?;
    let curve = iv_sweep(&DeviceParams::default_for(tech), cfg.iv_sweep.points)?;
    let name = match tech {
        Technology::Tfet => "iv_tfet.csv",
        Technology::Cmos => "iv_mosfet.csv",
    };
    Ok(vec![out.write_csv(name, &curve.to_csv())?])
}

fn deviation_csv(devs: &[Deviation]) -> String {
    let mut s = String::from("module,tech,style,metric,computed,reference,rel_dev,flagged,note\n");
    for d in devs {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.9},{},{:.3e},{},{}",
            d.module,
            d.tech,
            d.style,
            d.metric,
            d.computed,
            d.reference,
            d.rel_dev,
            d.flagged,
            d.note.unwrap_or("")
        );
    }
    s
}

fn cmd_estimate(cfg: &ExperimentConfig, out: &Output) -> Outcome<Vec<PathBuf>> {
    let (lib, set) = load_power(cfg)?;
    let activity = cfg.estimate.activity;
    let mut inv_csv = String::from("module,style,tech,area_nm2,power_pw\n");
    for inv in &set.inventories {
        for tech in Technology::ALL {
            let _ = writeln!(
                inv_csv,
                "{},{},{tech},{:.6},{:.9e}",
                inv.module_name,
                inv.style,
                estimate_area(inv, &lib, tech)?,
                estimate_avg_power(inv, &lib, tech, activity)?
            );
        }
    }
    let computed = reproduce_reference_table(&lib, &set, activity).map_err(data_err)?;
    let devs = compare_reference(&computed, &lib, cfg.estimate.tolerance).map_err(data_err)?;
    let flagged = devs.iter().filter(|d| d.flagged).count();
    if flagged > 0 {
        eprintln!("{flagged} of {} reference values outside tolerance", devs.len());
    }
    Ok(vec![
        out.write_csv("estimate.csv", &deviation_csv(&devs))?,
        out.write_csv("inventories.csv", &inv_csv)?,
    ])
}

fn leakage_config(
    cfg: &ExperimentConfig,
    tech: Technology,
    style: LogicStyle,
    lib: &TechLibrary,
    set: &InventorySet,
    seed: u64,
) -> Outcome<LeakageConfig> {
    let l = &cfg.leakage;
    let mut c = LeakageConfig::preset(tech, style, lib, set).map_err(data_err)?;
    c.n_samples = l.samples;
    c.leak_sample = l.leak_sample.unwrap_or(l.samples / 2);
    c.noise_sigma = l.noise;
    c.alpha = l.alpha.unwrap_or(c.alpha);
    c.baseline = l.baseline.unwrap_or(c.baseline);
    c.bias_power = l.bias.unwrap_or(c.bias_power);
    c.ripple = l.ripple.unwrap_or(c.ripple);
    c.seed = seed;
    c.validate()?;
    Ok(c)
}

/// Plaintext bytes for one key byte.
///
/// With `table3`, the four published bytes lead and the unused byte values
/// follow in ascending order; otherwise byte values cycle from zero.
fn plaintexts(cfg: &ExperimentConfig, key_byte: usize) -> Outcome<Vec<u8>> {
    let n = cfg.cpa.traces;
    if n < 2 {
        return Err(usage("at least two traces are required"));
    }
    if !cfg.cpa.table3 {
        return Ok((0..n).map(|i| i as u8).collect());
    }
    let (blocks, _) = table3_inputs();
    let mut pts: Vec<u8> = blocks.iter().map(|b| b[key_byte]).collect();
    let rest: Vec<u8> = (0..=255u8).filter(|v| !pts.contains(v)).collect();
    pts.extend(rest.into_iter().cycle().take(n.saturating_sub(4)));
    pts.truncate(n);
    Ok(pts)
}

fn key_byte(index: usize) -> Outcome<u8> {
    let (_, keys) = table3_inputs();
    keys.get(index)
        .copied()
        .ok_or_else(|| usage(format!("key byte index {index} outside 0..16")))
}

fn cmd_synth(cfg: &ExperimentConfig, out: &Output, a: &crate::SynthArgs) -> Outcome<Vec<PathBuf>> {
    let (lib, set) = load_power(cfg)?;
    let tech = parse_tech(&a.tech)?;
    let style = parse_style(&a.style)?;
    let k = key_byte(a.key_byte)?;
    let lc = leakage_config(cfg, tech, style, &lib, &set, derived_seed(cfg.seed, a.key_byte as u64))?;
    let ts = synth_traceset(&plaintexts(cfg, a.key_byte)?, k, &lc)?;
    let stem = format!("traces_{tech}_{style}_k{}", a.key_byte);
    let mut written = vec![out.write_csv(&format!("{stem}.csv"), &ts.to_csv())?];
    if a.binary {
        written.push(out.write_bytes(&format!("{stem}.bin"), &ts.to_binary())?);
    }
    Ok(written)
}

fn cmd_cpa(cfg: &ExperimentConfig, out: &Output) -> Outcome<Vec<PathBuf>> {
    let (lib, set) = load_power(cfg)?;
    let techs = cfg.cpa.tech.iter().map(|s| parse_tech(s)).collect::<Outcome<Vec<_>>>()?;
    let styles = cfg.cpa.style.iter().map(|s| parse_style(s)).collect::<Outcome<Vec<_>>>()?;
    let dump = cfg.cpa.dump.as_str();
    if !matches!(dump, "none" | "first" | "all") {
        return Err(usage(format!("dump must be none, first or all, got `{dump}`")));
    }
    if techs.is_empty() || styles.is_empty() || cfg.cpa.key_bytes.is_empty() {
        return Err(usage("need at least one technology, style and key byte"));
    }
    let mut experiments = Vec::new();
    let mut written = Vec::new();
    for &tech in &techs {
        for &style in &styles {
            for (n, &kb) in cfg.cpa.key_bytes.iter().enumerate() {
                let k = key_byte(kb)?;
                // Both styles of one technology see the same noise draws.
                let stream = (tech as u64) << 32 | kb as u64;
                let lc = leakage_config(cfg, tech, style, &lib, &set, derived_seed(cfg.seed, stream))?;
                let ts = synth_traceset(&plaintexts(cfg, kb)?, k, &lc)?;
                let e = Experiment::run(&ts, kb)?;
                if dump == "all" || (dump == "first" && n == 0) {
                    written.push(out.write_csv(
                        &format!("cpa_corr_{tech}_{style}_k{kb}.csv"),
                        &e.correlations.to_csv(),
                    )?);
                }
                experiments.push(e);
            }
        }
    }
    let report = AttackReport::new(experiments);
    written.insert(0, out.write_csv("cpa_summary.csv", &report.summary_csv())?);
    written.insert(0, out.write_csv("cpa_report.csv", &report.to_csv())?);
    Ok(written)
}

fn parse_condition(s: &str) -> Outcome<Trigger> {
    let (counter, threshold) = s
        .split_once(':')
        .ok_or_else(|| usage(format!("condition `{s}` must be counter:threshold")))?;
    let counter: EventCounter = counter.trim().parse()?;
    let threshold: u64 = threshold
        .trim()
        .parse()
        .map_err(|_| usage(format!("bad condition threshold `{threshold}`")))?;
    Ok(Trigger::Condition { counter, threshold })
}

fn cmd_trojan(cfg: &ExperimentConfig, out: &Output) -> Outcome<Vec<PathBuf>> {
    let t = &cfg.trojan;
    t.pipeline.validate()?;
    let kinds = t
        .kinds
        .iter()
        .map(|k| k.parse::<TrojanKind>().map_err(Failure::from))
        .collect::<Outcome<Vec<_>>>()?;
    let triggers: Vec<Trigger> = match &t.condition {
        Some(c) => vec![parse_condition(c)?],
        None => t.periods.iter().map(|&period| Trigger::ClockCounter { period }).collect(),
    };
    if triggers.iter().any(|tr| matches!(tr, Trigger::ClockCounter { period: 0 })) {
        return Err(usage("periods must be >= 1"));
    }

    let traces: Vec<(String, Vec<InstructionRecord>)> = match &t.trace {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| data_err(anyhow!("trace {}: {e}", path.display())))?;
            let trace = parse_trace_csv(&text)
                .map_err(|e| data_err(anyhow!("trace {}: {e}", path.display())))?;
            if trace.is_empty() {
                return Err(data_err(anyhow!("trace {} has no instructions", path.display())));
            }
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
            vec![(name.unwrap_or_else(|| "trace".into()), trace)]
        }
        None => (0..t.traces)
            .map(|i| {
                let params = t.generator.params(derived_seed(cfg.seed, i as u64));
                Ok((
                    format!("synthetic-{i}"),
                    tfetsec_core::trojan::generate_trace(&params)?,
                ))
            })
            .collect::<Outcome<Vec<_>>>()?,
    };

    let mut rows = Vec::new();
    for (name, trace) in &traces {
        let healthy = run(trace, &t.pipeline, None)?;
        rows.push(ResultRow::new(name.clone(), None, &healthy, healthy)?);
        for &kind in &kinds {
            for &trigger in &triggers {
                let spec = TrojanSpec { kind, trigger };
                let infected = run(trace, &t.pipeline, Some(&spec))?;
                rows.push(ResultRow::new(name.clone(), Some(spec), &healthy, infected)?);
            }
        }
    }

    let (lib, set) = load_power(cfg)?;
    let fp = footprint_table(&lib, &set, t.activity).map_err(data_err)?;
    Ok(vec![
        out.write_csv("trojan_results.csv", &results_csv(&rows))?,
        out.write_csv("trojan_footprint.csv", &footprint_csv(&fp))?,
    ])
}

fn cmd_report(cfg: &ExperimentConfig, out: &Output) -> Outcome<Vec<PathBuf>> {
    let refs = ReferenceData::bundled();
    let mut rows = refs.sbox_rows();
    rows.extend(refs.table1_rows());
    rows.extend(refs.table2_rows());
    rows.extend(refs.table4_rows());
    let mut reference = String::from("module,tech,style,metric,value,note\n");
    for r in &rows {
        let _ = writeln!(
            reference,
            "{},{},{},{},{},{}",
            r.module,
            r.tech,
            r.style,
            r.metric,
            r.value,
            r.note.unwrap_or("")
        );
    }
    let mut ipc = String::from("trojan,benchmark,ipc_degradation_pct\n");
    for row in &refs.table4 {
        for (bench, v) in row.ipc_degradation() {
            let _ = writeln!(ipc, "{},{bench},{v}", row.trojan);
        }
    }
    let (lib, set) = load_power(cfg)?;
    let computed = reproduce_reference_table(&lib, &set, cfg.estimate.activity).map_err(data_err)?;
    let devs = compare_reference(&computed, &lib, cfg.estimate.tolerance).map_err(data_err)?;
    let fp = footprint_table(&lib, &set, cfg.trojan.activity).map_err(data_err)?;
    Ok(vec![
        out.write_csv("reference.csv", &reference)?,
        out.write_csv("reference_ipc.csv", &ipc)?,
        out.write_csv("calibration.csv", &deviation_csv(&devs))?,
        out.write_csv("footprint.csv", &footprint_csv(&fp))?,
    ])
}
