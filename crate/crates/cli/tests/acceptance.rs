//! Acceptance checks, one line per criterion.
//!
//! Each check returns `Ok(detail)` or `Err(reason)`; its wall time is
//! compared against the criterion's budget. The process exits nonzero if
//! any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tfetsec_core::ciphers::aes::{inv_sbox, num_rounds, sbox};
use tfetsec_core::ciphers::katan::{
    katan32_encrypt, katan_round, KatanKey, KatanKeySchedule, KatanState, KATAN32_ROUNDS,
};
use tfetsec_core::cpa::{cpa_attack, pearson, rank_keys};
use tfetsec_core::device::{iv_sweep, subthreshold_slope, DeviceParams};
use tfetsec_core::power::{
    compare_reference, estimate_area, estimate_avg_power, reproduce_reference_table,
    InventorySet, TechLibrary, DEFAULT_ACTIVITY,
};
use tfetsec_core::synth::{synth_traceset, table3_inputs, LeakageConfig};
use tfetsec_core::trojan::{
    footprint_table, generate_trace, ipc_degradation, run, run_traced, InstructionRecord,
    PipelineConfig, TraceGenParams, TrojanSpec,
};
use tfetsec_core::{LogicStyle, Technology};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn c1_pearson() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cases = 2000;
    for case in 0..cases {
        let n = rng.random_range(2..200);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1e3..1e3)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1e3..1e3)).collect();
        let r = pearson(&x, &y).map_err(|e| e.to_string())?;
        ensure((-1.0..=1.0).contains(&r), || format!("case {case}: r = {r}"))?;
        ensure(r == pearson(&y, &x).unwrap(), || format!("case {case}: asymmetric"))?;
        let a = rng.random_range(0.01..100.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let b = rng.random_range(-1e3..1e3);
        let xa: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let ra = pearson(&xa, &y).unwrap();
        ensure((ra - a.signum() * r).abs() <= 1e-12, || {
            format!("case {case}: affine {ra} vs {}", a.signum() * r)
        })?;
        let flat = vec![x[0]; n];
        ensure(pearson(&flat, &y).unwrap() == 0.0, || format!("case {case}: flat != 0"))?;
    }
    let hand = pearson(&[1., 2., 3., 4.], &[1., 3., 2., 4.]).unwrap();
    ensure((hand - 0.8).abs() <= 1e-12, || format!("hand value {hand}"))?;
    Ok(format!("{cases} random cases, hand value {hand}"))
}

fn c2_noiseless_recovery() -> Check {
    let (_, keys) = table3_inputs();
    let pts: Vec<u8> = (0..=255).collect();
    let mut worst: f64 = 0.0;
    for tech in Technology::ALL {
        let cfg = LeakageConfig {
            noise_sigma: 0.0,
            ..LeakageConfig::bundled(tech, LogicStyle::Sl)
        };
        for (i, &k) in keys.iter().enumerate() {
            let ts = synth_traceset(&pts, k, &cfg).map_err(|e| e.to_string())?;
            let r = rank_keys(&cpa_attack(&ts).map_err(|e| e.to_string())?, Some(k));
            ensure(r.recovered_key == k, || {
                format!("{tech} byte {i}: got {:02x}, want {k:02x}", r.recovered_key)
            })?;
            let peak = r.peaks[k as usize];
            ensure((peak - 1.0).abs() <= 1e-9, || format!("{tech} byte {i}: peak {peak}"))?;
            for g in 0..256 {
                ensure(g == k as usize || r.peaks[g] < peak, || {
                    format!("{tech} byte {i}: guess {g:02x} ties the key")
                })?;
            }
            worst = worst.max((peak - 1.0).abs());
        }
    }
    Ok(format!("32/32 bytes recovered, max |peak-1| = {worst:.1e}"))
}

fn c3_cml_hardening() -> Check {
    let (_, keys) = table3_inputs();
    let pts: Vec<u8> = (0..=255).collect();
    let seeds = 30u64;
    let mut detail = Vec::new();
    for tech in Technology::ALL {
        let sl0 = LeakageConfig::bundled(tech, LogicStyle::Sl);
        let cml0 = LeakageConfig::bundled(tech, LogicStyle::Cml);
        ensure(sl0.noise_sigma > 0.0 && cml0.noise_sigma == sl0.noise_sigma, || {
            "noise not matched".into()
        })?;
        ensure(cml0.ripple * cml0.bias_power < sl0.alpha, || {
            format!("{tech}: ripple*bias {} >= alpha {}", cml0.ripple * cml0.bias_power, sl0.alpha)
        })?;
        let (mut sl_sum, mut cml_sum) = (0.0, 0.0);
        for seed in 0..seeds {
            let k = keys[(seed % 16) as usize];
            for (cfg, sum) in [(&sl0, &mut sl_sum), (&cml0, &mut cml_sum)] {
                let cfg = LeakageConfig { seed, ..cfg.clone() };
                let ts = synth_traceset(&pts, k, &cfg).map_err(|e| e.to_string())?;
                *sum += rank_keys(&cpa_attack(&ts).map_err(|e| e.to_string())?, Some(k)).margin;
            }
        }
        let (sl, cml) = (sl_sum / seeds as f64, cml_sum / seeds as f64);
        ensure(cml < sl, || format!("{tech}: CML margin {cml} >= SL margin {sl}"))?;
        detail.push(format!("{tech} SL {sl:.4} > CML {cml:.4}"));
    }
    Ok(format!("mean margins over {seeds} seeds: {}", detail.join(", ")))
}

fn c4_calibration() -> Check {
    let lib = TechLibrary::bundled();
    let set = InventorySet::bundled();
    let published = [
        (Technology::Cmos, LogicStyle::Sl, 4_484_160.0, 0.2385),
        (Technology::Tfet, LogicStyle::Sl, 3_271_600.0, 0.046371),
        (Technology::Cmos, LogicStyle::Cml, 7_470_144.0, 789.78),
        (Technology::Tfet, LogicStyle::Cml, 5_391_880.0, 47.976),
    ];
    for (tech, style, area, power) in published {
        let inv = set.get("sbox", style).map_err(|e| e.to_string())?;
        let a = estimate_area(inv, &lib, tech).unwrap();
        let p = estimate_avg_power(inv, &lib, tech, DEFAULT_ACTIVITY).unwrap();
        ensure(rel(a, area) <= 1e-6 && rel(p, power) <= 1e-6, || {
            format!("sbox {tech} {style}: {a} / {p}")
        })?;
    }
    let computed =
        reproduce_reference_table(&lib, &set, DEFAULT_ACTIVITY).map_err(|e| e.to_string())?;
    let devs = compare_reference(&computed, &lib, 1e-6).map_err(|e| e.to_string())?;
    let worst = devs.iter().map(|d| d.rel_dev.abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-6, || format!("max relative deviation {worst:e}"))?;
    for inv in &set.inventories {
        for (what, cmos, tfet) in [
            (
                "area",
                estimate_area(inv, &lib, Technology::Cmos).unwrap(),
                estimate_area(inv, &lib, Technology::Tfet).unwrap(),
            ),
            (
                "power",
                estimate_avg_power(inv, &lib, Technology::Cmos, DEFAULT_ACTIVITY).unwrap(),
                estimate_avg_power(inv, &lib, Technology::Tfet, DEFAULT_ACTIVITY).unwrap(),
            ),
        ] {
            ensure(tfet <= cmos, || format!("{} {what}: TFET {tfet} > CMOS {cmos}", inv.module_name))?;
        }
    }
    Ok(format!(
        "{} reference values, max rel dev {worst:.1e}; TFET <= CMOS for {} inventories",
        devs.len(),
        set.inventories.len()
    ))
}

fn c5_device() -> Check {
    let tfet = DeviceParams::tfet_default();
    let mos = DeviceParams::mosfet_default();
    let ss_t = subthreshold_slope(&tfet, 0.0, tfet.v_on() / 2.0).map_err(|e| e.to_string())?;
    let ss_m = subthreshold_slope(&mos, 0.0, mos.v_on() / 2.0).map_err(|e| e.to_string())?;
    ensure(ss_t < 60.0, || format!("TFET slope {ss_t}"))?;
    ensure(ss_m >= 59.6, || format!("MOSFET slope {ss_m}"))?;
    let reach = |p: &DeviceParams| {
        iv_sweep(p, 3001)
            .ok()
            .and_then(|c| c.first_v_reaching(0.5 * p.i_on))
    };
    let (vt, vm) = (reach(&tfet), reach(&mos));
    let (vt, vm) = vt.zip(vm).ok_or("0.5 i_on never reached")?;
    ensure(vt < vm, || format!("TFET reaches 0.5 i_on at {vt} V, MOSFET at {vm} V"))?;
    Ok(format!(
        "SS TFET {ss_t:.2}, MOSFET {ss_m:.2} mV/dec; 0.5 i_on at {vt:.4} V vs {vm:.4} V"
    ))
}

fn c6_ciphers() -> Check {
    let mut seen = [false; 256];
    for x in 0..=255u8 {
        let y = sbox(x);
        ensure(!seen[y as usize], || format!("sbox collision at {x:#04x}"))?;
        seen[y as usize] = true;
        ensure(inv_sbox(y) == x, || format!("inv_sbox(sbox({x:#04x})) != x"))?;
    }
    for (bits, want) in [(128, 10), (192, 12), (256, 14)] {
        ensure(num_rounds(bits).ok() == Some(want), || format!("num_rounds({bits})"))?;
    }
    let vectors = std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/katan32_vectors.csv"),
    )
    .map_err(|e| e.to_string())?;
    let mut n_vec = 0;
    for line in vectors.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let pt = u32::from_str_radix(f[0], 16).unwrap();
        let key = KatanKey::new(u128::from_str_radix(f[1], 16).unwrap()).unwrap();
        let ct = u32::from_str_radix(f[2], 16).unwrap();
        let got = katan32_encrypt(pt, &key);
        ensure(got == ct, || format!("KATAN {pt:08x}: {got:08x} != {ct:08x}"))?;
        n_vec += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        let pt: u32 = rng.random();
        let key = KatanKey::new(rng.random::<u128>() >> 48).unwrap();
        let mut s = KatanState::load(pt);
        let mut rounds = 0u16;
        for (ka, kb) in KatanKeySchedule::new(&key) {
            s = katan_round(s, ka, kb).map_err(|e| e.to_string())?;
            rounds += 1;
        }
        ensure(rounds == KATAN32_ROUNDS && katan_round(s, 0, 0).is_err(), || {
            format!("{rounds} rounds")
        })?;
        ensure(s.unload() == katan32_encrypt(pt, &key), || {
            format!("composition mismatch for {pt:08x}")
        })?;
    }
    Ok(format!("S-Box bijective, {n_vec} KATAN vectors, 1000 compositional checks"))
}

fn c7_trojan() -> Check {
    let cfg = PipelineConfig::default();
    let mut failures = Vec::new();

    // (a)
    for n in [1usize, 10, 1000, 12345] {
        let trace: Vec<_> = (0..n as u64).map(InstructionRecord::alu).collect();
        let s = run(&trace, &cfg, None).unwrap();
        if s.cycles != n as u64 + 9 {
            failures.push(format!("(a) N={n}: {} cycles", s.cycles));
        }
    }

    let seeds: Vec<u64> = (0..24).collect();
    let periods = [128u64, 64, 32, 16, 8, 4, 2, 1];
    let mut non_monotone = Vec::new();
    let mut mispred_non_monotone = 0;
    for &seed in &seeds {
        let trace = generate_trace(&TraceGenParams::branch_heavy(5000, seed)).unwrap();
        let (healthy, h_order) = run_traced(&trace, &cfg, None).unwrap();

        // (b) and (d)
        for p in [1u64, 3, 7, 50] {
            let spec = TrojanSpec::buffer_stall(p);
            let (s, order) = run_traced(&trace, &cfg, Some(&spec)).unwrap();
            if s.cycles != healthy.cycles + cfg.refetch_penalty * s.trojan_activations {
                failures.push(format!("(b) seed {seed} period {p}"));
            }
            if order != h_order {
                failures.push(format!("(d) bufferstall seed {seed}"));
            }
        }

        // (c) and (d)
        let mut prev = 0.0;
        let mut prev_mis = 0;
        let mut mis_ok = true;
        let mut curve = Vec::new();
        for &p in &periods {
            let (s, order) = run_traced(&trace, &cfg, Some(&TrojanSpec::branch_flip(p))).unwrap();
            if order != h_order {
                failures.push(format!("(d) branchflip seed {seed}"));
            }
            let d = ipc_degradation(&healthy, &s).unwrap();
            if d <= 0.0 {
                failures.push(format!("(c) seed {seed} period {p}: degradation {d}"));
            }
            curve.push(d);
            mis_ok &= s.mispredictions >= prev_mis;
            prev_mis = s.mispredictions;
            if d < prev && !non_monotone.contains(&seed) {
                non_monotone.push(seed);
            }
            prev = d;
        }
        if !mis_ok {
            mispred_non_monotone += 1;
        }
        if seed == 0 {
            eprintln!(
                "    seed 0 BranchFlip degradation % by period {:?}: {:?}",
                periods,
                curve.iter().map(|d| (d * 100.0).round() / 100.0).collect::<Vec<_>>()
            );
        }
    }
    if !non_monotone.is_empty() {
        failures.push(format!(
            "(c) degradation decreases as the period halves on {}/{n} seeds, mispredictions on {mispred_non_monotone}/{n}",
            non_monotone.len(),
            n = seeds.len()
        ));
    }

    // (e)
    let lib = TechLibrary::bundled();
    let set = InventorySet::bundled();
    let published = [
        ("Malicious Branch Prediction", [1.34, 1.30], [20.91, 14.44]),
        ("Malicious Instruction Buffer", [1.84, 1.82], [17.02, 36.92]),
    ];
    let rows = footprint_table(&lib, &set, DEFAULT_ACTIVITY).map_err(|e| e.to_string())?;
    for (name, area, power) in published {
        match rows.iter().find(|r| r.trojan == name) {
            None => failures.push(format!("(e) {name} missing")),
            Some(r) => {
                let got = [r.area_change.cmos, r.area_change.tfet, r.power_change.cmos, r.power_change.tfet];
                let want = [area[0], area[1], power[0], power[1]];
                if got.iter().zip(want).any(|(g, w)| rel(*g, w) > 1e-6) {
                    failures.push(format!("(e) {name}: {got:?}"));
                }
                if r.area_change.tfet > r.area_change.cmos {
                    failures.push(format!("(e) {name}: TFET area delta above CMOS"));
                }
            }
        }
    }

    if failures.is_empty() {
        Ok(format!("(a)-(e) hold over {} seeds", seeds.len()))
    } else {
        Err(failures.join("; "))
    }
}

fn c8_determinism() -> Check {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [&[&str]; 2] = [
        &["cpa", "--samples", "500", "--key-bytes", "0,7,15"],
        &["trojan", "--traces", "2", "--instructions", "5000"],
    ];
    let mut compared = 0;
    for (i, args) in runs.iter().enumerate() {
        let mut dirs = Vec::new();
        for rep in 0..2 {
            let dir = root.path().join(format!("{i}-{rep}"));
            let out = Command::new(env!("CARGO_BIN_EXE_tfetsec"))
                .args(["--seed", "1234", "--out"])
                .arg(&dir)
                .args(*args)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(out.status.success(), || {
                format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr))
            })?;
            dirs.push(dir);
        }
        let mut names: Vec<_> = std::fs::read_dir(&dirs[0])
            .map_err(|e| e.to_string())?
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        ensure(!names.is_empty(), || "no output files".into())?;
        for name in names {
            let a = std::fs::read(dirs[0].join(&name)).map_err(|e| e.to_string())?;
            let b = std::fs::read(dirs[1].join(&name))
                .map_err(|e| format!("{name:?} missing on rerun: {e}"))?;
            ensure(a == b, || format!("{name:?} differs between runs"))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} output files byte-identical across reruns"))
}

fn main() {
    // libtest flags such as --nocapture or filters are accepted and ignored
    let criteria: [(u32, &str, Duration, fn() -> Check); 8] = [
        (1, "pearson properties", Duration::from_secs(1), c1_pearson),
        (2, "noiseless key recovery", Duration::from_secs(10), c2_noiseless_recovery),
        (3, "CML hardening direction", Duration::from_secs(60), c3_cml_hardening),
        (4, "calibration fidelity", Duration::from_secs(1), c4_calibration),
        (5, "device contrast", Duration::from_secs(1), c5_device),
        (6, "ciphers", Duration::from_secs(5), c6_ciphers),
        (7, "trojan bench", Duration::from_secs(30), c7_trojan),
        (8, "end-to-end determinism", Duration::from_secs(10), c8_determinism),
    ];
    let mut failed = 0;
    for (n, name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (status, detail) = match result {
            Ok(d) if elapsed <= budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; took {elapsed:.2?}, budget {budget:?}")),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {n} [{status}] {name} ({elapsed:.2?}): {detail}");
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
