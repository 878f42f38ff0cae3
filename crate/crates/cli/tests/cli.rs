use std::path::Path;
use std::process::{Command, Output};

fn tfetsec(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfetsec"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

/// Data lines after the provenance comment and header.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn iv_sweep_points() {
    let d = tempfile::tempdir().unwrap();
    let o = tfetsec(d.path(), &["iv-sweep", "--tech", "tfet", "--points", "101"]);
    assert!(o.status.success());
    assert_eq!(rows(&read(&d.path().join("iv_tfet.csv"))).len(), 101);
    let o = tfetsec(d.path(), &["iv-sweep", "--tech", "mosfet"]);
    assert!(o.status.success());
    assert_eq!(rows(&read(&d.path().join("iv_mosfet.csv"))).len(), 101);
}

#[test]
fn usage_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let o = tfetsec(d.path(), &["iv-sweep", "--tech", "bjt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--help"));
    assert_eq!(tfetsec(d.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(tfetsec(d.path(), &["iv-sweep", "--points", "x"]).status.code(), Some(2));
    assert_eq!(tfetsec(d.path(), &["iv-sweep", "--points", "1"]).status.code(), Some(2));
    assert_eq!(tfetsec(d.path(), &["cpa", "--style", "domino"]).status.code(), Some(2));
    assert_eq!(tfetsec(d.path(), &["trojan", "--periods", "0"]).status.code(), Some(2));
}

#[test]
fn config_file_rules() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.toml");
    std::fs::write(&cfg, "[cpa]\ntraces = 8\nunknown = 1\n").unwrap();
    let o = tfetsec(d.path(), &["--config", cfg.to_str().unwrap(), "report"]);
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(&cfg, "seed = 11\n[iv_sweep]\ntech = \"mosfet\"\npoints = 7\n").unwrap();
    let o = tfetsec(d.path(), &["--config", cfg.to_str().unwrap(), "iv-sweep"]);
    assert!(o.status.success());
    let text = read(&d.path().join("iv_mosfet.csv"));
    assert!(text.starts_with("# tfetsec "));
    assert!(text.lines().next().unwrap().contains("seed=11"));
    assert_eq!(rows(&text).len(), 7);

    // flags override the file
    let o = tfetsec(d.path(), &["--config", cfg.to_str().unwrap(), "iv-sweep", "--points", "9"]);
    assert!(o.status.success());
    assert_eq!(rows(&read(&d.path().join("iv_mosfet.csv"))).len(), 9);
}

#[test]
fn estimate_reproduces_references() {
    let d = tempfile::tempdir().unwrap();
    assert!(tfetsec(d.path(), &["estimate"]).status.success());
    let r = rows(&read(&d.path().join("estimate.csv")));
    let sbox = r
        .iter()
        .find(|c| c[0] == "sbox" && c[1] == "tfet" && c[2] == "sl" && c[3] == "area_nm2")
        .unwrap();
    assert!(sbox[4].starts_with("3271600"));
    assert!(r.iter().all(|c| c[7] == "false"));
}

#[test]
fn broken_inputs_exit_3() {
    let d = tempfile::tempdir().unwrap();
    let lib = d.path().join("lib.toml");
    std::fs::write(&lib, "name = \"x\"\n[cells.INV\n").unwrap();
    let o = tfetsec(d.path(), &["estimate", "--library", lib.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lib.toml"));

    let o = tfetsec(d.path(), &["estimate", "--inventories", "/nonexistent/inv.toml"]);
    assert_eq!(o.status.code(), Some(3));

    let trace = d.path().join("t.csv");
    std::fs::write(&trace, "pc,kind,taken,target\n0x0,teleport,,\n").unwrap();
    let o = tfetsec(d.path(), &["trojan", "--trace", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn noiseless_table3_cpa() {
    let d = tempfile::tempdir().unwrap();
    let o = tfetsec(d.path(), &["cpa", "--table3", "--noise", "0", "--style", "sl", "--samples", "100"]);
    assert!(o.status.success());
    let r = rows(&read(&d.path().join("cpa_report.csv")));
    assert_eq!(r.len(), 32);
    for c in &r {
        assert_eq!(c[8], "true");
        assert!((c[5].parse::<f64>().unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn flat_cml_dump_is_zero() {
    let d = tempfile::tempdir().unwrap();
    let o = tfetsec(
        d.path(),
        &["cpa", "--style", "cml", "--ripple", "0", "--noise", "0", "--samples", "40"],
    );
    assert!(o.status.success());
    for tech in ["cmos", "tfet"] {
        let dump = read(&d.path().join(format!("cpa_corr_{tech}_cml_k0.csv")));
        let r = rows(&dump);
        assert_eq!(r.len(), 256);
        assert!(r.iter().all(|c| c[1..].iter().all(|v| v.parse::<f64>().unwrap() == 0.0)));
    }
}

#[test]
fn seeds_control_output() {
    let d = tempfile::tempdir().unwrap();
    let args = ["cpa", "--samples", "64", "--key-bytes", "0,5", "--tech", "tfet"];
    let run = |seed: &str, sub: &str| {
        let dir = d.path().join(sub);
        let mut a = vec!["--seed", seed];
        a.extend(args);
        assert!(tfetsec(&dir, &a).status.success());
        read(&dir.join("cpa_corr_tfet_sl_k0.csv"))
    };
    let (a, b, c) = (run("4", "a"), run("4", "b"), run("5", "c"));
    assert!(a == b, "same seed must give identical files");
    assert!(a != c, "different seeds must differ");
}

#[test]
fn trojan_outputs() {
    let d = tempfile::tempdir().unwrap();
    let o = tfetsec(
        d.path(),
        &["trojan", "--kind", "branchflip", "--periods", "1", "--instructions", "3000"],
    );
    assert!(o.status.success());
    let r = rows(&read(&d.path().join("trojan_results.csv")));
    assert_eq!(r[0][1], "none");
    assert_eq!(r[0][8].parse::<f64>().unwrap(), 0.0);
    assert_eq!(r[1][1], "branchflip");
    assert!(r[1][8].parse::<f64>().unwrap() > 0.0);

    let fp = rows(&read(&d.path().join("trojan_footprint.csv")));
    assert_eq!(fp.len(), 2);
    for c in &fp {
        for i in 1..5 {
            let (got, want): (f64, f64) = (c[i].parse().unwrap(), c[i + 4].parse().unwrap());
            assert!(((got - want) / want).abs() < 1e-6);
        }
    }
}

#[test]
fn trojan_from_trace_file_and_condition() {
    let d = tempfile::tempdir().unwrap();
    let trace = d.path().join("loop.csv");
    let mut text = String::from("# tiny loop\npc,kind,taken,target\n");
    for _ in 0..50 {
        text.push_str("0x0,load,,\n0x1,alu,,\n0x2,branch,1,0x0\n");
    }
    std::fs::write(&trace, text).unwrap();
    let o = tfetsec(
        d.path(),
        &[
            "trojan",
            "--trace",
            trace.to_str().unwrap(),
            "--kind",
            "bufferstall",
            "--condition",
            "loads:10",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&read(&d.path().join("trojan_results.csv")));
    assert_eq!(r[0][0], "loop");
    assert_eq!(r[1][2], "cond:10");
    assert_eq!(r[1][7], "5");
}

#[test]
fn report_and_synth() {
    let d = tempfile::tempdir().unwrap();
    assert!(tfetsec(d.path(), &["report"]).status.success());
    let refs = read(&d.path().join("reference.csv"));
    assert!(refs.contains("sbox,cmos,cml,power_pw,789.78"));
    let ipc = read(&d.path().join("reference_ipc.csv"));
    assert!(ipc.contains("Malicious Branch Prediction,mcf,57.76"));

    let o = tfetsec(
        d.path(),
        &["synth", "--tech", "cmos", "--style", "sl", "--samples", "20", "--binary"],
    );
    assert!(o.status.success());
    let csv = read(&d.path().join("traces_cmos_sl_k0.csv"));
    assert_eq!(rows(&csv).len(), 256);
    assert!(d.path().join("traces_cmos_sl_k0.bin").exists());
}

#[test]
fn every_csv_has_provenance_header() {
    let d = tempfile::tempdir().unwrap();
    for args in [&["report"][..], &["estimate"], &["iv-sweep"], &["trojan", "--instructions", "500"]] {
        assert!(tfetsec(d.path(), args).status.success());
    }
    for entry in std::fs::read_dir(d.path()).unwrap() {
        let p = entry.unwrap().path();
        let first = read(&p).lines().next().unwrap().to_string();
        assert!(first.starts_with("# tfetsec 0.1.0 seed=0 config="), "{}", p.display());
    }
}
