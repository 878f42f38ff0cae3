//! Regenerates `data/library.toml` and `data/inventories.toml`.
//!
//! Every module inventory is filled to roughly half of its target area with
//! generic cells; a per-module characterization cell (`CAL_*`) absorbs the
//! remaining area and power so the bundled reference figures are met.
//!
//! Run with `cargo run -p tfetsec-core --example calibrate`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use tfetsec_core::power::{CellSpec, FootprintPair, InventorySet, ModuleInventory, TechLibrary};
use tfetsec_core::{LogicStyle, PerTech, Technology};

const FILL: f64 = 0.5;
const RIPPLE: f64 = 2e-5;

/// (name, CMOS area nm², TFET area nm²)
const GENERIC: [(&str, f64, f64); 7] = [
    ("INV_X1", 4480.0, 3270.0),
    ("NAND2_X1", 6720.0, 4905.0),
    ("NOR2_X1", 6720.0, 4905.0),
    ("AOI21_X1", 8960.0, 6540.0),
    ("XOR2_X1", 11200.0, 8175.0),
    ("MUX2_X1", 13440.0, 9810.0),
    ("DFF_X1", 22400.0, 16350.0),
];

const LOGIC_MIX: &[(&str, f64)] = &[
    ("INV_X1", 0.20),
    ("NAND2_X1", 0.30),
    ("NOR2_X1", 0.15),
    ("AOI21_X1", 0.10),
    ("XOR2_X1", 0.20),
    ("MUX2_X1", 0.05),
];
const LFSR_MIX: &[(&str, f64)] = &[
    ("DFF_X1", 0.45),
    ("XOR2_X1", 0.25),
    ("NAND2_X1", 0.20),
    ("INV_X1", 0.10),
];
const LATCH_MIX: &[(&str, f64)] = &[
    ("DFF_X1", 0.50),
    ("MUX2_X1", 0.20),
    ("NAND2_X1", 0.20),
    ("INV_X1", 0.10),
];

const PIPELINE_LATCHES: [&str; 9] = [
    "Fetch1Fetch2",
    "Fetch2Decode",
    "InstBufRename",
    "RenameDispatch",
    "IssueqRegRead",
    "RegReadExecute",
    "AgenLsu",
    "ActiveList",
    "ArchMapTable",
];

struct Target {
    name: String,
    style: LogicStyle,
    area: PerTech,
    power: PerTech,
}

fn generic_cell(area_cmos: f64, area_tfet: f64) -> CellSpec {
    let s = area_cmos / 4480.0;
    CellSpec {
        name: String::new(),
        area: PerTech::new(area_cmos, area_tfet),
        leak_power: PerTech::new(1e-5 * s, 2e-6 * s),
        switch_energy: PerTech::new(1e-4 * s, 2e-5 * s),
        cml_bias_power: PerTech::new(0.5 * s, 0.03 * s),
        cml_ripple_coeff: RIPPLE,
    }
}

fn zero_cell() -> CellSpec {
    CellSpec {
        name: String::new(),
        area: PerTech::default(),
        leak_power: PerTech::default(),
        switch_energy: PerTech::default(),
        cml_bias_power: PerTech::default(),
        cml_ripple_coeff: RIPPLE,
    }
}

fn mix_for(name: &str) -> &'static [(&'static str, f64)] {
    if name == "katan" {
        LFSR_MIX
    } else if PIPELINE_LATCHES.contains(&name) {
        LATCH_MIX
    } else {
        LOGIC_MIX
    }
}

fn fill_counts(name: &str, area_budget_cmos: f64, cells: &BTreeMap<String, CellSpec>) -> BTreeMap<String, u64> {
    let mix = mix_for(name);
    let mean_area: f64 = mix.iter().map(|(c, w)| w * cells[*c].area.cmos).sum();
    let n = FILL * area_budget_cmos / mean_area;
    mix.iter()
        .map(|(c, w)| (c.to_string(), (n * w).floor() as u64))
        .filter(|(_, k)| *k > 0)
        .collect()
}

fn sum(counts: &BTreeMap<String, u64>, cells: &BTreeMap<String, CellSpec>, f: impl Fn(&CellSpec) -> f64) -> f64 {
    counts.iter().map(|(c, &k)| k as f64 * f(&cells[c])).sum()
}

fn residual(what: &str, target: f64, have: f64) -> f64 {
    let r = target - have;
    assert!(r > 0.0, "{what}: generic cells exceed target ({have} > {target})");
    r
}

fn main() {
    let refs = tfetsec_core::power::ReferenceData::bundled();
    let mut cells: BTreeMap<String, CellSpec> = GENERIC
        .iter()
        .map(|&(n, a, t)| (n.to_string(), generic_cell(a, t)))
        .collect();

    // module-level targets
    let mut targets: Vec<Target> = Vec::new();
    let mut absolute: BTreeMap<(String, LogicStyle), (PerTech, PerTech)> = BTreeMap::new();
    for style in LogicStyle::ALL {
        let mut area = PerTech::default();
        let mut power = PerTech::default();
        for tech in Technology::ALL {
            let (a, p) = refs.sbox_absolute(tech, style);
            *area.get_mut(tech) = a;
            *power.get_mut(tech) = p;
        }
        absolute.insert(("sbox".into(), style), (area, power));
    }
    for row in &refs.table1 {
        for style in LogicStyle::ALL {
            let (den_area, den_power) = absolute[&(row.denominator.clone(), style)];
            let mut area = PerTech::default();
            let mut power = PerTech::default();
            for tech in Technology::ALL {
                *area.get_mut(tech) = den_area.get(tech) * row.area(tech, style);
                *power.get_mut(tech) = den_power.get(tech) * row.power(tech, style);
            }
            absolute.insert((row.numerator.clone(), style), (area, power));
        }
    }
    for ((name, style), (area, power)) in &absolute {
        targets.push(Target { name: name.clone(), style: *style, area: *area, power: *power });
    }
    for row in &refs.table2 {
        targets.push(Target {
            name: row.module.clone(),
            style: LogicStyle::Sl,
            area: PerTech::new(row.cmos_area_um2 * 1e6, row.tfet_area_um2 * 1e6),
            power: PerTech::new(row.cmos_power_uw * 1e6, row.tfet_power_uw * 1e6),
        });
    }

    let (sbox_sl_area, _) = absolute[&("sbox".to_string(), LogicStyle::Sl)];
    let (sbox_cml_area, _) = absolute[&("sbox".to_string(), LogicStyle::Cml)];
    let cml_area_factor = PerTech::new(
        sbox_cml_area.cmos / sbox_sl_area.cmos,
        sbox_cml_area.tfet / sbox_sl_area.tfet,
    );

    let mut inventories: Vec<ModuleInventory> = Vec::new();
    // SL first so the S-Box CML inventory can reuse the S-Box SL netlist
    targets.sort_by_key(|t| (t.style, t.name.clone()));
    for t in &targets {
        if t.name == "sbox" && t.style == LogicStyle::Cml {
            let sl = inventories
                .iter()
                .find(|i| i.module_name == "sbox" && i.style == LogicStyle::Sl)
                .expect("sbox SL calibrated first")
                .clone();
            let cal = format!("CAL_sbox_{}", LogicStyle::Sl);
            let others: BTreeMap<_, _> = sl.counts.iter().filter(|(c, _)| **c != cal).map(|(c, k)| (c.clone(), *k)).collect();
            let mut bias = PerTech::default();
            for tech in Technology::ALL {
                let have = sum(&others, &cells, |c| c.cml_bias_power.get(tech));
                *bias.get_mut(tech) = residual(&format!("sbox cml bias {tech}"), t.power.get(tech), have);
            }
            cells.get_mut(&cal).unwrap().cml_bias_power = bias;
            inventories.push(ModuleInventory { style: LogicStyle::Cml, ..sl });
            continue;
        }

        let factor = match t.style {
            LogicStyle::Sl => PerTech::new(1.0, 1.0),
            LogicStyle::Cml => cml_area_factor,
        };
        let counts = fill_counts(&t.name, t.area.cmos / factor.cmos, &cells);
        let cal_name = format!("CAL_{}_{}", t.name, t.style);
        let mut cal = zero_cell();
        for tech in Technology::ALL {
            let have_area = sum(&counts, &cells, |c| c.area.get(tech));
            *cal.area.get_mut(tech) = residual(
                &format!("{} {} area {tech}", t.name, t.style),
                t.area.get(tech) / factor.get(tech),
                have_area,
            );
            match t.style {
                LogicStyle::Sl => {
                    let have = sum(&counts, &cells, |c| c.leak_power.get(tech) + c.switch_energy.get(tech));
                    let r = residual(&format!("{} sl power {tech}", t.name), t.power.get(tech), have);
                    *cal.leak_power.get_mut(tech) = 0.2 * r;
                    *cal.switch_energy.get_mut(tech) = 0.8 * r;
                }
                LogicStyle::Cml => {
                    let have = sum(&counts, &cells, |c| c.cml_bias_power.get(tech));
                    *cal.cml_bias_power.get_mut(tech) =
                        residual(&format!("{} cml bias {tech}", t.name), t.power.get(tech), have);
                }
            }
        }
        cells.insert(cal_name.clone(), cal);
        let mut inv = ModuleInventory { module_name: t.name.clone(), style: t.style, counts };
        inv.counts.insert(cal_name, 1);
        inventories.push(inv);
    }

    // Trojans: host inventory plus trigger/payload cells plus a characterization cell.
    let trojans: [(&str, &str, &str, &[(&str, u64)]); 2] = [
        (
            "Malicious Branch Prediction",
            "FetchStage1",
            "bp_trojan",
            &[("DFF_X1", 8), ("XOR2_X1", 4), ("NAND2_X1", 4), ("INV_X1", 4)],
        ),
        ("Malicious Instruction Buffer", "InstructionBuffer", "ib_trojan", &[("NAND2_X1", 1)]),
    ];
    let mut footprints = Vec::new();
    for (trojan, host, tag, extra) in trojans {
        let row = refs.table4_row(trojan).expect("trojan in table 4");
        let host_inv = inventories
            .iter()
            .find(|i| i.module_name == host && i.style == LogicStyle::Sl)
            .unwrap()
            .clone();
        let extra: BTreeMap<String, u64> = extra.iter().map(|(c, k)| (c.to_string(), *k)).collect();
        let mut cal = zero_cell();
        for tech in Technology::ALL {
            let host_area = sum(&host_inv.counts, &cells, |c| c.area.get(tech));
            let host_power = sum(&host_inv.counts, &cells, |c| c.leak_power.get(tech) + c.switch_energy.get(tech));
            let want_area = host_area * row.area_change(tech) / 100.0;
            let want_power = host_power * row.power_change(tech) / 100.0;
            *cal.area.get_mut(tech) = residual(
                &format!("{tag} area {tech}"),
                want_area,
                sum(&extra, &cells, |c| c.area.get(tech)),
            );
            let r = residual(
                &format!("{tag} power {tech}"),
                want_power,
                sum(&extra, &cells, |c| c.leak_power.get(tech) + c.switch_energy.get(tech)),
            );
            *cal.leak_power.get_mut(tech) = 0.2 * r;
            *cal.switch_energy.get_mut(tech) = 0.8 * r;
        }
        let cal_name = format!("CAL_{tag}");
        cells.insert(cal_name.clone(), cal);
        let mut infected = host_inv.clone();
        infected.module_name = format!("{host}+{tag}");
        for (c, k) in extra {
            *infected.counts.entry(c).or_default() += k;
        }
        infected.counts.insert(cal_name, 1);
        footprints.push(FootprintPair {
            trojan: trojan.to_string(),
            host: host.to_string(),
            infected: infected.module_name.clone(),
        });
        inventories.push(infected);
    }

    let lib = TechLibrary::new("20nm CMOS PTM-MG / 20nm InAs TFET", cml_area_factor, cells);
    let set = InventorySet { inventories, footprints };
    set.validate(&lib).expect("calibrated inventories resolve");

    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let header = "# Generated by `cargo run -p tfetsec-core --example calibrate`. Do not edit by hand.\n";
    std::fs::write(data.join("library.toml"), format!("{header}{}", lib.to_toml_string())).unwrap();
    std::fs::write(data.join("inventories.toml"), format!("{header}{}", set.to_toml_string())).unwrap();
    println!(
        "wrote {} cells, {} inventories, {} footprints",
        lib.cells.len(),
        set.inventories.len(),
        set.footprints.len()
    );
}
