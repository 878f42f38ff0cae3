//! Bundled published figures, stored verbatim as CSV.

use serde::Deserialize;

use super::estimate::Metric;
use crate::{LogicStyle, Result, Technology};

const SBOX_ABSOLUTES: &str = include_str!("../../data/sbox_absolutes.csv");
const TABLE1: &str = include_str!("../../data/table1.csv");
const TABLE2: &str = include_str!("../../data/table2.csv");
const TABLE4: &str = include_str!("../../data/table4.csv");

#[derive(Debug, Clone, Deserialize)]
struct SboxAbsoluteRecord {
    tech: Technology,
    style: LogicStyle,
    area_nm2: f64,
    power_pw: f64,
}

/// One row of the cryptographic-processor ratio table.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Table1Row {
    pub row: u32,
    pub numerator: String,
    pub denominator: String,
    pub cmos_sl_area: f64,
    pub cmos_sl_power: f64,
    pub cmos_cml_area: f64,
    pub cmos_cml_power: f64,
    pub tfet_sl_area: f64,
    pub tfet_sl_power: f64,
    pub tfet_cml_area: f64,
    pub tfet_cml_power: f64,
}

impl Table1Row {
    pub fn area(&self, tech: Technology, style: LogicStyle) -> f64 {
        match (tech, style) {
            (Technology::Cmos, LogicStyle::Sl) => self.cmos_sl_area,
            (Technology::Cmos, LogicStyle::Cml) => self.cmos_cml_area,
            (Technology::Tfet, LogicStyle::Sl) => self.tfet_sl_area,
            (Technology::Tfet, LogicStyle::Cml) => self.tfet_cml_area,
        }
    }

    pub fn power(&self, tech: Technology, style: LogicStyle) -> f64 {
        match (tech, style) {
            (Technology::Cmos, LogicStyle::Sl) => self.cmos_sl_power,
            (Technology::Cmos, LogicStyle::Cml) => self.cmos_cml_power,
            (Technology::Tfet, LogicStyle::Sl) => self.tfet_sl_power,
            (Technology::Tfet, LogicStyle::Cml) => self.tfet_cml_power,
        }
    }

    /// Label used for the module column of reports, e.g. `aes32/aes16`.
    pub fn label(&self) -> String {
        format!("{}/{}", self.numerator, self.denominator)
    }

    /// The first row's power cells are far off the area trend and their
    /// basis (ratio or absolute) cannot be confirmed.
    pub fn power_basis_unverified(&self) -> bool {
        self.row == 1
    }
}

/// One superscalar-core module (μm², μW).
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Table2Row {
    pub stage: String,
    pub module: String,
    pub cmos_area_um2: f64,
    pub cmos_power_uw: f64,
    pub tfet_area_um2: f64,
    pub tfet_power_uw: f64,
}

impl Table2Row {
    pub fn area_um2(&self, tech: Technology) -> f64 {
        match tech {
            Technology::Cmos => self.cmos_area_um2,
            Technology::Tfet => self.tfet_area_um2,
        }
    }

    pub fn power_uw(&self, tech: Technology) -> f64 {
        match tech {
            Technology::Cmos => self.cmos_power_uw,
            Technology::Tfet => self.tfet_power_uw,
        }
    }
}

/// Trojan footprint row: IPC degradation per benchmark and area/power change.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Table4Row {
    pub trojan: String,
    pub bzip: f64,
    pub gap: f64,
    pub gzip: f64,
    pub mcf: f64,
    pub parser: f64,
    pub vortex: f64,
    pub area_change_cmos: f64,
    pub area_change_tfet: f64,
    pub power_change_cmos: f64,
    pub power_change_tfet: f64,
}

impl Table4Row {
    pub const BENCHMARKS: [&'static str; 6] = ["bzip", "gap", "gzip", "mcf", "parser", "vortex"];

    pub fn ipc_degradation(&self) -> [(&'static str, f64); 6] {
        [
            ("bzip", self.bzip),
            ("gap", self.gap),
            ("gzip", self.gzip),
            ("mcf", self.mcf),
            ("parser", self.parser),
            ("vortex", self.vortex),
        ]
    }

    pub fn area_change(&self, tech: Technology) -> f64 {
        match tech {
            Technology::Cmos => self.area_change_cmos,
            Technology::Tfet => self.area_change_tfet,
        }
    }

    pub fn power_change(&self, tech: Technology) -> f64 {
        match tech {
            Technology::Cmos => self.power_change_cmos,
            Technology::Tfet => self.power_change_tfet,
        }
    }
}

/// A single reference value addressed the same way as a computed measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRow {
    pub module: String,
    pub tech: Technology,
    pub style: LogicStyle,
    pub metric: Metric,
    pub value: f64,
    pub note: Option<&'static str>,
}

/// Read-only view of the bundled reference tables.
#[derive(Debug, Clone)]
pub struct ReferenceData {
    sbox: Vec<SboxAbsoluteRecord>,
    pub table1: Vec<Table1Row>,
    pub table2: Vec<Table2Row>,
    pub table4: Vec<Table4Row>,
}

fn parse<T: for<'de> Deserialize<'de>>(raw: &str) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_reader(raw.as_bytes());
    Ok(rdr.deserialize().collect::<Result<Vec<T>, _>>()?)
}

impl ReferenceData {
    pub fn bundled() -> Self {
        Self {
            sbox: parse(SBOX_ABSOLUTES).expect("bundled S-Box absolutes parse"),
            table1: parse(TABLE1).expect("bundled table 1 parses"),
            table2: parse(TABLE2).expect("bundled table 2 parses"),
            table4: parse(TABLE4).expect("bundled table 4 parses"),
        }
    }

    /// Raw bundled file contents by file name.
    pub fn raw(name: &str) -> Option<&'static str> {
        match name {
            "sbox_absolutes.csv" => Some(SBOX_ABSOLUTES),
            "table1.csv" => Some(TABLE1),
            "table2.csv" => Some(TABLE2),
            "table4.csv" => Some(TABLE4),
            _ => None,
        }
    }

    pub const FILES: [&'static str; 4] = [
        "sbox_absolutes.csv",
        "table1.csv",
        "table2.csv",
        "table4.csv",
    ];

    /// S-Box absolute (nm², pW).
    pub fn sbox_absolute(&self, tech: Technology, style: LogicStyle) -> (f64, f64) {
        let r = self
            .sbox
            .iter()
            .find(|r| r.tech == tech && r.style == style)
            .expect("bundled S-Box table covers every technology and style");
        (r.area_nm2, r.power_pw)
    }

    pub fn sbox_rows(&self) -> Vec<ReferenceRow> {
        let mut out = Vec::new();
        for r in &self.sbox {
            for (metric, value) in [(Metric::AreaNm2, r.area_nm2), (Metric::PowerPw, r.power_pw)] {
                out.push(ReferenceRow {
                    module: "sbox".into(),
                    tech: r.tech,
                    style: r.style,
                    metric,
                    value,
                    note: None,
                });
            }
        }
        out
    }

    pub fn table1_rows(&self) -> Vec<ReferenceRow> {
        let mut out = Vec::new();
        for r in &self.table1 {
            for tech in Technology::ALL {
                for style in LogicStyle::ALL {
                    out.push(ReferenceRow {
                        module: r.label(),
                        tech,
                        style,
                        metric: Metric::AreaRatio,
                        value: r.area(tech, style),
                        note: None,
                    });
                    out.push(ReferenceRow {
                        module: r.label(),
                        tech,
                        style,
                        metric: Metric::PowerRatio,
                        value: r.power(tech, style),
                        note: r
                            .power_basis_unverified()
                            .then_some("as-published; basis unverified"),
                    });
                }
            }
        }
        out
    }

    pub fn table2_rows(&self) -> Vec<ReferenceRow> {
        let mut out = Vec::new();
        for r in &self.table2 {
            for tech in Technology::ALL {
                out.push(ReferenceRow {
                    module: r.module.clone(),
                    tech,
                    style: LogicStyle::Sl,
                    metric: Metric::AreaUm2,
                    value: r.area_um2(tech),
                    note: None,
                });
                out.push(ReferenceRow {
                    module: r.module.clone(),
                    tech,
                    style: LogicStyle::Sl,
                    metric: Metric::PowerUw,
                    value: r.power_uw(tech),
                    note: None,
                });
            }
        }
        out
    }

    pub fn table4_rows(&self) -> Vec<ReferenceRow> {
        let mut out = Vec::new();
        for r in &self.table4 {
            for tech in Technology::ALL {
                out.push(ReferenceRow {
                    module: r.trojan.clone(),
                    tech,
                    style: LogicStyle::Sl,
                    metric: Metric::AreaChangePct,
                    value: r.area_change(tech),
                    note: None,
                });
                out.push(ReferenceRow {
                    module: r.trojan.clone(),
                    tech,
                    style: LogicStyle::Sl,
                    metric: Metric::PowerChangePct,
                    value: r.power_change(tech),
                    note: None,
                });
            }
        }
        out
    }

    pub fn table4_row(&self, trojan: &str) -> Option<&Table4Row> {
        self.table4.iter().find(|r| r.trojan == trojan)
    }
}
