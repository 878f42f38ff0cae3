use std::fmt;

use super::{InventorySet, ModuleInventory, ReferenceRow, TechLibrary};
use crate::{Error, LogicStyle, Result, Technology};

/// One toggle per cell per evaluation cycle.
pub const DEFAULT_ACTIVITY: f64 = 1.0;

/// Relative deviation above which a reproduced value is flagged.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    AreaNm2,
    PowerPw,
    AreaUm2,
    PowerUw,
    AreaRatio,
    PowerRatio,
    AreaChangePct,
    PowerChangePct,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::AreaNm2 => "area_nm2",
            Metric::PowerPw => "power_pw",
            Metric::AreaUm2 => "area_um2",
            Metric::PowerUw => "power_uw",
            Metric::AreaRatio => "area_ratio",
            Metric::PowerRatio => "power_ratio",
            Metric::AreaChangePct => "area_change_pct",
            Metric::PowerChangePct => "power_change_pct",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A computed value addressed by module, technology, style and metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub module: String,
    pub tech: Technology,
    pub style: LogicStyle,
    pub metric: Metric,
    pub value: f64,
}

fn cells<'a>(
    inv: &'a ModuleInventory,
    lib: &'a TechLibrary,
) -> impl Iterator<Item = Result<(&'a super::CellSpec, f64)>> + 'a {
    inv.counts.iter().map(move |(name, &count)| {
        lib.cell(name)
            .map(|c| (c, count as f64))
            .ok_or_else(|| Error::UnknownCell {
                module: inv.module_name.clone(),
                cell: name.clone(),
            })
    })
}

/// Σ count × area; CML inventories scale by the library's style factor. nm².
pub fn estimate_area(inv: &ModuleInventory, lib: &TechLibrary, tech: Technology) -> Result<f64> {
    let factor = match inv.style {
        LogicStyle::Sl => 1.0,
        LogicStyle::Cml => lib.cml_area_factor.get(tech),
    };
    let mut total = 0.0;
    for item in cells(inv, lib) {
        let (cell, count) = item?;
        total += count * cell.area.get(tech) * factor;
    }
    Ok(total)
}

/// Average power in pW.
///
/// SL: Σ count × (leak + switch_energy × activity). CML: Σ count × bias,
/// independent of activity.
pub fn estimate_avg_power(
    inv: &ModuleInventory,
    lib: &TechLibrary,
    tech: Technology,
    activity: f64,
) -> Result<f64> {
    if !(activity.is_finite() && activity >= 0.0) {
        return Err(Error::domain(format!("activity {activity} must be >= 0")));
    }
    let mut total = 0.0;
    for item in cells(inv, lib) {
        let (cell, count) = item?;
        total += match inv.style {
            LogicStyle::Sl => {
                count * (cell.leak_power.get(tech) + cell.switch_energy.get(tech) * activity)
            }
            LogicStyle::Cml => count * cell.cml_bias_power.get(tech),
        };
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub numerator: String,
    pub denominator: String,
    pub tech: Technology,
    pub style: LogicStyle,
    pub area_ratio: f64,
    pub power_ratio: f64,
}

impl RatioRow {
    pub fn label(&self) -> String {
        format!("{}/{}", self.numerator, self.denominator)
    }
}

/// Area and power of each module relative to `reference`, per technology.
///
/// All inventories must share the reference's style.
pub fn relative_table(
    modules: &[&ModuleInventory],
    reference: &ModuleInventory,
    lib: &TechLibrary,
    activity: f64,
) -> Result<Vec<RatioRow>> {
    let mut rows = Vec::with_capacity(modules.len() * 2);
    for tech in Technology::ALL {
        let ref_area = estimate_area(reference, lib, tech)?;
        let ref_power = estimate_avg_power(reference, lib, tech, activity)?;
        if ref_area == 0.0 || ref_power == 0.0 {
            return Err(Error::ZeroReference(reference.module_name.clone()));
        }
        for m in modules {
            if m.style != reference.style {
                return Err(Error::invalid(format!(
                    "`{}` is {} but reference `{}` is {}",
                    m.module_name, m.style, reference.module_name, reference.style
                )));
            }
            rows.push(RatioRow {
                numerator: m.module_name.clone(),
                denominator: reference.module_name.clone(),
                tech,
                style: reference.style,
                area_ratio: estimate_area(m, lib, tech)? / ref_area,
                power_ratio: estimate_avg_power(m, lib, tech, activity)? / ref_power,
            });
        }
    }
    Ok(rows)
}

/// Computes every value the bundled S-Box, ratio and core-stage tables report.
pub fn reproduce_reference_table(
    lib: &TechLibrary,
    set: &InventorySet,
    activity: f64,
) -> Result<Vec<Measurement>> {
    let refs = lib.references();
    let mut out = Vec::new();

    for style in LogicStyle::ALL {
        let inv = set.get("sbox", style)?;
        for tech in Technology::ALL {
            out.push(Measurement {
                module: "sbox".into(),
                tech,
                style,
                metric: Metric::AreaNm2,
                value: estimate_area(inv, lib, tech)?,
            });
            out.push(Measurement {
                module: "sbox".into(),
                tech,
                style,
                metric: Metric::PowerPw,
                value: estimate_avg_power(inv, lib, tech, activity)?,
            });
        }
    }

    for row in &refs.table1 {
        for style in LogicStyle::ALL {
            let num = set.get(&row.numerator, style)?;
            let den = set.get(&row.denominator, style)?;
            for r in relative_table(&[num], den, lib, activity)? {
                out.push(Measurement {
                    module: r.label(),
                    tech: r.tech,
                    style,
                    metric: Metric::AreaRatio,
                    value: r.area_ratio,
                });
                out.push(Measurement {
                    module: r.label(),
                    tech: r.tech,
                    style,
                    metric: Metric::PowerRatio,
                    value: r.power_ratio,
                });
            }
        }
    }

    for row in &refs.table2 {
        let inv = set.get(&row.module, LogicStyle::Sl)?;
        for tech in Technology::ALL {
            out.push(Measurement {
                module: row.module.clone(),
                tech,
                style: LogicStyle::Sl,
                metric: Metric::AreaUm2,
                value: estimate_area(inv, lib, tech)? * 1e-6,
            });
            out.push(Measurement {
                module: row.module.clone(),
                tech,
                style: LogicStyle::Sl,
                metric: Metric::PowerUw,
                value: estimate_avg_power(inv, lib, tech, activity)? * 1e-6,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub module: String,
    pub tech: Technology,
    pub style: LogicStyle,
    pub metric: Metric,
    pub computed: f64,
    pub reference: f64,
    /// (computed − reference) / reference.
    pub rel_dev: f64,
    pub flagged: bool,
    pub note: Option<&'static str>,
}

/// Matches each reference row with its computed counterpart.
pub fn compare_rows(
    computed: &[Measurement],
    rows: &[ReferenceRow],
    tolerance: f64,
) -> Result<Vec<Deviation>> {
    rows.iter()
        .map(|r| {
            let m = computed
                .iter()
                .find(|m| {
                    m.module == r.module
                        && m.tech == r.tech
                        && m.style == r.style
                        && m.metric == r.metric
                })
                .ok_or_else(|| {
                    Error::Coverage(format!("{} {} {} {}", r.module, r.tech, r.style, r.metric))
                })?;
            let rel_dev = (m.value - r.value) / r.value;
            Ok(Deviation {
                module: r.module.clone(),
                tech: r.tech,
                style: r.style,
                metric: r.metric,
                computed: m.value,
                reference: r.value,
                rel_dev,
                flagged: !(rel_dev.abs() <= tolerance),
                note: r.note,
            })
        })
        .collect()
}

/// Deviations of a computed table from the bundled S-Box, ratio and core-stage data.
pub fn compare_reference(
    computed: &[Measurement],
    lib: &TechLibrary,
    tolerance: f64,
) -> Result<Vec<Deviation>> {
    let refs = lib.references();
    let mut rows = refs.sbox_rows();
    rows.extend(refs.table1_rows());
    rows.extend(refs.table2_rows());
    compare_rows(computed, &rows, tolerance)
}
