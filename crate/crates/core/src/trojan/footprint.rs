//! Area and power footprint of a Trojan against its host module.

use std::fmt::Write as _;

use crate::power::{
    estimate_area, estimate_avg_power, InventorySet, ModuleInventory, TechLibrary, Table4Row,
};
use crate::{Error, LogicStyle, PerTech, Result, Technology};

/// `(area %, power %)` change of `infected` over `healthy`.
pub fn footprint_delta(
    healthy: &ModuleInventory,
    infected: &ModuleInventory,
    lib: &TechLibrary,
    tech: Technology,
    activity: f64,
) -> Result<(f64, f64)> {
    healthy.validate(lib)?;
    infected.validate(lib)?;
    let pct = |h: f64, i: f64| {
        if h == 0.0 {
            Err(Error::ZeroReference(healthy.module_name.clone()))
        } else {
            Ok(100.0 * (i - h) / h)
        }
    };
    let area = pct(
        estimate_area(healthy, lib, tech)?,
        estimate_area(infected, lib, tech)?,
    )?;
    let power = pct(
        estimate_avg_power(healthy, lib, tech, activity)?,
        estimate_avg_power(infected, lib, tech, activity)?,
    )?;
    Ok((area, power))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FootprintRow {
    pub trojan: String,
    pub area_change: PerTech,
    pub power_change: PerTech,
    pub reference: Option<Table4Row>,
}

/// Footprints of every Trojan registered in `set`.
pub fn footprint_table(
    lib: &TechLibrary,
    set: &InventorySet,
    activity: f64,
) -> Result<Vec<FootprintRow>> {
    set.footprints
        .iter()
        .map(|fp| {
            let host = set.get(&fp.host, LogicStyle::Sl)?;
            let infected = set.get(&fp.infected, LogicStyle::Sl)?;
            let mut area = PerTech::new(0.0, 0.0);
            let mut power = PerTech::new(0.0, 0.0);
            for tech in Technology::ALL {
                let (a, p) = footprint_delta(host, infected, lib, tech, activity)?;
                *area.get_mut(tech) = a;
                *power.get_mut(tech) = p;
            }
            Ok(FootprintRow {
                trojan: fp.trojan.clone(),
                area_change: area,
                power_change: power,
                reference: lib.references().table4_row(&fp.trojan).cloned(),
            })
        })
        .collect()
}

pub fn footprint_csv(rows: &[FootprintRow]) -> String {
    let mut out = String::from(
        "trojan,area_change_cmos,area_change_tfet,power_change_cmos,power_change_tfet,\
         ref_area_change_cmos,ref_area_change_tfet,ref_power_change_cmos,ref_power_change_tfet\n",
    );
    for r in rows {
        let _ = write!(
            out,
            "{},{:.9},{:.9},{:.9},{:.9}",
            r.trojan, r.area_change.cmos, r.area_change.tfet, r.power_change.cmos, r.power_change.tfet
        );
        match &r.reference {
            Some(t) => {
                let _ = writeln!(
                    out,
                    ",{},{},{},{}",
                    t.area_change_cmos, t.area_change_tfet, t.power_change_cmos, t.power_change_tfet
                );
            }
            None => out.push_str(",,,,\n"),
        }
    }
    out
}
