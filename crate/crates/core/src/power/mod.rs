//! Cell-inventory area and average-power estimation.
//!
//! A [`TechLibrary`] characterizes every cell for both technologies; a
//! [`ModuleInventory`] counts the cells a design instantiates in one logic
//! style. The bundled library and inventories are calibrated so that the
//! published module-level figures (S-Box absolutes, the cryptographic
//! processor ratios and the superscalar core stages) come out exactly.

mod estimate;
mod reference;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, LogicStyle, PerTech, Result, Technology};

pub use estimate::{
    compare_reference, compare_rows, estimate_area, estimate_avg_power, relative_table,
    reproduce_reference_table, Deviation, Measurement, Metric, RatioRow, DEFAULT_ACTIVITY,
    DEFAULT_TOLERANCE,
};
pub use reference::{ReferenceData, ReferenceRow, Table1Row, Table2Row, Table4Row};

pub const BUNDLED_LIBRARY: &str = include_str!("../../data/library.toml");
pub const BUNDLED_INVENTORIES: &str = include_str!("../../data/inventories.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    #[serde(skip)]
    pub name: String,
    /// nm² per technology.
    pub area: PerTech,
    /// pW per technology.
    pub leak_power: PerTech,
    /// Energy per output toggle, in the library's power unit per unit activity.
    pub switch_energy: PerTech,
    /// Constant draw when the cell is styled as CML, pW.
    pub cml_bias_power: PerTech,
    /// Fraction of the bias power that varies with data.
    pub cml_ripple_coeff: f64,
}

impl CellSpec {
    fn validate(&self) -> Result<()> {
        let fields = [
            ("area", self.area),
            ("leak_power", self.leak_power),
            ("switch_energy", self.switch_energy),
            ("cml_bias_power", self.cml_bias_power),
        ];
        for (field, v) in fields {
            for tech in Technology::ALL {
                let x = v.get(tech);
                if !(x.is_finite() && x >= 0.0) {
                    return Err(Error::invalid(format!(
                        "cell `{}`: {field}.{tech} = {x} must be finite and >= 0",
                        self.name
                    )));
                }
            }
        }
        if !(0.0..1.0).contains(&self.cml_ripple_coeff) {
            return Err(Error::invalid(format!(
                "cell `{}`: cml_ripple_coeff {} outside [0, 1)",
                self.name, self.cml_ripple_coeff
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LibraryFile {
    name: String,
    cml_area_factor: PerTech,
    cells: BTreeMap<String, CellSpec>,
}

#[derive(Debug, Clone)]
pub struct TechLibrary {
    pub name: String,
    pub cells: BTreeMap<String, CellSpec>,
    /// Area multiplier applied to every cell of a CML-styled inventory.
    pub cml_area_factor: PerTech,
    reference_datasets: ReferenceData,
}

impl TechLibrary {
    pub fn new(
        name: impl Into<String>,
        cml_area_factor: PerTech,
        cells: BTreeMap<String, CellSpec>,
    ) -> Self {
        let cells = cells
            .into_iter()
            .map(|(name, mut cell)| {
                cell.name = name.clone();
                (name, cell)
            })
            .collect();
        Self {
            name: name.into(),
            cells,
            cml_area_factor,
            reference_datasets: ReferenceData::bundled(),
        }
    }

    pub fn bundled() -> Self {
        Self::from_toml_str(BUNDLED_LIBRARY).expect("bundled library parses")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let file: LibraryFile = toml::from_str(s)?;
        let mut cells = file.cells;
        for (name, cell) in cells.iter_mut() {
            cell.name = name.clone();
            cell.validate()?;
        }
        for tech in Technology::ALL {
            let f = file.cml_area_factor.get(tech);
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::invalid(format!("cml_area_factor.{tech} must be > 0")));
            }
        }
        Ok(Self {
            name: file.name,
            cells,
            cml_area_factor: file.cml_area_factor,
            reference_datasets: ReferenceData::bundled(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        let file = LibraryFile {
            name: self.name.clone(),
            cml_area_factor: self.cml_area_factor,
            cells: self.cells.clone(),
        };
        toml::to_string(&file).expect("library serializes")
    }

    pub fn cell(&self, name: &str) -> Option<&CellSpec> {
        self.cells.get(name)
    }

    pub fn references(&self) -> &ReferenceData {
        &self.reference_datasets
    }

    /// Multiplies every per-cell value of one technology by `k`.
    pub fn scaled(&self, tech: Technology, k: f64) -> Self {
        let mut out = self.clone();
        for cell in out.cells.values_mut() {
            *cell.area.get_mut(tech) *= k;
            *cell.leak_power.get_mut(tech) *= k;
            *cell.switch_energy.get_mut(tech) *= k;
            *cell.cml_bias_power.get_mut(tech) *= k;
        }
        out
    }

    /// Multiplies every cell area of one technology by `k`.
    pub fn with_area_scaled(&self, tech: Technology, k: f64) -> Self {
        let mut out = self.clone();
        for cell in out.cells.values_mut() {
            *cell.area.get_mut(tech) *= k;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleInventory {
    #[serde(rename = "name")]
    pub module_name: String,
    pub style: LogicStyle,
    pub counts: BTreeMap<String, u64>,
}

impl ModuleInventory {
    pub fn new(module_name: impl Into<String>, style: LogicStyle) -> Self {
        Self {
            module_name: module_name.into(),
            style,
            counts: BTreeMap::new(),
        }
    }

    pub fn with(mut self, cell: impl Into<String>, count: u64) -> Self {
        *self.counts.entry(cell.into()).or_default() += count;
        self
    }

    /// Checks the count and resolution invariants against `lib`.
    pub fn validate(&self, lib: &TechLibrary) -> Result<()> {
        for (cell, &count) in &self.counts {
            if count == 0 {
                return Err(Error::invalid(format!(
                    "inventory `{}`: count for `{cell}` must be > 0",
                    self.module_name
                )));
            }
            if lib.cell(cell).is_none() {
                return Err(Error::UnknownCell {
                    module: self.module_name.clone(),
                    cell: cell.clone(),
                });
            }
        }
        Ok(())
    }

    /// Multiplies every count by `k`.
    pub fn scaled(&self, k: u64) -> Self {
        let mut out = self.clone();
        out.counts.values_mut().for_each(|c| *c *= k);
        out
    }

    /// Union of two inventories in the same style.
    pub fn merged(&self, other: &ModuleInventory, name: impl Into<String>) -> Result<Self> {
        if self.style != other.style {
            return Err(Error::invalid("cannot merge inventories of different styles"));
        }
        let mut out = self.clone();
        out.module_name = name.into();
        for (cell, &count) in &other.counts {
            *out.counts.entry(cell.clone()).or_default() += count;
        }
        Ok(out)
    }
}

/// A Trojan as a healthy host module and its infected variant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FootprintPair {
    pub trojan: String,
    pub host: String,
    pub infected: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InventorySet {
    #[serde(default, rename = "inventory")]
    pub inventories: Vec<ModuleInventory>,
    #[serde(default, rename = "footprint")]
    pub footprints: Vec<FootprintPair>,
}

impl InventorySet {
    pub fn bundled() -> Self {
        Self::from_toml_str(BUNDLED_INVENTORIES).expect("bundled inventories parse")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let set: InventorySet = toml::from_str(s)?;
        let mut seen = std::collections::HashSet::new();
        for inv in &set.inventories {
            if !seen.insert((inv.module_name.as_str(), inv.style)) {
                return Err(Error::invalid(format!(
                    "duplicate inventory `{}` ({})",
                    inv.module_name, inv.style
                )));
            }
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("inventories serialize")
    }

    pub fn get(&self, name: &str, style: LogicStyle) -> Result<&ModuleInventory> {
        self.inventories
            .iter()
            .find(|i| i.module_name == name && i.style == style)
            .ok_or_else(|| Error::UnknownInventory(format!("{name} ({style})")))
    }

    pub fn validate(&self, lib: &TechLibrary) -> Result<()> {
        self.inventories.iter().try_for_each(|i| i.validate(lib))?;
        for fp in &self.footprints {
            self.get(&fp.host, LogicStyle::Sl)?;
            self.get(&fp.infected, LogicStyle::Sl)?;
        }
        Ok(())
    }
}
