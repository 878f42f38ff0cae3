use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

/// Transistor technology.
///
/// `Cmos` is the conventional thermionic MOSFET; `Tfet` is the
/// band-to-band tunneling device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technology {
    #[serde(alias = "mosfet")]
    Cmos,
    Tfet,
}

impl Technology {
    pub const ALL: [Technology; 2] = [Technology::Cmos, Technology::Tfet];

    pub fn as_str(self) -> &'static str {
        match self {
            Technology::Cmos => "cmos",
            Technology::Tfet => "tfet",
        }
    }
}

impl fmt::Display for Technology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Technology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cmos" | "mosfet" => Ok(Technology::Cmos),
            "tfet" => Ok(Technology::Tfet),
            other => Err(Error::Parse(format!("unknown technology `{other}`"))),
        }
    }
}

/// Logic style: static (complementary) logic or current-mode logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogicStyle {
    Sl,
    Cml,
}

impl LogicStyle {
    pub const ALL: [LogicStyle; 2] = [LogicStyle::Sl, LogicStyle::Cml];

    pub fn as_str(self) -> &'static str {
        match self {
            LogicStyle::Sl => "sl",
            LogicStyle::Cml => "cml",
        }
    }
}

impl fmt::Display for LogicStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LogicStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sl" | "static" => Ok(LogicStyle::Sl),
            "cml" => Ok(LogicStyle::Cml),
            other => Err(Error::Parse(format!("unknown logic style `{other}`"))),
        }
    }
}

/// A value characterized separately for each technology.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerTech {
    pub cmos: f64,
    pub tfet: f64,
}

impl PerTech {
    pub fn new(cmos: f64, tfet: f64) -> Self {
        Self { cmos, tfet }
    }

    pub fn get(&self, tech: Technology) -> f64 {
        match tech {
            Technology::Cmos => self.cmos,
            Technology::Tfet => self.tfet,
        }
    }

    pub fn get_mut(&mut self, tech: Technology) -> &mut f64 {
        match tech {
            Technology::Cmos => &mut self.cmos,
            Technology::Tfet => &mut self.tfet,
        }
    }
}
