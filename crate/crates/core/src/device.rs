//! Two-piece analytic drain-current models.
//!
//! Below the hand-off voltage `v_on` the current grows exponentially with
//! a fixed sub-threshold slope; at and above it the current sits on a flat
//! saturation plateau. `v_on` is derived from the slope and the on/off
//! ratio so the two pieces meet without a jump.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Technology};

/// Boltzmann constant, J/K.
const BOLTZMANN: f64 = 1.380_649e-23;
/// Elementary charge, C.
const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Thermionic sub-threshold slope limit `(kT/q)·ln 10` in mV/decade.
pub fn thermionic_limit_mv_per_dec(temperature_k: f64) -> f64 {
    BOLTZMANN * temperature_k / ELEMENTARY_CHARGE * std::f64::consts::LN_10 * 1000.0
}

/// Informational device-structure record. Never enters a computation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DopingMeta {
    pub gate_length_nm: Option<f64>,
    pub gate_width_nm: Option<f64>,
    pub body_thickness_nm: Option<f64>,
    pub dielectric_thickness_nm: Option<f64>,
    pub source_doping_cm3: Option<f64>,
    pub drain_doping_cm3: Option<f64>,
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub technology: Technology,
    /// Supply voltage, V.
    pub vdd: f64,
    /// Sub-threshold slope, mV/decade.
    pub ss: f64,
    /// Leakage floor at `v_gs = 0`, A.
    pub i_off: f64,
    /// Saturation plateau, A.
    pub i_on: f64,
    /// Temperature, K. Only used for the MOSFET slope floor.
    pub temperature: f64,
    pub doping_meta: DopingMeta,
    v_on: f64,
}

impl DeviceParams {
    /// Builds a parameter set and derives `v_on = (ss/1000)·log10(i_on/i_off)`.
    pub fn new(
        technology: Technology,
        vdd: f64,
        ss: f64,
        i_off: f64,
        i_on: f64,
        temperature: f64,
    ) -> Result<Self> {
        let all_finite = [vdd, ss, i_off, i_on, temperature]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::invalid("device parameters must be finite"));
        }
        if !(ss > 0.0) {
            return Err(Error::invalid(format!("sub-threshold slope {ss} must be > 0")));
        }
        if !(i_off > 0.0 && i_off < i_on) {
            return Err(Error::invalid(format!(
                "need 0 < i_off < i_on, got i_off={i_off:e}, i_on={i_on:e}"
            )));
        }
        if !(temperature > 0.0) {
            return Err(Error::invalid("temperature must be > 0 K"));
        }
        if technology == Technology::Cmos {
            let floor = thermionic_limit_mv_per_dec(temperature);
            if ss < floor {
                return Err(Error::invalid(format!(
                    "MOSFET slope {ss} mV/dec is below the thermionic limit {floor:.3} mV/dec"
                )));
            }
        }
        let v_on = ss / 1000.0 * (i_on / i_off).log10();
        if !(vdd > 0.0 && v_on <= vdd) {
            return Err(Error::invalid(format!(
                "need 0 < v_on <= vdd, got v_on={v_on}, vdd={vdd}"
            )));
        }
        Ok(Self {
            technology,
            vdd,
            ss,
            i_off,
            i_on,
            temperature,
            doping_meta: DopingMeta::default(),
            v_on,
        })
    }

    /// InAs homo-junction n-TFET at 0.3 V. Current magnitudes are placeholders.
    pub fn tfet_default() -> Self {
        let mut p = Self::new(Technology::Tfet, 0.3, 30.0, 1e-12, 1e-5, 300.0)
            .expect("default TFET parameters are valid");
        p.doping_meta = DopingMeta {
            gate_length_nm: Some(20.0),
            gate_width_nm: Some(20.0),
            body_thickness_nm: Some(5.0),
            dielectric_thickness_nm: Some(5.0),
            source_doping_cm3: Some(4e19),
            drain_doping_cm3: Some(6e17),
            notes: "InAs homo-junction n-TFET".into(),
        };
        p
    }

    /// 20 nm multi-gate n-MOSFET at 0.6 V. Current magnitudes are placeholders.
    pub fn mosfet_default() -> Self {
        let mut p = Self::new(Technology::Cmos, 0.6, 60.0, 1e-10, 1e-4, 300.0)
            .expect("default MOSFET parameters are valid");
        p.doping_meta = DopingMeta {
            gate_length_nm: Some(20.0),
            gate_width_nm: Some(20.0),
            source_doping_cm3: Some(1e20),
            drain_doping_cm3: Some(1e20),
            notes: "Si FinFET, S/D doping 1e20 cm^-3".into(),
            ..DopingMeta::default()
        };
        p
    }

    pub fn default_for(technology: Technology) -> Self {
        match technology {
            Technology::Tfet => Self::tfet_default(),
            Technology::Cmos => Self::mosfet_default(),
        }
    }

    /// Gate voltage where the exponential region hands off to the plateau.
    pub fn v_on(&self) -> f64 {
        self.v_on
    }
}

/// Drain current at `v_gs`, in amperes.
pub fn drain_current(p: &DeviceParams, v_gs: f64) -> Result<f64> {
    if !(0.0..=p.vdd).contains(&v_gs) {
        return Err(Error::domain(format!(
            "v_gs = {v_gs} V outside [0, {}] V",
            p.vdd
        )));
    }
    if v_gs >= p.v_on {
        return Ok(p.i_on);
    }
    let i = p.i_off * 10f64.powf(v_gs * 1000.0 / p.ss);
    Ok(i.min(p.i_on))
}

/// Measured slope between two points in the exponential region, mV/decade.
pub fn subthreshold_slope(p: &DeviceParams, v1: f64, v2: f64) -> Result<f64> {
    if !(0.0 <= v1 && v1 < v2 && v2 < p.v_on) {
        return Err(Error::domain(format!(
            "need 0 <= v1 < v2 < v_on ({}), got v1={v1}, v2={v2}",
            p.v_on
        )));
    }
    let decades = drain_current(p, v2)?.log10() - drain_current(p, v1)?.log10();
    if decades == 0.0 {
        return Err(Error::UndefinedSlope { v1, v2 });
    }
    Ok((v2 - v1) * 1000.0 / decades)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IvPoint {
    pub v_gs: f64,
    pub i_ds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IvCurve {
    pub points: Vec<IvPoint>,
}

impl IvCurve {
    /// First swept gate voltage at which the current reaches `level`.
    pub fn first_v_reaching(&self, level: f64) -> Option<f64> {
        self.points.iter().find(|p| p.i_ds >= level).map(|p| p.v_gs)
    }

    /// `v_gs,i_ds` rows in scientific notation with 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("v_gs,i_ds\n");
        for p in &self.points {
            let _ = writeln!(out, "{:.8e},{:.8e}", p.v_gs, p.i_ds);
        }
        out
    }
}

/// `n_points` evenly spaced gate voltages over `[0, vdd]`.
pub fn iv_sweep(p: &DeviceParams, n_points: usize) -> Result<IvCurve> {
    if n_points < 2 {
        return Err(Error::domain(format!("n_points = {n_points} must be >= 2")));
    }
    let last = (n_points - 1) as f64;
    let points = (0..n_points)
        .map(|i| {
            // pin the endpoint so rounding never pushes it past vdd
            let v_gs = if i == n_points - 1 {
                p.vdd
            } else {
                p.vdd * i as f64 / last
            };
            drain_current(p, v_gs).map(|i_ds| IvPoint { v_gs, i_ds })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IvCurve { points })
}
