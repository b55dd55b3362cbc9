//! Physical constants and unit handling.
//!
//! Everything inside the crate is strict SI. The unit tags below cover the
//! human-facing units used for material data and command-line input (amu,
//! pm, g/cm³, Hz, mK, ...), each defined by an exact factor to its SI unit.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Fundamental constants in SI units.
///
/// The fields are public so that test harnesses can switch individual
/// interactions off (e.g. `G = 0`); [`PhysicalConstants::validate`] checks
/// the physical invariants for everything else.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Newtonian gravitational constant, m³ kg⁻¹ s⁻².
    pub g: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Planck constant, J s.
    pub h: f64,
    /// Speed of light in vacuum, m s⁻¹.
    pub c: f64,
    /// Boltzmann constant, J K⁻¹.
    pub k_b: f64,
    /// Unified atomic mass unit, kg.
    pub amu: f64,
}

const PLANCK_H: f64 = 6.626_070_15e-34;

impl PhysicalConstants {
    /// CODATA 2018 recommended values. `h`, `c` and `k_B` are exact in the
    /// 2019 SI; `hbar` is derived from `h`.
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        g: 6.674_30e-11,
        hbar: PLANCK_H / (2.0 * PI),
        h: PLANCK_H,
        c: 299_792_458.0,
        k_b: 1.380_649e-23,
        amu: 1.660_539_066_60e-27,
    };

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("G", self.g),
            ("hbar", self.hbar),
            ("h", self.h),
            ("c", self.c),
            ("k_B", self.k_b),
            ("amu", self.amu),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("constant {name} must be positive, got {v}")));
            }
        }
        let rel = (self.h - 2.0 * PI * self.hbar).abs() / self.h;
        if rel > 1e-12 {
            return Err(Error::Consistency(format!(
                "h and 2*pi*hbar differ by {rel:e} (relative)"
            )));
        }
        Ok(())
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Mass,
    Length,
    Area,
    Volume,
    Density,
    Frequency,
    Temperature,
}

/// A unit tag with its exact factor to SI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Kilogram,
    Gram,
    Amu,
    Meter,
    Centimeter,
    Millimeter,
    Micrometer,
    Nanometer,
    Angstrom,
    Picometer,
    SquareMeter,
    SquareAngstrom,
    CubicMeter,
    CubicMicrometer,
    KilogramPerCubicMeter,
    GramPerCubicCentimeter,
    /// Angular frequency, rad/s.
    RadianPerSecond,
    /// Ordinary frequency; 1 Hz = 2π rad/s.
    Hertz,
    Millihertz,
    Kilohertz,
    Kelvin,
    Millikelvin,
}

impl Unit {
    pub const ALL: [Unit; 22] = [
        Unit::Kilogram,
        Unit::Gram,
        Unit::Amu,
        Unit::Meter,
        Unit::Centimeter,
        Unit::Millimeter,
        Unit::Micrometer,
        Unit::Nanometer,
        Unit::Angstrom,
        Unit::Picometer,
        Unit::SquareMeter,
        Unit::SquareAngstrom,
        Unit::CubicMeter,
        Unit::CubicMicrometer,
        Unit::KilogramPerCubicMeter,
        Unit::GramPerCubicCentimeter,
        Unit::RadianPerSecond,
        Unit::Hertz,
        Unit::Millihertz,
        Unit::Kilohertz,
        Unit::Kelvin,
        Unit::Millikelvin,
    ];

    pub fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            Kilogram | Gram | Amu => Dimension::Mass,
            Meter | Centimeter | Millimeter | Micrometer | Nanometer | Angstrom | Picometer => {
                Dimension::Length
            }
            SquareMeter | SquareAngstrom => Dimension::Area,
            CubicMeter | CubicMicrometer => Dimension::Volume,
            KilogramPerCubicMeter | GramPerCubicCentimeter => Dimension::Density,
            RadianPerSecond | Hertz | Millihertz | Kilohertz => Dimension::Frequency,
            Kelvin | Millikelvin => Dimension::Temperature,
        }
    }

    /// Multiply a value in this unit by this factor to get SI.
    pub fn to_si_factor(self) -> f64 {
        use Unit::*;
        match self {
            Kilogram => 1.0,
            Gram => 1e-3,
            Amu => PhysicalConstants::CODATA_2018.amu,
            Meter => 1.0,
            Centimeter => 1e-2,
            Millimeter => 1e-3,
            Micrometer => 1e-6,
            Nanometer => 1e-9,
            Angstrom => 1e-10,
            Picometer => 1e-12,
            SquareMeter => 1.0,
            SquareAngstrom => 1e-20,
            CubicMeter => 1.0,
            CubicMicrometer => 1e-18,
            KilogramPerCubicMeter => 1.0,
            GramPerCubicCentimeter => 1e3,
            RadianPerSecond => 1.0,
            Hertz => 2.0 * PI,
            Millihertz => 2.0 * PI * 1e-3,
            Kilohertz => 2.0 * PI * 1e3,
            Kelvin => 1.0,
            Millikelvin => 1e-3,
        }
    }

    pub fn symbol(self) -> &'static str {
        use Unit::*;
        match self {
            Kilogram => "kg",
            Gram => "g",
            Amu => "amu",
            Meter => "m",
            Centimeter => "cm",
            Millimeter => "mm",
            Micrometer => "um",
            Nanometer => "nm",
            Angstrom => "A",
            Picometer => "pm",
            SquareMeter => "m2",
            SquareAngstrom => "A2",
            CubicMeter => "m3",
            CubicMicrometer => "um3",
            KilogramPerCubicMeter => "kg/m3",
            GramPerCubicCentimeter => "g/cm3",
            RadianPerSecond => "rad/s",
            Hertz => "Hz",
            Millihertz => "mHz",
            Kilohertz => "kHz",
            Kelvin => "K",
            Millikelvin => "mK",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let alias = match s {
            "μm" | "µm" => Some(Unit::Micrometer),
            "Å" => Some(Unit::Angstrom),
            "Å2" | "Å²" => Some(Unit::SquareAngstrom),
            "g/cm³" => Some(Unit::GramPerCubicCentimeter),
            "kg/m³" => Some(Unit::KilogramPerCubicMeter),
            "u" | "Da" => Some(Unit::Amu),
            "1/s" | "s^-1" => Some(Unit::RadianPerSecond),
            _ => None,
        };
        if let Some(u) = alias {
            return Ok(u);
        }
        Unit::ALL
            .iter()
            .copied()
            .find(|u| u.symbol() == s)
            .ok_or_else(|| Error::domain(format!("unknown unit `{s}`")))
    }
}

/// Convert `value` from one unit to another of the same dimension.
pub fn convert_units(value: f64, from: Unit, to: Unit) -> Result<f64> {
    if from.dimension() != to.dimension() {
        return Err(Error::domain(format!(
            "cannot convert {from} ({:?}) to {to} ({:?})",
            from.dimension(),
            to.dimension()
        )));
    }
    if from == to {
        return Ok(value);
    }
    Ok(value * from.to_si_factor() / to.to_si_factor())
}

/// A number with a mandatory unit suffix, e.g. `10Hz`, `1e15amu`, `2.77pm`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn to_si(self) -> f64 {
        self.value * self.unit.to_si_factor()
    }

    /// SI value, checked against the expected dimension.
    pub fn si_as(self, dim: Dimension) -> Result<f64> {
        if self.unit.dimension() != dim {
            return Err(Error::domain(format!(
                "expected a {dim:?} quantity, got unit {}",
                self.unit
            )));
        }
        Ok(self.to_si())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        // longest prefix that parses as a float; the rest is the unit
        let split = (1..=s.len())
            .rev()
            .filter(|&i| s.is_char_boundary(i))
            .find(|&i| s[..i].parse::<f64>().is_ok())
            .ok_or_else(|| Error::domain(format!("`{s}` does not start with a number")))?;
        let (num, unit) = s.split_at(split);
        let unit = unit.trim();
        if unit.is_empty() {
            return Err(Error::domain(format!("`{s}` is missing a unit suffix")));
        }
        let value: f64 = num.parse().expect("checked above");
        if !value.is_finite() {
            return Err(Error::domain(format!("`{s}` is not finite")));
        }
        Ok(Quantity {
            value,
            unit: unit.parse()?,
        })
    }
}
