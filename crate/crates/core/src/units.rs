//! Runtime dimension tags and exact multiplicative unit conversion.
//!
//! This is not a unit algebra: quantities carry one of a handful of
//! dimension tags, same-dimension arithmetic is allowed, and anything else
//! is rejected.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::CODATA_2018;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Mass,
    Length,
    Time,
    Speed,
    Dimensionless,
    Temperature,
    Charge,
    Action,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Kilogram,
    Gram,
    Microgram,
    Amu,
    GevPerC2,
    Metre,
    Micrometre,
    Nanometre,
    Second,
    Millisecond,
    MetrePerSecond,
    /// Speed as a fraction of c (β).
    SpeedOfLight,
    Dimensionless,
    Kelvin,
    Coulomb,
    ElementaryCharge,
    JouleSecond,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            Kilogram | Gram | Microgram | Amu | GevPerC2 => Dimension::Mass,
            Metre | Micrometre | Nanometre => Dimension::Length,
            Second | Millisecond => Dimension::Time,
            MetrePerSecond | SpeedOfLight => Dimension::Speed,
            Dimensionless => Dimension::Dimensionless,
            Kelvin => Dimension::Temperature,
            Coulomb | ElementaryCharge => Dimension::Charge,
            JouleSecond => Dimension::Action,
        }
    }

    /// Size of one of this unit in the SI base unit of its dimension.
    pub fn si_factor(self) -> f64 {
        use Unit::*;
        let k = CODATA_2018;
        match self {
            Kilogram | Metre | Second | MetrePerSecond | Dimensionless | Kelvin | Coulomb
            | JouleSecond => 1.0,
            Gram => 1e-3,
            Microgram => 1e-9,
            Amu => k.amu,
            GevPerC2 => 1e9 * k.elementary_charge / (k.c * k.c),
            Micrometre => 1e-6,
            Nanometre => 1e-9,
            Millisecond => 1e-3,
            SpeedOfLight => k.c,
            ElementaryCharge => k.elementary_charge,
        }
    }

    pub fn symbol(self) -> &'static str {
        use Unit::*;
        match self {
            Kilogram => "kg",
            Gram => "g",
            Microgram => "μg",
            Amu => "amu",
            GevPerC2 => "GeV/c²",
            Metre => "m",
            Micrometre => "μm",
            Nanometre => "nm",
            Second => "s",
            Millisecond => "ms",
            MetrePerSecond => "m/s",
            SpeedOfLight => "c",
            Dimensionless => "",
            Kelvin => "K",
            Coulomb => "C",
            ElementaryCharge => "e",
            JouleSecond => "J·s",
        }
    }
}

/// A value tagged with the unit it is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Quantity { value, unit }
    }

    pub fn dimensionless(value: f64) -> Self {
        Quantity::new(value, Unit::Dimensionless)
    }

    pub fn dimension(&self) -> Dimension {
        self.unit.dimension()
    }

    /// Value in the SI base unit of this quantity's dimension.
    pub fn si_value(&self) -> f64 {
        self.value * self.unit.si_factor()
    }

    pub fn convert(&self, target: Unit) -> Result<Quantity> {
        convert(*self, target)
    }

    /// Sum expressed in `self`'s unit.
    pub fn try_add(&self, other: &Quantity) -> Result<Quantity> {
        let rhs = other.convert(self.unit).map_err(|_| self.mismatch(other))?;
        Ok(Quantity::new(self.value + rhs.value, self.unit))
    }

    pub fn try_sub(&self, other: &Quantity) -> Result<Quantity> {
        let rhs = other.convert(self.unit).map_err(|_| self.mismatch(other))?;
        Ok(Quantity::new(self.value - rhs.value, self.unit))
    }

    /// Ratio of two same-dimension quantities, tagged dimensionless.
    pub fn try_ratio(&self, other: &Quantity) -> Result<Quantity> {
        if self.dimension() != other.dimension() {
            return Err(self.mismatch(other));
        }
        Ok(Quantity::dimensionless(self.si_value() / other.si_value()))
    }

    pub fn scale(&self, factor: f64) -> Quantity {
        Quantity::new(self.value * factor, self.unit)
    }

    fn mismatch(&self, other: &Quantity) -> Error {
        Error::DimensionMismatch {
            left: self.dimension(),
            right: other.dimension(),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.unit {
            Unit::Dimensionless => write!(f, "{}", self.value),
            u => write!(f, "{} {}", self.value, u.symbol()),
        }
    }
}

/// Re-express `x` in `target`. Fails if the dimensions differ.
pub fn convert(x: Quantity, target: Unit) -> Result<Quantity> {
    if x.dimension() != target.dimension() {
        return Err(Error::DimensionMismatch {
            left: x.dimension(),
            right: target.dimension(),
        });
    }
    if x.unit == target {
        return Ok(x);
    }
    Ok(Quantity::new(
        x.value * x.unit.si_factor() / target.si_factor(),
        target,
    ))
}
