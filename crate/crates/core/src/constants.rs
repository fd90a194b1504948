//! Physical constants and the scales derived from them.
//!
//! The default set is CODATA 2018. A natural-units preset (ħ = c = G = 1)
//! is provided for analytic checks; in that preset every other constant is
//! also set to one.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Selectable constant set, as named in config files and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantSet {
    #[default]
    Codata2018,
    Natural,
}

impl std::str::FromStr for ConstantSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "codata2018" => Ok(ConstantSet::Codata2018),
            "natural" => Ok(ConstantSet::Natural),
            other => Err(Error::invalid(
                "constants",
                format!("unknown constant set `{other}` (expected codata2018 or natural)"),
            )),
        }
    }
}

/// Fundamental constants in SI units (or natural units for the natural preset).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Speed of light, m/s.
    pub c: f64,
    /// Newtonian gravitational constant, m³·kg⁻¹·s⁻².
    pub g: f64,
    /// Elementary charge, C.
    pub elementary_charge: f64,
    /// Vacuum permittivity ε₀, F/m.
    pub vacuum_permittivity: f64,
    /// Boltzmann constant, J/K.
    pub boltzmann: f64,
    /// Atomic mass unit, kg.
    pub amu: f64,
    /// Electron mass, kg. Sets the Compton wavelength used by the regime checks.
    pub electron_mass: f64,
}

pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817e-34,
    c: 299_792_458.0,
    g: 6.674_30e-11,
    elementary_charge: 1.602_176_634e-19,
    vacuum_permittivity: 8.854_187_812_8e-12,
    boltzmann: 1.380_649e-23,
    amu: 1.660_539_066_60e-27,
    electron_mass: 9.109_383_701_5e-31,
};

pub const NATURAL: PhysicalConstants = PhysicalConstants {
    hbar: 1.0,
    c: 1.0,
    g: 1.0,
    elementary_charge: 1.0,
    vacuum_permittivity: 1.0,
    boltzmann: 1.0,
    amu: 1.0,
    electron_mass: 1.0,
};

impl Default for PhysicalConstants {
    fn default() -> Self {
        CODATA_2018
    }
}

impl From<ConstantSet> for PhysicalConstants {
    fn from(set: ConstantSet) -> Self {
        match set {
            ConstantSet::Codata2018 => CODATA_2018,
            ConstantSet::Natural => NATURAL,
        }
    }
}

impl PhysicalConstants {
    pub fn codata2018() -> Self {
        CODATA_2018
    }

    pub fn natural() -> Self {
        NATURAL
    }

    /// Rejects non-finite or non-positive entries.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("hbar", self.hbar),
            ("c", self.c),
            ("G", self.g),
            ("elementary_charge", self.elementary_charge),
            ("vacuum_permittivity", self.vacuum_permittivity),
            ("boltzmann", self.boltzmann),
            ("amu", self.amu),
            ("electron_mass", self.electron_mass),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(
                    "constants",
                    format!("{name} must be finite and positive, got {value}"),
                ));
            }
        }
        Ok(())
    }

    /// m_P = √(ħc/G).
    pub fn planck_mass(&self) -> f64 {
        (self.hbar * self.c / self.g).sqrt()
    }

    /// Planck mass in micrograms. Only meaningful for SI constant sets.
    pub fn planck_mass_micrograms(&self) -> f64 {
        self.planck_mass() * 1e9
    }

    pub fn planck_mass_amu(&self) -> f64 {
        self.planck_mass() / self.amu
    }

    /// Planck mass as a rest energy in GeV.
    pub fn planck_mass_gev(&self) -> f64 {
        self.planck_mass() * self.c * self.c / (1e9 * self.elementary_charge)
    }

    /// α_G = Gm²/(ħc) = (m/m_P)².
    pub fn gravitational_coupling(&self, mass: f64) -> Result<f64> {
        if !mass.is_finite() || mass < 0.0 {
            return Err(Error::invalid(
                "mass",
                format!("must be finite and non-negative, got {mass}"),
            ));
        }
        Ok(self.g * mass * mass / (self.hbar * self.c))
    }

    /// α_E = q²/(4πε₀ħc) for a clump of total charge `charge`.
    pub fn em_coupling(&self, charge: f64) -> f64 {
        charge * charge / (4.0 * PI * self.vacuum_permittivity * self.hbar * self.c)
    }

    /// ħ/(m_e c).
    pub fn electron_compton_wavelength(&self) -> f64 {
        self.hbar / (self.electron_mass * self.c)
    }
}

/// Free-function form of [`PhysicalConstants::planck_mass`].
pub fn planck_mass(consts: &PhysicalConstants) -> f64 {
    consts.planck_mass()
}

pub fn gravitational_coupling(mass: f64, consts: &PhysicalConstants) -> Result<f64> {
    consts.gravitational_coupling(mass)
}

pub fn em_coupling(charge: f64, consts: &PhysicalConstants) -> f64 {
    consts.em_coupling(charge)
}
