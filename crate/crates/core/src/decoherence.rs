//! Decoherence exponents for electromagnetic dipole and gravitational
//! quadrupole bremsstrahlung, and the zero-emission overlap law.
//!
//! Exponents are evaluated in log space. Γ is real and non-negative
//! throughout (the overall phase of the overlap is dropped); it is clamped
//! to exactly zero once ln Γ falls below [`LN_GAMMA_UNDERFLOW`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

/// Below this exponent `exp` underflows; Γ is reported as 0.
pub const LN_GAMMA_UNDERFLOW: f64 = -745.0;

/// Default β at and above which emission is treated as short-wavelength.
pub const DEFAULT_RELATIVISTIC_BETA: f64 = 0.5;

/// Explicit β and L/(cτ) may disagree by this factor before a warning.
pub const BETA_CONSISTENCY_FACTOR: f64 = 3.0;

/// Order-unity prefactors C (EM, non-relativistic), C′ (EM, relativistic)
/// and C″ (gravitational).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConstants {
    pub c_em: f64,
    pub c_em_relativistic: f64,
    pub c_grav: f64,
    /// Optional infrared cutoff τ_IR (s). When set, each constant is scaled
    /// by max(1, ln(τ/τ_IR)). This is a model extension, off by default.
    pub ir_cutoff_s: Option<f64>,
}

impl Default for ModelConstants {
    fn default() -> Self {
        ModelConstants {
            c_em: 1.0,
            c_em_relativistic: 1.0,
            c_grav: 1.0,
            ir_cutoff_s: None,
        }
    }
}

impl ModelConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_em", self.c_em),
            ("c_em_relativistic", self.c_em_relativistic),
            ("c_grav", self.c_grav),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("model", format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(t) = self.ir_cutoff_s {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::invalid("ir_cutoff_s", format!("must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// Multiplier applied to every constant for a superposition of duration `tau`.
    pub fn log_factor(&self, tau: f64) -> f64 {
        match self.ir_cutoff_s {
            Some(t_ir) => (tau / t_ir).ln().max(1.0),
            None => 1.0,
        }
    }
}

/// Full physical description of one superposition experiment (SI units).
///
/// The paths reach a relative speed v = βc ∼ L/τ and an acceleration
/// a ∼ L/τ²; the acceleration enters no formula here and is exposed only
/// through [`ExperimentConfig::acceleration`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mass_kg: f64,
    #[serde(default)]
    pub charge_c: f64,
    /// Path separation L.
    pub separation_m: f64,
    /// Superposition duration τ.
    pub duration_s: f64,
    /// Overrides L/(cτ) when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default)]
    pub temperature_k: f64,
    /// Wavepacket spread σ_x.
    pub wavepacket_spread_m: f64,
    #[serde(default)]
    pub model: ModelConstants,
    #[serde(default = "default_relativistic_beta")]
    pub relativistic_beta: f64,
}

fn default_relativistic_beta() -> f64 {
    DEFAULT_RELATIVISTIC_BETA
}

impl Default for ExperimentConfig {
    /// A 10⁶ amu neutral clump split by 1 μm for 1 ms at β = 0.5.
    fn default() -> Self {
        let k = PhysicalConstants::codata2018();
        ExperimentConfig {
            mass_kg: 1e6 * k.amu,
            charge_c: 0.0,
            separation_m: 1e-6,
            duration_s: 1e-3,
            beta: Some(0.5),
            temperature_k: 0.0,
            wavepacket_spread_m: 1e-8,
            model: ModelConstants::default(),
            relativistic_beta: DEFAULT_RELATIVISTIC_BETA,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self, consts: &PhysicalConstants) -> Result<()> {
        positive("mass_kg", self.mass_kg)?;
        positive("separation_m", self.separation_m)?;
        positive("duration_s", self.duration_s)?;
        positive("wavepacket_spread_m", self.wavepacket_spread_m)?;
        if !self.charge_c.is_finite() {
            return Err(Error::invalid("charge_c", "must be finite"));
        }
        if !(self.temperature_k.is_finite() && self.temperature_k >= 0.0) {
            return Err(Error::invalid(
                "temperature_k",
                format!("must be non-negative, got {}", self.temperature_k),
            ));
        }
        let beta = self.beta(consts);
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::invalid("beta", format!("must lie in (0, 1), got {beta}")));
        }
        if !(self.relativistic_beta > 0.0 && self.relativistic_beta <= 1.0) {
            return Err(Error::invalid(
                "relativistic_beta",
                format!("must lie in (0, 1], got {}", self.relativistic_beta),
            ));
        }
        self.model.validate()
    }

    /// β: the explicit override if present, else L/(cτ).
    pub fn beta(&self, consts: &PhysicalConstants) -> f64 {
        self.beta.unwrap_or_else(|| self.kinematic_beta(consts))
    }

    /// L/(cτ), regardless of any override.
    pub fn kinematic_beta(&self, consts: &PhysicalConstants) -> f64 {
        self.separation_m / (consts.c * self.duration_s)
    }

    pub fn velocity(&self, consts: &PhysicalConstants) -> f64 {
        self.beta(consts) * consts.c
    }

    pub fn acceleration(&self) -> f64 {
        self.separation_m / (self.duration_s * self.duration_s)
    }

    /// λ_dB = ħ/(mv).
    pub fn de_broglie_wavelength(&self, consts: &PhysicalConstants) -> f64 {
        consts.hbar / (self.mass_kg * self.velocity(consts))
    }

    /// Minimum-uncertainty momentum spread σ_p = ħ/(2σ_x).
    pub fn momentum_spread(&self, consts: &PhysicalConstants) -> f64 {
        consts.hbar / (2.0 * self.wavepacket_spread_m)
    }

    /// Radiated wavelength λ = L/β.
    pub fn radiation_wavelength(&self, consts: &PhysicalConstants) -> f64 {
        self.separation_m / self.beta(consts)
    }

    /// Non-fatal inconsistencies worth reporting to the user.
    pub fn warnings(&self, consts: &PhysicalConstants) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(explicit) = self.beta {
            let kinematic = self.kinematic_beta(consts);
            let ratio = explicit / kinematic;
            if !(1.0 / BETA_CONSISTENCY_FACTOR..=BETA_CONSISTENCY_FACTOR).contains(&ratio) {
                out.push(format!(
                    "explicit beta = {explicit} disagrees with L/(c·tau) = {kinematic:.3e} \
                     by more than a factor of {BETA_CONSISTENCY_FACTOR}"
                ));
            }
        }
        out
    }

    /// Copy with mass and β replaced; everything else kept.
    pub fn with_mass_beta(&self, mass_kg: f64, beta: f64) -> Self {
        ExperimentConfig {
            mass_kg,
            beta: Some(beta),
            ..self.clone()
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and positive, got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Em,
    Gravitational,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Em => "em",
            Channel::Gravitational => "gravitational",
        }
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "em" => Ok(Channel::Em),
            "gravitational" | "grav" => Ok(Channel::Gravitational),
            other => Err(Error::invalid("channel", format!("unknown channel `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// λ ≫ L: many soft quanta are needed to decohere.
    LongWavelength,
    /// λ ≲ L: a single quantum carries full which-path information.
    ShortWavelength,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::LongWavelength => "long_wavelength",
            Regime::ShortWavelength => "short_wavelength",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeClass {
    pub regime: Regime,
    pub radiation_wavelength_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceResult {
    pub channel: Channel,
    /// ln Γ ≤ 0.
    pub ln_gamma: f64,
    pub gamma: f64,
    pub regime: Regime,
    pub radiation_wavelength_m: f64,
    /// Mean emitted quanta per path, −ln Γ under symmetric paths.
    pub expected_quanta: f64,
}

impl DecoherenceResult {
    fn new(channel: Channel, ln_gamma: f64, class: RegimeClass) -> Self {
        DecoherenceResult {
            channel,
            ln_gamma,
            gamma: gamma_from_ln(ln_gamma),
            regime: class.regime,
            radiation_wavelength_m: class.radiation_wavelength_m,
            expected_quanta: -ln_gamma,
        }
    }
}

/// exp(ln Γ), flushed to zero below [`LN_GAMMA_UNDERFLOW`].
pub fn gamma_from_ln(ln_gamma: f64) -> f64 {
    if ln_gamma < LN_GAMMA_UNDERFLOW {
        0.0
    } else {
        ln_gamma.exp()
    }
}

/// −(2α_E/π)·C·β².
pub fn em_exponent(alpha_em: f64, c_em: f64, beta: f64) -> f64 {
    -(2.0 * alpha_em / PI) * c_em * beta * beta
}

/// −α_E·C′·β², the single-quantum (relativistic) dipole form.
pub fn em_exponent_relativistic(alpha_em: f64, c_em_relativistic: f64, beta: f64) -> f64 {
    -alpha_em * c_em_relativistic * beta * beta
}

/// −α_G·C″·β⁴.
pub fn grav_exponent(alpha_grav: f64, c_grav: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    -alpha_grav * c_grav * b2 * b2
}

/// Non-relativistic EM dipole bremsstrahlung, ln Γ_E = −(2α_E/π)·C·β².
///
/// This form is used at every β so that the β² law holds exactly across the
/// regime boundary; see [`em_decoherence_relativistic`] for the C′ form.
pub fn em_decoherence(config: &ExperimentConfig, consts: &PhysicalConstants) -> Result<DecoherenceResult> {
    config.validate(consts)?;
    let beta = config.beta(consts);
    let c = config.model.c_em * config.model.log_factor(config.duration_s);
    let ln_gamma = em_exponent(consts.em_coupling(config.charge_c), c, beta);
    Ok(DecoherenceResult::new(Channel::Em, ln_gamma, classify_regime(config, consts)))
}

/// EM bremsstrahlung in the single-quantum form, ln Γ_E = −α_E·C′·β².
pub fn em_decoherence_relativistic(
    config: &ExperimentConfig,
    consts: &PhysicalConstants,
) -> Result<DecoherenceResult> {
    config.validate(consts)?;
    let beta = config.beta(consts);
    let c = config.model.c_em_relativistic * config.model.log_factor(config.duration_s);
    let ln_gamma = em_exponent_relativistic(consts.em_coupling(config.charge_c), c, beta);
    Ok(DecoherenceResult::new(Channel::Em, ln_gamma, classify_regime(config, consts)))
}

/// Gravitational quadrupole bremsstrahlung, ln Γ_G = −(Gm²/ħc)·C″·β⁴.
pub fn grav_decoherence(config: &ExperimentConfig, consts: &PhysicalConstants) -> Result<DecoherenceResult> {
    config.validate(consts)?;
    let beta = config.beta(consts);
    let c = effective_c_grav(config);
    let ln_gamma = grav_exponent(consts.gravitational_coupling(config.mass_kg)?, c, beta);
    Ok(DecoherenceResult::new(
        Channel::Gravitational,
        ln_gamma,
        classify_regime(config, consts),
    ))
}

pub fn decoherence(
    config: &ExperimentConfig,
    consts: &PhysicalConstants,
    channel: Channel,
) -> Result<DecoherenceResult> {
    match channel {
        Channel::Em => em_decoherence(config, consts),
        Channel::Gravitational => grav_decoherence(config, consts),
    }
}

/// C″ including the optional infrared log factor.
pub fn effective_c_grav(config: &ExperimentConfig) -> f64 {
    config.model.c_grav * config.model.log_factor(config.duration_s)
}

/// Mass at which |ln Γ_G| reaches `target_exponent`: m* = m_P·√(E₀/C″)/β².
pub fn threshold_mass(target_exponent: f64, beta: f64, c_grav: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !(target_exponent > 0.0 && target_exponent.is_finite()) {
        return Err(Error::invalid("target_exponent", format!("must be positive, got {target_exponent}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", format!("must be positive, got {beta}")));
    }
    if !(c_grav > 0.0 && c_grav.is_finite()) {
        return Err(Error::invalid("c_grav", format!("must be positive, got {c_grav}")));
    }
    Ok(consts.planck_mass() * (target_exponent / c_grav).sqrt() / (beta * beta))
}

/// Γ = √(p₁p₂) from the two no-emission probabilities.
pub fn overlap_from_no_emission(p1: f64, p2: f64) -> Result<f64> {
    for (name, p) in [("p1", p1), ("p2", p2)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(name, format!("probability must lie in [0, 1], got {p}")));
        }
    }
    Ok((p1 * p2).sqrt())
}

/// Poisson zero class, exp(−N̄).
pub fn poisson_no_emission(expected_quanta: f64) -> Result<f64> {
    if expected_quanta.is_nan() || expected_quanta < 0.0 {
        return Err(Error::invalid(
            "expected_quanta",
            format!("must be non-negative, got {expected_quanta}"),
        ));
    }
    Ok((-expected_quanta).exp())
}

/// λ = L/β; short-wavelength once β reaches the configured relativistic threshold.
pub fn classify_regime(config: &ExperimentConfig, consts: &PhysicalConstants) -> RegimeClass {
    let beta = config.beta(consts);
    let regime = if beta >= config.relativistic_beta {
        Regime::ShortWavelength
    } else {
        Regime::LongWavelength
    };
    RegimeClass {
        regime,
        radiation_wavelength_m: config.separation_m / beta,
    }
}
