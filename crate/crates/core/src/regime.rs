//! Validity checks for the semi-classical treatment of the two paths and
//! for the avoidance of background decoherence.
//!
//! Every "≫" is read as "exceeds by at least the strictness factor". A
//! check's margin is the raw ratio (big side)/(small side); the check
//! passes when the margin exceeds the strictness.

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::decoherence::ExperimentConfig;

pub const DEFAULT_STRICTNESS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidatorSettings {
    pub strictness: f64,
    /// Mass (kg) whose Compton wavelength bounds the radiation wavelength.
    /// The electron mass when unset.
    pub constituent_mass_kg: Option<f64>,
}

impl Default for ValidatorSettings {
    fn default() -> Self {
        ValidatorSettings {
            strictness: DEFAULT_STRICTNESS,
            constituent_mass_kg: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// λ_rad ≫ λ_C: radiated energy far below the constituents' rest energy.
    Compton,
    /// σ_x ≫ λ_dB: the paths have a sharply defined velocity.
    VelocityDefinition,
    /// ħc/(k_B T) ≫ L: thermal photons cannot resolve the paths.
    Blackbody,
    /// q = 0: no electromagnetic bremsstrahlung.
    Neutrality,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Compton => "compton",
            CheckKind::VelocityDefinition => "velocity_definition",
            CheckKind::Blackbody => "blackbody",
            CheckKind::Neutrality => "neutrality",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub kind: CheckKind,
    pub satisfied: bool,
    /// Infinite when the condition holds trivially (T = 0, q = 0).
    #[serde(with = "margin_serde")]
    pub margin: f64,
    /// Required checks gate `overall_valid`; others are informational.
    pub required: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub checks: Vec<Check>,
    pub overall_valid: bool,
    pub strictness: f64,
}

impl RegimeReport {
    pub fn check(&self, kind: CheckKind) -> Option<&Check> {
        self.checks.iter().find(|c| c.kind == kind)
    }

    /// Plain-text table, one row per check.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<20} {:>5} {:>12} {:>9}  {}\n",
            "check", "ok", "margin", "required", "detail"
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{:<20} {:>5} {:>12.4e} {:>9}  {}\n",
                c.kind.name(),
                if c.satisfied { "yes" } else { "NO" },
                c.margin,
                c.required,
                c.detail
            ));
        }
        out.push_str(&format!(
            "overall: {} (strictness {})\n",
            if self.overall_valid { "valid" } else { "INVALID" },
            self.strictness
        ));
        out
    }
}

/// Evaluates every check for `config`. Physics violations surface as failed
/// checks, never as errors.
pub fn validate(
    config: &ExperimentConfig,
    consts: &PhysicalConstants,
    settings: &ValidatorSettings,
) -> RegimeReport {
    let strictness = settings.strictness;
    let passes = |margin: f64| margin > strictness;
    let mut checks = Vec::with_capacity(4);

    let lambda_rad = config.radiation_wavelength(consts);
    let constituent = settings.constituent_mass_kg.unwrap_or(consts.electron_mass);
    let lambda_c = consts.hbar / (constituent * consts.c);
    let margin = lambda_rad / lambda_c;
    checks.push(Check {
        kind: CheckKind::Compton,
        satisfied: passes(margin),
        margin,
        required: true,
        detail: format!("lambda_rad = {lambda_rad:.3e} m, lambda_C = {lambda_c:.3e} m"),
    });

    let lambda_db = config.de_broglie_wavelength(consts);
    let margin = config.wavepacket_spread_m / lambda_db;
    checks.push(Check {
        kind: CheckKind::VelocityDefinition,
        satisfied: passes(margin),
        margin,
        required: true,
        detail: format!(
            "sigma_x = {:.3e} m, lambda_dB = {lambda_db:.3e} m, sigma_p/m = {:.3e} m/s, v = {:.3e} m/s",
            config.wavepacket_spread_m,
            config.momentum_spread(consts) / config.mass_kg,
            config.velocity(consts),
        ),
    });

    if config.temperature_k == 0.0 {
        checks.push(Check {
            kind: CheckKind::Blackbody,
            satisfied: true,
            margin: f64::INFINITY,
            required: true,
            detail: "T = 0: no thermal radiation".to_string(),
        });
    } else {
        let lambda_th = consts.hbar * consts.c / (consts.boltzmann * config.temperature_k);
        let margin = lambda_th / config.separation_m;
        checks.push(Check {
            kind: CheckKind::Blackbody,
            satisfied: passes(margin),
            margin,
            required: true,
            detail: format!("lambda_th = {lambda_th:.3e} m, L = {:.3e} m", config.separation_m),
        });
    }

    let neutral = config.charge_c == 0.0;
    checks.push(Check {
        kind: CheckKind::Neutrality,
        satisfied: neutral,
        margin: if neutral { f64::INFINITY } else { 0.0 },
        required: false,
        detail: if neutral {
            "q = 0: no electromagnetic bremsstrahlung".to_string()
        } else {
            format!("q = {:.3e} C: electromagnetic bremsstrahlung present", config.charge_c)
        },
    });

    let overall_valid = checks.iter().filter(|c| c.required).all(|c| c.satisfied);
    RegimeReport {
        checks,
        overall_valid,
        strictness,
    }
}

// serde_json cannot carry infinities; write them as the string "inf".
mod margin_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("bad margin `{s}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::codata2018()
    }

    fn ten_m_per_s() -> ExperimentConfig {
        let k = consts();
        ExperimentConfig {
            mass_kg: 1e6 * k.amu,
            beta: Some(10.0 / k.c),
            wavepacket_spread_m: 1e-8,
            ..Default::default()
        }
    }

    #[test]
    fn de_broglie_check_for_heavy_slow_clump() {
        let k = consts();
        let cfg = ten_m_per_s();
        // ħ/(m v) = 1.0546e-34 / (1.6605e-21 · 10) by hand
        let lambda_db = cfg.de_broglie_wavelength(&k);
        assert!((lambda_db - 6.3508e-15).abs() < 1e-18);
        let r = validate(&cfg, &k, &ValidatorSettings::default());
        let c = r.check(CheckKind::VelocityDefinition).unwrap();
        assert!(c.satisfied);
        assert!((c.margin - 1e-8 / lambda_db).abs() < 1e-3);
    }

    #[test]
    fn zero_temperature_is_trivially_fine() {
        let r = validate(&ten_m_per_s(), &consts(), &ValidatorSettings::default());
        let c = r.check(CheckKind::Blackbody).unwrap();
        assert!(c.satisfied);
        assert!(c.margin.is_infinite());
    }

    #[test]
    fn compton_boundary_fails_at_unit_margin() {
        let k = consts();
        let lambda_c = k.electron_compton_wavelength();
        let cfg = ExperimentConfig {
            separation_m: 0.5 * lambda_c,
            beta: Some(0.5),
            ..Default::default()
        };
        let r = validate(&cfg, &k, &ValidatorSettings::default());
        let c = r.check(CheckKind::Compton).unwrap();
        assert!((c.margin - 1.0).abs() < 1e-12);
        assert!(!c.satisfied);
        assert!(!r.overall_valid);
    }

    #[test]
    fn constituent_mass_override() {
        let k = consts();
        let cfg = ExperimentConfig::default();
        let electron = validate(&cfg, &k, &ValidatorSettings::default());
        let nucleon = validate(
            &cfg,
            &k,
            &ValidatorSettings {
                constituent_mass_kg: Some(k.amu),
                ..Default::default()
            },
        );
        let ratio = nucleon.check(CheckKind::Compton).unwrap().margin
            / electron.check(CheckKind::Compton).unwrap().margin;
        assert!((ratio - k.amu / k.electron_mass).abs() / ratio < 1e-12);
    }

    #[test]
    fn hot_body_fails_blackbody_check() {
        let k = consts();
        let cfg = ExperimentConfig {
            separation_m: 1e-2,
            temperature_k: 300.0,
            ..Default::default()
        };
        let r = validate(&cfg, &k, &ValidatorSettings::default());
        assert!(!r.check(CheckKind::Blackbody).unwrap().satisfied);
        assert!(!r.overall_valid);
    }

    #[test]
    fn charge_is_informational() {
        let k = consts();
        let cfg = ExperimentConfig {
            charge_c: k.elementary_charge,
            ..Default::default()
        };
        let r = validate(&cfg, &k, &ValidatorSettings::default());
        let c = r.check(CheckKind::Neutrality).unwrap();
        assert!(!c.satisfied && !c.required);
        assert!(r.overall_valid);
    }

    #[test]
    fn overall_is_and_of_required() {
        let r = validate(&ExperimentConfig::default(), &consts(), &ValidatorSettings::default());
        let expect = r.checks.iter().filter(|c| c.required).all(|c| c.satisfied);
        assert_eq!(r.overall_valid, expect);
        for c in &r.checks {
            if c.required {
                assert_eq!(c.satisfied, c.margin > r.strictness);
            }
        }
    }

    #[test]
    fn report_json_round_trip() {
        let r = validate(&ExperimentConfig::default(), &consts(), &ValidatorSettings::default());
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"inf\""));
        let back: RegimeReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        assert!(r.to_table().contains("velocity_definition"));
    }
}
