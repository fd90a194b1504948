//! Run configuration file and its command-line overrides.

use std::path::Path;

use clap::Args;
use decoh_core::constants::{ConstantSet, PhysicalConstants};
use decoh_core::regime::ValidatorSettings;
use decoh_core::simulator::{ScreenGeometry, SimulationOptions};
use decoh_core::sweep::SweepSpec;
use decoh_core::ExperimentConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything a run depends on. Every section is optional in the file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub constants: ConstantSet,
    pub seed: u64,
    pub experiment: ExperimentConfig,
    pub validator: ValidatorSettings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<ScreenGeometry>,
    pub simulation: SimulationOptions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("reading {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("parsing {}: {e}", path.display())))
    }

    pub fn physical_constants(&self) -> PhysicalConstants {
        self.constants.into()
    }
}

/// Flags overriding fields of the `experiment` section.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    #[arg(long, conflicts_with = "mass_amu")]
    pub mass_kg: Option<f64>,
    #[arg(long)]
    pub mass_amu: Option<f64>,
    #[arg(long, conflicts_with = "charge_e")]
    pub charge_c: Option<f64>,
    /// Charge in units of the elementary charge.
    #[arg(long)]
    pub charge_e: Option<f64>,
    /// Path separation L.
    #[arg(long)]
    pub separation_m: Option<f64>,
    /// Superposition duration τ.
    #[arg(long)]
    pub duration_s: Option<f64>,
    /// Relative path speed v/c; defaults to L/(cτ) when neither file nor flag sets it.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub temperature_k: Option<f64>,
    /// Wavepacket spread σ_x.
    #[arg(long)]
    pub spread_m: Option<f64>,
    #[arg(long)]
    pub c_em: Option<f64>,
    #[arg(long)]
    pub c_em_relativistic: Option<f64>,
    #[arg(long)]
    pub c_grav: Option<f64>,
    /// Enables the logarithmic duration dependence of the model constants.
    #[arg(long)]
    pub ir_cutoff_s: Option<f64>,
    #[arg(long)]
    pub relativistic_beta: Option<f64>,
    /// Regime-check strictness factor.
    #[arg(long)]
    pub strictness: Option<f64>,
}

impl ExperimentArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let k = cfg.physical_constants();
        let e = &mut cfg.experiment;
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut e.mass_kg, self.mass_kg.or(self.mass_amu.map(|a| a * k.amu)));
        set(&mut e.charge_c, self.charge_c.or(self.charge_e.map(|q| q * k.elementary_charge)));
        set(&mut e.separation_m, self.separation_m);
        set(&mut e.duration_s, self.duration_s);
        if self.beta.is_some() {
            e.beta = self.beta;
        }
        set(&mut e.temperature_k, self.temperature_k);
        set(&mut e.wavepacket_spread_m, self.spread_m);
        set(&mut e.model.c_em, self.c_em);
        set(&mut e.model.c_em_relativistic, self.c_em_relativistic);
        set(&mut e.model.c_grav, self.c_grav);
        if self.ir_cutoff_s.is_some() {
            e.model.ir_cutoff_s = self.ir_cutoff_s;
        }
        set(&mut e.relativistic_beta, self.relativistic_beta);
        set(&mut cfg.validator.strictness, self.strictness);
    }
}
