//! Feasibility sweeps over (m, β) and the bundled reference scenarios.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::decoherence::{
    decoherence, effective_c_grav, grav_exponent, threshold_mass, Channel, ExperimentConfig, Regime,
};
use crate::error::{Error, Result};
use crate::regime::{validate, ValidatorSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelSelect {
    Em,
    Gravitational,
    Both,
}

impl ChannelSelect {
    pub fn channels(self) -> &'static [Channel] {
        match self {
            ChannelSelect::Em => &[Channel::Em],
            ChannelSelect::Gravitational => &[Channel::Gravitational],
            ChannelSelect::Both => &[Channel::Em, Channel::Gravitational],
        }
    }
}

impl std::str::FromStr for ChannelSelect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "em" => Ok(ChannelSelect::Em),
            "gravitational" | "grav" => Ok(ChannelSelect::Gravitational),
            "both" => Ok(ChannelSelect::Both),
            other => Err(Error::invalid("channel", format!("unknown channel `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub m_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub channel: ChannelSelect,
    /// Target values of |ln Γ_G| for the frontier mass m*(β).
    #[serde(default)]
    pub thresholds: Vec<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        check_grid("m_grid", &self.m_grid, |m| m > 0.0)?;
        check_grid("beta_grid", &self.beta_grid, |b| b > 0.0 && b < 1.0)?;
        if let Some(t) = self.thresholds.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::invalid("thresholds", format!("must be positive, got {t}")));
        }
        Ok(())
    }
}

fn check_grid(name: &'static str, grid: &[f64], in_range: impl Fn(f64) -> bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(name, "must not be empty"));
    }
    if let Some(v) = grid.iter().find(|v| !(v.is_finite() && in_range(**v))) {
        return Err(Error::invalid(name, format!("value {v} out of range")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(name, "must be strictly ascending"));
    }
    Ok(())
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut v: Vec<f64> = (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect();
            v[0] = lo;
            v[n - 1] = hi;
            v
        }
    }
}

pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// One (m, β, channel) evaluation. Column order is the CSV layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m_kg: f64,
    pub beta: f64,
    pub channel: Channel,
    pub ln_gamma: f64,
    pub gamma: f64,
    pub regime: Regime,
    pub valid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub threshold: f64,
    pub beta: f64,
    /// m_P·√(E₀/C″)/β².
    pub m_star_closed_kg: f64,
    /// Log-log interpolation along the mass grid; empty when the grid does not bracket m*.
    pub m_star_grid_kg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub frontier: Vec<FrontierPoint>,
}

/// Evaluates every grid point. Rows are ordered by mass, then β, then channel.
pub fn run_sweep(
    spec: &SweepSpec,
    template: &ExperimentConfig,
    consts: &PhysicalConstants,
    settings: &ValidatorSettings,
) -> Result<SweepTable> {
    spec.validate()?;
    let points: Vec<(f64, f64)> = spec
        .m_grid
        .iter()
        .flat_map(|&m| spec.beta_grid.iter().map(move |&b| (m, b)))
        .collect();
    let rows: Vec<Vec<SweepRow>> = points
        .par_iter()
        .map(|&(m, beta)| {
            let cfg = template.with_mass_beta(m, beta);
            let valid = validate(&cfg, consts, settings).overall_valid;
            spec.channel
                .channels()
                .iter()
                .map(|&ch| {
                    let r = decoherence(&cfg, consts, ch)?;
                    Ok(SweepRow {
                        m_kg: m,
                        beta,
                        channel: ch,
                        ln_gamma: r.ln_gamma,
                        gamma: r.gamma,
                        regime: r.regime,
                        valid,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let rows = rows.into_iter().flatten().collect();

    let c_grav = effective_c_grav(template);
    let mut frontier = Vec::with_capacity(spec.thresholds.len() * spec.beta_grid.len());
    for &threshold in &spec.thresholds {
        for &beta in &spec.beta_grid {
            frontier.push(FrontierPoint {
                threshold,
                beta,
                m_star_closed_kg: threshold_mass(threshold, beta, c_grav, consts)?,
                m_star_grid_kg: grid_frontier(&spec.m_grid, beta, threshold, c_grav, consts)?,
            });
        }
    }
    Ok(SweepTable { rows, frontier })
}

/// Crossing of |ln Γ_G| through `threshold` along `m_grid`, interpolated
/// linearly in (ln m, ln |ln Γ_G|).
pub fn grid_frontier(
    m_grid: &[f64],
    beta: f64,
    threshold: f64,
    c_grav: f64,
    consts: &PhysicalConstants,
) -> Result<Option<f64>> {
    let mut prev: Option<(f64, f64)> = None;
    for &m in m_grid {
        let y = -grav_exponent(consts.gravitational_coupling(m)?, c_grav, beta);
        let point = (m.ln(), y.ln());
        if let Some((lm0, ly0)) = prev {
            let (lm1, ly1) = point;
            let lt = threshold.ln();
            if ly0 <= lt && lt <= ly1 && ly1 > ly0 {
                return Ok(Some((lm0 + (lt - ly0) * (lm1 - lm0) / (ly1 - ly0)).exp()));
            }
        }
        prev = Some(point);
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceScenario {
    pub label: String,
    pub mass_kg: f64,
    pub source_note: String,
}

/// β values at which every scenario is evaluated.
pub const SCENARIO_BETAS: [f64; 3] = [1e-9, 0.1, 0.9];

/// Masses (amu) of demonstrated and proposed superposition experiments.
pub const SCENARIO_MASSES_AMU: [(f64, &str, &str); 7] = [
    (1e4, "molecules-1e4", "large organic molecules, interfered in the lab"),
    (1e6, "clusters-1e6", "reachable by scaling current molecule interferometers"),
    (1e7, "ground-limit-1e7", "Earth's gravity limits ground-based interferometers"),
    (1e10, "space-1e10", "space-based interferometry platforms"),
    (1e14, "lead-spheres-1e14", "levitated lead spheres, proposed"),
    (1e16, "mirrors-1e16", "oscillating micromirrors, proposed"),
    (1.3e19, "planck-1.3e19", "Planck mass"),
];

pub fn reference_scenarios(consts: &PhysicalConstants) -> Vec<ReferenceScenario> {
    SCENARIO_MASSES_AMU
        .iter()
        .map(|&(amu, label, note)| ReferenceScenario {
            label: label.to_string(),
            mass_kg: amu * consts.amu,
            source_note: note.to_string(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// |ln Γ| < 10⁻³
    Negligible,
    /// 10⁻³ ≤ |ln Γ| < 0.1
    Marginal,
    /// |ln Γ| ≥ 0.1
    Strong,
}

impl Verdict {
    pub fn from_ln_gamma(ln_gamma: f64) -> Verdict {
        let e = ln_gamma.abs();
        if e < 1e-3 {
            Verdict::Negligible
        } else if e < 0.1 {
            Verdict::Marginal
        } else {
            Verdict::Strong
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub label: String,
    pub mass_kg: f64,
    pub mass_amu: f64,
    pub beta: f64,
    pub ln_gamma_grav: f64,
    pub verdict: Verdict,
}

/// Gravitational exponent of every reference scenario at each of [`SCENARIO_BETAS`].
pub fn run_scenarios(consts: &PhysicalConstants, c_grav: f64) -> Result<Vec<ScenarioRow>> {
    let mut out = Vec::new();
    for s in reference_scenarios(consts) {
        let alpha = consts.gravitational_coupling(s.mass_kg)?;
        for &beta in &SCENARIO_BETAS {
            let ln_gamma = grav_exponent(alpha, c_grav, beta);
            out.push(ScenarioRow {
                label: s.label.clone(),
                mass_kg: s.mass_kg,
                mass_amu: s.mass_kg / consts.amu,
                beta,
                ln_gamma_grav: ln_gamma,
                verdict: Verdict::from_ln_gamma(ln_gamma),
            });
        }
    }
    Ok(out)
}
