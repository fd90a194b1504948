//! Recovery of ħ and the power-law exponents from visibility data.
//!
//! Gravitational decoherence obeys −ln Γ = (C″G/ħc)·m²·β⁴, so
//!
//! ```text
//! ln(−ln Γ) = ln(C″G/(ħc)) + a·ln m + b·ln β,   a = 2, b = 4
//! ```
//!
//! is linear in ln m and ln β. The fit is weighted linear least squares in
//! that double-log space; with C″, G and c known, the intercept gives ħ.
//! C″ and ħ enter only through their ratio, so C″ must be supplied.

use nalgebra::{DMatrix, DVector};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::decoherence::{decoherence, gamma_from_ln, Channel, ExperimentConfig};
use crate::error::{Error, Result};
use crate::simulator::{simulate, FringeModel, SimulationOptions, SimulationSetup};

/// Rows are generated only where ln Γ lies strictly inside this window.
pub const MEASURABLE_LN_GAMMA: (f64, f64) = (-30.0, -1e-6);

/// Exponents of the gravitational law against which ħ is read off.
pub const HBAR_MASS_EXPONENT: f64 = 2.0;
pub const HBAR_BETA_EXPONENT: f64 = 4.0;

/// Relative singular-value floor below which the design is rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;

pub const DEGENERACY_NOTE: &str =
    "C'' and hbar enter only as C''/hbar; hbar_estimate assumes the supplied C''";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityRow {
    pub m_kg: f64,
    pub beta: f64,
    #[serde(rename = "gamma")]
    pub gamma_measured: f64,
    pub gamma_se: f64,
    pub n_events: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VisibilityDataset {
    pub rows: Vec<VisibilityRow>,
}

impl VisibilityDataset {
    pub fn new(rows: Vec<VisibilityRow>) -> Result<Self> {
        let d = VisibilityDataset { rows };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.rows.iter().enumerate() {
            if !(r.m_kg.is_finite() && r.m_kg > 0.0) {
                return Err(Error::invalid("m_kg", format!("row {i}: must be positive, got {}", r.m_kg)));
            }
            if !(r.beta.is_finite() && r.beta > 0.0) {
                return Err(Error::invalid("beta", format!("row {i}: must be positive, got {}", r.beta)));
            }
            if !(r.gamma_measured > 0.0 && r.gamma_measured <= 1.0) {
                return Err(Error::invalid(
                    "gamma",
                    format!("row {i}: must lie in (0, 1], got {}", r.gamma_measured),
                ));
            }
            if !(r.gamma_se.is_finite() && r.gamma_se >= 0.0) {
                return Err(Error::invalid(
                    "gamma_se",
                    format!("row {i}: must be non-negative, got {}", r.gamma_se),
                ));
            }
        }
        Ok(())
    }

    /// Rows carrying signal (Γ < 1).
    pub fn fit_rows(&self) -> impl Iterator<Item = &VisibilityRow> {
        self.rows.iter().filter(|r| r.gamma_measured < 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationMode {
    /// Exact Γ from the forward model.
    Analytic,
    /// Γ estimated from simulated screen events.
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedRow {
    pub m_kg: f64,
    pub beta: f64,
    pub ln_gamma: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedDataset {
    pub dataset: VisibilityDataset,
    pub dropped: Vec<DroppedRow>,
    pub mode: GenerationMode,
    pub channel: Channel,
    pub seed: u64,
}

/// Fringe pattern used for Monte Carlo rows. Visibility does not depend on
/// the fringe scale, so a unit spacing over ten fringes is used.
pub fn reference_fringe() -> FringeModel {
    FringeModel::new(1.0, 5.0, 0.0).expect("static fringe model is valid")
}

/// Per-row seed drawn from stream `row` of the run seed.
pub fn row_seed(seed: u64, row: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    rng.next_u64()
}

fn forward_ln_gamma(
    m_kg: f64,
    beta: f64,
    template: &ExperimentConfig,
    channel: Channel,
    consts: &PhysicalConstants,
) -> Result<f64> {
    let silent = beta == 0.0 || (channel == Channel::Gravitational && m_kg == 0.0);
    if silent {
        return Ok(0.0);
    }
    Ok(decoherence(&template.with_mass_beta(m_kg, beta), consts, channel)?.ln_gamma)
}

/// Synthetic visibility data over a grid of (m, β) points.
///
/// Points whose ln Γ falls outside [`MEASURABLE_LN_GAMMA`] are dropped and
/// reported, as are Monte Carlo rows whose estimate lands outside (0, 1).
#[allow(clippy::too_many_arguments)]
pub fn generate_dataset(
    grid: &[(f64, f64)],
    template: &ExperimentConfig,
    channel: Channel,
    n_events: usize,
    seed: u64,
    mode: GenerationMode,
    consts: &PhysicalConstants,
    options: &SimulationOptions,
) -> Result<GeneratedDataset> {
    let (lo, hi) = MEASURABLE_LN_GAMMA;
    let mut rows = Vec::new();
    let mut dropped = Vec::new();
    for (i, &(m_kg, beta)) in grid.iter().enumerate() {
        let ln_gamma = forward_ln_gamma(m_kg, beta, template, channel, consts)?;
        let drop = |reason: String| DroppedRow { m_kg, beta, ln_gamma, reason };
        if !(ln_gamma > lo && ln_gamma < hi) {
            let reason = if ln_gamma == 0.0 {
                "gamma = 1: no signal".to_string()
            } else {
                format!("ln gamma = {ln_gamma:e} outside measurable window ({lo}, {hi})")
            };
            dropped.push(drop(reason));
            continue;
        }
        match mode {
            GenerationMode::Analytic => rows.push(VisibilityRow {
                m_kg,
                beta,
                gamma_measured: gamma_from_ln(ln_gamma),
                gamma_se: 0.0,
                n_events: 0,
            }),
            GenerationMode::MonteCarlo => {
                let setup = SimulationSetup::new(-ln_gamma, reference_fringe())?;
                let summary = simulate(&setup, n_events, row_seed(seed, i), options)?;
                let v = summary.visibility.ok_or(Error::TooFewEvents {
                    got: n_events,
                    need: crate::simulator::MIN_EVENTS_FOR_VISIBILITY,
                })?;
                if v.value > 0.0 && v.value < 1.0 {
                    rows.push(VisibilityRow {
                        m_kg,
                        beta,
                        gamma_measured: v.value,
                        gamma_se: v.standard_error,
                        n_events: n_events as u64,
                    });
                } else {
                    dropped.push(drop(format!("measured visibility {} outside (0, 1)", v.value)));
                }
            }
        }
    }
    Ok(GeneratedDataset {
        dataset: VisibilityDataset { rows },
        dropped,
        mode,
        channel,
        seed,
    })
}

/// Which exponents are fitted and which are held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FitMode {
    /// Intercept, mass exponent and β exponent all fitted.
    Free,
    /// Mass exponent fixed (e.g. single-mass data).
    FixedMassExponent { mass: f64 },
    /// Both exponents fixed; only the intercept (hence ħ) is fitted.
    FixedExponents { mass: f64, beta: f64 },
}

impl FitMode {
    fn parameter_count(&self) -> usize {
        match self {
            FitMode::Free => 3,
            FitMode::FixedMassExponent { .. } => 2,
            FitMode::FixedExponents { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub mode: FitMode,
    pub exponent_mass: f64,
    pub exponent_beta: f64,
    /// Intercept of ln(−ln Γ) at m = 1 kg, β = 1; equals ln(C″G/(ħc))
    /// when the exponents are (2, 4).
    pub log_prefactor: f64,
    /// C″G/(c·K) where K·m²β⁴ matches the fitted law at the weighted
    /// centroid of (ln m, ln β).
    pub hbar_estimate: f64,
    pub hbar_se: f64,
    /// Order: log_prefactor, exponent_mass, exponent_beta. Fixed parameters
    /// have zero rows and columns.
    pub covariance: [[f64; 3]; 3],
    /// RMS of unweighted residuals in ln(−ln Γ).
    pub residual_rms: f64,
    pub n_rows: usize,
    pub weighted: bool,
    pub c_grav: f64,
    pub note: String,
}

/// Standard error of ln(−ln Γ) from that of Γ, by the delta method.
pub fn transformed_se(gamma: f64, gamma_se: f64) -> f64 {
    gamma_se / (gamma * gamma.ln().abs())
}

/// Weighted least squares of ln(−ln Γ) on ln m and ln β.
///
/// Rows with Γ = 1 are skipped. Rows are weighted by 1/σ² of the
/// transformed value when every row carries a positive standard error;
/// otherwise the fit is unweighted and the covariance is scaled by the
/// residual variance.
pub fn fit_power_law(
    data: &VisibilityDataset,
    consts: &PhysicalConstants,
    c_grav: f64,
    mode: FitMode,
) -> Result<PowerLawFit> {
    data.validate()?;
    if !(c_grav.is_finite() && c_grav > 0.0) {
        return Err(Error::invalid("c_grav", format!("must be positive, got {c_grav}")));
    }
    let rows: Vec<&VisibilityRow> = data.fit_rows().collect();
    let p = mode.parameter_count();
    let mut distinct: Vec<(f64, f64)> = rows.iter().map(|r| (r.m_kg, r.beta)).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("validated finite"));
    distinct.dedup();
    if distinct.len() < p {
        return Err(Error::InsufficientData(format!(
            "{} distinct (m, beta) points with gamma < 1, need {p}",
            distinct.len()
        )));
    }

    let weighted = rows.iter().all(|r| r.gamma_se > 0.0);
    let n = rows.len();
    let mut x = DMatrix::<f64>::zeros(n, p);
    let mut y = DVector::<f64>::zeros(n);
    let mut sqrt_w = DVector::<f64>::from_element(n, 1.0);
    for (i, r) in rows.iter().enumerate() {
        let t = (-r.gamma_measured.ln()).ln();
        let (lm, lb) = (r.m_kg.ln(), r.beta.ln());
        if !(t.is_finite() && lm.is_finite() && lb.is_finite()) {
            return Err(Error::NonFinite(format!("row {i}: transformed value {t}")));
        }
        x[(i, 0)] = 1.0;
        y[i] = match mode {
            FitMode::Free => {
                x[(i, 1)] = lm;
                x[(i, 2)] = lb;
                t
            }
            FitMode::FixedMassExponent { mass } => {
                x[(i, 1)] = lb;
                t - mass * lm
            }
            FitMode::FixedExponents { mass, beta } => t - mass * lm - beta * lb,
        };
        if weighted {
            let se = transformed_se(r.gamma_measured, r.gamma_se);
            if !(se.is_finite() && se > 0.0) {
                return Err(Error::NonFinite(format!("row {i}: transformed standard error {se}")));
            }
            sqrt_w[i] = 1.0 / se;
        }
    }

    let xw = DMatrix::from_fn(n, p, |i, j| x[(i, j)] * sqrt_w[i]);
    let yw = y.component_mul(&sqrt_w);
    let svd = xw.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    if s_max.is_nan() || s_max <= 0.0 || s_min <= RANK_TOLERANCE * s_max {
        return Err(Error::RankDeficient(format!(
            "singular values {:?}; hold an exponent fixed for data that does not vary in m or beta",
            svd.singular_values.as_slice()
        )));
    }
    let coef = svd
        .solve(&yw, 0.0)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let inv_s2 = svd.singular_values.map(|s| 1.0 / (s * s));
    let mut cov_free = v_t.transpose() * DMatrix::from_diagonal(&inv_s2) * v_t;

    let resid = &y - &x * &coef;
    let residual_rms = (resid.norm_squared() / n as f64).sqrt();
    if !weighted {
        let dof = n.saturating_sub(p);
        let s2 = if dof > 0 { resid.norm_squared() / dof as f64 } else { 0.0 };
        cov_free *= s2;
    }

    // Map free parameters back to (log_prefactor, mass, beta).
    let slots: &[usize] = match mode {
        FitMode::Free => &[0, 1, 2],
        FitMode::FixedMassExponent { .. } => &[0, 2],
        FitMode::FixedExponents { .. } => &[0],
    };
    let mut covariance = [[0.0; 3]; 3];
    for (a, &sa) in slots.iter().enumerate() {
        for (b, &sb) in slots.iter().enumerate() {
            // Symmetrise against rounding in V Σ⁻² Vᵀ.
            covariance[sa][sb] = 0.5 * (cov_free[(a, b)] + cov_free[(b, a)]);
        }
    }
    let (exponent_mass, exponent_beta) = match mode {
        FitMode::Free => (coef[1], coef[2]),
        FitMode::FixedMassExponent { mass } => (mass, coef[1]),
        FitMode::FixedExponents { mass, beta } => (mass, beta),
    };
    let log_prefactor = coef[0];

    // ħ from the fitted law compared against m²β⁴ at the weighted centroid
    // of the data, rather than at m = 1 kg, β = 1 where the intercept lives.
    // Identical to the intercept form when the exponents are (2, 4).
    let w_sum: f64 = sqrt_w.iter().map(|s| s * s).sum();
    let centroid = |f: fn(&VisibilityRow) -> f64| {
        rows.iter()
            .zip(sqrt_w.iter())
            .map(|(r, s)| s * s * f(r).ln())
            .sum::<f64>()
            / w_sum
    };
    let (ln_m_bar, ln_beta_bar) = (centroid(|r| r.m_kg), centroid(|r| r.beta));
    let anchored = log_prefactor
        + (exponent_mass - HBAR_MASS_EXPONENT) * ln_m_bar
        + (exponent_beta - HBAR_BETA_EXPONENT) * ln_beta_bar;
    let grad = [1.0, ln_m_bar, ln_beta_bar];
    let mut anchored_var = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            anchored_var += grad[a] * covariance[a][b] * grad[b];
        }
    }
    let hbar_estimate = c_grav * consts.g * (-anchored).exp() / consts.c;
    if !(hbar_estimate.is_finite() && hbar_estimate > 0.0) {
        return Err(Error::NonFinite(format!("hbar estimate {hbar_estimate}")));
    }
    Ok(PowerLawFit {
        mode,
        exponent_mass,
        exponent_beta,
        log_prefactor,
        hbar_estimate,
        hbar_se: hbar_estimate * anchored_var.max(0.0).sqrt(),
        covariance,
        residual_rms,
        n_rows: n,
        weighted,
        c_grav,
        note: DEGENERACY_NOTE.to_string(),
    })
}
