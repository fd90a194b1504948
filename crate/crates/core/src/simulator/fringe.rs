//! Screen geometry and the far-field two-path fringe pattern.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::decoherence::ExperimentConfig;
use crate::error::{Error, Result};

/// Upper bound on fringes across the screen; beyond this `kx` loses precision.
pub const MAX_FRINGES: f64 = 1e6;

/// Minimum inverse-CDF grid cells per fringe.
pub const MIN_CELLS_PER_FRINGE: usize = 64;

/// Physical layout of the two-path interferometer and detection screen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreenGeometry {
    pub slit_separation_m: f64,
    pub screen_distance_m: f64,
    /// Detections are recorded on [−W, W].
    pub screen_halfwidth_m: f64,
    #[serde(default)]
    pub fringe_phase_rad: f64,
}

impl ScreenGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("slit_separation_m", self.slit_separation_m),
            ("screen_distance_m", self.screen_distance_m),
            ("screen_halfwidth_m", self.screen_halfwidth_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and positive, got {v}")));
            }
        }
        if !self.fringe_phase_rad.is_finite() {
            return Err(Error::invalid("fringe_phase_rad", "must be finite"));
        }
        Ok(())
    }

    /// Far-field spacing d = λ_dB·D/L for a particle of the given de Broglie wavelength.
    pub fn fringe_spacing(&self, de_broglie_wavelength: f64) -> f64 {
        de_broglie_wavelength * self.screen_distance_m / self.slit_separation_m
    }

    /// Fringe model for the particle described by `config`.
    pub fn fringe_model(&self, config: &ExperimentConfig, consts: &PhysicalConstants) -> Result<FringeModel> {
        self.validate()?;
        FringeModel::new(
            self.fringe_spacing(config.de_broglie_wavelength(consts)),
            self.screen_halfwidth_m,
            self.fringe_phase_rad,
        )
    }
}

/// Coherent intensity ∝ 1 + cos(2πx/d + φ) on [−W, W].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeModel {
    pub spacing: f64,
    pub halfwidth: f64,
    pub phase: f64,
}

impl FringeModel {
    pub fn new(spacing: f64, halfwidth: f64, phase: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::invalid("fringe_spacing", format!("must be positive, got {spacing}")));
        }
        if !(halfwidth.is_finite() && halfwidth > 0.0) {
            return Err(Error::invalid("screen_halfwidth", format!("must be positive, got {halfwidth}")));
        }
        if !phase.is_finite() {
            return Err(Error::invalid("fringe_phase", "must be finite"));
        }
        let fringes = 2.0 * halfwidth / spacing;
        if fringes < 1.0 {
            return Err(Error::invalid(
                "screen_halfwidth",
                format!("screen must span at least one fringe, spans {fringes:.3}"),
            ));
        }
        if fringes > MAX_FRINGES {
            return Err(Error::invalid(
                "screen_halfwidth",
                format!("screen spans {fringes:.3e} fringes, more than {MAX_FRINGES:e}"),
            ));
        }
        Ok(FringeModel { spacing, halfwidth, phase })
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.spacing
    }

    pub fn fringe_count(&self) -> f64 {
        2.0 * self.halfwidth / self.spacing
    }

    pub fn phase_at(&self, x: f64) -> f64 {
        self.wavenumber() * x + self.phase
    }

    /// Unnormalised coherent density 1 + cos θ.
    pub fn coherent_intensity(&self, x: f64) -> f64 {
        1.0 + self.phase_at(x).cos()
    }

    /// Distance from `x` to the nearest trough (θ ≡ π mod 2π).
    pub fn distance_to_trough(&self, x: f64) -> f64 {
        let r = (self.phase_at(x) - PI).rem_euclid(TAU);
        r.min(TAU - r) / self.wavenumber()
    }

    /// E[cos θ] under the uniform density on [−W, W].
    pub fn uniform_cos_mean(&self) -> f64 {
        let kw = self.wavenumber() * self.halfwidth;
        self.phase.cos() * kw.sin() / kw
    }

    /// E[cos θ] under the normalised coherent density.
    pub fn coherent_cos_mean(&self) -> f64 {
        let kw = self.wavenumber() * self.halfwidth;
        let b = self.uniform_cos_mean();
        let cos2_mean = 0.5 + (2.0 * self.phase).cos() * (2.0 * kw).sin() / (4.0 * kw);
        (b + cos2_mean) / (1.0 + b)
    }

    /// Unnormalised coherent CDF, ∫₋W^x (1 + cos θ) dx'.
    pub fn coherent_cdf(&self, x: f64) -> f64 {
        let k = self.wavenumber();
        (x + self.halfwidth) + (self.phase_at(x).sin() - self.phase_at(-self.halfwidth).sin()) / k
    }
}

/// Inverse-CDF sampler for the coherent density on a uniform grid with
/// linear interpolation between nodes.
#[derive(Debug, Clone)]
pub struct CoherentSampler {
    lo: f64,
    step: f64,
    cdf: Vec<f64>,
}

impl CoherentSampler {
    /// `grid_points` is raised to at least [`MIN_CELLS_PER_FRINGE`] cells per fringe.
    pub fn new(model: &FringeModel, grid_points: usize) -> Result<Self> {
        if grid_points < 2 {
            return Err(Error::invalid("grid_points", "need at least 2 grid points"));
        }
        let min_cells = (model.fringe_count().ceil() as usize).saturating_mul(MIN_CELLS_PER_FRINGE);
        let n = grid_points.max(min_cells + 1);
        let lo = -model.halfwidth;
        let step = 2.0 * model.halfwidth / (n - 1) as f64;
        let mut cdf: Vec<f64> = (0..n)
            .map(|i| model.coherent_cdf(lo + step * i as f64))
            .collect();
        // Pin the ends and enforce monotonicity against rounding.
        cdf[0] = 0.0;
        for i in 1..n {
            if cdf[i] < cdf[i - 1] {
                cdf[i] = cdf[i - 1];
            }
        }
        let total = cdf[n - 1];
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::NonFinite(format!("coherent normalisation {total}")));
        }
        for v in &mut cdf {
            *v /= total;
        }
        cdf[n - 1] = 1.0;
        Ok(CoherentSampler { lo, step, cdf })
    }

    pub fn grid_points(&self) -> usize {
        self.cdf.len()
    }

    /// Maps u ∈ [0, 1) to a screen position.
    pub fn sample(&self, u: f64) -> f64 {
        let n = self.cdf.len();
        // First node with cdf > u, so u lies in cell [j-1, j].
        let j = self.cdf.partition_point(|&c| c <= u).clamp(1, n - 1);
        let (c0, c1) = (self.cdf[j - 1], self.cdf[j]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.lo + self.step * ((j - 1) as f64 + frac)
    }
}
