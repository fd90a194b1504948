//! The 2×2 reduced density matrix of the object on the two-path subspace.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ρ = ½·[[1, Γ], [Γ*, 1]] in the basis of the two path states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPathDensityMatrix {
    entries: [[Complex64; 2]; 2],
}

impl TwoPathDensityMatrix {
    /// Builds ρ from a decoherence factor with |Γ| ≤ 1.
    pub fn from_gamma(gamma: Complex64) -> Result<Self> {
        if !(gamma.re.is_finite() && gamma.im.is_finite()) {
            return Err(Error::NonFinite(format!("decoherence factor {gamma}")));
        }
        // Allow |Γ| to exceed 1 by rounding in |re + i·im|.
        if gamma.norm() > 1.0 + 4.0 * f64::EPSILON {
            return Err(Error::invalid("gamma", format!("|Γ| must be ≤ 1, got {}", gamma.norm())));
        }
        let half = Complex64::new(0.5, 0.0);
        Ok(TwoPathDensityMatrix {
            entries: [[half, gamma * 0.5], [gamma.conj() * 0.5, half]],
        })
    }

    pub fn entries(&self) -> &[[Complex64; 2]; 2] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1]
    }

    /// Largest deviation of ρ from ρ†.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.entries[i][j] - self.entries[j][i].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in descending order, from the general 2×2 Hermitian
    /// formula λ = (a+d)/2 ± √(((a−d)/2)² + |b|²).
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.entries[0][0].re;
        let d = self.entries[1][1].re;
        let b = self.entries[0][1];
        let mean = 0.5 * (a + d);
        let half_diff = 0.5 * (a - d);
        let radius = (half_diff * half_diff + b.norm_sqr()).sqrt();
        [mean + radius, mean - radius]
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        let mut p = Complex64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                p += self.entries[i][j] * self.entries[j][i];
            }
        }
        p.re
    }

    /// Fringe visibility 2|ρ₁₂|, equal to |Γ|.
    pub fn visibility(&self) -> f64 {
        2.0 * self.entries[0][1].norm()
    }
}

/// Free-function form of [`TwoPathDensityMatrix::from_gamma`].
pub fn density_matrix(gamma: Complex64) -> Result<TwoPathDensityMatrix> {
    TwoPathDensityMatrix::from_gamma(gamma)
}
