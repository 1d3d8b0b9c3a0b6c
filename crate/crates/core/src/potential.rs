//! Equation-of-state potentials `V(R)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// Densities below this abort runs with a potential that is singular at `R = 0`.
pub const DEFAULT_DENSITY_FLOOR: f64 = 1e-8;

/// Potential energy density of the fluid.
///
/// `Quantum` is the hydrodynamic image of the Schrödinger equation:
/// `c R³ + (∂ₓR)² / (8R)`. It depends on the density gradient, so its
/// variational derivative is not a pointwise function of `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Free,
    PowerLaw { c: f64, omega: f64 },
    Quantum { c: f64 },
}

impl Potential {
    pub fn power_law(c: f64, omega: f64) -> Result<Self> {
        if !(c.is_finite() && omega.is_finite()) {
            return Err(Error::InvalidParameter("non-finite potential parameters".into()));
        }
        if c == 0.0 {
            return Ok(Potential::Free);
        }
        Ok(Potential::PowerLaw { c, omega })
    }

    /// `V = c/R`.
    pub fn membrane(c: f64) -> Result<Self> {
        Self::power_law(c, -1.0)
    }

    /// `V = c R³`.
    pub fn conformal(c: f64) -> Result<Self> {
        Self::power_law(c, 3.0)
    }

    pub fn is_free(&self) -> bool {
        matches!(self, Potential::Free)
    }

    /// Whether `V` or its derivative blows up at zero density.
    pub fn is_singular(&self) -> bool {
        match *self {
            Potential::Free => false,
            Potential::PowerLaw { omega, .. } => omega < 1.0,
            Potential::Quantum { .. } => true,
        }
    }

    pub fn check_floor(&self, r: &[f64], floor: f64) -> Result<()> {
        if !self.is_singular() {
            return Ok(());
        }
        let min = r.iter().copied().fold(f64::INFINITY, f64::min);
        if min < floor {
            return Err(Error::DensityFloor { min, floor });
        }
        Ok(())
    }

    fn local(&self, r: f64) -> f64 {
        match *self {
            Potential::Free => 0.0,
            Potential::PowerLaw { c, omega } => c * r.powf(omega),
            Potential::Quantum { c } => c * r * r * r,
        }
    }

    fn local_derivative(&self, r: f64) -> f64 {
        match *self {
            Potential::Free => 0.0,
            Potential::PowerLaw { c, omega } => c * omega * r.powf(omega - 1.0),
            Potential::Quantum { c } => 3.0 * c * r * r,
        }
    }

    /// Pointwise `V`; `r_x` is only read by the quantum potential.
    pub fn energy_density(&self, r: &[f64], r_x: &[f64]) -> Vec<f64> {
        match self {
            Potential::Quantum { .. } => {
                r.iter().zip(r_x).map(|(&r, &rx)| self.local(r) + rx * rx / (8.0 * r)).collect()
            }
            _ => r.iter().map(|&r| self.local(r)).collect(),
        }
    }

    /// Variational derivative `δ/δR ∫ w V dx` for a weight `w(x)`.
    pub fn weighted_gradient(&self, grid: &Grid1D, weight: &[f64], r: &[f64], r_x: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = weight.iter().zip(r).map(|(&w, &r)| w * self.local_derivative(r)).collect();
        if let Potential::Quantum { .. } = self {
            let flux: Vec<f64> =
                weight.iter().zip(r.iter().zip(r_x)).map(|(&w, (&r, &rx))| w * rx / (4.0 * r)).collect();
            let div = grid.diff(&flux, 1);
            for (k, o) in out.iter_mut().enumerate() {
                let rx = r_x[k];
                *o += -weight[k] * rx * rx / (8.0 * r[k] * r[k]) - div[k];
            }
        }
        out
    }

    /// `δ/δR ∫ V dx`, which is `dV/dR` for local potentials.
    pub fn gradient(&self, grid: &Grid1D, r: &[f64], r_x: &[f64]) -> Vec<f64> {
        self.weighted_gradient(grid, &vec![1.0; r.len()], r, r_x)
    }
}
