//! The ten conserved charges, their densities and functional derivatives.
//!
//! With `ℋ = ½R(∂ₓΘ)² + V` and `𝒫 = R∂ₓΘ`:
//!
//! | charge | density |
//! |---|---|
//! | `H` | `ℋ` |
//! | `P` | `𝒫` |
//! | `N` | `R` |
//! | `B` | `xR − t𝒫` |
//! | `Δ` | `tℋ − ½x𝒫` |
//! | `K` | `−t²ℋ + 2t(tℋ − ½x𝒫) + ½x²R` |
//! | `D` | `tℋ − RΘ` |
//! | `G` | `xℋ − Θ𝒫` |
//! | `C₁` | `½x²ℋ − xΘ𝒫 + Θ²R` |
//! | `C₂` | `xtℋ − (½x² + tΘ)𝒫 + xΘR` |
//!
//! The explicit weight `x` is [`Grid1D::windowed_coords`], which agrees with
//! the coordinate wherever compactly supported data live.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field1D, FieldMap2D, FieldPair, Grid1D};
use crate::potential::Potential;

/// Symmetry generators, ordered like the extended-space vector fields `X₀ … X₉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    H,
    P,
    N,
    B,
    Delta,
    K,
    D,
    G,
    C1,
    C2,
}

impl Generator {
    pub const ALL: [Generator; 10] = [
        Generator::H,
        Generator::P,
        Generator::N,
        Generator::B,
        Generator::Delta,
        Generator::K,
        Generator::D,
        Generator::G,
        Generator::C1,
        Generator::C2,
    ];

    /// Position in [`Generator::ALL`], equal to the index of the matching vector field.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Generator::H => "H",
            Generator::P => "P",
            Generator::N => "N",
            Generator::B => "B",
            Generator::Delta => "Delta",
            Generator::K => "K",
            Generator::D => "D",
            Generator::G => "G",
            Generator::C1 => "C1",
            Generator::C2 => "C2",
        }
    }

    /// Whether the generator commutes with the vertical translation, i.e. belongs
    /// to the extended Schrödinger algebra.
    pub fn preserves_fiber(self) -> bool {
        matches!(self, Generator::H | Generator::P | Generator::N | Generator::B | Generator::Delta | Generator::K)
    }

    /// Charges surviving the membrane potential `c/R`.
    pub fn survives_membrane(self) -> bool {
        matches!(self, Generator::H | Generator::P | Generator::N | Generator::B | Generator::G | Generator::D)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown generator `{s}`")))
    }
}

/// Pointwise quantities shared by every density.
struct Local<'a> {
    grid: &'a Grid1D,
    pot: &'a Potential,
    t: f64,
    x: Vec<f64>,
    r: &'a [f64],
    theta: &'a [f64],
    u: Vec<f64>,
    r_x: Vec<f64>,
    energy: Vec<f64>,
    momentum: Vec<f64>,
}

impl<'a> Local<'a> {
    fn new(state: &'a FieldPair, pot: &'a Potential) -> Result<Self> {
        let grid = state.grid();
        let r = state.r.values();
        pot.check_floor(r, crate::potential::DEFAULT_DENSITY_FLOOR)?;
        let theta = state.theta.values();
        let u = grid.diff(theta, 1);
        let r_x = grid.diff(r, 1);
        let v = pot.energy_density(r, &r_x);
        let energy = (0..r.len()).map(|j| 0.5 * r[j] * u[j] * u[j] + v[j]).collect();
        let momentum = (0..r.len()).map(|j| r[j] * u[j]).collect();
        Ok(Self { grid, pot, t: state.t, x: grid.windowed_coords(), r, theta, u, r_x, energy, momentum })
    }

    fn integral(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.grid.spacing() * (0..self.r.len()).map(f).sum::<f64>()
    }

    fn d(&self, f: impl Fn(usize) -> f64) -> Vec<f64> {
        let v: Vec<f64> = (0..self.r.len()).map(f).collect();
        self.grid.diff(&v, 1)
    }

    /// `δ/δR ∫ w (½R u² + V)` for the weight `w`.
    fn energy_r(&self, w: impl Fn(usize) -> f64) -> Vec<f64> {
        let weight: Vec<f64> = (0..self.r.len()).map(&w).collect();
        let dv = self.pot.weighted_gradient(self.grid, &weight, self.r, &self.r_x);
        (0..self.r.len()).map(|j| weight[j] * 0.5 * self.u[j] * self.u[j] + dv[j]).collect()
    }

    fn charge(&self, g: Generator) -> f64 {
        let t = self.t;
        let (x, r, th, e, p) = (&self.x, self.r, self.theta, &self.energy, &self.momentum);
        match g {
            Generator::H => self.integral(|j| e[j]),
            Generator::P => self.integral(|j| p[j]),
            Generator::N => self.integral(|j| r[j]),
            Generator::B => self.integral(|j| x[j] * r[j] - t * p[j]),
            Generator::Delta => self.integral(|j| t * e[j] - 0.5 * x[j] * p[j]),
            Generator::K => {
                -t * t * self.charge(Generator::H)
                    + 2.0 * t * self.charge(Generator::Delta)
                    + self.integral(|j| 0.5 * x[j] * x[j] * r[j])
            }
            Generator::D => t * self.charge(Generator::H) - self.integral(|j| r[j] * th[j]),
            Generator::G => self.integral(|j| x[j] * e[j] - th[j] * p[j]),
            Generator::C1 => self.integral(|j| 0.5 * x[j] * x[j] * e[j] - x[j] * th[j] * p[j] + th[j] * th[j] * r[j]),
            Generator::C2 => {
                self.integral(|j| x[j] * t * e[j] - (0.5 * x[j] * x[j] + t * th[j]) * p[j] + x[j] * th[j] * r[j])
            }
        }
    }

    fn gradient(&self, g: Generator) -> (Vec<f64>, Vec<f64>) {
        let t = self.t;
        let n = self.r.len();
        let (x, r, th, u) = (&self.x, self.r, self.theta, &self.u);
        let p = &self.momentum;
        match g {
            Generator::H => (self.energy_r(|_| 1.0), self.d(|j| -p[j])),
            Generator::P => (u.clone(), self.r_x.iter().map(|v| -v).collect()),
            Generator::N => (vec![1.0; n], vec![0.0; n]),
            Generator::B => ((0..n).map(|j| x[j] - t * u[j]).collect(), self.r_x.iter().map(|v| t * v).collect()),
            Generator::Delta => {
                let er = self.energy_r(|_| t);
                let dth = self.d(|j| -t * p[j] + 0.5 * x[j] * r[j]);
                ((0..n).map(|j| er[j] - 0.5 * x[j] * u[j]).collect(), dth)
            }
            Generator::K => {
                let (hr, hth) = self.gradient(Generator::H);
                let (dr, dth) = self.gradient(Generator::Delta);
                (
                    (0..n).map(|j| -t * t * hr[j] + 2.0 * t * dr[j] + 0.5 * x[j] * x[j]).collect(),
                    (0..n).map(|j| -t * t * hth[j] + 2.0 * t * dth[j]).collect(),
                )
            }
            Generator::D => {
                let (hr, hth) = self.gradient(Generator::H);
                ((0..n).map(|j| t * hr[j] - th[j]).collect(), (0..n).map(|j| t * hth[j] - r[j]).collect())
            }
            Generator::G => {
                let er = self.energy_r(|j| x[j]);
                let flux = self.d(|j| -x[j] * p[j] + th[j] * r[j]);
                ((0..n).map(|j| er[j] - th[j] * u[j]).collect(), (0..n).map(|j| -p[j] + flux[j]).collect())
            }
            Generator::C1 => {
                let er = self.energy_r(|j| 0.5 * x[j] * x[j]);
                let flux = self.d(|j| -0.5 * x[j] * x[j] * p[j] + x[j] * th[j] * r[j]);
                (
                    (0..n).map(|j| er[j] - x[j] * th[j] * u[j] + th[j] * th[j]).collect(),
                    (0..n).map(|j| -x[j] * p[j] + 2.0 * th[j] * r[j] + flux[j]).collect(),
                )
            }
            Generator::C2 => {
                let er = self.energy_r(|j| x[j] * t);
                let flux = self.d(|j| -x[j] * t * p[j] + (0.5 * x[j] * x[j] + t * th[j]) * r[j]);
                (
                    (0..n).map(|j| er[j] - (0.5 * x[j] * x[j] + t * th[j]) * u[j] + x[j] * th[j]).collect(),
                    (0..n).map(|j| -t * p[j] + x[j] * r[j] + flux[j]).collect(),
                )
            }
        }
    }
}

/// Value of a charge on a state; explicit time dependence uses `state.t`.
pub fn charge(g: Generator, state: &FieldPair, pot: &Potential) -> Result<f64> {
    Ok(Local::new(state, pot)?.charge(g))
}

/// All ten charges, in [`Generator::ALL`] order.
pub fn all_charges(state: &FieldPair, pot: &Potential) -> Result<[f64; 10]> {
    let local = Local::new(state, pot)?;
    Ok(Generator::ALL.map(|g| local.charge(g)))
}

/// Energy density `ℋ = ½R(∂ₓΘ)² + V`.
pub fn energy_density(state: &FieldPair, pot: &Potential) -> Result<Field1D> {
    Field1D::new(state.grid(), Local::new(state, pot)?.energy)
}

/// Momentum density `𝒫 = R ∂ₓΘ`.
pub fn momentum_density(state: &FieldPair) -> Result<Field1D> {
    Field1D::new(state.grid(), Local::new(state, &Potential::Free)?.momentum)
}

/// Functional derivatives `(δF/δR, δF/δΘ)` of a charge.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalGradient {
    pub d_r: Field1D,
    pub d_theta: Field1D,
}

pub fn functional_gradient(g: Generator, state: &FieldPair, pot: &Potential) -> Result<FunctionalGradient> {
    let (d_r, d_theta) = Local::new(state, pot)?.gradient(g);
    Ok(FunctionalGradient { d_r: Field1D::new(state.grid(), d_r)?, d_theta: Field1D::new(state.grid(), d_theta)? })
}

/// All ten gradients, in [`Generator::ALL`] order.
pub fn all_gradients(state: &FieldPair, pot: &Potential) -> Result<Vec<FunctionalGradient>> {
    let local = Local::new(state, pot)?;
    Generator::ALL
        .iter()
        .map(|&g| {
            let (d_r, d_theta) = local.gradient(g);
            Ok(FunctionalGradient {
                d_r: Field1D::new(state.grid(), d_r)?,
                d_theta: Field1D::new(state.grid(), d_theta)?,
            })
        })
        .collect()
}

/// Normalisation floor for relative drifts of charges that vanish initially.
pub const DRIFT_FLOOR: f64 = 1e-3;

/// Relative deviation `|Q − Q₀| / max(|Q₀|, 10⁻³)`.
pub fn relative_drift(initial: f64, value: f64) -> f64 {
    (value - initial).abs() / initial.abs().max(DRIFT_FLOOR)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftRow {
    pub generator: Generator,
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_value: f64,
    pub max_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub rows: Vec<DriftRow>,
    /// Charge values per stored slice: `(t, [Q_H, …, Q_C2])`.
    pub history: Vec<(f64, [f64; 10])>,
}

impl ConservationReport {
    pub fn drift(&self, g: Generator) -> f64 {
        self.rows[g.index()].max_drift
    }

    /// Generators whose drift stays below `bound`.
    pub fn conserved(&self, bound: f64) -> Vec<Generator> {
        self.rows.iter().filter(|row| row.max_drift < bound).map(|row| row.generator).collect()
    }
}

/// Evaluate every charge along a trajectory.
pub fn conservation_report(traj: &FieldMap2D, pot: &Potential) -> Result<ConservationReport> {
    let history = traj.slices().map(|s| Ok((s.t, all_charges(&s, pot)?))).collect::<Result<Vec<_>>>()?;
    let (_, first) = *history.first().ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?;
    let (_, last) = *history.last().expect("non-empty");
    let rows = Generator::ALL
        .iter()
        .map(|&g| {
            let i = g.index();
            DriftRow {
                generator: g,
                initial: first[i],
                final_value: last[i],
                max_drift: history.iter().map(|(_, q)| relative_drift(first[i], q[i])).fold(0.0, f64::max),
            }
        })
        .collect();
    Ok(ConservationReport { rows, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::presets;

    #[test]
    fn uniform_state_charges() {
        let g = Grid1D::new(64, 10.0).unwrap();
        let s = FieldPair::from_fns(&g, |_| 1.0, |_| 0.0, 0.0).unwrap();
        let q = all_charges(&s, &Potential::Free).unwrap();
        assert_eq!(q[Generator::H.index()], 0.0);
        assert_eq!(q[Generator::P.index()], 0.0);
        assert!((q[Generator::N.index()] - 10.0).abs() < 1e-12);
        assert_eq!(q[Generator::D.index()], 0.0);
        assert!(q[Generator::B.index()].abs() < 1e-13);
    }

    #[test]
    fn momentum_of_windowed_plane_wave() {
        let g = presets::standard_grid();
        let beta = 0.3;
        let s = FieldPair::from_fns(&g, |x| (-x * x / 2.0).exp(), |x| beta * x * presets::flat_top(x, 12.0, 0.5), 0.0)
            .unwrap();
        let p = charge(Generator::P, &s, &Potential::Free).unwrap();
        let n = charge(Generator::N, &s, &Potential::Free).unwrap();
        assert!((p - beta * n).abs() < 1e-10, "{p} {n}");
    }

    #[test]
    fn gradients_of_simple_charges() {
        let g = presets::standard_grid();
        let s = FieldPair::from_fns(&g, |_| 1.0, |_| 0.0, 0.0).unwrap();
        let n = functional_gradient(Generator::N, &s, &Potential::Free).unwrap();
        assert!(n.d_r.values().iter().all(|&v| v == 1.0));
        assert!(n.d_theta.values().iter().all(|&v| v == 0.0));
        let h = functional_gradient(Generator::H, &s, &Potential::Free).unwrap();
        assert!(h.d_r.max_abs() == 0.0 && h.d_theta.max_abs() == 0.0);
    }

    #[test]
    fn generator_names_round_trip() {
        for g in Generator::ALL {
            assert_eq!(g.name().parse::<Generator>().unwrap(), g);
            assert_eq!(Generator::from_index(g.index()), Some(g));
        }
        assert!("Q".parse::<Generator>().is_err());
    }
}
