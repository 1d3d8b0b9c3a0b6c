//! Time evolution of the fluid equations
//!
//! ```text
//! ∂ₜR + ∂ₓ(R ∂ₓΘ) = 0,      ∂ₜΘ + ½(∂ₓΘ)² + V'(R) = 0
//! ```
//!
//! with a pseudo-spectral right-hand side and classical RK4 stepping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field1D, FieldMap2D, FieldPair, Grid1D, NEGATIVE_DENSITY_TOL};
use crate::potential::{Potential, DEFAULT_DENSITY_FLOOR};

/// Time derivatives of `(R, Θ)`.
pub fn rhs(state: &FieldPair, pot: &Potential) -> Result<(Field1D, Field1D)> {
    rhs_with_floor(state, pot, DEFAULT_DENSITY_FLOOR)
}

pub fn rhs_with_floor(state: &FieldPair, pot: &Potential, floor: f64) -> Result<(Field1D, Field1D)> {
    let grid = state.grid();
    let (dr, dth) = raw_rhs(grid, state.r.values(), state.theta.values(), pot, floor)?;
    Ok((Field1D::new(grid, dr)?, Field1D::new(grid, dth)?))
}

fn raw_rhs(grid: &Grid1D, r: &[f64], theta: &[f64], pot: &Potential, floor: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    pot.check_floor(r, floor)?;
    let u = grid.diff(theta, 1);
    let flux: Vec<f64> = r.iter().zip(&u).map(|(r, u)| r * u).collect();
    let dr: Vec<f64> = grid.diff(&grid.dealias(&flux), 1).iter().map(|v| -v).collect();
    let u2: Vec<f64> = u.iter().map(|u| u * u).collect();
    let u2 = grid.dealias(&u2);
    let dv = if pot.is_free() {
        vec![0.0; r.len()]
    } else {
        let r_x = grid.diff(r, 1);
        pot.gradient(grid, r, &r_x)
    };
    let dth: Vec<f64> = u2.iter().zip(&dv).map(|(q, d)| -0.5 * q - d).collect();
    if dr.iter().chain(&dth).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok((dr, dth))
}

/// Gradient-catastrophe diagnostics of the phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausticDiagnostic {
    pub max_grad: f64,
    pub max_curv: f64,
    pub tail_fraction: f64,
    pub tripped: bool,
}

/// Trips when `max|∂ₓ²Θ|·dt` or the high-mode energy fraction of `Θ` or `R`
/// exceeds its threshold. The density focuses together with the phase
/// gradient and loses resolution first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausticMonitor {
    pub dt: f64,
    pub curvature_threshold: f64,
    pub tail_threshold: f64,
}

impl CausticMonitor {
    pub fn new(dt: f64) -> Self {
        Self { dt, curvature_threshold: 0.5, tail_threshold: 1e-6 }
    }

    pub fn check(&self, state: &FieldPair) -> CausticDiagnostic {
        let grid = state.grid();
        let theta = state.theta.values();
        let max_abs = |v: Vec<f64>| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let max_grad = max_abs(grid.diff(theta, 1));
        let max_curv = max_abs(grid.diff(theta, 2));
        let tail_fraction = grid.tail_fraction(theta).max(grid.tail_fraction(state.r.values()));
        CausticDiagnostic {
            max_grad,
            max_curv,
            tail_fraction,
            tripped: max_curv * self.dt > self.curvature_threshold || tail_fraction > self.tail_threshold,
        }
    }
}

/// Diagnostic of a single state with the default thresholds.
pub fn caustic_monitor(state: &FieldPair, dt: f64) -> CausticDiagnostic {
    CausticMonitor::new(dt).check(state)
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_final: f64,
    /// Store every `stride`-th step; the final state is always stored.
    pub stride: usize,
    pub density_floor: f64,
    pub monitor: bool,
}

impl EvolveOptions {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self { dt, t_final, stride: 1, density_floor: DEFAULT_DENSITY_FLOOR, monitor: true }
    }

    pub fn stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }
}

/// RK4 integration from `initial.t` to `opts.t_final`.
///
/// The step is shrunk slightly when needed so that the last step lands on
/// `t_final`.
pub fn evolve(initial: &FieldPair, pot: &Potential, opts: &EvolveOptions) -> Result<FieldMap2D> {
    let span = opts.t_final - initial.t;
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt = {} must be positive", opts.dt)));
    }
    if span.is_nan() || span <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "t_final = {} must exceed the initial time {}",
            opts.t_final, initial.t
        )));
    }
    if opts.stride == 0 {
        return Err(Error::InvalidParameter("stride must be positive".into()));
    }
    let steps = (span / opts.dt - 1e-9).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    let grid = initial.grid().clone();
    let cfl = CausticMonitor::new(dt).check(initial).max_grad * dt / grid.spacing();
    if cfl >= 1.0 {
        return Err(Error::InvalidParameter(format!("CFL number {cfl:.3} is not below 1")));
    }
    let floor = opts.density_floor;
    let sing = pot.is_singular();
    let monitor = CausticMonitor::new(dt);

    let mut map = FieldMap2D::new(&grid);
    map.push(initial)?;
    let mut r = initial.r.values().to_vec();
    let mut th = initial.theta.values().to_vec();
    let n = grid.n();
    let axpy = |base: &[f64], k: &[f64], a: f64| -> Vec<f64> { base.iter().zip(k).map(|(b, k)| b + a * k).collect() };

    for step in 1..=steps {
        let t_prev = initial.t + (step - 1) as f64 * dt;
        let (k1r, k1t) = raw_rhs(&grid, &r, &th, pot, floor)?;
        let (k2r, k2t) = raw_rhs(&grid, &axpy(&r, &k1r, 0.5 * dt), &axpy(&th, &k1t, 0.5 * dt), pot, floor)?;
        let (k3r, k3t) = raw_rhs(&grid, &axpy(&r, &k2r, 0.5 * dt), &axpy(&th, &k2t, 0.5 * dt), pot, floor)?;
        let (k4r, k4t) = raw_rhs(&grid, &axpy(&r, &k3r, dt), &axpy(&th, &k3t, dt), pot, floor)?;
        for j in 0..n {
            r[j] += dt / 6.0 * (k1r[j] + 2.0 * k2r[j] + 2.0 * k3r[j] + k4r[j]);
            th[j] += dt / 6.0 * (k1t[j] + 2.0 * k2t[j] + 2.0 * k3t[j] + k4t[j]);
        }
        let t = if step == steps { opts.t_final } else { initial.t + step as f64 * dt };
        let state = FieldPair { r: Field1D::new(&grid, r.clone())?, theta: Field1D::new(&grid, th.clone())?, t };
        if opts.monitor {
            let diag = monitor.check(&state);
            if diag.tripped {
                return Err(Error::Caustic { last_good_time: t_prev, max_curv: diag.max_curv });
            }
        }
        let min = state.r.min();
        if sing && min < floor {
            return Err(Error::DensityFloor { min, floor });
        }
        if min < -NEGATIVE_DENSITY_TOL * state.r.max_abs() {
            return Err(Error::DensityFloor { min, floor: 0.0 });
        }
        if step % opts.stride == 0 || step == steps {
            map.push(&state)?;
        }
    }
    Ok(map)
}

/// Initial data used throughout the test-suite.
pub mod presets {
    use super::*;

    /// Density pedestal of the standard datum.
    pub const PEDESTAL: f64 = 1e-6;

    /// The standard grid: `n = 512` on `L = 40`.
    pub fn standard_grid() -> Grid1D {
        Grid1D::new(512, 40.0).expect("valid grid")
    }

    /// `R = ½e^{-x²/2} + pedestal`, `Θ = 0.3 e^{-(x-1)²/2}`.
    pub fn gaussian_datum(grid: &Grid1D, pedestal: f64, t: f64) -> Result<FieldPair> {
        FieldPair::from_fns(
            grid,
            |x| 0.5 * (-0.5 * x * x).exp() + pedestal,
            |x| 0.3 * (-0.5 * (x - 1.0) * (x - 1.0)).exp(),
            t,
        )
    }

    /// The standard datum, with its density pedestal.
    pub fn standard(grid: &Grid1D) -> Result<FieldPair> {
        gaussian_datum(grid, PEDESTAL, 0.0)
    }

    /// The standard datum without pedestal, so that every charge density is compactly supported.
    pub fn standard_compact(grid: &Grid1D, t: f64) -> Result<FieldPair> {
        gaussian_datum(grid, 0.0, t)
    }

    /// Gaussian bump on a constant background density, for the membrane potential.
    pub fn membrane(grid: &Grid1D, background: f64) -> Result<FieldPair> {
        gaussian_datum(grid, background, 0.0)
    }

    /// Analytic flat-top window: `½[tanh((x+a)/w) − tanh((x−a)/w)]`.
    pub fn flat_top(x: f64, half_width: f64, edge: f64) -> f64 {
        0.5 * (((x + half_width) / edge).tanh() - ((x - half_width) / edge).tanh())
    }

    /// Uniform density with phase `β x` inside a flat-top window.
    pub fn windowed_plane_wave(grid: &Grid1D, r0: f64, beta: f64, half_width: f64, edge: f64) -> Result<FieldPair> {
        FieldPair::from_fns(grid, |_| r0, |x| beta * x * flat_top(x, half_width, edge), 0.0)
    }

    /// Random smooth state built from a few Gaussian bumps well inside the domain.
    pub fn random_compact(grid: &Grid1D, seed: u64, t: f64) -> Result<FieldPair> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reach = (0.15 * grid.length()).min(6.0);
        let mut r_bumps = Vec::new();
        let mut th_bumps = Vec::new();
        for _ in 0..3 {
            r_bumps.push((rng.gen_range(0.2..1.0), rng.gen_range(-reach / 2.0..reach / 2.0), rng.gen_range(0.7..1.5)));
            th_bumps.push((
                rng.gen_range(-0.6..0.6),
                rng.gen_range(-reach / 2.0..reach / 2.0),
                rng.gen_range(0.7..1.5),
            ));
        }
        let sum = |bumps: &[(f64, f64, f64)], x: f64| -> f64 {
            bumps.iter().map(|&(a, c, w)| a * (-0.5 * ((x - c) / w).powi(2)).exp()).sum()
        };
        FieldPair::from_fns(grid, |x| sum(&r_bumps, x), |x| sum(&th_bumps, x), t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn static_state_is_fixed() {
        let g = Grid1D::new(64, 10.0).unwrap();
        let s = FieldPair::from_fns(&g, |_| 1.0, |_| 0.0, 0.0).unwrap();
        let (dr, dth) = rhs(&s, &Potential::Free).unwrap();
        assert!(dr.values().iter().chain(dth.values()).all(|&v| v == 0.0));
        let traj = evolve(&s, &Potential::Free, &EvolveOptions::new(0.1, 1.0)).unwrap();
        assert!(traj.slices().all(|p| p.r == s.r && p.theta == s.theta));
    }

    #[test]
    fn membrane_rhs_on_uniform_state() {
        let g = Grid1D::new(64, 10.0).unwrap();
        let s = FieldPair::from_fns(&g, |_| 1.0, |_| 0.0, 0.0).unwrap();
        let (dr, dth) = rhs(&s, &Potential::membrane(1.0).unwrap()).unwrap();
        assert!(dr.values().iter().all(|&v| v == 0.0));
        assert!(dth.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn plane_wave_rhs_inside_window() {
        let g = presets::standard_grid();
        let beta = 0.4;
        let s = presets::windowed_plane_wave(&g, 1.0, beta, 10.0, 0.7).unwrap();
        let (dr, dth) = rhs(&s, &Potential::Free).unwrap();
        for j in 0..g.n() {
            if g.x(j).abs() < 2.0 {
                assert!(dr.values()[j].abs() < 1e-8);
                assert!((dth.values()[j] + 0.5 * beta * beta).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn floor_violation_aborts() {
        let g = Grid1D::new(64, 10.0).unwrap();
        let s = FieldPair::from_fns(&g, |x| (-x * x).exp(), |_| 0.0, 0.0).unwrap();
        let err = rhs(&s, &Potential::membrane(1.0).unwrap()).unwrap_err();
        assert!(err.to_string().contains("density floor violated"));
    }

    #[test]
    fn cosine_phase_trips_before_caustic() {
        let l = 2.0 * PI * 2.0;
        let g = Grid1D::new(128, l).unwrap();
        let s = FieldPair::from_fns(&g, |_| 1.0, |x| -(2.0 * PI * x / l).cos(), 0.0).unwrap();
        let t_star = l * l / (4.0 * PI * PI);
        assert!(!caustic_monitor(&s, 1e-3).tripped);
        let flat = FieldPair::from_fns(&g, |_| 1.0, |_| 0.0, 0.0).unwrap();
        let d = caustic_monitor(&flat, 1e-3);
        assert!(!d.tripped && d.max_grad == 0.0);
        match evolve(&s, &Potential::Free, &EvolveOptions::new(1e-3, 2.0 * t_star)) {
            Err(Error::Caustic { last_good_time, .. }) => assert!(last_good_time < t_star),
            other => panic!("expected a caustic, got {other:?}"),
        }
    }

    #[test]
    fn random_states_are_deterministic() {
        let g = presets::standard_grid();
        let a = presets::random_compact(&g, 7, 0.0).unwrap();
        let b = presets::random_compact(&g, 7, 0.0).unwrap();
        let c = presets::random_compact(&g, 8, 0.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
