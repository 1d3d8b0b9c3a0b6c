//! Linear and quintic Schrödinger evolution and its hydrodynamic reading.
//!
//! `i∂ₜΨ = −½∂ₓ²Ψ + 3c|Ψ|⁴Ψ`. With `Ψ = √R e^{iΘ}` this is the fluid system
//! with potential `cR³ + (∂ₓR)²/(8R)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{central_difference, uniform_spacing, Field1D, FieldMap2D, FieldPair, Grid1D};
use crate::potential::Potential;

/// Smallest `|Ψ|` at which the phase is still taken as defined.
pub const AMPLITUDE_FLOOR: f64 = 1e-6;

/// Complex wave function on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: Grid1D,
    psi: Vec<Complex64>,
    pub t: f64,
}

impl WaveField {
    pub fn new(grid: &Grid1D, psi: Vec<Complex64>, t: f64) -> Result<Self> {
        if psi.len() != grid.n() {
            return Err(Error::InvalidGrid(format!("expected {} samples, got {}", grid.n(), psi.len())));
        }
        if !t.is_finite() || psi.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let field = WaveField { grid: grid.clone(), psi, t };
        if field.norm() <= 0.0 {
            return Err(Error::InvalidParameter("wave function has zero norm".into()));
        }
        Ok(field)
    }

    pub fn from_fn(grid: &Grid1D, f: impl Fn(f64) -> Complex64, t: f64) -> Result<Self> {
        Self::new(grid, grid.coords().into_iter().map(f).collect(), t)
    }

    /// Exact solution `e^{i(kx − ½k²t)}` with `k = 2πm/L`.
    pub fn plane_wave(grid: &Grid1D, mode: i64, t: f64) -> Result<Self> {
        let k = TAU * mode as f64 / grid.length();
        Self::from_fn(grid, |x| Complex64::from_polar(1.0, k * x - 0.5 * k * k * t), t)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.psi
    }

    /// `∫|Ψ|² dx`.
    pub fn norm(&self) -> f64 {
        self.grid.spacing() * self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Spectral derivative of order 1 or 2.
    pub fn derivative(&self, order: u32) -> Vec<Complex64> {
        let mut spec = self.grid.fft_complex(&self.psi);
        let nyquist = self.grid.n() / 2;
        for (j, c) in spec.iter_mut().enumerate() {
            let k = self.grid.wavenumber(j);
            *c *= if order % 2 == 1 && j == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k).powu(order)
            };
        }
        self.grid.ifft_complex(spec)
    }

    /// Cyclic shift by a whole number of nodes.
    pub fn translate(&self, nodes: isize) -> Self {
        let n = self.psi.len() as isize;
        let psi = (0..n).map(|j| self.psi[(j - nodes).rem_euclid(n) as usize]).collect();
        WaveField { grid: self.grid.clone(), psi, t: self.t }
    }

    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        self.psi.iter().zip(&other.psi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `R = |Ψ|²` and `∂ₓΘ = Im(Ψ*∂ₓΨ)/R`, with no phase unwrapping.
    pub fn density_and_velocity(&self) -> Result<(Field1D, Field1D)> {
        self.check_floor()?;
        let d = self.derivative(1);
        let r: Vec<f64> = self.psi.iter().map(|c| c.norm_sqr()).collect();
        let u = self.psi.iter().zip(&d).zip(&r).map(|((p, dp), r)| (p.conj() * dp).im / r).collect();
        Ok((Field1D::new(&self.grid, r)?, Field1D::new(&self.grid, u)?))
    }

    fn check_floor(&self) -> Result<()> {
        match self.psi.iter().enumerate().map(|(j, c)| (j, c.norm())).min_by(|a, b| a.1.total_cmp(&b.1)) {
            Some((j, a)) if a < AMPLITUDE_FLOOR => Err(Error::PhaseSingularity { x: self.grid.x(j), amplitude: a }),
            _ => Ok(()),
        }
    }
}

/// Unit background with a moving Gaussian bump: `1 + 0.3 e^{−(x−1)²/2} e^{ik₀x}`.
pub fn datum(grid: &Grid1D, k0: f64) -> Result<WaveField> {
    WaveField::from_fn(
        grid,
        |x| Complex64::new(1.0, 0.0) + Complex64::from_polar(0.3 * (-0.5 * (x - 1.0).powi(2)).exp(), k0 * x),
        0.0,
    )
}

/// Normalised Gaussian packet centred at `x0` with momentum `k0`.
pub fn gaussian_packet(grid: &Grid1D, x0: f64, width: f64, k0: f64) -> Result<WaveField> {
    let amp = (PI * width * width).powf(-0.25);
    WaveField::from_fn(grid, |x| Complex64::from_polar(amp * (-0.5 * ((x - x0) / width).powi(2)).exp(), k0 * x), 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    Linear,
    /// `3c|Ψ|⁴Ψ`, from `V̄ = cR³`.
    Quintic {
        c: f64,
    },
}

impl Nonlinearity {
    fn coefficient(&self) -> f64 {
        match *self {
            Nonlinearity::Linear => 0.0,
            Nonlinearity::Quintic { c } => c,
        }
    }

    /// Hydrodynamic potential `cR³ + (∂ₓR)²/(8R)`.
    pub fn potential(&self) -> Potential {
        Potential::Quantum { c: self.coefficient() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlsOptions {
    pub dt: f64,
    pub t_final: f64,
    /// Keep every `stride`-th step.
    pub stride: usize,
}

impl NlsOptions {
    pub fn new(dt: f64, t_final: f64) -> Self {
        NlsOptions { dt, t_final, stride: 1 }
    }

    pub fn stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }
}

/// Stored slices of a Schrödinger run.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveTrajectory {
    slices: Vec<WaveField>,
}

impl WaveTrajectory {
    pub fn slices(&self) -> &[WaveField] {
        &self.slices
    }

    pub fn times(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &WaveField {
        self.slices.last().expect("trajectory holds the initial slice")
    }

    /// Madelung fields of every slice, with the anchor phase continued in time.
    pub fn hydro(&self) -> Result<FieldMap2D> {
        let mut map = FieldMap2D::new(self.slices[0].grid());
        let mut anchor: Option<f64> = None;
        for slice in &self.slices {
            let mut state = hydro_decompose(slice)?;
            let first = state.theta.values()[0];
            if let Some(prev) = anchor {
                let shift = TAU * ((prev - first) / TAU).round();
                if shift != 0.0 {
                    state.theta = state.theta.map(|v| v + shift)?;
                }
            }
            anchor = Some(state.theta.values()[0]);
            map.push(&state)?;
        }
        Ok(map)
    }
}

/// Strang split-step Fourier integration. The kinetic step is exact per
/// mode, so any positive step is stable; accuracy is second order.
pub fn evolve_nls(psi0: &WaveField, nonlinearity: Nonlinearity, opts: &NlsOptions) -> Result<WaveTrajectory> {
    let grid = psi0.grid().clone();
    let span = opts.t_final - psi0.t;
    if !(opts.dt > 0.0 && span >= 0.0 && opts.dt.is_finite() && span.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt = {} and span = {span} must be positive", opts.dt)));
    }
    let steps = (span / opts.dt).ceil().max(1.0) as usize;
    let dt = if span == 0.0 { 0.0 } else { span / steps as f64 };
    let c = nonlinearity.coefficient();
    let kinetic: Vec<Complex64> =
        (0..grid.n()).map(|j| Complex64::from_polar(1.0, -0.5 * grid.wavenumber(j).powi(2) * dt)).collect();
    let half_kick = |psi: &mut [Complex64]| {
        if c != 0.0 {
            for p in psi.iter_mut() {
                let r = p.norm_sqr();
                *p *= Complex64::from_polar(1.0, -3.0 * c * r * r * 0.5 * dt);
            }
        }
    };
    let mut psi = psi0.values().to_vec();
    let mut slices = vec![psi0.clone()];
    if span == 0.0 {
        return Ok(WaveTrajectory { slices });
    }
    for step in 1..=steps {
        half_kick(&mut psi);
        let mut spec = grid.fft_complex(&psi);
        spec.iter_mut().zip(&kinetic).for_each(|(s, k)| *s *= k);
        psi = grid.ifft_complex(spec);
        half_kick(&mut psi);
        if step % opts.stride == 0 || step == steps {
            slices.push(WaveField::new(&grid, psi.clone(), psi0.t + step as f64 * dt)?);
        }
    }
    Ok(WaveTrajectory { slices })
}

/// `R = |Ψ|²` and the phase unwrapped along the grid from its principal
/// value at `x = −L/2`.
pub fn hydro_decompose(psi: &WaveField) -> Result<FieldPair> {
    psi.check_floor()?;
    let grid = psi.grid();
    let r: Vec<f64> = psi.values().iter().map(|c| c.norm_sqr()).collect();
    let mut theta = Vec::with_capacity(r.len());
    let mut prev = psi.values()[0].arg();
    theta.push(prev);
    for w in psi.values().windows(2) {
        let jump = (w[1] * w[0].conj()).arg();
        prev += jump;
        theta.push(prev);
    }
    FieldPair::new(Field1D::new(grid, r)?, Field1D::new(grid, theta)?, psi.t)
}

/// Residuals of the Madelung system along a run, per interior slice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MadelungResidual {
    pub times: Vec<f64>,
    /// `max |∂ₜR + ∂ₓ(R∂ₓΘ)|`.
    pub continuity: Vec<f64>,
    /// `max |∂ₜΘ + ½(∂ₓΘ)² + ⅛(∂ₓR)²/R² − ∂ₓ²R/(4R) + 3cR²|`.
    pub phase: Vec<f64>,
    pub max_continuity: f64,
    pub max_phase: f64,
}

/// Evaluate the hydrodynamic equations on a Schrödinger run, with time
/// derivatives by fourth-order central differences across slices.
pub fn effective_potential_check(traj: &WaveTrajectory, nonlinearity: Nonlinearity) -> Result<MadelungResidual> {
    let times = traj.times();
    let h = uniform_spacing(&times)?;
    let map = traj.hydro()?;
    let c = nonlinearity.coefficient();
    let states: Vec<FieldPair> = map.slices().collect();
    let mut out = MadelungResidual {
        times: Vec::new(),
        continuity: Vec::new(),
        phase: Vec::new(),
        max_continuity: 0.0,
        max_phase: 0.0,
    };
    for i in 2..states.len() - 2 {
        let field = |k: usize, f: fn(&FieldPair) -> &Field1D| f(&states[k]).values().to_vec();
        let r_t = central_difference(
            &field(i - 2, |s| &s.r),
            &field(i - 1, |s| &s.r),
            &field(i + 1, |s| &s.r),
            &field(i + 2, |s| &s.r),
            h,
        );
        let th_t = central_difference(
            &field(i - 2, |s| &s.theta),
            &field(i - 1, |s| &s.theta),
            &field(i + 1, |s| &s.theta),
            &field(i + 2, |s| &s.theta),
            h,
        );
        let (r, u) = traj.slices()[i].density_and_velocity()?;
        let flux = r.zip_with(&u, |a, b| a * b)?.derivative(1)?;
        let r_x = r.derivative(1)?;
        let r_xx = r.derivative(2)?;
        let mut cont: f64 = 0.0;
        let mut phase: f64 = 0.0;
        for j in 0..r.values().len() {
            let (rv, rx, rxx, uv) = (r.values()[j], r_x.values()[j], r_xx.values()[j], u.values()[j]);
            cont = cont.max((r_t[j] + flux.values()[j]).abs());
            let rhs = -rx * rx / (8.0 * rv * rv) + rxx / (4.0 * rv) - 3.0 * c * rv * rv;
            phase = phase.max((th_t[j] + 0.5 * uv * uv - rhs).abs());
        }
        out.times.push(states[i].t);
        out.continuity.push(cont);
        out.phase.push(phase);
        out.max_continuity = out.max_continuity.max(cont);
        out.max_phase = out.max_phase.max(phase);
    }
    Ok(out)
}

/// Checks of the real ansatz `ψ = (1/2π)√R cos(Θ + s)` on extended space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JevickiReport {
    /// `max |θ(x, t, −Θ)|` for `θ = √R sin(Θ + s)`.
    pub section: f64,
    /// `max |ρ ∂ₛθ − R|` at `s = −Θ` with `ρ = √R`.
    pub density: f64,
    /// `max |−8π²⟨ℒ⟩ₛ − (ℒ₀ − (∂ₓR)²/(8R))|` with `ℒ = ½∇ψ·∇ψ`.
    pub reduced: f64,
    /// Nodes where `R = 0`, skipped by the last two checks.
    pub skipped: usize,
}

/// Number of quadrature nodes in `s`.
pub const JEVICKI_NODES: usize = 64;

fn section(theta: f64) -> f64 {
    -theta
}

/// Evaluate the ansatz on a state. Time derivatives come from the free
/// equations of motion; the reduction identity holds for any values.
pub fn jevicki_check(state: &FieldPair) -> Result<JevickiReport> {
    let r = state.r.values();
    let th = state.theta.values();
    let r_x = state.r.derivative(1)?;
    let th_x = state.theta.derivative(1)?;
    let flux = state.r.zip_with(&th_x, |a, b| a * b)?.derivative(1)?;
    let mut rep = JevickiReport { section: 0.0, density: 0.0, reduced: 0.0, skipped: 0 };
    for j in 0..r.len() {
        let a = r[j].sqrt();
        // On the section s = −Θ the lifted phase Θ + s vanishes.
        let lifted = th[j] + section(th[j]);
        let theta_on_section = a * lifted.sin();
        rep.section = rep.section.max(theta_on_section.abs());
        if r[j] <= 0.0 {
            rep.skipped += 1;
            continue;
        }
        rep.density = rep.density.max((a * a * lifted.cos() - r[j]).abs());
        let (rx, ux) = (r_x.values()[j], th_x.values()[j]);
        let (r_t, th_t) = (-flux.values()[j], -0.5 * ux * ux);
        let (a_x, a_t) = (rx / (2.0 * a), r_t / (2.0 * a));
        let norm = 1.0 / TAU;
        let mut avg = 0.0;
        for k in 0..JEVICKI_NODES {
            let s = TAU * k as f64 / JEVICKI_NODES as f64;
            let (sn, cs) = (th[j] + s).sin_cos();
            let psi_x = norm * (a_x * cs - a * ux * sn);
            let psi_t = norm * (a_t * cs - a * th_t * sn);
            let psi_s = -norm * a * sn;
            avg += 0.5 * (psi_x * psi_x + 2.0 * psi_t * psi_s);
        }
        avg /= JEVICKI_NODES as f64;
        let l0 = -r[j] * th_t - 0.5 * r[j] * ux * ux;
        let target = l0 - rx * rx / (8.0 * r[j]);
        let scale = target.abs().max(1.0);
        rep.reduced = rep.reduced.max((-8.0 * PI * PI * avg - target).abs() / scale);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid1D {
        Grid1D::new(128, 20.0).unwrap()
    }

    #[test]
    fn plane_wave_is_exact() {
        let g = grid();
        let psi0 = WaveField::plane_wave(&g, 3, 0.0).unwrap();
        let traj = evolve_nls(&psi0, Nonlinearity::Linear, &NlsOptions::new(1e-2, 1.0)).unwrap();
        let exact = WaveField::plane_wave(&g, 3, 1.0).unwrap();
        assert!(traj.last().max_abs_difference(&exact) < 1e-10);
    }

    #[test]
    fn norm_is_conserved() {
        let g = grid();
        let psi0 = gaussian_packet(&g, -1.0, 1.0, 0.8).unwrap();
        for nl in [Nonlinearity::Linear, Nonlinearity::Quintic { c: 0.1 }] {
            let traj = evolve_nls(&psi0, nl, &NlsOptions::new(1e-2, 1.0)).unwrap();
            assert!((traj.last().norm() - psi0.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn translation_commutes_with_evolution() {
        let g = grid();
        let psi0 = datum(&g, 1.0).unwrap();
        let opts = NlsOptions::new(1e-2, 0.5);
        let a = evolve_nls(&psi0.translate(7), Nonlinearity::Linear, &opts).unwrap();
        let b = evolve_nls(&psi0, Nonlinearity::Linear, &opts).unwrap();
        assert!(a.last().max_abs_difference(&b.last().translate(7)) < 1e-10);
    }

    #[test]
    fn non_positive_step_is_rejected() {
        let g = grid();
        let psi0 = datum(&g, 1.0).unwrap();
        for dt in [0.0, -1e-2, f64::NAN] {
            assert!(matches!(
                evolve_nls(&psi0, Nonlinearity::Linear, &NlsOptions::new(dt, 1.0)),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn pure_phase_unwraps_linearly() {
        let g = grid();
        let psi = WaveField::plane_wave(&g, 4, 0.0).unwrap();
        let state = hydro_decompose(&psi).unwrap();
        let k = TAU * 4.0 / g.length();
        let x0 = g.x(0);
        let offset = state.theta.values()[0] - k * x0;
        for (j, th) in state.theta.values().iter().enumerate() {
            assert!((th - k * g.x(j) - offset).abs() < 1e-12);
            assert!((state.r.values()[j] - 1.0).abs() < 1e-14);
        }
        assert!((offset / TAU - (offset / TAU).round()).abs() < 1e-12);
    }

    #[test]
    fn zero_of_the_wave_function_is_rejected() {
        let g = grid();
        let psi = WaveField::from_fn(&g, |x| Complex64::new(x - g.x(40), 0.3 * (x - g.x(40))), 0.0).unwrap();
        assert!(matches!(hydro_decompose(&psi), Err(Error::PhaseSingularity { .. })));
    }

    #[test]
    fn jevicki_ansatz_reduces_to_the_fluid_density() {
        let g = Grid1D::new(256, 40.0).unwrap();
        let state = crate::dynamics::presets::standard(&g).unwrap();
        let rep = jevicki_check(&state).unwrap();
        assert_eq!(rep.section, 0.0);
        assert!(rep.density < 1e-14);
        assert!(rep.reduced < 1e-10, "{}", rep.reduced);
    }
}
