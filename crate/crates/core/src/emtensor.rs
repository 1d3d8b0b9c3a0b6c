//! Energy-momentum tensors on ordinary and extended space.
//!
//! On ordinary space only lower indices exist. On extended space with metric
//! `dx² + 2 dt ds` indices are raised with `g^{xx} = g^{ts} = 1`, and the
//! tensor uses the convention `𝒯_{μν} = −2 δS/δg^{μν}`:
//!
//! `𝒯_{μν} = ρ∇_μθ∇_νθ − ½g_{μν}ρ(∇θ)² − g_{μν}V`.
//!
//! Time derivatives of the phase come from the equations of motion, so a
//! single slice determines every component.

use serde::Serialize;

use crate::charges::Generator;
use crate::error::{Error, Result};
use crate::grid::{central_difference, uniform_spacing, Field1D, FieldMap2D, FieldPair, Grid1D};
use crate::liealg;
use crate::potential::{Potential, DEFAULT_DENSITY_FLOOR};
use crate::schrodinger::{WaveField, WaveTrajectory};

/// Index of a coordinate of extended space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Index {
    X = 0,
    T = 1,
    S = 2,
}

/// Ordinary-space tensor on a time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorQ {
    pub t: f64,
    pub tt: Field1D,
    pub xt: Field1D,
    pub tx: Field1D,
    pub xx: Field1D,
}

/// `R`, `Θₓ`, `V`, `V'` and `Θₜ = −½Θₓ² − V'` on a slice.
struct Slice {
    grid: Grid1D,
    r: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    theta_t: Vec<f64>,
}

impl Slice {
    fn new(state: &FieldPair, pot: &Potential) -> Result<Self> {
        if let Potential::Quantum { .. } = pot {
            return Err(Error::InvalidParameter(
                "the fluid tensor needs a local potential; use the Schrödinger tensor".into(),
            ));
        }
        let grid = state.grid().clone();
        let r = state.r.values().to_vec();
        pot.check_floor(&r, DEFAULT_DENSITY_FLOOR)?;
        let u = grid.diff(state.theta.values(), 1);
        let r_x = grid.diff(&r, 1);
        let v = pot.energy_density(&r, &r_x);
        let dv = pot.gradient(&grid, &r, &r_x);
        let theta_t = u.iter().zip(&dv).map(|(u, dv)| -0.5 * u * u - dv).collect();
        Ok(Slice { grid, r, u, v, theta_t })
    }

    fn field(&self, f: impl Fn(usize) -> f64) -> Result<Field1D> {
        Field1D::new(&self.grid, (0..self.r.len()).map(f).collect())
    }
}

/// `T_tt = ½RΘₓ² + V`, `T_xt = −RΘₓΘₜ`, `T_tx = RΘₓ`, `T_xx = RΘₓ² + RV' − V`.
pub fn tensor_q(state: &FieldPair, pot: &Potential) -> Result<TensorQ> {
    let s = Slice::new(state, pot)?;
    let (r, u, v, th_t) = (&s.r, &s.u, &s.v, &s.theta_t);
    Ok(TensorQ {
        t: state.t,
        tt: s.field(|j| 0.5 * r[j] * u[j] * u[j] + v[j])?,
        xt: s.field(|j| -r[j] * u[j] * th_t[j])?,
        tx: s.field(|j| r[j] * u[j])?,
        // RV' − V with V' = −Θₜ − ½Θₓ².
        xx: s.field(|j| r[j] * u[j] * u[j] + r[j] * (-th_t[j] - 0.5 * u[j] * u[j]) - v[j])?,
    })
}

/// `T_xx − 2T_tt`, which vanishes identically exactly for `V = cR³`.
pub fn trace_check(state: &FieldPair, pot: &Potential) -> Result<Field1D> {
    let tq = tensor_q(state, pot)?;
    tq.xx.zip_with(&tq.tt, |xx, tt| xx - 2.0 * tt)
}

/// Maximum residuals of `∂ₜT_{tβ} + ∂ₓT_{xβ}` over the interior slices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityResidual {
    pub times: Vec<f64>,
    /// `β = t`, per slice.
    pub energy: Vec<f64>,
    /// `β = x`, per slice.
    pub momentum: Vec<f64>,
    pub max: f64,
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Continuity of the ordinary-space tensor along a trajectory: spectral in
/// `x`, fourth-order central differences in `t`.
pub fn continuity_residual(traj: &FieldMap2D, pot: &Potential) -> Result<ContinuityResidual> {
    let h = uniform_spacing(traj.times())?;
    let tensors = traj.slices().map(|s| tensor_q(&s, pot)).collect::<Result<Vec<_>>>()?;
    let grid = traj.grid();
    let mut out = ContinuityResidual { times: Vec::new(), energy: Vec::new(), momentum: Vec::new(), max: 0.0 };
    for i in 2..tensors.len() - 2 {
        let dt = |f: fn(&TensorQ) -> &Field1D| {
            central_difference(
                f(&tensors[i - 2]).values(),
                f(&tensors[i - 1]).values(),
                f(&tensors[i + 1]).values(),
                f(&tensors[i + 2]).values(),
                h,
            )
        };
        let (tt_t, tx_t) = (dt(|q| &q.tt), dt(|q| &q.tx));
        let xt_x = grid.diff(tensors[i].xt.values(), 1);
        let xx_x = grid.diff(tensors[i].xx.values(), 1);
        let e = max_abs(tt_t.iter().zip(&xt_x).map(|(a, b)| a + b));
        let m = max_abs(tx_t.iter().zip(&xx_x).map(|(a, b)| a + b));
        out.times.push(tensors[i].t);
        out.energy.push(e);
        out.momentum.push(m);
        out.max = out.max.max(e).max(m);
    }
    Ok(out)
}

/// Symmetric extended-space tensor of an equivariant configuration on a
/// slice. Components do not depend on `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorM {
    pub t: f64,
    pub xx: Field1D,
    pub xt: Field1D,
    pub xs: Field1D,
    pub tt: Field1D,
    pub ts: Field1D,
    pub ss: Field1D,
}

impl TensorM {
    /// `𝒯_{μν}`, symmetric by construction.
    pub fn component(&self, mu: Index, nu: Index) -> &Field1D {
        use Index::*;
        match (mu, nu) {
            (X, X) => &self.xx,
            (X, T) | (T, X) => &self.xt,
            (X, S) | (S, X) => &self.xs,
            (T, T) => &self.tt,
            (T, S) | (S, T) => &self.ts,
            (S, S) => &self.ss,
        }
    }

    /// `𝒯^μ_μ = 𝒯_xx + 2𝒯_ts`.
    pub fn trace(&self) -> Result<Field1D> {
        self.xx.zip_with(&self.ts, |xx, ts| xx + 2.0 * ts)
    }

    /// `𝒯^μ_ν`: the first index is raised, so `𝒯^t_ν = 𝒯_sν` and `𝒯^s_ν = 𝒯_tν`.
    pub fn mixed(&self, mu: Index, nu: Index) -> &Field1D {
        let lowered = match mu {
            Index::X => Index::X,
            Index::T => Index::S,
            Index::S => Index::T,
        };
        self.component(lowered, nu)
    }

    fn grid(&self) -> &Grid1D {
        self.xx.grid()
    }
}

/// Fluid tensor of the lift `θ = Θ + s`, `ρ = R`, with `(∇θ)² = Θₓ² + 2Θₜ`.
pub fn tensor_m(state: &FieldPair, pot: &Potential) -> Result<TensorM> {
    let s = Slice::new(state, pot)?;
    let (r, u, v, th_t) = (&s.r, &s.u, &s.v, &s.theta_t);
    let sq = |j: usize| u[j] * u[j] + 2.0 * th_t[j];
    // Diagonal metric entries contribute −½ρ(∇θ)² − V.
    let g_term = |j: usize| -0.5 * r[j] * sq(j) - v[j];
    Ok(TensorM {
        t: state.t,
        xx: s.field(|j| r[j] * u[j] * u[j] + g_term(j))?,
        xt: s.field(|j| r[j] * u[j] * th_t[j])?,
        xs: s.field(|j| r[j] * u[j])?,
        tt: s.field(|j| r[j] * th_t[j] * th_t[j])?,
        ts: s.field(|j| r[j] * th_t[j] + g_term(j))?,
        ss: s.field(|j| r[j])?,
    })
}

/// Residuals of the four relations `T_tt = −𝒯_st`, `T_tx = 𝒯_sx`,
/// `T_xt = −𝒯_xt`, `T_xx = 𝒯_xx` for the lift with `∇ₛθ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelationResidual {
    pub tt: f64,
    pub tx: f64,
    pub xt: f64,
    pub xx: f64,
}

impl RelationResidual {
    pub fn max(&self) -> f64 {
        self.tt.max(self.tx).max(self.xt).max(self.xx)
    }
}

pub fn relation_check(state: &FieldPair, pot: &Potential) -> Result<RelationResidual> {
    let q = tensor_q(state, pot)?;
    let m = tensor_m(state, pot)?;
    let diff =
        |a: &Field1D, b: &Field1D, sign: f64| max_abs(a.values().iter().zip(b.values()).map(|(a, b)| a - sign * b));
    Ok(RelationResidual {
        tt: diff(&q.tt, &m.ts, -1.0),
        tx: diff(&q.tx, &m.xs, 1.0),
        xt: diff(&q.xt, &m.xt, -1.0),
        xx: diff(&q.xx, &m.xx, 1.0),
    })
}

/// Noether current of a conformal vector field restricted to the section
/// `s = −Θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Current {
    pub generator: Generator,
    /// `J^t`, the charge density.
    pub density: Field1D,
    /// `J^x`, the flux.
    pub flux: Field1D,
    /// `j^s`.
    pub vertical: Field1D,
    /// `∫ J^t dx`.
    pub value: f64,
}

/// Current `k^μ = −𝒯^μ_ν X^ν` of the generator's vector field, evaluated on
/// the section with `x` in windowed coordinates. The sign makes `∂ₜ` carry
/// the positive energy in this sign convention; `∇ₛθ = 1` so `J^α = j^α`.
pub fn current(g: Generator, state: &FieldPair, pot: &Potential) -> Result<Current> {
    let m = tensor_m(state, pot)?;
    let grid = m.grid().clone();
    let field = liealg::generator(g);
    let xw = grid.windowed_coords();
    let theta = state.theta.values();
    let vectors: Vec<[f64; 3]> = (0..grid.n()).map(|j| field.eval_f64([xw[j], state.t, -theta[j]])).collect();
    let contract = |mu: Index| -> Result<Field1D> {
        let cols = [Index::X, Index::T, Index::S].map(|nu| m.mixed(mu, nu).values());
        Field1D::new(&grid, (0..grid.n()).map(|j| -(0..3).map(|k| cols[k][j] * vectors[j][k]).sum::<f64>()).collect())
    };
    let density = contract(Index::T)?;
    let value = density.integrate();
    Ok(Current { generator: g, density, flux: contract(Index::X)?, vertical: contract(Index::S)?, value })
}

/// Extended-space tensor of a Schrödinger wave function in flat space,
/// with `Θₜ` and `Rₜ` from the linear equation of motion.
///
/// Without `hessian_term` the `−⅛∇_μ∇_νρ` contribution is dropped, which
/// breaks conservation.
pub fn tensor_schrodinger(psi: &WaveField, hessian_term: bool) -> Result<TensorM> {
    let (rf, uf) = psi.density_and_velocity()?;
    let grid = psi.grid().clone();
    let (r, u) = (rf.values(), uf.values());
    let n = r.len();
    let r_x = grid.diff(r, 1);
    let r_xx = grid.diff(r, 2);
    let theta_t: Vec<f64> =
        (0..n).map(|j| -0.5 * u[j] * u[j] + 0.25 * r_xx[j] / r[j] - 0.125 * r_x[j] * r_x[j] / (r[j] * r[j])).collect();
    let p: Vec<f64> = (0..n).map(|j| r[j] * u[j]).collect();
    let r_t: Vec<f64> = grid.diff(&p, 1).iter().map(|v| -v).collect();
    let r_xt = grid.diff(&r_t, 1);
    // Rₜₜ = −∂ₓ(Rₜ Θₓ + R ∂ₓΘₜ).
    let theta_xt = grid.diff(&theta_t, 1);
    let flux_t: Vec<f64> = (0..n).map(|j| r_t[j] * u[j] + r[j] * theta_xt[j]).collect();
    let r_tt: Vec<f64> = grid.diff(&flux_t, 1).iter().map(|v| -v).collect();
    let h = if hessian_term { 0.125 } else { 0.0 };
    // ρ carries no s-dependence, so (∇ρ)² = Rₓ².
    let g_term = |j: usize| -0.25 * r[j] * (u[j] * u[j] + 2.0 * theta_t[j]) - r_x[j] * r_x[j] / (16.0 * r[j]);
    let field = |f: &dyn Fn(usize) -> f64| Field1D::new(&grid, (0..n).map(f).collect());
    Ok(TensorM {
        t: psi.t,
        xx: field(&|j| r[j] * u[j] * u[j] + g_term(j) + 0.25 * r_x[j] * r_x[j] / r[j] - h * r_xx[j])?,
        xt: field(&|j| r[j] * u[j] * theta_t[j] + 0.25 * r_x[j] * r_t[j] / r[j] - h * r_xt[j])?,
        xs: field(&|j| r[j] * u[j])?,
        tt: field(&|j| r[j] * theta_t[j] * theta_t[j] + 0.25 * r_t[j] * r_t[j] / r[j] - h * r_tt[j])?,
        ts: field(&|j| r[j] * theta_t[j] + g_term(j))?,
        ss: field(&|j| r[j])?,
    })
}

/// Maximum of `∂ₓ𝒯_{xν} + ∂ₜ𝒯_{sν}` for `ν = x, t, s` over interior slices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtendedContinuity {
    pub x: f64,
    pub t: f64,
    pub s: f64,
}

impl ExtendedContinuity {
    pub fn max(&self) -> f64 {
        self.x.max(self.t).max(self.s)
    }
}

/// Divergence `∇_μ𝒯^μ_ν` of equally spaced, `s`-independent tensors.
pub fn extended_continuity(tensors: &[TensorM]) -> Result<ExtendedContinuity> {
    let times: Vec<f64> = tensors.iter().map(|m| m.t).collect();
    let h = uniform_spacing(&times)?;
    let grid = tensors[0].grid().clone();
    let mut out = ExtendedContinuity { x: 0.0, t: 0.0, s: 0.0 };
    for i in 2..tensors.len() - 2 {
        for (nu, slot) in [(Index::X, &mut out.x), (Index::T, &mut out.t), (Index::S, &mut out.s)] {
            let c = |k: usize| tensors[k].component(Index::S, nu).values();
            let d_t = central_difference(c(i - 2), c(i - 1), c(i + 1), c(i + 2), h);
            let d_x = grid.diff(tensors[i].component(Index::X, nu).values(), 1);
            *slot = slot.max(max_abs(d_t.iter().zip(&d_x).map(|(a, b)| a + b)));
        }
    }
    Ok(out)
}

/// Conservation of the Schrödinger tensor along a linear run.
pub fn schrodinger_continuity(traj: &WaveTrajectory, hessian_term: bool) -> Result<ExtendedContinuity> {
    let tensors = traj.slices().iter().map(|psi| tensor_schrodinger(psi, hessian_term)).collect::<Result<Vec<_>>>()?;
    extended_continuity(&tensors)
}

/// Conservation of the fluid tensor along a trajectory.
pub fn fluid_continuity(traj: &FieldMap2D, pot: &Potential) -> Result<ExtendedContinuity> {
    let tensors = traj.slices().map(|s| tensor_m(&s, pot)).collect::<Result<Vec<_>>>()?;
    extended_continuity(&tensors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(r: f64, beta: f64) -> FieldPair {
        // A uniform flow on a periodic grid needs a wave number that fits.
        let grid = Grid1D::new(32, std::f64::consts::TAU).unwrap();
        FieldPair::from_fns(&grid, |_| r, |x| beta * x.sin(), 0.0).unwrap()
    }

    fn at_origin(f: &Field1D) -> f64 {
        // x = 0 sits at node n/2, where Θₓ = β cos 0 = β.
        f.values()[f.values().len() / 2]
    }

    #[test]
    fn uniform_state_examples() {
        let state = uniform(2.0, 1.0);
        let q = tensor_q(&state, &Potential::conformal(1.0).unwrap()).unwrap();
        assert!((at_origin(&q.tt) - 9.0).abs() < 1e-12);
        assert!((at_origin(&q.xx) - 18.0).abs() < 1e-12);
        let pot = Potential::power_law(1.0, 2.0).unwrap();
        let q = tensor_q(&state, &pot).unwrap();
        assert!((at_origin(&q.tt) - 5.0).abs() < 1e-12);
        assert!((at_origin(&q.xx) - 6.0).abs() < 1e-12);
        assert!((at_origin(&trace_check(&state, &pot).unwrap()) + 4.0).abs() < 1e-12);
    }

    #[test]
    fn rest_state_without_potential_has_no_stress() {
        let state = uniform(1.5, 0.0);
        let q = tensor_q(&state, &Potential::Free).unwrap();
        for f in [&q.tt, &q.xt, &q.tx, &q.xx] {
            assert_eq!(f.max_abs(), 0.0);
        }
        assert_eq!(trace_check(&state, &Potential::Free).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn quantum_potential_is_rejected() {
        let err = tensor_q(&uniform(1.0, 0.5), &Potential::Quantum { c: 0.0 }).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn extended_tensor_is_traceless_only_for_the_cubic_potential() {
        let state = uniform(1.3, 0.7);
        let cubic = tensor_m(&state, &Potential::conformal(0.4).unwrap()).unwrap();
        assert!(cubic.trace().unwrap().max_abs() < 1e-12);
        let membrane = tensor_m(&state, &Potential::membrane(0.4).unwrap()).unwrap();
        // 3V − RV' = 4c/R.
        let expected = -4.0 * 0.4 / 1.3;
        assert!((at_origin(&membrane.trace().unwrap()) - expected).abs() < 1e-12);
    }

    #[test]
    fn mixed_components_raise_with_the_null_pair() {
        let m = tensor_m(&uniform(1.0, 0.3), &Potential::Free).unwrap();
        assert_eq!(m.mixed(Index::T, Index::T), &m.ts);
        assert_eq!(m.mixed(Index::S, Index::X), &m.xt);
        assert_eq!(m.mixed(Index::X, Index::S), &m.xs);
        assert_eq!(m.component(Index::S, Index::T), m.component(Index::T, Index::S));
    }
}
