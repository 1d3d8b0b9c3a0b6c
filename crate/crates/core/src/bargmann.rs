//! Projection of extended-space maps to field-dependent symmetries on `(x, t)`.
//!
//! A field `(R, Θ)` lifts to extended space as `ρ = R`, `θ = Θ + s`. A map
//! `f = (g, h, k)` pulls `θ` back to `θ̃ = θ ∘ f`, and the transformed phase
//! `Θ⋆` is the section on which `θ̃` vanishes:
//!
//! ```text
//! Θ(g(x,t,−Θ⋆), h(x,t,−Θ⋆)) + k(x,t,−Θ⋆) = 0
//! x⋆ = g(x,t,−Θ⋆),  t⋆ = h(x,t,−Θ⋆)
//! R⋆ = Ω · J̃ / J⋆ · R(x⋆, t⋆)
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::conformal::{apply_group, embed, Family, Mat5, Point3, GAMMA3};
use crate::error::{Error, Result};
use crate::grid::{Field1D, FieldMap2D, Grid1D, Sample};

const DENOMINATOR_TOL: f64 = 1e-10;
const DEGENERATE_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 50;
const CONTINUATION_STEPS: usize = 8;
const MAP_STEP: f64 = 2e-3;
const FIELD_STEP: f64 = 1e-3;

/// Anything that can report `R`, `Θ` and their first derivatives at `(x, t)`.
pub trait FieldSource {
    fn sample(&self, x: f64, t: f64) -> Result<Sample>;

    /// Time window covered by the data, if bounded.
    fn time_range(&self) -> Option<(f64, f64)> {
        None
    }
}

impl<S: FieldSource + ?Sized> FieldSource for &S {
    fn sample(&self, x: f64, t: f64) -> Result<Sample> {
        (**self).sample(x, t)
    }

    fn time_range(&self) -> Option<(f64, f64)> {
        (**self).time_range()
    }
}

/// Free plane wave `R = R₀`, `Θ = βx − ½β²t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWave {
    pub r0: f64,
    pub beta: f64,
}

impl FieldSource for PlaneWave {
    fn sample(&self, x: f64, t: f64) -> Result<Sample> {
        let b = self.beta;
        Ok(Sample { r: self.r0, theta: b * x - 0.5 * b * b * t, r_x: 0.0, r_t: 0.0, theta_x: b, theta_t: -0.5 * b * b })
    }
}

/// Free self-similar solution `Θ = x²/(2τ)`, `R = A·exp(−ξ²/(2w²))/|τ|`
/// with `τ = t − t₀` and `ξ = x/τ`. An infinite width gives a uniform profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilar {
    pub t0: f64,
    pub amplitude: f64,
    pub width: f64,
}

impl FieldSource for SelfSimilar {
    fn sample(&self, x: f64, t: f64) -> Result<Sample> {
        let tau = t - self.t0;
        if tau.abs() < DENOMINATOR_TOL {
            return Err(Error::SingularTransform { x, t });
        }
        let xi = x / tau;
        let w2 = self.width * self.width;
        let profile = if w2.is_infinite() { 1.0 } else { (-0.5 * xi * xi / w2).exp() };
        let dprofile = if w2.is_infinite() { 0.0 } else { -xi / w2 * profile };
        let r = self.amplitude * profile / tau.abs();
        // ∂ξ/∂x = 1/τ, ∂ξ/∂t = −ξ/τ, ∂(1/|τ|)/∂t = −1/(τ|τ|)
        let r_x = self.amplitude * dprofile / (tau * tau.abs());
        let r_t = self.amplitude * (-dprofile * xi / tau - profile / tau) / tau.abs();
        Ok(Sample { r, theta: 0.5 * x * x / tau, r_x, r_t, theta_x: x / tau, theta_t: -0.5 * xi * xi })
    }
}

/// Wraps a closure `(x, t) -> Sample`.
pub struct FnSource<F>(pub F);

impl<F: Fn(f64, f64) -> Result<Sample>> FieldSource for FnSource<F> {
    fn sample(&self, x: f64, t: f64) -> Result<Sample> {
        (self.0)(x, t)
    }
}

impl FieldSource for FieldMap2D {
    fn sample(&self, x: f64, t: f64) -> Result<Sample> {
        let half = 0.5 * self.grid().length();
        if !(x.is_finite() && (-half..=half).contains(&x)) {
            return Err(Error::ImageOutOfRange { x, t });
        }
        self.sample_derivatives(x, t).map_err(|e| match e {
            Error::TimeOutOfRange { .. } => Error::ImageOutOfRange { x, t },
            other => other,
        })
    }

    fn time_range(&self) -> Option<(f64, f64)> {
        Some((*self.times().first()?, *self.times().last()?))
    }
}

/// Equivariant lift `ρ(x,t,s) = R(x,t)`, `θ(x,t,s) = Θ(x,t) + s`.
#[derive(Debug, Clone, Copy)]
pub struct EquivariantLift<S> {
    pub source: S,
}

pub fn equivariant_lift<S: FieldSource>(source: S) -> EquivariantLift<S> {
    EquivariantLift { source }
}

impl<S: FieldSource> EquivariantLift<S> {
    pub fn rho(&self, y: &Point3) -> Result<f64> {
        Ok(self.source.sample(y[0], y[1])?.r)
    }

    pub fn theta(&self, y: &Point3) -> Result<f64> {
        Ok(self.source.sample(y[0], y[1])?.theta + y[2])
    }

    /// `(∂ₓθ, ∂ₜθ, ∂ₛθ)`; the last entry is 1 by construction.
    pub fn theta_gradient(&self, y: &Point3) -> Result<Point3> {
        let s = self.source.sample(y[0], y[1])?;
        Ok([s.theta_x, s.theta_t, 1.0])
    }

    /// `(∂ₓρ, ∂ₜρ, ∂ₛρ)`; the last entry is 0 by construction.
    pub fn rho_gradient(&self, y: &Point3) -> Result<Point3> {
        let s = self.source.sample(y[0], y[1])?;
        Ok([s.r_x, s.r_t, 0.0])
    }
}

/// Closed-form diffeomorphisms of extended space `(x, t, s) ↦ (g, h, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameter", rename_all = "snake_case")]
pub enum ExtendedMap {
    Identity,
    SpaceTranslation(f64),
    TimeTranslation(f64),
    PhaseShift(f64),
    Boost(f64),
    NrDilation(f64),
    Expansion(f64),
    TimeDilation(f64),
    Antiboost(f64),
    C1(f64),
    C2(f64),
    /// The reflection `t ↔ s`.
    Interchange,
    /// Projective action of a group element.
    Matrix(Mat5),
}

impl ExtendedMap {
    pub const NAMES: [&'static str; 12] = [
        "identity",
        "space_translation",
        "time_translation",
        "phase_shift",
        "boost",
        "nr_dilation",
        "expansion",
        "time_dilation",
        "antiboost",
        "c1",
        "c2",
        "interchange",
    ];

    pub fn from_name(name: &str, parameter: f64) -> Result<Self> {
        use ExtendedMap::*;
        let p = parameter;
        Ok(match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "identity" => Identity,
            "space_translation" => SpaceTranslation(p),
            "time_translation" => TimeTranslation(p),
            "phase_shift" => PhaseShift(p),
            "boost" => Boost(p),
            "nr_dilation" => NrDilation(p),
            "expansion" => Expansion(p),
            "time_dilation" => TimeDilation(p),
            "antiboost" => Antiboost(p),
            "c1" => C1(p),
            "c2" => C2(p),
            "interchange" => Interchange,
            _ => return Err(Error::InvalidParameter(format!("unknown transform '{name}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        use ExtendedMap::*;
        match self {
            Identity => "identity",
            SpaceTranslation(_) => "space_translation",
            TimeTranslation(_) => "time_translation",
            PhaseShift(_) => "phase_shift",
            Boost(_) => "boost",
            NrDilation(_) => "nr_dilation",
            Expansion(_) => "expansion",
            TimeDilation(_) => "time_dilation",
            Antiboost(_) => "antiboost",
            C1(_) => "c1",
            C2(_) => "c2",
            Interchange => "interchange",
            Matrix(_) => "matrix",
        }
    }

    pub fn parameter(&self) -> Option<f64> {
        use ExtendedMap::*;
        match *self {
            SpaceTranslation(p) | TimeTranslation(p) | PhaseShift(p) | Boost(p) | NrDilation(p) | Expansion(p)
            | TimeDilation(p) | Antiboost(p) | C1(p) | C2(p) => Some(p),
            Identity | Interchange | Matrix(_) => None,
        }
    }

    /// The same family at a fraction of the parameter, for continuation.
    pub fn scaled(&self, fraction: f64) -> Option<Self> {
        use ExtendedMap::*;
        let f = fraction;
        Some(match *self {
            Identity => Identity,
            SpaceTranslation(p) => SpaceTranslation(f * p),
            TimeTranslation(p) => TimeTranslation(f * p),
            PhaseShift(p) => PhaseShift(f * p),
            Boost(p) => Boost(f * p),
            NrDilation(p) => NrDilation(f * p),
            Expansion(p) => Expansion(f * p),
            TimeDilation(p) => TimeDilation(f * p),
            Antiboost(p) => Antiboost(f * p),
            C1(p) => C1(f * p),
            C2(p) => C2(f * p),
            Interchange | Matrix(_) => return None,
        })
    }

    /// Whether the map commutes with vertical translations.
    pub fn preserves_fiber(&self) -> bool {
        use ExtendedMap::*;
        match self {
            TimeDilation(p) | Antiboost(p) | C1(p) | C2(p) => *p == 0.0,
            Interchange => false,
            Matrix(m) => crate::conformal::schrodinger_condition(&(*m - Mat5::identity())),
            _ => true,
        }
    }

    /// `(x̃, t̃, s̃) = f(x, t, s)`.
    pub fn apply(&self, y: &Point3) -> Result<Point3> {
        use ExtendedMap::*;
        let [x, t, s] = *y;
        let singular = |den: f64| -> Result<f64> {
            if den.abs() <= DENOMINATOR_TOL {
                Err(Error::SingularTransform { x, t })
            } else {
                Ok(den)
            }
        };
        let family = |fam: Family, p: f64| {
            fam.closed_form(p, y).map_err(|e| match e {
                Error::PointAtInfinity(_) => Error::SingularTransform { x, t },
                other => other,
            })
        };
        Ok(match *self {
            Identity => *y,
            SpaceTranslation(a) => [x + a, t, s],
            TimeTranslation(a) => [x, t + a, s],
            PhaseShift(eta) => [x, t, s - eta],
            Boost(b) => [x + b * t, t, s - b * x - 0.5 * b * b * t],
            NrDilation(l) => [(0.5 * l).exp() * x, l.exp() * t, s],
            Expansion(kappa) => {
                let den = singular(1.0 - kappa * t)?;
                [x / den, t / den, s - 0.5 * kappa * x * x / den]
            }
            TimeDilation(d) => family(Family::TimeDilation, d)?,
            Antiboost(a) => family(Family::Antiboost, a)?,
            C1(e) => family(Family::C1, e)?,
            C2(e) => family(Family::C2, e)?,
            Interchange => [x, s, t],
            Matrix(m) => apply_group(&m, y).map_err(|_| Error::SingularTransform { x, t })?,
        })
    }

    /// Conformal factor `Ω` with `f*g = Ω² g`.
    pub fn omega(&self, y: &Point3) -> Result<f64> {
        use ExtendedMap::*;
        let [x, t, s] = *y;
        let inverse = |den: f64| -> Result<f64> {
            if den.abs() <= DENOMINATOR_TOL {
                Err(Error::SingularTransform { x, t })
            } else {
                Ok(1.0 / den)
            }
        };
        match *self {
            NrDilation(l) => Ok((0.5 * l).exp()),
            Expansion(kappa) => inverse(1.0 - kappa * t),
            C1(e) => inverse(1.0 + e * s),
            C2(e) => inverse((1.0 - 0.5 * e * x).powi(2) + 0.5 * e * e * t * s),
            Matrix(m) => inverse(m.apply(&embed(y))[3]),
            _ => Ok(1.0),
        }
    }

    /// `∂(x̃, t̃, s̃)/∂(x, t, s)` by fourth-order central differences.
    pub fn jacobian_matrix(&self, y: &Point3) -> Result<[[f64; 3]; 3]> {
        let mut jac = [[0.0; 3]; 3];
        for col in 0..3 {
            let h = MAP_STEP * (1.0 + y[col].abs());
            let at = |k: f64| {
                let mut p = *y;
                p[col] += k * h;
                self.apply(&p)
            };
            let (m2, m1, p1, p2) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
            for row in 0..3 {
                jac[row][col] = (m2[row] - 8.0 * m1[row] + 8.0 * p1[row] - p2[row]) / (12.0 * h);
            }
        }
        Ok(jac)
    }

    /// Orientation of the map, read off the Jacobian determinant at a reference point.
    pub fn orientation(&self) -> Result<f64> {
        let refs = [[0.0, 0.0, 0.0], [0.1, 0.2, -0.1], [-0.3, 0.1, 0.2]];
        let mut last = Err(Error::InvalidParameter("no regular reference point".into()));
        for y in &refs {
            match self.jacobian_matrix(y) {
                Ok(j) => return Ok(det3(&j).signum()),
                Err(e) => last = Err(e),
            }
        }
        last
    }

    /// Extended Jacobian `J̃ = ±Ω³`.
    pub fn extended_jacobian(&self, y: &Point3) -> Result<f64> {
        Ok(self.orientation()? * self.omega(y)?.powi(3))
    }

    /// `max |Jᵀ γ J − Ω² γ|` at `y`; zero for a conformal map.
    pub fn conformal_defect(&self, y: &Point3) -> Result<f64> {
        let j = self.jacobian_matrix(y)?;
        let w2 = self.omega(y)?.powi(2);
        let mut worst: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let pulled: f64 = (0..3)
                    .flat_map(|m| (0..3).map(move |n| (m, n)))
                    .map(|(m, n)| j[m][a] * GAMMA3[m][n] * j[n][b])
                    .sum();
                worst = worst.max((pulled - w2 * GAMMA3[a][b]).abs());
            }
        }
        Ok(worst)
    }
}

impl fmt::Display for ExtendedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.parameter() {
            Some(p) => write!(f, "{}({p})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Transformed fields at one point of the query grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointImage {
    pub x: f64,
    pub t: f64,
    pub x_star: f64,
    pub t_star: f64,
    pub theta_star: f64,
    pub r_star: f64,
    pub j_star: f64,
    pub theta_star_x: f64,
    pub theta_star_t: f64,
    pub residual: f64,
    pub iterations: usize,
}

struct Root {
    value: f64,
    residual: f64,
    iterations: usize,
}

/// Newton with backtracking on `f(u) = 0`, where `eval` returns `(f, f')`.
fn newton(x: f64, u0: f64, mut eval: impl FnMut(f64) -> Result<(f64, f64)>) -> Result<Root> {
    let mut u = u0;
    let (mut f, mut df) = eval(u)?;
    for it in 0..MAX_ITERATIONS {
        if f.abs() <= RESIDUAL_TOL {
            return Ok(Root { value: u, residual: f.abs(), iterations: it });
        }
        if df.abs() < DEGENERATE_TOL {
            return Err(Error::DegenerateSection { x });
        }
        let step = f / df;
        let mut lambda = 1.0;
        loop {
            let trial = u - lambda * step;
            match eval(trial) {
                Ok((ft, dft)) if ft.abs() < f.abs() || lambda < 1e-3 => {
                    u = trial;
                    f = ft;
                    df = dft;
                    break;
                }
                Ok(_) | Err(Error::ImageOutOfRange { .. }) | Err(Error::SingularTransform { .. }) if lambda >= 1e-3 => {
                    lambda *= 0.5
                }
                Ok((ft, dft)) => {
                    u = trial;
                    f = ft;
                    df = dft;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if step.abs() * lambda <= 4.0 * f64::EPSILON * (1.0 + u.abs()) && f.abs() <= 1e3 * RESIDUAL_TOL {
            return Ok(Root { value: u, residual: f.abs(), iterations: it + 1 });
        }
    }
    if f.abs() <= RESIDUAL_TOL {
        Ok(Root { value: u, residual: f.abs(), iterations: MAX_ITERATIONS })
    } else {
        Err(Error::SectionSolveFailed { x, residual: f.abs() })
    }
}

/// Section equation `Φ(u) = Θ(g, h) + k` at `(x, t, −u)` and its derivative.
fn section_equation<S: FieldSource>(map: &ExtendedMap, source: &S, x: f64, t: f64, u: f64) -> Result<(f64, f64)> {
    let y = [x, t, -u];
    let [g, h, k] = map.apply(&y)?;
    let jac = map.jacobian_matrix(&y)?;
    let s = source.sample(g, h)?;
    let phi = s.theta + k;
    let dphi = -(s.theta_x * jac[0][2] + s.theta_t * jac[1][2] + jac[2][2]);
    Ok((phi, dphi))
}

fn solve_section<S: FieldSource>(map: &ExtendedMap, source: &S, x: f64, t: f64) -> Result<Root> {
    let u0 = source.sample(x, t)?.theta;
    let plain = newton(x, u0, |u| section_equation(map, source, x, t, u));
    match plain {
        Err(Error::SectionSolveFailed { .. }) | Err(Error::ImageOutOfRange { .. }) => {}
        other => return other,
    }
    let Some(_) = map.scaled(1.0) else { return plain };
    let mut u = u0;
    let mut root = None;
    for step in 1..=CONTINUATION_STEPS {
        let partial = map.scaled(step as f64 / CONTINUATION_STEPS as f64).expect("scalable");
        let r = newton(x, u, |v| section_equation(&partial, source, x, t, v))?;
        u = r.value;
        root = Some(r);
    }
    Ok(root.expect("at least one continuation step"))
}

/// Transformed fields at one point by the generic section construction.
pub fn project_point<S: FieldSource>(map: &ExtendedMap, source: &S, x: f64, t: f64) -> Result<PointImage> {
    let root = solve_section(map, source, x, t)?;
    let u = root.value;
    let y = [x, t, -u];
    let [x_star, t_star, _] = map.apply(&y)?;
    let jac = map.jacobian_matrix(&y)?;
    let s = source.sample(x_star, t_star)?;
    // Implicit differentiation of Φ(x, t, u) = 0.
    let phi_x = s.theta_x * jac[0][0] + s.theta_t * jac[1][0] + jac[2][0];
    let phi_t = s.theta_x * jac[0][1] + s.theta_t * jac[1][1] + jac[2][1];
    let phi_u = -(s.theta_x * jac[0][2] + s.theta_t * jac[1][2] + jac[2][2]);
    if phi_u.abs() < DEGENERATE_TOL {
        return Err(Error::DegenerateSection { x });
    }
    let (u_x, u_t) = (-phi_x / phi_u, -phi_t / phi_u);
    let xs_x = jac[0][0] - jac[0][2] * u_x;
    let xs_t = jac[0][1] - jac[0][2] * u_t;
    let ts_x = jac[1][0] - jac[1][2] * u_x;
    let ts_t = jac[1][1] - jac[1][2] * u_t;
    let j_star = xs_x * ts_t - xs_t * ts_x;
    if j_star.abs() < DEGENERATE_TOL {
        return Err(Error::DegenerateSection { x });
    }
    let r_star = map.omega(&y)? * map.extended_jacobian(&y)? / j_star * s.r;
    Ok(PointImage {
        x,
        t,
        x_star,
        t_star,
        theta_star: u,
        r_star,
        j_star,
        theta_star_x: u_x,
        theta_star_t: u_t,
        residual: root.residual,
        iterations: root.iterations,
    })
}

/// `J⋆` by finite differences of the projected coordinates, as a cross-check
/// of the implicit differentiation used in [`project_point`].
pub fn j_star_fd<S: FieldSource>(map: &ExtendedMap, source: &S, x: f64, t: f64, h: f64) -> Result<f64> {
    let at = |dx: f64, dt: f64| project_point(map, source, x + dx, t + dt).map(|p| (p.x_star, p.t_star));
    let d = |a: (f64, f64), b: (f64, f64), c: (f64, f64), e: (f64, f64)| {
        ((a.0 - 8.0 * b.0 + 8.0 * c.0 - e.0) / (12.0 * h), (a.1 - 8.0 * b.1 + 8.0 * c.1 - e.1) / (12.0 * h))
    };
    let dx = d(at(-2.0 * h, 0.0)?, at(-h, 0.0)?, at(h, 0.0)?, at(2.0 * h, 0.0)?);
    let dt = d(at(0.0, -2.0 * h)?, at(0.0, -h)?, at(0.0, h)?, at(0.0, 2.0 * h)?);
    Ok(dx.0 * dt.1 - dt.0 * dx.1)
}

fn explicit(x: f64, t: f64, x_star: f64, t_star: f64, theta_star: f64, r_star: f64, j_star: f64) -> PointImage {
    PointImage {
        x,
        t,
        x_star,
        t_star,
        theta_star,
        r_star,
        j_star,
        theta_star_x: f64::NAN,
        theta_star_t: f64::NAN,
        residual: 0.0,
        iterations: 0,
    }
}

/// Transformed fields at one point from the closed-form transformation laws.
pub fn named_point<S: FieldSource>(map: &ExtendedMap, source: &S, x: f64, t: f64) -> Result<PointImage> {
    use ExtendedMap::*;
    let nonzero = |den: f64| -> Result<f64> {
        if den.abs() <= DENOMINATOR_TOL {
            Err(Error::SingularTransform { x, t })
        } else {
            Ok(den)
        }
    };
    match *map {
        Identity => {
            let s = source.sample(x, t)?;
            Ok(explicit(x, t, x, t, s.theta, s.r, 1.0))
        }
        SpaceTranslation(a) => {
            let s = source.sample(x + a, t)?;
            Ok(explicit(x, t, x + a, t, s.theta, s.r, 1.0))
        }
        TimeTranslation(a) => {
            let s = source.sample(x, t + a)?;
            Ok(explicit(x, t, x, t + a, s.theta, s.r, 1.0))
        }
        PhaseShift(eta) => {
            let s = source.sample(x, t)?;
            Ok(explicit(x, t, x, t, s.theta - eta, s.r, 1.0))
        }
        Boost(b) => {
            let xs = x + b * t;
            let s = source.sample(xs, t)?;
            Ok(explicit(x, t, xs, t, s.theta - b * x - 0.5 * b * b * t, s.r, 1.0))
        }
        NrDilation(l) => {
            let (xs, ts) = ((0.5 * l).exp() * x, l.exp() * t);
            let s = source.sample(xs, ts)?;
            Ok(explicit(x, t, xs, ts, s.theta, (0.5 * l).exp() * s.r, (1.5 * l).exp()))
        }
        Expansion(kappa) => {
            let den = nonzero(1.0 - kappa * t)?;
            let (xs, ts) = (x / den, t / den);
            let s = source.sample(xs, ts)?;
            let theta = s.theta - kappa * x * x / (2.0 * den);
            Ok(explicit(x, t, xs, ts, theta, s.r / den, den.powi(-3)))
        }
        TimeDilation(d) => {
            let ts = d.exp() * t;
            let s = source.sample(x, ts)?;
            Ok(explicit(x, t, x, ts, d.exp() * s.theta, (-d).exp() * s.r, d.exp()))
        }
        Antiboost(a) => {
            // Unknown x⋆, with t⋆ = t + ½α(x + x⋆).
            let u0 = x + a * source.sample(x, t)?.theta;
            let root = newton(x, u0, |xs| {
                let s = source.sample(xs, t + 0.5 * a * (x + xs))?;
                Ok((xs - x - a * s.theta, 1.0 - a * s.theta_x - 0.5 * a * a * s.theta_t))
            })?;
            let xs = root.value;
            let ts = t + 0.5 * a * (x + xs);
            let s = source.sample(xs, ts)?;
            let j_star = 1.0 / nonzero(1.0 - a * s.theta_x - 0.5 * a * a * s.theta_t)?;
            Ok(PointImage {
                residual: root.residual,
                iterations: root.iterations,
                ..explicit(x, t, xs, ts, s.theta, s.r / j_star, j_star)
            })
        }
        C1(e) => {
            // Unknown w = 1 + ε₁Θ(x⋆, t⋆), with x⋆ = x w, t⋆ = t + ½ε₁x² w.
            let image = |w: f64| (x * w, t + 0.5 * e * x * x * w);
            let w0 = 1.0 + e * source.sample(x, t)?.theta;
            let root = newton(x, w0, |w| {
                let (xs, ts) = image(w);
                let s = source.sample(xs, ts)?;
                Ok((w - 1.0 - e * s.theta, 1.0 - e * (x * s.theta_x + 0.5 * e * x * x * s.theta_t)))
            })?;
            let (xs, ts) = image(root.value);
            let s = source.sample(xs, ts)?;
            let w = nonzero(1.0 + e * s.theta)?;
            let j_star = w / nonzero(1.0 - e * x * s.theta_x - 0.5 * e * e * x * x * s.theta_t)?;
            let r = w.powi(4) * s.r / j_star;
            Ok(PointImage {
                residual: root.residual,
                iterations: root.iterations,
                ..explicit(x, t, xs, ts, s.theta / w, r, j_star)
            })
        }
        C2(e) => {
            // Unknown v = Θ(x⋆, t⋆).
            let a = nonzero(1.0 - 0.5 * e * x)?;
            let image = |v: f64| ((x + e * t * v) / a, (t + 0.5 * e * e * t * t * v) / (a * a));
            let v0 = source.sample(x, t)?.theta;
            let root = newton(x, v0, |v| {
                let (xs, ts) = image(v);
                let s = source.sample(xs, ts)?;
                let d = 1.0 - s.theta_x * e * t / a - s.theta_t * 0.5 * e * e * t * t / (a * a);
                Ok((v - s.theta, d))
            })?;
            let (xs, ts) = image(root.value);
            let s = source.sample(xs, ts)?;
            let q = nonzero(1.0 + 0.5 * e * e * t * s.theta)?;
            let bracket = a * a - e * t * a * s.theta_x - 0.5 * e * e * t * t * s.theta_t;
            let j_star = q / nonzero(bracket * a * a)?;
            let r = q.powi(4) / a.powi(8) * s.r / j_star;
            Ok(PointImage {
                residual: root.residual,
                iterations: root.iterations,
                ..explicit(x, t, xs, ts, a * a * s.theta / q, r, j_star)
            })
        }
        Interchange => interchange_point(source, x, t),
        Matrix(_) => Err(Error::InvalidParameter("matrix maps have no closed form; use project_point".into())),
    }
}

/// The `t ↔ s` reflection: `Θ(x, −Θ⋆) + t = 0`, `t⋆ = −Θ⋆`,
/// `R⋆ = R(x, −Θ⋆) · ∂ₜΘ(x, −Θ⋆)`.
pub fn interchange_point<S: FieldSource>(source: &S, x: f64, t: f64) -> Result<PointImage> {
    let guess = match source.time_range() {
        Some((a, b)) => -0.5 * (a + b),
        None => -t,
    };
    let root = newton(x, guess, |u| {
        let s = source.sample(x, -u)?;
        Ok((s.theta + t, -s.theta_t))
    })
    .map_err(|e| match e {
        Error::DegenerateSection { .. } => Error::PhaseNotInvertible,
        other => other,
    })?;
    let u = root.value;
    let s = source.sample(x, -u)?;
    if s.theta_t.abs() < DEGENERATE_TOL {
        return Err(Error::PhaseNotInvertible);
    }
    Ok(PointImage {
        x,
        t,
        x_star: x,
        t_star: -u,
        theta_star: u,
        r_star: s.r * s.theta_t,
        j_star: -1.0 / s.theta_t,
        theta_star_x: s.theta_x / s.theta_t,
        theta_star_t: 1.0 / s.theta_t,
        residual: root.residual,
        iterations: root.iterations,
    })
}

/// Transformed fields on a whole grid at a fixed time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionSolution {
    pub t: f64,
    #[serde(skip)]
    pub x_star: Field1D,
    #[serde(skip)]
    pub t_star: Field1D,
    #[serde(skip)]
    pub theta_star: Field1D,
    #[serde(skip)]
    pub r_star: Field1D,
    #[serde(skip)]
    pub j_star: Field1D,
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
    pub max_residual: f64,
}

impl SectionSolution {
    fn collect(grid: &Grid1D, t: f64, points: Vec<PointImage>) -> Result<Self> {
        let col = |f: fn(&PointImage) -> f64| Field1D::new(grid, points.iter().map(f).collect());
        Ok(SectionSolution {
            t,
            x_star: col(|p| p.x_star)?,
            t_star: col(|p| p.t_star)?,
            theta_star: col(|p| p.theta_star)?,
            r_star: col(|p| p.r_star)?,
            j_star: col(|p| p.j_star)?,
            residuals: points.iter().map(|p| p.residual).collect(),
            iterations: points.iter().map(|p| p.iterations).collect(),
            max_residual: points.iter().map(|p| p.residual).fold(0.0, f64::max),
        })
    }
}

fn over_grid(grid: &Grid1D, t: f64, point: impl Fn(f64) -> Result<PointImage>) -> Result<SectionSolution> {
    let points = grid.coords().into_iter().map(point).collect::<Result<Vec<_>>>()?;
    SectionSolution::collect(grid, t, points)
}

/// Generic section construction over every node of `grid` at time `t`.
pub fn project_transform<S: FieldSource>(
    map: &ExtendedMap,
    source: &S,
    grid: &Grid1D,
    t: f64,
) -> Result<SectionSolution> {
    over_grid(grid, t, |x| project_point(map, source, x, t))
}

/// Closed-form transformation laws over every node of `grid` at time `t`.
pub fn named_transform<S: FieldSource>(
    map: &ExtendedMap,
    source: &S,
    grid: &Grid1D,
    t: f64,
) -> Result<SectionSolution> {
    over_grid(grid, t, |x| named_point(map, source, x, t))
}

/// `t ↔ s` over every node of `grid` at time `t`. When the source covers a
/// bounded time window, `Θ(x, ·)` must be strictly monotone on it.
pub fn interchange_transform<S: FieldSource>(source: &S, grid: &Grid1D, t: f64) -> Result<SectionSolution> {
    if let Some((a, b)) = source.time_range() {
        for x in grid.coords() {
            check_monotone(source, x, a, b)?;
        }
    }
    over_grid(grid, t, |x| interchange_point(source, x, t))
}

fn check_monotone<S: FieldSource>(source: &S, x: f64, a: f64, b: f64) -> Result<()> {
    const PROBES: usize = 16;
    let mut sign = 0.0;
    for i in 0..=PROBES {
        let tt = a + (b - a) * i as f64 / PROBES as f64;
        let d = source.sample(x, tt)?.theta_t;
        if d.abs() < DEGENERATE_TOL || (sign != 0.0 && d.signum() != sign) {
            return Err(Error::PhaseNotInvertible);
        }
        sign = d.signum();
    }
    Ok(())
}

/// Lazily transformed fields, usable as a new source. Phase derivatives come
/// from implicit differentiation; density derivatives by central differences.
pub struct Transformed<S> {
    pub map: ExtendedMap,
    pub source: S,
}

impl<S: FieldSource> Transformed<S> {
    fn point(&self, x: f64, t: f64) -> Result<PointImage> {
        match self.map {
            ExtendedMap::Interchange => interchange_point(&self.source, x, t),
            _ => project_point(&self.map, &self.source, x, t),
        }
    }
}

impl<S: FieldSource> FieldSource for Transformed<S> {
    fn sample(&self, x: f64, t: f64) -> Result<Sample> {
        let p = self.point(x, t)?;
        let h = FIELD_STEP;
        let r = |dx: f64, dt: f64| self.point(x + dx, t + dt).map(|q| q.r_star);
        let r_x = (r(-2.0 * h, 0.0)? - 8.0 * r(-h, 0.0)? + 8.0 * r(h, 0.0)? - r(2.0 * h, 0.0)?) / (12.0 * h);
        let r_t = (r(0.0, -2.0 * h)? - 8.0 * r(0.0, -h)? + 8.0 * r(0.0, h)? - r(0.0, 2.0 * h)?) / (12.0 * h);
        Ok(Sample { r: p.r_star, theta: p.theta_star, r_x, r_t, theta_x: p.theta_star_x, theta_t: p.theta_star_t })
    }
}

/// Residuals of the free equations `Rₜ + (RΘₓ)ₓ` and `Θₜ + ½Θₓ²` at a point,
/// with the flux derivative taken by central differences of step `h`.
pub fn free_equation_residual<S: FieldSource>(source: &S, x: f64, t: f64, h: f64) -> Result<(f64, f64)> {
    let s = source.sample(x, t)?;
    let flux = |dx: f64| source.sample(x + dx, t).map(|q| q.r * q.theta_x);
    let dflux = (flux(-2.0 * h)? - 8.0 * flux(-h)? + 8.0 * flux(h)? - flux(2.0 * h)?) / (12.0 * h);
    Ok((s.r_t + dflux, s.theta_t + 0.5 * s.theta_x * s.theta_x))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PW: PlaneWave = PlaneWave { r0: 0.8, beta: 0.6 };

    #[test]
    fn lift_is_equivariant() {
        let lift = equivariant_lift(PW);
        let (x, t) = (0.7, 0.4);
        let theta = PW.sample(x, t).unwrap().theta;
        assert_eq!(lift.theta(&[x, t, -theta]).unwrap(), 0.0);
        assert_eq!(lift.theta_gradient(&[x, t, 3.0]).unwrap()[2], 1.0);
        let rhos: Vec<f64> = [-1.0, 0.2, 5.0].iter().map(|&s| lift.rho(&[x, t, s]).unwrap()).collect();
        assert!(rhos.iter().all(|&r| r == rhos[0]));
    }

    #[test]
    fn maps_are_conformal_with_the_stated_factor() {
        let maps = [
            ExtendedMap::Boost(0.4),
            ExtendedMap::NrDilation(0.3),
            ExtendedMap::Expansion(0.2),
            ExtendedMap::TimeDilation(-0.4),
            ExtendedMap::Antiboost(0.5),
            ExtendedMap::C1(0.3),
            ExtendedMap::C2(-0.25),
            ExtendedMap::Interchange,
            ExtendedMap::Matrix(Family::C2.group_element(0.4)),
        ];
        for map in maps {
            for y in [[0.3, 0.2, -0.4], [-0.5, 0.7, 0.1]] {
                assert!(map.conformal_defect(&y).unwrap() < 1e-9, "{map}");
                let det = det3(&map.jacobian_matrix(&y).unwrap());
                assert!((det - map.extended_jacobian(&y).unwrap()).abs() < 1e-9, "{map}");
            }
        }
        assert_eq!(ExtendedMap::Interchange.orientation().unwrap(), -1.0);
    }

    #[test]
    fn identity_parameter_is_identity() {
        for name in ExtendedMap::NAMES.iter().filter(|n| **n != "interchange") {
            let map = ExtendedMap::from_name(name, 0.0).unwrap();
            let y = [0.3, -0.2, 0.9];
            assert_eq!(map.apply(&y).unwrap(), y, "{name}");
            assert_eq!(map.omega(&y).unwrap(), 1.0, "{name}");
        }
    }

    #[test]
    fn antiboost_on_plane_wave() {
        let alpha = 0.4;
        let beta_p = PW.beta / (1.0 - 0.5 * alpha * PW.beta);
        let r_p = PW.r0 * (1.0 - 0.5 * alpha * PW.beta).powi(2);
        for (x, t) in [(0.3, 0.5), (-1.2, 1.0)] {
            let p = project_point(&ExtendedMap::Antiboost(alpha), &PW, x, t).unwrap();
            assert!((p.theta_star - (beta_p * x - 0.5 * beta_p * beta_p * t)).abs() < 1e-12);
            assert!((p.r_star - r_p).abs() < 1e-10);
            assert!(p.residual < 1e-12);
        }
    }

    #[test]
    fn time_dilation_on_plane_wave() {
        let d: f64 = 0.3;
        let b = d.exp() * PW.beta;
        let p = project_point(&ExtendedMap::TimeDilation(d), &PW, 0.9, 0.4).unwrap();
        assert!((p.theta_star - (b * 0.9 - 0.5 * b * b * 0.4)).abs() < 1e-12);
        assert!((p.r_star - (-d).exp() * PW.r0).abs() < 1e-10);
    }

    #[test]
    fn boost_shifts_slope() {
        let p = named_point(&ExtendedMap::Boost(0.25), &PW, 0.7, 0.3).unwrap();
        let b = PW.beta - 0.25;
        assert!((p.theta_star - (b * 0.7 - 0.5 * b * b * 0.3)).abs() < 1e-14);
    }

    #[test]
    fn interchange_on_linear_phase() {
        let k = 2.0;
        let src = FnSource(|x: f64, t: f64| {
            Ok(Sample { r: 1.0 + 0.1 * x + 0.2 * t, theta: k * t, r_x: 0.1, r_t: 0.2, theta_x: 0.0, theta_t: k })
        });
        let (x, t) = (0.5, 0.8);
        let p = interchange_point(&src, x, t).unwrap();
        assert!((p.theta_star - t / k).abs() < 1e-14);
        assert!((p.t_star + t / k).abs() < 1e-14);
        let r_expect = k * (1.0 + 0.1 * x + 0.2 * (-t / k));
        assert!((p.r_star - r_expect).abs() < 1e-14);
    }

    #[test]
    fn interchange_needs_time_dependence() {
        let src = FnSource(|_x: f64, _t: f64| {
            Ok(Sample { r: 1.0, theta: 0.3, r_x: 0.0, r_t: 0.0, theta_x: 0.0, theta_t: 0.0 })
        });
        assert!(matches!(interchange_point(&src, 0.0, 1.0), Err(Error::PhaseNotInvertible)));
    }

    #[test]
    fn c1_pole_is_singular() {
        assert!(matches!(ExtendedMap::C1(1.0).apply(&[0.0, 0.0, -1.0]), Err(Error::SingularTransform { .. })));
    }

    #[test]
    fn implicit_jacobian_matches_finite_differences() {
        let src = SelfSimilar { t0: -1.0, amplitude: 1.0, width: 1.5 };
        for map in [ExtendedMap::Antiboost(0.3), ExtendedMap::C1(0.2), ExtendedMap::C2(0.2)] {
            let p = project_point(&map, &src, 0.4, 0.5).unwrap();
            let fd = j_star_fd(&map, &src, 0.4, 0.5, 1e-3).unwrap();
            assert!((p.j_star - fd).abs() < 1e-8, "{map}: {} vs {fd}", p.j_star);
        }
    }
}
