//! Linear realization of the conformal algebra on `R^{3,2}`.
//!
//! Extended space `(x, t, s)` with `ȳy = x² + 2ts` sits inside the null
//! quadric of `x² + 2ts + 2ab` via `y ↦ (y, 1, −½ȳy)`. A 5×5 matrix
//!
//! ```text
//! Z = | Λ   V  W |
//!     | −W̄  −λ 0 |
//!     | −V̄  0  λ |
//! ```
//!
//! with `Λ ∈ o(2,1)` acts on the quadric and projects to the vector field
//! `Λy + V − ½W ȳy + (W̄y + λ)y` on extended space.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::charges::Generator;
use crate::error::{Error, Result};

/// Extended-space point `(x, t, s)`.
pub type Point3 = [f64; 3];
/// Point of `R^{3,2}` in the basis `(x, t, s, a, b)`.
pub type Point5 = [f64; 5];

const PROJECT_TOL: f64 = 1e-12;
const ROTATION_TOL: f64 = 1e-12;

/// Gram matrix of `x² + 2ts` on extended space.
pub const GAMMA3: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]];

/// Quadratic form `ȳy = x² + 2ts`.
pub fn form3(y: &Point3) -> f64 {
    y[0] * y[0] + 2.0 * y[1] * y[2]
}

/// Bilinear form `ȳz`.
pub fn pairing3(y: &Point3, z: &Point3) -> f64 {
    y[0] * z[0] + y[1] * z[2] + y[2] * z[1]
}

/// Quadratic form `x² + 2ts + 2ab`.
pub fn form5(p: &Point5) -> f64 {
    p[0] * p[0] + 2.0 * p[1] * p[2] + 2.0 * p[3] * p[4]
}

/// Real 5×5 matrix in the basis `(x, t, s, a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat5(pub [[f64; 5]; 5]);

impl Mat5 {
    pub fn zero() -> Self {
        Mat5([[0.0; 5]; 5])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..5 {
            m.0[i][i] = 1.0;
        }
        m
    }

    /// Gram matrix of `x² + 2ts + 2ab`.
    pub fn gram() -> Self {
        let mut m = Self::zero();
        m.0[0][0] = 1.0;
        m.0[1][2] = 1.0;
        m.0[2][1] = 1.0;
        m.0[3][4] = 1.0;
        m.0[4][3] = 1.0;
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..5 {
            for j in 0..5 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn scale(&self, k: f64) -> Self {
        Mat5(self.0.map(|row| row.map(|v| v * k)))
    }

    pub fn apply(&self, p: &Point5) -> Point5 {
        let mut out = [0.0; 5];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row.iter().zip(p).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..5).all(|i| (0..5).all(|j| i == j || self.0[i][j] == 0.0))
    }

    /// Residual of `Zᵀ Γ + Γ Z`, zero for algebra elements.
    pub fn algebra_defect(&self) -> f64 {
        let g = Self::gram();
        (self.transpose() * g + g * *self).max_abs()
    }

    /// Residual of `Mᵀ Γ M − Γ`, zero for group elements.
    pub fn group_defect(&self) -> f64 {
        let g = Self::gram();
        (self.transpose() * g * *self - g).max_abs()
    }

    pub fn rotation_block(&self) -> [[f64; 3]; 3] {
        let mut l = [[0.0; 3]; 3];
        for (i, row) in l.iter_mut().enumerate() {
            row.copy_from_slice(&self.0[i][..3]);
        }
        l
    }

    pub fn translation(&self) -> Point3 {
        [self.0[0][3], self.0[1][3], self.0[2][3]]
    }

    pub fn special(&self) -> Point3 {
        [self.0[0][4], self.0[1][4], self.0[2][4]]
    }

    pub fn dilation(&self) -> f64 {
        -self.0[3][3]
    }
}

impl Add for Mat5 {
    type Output = Mat5;
    fn add(self, rhs: Mat5) -> Mat5 {
        let mut m = self;
        for i in 0..5 {
            for j in 0..5 {
                m.0[i][j] += rhs.0[i][j];
            }
        }
        m
    }
}

impl Sub for Mat5 {
    type Output = Mat5;
    fn sub(self, rhs: Mat5) -> Mat5 {
        self + (-rhs)
    }
}

impl Neg for Mat5 {
    type Output = Mat5;
    fn neg(self) -> Mat5 {
        self.scale(-1.0)
    }
}

impl Mul for Mat5 {
    type Output = Mat5;
    fn mul(self, rhs: Mat5) -> Mat5 {
        let mut m = Mat5::zero();
        for i in 0..5 {
            for k in 0..5 {
                let a = self.0[i][k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..5 {
                    m.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        m
    }
}

impl fmt::Display for Mat5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.0 {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>9.4}")).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// `y ↦ (y, 1, −½ȳy)`, a null vector with `a = 1`.
pub fn embed(y: &Point3) -> Point5 {
    [y[0], y[1], y[2], 1.0, -0.5 * form3(y)]
}

/// Back to the affine chart by dividing through by `a`.
pub fn project(p: &Point5) -> Result<Point3> {
    let a = p[3];
    if a.abs() <= PROJECT_TOL {
        return Err(Error::PointAtInfinity(a));
    }
    Ok([p[0] / a, p[1] / a, p[2] / a])
}

/// Assemble an algebra element from its blocks.
pub fn algebra_element(rotation: [[f64; 3]; 3], v: Point3, w: Point3, lambda: f64) -> Result<Mat5> {
    // Λᵀγ + γΛ
    for i in 0..3 {
        for j in 0..3 {
            let d: f64 = (0..3).map(|k| rotation[k][i] * GAMMA3[k][j] + GAMMA3[i][k] * rotation[k][j]).sum();
            if d.abs() > ROTATION_TOL {
                return Err(Error::InvalidRotationBlock);
            }
        }
    }
    let bar = |u: &Point3| [u[0], u[2], u[1]];
    let (vb, wb) = (bar(&v), bar(&w));
    let mut z = Mat5::zero();
    for i in 0..3 {
        z.0[i][..3].copy_from_slice(&rotation[i]);
        z.0[i][3] = v[i];
        z.0[i][4] = w[i];
        z.0[3][i] = -wb[i];
        z.0[4][i] = -vb[i];
    }
    z.0[3][3] = -lambda;
    z.0[4][4] = lambda;
    Ok(z)
}

fn translation_element(v: Point3) -> Mat5 {
    algebra_element([[0.0; 3]; 3], v, [0.0; 3], 0.0).expect("zero block is in o(2,1)")
}

fn special_element(w: Point3) -> Mat5 {
    algebra_element([[0.0; 3]; 3], [0.0; 3], w, 0.0).expect("zero block is in o(2,1)")
}

/// The vertical translation `ξ̂`, with `ξ = ∂_s`.
pub fn xi_hat() -> Mat5 {
    translation_element([0.0, 0.0, 1.0])
}

/// Vector field on extended space induced by an algebra element.
pub fn infinitesimal_action(z: &Mat5, y: &Point3) -> Point3 {
    let l = z.rotation_block();
    let (v, w, lambda) = (z.translation(), z.special(), z.dilation());
    let q = form3(y);
    let wy = pairing3(&w, y);
    let mut out = [0.0; 3];
    for i in 0..3 {
        let ly: f64 = (0..3).map(|k| l[i][k] * y[k]).sum();
        out[i] = ly + v[i] - 0.5 * w[i] * q + (wy + lambda) * y[i];
    }
    out
}

/// Whether `Z⁵ = 0` up to round-off.
pub fn is_nilpotent(z: &Mat5) -> bool {
    let norm = z.max_abs();
    if norm == 0.0 {
        return true;
    }
    let mut p = *z;
    for _ in 0..4 {
        p = p * *z;
    }
    p.max_abs() <= 1e-13 * norm.powi(5).max(f64::MIN_POSITIVE)
}

/// Matrix exponential. Nilpotent and diagonal inputs are exact; anything
/// else goes through scaling and squaring.
pub fn expm(z: &Mat5) -> Mat5 {
    if z.is_diagonal() {
        let mut m = Mat5::zero();
        for i in 0..5 {
            m.0[i][i] = z.0[i][i].exp();
        }
        return m;
    }
    if is_nilpotent(z) {
        return taylor(z, 4);
    }
    let norm = z.max_abs() * 5.0;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let mut m = taylor(&z.scale(0.5f64.powi(squarings)), 18);
    for _ in 0..squarings {
        m = m * m;
    }
    m
}

fn taylor(z: &Mat5, order: usize) -> Mat5 {
    let mut term = Mat5::identity();
    let mut sum = term;
    for k in 1..=order {
        term = (term * *z).scale(1.0 / k as f64);
        sum = sum + term;
    }
    sum
}

/// Finite action `project(exp(Z)·embed(y))`.
pub fn group_action(z: &Mat5, y: &Point3) -> Result<Point3> {
    apply_group(&expm(z), y)
}

/// Action of a group element on extended space.
pub fn apply_group(m: &Mat5, y: &Point3) -> Result<Point3> {
    project(&m.apply(&embed(y)))
}

/// `[Z, ξ̂] = 0`: the element belongs to the extended Schrödinger algebra.
pub fn schrodinger_condition(z: &Mat5) -> bool {
    z.commutator(&xi_hat()).max_abs() <= 1e-12 * z.max_abs().max(1.0)
}

/// Matrix whose induced vector field is the generator `X_g`.
///
/// Matrix commutators map to brackets with a sign flip:
/// `action([Z_a, Z_b]) = −[X_a, X_b]`.
pub fn generator_matrix(g: Generator) -> Mat5 {
    use Generator::*;
    let rot = |l: [[f64; 3]; 3], lambda: f64| {
        algebra_element(l, [0.0; 3], [0.0; 3], lambda).expect("generator blocks are in o(2,1)")
    };
    match g {
        H => translation_element([0.0, 1.0, 0.0]),
        P => translation_element([-1.0, 0.0, 0.0]),
        N => translation_element([0.0, 0.0, -1.0]),
        B => rot([[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]], 0.0),
        Delta => rot([[0.0, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, -0.5]], 0.5),
        K => special_element([0.0, 0.0, 1.0]),
        D => rot([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]], 0.0),
        G => rot([[0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]], 0.0),
        C1 => special_element([0.0, -1.0, 0.0]),
        C2 => special_element([1.0, 0.0, 0.0]),
    }
}

/// The one-parameter subgroups that move the vertical direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    TimeDilation,
    Antiboost,
    C1,
    C2,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::TimeDilation, Family::Antiboost, Family::C1, Family::C2];

    pub fn generator(self) -> Generator {
        match self {
            Family::TimeDilation => Generator::D,
            Family::Antiboost => Generator::G,
            Family::C1 => Generator::C1,
            Family::C2 => Generator::C2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::TimeDilation => "time_dilation",
            Family::Antiboost => "antiboost",
            Family::C1 => "c1",
            Family::C2 => "c2",
        }
    }

    /// Algebra element at parameter `p`.
    pub fn element(self, p: f64) -> Mat5 {
        generator_matrix(self.generator()).scale(p)
    }

    /// Group element at parameter `p`.
    pub fn group_element(self, p: f64) -> Mat5 {
        expm(&self.element(p))
    }

    /// Closed-form finite action, independent of the matrix route.
    pub fn closed_form(self, p: f64, y: &Point3) -> Result<Point3> {
        let [x, t, s] = *y;
        let checked = |den: f64| {
            if den.abs() <= PROJECT_TOL {
                Err(Error::PointAtInfinity(den))
            } else {
                Ok(den)
            }
        };
        Ok(match self {
            Family::TimeDilation => [x, p.exp() * t, (-p).exp() * s],
            Family::Antiboost => [x - p * s, t + p * x - 0.5 * p * p * s, s],
            Family::C1 => {
                let den = checked(1.0 + p * s)?;
                [x / den, t + 0.5 * p * x * x / den, s / den]
            }
            Family::C2 => {
                let den = checked((1.0 - 0.5 * p * x).powi(2) + 0.5 * p * p * t * s)?;
                [(x - p * (0.5 * x * x + t * s)) / den, t / den, s / den]
            }
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown family '{s}'")))
    }
}
