//! Exact vector fields on extended space, their brackets, conformal factors
//! and the dictionary to the standard `o(3,2)` basis.
//!
//! Extended space carries the flat metric `dx² + 2 dt ds`; the vertical
//! direction `ξ = ∂ₛ` is null.

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::charges::Generator;
use crate::error::{Error, Result};
use crate::poisson::{pairs, errata_rhs, table_rhs, Combination};
use crate::poly::{Coeff, Poly, PolyVectorField3, QSqrt2, RationalPoly, VectorField};

fn q(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn c(n: i64, d: i64) -> RationalPoly {
    RationalPoly::constant(q(n, d))
}

fn var(i: usize) -> RationalPoly {
    RationalPoly::var(i)
}

/// The flat metric of extended space: `g_xx = 1`, `g_ts = g_st = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatMetric3 {
    pub g: [[i64; 3]; 3],
}

impl Default for FlatMetric3 {
    fn default() -> Self {
        Self { g: [[1, 0, 0], [0, 0, 1], [0, 1, 0]] }
    }
}

impl FlatMetric3 {
    pub fn determinant(&self) -> i64 {
        let g = &self.g;
        g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
            + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
    }

    /// Number of positive and negative eigenvalues.
    pub fn signature(&self) -> (usize, usize) {
        // The t-s block [[0,1],[1,0]] has eigenvalues ±1.
        (2, 1)
    }
}

/// The ten generators `X₀ … X₉` in [`Generator::ALL`] order.
pub fn generators() -> [PolyVectorField3; 10] {
    let (x, t, s) = (var(0), var(1), var(2));
    let zero = RationalPoly::zero;
    let half = q(1, 2);
    [
        VectorField::new(zero(), c(1, 1), zero()),
        VectorField::new(c(-1, 1), zero(), zero()),
        VectorField::new(zero(), zero(), c(-1, 1)),
        VectorField::new(t.clone(), zero(), -&x),
        VectorField::new(x.scale(&half), t.clone(), zero()),
        VectorField::new(&x * &t, &t * &t, (&x * &x).scale(&-half)),
        VectorField::new(zero(), t.clone(), -&s),
        VectorField::new(-&s, x.clone(), zero()),
        VectorField::new(-&(&x * &s), (&x * &x).scale(&half), -&(&s * &s)),
        VectorField::new(&(&x * &x).scale(&half) - &(&t * &s), &x * &t, &x * &s),
    ]
}

pub fn generator(g: Generator) -> PolyVectorField3 {
    generators()[g.index()].clone()
}

pub fn lie_bracket(a: &PolyVectorField3, b: &PolyVectorField3) -> PolyVectorField3 {
    a.bracket(b)
}

/// Lie derivative of the flat metric, `(L_X g)_{μν} = g_{σν}∂_μX^σ + g_{μσ}∂_νX^σ`.
pub fn metric_lie_derivative<C: Coeff>(field: &VectorField<C>) -> [[Poly<C>; 3]; 3] {
    let g = FlatMetric3::default().g;
    let coeff = |k: i64| C::from_rational(Rational64::from_integer(k));
    std::array::from_fn(|mu| {
        std::array::from_fn(|nu| {
            (0..3).fold(Poly::zero(), |acc, sigma| {
                let a = field.components[sigma].derivative(mu).scale(&coeff(g[sigma][nu]));
                let b = field.components[sigma].derivative(nu).scale(&coeff(g[mu][sigma]));
                &acc + &(&a + &b)
            })
        })
    })
}

/// Conformal factor `λ` with `L_X g = λ g`, or the first offending component.
pub fn conformal_factor(field: &PolyVectorField3) -> Result<RationalPoly> {
    let g = FlatMetric3::default().g;
    let lie = metric_lie_derivative(field);
    let lambda = lie[0][0].clone();
    for mu in 0..3 {
        for nu in 0..3 {
            let expected = lambda.scale(&Rational64::from_integer(g[mu][nu]));
            let diff = &lie[mu][nu] - &expected;
            if !diff.is_zero() {
                return Err(Error::NotConformal { row: mu, col: nu, component: lie[mu][nu].to_string() });
            }
        }
    }
    Ok(lambda)
}

/// Coordinates of `field` in the basis `X₀ … X₉`, if it lies in their span.
pub fn decompose(field: &PolyVectorField3) -> Option<[Rational64; 10]> {
    let basis = generators();
    // Rows: one per (component, monomial) appearing anywhere.
    let mut keys: Vec<(usize, [u8; 3])> = Vec::new();
    for f in basis.iter().chain(std::iter::once(field)) {
        for (mu, p) in f.components.iter().enumerate() {
            for (e, _) in p.terms() {
                if !keys.contains(&(mu, *e)) {
                    keys.push((mu, *e));
                }
            }
        }
    }
    let mut rows: Vec<Vec<Rational64>> = keys
        .iter()
        .map(|&(mu, e)| {
            let mut row: Vec<Rational64> = basis.iter().map(|b| b.components[mu].coefficient(e)).collect();
            row.push(field.components[mu].coefficient(e));
            row
        })
        .collect();
    let solution = solve_exact(&mut rows, 10)?;
    Some(std::array::from_fn(|i| solution[i]))
}

/// Gauss-Jordan elimination on an augmented matrix with `unknowns` columns.
fn solve_exact(rows: &mut [Vec<Rational64>], unknowns: usize) -> Option<Vec<Rational64>> {
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..unknowns {
        let Some(p) = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(pivot_row, p);
        let inv = Rational64::one() / rows[pivot_row][col];
        for v in rows[pivot_row].iter_mut() {
            *v *= inv;
        }
        let pivot = rows[pivot_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != pivot_row && !row[col].is_zero() {
                let factor = row[col];
                for (v, p) in row.iter_mut().zip(&pivot) {
                    *v -= factor * *p;
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
    }
    if rows[pivot_row..].iter().any(|r| !r[unknowns].is_zero()) {
        return None;
    }
    let mut out = vec![Rational64::zero(); unknowns];
    for (r, &col) in pivots.iter().enumerate() {
        out[col] = rows[r][unknowns];
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureEntry {
    pub left: Generator,
    pub right: Generator,
    /// `[X_left, X_right]` expanded in the `X` basis, labelled by generators.
    pub bracket: Combination,
    pub max_degree: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureTable {
    pub entries: Vec<StructureEntry>,
    /// The unique `σ` with `[X_a, X_b] = σ · {a, b}` for all pairs.
    pub sigma: i8,
    /// Pairs at which the errata table disagrees with the brackets under `σ`.
    pub errata_mismatches: Vec<(Generator, Generator)>,
}

/// All 45 brackets, the uniform sign relating them to the Poisson table, and
/// the disagreements with the errata table.
pub fn structure_table() -> Result<StructureTable> {
    let x = generators();
    let mut entries = Vec::new();
    for (a, b) in pairs() {
        let br = x[a.index()].bracket(&x[b.index()]);
        let coords = decompose(&br).ok_or(Error::ClosureFailure(a.index(), b.index()))?;
        entries.push(StructureEntry {
            left: a,
            right: b,
            bracket: Combination(coords),
            max_degree: br.degree().unwrap_or(0),
        });
    }
    let matches = |sigma: i64, table: fn(Generator, Generator) -> Combination| -> Vec<(Generator, Generator)> {
        entries
            .iter()
            .filter(|e| e.bracket != table(e.left, e.right).scale(Rational64::from_integer(sigma)))
            .map(|e| (e.left, e.right))
            .collect()
    };
    let signs: Vec<i64> = [1, -1].into_iter().filter(|&s| matches(s, table_rhs).is_empty()).collect();
    let [sigma] = signs[..] else {
        return Err(Error::NoUniformSign);
    };
    Ok(StructureTable { errata_mismatches: matches(sigma, errata_rhs), entries, sigma: sigma as i8 })
}

/// Components of the standard `o(3,2)` basis with `√2` coefficients.
pub struct StandardBasis {
    pub p_x: VectorField<QSqrt2>,
    pub p_0: VectorField<QSqrt2>,
    pub p_y: VectorField<QSqrt2>,
    pub m_01: VectorField<QSqrt2>,
    pub m_02: VectorField<QSqrt2>,
    pub m_12: VectorField<QSqrt2>,
    pub d: VectorField<QSqrt2>,
    pub k_0: VectorField<QSqrt2>,
    pub k_1: VectorField<QSqrt2>,
    pub k_2: VectorField<QSqrt2>,
}

fn lift(p: &RationalPoly) -> Poly<QSqrt2> {
    p.map_coeffs(|r| QSqrt2::from_rational(*r))
}

pub fn standard_basis() -> StandardBasis {
    let (x, t, s) = (lift(&var(0)), lift(&var(1)), lift(&var(2)));
    let zero = Poly::<QSqrt2>::zero;
    let k = |n: i64, d: i64| QSqrt2::from_rational(q(n, d));
    let one = || Poly::constant(QSqrt2::one());
    let r2 = QSqrt2::sqrt2();
    let ir2 = QSqrt2::inv_sqrt2();
    let vf = |a: Poly<QSqrt2>, b: Poly<QSqrt2>, c: Poly<QSqrt2>| VectorField::new(a, b, c);
    let xx = &x * &x;
    StandardBasis {
        p_x: vf(one(), zero(), zero()),
        p_0: vf(zero(), Poly::constant(-ir2), Poly::constant(ir2)),
        p_y: vf(zero(), Poly::constant(ir2), Poly::constant(ir2)),
        m_01: vf((&t - &s).scale(&ir2), x.scale(&ir2), (-&x).scale(&ir2)),
        m_02: vf(zero(), t.clone(), -&s),
        m_12: vf((-&(&t + &s)).scale(&ir2), x.scale(&ir2), x.scale(&ir2)),
        d: vf(x.clone(), t.clone(), s.clone()),
        k_0: vf(
            (&x * &(&t - &s)).scale(&r2),
            &(&t * &t).scale(&r2) + &xx.scale(&ir2),
            &(&s * &s).scale(&-r2) - &xx.scale(&ir2),
        ),
        k_1: vf(&xx.scale(&k(1, 2)) - &(&t * &s), &x * &t, &x * &s),
        k_2: vf(
            (&x * &(&t + &s)).scale(&r2),
            &(&t * &t).scale(&r2) - &xx.scale(&ir2),
            &(&s * &s).scale(&r2) - &xx.scale(&ir2),
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DictionaryIdentity {
    /// The identity with `√2` cleared, e.g. `2√2·X5 = K0 + K2`.
    pub identity: String,
    pub holds: bool,
    pub difference: String,
}

/// Check every identity expressing `X_i` in the standard basis, after
/// multiplying both sides by the `√2` factor of its denominator.
pub fn dictionary_check() -> Vec<DictionaryIdentity> {
    let x: Vec<VectorField<QSqrt2>> =
        generators().iter().map(|f| f.map_coeffs(|r| QSqrt2::from_rational(*r))).collect();
    let b = standard_basis();
    let r2 = QSqrt2::sqrt2();
    let two_r2 = r2 * QSqrt2::from_rational(q(2, 1));
    let one = QSqrt2::one();
    let two = QSqrt2::from_rational(q(2, 1));
    let cases: Vec<(&str, usize, QSqrt2, VectorField<QSqrt2>)> = vec![
        ("X1 = -Px", 1, one, b.p_x.scale(&-one)),
        ("√2·X0 = Py - P0", 0, r2, b.p_y.sub(&b.p_0)),
        ("√2·X2 = -(Py + P0)", 2, r2, b.p_y.add(&b.p_0).scale(&-one)),
        ("√2·X3 = M01 - M12", 3, r2, b.m_01.sub(&b.m_12)),
        ("2·X4 = M02 + d", 4, two, b.m_02.add(&b.d)),
        ("2√2·X5 = K0 + K2", 5, two_r2, b.k_0.add(&b.k_2)),
        ("X6 = M02", 6, one, b.m_02.clone()),
        ("√2·X7 = M01 + M12", 7, r2, b.m_01.add(&b.m_12)),
        ("2√2·X8 = K0 - K2", 8, two_r2, b.k_0.sub(&b.k_2)),
        ("X9 = K1", 9, one, b.k_1.clone()),
    ];
    cases
        .into_iter()
        .map(|(name, i, factor, rhs)| {
            let diff = x[i].scale(&factor).sub(&rhs);
            DictionaryIdentity { identity: name.to_string(), holds: diff.is_zero(), difference: diff.to_string() }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(f: &PolyVectorField3, p: [i64; 3]) -> [Rational64; 3] {
        f.eval(p.map(Rational64::from_integer))
    }

    #[test]
    fn generator_values() {
        let x = generators();
        assert_eq!(x[8].components[1], (&var(0) * &var(0)).scale(&q(1, 2)));
        assert_eq!(at(&x[3], [1, 2, 3]), [q(2, 1), q(0, 1), q(-1, 1)]);
        assert_eq!(at(&x[0], [5, -2, 7]), [q(0, 1), q(1, 1), q(0, 1)]);
    }

    #[test]
    fn sample_brackets() {
        let x = generators();
        assert_eq!(x[0].bracket(&x[3]), x[1].scale(&q(-1, 1)));
        assert_eq!(x[2].bracket(&x[8]), x[6].sub(&x[4]).scale(&q(-2, 1)));
        assert_eq!(x[7].bracket(&x[3]), x[6].scale(&q(-1, 1)));
        assert_eq!(x[3].bracket(&x[8]), x[9]);
    }

    #[test]
    fn conformal_factors() {
        let x = generators();
        for i in [0, 1, 2, 3, 6, 7] {
            assert!(conformal_factor(&x[i]).unwrap().is_zero());
        }
        assert_eq!(conformal_factor(&x[4]).unwrap(), c(1, 1));
        assert_eq!(conformal_factor(&x[8]).unwrap(), var(2).scale(&q(-2, 1)));
        let shear = VectorField::new(var(1), RationalPoly::zero(), RationalPoly::zero());
        assert!(matches!(conformal_factor(&shear), Err(Error::NotConformal { .. })));
    }

    #[test]
    fn metric_is_lorentzian() {
        let g = FlatMetric3::default();
        assert_eq!(g.determinant(), -1);
        assert_eq!(g.signature(), (2, 1));
    }

    #[test]
    fn decomposition_rejects_outside_fields() {
        let cubic = VectorField::new(&(&var(0) * &var(0)) * &var(0), RationalPoly::zero(), RationalPoly::zero());
        assert!(decompose(&cubic).is_none());
        let coords = decompose(&generators()[5]).unwrap();
        assert_eq!(coords[5], q(1, 1));
        assert_eq!(coords.iter().filter(|c| !c.is_zero()).count(), 1);
    }
}
