//! Exact polynomials and polynomial vector fields on extended space `(x, t, s)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{One, Zero};

/// Exact coefficient ring.
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(q: Rational64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Coeff for Rational64 {
    fn from_rational(q: Rational64) -> Self {
        q
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// Number `a + b√2` with rational `a`, `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QSqrt2 {
    pub rational: Rational64,
    pub radical: Rational64,
}

impl QSqrt2 {
    pub fn new(rational: Rational64, radical: Rational64) -> Self {
        Self { rational, radical }
    }

    /// `√2`.
    pub fn sqrt2() -> Self {
        Self::new(Rational64::zero(), Rational64::one())
    }

    /// `1/√2 = √2/2`.
    pub fn inv_sqrt2() -> Self {
        Self::new(Rational64::zero(), Rational64::new(1, 2))
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rational.is_zero(), self.radical.is_zero()) {
            (_, true) => write!(f, "{}", self.rational),
            (true, false) => write!(f, "{}√2", self.radical),
            (false, false) => write!(f, "({} + {}√2)", self.rational, self.radical),
        }
    }
}

impl Add for QSqrt2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.rational + o.rational, self.radical + o.radical)
    }
}

impl Sub for QSqrt2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.rational - o.rational, self.radical - o.radical)
    }
}

impl Mul for QSqrt2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.rational * o.rational + Rational64::from_integer(2) * self.radical * o.radical,
            self.rational * o.radical + self.radical * o.rational,
        )
    }
}

impl Neg for QSqrt2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.rational, -self.radical)
    }
}

impl Zero for QSqrt2 {
    fn zero() -> Self {
        Self::new(Rational64::zero(), Rational64::zero())
    }
    fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.radical.is_zero()
    }
}

impl One for QSqrt2 {
    fn one() -> Self {
        Self::new(Rational64::one(), Rational64::zero())
    }
}

impl Coeff for QSqrt2 {
    fn from_rational(q: Rational64) -> Self {
        Self::new(q, Rational64::zero())
    }

    fn to_f64(&self) -> f64 {
        self.rational.to_f64() + self.radical.to_f64() * std::f64::consts::SQRT_2
    }
}

/// Variable names in exponent order.
pub const VARIABLES: [&str; 3] = ["x", "t", "s"];

/// Sparse polynomial in `(x, t, s)`; keys are exponent triples.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<C: Coeff> {
    terms: BTreeMap<[u8; 3], C>,
}

pub type RationalPoly = Poly<Rational64>;

impl<C: Coeff> Poly<C> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(c, [0, 0, 0])
    }

    pub fn monomial(c: C, exponents: [u8; 3]) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exponents, c);
        }
        Self { terms }
    }

    /// The coordinate `x` (0), `t` (1) or `s` (2).
    pub fn var(i: usize) -> Self {
        let mut e = [0u8; 3];
        e[i] = 1;
        Self::monomial(C::one(), e)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8; 3], &C)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exponents: [u8; 3]) -> C {
        self.terms.get(&exponents).cloned().unwrap_or_else(C::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().map(|&k| k as u32).sum()).max()
    }

    fn insert_add(&mut self, e: [u8; 3], c: C) {
        let sum = self.coefficient(e) + c;
        if sum.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, sum);
        }
    }

    pub fn scale(&self, k: &C) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.insert_add(*e, c.clone() * k.clone());
        }
        out
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = *e;
            e2[var] -= 1;
            let k = C::from_rational(Rational64::from_integer(e[var] as i64));
            out.insert_add(e2, c.clone() * k);
        }
        out
    }

    pub fn eval(&self, point: [C; 3]) -> C {
        self.terms.iter().fold(C::zero(), |acc, (e, c)| {
            let mut term = c.clone();
            for (v, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    term = term * v.clone();
                }
            }
            acc + term
        })
    }

    pub fn eval_f64(&self, point: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c.to_f64() * point.iter().zip(e).map(|(v, &k)| v.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            out.insert_add(*e, f(c));
        }
        out
    }
}

impl<C: Coeff> Add for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, o: &Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.insert_add(*e, c.clone());
        }
        out
    }
}

impl<C: Coeff> Sub for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, o: &Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.insert_add(*e, -c.clone());
        }
        out
    }
}

impl<C: Coeff> Mul for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, o: &Poly<C>) -> Poly<C> {
        let mut out = Poly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]];
                out.insert_add(e, c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<C: Coeff> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        self.scale(&-C::one())
    }
}

impl<C: Coeff> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let mono: Vec<String> = e
                .iter()
                .zip(VARIABLES)
                .filter(|(k, _)| **k > 0)
                .map(|(k, v)| if *k == 1 { v.to_string() } else { format!("{v}^{k}") })
                .collect();
            if mono.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{c}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Vector field `Σ_μ X^μ ∂_μ` with polynomial components in `(x, t, s)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<C: Coeff> {
    pub components: [Poly<C>; 3],
}

/// Vector field with rational coefficients.
pub type PolyVectorField3 = VectorField<Rational64>;

impl<C: Coeff> VectorField<C> {
    pub fn new(x: Poly<C>, t: Poly<C>, s: Poly<C>) -> Self {
        Self { components: [x, t, s] }
    }

    pub fn zero() -> Self {
        Self::new(Poly::zero(), Poly::zero(), Poly::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.components.iter().filter_map(Poly::degree).max()
    }

    pub fn scale(&self, k: &C) -> Self {
        Self { components: self.components.clone().map(|p| p.scale(k)) }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            &self.components[0] + &o.components[0],
            &self.components[1] + &o.components[1],
            &self.components[2] + &o.components[2],
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-C::one()))
    }

    /// Lie bracket `[X, Y]^μ = X^ν ∂_ν Y^μ − Y^ν ∂_ν X^μ`.
    pub fn bracket(&self, o: &Self) -> Self {
        let comp = |mu: usize| -> Poly<C> {
            (0..3).fold(Poly::zero(), |acc, nu| {
                let a = &self.components[nu] * &o.components[mu].derivative(nu);
                let b = &o.components[nu] * &self.components[mu].derivative(nu);
                &acc + &(&a - &b)
            })
        };
        Self::new(comp(0), comp(1), comp(2))
    }

    pub fn eval(&self, point: [C; 3]) -> [C; 3] {
        [0, 1, 2].map(|i| self.components[i].eval(point.clone()))
    }

    pub fn eval_f64(&self, point: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|i| self.components[i].eval_f64(point))
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D + Copy) -> VectorField<D> {
        VectorField { components: [0, 1, 2].map(|i| self.components[i].map_coeffs(f)) }
    }
}

impl<C: Coeff> fmt::Display for VectorField<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .zip(VARIABLES)
            .filter(|(p, _)| !p.is_zero())
            .map(|(p, v)| format!("({p}) d{v}"))
            .collect();
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn sqrt2_arithmetic() {
        let r2 = QSqrt2::sqrt2();
        assert_eq!(r2 * r2, QSqrt2::from_rational(q(2, 1)));
        assert_eq!(r2 * QSqrt2::inv_sqrt2(), QSqrt2::one());
        assert!((r2.to_f64() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn polynomial_calculus() {
        let x = RationalPoly::var(0);
        let t = RationalPoly::var(1);
        let p = &(&x * &x) + &(&x * &t).scale(&q(3, 2));
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.derivative(0), &x.scale(&q(2, 1)) + &t.scale(&q(3, 2)));
        assert_eq!(p.eval([q(1, 1), q(2, 1), q(5, 1)]), q(4, 1));
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn bracket_of_translations_and_dilation() {
        let one = RationalPoly::constant(q(1, 1));
        let dx = PolyVectorField3::new(one, RationalPoly::zero(), RationalPoly::zero());
        let euler = PolyVectorField3::new(RationalPoly::var(0), RationalPoly::var(1), RationalPoly::var(2));
        assert_eq!(dx.bracket(&euler), dx);
        assert!(dx.bracket(&dx).is_zero());
    }
}
