//! Periodic spatial grid, field storage and the spectral toolkit.
//!
//! The domain is `x ∈ [-L/2, L/2)` sampled at `n` equispaced nodes
//! `x_j = -L/2 + j h`, `h = L / n`. Derivatives are Fourier
//! multipliers; integrals are the periodic trapezoid rule `h Σ f_j`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid with cached FFT plans.
#[derive(Clone)]
pub struct Grid1D {
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid1D").field("n", &self.n).field("length", &self.length).finish()
    }
}

impl PartialEq for Grid1D {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

/// Serializable description of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
}

impl Grid1D {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n} must be a power of two and at least 16")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length {length} must be positive")));
        }
        let mut planner = FftPlanner::new();
        Ok(Self { n, length, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) })
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        Self::new(spec.n, spec.length)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { n: self.n, length: self.length }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Smooth periodic stand-in for `x`: equal to `x` away from the seam at
    /// `±L/2` up to `erfc` tails, and returning to zero across the seam over a
    /// width `L/32`. Weights `x`, `x²` in charge densities use it so that
    /// `∫ x ∂ₓf = −∫ f` holds to spectral accuracy.
    pub fn windowed_coords(&self) -> Vec<f64> {
        let half = 0.5 * self.length;
        let width = self.length / 32.0;
        self.coords()
            .into_iter()
            .map(|x| {
                if x == -half {
                    return 0.0;
                }
                x - half * (libm::erf((x - half) / width) + libm::erf((x + half) / width))
            })
            .collect()
    }

    /// Angular wavenumber of FFT bin `j`; the Nyquist bin is reported as positive.
    pub fn wavenumber(&self, j: usize) -> f64 {
        let n = self.n as isize;
        let j = j as isize;
        let m = if j <= n / 2 { j } else { j - n };
        2.0 * std::f64::consts::PI * m as f64 / self.length
    }

    pub(crate) fn fft(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    pub(crate) fn fft_complex(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        buf
    }

    pub(crate) fn ifft_complex(&self, mut spectrum: Vec<Complex64>) -> Vec<Complex64> {
        self.inverse.process(&mut spectrum);
        let scale = 1.0 / self.n as f64;
        spectrum.iter_mut().for_each(|c| *c *= scale);
        spectrum
    }

    pub(crate) fn ifft_real(&self, spectrum: Vec<Complex64>) -> Vec<f64> {
        self.ifft_complex(spectrum).into_iter().map(|c| c.re).collect()
    }

    /// Spectral derivative of raw samples. Odd orders drop the Nyquist bin.
    pub(crate) fn diff(&self, values: &[f64], order: u32) -> Vec<f64> {
        if values.iter().all(|&v| v == values[0]) {
            return vec![0.0; self.n];
        }
        let mut spec = self.fft(values);
        let nyquist = self.n / 2;
        for (j, c) in spec.iter_mut().enumerate() {
            let k = self.wavenumber(j);
            let factor = match order {
                1 if j == nyquist => Complex64::new(0.0, 0.0),
                1 => Complex64::new(0.0, k),
                2 => Complex64::new(-k * k, 0.0),
                _ => Complex64::new(0.0, k).powu(order),
            };
            *c *= factor;
        }
        self.ifft_real(spec)
    }

    /// Two-thirds rule: zero every mode with `|m| > n/3`.
    pub(crate) fn dealias(&self, values: &[f64]) -> Vec<f64> {
        let mut spec = self.fft(values);
        let cutoff = self.n / 3;
        for (j, c) in spec.iter_mut().enumerate() {
            let m = if j <= self.n / 2 { j } else { self.n - j };
            if m > cutoff {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        self.ifft_real(spec)
    }

    /// Fraction of the (mean-free) spectral energy carried by the upper half of
    /// the band kept by the two-thirds rule, `|m| > n/6`.
    pub(crate) fn tail_fraction(&self, values: &[f64]) -> f64 {
        let spec = self.fft(values);
        let cutoff = self.n / 6;
        let mut total = 0.0;
        let mut tail = 0.0;
        for (j, c) in spec.iter().enumerate().skip(1) {
            let m = if j <= self.n / 2 { j } else { self.n - j };
            let e = c.norm_sqr();
            total += e;
            if m > cutoff {
                tail += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    pub(crate) fn quad(&self, values: &[f64]) -> f64 {
        self.spacing() * values.iter().sum::<f64>()
    }

    /// Fractional node index of `x` after periodic wrapping, snapped to an
    /// integer when within rounding distance of a node.
    pub(crate) fn node_coordinate(&self, x: f64) -> f64 {
        let u = (x + 0.5 * self.length) / self.spacing();
        let n = self.n as f64;
        let mut u = u.rem_euclid(n);
        let r = u.round();
        if (u - r).abs() < 1e-9 {
            u = r;
        }
        if u >= n {
            u -= n;
        }
        u
    }
}

/// Real samples of one scalar field on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field1D {
    pub fn new(grid: &Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidGrid(format!("{} values for a grid of {} points", values.len(), grid.n())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn from_fn(grid: &Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.coords().into_iter().map(f).collect())
    }

    pub fn constant(grid: &Grid1D, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.n()])
    }

    pub fn zeros(grid: &Grid1D) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.n()] }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Spectral derivative of order 1 or 2.
    pub fn derivative(&self, order: u32) -> Result<Field1D> {
        if !(1..=2).contains(&order) {
            return Err(Error::InvalidParameter(format!("derivative order {order} not in {{1, 2}}")));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Field1D::new(&self.grid, self.grid.diff(&self.values, order))
    }

    /// Periodic trapezoid quadrature `h Σ f_j`.
    pub fn integrate(&self) -> f64 {
        self.grid.quad(&self.values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Field1D> {
        Field1D::new(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Field1D, f: impl Fn(f64, f64) -> f64) -> Result<Field1D> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Field1D::new(&self.grid, self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Fluid state `(R, Θ)` at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub r: Field1D,
    pub theta: Field1D,
    pub t: f64,
}

/// Relative undershoot below zero accepted as round-off in `R`.
pub const NEGATIVE_DENSITY_TOL: f64 = 1e-10;

impl FieldPair {
    pub fn new(r: Field1D, theta: Field1D, t: f64) -> Result<Self> {
        if r.grid() != theta.grid() {
            return Err(Error::GridMismatch);
        }
        if !t.is_finite() {
            return Err(Error::NonFinite);
        }
        if r.min() < -NEGATIVE_DENSITY_TOL * r.max_abs() {
            return Err(Error::InvalidParameter(format!("negative density min(R) = {}", r.min())));
        }
        Ok(Self { r, theta, t })
    }

    /// Build a state by sampling `R(x)` and `Θ(x)`.
    pub fn from_fns(grid: &Grid1D, r: impl Fn(f64) -> f64, theta: impl Fn(f64) -> f64, t: f64) -> Result<Self> {
        Self::new(Field1D::from_fn(grid, r)?, Field1D::from_fn(grid, theta)?, t)
    }

    pub fn grid(&self) -> &Grid1D {
        self.r.grid()
    }
}

/// Space-time block of samples with tensor-product Lagrange interpolation
/// (six periodic nodes in `x`, four nodes in `t`).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap2D {
    grid: Grid1D,
    times: Vec<f64>,
    r: Vec<Vec<f64>>,
    theta: Vec<Vec<f64>>,
}

/// Interpolated values and first derivatives at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub r: f64,
    pub theta: f64,
    pub r_x: f64,
    pub r_t: f64,
    pub theta_x: f64,
    pub theta_t: f64,
}

const X_STENCIL: usize = 6;
const T_STENCIL: usize = 4;

impl FieldMap2D {
    pub fn new(grid: &Grid1D) -> Self {
        Self { grid: grid.clone(), times: Vec::new(), r: Vec::new(), theta: Vec::new() }
    }

    pub fn from_slices(slices: &[FieldPair]) -> Result<Self> {
        let first = slices.first().ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?;
        let mut map = Self::new(first.grid());
        for s in slices {
            map.push(s)?;
        }
        Ok(map)
    }

    pub fn push(&mut self, slice: &FieldPair) -> Result<()> {
        if slice.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        if let Some(&last) = self.times.last() {
            if slice.t <= last {
                return Err(Error::InvalidParameter(format!("times must increase: {} after {}", slice.t, last)));
            }
        }
        self.times.push(slice.t);
        self.r.push(slice.r.values().to_vec());
        self.theta.push(slice.theta.values().to_vec());
        Ok(())
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn slice(&self, i: usize) -> FieldPair {
        FieldPair {
            r: Field1D { grid: self.grid.clone(), values: self.r[i].clone() },
            theta: Field1D { grid: self.grid.clone(), values: self.theta[i].clone() },
            t: self.times[i],
        }
    }

    pub fn slices(&self) -> impl Iterator<Item = FieldPair> + '_ {
        (0..self.len()).map(|i| self.slice(i))
    }

    pub fn last(&self) -> Option<FieldPair> {
        (!self.is_empty()).then(|| self.slice(self.len() - 1))
    }

    /// `(R, Θ)` at an arbitrary point; `x` wraps periodically.
    pub fn sample(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        let s = self.sample_derivatives(x, t)?;
        Ok((s.r, s.theta))
    }

    pub fn sample_derivatives(&self, x: f64, t: f64) -> Result<Sample> {
        let (t_nodes, t_w, t_dw) = self.time_weights(t)?;
        let u = self.grid.node_coordinate(x);
        let base = u.floor() as isize;
        let offsets: Vec<f64> = (0..X_STENCIL).map(|k| (k as isize - (X_STENCIL as isize / 2 - 1)) as f64).collect();
        let local = u - base as f64;
        let (x_w, x_dw) = lagrange_weights(&offsets, local);
        let h = self.grid.spacing();
        let n = self.grid.n() as isize;

        let mut out = Sample { r: 0.0, theta: 0.0, r_x: 0.0, r_t: 0.0, theta_x: 0.0, theta_t: 0.0 };
        for (ti, (&tw, &tdw)) in t_nodes.iter().zip(t_w.iter().zip(&t_dw)) {
            let (mut r, mut th, mut rx, mut thx) = (0.0, 0.0, 0.0, 0.0);
            for (k, (&xw, &xdw)) in x_w.iter().zip(&x_dw).enumerate() {
                if xw == 0.0 && xdw == 0.0 {
                    continue;
                }
                let j = (base + offsets[k] as isize).rem_euclid(n) as usize;
                let rv = self.r[*ti][j];
                let tv = self.theta[*ti][j];
                r += xw * rv;
                th += xw * tv;
                rx += xdw * rv;
                thx += xdw * tv;
            }
            out.r += tw * r;
            out.theta += tw * th;
            out.r_x += tw * rx / h;
            out.theta_x += tw * thx / h;
            out.r_t += tdw * r;
            out.theta_t += tdw * th;
        }
        Ok(out)
    }

    fn time_weights(&self, t: f64) -> Result<(Vec<usize>, Vec<f64>, Vec<f64>)> {
        let (start, end) = match (self.times.first(), self.times.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(Error::InvalidParameter("empty field map".into())),
        };
        if !(start..=end).contains(&t) {
            return Err(Error::TimeOutOfRange { t, start, end });
        }
        let m = self.times.len();
        if m == 1 {
            return Ok((vec![0], vec![1.0], vec![0.0]));
        }
        let width = T_STENCIL.min(m);
        let pos = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        let first = pos.saturating_sub(width / 2 - 1).min(m - width);
        let nodes: Vec<usize> = (first..first + width).collect();
        let coords: Vec<f64> = nodes.iter().map(|&i| self.times[i]).collect();
        let (w, dw) = lagrange_weights(&coords, t);
        Ok((nodes, w, dw))
    }
}

/// Common spacing of `times`, which must be uniform to 1e-9 relative and hold
/// at least five entries for fourth-order central differences.
pub(crate) fn uniform_spacing(times: &[f64]) -> Result<f64> {
    if times.len() < 5 {
        return Err(Error::InsufficientResolution(format!("{} slices, need at least 5", times.len())));
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0)) {
        return Err(Error::InsufficientResolution("slices are not equally spaced".into()));
    }
    Ok(h)
}

/// Fourth-order central difference from samples at `−2h, −h, +h, +2h`.
pub(crate) fn central_difference(m2: &[f64], m1: &[f64], p1: &[f64], p2: &[f64], h: f64) -> Vec<f64> {
    (0..m2.len()).map(|j| (m2[j] - 8.0 * m1[j] + 8.0 * p1[j] - p2[j]) / (12.0 * h)).collect()
}

/// Lagrange basis values and first derivatives at `x` for the given nodes.
pub(crate) fn lagrange_weights(nodes: &[f64], x: f64) -> (Vec<f64>, Vec<f64>) {
    let p = nodes.len();
    let mut w = vec![0.0; p];
    let mut dw = vec![0.0; p];
    for j in 0..p {
        let mut prod = 1.0;
        for m in 0..p {
            if m != j {
                prod *= (x - nodes[m]) / (nodes[j] - nodes[m]);
            }
        }
        w[j] = prod;
        let mut deriv = 0.0;
        for k in 0..p {
            if k == j {
                continue;
            }
            let mut term = 1.0 / (nodes[j] - nodes[k]);
            for m in 0..p {
                if m != j && m != k {
                    term *= (x - nodes[m]) / (nodes[j] - nodes[m]);
                }
            }
            deriv += term;
        }
        dw[j] = deriv;
    }
    (w, dw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize, l: f64) -> Grid1D {
        Grid1D::new(n, l).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid1D::new(8, 1.0).is_err());
        assert!(Grid1D::new(48, 1.0).is_err());
        assert!(Grid1D::new(64, 0.0).is_err());
        let g = grid(64, 3.0);
        assert_eq!(g.spacing() * 64.0, 3.0);
        assert_eq!(g.x(0), -1.5);
    }

    #[test]
    fn sine_derivative() {
        let g = grid(64, 10.0);
        let k = 2.0 * PI / 10.0;
        let f = Field1D::from_fn(&g, |x| (k * x).sin()).unwrap();
        let df = f.derivative(1).unwrap();
        for (x, d) in g.coords().iter().zip(df.values()) {
            assert!((d - k * (k * x).cos()).abs() <= 1e-12);
        }
    }

    #[test]
    fn constant_derivative_is_exactly_zero() {
        let g = grid(32, 7.0);
        let f = Field1D::constant(&g, 3.25).unwrap();
        assert!(f.derivative(1).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(f.derivative(2).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn derivative_order_and_finiteness() {
        let g = grid(32, 7.0);
        let f = Field1D::constant(&g, 1.0).unwrap();
        assert!(f.derivative(3).is_err());
        assert!(Field1D::new(&g, vec![f64::NAN; 32]).is_err());
        let mut bad = f.clone();
        bad.values[3] = f64::INFINITY;
        assert_eq!(bad.derivative(1), Err(Error::NonFinite));
    }

    #[test]
    fn quadrature_examples() {
        let g = grid(64, 10.0);
        assert!((Field1D::constant(&g, 1.0).unwrap().integrate() - 10.0).abs() < 1e-13);
        let s = Field1D::from_fn(&g, |x| (2.0 * PI * x / 10.0).sin()).unwrap();
        assert!(s.integrate().abs() <= 1e-13);
        // ∫ exp(-x²) over the real line is √π; the tails beyond |x| = 20 are negligible.
        let g = grid(256, 40.0);
        let gauss = Field1D::from_fn(&g, |x| (-x * x).exp()).unwrap();
        assert!((gauss.integrate() - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn dealias_removes_top_third() {
        let g = grid(48usize.next_power_of_two(), 2.0 * PI);
        let n = g.n();
        let hi = Field1D::from_fn(&g, |x| ((n / 2 - 2) as f64 * (x + PI)).cos()).unwrap();
        assert!(g.dealias(hi.values()).iter().all(|v| v.abs() < 1e-13));
        let lo = Field1D::from_fn(&g, |x| (3.0 * x).cos()).unwrap();
        let d = g.dealias(lo.values());
        assert!(d.iter().zip(lo.values()).all(|(a, b)| (a - b).abs() < 1e-13));
    }

    #[test]
    fn map_interpolation_reproduces_nodes() {
        let g = grid(32, 4.0);
        let mut map = FieldMap2D::new(&g);
        for i in 0..5 {
            let t = 0.1 * i as f64;
            map.push(&FieldPair::from_fns(&g, |x| 1.0 + 0.2 * (x + t).cos(), |x| (x - t).sin(), t).unwrap()).unwrap();
        }
        for i in 0..5 {
            let s = map.slice(i);
            for j in 0..g.n() {
                let (r, th) = map.sample(g.x(j), s.t).unwrap();
                assert_eq!(r, s.r.values()[j]);
                assert_eq!(th, s.theta.values()[j]);
            }
        }
        assert!(matches!(map.sample(0.0, 0.5), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn constant_map_is_constant() {
        let g = grid(16, 1.0);
        let mut map = FieldMap2D::new(&g);
        for i in 0..3 {
            map.push(&FieldPair::from_fns(&g, |_| 2.0, |_| -1.0, i as f64).unwrap()).unwrap();
        }
        for &(x, t) in &[(0.123, 0.4), (-0.77, 1.9), (3.3, 2.0)] {
            let s = map.sample_derivatives(x, t).unwrap();
            assert!((s.r - 2.0).abs() < 1e-14 && (s.theta + 1.0).abs() < 1e-14);
            assert!(s.theta_x.abs() < 1e-12 && s.theta_t.abs() < 1e-12);
        }
    }
}
