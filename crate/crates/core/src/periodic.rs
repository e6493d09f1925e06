//! Truncated Fourier series for smooth 2π-periodic functions of boundary
//! arclength.
//!
//! Every symbol coefficient in the crate is built from these. Arithmetic is
//! carried out on the coefficients directly; the only grid step is
//! [`PeriodicFunction::project`], used once when a non-bandlimited input
//! enters the system.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default maximal retained frequency.
pub const DEFAULT_ORDER_CAP: usize = 64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// f(x) = Σ_{|n| ≤ order} c_n e^{inx}.
///
/// `cap` is the truncation policy: products keep frequencies up to
/// `min(order(f) + order(g), cap)`, so the sum-of-orders rule applies until
/// the cap is reached.
#[derive(Clone, PartialEq)]
pub struct PeriodicFunction {
    coeffs: Vec<Complex64>,
    order: usize,
    cap: usize,
}

impl fmt::Debug for PeriodicFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_map();
        for n in -(self.order as i64)..=(self.order as i64) {
            let c = self.coeff(n);
            if c.norm() > 0.0 {
                list.entry(&n, &c);
            }
        }
        list.finish()
    }
}

impl PeriodicFunction {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(value: f64) -> Self {
        Self::complex_constant(Complex64::new(value, 0.0))
    }

    pub fn complex_constant(value: Complex64) -> Self {
        Self {
            coeffs: vec![value],
            order: 0,
            cap: DEFAULT_ORDER_CAP,
        }
    }

    /// amplitude · cos(k x)
    pub fn cos(k: usize, amplitude: f64) -> Self {
        let mut f = Self::with_order(k);
        *f.coeff_mut(k as i64) += 0.5 * amplitude;
        *f.coeff_mut(-(k as i64)) += 0.5 * amplitude;
        f
    }

    /// amplitude · sin(k x)
    pub fn sin(k: usize, amplitude: f64) -> Self {
        let mut f = Self::with_order(k);
        *f.coeff_mut(k as i64) += -0.5 * amplitude * I;
        *f.coeff_mut(-(k as i64)) += 0.5 * amplitude * I;
        f
    }

    /// Build from `(n, c_n)` pairs. Repeated frequencies accumulate.
    pub fn from_coeffs(pairs: &[(i64, Complex64)]) -> Self {
        let order = pairs.iter().map(|(n, _)| n.unsigned_abs() as usize).max().unwrap_or(0);
        let mut f = Self::with_order(order);
        for &(n, c) in pairs {
            *f.coeff_mut(n) += c;
        }
        f
    }

    /// Real trigonometric polynomial a_0 + Σ_k (a_k cos kx + b_k sin kx).
    pub fn from_real_trig(a0: f64, cos_coeffs: &[f64], sin_coeffs: &[f64]) -> Self {
        let mut f = Self::constant(a0);
        for (k, &a) in cos_coeffs.iter().enumerate() {
            f = &f + &Self::cos(k + 1, a);
        }
        for (k, &b) in sin_coeffs.iter().enumerate() {
            f = &f + &Self::sin(k + 1, b);
        }
        f
    }

    /// Projects a sampled function onto frequencies |n| ≤ `order` using a
    /// trapezoid rule on `8·(order+1)` equispaced points.
    pub fn project<F>(order: usize, f: F) -> Self
    where
        F: Fn(f64) -> Complex64,
    {
        let points = 8 * (order + 1);
        let samples: Vec<Complex64> = (0..points)
            .map(|i| f(2.0 * PI * i as f64 / points as f64))
            .collect();
        Self::from_samples(order, &samples)
    }

    /// Projects a real function and enforces conjugate symmetry.
    pub fn project_real<F>(order: usize, f: F) -> Self
    where
        F: Fn(f64) -> f64,
    {
        Self::project(order, |x| Complex64::new(f(x), 0.0)).enforce_real()
    }

    /// Discrete Fourier coefficients of equispaced samples on [0, 2π).
    pub fn from_samples(order: usize, samples: &[Complex64]) -> Self {
        let points = samples.len();
        let mut f = Self::with_order(order);
        let step = 2.0 * PI / points as f64;
        for n in -(order as i64)..=(order as i64) {
            let mut acc = ZERO;
            for (i, &s) in samples.iter().enumerate() {
                // reduce the phase index modulo the grid to keep angles small
                let k = ((n * i as i64).rem_euclid(points as i64)) as f64;
                acc += s * Complex64::from_polar(1.0, -step * k);
            }
            *f.coeff_mut(n) = acc / points as f64;
        }
        f
    }

    fn with_order(order: usize) -> Self {
        Self {
            coeffs: vec![ZERO; 2 * order + 1],
            order,
            cap: DEFAULT_ORDER_CAP.max(order),
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        if self.order > cap {
            self = self.truncated(cap);
        }
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.order {
            ZERO
        } else {
            self.coeffs[(n + self.order as i64) as usize]
        }
    }

    fn coeff_mut(&mut self, n: i64) -> &mut Complex64 {
        &mut self.coeffs[(n + self.order as i64) as usize]
    }

    /// `(n, c_n)` for every retained frequency, ascending in n.
    pub fn coefficients(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let order = self.order as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - order, c))
    }

    pub fn truncated(&self, order: usize) -> Self {
        let order = order.min(self.order);
        let mut f = Self::with_order(order);
        f.cap = self.cap;
        for n in -(order as i64)..=(order as i64) {
            *f.coeff_mut(n) = self.coeff(n);
        }
        f
    }

    fn padded(&self, order: usize) -> Self {
        if order <= self.order {
            return self.clone();
        }
        let mut f = Self::with_order(order);
        f.cap = self.cap.max(order);
        for (n, c) in self.coefficients() {
            *f.coeff_mut(n) = c;
        }
        f
    }

    /// Exact finite Fourier sum at x.
    pub fn eval(&self, x: f64) -> Complex64 {
        let mut acc = ZERO;
        for (n, c) in self.coefficients() {
            if c != ZERO {
                acc += c * Complex64::from_polar(1.0, n as f64 * x);
            }
        }
        acc
    }

    /// Values on `points` equispaced nodes of [0, 2π).
    pub fn sample(&self, points: usize) -> Vec<Complex64> {
        (0..points)
            .map(|i| self.eval(2.0 * PI * i as f64 / points as f64))
            .collect()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut f = self.clone();
        for c in &mut f.coeffs {
            *c *= factor;
        }
        f
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// Exact convolution of the coefficient sequences, truncated per the
    /// sum-of-orders rule.
    pub fn multiply(&self, other: &Self) -> Self {
        let cap = self.cap.max(other.cap);
        let order = (self.order + other.order).min(cap);
        let mut f = Self::with_order(order);
        f.cap = cap;
        let (a_ord, b_ord) = (self.order as i64, other.order as i64);
        for (ia, &ca) in self.coeffs.iter().enumerate() {
            if ca == ZERO {
                continue;
            }
            let na = ia as i64 - a_ord;
            for (ib, &cb) in other.coeffs.iter().enumerate() {
                if cb == ZERO {
                    continue;
                }
                let n = na + ib as i64 - b_ord;
                if n.unsigned_abs() as usize <= order {
                    *f.coeff_mut(n) += ca * cb;
                }
            }
        }
        f
    }

    /// Integer power by repeated multiplication.
    pub fn powi(&self, exponent: u32) -> Self {
        let mut acc = Self::constant(1.0).with_cap(self.cap);
        for _ in 0..exponent {
            acc = acc.multiply(self);
        }
        acc
    }

    /// c_n → i n c_n.
    pub fn differentiate(&self) -> Self {
        let mut f = self.clone();
        for (i, c) in f.coeffs.iter_mut().enumerate() {
            let n = i as i64 - self.order as i64;
            *c *= Complex64::new(0.0, n as f64);
        }
        f
    }

    pub fn differentiate_n(&self, times: usize) -> Self {
        (0..times).fold(self.clone(), |f, _| f.differentiate())
    }

    /// c_0, i.e. (1/2π) ∫₀^{2π} f dx.
    pub fn mean(&self) -> Complex64 {
        self.coeff(0)
    }

    /// Mean of a function declared real; a non-negligible imaginary part
    /// signals corrupted data.
    pub fn real_mean(&self, tol: f64) -> Result<f64> {
        let m = self.mean();
        if m.im.abs() > tol * (1.0 + m.re.abs()) {
            return Err(Error::NonRealMean { imag: m.im });
        }
        Ok(m.re)
    }

    /// Returns `(slope, P)` with F(x) = slope·x + P(x), F(0) = 0 and F' = f.
    pub fn antiderivative(&self) -> (f64, Self) {
        let slope = self.mean();
        let mut p = self.clone();
        *p.coeff_mut(0) = ZERO;
        let mut constant = ZERO;
        for (i, c) in p.coeffs.iter_mut().enumerate() {
            let n = i as i64 - self.order as i64;
            if n != 0 {
                *c /= Complex64::new(0.0, n as f64);
                constant -= *c;
            }
        }
        *p.coeff_mut(0) = constant;
        // the slope of a complex function carries its imaginary part into
        // the periodic part via x·i·Im; callers only use real slopes
        (slope.re, p)
    }

    /// Pointwise complex conjugate: c_n → conj(c_{-n}).
    pub fn conj(&self) -> Self {
        let mut f = self.clone();
        for n in -(self.order as i64)..=(self.order as i64) {
            *f.coeff_mut(n) = self.coeff(-n).conj();
        }
        f
    }

    /// Real part of the function, i.e. (f + conj f)/2.
    pub fn enforce_real(&self) -> Self {
        (self + &self.conj()).scale_real(0.5)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.max_coeff_diff(&self.conj()) <= tol
    }

    /// max_n |c_n(f) - c_n(g)|
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let order = self.order.max(other.order) as i64;
        (-order..=order)
            .map(|n| (self.coeff(n) - other.coeff(n)).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest |c_n| over n ≠ 0.
    pub fn x_variation(&self) -> f64 {
        self.coefficients()
            .filter(|(n, _)| *n != 0)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    /// Minimum and maximum of the real part over a dense grid.
    pub fn real_range(&self) -> (f64, f64) {
        let points = (16 * (self.order + 1)).max(256);
        self.sample(points)
            .iter()
            .map(|v| v.re)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// 1/f for a strictly positive real f, by Newton iteration g ← g(2 − f g)
    /// on the truncated coefficients, verified by re-multiplication.
    pub fn reciprocal(&self) -> Result<Self> {
        let (lo, hi) = self.real_range();
        if lo.is_nan() || lo <= 0.0 {
            return Err(Error::NonPositiveWeight { min: lo });
        }
        let one = Self::constant(1.0).with_cap(self.cap);
        // with g0 = 2/(lo+hi) the initial residual 1 - f g0 has sup-norm < 1
        let mut g = Self::constant(2.0 / (lo + hi)).with_cap(self.cap);
        let mut last = f64::INFINITY;
        for _ in 0..200 {
            let residual = &one - &self.multiply(&g);
            let size = residual.max_abs_coeff();
            g = &g + &g.multiply(&residual);
            if size < 1e-15 || (size >= last && size < 1e-12) {
                break;
            }
            last = size;
        }
        let check = (&self.multiply(&g) - &one).max_abs_coeff();
        if check > 1e-10 {
            return Err(Error::Unsupported(format!(
                "reciprocal did not converge (residual {check:e}); raise the truncation cap"
            )));
        }
        Ok(g)
    }
}

impl Add for &PeriodicFunction {
    type Output = PeriodicFunction;

    fn add(self, rhs: Self) -> PeriodicFunction {
        let order = self.order.max(rhs.order);
        let mut f = self.padded(order);
        f.cap = self.cap.max(rhs.cap);
        for (n, c) in rhs.coefficients() {
            *f.coeff_mut(n) += c;
        }
        f
    }
}

impl Sub for &PeriodicFunction {
    type Output = PeriodicFunction;

    fn sub(self, rhs: Self) -> PeriodicFunction {
        self + &(-rhs)
    }
}

impl Neg for &PeriodicFunction {
    type Output = PeriodicFunction;

    fn neg(self) -> PeriodicFunction {
        self.scale_real(-1.0)
    }
}

impl Mul for &PeriodicFunction {
    type Output = PeriodicFunction;

    fn mul(self, rhs: Self) -> PeriodicFunction {
        self.multiply(rhs)
    }
}

#[derive(Serialize, Deserialize)]
struct PeriodicRepr {
    coeffs: Vec<(i64, f64, f64)>,
}

impl Serialize for PeriodicFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PeriodicRepr {
            coeffs: self.coefficients().map(|(n, c)| (n, c.re, c.im)).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PeriodicFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PeriodicRepr::deserialize(deserializer)?;
        if repr.coeffs.is_empty() {
            return Err(de::Error::custom("empty coefficient list"));
        }
        let pairs: Vec<(i64, Complex64)> = repr
            .coeffs
            .into_iter()
            .map(|(n, re, im)| (n, Complex64::new(re, im)))
            .collect();
        Ok(Self::from_coeffs(&pairs))
    }
}
