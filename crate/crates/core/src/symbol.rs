//! Symbol calculus for the boundary factorization on the disk.
//!
//! Symbols are finite sums of positively homogeneous components. A component
//! of degree m stores its values at ξ = +1 and ξ = −1 as jets in the normal
//! coordinate t, so sgn(ξ) is exact and all formulas are branchwise.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periodic::PeriodicFunction;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Taylor jet Σ_{k ≤ K_t} f_k(x) t^k in the normal coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetFunction {
    jet: Vec<PeriodicFunction>,
}

impl JetFunction {
    pub fn new(jet: Vec<PeriodicFunction>) -> Self {
        assert!(!jet.is_empty(), "a jet needs at least the boundary trace");
        Self { jet }
    }

    /// A function of x only.
    pub fn boundary(f: PeriodicFunction) -> Self {
        Self { jet: vec![f] }
    }

    pub fn constant(value: f64, order: usize) -> Self {
        let mut jet = vec![PeriodicFunction::zero(); order + 1];
        jet[0] = PeriodicFunction::constant(value);
        Self { jet }
    }

    /// x-independent jet with the given t-coefficients.
    pub fn from_t_polynomial(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| PeriodicFunction::constant(c)).collect())
    }

    /// Jet of a radial profile τ(r) = Σ c_k r^k under r = 1 − t.
    pub fn from_radial_polynomial(coeffs: &[f64]) -> Self {
        let degree = coeffs.len().saturating_sub(1);
        let mut t_coeffs = vec![0.0; degree + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            // (1 - t)^k = Σ_i C(k,i) (-t)^i
            let mut binom = 1.0;
            for i in 0..=k {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                t_coeffs[i] += c * binom * sign;
                binom = binom * (k - i) as f64 / (i + 1) as f64;
            }
        }
        Self::from_t_polynomial(&t_coeffs)
    }

    /// 1/(1 − t) = Σ t^k
    pub fn inverse_one_minus_t(order: usize) -> Self {
        Self::new(vec![PeriodicFunction::constant(1.0); order + 1])
    }

    /// 1 − t
    pub fn one_minus_t(order: usize) -> Self {
        let mut j = Self::constant(1.0, order);
        if order >= 1 {
            j.jet[1] = PeriodicFunction::constant(-1.0);
        }
        j
    }

    pub fn order(&self) -> usize {
        self.jet.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &PeriodicFunction {
        &self.jet[k]
    }

    pub fn coefficients(&self) -> &[PeriodicFunction] {
        &self.jet
    }

    /// Boundary trace f(x, 0).
    pub fn trace(&self) -> &PeriodicFunction {
        &self.jet[0]
    }

    /// Zero-pads (exactly) to a higher order; never truncates.
    pub fn padded(&self, order: usize) -> Self {
        let mut jet = self.jet.clone();
        while jet.len() < order + 1 {
            jet.push(PeriodicFunction::zero());
        }
        Self { jet }
    }

    pub fn truncated(&self, order: usize) -> Self {
        Self {
            jet: self.jet[..=order.min(self.order())].to_vec(),
        }
    }

    pub fn eval(&self, x: f64, t: f64) -> Complex64 {
        self.jet
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, f| acc * t + f.eval(x))
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        Self {
            jet: (0..=order).map(|k| &self.jet[k] + &other.jet[k]).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Cauchy product truncated to the smaller order.
    pub fn multiply(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let jet = (0..=order)
            .map(|k| {
                let mut acc = PeriodicFunction::zero();
                for i in 0..=k {
                    let (a, b) = (&self.jet[i], &other.jet[k - i]);
                    if a.max_abs_coeff() == 0.0 || b.max_abs_coeff() == 0.0 {
                        continue;
                    }
                    acc = &acc + &a.multiply(b);
                }
                acc
            })
            .collect();
        Self { jet }
    }

    pub fn multiply_periodic(&self, f: &PeriodicFunction) -> Self {
        Self {
            jet: self.jet.iter().map(|g| g.multiply(f)).collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            jet: self.jet.iter().map(|f| f.scale(factor)).collect(),
        }
    }

    /// ∂_t, lowering the order by one. Fails on a bare trace.
    pub fn dt(&self) -> Result<Self> {
        if self.order() == 0 {
            return Err(Error::JetOrderExceeded { order: 0 });
        }
        Ok(Self {
            jet: (1..self.jet.len())
                .map(|k| self.jet[k].scale_real(k as f64))
                .collect(),
        })
    }

    /// ∂_x coefficientwise.
    pub fn dx(&self) -> Self {
        Self {
            jet: self.jet.iter().map(|f| f.differentiate()).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            jet: self.jet.iter().map(|f| f.conj()).collect(),
        }
    }

    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let order = self.order().min(other.order());
        (0..=order)
            .map(|k| self.jet[k].max_coeff_diff(&other.jet[k]))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.jet.iter().map(|f| f.max_abs_coeff()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.max_abs_coeff() == 0.0
    }
}

/// c^+(x,t)·ξ^m for ξ > 0 and c^−(x,t)·|ξ|^m for ξ < 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousComponent {
    pub degree: i32,
    pub plus: JetFunction,
    pub minus: JetFunction,
}

impl HomogeneousComponent {
    pub fn new(degree: i32, plus: JetFunction, minus: JetFunction) -> Self {
        Self { degree, plus, minus }
    }

    /// Same coefficient on both branches (an even function of ξ).
    pub fn even(degree: i32, coeff: JetFunction) -> Self {
        Self::new(degree, coeff.clone(), coeff)
    }

    /// coeff · sgn(ξ)|ξ|^m
    pub fn odd(degree: i32, coeff: JetFunction) -> Self {
        let minus = coeff.scale(Complex64::new(-1.0, 0.0));
        Self::new(degree, coeff, minus)
    }

    pub fn zero(degree: i32, order: usize) -> Self {
        Self::even(degree, JetFunction::constant(0.0, order))
    }

    pub fn jet_order(&self) -> usize {
        self.plus.order().min(self.minus.order())
    }

    /// Value at (x, t, ξ), ξ ≠ 0.
    pub fn eval(&self, x: f64, t: f64, xi: f64) -> Complex64 {
        let scale = xi.abs().powi(self.degree);
        if xi > 0.0 {
            self.plus.eval(x, t) * scale
        } else {
            self.minus.eval(x, t) * scale
        }
    }

    /// ∂_ξ: degree m → m−1, plus ↦ m·plus, minus ↦ −m·minus.
    pub fn d_xi(&self) -> Self {
        let m = self.degree as f64;
        Self::new(
            self.degree - 1,
            self.plus.scale(Complex64::new(m, 0.0)),
            self.minus.scale(Complex64::new(-m, 0.0)),
        )
    }

    pub fn dx(&self) -> Self {
        Self::new(self.degree, self.plus.dx(), self.minus.dx())
    }

    pub fn dt(&self) -> Result<Self> {
        Ok(Self::new(self.degree, self.plus.dt()?, self.minus.dt()?))
    }

    /// Pointwise product; degrees add.
    pub fn multiply(&self, other: &Self) -> Self {
        Self::new(
            self.degree + other.degree,
            self.plus.multiply(&other.plus),
            self.minus.multiply(&other.minus),
        )
    }

    pub fn multiply_jet(&self, jet: &JetFunction) -> Self {
        Self::new(self.degree, self.plus.multiply(jet), self.minus.multiply(jet))
    }

    pub fn multiply_periodic(&self, f: &PeriodicFunction) -> Self {
        Self::new(
            self.degree,
            self.plus.multiply_periodic(f),
            self.minus.multiply_periodic(f),
        )
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::new(self.degree, self.plus.scale(factor), self.minus.scale(factor))
    }

    /// Different factors on the two branches.
    pub fn scale_branches(&self, plus: Complex64, minus: Complex64) -> Self {
        Self::new(self.degree, self.plus.scale(plus), self.minus.scale(minus))
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.degree, other.degree);
        Self::new(
            self.degree,
            self.plus.add(&other.plus),
            self.minus.add(&other.minus),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Restriction to t = 0.
    pub fn trace(&self) -> Self {
        Self::new(
            self.degree,
            JetFunction::boundary(self.plus.trace().clone()),
            JetFunction::boundary(self.minus.trace().clone()),
        )
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.minus.max_coeff_diff(&self.plus.conj())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.plus.max_abs_coeff().max(self.minus.max_abs_coeff())
    }

    /// Largest non-constant Fourier amplitude over both branches.
    pub fn x_variation(&self) -> f64 {
        self.plus
            .coefficients()
            .iter()
            .chain(self.minus.coefficients())
            .map(|f| f.x_variation())
            .fold(0.0, f64::max)
    }
}

/// Σ_m components of degree m, kept from `top_degree` down to `depth`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolExpansion {
    components: BTreeMap<i32, HomogeneousComponent>,
}

impl SymbolExpansion {
    pub fn new() -> Self {
        Self {
            components: BTreeMap::new(),
        }
    }

    pub fn from_components(components: impl IntoIterator<Item = HomogeneousComponent>) -> Self {
        let mut s = Self::new();
        for c in components {
            s.insert(c);
        }
        s
    }

    /// Inserts, adding to an existing component of the same degree.
    pub fn insert(&mut self, c: HomogeneousComponent) {
        match self.components.get_mut(&c.degree) {
            Some(existing) => *existing = existing.add(&c),
            None => {
                self.components.insert(c.degree, c);
            }
        }
    }

    pub fn replace(&mut self, c: HomogeneousComponent) {
        self.components.insert(c.degree, c);
    }

    pub fn component(&self, degree: i32) -> Option<&HomogeneousComponent> {
        self.components.get(&degree)
    }

    pub fn require(&self, degree: i32) -> Result<&HomogeneousComponent> {
        self.component(degree).ok_or(Error::MissingComponent { degree })
    }

    /// Components in descending degree.
    pub fn components(&self) -> impl Iterator<Item = &HomogeneousComponent> {
        self.components.values().rev()
    }

    pub fn top_degree(&self) -> Option<i32> {
        self.components.keys().next_back().copied()
    }

    pub fn depth(&self) -> Option<i32> {
        self.components.keys().next().copied()
    }

    pub fn truncated(&self, depth: i32) -> Self {
        Self {
            components: self.components.range(depth..).map(|(k, v)| (*k, v.clone())).collect(),
        }
    }

    pub fn eval(&self, x: f64, t: f64, xi: f64) -> Complex64 {
        self.components().map(|c| c.eval(x, t, xi)).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut s = self.clone();
        for c in other.components() {
            s.insert(c.clone());
        }
        s
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_components(self.components().map(|c| c.scale(factor)))
    }

    pub fn trace(&self) -> Self {
        Self::from_components(self.components().map(|c| c.trace()))
    }
}

impl Default for SymbolExpansion {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Serialize, Deserialize)]
struct ComponentRepr {
    degree: i32,
    plus: JetFunction,
    minus: JetFunction,
}

#[derive(Serialize, Deserialize)]
struct SymbolRepr {
    components: Vec<ComponentRepr>,
}

impl Serialize for SymbolExpansion {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SymbolRepr {
            components: self
                .components()
                .map(|c| ComponentRepr {
                    degree: c.degree,
                    plus: c.plus.clone(),
                    minus: c.minus.clone(),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SymbolExpansion {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SymbolRepr::deserialize(deserializer)?;
        let mut s = SymbolExpansion::new();
        for c in repr.components {
            if s.component(c.degree).is_some() {
                return Err(serde::de::Error::custom(format!("duplicate degree {}", c.degree)));
            }
            s.insert(HomogeneousComponent::new(c.degree, c.plus, c.minus));
        }
        Ok(s)
    }
}

/// Potential data of the interior problem: (Δ + λτ)u = 0.
#[derive(Clone, Debug)]
pub struct Potential {
    pub lambda: f64,
    pub tau: JetFunction,
}

/// Jet order of τ demanded for `depth`: one ∂_t per recursion step plus headroom.
pub fn required_jet_order(depth: i32) -> usize {
    (2 - depth).max(0) as usize
}

/// Solves the factorization recursion for the components a_1, …, a_depth.
///
/// Seeds a_1 = −|ξ|/(1−t), a_0 = 0, a_{−1} = λ(1−t)τ/(2|ξ|); each further
/// a_{m−1} gathers the terms of degree m.
pub fn factor_symbol(problem: &Potential, depth: i32) -> Result<SymbolExpansion> {
    if depth > -1 {
        return Err(Error::Unsupported(format!("factorization depth must be <= -1, got {depth}")));
    }
    let required = required_jet_order(depth);
    let k_t = problem.tau.order();
    if k_t < required {
        return Err(Error::InsufficientJetOrder {
            have: k_t,
            required,
            depth,
        });
    }
    let lambda = Complex64::new(problem.lambda, 0.0);
    let inv_one_minus_t = JetFunction::inverse_one_minus_t(k_t);
    let half_one_minus_t = JetFunction::one_minus_t(k_t).scale(Complex64::new(0.5, 0.0));

    let mut a: BTreeMap<i32, HomogeneousComponent> = BTreeMap::new();
    a.insert(1, HomogeneousComponent::even(1, inv_one_minus_t.scale(Complex64::new(-1.0, 0.0))));
    a.insert(0, HomogeneousComponent::zero(0, k_t));
    a.insert(
        -1,
        HomogeneousComponent::even(-1, half_one_minus_t.multiply(&problem.tau).scale(lambda)),
    );

    let mut m = -1;
    while m > depth {
        let mut gathered: Option<HomogeneousComponent> = None;
        let mut accumulate = |c: HomogeneousComponent| {
            gathered = Some(match gathered.take() {
                Some(g) => g.add(&c),
                None => c,
            });
        };
        for j in m..=1 {
            for k in m..=1 {
                let gamma = j + k - m;
                if gamma < 0 {
                    continue;
                }
                let (aj, ak) = (&a[&j], &a[&k]);
                if aj.max_abs_coeff() == 0.0 || ak.max_abs_coeff() == 0.0 {
                    continue;
                }
                let mut dj = aj.clone();
                let mut dk = ak.clone();
                let mut factorial = 1.0;
                for g in 0..gamma {
                    dj = dj.d_xi().scale(-I);
                    dk = dk.dx();
                    factorial *= (g + 1) as f64;
                }
                if dj.max_abs_coeff() == 0.0 || dk.max_abs_coeff() == 0.0 {
                    continue;
                }
                accumulate(dj.multiply(&dk).scale(Complex64::new(1.0 / factorial, 0.0)));
            }
        }
        let am = &a[&m];
        accumulate(am.dt()?);
        accumulate(am.multiply_jet(&inv_one_minus_t).scale(Complex64::new(-1.0, 0.0)));
        let total = gathered.expect("recursion always gathers a_m terms");
        debug_assert_eq!(total.degree, m);
        // −1/(2a_1) = (1−t)/(2|ξ|)
        let next = HomogeneousComponent::new(
            m - 1,
            total.plus.multiply(&half_one_minus_t),
            total.minus.multiply(&half_one_minus_t),
        );
        a.insert(m - 1, next);
        m -= 1;
    }
    Ok(SymbolExpansion {
        components: a.into_iter().filter(|(d, _)| *d >= depth).collect(),
    })
}

/// r(x, ξ) = −a(x, 0, ξ)/ρ(x).
pub fn boundary_symbol(a: &SymbolExpansion, rho: &PeriodicFunction) -> Result<SymbolExpansion> {
    let inv_rho = rho.reciprocal()?;
    Ok(SymbolExpansion::from_components(a.components().map(|c| {
        c.trace()
            .multiply_periodic(&inv_rho)
            .scale(Complex64::new(-1.0, 0.0))
    })))
}

/// Leibniz composition Σ_K (1/K!)(∂_ξ^K a)(D_x^K b), keeping degrees ≥ depth.
pub fn symbol_product(a: &SymbolExpansion, b: &SymbolExpansion, depth: i32) -> SymbolExpansion {
    let mut out = SymbolExpansion::new();
    for ca in a.components() {
        for cb in b.components() {
            let mut da = ca.clone();
            let mut db = cb.clone();
            let mut factorial = 1.0;
            let mut k = 0;
            while da.degree + db.degree >= depth {
                if da.max_abs_coeff() == 0.0 || db.max_abs_coeff() == 0.0 {
                    break;
                }
                out.insert(da.multiply(&db).scale(Complex64::new(1.0 / factorial, 0.0)));
                k += 1;
                factorial *= k as f64;
                da = da.d_xi();
                db = db.dx().scale(-I);
            }
        }
    }
    out
}

/// Every component satisfies c^−(x) = conj(c^+(x)) within `tol`.
pub fn is_hermitian(a: &SymbolExpansion, tol: f64) -> bool {
    a.components().all(|c| c.hermitian_defect() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_tau(order: usize) -> JetFunction {
        JetFunction::constant(1.0, order)
    }

    #[test]
    fn degree_zero_vanishes() {
        let tau = JetFunction::new(vec![
            PeriodicFunction::from_real_trig(1.0, &[0.2], &[0.1]),
            PeriodicFunction::cos(2, 0.3),
        ]);
        let tau = tau.padded(5);
        let a = factor_symbol(&Potential { lambda: 1.7, tau }, -3).unwrap();
        assert_eq!(a.require(0).unwrap().max_abs_coeff(), 0.0);
    }

    #[test]
    fn degree_minus_one_at_boundary() {
        let a = factor_symbol(&Potential { lambda: 2.0, tau: unit_tau(4) }, -2).unwrap();
        let c = a.require(-1).unwrap();
        assert!((c.eval(0.3, 0.0, 1.0) - 1.0).norm() < 1e-15);
        assert!((c.eval(0.3, 0.0, -1.0) - 1.0).norm() < 1e-15);
        assert!((c.eval(0.3, 0.0, 4.0) - 0.25).norm() < 1e-15);
    }

    #[test]
    fn degree_minus_two_closed_form() {
        // (1/4|ξ|²)(−2) for τ ≡ 1, λ = 1 at t = 0
        let a = factor_symbol(&Potential { lambda: 1.0, tau: unit_tau(5) }, -3).unwrap();
        let c = a.require(-2).unwrap();
        for xi in [1.0, -1.0, 2.5] {
            let expected = -2.0 / (4.0 * xi * xi);
            assert!((c.eval(1.1, 0.0, xi) - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn degree_minus_two_with_variable_tau() {
        // τ = 1 + 0.2 sin x (1 − t): τ_x = 0.2 cos x (1−t), τ_t = −0.2 sin x
        let tau = JetFunction::new(vec![
            &PeriodicFunction::constant(1.0) + &PeriodicFunction::sin(1, 0.2),
            PeriodicFunction::sin(1, -0.2),
            PeriodicFunction::zero(),
            PeriodicFunction::zero(),
            PeriodicFunction::zero(),
        ]);
        let lambda = 1.3;
        let a = factor_symbol(&Potential { lambda, tau }, -2).unwrap();
        let c = a.require(-2).unwrap();
        for &x in &[0.0f64, 0.7, 2.9] {
            for &t in &[0.0, 0.05] {
                for &xi in &[1.0, -1.0] {
                    let tau_v = 1.0 + 0.2 * x.sin() * (1.0 - t);
                    let tau_x = 0.2 * x.cos() * (1.0 - t);
                    let tau_t = -0.2 * x.sin();
                    let sgn: f64 = if xi > 0.0 { 1.0 } else { -1.0 };
                    let expected = Complex64::new((1.0 - t) * lambda / 4.0, 0.0)
                        * (I * tau_x * sgn - 2.0 * tau_v + (1.0 - t) * tau_t);
                    // jet truncation: a_{-2} is exact as a polynomial in t here
                    assert!((c.eval(x, t, xi) - expected).norm() < 1e-13, "x={x} t={t} xi={xi}");
                }
            }
        }
    }

    #[test]
    fn insufficient_jet_order_is_reported() {
        let err = factor_symbol(&Potential { lambda: 1.0, tau: unit_tau(1) }, -4).unwrap_err();
        match err {
            Error::InsufficientJetOrder { required, .. } => assert_eq!(required, 6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_potential_boundary_symbol_is_abs_xi_over_rho() {
        let rho = &PeriodicFunction::constant(1.0) + &PeriodicFunction::cos(1, 0.3);
        let a = factor_symbol(&Potential { lambda: 0.0, tau: unit_tau(7) }, -5).unwrap();
        let r = boundary_symbol(&a, &rho).unwrap();
        for c in r.components() {
            if c.degree == 1 {
                let x: f64 = 0.4;
                assert!((c.eval(x, 0.0, -2.0) - 2.0 / (1.0 + 0.3 * x.cos())).norm() < 1e-13);
            } else {
                assert!(c.max_abs_coeff() < 1e-15, "degree {}", c.degree);
            }
        }
    }

    #[test]
    fn boundary_symbol_unit_disk_terms() {
        let lambda = 0.8;
        let a = factor_symbol(&Potential { lambda, tau: unit_tau(4) }, -2).unwrap();
        let r = boundary_symbol(&a, &PeriodicFunction::constant(1.0)).unwrap();
        let xi = 3.0;
        assert!((r.require(1).unwrap().eval(0.0, 0.0, xi) - xi).norm() < 1e-14);
        assert!((r.require(-1).unwrap().eval(0.0, 0.0, xi) + lambda / (2.0 * xi)).norm() < 1e-14);
        // r_{-2} = (−λ/4|ξ|²)(−2τ − ∂_ν τ) with ∂_ν τ = 0
        assert!((r.require(-2).unwrap().eval(0.0, 0.0, xi) - lambda / (2.0 * xi * xi)).norm() < 1e-14);
    }

    #[test]
    fn non_positive_rho_is_rejected() {
        let a = factor_symbol(&Potential { lambda: 1.0, tau: unit_tau(4) }, -2).unwrap();
        let rho = &PeriodicFunction::constant(0.2) + &PeriodicFunction::cos(1, 0.5);
        assert!(matches!(boundary_symbol(&a, &rho), Err(Error::NonPositiveWeight { .. })));
    }

    #[test]
    fn product_with_one_and_abs_xi_squared() {
        let b = SymbolExpansion::from_components([HomogeneousComponent::even(
            -1,
            JetFunction::boundary(PeriodicFunction::from_real_trig(0.5, &[0.3], &[0.2])),
        )]);
        let one = SymbolExpansion::from_components([HomogeneousComponent::even(
            0,
            JetFunction::boundary(PeriodicFunction::constant(1.0)),
        )]);
        let p = symbol_product(&one, &b, -6);
        assert_eq!(p, b);

        let abs = SymbolExpansion::from_components([HomogeneousComponent::even(
            1,
            JetFunction::boundary(PeriodicFunction::constant(1.0)),
        )]);
        let sq = symbol_product(&abs, &abs, -4);
        assert_eq!(sq.components().count(), 1);
        let c = sq.require(2).unwrap();
        assert!((c.eval(0.0, 0.0, -3.0) - 9.0).norm() < 1e-15);
    }

    #[test]
    fn hermitian_examples() {
        let abs = SymbolExpansion::from_components([HomogeneousComponent::even(
            1,
            JetFunction::boundary(PeriodicFunction::constant(1.0)),
        )]);
        assert!(is_hermitian(&abs, 0.0));
        let odd = SymbolExpansion::from_components([HomogeneousComponent::odd(
            0,
            JetFunction::boundary(PeriodicFunction::sin(1, 1.0).scale(I)),
        )]);
        assert!(is_hermitian(&odd, 1e-15));
        let not = SymbolExpansion::from_components([HomogeneousComponent::even(
            0,
            JetFunction::boundary(PeriodicFunction::sin(1, 1.0).scale(I)),
        )]);
        assert!(!is_hermitian(&not, 1e-12));
    }

    #[test]
    fn radial_polynomial_jet() {
        // τ(r) = 1 + r²/2 → 3/2 − t + t²/2
        let j = JetFunction::from_radial_polynomial(&[1.0, 0.0, 0.5]);
        let expected = [1.5, -1.0, 0.5];
        for (k, e) in expected.iter().enumerate() {
            assert!((j.coeff(k).mean().re - e).abs() < 1e-15);
        }
    }

    #[test]
    fn dt_beyond_order_is_error() {
        let j = JetFunction::boundary(PeriodicFunction::constant(1.0));
        assert!(matches!(j.dt(), Err(Error::JetOrderExceeded { .. })));
    }

    #[test]
    fn symbol_json_schema_has_degree_plus_minus() {
        let s = SymbolExpansion::from_components([HomogeneousComponent::even(
            1,
            JetFunction::boundary(PeriodicFunction::constant(1.0)),
        )]);
        let v: serde_json::Value = serde_json::to_value(&s).unwrap();
        let c = &v["components"][0];
        assert_eq!(c["degree"], 1);
        assert!(c["plus"]["jet"][0]["coeffs"].is_array());
        assert!(c["minus"].is_object());
        let back: SymbolExpansion = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }
}
