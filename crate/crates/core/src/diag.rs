//! Diagonalization of the boundary symbol and the eigenvalue coefficients s_n.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periodic::PeriodicFunction;
use crate::sequences::{build_model_sequence, ComponentModel, SpectrumSequence};
use crate::symbol::{boundary_symbol, factor_symbol, HomogeneousComponent, JetFunction, Potential, SymbolExpansion};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Highest α in the conjugation sum supported by default (reaches degree −6).
pub const DEFAULT_MAX_COMPOSITION_ORDER: usize = 7;

/// Tolerance on imaginary parts of emitted coefficients.
pub const REALNESS_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct DiagOptions {
    pub max_composition_order: usize,
    /// Use ⌈n/2⌉ diagonalization steps for s_n instead of n.
    pub shortcut: bool,
    /// Resampling grid is `grid_factor` × the truncation order.
    pub grid_factor: usize,
}

impl Default for DiagOptions {
    fn default() -> Self {
        Self {
            max_composition_order: DEFAULT_MAX_COMPOSITION_ORDER,
            shortcut: true,
            grid_factor: 8,
        }
    }
}

/// Inputs of the disk problem after conformal reduction.
#[derive(Clone, Debug)]
pub struct DiskProblem {
    pub lambda: f64,
    pub tau: JetFunction,
    pub rho: PeriodicFunction,
}

impl DiskProblem {
    /// ρ ≡ 1, τ ≡ 1.
    pub fn unit_disk(lambda: f64, jet_order: usize) -> Self {
        Self {
            lambda,
            tau: JetFunction::constant(1.0, jet_order),
            rho: PeriodicFunction::constant(1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchValue {
    pub degree: i32,
    pub plus: Complex64,
    pub minus: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalCoefficients {
    #[serde(rename = "L")]
    pub length: f64,
    pub s: Vec<f64>,
    pub lambda: f64,
    /// Diagonal symbol p_{1−m}(±1), m = 0..N.
    #[serde(skip)]
    pub branch_values: Vec<BranchValue>,
}

impl DiagonalCoefficients {
    pub fn model(&self) -> ComponentModel {
        ComponentModel::new(1.0 / self.length, self.s.clone())
    }
}

fn falling_factorial(n: i32, k: usize) -> f64 {
    (0..k).map(|i| (n - i as i32) as f64).product()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Partitions of `n` into exactly `k` positive parts, as multiplicity vectors
/// (entry i counts parts of size i + 1).
fn partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, max_part: usize, counts: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            if n == 0 {
                out.push(counts.clone());
            }
            return;
        }
        for part in (1..=max_part.min(n)).rev() {
            if part * k < n {
                break;
            }
            counts[part - 1] += 1;
            rec(n - part, k - 1, part, counts, out);
            counts[part - 1] -= 1;
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if k == 0 {
            out.push(vec![]);
        }
        return out;
    }
    let mut counts = vec![0; n];
    rec(n, k, n, &mut counts, &mut out);
    out
}

/// Partial Bell polynomial B_{n,k}(x_1, …, x_{n−k+1}); `x[i]` holds x_{i+1}.
fn bell_polynomial(n: usize, k: usize, x: &[PeriodicFunction]) -> PeriodicFunction {
    let mut total = PeriodicFunction::zero();
    for counts in partitions(n, k) {
        let mut weight = factorial(n);
        let mut term = PeriodicFunction::constant(1.0);
        for (i, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            weight /= factorial(c) * factorial(i + 1).powi(c as i32);
            term = term.multiply(&x[i].powi(c as u32));
        }
        total = &total + &term.scale_real(weight);
    }
    total
}

fn trace_branches(c: &HomogeneousComponent) -> (PeriodicFunction, PeriodicFunction) {
    (c.plus.trace().clone(), c.minus.trace().clone())
}

fn boundary_component(degree: i32, plus: PeriodicFunction, minus: PeriodicFunction) -> HomogeneousComponent {
    HomogeneousComponent::new(degree, JetFunction::boundary(plus), JetFunction::boundary(minus))
}

/// Conjugated symbol ã_m(x, ξ) for m = 1 … depth, before the change of variable.
pub fn conjugated_components(
    r: &SymbolExpansion,
    rho: &PeriodicFunction,
    depth: i32,
    max_composition_order: usize,
) -> Result<SymbolExpansion> {
    let needed = (1 - depth).max(0) as usize;
    if needed > max_composition_order {
        return Err(Error::UnsupportedDepth {
            depth,
            needed,
            max: max_composition_order,
        });
    }
    let length = rho.real_mean(1e-12)?;
    // (ρ/L)^e for e in [depth − 1, 1]
    let ratio = rho.scale_real(1.0 / length);
    let inv_ratio = ratio.reciprocal()?;
    let ratio_pow = |e: i32| -> PeriodicFunction {
        if e >= 0 {
            ratio.powi(e as u32)
        } else {
            inv_ratio.powi((-e) as u32)
        }
    };
    // φ_β = ρ^(β)/((β+1)L), β ≥ 1
    let phi: Vec<PeriodicFunction> = (1..=needed.max(1))
        .map(|beta| rho.differentiate_n(beta).scale_real(1.0 / ((beta + 1) as f64 * length)))
        .collect();

    let mut out = SymbolExpansion::new();
    for m in (depth..=1).rev() {
        let mut plus = PeriodicFunction::zero();
        let mut minus = PeriodicFunction::zero();
        for alpha in 0..=(1 - m) as usize {
            let n = m + alpha as i32;
            let Some(source) = r.component(n) else {
                return Err(Error::MissingComponent { degree: n });
            };
            if source.max_abs_coeff() == 0.0 {
                continue;
            }
            let (cp, cm) = trace_branches(source);
            let k_range = if alpha == 0 { 0..=0 } else { 1..=alpha };
            let mut shape = PeriodicFunction::zero();
            for k in k_range {
                let ff = falling_factorial(n, k + alpha);
                if ff == 0.0 {
                    continue;
                }
                let bell = if alpha == 0 {
                    PeriodicFunction::constant(1.0)
                } else {
                    bell_polynomial(alpha, k, &phi)
                };
                shape = &shape + &ratio_pow(m - k as i32).multiply(&bell).scale_real(ff);
            }
            if shape.max_abs_coeff() == 0.0 {
                continue;
            }
            let norm = 1.0 / factorial(alpha);
            let fp = (-I).powi(alpha as i32) * norm;
            let fm = I.powi(alpha as i32) * norm;
            plus = &plus + &cp.multiply(&shape).scale(fp);
            minus = &minus + &cm.multiply(&shape).scale(fm);
        }
        out.replace(boundary_component(m, plus, minus));
    }
    Ok(out)
}

/// Solves x = s + P(s)/L for s, where ρ = L + P'.
pub struct CoordinateInverse {
    length: f64,
    periodic: PeriodicFunction,
    rho: PeriodicFunction,
    bound: f64,
}

impl CoordinateInverse {
    pub fn new(rho: &PeriodicFunction) -> Self {
        let (length, periodic) = rho.antiderivative();
        let bound = periodic.coefficients().map(|(_, c)| c.norm()).sum::<f64>() / length;
        Self {
            length,
            periodic,
            rho: rho.clone(),
            bound,
        }
    }

    fn forward(&self, s: f64) -> f64 {
        s + self.periodic.eval(s).re / self.length
    }

    pub fn invert(&self, x: f64) -> Result<f64> {
        const TOL: f64 = 1e-13;
        let (mut lo, mut hi) = (x - self.bound - TOL, x + self.bound + TOL);
        let mut s = x;
        for _ in 0..200 {
            let f = self.forward(s) - x;
            if f.abs() <= TOL {
                return Ok(s);
            }
            if f > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let slope = self.rho.eval(s).re / self.length;
            let newton = s - f / slope;
            s = if slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= TOL {
                return Ok(s);
            }
        }
        Err(Error::InversionFailed { x })
    }
}

/// b_m(x, ξ) = ã_m(s(x), ξ), re-projected onto Fourier modes.
pub fn fio_conjugate(r: &SymbolExpansion, rho: &PeriodicFunction, depth: i32) -> Result<SymbolExpansion> {
    fio_conjugate_with(r, rho, depth, &DiagOptions::default())
}

pub fn fio_conjugate_with(
    r: &SymbolExpansion,
    rho: &PeriodicFunction,
    depth: i32,
    options: &DiagOptions,
) -> Result<SymbolExpansion> {
    let (min, _) = rho.real_range();
    if min <= 0.0 {
        return Err(Error::NonPositiveWeight { min });
    }
    let tilde = conjugated_components(r, rho, depth, options.max_composition_order)?;
    if rho.x_variation() == 0.0 {
        return Ok(tilde);
    }
    let order = rho.cap();
    let points = options.grid_factor * order.max(1);
    let inverse = CoordinateInverse::new(rho);
    let s_grid: Vec<f64> = (0..points)
        .map(|j| inverse.invert(2.0 * std::f64::consts::PI * j as f64 / points as f64))
        .collect::<Result<_>>()?;
    let compose = |f: &PeriodicFunction| -> PeriodicFunction {
        if f.x_variation() == 0.0 {
            return f.clone();
        }
        let samples: Vec<Complex64> = s_grid.iter().map(|&s| f.eval(s)).collect();
        PeriodicFunction::from_samples(order, &samples)
    };
    Ok(SymbolExpansion::from_components(tilde.components().map(|c| {
        let (p, m) = trace_branches(c);
        boundary_component(c.degree, compose(&p), compose(&m))
    })))
}

fn d_xi_pow(c: &HomogeneousComponent, alpha: usize) -> HomogeneousComponent {
    (0..alpha).fold(c.clone(), |acc, _| acc.d_xi().scale(-I))
}

fn dx_pow(c: &HomogeneousComponent, alpha: usize) -> HomogeneousComponent {
    (0..alpha).fold(c.clone(), |acc, _| acc.dx())
}

/// Tolerance on x-variation when checking the diagonal precondition.
pub const DIAGONAL_TOL: f64 = 1e-9;

/// One diagonalization step: p^(N) → p^(N+1).
pub fn diag_step(p: &SymbolExpansion, n: i32) -> Result<SymbolExpansion> {
    if n < 1 {
        return Err(Error::Unsupported(format!("diagonalization step N must be >= 1, got {n}")));
    }
    let depth = p.depth().ok_or(Error::MissingComponent { degree: -n })?;
    for c in p.components() {
        if c.degree >= 1 - n {
            let variation = c.x_variation();
            if variation > DIAGONAL_TOL {
                return Err(Error::NotDiagonal {
                    degree: c.degree,
                    variation,
                });
            }
        }
    }
    let pn = p.require(-n)?;
    let (cp, cm) = trace_branches(pn);
    let (mean_p, mean_m) = (cp.mean(), cm.mean());
    let mut out = SymbolExpansion::new();
    for c in p.components().filter(|c| c.degree > -n) {
        out.replace(c.clone());
    }
    out.replace(boundary_component(
        -n,
        PeriodicFunction::complex_constant(mean_p),
        PeriodicFunction::complex_constant(mean_m),
    ));
    if depth >= -n {
        return Ok(out);
    }
    let length_factor = {
        let p1 = p.require(1)?;
        // p_1 = |ξ|/L
        1.0 / p1.plus.trace().mean().re
    };
    let centered_p = &cp - &PeriodicFunction::complex_constant(mean_p);
    let centered_m = &cm - &PeriodicFunction::complex_constant(mean_m);
    let k = boundary_component(
        -n,
        centered_p.antiderivative().1.scale(-I * length_factor),
        centered_m.antiderivative().1.scale(I * length_factor),
    );
    if k.max_abs_coeff() == 0.0 {
        for c in p.components().filter(|c| c.degree < -n) {
            out.replace(c.clone());
        }
        return Ok(out);
    }
    for m in (depth..=-n - 1).rev() {
        let mut acc = p.require(m)?.clone();
        for alpha in 0..=(1 - m - n) as usize {
            let src = m + alpha as i32 + n;
            let norm = Complex64::new(1.0 / factorial(alpha), 0.0);
            let old = p.require(src)?;
            let left = dx_pow(&k, alpha).multiply(&d_xi_pow(old, alpha));
            let new = out.require(src)?;
            let right = dx_pow(new, alpha).multiply(&d_xi_pow(&k, alpha));
            acc = acc.add(&left.sub(&right).scale(norm));
        }
        debug_assert_eq!(acc.degree, m);
        out.replace(acc);
    }
    Ok(out)
}

/// p^(1) = b for the given disk problem, down to degree −depth.
pub fn first_symbol(problem: &DiskProblem, depth: i32, options: &DiagOptions) -> Result<SymbolExpansion> {
    let a = factor_symbol(
        &Potential {
            lambda: problem.lambda,
            tau: problem.tau.clone(),
        },
        depth,
    )?;
    let r = boundary_symbol(&a, &problem.rho)?;
    fio_conjugate_with(&r, &problem.rho, depth, options)
}

/// Runs the diagonalization and reads off s_1, …, s_order.
pub fn asymptotic_coefficients(problem: &DiskProblem, order: usize) -> Result<DiagonalCoefficients> {
    asymptotic_coefficients_with(problem, order, &DiagOptions::default())
}

pub fn asymptotic_coefficients_with(
    problem: &DiskProblem,
    order: usize,
    options: &DiagOptions,
) -> Result<DiagonalCoefficients> {
    if !problem.lambda.is_finite() {
        return Err(Error::Unsupported(format!("lambda must be a finite real, got {}", problem.lambda)));
    }
    if order == 0 {
        return Err(Error::Unsupported("expansion order must be >= 1".into()));
    }
    let depth = -(order as i32);
    let length = problem.rho.real_mean(1e-12)?;
    let mut p = first_symbol(problem, depth, options)?;
    let mut steps_done = 1usize;
    let mut s = Vec::with_capacity(order);
    let mut branch_values = vec![BranchValue {
        degree: 1,
        plus: Complex64::new(1.0 / length, 0.0),
        minus: Complex64::new(1.0 / length, 0.0),
    }];
    let mut zero = BranchValue {
        degree: 0,
        plus: Complex64::new(0.0, 0.0),
        minus: Complex64::new(0.0, 0.0),
    };
    if let Some(c) = p.component(0) {
        let (cp, cm) = trace_branches(c);
        zero.plus = cp.mean();
        zero.minus = cm.mean();
    }
    branch_values.push(zero);
    for n in 1..=order {
        let needed = if options.shortcut { n.div_ceil(2) } else { n };
        while steps_done < needed {
            p = diag_step(&p, steps_done as i32)?;
            steps_done += 1;
        }
        let c = p.require(-(n as i32))?;
        let (cp, cm) = trace_branches(c);
        let (plus, minus) = (cp.mean(), cm.mean());
        if plus.im.abs() > REALNESS_TOL {
            return Err(Error::NonRealMean { imag: plus.im });
        }
        s.push(plus.re);
        branch_values.push(BranchValue {
            degree: -(n as i32),
            plus,
            minus,
        });
    }
    Ok(DiagonalCoefficients {
        length,
        s,
        lambda: problem.lambda,
        branch_values,
    })
}

/// 0 once, then pairs j/L + Σ s_n j^{−n}.
pub fn predict_eigenvalues(c: &DiagonalCoefficients, j_max: usize) -> SpectrumSequence {
    build_model_sequence(&c.model(), c.s.len(), j_max)
}
