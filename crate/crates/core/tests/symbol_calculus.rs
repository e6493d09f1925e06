mod common;

use common::random_trig;
use dtn_spectra::fit::polyfit;
use dtn_spectra::symbol::required_jet_order;
use dtn_spectra::{
    factor_symbol, is_hermitian, symbol_product, HomogeneousComponent, JetFunction, PeriodicFunction, Potential,
    SymbolExpansion,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_tau(rng: &mut ChaCha8Rng, order: usize) -> JetFunction {
    JetFunction::new(
        (0..=order)
            .map(|k| {
                let a0 = if k == 0 { 1.0 } else { rng.gen_range(-0.5..0.5) };
                random_trig(rng, a0, 2, 0.2)
            })
            .collect(),
    )
}

/// Σ_K (1/K!)(∂_ξ^K a)(D_x^K a) − ξ²/(1−t)² + ∂_t a − a/(1−t) + λτ
fn factorization_residual(a: &SymbolExpansion, p: &Potential, depth: i32) -> SymbolExpansion {
    let order = a.components().map(|c| c.jet_order()).min().unwrap() - 1;
    let a = SymbolExpansion::from_components(a.components().map(|c| {
        HomogeneousComponent::new(c.degree, c.plus.truncated(order + 1), c.minus.truncated(order + 1))
    }));
    let mut res = symbol_product(&a, &a, depth);
    let xi2 = JetFunction::from_t_polynomial(&(0..=order).map(|k| -((k + 1) as f64)).collect::<Vec<_>>());
    res.insert(HomogeneousComponent::even(2, xi2));
    let inv = JetFunction::inverse_one_minus_t(order);
    for c in a.components() {
        res.insert(c.dt().unwrap());
        res.insert(c.multiply_jet(&inv).scale(Complex64::new(-1.0, 0.0)));
    }
    let lt = p.tau.truncated(order).scale(Complex64::new(p.lambda, 0.0));
    res.insert(HomogeneousComponent::even(0, lt));
    res
}

#[test]
fn factorization_identity_holds_down_to_depth() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for depth in -6..=-1 {
        let tau = random_tau(&mut rng, required_jet_order(depth));
        let p = Potential {
            lambda: rng.gen_range(-2.0..2.0),
            tau,
        };
        let a = factor_symbol(&p, depth).unwrap();
        let res = factorization_residual(&a, &p, depth);
        for c in res.components().filter(|c| c.degree > depth) {
            assert!(c.max_abs_coeff() < 1e-10, "depth {depth} degree {}: {:e}", c.degree, c.max_abs_coeff());
        }
    }
}

#[test]
fn components_are_polynomials_in_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let depth = -6;
    let tau = random_tau(&mut rng, required_jet_order(depth));
    let symbols: Vec<(f64, SymbolExpansion)> = (0..6)
        .map(|k| {
            let lambda = k as f64;
            (lambda, factor_symbol(&Potential { lambda, tau: tau.clone() }, depth).unwrap())
        })
        .collect();
    for m in depth..=-1 {
        let degree = (-m as usize).div_ceil(2);
        let points = degree + 2;
        let lambdas: Vec<f64> = symbols[..points].iter().map(|s| s.0).collect();
        // sample each component at a few (x, t, ξ)
        for &(x, t, xi) in &[(0.3, 0.0, 1.0), (2.0, 0.1, -1.0), (4.1, 0.05, 1.0)] {
            for part in 0..2 {
                let values: Vec<f64> = symbols[..points]
                    .iter()
                    .map(|s| {
                        let v = s.1.require(m).unwrap().eval(x, t, xi);
                        if part == 0 { v.re } else { v.im }
                    })
                    .collect();
                let fit = polyfit(&lambdas, &values, degree).unwrap();
                assert!(fit.max_residual < 1e-10, "m={m}: residual {:e}", fit.max_residual);
                assert!(fit.coefficients[0].abs() < 1e-10, "m={m}: constant {:e}", fit.coefficients[0]);
            }
        }
    }
}

#[test]
fn factor_symbol_is_hermitian_to_depth_six() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let tau = random_tau(&mut rng, required_jet_order(-6));
    let a = factor_symbol(&Potential { lambda: 1.3, tau }, -6).unwrap();
    assert!(is_hermitian(&a, 1e-12));
}

fn eval_naive_product(a: &SymbolExpansion, b: &SymbolExpansion, depth: i32, x: f64, xi: f64) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    let sgn = xi.signum();
    for ca in a.components() {
        for cb in b.components() {
            let mut factorial = 1.0;
            for k in 0..=8usize {
                if k > 0 {
                    factorial *= k as f64;
                }
                let degree = ca.degree + cb.degree - k as i32;
                if degree < depth {
                    break;
                }
                let (fa, fb) = if xi > 0.0 { (&ca.plus, &cb.plus) } else { (&ca.minus, &cb.minus) };
                // ∂_ξ^k |ξ|^m = m(m−1)…(m−k+1) sgn^k |ξ|^{m−k}
                let ff: f64 = (0..k).map(|i| (ca.degree - i as i32) as f64).product();
                let left = fa.trace().eval(x) * ff * sgn.powi(k as i32) * xi.abs().powi(ca.degree - k as i32);
                // D_x^k Σ c_n e^{inx} = Σ n^k c_n e^{inx}
                let right: Complex64 = fb
                    .trace()
                    .coefficients()
                    .map(|(n, c)| c * (n as f64).powi(k as i32) * Complex64::from_polar(1.0, n as f64 * x))
                    .sum::<Complex64>()
                    * xi.abs().powi(cb.degree);
                total += left * right / factorial;
            }
        }
    }
    total
}

fn random_symbol(rng: &mut ChaCha8Rng, degrees: &[i32]) -> SymbolExpansion {
    SymbolExpansion::from_components(degrees.iter().map(|&m| {
        let p = random_trig(rng, 0.5, 3, 0.3);
        let q = random_trig(rng, 0.2, 3, 0.3);
        HomogeneousComponent::new(m, JetFunction::boundary(p), JetFunction::boundary(q))
    }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn product_matches_naive_expansion(seed in any::<u64>(), x in 0.0f64..std::f64::consts::TAU, xi in prop::sample::select(vec![-3.0, -1.0, 1.5, 4.0])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_symbol(&mut rng, &[1, 0, -1, -2]);
        let b = random_symbol(&mut rng, &[1, -1, -3]);
        let depth = -4;
        let got = symbol_product(&a, &b, depth).eval(x, 0.0, xi);
        let expected = eval_naive_product(&a, &b, depth, x, xi);
        prop_assert!((got - expected).norm() < 1e-10 * (1.0 + expected.norm()), "{} vs {}", got, expected);
    }

    #[test]
    fn hermitian_inputs_give_hermitian_products(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let herm = |rng: &mut ChaCha8Rng, degrees: &[i32]| {
            SymbolExpansion::from_components(degrees.iter().map(|&m| {
                let p = random_trig(rng, 0.5, 3, 0.3);
                let odd = random_trig(rng, 0.0, 3, 0.3).scale(Complex64::new(0.0, 1.0));
                HomogeneousComponent::even(m, JetFunction::boundary(p))
                    .add(&HomogeneousComponent::odd(m, JetFunction::boundary(odd)))
            }))
        };
        let a = herm(&mut rng, &[1, -1, -2]);
        let b = herm(&mut rng, &[0, -1]);
        prop_assert!(is_hermitian(&a, 1e-14));
        prop_assert!(is_hermitian(&symbol_product(&a, &b, -5), 1e-12));
    }
}

#[test]
fn periodic_weight_is_rejected_before_division() {
    let rho = &PeriodicFunction::constant(1.0) + &PeriodicFunction::cos(3, -1.2);
    let a = factor_symbol(&Potential { lambda: 1.0, tau: JetFunction::constant(1.0, 3) }, -1).unwrap();
    assert!(dtn_spectra::boundary_symbol(&a, &rho).is_err());
}
