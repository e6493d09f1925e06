mod common;

use std::f64::consts::SQRT_2;

use dtn_spectra::diag::DiskProblem;
use dtn_spectra::fit::fit_tail_coefficients;
use dtn_spectra::forward::{
    annulus_constant_spectrum, dirichlet_pencil_guard, disk_constant_spectrum, disk_mode, disk_radial_spectrum,
    Geometry, DEFAULT_PENCIL_MARGIN,
};
use dtn_spectra::sequences::decay_slope;
use dtn_spectra::{build_model_sequence, ComponentModel, JetFunction, PeriodicFunction};

/// σ for mode j, read from the sorted sequence at index 2j.
fn pair_value(s: &dtn_spectra::SpectrumSequence, j: usize) -> f64 {
    s.get(2 * j).unwrap()
}

#[test]
fn annulus_spectrum_is_real_and_sorted() {
    for &(lambda, r) in &[(1.0, 0.5), (-2.0, 0.3), (3.0, 1.0 / SQRT_2), (0.0, 0.6)] {
        let s = annulus_constant_spectrum(lambda, r, 80).unwrap();
        assert_eq!(s.len(), 2 * (2 * 80 + 1));
        assert!(s.values().iter().all(|v| v.is_finite()));
        assert!(s.is_nondecreasing());
    }
}

#[test]
fn annulus_tail_splits_into_two_families() {
    let r = 1.0 / SQRT_2;
    let s = annulus_constant_spectrum(1.0, r, 300).unwrap();
    // outer circle: L = 1; inner circle: L = R with k_g integrating to −2π
    let outer = ComponentModel::new(1.0, vec![-0.5, 0.5]);
    let inner = ComponentModel::new(1.0 / r, vec![-r / 2.0, -r / 2.0]);
    let limit = 0.9 * 300.0;
    let mut checked = 0;
    // index = mode j; below j ≈ 20 the two circles still interact visibly
    for (i, e) in s.entries().iter().enumerate() {
        if e.mode.unwrap() <= 50 || e.value > limit {
            continue;
        }
        let nearest = |c: &ComponentModel| {
            let j = (e.value / c.alpha).round().max(1.0) as usize;
            (c.value(j, 2) - e.value).abs()
        };
        let family = if nearest(&outer) < nearest(&inner) { 0 } else { 1 };
        assert_eq!(Some(family), e.component, "index {i} value {}", e.value);
        checked += 1;
    }
    assert!(checked > 400, "{checked}");
}

#[test]
fn doubling_is_exact_on_the_disk() {
    let s = disk_constant_spectrum(2.0, 200).unwrap();
    let (x, d): (Vec<f64>, Vec<f64>) = (20..=200)
        .map(|j| (j as f64, (s.get(2 * j).unwrap() - s.get(2 * j - 1).unwrap()).abs()))
        .unzip();
    let fit = decay_slope(&x, &d).unwrap();
    assert!(fit.floor_dominated);
    assert_eq!(fit.excluded, x.len());
}

#[test]
fn two_term_remainder_decays_cubically() {
    let lambda = 1.0;
    let s = disk_constant_spectrum(lambda, 200).unwrap();
    let (x, d): (Vec<f64>, Vec<f64>) = (20..=200)
        .map(|j| {
            let jf = j as f64;
            (jf, (pair_value(&s, j) - (jf - lambda / (2.0 * jf) + lambda / (2.0 * jf * jf))).abs())
        })
        .unzip();
    let slope = decay_slope(&x, &d).unwrap().slope.unwrap();
    assert!(slope <= -2.7, "{slope}");
}

#[test]
fn modes_increase_beyond_threshold() {
    for &lambda in &[30.0, -5.0, 0.5] {
        let sigma: Vec<f64> = (0..120).map(|n| disk_mode(lambda, n)).collect();
        // threshold: past √|λ| the mode term dominates
        let start = lambda.abs().sqrt().ceil() as usize + 1;
        assert!(sigma[start..].windows(2).all(|w| w[1] > w[0]), "λ={lambda}");
    }
}

#[test]
fn two_term_model_tracks_bessel_values() {
    let s = disk_constant_spectrum(1.0, 200).unwrap();
    let model = build_model_sequence(&ComponentModel::new(1.0, vec![-0.5, 0.5]), 2, 200);
    let worst = (100..=400).map(|i| (s.get(i).unwrap() - model.get(i).unwrap()).abs()).fold(0.0, f64::max);
    assert!(worst < 5e-5, "{worst}");
}

#[test]
fn radial_fit_matches_quadrature() {
    let profile = [1.0, 0.0, 0.5];
    let problem = DiskProblem {
        lambda: 1.0,
        tau: JetFunction::from_radial_polynomial(&profile),
        rho: PeriodicFunction::constant(1.0),
    };
    let (s1, s2) = common::closed_form_s1_s2(&problem);
    assert!((s1 + 0.75).abs() < 1e-12);
    let s = disk_radial_spectrum(1.0, &profile, 400).unwrap();
    let j: Vec<f64> = (50..=400).map(|j| j as f64).collect();
    let sigma: Vec<f64> = (50..=400).map(|j| pair_value(&s, j)).collect();
    let fit = fit_tail_coefficients(&j, &sigma, 1.0, 4).unwrap();
    assert!((fit.coefficients[0] - s1).abs() < 1e-3, "{:?}", fit.coefficients);
    assert!((fit.coefficients[1] - s2).abs() < 1e-2, "{:?} vs {s2}", fit.coefficients);
}

#[test]
fn pencil_guard_examples() {
    // j_{0,1}
    let j01: f64 = 2.404_825_557_695_773;
    assert!(!dirichlet_pencil_guard(j01 * j01, &Geometry::DiskConstant, 10, DEFAULT_PENCIL_MARGIN));
    assert!(dirichlet_pencil_guard(-1.0, &Geometry::DiskConstant, 10, DEFAULT_PENCIL_MARGIN));
    assert!(dirichlet_pencil_guard(0.0, &Geometry::AnnulusConstant { inner_radius: 0.5 }, 10, DEFAULT_PENCIL_MARGIN));
    assert!(!dirichlet_pencil_guard(
        j01 * j01,
        &Geometry::DiskRadial { tau: vec![1.0] },
        3,
        DEFAULT_PENCIL_MARGIN
    ));
}
