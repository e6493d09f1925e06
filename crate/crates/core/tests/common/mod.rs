#![allow(dead_code)]

use dtn_spectra::diag::DiskProblem;
use dtn_spectra::{JetFunction, PeriodicFunction};
use rand::Rng;

pub fn random_trig<R: Rng>(rng: &mut R, a0: f64, modes: usize, amp: f64) -> PeriodicFunction {
    let cos: Vec<f64> = (0..modes).map(|_| rng.gen_range(-amp..amp)).collect();
    let sin: Vec<f64> = (0..modes).map(|_| rng.gen_range(-amp..amp)).collect();
    PeriodicFunction::from_real_trig(a0, &cos, &sin)
}

/// Smooth random ρ > 0, τ jet of order `jet_order`, λ in [−3, 3].
pub fn random_problem<R: Rng>(rng: &mut R, jet_order: usize) -> DiskProblem {
    let rho = random_trig(rng, 1.0, 3, 0.08);
    let a0 = rng.gen_range(0.5..1.5);
    let mut jet = vec![random_trig(rng, a0, 2, 0.1)];
    for _ in 0..jet_order {
        let a0 = rng.gen_range(-0.5..0.5);
        jet.push(random_trig(rng, a0, 2, 0.1));
    }
    DiskProblem {
        lambda: rng.gen_range(-3.0..3.0),
        tau: JetFunction::new(jet),
        rho,
    }
}

/// (1/2π)∫ f over a uniform grid.
pub fn grid_mean(points: usize, f: impl Fn(f64) -> f64) -> f64 {
    (0..points)
        .map(|k| f(2.0 * std::f64::consts::PI * k as f64 / points as f64))
        .sum::<f64>()
        / points as f64
}

/// s_1 = −(λ/4π)∫τ/ρ and s_2 = (λL/8π)∫(τ_r + 2τ)/ρ² by quadrature.
pub fn closed_form_s1_s2(p: &DiskProblem) -> (f64, f64) {
    let n = 4096;
    let tau = |x: f64| p.tau.coeff(0).eval(x).re;
    let tau_r = |x: f64| -p.tau.coeff(1).eval(x).re;
    let rho = |x: f64| p.rho.eval(x).re;
    let length = grid_mean(n, rho);
    let s1 = -p.lambda / 2.0 * grid_mean(n, |x| tau(x) / rho(x));
    let s2 = p.lambda * length / 4.0 * grid_mean(n, |x| (tau_r(x) + 2.0 * tau(x)) / rho(x).powi(2));
    (s1, s2)
}

use dtn_spectra::sequences::{merge, ComponentModel, SpectralValue, SpectrumSequence};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Shape of a synthetic configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseKind {
    Generic,
    Repeated,
    Divisible,
}

#[derive(Clone, Debug)]
pub struct SyntheticCase {
    pub kind: CaseKind,
    pub components: Vec<ComponentModel>,
    pub spectrum: SpectrumSequence,
}

/// min |qα_a − pα_b| over q ≤ 12, p ≥ 1.
fn resonance_gap(a: f64, b: f64) -> f64 {
    (1..=12)
        .map(|q| {
            let p = (q as f64 * a / b).round().max(1.0);
            (q as f64 * a - p * b).abs()
        })
        .fold(f64::INFINITY, f64::min)
}

fn draw_alpha(rng: &mut ChaCha8Rng, taken: &[f64]) -> f64 {
    loop {
        let a = rng.gen_range(1.0..2.5);
        if taken.iter().all(|&b| resonance_gap(a, b) > 0.05 && resonance_gap(b, a) > 0.05) {
            return a;
        }
    }
}

fn draw_s(rng: &mut ChaCha8Rng) -> Vec<f64> {
    vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]
}

/// Merge of ℓ ≤ 3 two-term models up to value `top`, each entry perturbed by
/// at most `noise`·j^{−4}.
pub fn synthetic_case(seed: u64, top: f64, noise: f64) -> SyntheticCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = match seed % 3 {
        0 => CaseKind::Generic,
        1 => CaseKind::Repeated,
        _ => CaseKind::Divisible,
    };
    let mut components = Vec::new();
    match kind {
        CaseKind::Generic => {
            let l = rng.gen_range(1..=3);
            let mut taken = Vec::new();
            for _ in 0..l {
                let a = draw_alpha(&mut rng, &taken);
                taken.push(a);
                components.push(ComponentModel::new(a, draw_s(&mut rng)));
            }
        }
        CaseKind::Repeated => {
            let a = draw_alpha(&mut rng, &[]);
            let first = draw_s(&mut rng);
            let mut second = draw_s(&mut rng);
            if rng.gen_bool(0.3) {
                // same s_1, different s_2
                second[0] = first[0];
            }
            while (second[0] - first[0]).abs() < 0.2 && (second[0] != first[0] || (second[1] - first[1]).abs() < 0.2) {
                second = vec![second[0], rng.gen_range(-1.0..1.0)];
                if second[0] != first[0] {
                    second[0] = rng.gen_range(-1.0..1.0);
                }
            }
            components.push(ComponentModel::new(a, first));
            components.push(ComponentModel::new(a, second));
            if rng.gen_bool(0.5) {
                let b = draw_alpha(&mut rng, &[a]);
                components.push(ComponentModel::new(b, draw_s(&mut rng)));
            }
        }
        CaseKind::Divisible => {
            let a = rng.gen_range(1.0..1.4);
            let r = rng.gen_range(2..=3) as f64;
            components.push(ComponentModel::new(a, draw_s(&mut rng)));
            components.push(ComponentModel::new(r * a, draw_s(&mut rng)));
            if rng.gen_bool(0.4) {
                let b = draw_alpha(&mut rng, &[a, r * a]);
                components.push(ComponentModel::new(b, draw_s(&mut rng)));
            }
        }
    }
    let parts: Vec<SpectrumSequence> = components.iter().map(|c| noisy_pairs(c, top, noise, &mut rng)).collect();
    let merged = merge(&parts);
    let values: Vec<f64> = merged.values().into_iter().filter(|&v| v <= top).collect();
    SyntheticCase {
        kind,
        components,
        spectrum: SpectrumSequence::from_values(&values),
    }
}

fn noisy_pairs(c: &ComponentModel, top: f64, noise: f64, rng: &mut ChaCha8Rng) -> SpectrumSequence {
    let j_max = (top / c.alpha).floor() as usize;
    let mut entries = vec![SpectralValue::new(0.0)];
    for j in 1..=j_max {
        let v = c.value(j, c.s.len());
        for _ in 0..2 {
            let e = noise * rng.gen_range(-1.0..1.0) * (j as f64).powi(-4);
            entries.push(SpectralValue::new(v + e));
        }
    }
    SpectrumSequence::new(entries)
}

/// One model up to value `top` with seeded noise of size `noise`·j^{−4}.
pub fn noisy_model(c: &ComponentModel, top: f64, noise: f64, seed: u64) -> SpectrumSequence {
    let s = noisy_pairs(c, top, noise, &mut ChaCha8Rng::seed_from_u64(seed));
    let values: Vec<f64> = s.values().into_iter().filter(|&v| v <= top).collect();
    SpectrumSequence::from_values(&values)
}

/// Compares a report against the generating models: α within `alpha_tol`,
/// multiplicities exact, s_1 and s_2 within `s_tol`. A negative `s_tol`
/// means within max(|s_tol|, reported uncertainty). Components sharing α are
/// matched by sorting on (s_1, s_2).
pub fn check_report(
    case: &SyntheticCase,
    report: &dtn_spectra::DecoupleReport,
    alpha_tol: f64,
    s_tol: f64,
) -> std::result::Result<(), String> {
    let mut expected: Vec<(f64, Vec<f64>)> = case.components.iter().map(|c| (c.alpha, c.s.clone())).collect();
    expected.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1[0].total_cmp(&b.1[0])).then(a.1[1].total_cmp(&b.1[1])));
    let mut got: Vec<(f64, usize, Vec<f64>, Vec<f64>)> = report
        .components
        .iter()
        .map(|c| (c.alpha, c.multiplicity, c.s.clone(), c.s_uncertainty.clone()))
        .collect();
    got.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2[0].total_cmp(&b.2[0])).then(a.2[1].total_cmp(&b.2[1])));
    let total: usize = got.iter().map(|g| g.1).sum();
    if total != expected.len() {
        return Err(format!("{} components recovered, expected {}", total, expected.len()));
    }
    let mut i = 0;
    for (alpha, mult, s, unc) in &got {
        for _ in 0..*mult {
            let (ea, es) = &expected[i];
            if (alpha - ea).abs() > alpha_tol {
                return Err(format!("alpha {alpha} vs {ea}"));
            }
            for n in 0..2 {
                let tol = if s_tol < 0.0 { (-s_tol).max(unc[n]) } else { s_tol };
                if (s[n] - es[n]).abs() > tol {
                    return Err(format!("alpha {ea}: s_{} = {} vs {}", n + 1, s[n], es[n]));
                }
            }
            i += 1;
        }
    }
    Ok(())
}
