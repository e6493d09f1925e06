//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the test harness so the lines always print. Exits non-zero
//! when a criterion fails, except those listed in `KNOWN_UNATTAINABLE`.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::time::Instant;

use common::{check_report, closed_form_s1_s2, random_problem, synthetic_case};
use dtn_spectra::decoupler::{Assumption, Flag};
use dtn_spectra::diag::{asymptotic_coefficients_with, DiagOptions};
use dtn_spectra::fit::{fit_tail_coefficients, polyfit};
use dtn_spectra::forward::{disk_constant_spectrum, disk_radial_spectrum, leading_eigenvalues, solve, Geometry};
use dtn_spectra::sequences::decay_slope;
use dtn_spectra::{
    asymptotic_coefficients, decouple, merge, DecoupleOptions, DiskProblem, JetFunction, PeriodicFunction,
    SpectrumSequence,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Criterion 6 asks for s_2 within 1e-2 of 1/2. The boundary term is
/// (λL/8π)∫(τ_r + 2τ)/ρ² with τ_r the outward derivative; for τ = 1 + r²/2
/// that is 1, and the shooting oracle agrees. The line is kept as stated.
const KNOWN_UNATTAINABLE: &[u32] = &[6];

struct Line {
    id: u32,
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn tail_fit(s: &SpectrumSequence, range: std::ops::RangeInclusive<usize>, terms: usize) -> Vec<f64> {
    let j: Vec<f64> = range.clone().map(|j| j as f64).collect();
    let sigma: Vec<f64> = range.map(|j| s.get(2 * j).unwrap()).collect();
    fit_tail_coefficients(&j, &sigma, 1.0, terms).unwrap().coefficients
}

fn crit1() -> Line {
    let t = Instant::now();
    let s = disk_constant_spectrum(2.0, 400).unwrap();
    let c = tail_fit(&s, 50..=400, 4);
    let secs = t.elapsed().as_secs_f64();
    let (e1, e2) = ((c[0] + 1.0).abs(), (c[1] - 1.0).abs());
    Line {
        id: 1,
        pass: e1 < 1e-4 && e2 < 1e-4 && secs < 5.0,
        detail: format!("disk λ=2: s1 = {:.8} (err {e1:.1e}), s2 = {:.8} (err {e2:.1e}), tol 1e-4, {secs:.2} s < 5 s", c[0], c[1]),
    }
}

fn crit2() -> Line {
    let lambda = 1.0;
    let s = disk_constant_spectrum(lambda, 200).unwrap();
    let (x, d): (Vec<f64>, Vec<f64>) = (20..=200)
        .map(|j| {
            let jf = j as f64;
            (jf, (s.get(2 * j).unwrap() - (jf - lambda / (2.0 * jf) + lambda / (2.0 * jf * jf))).abs())
        })
        .unzip();
    let slope = decay_slope(&x, &d).unwrap().slope;
    Line {
        id: 2,
        pass: slope.is_some_and(|v| v <= -2.7),
        detail: format!("two-term remainder, disk λ=1, j ∈ [20,200]: slope {slope:?} ≤ -2.7"),
    }
}

fn crit3() -> Line {
    let s = disk_constant_spectrum(2.0, 200).unwrap();
    let (x, d): (Vec<f64>, Vec<f64>) = (20..=200)
        .map(|j| (j as f64, (s.get(2 * j).unwrap() - s.get(2 * j - 1).unwrap()).abs()))
        .unzip();
    let fit = decay_slope(&x, &d).unwrap();
    let max = d.iter().cloned().fold(0.0, f64::max);
    let pass = match fit.slope {
        Some(v) => v <= -4.0,
        None => fit.floor_dominated && fit.excluded == x.len(),
    };
    Line {
        id: 3,
        pass,
        detail: format!(
            "doubling, disk λ=2: slope {:?}, {} of {} differences below the 1e-13 floor (max {max:.1e})",
            fit.slope,
            fit.excluded,
            x.len()
        ),
    }
}

fn crit4() -> Line {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_closed, mut worst_short) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let p = random_problem(&mut rng, 6);
        let short = asymptotic_coefficients(&p, 4).unwrap();
        let full = asymptotic_coefficients_with(
            &p,
            4,
            &DiagOptions {
                shortcut: false,
                ..DiagOptions::default()
            },
        )
        .unwrap();
        let (s1, s2) = closed_form_s1_s2(&p);
        worst_closed = worst_closed.max(rel(full.s[0], s1)).max(rel(full.s[1], s2));
        for (a, b) in short.s.iter().zip(&full.s) {
            worst_short = worst_short.max((a - b).abs());
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Line {
        id: 4,
        pass: worst_closed < 1e-9 && worst_short < 1e-10 && secs < 30.0,
        detail: format!(
            "20 draws: closed-form rel err {worst_closed:.1e} < 1e-9, shortcut diff {worst_short:.1e} < 1e-10 (n ≤ 4), {secs:.2} s < 30 s"
        ),
    }
}

fn crit5() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let base = random_problem(&mut rng, 6);
    let mut worst = 0.0f64;
    for n in 1..=4usize {
        let lambdas: Vec<f64> = (0..n + 2).map(|k| 0.7 * k as f64 - 1.3).collect();
        let values: Vec<f64> = lambdas
            .iter()
            .map(|&lambda| asymptotic_coefficients(&DiskProblem { lambda, ..base.clone() }, n).unwrap().s[n - 1])
            .collect();
        let fit = polyfit(&lambdas, &values, n).unwrap();
        worst = worst.max(fit.coefficients[0].abs());
    }
    Line {
        id: 5,
        pass: worst < 1e-10,
        detail: format!("s_n(λ) at n+2 points, degree ≤ n: max |constant term| {worst:.1e} < 1e-10"),
    }
}

fn crit6() -> Line {
    let profile = [1.0, 0.0, 0.5];
    let s = disk_radial_spectrum(1.0, &profile, 400).unwrap();
    let c = tail_fit(&s, 50..=400, 4);
    let (_, quad) = closed_form_s1_s2(&DiskProblem {
        lambda: 1.0,
        tau: JetFunction::from_radial_polynomial(&profile),
        rho: PeriodicFunction::constant(1.0),
    });
    let (e1, e2) = ((c[0] + 0.75).abs(), (c[1] - 0.5).abs());
    Line {
        id: 6,
        pass: e1 < 1e-3 && e2 < 1e-2,
        detail: format!(
            "τ = 1 + r²/2, λ=1: s1 = {:.6} (err {e1:.1e} < 1e-3), s2 = {:.6} vs 1/2 (err {e2:.1e} < 1e-2); quadrature gives s2 = {quad:.6}, oracle differs by {:.1e}",
            c[0],
            c[1],
            (c[1] - quad).abs()
        ),
    }
}

fn crit7() -> Line {
    let t = Instant::now();
    let g = Geometry::AnnulusConstant { inner_radius: FRAC_1_SQRT_2 };
    let s = leading_eigenvalues(1.0, &g, 600, 1e-6).unwrap();
    let r = decouple(&s, &DecoupleOptions::default());
    let secs = t.elapsed().as_secs_f64();
    let r = match r {
        Ok(r) => r,
        Err(e) => {
            return Line {
                id: 7,
                pass: false,
                detail: format!("decoupler error: {e}"),
            }
        }
    };
    let mut per = r.perimeters();
    per.sort_by(f64::total_cmp);
    let e_per = if per.len() == 2 {
        (per[0] - TAU * FRAC_1_SQRT_2).abs().max((per[1] - TAU).abs())
    } else {
        f64::INFINITY
    };
    let lambda = r.lambda.as_ref().map_or(f64::NAN, |l| l.estimate);
    let g = r.geodesic_totals().unwrap_or_default();
    let e_g = if g.len() == 2 {
        (g[0] - TAU).abs().max((g[1] + TAU).abs())
    } else {
        f64::INFINITY
    };
    let euler = r.euler_invariant.unwrap_or(f64::NAN);
    Line {
        id: 7,
        pass: e_per < 1e-3 && (lambda - 1.0).abs() < 1e-2 && e_g < 5e-2 && euler.abs() < 5e-2 && secs < 60.0,
        detail: format!(
            "annulus R=1/√2: perimeter err {e_per:.1e} < 1e-3, λ = {lambda:.6}, ∫k_g err {e_g:.1e} < 5e-2, euler {euler:.1e}, {secs:.2} s < 60 s"
        ),
    }
}

fn crit8() -> Line {
    let opts = DecoupleOptions::default();
    let mut passed = 0;
    let mut failures = Vec::new();
    for seed in 0..100 {
        let case = synthetic_case(seed, 600.0, 0.5);
        let outcome = decouple(&case.spectrum, &opts)
            .map_err(|e| e.to_string())
            .and_then(|r| check_report(&case, &r, 1e-6, 1e-3));
        match outcome {
            Ok(()) => passed += 1,
            Err(e) => failures.push(format!("seed {seed} {:?}: {e}", case.kind)),
        }
    }
    for f in &failures {
        println!("      {f}");
    }
    Line {
        id: 8,
        pass: passed >= 95,
        detail: format!("synthetic suite (ℓ ≤ 3, noise 0.5·j^-4): {passed}/100 within α 1e-6, exact multiplicity, s 1e-3; need ≥ 95"),
    }
}

fn crit9() -> Line {
    let unit = solve(0.0, &Geometry::DiskConstant, 400, 1e-6).unwrap();
    let small: Vec<f64> = unit.values().iter().map(|v| v / 0.6).filter(|&v| v <= 400.0).collect();
    let r = decouple(&merge(&[unit, SpectrumSequence::from_values(&small)]), &DecoupleOptions::default()).unwrap();
    let mut per = r.perimeters();
    per.sort_by(f64::total_cmp);
    let per_ok = per.len() == 2 && (per[0] - 1.2 * PI).abs() < 1e-6 && (per[1] - TAU).abs() < 1e-6;
    let flagged = r.has_flag(Flag::NothingBeyondPerimeters);
    let silent = r.lambda.is_none() && r.euler_invariant.is_none() && r.components.iter().all(|c| c.lambda.is_none() && c.geodesic_total.is_none());
    // the flag must also hold under a geometric assumption
    let sphere = DecoupleOptions {
        assumption: Assumption::Sphere,
        ..Default::default()
    };
    let r2 = decouple(&solve(0.0, &Geometry::DiskConstant, 400, 1e-6).unwrap(), &sphere).unwrap();
    let sphere_ok = r2.has_flag(Flag::NothingBeyondPerimeters) && r2.area.is_none();
    Line {
        id: 9,
        pass: per_ok && flagged && silent && sphere_ok,
        detail: format!("λ=0, two disks: perimeters {per:?}, flag {flagged}, no λ/∫k_g/euler {silent}, sphere assumption adds nothing {sphere_ok}"),
    }
}

fn main() {
    let criteria: [fn() -> Line; 9] = [crit1, crit2, crit3, crit4, crit5, crit6, crit7, crit8, crit9];
    let mut blocking = 0;
    for c in criteria {
        let line = c();
        let known = KNOWN_UNATTAINABLE.contains(&line.id);
        let tag = match (line.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (ledgered)",
            (false, false) => "FAIL",
        };
        println!("criterion {}: {tag}  {}", line.id, line.detail);
        if !line.pass && !known {
            blocking += 1;
        }
    }
    if blocking > 0 {
        eprintln!("{blocking} criteria failed");
        std::process::exit(1);
    }
}
