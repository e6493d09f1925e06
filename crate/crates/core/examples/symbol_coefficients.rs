//! Coefficients s_1..s_4 from the diagonalization for a non-round boundary
//! density and an angle-dependent potential.

use dtn_spectra::{asymptotic_coefficients, DiskProblem, JetFunction, PeriodicFunction};

fn main() -> dtn_spectra::Result<()> {
    let rho = PeriodicFunction::from_real_trig(1.0, &[0.3], &[0.1]);
    // τ = (1 + 0.2 sin x) − 0.2 sin x · t
    let tau = JetFunction::new(vec![
        &PeriodicFunction::constant(1.0) + &PeriodicFunction::sin(1, 0.2),
        PeriodicFunction::sin(1, -0.2),
    ])
    .padded(8);
    for lambda in [0.5, 1.0, 2.0] {
        let c = asymptotic_coefficients(
            &DiskProblem {
                lambda,
                tau: tau.clone(),
                rho: rho.clone(),
            },
            4,
        )?;
        println!("lambda = {lambda}: L = {:.6}, s = {:?}", c.length, c.s.iter().map(|x| format!("{x:+.8}")).collect::<Vec<_>>());
        // every s_n vanishes at λ = 0, so s_1 is linear through the origin
        println!("  s_1 / lambda = {:.10}", c.s[0] / lambda);
    }
    Ok(())
}
