//! Disk with τ(r) = 1 + r²/2: shooting oracle against the symbol engine.

use dtn_spectra::forward::{solve, Geometry, DEFAULT_PENCIL_MARGIN};
use dtn_spectra::{asymptotic_coefficients, DiskProblem, JetFunction, PeriodicFunction};

fn main() -> dtn_spectra::Result<()> {
    let tau = vec![1.0, 0.0, 0.5];
    let lambda = 1.0;
    let problem = DiskProblem {
        lambda,
        tau: JetFunction::from_radial_polynomial(&tau).padded(8),
        rho: PeriodicFunction::constant(1.0),
    };
    let c = asymptotic_coefficients(&problem, 2)?;
    println!("engine: L = {}, s = {:?}", c.length, c.s);

    let oracle = solve(lambda, &Geometry::DiskRadial { tau }, 120, DEFAULT_PENCIL_MARGIN)?.values();
    for j in [20usize, 60, 120] {
        let jf = j as f64;
        let model = jf + c.s[0] / jf + c.s[1] / (jf * jf);
        println!("j = {j:>3}: oracle {:.10}  model {:.10}  diff {:.2e}", oracle[2 * j], model, oracle[2 * j] - model);
    }
    Ok(())
}
