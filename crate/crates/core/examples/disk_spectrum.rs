//! Steklov-type spectrum of the unit disk for a few λ, checked against the
//! two-term model j − λ/2j + λ/2j².

use dtn_spectra::forward::{solve, Geometry, DEFAULT_PENCIL_MARGIN};

fn main() -> dtn_spectra::Result<()> {
    for lambda in [0.0, 1.0, 2.0, -3.0] {
        let s = solve(lambda, &Geometry::DiskConstant, 100, DEFAULT_PENCIL_MARGIN)?;
        let v = s.values();
        println!("lambda = {lambda:>5}: first values {:?}", v[..5].iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>());
        for j in [10usize, 50, 100] {
            let jf = j as f64;
            let model = jf - lambda / (2.0 * jf) + lambda / (2.0 * jf * jf);
            println!("  j = {j:>3}: sigma = {:.12}  model error = {:.2e}", v[2 * j], (v[2 * j] - model).abs());
        }
    }
    Ok(())
}
