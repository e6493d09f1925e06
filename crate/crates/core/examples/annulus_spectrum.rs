//! Annulus R < r < 1: the merged spectrum and its split into the two circle families.

use dtn_spectra::forward::{solve, Geometry, DEFAULT_PENCIL_MARGIN};

fn main() -> dtn_spectra::Result<()> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let s = solve(1.0, &Geometry::AnnulusConstant { inner_radius: r }, 40, DEFAULT_PENCIL_MARGIN)?;
    println!("{} values, modes 0..=40", s.len());
    for e in s.entries().iter().take(12) {
        println!("  mode {:>2}  family {}  {:.9}", e.mode.unwrap(), e.component.unwrap(), e.value);
    }
    // outer family ~ j, inner family ~ j/R
    for e in s.entries().iter().filter(|e| e.mode == Some(40)).step_by(2) {
        let j = 40.0;
        let predicted = if e.component == Some(0) { j } else { j / r };
        println!("mode 40, family {}: {:.6} (leading term {:.6})", e.component.unwrap(), e.value, predicted);
    }
    Ok(())
}
