//! Inverse problem: perimeters, λ and ∫k_g from 600 merged annulus eigenvalues.

use dtn_spectra::decoupler::Assumption;
use dtn_spectra::forward::{leading_eigenvalues, Geometry, DEFAULT_PENCIL_MARGIN};
use dtn_spectra::{decouple, DecoupleOptions};

fn main() -> dtn_spectra::Result<()> {
    let g = Geometry::AnnulusConstant {
        inner_radius: std::f64::consts::FRAC_1_SQRT_2,
    };
    let s = leading_eigenvalues(1.0, &g, 600, DEFAULT_PENCIL_MARGIN)?;
    let opts = DecoupleOptions {
        assumption: Assumption::Flat,
        ..Default::default()
    };
    let report = decouple(&s, &opts)?;
    print!("{}", report.summary());
    println!("genus under K = 0: {:.4}", report.genus.unwrap_or(f64::NAN));
    Ok(())
}
