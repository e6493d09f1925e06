//! Remainder order of the two-term expansion, disk and annulus.

use dtn_spectra::cli::verify;
use dtn_spectra::forward::{Geometry, DEFAULT_PENCIL_MARGIN};

fn main() -> dtn_spectra::Result<()> {
    let cases = [
        ("disk", Geometry::DiskConstant),
        ("annulus", Geometry::AnnulusConstant { inner_radius: 0.5 }),
        ("radial", Geometry::DiskRadial { tau: vec![1.0, 0.0, 0.5] }),
    ];
    for (name, g) in cases {
        let r = verify(&g, 1.0, 2, 200, None, DEFAULT_PENCIL_MARGIN)?;
        println!("{name:>8}: slope {:?} over positions {:?}", r.fit.slope, r.window);
    }
    Ok(())
}
