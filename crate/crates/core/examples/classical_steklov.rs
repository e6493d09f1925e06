//! λ = 0: two disjoint disks give perimeters and nothing else.

use dtn_spectra::decoupler::Flag;
use dtn_spectra::forward::{solve, Geometry, DEFAULT_PENCIL_MARGIN};
use dtn_spectra::{decouple, merge, DecoupleOptions, SpectrumSequence};

fn main() -> dtn_spectra::Result<()> {
    let unit = solve(0.0, &Geometry::DiskConstant, 400, DEFAULT_PENCIL_MARGIN)?;
    // a disk of radius 0.6 has eigenvalues n/0.6; keep both below 400
    let small: Vec<f64> = unit.values().iter().map(|v| v / 0.6).filter(|&v| v <= 400.0).collect();
    let small = SpectrumSequence::from_values(&small);
    let r = decouple(&merge(&[unit, small]), &DecoupleOptions::default())?;
    println!("perimeters: {:?}", r.perimeters());
    println!("nothing beyond perimeters: {}", r.has_flag(Flag::NothingBeyondPerimeters));
    println!("lambda reported: {:?}", r.lambda);
    Ok(())
}
