//! Model sequences for two boundary circles, merged as one spectrum.

use dtn_spectra::{build_model_sequence, merge, ComponentModel};

fn main() {
    let outer = ComponentModel::new(1.0, vec![-0.5, 0.5]);
    let inner = ComponentModel::new(std::f64::consts::SQRT_2, vec![-0.3536, -0.3536]);
    let merged = merge(&[build_model_sequence(&outer, 2, 6), build_model_sequence(&inner, 2, 6)]);
    for v in merged.values() {
        print!("{v:.4} ");
    }
    println!();
}
