//! Spherical caps: recovering the area from one boundary circle.
//! L = sin θ and ∫k_g = 2π cos θ, so s_2 = λ sin θ cos θ / 2.

use std::f64::consts::PI;

use dtn_spectra::decoupler::Assumption;
use dtn_spectra::{build_model_sequence, decouple, ComponentModel, DecoupleOptions};

fn main() -> dtn_spectra::Result<()> {
    let lambda = 1.5;
    for theta in [0.4f64, 0.8, 1.2, 1.5] {
        let l = theta.sin();
        let model = ComponentModel::new(1.0 / l, vec![-lambda * l / 2.0, lambda * l * theta.cos() / 2.0]);
        let s = build_model_sequence(&model, 2, 400);
        let opts = DecoupleOptions {
            assumption: Assumption::Sphere,
            ..Default::default()
        };
        let r = decouple(&s, &opts)?;
        println!(
            "theta = {theta}: area {:.6} (exact {:.6}), lambda {:.6}",
            r.area.unwrap(),
            2.0 * PI * (1.0 - theta.cos()),
            r.lambda.as_ref().unwrap().estimate
        );
    }
    Ok(())
}
