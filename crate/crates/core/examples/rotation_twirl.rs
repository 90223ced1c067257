// Averaging over an uncertain reference-frame rotation: closed form against
// seeded sampling.

use std::f64::consts::FRAC_PI_2;

use lorentz_twirl::channels::{rotation_contraction, rotation_twirl_closed, rotation_twirl_mc};
use lorentz_twirl::qubit::{encode_spin, trace_distance, EncodingSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let rho = encode_spin(&EncodingSpec::new(FRAC_PI_2, 0.0, 0.3)?);
    println!(
        "{:>6} {:>12} {:>12} {:>10}",
        "kappa", "contraction", "MC distance", "3 sigma"
    );
    for kappa in [0.5, 2.0, 10.0, 50.0] {
        let closed = rotation_twirl_closed(&rho, kappa)?;
        let mc = rotation_twirl_mc(&rho, kappa, 200_000, 11)?;
        let d = trace_distance(closed.matrix(), mc.state.matrix());
        let bound = 3.0 * mc.trace_distance_error();
        println!(
            "{kappa:>6} {:>12.6} {d:>12.2e} {bound:>10.2e}",
            rotation_contraction(kappa)?
        );
        assert!(d <= bound);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
