// Encode a parameter as a spin rotation and read the state back on the Bloch sphere.

use std::f64::consts::FRAC_PI_2;

use lorentz_twirl::qubit::{encode_spin, su2_conjugate, trace_distance, EncodingSpec, QubitState};
use nalgebra::Vector3;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // equatorial axis, so λ moves the state around the sphere fastest
    let spec = EncodingSpec::new(FRAC_PI_2, 0.0, 0.4)?;
    let rho = encode_spin(&spec);
    let r = rho.bloch();
    println!("axis   = {:?}", spec.axis().as_slice());
    println!("bloch  = [{:.6}, {:.6}, {:.6}]", r.x, r.y, r.z);
    println!("purity = {:.12}", rho.purity());
    assert!((rho.purity() - 1.0).abs() < 1e-12);

    // half a turn about x sends |0> to |1>
    let flipped = su2_conjugate(&QubitState::zero(), &Vector3::x(), std::f64::consts::PI)?;
    let d = trace_distance(flipped.matrix(), QubitState::one().matrix());
    println!("|0> rotated by pi about x, distance to |1> = {d:.2e}");
    assert!(d < 1e-12);

    let mixed = QubitState::maximally_mixed();
    println!("maximally mixed eigenvalues = {:?}", mixed.eigenvalues());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
