// Wigner rotation of a boosted momentum eigenstate: closed form, a direct
// 4x4 Lorentz-matrix computation and the small-momentum expansion.

use lorentz_twirl::wigner::{
    lorentz_oracle, wigner_exact, wigner_exact_components, wigner_second_order, BoostVector,
    MomentumVector,
};
use nalgebra::Vector3;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let v = BoostVector::new(Vector3::z(), 0.6)?;
    let p = MomentumVector::new(Vector3::x(), 0.2)?;
    let exact = wigner_exact(&v, &p);
    let oracle = lorentz_oracle(&v, &p)?.rotation;
    println!(
        "closed form: angle {:.12}, axis {:?}",
        exact.angle,
        exact.axis.as_slice()
    );
    println!(
        "4x4 oracle : angle {:.12}, axis {:?}",
        oracle.angle,
        oracle.axis.as_slice()
    );
    assert!((exact.angle - oracle.angle).abs() < 1e-10);

    println!("{:>8} {:>14} {:>8}", "p", "expansion err", "ratio");
    let mut last = None;
    for p in [0.08, 0.04, 0.02, 0.01] {
        let m = MomentumVector::new(Vector3::x(), p)?;
        let (c2, s2) = wigner_second_order(&v, &m);
        let (c, s) = wigner_exact_components(&v, &m);
        let err = ((c2 - c).powi(2) + (s2 - s).norm_squared()).sqrt();
        let ratio = last.map(|l: f64| l / err).unwrap_or(f64::NAN);
        println!("{p:>8} {err:>14.4e} {ratio:>8.3}");
        last = Some(err);
    }

    let collinear = wigner_exact(&v, &MomentumVector::new(Vector3::z(), 1.0)?);
    println!(
        "collinear boost: angle {}, degenerate {}",
        collinear.angle, collinear.degenerate
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
