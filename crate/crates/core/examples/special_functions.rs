// Mean resultant lengths, the velocity bump and the moments built from them.

use lorentz_twirl::special::{
    bessel_i, mean_resultant_g, mean_resultant_h, t_momentum, t_velocity, BumpParams, MomentumSpec,
    VmfS2Params, VmfS3Params,
};
use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>8} {:>14} {:>14} {:>14}", "kappa", "I1(kappa)", "G", "H");
    for kappa in [0.01, 0.5, 2.0, 10.0, 200.0] {
        println!(
            "{kappa:>8} {:>14.6e} {:>14.8} {:>14.8}",
            bessel_i(1, kappa)?,
            mean_resultant_g(kappa)?,
            mean_resultant_h(kappa)?,
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s3 = VmfS3Params::new(5.0)?;
    let n = 20_000;
    let mean_cos = (0..n)
        .map(|_| s3.sample(&mut rng).map(|p| p.su2_angle().cos()))
        .sum::<Result<f64, _>>()?
        / n as f64;
    println!("S3 vMF kappa=5: mean cos(rotation angle) = {mean_cos:.4}");

    let s2 = VmfS2Params::new(Vector3::z(), 3.0)?;
    let mean_z = (0..n).map(|_| s2.sample(&mut rng).z).sum::<f64>() / n as f64;
    println!(
        "S2 vMF kappa=3: sampled <z> = {mean_z:.4}, exact = {:.4}",
        mean_resultant_h(3.0)?
    );

    for delta in [0.1, 1.0, 5.0] {
        let bump = BumpParams::new(delta)?;
        let spec = MomentumSpec::new(0.01, 2.0)?;
        let t2 = t_velocity(2, &bump)? * t_momentum(2, &spec)?;
        println!("delta = {delta:>4}: T2 = {t2:.6e}");
    }
    // the normalizer underflows for very narrow bumps
    assert!(BumpParams::new(0.02)
        .and_then(|b| t_velocity(2, &b))
        .is_err());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
