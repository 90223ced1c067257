// Averaging over an uncertain boost acting on a spin with uncertain momentum:
// the closed coefficient channel, direct quadrature, and limiting channels.

use std::f64::consts::FRAC_PI_2;

use lorentz_twirl::channels::{
    boost_coefficients, boost_twirl_apply, boost_twirl_numeric, limit_state_rho1, limit_state_rho2,
    QuadratureGrid, ScenarioParams,
};
use lorentz_twirl::qubit::{encode_spin, trace_distance, EncodingSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let rho = encode_spin(&EncodingSpec::new(FRAC_PI_2, 0.0, 0.0)?);
    let params = ScenarioParams {
        kappa_rot: 2.0,
        kappa_v: 1.0,
        delta: 1.0,
        kappa_p: 2.0,
        p0_over_m: 0.05,
    };
    let coeffs = boost_coefficients(&params)?;
    println!(
        "c1 = {:.10}, c2 = {:.3e}, C = {:?}",
        coeffs.c1, coeffs.c2, coeffs.big_c
    );

    let closed = boost_twirl_apply(&rho, &coeffs)?;
    let numeric = boost_twirl_numeric(&rho, &params, &QuadratureGrid::default())?;
    let d = trace_distance(closed.matrix(), numeric.matrix());
    println!("coefficients vs quadrature: {d:.2e}");
    assert!(d < 1e-6);
    println!(
        "moved by {:.3e}",
        trace_distance(closed.matrix(), rho.matrix())
    );

    let (_, t2) = params.moments()?;
    let iso = ScenarioParams {
        kappa_v: 1e-8,
        kappa_p: 1e-8,
        ..params
    };
    let a = boost_twirl_apply(&rho, &boost_coefficients(&iso)?)?;
    let b = limit_state_rho2(&rho, t2)?;
    println!(
        "isotropic limit vs depolarizing form: {:.2e}",
        trace_distance(a.matrix(), b.matrix())
    );

    let unknown_v = ScenarioParams {
        kappa_v: 1e-8,
        ..params
    };
    let a = boost_twirl_apply(&rho, &boost_coefficients(&unknown_v)?)?;
    let b = limit_state_rho1(&rho, t2, params.kappa_p)?;
    println!(
        "unknown boost direction vs limit form: {:.2e}",
        trace_distance(a.matrix(), b.matrix())
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
