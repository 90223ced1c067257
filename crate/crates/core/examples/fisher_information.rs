// Quantum Fisher information of the encoded parameter after noise, from
// fidelities and from closed forms.

use std::f64::consts::FRAC_PI_2;

use lorentz_twirl::channels::{full_pipeline, rotation_twirl_closed, ScenarioParams};
use lorentz_twirl::metrology::{
    qfi_boost_limits, qfi_finite_difference, qfi_rotation_closed, uhlmann_fidelity, DEFAULT_EPSILON,
};
use lorentz_twirl::qubit::{encode_spin, EncodingSpec};
use lorentz_twirl::scenarios::rho1_ambiguity;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = EncodingSpec::new(FRAC_PI_2, 0.0, 0.2)?;
    let a = encode_spin(&spec);
    let b = encode_spin(&spec.with_lambda(0.3));
    println!(
        "fidelity of lambda = 0.2 and 0.3: {:.10}",
        uhlmann_fidelity(&a, &b)
    );

    for kappa in [0.5, 2.0, 20.0] {
        let family = |l: f64| rotation_twirl_closed(&encode_spin(&spec.with_lambda(l)), kappa);
        let est = qfi_finite_difference(&family, 0.2, DEFAULT_EPSILON)?;
        println!(
            "kappa {kappa:>4}: numeric {:.8} (+/- {:.1e}), closed {:.8}",
            est.value,
            est.discretization_error,
            qfi_rotation_closed(kappa, FRAC_PI_2)?
        );
    }

    let params = ScenarioParams {
        kappa_rot: 20.0,
        kappa_v: 1.0,
        delta: 1.0,
        kappa_p: 2.0,
        p0_over_m: 0.05,
    };
    let family = |l: f64| full_pipeline(&encode_spin(&spec.with_lambda(l)), &params);
    let est = qfi_finite_difference(&family, 0.2, DEFAULT_EPSILON)?;
    println!("both twirls: QFI = {:.8}", est.value);

    let (t1, t2) = params.moments()?;
    let limits = qfi_boost_limits(t1, t2, params.kappa_v, params.kappa_p)?;
    println!("boost-limit QFIs: {limits:?}");

    let report = rho1_ambiguity(0.3, 5.0, 0.5, DEFAULT_EPSILON)?;
    println!(
        "unknown boost direction: numeric {:.8}, kappa_v reading {:.8}, kappa_p reading {:.8} -> {}",
        report.numeric,
        report.kappa_v_reading,
        report.kappa_p_reading,
        report.verdict.name()
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
