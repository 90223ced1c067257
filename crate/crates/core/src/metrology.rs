//! Fidelity and quantum Fisher information for qubit state families.

use nalgebra::Vector3;

use crate::error::{invalid, Error, Result};
use crate::qubit::{pauli_dot, QubitState, C64};
use crate::special::{g_over_kappa, h_over_kappa};

/// Default finite-difference step.
pub const DEFAULT_EPSILON: f64 = 1e-4;

const PURE_TOL: f64 = 1e-9;
const BOUNDARY_TOL: f64 = 1e-8;
const EIGEN_FLOOR: f64 = 1e-15;

/// Uhlmann fidelity `[Tr √(√ρ₁ ρ₂ √ρ₁)]²`.
///
/// For qubits the inner matrix has eigenvalues whose square roots sum to
/// `√(Tr ρ₁ρ₂ + 2√(det ρ₁ det ρ₂))`. Eigenvalues below `1e-15` are clamped to
/// zero, so states that are pure up to rounding are treated as pure.
pub fn uhlmann_fidelity(rho1: &QubitState, rho2: &QubitState) -> f64 {
    let overlap = (rho1.matrix() * rho2.matrix()).trace().re;
    let det = |r: &QubitState| {
        let [a, b] = r.eigenvalues();
        if a < EIGEN_FLOOR {
            0.0
        } else {
            a * b
        }
    };
    (overlap + 2.0 * (det(rho1) * det(rho2)).sqrt()).clamp(0.0, 1.0)
}

/// `1 - F` from Bloch vectors without cancellation:
/// `¼[|r - s|² + (√a - √b)²]`, `a = 1 - |r|²`, `b = 1 - |s|²`.
pub fn infidelity(rho1: &QubitState, rho2: &QubitState) -> f64 {
    let r = rho1.bloch();
    let s = rho2.bloch();
    // 1 - |r|² = 4 det ρ, floored like the eigenvalues in the fidelity
    let floor = |x: f64| if x < 4.0 * EIGEN_FLOOR { 0.0 } else { x };
    let a = floor(1.0 - r.norm_squared());
    let b = floor(1.0 - s.norm_squared());
    let root_sum = a.sqrt() + b.sqrt();
    let radial = if root_sum > 0.0 {
        let d = (s - r).dot(&(s + r));
        d * d / (root_sum * root_sum)
    } else {
        0.0
    };
    (0.25 * ((r - s).norm_squared() + radial)).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QfiMethod {
    FiniteDifference,
    BlochExact,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QfiEstimate {
    pub value: f64,
    pub epsilon_used: f64,
    pub method: QfiMethod,
    /// Estimated discretization error of `value`.
    pub discretization_error: f64,
    /// The family sits on the Bloch sphere at `λ` and the pure-state formula was used.
    pub pure_branch: bool,
}

/// Negative values within `1e-9` of zero are numerical noise.
fn clamp_noise(value: f64) -> f64 {
    if (-1e-9..0.0).contains(&value) {
        0.0
    } else {
        value
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(invalid("epsilon", "must be finite and positive"));
    }
    Ok(())
}

fn fidelity_difference(
    family: &dyn Fn(f64) -> Result<QubitState>,
    at: &QubitState,
    lambda: f64,
    epsilon: f64,
) -> Result<f64> {
    let next = family(lambda + epsilon)?;
    let one_minus_f = infidelity(at, &next);
    let f = 1.0 - one_minus_f;
    let one_minus_root = one_minus_f / (1.0 + f.max(0.0).sqrt());
    Ok(8.0 * one_minus_root / (epsilon * epsilon))
}

/// `8(1 - √F(ρ_λ, ρ_{λ+ε}))/ε²`, combined with the same quantity at `ε/2`.
///
/// The forward difference has an `O(ε)` error; the reported value is the
/// Richardson combination `2 F_{ε/2} - F_ε` and the attached error is
/// `|F_ε - F_{ε/2}|`.
pub fn qfi_finite_difference(
    family: &dyn Fn(f64) -> Result<QubitState>,
    lambda: f64,
    epsilon: f64,
) -> Result<QfiEstimate> {
    check_epsilon(epsilon)?;
    let at = family(lambda)?;
    let full = fidelity_difference(family, &at, lambda, epsilon)?;
    let half = fidelity_difference(family, &at, lambda, 0.5 * epsilon)?;
    Ok(QfiEstimate {
        value: clamp_noise(2.0 * half - full),
        epsilon_used: epsilon,
        method: QfiMethod::FiniteDifference,
        discretization_error: (full - half).abs(),
        pure_branch: false,
    })
}

/// `4(⟨K²⟩ - ⟨K⟩²)` with `K = n̂·σ/2`, for a pure state.
pub fn qfi_unitary_pure(generator_axis: &Vector3<f64>, psi: &QubitState) -> Result<f64> {
    let norm = generator_axis.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnitVector { norm });
    }
    let purity = psi.purity();
    if (purity - 1.0).abs() > PURE_TOL {
        return Err(Error::NotPure { purity });
    }
    let k = pauli_dot(generator_axis) * C64::new(0.5, 0.0);
    let rho = psi.matrix();
    let mean = (rho * k).trace().re;
    let mean_sq = (rho * k * k).trace().re;
    Ok(clamp_noise(4.0 * (mean_sq - mean * mean)))
}

/// `sin²θ_E (1 - 4G(κ)/κ)²`.
pub fn qfi_rotation_closed(kappa: f64, theta_e: f64) -> Result<f64> {
    if !(kappa >= 0.0) || kappa.is_infinite() {
        return Err(invalid("kappa", "must be finite and non-negative"));
    }
    if !theta_e.is_finite() {
        return Err(invalid("theta_E", "must be finite"));
    }
    let contraction = 1.0 - 4.0 * g_over_kappa(kappa)?;
    Ok(theta_e.sin().powi(2) * contraction * contraction)
}

/// Closed-form QFIs of the three boost-twirl limit states for an encoding
/// along `x̂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoostLimitQfi {
    pub rho0: f64,
    /// `(1 - (T₂/6)(1 + H(κ_v)/κ_v))²`.
    pub rho1_kappa_v: f64,
    /// `(1 - (T₂/6)(1 + H(κ_p)/κ_p))²`.
    pub rho1_kappa_p: f64,
    /// `(1 - 2T₂/9)²`.
    pub rho2: f64,
}

pub fn qfi_boost_limits(t1: f64, t2: f64, kappa_v: f64, kappa_p: f64) -> Result<BoostLimitQfi> {
    if !t1.is_finite() || !t2.is_finite() {
        return Err(invalid("T_n", "must be finite"));
    }
    let rho1 =
        |kappa: f64| -> Result<f64> { Ok((1.0 - t2 / 6.0 * (1.0 + h_over_kappa(kappa)?)).powi(2)) };
    Ok(BoostLimitQfi {
        rho0: 1.0,
        rho1_kappa_v: rho1(kappa_v)
            .map_err(|_| invalid("kappa_v", "must be finite and non-negative"))?,
        rho1_kappa_p: rho1(kappa_p)
            .map_err(|_| invalid("kappa_p", "must be finite and non-negative"))?,
        rho2: (1.0 - 2.0 * t2 / 9.0).powi(2),
    })
}

fn central_derivative(
    family: &dyn Fn(f64) -> Result<QubitState>,
    lambda: f64,
    h: f64,
) -> Result<Vector3<f64>> {
    Ok((family(lambda + h)?.bloch() - family(lambda - h)?.bloch()) / (2.0 * h))
}

fn bloch_qfi(r: &Vector3<f64>, dr: &Vector3<f64>, pure: bool) -> f64 {
    if pure {
        dr.norm_squared()
    } else {
        dr.norm_squared() + r.dot(dr).powi(2) / (1.0 - r.norm_squared())
    }
}

/// `|ṙ|² + (r·ṙ)²/(1 - |r|²)`, with `ṙ` from central differences at steps `h`
/// and `h/2` combined by Richardson extrapolation (`h = 1e-3`).
///
/// When `|r|` is within `1e-8` of one the pure-state value `|ṙ|²` is used and
/// `pure_branch` is set.
pub fn qfi_bloch_exact(
    family: &dyn Fn(f64) -> Result<QubitState>,
    lambda: f64,
) -> Result<QfiEstimate> {
    const H: f64 = 1e-3;
    let r = family(lambda)?.bloch();
    let d_full = central_derivative(family, lambda, H)?;
    let d_half = central_derivative(family, lambda, 0.5 * H)?;
    let dr = (d_half * 4.0 - d_full) / 3.0;
    let pure = 1.0 - r.norm() < BOUNDARY_TOL;
    let value = bloch_qfi(&r, &dr, pure);
    Ok(QfiEstimate {
        value: clamp_noise(value),
        epsilon_used: H,
        method: QfiMethod::BlochExact,
        discretization_error: (value - bloch_qfi(&r, &d_half, pure)).abs(),
        pure_branch: pure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{
        boost_coefficients, boost_twirl_apply, rotation_twirl_closed, ScenarioParams,
    };
    use crate::qubit::{encode_spin, from_bloch, su2_conjugate, EncodingSpec};
    use crate::special::mean_resultant_g;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

    fn random_bloch(rng: &mut ChaCha8Rng, pure: bool) -> Vector3<f64> {
        let r = Vector3::new(
            rng.random_range(-1.0..1.0f64),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
        .normalize();
        if pure {
            r
        } else {
            r * rng.random::<f64>()
        }
    }

    fn x_family(lambda: f64) -> Result<QubitState> {
        Ok(encode_spin(&EncodingSpec::new(FRAC_PI_2, 0.0, lambda)?))
    }

    fn rotation_family(kappa: f64, theta_e: f64) -> impl Fn(f64) -> Result<QubitState> {
        move |lambda| {
            rotation_twirl_closed(
                &encode_spin(&EncodingSpec::new(theta_e, 0.0, lambda)?),
                kappa,
            )
        }
    }

    #[test]
    fn fidelity_basic_values() {
        let z = QubitState::zero();
        assert!((uhlmann_fidelity(&z, &z) - 1.0).abs() < 1e-15);
        assert_eq!(uhlmann_fidelity(&z, &QubitState::one()), 0.0);
        let mixed = QubitState::maximally_mixed();
        assert!((uhlmann_fidelity(&mixed, &mixed) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fidelity_with_pure_state_is_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let psi = from_bloch(&random_bloch(&mut rng, true)).unwrap();
            let rho = from_bloch(&random_bloch(&mut rng, false)).unwrap();
            let expectation = (psi.matrix() * rho.matrix()).trace().re;
            assert!((uhlmann_fidelity(&psi, &rho) - expectation).abs() < 1e-12);
            assert!((uhlmann_fidelity(&rho, &psi) - expectation).abs() < 1e-12);
            assert!((1.0 - infidelity(&psi, &rho) - expectation).abs() < 1e-12);
        }
    }

    #[test]
    fn infidelity_matches_fidelity_for_mixed_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..200 {
            let a = from_bloch(&random_bloch(&mut rng, false)).unwrap();
            let b = from_bloch(&random_bloch(&mut rng, false)).unwrap();
            assert!((1.0 - infidelity(&a, &b) - uhlmann_fidelity(&a, &b)).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_difference_trivial_families() {
        let constant = |_: f64| Ok(QubitState::maximally_mixed());
        let q = qfi_finite_difference(&constant, 0.3, DEFAULT_EPSILON).unwrap();
        assert_eq!(q.value, 0.0);
        let q = qfi_finite_difference(&x_family, 0.3, DEFAULT_EPSILON).unwrap();
        assert!((q.value - 1.0).abs() < 1e-6, "{q:?}");
        assert!(qfi_finite_difference(&x_family, 0.3, 0.0).is_err());
    }

    #[test]
    fn unitary_pure_values() {
        let z = QubitState::zero();
        assert!(qfi_unitary_pure(&Vector3::z(), &z).unwrap().abs() < 1e-15);
        assert!((qfi_unitary_pure(&Vector3::x(), &z).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            qfi_unitary_pure(&Vector3::x(), &QubitState::maximally_mixed()),
            Err(Error::NotPure { .. })
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let psi = from_bloch(&random_bloch(&mut rng, true)).unwrap();
            let n = random_bloch(&mut rng, true);
            // exp(-iλ n·J) is su2_conjugate with angle -λ
            let family = |l: f64| su2_conjugate(&psi, &n, -l);
            let fd = qfi_finite_difference(&family, 0.0, DEFAULT_EPSILON).unwrap();
            assert!((fd.value - qfi_unitary_pure(&n, &psi).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn rotation_closed_limits() {
        assert!((qfi_rotation_closed(1e12, FRAC_PI_2).unwrap() - 1.0).abs() < 1e-10);
        for theta in [0.1, 1.0, FRAC_PI_2, 2.5] {
            assert!(qfi_rotation_closed(1e-9, theta).unwrap() < 1e-12);
        }
        let expected = (1.0 - 2.0 * mean_resultant_g(2.0).unwrap()).powi(2);
        assert!((qfi_rotation_closed(2.0, FRAC_PI_2).unwrap() - expected).abs() < 1e-15);
        let family = rotation_family(2.0, FRAC_PI_2);
        let fd = qfi_finite_difference(&family, 0.4, DEFAULT_EPSILON).unwrap();
        assert!((fd.value - expected).abs() < 1e-6);
    }

    #[test]
    fn estimators_agree_on_rotation_family() {
        for kappa in [0.5, 1.0, 2.0, 5.0, 20.0] {
            for theta in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2] {
                let family = rotation_family(kappa, theta);
                let closed = qfi_rotation_closed(kappa, theta).unwrap();
                let fd = qfi_finite_difference(&family, 0.7, DEFAULT_EPSILON)
                    .unwrap()
                    .value;
                let bloch = qfi_bloch_exact(&family, 0.7).unwrap().value;
                assert!(
                    (fd - closed).abs() < 1e-5,
                    "κ={kappa} θ={theta}: {fd} vs {closed}"
                );
                assert!((bloch - closed).abs() < 1e-5);
                assert!((bloch - fd).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn bloch_exact_values() {
        let q = qfi_bloch_exact(&x_family, 0.2).unwrap();
        assert!((q.value - 1.0).abs() < 1e-9 && q.pure_branch);
        let s = 0.6;
        let shrunk = |l: f64| from_bloch(&(x_family(l)?.bloch() * s));
        let q = qfi_bloch_exact(&shrunk, 0.2).unwrap();
        assert!((q.value - s * s).abs() < 1e-9 && !q.pure_branch);
        let fd = qfi_finite_difference(&shrunk, 0.2, DEFAULT_EPSILON).unwrap();
        assert!((q.value - fd.value).abs() < 1e-6);
        let constant = |_: f64| Ok(QubitState::maximally_mixed());
        assert_eq!(qfi_bloch_exact(&constant, 0.0).unwrap().value, 0.0);
    }

    #[test]
    fn boost_limit_values() {
        let q = qfi_boost_limits(0.0, 0.0, 1.0, 2.0).unwrap();
        assert_eq!(
            (q.rho0, q.rho1_kappa_v, q.rho1_kappa_p, q.rho2),
            (1.0, 1.0, 1.0, 1.0)
        );
        let t2 = 0.09;
        let q = qfi_boost_limits(0.01, t2, 1e-8, 3.0).unwrap();
        assert!((q.rho2 - (1.0f64 - 0.02).powi(2)).abs() < 1e-15);
        assert!((q.rho1_kappa_v - (1.0 - t2 / 6.0 * (4.0 / 3.0)).powi(2)).abs() < 1e-12);
        assert!(q.rho1_kappa_v != q.rho1_kappa_p);
    }

    #[test]
    fn channel_families_do_not_exceed_noiseless_qfi() {
        let params = ScenarioParams {
            kappa_rot: 3.0,
            kappa_v: 1.0,
            delta: 1.0,
            kappa_p: 2.0,
            p0_over_m: 0.1,
        };
        let coeffs = boost_coefficients(&params).unwrap();
        let family = |l: f64| boost_twirl_apply(&x_family(l)?, &coeffs);
        for lambda in [0.0, 0.5, 1.3, 2.9] {
            let q = qfi_finite_difference(&family, lambda, DEFAULT_EPSILON).unwrap();
            assert!(q.value <= 1.0 + 1e-6);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn ball() -> impl Strategy<Value = Vector3<f64>> {
            (-1.0..=1.0f64, 0.0..std::f64::consts::TAU, 0.0..=1.0f64).prop_map(|(z, phi, r)| {
                let s = (1.0 - z * z).sqrt();
                Vector3::new(s * phi.cos(), s * phi.sin(), z) * r
            })
        }

        proptest! {
            #[test]
            fn fidelity_is_symmetric_and_bounded(a in ball(), b in ball()) {
                let (x, y) = (from_bloch(&a).unwrap(), from_bloch(&b).unwrap());
                let f = uhlmann_fidelity(&x, &y);
                prop_assert!((0.0..=1.0).contains(&f));
                prop_assert!((f - uhlmann_fidelity(&y, &x)).abs() < 1e-12);
            }

            #[test]
            fn rotation_family_qfi_bounded(kappa in 0.01..100.0f64, theta in 0.0..std::f64::consts::PI, l in -3.0..3.0f64) {
                let family = rotation_family(kappa, theta);
                let q = qfi_finite_difference(&family, l, DEFAULT_EPSILON).unwrap();
                prop_assert!(q.value <= 1.0 + 1e-6);
                prop_assert!(q.value >= 0.0);
            }
        }
    }
}
