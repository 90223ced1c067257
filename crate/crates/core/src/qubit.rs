//! Spin-1/2 linear algebra: density matrices, Bloch vectors, Pauli algebra and
//! SU(2) conjugation.
//!
//! Conventions: `J = σ/2`, `J_z|0⟩ = +½|0⟩`, so `|0⟩` has Bloch vector `+ẑ`.
//! [`su2_unitary`] builds `cos(α/2) I + i sin(α/2) n̂·σ = exp(+iα n̂·J)`, which
//! acts on Bloch vectors as an active rotation by `-α` about `n̂`. The encoding
//! unitary `exp(-iλ Ê·J)` is therefore `su2_unitary(Ê, -λ)`.

use nalgebra::{Matrix2, Vector2, Vector3};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;
pub type Matrix2c = Matrix2<C64>;

const HERMITIAN_TOL: f64 = 1e-9;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-12;
const UNIT_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// The Pauli matrices `(σ_x, σ_y, σ_z)`.
pub fn pauli() -> [Matrix2c; 3] {
    [
        Matrix2c::new(ZERO, ONE, ONE, ZERO),
        Matrix2c::new(ZERO, -I, I, ZERO),
        Matrix2c::new(ONE, ZERO, ZERO, -ONE),
    ]
}

/// `n · σ` for a real 3-vector.
pub fn pauli_dot(n: &Vector3<f64>) -> Matrix2c {
    Matrix2c::new(
        C64::new(n.z, 0.0),
        C64::new(n.x, -n.y),
        C64::new(n.x, n.y),
        C64::new(-n.z, 0.0),
    )
}

/// Largest entry of the anti-Hermitian part `(m - m†)/2`.
pub fn anti_hermitian_residue(m: &Matrix2c) -> f64 {
    let d = (m - m.adjoint()) * C64::new(0.5, 0.0);
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues (ascending) of the Hermitian part of a 2×2 matrix.
pub fn hermitian_eigenvalues(m: &Matrix2c) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - radius, mean + radius]
}

fn symmetrize(m: &Matrix2c) -> Result<Matrix2c> {
    let residue = anti_hermitian_residue(m);
    if !residue.is_finite() || residue > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residue });
    }
    Ok((m + m.adjoint()) * C64::new(0.5, 0.0))
}

fn bloch_of(m: &Matrix2c) -> Vector3<f64> {
    // r_j = Tr(ρ σ_j)
    Vector3::new(
        2.0 * m[(1, 0)].re,
        2.0 * m[(1, 0)].im,
        (m[(0, 0)] - m[(1, 1)]).re,
    )
}

/// A Hermitian, unit-trace 2×2 operator that need not be positive.
///
/// First-order truncated maps (such as the small-rotation limit of the boost
/// twirl) leave the state space slightly; their outputs live here.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitOperator {
    matrix: Matrix2c,
}

impl QubitOperator {
    pub fn new(matrix: Matrix2c) -> Result<Self> {
        let matrix = symmetrize(&matrix)?;
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceNotUnit { trace });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix2c {
        &self.matrix
    }

    pub fn bloch(&self) -> Vector3<f64> {
        bloch_of(&self.matrix)
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Promote to a state if positive within tolerance.
    pub fn into_state(self) -> Result<QubitState> {
        QubitState::new(self.matrix)
    }
}

/// A qubit density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    matrix: Matrix2c,
}

impl QubitState {
    /// Validates and symmetrizes `matrix`.
    pub fn new(matrix: Matrix2c) -> Result<Self> {
        let op = QubitOperator::new(matrix)?;
        let [min, _] = op.eigenvalues();
        if min < -PSD_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(Self { matrix: op.matrix })
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) nonzero ket.
    pub fn from_ket(ket: &Vector2<C64>) -> Result<Self> {
        let norm = ket.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(invalid("ket", "must be a finite nonzero vector"));
        }
        let k = ket / C64::new(norm, 0.0);
        Self::new(k * k.adjoint())
    }

    /// `|0⟩⟨0|`, Bloch vector `+ẑ`.
    pub fn zero() -> Self {
        Self {
            matrix: Matrix2c::new(ONE, ZERO, ZERO, ZERO),
        }
    }

    /// `|1⟩⟨1|`, Bloch vector `-ẑ`.
    pub fn one() -> Self {
        Self {
            matrix: Matrix2c::new(ZERO, ZERO, ZERO, ONE),
        }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: Matrix2c::identity() * C64::new(0.5, 0.0),
        }
    }

    pub fn matrix(&self) -> &Matrix2c {
        &self.matrix
    }

    pub fn bloch(&self) -> Vector3<f64> {
        bloch_of(&self.matrix)
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigenvalues(&self.matrix)
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (self.matrix * self.matrix).trace().re
    }

    pub fn as_operator(&self) -> QubitOperator {
        QubitOperator {
            matrix: self.matrix,
        }
    }
}

impl From<QubitState> for QubitOperator {
    fn from(s: QubitState) -> Self {
        s.as_operator()
    }
}

/// A Bloch vector `r` with `ρ = (I + r·σ)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector(Vector3<f64>);

impl BlochVector {
    pub fn new(r: Vector3<f64>) -> Result<Self> {
        let norm = r.norm();
        if !norm.is_finite() || norm > 1.0 + UNIT_TOL {
            return Err(Error::BlochOutOfBall { norm });
        }
        Ok(Self(r))
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

pub fn to_bloch(rho: &QubitState) -> BlochVector {
    BlochVector(rho.bloch())
}

pub fn from_bloch(r: &Vector3<f64>) -> Result<QubitState> {
    let r = BlochVector::new(*r)?;
    Ok(QubitState {
        matrix: bloch_matrix(r.vector()),
    })
}

/// `(I + r·σ)/2` without any range check.
pub(crate) fn bloch_matrix(r: &Vector3<f64>) -> Matrix2c {
    (Matrix2c::identity() + pauli_dot(r)) * C64::new(0.5, 0.0)
}

/// Alice's encoding: axis `Ê(θ_E, φ_E)` and message `λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncodingSpec {
    pub theta_e: f64,
    pub phi_e: f64,
    pub lambda: f64,
}

impl EncodingSpec {
    pub fn new(theta_e: f64, phi_e: f64, lambda: f64) -> Result<Self> {
        use std::f64::consts::PI;
        if !(0.0..=PI).contains(&theta_e) {
            return Err(invalid("theta_E", "must lie in [0, π]"));
        }
        if !(0.0..2.0 * PI).contains(&phi_e) {
            return Err(invalid("phi_E", "must lie in [0, 2π)"));
        }
        if !lambda.is_finite() {
            return Err(invalid("lambda", "must be finite"));
        }
        Ok(Self {
            theta_e,
            phi_e,
            lambda,
        })
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    /// `Ê = (sin θ_E cos φ_E, sin θ_E sin φ_E, cos θ_E)`.
    pub fn axis(&self) -> Vector3<f64> {
        let (st, ct) = self.theta_e.sin_cos();
        let (sp, cp) = self.phi_e.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }
}

/// `|ψ_λ⟩⟨ψ_λ|` with `|ψ_λ⟩ = exp(-iλ Ê·J)|0⟩`.
pub fn encode_spin(spec: &EncodingSpec) -> QubitState {
    let u = su2_unitary_unchecked(&spec.axis(), -spec.lambda);
    let ket = u.column(0).into_owned();
    QubitState {
        matrix: ket * ket.adjoint(),
    }
}

fn check_unit(axis: &Vector3<f64>) -> Result<()> {
    let norm = axis.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnitVector { norm });
    }
    Ok(())
}

fn su2_unitary_unchecked(axis: &Vector3<f64>, angle: f64) -> Matrix2c {
    let (s, c) = (0.5 * angle).sin_cos();
    Matrix2c::identity() * C64::new(c, 0.0) + pauli_dot(axis) * C64::new(0.0, s)
}

/// `U = cos(α/2) I + i sin(α/2) n̂·σ`.
pub fn su2_unitary(axis: &Vector3<f64>, angle: f64) -> Result<Matrix2c> {
    check_unit(axis)?;
    Ok(su2_unitary_unchecked(axis, angle))
}

/// `U m U†` for an arbitrary 2×2 matrix.
pub fn su2_conjugate_matrix(m: &Matrix2c, axis: &Vector3<f64>, angle: f64) -> Result<Matrix2c> {
    let u = su2_unitary(axis, angle)?;
    Ok(u * m * u.adjoint())
}

/// `U ρ U†` with `U = cos(α/2) I + i sin(α/2) n̂·σ`.
pub fn su2_conjugate(rho: &QubitState, axis: &Vector3<f64>, angle: f64) -> Result<QubitState> {
    let m = su2_conjugate_matrix(&rho.matrix, axis, angle)?;
    Ok(QubitState {
        matrix: (m + m.adjoint()) * C64::new(0.5, 0.0),
    })
}

/// `Σ_j w_j σ_j m σ_j`.
pub fn pauli_conjugate_sum(m: &Matrix2c, weights: [f64; 3]) -> Matrix2c {
    pauli()
        .iter()
        .zip(weights)
        .fold(Matrix2c::zeros(), |acc, (s, w)| {
            acc + s * m * s * C64::new(w, 0.0)
        })
}

/// `A B - B A`.
pub fn commutator(a: &Matrix2c, b: &Matrix2c) -> Matrix2c {
    a * b - b * a
}

/// `½ ‖a - b‖₁` for Hermitian operators.
pub fn trace_distance(a: &Matrix2c, b: &Matrix2c) -> f64 {
    let [l0, l1] = hermitian_eigenvalues(&(a - b));
    0.5 * (l0.abs() + l1.abs())
}
