//! Wigner rotations of a spin-1/2 particle under a pure boost.
//!
//! Velocities are proper velocities (celerities): a boost of "speed" `v` has
//! Lorentz factor `√(1 + v²)` and `βγ = v`. Momenta are measured in units of
//! the mass, `p̃ = |p|/m`.
//!
//! A [`WignerRotation`] with angle `φ` and axis `φ̂` stands for the spin
//! unitary `exp(+iφ φ̂·J)`; as an active SO(3) rotation this is a turn by `φ`
//! about `-φ̂`. For a boost `v̂` acting on momentum `p̂` the axis is along
//! `v̂ × p̂`.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use crate::error::{invalid, Error, Result};
pub use crate::special::rapidity_factor;

const DEGENERATE_ANGLE: f64 = 1e-12;
const ROTATION_RESIDUE: f64 = 1e-9;

fn check_direction(d: &Vector3<f64>) -> Result<()> {
    let norm = d.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnitVector { norm });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoostVector {
    direction: Vector3<f64>,
    magnitude: f64,
}

impl BoostVector {
    pub fn new(direction: Vector3<f64>, magnitude: f64) -> Result<Self> {
        check_direction(&direction)?;
        if !(0.0..1.0).contains(&magnitude) {
            return Err(invalid("v", "boost magnitude must lie in [0, 1)"));
        }
        Ok(Self {
            direction,
            magnitude,
        })
    }

    pub fn direction(&self) -> &Vector3<f64> {
        &self.direction
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn celerity(&self) -> Vector3<f64> {
        self.direction * self.magnitude
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentumVector {
    direction: Vector3<f64>,
    magnitude_over_mass: f64,
}

impl MomentumVector {
    pub fn new(direction: Vector3<f64>, magnitude_over_mass: f64) -> Result<Self> {
        check_direction(&direction)?;
        if !(magnitude_over_mass >= 0.0) || magnitude_over_mass.is_infinite() {
            return Err(invalid("p_over_m", "must be finite and non-negative"));
        }
        Ok(Self {
            direction,
            magnitude_over_mass,
        })
    }

    pub fn direction(&self) -> &Vector3<f64> {
        &self.direction
    }

    pub fn magnitude_over_mass(&self) -> f64 {
        self.magnitude_over_mass
    }

    pub fn spatial(&self) -> Vector3<f64> {
        self.direction * self.magnitude_over_mass
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WignerRotation {
    pub angle: f64,
    pub axis: Vector3<f64>,
    /// Set when the angle is below `1e-12`; the axis is then `ẑ` by convention.
    pub degenerate: bool,
}

impl WignerRotation {
    fn from_components(cos_phi: f64, sin_phi_axis: Vector3<f64>) -> Self {
        let s = sin_phi_axis.norm();
        let angle = s.atan2(cos_phi);
        if angle < DEGENERATE_ANGLE || s == 0.0 {
            Self {
                angle: angle.max(0.0),
                axis: Vector3::z(),
                degenerate: true,
            }
        } else {
            Self {
                angle,
                axis: sin_phi_axis / s,
                degenerate: false,
            }
        }
    }

    /// `sin φ φ̂`.
    pub fn sin_axis(&self) -> Vector3<f64> {
        self.axis * self.angle.sin()
    }
}

/// `γ - 1` for celerity `u`, without cancellation.
fn gamma_minus_one(u: f64) -> f64 {
    u * u / (1.0 + (1.0 + u * u).sqrt())
}

/// Closed-form `(cos φ, sin φ φ̂)` for a boost acting on a momentum eigenstate.
pub fn wigner_exact_components(v: &BoostVector, p: &MomentumVector) -> (f64, Vector3<f64>) {
    let (vm, pm) = (v.magnitude, p.magnitude_over_mass);
    let c = v.direction.dot(&p.direction);
    let (gv1, gp1) = (gamma_minus_one(vm), gamma_minus_one(pm));
    let (gv, gp) = (1.0 + gv1, 1.0 + gp1);
    let den = 1.0 + gv * gp + vm * pm * c;
    let cos_phi = (gv + gp + vm * pm * c + gv1 * gp1 * c * c) / den;
    let sin_scale = (vm * pm + gv1 * gp1 * c) / den;
    (cos_phi, v.direction.cross(&p.direction) * sin_scale)
}

pub fn wigner_exact(v: &BoostVector, p: &MomentumVector) -> WignerRotation {
    let (c, s) = wigner_exact_components(v, p);
    WignerRotation::from_components(c, s)
}

/// Expansion of the Wigner rotation to second order in `p̃`.
pub fn wigner_second_order(v: &BoostVector, p: &MomentumVector) -> (f64, Vector3<f64>) {
    let x = rapidity_factor(v.magnitude) * p.magnitude_over_mass;
    second_order_in_x(x, &v.direction, &p.direction)
}

/// The second-order form as a polynomial in `x = F(v) p̃`.
pub(crate) fn second_order_in_x(
    x: f64,
    v_dir: &Vector3<f64>,
    p_dir: &Vector3<f64>,
) -> (f64, Vector3<f64>) {
    let c = v_dir.dot(p_dir);
    let cos_phi = 1.0 - 0.5 * x * x * (1.0 - c * c);
    let sin_axis = v_dir.cross(p_dir) * (x - 0.5 * x * x * c);
    (cos_phi, sin_axis)
}

/// Pure boost with celerity `u` as a 4×4 matrix acting on `(t, x, y, z)`.
pub fn boost_matrix(u: &Vector3<f64>) -> Matrix4<f64> {
    let norm = u.norm();
    let gamma = (1.0 + norm * norm).sqrt();
    let mut m = Matrix4::identity();
    m[(0, 0)] = gamma;
    for i in 0..3 {
        m[(0, i + 1)] = u[i];
        m[(i + 1, 0)] = u[i];
    }
    if norm > 0.0 {
        let outer = u * u.transpose() * (gamma_minus_one(norm) / (norm * norm));
        for i in 0..3 {
            for j in 0..3 {
                m[(i + 1, j + 1)] += outer[(i, j)];
            }
        }
    }
    m
}

/// The composed Lorentz matrix `L⁻¹(Λp) Λ L(p)` together with the rotation
/// read off from it.
#[derive(Clone, Debug)]
pub struct OracleRotation {
    pub rotation: WignerRotation,
    pub spatial: Matrix3<f64>,
}

/// Builds the three boosts explicitly and extracts the Wigner rotation.
pub fn lorentz_oracle(v: &BoostVector, p: &MomentumVector) -> Result<OracleRotation> {
    let boost = boost_matrix(&v.celerity());
    let to_p = boost_matrix(&p.spatial());
    let rest = Vector4::new(1.0, 0.0, 0.0, 0.0);
    let k = boost * to_p * rest;
    let back = boost_matrix(&-Vector3::new(k[1], k[2], k[3]));
    let composed = back * boost * to_p;

    let mut residue: f64 = (composed[(0, 0)] - 1.0).abs();
    for i in 1..4 {
        residue = residue
            .max(composed[(0, i)].abs())
            .max(composed[(i, 0)].abs());
    }
    if residue > ROTATION_RESIDUE {
        return Err(Error::NotARotation { residue });
    }
    let spatial: Matrix3<f64> = composed.fixed_view::<3, 3>(1, 1).into_owned();
    let cos_phi = 0.5 * (spatial.trace() - 1.0);
    // sin θ n̂ of the active rotation; the spin convention uses the opposite axis
    let active = 0.5
        * Vector3::new(
            spatial[(2, 1)] - spatial[(1, 2)],
            spatial[(0, 2)] - spatial[(2, 0)],
            spatial[(1, 0)] - spatial[(0, 1)],
        );
    Ok(OracleRotation {
        rotation: WignerRotation::from_components(cos_phi, -active),
        spatial,
    })
}
