//! Twirl channels: averaging a qubit over uncertain rotations and boosts.
//!
//! The rotation twirl averages over an S³ von Mises–Fisher law with
//! concentration `κ`. The boost twirl averages the Wigner rotation over a boost
//! direction (S² vMF around `ẑ`, concentration `κ_v`), a boost speed (bump of
//! width `Δ`) and a momentum direction (S² vMF around `x̂`, concentration
//! `κ_p`) at fixed `p₀/m`. To second order in `p₀/m` the boost twirl is
//!
//! ```text
//! ρ ↦ c₁ ρ + i c₂ [σ_y, ρ] + Σ_j C_j σ_j ρ σ_j
//! ```
//!
//! with coefficients from [`boost_coefficients`]. A brute-force quadrature of
//! the same average is [`boost_twirl_numeric`].

use nalgebra::{Matrix3, Matrix4, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussLegendre;
use crate::qubit::{
    commutator, pauli, pauli_conjugate_sum, pauli_dot, su2_conjugate_matrix, Matrix2c,
    QubitOperator, QubitState, C64,
};
use crate::special::{
    bump_norm, g_over_kappa, h_over_kappa, mean_resultant_h, orthonormal_frame, rapidity_factor,
    t_momentum, t_velocity, BumpParams, MomentumSpec, VmfS2Params, VmfS3Params,
    NONRELATIVISTIC_WARNING,
};
use crate::wigner::{second_order_in_x, wigner_exact_components, BoostVector, MomentumVector};

/// Samples per Monte Carlo chunk. Each chunk has its own RNG stream, so
/// results do not depend on how chunks are scheduled.
pub const MC_CHUNK: u64 = 1 << 16;

/// Refinement disagreement above which [`boost_twirl_numeric`] gives up.
pub const REFINEMENT_TOLERANCE: f64 = 1e-6;

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check_kappa(name: &'static str, kappa: f64) -> Result<()> {
    if !(kappa >= 0.0) || kappa.is_infinite() {
        return Err(invalid(name, "must be finite and non-negative"));
    }
    Ok(())
}

fn check_t(name: &'static str, t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(invalid(name, "must be finite and non-negative"));
    }
    Ok(())
}

/// Coefficients of the second-order boost-twirl channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelCoefficients {
    pub c1: f64,
    pub c2: f64,
    /// `(C₁, C₂, C₃)`.
    pub big_c: [f64; 3],
}

impl ChannelCoefficients {
    pub const IDENTITY: Self = Self {
        c1: 1.0,
        c2: 0.0,
        big_c: [0.0; 3],
    };

    /// Coefficients from the combined moments `T₁`, `T₂` and the two
    /// concentrations. `κ = 0` is the uniform limit.
    pub fn from_moments(t1: f64, t2: f64, kappa_v: f64, kappa_p: f64) -> Result<Self> {
        if !t1.is_finite() || !t2.is_finite() {
            return Err(invalid("T_n", "must be finite"));
        }
        check_kappa("kappa_v", kappa_v)?;
        check_kappa("kappa_p", kappa_p)?;
        let a = h_over_kappa(kappa_v)?;
        let b = h_over_kappa(kappa_p)?;
        let q = 0.25 * t2;
        Ok(Self {
            c1: 1.0 + q * (a + b - 3.0 * a * b - 1.0),
            c2: 0.5 * t1 * mean_resultant_h(kappa_v)? * mean_resultant_h(kappa_p)?,
            big_c: [
                q * b * (1.0 - a),
                q * (5.0 * a * b - 2.0 * a - 2.0 * b + 1.0),
                q * a * (1.0 - b),
            ],
        })
    }

    /// `c₁ + C₁ + C₂ + C₃`, equal to one for a trace-preserving channel.
    pub fn trace_sum(&self) -> f64 {
        self.c1 + self.big_c.iter().sum::<f64>()
    }

    /// The channel applied to an arbitrary 2×2 matrix.
    pub fn apply_matrix(&self, m: &Matrix2c) -> Matrix2c {
        let sy = pauli()[1];
        m * real(self.c1)
            + commutator(&sy, m) * C64::new(0.0, self.c2)
            + pauli_conjugate_sum(m, self.big_c)
    }
}

/// Parameters of a full scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioParams {
    /// Concentration of the S³ law over rotations.
    pub kappa_rot: f64,
    /// Concentration of the boost direction around `ẑ`.
    pub kappa_v: f64,
    /// Width of the bump over boost speeds.
    pub delta: f64,
    /// Concentration of the momentum direction around `x̂`.
    pub kappa_p: f64,
    pub p0_over_m: f64,
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        check_kappa("kappa", self.kappa_rot)?;
        check_kappa("kappa_v", self.kappa_v)?;
        check_kappa("kappa_p", self.kappa_p)?;
        BumpParams::new(self.delta)?;
        MomentumSpec::new(self.p0_over_m, self.kappa_p)?;
        Ok(())
    }

    /// Non-fatal remarks about the parameter regime.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.p0_over_m > NONRELATIVISTIC_WARNING {
            out.push(format!(
                "p0/m = {} exceeds {NONRELATIVISTIC_WARNING}; the second-order Wigner expansion is unreliable",
                self.p0_over_m
            ));
        }
        out
    }

    /// `(T₁, T₂)` with `T_n = T^(p)_n T^(v)_n`.
    pub fn moments(&self) -> Result<(f64, f64)> {
        self.validate()?;
        let bump = BumpParams::new(self.delta)?;
        let mom = MomentumSpec::new(self.p0_over_m, self.kappa_p)?;
        Ok((
            t_momentum(1, &mom)? * t_velocity(1, &bump)?,
            t_momentum(2, &mom)? * t_velocity(2, &bump)?,
        ))
    }
}

/// Matrix form of the closed rotation twirl.
pub fn rotation_twirl_matrix(m: &Matrix2c, kappa: f64) -> Result<Matrix2c> {
    check_kappa("kappa", kappa)?;
    let g = g_over_kappa(kappa)?;
    Ok(m * real(1.0 - 3.0 * g) + pauli_conjugate_sum(m, [g; 3]))
}

/// `(1 - 3G/κ) ρ + (G/κ) Σ_j σ_j ρ σ_j`; Bloch vectors shrink by `1 - 4G/κ`.
pub fn rotation_twirl_closed(rho: &QubitState, kappa: f64) -> Result<QubitState> {
    QubitState::new(rotation_twirl_matrix(rho.matrix(), kappa)?)
}

/// Bloch contraction factor `1 - 4G(κ)/κ` of the rotation twirl.
pub fn rotation_contraction(kappa: f64) -> Result<f64> {
    check_kappa("kappa", kappa)?;
    Ok(1.0 - 4.0 * g_over_kappa(kappa)?)
}

/// A Monte Carlo twirl together with per-component Bloch standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub state: QubitState,
    pub standard_error: Vector3<f64>,
    pub samples: u64,
}

impl McEstimate {
    /// One standard error of the trace distance to a fixed state.
    pub fn trace_distance_error(&self) -> f64 {
        0.5 * self.standard_error.norm()
    }
}

fn rotation_chunk(
    rho: &Matrix2c,
    law: &VmfS3Params,
    seed: u64,
    chunk: u64,
    count: u64,
) -> Result<(Vector3<f64>, Vector3<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut sum = Vector3::zeros();
    let mut sum_sq = Vector3::zeros();
    for _ in 0..count {
        let point = law.sample(&mut rng)?;
        let out = su2_conjugate_matrix(rho, &point.axis(), point.su2_angle())?;
        let r = Vector3::new(
            2.0 * out[(1, 0)].re,
            2.0 * out[(1, 0)].im,
            (out[(0, 0)] - out[(1, 1)]).re,
        );
        sum += r;
        sum_sq += r.component_mul(&r);
    }
    Ok((sum, sum_sq))
}

/// `(1/N) Σ U_i ρ U_i†` over S³ vMF samples, each sample `(cos ψ, sin ψ r̂)`
/// read as the SU(2) element `cos ψ + i sin ψ r̂·σ`.
pub fn rotation_twirl_mc(
    rho: &QubitState,
    kappa: f64,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if n_samples == 0 {
        return Err(invalid("n_samples", "must be at least 1"));
    }
    let law = VmfS3Params::new(kappa)?;
    let chunks = n_samples.div_ceil(MC_CHUNK);
    let parts: Vec<_> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = MC_CHUNK.min(n_samples - c * MC_CHUNK);
            rotation_chunk(rho.matrix(), &law, seed, c, count)
        })
        .collect::<Result<_>>()?;
    let (sum, sum_sq) = parts
        .iter()
        .fold((Vector3::zeros(), Vector3::zeros()), |(s, q), (a, b)| {
            (s + a, q + b)
        });
    let n = n_samples as f64;
    let mean = sum / n;
    let standard_error = if n_samples > 1 {
        (sum_sq / n - mean.component_mul(&mean)).map(|v| (v.max(0.0) * n / (n - 1.0) / n).sqrt())
    } else {
        Vector3::zeros()
    };
    // the mean of unit-ball vectors lies in the ball; rounding can push it out
    let norm = mean.norm();
    let mean = if norm > 1.0 { mean / norm } else { mean };
    Ok(McEstimate {
        state: crate::qubit::from_bloch(&mean)?,
        standard_error,
        samples: n_samples,
    })
}

/// Second-order boost-twirl coefficients for a scenario.
pub fn boost_coefficients(params: &ScenarioParams) -> Result<ChannelCoefficients> {
    let (t1, t2) = params.moments()?;
    ChannelCoefficients::from_moments(t1, t2, params.kappa_v, params.kappa_p)
}

/// `c₁ ρ + i c₂ [σ_y, ρ] + Σ_j C_j σ_j ρ σ_j`.
///
/// The coefficient channel is positive only up to its truncation order; far
/// outside the small-`p₀/m` regime this can fail with [`Error::NotPositive`].
pub fn boost_twirl_apply(rho: &QubitState, coeffs: &ChannelCoefficients) -> Result<QubitState> {
    QubitState::new(coeffs.apply_matrix(rho.matrix()))
}

/// Which Wigner rotation the numeric boost twirl integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kinematics {
    /// The second-order expansion in `p₀/m`, as used by the coefficients.
    SecondOrder,
    /// The closed-form rotation without expansion.
    Exact,
}

/// Node counts of the product quadrature used by [`boost_twirl_numeric`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureGrid {
    /// Gauss–Legendre nodes in the boost speed.
    pub velocity: usize,
    /// Gauss–Legendre nodes in the polar cosine of each sphere.
    pub polar: usize,
    /// Uniform nodes in the azimuth of each sphere.
    pub azimuth: usize,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self {
            velocity: 64,
            polar: 48,
            azimuth: 48,
        }
    }
}

impl QuadratureGrid {
    pub fn new(velocity: usize, polar: usize, azimuth: usize) -> Result<Self> {
        if velocity < 2 || polar < 2 || azimuth < 2 {
            return Err(invalid("resolution", "every node count must be at least 2"));
        }
        Ok(Self {
            velocity,
            polar,
            azimuth,
        })
    }

    /// Every count halved (rounded up); the comparison grid for refinement.
    pub fn halved(&self) -> Self {
        Self {
            velocity: self.velocity.div_ceil(2).max(2),
            polar: self.polar.div_ceil(2).max(2),
            azimuth: self.azimuth.div_ceil(2).max(2),
        }
    }
}

/// A ρ-independent summary of the boost twirl:
/// `ρ ↦ ρ + a ρ + (i/2)[b·σ, ρ] + Σ_ij q_ij σ_i ρ σ_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwirlMoments {
    pub a: f64,
    pub b: Vector3<f64>,
    pub q: Matrix3<f64>,
}

impl TwirlMoments {
    fn zero() -> Self {
        Self {
            a: 0.0,
            b: Vector3::zeros(),
            q: Matrix3::zeros(),
        }
    }

    /// Deviation `U ρ U† - ρ` for `U = cos(φ/2) + i sin(φ/2) φ̂·σ`, given
    /// `cos φ` and `sin φ φ̂`.
    fn deviation(cos_phi: f64, sin_axis: &Vector3<f64>, exact: bool) -> Self {
        let s2 = sin_axis.norm_squared();
        if s2 == 0.0 {
            return Self::zero();
        }
        // sin²(φ/2); the exact branch avoids cancellation in 1 - cos φ
        let half_versine = if exact {
            s2 / (2.0 * (1.0 + cos_phi))
        } else {
            0.5 * (1.0 - cos_phi)
        };
        Self {
            a: -half_versine,
            b: *sin_axis,
            q: sin_axis * sin_axis.transpose() * (half_versine / s2),
        }
    }

    fn add_scaled(&mut self, other: &Self, w: f64) {
        self.a += w * other.a;
        self.b += other.b * w;
        self.q += other.q * w;
    }

    fn max_difference(&self, other: &Self) -> f64 {
        (self.a - other.a)
            .abs()
            .max((self.b - other.b).amax())
            .max((self.q - other.q).amax())
    }

    pub fn apply_matrix(&self, m: &Matrix2c) -> Matrix2c {
        let s = pauli();
        let mut out =
            m * real(1.0 + self.a) + commutator(&pauli_dot(&self.b), m) * C64::new(0.0, 0.5);
        for i in 0..3 {
            for j in 0..3 {
                out += s[i] * m * s[j] * real(self.q[(i, j)]);
            }
        }
        out
    }
}

/// Quadrature nodes `(direction, weight)` of an S² vMF law, in a frame whose
/// pole is the mean direction. The polar cosine is truncated where the density
/// has fallen by `e^{-30}`.
fn sphere_nodes(law: &VmfS2Params, polar: usize, azimuth: usize) -> Vec<(Vector3<f64>, f64)> {
    let mu = *law.mu();
    let (e1, e2) = orthonormal_frame(&mu);
    let t_min = if law.kappa() > 15.0 {
        1.0 - 30.0 / law.kappa()
    } else {
        -1.0
    };
    let rule = GaussLegendre::new(polar);
    let dphi = 2.0 * std::f64::consts::PI / azimuth as f64;
    let mut out = Vec::with_capacity(polar * azimuth);
    for (t, wt) in rule.mapped(t_min, 1.0) {
        let st = (1.0 - t * t).max(0.0).sqrt();
        let w = wt * law.density_at_cos(t) * dphi;
        for k in 0..azimuth {
            let (sp, cp) = (k as f64 * dphi).sin_cos();
            out.push((mu * t + (e1 * cp + e2 * sp) * st, w));
        }
    }
    out
}

fn boost_moments_on(
    params: &ScenarioParams,
    grid: &QuadratureGrid,
    kinematics: Kinematics,
) -> Result<TwirlMoments> {
    let bump = BumpParams::new(params.delta)?;
    let v_law = VmfS2Params::new(Vector3::z(), params.kappa_v)?;
    let p_law = VmfS2Params::new(Vector3::x(), params.kappa_p)?;
    let v_nodes = sphere_nodes(&v_law, grid.polar, grid.azimuth);
    let p_nodes = sphere_nodes(&p_law, grid.polar, grid.azimuth);

    // radial measure v² h₂(v) dv, which is not normalized to one
    let norm = bump.scaled_norm();
    let speeds: Vec<(f64, f64)> = GaussLegendre::new(grid.velocity)
        .mapped(0.0, 1.0)
        .map(|(v, w)| (v, w * v * v * bump.unnormalized(v) / norm))
        .collect();
    let p0 = params.p0_over_m;

    let partials: Vec<Result<TwirlMoments>> = match kinematics {
        Kinematics::SecondOrder => {
            // the integrand is a quadratic in x = F(v) p̃ without constant
            // term, so the speed sum reduces to two radial moments
            let s1: f64 = speeds
                .iter()
                .map(|&(v, w)| w * rapidity_factor(v) * p0)
                .sum();
            let s2: f64 = speeds
                .iter()
                .map(|&(v, w)| w * (rapidity_factor(v) * p0).powi(2))
                .sum();
            v_nodes
                .par_iter()
                .map(|(vd, wv)| {
                    let mut acc = TwirlMoments::zero();
                    for (pd, wp) in &p_nodes {
                        let (cp, sp) = second_order_in_x(1.0, vd, pd);
                        let (cm, sm) = second_order_in_x(-1.0, vd, pd);
                        let plus = TwirlMoments::deviation(cp, &sp, false);
                        let minus = TwirlMoments::deviation(cm, &sm, false);
                        let w = wv * wp;
                        acc.add_scaled(&plus, 0.5 * w * (s2 + s1));
                        acc.add_scaled(&minus, 0.5 * w * (s2 - s1));
                    }
                    Ok(acc)
                })
                .collect()
        }
        Kinematics::Exact => v_nodes
            .par_iter()
            .map(|(vd, wv)| {
                let mut acc = TwirlMoments::zero();
                for &(v, ws) in &speeds {
                    let boost = BoostVector::new(*vd, v)?;
                    for (pd, wp) in &p_nodes {
                        let mom = MomentumVector::new(*pd, p0)?;
                        let (c, s) = wigner_exact_components(&boost, &mom);
                        acc.add_scaled(&TwirlMoments::deviation(c, &s, true), wv * ws * wp);
                    }
                }
                Ok(acc)
            })
            .collect(),
    };
    let mut total = TwirlMoments::zero();
    for part in partials {
        total.add_scaled(&part?, 1.0);
    }
    Ok(total)
}

/// Boost-twirl moments on `grid`, checked against the halved grid.
///
/// Returns the moments and the largest entrywise disagreement between the two
/// grids; fails with [`Error::ResolutionTooCoarse`] above
/// [`REFINEMENT_TOLERANCE`].
pub fn boost_twirl_moments(
    params: &ScenarioParams,
    grid: &QuadratureGrid,
    kinematics: Kinematics,
) -> Result<(TwirlMoments, f64)> {
    params.validate()?;
    bump_norm(params.delta)?;
    if params.p0_over_m == 0.0 {
        return Ok((TwirlMoments::zero(), 0.0));
    }
    let fine = boost_moments_on(params, grid, kinematics)?;
    let coarse = boost_moments_on(params, &grid.halved(), kinematics)?;
    let disagreement = fine.max_difference(&coarse);
    if !(disagreement <= REFINEMENT_TOLERANCE) {
        return Err(Error::ResolutionTooCoarse {
            disagreement,
            tolerance: REFINEMENT_TOLERANCE,
        });
    }
    Ok((fine, disagreement))
}

/// Boost twirl by direct quadrature of the second-order Wigner rotation over
/// boost speed, boost direction and momentum direction.
pub fn boost_twirl_numeric(
    rho: &QubitState,
    params: &ScenarioParams,
    grid: &QuadratureGrid,
) -> Result<QubitState> {
    boost_twirl_numeric_with(rho, params, grid, Kinematics::SecondOrder)
}

pub fn boost_twirl_numeric_with(
    rho: &QubitState,
    params: &ScenarioParams,
    grid: &QuadratureGrid,
    kinematics: Kinematics,
) -> Result<QubitState> {
    let (moments, _) = boost_twirl_moments(params, grid, kinematics)?;
    QubitState::new(moments.apply_matrix(rho.matrix()))
}

/// `ρ + i (T₁/2) [σ_y, ρ]`.
///
/// This is the first-order truncation of a rotation about `ŷ`, not the
/// rotation itself, and it does not preserve positivity: pure inputs come out
/// with a Bloch vector slightly longer than one.
pub fn limit_state_rho0(rho: &QubitState, t1: f64) -> Result<QubitOperator> {
    if !t1.is_finite() {
        return Err(invalid("t1", "must be finite"));
    }
    let m = rho.matrix();
    QubitOperator::new(m + commutator(&pauli()[1], m) * C64::new(0.0, 0.5 * t1))
}

/// The boost twirl when the boost direction is unknown (`κ_v → 0`):
/// `(1 - T₂/6) ρ + (T₂/12)[2h σ₁ρσ₁ + (1 - h)(σ₂ρσ₂ + σ₃ρσ₃)]`, `h = H(κ_p)/κ_p`.
pub fn limit_state_rho1(rho: &QubitState, t2: f64, kappa_p: f64) -> Result<QubitState> {
    check_t("t2", t2)?;
    check_kappa("kappa_p", kappa_p)?;
    let h = h_over_kappa(kappa_p)?;
    let q = t2 / 12.0;
    let m = rho.matrix();
    QubitState::new(
        m * real(1.0 - t2 / 6.0)
            + pauli_conjugate_sum(m, [2.0 * q * h, q * (1.0 - h), q * (1.0 - h)]),
    )
}

/// `κ_v → 0` with the overall signs of the noise terms reversed:
/// `(1 + T₂/6) ρ - (T₂/12)[…]`. Kept for comparison; it expands rather than
/// contracts the Bloch vector and so is not a channel.
pub fn limit_state_rho1_reversed(rho: &QubitState, t2: f64, kappa_p: f64) -> Result<QubitOperator> {
    check_t("t2", t2)?;
    check_kappa("kappa_p", kappa_p)?;
    let h = h_over_kappa(kappa_p)?;
    let q = t2 / 12.0;
    let m = rho.matrix();
    QubitOperator::new(
        m * real(1.0 + t2 / 6.0)
            - pauli_conjugate_sum(m, [2.0 * q * h, q * (1.0 - h), q * (1.0 - h)]),
    )
}

/// Depolarizing limit: `(1 - T₂/6) ρ + (T₂/18) Σ_j σ_j ρ σ_j`.
pub fn limit_state_rho2(rho: &QubitState, t2: f64) -> Result<QubitState> {
    check_t("t2", t2)?;
    let m = rho.matrix();
    QubitState::new(m * real(1.0 - t2 / 6.0) + pauli_conjugate_sum(m, [t2 / 18.0; 3]))
}

/// Boost twirl followed by rotation twirl.
pub fn full_pipeline(rho: &QubitState, params: &ScenarioParams) -> Result<QubitState> {
    params.validate()?;
    let boosted = boost_twirl_apply(rho, &boost_coefficients(params)?)?;
    rotation_twirl_closed(&boosted, params.kappa_rot)
}

/// Rotation twirl followed by boost twirl; only for comparing orderings.
pub fn full_pipeline_reversed(rho: &QubitState, params: &ScenarioParams) -> Result<QubitState> {
    params.validate()?;
    let rotated = rotation_twirl_closed(rho, params.kappa_rot)?;
    boost_twirl_apply(&rotated, &boost_coefficients(params)?)
}

/// Numeric boost twirl followed by a sampled rotation twirl.
pub fn full_pipeline_mc(
    rho: &QubitState,
    params: &ScenarioParams,
    grid: &QuadratureGrid,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    let boosted = boost_twirl_numeric(rho, params, grid)?;
    rotation_twirl_mc(&boosted, params.kappa_rot, n_samples, seed)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChoiReport {
    pub min_eigenvalue: f64,
    pub passed: bool,
}

/// `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`.
pub fn choi_matrix(channel: &dyn Fn(&Matrix2c) -> Matrix2c) -> Matrix4<C64> {
    let mut choi = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let mut e = Matrix2c::zeros();
            e[(i, j)] = real(1.0);
            let out = channel(&e);
            for k in 0..2 {
                for l in 0..2 {
                    choi[(2 * i + k, 2 * j + l)] = out[(k, l)];
                }
            }
        }
    }
    choi
}

/// Smallest Choi eigenvalue of a linear map and whether it is `≥ -tolerance`.
pub fn choi_cp_check(channel: &dyn Fn(&Matrix2c) -> Matrix2c, tolerance: f64) -> ChoiReport {
    let choi = choi_matrix(channel);
    let herm = (choi + choi.adjoint()) * real(0.5);
    let min_eigenvalue = herm.symmetric_eigenvalues().min();
    ChoiReport {
        min_eigenvalue,
        passed: min_eigenvalue >= -tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{from_bloch, su2_conjugate, trace_distance};
    use crate::special::mean_resultant_g;

    fn params(kappa_v: f64, kappa_p: f64, delta: f64, p0: f64) -> ScenarioParams {
        ScenarioParams {
            kappa_rot: 2.0,
            kappa_v,
            delta,
            kappa_p,
            p0_over_m: p0,
        }
    }

    fn random_state(seed: u64, pure: bool) -> QubitState {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = Vector3::new(
            rng.random_range(-1.0..1.0f64),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
        .normalize();
        let len = if pure { 1.0 } else { rng.random::<f64>() };
        from_bloch(&(r * len)).unwrap()
    }

    fn max_abs(m: &Matrix2c) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn rotation_closed_limits() {
        let rho = random_state(1, true);
        let out = rotation_twirl_closed(&rho, 1e9).unwrap();
        assert!((out.bloch() - rho.bloch()).norm() < 1e-8);
        let mixed = QubitState::maximally_mixed();
        let out = rotation_twirl_closed(&mixed, 0.7).unwrap();
        assert!(max_abs(&(out.matrix() - mixed.matrix())) < 1e-15);
        let out = rotation_twirl_closed(&QubitState::zero(), 2.0).unwrap();
        let expected = 1.0 - 2.0 * mean_resultant_g(2.0).unwrap();
        assert!((out.bloch() - Vector3::z() * expected).norm() < 1e-14);
    }

    #[test]
    fn rotation_mc_matches_closed_form() {
        let rho = QubitState::zero();
        let mc = rotation_twirl_mc(&rho, 2.0, 1_000_000, 0).unwrap();
        let closed = rotation_twirl_closed(&rho, 2.0).unwrap();
        let td = trace_distance(mc.state.matrix(), closed.matrix());
        assert!(
            td < 3.0 * mc.trace_distance_error(),
            "{td} vs {}",
            mc.trace_distance_error()
        );
        assert!((mc.state.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_mc_single_sample_is_pure() {
        let rho = random_state(4, true);
        let mc = rotation_twirl_mc(&rho, 2.0, 1, 99).unwrap();
        assert!((mc.state.purity() - 1.0).abs() < 1e-12);
        assert!(rotation_twirl_mc(&rho, 2.0, 0, 99).is_err());
    }

    #[test]
    fn rotation_mc_is_deterministic() {
        let rho = random_state(5, false);
        let a = rotation_twirl_mc(&rho, 0.5, 200_000, 7).unwrap();
        let b = rotation_twirl_mc(&rho, 0.5, 200_000, 7).unwrap();
        assert_eq!(a, b);
        let c = rotation_twirl_mc(&rho, 0.5, 200_000, 8).unwrap();
        assert_ne!(a.state, c.state);
    }

    #[test]
    fn coefficient_limits() {
        let (t1, t2) = (0.004, 0.03);
        let small = ChannelCoefficients::from_moments(t1, t2, 1e-8, 1e-8).unwrap();
        assert!((small.c1 - (1.0 - t2 / 6.0)).abs() < 1e-7);
        for c in small.big_c {
            assert!((c - t2 / 18.0).abs() < 1e-7);
        }
        assert!(small.c2.abs() < 1e-7);

        let large = ChannelCoefficients::from_moments(t1, t2, 1e8, 1e8).unwrap();
        assert!((large.c1 - (1.0 - t2 / 4.0)).abs() < 1e-7);
        assert!((large.c2 - t1 / 2.0).abs() < 1e-7);
        assert!((large.big_c[1] - t2 / 4.0).abs() < 1e-7);
        assert!(large.big_c[0].abs() < 1e-7 && large.big_c[2].abs() < 1e-7);

        let zero = ChannelCoefficients::from_moments(t1, t2, 0.0, 0.0).unwrap();
        assert!((zero.c1 - (1.0 - t2 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn coefficients_preserve_trace() {
        for &kv in &[0.0, 1e-6, 0.3, 1.0, 7.0, 1e4] {
            for &kp in &[0.0, 1e-6, 0.3, 2.0, 40.0] {
                for &delta in &[0.3, 1.0, 3.0] {
                    let c = boost_coefficients(&params(kv, kp, delta, 0.05)).unwrap();
                    assert!((c.trace_sum() - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn identity_and_unital() {
        let rho = random_state(6, false);
        let out = boost_twirl_apply(&rho, &ChannelCoefficients::IDENTITY).unwrap();
        assert!(max_abs(&(out.matrix() - rho.matrix())) < 1e-15);
        let c = boost_coefficients(&params(1.0, 2.0, 1.0, 0.1)).unwrap();
        let mixed = QubitState::maximally_mixed();
        let out = boost_twirl_apply(&mixed, &c).unwrap();
        assert!(max_abs(&(out.matrix() - mixed.matrix())) < 1e-15);
    }

    #[test]
    fn small_kappa_coefficients_equal_rho2() {
        let t2 = 0.06;
        let c = ChannelCoefficients::from_moments(0.0, t2, 0.0, 0.0).unwrap();
        let rho = QubitState::zero();
        let a = boost_twirl_apply(&rho, &c).unwrap();
        let b = limit_state_rho2(&rho, t2).unwrap();
        assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-16);
        assert!((a.bloch().z - (1.0 - 2.0 * t2 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn numeric_twirl_zero_momentum_is_identity() {
        let rho = random_state(7, true);
        let out = boost_twirl_numeric(
            &rho,
            &params(1.0, 2.0, 1.0, 0.0),
            &QuadratureGrid::default(),
        )
        .unwrap();
        assert_eq!(out.matrix(), rho.matrix());
    }

    #[test]
    fn numeric_twirl_matches_coefficients() {
        let p = params(1.0, 2.0, 1.0, 0.01);
        let coeffs = boost_coefficients(&p).unwrap();
        let grid = QuadratureGrid::default();
        let (moments, disagreement) =
            boost_twirl_moments(&p, &grid, Kinematics::SecondOrder).unwrap();
        assert!(disagreement < 1e-10, "{disagreement}");
        for seed in 0..5 {
            let rho = random_state(seed, seed % 2 == 0);
            let numeric = moments.apply_matrix(rho.matrix());
            let closed = coeffs.apply_matrix(rho.matrix());
            assert!(trace_distance(&numeric, &closed) < 1e-10);
        }
    }

    #[test]
    fn exact_kinematics_differ_at_third_order() {
        let grid = QuadratureGrid::new(24, 16, 16).unwrap();
        let rho = random_state(3, true);
        let diff = |p0: f64| {
            let p = params(1.0, 2.0, 1.0, p0);
            let exact = boost_twirl_numeric_with(&rho, &p, &grid, Kinematics::Exact).unwrap();
            let closed = boost_twirl_apply(&rho, &boost_coefficients(&p).unwrap()).unwrap();
            trace_distance(exact.matrix(), closed.matrix())
        };
        let ratio = diff(0.02) / diff(0.01);
        assert!((6.0..=10.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn coarse_grid_is_flagged() {
        let grid = QuadratureGrid::new(3, 3, 3).unwrap();
        let r = boost_twirl_moments(&params(0.5, 0.5, 1.0, 0.3), &grid, Kinematics::Exact);
        assert!(matches!(r, Err(Error::ResolutionTooCoarse { .. })));
    }

    #[test]
    fn rho0_is_first_order_rotation() {
        let rho = random_state(8, true);
        assert_eq!(limit_state_rho0(&rho, 0.0).unwrap().matrix(), rho.matrix());
        let err = |t: f64| {
            let approx = limit_state_rho0(&rho, t).unwrap();
            let exact = su2_conjugate(&rho, &Vector3::y(), t).unwrap();
            max_abs(&(approx.matrix() - exact.matrix()))
        };
        let ratio = err(0.02) / err(0.01);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        // not positive on pure inputs
        let out = limit_state_rho0(&QubitState::zero(), 0.1).unwrap();
        assert!(out.eigenvalues()[0] < 0.0);
    }

    #[test]
    fn rho0_matches_peaked_coefficients() {
        let p = params(1e8, 1e8, 1.0, 0.01);
        let (t1, t2) = p.moments().unwrap();
        let coeffs = boost_coefficients(&p).unwrap();
        let rho = random_state(9, true);
        let a = limit_state_rho0(&rho, t1).unwrap();
        let b = coeffs.apply_matrix(rho.matrix());
        assert!(trace_distance(a.matrix(), &b) < 2.0 * t2);
    }

    #[test]
    fn rho1_limits() {
        let rho = random_state(10, true);
        let same = limit_state_rho1(&rho, 0.0, 3.0).unwrap();
        assert!(max_abs(&(same.matrix() - rho.matrix())) < 1e-16);
        let a = limit_state_rho1(&rho, 0.05, 1e-8).unwrap();
        let b = limit_state_rho2(&rho, 0.05).unwrap();
        assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-10);
        for &kp in &[0.1, 1.0, 5.0, 100.0] {
            let t2 = 0.05;
            let coeffs = ChannelCoefficients::from_moments(0.01, t2, 1e-8, kp).unwrap();
            let a = limit_state_rho1(&rho, t2, kp).unwrap();
            assert!(trace_distance(a.matrix(), &coeffs.apply_matrix(rho.matrix())) < 1e-8);
        }
    }

    #[test]
    fn reversed_rho1_expands() {
        let rho = QubitState::zero();
        let out = limit_state_rho1_reversed(&rho, 0.05, 2.0).unwrap();
        assert!(out.bloch().norm() > 1.0);
    }

    #[test]
    fn rho2_contracts_bloch_vectors() {
        for seed in 0..20 {
            let rho = random_state(seed, true);
            let t2 = 0.01 * seed as f64;
            let out = limit_state_rho2(&rho, t2).unwrap();
            let expected = rho.bloch() * (1.0 - 2.0 * t2 / 9.0);
            assert!((out.bloch() - expected).norm() < 1e-14);
        }
        let mixed = QubitState::maximally_mixed();
        let out = limit_state_rho2(&mixed, 0.3).unwrap();
        assert!(max_abs(&(out.matrix() - mixed.matrix())) < 1e-16);
    }

    #[test]
    fn pipeline_limits() {
        let rho = random_state(11, true);
        let p = ScenarioParams {
            kappa_rot: 1e12,
            kappa_v: 1e12,
            delta: 1.0,
            kappa_p: 1e12,
            p0_over_m: 0.0,
        };
        let out = full_pipeline(&rho, &p).unwrap();
        assert!((out.bloch() - rho.bloch()).norm() < 1e-10);
        let p = ScenarioParams {
            kappa_rot: 1e-6,
            ..p
        };
        assert!(full_pipeline(&rho, &p).unwrap().bloch().norm() < 1e-3);
    }

    #[test]
    fn pipeline_contraction_is_monotone_in_kappa_rot() {
        let rho = random_state(12, true);
        let mut prev = f64::INFINITY;
        for k in [100.0, 30.0, 10.0, 3.0, 1.0, 0.3, 0.1, 0.01, 0.0] {
            let p = ScenarioParams {
                kappa_rot: k,
                ..params(1.0, 2.0, 1.0, 0.05)
            };
            let norm = full_pipeline(&rho, &p).unwrap().bloch().norm();
            assert!(norm <= prev + 1e-15);
            prev = norm;
        }
    }

    #[test]
    fn pipeline_matches_sampled_composition() {
        let p = params(1.0, 2.0, 1.0, 0.05);
        let rho = random_state(13, true);
        let closed = full_pipeline(&rho, &p).unwrap();
        let mc = full_pipeline_mc(
            &rho,
            &p,
            &QuadratureGrid::new(32, 24, 24).unwrap(),
            400_000,
            3,
        )
        .unwrap();
        let td = trace_distance(closed.matrix(), mc.state.matrix());
        assert!(td < 3.0 * mc.trace_distance_error() + 1e-6);
    }

    #[test]
    fn channel_order_is_irrelevant_for_unital_maps() {
        let p = params(1.0, 2.0, 1.0, 0.05);
        let rho = random_state(14, false);
        let a = full_pipeline(&rho, &p).unwrap();
        let b = full_pipeline_reversed(&rho, &p).unwrap();
        assert!(trace_distance(a.matrix(), b.matrix()) < 1e-14);
    }

    #[test]
    fn choi_checks() {
        for &k in &[1e-3, 0.5, 2.0, 50.0] {
            let r = choi_cp_check(&|m| rotation_twirl_matrix(m, k).unwrap(), 1e-12);
            assert!(r.passed, "{r:?}");
        }
        for &t2 in &[0.0, 0.3, 1.0] {
            let r = choi_cp_check(
                &|m| m * real(1.0 - t2 / 6.0) + pauli_conjugate_sum(m, [t2 / 18.0; 3]),
                1e-12,
            );
            assert!(r.passed);
        }
        // a transpose is not CP
        let r = choi_cp_check(&|m| m.transpose(), 1e-12);
        assert!(!r.passed && (r.min_eigenvalue + 1.0).abs() < 1e-12);
        // the first-order map is not CP either
        let r = choi_cp_check(
            &|m| m + commutator(&pauli()[1], m) * C64::new(0.0, 0.05),
            1e-12,
        );
        assert!(!r.passed);
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

        fn check_output(m: &Matrix2c) -> std::result::Result<(), TestCaseError> {
            prop_assert!((m.trace().re - 1.0).abs() < 1e-10);
            prop_assert!(m.trace().im.abs() < 1e-10);
            prop_assert!(crate::qubit::anti_hermitian_residue(m) < 1e-10);
            Ok(())
        }

        proptest! {
            #[test]
            fn channels_preserve_trace_and_hermiticity(
                r in ball(), kappa in 0.0..50.0f64, kv in 0.0..20.0f64, kp in 0.0..20.0f64,
                delta in 0.2..4.0f64, p0 in 0.0..0.3f64, t in 0.0..0.5f64,
            ) {
                let rho = from_bloch(&r).unwrap();
                let m = rho.matrix();
                check_output(&rotation_twirl_matrix(m, kappa).unwrap())?;
                let c = boost_coefficients(&params(kv, kp, delta, p0)).unwrap();
                check_output(&c.apply_matrix(m))?;
                check_output(limit_state_rho0(&rho, t).unwrap().matrix())?;
                check_output(limit_state_rho1(&rho, t, kp).unwrap().matrix())?;
                check_output(limit_state_rho2(&rho, t).unwrap().matrix())?;
            }

            #[test]
            fn rotation_twirl_scales_bloch(r in ball(), kappa in 0.0..200.0f64) {
                let rho = from_bloch(&r).unwrap();
                let out = rotation_twirl_closed(&rho, kappa).unwrap();
                let f = rotation_contraction(kappa).unwrap();
                let expected = r * f;
                for i in 0..3 {
                    prop_assert!((out.bloch()[i] - expected[i]).abs() < 1e-12);
                }
            }

            #[test]
            fn coefficients_trace_sum(t1 in 0.0..0.1f64, t2 in 0.0..0.1f64, kv in 0.0..1e3f64, kp in 0.0..1e3f64) {
                let c = ChannelCoefficients::from_moments(t1, t2, kv, kp).unwrap();
                prop_assert!((c.trace_sum() - 1.0).abs() < 1e-10);
            }
        }
    }
}
