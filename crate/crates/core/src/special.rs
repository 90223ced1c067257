//! Special functions, directional distributions and the velocity/momentum
//! moment integrals.
//!
//! The three sphere/interval distributions used to model knowledge of a frame
//! relation live here together with exact samplers:
//!
//! * [`VmfS3Params`]: von Mises–Fisher on S³ in hyperspherical coordinates
//!   `(ψ, θ, φ)`, density `κ/(4π² I₁(κ)) exp(κ cos ψ)` against
//!   `sin²ψ sin θ dψ dθ dφ`.
//! * [`VmfS2Params`]: von Mises–Fisher on S², normalized as `κ/(4π sinh κ)`.
//! * [`BumpParams`]: `exp[-1/(Δ²(1-v²))]/N(Δ)` on `[0, 1)`.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::quadrature::integrate_doubling;

/// Highest Bessel order supported by [`bessel_i`].
pub const MAX_BESSEL_ORDER: u32 = 10;

const SERIES_LIMIT: f64 = 15.0;
const ASYMPTOTIC_LIMIT: f64 = 500.0;
const SMALL_KAPPA: f64 = 1e-4;
const MAX_REJECTIONS: u64 = 1_000_000;

fn check_bessel_args(order: u32, x: f64) -> Result<()> {
    if order > MAX_BESSEL_ORDER {
        return Err(invalid(
            "order",
            format!("must be at most {MAX_BESSEL_ORDER}"),
        ));
    }
    if !(x >= 0.0) || x.is_infinite() {
        return Err(invalid("x", "must be finite and non-negative"));
    }
    Ok(())
}

/// Power series `Σ_k (x/2)^{ν+2k} / (k! (ν+k)!)`.
fn bessel_series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (1..=order).fold(1.0, |t, k| t * half / k as f64);
    let mut sum = term;
    let q = half * half;
    let mut k = 0.0;
    while term > 1e-17 * sum {
        k += 1.0;
        term *= q / (k * (k + order as f64));
        sum += term;
    }
    sum
}

/// Miller backward recurrence, normalized with `e^x = I₀ + 2 Σ_{k≥1} I_k`.
/// Returns `I_ν(x) e^{-x}`.
fn bessel_miller_scaled(order: u32, x: f64) -> f64 {
    let start = order as usize + (x + 10.0 * x.sqrt() + 30.0).ceil() as usize;
    let mut above = 0.0;
    let mut current = 1e-280;
    let mut sum = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        if k == order as usize {
            wanted = current;
        }
        sum += 2.0 * current;
        let below = (2.0 * k as f64 / x) * current + above;
        above = current;
        current = below;
        if current > 1e250 {
            above *= 1e-250;
            current *= 1e-250;
            sum *= 1e-250;
            wanted *= 1e-250;
        }
    }
    if order == 0 {
        wanted = current;
    }
    sum += current;
    wanted / sum
}

/// Large-argument expansion of `I_ν(x) e^{-x}`.
fn bessel_asymptotic_scaled(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order as f64).powi(2);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

/// Exponentially scaled modified Bessel function `I_ν(x) e^{-x}`.
pub fn bessel_i_scaled(order: u32, x: f64) -> Result<f64> {
    check_bessel_args(order, x)?;
    Ok(if x <= SERIES_LIMIT {
        bessel_series(order, x) * (-x).exp()
    } else if x <= ASYMPTOTIC_LIMIT {
        bessel_miller_scaled(order, x)
    } else {
        bessel_asymptotic_scaled(order, x)
    })
}

/// Modified Bessel function of the first kind `I_ν(x)`, `ν ≤ 10`, `x ≥ 0`.
///
/// Overflows to `+∞` beyond `x ≈ 713`; use [`bessel_i_scaled`] there.
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    check_bessel_args(order, x)?;
    if x <= SERIES_LIMIT {
        Ok(bessel_series(order, x))
    } else {
        Ok(bessel_i_scaled(order, x)? * x.exp())
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa >= 0.0) || kappa.is_infinite() {
        return Err(invalid("kappa", "must be finite and non-negative"));
    }
    Ok(())
}

/// Mean resultant length of the S³ von Mises–Fisher law, `G(κ) = I₂(κ)/I₁(κ)`.
pub fn mean_resultant_g(kappa: f64) -> Result<f64> {
    Ok(kappa * g_over_kappa(kappa)?)
}

/// `G(κ)/κ`, finite at `κ = 0` where it equals `1/4`.
pub fn g_over_kappa(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if kappa < SMALL_KAPPA {
        return Ok(0.25 - kappa * kappa / 96.0);
    }
    Ok(bessel_i_scaled(2, kappa)? / bessel_i_scaled(1, kappa)? / kappa)
}

/// `H(κ)/κ` via Lambert's continued fraction `1/(3 + κ²/(5 + κ²/(7 + …)))`.
fn h_over_kappa_cf(kappa: f64) -> f64 {
    let k2 = kappa * kappa;
    let mut tail = 0.0;
    for j in (1..=40).rev() {
        tail = k2 / ((2 * j + 3) as f64 + tail);
    }
    1.0 / (3.0 + tail)
}

/// Mean resultant length of the S² von Mises–Fisher law, `H(κ) = coth κ - 1/κ`.
pub fn mean_resultant_h(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if kappa < 2.0 {
        return Ok(kappa * h_over_kappa(kappa)?);
    }
    Ok(1.0 / kappa.tanh() - 1.0 / kappa)
}

/// `H(κ)/κ`, finite at `κ = 0` where it equals `1/3`.
pub fn h_over_kappa(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if kappa < SMALL_KAPPA {
        Ok(1.0 / 3.0 - kappa * kappa / 45.0)
    } else if kappa < 2.0 {
        Ok(h_over_kappa_cf(kappa))
    } else {
        Ok(mean_resultant_h(kappa)? / kappa)
    }
}

/// A point on S³ in hyperspherical coordinates.
///
/// The Cartesian point is `(cos ψ, sin ψ r̂)` with axis
/// `r̂ = (sin θ cos φ, sin θ sin φ, cos θ)`. Read as a unit quaternion it is the
/// SU(2) element `cos ψ I + i sin ψ r̂·σ`, i.e. a rotation by `2ψ` about `r̂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HypersphericalPoint {
    pub psi: f64,
    pub theta: f64,
    pub phi: f64,
}

impl HypersphericalPoint {
    pub fn axis(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    /// Rotation angle of the SU(2) element this point represents.
    pub fn su2_angle(&self) -> f64 {
        2.0 * self.psi
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VmfS3Params {
    kappa: f64,
}

impl VmfS3Params {
    pub fn new(kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        Ok(Self { kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Density in `(ψ, θ, φ)`; independent of the axis angles.
    pub fn density(&self, psi: f64, _theta: f64, _phi: f64) -> f64 {
        let k = self.kappa;
        if k < SMALL_KAPPA {
            // κ/I₁(κ) → 2 as κ → 0
            let norm = 2.0 / (1.0 + k * k / 8.0);
            return norm / (4.0 * PI * PI) * (k * psi.cos()).exp();
        }
        let i1 = bessel_i_scaled(1, k).expect("kappa validated");
        k / (4.0 * PI * PI * i1) * (k * (psi.cos() - 1.0)).exp()
    }

    /// Rejection sampler: ψ from the folded von Mises envelope `∝ e^{κ cos ψ}`
    /// accepted with probability `sin²ψ`; axis uniform on S².
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<HypersphericalPoint> {
        for _ in 0..MAX_REJECTIONS {
            let psi = sample_folded_von_mises(self.kappa, rng);
            if rng.random::<f64>() < psi.sin().powi(2) {
                let cos_theta = 2.0 * rng.random::<f64>() - 1.0;
                let phi = 2.0 * PI * rng.random::<f64>();
                return Ok(HypersphericalPoint {
                    psi,
                    theta: cos_theta.clamp(-1.0, 1.0).acos(),
                    phi,
                });
            }
        }
        Err(Error::SamplerExhausted {
            attempts: MAX_REJECTIONS,
        })
    }
}

/// `|θ|` for `θ ~ VonMises(0, κ)`, i.e. density `∝ e^{κ cos ψ}` on `[0, π]`
/// (Best–Fisher wrapped-Cauchy rejection).
fn sample_folded_von_mises<R: Rng + ?Sized>(kappa: f64, rng: &mut R) -> f64 {
    if kappa < 1e-8 {
        return PI * rng.random::<f64>();
    }
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let s = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let z = (PI * rng.random::<f64>()).cos();
        let w = (1.0 + s * z) / (s + z);
        let y = kappa * (s - w);
        let v: f64 = rng.random();
        if y * (2.0 - y) - v >= 0.0 || (y / v).ln() + 1.0 - y >= 0.0 {
            return w.clamp(-1.0, 1.0).acos();
        }
    }
}

/// Two unit vectors completing `mu` to a right-handed orthonormal frame.
pub fn orthonormal_frame(mu: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if mu.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let e1 = helper.cross(mu).normalize();
    let e2 = mu.cross(&e1);
    (e1, e2)
}

fn check_unit(v: &Vector3<f64>) -> Result<()> {
    let norm = v.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnitVector { norm });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VmfS2Params {
    mu: Vector3<f64>,
    kappa: f64,
}

impl VmfS2Params {
    pub fn new(mu: Vector3<f64>, kappa: f64) -> Result<Self> {
        check_unit(&mu)?;
        check_kappa(kappa)?;
        Ok(Self { mu, kappa })
    }

    pub fn mu(&self) -> &Vector3<f64> {
        &self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Density as a function of `t = μ·n̂` (w.r.t. the area element of S²).
    pub fn density_at_cos(&self, t: f64) -> f64 {
        let k = self.kappa;
        if k < 1e-8 {
            return (1.0 + k * t) / (4.0 * PI);
        }
        // κ e^{κ t} / (4π sinh κ), arranged to avoid overflow
        k * (k * (t - 1.0)).exp() / (2.0 * PI * (-(-2.0 * k).exp_m1()))
    }

    pub fn density(&self, direction: &Vector3<f64>) -> Result<f64> {
        check_unit(direction)?;
        Ok(self.density_at_cos(self.mu.dot(direction)))
    }

    /// Exact inversion of the `μ·n̂` marginal plus a uniform azimuth.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector3<f64> {
        let u: f64 = rng.random();
        let k = self.kappa;
        let w = if k < 1e-8 {
            2.0 * u - 1.0
        } else {
            1.0 + (u + (1.0 - u) * (-2.0 * k).exp()).ln() / k
        };
        let w = w.clamp(-1.0, 1.0);
        let phi = 2.0 * PI * rng.random::<f64>();
        let (e1, e2) = orthonormal_frame(&self.mu);
        let s = (1.0 - w * w).sqrt();
        (self.mu * w + (e1 * phi.cos() + e2 * phi.sin()) * s).normalize()
    }
}

/// The bump weight rescaled by `e^{1/Δ²}`: `exp[-v²/(Δ²(1-v²))]`.
fn scaled_bump(delta: f64, v: f64) -> f64 {
    if v >= 1.0 {
        return 0.0;
    }
    (-(v * v) / (delta * delta * (1.0 - v * v))).exp()
}

fn scaled_bump_integral<F: Fn(f64) -> f64>(delta: f64, moment: F) -> f64 {
    integrate_doubling(|v| moment(v) * scaled_bump(delta, v), 0.0, 1.0, 1e-13).0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpParams {
    delta: f64,
}

impl BumpParams {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0) || delta.is_infinite() {
            return Err(invalid("delta", "must be finite and positive"));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `h₂(v) N(Δ) e^{1/Δ²}`, the bump up to a constant factor.
    pub fn unnormalized(&self, v: f64) -> f64 {
        if !(0.0..1.0).contains(&v) {
            return 0.0;
        }
        scaled_bump(self.delta, v)
    }

    /// `N(Δ) e^{1/Δ²}`, the normalizer matching [`BumpParams::unnormalized`].
    pub fn scaled_norm(&self) -> f64 {
        scaled_bump_integral(self.delta, |_| 1.0)
    }

    /// Normalized `h₂(v)` on `[0, 1)`, evaluated without forming `N(Δ)`.
    pub fn density(&self, v: f64) -> f64 {
        if !(0.0..1.0).contains(&v) {
            return 0.0;
        }
        scaled_bump(self.delta, v) / scaled_bump_integral(self.delta, |_| 1.0)
    }

    /// Uniform proposal on `[0, 1)` accepted with `exp[-v²/(Δ²(1-v²))]`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        for _ in 0..MAX_REJECTIONS {
            let v: f64 = rng.random();
            if rng.random::<f64>() < scaled_bump(self.delta, v) {
                return Ok(v);
            }
        }
        Err(Error::SamplerExhausted {
            attempts: MAX_REJECTIONS,
        })
    }
}

/// `N(Δ) = ∫₀¹ exp[-1/(Δ²(1-v²))] dv`.
pub fn bump_norm(delta: f64) -> Result<f64> {
    let params = BumpParams::new(delta)?;
    let scaled = scaled_bump_integral(params.delta, |_| 1.0);
    let n = (-1.0 / (delta * delta)).exp() * scaled;
    if n < f64::MIN_POSITIVE {
        return Err(Error::Underflow {
            what: "N(delta)",
            delta,
        });
    }
    Ok(n)
}

/// `F(v) = v / (1 + √(1 + v²))`.
pub fn rapidity_factor(v: f64) -> f64 {
    v / (1.0 + (1.0 + v * v).sqrt())
}

fn check_moment_order(n: u32) -> Result<()> {
    if !(1..=2).contains(&n) {
        return Err(invalid("n", "moment order must be 1 or 2"));
    }
    Ok(())
}

/// `T^(v)_n = ∫₀¹ v² F(v)ⁿ h₂(v) dv` with `h₂` normalized by `N(Δ)`.
pub fn t_velocity(n: u32, params: &BumpParams) -> Result<f64> {
    check_moment_order(n)?;
    bump_norm(params.delta)?;
    let num = scaled_bump_integral(params.delta, |v| v * v * rapidity_factor(v).powi(n as i32));
    let den = scaled_bump_integral(params.delta, |_| 1.0);
    Ok(num / den)
}

/// Delta-peaked momentum magnitude with a vMF direction around `p̂₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentumSpec {
    pub p0_over_m: f64,
    pub kappa_p: f64,
}

/// Above this `p₀/m` the second-order Wigner expansion is no longer reliable.
pub const NONRELATIVISTIC_WARNING: f64 = 0.3;

impl MomentumSpec {
    pub fn new(p0_over_m: f64, kappa_p: f64) -> Result<Self> {
        if !(p0_over_m >= 0.0) || p0_over_m.is_infinite() {
            return Err(invalid("p0_over_m", "must be finite and non-negative"));
        }
        check_kappa(kappa_p).map_err(|_| invalid("kappa_p", "must be finite and non-negative"))?;
        Ok(Self { p0_over_m, kappa_p })
    }

    pub fn beyond_expansion_regime(&self) -> bool {
        self.p0_over_m > NONRELATIVISTIC_WARNING
    }
}

/// `T^(p)_n = (p₀/m)ⁿ`.
pub fn t_momentum(n: u32, spec: &MomentumSpec) -> Result<f64> {
    check_moment_order(n)?;
    Ok(spec.p0_over_m.powi(n as i32))
}
