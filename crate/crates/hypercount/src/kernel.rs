//! Numeric spectral transforms of radial kernels: the ball transform
//! h_R(t), the mollifier transform h_δ, their product h±, the smoothed
//! geometric counts K±, and the oscillatory approximation H_x(t).

use num_complex::Complex64;
use thiserror::Error;

use crate::count::{count_general, orbit_u_values, CountError};
use crate::heegner::PlanePoint;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("radius must be positive, got {0}")]
    RadiusNotPositive(f64),
    #[error("spectral parameter t = {0} lies outside the strip |Im t| <= 1/2")]
    OutsideStrip(Complex64),
    #[error("mollifier width must satisfy 0 < delta <= 1, got {0}")]
    BadDelta(f64),
    #[error("threshold X = {0} must exceed 4")]
    ThresholdTooSmall(f64),
    #[error("t must be positive, got {0}")]
    TNotPositive(f64),
    #[error(transparent)]
    Count(#[from] CountError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// One evaluation of the ball transform, with a doubled-resolution
/// quadrature error estimate.
#[derive(Debug, Clone, Copy)]
pub struct TransformEval {
    pub r: f64,
    pub t: Complex64,
    pub value: Complex64,
    pub quadrature_error: f64,
}

/// Gauss--Legendre nodes and weights on [-1, 1], by Newton iteration on
/// the Legendre recurrence.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
        if 2 * i <= n {
            out.push((-x, w));
        }
    }
    out
}

/// Composite Gauss--Legendre over [a, b] with `panels` panels of 16 nodes.
fn integrate(a: f64, b: f64, panels: usize, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let rule = gauss_legendre(16);
    let h = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for &(x, w) in &rule {
            total += w * f(mid + 0.5 * h * x);
        }
    }
    total * (0.5 * h)
}

/// The ball transform h_R(t) = 2^{5/2} ∫_0^R √(cosh R − cosh r) cos(rt) dr.
///
/// The endpoint singularity is removed by s = sinh(r/2) followed by
/// s = S·sinφ with S = sinh(R/2), leaving the smooth integrand
/// 16 S² cos²φ · cos(2t·asinh(S sinφ)) / √(1 + S² sin²φ).
pub fn h_r(r: f64, t: Complex64) -> Result<TransformEval, KernelError> {
    if !(r > 0.0) {
        return Err(KernelError::RadiusNotPositive(r));
    }
    if t.im.abs() > 0.5 + 1e-12 {
        return Err(KernelError::OutsideStrip(t));
    }
    let s = (r / 2.0).sinh();
    let integrand = |phi: f64| {
        let sp = phi.sin();
        let arg = 2.0 * t * (s * sp).asinh();
        let c = phi.cos();
        16.0 * s * s * c * c * arg.cos() / (1.0 + s * s * sp * sp).sqrt()
    };
    let panels = (8.0 + 0.5 * (t.norm() + 1.0) * (r + 1.0)).min(4000.0) as usize;
    let coarse = integrate(0.0, std::f64::consts::FRAC_PI_2, panels, integrand);
    let fine = integrate(0.0, std::f64::consts::FRAC_PI_2, 2 * panels, integrand);
    Ok(TransformEval {
        r,
        t,
        value: fine,
        quadrature_error: (fine - coarse).norm(),
    })
}

/// Normalized mollifier transform h_δ(t)/(4π sinh²(δ/2)); equals 1 at
/// t = i/2 (unit mass).
pub fn h_delta(delta: f64, t: Complex64) -> Result<Complex64, KernelError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(KernelError::BadDelta(delta));
    }
    let mass = 4.0 * std::f64::consts::PI * (delta / 2.0).sinh().powi(2);
    Ok(h_r(delta, t)?.value / mass)
}

/// h±(t) = h_{Y±δ}(t) · h_δ(t)/(4π sinh²(δ/2)) with Y = arccosh(X/2).
pub fn h_pm(x: f64, delta: f64, t: Complex64, sign: Sign) -> Result<Complex64, KernelError> {
    if !(x > 4.0) {
        return Err(KernelError::ThresholdTooSmall(x));
    }
    let y = (x / 2.0).acosh();
    let r = y + sign.as_f64() * delta;
    if r <= 0.0 {
        return Err(KernelError::BadDelta(delta));
    }
    Ok(h_r(r, t)?.value * h_delta(delta, t)?)
}

/// k±(u): the convolution (1_{B_{R1}} * k_δ) at center distance ρ with
/// cosh ρ = 1 + 2u — the normalized area of the lens B(·,R1) ∩ B(·,δ).
fn lens_kernel(u: f64, r1: f64, delta: f64) -> f64 {
    let rho = (1.0 + 2.0 * u).acosh();
    if rho + delta <= r1 {
        return 1.0;
    }
    if rho >= r1 + delta {
        return 0.0;
    }
    let mass = 4.0 * std::f64::consts::PI * (delta / 2.0).sinh().powi(2);
    let (ch_rho, sh_rho) = (rho.cosh(), rho.sinh());
    let ch_r1 = r1.cosh();
    let area = integrate(0.0, delta, 24, |r| {
        let cosang = (ch_rho * r.cosh() - ch_r1) / (sh_rho * r.sinh());
        let theta = 2.0 * cosang.clamp(-1.0, 1.0).acos();
        Complex64::new(r.sinh() * theta, 0.0)
    });
    (area.re / mass).clamp(0.0, 1.0)
}

/// Geometric side of the squeeze: K±(X;z,w) = Σ_γ k±(u(z,γw)).
pub fn k_pm_count(
    z: PlanePoint,
    w: PlanePoint,
    x: f64,
    delta: f64,
    sign: Sign,
) -> Result<f64, KernelError> {
    if !(x > 4.0) {
        return Err(KernelError::ThresholdTooSmall(x));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(KernelError::BadDelta(delta));
    }
    let y = (x / 2.0).acosh();
    let r1 = y + sign.as_f64() * delta;
    if r1 <= 0.0 {
        return Err(KernelError::BadDelta(delta));
    }
    // support of k± ends at distance r1 + δ
    let u_max = ((r1 + delta).cosh() - 1.0) / 2.0 + 1e-9;
    let total: f64 = orbit_u_values(z, w, u_max)
        .iter()
        .map(|&u| lens_kernel(u, r1, delta))
        .sum();
    Ok(2.0 * total)
}

/// The oscillatory main-term shape
/// H_x(t) = 2√π e^{±δ/2} t^{−3/2} √x cos(t(log x ± δ) − 3π/4).
pub fn h_x_approx(x: f64, t: f64, delta: f64, sign: Sign) -> Result<f64, KernelError> {
    if !(t > 0.0) {
        return Err(KernelError::TNotPositive(t));
    }
    if !(x >= 4.0) {
        return Err(KernelError::ThresholdTooSmall(x));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(KernelError::BadDelta(delta));
    }
    let s = sign.as_f64();
    let amp = 2.0 * std::f64::consts::PI.sqrt() * (s * delta / 2.0).exp() / t.powf(1.5);
    let phase = t * (x.ln() + s * delta) - 3.0 * std::f64::consts::FRAC_PI_4;
    Ok(amp * x.sqrt() * phase.cos())
}

/// Convenience: the sharp count N(X;z,w) for squeeze comparisons.
pub fn sharp_count(z: PlanePoint, w: PlanePoint, x: f64) -> Result<u64, KernelError> {
    Ok(count_general(z, w, x)?.count)
}
