//! Counting functions: the hyperbolic lattice count N(X;z,w) for the
//! modular group, the exact Heegner-pair counter driven by integer
//! codiscriminants, the quadratic-form counter n_d(x), pair class numbers
//! h(d,d',Δ), and the Hardy--Williams divisor-sum identity.

use num::{BigInt, BigRational, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{extended_gcd, gcd, kronecker};
use crate::heegner::{HeegnerPoint, PlanePoint};
use crate::qforms::{reduce, ClassGroup, Mat2, QformError, QuadForm};

#[derive(Debug, Error, PartialEq)]
pub enum CountError {
    #[error("threshold X = {0} is below 2")]
    ThresholdTooSmall(f64),
    #[error("discriminant -3 is not supported here (nontrivial stabilizer)")]
    DisallowedMinusThree,
    #[error("discriminants must differ, got {0} twice")]
    EqualDiscriminants(i64),
    #[error("gcd(d·d', Δ) must be 1, got d={d}, d'={d0}, Δ={delta}")]
    NotCoprime { d: i64, d0: i64, delta: i64 },
    #[error("Δ² = {0} is smaller than d·d' = {1}")]
    DeltaSquareTooSmall(i64, i64),
    #[error("Δ must be negative, got {0}")]
    DeltaNotNegative(i64),
    #[error("boundary orbit could not be adjudicated at X = {0}")]
    BoundaryTie(f64),
    #[error(transparent)]
    Qform(#[from] QformError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CountMode {
    Float,
    ExactHeegner,
}

/// Result of a counting run. `count` is the number of group elements
/// (γ and −γ counted separately), `main_term` is 6X.
#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub x: f64,
    pub count: u64,
    pub main_term: f64,
    pub error: f64,
    pub mode: CountMode,
}

impl CountReport {
    fn new(x: f64, count: u64, mode: CountMode) -> Self {
        let main_term = 6.0 * x;
        CountReport {
            x,
            count,
            main_term,
            error: count as f64 - main_term,
            mode,
        }
    }
}

/// Relative width of the float fast-path band around the threshold;
/// anything closer is re-adjudicated in exact rational arithmetic.
const NEAR_BOUNDARY_REL: f64 = 1e-9;
/// Inputs are trusted to this relative accuracy: exact margins within
/// the band count as lying on the (closed) boundary.
const SNAP_REL: f64 = 1e-12;

struct ExactCtx {
    zx: BigRational,
    zy: BigRational,
    wx: BigRational,
    wy: BigRational,
    rhs_factor: BigRational, // (X - 2) * zy
    snap: BigRational,
}

fn big(f: f64) -> BigRational {
    BigRational::from_float(f).expect("finite float")
}

impl ExactCtx {
    fn new(z: PlanePoint, w: PlanePoint, x: f64, scale: f64) -> Self {
        ExactCtx {
            zx: big(z.x),
            zy: big(z.y),
            wx: big(w.x),
            wy: big(w.y),
            rhs_factor: (big(x) - big(2.0)) * big(z.y),
            snap: big(SNAP_REL * scale.max(1.0)),
        }
    }

    /// Exact inside/outside decision for γ = T^n·γ0 with γ0 = [[a,b],[c,d]]:
    /// |z − γ0·w − n|² ≤ (X−2)·Im(z)·Im(γ0·w), closed with the snap band.
    fn decide(&self, g0: Mat2, n: i64) -> bool {
        let (a, b, c, d) = (
            BigInt::from(g0[0][0]),
            BigInt::from(g0[0][1]),
            BigInt::from(g0[1][0]),
            BigInt::from(g0[1][1]),
        );
        let cwd = &self.wx * &c + &d; // c·wx + d  (rational)
        let den = &cwd * &cwd + (&self.wy * &self.wy) * (&c * &c);
        let awb = &self.wx * &a + &b;
        let w1x = (&awb * &cwd + (&self.wy * &self.wy) * (&a * &c)) / &den;
        let w1y = &self.wy / &den;
        let dx = &self.zx - &w1x - BigRational::from_integer(BigInt::from(n));
        let dy = &self.zy - &w1y;
        let lhs = &dx * &dx + &dy * &dy;
        let rhs = &self.rhs_factor * &w1y;
        lhs - rhs <= self.snap
    }
}

/// Exact count of {γ ∈ SL2(Z) : 4u(z, γw) + 2 ≤ X} for arbitrary points.
///
/// Bottom rows (c,d) are enumerated up to sign inside the disk
/// |cw + d|² ≤ X·Im(w)/Im(z); for each row the translates T^n·γ0 fill an
/// interval in n whose endpoints are adjudicated exactly when the float
/// margin is within `NEAR_BOUNDARY_REL` of the threshold.
pub fn count_general(z: PlanePoint, w: PlanePoint, x: f64) -> Result<CountReport, CountError> {
    if !(x >= 2.0) {
        return Err(CountError::ThresholdTooSmall(x));
    }
    let r2 = x * w.y / z.y; // row-norm bound
    let c_max = (r2.sqrt() / w.y).floor() as i64 + 1;
    let scale = (x - 2.0) * z.y * w.y + 1.0;
    let ctx = ExactCtx::new(z, w, x, scale);

    let per_c: Vec<u64> = (0..=c_max)
        .into_par_iter()
        .map(|c| {
            let mut local = 0u64;
            if c == 0 {
                local += count_row(z, w, [[1, 0], [0, 1]], x, &ctx);
            } else {
                let s2 = r2 - (c as f64) * (c as f64) * w.y * w.y;
                if s2 < -1e-9 * r2.max(1.0) {
                    return 0;
                }
                let s = s2.max(0.0).sqrt();
                let d_lo = (-(c as f64) * w.x - s).floor() as i64 - 1;
                let d_hi = (-(c as f64) * w.x + s).ceil() as i64 + 1;
                for d in d_lo..=d_hi {
                    if gcd(c, d) != 1 {
                        continue;
                    }
                    // complete the row to det 1: a·d − b·c = 1
                    let (g, a, b) = extended_gcd(d, -c);
                    debug_assert_eq!(g, 1);
                    local += count_row(z, w, [[a, b], [c, d]], x, &ctx);
                }
            }
            local
        })
        .collect();

    let total: u64 = per_c.iter().sum();
    Ok(CountReport::new(x, 2 * total, CountMode::Float))
}

/// Number of n with 4u(z, T^n γ0 w) + 2 ≤ X.
fn count_row(z: PlanePoint, w: PlanePoint, g0: Mat2, x: f64, ctx: &ExactCtx) -> u64 {
    let w1 = w.apply(g0);
    let rhs = (x - 2.0) * z.y * w1.y;
    let tol = NEAR_BOUNDARY_REL * (1.0 + rhs.abs());
    let dy = z.y - w1.y;
    let disc = rhs - dy * dy;
    let center = z.x - w1.x;

    let decide = |n: i64| -> bool {
        let dx = center - n as f64;
        let margin = rhs - (dx * dx + dy * dy);
        if margin.abs() > tol {
            margin > 0.0
        } else {
            ctx.decide(g0, n)
        }
    };

    if disc < -tol {
        return 0;
    }
    let l = disc.max(0.0).sqrt();
    let n_lo = (center - l).ceil() as i64;
    let n_hi = (center + l).floor() as i64;

    if n_hi - n_lo <= 8 {
        let mut count = 0u64;
        for n in (n_lo - 2)..=(n_hi + 2) {
            if decide(n) {
                count += 1;
            }
        }
        return count;
    }
    // Margins grow monotonically toward the center of the interval, so
    // only the ends need individual adjudication.
    let mut lo = n_lo - 2;
    while lo <= n_lo + 2 && !decide(lo) {
        lo += 1;
    }
    let mut hi = n_hi + 2;
    while hi >= n_hi - 2 && !decide(hi) {
        hi -= 1;
    }
    if hi >= lo {
        (hi - lo + 1) as u64
    } else {
        0
    }
}

/// Hyperbolic orbit values u(z, γw) ≤ u_max, one entry per ±γ pair.
/// Used by the smoothed kernels; plain float adjudication.
pub fn orbit_u_values(z: PlanePoint, w: PlanePoint, u_max: f64) -> Vec<f64> {
    let x = 4.0 * u_max + 2.0;
    let r2 = x * w.y / z.y;
    let c_max = (r2.sqrt() / w.y).floor() as i64 + 1;
    let mut out = Vec::new();
    for c in 0..=c_max {
        let rows: Vec<Mat2> = if c == 0 {
            vec![[[1, 0], [0, 1]]]
        } else {
            let s2 = r2 - (c as f64) * (c as f64) * w.y * w.y;
            if s2 < 0.0 {
                continue;
            }
            let s = s2.sqrt();
            let d_lo = (-(c as f64) * w.x - s).floor() as i64 - 1;
            let d_hi = (-(c as f64) * w.x + s).ceil() as i64 + 1;
            (d_lo..=d_hi)
                .filter(|&d| gcd(c, d) == 1)
                .map(|d| {
                    let (_, a, b) = extended_gcd(d, -c);
                    [[a, b], [c, d]]
                })
                .collect()
        };
        for g0 in rows {
            let w1 = w.apply(g0);
            let rhs = 4.0 * u_max * z.y * w1.y;
            let dy = z.y - w1.y;
            let disc = rhs - dy * dy;
            if disc < 0.0 {
                continue;
            }
            let l = disc.sqrt();
            let center = z.x - w1.x;
            let n_lo = (center - l).ceil() as i64;
            let n_hi = (center + l).floor() as i64;
            for n in n_lo..=n_hi {
                let dx = center - n as f64;
                out.push((dx * dx + dy * dy) / (4.0 * z.y * w1.y));
            }
        }
    }
    out
}

/// Enumerate forms q = (a, b, c) of discriminant `d_enum` whose
/// codiscriminant with the fixed form `p` lies in [1, m_max].
fn enumerate_by_codiscriminant(
    p: &QuadForm,
    d_enum: i64,
    m_max: i64,
    mut visit: impl FnMut(QuadForm, i64),
) {
    if m_max <= 0 {
        return;
    }
    // m ≥ sqrt((p.b²−d_p)(b²−d_enum)) − |p.b·b| bounds |b|: solving the
    // quadratic (−d_p)β² − 2·m_max|p.b|β − (m_max² + d_enum(p.b²−d_p)) ≤ 0.
    let dp = p.discriminant() as f64;
    let pb = p.b as f64;
    let mm = m_max as f64;
    let neg_dp = -dp;
    let disc = mm * mm * pb * pb + neg_dp * (mm * mm + (d_enum as f64) * (pb * pb - dp));
    let b_bound = ((mm * pb.abs() + disc.max(0.0).sqrt()) / neg_dp).ceil() as i64 + 2;
    let mut b = -b_bound;
    if b % 2 == 0 {
        b += 1; // d_enum ≡ 1 mod 4 forces b odd
    }
    while b <= b_bound {
        let n = (b as i128 * b as i128 - d_enum as i128) / 4;
        let n = n as i64;
        let mut j = 1i64;
        while j * j <= n {
            if n % j == 0 {
                let pairs: &[(i64, i64)] = if j * j == n {
                    &[(j, j)]
                } else {
                    &[(j, n / j), (n / j, j)]
                };
                for &(a, c) in pairs {
                    let m = 2 * (p.a as i128 * c as i128 + a as i128 * p.c as i128)
                        - p.b as i128 * b as i128;
                    if m >= 1 && m <= m_max as i128 {
                        visit(QuadForm { a, b, c }, m as i64);
                    }
                }
            }
            j += 1;
        }
        b += 2;
    }
}

/// Largest integer m with (2m)² ≤ X²·|d·d0|, i.e. 2m ≤ X√|d·d0|.
fn m_threshold(x: &BigRational, dd0: i64) -> i64 {
    let guess = (x.to_f64().unwrap() * (dd0 as f64).sqrt() / 2.0).floor() as i64;
    let ok = |m: i64| {
        let lhs = BigRational::from_integer(BigInt::from(4) * BigInt::from(m) * BigInt::from(m));
        lhs <= x * x * BigRational::from_integer(BigInt::from(dd0))
    };
    let mut m = guess.max(0);
    while ok(m + 1) {
        m += 1;
    }
    while m > 0 && !ok(m) {
        m -= 1;
    }
    m
}

/// Exact N(X; z_p, z_{p0}) via the codiscriminant criterion
/// 2m ≤ X√|d·d0|, adjudicated in integer/rational arithmetic.
pub fn count_heegner_exact(
    p: &QuadForm,
    p0: &QuadForm,
    x: &BigRational,
) -> Result<CountReport, CountError> {
    let two = BigRational::from_integer(BigInt::from(2));
    if x < &two {
        return Err(CountError::ThresholdTooSmall(x.to_f64().unwrap_or(f64::NAN)));
    }
    if !p.is_positive_definite() {
        return Err(QformError::NotPositiveDefinite(p.a, p.b, p.c).into());
    }
    if !p0.is_positive_definite() {
        return Err(QformError::NotPositiveDefinite(p0.a, p0.b, p0.c).into());
    }
    let d = p.discriminant();
    let d0 = p0.discriminant();
    let m_max = m_threshold(x, d * d0);
    let count = count_heegner_exact_m(p, p0, m_max)?;
    Ok(CountReport {
        mode: CountMode::ExactHeegner,
        ..CountReport::new(x.to_f64().unwrap(), count, CountMode::ExactHeegner)
    })
}

/// Exact count of {γ ∈ SL2(Z) : codiscriminant(p, γ·p0) ≤ m_max}, where
/// γ·p0 runs over the forms of the class of p0.
pub fn count_heegner_exact_m(
    p: &QuadForm,
    p0: &QuadForm,
    m_max: i64,
) -> Result<u64, CountError> {
    let d0 = p0.discriminant();
    let p0_red = reduce(p0)?.0;
    let stab = if d0 == -3 { 3u64 } else { 1u64 };
    let mut n_forms = 0u64;
    enumerate_by_codiscriminant(p, d0, m_max, |q0, _m| {
        if let Ok((red, _)) = reduce(&q0) {
            if red == p0_red {
                n_forms += 1;
            }
        }
    });
    Ok(2 * stab * n_forms)
}

fn validate_fundamental(d: i64) -> Result<(), CountError> {
    ClassGroup::new(d)?;
    Ok(())
}

/// Per-class counter: #{(a,b,c) : a>0, b²−4ac = d, 0 < codisc ≤ x}.
pub fn n_d(p0: &QuadForm, d: i64, x: i64) -> Result<u64, CountError> {
    if d == -3 {
        return Err(CountError::DisallowedMinusThree);
    }
    validate_fundamental(d)?;
    if !p0.is_positive_definite() {
        return Err(QformError::NotPositiveDefinite(p0.a, p0.b, p0.c).into());
    }
    if p0.discriminant() == d {
        return Err(CountError::EqualDiscriminants(d));
    }
    let mut count = 0u64;
    enumerate_by_codiscriminant(p0, d, x, |_q, _m| count += 1);
    Ok(count)
}

/// The SL2(Z) orbit count of pairs of forms with discriminants d, d0 and
/// codiscriminant Δ = b·b0 − 2ac0 − 2ca0 < 0.
#[derive(Debug, Clone)]
pub struct PairClassInstance {
    pub d: i64,
    pub d0: i64,
    pub delta: i64,
    pub representatives: Vec<(QuadForm, QuadForm)>,
}

impl PairClassInstance {
    pub fn h(&self) -> usize {
        self.representatives.len()
    }
}

/// Stabilizer of a form in SL2(Z), by brute force over small entries.
fn form_stabilizer(f: &QuadForm) -> Vec<Mat2> {
    let mut out = Vec::new();
    for e in -2i64..=2 {
        for ff in -2i64..=2 {
            for g in -2i64..=2 {
                for h in -2i64..=2 {
                    if e * h - ff * g != 1 {
                        continue;
                    }
                    let m = [[e, ff], [g, h]];
                    if f.apply(m) == *f {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}

pub fn pair_class_number(d: i64, d0: i64, delta: i64) -> Result<PairClassInstance, CountError> {
    if delta >= 0 {
        return Err(CountError::DeltaNotNegative(delta));
    }
    if d == d0 {
        return Err(CountError::EqualDiscriminants(d));
    }
    validate_fundamental(d)?;
    validate_fundamental(d0)?;
    let dd0 = d * d0;
    if delta * delta < dd0 {
        return Err(CountError::DeltaSquareTooSmall(delta * delta, dd0));
    }
    let m = -delta;
    let group0 = ClassGroup::new(d0)?;
    let mut representatives = Vec::new();
    for q0 in &group0.forms {
        let mut mates = Vec::new();
        enumerate_by_codiscriminant(q0, d, m, |p, mm| {
            if mm == m {
                mates.push(p);
            }
        });
        if d0 == -3 {
            // Residual stabilizer of q0 acts on the mates; keep one per orbit.
            let stab = form_stabilizer(q0);
            let mut canonical: Vec<QuadForm> = mates
                .iter()
                .map(|p| {
                    stab.iter()
                        .map(|g| p.apply(*g))
                        .min_by_key(|q| (q.a, q.b, q.c))
                        .unwrap()
                })
                .collect();
            canonical.sort_by_key(|q| (q.a, q.b, q.c));
            canonical.dedup();
            for p in canonical {
                representatives.push((p, *q0));
            }
        } else {
            for p in mates {
                representatives.push((p, *q0));
            }
        }
    }
    Ok(PairClassInstance {
        d,
        d0,
        delta,
        representatives,
    })
}

/// The Hardy--Williams divisor sum Σ_{e | (Δ²−d·d0)/4} (d/e).
pub fn hardy_williams(d: i64, d0: i64, delta: i64) -> Result<i64, CountError> {
    if gcd(d * d0, delta) != 1 {
        return Err(CountError::NotCoprime { d, d0, delta });
    }
    let dd0 = d * d0;
    if delta * delta < dd0 {
        return Err(CountError::DeltaSquareTooSmall(delta * delta, dd0));
    }
    let n = (delta * delta - dd0) / 4;
    debug_assert_eq!((delta * delta - dd0) % 4, 0);
    let mut sum = 0i64;
    for e in crate::arith::divisors(n as u64).map_err(|_| CountError::DeltaSquareTooSmall(0, 0))? {
        sum += kronecker(d, e as i64);
    }
    Ok(sum)
}

/// Both sides of the pair-class counting identity at threshold x:
/// lhs = Σ_{0<−Δ≤x} h(d,d0,Δ), rhs = Σ over Heegner pairs of ½·N.
pub fn pair_class_identity(d: i64, d0: i64, x: i64) -> Result<(u64, u64), CountError> {
    if d == d0 {
        return Err(CountError::EqualDiscriminants(d));
    }
    if d == -3 || d0 == -3 {
        return Err(CountError::DisallowedMinusThree);
    }
    validate_fundamental(d)?;
    validate_fundamental(d0)?;
    // lhs: enumerate mates of every reduced form of d0 with m ≤ x; the
    // residual stabilizer is trivial for d0 < -3, so each is one orbit.
    let group0 = ClassGroup::new(d0)?;
    let mut lhs = 0u64;
    for q0 in &group0.forms {
        enumerate_by_codiscriminant(q0, d, x, |_p, _m| lhs += 1);
    }
    // rhs: half the exact hyperbolic counts over all Heegner point pairs,
    // enumerated from the other side (forms of discriminant d0).
    let points_d = HeegnerPoint::enumerate(d)?;
    let points_d0 = HeegnerPoint::enumerate(d0)?;
    let mut rhs2 = 0u64; // twice the rhs, to stay integral
    for zp in &points_d {
        for zq in &points_d0 {
            rhs2 += count_heegner_exact_m(&zp.form, &zq.form, x)?;
        }
    }
    debug_assert_eq!(rhs2 % 2, 0);
    Ok((lhs, rhs2 / 2))
}

impl HeegnerPoint {
    fn enumerate(d: i64) -> Result<Vec<HeegnerPoint>, CountError> {
        Ok(crate::heegner::heegner_points(d).map_err(|e| match e {
            crate::heegner::HeegnerError::Qform(q) => CountError::Qform(q),
            crate::heegner::HeegnerError::NotUpperHalfPlane(_, _) => {
                CountError::ThresholdTooSmall(f64::NAN)
            }
        })?)
    }
}

/// Least-squares slope of log(y) against log(x).
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Sample the error E(x) = N(x;z,w) − 6x on a uniform grid over [x0, 2x0].
pub fn error_samples(
    z: PlanePoint,
    w: PlanePoint,
    x0: f64,
    samples: usize,
) -> Result<Vec<(f64, u64, f64)>, CountError> {
    let mut out = Vec::with_capacity(samples);
    for k in 0..samples {
        let x = x0 + x0 * (k as f64 + 0.5) / samples as f64;
        let rep = count_general(z, w, x)?;
        out.push((x, rep.count, rep.error));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn stabilizer_counts() {
        let i = PlanePoint::new(0.0, 1.0).unwrap();
        let rep = count_general(i, i, 2.0).unwrap();
        assert_eq!(rep.count, 4);

        let rho = PlanePoint::new(0.5, (3f64).sqrt() / 2.0).unwrap();
        let rep = count_general(rho, rho, 2.0).unwrap();
        assert_eq!(rep.count, 6);
    }

    #[test]
    fn rejects_small_threshold() {
        let i = PlanePoint::new(0.0, 1.0).unwrap();
        assert!(matches!(
            count_general(i, i, 1.0),
            Err(CountError::ThresholdTooSmall(_))
        ));
        assert!(count_heegner_exact(
            &QuadForm::new(1, 1, 2),
            &QuadForm::new(1, 1, 2),
            &rat(1, 1)
        )
        .is_err());
    }

    #[test]
    fn count_is_monotone_with_even_jumps() {
        let z = HeegnerPoint::new(QuadForm::new(1, 1, 2)).unwrap().point();
        let w = HeegnerPoint::new(QuadForm::new(1, 1, 4)).unwrap().point();
        let mut prev = 0u64;
        for k in 0..60 {
            let x = 2.0 + k as f64 * 1.7;
            let c = count_general(z, w, x).unwrap().count;
            assert!(c >= prev);
            assert_eq!(c % 2, 0);
            prev = c;
        }
    }

    #[test]
    fn heegner_exact_examples() {
        // coincident point, X = 2: only ±I
        let p7 = QuadForm::new(1, 1, 2);
        let rep = count_heegner_exact(&p7, &p7, &rat(2, 1)).unwrap();
        assert_eq!(rep.count, 2);

        // closest orbits between z_{-3} and z_{-7}: threshold m ≤ 5.
        // One form of discriminant -3 at m = 5 times the order-3 stabilizer,
        // or equivalently three forms of discriminant -7 at m = 5:
        // (1,1,2), (2,1,1), (2,3,2). Both directions give N = 6.
        let p3 = QuadForm::new(1, 1, 1);
        assert_eq!(count_heegner_exact_m(&p7, &p3, 5).unwrap(), 2 * 3);
        assert_eq!(count_heegner_exact_m(&p3, &p7, 5).unwrap(), 6);

        // distinct discriminants at X = 2: empty
        let p15 = QuadForm::new(1, 1, 4);
        let rep = count_heegner_exact(&p7, &p15, &rat(2, 1)).unwrap();
        assert_eq!(rep.count, 0);
    }

    #[test]
    fn rho_stabilizer_via_exact_route() {
        // z = w = z_{-3}: X = 2 captures the order-6 stabilizer of ρ.
        let p3 = QuadForm::new(1, 1, 1);
        let rep = count_heegner_exact(&p3, &p3, &rat(2, 1)).unwrap();
        assert_eq!(rep.count, 6);
    }

    #[test]
    fn exact_matches_float_on_heegner_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let ds: Vec<i64> = (-100..=-7i64)
            .filter(|d| ClassGroup::new(*d).is_ok())
            .collect();
        for _ in 0..25 {
            let d = ds[rng.gen_range(0..ds.len())];
            let d0 = ds[rng.gen_range(0..ds.len())];
            let gd = ClassGroup::new(d).unwrap();
            let gd0 = ClassGroup::new(d0).unwrap();
            let p = gd.forms[rng.gen_range(0..gd.forms.len())];
            let p0 = gd0.forms[rng.gen_range(0..gd0.forms.len())];
            let x: f64 = rng.gen_range(2.0..200.0);
            let z = HeegnerPoint::new(p).unwrap().point();
            let w = HeegnerPoint::new(p0).unwrap().point();
            let float = count_general(z, w, x).unwrap().count;
            let exact = count_heegner_exact(&p, &p0, &big(x)).unwrap().count;
            assert_eq!(float, exact, "d={d} d0={d0} x={x}");
        }
    }

    #[test]
    fn n_d_rejects_bad_inputs() {
        let p0 = QuadForm::new(1, 1, 2);
        assert!(matches!(
            n_d(&p0, -3, 100),
            Err(CountError::DisallowedMinusThree)
        ));
        assert!(matches!(
            n_d(&p0, -7, 100),
            Err(CountError::EqualDiscriminants(-7))
        ));
    }

    #[test]
    fn n_d_small_threshold_is_zero() {
        let p0 = QuadForm::new(1, 1, 1);
        assert_eq!(n_d(&p0, -7, 3).unwrap(), 0);
    }

    #[test]
    fn n_d_matches_heegner_exact_sum() {
        // n_d(x) = ½ Σ over Heegner points of discriminant d of N with m ≤ x
        for (d, d0_form) in [
            (-7i64, QuadForm::new(1, 1, 1)),
            (-15, QuadForm::new(1, 1, 2)),
            (-23, QuadForm::new(1, 1, 4)),
        ] {
            for x in [5i64, 50, 500] {
                let direct = n_d(&d0_form, d, x).unwrap();
                let mut via_orbits = 0u64;
                for zp in crate::heegner::heegner_points(d).unwrap() {
                    via_orbits += count_heegner_exact_m(&d0_form, &zp.form, x).unwrap();
                }
                assert_eq!(2 * direct, via_orbits, "d={d} x={x}");
            }
        }
    }

    #[test]
    fn pair_class_examples() {
        let inst = pair_class_number(-7, -3, -5).unwrap();
        assert_eq!(inst.h(), 1);

        assert!(matches!(
            pair_class_number(-7, -3, -1),
            Err(CountError::DeltaSquareTooSmall(1, 21))
        ));
    }

    #[test]
    fn hardy_williams_examples() {
        assert_eq!(hardy_williams(-7, -3, -5).unwrap(), 1);
        assert!(matches!(
            hardy_williams(-7, -3, -1),
            Err(CountError::DeltaSquareTooSmall(1, 21))
        ));
        // Σ_{e|25} (−7/e) = 1 − 1 + 1 = 1
        assert_eq!(hardy_williams(-7, -3, -11).unwrap(), 1);
        assert!(matches!(
            hardy_williams(-7, -3, -7),
            Err(CountError::NotCoprime { .. })
        ));
    }

    #[test]
    fn hardy_williams_matches_orbit_count() {
        for (d, d0) in [(-7i64, -15i64), (-7, -23), (-15, -23)] {
            for m in 1..=200i64 {
                let delta = -m;
                if delta * delta < d * d0 {
                    continue;
                }
                if (delta * delta - d * d0) % 4 != 0 {
                    continue;
                }
                if gcd(d * d0, delta) != 1 {
                    continue;
                }
                let orbits = pair_class_number(d, d0, delta).unwrap().h() as i64;
                let hw = hardy_williams(d, d0, delta).unwrap();
                assert!(hw >= 0, "d={d} d0={d0} delta={delta}");
                if orbits != 0 {
                    assert_eq!(hw, orbits, "d={d} d0={d0} delta={delta}");
                }
            }
        }
    }

    #[test]
    fn pair_class_identity_exact() {
        for x in [1i64, 10, 50, 200] {
            let (lhs, rhs) = pair_class_identity(-7, -15, x).unwrap();
            assert_eq!(lhs, rhs, "x={x}");
        }
        let (lhs, rhs) = pair_class_identity(-7, -15, 4).unwrap();
        assert_eq!((lhs, rhs), (0, 0)); // below the minimal codiscriminant
    }

    #[test]
    fn pair_class_identity_main_term() {
        let (d, d0, x) = (-7i64, -15i64, 10_000i64);
        let (lhs, rhs) = pair_class_identity(d, d0, x).unwrap();
        assert_eq!(lhs, rhs);
        let predicted = 6.0 * 1.0 * 2.0 / ((d * d0) as f64).sqrt() * x as f64;
        let ratio = lhs as f64 / predicted;
        assert!((ratio - 1.0).abs() < 0.10, "ratio={ratio}");
    }
}
