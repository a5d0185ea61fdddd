//! Theta-series coefficients λ_ξ(n): exact enumeration of ideals of norm n
//! through the (n, b) parametrization, a fast multiplicative table, and the
//! Kronecker-factorization / Hecke-relation cross-checks.

use num::rational::Ratio;
use num_complex::Complex64;
use thiserror::Error;

use crate::arith::{gcd, kronecker, sqrt_mod_prime};
use crate::qforms::{ClassCharacter, QformError, QuadForm};

#[derive(Debug, Error, PartialEq)]
pub enum ThetaError {
    #[error("d1·d2 = {0} does not factor d = {1}")]
    BadFactorization(i64, i64),
    #[error("truncation N = {0} exceeds the supported range {1}")]
    TruncationTooLarge(u64, u64),
    #[error(transparent)]
    Qform(#[from] QformError),
}

/// λ_ξ(n) by direct enumeration. Primitive ideals of norm n correspond to
/// residues b mod 2n with b² ≡ d mod 4n, with class that of the form
/// (n, b, (b²−d)/(4n)); a general ideal is g·(primitive) with g² | n and
/// the same class, so the primitive counts are summed over g.
pub fn lambda(xi: &ClassCharacter, n: u64) -> f64 {
    assert!(n >= 1, "lambda needs n >= 1");
    let mut total = Complex64::new(0.0, 0.0);
    let mut g = 1u64;
    while g * g <= n {
        if n % (g * g) == 0 {
            total += lambda_primitive(xi, n / (g * g));
        }
        g += 1;
    }
    debug_assert!(total.im.abs() < 1e-9 * (1.0 + total.re.abs()));
    total.re
}

fn lambda_primitive(xi: &ClassCharacter, n: u64) -> Complex64 {
    let d = xi.group.d;
    let n = n as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    for b in (1 - n)..=n {
        let num = b as i128 * b as i128 - d as i128;
        if num % (4 * n as i128) != 0 {
            continue;
        }
        let c = (num / (4 * n as i128)) as i64;
        let f = QuadForm::new(n, b, c);
        sum += xi.value(&f).expect("form has the group's discriminant");
    }
    sum
}

/// λ_ξ(p) at a prime without scanning residues: ramified primes give a
/// single ideal, split primes a conjugate pair found by a square root of
/// d mod p, inert primes give 0.
pub fn lambda_prime(xi: &ClassCharacter, p: u64) -> f64 {
    let d = xi.group.d;
    if p == 2 {
        // d is odd; 2 splits iff d ≡ 1 mod 8
        if d.rem_euclid(8) != 1 {
            return 0.0;
        }
        let c = (1 - d) / 8;
        let v = xi.value(&QuadForm::new(2, 1, c)).unwrap()
            + xi.value(&QuadForm::new(2, -1, c)).unwrap();
        return v.re;
    }
    let pi = p as i64;
    if d % pi == 0 {
        let c = (pi * pi - d) / (4 * pi);
        return xi.value(&QuadForm::new(pi, pi, c)).unwrap().re;
    }
    match sqrt_mod_prime(d.rem_euclid(pi), p) {
        None => 0.0,
        Some(r) => {
            let b = if r % 2 == 1 { r as i64 } else { r as i64 + pi };
            let c = ((b as i128 * b as i128 - d as i128) / (4 * pi as i128)) as i64;
            2.0 * xi.value(&QuadForm::new(pi, b, c)).unwrap().re
        }
    }
}

const TABLE_LIMIT: u64 = 100_000_000;

/// λ_ξ(0..=N): prime values via `lambda_prime`, prime powers via the Hecke
/// recurrence λ(p^{a+1}) = λ(p)λ(p^a) − χ_d(p)λ(p^{a−1}), the rest by
/// multiplicativity over a smallest-prime-factor sieve.
pub fn lambda_table(xi: &ClassCharacter, n_max: u64) -> Result<Vec<f64>, ThetaError> {
    if n_max > TABLE_LIMIT {
        return Err(ThetaError::TruncationTooLarge(n_max, TABLE_LIMIT));
    }
    let n = n_max as usize;
    let d = xi.group.d;
    let mut spf = vec![0u32; n + 1];
    for p in 2..=n {
        if spf[p] == 0 {
            let mut k = p;
            while k <= n {
                if spf[k] == 0 {
                    spf[k] = p as u32;
                }
                k += p;
            }
        }
    }
    let mut lam = vec![0.0f64; n + 1];
    if n >= 1 {
        lam[1] = 1.0;
    }
    lam[0] = lambda_zero(xi).to_f64();
    for k in 2..=n {
        let p = spf[k] as usize;
        let mut m = k;
        let mut pa = 1usize;
        while m % p == 0 {
            m /= p;
            pa *= p;
        }
        lam[k] = if m > 1 {
            lam[pa] * lam[m]
        } else if pa == p {
            lambda_prime(xi, p as u64)
        } else {
            let chi = kronecker(d, p as i64) as f64;
            lam[p] * lam[k / p] - chi * lam[k / (p * p)]
        };
    }
    Ok(lam)
}

/// The constant term of the theta series: h(d)/|O_K^*| for the trivial
/// character, 0 otherwise.
pub fn lambda_zero(xi: &ClassCharacter) -> Ratio<i64> {
    if !xi.is_trivial() {
        return Ratio::new(0, 1);
    }
    let units = if xi.group.d == -3 { 6 } else { 2 };
    Ratio::new(xi.group.h() as i64, units)
}

trait ToF64 {
    fn to_f64(&self) -> f64;
}
impl ToF64 for Ratio<i64> {
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// Outcome of a coefficient cross-check; `first_mismatch` carries
/// (n, computed, expected).
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub checked: u64,
    pub first_mismatch: Option<(u64, f64, f64)>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

/// λ_{Genus(d1,d2)}(n) = Σ_{m|n} (d1/m)(d2/(n/m)) for all n ≤ n_max.
pub fn check_kronecker_factorization(
    xi: &ClassCharacter,
    d1: i64,
    d2: i64,
    n_max: u64,
) -> Result<CheckReport, ThetaError> {
    if d1 * d2 != xi.group.d {
        return Err(ThetaError::BadFactorization(d1 * d2, xi.group.d));
    }
    let lam = lambda_table(xi, n_max)?;
    let n = n_max as usize;
    let mut conv = vec![0i64; n + 1];
    for m in 1..=n {
        let k1 = kronecker(d1, m as i64);
        if k1 == 0 {
            continue;
        }
        let mut q = m;
        let mut j = 1usize;
        while q <= n {
            conv[q] += k1 * kronecker(d2, j as i64);
            q += m;
            j += 1;
        }
    }
    for k in 1..=n {
        if (lam[k] - conv[k] as f64).abs() > 1e-9 {
            return Ok(CheckReport {
                checked: n_max,
                first_mismatch: Some((k as u64, lam[k], conv[k] as f64)),
            });
        }
    }
    Ok(CheckReport {
        checked: n_max,
        first_mismatch: None,
    })
}

/// λ(m)λ(n) = Σ_{e|(m,n)} χ_d(e) λ(mn/e²) for all m, n ≤ √N.
pub fn check_hecke_relations(xi: &ClassCharacter, n_max: u64) -> Result<CheckReport, ThetaError> {
    if n_max > 10_000 {
        return Err(ThetaError::TruncationTooLarge(n_max, 10_000));
    }
    let root = (n_max as f64).sqrt() as u64;
    let lam = lambda_table(xi, root * root)?;
    let d = xi.group.d;
    for m in 1..=root {
        for n in 1..=root {
            let lhs = lam[m as usize] * lam[n as usize];
            let mut rhs = 0.0;
            let g = gcd(m as i64, n as i64) as u64;
            for e in 1..=g {
                if g % e == 0 {
                    rhs += kronecker(d, e as i64) as f64 * lam[(m * n / (e * e)) as usize];
                }
            }
            if (lhs - rhs).abs() > 1e-9 {
                return Ok(CheckReport {
                    checked: n_max,
                    first_mismatch: Some((m * n, lhs, rhs)),
                });
            }
        }
    }
    Ok(CheckReport {
        checked: n_max,
        first_mismatch: None,
    })
}
