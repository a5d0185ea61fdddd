//! Exact integer arithmetic primitives shared by the other modules:
//! Kronecker symbol, trial-division factorization, divisor iteration and
//! the elementary multiplicative functions used by the moment machinery.

use num::rational::Ratio;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("input {0} outside supported range [1, 2^63-1]")]
    OutOfRange(u128),
    #[error("input must be positive, got {0}")]
    NonPositive(i128),
}

/// Kronecker symbol (d/n), defined for all integer pairs.
///
/// Completely multiplicative in `n`; `kronecker(d, 0)` is 1 iff `|d| = 1`.
pub fn kronecker(d: i64, n: i64) -> i64 {
    if n == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut a = d;
    let mut n = n;
    let mut sign = 1i64;
    if n < 0 {
        n = -n;
        if a < 0 {
            sign = -sign;
        }
    }
    // (d/2) via the second supplement, repeated for every factor of 2 in n.
    if n % 2 == 0 {
        if a % 2 == 0 {
            return 0;
        }
        let t = match a.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => unreachable!(),
        };
        while n % 2 == 0 {
            n /= 2;
            sign *= t;
        }
    }
    // Now n is odd and positive: Jacobi symbol with reciprocity.
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            match n.rem_euclid(8) {
                3 | 5 => sign = -sign,
                _ => {}
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a = a.rem_euclid(n);
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

/// Prime factorization certified by trial division.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub n: u64,
    /// (prime, exponent) pairs with strictly increasing primes.
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// Ω(n): number of prime factors counted with multiplicity.
    pub fn omega_big(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }

    pub fn divisor_count(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| (e + 1) as u64).product()
    }

    /// All positive divisors in ascending order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

pub fn factorize(n: u64) -> Result<Factorization, ArithError> {
    if n == 0 || n > i64::MAX as u64 {
        return Err(ArithError::OutOfRange(n as u128));
    }
    let mut m = n;
    let mut factors = Vec::new();
    let mut push = |p: u64, m: &mut u64| {
        let mut e = 0u32;
        while *m % p == 0 {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(2, &mut m);
    push(3, &mut m);
    let mut p = 5u64;
    while p.checked_mul(p).map_or(false, |pp| pp <= m) {
        push(p, &mut m);
        push(p + 2, &mut m);
        p += 6;
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(Factorization { n, factors })
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    factorize(n).map_or(false, |f| f.factors == [(n, 1)])
}

pub fn divisor_count(n: u64) -> Result<u64, ArithError> {
    Ok(factorize(n)?.divisor_count())
}

pub fn divisors(n: u64) -> Result<Vec<u64>, ArithError> {
    Ok(factorize(n)?.divisors())
}

/// Ω(n), the number of prime factors with multiplicity.
pub fn omega_big(n: u64) -> Result<u32, ArithError> {
    Ok(factorize(n)?.omega_big())
}

/// The multiplicative function with ν(p^a) = 1/a!, as an exact rational.
///
/// For n with Ω(n) = k, k!·ν(n) counts the ordered factorizations of n
/// into k primes.
pub fn nu(n: u64) -> Result<Ratio<u64>, ArithError> {
    let f = factorize(n)?;
    let mut val = Ratio::new(1u64, 1u64);
    for &(_, e) in &f.factors {
        let mut fact = 1u64;
        for i in 2..=e as u64 {
            fact *= i;
        }
        val *= Ratio::new(1u64, fact);
    }
    Ok(val)
}

/// Primes up to and including `limit`, by sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut p = 2usize;
    while p * p <= n {
        if sieve[p] {
            let mut q = p * p;
            while q <= n {
                sieve[q] = false;
                q += p;
            }
        }
        p += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| if b { Some(i as u64) } else { None })
        .collect()
}

/// Square root of `a` modulo an odd prime `p` (Tonelli--Shanks).
/// Returns None if `a` is a non-residue.
pub fn sqrt_mod_prime(a: i64, p: u64) -> Option<u64> {
    let a = a.rem_euclid(p as i64) as u64;
    if p == 2 {
        return Some(a % 2);
    }
    if a == 0 {
        return Some(0);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    // Tonelli--Shanks for p ≡ 1 mod 4.
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2u64;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0u32;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let mut b = c;
        for _ in 0..(m - i - 1) {
            b = mul_mod(b, b, p);
        }
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// gcd of two possibly negative integers, always nonnegative.
pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Extended gcd: returns (g, x, y) with a*x + b*y = g = gcd(a, b), g >= 0.
pub fn extended_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            return (-a, -1, 0);
        }
        return (a, 1, 0);
    }
    let (g, x, y) = extended_gcd(b, a % b);
    (g, y, x - (a / b) * y)
}
