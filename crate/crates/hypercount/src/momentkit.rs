//! Exact combinatorics behind the moment method: Chebyshev-type power
//! expansion coefficients h_a(c), the multiplicative g_ξ values, the
//! multinomial expansion identity, the iterated interval schedule, the
//! character orthogonality sums, exponent tables, and the two elementary
//! inequalities used by the mollifier argument.

use std::collections::HashMap;

use num::rational::Ratio;
use rand::Rng;
use thiserror::Error;

use crate::arith::{is_prime, primes_up_to};
use crate::qforms::{genus_characters, ClassCharacter};
use crate::theta::lambda_prime;

#[derive(Debug, Error, PartialEq)]
pub enum MomentError {
    #[error("coefficient index c = {c} exceeds the power a = {a}")]
    IndexTooLarge { c: u32, a: u32 },
    #[error("schedule is degenerate: N_1 = {0} does not exceed C1² = {1}")]
    DegenerateSchedule(u64, f64),
    #[error("expansion would need {0} terms, over the 10^6 cap")]
    TermOverflow(usize),
    #[error("characters live on the same discriminant {0}")]
    SameDiscriminant(i64),
    #[error("eigenvalue {0} outside the Ramanujan box [-2, 2]")]
    EigenvalueOutOfRange(f64),
    #[error("{0} is not prime")]
    NotPrime(u64),
}

/// Coefficients of λ(p)^a in the Hecke basis: λ(p)^a = Σ_c h_a(c) λ(p^c),
/// from the recurrence λ(p)λ(p^c) = λ(p^{c+1}) + λ(p^{c−1}).
pub fn h_coeffs(a: u32) -> Vec<u64> {
    let mut coeffs = vec![1u64];
    for _ in 0..a {
        let mut next = vec![0u64; coeffs.len() + 1];
        for (c, &v) in coeffs.iter().enumerate() {
            next[c + 1] += v;
            if c > 0 {
                next[c - 1] += v;
            }
        }
        // multiplying λ(p^0) by λ(p) gives λ(p^1) only
        coeffs = next;
    }
    coeffs
}

pub fn h_coeff(a: u32, c: u32) -> Result<u64, MomentError> {
    if c > a {
        return Err(MomentError::IndexTooLarge { c, a });
    }
    Ok(h_coeffs(a)[c as usize])
}

/// The same coefficient by the orthogonality integral
/// (2/π) ∫_0^π (2cosθ)^a sin((c+1)θ) sinθ dθ.
pub fn h_coeff_quadrature(a: u32, c: u32) -> Result<f64, MomentError> {
    if c > a {
        return Err(MomentError::IndexTooLarge { c, a });
    }
    // The integrand is an even trig polynomial of degree ≤ a + c + 2, so
    // the full-period trapezoid rule with more points than the degree is
    // exact up to rounding: ∫_0^π = ½ ∫_0^{2π}.
    let m = (a + c + 8) as usize * 2;
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let f = |theta: f64| {
        (2.0 * theta.cos()).powi(a as i32) * ((c as f64 + 1.0) * theta).sin() * theta.sin()
    };
    let sum: f64 = (0..m).map(|j| f(j as f64 * h)).sum();
    Ok(sum * h / std::f64::consts::PI)
}

/// λ_ξ(p^c) for c = 0..=a via the Hecke recurrence at p.
fn lambda_prime_powers(xi: &ClassCharacter, p: u64, a: u32) -> Vec<f64> {
    let chi = crate::arith::kronecker(xi.group.d, p as i64) as f64;
    let mut v = Vec::with_capacity(a as usize + 1);
    v.push(1.0);
    if a >= 1 {
        v.push(lambda_prime(xi, p));
    }
    for c in 2..=a as usize {
        let next = v[1] * v[c - 1] - chi * v[c - 2];
        v.push(next);
    }
    v
}

/// g_ξ(p^a) = Σ_{c=0}^a h_a(c) p^{−c/2} λ_ξ(p^c).
pub fn g_xi(xi: &ClassCharacter, p: u64, a: u32) -> Result<f64, MomentError> {
    if !is_prime(p) {
        return Err(MomentError::NotPrime(p));
    }
    let h = h_coeffs(a);
    let lam = lambda_prime_powers(xi, p, a);
    let mut sum = 0.0;
    for c in 0..=a as usize {
        sum += h[c] as f64 * lam[c] / (p as f64).powf(c as f64 / 2.0);
    }
    Ok(sum)
}

/// Free eigenvalue symbols λ(p) with |λ(p)| ≤ 2.
#[derive(Debug, Clone, Default)]
pub struct SymbolicEigenvalues {
    values: HashMap<u64, f64>,
}

impl SymbolicEigenvalues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, p: u64, v: f64) -> Result<(), MomentError> {
        if !is_prime(p) {
            return Err(MomentError::NotPrime(p));
        }
        if v.abs() > 2.0 {
            return Err(MomentError::EigenvalueOutOfRange(v));
        }
        self.values.insert(p, v);
        Ok(())
    }

    pub fn get(&self, p: u64) -> f64 {
        *self.values.get(&p).unwrap_or(&0.0)
    }

    pub fn random(primes: &[u64], rng: &mut impl Rng) -> Self {
        let mut s = Self::new();
        for &p in primes {
            s.set(p, rng.gen_range(-2.0..=2.0)).unwrap();
        }
        s
    }
}

/// Verifies (Σ_{p∈I} b(p)λ(p)/√p)^k = k! Σ_{Ω(n)=k} b(n)ν(n)ℓ(n)/√n,
/// with b, ν, ℓ extended multiplicatively (ν(p^a) = 1/a!, ℓ(p^a) = λ(p)^a).
/// Returns (lhs, rhs).
pub fn p_expand_identity(
    interval: (u64, u64),
    b: &HashMap<u64, f64>,
    lam: &SymbolicEigenvalues,
    k: u32,
) -> Result<(f64, f64), MomentError> {
    let primes: Vec<u64> = primes_up_to(interval.1)
        .into_iter()
        .filter(|&p| p > interval.0)
        .collect();
    let terms = binomial(primes.len() as u64 + k as u64 - 1, k as u64);
    if terms > 1_000_000 {
        return Err(MomentError::TermOverflow(terms as usize));
    }
    let lhs_base: f64 = primes
        .iter()
        .map(|&p| b.get(&p).copied().unwrap_or(0.0) * lam.get(p) / (p as f64).sqrt())
        .sum();
    let lhs = lhs_base.powi(k as i32);

    // multisets of k primes, as exponent patterns
    let kf: f64 = (1..=k as u64).map(|i| i as f64).product();
    let mut rhs = 0.0;
    let mut stack: Vec<(usize, u32, f64)> = vec![(0, k, 1.0)];
    while let Some((idx, rem, acc)) = stack.pop() {
        if rem == 0 {
            rhs += acc;
            continue;
        }
        if idx >= primes.len() {
            continue;
        }
        let p = primes[idx];
        let bp = b.get(&p).copied().unwrap_or(0.0);
        let lp = lam.get(p);
        let mut factor = 1.0;
        for a in 0..=rem {
            stack.push((idx + 1, rem - a, acc * factor));
            if a < rem {
                factor *= bp * lp / (p as f64).sqrt() / (a as f64 + 1.0);
            }
        }
    }
    Ok((lhs, kf * rhs))
}

fn binomial(n: u64, k: u64) -> u64 {
    let mut r: u64 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// The iterated interval decomposition. Everything involving the size T
/// is carried in log space: desk-scale T values overflow f64.
#[derive(Debug, Clone)]
pub struct IntervalSchedule {
    pub ln_t: f64,
    pub c1: f64,
    /// N_1 > N_2 > ... > N_R, each > C1²
    pub n: Vec<u64>,
    /// ln x_r = ln T / N_r²
    pub ln_x: Vec<f64>,
    /// half-open intervals (ln lo, ln hi]; the first starts at ln 2^14
    pub ln_intervals: Vec<(f64, f64)>,
}

impl IntervalSchedule {
    pub fn r(&self) -> usize {
        self.n.len()
    }
}

pub fn schedule_ln(ln_t: f64, c1: f64) -> Result<IntervalSchedule, MomentError> {
    let c1_sq = c1 * c1;
    let n1 = 2 * (c1 * ln_t.ln()).ceil() as u64;
    if (n1 as f64) <= c1_sq {
        return Err(MomentError::DegenerateSchedule(n1, c1_sq));
    }
    let mut n = vec![n1];
    loop {
        let prev = *n.last().unwrap();
        let next = 2 * (c1 * (prev as f64).ln()).ceil() as u64;
        // strictly decreasing and above C1²; at desk scale the recursion
        // can hit its fixed point before crossing C1², so both cuts apply
        if next >= prev || (next as f64) <= c1_sq {
            break;
        }
        n.push(next);
    }
    let ln_x: Vec<f64> = n.iter().map(|&nr| ln_t / (nr * nr) as f64).collect();
    let mut ln_intervals = Vec::with_capacity(n.len());
    let mut lo = (2f64).ln() * 14.0;
    for &hi in &ln_x {
        ln_intervals.push((lo, hi));
        lo = hi;
    }
    let sched = IntervalSchedule {
        ln_t,
        c1,
        n,
        ln_x,
        ln_intervals,
    };
    // construction invariants
    let recip: f64 = sched.n.iter().map(|&nr| 1.0 / nr as f64).sum();
    debug_assert!(recip < 1.0 / c1);
    debug_assert!((*sched.n.last().unwrap() as f64) <= c1.exp() || c1 > 700.0);
    Ok(sched)
}

pub fn schedule(t: f64, c1: f64) -> Result<IntervalSchedule, MomentError> {
    schedule_ln(t.ln(), c1)
}

#[derive(Debug, Clone)]
pub struct OrthogonalityReport {
    pub x: f64,
    pub sum: f64,
    pub predicted_b: f64,
    pub drift: f64,
}

/// The genus factorization (d1, d2) of a character if its values match a
/// genus character of its group; trivial characters give (1, d).
pub fn genus_factorization(xi: &ClassCharacter) -> Option<(i64, i64)> {
    let norm = |d1: i64, d2: i64| if d1 <= d2 { (d1, d2) } else { (d2, d1) };
    if let crate::qforms::CharKind::Genus { d1, d2 } = xi.kind {
        return Some(norm(d1, d2));
    }
    if !xi.is_real() {
        return None;
    }
    for g in genus_characters(&xi.group) {
        if (0..xi.group.h()).all(|i| xi.phase_on_class(i) == g.phase_on_class(i)) {
            if let crate::qforms::CharKind::Genus { d1, d2 } = g.kind {
                return Some(norm(d1, d2));
            }
        }
    }
    None
}

fn same_character(a: &ClassCharacter, b: &ClassCharacter) -> bool {
    if a.group.d != b.group.d {
        return false;
    }
    let h = a.group.h();
    let direct = (0..h).all(|i| a.phase_on_class(i) == b.phase_on_class(i));
    let conj = (0..h).all(|i| {
        let (pa, pb) = (a.phase_on_class(i), b.phase_on_class(i));
        (pa + pb).fract() == Ratio::new(0, 1)
    });
    direct || conj
}

/// The coefficient B in the log log x main term of Σ_p λ_ξ(p)λ_ξ′(p)/p:
/// 2 for a character paired with itself when genus, 1 when non-genus, and
/// the number of shared discriminant factors for genus pairs across
/// distinct fields; 0 otherwise.
pub fn predicted_b(xi: &ClassCharacter, xi2: &ClassCharacter) -> f64 {
    let (f1, f2) = (genus_factorization(xi), genus_factorization(xi2));
    if same_character(xi, xi2) {
        return if f1.is_some() { 2.0 } else { 1.0 };
    }
    if xi.group.d == xi2.group.d {
        // distinct characters of one group are orthogonal
        return 0.0;
    }
    match (f1, f2) {
        (Some((a1, a2)), Some((b1, b2))) => {
            let mut b = 0.0;
            let mut used = [false; 2];
            for v in [a1, a2] {
                for (slot, w) in [b1, b2].iter().enumerate() {
                    if !used[slot] && v == *w {
                        used[slot] = true;
                        b += 1.0;
                        break;
                    }
                }
            }
            b
        }
        _ => 0.0,
    }
}

/// Σ_{p ≤ x} λ_ξ(p) λ_ξ′(p) / p, with the drift against the predicted
/// B·log log x main term.
pub fn orthogonality_sum(xi: &ClassCharacter, xi2: &ClassCharacter, x: f64) -> OrthogonalityReport {
    if x < 2.0 {
        return OrthogonalityReport {
            x,
            sum: 0.0,
            predicted_b: predicted_b(xi, xi2),
            drift: 0.0,
        };
    }
    let mut sum = 0.0;
    for p in primes_up_to(x as u64) {
        sum += lambda_prime(xi, p) * lambda_prime(xi2, p) / p as f64;
    }
    let b = predicted_b(xi, xi2);
    OrthogonalityReport {
        x,
        sum,
        predicted_b: b,
        drift: sum - b * x.ln().ln(),
    }
}

/// The (η, θ) exponent pair of a character pair over distinct
/// discriminants, per the genus/non-genus case tables.
pub fn exponent_tables(
    xi: &ClassCharacter,
    xi2: &ClassCharacter,
) -> Result<(Ratio<i64>, Ratio<i64>), MomentError> {
    if xi.group.d == xi2.group.d {
        return Err(MomentError::SameDiscriminant(xi.group.d));
    }
    let g1 = genus_factorization(xi).is_some();
    let g2 = genus_factorization(xi2).is_some();
    let (eta, theta) = match (g1, g2) {
        (false, false) => (Ratio::new(1, 4), Ratio::new(1, 4)),
        (true, false) => (Ratio::new(5, 8), Ratio::new(3, 8)),
        (false, true) => (Ratio::new(1, 8), Ratio::new(3, 8)),
        (true, true) => {
            let b = predicted_b(xi, xi2) as i64;
            let v = Ratio::new(1, 2) - Ratio::new(b, 4);
            (v, v)
        }
    };
    assert!(theta >= Ratio::new(1, 4), "theta {theta} below 1/4");
    Ok((eta, theta))
}

#[derive(Debug, Clone)]
pub struct ElementaryReport {
    pub draws: u64,
    pub violations: u64,
    pub min_slack: f64,
}

/// Randomized property check of the two elementary inequalities:
/// 2√(LL′) ≤ LM/M′ + L′M′/M, and for even N ≥ 2 and t ≤ N/e²,
/// e^t ≤ (1 + e^{−N}/16) Σ_{k≤N} t^k/k!.
pub fn elementary_inequalities(draws: u64, rng: &mut impl Rng) -> ElementaryReport {
    let mut violations = 0u64;
    let mut min_slack = f64::INFINITY;
    for _ in 0..draws {
        let l: f64 = rng.gen_range(0.0..100.0);
        let l2: f64 = rng.gen_range(0.0..100.0);
        let m: f64 = rng.gen_range(0.01..100.0);
        let m2: f64 = rng.gen_range(0.01..100.0);
        let slack = l * m / m2 + l2 * m2 / m - 2.0 * (l * l2).sqrt();
        if slack < -1e-9 * (1.0 + l + l2) {
            violations += 1;
        }
        min_slack = min_slack.min(slack);

        let n = 2 * rng.gen_range(1..=10u32);
        let t_max = n as f64 / std::f64::consts::E.powi(2);
        let t: f64 = rng.gen_range(-(n as f64)..=t_max);
        let mut partial = 1.0;
        let mut term = 1.0;
        for k in 1..=n {
            term *= t / k as f64;
            partial += term;
        }
        let bound = (1.0 + (-(n as f64)).exp() / 16.0) * partial;
        let slack2 = bound - t.exp();
        if slack2 < -1e-12 * bound.abs() {
            violations += 1;
        }
        min_slack = min_slack.min(slack2);
    }
    ElementaryReport {
        draws,
        violations,
        min_slack,
    }
}

#[derive(Debug, Clone)]
pub struct MertensRow {
    pub r: usize,
    pub lo: f64,
    pub hi: f64,
    pub sum: f64,
    pub predicted: f64,
    pub drift: f64,
}

/// Σ_{p ∈ I_r} 1/p against log(log x_r / log x_{r−1}), for the intervals
/// whose upper end fits below `cap` (desk-scale enumerability).
pub fn mertens_window(sched: &IntervalSchedule, cap: f64) -> Vec<MertensRow> {
    let ln_cap = cap.ln();
    let mut rows = Vec::new();
    for (r, &(ln_lo, ln_hi)) in sched.ln_intervals.iter().enumerate() {
        if ln_hi > ln_cap || ln_hi <= ln_lo {
            continue;
        }
        let (lo, hi) = (ln_lo.exp(), ln_hi.exp());
        let mut sum = 0.0;
        for p in primes_up_to(hi as u64) {
            if (p as f64) > lo {
                sum += 1.0 / p as f64;
            }
        }
        let predicted = (ln_hi / ln_lo).ln();
        rows.push(MertensRow {
            r: r + 1,
            lo,
            hi,
            sum,
            predicted,
            drift: sum - predicted,
        });
    }
    rows
}
