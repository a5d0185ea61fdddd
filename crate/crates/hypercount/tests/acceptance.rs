//! Acceptance gate: one test per criterion, each printing a pass/fail
//! line. Run with `cargo test --test acceptance -- --nocapture` to see
//! the lines even on success.

use std::sync::Arc;
use std::time::Instant;

use num::BigRational;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hypercount::arith::divisor_count;
use hypercount::count::{
    count_general, count_heegner_exact, error_samples, fit_loglog_slope, hardy_williams,
    pair_class_number, pair_class_identity,
};
use hypercount::heegner::{HeegnerPoint, PlanePoint};
use hypercount::kernel::{h_pm, h_r, k_pm_count, Sign};
use hypercount::momentkit::{
    exponent_tables, h_coeff, p_expand_identity, SymbolicEigenvalues,
};
use hypercount::qforms::{characters, genus_characters, CharKind, ClassGroup};
use hypercount::theta::{check_kronecker_factorization, lambda_table};

struct Criterion {
    id: u32,
    label: &'static str,
    start: Instant,
}

impl Criterion {
    fn begin(id: u32, label: &'static str) -> Self {
        Criterion {
            id,
            label,
            start: Instant::now(),
        }
    }

    fn check(&self, ok: bool, detail: &str) {
        let ms = self.start.elapsed().as_millis();
        if ok {
            println!("[PASS] criterion {:02}: {} ({} ms)", self.id, self.label, ms);
        } else {
            println!(
                "[FAIL] criterion {:02}: {} — {} ({} ms)",
                self.id, self.label, detail, ms
            );
            panic!("criterion {:02} failed: {}", self.id, detail);
        }
    }
}

fn squarefree_discriminants(lo: i64) -> Vec<i64> {
    (lo..=-3)
        .filter(|&d| d.rem_euclid(4) == 1 && ClassGroup::new(d).is_ok())
        .collect()
}

#[test]
fn criterion_01_stabilizer_counts() {
    let c = Criterion::begin(1, "stabilizer counts at X = 2");
    let i = PlanePoint::new(0.0, 1.0).unwrap();
    let rho = PlanePoint::new(0.5, 3f64.sqrt() / 2.0).unwrap();
    let n_i = count_general(i, i, 2.0).unwrap().count;
    let n_rho = count_general(rho, rho, 2.0).unwrap().count;
    c.check(
        n_i == 4 && n_rho == 6,
        &format!("N(2;i,i) = {n_i}, N(2;ρ,ρ) = {n_rho}"),
    );
}

#[test]
fn criterion_02_exact_float_agreement() {
    let c = Criterion::begin(2, "exact = float on 100 random Heegner pairs");
    let mut rng = ChaCha8Rng::seed_from_u64(20240823);
    let ds = squarefree_discriminants(-100);
    let mut mismatches = 0usize;
    for _ in 0..100 {
        let d = ds[rng.gen_range(0..ds.len())];
        let d0 = ds[rng.gen_range(0..ds.len())];
        let g = ClassGroup::new(d).unwrap();
        let g0 = ClassGroup::new(d0).unwrap();
        let p = g.forms[rng.gen_range(0..g.forms.len())];
        let p0 = g0.forms[rng.gen_range(0..g0.forms.len())];
        let x: f64 = rng.gen_range(2.0..=1000.0);
        let z = HeegnerPoint::new(p).unwrap().point();
        let w = HeegnerPoint::new(p0).unwrap().point();
        let float = count_general(z, w, x).unwrap().count;
        let exact = count_heegner_exact(&p, &p0, &BigRational::from_float(x).unwrap())
            .unwrap()
            .count;
        if float != exact {
            eprintln!("mismatch: d={d} d0={d0} x={x}: float {float} exact {exact}");
            mismatches += 1;
        }
    }
    c.check(mismatches == 0, &format!("{mismatches} mismatches"));
}

#[test]
fn criterion_03_leading_constant() {
    let c = Criterion::begin(3, "N(X)/X near 6 at X = 1e5");
    let z = HeegnerPoint::new(hypercount::QuadForm::new(1, 1, 2))
        .unwrap()
        .point();
    let w = HeegnerPoint::new(hypercount::QuadForm::new(1, 1, 4))
        .unwrap()
        .point();
    let x = 1e5;
    let n = count_general(z, w, x).unwrap().count as f64;
    let dev = (n / x - 6.0).abs();
    c.check(dev <= 0.15, &format!("|N/X - 6| = {dev:.4}"));
}

#[test]
fn criterion_04_pair_class_identity() {
    let c = Criterion::begin(4, "pair-class sum equals half the orbit counts, exactly");
    let mut worst = String::new();
    let mut ok = true;
    for x in [1i64, 5, 21, 100, 397, 1000] {
        let (lhs, rhs) = pair_class_identity(-7, -15, x).unwrap();
        if lhs != rhs {
            ok = false;
            worst = format!("x={x}: {lhs} != {rhs}");
            break;
        }
    }
    c.check(ok, &worst);
}

#[test]
fn criterion_05_divisor_sum_identity() {
    let c = Criterion::begin(5, "divisor sum matches orbit count on coprime Δ");
    let mut ok = true;
    let mut detail = String::new();
    'outer: for (d, d0) in [(-7i64, -15i64), (-7, -23), (-15, -23)] {
        for m in 1..=200i64 {
            let delta = -m;
            if delta * delta < d * d0
                || (delta * delta - d * d0) % 4 != 0
                || hypercount::arith::gcd(d * d0, delta) != 1
            {
                continue;
            }
            let hw = hardy_williams(d, d0, delta).unwrap();
            let orbits = pair_class_number(d, d0, delta).unwrap().h() as i64;
            if hw < 0 || (orbits != 0 && hw != orbits) {
                ok = false;
                detail = format!("d={d} d'={d0} Δ={delta}: divisor sum {hw}, orbits {orbits}");
                break 'outer;
            }
        }
    }
    c.check(ok, &detail);
}

#[test]
fn criterion_06_kronecker_factorization() {
    let c = Criterion::begin(6, "genus coefficients are Kronecker convolutions, n ≤ 1e4");
    let mut ok = true;
    let mut detail = String::new();
    'outer: for d in squarefree_discriminants(-500) {
        let g = Arc::new(ClassGroup::new(d).unwrap());
        for xi in genus_characters(&g) {
            let (d1, d2) = match xi.kind {
                CharKind::Genus { d1, d2 } => (d1, d2),
                _ => unreachable!(),
            };
            let rep = check_kronecker_factorization(&xi, d1, d2, 10_000).unwrap();
            if !rep.ok() {
                ok = false;
                detail = format!("d={d} ({d1},{d2}): {:?}", rep.first_mismatch);
                break 'outer;
            }
        }
    }
    c.check(ok, &detail);
}

#[test]
fn criterion_07_coefficient_bounds() {
    let c = Criterion::begin(7, "λ real, |λ(n)| ≤ d(n), λ(n) = ±1 on n | d, n ≤ 1e4");
    let mut ok = true;
    let mut detail = String::new();
    'outer: for d in squarefree_discriminants(-500) {
        let g = Arc::new(ClassGroup::new(d).unwrap());
        for xi in characters(&g) {
            let lam = lambda_table(&xi, 10_000).unwrap();
            for n in 1..=10_000u64 {
                let v = lam[n as usize];
                if !v.is_finite() || v.abs() > divisor_count(n).unwrap() as f64 + 1e-9 {
                    ok = false;
                    detail = format!("d={d} char={} n={n}: λ = {v}", xi.id());
                    break 'outer;
                }
                if (-d) % n as i64 == 0 && (v.abs() - 1.0).abs() > 1e-9 {
                    ok = false;
                    detail = format!("d={d} char={} n={n} | d: λ = {v}", xi.id());
                    break 'outer;
                }
            }
        }
    }
    c.check(ok, &detail);
}

#[test]
fn criterion_08_ball_volume_oracle() {
    let c = Criterion::begin(8, "|h_R(i/2) - 4π sinh²(R/2)| ≤ 1e-8");
    let mut worst: f64 = 0.0;
    for r in [0.1, 1.0, 5.0, 10.0] {
        let v = h_r(r, Complex64::new(0.0, 0.5)).unwrap().value.re;
        let oracle = 4.0 * std::f64::consts::PI * (r / 2.0).sinh().powi(2);
        worst = worst.max((v - oracle).abs());
    }
    c.check(worst <= 1e-8, &format!("max deviation {worst:.3e}"));
}

#[test]
fn criterion_09_squeeze() {
    let c = Criterion::begin(9, "K⁻ ≤ N ≤ K⁺ on 50 random instances");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = 0usize;
    for _ in 0..50 {
        let z = PlanePoint::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.6..1.8)).unwrap();
        let w = PlanePoint::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.6..1.8)).unwrap();
        let x = rng.gen_range(5.0..400.0);
        let delta = rng.gen_range(0.01..0.4);
        let n = count_general(z, w, x).unwrap().count as f64;
        let lo = k_pm_count(z, w, x, delta, Sign::Minus).unwrap();
        let hi = k_pm_count(z, w, x, delta, Sign::Plus).unwrap();
        if !(lo <= n + 1e-6 && n <= hi + 1e-6) {
            eprintln!("violation: x={x} delta={delta}: {lo} / {n} / {hi}");
            violations += 1;
        }
    }
    c.check(violations == 0, &format!("{violations} violations"));
}

#[test]
fn criterion_10_main_term_transform() {
    let c = Criterion::begin(10, "|h±(i/2) - πX| ≤ 5(1 + δX), δ = X^{-1/3}");
    let mut ok = true;
    let mut detail = String::new();
    for x in [10.0f64, 1e2, 1e3, 1e4] {
        let delta = x.powf(-1.0 / 3.0);
        for sign in [Sign::Plus, Sign::Minus] {
            let v = h_pm(x, delta, Complex64::new(0.0, 0.5), sign).unwrap().re;
            let err = (v - std::f64::consts::PI * x).abs();
            if err > 5.0 * (1.0 + delta * x) {
                ok = false;
                detail = format!("X={x}: deviation {err:.3}");
            }
        }
    }
    c.check(ok, &detail);
}

#[test]
fn criterion_11_combinatorics() {
    let c = Criterion::begin(11, "power-expansion coefficients, identity, exponent floor");
    let mut ok = h_coeff(2, 0).unwrap() == 1;
    for a in (1..=19u32).step_by(2) {
        ok &= h_coeff(a, 0).unwrap() == 0;
    }
    for a in 0..=20u32 {
        for cc in 0..=a {
            let v = h_coeff(a, cc).unwrap();
            ok &= (v as f64) <= 2f64.powi(a as i32 + 1);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let hi = rng.gen_range(20..=50u64);
        let k = rng.gen_range(1..=4u32);
        let primes: Vec<u64> = hypercount::arith::primes_up_to(hi)
            .into_iter()
            .filter(|&p| p > 2)
            .collect();
        let lam = SymbolicEigenvalues::random(&primes, &mut rng);
        let mut b = std::collections::HashMap::new();
        for &p in &primes {
            b.insert(p, rng.gen_range(-4.0..=4.0));
        }
        let (lhs, rhs) = p_expand_identity((2, hi), &b, &lam, k).unwrap();
        ok &= (lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs());
    }
    let g15 = Arc::new(ClassGroup::new(-15).unwrap());
    let g35 = Arc::new(ClassGroup::new(-35).unwrap());
    for xi in characters(&g15) {
        for xi2 in characters(&g35) {
            let (_, theta) = exponent_tables(&xi, &xi2).unwrap();
            ok &= theta >= num::rational::Ratio::new(1, 4);
        }
    }
    c.check(ok, "combinatorial identity failure");
}

#[test]
fn criterion_12_second_moment_exponent() {
    let c = Criterion::begin(12, "empirical second-moment exponent in [0.6, 1.4]");
    let z = HeegnerPoint::new(hypercount::QuadForm::new(1, 1, 2))
        .unwrap()
        .point();
    let w = HeegnerPoint::new(hypercount::QuadForm::new(1, 1, 4))
        .unwrap()
        .point();
    let mut points = Vec::new();
    for x0 in [1e3, 1e4, 1e5] {
        let rows = error_samples(z, w, x0, 24).unwrap();
        let mean_e2: f64 = rows.iter().map(|r| r.2 * r.2).sum::<f64>() / rows.len() as f64;
        points.push((x0, mean_e2.max(1e-12)));
    }
    let slope = fit_loglog_slope(&points);
    c.check(
        (0.6..=1.4).contains(&slope),
        &format!("fitted exponent {slope:.3}, samples {points:?}"),
    );
}
