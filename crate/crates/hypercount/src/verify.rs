//! Self-check suites wired to the `verify` CLI subcommand: each suite
//! re-runs the module invariants on fixed inputs plus a seeded random
//! sweep and reports machine-readable pass/fail results.

use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::count::{count_general, count_heegner_exact, hardy_williams, pair_class_number};
use crate::heegner::{codiscriminant, heegner_points, u, HeegnerPoint, PlanePoint};
use crate::kernel::{h_delta, h_pm, h_r, k_pm_count, Sign};
use crate::momentkit::{
    elementary_inequalities, exponent_tables, h_coeff, h_coeff_quadrature, p_expand_identity,
    SymbolicEigenvalues,
};
use crate::qforms::{characters, ClassGroup};
use crate::theta::{check_hecke_relations, check_kronecker_factorization, lambda, lambda_table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Forms,
    Theta,
    Kernel,
    Moments,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Suite::All),
            "forms" => Ok(Suite::Forms),
            "theta" => Ok(Suite::Theta),
            "kernel" => Ok(Suite::Kernel),
            "moments" => Ok(Suite::Moments),
            other => Err(format!("unknown suite '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Recorder {
    checks: Vec<CheckResult>,
}

impl Recorder {
    fn new() -> Self {
        Recorder { checks: Vec::new() }
    }
    fn record(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

const TEST_DISCRIMINANTS: [i64; 5] = [-7, -15, -23, -35, -47];

fn forms_suite(rec: &mut Recorder, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for d in TEST_DISCRIMINANTS {
        let g = match ClassGroup::new(d) {
            Ok(g) => g,
            Err(e) => {
                rec.record("class_group_construction", false, format!("d={d}: {e}"));
                continue;
            }
        };
        let h = g.h();
        let mut ok = true;
        for i in 0..h {
            if g.compose_indices(i, g.inverse_index(i)) != g.identity_index() {
                ok = false;
            }
            for j in 0..h {
                if g.compose_indices(i, j) != g.compose_indices(j, i) {
                    ok = false;
                }
            }
        }
        rec.record("group_axioms", ok, format!("d={d} h={h}"));

        let ga = Arc::new(g);
        let chars = characters(&ga);
        let genus_count = chars.iter().filter(|c| c.is_real()).count();
        let expected = 1usize << (crate::arith::omega_big(d.unsigned_abs()).unwrap() - 1);
        rec.record(
            "genus_subgroup_order",
            genus_count == expected,
            format!("d={d}: {genus_count} real characters, expected {expected}"),
        );
    }
    // exact distance identity on random reduced-form pairs
    let mut ok = true;
    for _ in 0..50 {
        let d = TEST_DISCRIMINANTS[rng.gen_range(0..TEST_DISCRIMINANTS.len())];
        let d0 = TEST_DISCRIMINANTS[rng.gen_range(0..TEST_DISCRIMINANTS.len())];
        let pts = heegner_points(d).unwrap();
        let pts0 = heegner_points(d0).unwrap();
        let p = &pts[rng.gen_range(0..pts.len())];
        let p0 = &pts0[rng.gen_range(0..pts0.len())];
        let m = codiscriminant(&p.form, &p0.form);
        let lhs = 4.0 * u(p.point(), p0.point()) + 2.0;
        let rhs = 2.0 * m as f64 / ((d * d0) as f64).sqrt();
        if (lhs - rhs).abs() > 1e-10 {
            ok = false;
        }
    }
    rec.record("codiscriminant_distance_identity", ok, "50 random pairs".into());

    // Hardy--Williams vs orbit counts on a fixed window
    let mut ok = true;
    for delta in (-60..0i64).filter(|m| {
        m * m >= 105 && crate::arith::gcd(105, *m) == 1 && (m * m - 105) % 4 == 0
    }) {
        let orbits = pair_class_number(-7, -15, delta).unwrap().h() as i64;
        let hw = hardy_williams(-7, -15, delta).unwrap();
        if orbits != 0 && hw != orbits {
            ok = false;
        }
        if hw < 0 {
            ok = false;
        }
    }
    rec.record("hardy_williams_window", ok, "d=-7, d'=-15, -60 < Δ < 0".into());
}

fn theta_suite(rec: &mut Recorder, seed: u64, fault: bool) {
    for d in TEST_DISCRIMINANTS {
        let g = Arc::new(ClassGroup::new(d).unwrap());
        for xi in characters(&g) {
            let mut lam = lambda_table(&xi, 1000).unwrap();
            if fault && d == -15 && xi.is_trivial() {
                lam[2] += 1.0; // negative control: deliberate corruption
            }
            let mut ok = true;
            let mut detail = String::new();
            for n in 1..=1000usize {
                let bound = crate::arith::divisor_count(n as u64).unwrap() as f64;
                if lam[n].abs() > bound + 1e-9 {
                    ok = false;
                    detail = format!("|λ({n})| = {} > d(n) = {bound}", lam[n].abs());
                    break;
                }
                if (-d) % n as i64 == 0 && (lam[n].abs() - 1.0).abs() > 1e-9 {
                    ok = false;
                    detail = format!("λ({n}) = {} not ±1 with n | d", lam[n]);
                    break;
                }
            }
            // table vs direct enumeration on a seeded sample
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ d.unsigned_abs());
            for _ in 0..20 {
                let n = rng.gen_range(1..=1000u64);
                if (lam[n as usize] - lambda(&xi, n)).abs() > 1e-9 {
                    ok = false;
                    detail = format!("table/direct mismatch at n={n}");
                    break;
                }
            }
            rec.record(
                "lambda_bounds_and_enumeration",
                ok,
                format!("d={d} char={} {detail}", xi.id()),
            );
        }
    }
    let g15 = Arc::new(ClassGroup::new(-15).unwrap());
    let gen = crate::qforms::ClassCharacter::genus(Arc::clone(&g15), 5, -3).unwrap();
    let rep = check_kronecker_factorization(&gen, 5, -3, 5000).unwrap();
    rec.record(
        "kronecker_factorization",
        rep.ok(),
        format!("d=-15 genus(5,-3): {:?}", rep.first_mismatch),
    );
    for d in [-7i64, -15, -23] {
        let g = Arc::new(ClassGroup::new(d).unwrap());
        for xi in characters(&g) {
            let rep = check_hecke_relations(&xi, 10_000).unwrap();
            rec.record(
                "hecke_relations",
                rep.ok(),
                format!("d={d} char={}: {:?}", xi.id(), rep.first_mismatch),
            );
        }
    }
}

fn kernel_suite(rec: &mut Recorder, seed: u64) {
    let i2 = Complex64::new(0.0, 0.5);
    for r in [0.1, 1.0, 5.0, 10.0] {
        let eval = h_r(r, i2).unwrap();
        let oracle = 4.0 * std::f64::consts::PI * (r / 2.0).sinh().powi(2);
        let err = (eval.value.re - oracle).abs();
        rec.record(
            "ball_volume_oracle",
            err <= 1e-8,
            format!("R={r}: |h_R(i/2) - 4π sinh²(R/2)| = {err:.3e}"),
        );
    }
    for delta in [0.05, 0.3, 1.0] {
        let v = h_delta(delta, i2).unwrap();
        rec.record(
            "mollifier_unit_mass",
            (v.re - 1.0).abs() < 1e-9,
            format!("delta={delta}: {}", v.re),
        );
    }
    for x in [10.0f64, 100.0, 1000.0] {
        let delta = x.powf(-1.0 / 3.0);
        let v = h_pm(x, delta, i2, Sign::Plus).unwrap().re;
        let err = (v - std::f64::consts::PI * x).abs();
        rec.record(
            "main_term_transform",
            err <= 5.0 * (1.0 + delta * x),
            format!("X={x}: |h+(i/2) - πX| = {err:.3}"),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ok = true;
    let mut detail = String::new();
    for _ in 0..8 {
        let z = PlanePoint::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.7..1.5)).unwrap();
        let w = PlanePoint::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.7..1.5)).unwrap();
        let x = rng.gen_range(5.0..200.0);
        let delta = rng.gen_range(0.02..0.3);
        let n = count_general(z, w, x).unwrap().count as f64;
        let lo = k_pm_count(z, w, x, delta, Sign::Minus).unwrap();
        let hi = k_pm_count(z, w, x, delta, Sign::Plus).unwrap();
        if !(lo <= n + 1e-6 && n <= hi + 1e-6) {
            ok = false;
            detail = format!("X={x} delta={delta}: {lo} / {n} / {hi}");
            break;
        }
    }
    rec.record("squeeze", ok, detail);
}

fn moments_suite(rec: &mut Recorder, seed: u64) {
    let mut ok = true;
    for a in 0..=20u32 {
        for c in 0..=a {
            let exact = h_coeff(a, c).unwrap() as f64;
            let quad = h_coeff_quadrature(a, c).unwrap();
            if (exact - quad).abs() > 1e-10 * exact.max(1.0) {
                ok = false;
            }
            if exact < 0.0 || exact > 2f64.powi(a as i32 + 1) {
                ok = false;
            }
        }
    }
    rec.record("h_coeff_recurrence_vs_quadrature", ok, "a <= 20".into());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ok = true;
    for _ in 0..50 {
        let hi = rng.gen_range(20..=40u64);
        let k = rng.gen_range(1..=4u32);
        let primes: Vec<u64> = crate::arith::primes_up_to(hi)
            .into_iter()
            .filter(|&p| p > 2)
            .collect();
        let lam = SymbolicEigenvalues::random(&primes, &mut rng);
        let mut b = std::collections::HashMap::new();
        for &p in &primes {
            b.insert(p, rng.gen_range(-4.0..=4.0));
        }
        let (lhs, rhs) = p_expand_identity((2, hi), &b, &lam, k).unwrap();
        if (lhs - rhs).abs() > 1e-9 * (1.0 + lhs.abs()) {
            ok = false;
        }
    }
    rec.record("p_expand_identity", ok, "50 random instances".into());

    let g15 = Arc::new(ClassGroup::new(-15).unwrap());
    let g35 = Arc::new(ClassGroup::new(-35).unwrap());
    let mut ok = true;
    for xi in characters(&g15) {
        for xi2 in characters(&g35) {
            let (_, theta) = exponent_tables(&xi, &xi2).unwrap();
            if theta < num::rational::Ratio::new(1, 4) {
                ok = false;
            }
        }
    }
    rec.record("exponent_theta_floor", ok, "(d,d') = (-15,-35)".into());

    let rep = elementary_inequalities(20_000, &mut rng);
    rec.record(
        "elementary_inequalities",
        rep.violations == 0,
        format!("{} draws, min slack {:.3e}", rep.draws, rep.min_slack),
    );

    // exact identity spot check from the counting side
    let p7 = crate::qforms::QuadForm::new(1, 1, 2);
    let p15 = crate::qforms::QuadForm::new(1, 1, 4);
    let x = num::BigRational::from_integer(10.into());
    let rep = count_heegner_exact(&p7, &p15, &x).unwrap();
    let z = HeegnerPoint::new(p7).unwrap().point();
    let w = HeegnerPoint::new(p15).unwrap().point();
    let float = count_general(z, w, 10.0).unwrap().count;
    rec.record(
        "exact_float_agreement",
        rep.count == float,
        format!("exact {} vs float {float}", rep.count),
    );
}

/// Run one suite (or all of them). `fault` injects a deliberate
/// corruption into the theta suite as a negative control.
pub fn run_suites(suite: Suite, seed: u64, fault: bool) -> Vec<SuiteReport> {
    let selected: Vec<Suite> = match suite {
        Suite::All => vec![Suite::Forms, Suite::Theta, Suite::Kernel, Suite::Moments],
        s => vec![s],
    };
    selected
        .into_iter()
        .map(|s| {
            let mut rec = Recorder::new();
            let name = match s {
                Suite::Forms => {
                    forms_suite(&mut rec, seed);
                    "forms"
                }
                Suite::Theta => {
                    theta_suite(&mut rec, seed, fault);
                    "theta"
                }
                Suite::Kernel => {
                    kernel_suite(&mut rec, seed);
                    "kernel"
                }
                Suite::Moments => {
                    moments_suite(&mut rec, seed);
                    "moments"
                }
                Suite::All => unreachable!(),
            };
            SuiteReport {
                suite: name.to_string(),
                seed,
                checks: rec.checks,
            }
        })
        .collect()
}
