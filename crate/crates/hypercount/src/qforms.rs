//! Binary quadratic forms: reduction, Gauss/Dirichlet composition, class
//! groups of negative fundamental discriminants d ≡ 1 mod 4, and class
//! group characters (general and genus).

use std::collections::HashMap;
use std::sync::Arc;

use num::complex::Complex64;
use num::rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{extended_gcd, factorize, gcd, kronecker};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QformError {
    #[error("form ({0}, {1}, {2}) is not positive definite with negative discriminant")]
    NotPositiveDefinite(i64, i64, i64),
    #[error("discriminants differ: {0} vs {1}")]
    MismatchedDiscriminants(i64, i64),
    #[error("discriminant {0} is not a negative squarefree integer ≡ 1 mod 4")]
    InvalidDiscriminant(i64),
    #[error("form has discriminant {0}, character group has {1}")]
    WrongGroup(i64, i64),
    #[error("d1*d2 = {0} does not equal d = {1}")]
    BadGenusFactorization(i64, i64),
}

/// An integral binary quadratic form a·x² + b·xy + c·y².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

pub type Mat2 = [[i64; 2]; 2];

pub const IDENTITY_MAT: Mat2 = [[1, 0], [0, 1]];

fn mat_mul(m: Mat2, n: Mat2) -> Mat2 {
    [
        [
            m[0][0] * n[0][0] + m[0][1] * n[1][0],
            m[0][0] * n[0][1] + m[0][1] * n[1][1],
        ],
        [
            m[1][0] * n[0][0] + m[1][1] * n[1][0],
            m[1][0] * n[0][1] + m[1][1] * n[1][1],
        ],
    ]
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a > 0 && self.discriminant() < 0
    }

    /// Evaluate the form at (x, y).
    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    /// The action p^γ(x, y) = p(ex + fy, gx + hy) for γ = [[e, f], [g, h]].
    pub fn apply(&self, m: Mat2) -> QuadForm {
        let (e, f, g, h) = (
            m[0][0] as i128,
            m[0][1] as i128,
            m[1][0] as i128,
            m[1][1] as i128,
        );
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        let a2 = a * e * e + b * e * g + c * g * g;
        let b2 = 2 * a * e * f + b * (e * h + f * g) + 2 * c * g * h;
        let c2 = a * f * f + b * f * h + c * h * h;
        QuadForm {
            a: a2 as i64,
            b: b2 as i64,
            c: c2 as i64,
        }
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() < a && a < c))
    }
}

/// Reduce a positive definite form to its canonical representative
/// (|b| ≤ a ≤ c, with b ≥ 0 when |b| = a or a = c), returning the SL2(Z)
/// matrix that carries the input to the output.
pub fn reduce(f: &QuadForm) -> Result<(QuadForm, Mat2), QformError> {
    if !f.is_positive_definite() {
        return Err(QformError::NotPositiveDefinite(f.a, f.b, f.c));
    }
    let mut cur = *f;
    let mut m = IDENTITY_MAT;
    loop {
        // Translate b into (-a, a]: largest k with b + 2ka ≤ a.
        let k = (cur.a - cur.b).div_euclid(2 * cur.a);
        if k != 0 {
            let t = [[1, k], [0, 1]];
            cur = cur.apply(t);
            m = mat_mul(m, t);
        }
        if cur.a > cur.c {
            let s = [[0, -1], [1, 0]];
            cur = cur.apply(s);
            m = mat_mul(m, s);
            continue;
        }
        break;
    }
    // Tie rule: b ≥ 0 when |b| = a or a = c.
    if cur.b < 0 && (-cur.b == cur.a || cur.a == cur.c) {
        if -cur.b == cur.a {
            let t = [[1, 1], [0, 1]];
            cur = cur.apply(t);
            m = mat_mul(m, t);
        } else {
            let s = [[0, -1], [1, 0]];
            cur = cur.apply(s);
            m = mat_mul(m, s);
        }
    }
    debug_assert!(cur.is_reduced());
    Ok((cur, m))
}

/// Dirichlet composition of two forms of the same negative discriminant.
/// Returns the reduced representative of the product class.
pub fn compose(f: &QuadForm, g: &QuadForm) -> Result<QuadForm, QformError> {
    let d = f.discriminant();
    if g.discriminant() != d {
        return Err(QformError::MismatchedDiscriminants(d, g.discriminant()));
    }
    if !f.is_positive_definite() || !g.is_positive_definite() {
        return Err(QformError::NotPositiveDefinite(f.a, f.b, f.c));
    }
    let (f1, f2) = if f.a <= g.a { (f, g) } else { (g, f) };
    let (a1, b1) = (f1.a, f1.b);
    let (a2, b2, c2) = (f2.a, f2.b, f2.c);
    let s = (b1 + b2) / 2;
    let n = b2 - s;
    let (dd, y1) = if a2 % a1 == 0 {
        (a1, 0)
    } else {
        let (dd, u, _v) = extended_gcd(a2, a1);
        (dd, u)
    };
    let (d1, x2, y2) = if s % dd == 0 {
        (dd, 0, -1)
    } else {
        let (d1, u, v) = extended_gcd(s, dd);
        (d1, u, -v)
    };
    let v1 = a1 / d1;
    let v2 = a2 / d1;
    let r = ((y1 as i128 * y2 as i128 * n as i128 - x2 as i128 * c2 as i128)
        .rem_euclid(v1 as i128)) as i64;
    let b3 = b2 as i128 + 2 * v2 as i128 * r as i128;
    let a3 = v1 as i128 * v2 as i128;
    let c3 = (b3 * b3 - d as i128) / (4 * a3);
    let raw = QuadForm {
        a: a3 as i64,
        b: b3 as i64,
        c: c3 as i64,
    };
    Ok(reduce(&raw)?.0)
}

fn check_discriminant(d: i64) -> Result<(), QformError> {
    if d >= 0 || d.rem_euclid(4) != 1 {
        return Err(QformError::InvalidDiscriminant(d));
    }
    let fac = factorize(d.unsigned_abs()).map_err(|_| QformError::InvalidDiscriminant(d))?;
    if fac.factors.iter().any(|&(_, e)| e > 1) {
        return Err(QformError::InvalidDiscriminant(d));
    }
    Ok(())
}

/// The class group of a negative squarefree discriminant d ≡ 1 mod 4.
#[derive(Debug, Clone)]
pub struct ClassGroup {
    pub d: i64,
    /// Reduced forms in canonical order (by a, then b).
    pub forms: Vec<QuadForm>,
    /// Composition table: table[i][j] = index of class i * class j.
    pub table: Vec<Vec<usize>>,
    /// Cyclic decomposition: (class index, order), direct product.
    pub generators: Vec<(usize, usize)>,
    /// Exponent tuple of each class against `generators`.
    exponents: Vec<Vec<usize>>,
    index: HashMap<QuadForm, usize>,
}

impl ClassGroup {
    pub fn new(d: i64) -> Result<Self, QformError> {
        check_discriminant(d)?;
        let mut forms = Vec::new();
        let mut a = 1i64;
        while 3 * a * a <= -d {
            let mut b = -a + 1;
            while b <= a {
                let num = b * b - d;
                if num % (4 * a) == 0 {
                    let c = num / (4 * a);
                    if a <= c && (b >= 0 || (b.abs() < a && a < c)) {
                        forms.push(QuadForm { a, b, c });
                    }
                }
                b += 1;
            }
            a += 1;
        }
        forms.sort_by_key(|f| (f.a, f.b));
        let index: HashMap<QuadForm, usize> =
            forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        let h = forms.len();
        let mut table = vec![vec![0usize; h]; h];
        for i in 0..h {
            for j in i..h {
                let prod = compose(&forms[i], &forms[j])?;
                let k = *index.get(&prod).expect("composition landed off the reduced list");
                table[i][j] = k;
                table[j][i] = k;
            }
        }
        let identity = *index
            .get(&QuadForm::new(1, 1, (1 - d) / 4))
            .expect("principal form missing");
        debug_assert_eq!(identity, 0);
        let generators = cyclic_basis(&table, identity);
        let exponents = exponent_table(&table, identity, &generators);
        Ok(ClassGroup {
            d,
            forms,
            table,
            generators,
            exponents,
            index,
        })
    }

    pub fn h(&self) -> usize {
        self.forms.len()
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    /// Class index of an arbitrary form of discriminant d.
    pub fn class_index(&self, f: &QuadForm) -> Result<usize, QformError> {
        if f.discriminant() != self.d {
            return Err(QformError::MismatchedDiscriminants(
                f.discriminant(),
                self.d,
            ));
        }
        let (red, _) = reduce(f)?;
        Ok(*self
            .index
            .get(&red)
            .expect("reduced form missing from class list"))
    }

    pub fn compose_indices(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    pub fn inverse_index(&self, i: usize) -> usize {
        (0..self.h()).find(|&j| self.table[i][j] == 0).unwrap()
    }

    pub fn exponents_of(&self, i: usize) -> &[usize] {
        &self.exponents[i]
    }

    /// JSON document with fields d, forms, table, generators.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "d": self.d,
            "forms": self.forms,
            "table": self.table,
            "generators": self.generators,
        })
    }

    pub fn from_json(doc: &serde_json::Value) -> Result<Self, QformError> {
        let d = doc["d"].as_i64().ok_or(QformError::InvalidDiscriminant(0))?;
        let rebuilt = ClassGroup::new(d)?;
        // The document is a cache: verify it matches the canonical build.
        if let Ok(forms) = serde_json::from_value::<Vec<QuadForm>>(doc["forms"].clone()) {
            if forms != rebuilt.forms {
                return Err(QformError::InvalidDiscriminant(d));
            }
        }
        Ok(rebuilt)
    }
}

fn element_order(table: &[Vec<usize>], identity: usize, x: usize) -> usize {
    let mut cur = x;
    let mut n = 1;
    while cur != identity {
        cur = table[cur][x];
        n += 1;
    }
    n
}

fn closure(table: &[Vec<usize>], seed: &[usize]) -> Vec<usize> {
    let mut in_set = vec![false; table.len()];
    let mut stack: Vec<usize> = seed.to_vec();
    for &s in seed {
        in_set[s] = true;
    }
    while let Some(x) = stack.pop() {
        for &g in seed {
            let y = table[x][g];
            if !in_set[y] {
                in_set[y] = true;
                stack.push(y);
            }
        }
    }
    (0..table.len()).filter(|&i| in_set[i]).collect()
}

/// Greedy direct-sum basis: repeatedly take an element of maximal order
/// whose cyclic group splits off from the span built so far.
fn cyclic_basis(table: &[Vec<usize>], identity: usize) -> Vec<(usize, usize)> {
    let h = table.len();
    let mut basis: Vec<(usize, usize)> = Vec::new();
    let mut span = vec![identity];
    while span.len() < h {
        let mut best: Option<(usize, usize)> = None;
        for x in 0..h {
            if span.contains(&x) {
                continue;
            }
            let ord = element_order(table, identity, x);
            if best.map_or(false, |(_, bo)| bo >= ord) {
                continue;
            }
            let mut seed: Vec<usize> = basis.iter().map(|&(g, _)| g).collect();
            seed.push(x);
            seed.push(identity);
            let new_span = closure(table, &seed);
            if new_span.len() == span.len() * ord {
                best = Some((x, ord));
            }
        }
        let (g, ord) = best.expect("abelian basis extension failed");
        basis.push((g, ord));
        let mut seed: Vec<usize> = basis.iter().map(|&(b, _)| b).collect();
        seed.push(identity);
        span = closure(table, &seed);
    }
    basis
}

fn exponent_table(
    table: &[Vec<usize>],
    identity: usize,
    basis: &[(usize, usize)],
) -> Vec<Vec<usize>> {
    let h = table.len();
    let mut exps = vec![Vec::new(); h];
    let mut seen = vec![false; h];
    let k = basis.len();
    let mut tuple = vec![0usize; k];
    loop {
        let mut elem = identity;
        for (i, &(g, _)) in basis.iter().enumerate() {
            for _ in 0..tuple[i] {
                elem = table[elem][g];
            }
        }
        assert!(!seen[elem], "basis is not a direct sum");
        seen[elem] = true;
        exps[elem] = tuple.clone();
        // Increment the mixed-radix tuple.
        let mut i = 0;
        loop {
            if i == k {
                debug_assert!(seen.iter().all(|&s| s));
                return exps;
            }
            tuple[i] += 1;
            if tuple[i] < basis[i].1 {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
    }
}

/// A character of a class group: either a general character given by
/// exponents against the cyclic generators, or a genus character given by
/// a factorization d = d1·d2 into discriminants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CharKind {
    General { exponents: Vec<usize> },
    Genus { d1: i64, d2: i64 },
}

#[derive(Debug, Clone)]
pub struct ClassCharacter {
    pub group: Arc<ClassGroup>,
    pub kind: CharKind,
}

impl ClassCharacter {
    pub fn trivial(group: Arc<ClassGroup>) -> Self {
        let exponents = vec![0; group.generators.len()];
        ClassCharacter {
            group,
            kind: CharKind::General { exponents },
        }
    }

    pub fn genus(group: Arc<ClassGroup>, d1: i64, d2: i64) -> Result<Self, QformError> {
        if d1 * d2 != group.d {
            return Err(QformError::BadGenusFactorization(d1 * d2, group.d));
        }
        Ok(ClassCharacter {
            group,
            kind: CharKind::Genus { d1, d2 },
        })
    }

    pub fn is_trivial(&self) -> bool {
        match &self.kind {
            CharKind::General { exponents } => exponents.iter().all(|&e| e == 0),
            CharKind::Genus { d1, d2 } => d1.abs() == 1 || d2.abs() == 1,
        }
    }

    /// Phase of the value on class `i`, as a rational in [0, 1).
    /// The value itself is e^{2πi·phase}.
    pub fn phase_on_class(&self, i: usize) -> Ratio<i64> {
        match &self.kind {
            CharKind::General { exponents } => {
                let exps = self.group.exponents_of(i);
                let mut phase = Ratio::new(0, 1);
                for (k, &(_, ord)) in self.group.generators.iter().enumerate() {
                    phase += Ratio::new((exponents[k] * exps[k]) as i64, ord as i64);
                }
                phase - phase.floor()
            }
            CharKind::Genus { d1, d2 } => {
                if self.genus_sign_on_class(i, *d1, *d2) == 1 {
                    Ratio::new(0, 1)
                } else {
                    Ratio::new(1, 2)
                }
            }
        }
    }

    fn genus_sign_on_class(&self, i: usize, d1: i64, d2: i64) -> i64 {
        let f = &self.group.forms[i];
        let d = self.group.d;
        // Use any primitively represented value coprime to d; its prime
        // ideal factors avoid the ramified primes, so the character value
        // is the Kronecker symbol of d1 (equivalently d2) at that value.
        for x in 0..=16i64 {
            for y in -16..=16i64 {
                if gcd(x, y) != 1 {
                    continue;
                }
                let v = f.eval(x, y);
                if v > 0 && v % 2 == 1 && gcd(v, d) == 1 {
                    let s = kronecker(d1, v);
                    debug_assert_eq!(s, kronecker(d2, v));
                    return s;
                }
            }
        }
        unreachable!("no represented value coprime to d found");
    }

    pub fn value_on_class(&self, i: usize) -> Complex64 {
        let phase = self.phase_on_class(i);
        let theta = 2.0 * std::f64::consts::PI * (*phase.numer() as f64) / (*phase.denom() as f64);
        Complex64::new(theta.cos(), theta.sin())
    }

    pub fn value(&self, f: &QuadForm) -> Result<Complex64, QformError> {
        if f.discriminant() != self.group.d {
            return Err(QformError::WrongGroup(f.discriminant(), self.group.d));
        }
        Ok(self.value_on_class(self.group.class_index(f)?))
    }

    /// True when every value lies in {−1, +1}.
    pub fn is_real(&self) -> bool {
        (0..self.group.h()).all(|i| {
            let p = self.phase_on_class(i);
            p == Ratio::new(0, 1) || p == Ratio::new(1, 2)
        })
    }

    pub fn is_genus_kind(&self) -> bool {
        matches!(self.kind, CharKind::Genus { .. })
    }

    /// Stable identifier used for cache file names.
    pub fn id(&self) -> String {
        match &self.kind {
            CharKind::General { exponents } => format!(
                "gen{}",
                exponents
                    .iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join("_")
            ),
            CharKind::Genus { d1, d2 } => format!("genus{}x{}", d1, d2),
        }
    }
}

/// All h(d) characters of the class group, trivial character first.
pub fn characters(group: &Arc<ClassGroup>) -> Vec<ClassCharacter> {
    let orders: Vec<usize> = group.generators.iter().map(|&(_, o)| o).collect();
    let mut out = Vec::with_capacity(group.h());
    let k = orders.len();
    let mut tuple = vec![0usize; k];
    loop {
        out.push(ClassCharacter {
            group: Arc::clone(group),
            kind: CharKind::General {
                exponents: tuple.clone(),
            },
        });
        let mut i = 0;
        loop {
            if i == k {
                return out;
            }
            tuple[i] += 1;
            if tuple[i] < orders[i] {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
    }
}

/// The 2^{k-1} genus characters, from unordered factorizations
/// |d| = q1·q2 via D(q) = (−1)^{(q−1)/2} q. Trivial character first.
pub fn genus_characters(group: &Arc<ClassGroup>) -> Vec<ClassCharacter> {
    let ad = group.d.unsigned_abs();
    let fac = factorize(ad).expect("|d| in range");
    let mut out = Vec::new();
    let k = fac.factors.len();
    for mask in 0u32..(1 << k) {
        let mut q1: i64 = 1;
        for (i, &(p, _)) in fac.factors.iter().enumerate() {
            if mask & (1 << i) != 0 {
                q1 *= p as i64;
            }
        }
        let q2 = ad as i64 / q1;
        if q1 > q2 {
            continue; // unordered pairs once
        }
        let dq = |q: i64| if (q - 1) % 4 == 0 { q } else { -q };
        out.push(ClassCharacter::genus(Arc::clone(group), dq(q1), dq(q2)).unwrap());
    }
    out.sort_by_key(|c| !c.is_trivial());
    out
}
