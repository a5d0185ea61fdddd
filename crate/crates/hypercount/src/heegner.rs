//! Heegner points, the hyperbolic point-pair invariant u(z,w), and the
//! exact codiscriminant identity linking the two.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qforms::{ClassGroup, Mat2, QformError, QuadForm};

#[derive(Debug, Error, PartialEq)]
pub enum HeegnerError {
    #[error("point ({0}, {1}) is not in the upper half-plane")]
    NotUpperHalfPlane(f64, f64),
    #[error(transparent)]
    Qform(#[from] QformError),
}

/// A point x + iy in the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Result<Self, HeegnerError> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(HeegnerError::NotUpperHalfPlane(x, y));
        }
        Ok(PlanePoint { x, y })
    }

    /// Möbius action of an SL2(Z) matrix.
    pub fn apply(&self, m: Mat2) -> PlanePoint {
        let (a, b, c, d) = (
            m[0][0] as f64,
            m[0][1] as f64,
            m[1][0] as f64,
            m[1][1] as f64,
        );
        let den = (c * self.x + d) * (c * self.x + d) + c * c * self.y * self.y;
        PlanePoint {
            x: ((a * self.x + b) * (c * self.x + d) + a * c * self.y * self.y) / den,
            y: self.y / den,
        }
    }
}

/// The point-pair invariant u(z,w) = |z−w|² / (4 Im z Im w);
/// cosh d_H(z,w) = 2u + 1.
pub fn u(z: PlanePoint, w: PlanePoint) -> f64 {
    let dx = z.x - w.x;
    let dy = z.y - w.y;
    (dx * dx + dy * dy) / (4.0 * z.y * w.y)
}

/// Exact datum for the CM point z = (−b + i√|d|)/(2a).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeegnerPoint {
    pub form: QuadForm,
    pub d: i64,
}

impl HeegnerPoint {
    pub fn new(form: QuadForm) -> Result<Self, HeegnerError> {
        if !form.is_positive_definite() {
            return Err(QformError::NotPositiveDefinite(form.a, form.b, form.c).into());
        }
        Ok(HeegnerPoint {
            form,
            d: form.discriminant(),
        })
    }

    pub fn point(&self) -> PlanePoint {
        let a = self.form.a as f64;
        PlanePoint {
            x: -self.form.b as f64 / (2.0 * a),
            y: ((-self.d) as f64).sqrt() / (2.0 * a),
        }
    }
}

/// The codiscriminant m = 2(a·c0 + a0·c) − b·b0 of two forms; satisfies
/// 4u(z_p, z_{p0}) + 2 = 2m/√|d·d0| exactly.
pub fn codiscriminant(p: &QuadForm, p0: &QuadForm) -> i64 {
    let m = 2 * (p.a as i128 * p0.c as i128 + p0.a as i128 * p.c as i128)
        - p.b as i128 * p0.b as i128;
    m as i64
}

/// One Heegner point per ideal class, built from the reduced forms.
/// All returned points lie in the closure of the standard fundamental domain.
pub fn heegner_points(d: i64) -> Result<Vec<HeegnerPoint>, HeegnerError> {
    let group = ClassGroup::new(d)?;
    Ok(group
        .forms
        .iter()
        .map(|f| HeegnerPoint { form: *f, d })
        .collect())
}
