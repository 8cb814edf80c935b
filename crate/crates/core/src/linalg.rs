//! Minimal 2-D linear algebra: the model only ever needs 2-vectors and
//! symmetric 2×2 matrices, so these are plain value types.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];

/// Symmetric 2×2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMat2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMat2 {
    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    pub const fn diag(xx: f64, yy: f64) -> Self {
        Self { xx, xy: 0.0, yy }
    }

    pub const fn identity() -> Self {
        Self::diag(1.0, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    /// Positive leading principal minors.
    pub fn is_spd(&self) -> bool {
        self.xx > 0.0 && self.det() > 0.0 && self.xx.is_finite() && self.yy.is_finite()
    }

    pub fn cholesky(&self) -> Result<Chol2> {
        if !(self.xx > 0.0) || !self.xy.is_finite() || !self.yy.is_finite() {
            return Err(self.not_spd());
        }
        let l11 = self.xx.sqrt();
        let l21 = self.xy / l11;
        let rem = self.yy - l21 * l21;
        if !(rem > 0.0) {
            return Err(self.not_spd());
        }
        Ok(Chol2 {
            l11,
            l21,
            l22: rem.sqrt(),
        })
    }

    pub fn inverse(&self) -> Result<SymMat2> {
        let det = self.det();
        if !(det > 0.0) || !(self.xx > 0.0) {
            return Err(self.not_spd());
        }
        Ok(SymMat2::new(self.yy / det, -self.xy / det, self.xx / det))
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        [
            self.xx * v[0] + self.xy * v[1],
            self.xy * v[0] + self.yy * v[1],
        ]
    }

    /// `vᵀ A v`
    pub fn quad_form(&self, v: Vec2) -> f64 {
        self.xx * v[0] * v[0] + 2.0 * self.xy * v[0] * v[1] + self.yy * v[1] * v[1]
    }

    pub fn outer(v: Vec2) -> SymMat2 {
        SymMat2::new(v[0] * v[0], v[0] * v[1], v[1] * v[1])
    }

    pub fn scale(&self, s: f64) -> SymMat2 {
        SymMat2::new(self.xx * s, self.xy * s, self.yy * s)
    }

    pub fn add(&self, o: &SymMat2) -> SymMat2 {
        SymMat2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.xx, self.xy, self.yy]
    }

    fn not_spd(&self) -> Error {
        Error::NotPositiveDefinite {
            xx: self.xx,
            xy: self.xy,
            yy: self.yy,
        }
    }
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chol2 {
    pub l11: f64,
    pub l21: f64,
    pub l22: f64,
}

impl Chol2 {
    pub fn log_det(&self) -> f64 {
        2.0 * (self.l11.ln() + self.l22.ln())
    }

    /// Solves `L z = v`.
    pub fn solve_lower(&self, v: Vec2) -> Vec2 {
        let z0 = v[0] / self.l11;
        [z0, (v[1] - self.l21 * z0) / self.l22]
    }

    /// Returns `L z`.
    pub fn mul_lower(&self, z: Vec2) -> Vec2 {
        [self.l11 * z[0], self.l21 * z[0] + self.l22 * z[1]]
    }

    /// Returns `Lᵀ z`.
    pub fn mul_upper(&self, z: Vec2) -> Vec2 {
        [self.l11 * z[0] + self.l21 * z[1], self.l22 * z[1]]
    }

    /// Reassembles `L Lᵀ`.
    pub fn product(&self) -> SymMat2 {
        SymMat2::new(
            self.l11 * self.l11,
            self.l11 * self.l21,
            self.l21 * self.l21 + self.l22 * self.l22,
        )
    }
}

pub fn add2(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn sub2(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}
