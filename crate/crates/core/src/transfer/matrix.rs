use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2C {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Matrix2C {
    pub const fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn diag(d1: Complex64, d2: Complex64) -> Self {
        Self::new(d1, ZERO, ZERO, d2)
    }

    pub fn from_real(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self::new(m11.into(), m12.into(), m21.into(), m22.into())
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> Complex64 {
        self.m11 + self.m22
    }

    /// `None` when the determinant is exactly zero.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == ZERO {
            return None;
        }
        let inv = det.inv();
        Some(Self::new(self.m22 * inv, -self.m12 * inv, -self.m21 * inv, self.m11 * inv))
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [self.m11 * v[0] + self.m12 * v[1], self.m21 * v[0] + self.m22 * v[1]]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn frobenius_norm(&self) -> f64 {
        (self.m11.norm_sqr() + self.m12.norm_sqr() + self.m21.norm_sqr() + self.m22.norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.m11.norm().max(self.m12.norm()).max(self.m21.norm()).max(self.m22.norm())
    }
}

impl Mul for Matrix2C {
    type Output = Matrix2C;

    fn mul(self, r: Matrix2C) -> Matrix2C {
        Matrix2C::new(
            self.m11 * r.m11 + self.m12 * r.m21,
            self.m11 * r.m12 + self.m12 * r.m22,
            self.m21 * r.m11 + self.m22 * r.m21,
            self.m21 * r.m12 + self.m22 * r.m22,
        )
    }
}

impl Add for Matrix2C {
    type Output = Matrix2C;

    fn add(self, r: Matrix2C) -> Matrix2C {
        Matrix2C::new(self.m11 + r.m11, self.m12 + r.m12, self.m21 + r.m21, self.m22 + r.m22)
    }
}

impl Sub for Matrix2C {
    type Output = Matrix2C;

    fn sub(self, r: Matrix2C) -> Matrix2C {
        Matrix2C::new(self.m11 - r.m11, self.m12 - r.m12, self.m21 - r.m21, self.m22 - r.m22)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inverse_roundtrip() {
        let m = Matrix2C::new(c(1.0, 2.0), c(-0.5, 0.1), c(0.3, -1.0), c(2.0, 0.0));
        let p = m * m.inverse().unwrap();
        assert!((p - Matrix2C::identity()).max_abs() < 1e-15);
        assert!(Matrix2C::from_real(1.0, 2.0, 2.0, 4.0).inverse().is_none());
    }

    #[test]
    fn determinant_is_multiplicative() {
        let a = Matrix2C::new(c(1.0, 2.0), c(-0.5, 0.1), c(0.3, -1.0), c(2.0, 0.0));
        let b = Matrix2C::new(c(0.2, 0.0), c(1.0, 1.0), c(-1.0, 0.5), c(0.0, 3.0));
        assert!(((a * b).det() - a.det() * b.det()).norm() < 1e-14);
    }
}
