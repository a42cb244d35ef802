//! Transfer-matrix algebra for the eigenvalue recursion
//! `a(n)ψ(n+1) + b(n)ψ(n) + a(n−1)ψ(n−1) = ζψ(n)`.
//!
//! `T_n(ζ)` maps `(ψ(n), ψ(n−1))` to `(ψ(n+1), ψ(n))`; the period block
//! `P_n = T_{(n+1)q}⋯T_{nq+1}` advances one full period.

mod matrix;
pub(crate) mod renormalize;

use num_complex::Complex64;

pub use matrix::Matrix2C;
pub use renormalize::{block_eigenbasis, renormalized_block, renormalized_block_with_derivative, w_matrix, BlockEigen};

use crate::coefficients::{Coefficients, PeriodicBlock};
use crate::error::{Error, Result};

/// Relative width of the band-edge exclusion `||Δ| − 2| ≲ tol` at real energies.
const EDGE_TOL: f64 = 1e-13;

#[inline]
fn checked_a<C: Coefficients>(model: &C, n: usize) -> Result<f64> {
    match model.a(n) {
        Err(Error::Coefficient { n, value: 0.0 }) => Err(Error::SingularCoefficient { n }),
        other => other,
    }
}

/// `T_n(ζ) = [[(ζ − b(n))/a(n), −a(n−1)/a(n)], [1, 0]]`.
pub fn one_step<C: Coefficients>(model: &C, n: usize, zeta: Complex64) -> Result<Matrix2C> {
    if n < 1 {
        return Err(Error::validation("one-step transfer matrices start at n = 1"));
    }
    let an = checked_a(model, n)?;
    let an1 = checked_a(model, n - 1)?;
    Ok(Matrix2C::new(
        (zeta - model.b(n)) / an,
        Complex64::from(-an1 / an),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
    ))
}

/// `P_n(ζ) = T_{(n+1)q}(ζ)⋯T_{nq+1}(ζ)`.
pub fn period_block_matrix<C: Coefficients>(model: &C, n: usize, zeta: Complex64) -> Result<Matrix2C> {
    let q = model.period();
    let mut p = Matrix2C::identity();
    for k in n * q + 1..=(n + 1) * q {
        p = one_step(model, k, zeta)? * p;
    }
    Ok(p)
}

/// `P_n(ζ)` together with its ζ-derivative, propagated by the product rule
/// (`dT_k/dζ = [[1/a(k), 0], [0, 0]]`).
pub fn period_block_with_derivative<C: Coefficients>(
    model: &C,
    n: usize,
    zeta: Complex64,
) -> Result<(Matrix2C, Matrix2C)> {
    let q = model.period();
    let mut p = Matrix2C::identity();
    let mut dp = Matrix2C::zero();
    for k in n * q + 1..=(n + 1) * q {
        let t = one_step(model, k, zeta)?;
        let dt = Matrix2C::diag(Complex64::from(1.0 / checked_a(model, k)?), Complex64::new(0.0, 0.0));
        dp = dt * p + t * dp;
        p = t * p;
    }
    Ok((p, dp))
}

/// Monodromy matrix `P°(ζ)` of the background.
pub fn monodromy(block: &PeriodicBlock, zeta: Complex64) -> Matrix2C {
    // Background coefficients are validated positive at construction.
    period_block_matrix(block, 0, zeta).expect("validated block")
}

/// `Δ(ζ) = tr P°(ζ)`.
pub fn discriminant(block: &PeriodicBlock, zeta: Complex64) -> Complex64 {
    monodromy(block, zeta).trace()
}

/// `Δ'(ζ)`, exact up to rounding.
pub fn discriminant_derivative(block: &PeriodicBlock, zeta: Complex64) -> Complex64 {
    period_block_with_derivative(block, 0, zeta).expect("validated block").1.trace()
}

/// Roots `(z, 1/z)` of `λ² − tλ + 1 = 0` with `z` on the decaying branch.
///
/// Off the real axis `z` is the root of smaller modulus. For real `ζ` with
/// `|t| < 2` it is the boundary value of that branch from the upper
/// half-plane, `(t − i·sign(t')·√(4 − t²))/2`; for real `ζ` with `|t| > 2`
/// it is the smaller real root.
pub(crate) fn floquet_pair(trace: Complex64, dtrace: Complex64, zeta: Complex64) -> Result<(Complex64, Complex64)> {
    if zeta.im != 0.0 {
        let s = (trace * trace - 4.0).sqrt();
        // |t ± s| is largest for the sign aligned with t
        let large = if (trace.conj() * s).re >= 0.0 { (trace + s) / 2.0 } else { (trace - s) / 2.0 };
        return Ok((large.inv(), large));
    }
    let e = zeta.re;
    let t = trace.re;
    let disc = 4.0 - t * t;
    if disc.abs() <= EDGE_TOL * (t * t).max(1.0) {
        return Err(Error::BandEdge { energy: e });
    }
    if disc > 0.0 {
        let dt = dtrace.re;
        if dt.abs() <= f64::EPSILON * (1.0 + t.abs()) || !dt.is_finite() {
            return Err(Error::DegenerateBranch { energy: e });
        }
        let z = Complex64::new(t / 2.0, -dt.signum() * disc.sqrt() / 2.0);
        Ok((z, z.inv()))
    } else {
        let large = (t + t.signum() * (-disc).sqrt()) / 2.0;
        Ok((Complex64::from(1.0 / large), Complex64::from(large)))
    }
}

/// Floquet data of the background at a single energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetData {
    /// Decaying-branch eigenvalue, `|z| ≤ 1`.
    pub z: Complex64,
    pub z_inv: Complex64,
    /// `Δ(ζ)`.
    pub delta: Complex64,
    /// `Δ'(ζ)`.
    pub delta_prime: Complex64,
    pub monodromy: Matrix2C,
    /// `(x, y) = (z − D, C)`.
    pub eigvec: [Complex64; 2],
}

impl FloquetData {
    /// Lower-left monodromy entry `C(ζ)`.
    pub fn c(&self) -> Complex64 {
        self.monodromy.m21
    }

    /// Lower-right monodromy entry `D(ζ)`.
    pub fn d(&self) -> Complex64 {
        self.monodromy.m22
    }

    /// `‖P°v − zv‖ / ‖v‖` for the stored eigenvector.
    pub fn eigen_residual(&self) -> f64 {
        let pv = self.monodromy.apply(self.eigvec);
        let r0 = pv[0] - self.z * self.eigvec[0];
        let r1 = pv[1] - self.z * self.eigvec[1];
        let norm = (self.eigvec[0].norm_sqr() + self.eigvec[1].norm_sqr()).sqrt();
        (r0.norm_sqr() + r1.norm_sqr()).sqrt() / norm
    }
}

pub fn floquet_eigenvalue(block: &PeriodicBlock, zeta: Complex64) -> Result<FloquetData> {
    let (p, dp) = period_block_with_derivative(block, 0, zeta)?;
    let delta = p.trace();
    let delta_prime = dp.trace();
    let (z, z_inv) = floquet_pair(delta, delta_prime, zeta)?;
    Ok(FloquetData { z, z_inv, delta, delta_prime, monodromy: p, eigvec: [z - p.m22, p.m21] })
}

/// `(z − D, C)`, the eigenvector used as the Jost boundary condition.
pub fn floquet_eigenvector(block: &PeriodicBlock, zeta: Complex64) -> Result<[Complex64; 2]> {
    let data = floquet_eigenvalue(block, zeta)?;
    check_c_nonzero(&data, zeta)?;
    Ok(data.eigvec)
}

pub(crate) fn check_c_nonzero(data: &FloquetData, zeta: Complex64) -> Result<()> {
    let scale = data.monodromy.max_abs().max(1.0);
    if data.c().norm() <= 1e-14 * scale {
        return Err(Error::EigenvectorDegeneracy { zeta });
    }
    Ok(())
}
