//! Determinant-one renormalization of the period blocks and the
//! eigenbasis change `W_n` between consecutive blocks.
//!
//! With `M_n = diag(1, a(nq))` and `x_n = M_n·(ψ(nq+1), ψ(nq))`, the blocks
//! `R_n = M_{n+1} P_n M_n⁻¹` satisfy `x_{n+1} = R_n x_n` and `det R_n = 1`.

use num_complex::Complex64;

use super::{floquet_pair, period_block_matrix, period_block_with_derivative, Matrix2C};
use crate::coefficients::Coefficients;
use crate::error::{Error, Result};

fn scaling<C: Coefficients>(model: &C, n: usize) -> Result<(f64, f64)> {
    let q = model.period();
    Ok((model.a(n * q)?, model.a((n + 1) * q)?))
}

#[inline]
fn conjugate(p: &Matrix2C, a_lo: f64, a_hi: f64) -> Matrix2C {
    Matrix2C::new(p.m11, p.m12 / a_lo, p.m21 * a_hi, p.m22 * (a_hi / a_lo))
}

/// `R_n(ζ) = M_{n+1} P_n(ζ) M_n⁻¹`, a unimodular matrix with the same
/// trace as `P_n` up to the factor `a((n+1)q)/a(nq)` on `D_n`.
pub fn renormalized_block<C: Coefficients>(model: &C, n: usize, zeta: Complex64) -> Result<Matrix2C> {
    let p = period_block_matrix(model, n, zeta)?;
    let (lo, hi) = scaling(model, n)?;
    Ok(conjugate(&p, lo, hi))
}

/// `R_n(ζ)` and `dR_n/dζ`.
pub fn renormalized_block_with_derivative<C: Coefficients>(
    model: &C,
    n: usize,
    zeta: Complex64,
) -> Result<(Matrix2C, Matrix2C)> {
    let (p, dp) = period_block_with_derivative(model, n, zeta)?;
    let (lo, hi) = scaling(model, n)?;
    Ok((conjugate(&p, lo, hi), conjugate(&dp, lo, hi)))
}

/// Eigen-decomposition `R_n = U_n⁻¹ diag(λ_n⁻¹, λ_n) U_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEigen {
    /// Growing eigenvalue, `|λ_n| ≥ 1`.
    pub lambda: Complex64,
    pub lambda_inv: Complex64,
    /// Columns: the `λ_n⁻¹` and `λ_n` eigenvectors `(μ − r22, r21)`.
    pub u_inv: Matrix2C,
    pub u: Matrix2C,
    pub block: Matrix2C,
}

/// Eigenbasis of `R_n(ζ)`, using the same branch rules as the background
/// Floquet eigenvalue (the local trace derivative fixes the branch on the
/// real axis).
pub fn block_eigenbasis<C: Coefficients>(model: &C, n: usize, zeta: Complex64) -> Result<BlockEigen> {
    let (r, dr) = renormalized_block_with_derivative(model, n, zeta)?;
    let (small, large) = match floquet_pair(r.trace(), dr.trace(), zeta) {
        Ok(pair) => pair,
        Err(Error::BandEdge { .. } | Error::DegenerateBranch { .. }) => return Err(Error::Diagonalization { n, zeta }),
        Err(e) => return Err(e),
    };
    let u_inv = Matrix2C::new(small - r.m22, large - r.m22, r.m21, r.m21);
    let det = u_inv.det();
    let scale = u_inv.max_abs().powi(2).max(f64::MIN_POSITIVE);
    if !(det.norm() > 1e-13 * scale) {
        return Err(Error::Diagonalization { n, zeta });
    }
    let u = u_inv.inverse().ok_or(Error::Diagonalization { n, zeta })?;
    Ok(BlockEigen { lambda: large, lambda_inv: small, u_inv, u, block: r })
}

/// `W_n = U_{n−1}U_n⁻¹ − I`, evaluated as `U_{n−1}(U_n⁻¹ − U_{n−1}⁻¹)` so
/// that identical consecutive blocks give an exact zero.
pub fn w_matrix<C: Coefficients>(model: &C, n: usize, zeta: Complex64) -> Result<Matrix2C> {
    if n < 1 {
        return Err(Error::validation("W_n is defined for n ≥ 1"));
    }
    let prev = block_eigenbasis(model, n - 1, zeta)?;
    let cur = block_eigenbasis(model, n, zeta)?;
    Ok(w_from_pair(&prev, &cur))
}

pub(crate) fn w_from_pair(prev: &BlockEigen, cur: &BlockEigen) -> Matrix2C {
    prev.u * (cur.u_inv - prev.u_inv)
}
