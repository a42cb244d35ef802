//! Resolvent oracle by coefficient stripping, sampled a.c. densities,
//! entropy integrals and moments of the spectral measure at site 1.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::coefficients::{CoefficientModel, Coefficients, PeriodicBlock};
use crate::error::{Error, Result};
use crate::jost::ac_density;
use crate::transfer::Matrix2C;

/// Budget of period-map squarings; `k` squarings stand for `2^k` stripping periods.
const MAX_SQUARINGS: u32 = 60;
const FIXED_POINT_TOL: f64 = 1e-14;

#[inline]
fn strip_step(m: Complex64, a: f64, b: f64, zeta: Complex64) -> Complex64 {
    (b - zeta - a * a * m).inv()
}

/// One period of stripping: `m ↦ 1/(b°_k − ζ − a°_k² m)` for `k = q, …, 1`.
pub fn strip_period(block: &PeriodicBlock, m: Complex64, zeta: Complex64) -> Complex64 {
    (1..=block.q()).rev().fold(m, |m, k| strip_step(m, block.a_bg(k), block.b_bg(k), zeta))
}

fn strip_period_with_derivative(block: &PeriodicBlock, m: Complex64, zeta: Complex64) -> (Complex64, Complex64) {
    let mut m = m;
    let mut dm = Complex64::new(1.0, 0.0);
    for k in (1..=block.q()).rev() {
        let a2 = block.a_bg(k).powi(2);
        let r = strip_step(m, block.a_bg(k), block.b_bg(k), zeta);
        dm *= a2 * r * r;
        m = r;
    }
    (m, dm)
}

fn mobius(s: &Matrix2C, m: Complex64) -> Complex64 {
    (s.m11 * m + s.m12) / (s.m21 * m + s.m22)
}

/// `G°(1,1;ζ)` of the periodic background: the attracting fixed point of
/// one stripping period, reached by repeated squaring of the period map.
pub fn tail_m_function(block: &PeriodicBlock, zeta: Complex64) -> Result<Complex64> {
    if !(zeta.im > 0.0) {
        return Err(Error::validation(format!("stripping oracle needs Im ζ > 0, got {zeta}")));
    }
    // m ↦ 1/(b − ζ − a²m) is the Möbius map of [[0, 1], [−a², b − ζ]].
    let mut s = Matrix2C::identity();
    for k in 1..=block.q() {
        let a = block.a_bg(k);
        let step = Matrix2C::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::from(-a * a),
            block.b_bg(k) - zeta,
        );
        s = s * step;
    }
    let start = Complex64::new(0.0, 1.0);
    let mut m = mobius(&s, start);
    let mut squarings = 0u32;
    while squarings < MAX_SQUARINGS {
        s = s * s;
        s = s.scale(Complex64::from(1.0 / s.max_abs()));
        squarings += 1;
        let next = mobius(&s, start);
        let done = (next - m).norm() < FIXED_POINT_TOL * next.norm().max(1.0);
        m = next;
        if done {
            break;
        }
    }
    // Newton polish of m − strip(m) = 0; squaring leaves rounding of order
    // eps/(1 − |z|²) that plain iteration would remove only slowly.
    for _ in 0..3 {
        let (t, dt) = strip_period_with_derivative(block, m, zeta);
        let denom = 1.0 - dt;
        if denom.norm() > 0.0 {
            m -= (m - t) / denom;
        }
    }
    let residual = (m - strip_period(block, m, zeta)).norm();
    if !m.is_finite() || residual > 1e-13 || !(m.im > 0.0) {
        return Err(Error::OracleConvergence { zeta, iterations: 1usize << squarings });
    }
    Ok(m)
}

/// `G^N(1,1;ζ)` by stripping the truncated model from the periodic tail down to site 1.
pub fn oracle_green_11(model: &CoefficientModel, n_trunc: usize, zeta: Complex64) -> Result<Complex64> {
    let tm = model.truncate(n_trunc)?;
    let mut m = tail_m_function(tm.block(), zeta)?;
    let start = (n_trunc - 1) * tm.period();
    for n in (1..=start).rev() {
        m = strip_step(m, tm.a(n)?, tm.b(n), zeta);
    }
    Ok(m)
}

/// Heights used for the boundary-value extrapolation of the oracle.
pub const ORACLE_EPS: (f64, f64) = (1e-3, 1e-4);

/// `(1/π)·Im G^N(1,1;E+i0)` from the oracle, linearly extrapolated in ε.
pub fn oracle_density(model: &CoefficientModel, n_trunc: usize, e: f64) -> Result<f64> {
    let (e1, e2) = ORACLE_EPS;
    let f1 = oracle_green_11(model, n_trunc, Complex64::new(e, e1))?.im;
    let f2 = oracle_green_11(model, n_trunc, Complex64::new(e, e2))?.im;
    Ok((e1 * f2 - e2 * f1) / (e1 - e2) / PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMethod {
    KeyFormula,
    Oracle,
}

impl DensityMethod {
    pub fn tag(self) -> &'static str {
        match self {
            DensityMethod::KeyFormula => "key_formula",
            DensityMethod::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub n_trunc: usize,
    pub method: DensityMethod,
}

pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

/// Density of `μ^N` sampled on a uniform grid over `interval`.
pub fn density_curve(
    model: &CoefficientModel,
    n_trunc: usize,
    interval: (f64, f64),
    grid_points: usize,
    method: DensityMethod,
) -> Result<DensityCurve> {
    if grid_points < 2 || !(interval.0 < interval.1) {
        return Err(Error::validation("density grid needs at least 2 points on a nonempty interval"));
    }
    let grid = uniform_grid(interval.0, interval.1, grid_points);
    let values = grid
        .par_iter()
        .map(|&e| match method {
            DensityMethod::KeyFormula => ac_density(model, n_trunc, e),
            DensityMethod::Oracle => oracle_density(model, n_trunc, e),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityCurve { grid, values, n_trunc, method })
}

/// Entropy integral together with its order-doubling convergence check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyResult {
    pub value: f64,
    pub quad_order: usize,
    /// Same integral at twice the order.
    pub refined_value: f64,
    /// `|value − refined_value| < 1e−6`.
    pub converged: bool,
}

fn log_density_quadrature(model: &CoefficientModel, n_trunc: usize, interval: (f64, f64), order: usize) -> Result<f64> {
    let (lo, hi) = interval;
    let rule = GaussLegendre::new(NonZeroUsize::new(order).expect("order checked"));
    let terms = rule
        .as_node_weight_pairs()
        .par_iter()
        .map(|&(x, w)| {
            let e = 0.5 * ((hi - lo) * x + (hi + lo));
            let d = ac_density(model, n_trunc, e)?;
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::DensityDomain { energy: e, value: d });
            }
            Ok(w * d.ln())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(0.5 * (hi - lo) * terms.iter().sum::<f64>())
}

/// `∫_I ln(dμ^N_ac/dE) dE` by Gauss–Legendre quadrature.
pub fn entropy_integral(
    model: &CoefficientModel,
    n_trunc: usize,
    interval: (f64, f64),
    quad_order: usize,
) -> Result<EntropyResult> {
    if quad_order < 4 {
        return Err(Error::validation("quadrature order must be at least 4"));
    }
    if !(interval.0 < interval.1) {
        return Err(Error::validation("entropy interval must be nonempty"));
    }
    let value = log_density_quadrature(model, n_trunc, interval, quad_order)?;
    let refined_value = log_density_quadrature(model, n_trunc, interval, 2 * quad_order)?;
    Ok(EntropyResult { value, quad_order, refined_value, converged: (value - refined_value).abs() < 1e-6 })
}

/// `⟨δ₁, J^k δ₁⟩` computed on sites `1..=depth`.
pub fn moment<C: Coefficients>(model: &C, k: usize, depth: usize) -> Result<f64> {
    if depth < k + 2 {
        return Err(Error::validation(format!("depth {depth} is below k + 2 = {}", k + 2)));
    }
    let a = (0..=depth).map(|n| model.a(n)).collect::<Result<Vec<_>>>()?;
    let b: Vec<f64> = (0..=depth).map(|n| model.b(n)).collect();
    // v[0] is a permanent zero standing in for the missing site 0
    let mut v = vec![0.0; depth + 2];
    v[1] = 1.0;
    let mut w = vec![0.0; depth + 2];
    for _ in 0..k {
        for n in 1..=depth {
            let left = if n > 1 { a[n - 1] * v[n - 1] } else { 0.0 };
            w[n] = left + b[n] * v[n] + a[n] * v[n + 1];
        }
        std::mem::swap(&mut v, &mut w);
    }
    Ok(v[1])
}
