//! Jost solution of the truncated operator, the boundary Green's function,
//! the a.c. density formula and the product representation of `(u₁, u₀)`.

use num_complex::{Complex, Complex64};
use num_traits::Float;
use twofloat::TwoFloat;

use crate::coefficients::{CoefficientModel, Coefficients};
use crate::error::{Error, Result};
use crate::transfer::renormalize::w_from_pair;
use crate::transfer::{block_eigenbasis, check_c_nonzero, floquet_eigenvalue, BlockEigen, FloquetData, Matrix2C};

/// Arithmetic used by the backward recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Double,
    /// Double-double (≈ 32 significant digits) accumulation.
    DoubleDouble,
}

/// Magnitude that triggers a rescale of the stored solution.
const OVERFLOW_GUARD: f64 = 1e280;

/// `u₀ … u_{Nq+1}` of the truncated operator, stored as `u_n·2^{−log2_scale}`.
#[derive(Debug, Clone, PartialEq)]
pub struct JostSolution {
    pub n_trunc: usize,
    pub zeta: Complex64,
    pub u: Vec<Complex64>,
    /// True values are `u[n]·2^{log2_scale}`.
    pub log2_scale: i64,
    pub floquet: FloquetData,
    /// `a°₀`.
    pub a0: f64,
    /// Largest relative three-term residual over `1 ≤ n ≤ Nq`.
    pub residual: f64,
    pub precision: Precision,
}

impl JostSolution {
    /// Stored (scaled) `u₀`.
    pub fn u0(&self) -> Complex64 {
        self.u[0]
    }

    pub fn u1(&self) -> Complex64 {
        self.u[1]
    }

    pub fn z(&self) -> Complex64 {
        self.floquet.z
    }

    /// `ln|u₀|` including the stored scale.
    pub fn ln_abs_u0(&self) -> f64 {
        self.u[0].norm().ln() + self.log2_scale as f64 * std::f64::consts::LN_2
    }

    /// Unscaled `(u₁, u₀)`; may overflow when `log2_scale` is large.
    pub fn boundary_values(&self) -> (Complex64, Complex64) {
        let s = 2f64.powi(self.log2_scale as i32);
        (self.u[1] * s, self.u[0] * s)
    }

    /// `|Im(u₀ū₁) + C·Im z|` at real energies.
    pub fn wronskian_defect(&self) -> f64 {
        let (u1, u0) = self.boundary_values();
        ((u0 * u1.conj()).im + self.floquet.c().re * self.floquet.z.im).abs()
    }

    /// `|u₀||u₁| + |C|`, the natural size of the Wronskian identity.
    pub fn wronskian_scale(&self) -> f64 {
        let (u1, u0) = self.boundary_values();
        u0.norm() * u1.norm() + self.floquet.c().norm()
    }
}

fn lift<T: Float>(z: Complex64) -> Complex<T> {
    Complex::new(T::from(z.re).unwrap(), T::from(z.im).unwrap())
}

fn lower<T: Float>(z: Complex<T>) -> Complex64 {
    Complex64::new(z.re.to_f64().unwrap(), z.im.to_f64().unwrap())
}

/// `u_{n−1} = −(a(n)u_{n+1} + (b(n)−ζ)u_n)/a(n−1)` from `n = Nq` down to 1.
/// `a` holds `a(0..=Nq)`, `b` holds `b(0..=Nq)` (entry 0 unused).
fn backward<T: Float>(a: &[f64], b: &[f64], zeta: Complex64, top: [Complex64; 2]) -> (Vec<Complex64>, i64) {
    let nq = a.len() - 1;
    let mut u = vec![Complex::<T>::new(T::zero(), T::zero()); nq + 2];
    u[nq + 1] = lift(top[0]);
    u[nq] = lift(top[1]);
    let z = lift::<T>(zeta);
    let mut log2_scale = 0i64;
    for n in (1..=nq).rev() {
        let an = T::from(a[n]).unwrap();
        let an1 = T::from(a[n - 1]).unwrap();
        let bn = Complex::new(T::from(b[n]).unwrap(), T::zero());
        let next = -(u[n + 1] * an + (bn - z) * u[n]) / an1;
        u[n - 1] = next;
        let mag = next.re.abs().max(next.im.abs()).to_f64().unwrap();
        if mag > OVERFLOW_GUARD {
            let k = mag.log2().floor() as i32;
            let factor = T::from(2f64.powi(-k)).unwrap();
            for v in &mut u[n - 1..] {
                *v = *v * factor;
            }
            log2_scale += k as i64;
        }
    }
    (u.into_iter().map(lower).collect(), log2_scale)
}

fn recursion_residual(a: &[f64], b: &[f64], zeta: Complex64, u: &[Complex64]) -> f64 {
    let nq = a.len() - 1;
    let mut worst = 0.0f64;
    for n in 1..=nq {
        let r = a[n] * u[n + 1] + (b[n] - zeta) * u[n] + a[n - 1] * u[n - 1];
        let size = u[n - 1].norm().max(u[n].norm()).max(u[n + 1].norm());
        if size > 0.0 {
            worst = worst.max(r.norm() / size);
        }
    }
    worst
}

/// Jost solution of `J^N` at `ζ` in double precision.
pub fn jost_solution(model: &CoefficientModel, n_trunc: usize, zeta: Complex64) -> Result<JostSolution> {
    jost_solution_with(model, n_trunc, zeta, Precision::Double)
}

pub fn jost_solution_with(
    model: &CoefficientModel,
    n_trunc: usize,
    zeta: Complex64,
    precision: Precision,
) -> Result<JostSolution> {
    let tm = model.truncate(n_trunc)?;
    let block = tm.block();
    let floquet = floquet_eigenvalue(block, zeta)?;
    check_c_nonzero(&floquet, zeta)?;
    let nq = n_trunc * block.q();
    let a = (0..=nq).map(|n| tm.a(n)).collect::<Result<Vec<_>>>()?;
    let b: Vec<f64> = (0..=nq).map(|n| tm.b(n)).collect();
    let (u, log2_scale) = match precision {
        Precision::Double => backward::<f64>(&a, &b, zeta, floquet.eigvec),
        Precision::DoubleDouble => backward::<TwoFloat>(&a, &b, zeta, floquet.eigvec),
    };
    let residual = recursion_residual(&a, &b, zeta, &u);
    Ok(JostSolution { n_trunc, zeta, u, log2_scale, floquet, a0: block.a_bg(0), residual, precision })
}

/// `G^N(1,1;ζ) = −u₁/(a°₀u₀)`.
pub fn green_11(model: &CoefficientModel, n_trunc: usize, zeta: Complex64) -> Result<Complex64> {
    let sol = jost_solution(model, n_trunc, zeta)?;
    green_from(&sol)
}

pub(crate) fn green_from(sol: &JostSolution) -> Result<Complex64> {
    let u0 = sol.u0();
    if u0 == Complex64::new(0.0, 0.0) || !u0.is_finite() {
        return Err(Error::ZeroJost { zeta: sol.zeta });
    }
    Ok(-sol.u1() / (sol.a0 * u0))
}

fn real_band_solution(model: &CoefficientModel, n_trunc: usize, e: f64, precision: Precision) -> Result<JostSolution> {
    let sol = jost_solution_with(model, n_trunc, Complex64::from(e), precision)?;
    if sol.floquet.z.im == 0.0 {
        return Err(Error::BandEdge { energy: e });
    }
    Ok(sol)
}

/// `|C(E)·Im z(E)| / (π·a°₀·|u₀(E)|²)`.
pub fn ac_density(model: &CoefficientModel, n_trunc: usize, e: f64) -> Result<f64> {
    ac_density_with(model, n_trunc, e, Precision::Double)
}

pub fn ac_density_with(model: &CoefficientModel, n_trunc: usize, e: f64, precision: Precision) -> Result<f64> {
    density_from(&real_band_solution(model, n_trunc, e, precision)?)
}

pub(crate) fn density_from(sol: &JostSolution) -> Result<f64> {
    if sol.u0() == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroJost { zeta: sol.zeta });
    }
    let num = (sol.floquet.c().re * sol.floquet.z.im).abs();
    let ln = num.ln() - std::f64::consts::PI.ln() - sol.a0.ln() - 2.0 * sol.ln_abs_u0();
    Ok(ln.exp())
}

/// Defect of the Wronskian identity `Im(u₀ū₁) = −C·Im z` at real `E`.
pub fn wronskian_defect(model: &CoefficientModel, n_trunc: usize, e: f64) -> Result<f64> {
    Ok(real_band_solution(model, n_trunc, e, Precision::Double)?.wronskian_defect())
}

/// `(u₁, u₀) = Π_n λ_n(1+α_n) · M₀⁻¹U₀⁻¹L₀(φ_N, ν_N)ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductForm {
    /// `ln Π_{n=1}^{N−1} λ_n(1+α_n)` (complex, branch irrelevant).
    pub ln_prefactor: Complex64,
    pub phi: Complex64,
    pub nu: Complex64,
    /// `min_n |λ_n|` over the blocks used.
    pub kappa: f64,
    pub lambda0: Complex64,
    /// `a(q)C₀/a(0)`, the lower-left entry of `M₀⁻¹U₀⁻¹`.
    pub c0: Complex64,
    pub u_inv0: Matrix2C,
    pub a0: f64,
    /// Diagonal entries `(α_n, δ_n)` of `W_n` for `n = 1 … N−1`.
    pub diagonals: Vec<(Complex64, Complex64)>,
}

impl ProductForm {
    pub fn prefactor(&self) -> Complex64 {
        self.ln_prefactor.exp()
    }

    /// `L₀(φ, ν)` mapped through `M₀⁻¹U₀⁻¹`, without the prefactor.
    fn reduced(&self) -> (Complex64, Complex64) {
        let v = [self.lambda0 * self.phi, self.nu / self.lambda0];
        let w = self.u_inv0.apply(v);
        (w[0], w[1] / self.a0)
    }

    /// Reconstructed `(u₁, u₀)`.
    pub fn reconstruct(&self) -> (Complex64, Complex64) {
        let p = self.prefactor();
        let (u1, u0) = self.reduced();
        (p * u1, p * u0)
    }

    /// `f_N = −ln|c₀(λ₀φ_N + λ₀⁻¹ν_N)|`.
    pub fn f_n(&self) -> f64 {
        -(self.c0 * (self.lambda0 * self.phi + self.nu / self.lambda0)).norm().ln()
    }
}

/// Evaluates the normalized product over the block eigenbases of `J^N`.
pub fn product_representation(model: &CoefficientModel, n_trunc: usize, zeta: Complex64) -> Result<ProductForm> {
    let tm = model.truncate(n_trunc)?;
    let bases = (0..n_trunc).map(|n| block_eigenbasis(&tm, n, zeta)).collect::<Result<Vec<BlockEigen>>>()?;
    let mut phi = Complex64::new(1.0, 0.0);
    let mut nu = Complex64::new(0.0, 0.0);
    let mut ln_prefactor = Complex64::new(0.0, 0.0);
    let mut diagonals = Vec::with_capacity(n_trunc.saturating_sub(1));
    for n in (1..n_trunc).rev() {
        let w = w_from_pair(&bases[n - 1], &bases[n]);
        let lam = bases[n].lambda;
        let one_alpha = 1.0 + w.m11;
        let inv = bases[n].lambda_inv;
        let new_phi = phi + w.m12 * inv * inv * nu / one_alpha;
        let new_nu = (w.m21 * lam * phi + (1.0 + w.m22) * inv * nu) / (lam * one_alpha);
        phi = new_phi;
        nu = new_nu;
        ln_prefactor += (lam * one_alpha).ln();
        diagonals.push((w.m11, w.m22));
    }
    diagonals.reverse();
    let kappa = bases.iter().map(|b| b.lambda.norm()).fold(f64::INFINITY, f64::min);
    let b0 = &bases[0];
    let a0 = tm.a(0)?;
    Ok(ProductForm {
        ln_prefactor,
        phi,
        nu,
        kappa,
        lambda0: b0.lambda,
        c0: b0.u_inv.m21 / a0,
        u_inv0: b0.u_inv,
        a0,
        diagonals,
    })
}
