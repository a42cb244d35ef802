//! Numerical certificates: Floquet strip bound, square-summability of `W_n`,
//! diagonal-product estimates, and the three harmonic-majorant hypotheses
//! for `f_N`. Every check fits its constants from probes and reports them.

use std::collections::BTreeMap;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bands::AdmissibleInterval;
use crate::coefficients::{CoefficientModel, PeriodicBlock};
use crate::jost::product_representation;
use crate::transfer::renormalize::w_from_pair;
use crate::transfer::{block_eigenbasis, floquet_eigenvalue};

/// Slack on the linear strip bound absorbing the `O(y²)` remainder.
pub const STRIP_SLACK: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCase {
    pub e: f64,
    pub y: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertReport {
    pub name: String,
    pub passed: bool,
    pub measured: BTreeMap<String, f64>,
    pub grid_spec: String,
    pub worst_case: Option<WorstCase>,
}

impl CertReport {
    fn new(name: &str, grid_spec: String) -> Self {
        Self { name: name.to_string(), passed: false, measured: BTreeMap::new(), grid_spec, worst_case: None }
    }

    fn set(&mut self, key: &str, value: f64) {
        self.measured.insert(key.to_string(), value);
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

const FLOQUET_GRID: usize = 32;

/// `|z(E+iy)| ≤ 1 − 0.9·C_I·y` and `|z⁻¹(E+iy)| ≥ 1 + 0.9·C_I·y` on a
/// 32×32 grid over `I × (0, ε_I]`.
pub fn check_floquet_bound(block: &PeriodicBlock, interval: &AdmissibleInterval) -> CertReport {
    let c = STRIP_SLACK * interval.c_i;
    let points: Vec<(f64, f64)> = grid(interval.lo, interval.hi, FLOQUET_GRID)
        .into_iter()
        .flat_map(|e| (1..=FLOQUET_GRID).map(move |j| (e, interval.eps_i * j as f64 / FLOQUET_GRID as f64)))
        .collect();
    let margins: Vec<(f64, f64, f64, f64)> = points
        .par_iter()
        .map(|&(e, y)| match floquet_eigenvalue(block, Complex64::new(e, y)) {
            Ok(f) => {
                let m_small = (1.0 - c * y) - f.z.norm();
                let m_large = f.z_inv.norm() - (1.0 + c * y);
                (e, y, m_small.min(m_large), (1.0 - f.z.norm()) / y)
            }
            Err(_) => (e, y, f64::NEG_INFINITY, f64::NEG_INFINITY),
        })
        .collect();
    let mut report = CertReport::new(
        "floquet_bound",
        format!("{FLOQUET_GRID}x{FLOQUET_GRID} on [{}, {}] x (0, {}]", interval.lo, interval.hi, interval.eps_i),
    );
    let worst = margins.iter().copied().fold((0.0, 0.0, f64::INFINITY, f64::INFINITY), |w, m| {
        (if m.2 < w.2 { m.0 } else { w.0 }, if m.2 < w.2 { m.1 } else { w.1 }, w.2.min(m.2), w.3.min(m.3))
    });
    report.passed = worst.2 >= 0.0;
    report.worst_case = Some(WorstCase { e: worst.0, y: worst.1, value: worst.2 });
    report.set("C_I", interval.c_i);
    report.set("eps_I", interval.eps_i);
    report.set("C_I_measured", worst.3);
    report.set("worst_margin", worst.2);
    report
}

/// Partial sums `S_m = Σ_{n≤m} ‖W_n(ζ)‖²` (Frobenius norm) at the cut-offs
/// `n_grid`; passes when the increments between cut-offs are nonincreasing
/// and the last one is below `tol`.
pub fn check_w_summability(model: &CoefficientModel, zeta: Complex64, n_grid: &[usize], tol: f64) -> CertReport {
    let mut report = CertReport::new("w_summability", format!("zeta = {zeta}, cut-offs {n_grid:?}, tol {tol}"));
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[1] <= w[0]) || n_grid[0] < 1 {
        report.set("valid_grid", 0.0);
        return report;
    }
    let n_max = *n_grid.last().unwrap();
    let mut sums = Vec::with_capacity(n_grid.len());
    let mut s = 0.0;
    let mut prev = match block_eigenbasis(model, 0, zeta) {
        Ok(b) => b,
        Err(_) => {
            report.worst_case = Some(WorstCase { e: zeta.re, y: zeta.im, value: 0.0 });
            return report;
        }
    };
    let mut next_cut = 0;
    for n in 1..=n_max {
        let cur = match block_eigenbasis(model, n, zeta) {
            Ok(b) => b,
            Err(_) => {
                report.set("failed_at_n", n as f64);
                report.worst_case = Some(WorstCase { e: zeta.re, y: zeta.im, value: n as f64 });
                return report;
            }
        };
        s += w_from_pair(&prev, &cur).frobenius_norm().powi(2);
        prev = cur;
        if n == n_grid[next_cut] {
            sums.push(s);
            next_cut += 1;
        }
    }
    let increments: Vec<f64> = sums.windows(2).map(|w| w[1] - w[0]).collect();
    let decreasing = increments.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let last = increments.last().copied().unwrap_or(0.0);
    report.passed = decreasing && last < tol;
    report.set("l2_norm", s.sqrt());
    report.set("last_increment", last);
    for (m, v) in n_grid.iter().zip(&sums) {
        report.set(&format!("S_{m:08}"), *v);
    }
    report.worst_case = Some(WorstCase { e: zeta.re, y: zeta.im, value: last });
    report
}

/// Sampling plan for [`check_diagonal_products`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiagonalSampling {
    /// Energies sampled in the strip.
    pub zetas: usize,
    /// `(k, l)` ranges sampled per energy.
    pub pairs: usize,
    /// Largest site index entering a range.
    pub n_max: usize,
    pub seed: u64,
}

/// Per-energy sample: the fitted `B` over the first `pairs` ranges, for α and δ.
fn diagonal_fit(
    model: &CoefficientModel,
    zeta: Complex64,
    plan: &DiagonalSampling,
    index: usize,
    pairs: usize,
) -> Option<(f64, f64)> {
    let mut prefix_a = vec![0.0; plan.n_max + 1];
    let mut prefix_d = vec![0.0; plan.n_max + 1];
    let mut prev = block_eigenbasis(model, 0, zeta).ok()?;
    for n in 1..=plan.n_max {
        let cur = block_eigenbasis(model, n, zeta).ok()?;
        let w = w_from_pair(&prev, &cur);
        prefix_a[n] = prefix_a[n - 1] + (1.0 + w.m11).norm().ln();
        prefix_d[n] = prefix_d[n - 1] + (1.0 + w.m22).norm().ln();
        prev = cur;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    rng.set_stream(index as u64 + 1);
    let (mut ba, mut bd) = (0.0f64, 0.0f64);
    for _ in 0..pairs {
        let k = rng.random_range(1..=plan.n_max);
        let l = rng.random_range(k..=plan.n_max);
        let weight = 1.0 + zeta.im * ((l - k) as f64).sqrt();
        ba = ba.max((prefix_a[l] - prefix_a[k - 1]).abs() / weight);
        bd = bd.max((prefix_d[l] - prefix_d[k - 1]).abs() / weight);
    }
    Some((ba, bd))
}

/// `((B_α, B_δ) on the half sample, (B_α, B_δ) on the full sample)`.
type FitPair = ((f64, f64), (f64, f64));

/// Fits the smallest `B` with `|ln Π_{n=k}^l |1+α_n|| ≤ B + B·Im ζ·√(l−k)`
/// (and the δ analogue) over sampled `ζ ∈ I × (0, ε_I]` and ranges; passes
/// when the fit is finite and grows by at most 20% when the sample is doubled.
pub fn check_diagonal_products(
    model: &CoefficientModel,
    interval: (f64, f64),
    eps_i: f64,
    plan: &DiagonalSampling,
) -> CertReport {
    let mut report = CertReport::new(
        "diagonal_products",
        format!(
            "{} energies x {} ranges (doubled) on [{}, {}] x (0, {eps_i}], n <= {}, seed {}",
            plan.zetas, plan.pairs, interval.0, interval.1, plan.n_max, plan.seed
        ),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let zetas: Vec<Complex64> = (0..2 * plan.zetas)
        .map(|_| {
            let e = rng.random_range(interval.0..=interval.1);
            let y = eps_i * (1.0 - rng.random::<f64>());
            Complex64::new(e, y)
        })
        .collect();
    let fits: Vec<Option<FitPair>> = zetas
        .par_iter()
        .enumerate()
        .map(|(i, &z)| {
            let full = diagonal_fit(model, z, plan, i, 2 * plan.pairs)?;
            let half = diagonal_fit(model, z, plan, i, plan.pairs)?;
            Some((half, full))
        })
        .collect();
    if fits.iter().any(Option::is_none) {
        return report;
    }
    let fits: Vec<_> = fits.into_iter().flatten().collect();
    let fold = |sel: &dyn Fn(&FitPair, usize) -> Option<f64>| {
        fits.iter().enumerate().filter_map(|(i, f)| sel(f, i)).fold(0.0f64, f64::max)
    };
    let n = plan.zetas;
    let b_half = fold(&|f, i| (i < n).then_some(f.0 .0.max(f.0 .1)));
    let b_full = fold(&|f, _| Some(f.1 .0.max(f.1 .1)));
    let b_alpha = fold(&|f, _| Some(f.1 .0));
    let b_delta = fold(&|f, _| Some(f.1 .1));
    let (worst_i, worst_v) = fits
        .iter()
        .enumerate()
        .map(|(i, f)| (i, f.1 .0.max(f.1 .1)))
        .fold((0, f64::NEG_INFINITY), |w, p| if p.1 > w.1 { p } else { w });
    report.worst_case = Some(WorstCase { e: zetas[worst_i].re, y: zetas[worst_i].im, value: worst_v });
    report.set("B", b_full);
    report.set("B_half_sample", b_half);
    report.set("B_alpha", b_alpha);
    report.set("B_delta", b_delta);
    let stable = b_full <= 1.2 * b_half || b_full < 1e-12;
    report.passed = b_full.is_finite() && stable;
    report
}

/// Probe sizes for [`check_harmonic_hypotheses`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HarmonicProbe {
    /// Gauss–Legendre order for hypothesis (i).
    pub quad_order: usize,
    /// Energies per strip row.
    pub e_points: usize,
    /// Heights per strip column.
    pub y_points: usize,
}

impl Default for HarmonicProbe {
    fn default() -> Self {
        Self { quad_order: 32, e_points: 16, y_points: 16 }
    }
}

/// Fitted constants of the three hypotheses for one truncation index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicConstants {
    /// `∫_I f_N⁺(E) dE`.
    pub positive_integral: f64,
    /// Smallest `C` with `f_N(ζ) ≥ −C/Im ζ` on the strip.
    pub lower_bound: f64,
    /// Smallest `C ≥ 0` with `f_N ≤ C` on `3ε_I/4 ≤ Im ζ ≤ ε_I`.
    pub upper_bound: f64,
    pub worst: WorstCase,
}

fn f_n(model: &CoefficientModel, n_trunc: usize, zeta: Complex64) -> Option<f64> {
    product_representation(model, n_trunc, zeta).ok().map(|p| p.f_n()).filter(|v| v.is_finite())
}

pub fn harmonic_constants(
    model: &CoefficientModel,
    n_trunc: usize,
    interval: &AdmissibleInterval,
    probe: &HarmonicProbe,
) -> Option<HarmonicConstants> {
    let (lo, hi) = (interval.lo, interval.hi);
    let rule = GaussLegendre::new(NonZeroUsize::new(probe.quad_order.max(1)).unwrap());
    let terms = rule
        .as_node_weight_pairs()
        .par_iter()
        .map(|&(x, w)| f_n(model, n_trunc, Complex64::from(0.5 * ((hi - lo) * x + (hi + lo)))).map(|f| w * f.max(0.0)))
        .collect::<Option<Vec<f64>>>()?;
    let positive_integral = 0.5 * (hi - lo) * terms.iter().sum::<f64>();

    let eps = interval.eps_i;
    let points: Vec<(f64, f64)> = grid(lo, hi, probe.e_points)
        .into_iter()
        .flat_map(|e| (1..=probe.y_points).map(move |j| (e, eps * j as f64 / probe.y_points as f64)))
        .collect();
    let values = points
        .par_iter()
        .map(|&(e, y)| f_n(model, n_trunc, Complex64::new(e, y)).map(|f| (e, y, f)))
        .collect::<Option<Vec<_>>>()?;
    let mut lower_bound = 0.0f64;
    let mut worst = WorstCase { e: lo, y: eps, value: 0.0 };
    for &(e, y, f) in &values {
        let needed = -f * y;
        if needed > lower_bound {
            lower_bound = needed;
            worst = WorstCase { e, y, value: f };
        }
    }
    let upper_bound = values.iter().filter(|v| v.1 >= 0.75 * eps).map(|v| v.2).fold(0.0f64, f64::max);
    Some(HarmonicConstants { positive_integral, lower_bound, upper_bound, worst })
}

/// Constants closer than this to zero count as equal for the stability test.
pub const HARMONIC_FLOOR: f64 = 0.05;

fn stable_within_factor_two(values: &[f64]) -> bool {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max <= 2.0 * min.max(HARMONIC_FLOOR)
}

/// Fits the three hypotheses on `f_N` for every `N` in `n_list`; passes when
/// all constants are finite and each stays within a factor 2 across `N`.
pub fn check_harmonic_hypotheses(
    model: &CoefficientModel,
    n_list: &[usize],
    interval: &AdmissibleInterval,
    probe: &HarmonicProbe,
) -> CertReport {
    let mut report = CertReport::new(
        "harmonic_hypotheses",
        format!(
            "N {n_list:?}; GL order {} on [{}, {}]; {}x{} strip to eps {}",
            probe.quad_order, interval.lo, interval.hi, probe.e_points, probe.y_points, interval.eps_i
        ),
    );
    let mut consts = Vec::new();
    for &n in n_list {
        match harmonic_constants(model, n, interval, probe) {
            Some(c) => {
                report.set(&format!("N{n:05}_positive_integral"), c.positive_integral);
                report.set(&format!("N{n:05}_lower_bound"), c.lower_bound);
                report.set(&format!("N{n:05}_upper_bound"), c.upper_bound);
                consts.push(c);
            }
            None => {
                report.set("failed_at_N", n as f64);
                return report;
            }
        }
    }
    if consts.is_empty() {
        return report;
    }
    let pick = |f: fn(&HarmonicConstants) -> f64| consts.iter().map(f).collect::<Vec<f64>>();
    let series = [pick(|c| c.positive_integral), pick(|c| c.lower_bound), pick(|c| c.upper_bound)];
    let finite = series.iter().flatten().all(|v| v.is_finite());
    report.passed = finite && series.iter().all(|s| stable_within_factor_two(s));
    for (name, s) in ["positive_integral", "lower_bound", "upper_bound"].iter().zip(&series) {
        report.set(&format!("{name}_max"), s.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    report.worst_case = consts.iter().map(|c| c.worst).max_by(|a, b| (-a.value * a.y).total_cmp(&(-b.value * b.y)));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::{admissible_intervals, interval_constants};
    use crate::coefficients::{OscillatoryDecay, Perturbation, Target};

    fn free_interval(lo: f64, hi: f64) -> AdmissibleInterval {
        let (eps_i, c_i) = interval_constants(&PeriodicBlock::free(), (lo, hi), 0.1).unwrap();
        AdmissibleInterval { lo, hi, eps_i, c_i, margin: 0.1 }
    }

    fn oscillatory() -> CoefficientModel {
        CoefficientModel::new(
            PeriodicBlock::free(),
            Perturbation::PowerDecayOscillatory(OscillatoryDecay {
                amplitude: 1.0,
                osc_exponent: 0.5,
                decay_exponent: 0.2,
                target: Target::Diagonal,
                l2_admissible: true,
            }),
        )
        .unwrap()
    }

    #[test]
    fn floquet_bound_free() {
        let iv = free_interval(-1.0, 1.0);
        assert!((iv.c_i - 0.25).abs() < 1e-6);
        let r = check_floquet_bound(&PeriodicBlock::free(), &iv);
        assert!(r.passed, "{r:?}");
        assert!(r.measured["C_I_measured"] >= 0.9 * 0.25);
    }

    #[test]
    fn floquet_bound_rejects_inflated_constant() {
        let mut iv = free_interval(-1.0, 1.0);
        iv.c_i *= 4.0;
        let r = check_floquet_bound(&PeriodicBlock::free(), &iv);
        assert!(!r.passed);
        let w = r.worst_case.unwrap();
        // g is smallest at E = 0, so the bound fails there first
        assert!(w.e.abs() < 0.1, "{w:?}");
        assert!(w.value < 0.0);
    }

    #[test]
    fn floquet_margin_grows_with_height() {
        let iv = free_interval(-1.0, 1.0);
        let c = STRIP_SLACK * iv.c_i;
        let margin = |y: f64| {
            (1.0 - c * y) - floquet_eigenvalue(&PeriodicBlock::free(), Complex64::new(0.3, y)).unwrap().z.norm()
        };
        let ys: Vec<f64> = (1..=8).map(|j| iv.eps_i * j as f64 / 8.0).collect();
        assert!(ys.windows(2).all(|w| margin(w[1]) > margin(w[0])));
    }

    #[test]
    fn floquet_bound_on_generated_intervals() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let q = rng.random_range(1..=4);
            let a: Vec<f64> = (0..q).map(|_| rng.random_range(0.5..1.5)).collect();
            let b: Vec<f64> = (0..q).map(|_| rng.random_range(-1.0..1.0)).collect();
            let block = PeriodicBlock::new(q, a, b).unwrap();
            let Ok(ivs) = admissible_intervals(&block, 0.02, 16) else { continue };
            for iv in ivs {
                assert!(check_floquet_bound(&block, &iv).passed);
            }
        }
    }

    #[test]
    fn w_summability_cases() {
        let zeta = Complex64::new(0.3, 0.05);
        let grid = [100, 200, 400, 800];
        let zero = CoefficientModel::unperturbed(PeriodicBlock::free());
        let r = check_w_summability(&zero, zeta, &grid, 0.05);
        assert!(r.passed);
        assert_eq!(r.measured["l2_norm"], 0.0);

        let finite =
            CoefficientModel::new(PeriodicBlock::free(), Perturbation::finite_diagonal(vec![0.3, -0.2, 0.1])).unwrap();
        let r = check_w_summability(&finite, zeta, &grid, 0.05);
        assert!(r.passed);
        assert_eq!(r.measured["last_increment"], 0.0);
        assert!(r.measured["l2_norm"] > 0.0);

        let r = check_w_summability(&oscillatory(), zeta, &[1000, 2000, 4000, 8000, 16000], 0.05);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn diagonal_products_cases() {
        let plan = DiagonalSampling { zetas: 4, pairs: 64, n_max: 400, seed: 3 };
        let zero = CoefficientModel::unperturbed(PeriodicBlock::free());
        let r = check_diagonal_products(&zero, (-1.0, 1.0), 0.05, &plan);
        assert!(r.passed);
        assert_eq!(r.measured["B"], 0.0);

        let finite =
            CoefficientModel::new(PeriodicBlock::free(), Perturbation::finite_diagonal(vec![0.3, -0.2, 0.1])).unwrap();
        let r = check_diagonal_products(&finite, (-1.0, 1.0), 0.05, &plan);
        assert!(r.measured["B"].is_finite() && r.measured["B"] > 0.0);

        let again = check_diagonal_products(&finite, (-1.0, 1.0), 0.05, &plan);
        assert_eq!(r, again);
    }

    #[test]
    fn harmonic_zero_perturbation() {
        let iv = free_interval(-1.0, 1.0);
        let zero = CoefficientModel::unperturbed(PeriodicBlock::free());
        let r = check_harmonic_hypotheses(&zero, &[5, 10], &iv, &HarmonicProbe::default());
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn harmonic_constants_freeze_beyond_support() {
        let iv = free_interval(-1.0, 1.0);
        let finite =
            CoefficientModel::new(PeriodicBlock::free(), Perturbation::finite_diagonal(vec![0.3, -0.2, 0.1])).unwrap();
        let probe = HarmonicProbe { quad_order: 16, e_points: 8, y_points: 8 };
        let a = harmonic_constants(&finite, 8, &iv, &probe).unwrap();
        let b = harmonic_constants(&finite, 16, &iv, &probe).unwrap();
        assert!((a.positive_integral - b.positive_integral).abs() < 1e-9);
        assert!((a.lower_bound - b.lower_bound).abs() < 1e-9);
        assert!((a.upper_bound - b.upper_bound).abs() < 1e-9);
    }
}
