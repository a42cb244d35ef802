//! Spectral bands of the periodic background and admissible intervals
//! inside them, with the strip constants `(ε_I, C_I)` of the Floquet bound
//! `|z(E+iy)| ≤ 1 − C_I·y`.

use num_complex::Complex64;

use crate::coefficients::PeriodicBlock;
use crate::error::{Error, Result};
use crate::roots::{golden_min, scan_roots};
use crate::transfer::{discriminant, discriminant_derivative, floquet_eigenvalue, monodromy};

/// Edge count differs from `2q`; expected when gaps are closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RootCountWarning {
    pub expected: usize,
    pub found: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandSet {
    /// Ordered, disjoint closed bands `[l, r]`.
    pub bands: Vec<(f64, f64)>,
    pub warning: Option<RootCountWarning>,
}

impl BandSet {
    pub fn contains(&self, e: f64) -> bool {
        self.bands.iter().any(|&(l, r)| l <= e && e <= r)
    }
}

fn real_delta(block: &PeriodicBlock, e: f64) -> f64 {
    discriminant(block, Complex64::from(e)).re
}

fn real_delta_prime(block: &PeriodicBlock, e: f64) -> f64 {
    discriminant_derivative(block, Complex64::from(e)).re
}

fn real_c(block: &PeriodicBlock, e: f64) -> f64 {
    monodromy(block, Complex64::from(e)).m21.re
}

/// Closed interval containing the whole spectrum.
fn spectral_bracket(block: &PeriodicBlock) -> (f64, f64) {
    let amax = block.a_values().iter().fold(0.0f64, |m, &v| m.max(v));
    let bmin = block.b_values().iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let bmax = block.b_values().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    (bmin - 2.0 * amax - 1.0, bmax + 2.0 * amax + 1.0)
}

fn scan_steps(block: &PeriodicBlock) -> usize {
    64 * block.q()
}

/// Bands `{E : |Δ(E)| ≤ 2}` located by a sign scan of `Δ ∓ 2` plus bisection.
pub fn band_edges(block: &PeriodicBlock, tol: f64) -> Result<BandSet> {
    if !(tol > 0.0) {
        return Err(Error::validation("root tolerance must be positive"));
    }
    let (lo, hi) = spectral_bracket(block);
    let steps = scan_steps(block);
    let mut edges = scan_roots(|e| real_delta(block, e) - 2.0, lo, hi, steps, tol);
    edges.extend(scan_roots(|e| real_delta(block, e) + 2.0, lo, hi, steps, tol));
    edges.sort_by(f64::total_cmp);

    let expected = 2 * block.q();
    let warning = (edges.len() != expected).then_some(RootCountWarning { expected, found: edges.len() });

    let mut bands: Vec<(f64, f64)> = Vec::new();
    for w in edges.windows(2) {
        let (l, r) = (w[0], w[1]);
        if real_delta(block, 0.5 * (l + r)).abs() > 2.0 {
            continue;
        }
        match bands.last_mut() {
            Some(last) if last.1 == l => last.1 = r,
            _ => bands.push((l, r)),
        }
    }
    Ok(BandSet { bands, warning })
}

/// A closed band-interior interval with its Floquet strip constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleInterval {
    pub lo: f64,
    pub hi: f64,
    pub eps_i: f64,
    pub c_i: f64,
    pub margin: f64,
}

pub const DEFAULT_EPS_PROBE: f64 = 0.1;
const EDGE_TOL: f64 = 1e-13;

/// Band interiors with `margin`-neighbourhoods of band edges and of the real
/// zeros of `Δ'` and `C` removed, at most `count_limit` intervals in order.
pub fn admissible_intervals(block: &PeriodicBlock, margin: f64, count_limit: usize) -> Result<Vec<AdmissibleInterval>> {
    admissible_intervals_with_probe(block, margin, count_limit, DEFAULT_EPS_PROBE)
}

pub fn admissible_intervals_with_probe(
    block: &PeriodicBlock,
    margin: f64,
    count_limit: usize,
    eps_probe: f64,
) -> Result<Vec<AdmissibleInterval>> {
    if !(margin > 0.0) {
        return Err(Error::validation("margin must be positive"));
    }
    let bands = band_edges(block, EDGE_TOL)?;
    let mut out = Vec::new();
    for &(l, r) in &bands.bands {
        let steps = scan_steps(block);
        let mut cuts = vec![l];
        cuts.extend(scan_roots(|e| real_delta_prime(block, e), l, r, steps, EDGE_TOL));
        cuts.extend(scan_roots(|e| real_c(block, e), l, r, steps, EDGE_TOL));
        cuts.push(r);
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0] + margin, w[1] - margin);
            if lo < hi && out.len() < count_limit {
                let (eps_i, c_i) = interval_constants(block, (lo, hi), eps_probe)?;
                out.push(AdmissibleInterval { lo, hi, eps_i, c_i, margin });
            }
        }
    }
    if out.is_empty() {
        return Err(Error::NoAdmissibleInterval { margin });
    }
    Ok(out)
}

const G_GRID: usize = 129;
const STRIP_E_GRID: usize = 33;
const STRIP_Y_GRID: usize = 32;
const MAX_HALVINGS: usize = 60;

/// `g(E) = |Δ'(E)|/√(4 − Δ(E)²)`, the first-order decay rate of `|z(E+iy)|` in `y`.
pub fn floquet_rate(block: &PeriodicBlock, e: f64) -> f64 {
    let d = real_delta(block, e);
    real_delta_prime(block, e).abs() / (4.0 - d * d).sqrt()
}

/// `(ε_I, C_I)` for `I = [lo, hi]`: `C_I = min_I g / 2`, and `ε_I` the largest
/// `eps_probe·2^{−k}` with `|z(E+iy)| ≤ 1 − C_I·y` on the probe grid `0 < y ≤ ε_I`.
pub fn interval_constants(block: &PeriodicBlock, interval: (f64, f64), eps_probe: f64) -> Result<(f64, f64)> {
    let (lo, hi) = interval;
    if !(lo < hi) || !(eps_probe > 0.0) {
        return Err(Error::validation("interval constants need lo < hi and eps_probe > 0"));
    }
    let grid = |n: usize| (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64);
    for e in grid(G_GRID) {
        floquet_eigenvalue(block, Complex64::from(e))?;
        if real_delta(block, e).abs() >= 2.0 {
            return Err(Error::validation(format!("E = {e} lies outside the bands")));
        }
    }
    let (arg, _) =
        grid(G_GRID)
            .map(|e| (e, floquet_rate(block, e)))
            .fold((lo, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc });
    let h = (hi - lo) / (G_GRID - 1) as f64;
    let (e_min, g_min) = golden_min(|e| floquet_rate(block, e), (arg - h).max(lo), (arg + h).min(hi), 1e-12);
    let g_min = g_min.min(grid(G_GRID).map(|e| floquet_rate(block, e)).fold(f64::INFINITY, f64::min));
    if !(g_min >= 1e-10) {
        return Err(Error::DegenerateBranch { energy: e_min });
    }
    let c_i = g_min / 2.0;

    let mut eps = eps_probe;
    for _ in 0..MAX_HALVINGS {
        let ok = grid(STRIP_E_GRID).all(|e| {
            (1..=STRIP_Y_GRID).all(|j| {
                let y = eps * j as f64 / STRIP_Y_GRID as f64;
                floquet_eigenvalue(block, Complex64::new(e, y)).is_ok_and(|f| f.z.norm() <= 1.0 - c_i * y)
            })
        });
        if ok {
            return Ok((eps, c_i));
        }
        eps /= 2.0;
    }
    Err(Error::DegenerateBranch { energy: e_min })
}
