//! Experiment drivers. Each returns a finished table; nothing is written here.

use jostspec::bands::{admissible_intervals, band_edges, interval_constants, AdmissibleInterval, DEFAULT_EPS_PROBE};
use jostspec::certify::{
    check_diagonal_products, check_floquet_bound, check_harmonic_hypotheses, check_w_summability, CertReport,
    DiagonalSampling, HarmonicProbe,
};
use jostspec::coefficients::CoefficientModel;
use jostspec::jost::{ac_density_with, Precision};
use jostspec::measures::{entropy_integral, oracle_density, uniform_grid};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Experiment, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Table};

pub struct Outcome {
    pub table: Table,
    /// False when a certificate failed or `compare` exceeded its tolerance.
    pub passed: bool,
}

fn warn(value: serde_json::Value) {
    eprintln!("{value}");
}

pub fn run(experiment: Experiment, cfg: &RunConfig, model: &CoefficientModel) -> Result<Outcome, CliError> {
    match experiment {
        Experiment::Bands => bands(cfg, model),
        Experiment::Density => density(cfg, model),
        Experiment::Compare => compare(cfg, model),
        Experiment::Entropy => entropy(cfg, model),
        Experiment::Certify => certify(cfg, model),
    }
}

fn intervals(cfg: &RunConfig, model: &CoefficientModel) -> Result<Vec<AdmissibleInterval>, CliError> {
    let x = &cfg.experiment;
    let block = model.block();
    match x.interval {
        Some([lo, hi]) => {
            let (eps_i, c_i) = interval_constants(block, (lo, hi), DEFAULT_EPS_PROBE)?;
            Ok(vec![AdmissibleInterval { lo, hi, eps_i, c_i, margin: 0.0 }])
        }
        None => Ok(admissible_intervals(block, x.margin, x.max_intervals)?),
    }
}

fn bands(cfg: &RunConfig, model: &CoefficientModel) -> Result<Outcome, CliError> {
    let set = band_edges(model.block(), cfg.experiment.band_tol)?;
    if let Some(w) = set.warning {
        warn(json!({"kind": "root_count_warning", "expected": w.expected, "found": w.found}));
    }
    let mut table = Table::new(vec!["lo", "hi"]);
    for (lo, hi) in set.bands {
        table.push(vec![Cell::Float(lo), Cell::Float(hi)]);
    }
    Ok(Outcome { table, passed: true })
}

/// `(E, key, oracle)` on the uniform grids of every interval; the oracle
/// column is only filled when requested.
fn sample_density(
    cfg: &RunConfig,
    model: &CoefficientModel,
    with_oracle: bool,
) -> Result<Vec<(f64, f64, Option<f64>)>, CliError> {
    let x = &cfg.experiment;
    let precision: Precision = x.precision.into();
    let energies: Vec<f64> =
        intervals(cfg, model)?.iter().flat_map(|iv| uniform_grid(iv.lo, iv.hi, x.grid_points)).collect();
    let rows = energies
        .par_iter()
        .map(|&e| {
            let key = ac_density_with(model, x.n, e, precision)?;
            let orc = if with_oracle { Some(oracle_density(model, x.n, e)?) } else { None };
            Ok((e, key, orc))
        })
        .collect::<Result<Vec<_>, jostspec::Error>>()?;
    Ok(rows)
}

fn rel_err(key: f64, orc: f64) -> f64 {
    (key - orc).abs() / key.abs()
}

fn density(cfg: &RunConfig, model: &CoefficientModel) -> Result<Outcome, CliError> {
    let with_oracle = cfg.experiment.with_oracle;
    let rows = sample_density(cfg, model, with_oracle)?;
    let mut table =
        Table::new(if with_oracle { vec!["E", "value", "value_oracle", "rel_err"] } else { vec!["E", "value"] });
    for (e, key, orc) in rows {
        let mut row = vec![Cell::Float(e), Cell::Float(key)];
        if let Some(o) = orc {
            row.extend([Cell::Float(o), Cell::Float(rel_err(key, o))]);
        }
        table.push(row);
    }
    Ok(Outcome { table, passed: true })
}

fn compare(cfg: &RunConfig, model: &CoefficientModel) -> Result<Outcome, CliError> {
    let rows = sample_density(cfg, model, true)?;
    let mut table = Table::new(vec!["E", "density_key", "density_oracle", "rel_err"]);
    let mut worst = 0.0f64;
    for (e, key, orc) in rows {
        let orc = orc.expect("oracle requested");
        let r = rel_err(key, orc);
        worst = worst.max(r);
        table.push(vec![Cell::Float(e), Cell::Float(key), Cell::Float(orc), Cell::Float(r)]);
    }
    let passed = worst < cfg.experiment.compare_tol;
    if !passed {
        warn(json!({"kind": "compare_tolerance", "max_rel_err": worst, "tolerance": cfg.experiment.compare_tol}));
    }
    Ok(Outcome { table, passed })
}

fn entropy(cfg: &RunConfig, model: &CoefficientModel) -> Result<Outcome, CliError> {
    let x = &cfg.experiment;
    let ivs = intervals(cfg, model)?;
    let mut table = Table::new(vec!["N", "I_lo", "I_hi", "value", "quad_order"]);
    for &n in &x.n_list {
        for iv in &ivs {
            let r = entropy_integral(model, n, (iv.lo, iv.hi), x.quad_order)?;
            if !r.converged {
                warn(json!({"kind": "quadrature_not_converged", "N": n, "value": r.value, "refined": r.refined_value}));
            }
            table.push(vec![
                Cell::Int(n),
                Cell::Float(iv.lo),
                Cell::Float(iv.hi),
                Cell::Float(r.value),
                Cell::Int(r.quad_order),
            ]);
        }
    }
    Ok(Outcome { table, passed: true })
}

fn certify(cfg: &RunConfig, model: &CoefficientModel) -> Result<Outcome, CliError> {
    let x = &cfg.experiment;
    let ivs = intervals(cfg, model)?;
    let plan = DiagonalSampling { zetas: x.diag_energies, pairs: x.diag_pairs, n_max: x.diag_n_max, seed: cfg.seed() };
    let probe =
        HarmonicProbe { quad_order: x.harmonic_quad_order, e_points: x.harmonic_points, y_points: x.harmonic_points };
    let mut reports: Vec<(usize, CertReport)> = Vec::new();
    for (i, iv) in ivs.iter().enumerate() {
        let zeta = Complex64::new(0.5 * (iv.lo + iv.hi), 0.5 * iv.eps_i);
        reports.push((i, check_floquet_bound(model.block(), iv)));
        reports.push((i, check_w_summability(model, zeta, &x.w_cutoffs, x.w_tol)));
        reports.push((i, check_diagonal_products(model, (iv.lo, iv.hi), iv.eps_i, &plan)));
        reports.push((i, check_harmonic_hypotheses(model, &x.n_list, iv, &probe)));
    }
    let mut table = Table::new(vec!["name", "passed", "constant_name", "constant_value", "worst_E", "worst_y"]);
    for (i, r) in &reports {
        let (we, wy) = r.worst_case.map_or((f64::NAN, f64::NAN), |w| (w.e, w.y));
        let name = format!("{}#{i}", r.name);
        let constants: Vec<(&str, f64)> = if r.measured.is_empty() {
            vec![("none", f64::NAN)]
        } else {
            r.measured.iter().map(|(k, v)| (k.as_str(), *v)).collect()
        };
        for (k, v) in constants {
            table.push(vec![
                Cell::Text(name.clone()),
                Cell::Bool(r.passed),
                Cell::Text(k.to_string()),
                Cell::Float(v),
                Cell::Float(we),
                Cell::Float(wy),
            ]);
        }
    }
    Ok(Outcome { table, passed: reports.iter().all(|(_, r)| r.passed) })
}
