//! Run configuration: TOML ingestion, `--set` overrides and validation.
//!
//! ```toml
//! [block]
//! q = 2
//! a = [1.0, 2.0]
//! b = [0.0, 0.0]
//!
//! [perturbation]            # optional, defaults to kind = "zero"
//! kind = "finite"           # zero | finite | oscillatory | random_decay
//! alpha = [0.1]
//! beta = [0.2, -0.1]
//!
//! [experiment]              # optional, every key has a default
//! n = 20
//! ```

use std::path::Path;

use jostspec::coefficients::{
    q_variation_is_cauchy, CoefficientModel, Coefficients, OscillatoryDecay, PeriodicBlock, Perturbation, RandomDecay,
    Target,
};
use jostspec::jost::Precision;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    Bands,
    Density,
    Entropy,
    Certify,
    Compare,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Bands => "bands",
            Experiment::Density => "density",
            Experiment::Entropy => "entropy",
            Experiment::Certify => "certify",
            Experiment::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub q: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    #[default]
    Diagonal,
    OffDiagonal,
    Both,
}

impl From<TargetSpec> for Target {
    fn from(t: TargetSpec) -> Self {
        match t {
            TargetSpec::Diagonal => Target::Diagonal,
            TargetSpec::OffDiagonal => Target::OffDiagonal,
            TargetSpec::Both => Target::Both,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationSpec {
    #[default]
    Zero,
    Finite {
        #[serde(default)]
        alpha: Vec<f64>,
        #[serde(default)]
        beta: Vec<f64>,
    },
    Oscillatory {
        amplitude: f64,
        osc_exponent: f64,
        decay_exponent: f64,
        #[serde(default)]
        target: TargetSpec,
        #[serde(default)]
        l2_admissible: bool,
    },
    RandomDecay {
        sigma: f64,
        decay_exponent: f64,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        target: TargetSpec,
    },
}

#[derive(Debug, Clone, Copy, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionSpec {
    #[default]
    Double,
    DoubleDouble,
}

impl From<PrecisionSpec> for Precision {
    fn from(p: PrecisionSpec) -> Self {
        match p {
            PrecisionSpec::Double => Precision::Double,
            PrecisionSpec::DoubleDouble => Precision::DoubleDouble,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    /// Truncation index for density, compare and certify.
    pub n: usize,
    /// Truncation indices for entropy and the harmonic certificate.
    pub n_list: Vec<usize>,
    /// Explicit energy interval; admissible intervals are used when absent.
    pub interval: Option<[f64; 2]>,
    pub margin: f64,
    pub max_intervals: usize,
    pub grid_points: usize,
    pub quad_order: usize,
    pub band_tol: f64,
    pub precision: PrecisionSpec,
    /// `compare` exits 3 when the largest relative error reaches this.
    pub compare_tol: f64,
    /// `density` also evaluates the oracle.
    pub with_oracle: bool,
    pub w_cutoffs: Vec<usize>,
    pub w_tol: f64,
    pub diag_energies: usize,
    pub diag_pairs: usize,
    pub diag_n_max: usize,
    pub harmonic_quad_order: usize,
    pub harmonic_points: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            n: 20,
            n_list: vec![10, 20, 40, 80],
            interval: None,
            margin: 0.1,
            max_intervals: 8,
            grid_points: 200,
            quad_order: 256,
            band_tol: 1e-13,
            precision: PrecisionSpec::Double,
            compare_tol: 1e-5,
            with_oracle: false,
            w_cutoffs: vec![16, 32, 64, 128],
            w_tol: 0.05,
            diag_energies: 64,
            diag_pairs: 256,
            diag_n_max: 128,
            harmonic_quad_order: 32,
            harmonic_points: 16,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub block: BlockSpec,
    #[serde(default)]
    pub perturbation: PerturbationSpec,
    #[serde(default)]
    pub experiment: ExperimentSpec,
    /// Value of `--seed`, if given.
    #[serde(skip)]
    pub seed_flag: Option<u64>,
}

/// Sites checked for positivity of `a(n)` before any computation.
const POSITIVITY_SCAN: usize = 100_000;
const CAUCHY_CUTOFFS: [usize; 3] = [1_000, 10_000, 100_000];
const CAUCHY_TOL: f64 = 0.05;

/// Applies `key.path=value` to a TOML document. The value is parsed as a TOML
/// value when possible and kept as a bare string otherwise.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::validation(format!("override `{assignment}` is not of the form key=value")))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::validation(format!("override key `{path}` is malformed")));
    }
    let (last, parents) = keys.split_last().expect("nonempty split");
    let mut table = doc;
    for k in parents {
        let entry = table.entry(k.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::validation(format!("override key `{path}`: `{k}` is not a section")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, overrides, seed)
    }

    pub fn parse(text: &str, overrides: &[String], seed: Option<u64>) -> Result<Self, CliError> {
        let mut doc: toml::Table = toml::from_str(text).map_err(|e| CliError::validation(format!("config: {e}")))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let mut cfg: RunConfig =
            toml::Value::Table(doc).try_into().map_err(|e| CliError::validation(format!("config: {e}")))?;
        if let (Some(s), PerturbationSpec::RandomDecay { seed, .. }) = (seed, &mut cfg.perturbation) {
            *seed = Some(s);
        }
        cfg.seed_flag = seed;
        cfg.check_ranges()?;
        Ok(cfg)
    }

    fn check_ranges(&self) -> Result<(), CliError> {
        let x = &self.experiment;
        let fail = |msg: &str| Err(CliError::validation(msg.to_string()));
        if x.n < 1 || x.n_list.is_empty() || x.n_list.contains(&0) {
            return fail("experiment.n and experiment.n_list entries must be at least 1");
        }
        if let Some([lo, hi]) = x.interval {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return fail("experiment.interval must be [lo, hi] with lo < hi");
            }
        }
        if !(x.margin > 0.0) || x.max_intervals == 0 {
            return fail("experiment.margin must be positive and experiment.max_intervals at least 1");
        }
        if x.grid_points < 2 || x.quad_order < 4 || x.harmonic_quad_order < 4 || x.harmonic_points < 2 {
            return fail("grid sizes must be at least 2 and quadrature orders at least 4");
        }
        if !(x.band_tol > 0.0) || !(x.compare_tol > 0.0) || !(x.w_tol > 0.0) {
            return fail("tolerances must be positive");
        }
        if x.w_cutoffs.is_empty() || x.w_cutoffs[0] < 1 || x.w_cutoffs.windows(2).any(|w| w[1] <= w[0]) {
            return fail("experiment.w_cutoffs must be strictly increasing and positive");
        }
        if x.diag_energies == 0 || x.diag_pairs == 0 || x.diag_n_max < 2 {
            return fail("diagonal-product sampling sizes must be positive");
        }
        Ok(())
    }

    /// `--seed`, else the random perturbation's seed, else 0.
    pub fn seed(&self) -> u64 {
        match self.perturbation {
            PerturbationSpec::RandomDecay { seed, .. } => seed.or(self.seed_flag).unwrap_or(0),
            _ => self.seed_flag.unwrap_or(0),
        }
    }

    /// Builds the model and rejects nonpositive `a(n)` and undeclared
    /// square-summable q-variation up front.
    pub fn model(&self) -> Result<CoefficientModel, CliError> {
        let b = &self.block;
        let block = PeriodicBlock::new(b.q, b.a.clone(), b.b.clone())?;
        let pert = match &self.perturbation {
            PerturbationSpec::Zero => Perturbation::Zero,
            PerturbationSpec::Finite { alpha, beta } => {
                Perturbation::FiniteList { alpha: alpha.clone(), beta: beta.clone() }
            }
            PerturbationSpec::Oscillatory { amplitude, osc_exponent, decay_exponent, target, l2_admissible } => {
                Perturbation::PowerDecayOscillatory(OscillatoryDecay {
                    amplitude: *amplitude,
                    osc_exponent: *osc_exponent,
                    decay_exponent: *decay_exponent,
                    target: (*target).into(),
                    l2_admissible: *l2_admissible,
                })
            }
            PerturbationSpec::RandomDecay { sigma, decay_exponent, seed, target } => {
                Perturbation::RandomDecay(RandomDecay {
                    sigma: *sigma,
                    decay_exponent: *decay_exponent,
                    seed: seed.unwrap_or(0),
                    target: (*target).into(),
                })
            }
        };
        let model = CoefficientModel::new(block, pert)?;
        let scan = match model.perturbation().support() {
            Some(s) => s + 1,
            None => POSITIVITY_SCAN,
        };
        for n in 0..=scan {
            model.a(n)?;
        }
        if model.perturbation().l2_admissible() && !q_variation_is_cauchy(&model, &CAUCHY_CUTOFFS, CAUCHY_TOL)? {
            return Err(CliError::validation(
                "perturbation declared square-summable in q-variation but partial sums do not settle".to_string(),
            ));
        }
        Ok(model)
    }

    /// SHA-256 of the canonical `[block]` and `[perturbation]` sections.
    pub fn model_hash(&self) -> String {
        #[derive(Serialize)]
        struct ModelPart<'a> {
            block: &'a BlockSpec,
            perturbation: &'a PerturbationSpec,
        }
        let canonical = toml::to_string(&ModelPart { block: &self.block, perturbation: &self.perturbation })
            .expect("model sections serialize");
        hex(&Sha256::digest(canonical.as_bytes()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FREE: &str = "[block]\nq = 1\na = [1.0]\nb = [0.0]\n";

    #[test]
    fn defaults_fill_missing_sections() {
        let cfg = RunConfig::parse(FREE, &[], None).unwrap();
        assert!(matches!(cfg.perturbation, PerturbationSpec::Zero));
        assert_eq!(cfg.experiment.n, 20);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = format!("{FREE}[experiment]\nnn = 3\n");
        assert!(matches!(RunConfig::parse(&bad, &[], None), Err(CliError::Validation(_))));
        let bad = format!("{FREE}[perturbation]\nkind = \"finite\"\ngamma = [1.0]\n");
        assert!(RunConfig::parse(&bad, &[], None).is_err());
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let cfg = RunConfig::parse(
            FREE,
            &[
                "experiment.n=7".into(),
                "experiment.interval=[-1.0, 1.0]".into(),
                "experiment.precision=double_double".into(),
            ],
            None,
        )
        .unwrap();
        assert_eq!(cfg.experiment.n, 7);
        assert_eq!(cfg.experiment.interval, Some([-1.0, 1.0]));
        assert_eq!(cfg.experiment.precision, PrecisionSpec::DoubleDouble);
    }

    #[test]
    fn override_without_equals_fails() {
        assert!(RunConfig::parse(FREE, &["experiment.n".into()], None).is_err());
    }

    #[test]
    fn seed_flag_overrides_random_perturbation() {
        let text =
            format!("{FREE}[perturbation]\nkind = \"random_decay\"\nsigma = 1.0\ndecay_exponent = 0.5\nseed = 3\n");
        assert_eq!(RunConfig::parse(&text, &[], None).unwrap().seed(), 3);
        assert_eq!(RunConfig::parse(&text, &[], Some(9)).unwrap().seed(), 9);
        assert_eq!(RunConfig::parse(FREE, &[], Some(4)).unwrap().seed(), 4);
        assert_eq!(RunConfig::parse(FREE, &[], None).unwrap().seed(), 0);
    }

    #[test]
    fn nonpositive_a_in_perturbation_is_a_validation_error() {
        let text = format!("{FREE}[perturbation]\nkind = \"finite\"\nalpha = [0.0, -1.5]\n");
        let cfg = RunConfig::parse(&text, &[], None).unwrap();
        assert!(cfg.model().is_err());
    }

    #[test]
    fn hash_depends_on_model_only() {
        let a = RunConfig::parse(FREE, &[], None).unwrap();
        let b = RunConfig::parse(FREE, &["experiment.n=3".into()], None).unwrap();
        let c = RunConfig::parse(FREE, &["block.b=[0.5]".into()], None).unwrap();
        assert_eq!(a.model_hash(), b.model_hash());
        assert_ne!(a.model_hash(), c.model_hash());
        assert_eq!(a.model_hash().len(), 64);
    }
}
