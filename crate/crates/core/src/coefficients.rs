//! Jacobi coefficient sequences: a periodic background plus a perturbation,
//! with optional truncation back to the background.
//!
//! Sites are 1-based. The background is extended periodically in both
//! directions, so `a°₀ = a°_q`, and the model always reports `a(0) = a°₀`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Anything that can hand out Jacobi coefficients site by site.
pub trait Coefficients {
    /// Period of the background.
    fn period(&self) -> usize;
    /// Off-diagonal coefficient `a(n)`, `n ≥ 0`.
    fn a(&self, n: usize) -> Result<f64>;
    /// Diagonal coefficient `b(n)`, `n ≥ 1`.
    fn b(&self, n: usize) -> f64;
}

/// One period `(a°₁…a°_q, b°₁…b°_q)` of the background.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicBlock {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl PeriodicBlock {
    pub fn new(q: usize, a_bg: Vec<f64>, b_bg: Vec<f64>) -> Result<Self> {
        if q == 0 {
            return Err(Error::validation("period q must be at least 1"));
        }
        if a_bg.len() != q || b_bg.len() != q {
            return Err(Error::validation(format!(
                "background lengths ({}, {}) do not match period {q}",
                a_bg.len(),
                b_bg.len()
            )));
        }
        if let Some((k, &v)) = a_bg.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::validation(format!("a°_{} = {v} must be positive", k + 1)));
        }
        if let Some((k, &v)) = b_bg.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::validation(format!("b°_{} = {v} must be finite", k + 1)));
        }
        Ok(Self { a: a_bg, b: b_bg })
    }

    /// The free Laplacian `a ≡ 1, b ≡ 0` as a one-periodic block.
    pub fn free() -> Self {
        Self { a: vec![1.0], b: vec![0.0] }
    }

    pub fn q(&self) -> usize {
        self.a.len()
    }

    pub fn a_values(&self) -> &[f64] {
        &self.a
    }

    pub fn b_values(&self) -> &[f64] {
        &self.b
    }

    /// `a°_k` for any `k ≥ 0`.
    #[inline]
    pub fn a_bg(&self, k: usize) -> f64 {
        let q = self.a.len();
        self.a[(k + q - 1) % q]
    }

    /// `b°_k` for any `k ≥ 0`.
    #[inline]
    pub fn b_bg(&self, k: usize) -> f64 {
        let q = self.b.len();
        self.b[(k + q - 1) % q]
    }

    /// Same block with every diagonal entry moved by `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self { a: self.a.clone(), b: self.b.iter().map(|b| b + shift).collect() }
    }
}

impl Coefficients for PeriodicBlock {
    fn period(&self) -> usize {
        self.q()
    }

    fn a(&self, n: usize) -> Result<f64> {
        Ok(self.a_bg(n))
    }

    fn b(&self, n: usize) -> f64 {
        self.b_bg(n)
    }
}

/// Which coefficient sequence an analytic perturbation family acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Diagonal,
    OffDiagonal,
    Both,
}

impl Target {
    fn hits_a(self) -> bool {
        matches!(self, Target::OffDiagonal | Target::Both)
    }

    fn hits_b(self) -> bool {
        matches!(self, Target::Diagonal | Target::Both)
    }
}

/// `c·cos(n^s)/n^γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatoryDecay {
    pub amplitude: f64,
    pub osc_exponent: f64,
    pub decay_exponent: f64,
    pub target: Target,
    /// Declared membership in the square-summable q-variation class.
    pub l2_admissible: bool,
}

impl OscillatoryDecay {
    #[inline]
    fn value(&self, n: usize) -> f64 {
        let x = n as f64;
        self.amplitude * x.powf(self.osc_exponent).cos() / x.powf(self.decay_exponent)
    }
}

/// `σ·U_n/n^γ` with `U_n` i.i.d. uniform on `[−1, 1]`, drawn on demand from
/// a seeded counter-based stream so that any site can be evaluated directly.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomDecay {
    pub sigma: f64,
    pub decay_exponent: f64,
    pub seed: u64,
    pub target: Target,
}

impl RandomDecay {
    fn uniform(&self, n: usize, lane: u128) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_word_pos(4 * n as u128 + 2 * lane);
        2.0 * rng.random::<f64>() - 1.0
    }

    fn value(&self, n: usize, lane: u128) -> f64 {
        self.sigma * self.uniform(n, lane) / (n as f64).powf(self.decay_exponent)
    }
}

/// Perturbation `(α_n, β_n)` added to the background.
#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    Zero,
    /// Explicit `α_n = alpha[n-1]`, `β_n = beta[n-1]`; zero past the lists.
    FiniteList {
        alpha: Vec<f64>,
        beta: Vec<f64>,
    },
    PowerDecayOscillatory(OscillatoryDecay),
    RandomDecay(RandomDecay),
}

impl Perturbation {
    pub fn finite_diagonal(beta: Vec<f64>) -> Self {
        Perturbation::FiniteList { alpha: Vec::new(), beta }
    }

    /// Checks family parameters; list contents are checked lazily on evaluation.
    pub fn validate(&self) -> Result<()> {
        match self {
            Perturbation::Zero => Ok(()),
            Perturbation::FiniteList { alpha, beta } => {
                if alpha.iter().chain(beta).all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::validation("finite_list perturbation has non-finite entries"))
                }
            }
            Perturbation::PowerDecayOscillatory(p) => {
                if !(p.decay_exponent > 0.0) {
                    return Err(Error::validation(format!("decay exponent γ = {} must be positive", p.decay_exponent)));
                }
                if !p.amplitude.is_finite() || !p.osc_exponent.is_finite() {
                    return Err(Error::validation("oscillatory perturbation parameters must be finite"));
                }
                Ok(())
            }
            Perturbation::RandomDecay(p) => {
                if !(p.decay_exponent > 0.0) || !p.sigma.is_finite() {
                    return Err(Error::validation("random_decay needs finite σ and positive γ"));
                }
                Ok(())
            }
        }
    }

    /// Last site carrying a nonzero entry, when the perturbation is finitely supported.
    pub fn support(&self) -> Option<usize> {
        match self {
            Perturbation::Zero => Some(0),
            Perturbation::FiniteList { alpha, beta } => Some(alpha.len().max(beta.len())),
            _ => None,
        }
    }

    /// The same perturbation multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            Perturbation::Zero => Perturbation::Zero,
            Perturbation::FiniteList { alpha, beta } => Perturbation::FiniteList {
                alpha: alpha.iter().map(|v| v * factor).collect(),
                beta: beta.iter().map(|v| v * factor).collect(),
            },
            Perturbation::PowerDecayOscillatory(p) => {
                Perturbation::PowerDecayOscillatory(OscillatoryDecay { amplitude: p.amplitude * factor, ..p.clone() })
            }
            Perturbation::RandomDecay(p) => {
                Perturbation::RandomDecay(RandomDecay { sigma: p.sigma * factor, ..p.clone() })
            }
        }
    }

    pub fn l2_admissible(&self) -> bool {
        match self {
            Perturbation::Zero | Perturbation::FiniteList { .. } => true,
            Perturbation::PowerDecayOscillatory(p) => p.l2_admissible,
            Perturbation::RandomDecay(_) => false,
        }
    }

    #[inline]
    fn alpha(&self, n: usize) -> f64 {
        match self {
            Perturbation::Zero => 0.0,
            Perturbation::FiniteList { alpha, .. } => alpha.get(n - 1).copied().unwrap_or(0.0),
            Perturbation::PowerDecayOscillatory(p) if p.target.hits_a() => p.value(n),
            Perturbation::RandomDecay(p) if p.target.hits_a() => p.value(n, 1),
            _ => 0.0,
        }
    }

    #[inline]
    fn beta(&self, n: usize) -> f64 {
        match self {
            Perturbation::Zero => 0.0,
            Perturbation::FiniteList { beta, .. } => beta.get(n - 1).copied().unwrap_or(0.0),
            Perturbation::PowerDecayOscillatory(p) if p.target.hits_b() => p.value(n),
            Perturbation::RandomDecay(p) if p.target.hits_b() => p.value(n, 0),
            _ => 0.0,
        }
    }
}

/// Full coefficient sequences `a(n) = a°_n + α_n`, `b(n) = b°_n + β_n`,
/// evaluated on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientModel {
    block: PeriodicBlock,
    pert: Perturbation,
    truncation: Option<usize>,
}

impl CoefficientModel {
    pub fn new(block: PeriodicBlock, pert: Perturbation) -> Result<Self> {
        pert.validate()?;
        Ok(Self { block, pert, truncation: None })
    }

    pub fn unperturbed(block: PeriodicBlock) -> Self {
        Self { block, pert: Perturbation::Zero, truncation: None }
    }

    pub fn block(&self) -> &PeriodicBlock {
        &self.block
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.pert
    }

    pub fn truncation(&self) -> Option<usize> {
        self.truncation
    }

    /// `J^N`: perturbed coefficients up to `(N−1)q`, background beyond.
    ///
    /// Truncating an already truncated model keeps the smaller index.
    pub fn truncate(&self, n_trunc: usize) -> Result<Self> {
        if n_trunc < 1 {
            return Err(Error::validation("truncation index N must be at least 1"));
        }
        let effective = self.truncation.map_or(n_trunc, |m| m.min(n_trunc));
        Ok(Self { truncation: Some(effective), ..self.clone() })
    }

    /// Same model with the background diagonal shifted by `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self { block: self.block.shifted(shift), ..self.clone() }
    }

    /// Same model with the perturbation multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { pert: self.pert.scaled(factor), ..self.clone() }
    }

    #[inline]
    fn cutoff(&self) -> Option<usize> {
        self.truncation.map(|n| (n - 1) * self.block.q())
    }

    /// `a(n)` without the positivity check.
    #[inline]
    pub fn a_unchecked(&self, n: usize) -> f64 {
        if n == 0 {
            return self.block.a_bg(0);
        }
        match self.cutoff() {
            Some(c) if n >= c => self.block.a_bg(n),
            _ => self.block.a_bg(n) + self.pert.alpha(n),
        }
    }
}

impl Coefficients for CoefficientModel {
    fn period(&self) -> usize {
        self.block.q()
    }

    #[inline]
    fn a(&self, n: usize) -> Result<f64> {
        let v = self.a_unchecked(n);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::Coefficient { n, value: v })
        }
    }

    #[inline]
    fn b(&self, n: usize) -> f64 {
        if n == 0 {
            return self.block.b_bg(0);
        }
        match self.cutoff() {
            Some(c) if n > c => self.block.b_bg(n),
            _ => self.block.b_bg(n) + self.pert.beta(n),
        }
    }
}

/// `(Σ_{n=1}^{n_max} |a(n+q)−a(n)|² + |b(n+q)−b(n)|²)^{1/2}`.
pub fn q_variation_norm<C: Coefficients>(model: &C, n_max: usize) -> Result<f64> {
    if n_max < 1 {
        return Err(Error::validation("n_max must be at least 1"));
    }
    let q = model.period();
    let mut sum = 0.0;
    for n in 1..=n_max {
        let da = model.a(n + q)? - model.a(n)?;
        let db = model.b(n + q) - model.b(n);
        sum += da * da + db * db;
    }
    Ok(sum.sqrt())
}

/// Empirical check of square-summable q-variation: the norms at the given
/// (increasing) cut-offs must differ successively by less than `tol`.
pub fn q_variation_is_cauchy<C: Coefficients>(model: &C, n_maxes: &[usize], tol: f64) -> Result<bool> {
    let norms = n_maxes.iter().map(|&n| q_variation_norm(model, n)).collect::<Result<Vec<_>>>()?;
    Ok(norms.windows(2).all(|w| (w[1] - w[0]).abs() < tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_model(pert: Perturbation) -> CoefficientModel {
        CoefficientModel::new(PeriodicBlock::free(), pert).unwrap()
    }

    fn oscillatory(c: f64, s: f64, gamma: f64) -> Perturbation {
        Perturbation::PowerDecayOscillatory(OscillatoryDecay {
            amplitude: c,
            osc_exponent: s,
            decay_exponent: gamma,
            target: Target::Diagonal,
            l2_admissible: true,
        })
    }

    #[test]
    fn block_validation() {
        let free = PeriodicBlock::new(1, vec![1.0], vec![0.0]).unwrap();
        assert_eq!(free, PeriodicBlock::free());
        assert!(PeriodicBlock::new(2, vec![1.0, 2.0], vec![0.0, 0.0]).is_ok());
        assert!(matches!(PeriodicBlock::new(2, vec![1.0, -1.0], vec![0.0, 0.0]), Err(Error::Validation(_))));
        assert!(matches!(PeriodicBlock::new(2, vec![1.0], vec![0.0, 0.0]), Err(Error::Validation(_))));
        assert!(matches!(PeriodicBlock::new(0, vec![], vec![]), Err(Error::Validation(_))));
    }

    #[test]
    fn periodic_indexing_wraps() {
        let block = PeriodicBlock::new(3, vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]).unwrap();
        assert_eq!(block.a_bg(0), 3.0);
        assert_eq!(block.a_bg(1), 1.0);
        assert_eq!(block.a_bg(3), 3.0);
        assert_eq!(block.a_bg(4), 1.0);
        assert_eq!(block.b_bg(5), 5.0);
    }

    #[test]
    fn model_evaluation() {
        let m = free_model(Perturbation::Zero);
        for n in 0..20 {
            assert_eq!(m.a(n).unwrap(), 1.0);
        }
        for n in 1..20 {
            assert_eq!(m.b(n), 0.0);
        }

        let m = free_model(Perturbation::finite_diagonal(vec![0.5]));
        assert_eq!(m.b(1), 0.5);
        assert_eq!(m.b(2), 0.0);

        let m = free_model(oscillatory(1.0, 0.5, 0.2));
        let expected = 2.0_f64.cos() / 4.0_f64.powf(0.2);
        assert!((m.b(4) - expected).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_a_reported_at_site() {
        let m = free_model(Perturbation::FiniteList { alpha: vec![0.0, 0.0, -1.5], beta: vec![] });
        assert!(m.a(2).is_ok());
        assert_eq!(m.a(3), Err(Error::Coefficient { n: 3, value: -0.5 }));
    }

    #[test]
    fn truncation_tail_is_background() {
        let block = PeriodicBlock::new(2, vec![1.0, 2.0], vec![0.3, -0.2]).unwrap();
        let m = CoefficientModel::new(block.clone(), oscillatory(0.4, 0.5, 0.3)).unwrap();
        let t = m.truncate(5).unwrap();
        let cut = 4 * 2;
        for n in cut..cut + 20 {
            assert_eq!(t.a(n).unwrap(), block.a_bg(n));
        }
        for n in cut + 1..cut + 20 {
            assert_eq!(t.b(n), block.b_bg(n));
        }
        assert_eq!(t.b(cut), m.b(cut));
        assert_eq!(t.a(cut - 1).unwrap(), m.a(cut - 1).unwrap());
        // a(Nq) is the background value a°_{Nq mod q}
        assert_eq!(t.a(10).unwrap(), block.a_bg(0));
        assert!(matches!(m.truncate(0), Err(Error::Validation(_))));
    }

    #[test]
    fn truncation_idempotent() {
        let m = free_model(oscillatory(0.7, 0.5, 0.2));
        let once = m.truncate(5).unwrap();
        let twice = once.truncate(5).unwrap();
        assert_eq!(once, twice);
        let z = free_model(Perturbation::Zero);
        let zt = z.truncate(7).unwrap();
        for n in 0..40 {
            assert_eq!(z.a(n).unwrap(), zt.a(n).unwrap());
            assert_eq!(z.b(n), zt.b(n));
        }
    }

    #[test]
    fn q_variation_zero_and_saturation() {
        let z = free_model(Perturbation::Zero);
        assert_eq!(q_variation_norm(&z, 1000).unwrap(), 0.0);

        let m = free_model(Perturbation::finite_diagonal(vec![0.2, -0.1, 0.4]));
        let at_support = q_variation_norm(&m, 3 + 1).unwrap();
        assert!(at_support > 0.0);
        assert_eq!(q_variation_norm(&m, 50).unwrap(), at_support);
        assert!(matches!(q_variation_norm(&m, 0), Err(Error::Validation(_))));
    }

    #[test]
    fn oscillatory_family_is_cauchy() {
        let m = free_model(oscillatory(1.0, 0.5, 0.2));
        // Direct-summation oracle for the three partial norms.
        let beta = |n: usize| (n as f64).sqrt().cos() / (n as f64).powf(0.2);
        let oracle = |n_max: usize| (1..=n_max).map(|n| (beta(n + 1) - beta(n)).powi(2)).sum::<f64>().sqrt();
        let cutoffs = [1_000, 10_000, 100_000];
        for &n in &cutoffs {
            assert!((q_variation_norm(&m, n).unwrap() - oracle(n)).abs() < 1e-12);
        }
        assert!(q_variation_is_cauchy(&m, &cutoffs, 0.05).unwrap());
    }

    #[test]
    fn shift_moves_diagonal() {
        let m = free_model(Perturbation::Zero);
        let s = m.shifted(0.75);
        for n in 1..10 {
            assert_eq!(s.b(n), m.b(n) + 0.75);
        }
    }

    #[test]
    fn random_decay_is_deterministic_and_bounded() {
        let p = RandomDecay { sigma: 0.5, decay_exponent: 0.25, seed: 7, target: Target::Diagonal };
        let m = free_model(Perturbation::RandomDecay(p.clone()));
        let again = free_model(Perturbation::RandomDecay(p));
        for n in 1..200 {
            assert_eq!(m.b(n), again.b(n));
            assert!(m.b(n).abs() <= 0.5 / (n as f64).powf(0.25));
        }
        assert_ne!(m.b(1), m.b(2));
    }

    #[test]
    fn rejects_nonpositive_decay() {
        assert!(CoefficientModel::new(PeriodicBlock::free(), oscillatory(1.0, 0.5, 0.0)).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn q_variation_nondecreasing(beta in prop::collection::vec(-1.0f64..1.0, 0..25), n in 1usize..60) {
                let m = free_model(Perturbation::finite_diagonal(beta));
                let lo = q_variation_norm(&m, n).unwrap();
                let hi = q_variation_norm(&m, n + 1).unwrap();
                prop_assert!(hi >= lo);
            }
        }
    }
}
