use jostspec::bands::admissible_intervals;
use jostspec::coefficients::{CoefficientModel, PeriodicBlock, Perturbation};
use jostspec::jost::{green_11, jost_solution, jost_solution_with, Precision};
use jostspec::measures::oracle_green_11;
use num_complex::Complex64;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Sample {
    model: CoefficientModel,
    n_trunc: usize,
}

fn sample() -> impl Strategy<Value = Sample> {
    (1usize..=3, 1usize..=30).prop_flat_map(|(q, support)| {
        (
            prop::collection::vec(0.7f64..1.5, q),
            prop::collection::vec(-0.6f64..0.6, q),
            prop::collection::vec(-0.25f64..0.25, support),
            prop::collection::vec(-0.5f64..0.5, support),
        )
            .prop_map(move |(a, b, alpha, beta)| {
                let block = PeriodicBlock::new(q, a, b).unwrap();
                let model = CoefficientModel::new(block, Perturbation::FiniteList { alpha, beta }).unwrap();
                Sample { model, n_trunc: (support + 1).div_ceil(q) + 2 }
            })
    })
}

fn zeta() -> impl Strategy<Value = Complex64> {
    (-3.5f64..3.5, -4.0f64..0.0).prop_map(|(e, ly)| Complex64::new(e, 10f64.powf(ly)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn jost_green_matches_stripping_oracle(s in sample(), z in zeta()) {
        let g = green_11(&s.model, s.n_trunc, z).unwrap();
        let o = oracle_green_11(&s.model, s.n_trunc, z).unwrap();
        prop_assert!((g - o).norm() / g.norm() < 1e-8, "ζ = {z}: {g} vs {o}");
    }

    #[test]
    fn green_is_herglotz(s in sample(), z in zeta()) {
        prop_assert!(green_11(&s.model, s.n_trunc, z).unwrap().im > 0.0);
    }

    #[test]
    fn wronskian_holds_in_bands(s in sample(), t in 0.0f64..1.0) {
        let intervals = admissible_intervals(s.model.block(), 0.05, 8).unwrap_or_default();
        prop_assume!(!intervals.is_empty());
        let iv = &intervals[0];
        let e = iv.lo + t * (iv.hi - iv.lo);
        let sol = jost_solution(&s.model, s.n_trunc, Complex64::from(e)).unwrap();
        prop_assert!(sol.wronskian_defect() < 1e-9 * sol.wronskian_scale());
    }

    #[test]
    fn coefficients_past_truncation_are_inert(s in sample(), z in zeta(), junk in prop::collection::vec(-0.3f64..0.3, 8)) {
        let Perturbation::FiniteList { mut alpha, mut beta } = s.model.perturbation().clone() else { unreachable!() };
        let q = s.model.block().q();
        let cut = (s.n_trunc - 1) * q;
        alpha.resize(cut + 1, 0.0);
        beta.resize(cut + 1, 0.0);
        alpha.extend(&junk);
        beta.extend(&junk);
        let altered = CoefficientModel::new(s.model.block().clone(), Perturbation::FiniteList { alpha, beta }).unwrap();
        let g0 = green_11(&s.model, s.n_trunc, z).unwrap();
        let g1 = green_11(&altered, s.n_trunc, z).unwrap();
        prop_assert_eq!(g0, g1);
    }

    #[test]
    fn double_double_agrees_with_double(s in sample(), z in zeta()) {
        let d = jost_solution_with(&s.model, s.n_trunc, z, Precision::Double).unwrap();
        let dd = jost_solution_with(&s.model, s.n_trunc, z, Precision::DoubleDouble).unwrap();
        let (d1, d0) = d.boundary_values();
        let (e1, e0) = dd.boundary_values();
        let scale = e0.norm().max(e1.norm());
        prop_assert!((d0 - e0).norm().max((d1 - e1).norm()) < 1e-9 * scale);
    }
}

#[test]
fn key_density_resolves_resonance_seen_by_fine_oracle() {
    // Strong barrier pair around a cavity: narrow transmission peaks.
    let mut beta = vec![0.0; 12];
    beta[0] = 1.5;
    beta[11] = 1.5;
    let model = CoefficientModel::new(PeriodicBlock::free(), Perturbation::finite_diagonal(beta)).unwrap();
    let n = 14;
    for i in 0..=400 {
        let e = -1.6 + 3.2 * i as f64 / 400.0;
        let key = jostspec::jost::ac_density(&model, n, e).unwrap();
        let g = |y: f64| oracle_green_11(&model, n, Complex64::new(e, y)).unwrap().im;
        let fine = (1e-6 * g(1e-7) - 1e-7 * g(1e-6)) / (1e-6 - 1e-7) / std::f64::consts::PI;
        assert!((key - fine).abs() < 1e-6 * key.abs(), "E = {e}: {key} vs {fine}");
    }
}
