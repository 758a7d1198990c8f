use proptest::prelude::*;

use geoent_core::geoent::{geoent_finite, single_copy, transfer_block, transfer_block_contraction, SolverOptions};
use geoent_core::harness::{fit_loglinear, FitMode};
use geoent_core::imps::{random_imps, reduced_density_spectrum, StateFile};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn random_states_are_canonical(seed in any::<u64>(), d in 2usize..4, chi in 1usize..7) {
        let m = random_imps(seed, d, chi).unwrap();
        let (r, l) = m.canonical_residuals();
        prop_assert!(r.max(l) < 1e-8, "residuals {r:e} {l:e}");
        let s: f64 = m.lambda().iter().map(|x| x * x).sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
        prop_assert!(m.lambda().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn transfer_blocks_compose(seed in any::<u64>(), chi in 1usize..4, l in 1usize..4) {
        let m = random_imps(seed, 2, chi).unwrap();
        let a = transfer_block(&m, l).unwrap();
        let direct = transfer_block_contraction(&m, 2 * l).unwrap();
        prop_assert!(direct.mat.max_abs_diff(&a.compose(&a).mat) < 1e-12);
    }

    #[test]
    fn block_spectrum_is_a_distribution(seed in any::<u64>(), chi in 1usize..5, l in 1usize..4) {
        let m = random_imps(seed, 2, chi).unwrap();
        let p = reduced_density_spectrum(&m, l).unwrap().probs;
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(p.iter().all(|&x| x >= -1e-12));
        prop_assert!(p.windows(2).all(|w| w[0] >= w[1] - 1e-15));
    }

    #[test]
    fn geoent_is_bounded_by_single_copy(seed in any::<u64>(), chi in 1usize..4, l in 1usize..3) {
        let m = random_imps(seed, 2, chi).unwrap();
        let opts = SolverOptions { starts: 4, seed, ..SolverOptions::default() };
        let e = geoent_finite(&m, l, &opts).unwrap().e;
        let e1 = single_copy(&m, l).unwrap();
        prop_assert!(e >= -1e-12);
        prop_assert!(e <= e1 + 1e-8, "E {e} > E1 {e1}");
    }

    #[test]
    fn state_json_round_trips(seed in any::<u64>(), d in 2usize..4, chi in 1usize..5) {
        let m = random_imps(seed, d, chi).unwrap();
        let back = StateFile::parse(&StateFile::from(&m).to_json()).unwrap().into_mps().unwrap();
        prop_assert_eq!(back.lambda(), m.lambda());
        prop_assert_eq!(back.gamma_raw(), m.gamma_raw());
    }

    #[test]
    fn affine_log_data_is_fit_exactly(a in -2.0f64..2.0, b in -1.0f64..1.0, n in 2usize..8) {
        let xs: Vec<f64> = (1..=n).map(|i| 1.5 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| a * x.ln() + b).collect();
        let f = fit_loglinear(&xs, &ys, FitMode::Critical).unwrap();
        prop_assert!((f.slope - a).abs() < 1e-10 && (f.intercept - b).abs() < 1e-10);
        prop_assert!((f.c_est - 6.0 * a).abs() < 1e-9);
    }
}
