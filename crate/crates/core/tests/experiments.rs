//! Monte Carlo harness: reproducibility and accounting.

use msbl::experiments::{
    decay_fit, error_curve, phase_diagram, results_csv, Algorithm, CellResult, ExperimentConfig,
    TrialOutcome,
};
use proptest::prelude::*;

fn small() -> ExperimentConfig {
    ExperimentConfig {
        m: 6,
        n: 12,
        k_max: 2,
        k_true: 2,
        l_grid: vec![2, 4, 8],
        trials: 24,
        ..ExperimentConfig::default()
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn curves_do_not_depend_on_thread_count() {
    for alg in [Algorithm::Msbl, Algorithm::Somp, Algorithm::Colasso] {
        let cfg = ExperimentConfig {
            algorithm: alg,
            ..small()
        };
        let one = in_pool(1, || results_csv(&error_curve(&cfg).unwrap()));
        let four = in_pool(4, || results_csv(&error_curve(&cfg).unwrap()));
        assert_eq!(one, four, "{alg:?}");
    }
}

#[test]
fn cells_share_problems_across_l() {
    // the same A and S* at every L, so a longer grid only appends cells
    let short = error_curve(&small()).unwrap();
    let long = error_curve(&ExperimentConfig {
        l_grid: vec![2, 4, 8, 16],
        ..small()
    })
    .unwrap();
    assert_eq!(short[..], long[..3]);
}

#[test]
fn phase_error_grows_with_k() {
    let base = ExperimentConfig {
        n: 16,
        l_grid: vec![4],
        trials: 60,
        ..ExperimentConfig::default()
    };
    let cells = phase_diagram(&base, &[6], &[1, 5]).unwrap();
    assert_eq!(cells.len(), 2);
    assert!(cells[0].error_rate <= cells[1].error_rate);
    assert!(phase_diagram(&base, &[], &[1]).is_err());
}

proptest! {
    #[test]
    fn cell_accounting(outcomes in proptest::collection::vec((any::<bool>(), any::<bool>(), 0usize..100), 1..60)) {
        let outcomes: Vec<TrialOutcome> = outcomes
            .into_iter()
            .map(|(s, f, iters)| TrialOutcome { success: s && !f, numerical_failure: f, iters })
            .collect();
        let c = CellResult::from_outcomes(7, &outcomes, 0);
        let failures = outcomes.iter().filter(|o| !o.success && !o.numerical_failure).count();
        prop_assert_eq!(c.successes + failures + c.numerical_failures, c.trials);
        prop_assert_eq!(c.error_rate, 1.0 - c.successes as f64 / c.trials as f64);
        prop_assert!((0.0..=1.0).contains(&c.error_rate));
    }

    #[test]
    fn decay_fit_recovers_slope(rate in 0.001f64..0.2, scale in 0.05f64..0.9) {
        let cells: Vec<CellResult> = [1usize, 3, 7, 12]
            .iter()
            .map(|&l| CellResult {
                l,
                successes: 0,
                trials: 1,
                numerical_failures: 0,
                error_rate: scale * (-rate * l as f64).exp(),
                mean_iters: 0.0,
                wall_time_ms: 0,
            })
            .collect();
        let f = decay_fit(&cells).unwrap();
        prop_assert!((f.slope + rate).abs() < 1e-10);
        prop_assert!((f.intercept - scale.ln()).abs() < 1e-9);
    }
}
