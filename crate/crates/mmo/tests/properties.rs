//! Property tests over randomized inputs for the cross-module invariants
//! that hold for every admissible input, not just the seeded samples the
//! unit tests pin down.

use mmo::linalg::{self, EigOrder};
use mmo::mmop::{self, BoundMode, ProblemSpec, WaterfillInput};
use mmo::objectives::{self, ObjectiveCase};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Strategy: descending positive gains with an optional dead tail.
fn gains_strategy() -> impl Strategy<Value = Vec<f64>> {
    (1usize..=6, proptest::collection::vec(0.05f64..4.0, 6), any::<bool>()).prop_map(
        |(n, raw, kill_tail)| {
            let mut g: Vec<f64> = raw.into_iter().take(n).collect();
            g.sort_by(|a, b| b.total_cmp(a));
            if kill_tail && g.len() >= 2 {
                let last = g.len() - 1;
                g[last] = 0.0;
            }
            g
        },
    )
}

/// Strategy: weight targets √(w g) drawn descending so the order constraint
/// holds by construction.
fn weights_for(gains: &[f64], raw: &[f64]) -> Vec<f64> {
    let mut targets: Vec<f64> = raw.iter().take(gains.len()).map(|&x| 0.2 + x).collect();
    targets.sort_by(|a, b| b.total_cmp(a));
    gains
        .iter()
        .zip(&targets)
        .map(|(&g, &t)| if g > 1e-12 { t * t / g } else { 1.0 })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn waterfill_exhausts_budget_and_keeps_order(
        gains in gains_strategy(),
        raw in proptest::collection::vec(0.0f64..1.0, 6),
        power in 0.1f64..40.0,
    ) {
        prop_assume!(gains.iter().any(|&g| g > 0.0));
        let weights = weights_for(&gains, &raw);
        let input = WaterfillInput::new(gains.clone(), weights, power).unwrap();
        let (f_sq, _mu) = mmop::waterfill(&input).unwrap();
        let total: f64 = f_sq.iter().sum();
        prop_assert!((total - power).abs() <= 1e-10 * power);
        let products: Vec<f64> = gains.iter().zip(&f_sq).map(|(&g, &f)| g * f).collect();
        for w in products.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10 * w[0].max(1.0));
        }
    }

    #[test]
    fn structured_solution_invariants_hold(seed in 0u64..500, power in 0.5f64..16.0) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 + (seed % 3) as usize;
        let h = linalg::complex_gaussian(n, n, &mut r);
        let psi = linalg::random_psd(n, 0.05, &mut r).scale(0.05);
        let sigma = linalg::random_psd(n, 0.1, &mut r);
        let spec = ProblemSpec::new(h, psi, sigma, 1.0, power, ObjectiveCase::sum_mse(n)).unwrap();
        for mode in [BoundMode::Lower, BoundMode::Upper] {
            let sol = mmop::solve(&spec, mode, &vec![1.0; n]).unwrap();
            prop_assert!((sol.spent_power() - power).abs() <= 1e-8 * power);
            let t = linalg::real_trace(&(&sol.f_opt * sol.f_opt.adjoint() * &spec.psi));
            let eta_fixed = t * sol.basis.alpha + spec.noise_var;
            prop_assert!((sol.eta_f - eta_fixed).abs() <= 1e-8 * eta_fixed);
        }
    }

    #[test]
    fn svd_and_eig_reconstruct(seed in 0u64..500) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let rows = 2 + (seed % 3) as usize;
        let cols = 2 + ((seed / 3) % 4) as usize;
        let m = linalg::complex_gaussian(rows, cols, &mut r);
        let s = linalg::svd(&m).unwrap();
        prop_assert!((s.reconstruct() - &m).norm() <= 1e-9 * m.norm().max(1e-14));

        let herm = linalg::random_psd(rows, 0.0, &mut r) - linalg::identity(rows).scale(0.3);
        let e = linalg::herm_eig(&herm, EigOrder::Descending).unwrap();
        prop_assert!((e.reconstruct() - &herm).norm() <= 1e-9 * herm.norm().max(1e-14));
    }

    #[test]
    fn vector_objectives_depend_only_on_spectrum(seed in 0u64..200) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let n = 3;
        let m = linalg::random_psd(n, 0.0, &mut r);
        let case = ObjectiveCase::Case3 { n_mat: linalg::random_psd(n, 0.4, &mut r) };
        let eigs = linalg::herm_eig(&m, EigOrder::Descending).unwrap().eigenvalues;
        let v0 = objectives::eval_f_vector(&case, &eigs);
        let u = linalg::haar_unitary(n, &mut r);
        let rotated = u.adjoint() * &m * &u;
        let eigs_rot = linalg::herm_eig(&rotated, EigOrder::Descending).unwrap().eigenvalues;
        let v1 = objectives::eval_f_vector(&case, &eigs_rot);
        prop_assert!((v0 - v1).abs() <= 1e-10 * v0.abs().max(1.0));
    }
}
