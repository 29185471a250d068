//! Solvers checked against slow, independent computations.

use align_distort::distortion::{
    convergence_experiment, distortion_empirical, distortion_population, nlhf_bound, Method, Quantity, Settings,
};
use align_distort::instances::{random_instance, random_policy, reference_instance};
use align_distort::math::{dot, sigmoid};
use align_distort::mle::{fit_bt_mle, log_likelihood, DEFAULT_MLE_TOL};
use align_distort::model::{avg_util_policy, expected_win_rates};
use align_distort::policy_opt::{exploitability, kl_div, linear_max_over_ball, regularized_linear_max, KLBall};
use align_distort::rules::{borda_scores, limiting_borda, MarginMatrix};
use align_distort::sampling::{empirical_win_rates, sample_comparisons, sample_comparisons_with};
use align_distort::{ComparisonCounts, Exec, Policy, Square};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn bound_matches_extended_precision_value() {
    // (5/2) coth(5/2) = 2.53391827453152115548..., from 30-digit arithmetic.
    let reference = 2.533_918_274_531_521;
    assert!((nlhf_bound(5.0) - reference).abs() <= 4e-16);
}

#[test]
fn two_alternative_mle_is_log_odds() {
    let (w, l) = (37u64, 12u64);
    let counts = ComparisonCounts::from_rows(vec![vec![0, w], vec![l, 0]]).unwrap();
    let r = fit_bt_mle(&counts, 0.0, DEFAULT_MLE_TOL).unwrap();
    let gap = r.values()[0] - r.values()[1];
    assert!((gap - (w as f64 / l as f64).ln()).abs() <= 1e-9);

    // Grid search over the gap, then one refinement pass.
    let ll = |d: f64| w as f64 * sigmoid(d).ln() + l as f64 * sigmoid(-d).ln();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..=40_000 {
        let d = -4.0 + 8.0 * i as f64 / 40_000.0;
        if ll(d) > best.0 {
            best = (ll(d), d);
        }
    }
    let centre = best.1;
    for i in 0..=20_000 {
        let d = centre - 2e-4 + 4e-4 * i as f64 / 20_000.0;
        if ll(d) > best.0 {
            best = (ll(d), d);
        }
    }
    assert!((gap - best.1).abs() <= 1e-7, "{gap} vs grid {}", best.1);
}

#[test]
fn symmetric_counts_give_zero_rewards() {
    let counts = ComparisonCounts::from_rows(vec![vec![3, 5, 2], vec![5, 0, 7], vec![2, 7, 1]]).unwrap();
    let r = fit_bt_mle(&counts, 0.0, DEFAULT_MLE_TOL).unwrap();
    assert!(r.values().iter().all(|v| v.abs() <= 1e-12));
}

/// Maximizes the log-likelihood over reward gaps `(r1 - r0, r2 - r0)` by a
/// coarse grid followed by shrinking pattern search.
fn brute_force_mle(counts: &ComparisonCounts) -> Vec<f64> {
    let ll = |a: f64, b: f64| log_likelihood(counts, &[0.0, a, b]);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=200 {
        for j in 0..=200 {
            let (a, b) = (-5.0 + 0.05 * i as f64, -5.0 + 0.05 * j as f64);
            let v = ll(a, b);
            if v > best.0 {
                best = (v, a, b);
            }
        }
    }
    let mut step = 0.05;
    while step > 1e-10 {
        let mut moved = false;
        for (da, db) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let v = ll(best.1 + da, best.2 + db);
            if v > best.0 {
                best = (v, best.1 + da, best.2 + db);
                moved = true;
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    let mean = (best.1 + best.2) / 3.0;
    vec![-mean, best.1 - mean, best.2 - mean]
}

#[test]
fn three_alternative_mle_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let rows = (0..3).map(|x| (0..3).map(|y| if x == y { 0 } else { rng.random_range(1..60) }).collect()).collect();
        let counts = ComparisonCounts::from_rows(rows).unwrap();
        let fitted = fit_bt_mle(&counts, 0.0, DEFAULT_MLE_TOL).unwrap();
        let oracle = brute_force_mle(&counts);
        for (a, b) in fitted.values().iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-6, "{:?} vs {oracle:?}", fitted.values());
        }
    }
}

#[test]
fn two_point_gibbs_policy() {
    let pi = regularized_linear_max(&[1.0, 0.0], &Policy::uniform(2), 1.0).unwrap();
    assert!((pi.probs()[0] - sigmoid(1.0)).abs() <= 1e-15);
    assert!((pi.probs()[1] - sigmoid(-1.0)).abs() <= 1e-15);
}

#[test]
fn ball_maximum_matches_multiplier_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let m = 6;
        let pi_ref = random_policy(&mut rng, m);
        let r: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ball = KLBall::new(pi_ref.clone(), 0.3).unwrap();
        let fast_pi = linear_max_over_ball(&r, &ball, 1e-12).unwrap();
        assert!(kl_div(&fast_pi, &pi_ref) <= ball.tau() + 1e-9);
        let fast = dot(&r, fast_pi.probs());
        // A log grid over the whole multiplier range locates the boundary,
        // then a second grid of the same size fills the bracketing cell.
        let value = |lambda: f64| {
            let pi = regularized_linear_max(&r, &pi_ref, lambda).unwrap();
            (kl_div(&pi, &pi_ref) <= ball.tau()).then(|| dot(&r, pi.probs()))
        };
        let coarse = |i: usize| 10f64.powf(-12.0 + 24.0 * i as f64 / 99_999.0);
        let first = (0..100_000).find(|&i| value(coarse(i)).is_some()).unwrap();
        assert!(first > 0);
        let (lo, hi) = (coarse(first - 1).ln(), coarse(first).ln());
        let mut best = f64::NEG_INFINITY;
        for i in 0..100_000 {
            if let Some(v) = value((lo + (hi - lo) * i as f64 / 99_999.0).exp()) {
                best = best.max(v);
            }
        }
        assert!((fast - best).abs() <= 1e-7, "{fast} vs grid {best}");
    }
}

/// Largest gain of a best response inside the ball, by enumerating a grid on
/// the 3-simplex.
fn grid_exploitability(pi: &Policy, margins: &MarginMatrix, ball: &KLBall, steps: usize) -> f64 {
    let gain: Vec<f64> = margins.apply_transpose(pi.probs()).into_iter().map(|v| -v).collect();
    let mut best = f64::NEG_INFINITY;
    for i in 0..=steps {
        for j in 0..=steps - i {
            let q = [i as f64 / steps as f64, j as f64 / steps as f64, (steps - i - j) as f64 / steps as f64];
            let q = Policy::new(q.to_vec()).unwrap();
            if kl_div(&q, ball.pi_ref()) <= ball.tau() {
                best = best.max(dot(&gain, q.probs()));
            }
        }
    }
    best
}

#[test]
fn rock_paper_scissors_exploitability_matches_grid() {
    let c = 0.6;
    let margins =
        MarginMatrix::new(Square::from_rows(vec![vec![0.0, -c, c], vec![c, 0.0, -c], vec![-c, c, 0.0]]).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (tau, steps, tol) in [(3f64.ln(), 300, 1e-4), (0.2, 1000, 2e-3)] {
        let ball = KLBall::new(Policy::uniform(3), tau).unwrap();
        for _ in 0..5 {
            let pi = random_policy(&mut rng, 3);
            let fast = exploitability(&pi, &margins, &ball).unwrap();
            let grid = grid_exploitability(&pi, &margins, &ball, steps);
            assert!(fast >= grid - 1e-12 && fast - grid <= tol, "tau {tau}: {fast} vs grid {grid}");
        }
    }
    let uniform = Policy::uniform(3);
    assert!(exploitability(&uniform, &margins, &KLBall::full_simplex(3)).unwrap().abs() <= 1e-15);
}

#[test]
fn sampled_win_rates_within_four_standard_errors() {
    let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(77), 4, 3, 2.0);
    let counts = sample_comparisons(&inst, 400_000, 1, 12).unwrap();
    let emp = empirical_win_rates(&counts);
    let exact = expected_win_rates(&inst);
    for x in 0..4 {
        for y in 0..4 {
            if x == y {
                continue;
            }
            let n = (counts.get(x, y) + counts.get(y, x)) as f64;
            let p = exact.get(x, y);
            let se = (p * (1.0 - p) / n).sqrt();
            assert!((emp.get(x, y) - p).abs() <= 4.0 * se, "({x},{y}): {} vs {p} (se {se})", emp.get(x, y));
        }
    }
}

#[test]
fn policy_value_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let inst = random_instance(&mut rng, 5, 3, 1.0);
    let pi = random_policy(&mut rng, 5);
    let types = WeightedIndex::new(inst.mixture().components().iter().map(|c| c.weight)).unwrap();
    let choice = WeightedIndex::new(pi.probs()).unwrap();
    let draws = 1_000_000;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..draws {
        let u = inst.mixture().components()[types.sample(&mut rng)].utils[choice.sample(&mut rng)];
        sum += u;
        sq += u * u;
    }
    let mean = sum / draws as f64;
    let se = ((sq / draws as f64 - mean * mean) / draws as f64).sqrt();
    let exact = avg_util_policy(&inst, &pi);
    assert!((mean - exact).abs() <= 3.0 * se, "{mean} vs {exact} (se {se})");
}

#[test]
fn borda_scores_converge_on_ten_million_samples() {
    let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(101), 3, 3, 3.0);
    let counts = sample_comparisons_with(&inst, 10_000_000, 1, 4, Exec::Parallel).unwrap();
    let limit = limiting_borda(&expected_win_rates(&inst), inst.pairs()).unwrap();
    let emp = borda_scores(&counts).scores;
    for (a, b) in emp.iter().zip(&limit) {
        assert!((a - b).abs() <= 0.002, "{emp:?} vs {limit:?}");
    }
}

#[test]
fn large_sample_ratio_near_population_ratio() {
    let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(8), 4, 3, 4.0);
    let ball = KLBall::new(Policy::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap(), 0.3).unwrap();
    let settings = Settings::default();
    for method in [Method::Rlhf, Method::Nlhf] {
        let pop = distortion_population(&inst, method, &ball, &settings).unwrap();
        let emp = distortion_empirical(&inst, method, &ball, 1_000_000, 1, 8, 21, &settings).unwrap();
        assert!(emp.std_err > 0.0);
        let gap = (emp.method_util - pop.method_util).abs();
        assert!(gap <= 3.0 * emp.std_err, "{method}: {} vs {} (se {})", emp.method_util, pop.method_util, emp.std_err);
    }
}

#[test]
#[ignore = "fails as specified: labels repeat within a user, so d = 10 carries fewer independent labels than d = 1 at equal n*d"]
fn one_or_ten_comparisons_per_user_at_equal_total() {
    let inst = reference_instance();
    let one = convergence_experiment(&inst, Quantity::WinRates, &[100_000], 1, 20, 3, Exec::Parallel).unwrap();
    let ten = convergence_experiment(&inst, Quantity::WinRates, &[10_000], 10, 20, 3, Exec::Parallel).unwrap();
    let (a, b) = (&one.rows[0], &ten.rows[0]);
    let noise = (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
    assert!((a.mean_error - b.mean_error).abs() <= 3.0 * noise, "d=1 {a:?} vs d=10 {b:?}");
}

/// With uniform `mu` over 3 alternatives a draw hits a given unordered pair
/// with probability 2/9. A user with `d` draws contributes one distinct label
/// to the pair with probability `1 - (7/9)^d`; matching the expected number
/// of distinct labels per pair should match the errors.
#[test]
fn one_or_ten_comparisons_per_user_at_equal_distinct_labels() {
    let inst = reference_instance();
    let per_user_ten = 1.0 - (7.0f64 / 9.0).powi(10);
    let n_ten = 10_000u64;
    let n_one = (n_ten as f64 * per_user_ten / (2.0 / 9.0)).round() as u64;
    let one = convergence_experiment(&inst, Quantity::WinRates, &[n_one], 1, 20, 3, Exec::Parallel).unwrap();
    let ten = convergence_experiment(&inst, Quantity::WinRates, &[n_ten], 10, 20, 3, Exec::Parallel).unwrap();
    let (a, b) = (&one.rows[0], &ten.rows[0]);
    let noise = (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
    assert!((a.mean_error - b.mean_error).abs() <= 3.0 * noise, "d=1 {a:?} vs d=10 {b:?}");
}
