//! The lower-bound constructions, re-derived from the model rather than from
//! the generators' own arithmetic.

use align_distort::distortion::{distortion_population, nlhf_bound, Method, Settings};
use align_distort::instances::{
    borda_gamma_star, gen_borda_lb, gen_rlhf_lb, gen_unbounded_seq, gen_universal_lb, rlhf_lb_min_m, sequence_increment,
};
use align_distort::math::sigmoid;
use align_distort::mle::{fit_bt_mle_population, DEFAULT_MLE_TOL};
use align_distort::model::{avg_util, expected_win_rates};
use align_distort::policy_opt::{nlhf_policy, optimal_policy, rlhf_policy, RewardData};
use align_distort::rules::{limiting_borda, margin_matrix};
use align_distort::verify::borda_lb_winner;
use align_distort::Error;

#[test]
fn universal_floor_matches_formula() {
    let (m, beta, eps) = (100, 5.0, 1e-3);
    let g = gen_universal_lb(m, beta, eps, 1.0).unwrap();
    let au = avg_util(&g.instance);
    // Written out from the construction's weights, independently of the
    // generator.
    let w = (1.0 / (1.0 + (-beta * eps).exp()) - 0.5) / (1.0 / (1.0 + (-beta).exp()) + 1.0 / (1.0 + (-beta * eps).exp()) - 1.0);
    assert!((au[0] - w).abs() <= 1e-15);
    assert!((au[1] - (1.0 - w) * eps).abs() <= 1e-15);
    let floor = 1.0 / (1.0 / m as f64 + eps * (sigmoid(beta) - 0.5) / (sigmoid(beta * eps) - 0.5));
    assert!((g.analytics.ratio_floor - floor).abs() <= 1e-12 * floor);
    assert!((floor / 2.53 - 1.0).abs() <= 0.03, "{floor}");
    // Picking uniformly among indistinguishable alternatives is no better
    // than the floor.
    let uniform_value = au.iter().sum::<f64>() / m as f64;
    assert!(au[0] / uniform_value >= floor);
}

#[test]
fn universal_first_alternative_loses_when_others_gain() {
    let g = gen_universal_lb(20, 4.0, 0.01, 1.5).unwrap();
    let p = expected_win_rates(&g.instance);
    for y in 1..20 {
        assert!(p.get(0, y) < 0.5);
    }
}

#[test]
fn borda_construction_ties_and_tie_break() {
    let beta = 5.0;
    let gamma = borda_gamma_star(beta);
    let tied = gen_borda_lb(beta, gamma, 1e-3, 0.0, 0.2, 0.2).unwrap();
    let p = expected_win_rates(&tied.instance);
    assert!((p.get(1, 2) - 0.5).abs() <= 1e-12);
    assert!((p.get(0, 1) - 0.5).abs() <= 1e-12);
    let broken = gen_borda_lb(beta, gamma, 1e-3, 1e-4, 0.2, 0.2).unwrap();
    assert!(expected_win_rates(&broken.instance).get(2, 1) > 0.5);
}

#[test]
fn borda_closed_form_ratio() {
    for beta in [2.0, 5.0, 10.0] {
        let g = gen_borda_lb(beta, borda_gamma_star(beta), 1e-4, 1e-8, 1e-3, 1e-3).unwrap();
        let au = avg_util(&g.instance);
        assert!((au[0] / au[2] / g.analytics.ratio - 1.0).abs() <= 1e-9);
        assert!(g.analytics.ratio >= 1.05 * nlhf_bound(beta));
        assert!((g.analytics.ratio / g.analytics.limit_factor - 1.0).abs() <= 0.01);
    }
    let beta = 50.0;
    let g = gen_borda_lb(beta, (beta + 1.0f64).ln() / beta, 1e-4, 1e-8, 1e-3, 1e-3).unwrap();
    assert!(g.analytics.ratio >= 0.8 * beta, "{}", g.analytics.ratio);
}

/// With `mu(a) = mu(c) = 1e-3` Borda still picks `a`; once both are small
/// next to `eps'` the tie-break toward `c` decides.
#[test]
fn borda_picks_c_once_side_mass_is_small() {
    for beta in [2.0, 5.0, 10.0] {
        assert_eq!(borda_lb_winner(beta, 1e-3).unwrap().probs(), [1.0, 0.0, 0.0]);
        assert_eq!(borda_lb_winner(beta, 1e-12).unwrap().probs(), [0.0, 0.0, 1.0], "beta {beta}");
    }
}

#[test]
fn rlhf_construction_at_beta_three() {
    let beta = 3.0;
    let m = rlhf_lb_min_m(beta);
    assert_eq!(m, (4.0 * beta.exp()).ceil() as usize + 2);
    let g = gen_rlhf_lb(beta, Some(m), None, None).unwrap();
    assert_eq!(g.analytics.delta, 10.0 / (10.0 + beta.exp()));
    let rates = expected_win_rates(&g.instance);
    let borda = limiting_borda(&rates, g.instance.pairs()).unwrap();
    assert!(borda[1] - borda[0] >= 1.0 / m as f64, "gap {}", borda[1] - borda[0]);

    let ball = g.ball.clone().unwrap();
    let settings = Settings::default();
    let bound = 2.0 / -g.analytics.log_eps;
    let policies = [
        rlhf_policy(RewardData::Population { rates: &rates, pairs: g.instance.pairs() }, &ball, settings.tol).unwrap(),
        optimal_policy(&g.instance, &ball, settings.tol).unwrap(),
        nlhf_policy(&margin_matrix(&rates), &ball, settings.tol).unwrap(),
    ];
    for pi in &policies {
        let c_mass: f64 = pi.probs()[2..].iter().sum();
        assert!(c_mass <= bound, "{c_mass} > {bound}");
    }
}

#[test]
fn rlhf_prefers_b_and_distortion_grows() {
    let settings = Settings::default();
    let mut last = 0.0;
    for beta in [3.0, 4.0, 5.0] {
        let g = gen_rlhf_lb(beta, None, None, None).unwrap();
        let rates = expected_win_rates(&g.instance);
        let r = fit_bt_mle_population(&rates, g.instance.pairs(), DEFAULT_MLE_TOL).unwrap();
        assert!(r.values()[1] > r.values()[0]);
        let ball = g.ball.clone().unwrap();
        let report = distortion_population(&g.instance, Method::Rlhf, &ball, &settings).unwrap();
        let pi = report.policy.unwrap();
        assert!(pi.probs()[1] >= 1.0 - (-beta).exp());
        let ratio = report.ratio.unwrap();
        assert!(ratio >= last, "beta {beta}: {ratio} after {last}");
        last = ratio;
    }
    assert!(last > 2.0);
}

/// At `beta = 3` the majority's `1 / beta` on `a` is worth less than the
/// minority's weight on `b`, so `b` is the better alternative.
#[test]
fn rlhf_construction_needs_a_above_b() {
    let g = gen_rlhf_lb(3.0, None, None, None).unwrap();
    let au = avg_util(&g.instance);
    assert!(au[0] < au[1]);
    assert!(g.analytics.eta2.is_none());
    let g = gen_rlhf_lb(4.0, None, None, None).unwrap();
    let au = avg_util(&g.instance);
    assert!(au[0] > au[1]);
}

#[test]
fn rlhf_construction_rejects_large_beta() {
    match gen_rlhf_lb(8.0, None, None, None) {
        Err(Error::Infeasible(msg)) => assert!(msg.contains(&rlhf_lb_min_m(8.0).to_string()), "{msg}"),
        other => panic!("expected rejection, got {other:?}"),
    }
}

#[test]
fn sequence_steps_follow_recursion() {
    let (beta, m) = (5.0, 14);
    let g = gen_unbounded_seq(beta, m, 1e-3).unwrap();
    let au = avg_util(&g.instance);
    assert_eq!(au[0], 1.0 / 3.0);
    let p = expected_win_rates(&g.instance);
    for step in &g.analytics.steps[1..] {
        let t = step.index;
        let (d, dp) = (step.delta.unwrap(), step.delta_prime.unwrap());
        assert!(dp < d / 2.0);
        let direct = ((d / 2.0).exp() + 1.0).powi(3).ln() - (2.0 * (d.exp() + 3.0)).ln();
        assert!((dp - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        assert!((sequence_increment(d) - direct).abs() <= 1e-12);
        assert!((p.get(t, t - 1) - step.win_rate_over_previous.unwrap()).abs() <= 1e-12);
        assert!(au[t] <= step.avg_util_bound.unwrap() + 1e-15);
        assert!((au[t] - step.avg_util).abs() <= 1e-15);
    }
    let r = fit_bt_mle_population(&p, g.instance.pairs(), DEFAULT_MLE_TOL).unwrap();
    assert!(r.values().windows(2).all(|w| w[1] > w[0]));
}
