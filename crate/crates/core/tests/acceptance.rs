//! Acceptance suite: one test per release criterion, each printing a
//! `[PASS]`/`[FAIL]` line (visible with `--nocapture`, or on failure).
//!
//! Every tolerance is pinned here, in code. Criteria 1-3 and 12 run on the
//! bundled benchmark grid; 8 and 9 sweep seeded random models against
//! independent oracles.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stmdp::gridworld::{build_mdp, paper_grid, Direction, GridSpec, BENCH_WIND};
use stmdp::mdp::{self, SolverConfig, ValueFunction};
use stmdp::sim;
use stmdp::trigger::{self, TriggerConfig};

const BETA: f64 = 0.95;
const T_BAR: usize = 6;

fn report(id: &str, pass: bool, detail: &str) {
    println!("[{}] {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{id}: {detail}");
}

fn windy_spec() -> GridSpec {
    paper_grid().with_wind(BENCH_WIND, BENCH_WIND).unwrap()
}

#[test]
fn criterion_01_zero_penalty_reduces_to_the_classic_solution() {
    let started = Instant::now();
    let mut worst_gap = 0.0f64;
    let mut all_unit_waits = true;
    for spec in [paper_grid(), windy_spec()] {
        let (model, _) = build_mdp(&spec);
        let classic = mdp::value_iteration(&model, &SolverConfig::new(BETA)).unwrap();
        let config = TriggerConfig::new(BETA, T_BAR);
        let sol = trigger::solve_penalized(&model, &config).unwrap();
        worst_gap = worst_gap.max(sol.values.sup_dist(&classic.values));
        all_unit_waits &= sol.policy.waiting_times().iter().all(|&t| t == 1);
    }
    let elapsed = started.elapsed();
    report(
        "criterion 1 (zero-penalty reduction)",
        worst_gap <= 2e-5 && all_unit_waits && elapsed < Duration::from_secs(1),
        &format!(
            "sup-norm gap to classic value {worst_gap:.3e} (<= 2e-5), unit waits everywhere: \
             {all_unit_waits}, elapsed {elapsed:?}"
        ),
    );
}

#[test]
fn criterion_02_convergence_budget_of_25_iterations() {
    let (model, _) = build_mdp(&paper_grid());
    let tables = trigger::build_lookahead_tables(&model, &TriggerConfig::new(BETA, T_BAR)).unwrap();
    let mut counts = Vec::new();
    let mut within_budget = true;
    let mut within_runtime = true;
    for penalty in [0.0, 0.1, 40.0, 80.0] {
        let config = TriggerConfig::new(BETA, T_BAR).with_penalty(penalty);
        let started = Instant::now();
        let sol = trigger::solve_penalized_with_tables(&tables, &config).unwrap();
        within_runtime &= started.elapsed() < Duration::from_secs(1);
        within_budget &= sol.iterations <= 25;
        counts.push((penalty, sol.iterations));
    }
    // The absorbing state's value satisfies w = beta^6 (w + O), so plain
    // value iteration from zero approaches it at rate beta^6 per sweep and
    // needs ceil(ln(O * 1e5) / (6 ln(1/beta))) + 1 sweeps to push the
    // sup-norm change under 1e-5: 30 sweeps for O = 0.1, 50 for 40, 52 for
    // 80. A 25-sweep budget is attainable only for O = 0.
    report(
        "criterion 2 (sup-norm change <= 1e-5 within 25 iterations per penalty)",
        within_budget && within_runtime,
        &format!("iterations per penalty: {counts:?}"),
    );
}

#[test]
fn criterion_03_heavy_penalty_saturates_the_waiting_time() {
    let (model, _) = build_mdp(&paper_grid());
    let config = TriggerConfig::new(BETA, T_BAR).with_penalty(80.0);
    let sol = trigger::solve_penalized(&model, &config).unwrap();
    let saturated = sol
        .policy
        .waiting_times()
        .iter()
        .filter(|&&t| t == T_BAR)
        .count();
    report(
        "criterion 3 (penalty 80 saturates waits at t_bar on >= 18 of 20 states)",
        saturated >= 18,
        &format!(
            "{saturated} of {} states wait the full {T_BAR} steps",
            model.num_states()
        ),
    );
}

#[test]
fn criterion_04_benchmark_rollout_steps_updates_and_savings() {
    let (model, indexing) = build_mdp(&paper_grid());
    let config = TriggerConfig::new(BETA, T_BAR).with_penalty(0.1);
    let sol = trigger::solve_penalized(&model, &config).unwrap();
    let goal = [indexing.target_state(), indexing.absorbing_state()];
    let traj = sim::rollout(&model, &sol.policy, indexing.start_state(), 60, 0, &config).unwrap();
    let steps = traj.first_hit(&goal).unwrap_or(usize::MAX);
    let updates = traj.updates_before(steps);
    let stats = sim::estimate_cost(
        &model,
        &sol.policy,
        indexing.start_state(),
        60,
        1,
        0,
        &goal,
        &config,
    )
    .unwrap();
    let savings_exact = (stats.savings_ratio - 8.0 / 12.0).abs() <= 1e-12;
    report(
        "criterion 4 (penalty 0.1 run: 12 steps, 4 updates, savings 8/12)",
        steps == 12 && updates == 4 && savings_exact,
        &format!(
            "steps {steps}, updates {updates}, savings {:.4}",
            stats.savings_ratio
        ),
    );
}

#[test]
fn criterion_05_absorbing_state_closed_form() {
    let (model, indexing) = build_mdp(&paper_grid());
    let absorbing = indexing.absorbing_state();
    let b6 = BETA.powi(T_BAR as i32);
    let mut worst = 0.0f64;
    for penalty in [0.1, 40.0, 80.0] {
        let config = TriggerConfig::new(BETA, T_BAR)
            .with_penalty(penalty)
            .with_tolerance(1e-8);
        let sol = trigger::solve_penalized(&model, &config).unwrap();
        let expected = b6 * penalty / (1.0 - b6);
        worst = worst.max((sol.values.value(absorbing) - expected).abs());
    }
    report(
        "criterion 5 (absorbing-state fixed point beta^6 O / (1 - beta^6))",
        worst <= 1e-6,
        &format!("worst absolute error {worst:.3e} (<= 1e-6)"),
    );
}

#[test]
fn criterion_06_guarantee_soundness_across_alpha() {
    let started = Instant::now();
    let (model, _) = build_mdp(&windy_spec());
    let classic =
        mdp::value_iteration(&model, &SolverConfig::new(BETA).with_tolerance(1e-9)).unwrap();
    let mut ok = true;
    let mut details = Vec::new();
    for alpha in [1.0, 1.1, 1.4, 2.0] {
        let config = TriggerConfig::new(BETA, T_BAR)
            .with_alpha(alpha)
            .with_tolerance(1e-7);
        let syn = trigger::synthesize_guaranteed(&model, &classic.values, &config).unwrap();
        let tau_ok = syn.policy.waiting_times().iter().all(|&t| t >= 1);
        let report_ =
            trigger::verify_guarantee(&model, &syn.policy, &classic.values, &config).unwrap();
        let holding_ok = report_.all_holding_ok();
        let realized = trigger::evaluate_policy(&model, &syn.policy, &config, false).unwrap();
        let mut bound_ok = true;
        let mut equality_gap = 0.0f64;
        for x in 0..model.num_states() {
            bound_ok &= realized.value(x) <= alpha * classic.values.value(x) + 1e-4;
            if alpha == 1.0 {
                equality_gap =
                    equality_gap.max((realized.value(x) - classic.values.value(x)).abs());
            }
        }
        let mut this_ok = tau_ok && holding_ok && bound_ok;
        if alpha == 1.0 {
            let some_wait = syn.policy.waiting_times().iter().any(|&t| t > 1);
            this_ok &= equality_gap <= 1e-4 && some_wait;
            details.push(format!(
                "alpha 1: equality gap {equality_gap:.2e}, waits>1 at {} states",
                syn.policy
                    .waiting_times()
                    .iter()
                    .filter(|&&t| t > 1)
                    .count()
            ));
        }
        ok &= this_ok;
        details.push(format!(
            "alpha {alpha}: feasible, test and bound hold: {this_ok}"
        ));
    }
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(2);
    report(
        "criterion 6 (greedy guarantee soundness for alpha in {1, 1.1, 1.4, 2})",
        ok,
        &format!("{}; elapsed {elapsed:?}", details.join("; ")),
    );
}

#[test]
fn criterion_07_waiting_times_monotone_in_alpha() {
    let (model, _) = build_mdp(&windy_spec());
    let classic =
        mdp::value_iteration(&model, &SolverConfig::new(BETA).with_tolerance(1e-9)).unwrap();
    let mut previous: Option<Vec<usize>> = None;
    let mut monotone = true;
    for alpha in [1.0, 1.1, 1.4, 2.0] {
        let config = TriggerConfig::new(BETA, T_BAR)
            .with_alpha(alpha)
            .with_tolerance(1e-7);
        let syn = trigger::synthesize_guaranteed(&model, &classic.values, &config).unwrap();
        let tau = syn.policy.waiting_times().to_vec();
        if let Some(prev) = &previous {
            monotone &= prev.iter().zip(tau.iter()).all(|(a, b)| a <= b);
        }
        previous = Some(tau);
    }
    report(
        "criterion 7 (waiting times pointwise non-decreasing in alpha)",
        monotone,
        "alpha sweep 1 -> 1.1 -> 1.4 -> 2 on the windy grid",
    );
}

#[test]
fn criterion_08_consolidated_expansion_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let model = common::random_model(&mut rng, 5, 2);
        let beta = 0.5 + rng.random::<f64>() * 0.49;
        let t_bar = rng.random_range(1..=3);
        let penalty = rng.random::<f64>() * 5.0;
        let config = TriggerConfig::new(beta, t_bar)
            .with_penalty(penalty)
            .with_tolerance(1e-9)
            .with_max_iterations(1_000_000);
        let lookahead = trigger::solve_penalized(&model, &config).unwrap();
        let expanded = common::consolidated_classic_model(&model, &config);
        let classic = mdp::value_iteration(
            &expanded,
            &SolverConfig::new(beta)
                .with_tolerance(1e-9)
                .with_max_iterations(1_000_000),
        )
        .unwrap();
        for x in 0..model.num_states() {
            worst = worst.max((lookahead.values.value(x) - classic.values.value(x)).abs());
        }
    }
    let elapsed = started.elapsed();
    report(
        "criterion 8 (lookahead value equals classic value of the expanded pair-action MDP)",
        worst <= 1e-6 && elapsed < Duration::from_secs(10),
        &format!("200 random models, worst gap {worst:.3e} (<= 1e-6), elapsed {elapsed:?}"),
    );
}

#[test]
fn criterion_09_classic_vi_matches_policy_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(4096);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let model = common::random_model(&mut rng, 6, 3);
        let beta = 0.5 + rng.random::<f64>() * 0.49;
        let sol = mdp::value_iteration(
            &model,
            &SolverConfig::new(beta)
                .with_tolerance(1e-10)
                .with_max_iterations(1_000_000),
        )
        .unwrap();
        let oracle = common::enumerated_optimal_value(&model, beta);
        for (x, expected) in oracle.iter().enumerate() {
            worst = worst.max((sol.values.value(x) - expected).abs());
        }
    }
    report(
        "criterion 9 (classic VI equals exhaustive policy enumeration)",
        worst <= 1e-6,
        &format!("200 random models, worst gap {worst:.3e} (<= 1e-6)"),
    );
}

#[test]
fn criterion_10_lookahead_iterates_respect_the_rate_bound() {
    let mut ok = true;
    let mut worst_margin = f64::NEG_INFINITY;
    for spec in [paper_grid(), windy_spec()] {
        let (model, _) = build_mdp(&spec);
        for penalty in [0.0, 0.1, 40.0, 80.0] {
            let config = TriggerConfig::new(BETA, T_BAR).with_penalty(penalty);
            let tables = trigger::build_lookahead_tables(&model, &config).unwrap();
            let reference = trigger::solve_penalized_with_tables(
                &tables,
                &config
                    .clone()
                    .with_tolerance(1e-11)
                    .with_max_iterations(1_000_000),
            )
            .unwrap();
            let mut v = ValueFunction::zeros(model.num_states());
            let (v1, _) = trigger::lookahead_backup(&tables, &config, &v).unwrap();
            let first_step = v1.sup_dist(&v);
            for k in 1..=80 {
                let (next, _) = trigger::lookahead_backup(&tables, &config, &v).unwrap();
                v = next;
                let bound = BETA.powi(k) / (1.0 - BETA) * first_step;
                let err = v.sup_dist(&reference.values);
                worst_margin = worst_margin.max(err - bound);
                ok &= err <= bound + 1e-9;
            }
        }
    }
    report(
        "criterion 10 (iterate error within beta^k/(1-beta) of the first step)",
        ok,
        &format!("worst (error - bound) margin {worst_margin:.3e} over both winds, four penalties"),
    );
}

#[test]
fn criterion_11_monte_carlo_agrees_with_the_analytic_evaluation() {
    let started = Instant::now();
    let (model, indexing) = build_mdp(&windy_spec());
    let config = TriggerConfig::new(BETA, T_BAR)
        .with_penalty(0.1)
        .with_tolerance(1e-9);
    let sol = trigger::solve_penalized(&model, &config).unwrap();
    let analytic = trigger::evaluate_policy(&model, &sol.policy, &config, true).unwrap();
    let expected = analytic.value(indexing.start_state());
    let horizon = 400;
    let stats = sim::estimate_cost(
        &model,
        &sol.policy,
        indexing.start_state(),
        horizon,
        10_000,
        7,
        &[],
        &config,
    )
    .unwrap();
    let truncation =
        BETA.powi(horizon as i32) * (model.max_cost() + config.update_penalty) / (1.0 - BETA);
    let gap = (stats.mean_total - expected).abs();
    let allowance = 3.0 * stats.stderr_total + truncation;
    let elapsed = started.elapsed();
    report(
        "criterion 11 (10k-seed Monte Carlo mean within 3 stderr of the analytic cost)",
        gap <= allowance && elapsed < Duration::from_secs(30),
        &format!(
            "mean {:.5} vs analytic {expected:.5}, gap {gap:.4} <= allowance {allowance:.4}, \
             elapsed {elapsed:?}",
            stats.mean_total
        ),
    );
}

#[test]
fn criterion_12_transition_fidelity_on_the_bundled_layout() {
    let (dry, indexing) = build_mdp(&paper_grid());
    let (wet, _) = build_mdp(&windy_spec());
    let s = |display: usize| indexing.state_from_display(display).unwrap();
    let east = Direction::East.index();
    let north = Direction::North.index();
    let exact = dry.transition_prob(s(1), north, s(6)) == 1.0
        && wet.transition_prob(s(11), east, s(12)) == 0.8
        && wet.transition_prob(s(11), east, s(10)) == 0.1
        && wet.transition_prob(s(11), east, s(16)) == 0.1;
    report(
        "criterion 12 (exact transition entries at the quoted states)",
        exact,
        &format!(
            "P_dry(6|1,north) = {}, P_wind(12|11,east) = {}, P_wind(10|11,east) = {}, \
             P_wind(16|11,east) = {}",
            dry.transition_prob(s(1), north, s(6)),
            wet.transition_prob(s(11), east, s(12)),
            wet.transition_prob(s(11), east, s(10)),
            wet.transition_prob(s(11), east, s(16)),
        ),
    );
}
