//! Shared helpers for the integration suites: seeded random models, an
//! exact linear-solve policy evaluator (the oracle side of the solver
//! checks), and the expanded action-space model used by the consolidated
//! equivalence check.
//!
//! Not every test binary uses every helper.
#![allow(dead_code)]

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use stmdp::mdp::MdpModel;
use stmdp::trigger::{self, TriggerConfig};

/// A random model with `1..=max_states` states and `1..=max_actions`
/// actions; rows are normalised positive weights, occasionally sparse.
pub fn random_model(rng: &mut ChaCha8Rng, max_states: usize, max_actions: usize) -> MdpModel {
    let n = rng.random_range(1..=max_states);
    let m = rng.random_range(1..=max_actions);
    let mut transitions = Vec::with_capacity(m);
    for _ in 0..m {
        let mut p = Array2::zeros((n, n));
        for x in 0..n {
            let sparse = n > 1 && rng.random_bool(0.3);
            let mut weights = vec![0.0f64; n];
            let mut sum = 0.0;
            for w in weights.iter_mut() {
                if sparse && rng.random_bool(0.5) {
                    continue;
                }
                *w = rng.random::<f64>() + 1e-3;
                sum += *w;
            }
            if sum == 0.0 {
                weights[x] = 1.0;
                sum = 1.0;
            }
            for (y, w) in weights.iter().enumerate() {
                p[[x, y]] = w / sum;
            }
        }
        transitions.push(p);
    }
    let mut costs = Array2::zeros((n, m));
    for x in 0..n {
        for a in 0..m {
            costs[[x, a]] = rng.random::<f64>() * 10.0;
        }
    }
    MdpModel::new(transitions, costs).expect("random model is valid")
}

/// Dense Gaussian elimination with partial pivoting.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let d = a[col][col];
        let pivot_row = a[col].clone();
        for row in col + 1..n {
            let f = a[row][col] / d;
            if f == 0.0 {
                continue;
            }
            for (k, pivot_val) in pivot_row.iter().enumerate().skip(col) {
                a[row][k] -= f * pivot_val;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

/// Exact discounted value of a stationary policy: solves
/// `(I - beta * P_policy) v = c_policy` directly.
pub fn exact_policy_value(model: &MdpModel, policy: &[usize], beta: f64) -> Vec<f64> {
    let n = model.num_states();
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for x in 0..n {
        let act = policy[x];
        for (y, entry) in a[x].iter_mut().enumerate() {
            *entry = -beta * model.transition_prob(x, act, y);
        }
        a[x][x] += 1.0;
        b[x] = model.cost(x, act);
    }
    solve_linear(a, b)
}

/// Pointwise minimum of the exact values of every deterministic stationary
/// policy. Exponential in the state count; oracle use only.
pub fn enumerated_optimal_value(model: &MdpModel, beta: f64) -> Vec<f64> {
    let n = model.num_states();
    let m = model.num_actions();
    let mut best = vec![f64::INFINITY; n];
    let mut policy = vec![0usize; n];
    loop {
        let v = exact_policy_value(model, &policy, beta);
        for x in 0..n {
            best[x] = best[x].min(v[x]);
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            policy[i] += 1;
            if policy[i] < m {
                break;
            }
            policy[i] = 0;
            i += 1;
        }
    }
}

/// The expanded classic MDP whose action set is (action, waiting time):
/// skip-step transitions with the extra discount `beta^(dt-1)` folded into
/// the rows (missing mass routed to a zero-cost phantom state), and stage
/// costs `cbar(x,a,dt) + beta^dt * penalty`. Its classic optimal value on
/// the original states equals the penalized lookahead fixed point.
pub fn consolidated_classic_model(model: &MdpModel, config: &TriggerConfig) -> MdpModel {
    let n = model.num_states();
    let m = model.num_actions();
    let t_bar = config.t_bar;
    let beta = config.beta;
    let phantom = n;
    let mut transitions = Vec::with_capacity(m * t_bar);
    let mut costs = Array2::zeros((n + 1, m * t_bar));
    for a in 0..m {
        for dt in 1..=t_bar {
            let pair = a * t_bar + (dt - 1);
            let skip = trigger::skip_transition(model, a, dt).unwrap();
            let scale = beta.powi(dt as i32 - 1);
            let mut p = Array2::zeros((n + 1, n + 1));
            for x in 0..n {
                let mut row_sum = 0.0;
                for y in 0..n {
                    let v = scale * skip[[x, y]];
                    p[[x, y]] = v;
                    row_sum += v;
                }
                p[[x, phantom]] = (1.0 - row_sum).max(0.0);
                costs[[x, pair]] = trigger::consolidated_cost(model, x, a, dt, beta).unwrap()
                    + beta.powi(dt as i32) * config.update_penalty;
            }
            p[[phantom, phantom]] = 1.0;
            transitions.push(p);
        }
    }
    MdpModel::new(transitions, costs).expect("expanded model is valid")
}
