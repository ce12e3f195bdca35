//! Seeded Monte Carlo rollouts of self-triggered policies.
//!
//! Reproducibility: every rollout draws from a ChaCha8 generator seeded with
//! the caller's 64-bit seed; episode `i` of an estimation run uses stream
//! `i` of that generator. Identical inputs therefore give byte-identical
//! trajectories on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::mdp::MdpModel;
use crate::trigger::{SelfTriggeredPolicy, TriggerConfig, TriggerError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("start state {state} out of range for {num_states} states")]
    InvalidStart { state: usize, num_states: usize },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("at least one episode is required")]
    NoEpisodes,
    #[error(transparent)]
    Trigger(#[from] TriggerError),
}

/// One simulated episode.
///
/// `states` has `horizon + 1` entries, `actions` has `horizon`; the action
/// is constant between consecutive trigger times. Costs and penalties are
/// discounted sums over the simulated window: stage costs over
/// `t < horizon`, update penalties over every trigger after the initial one.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
    /// Times at which the policy was consulted, starting with 0.
    pub trigger_times: Vec<usize>,
    pub discounted_cost: f64,
    pub discounted_penalty: f64,
}

impl Trajectory {
    /// Number of simulated steps.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Earliest time at which the trajectory sits in one of `goal`.
    pub fn first_hit(&self, goal: &[usize]) -> Option<usize> {
        self.states.iter().position(|s| goal.contains(s))
    }

    /// Number of triggers strictly inside `(0, t)`.
    pub fn updates_before(&self, t: usize) -> usize {
        self.trigger_times
            .iter()
            .filter(|&&tl| tl > 0 && tl < t)
            .count()
    }
}

/// Simulates `horizon` steps of `policy` from `start`, drawing transitions
/// from stream `stream` of a ChaCha8 generator seeded with `seed`.
pub fn rollout_stream(
    model: &MdpModel,
    policy: &SelfTriggeredPolicy,
    start: usize,
    horizon: usize,
    seed: u64,
    stream: u64,
    config: &TriggerConfig,
) -> Result<Trajectory, SimError> {
    config.validate()?;
    validate_policy(model, policy, config)?;
    if start >= model.num_states() {
        return Err(SimError::InvalidStart {
            state: start,
            num_states: model.num_states(),
        });
    }
    if horizon == 0 {
        return Err(SimError::ZeroHorizon);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);

    let mut states = Vec::with_capacity(horizon + 1);
    let mut actions = Vec::with_capacity(horizon);
    let mut trigger_times = Vec::new();
    let mut discounted_cost = 0.0;
    let mut discounted_penalty = 0.0;

    let mut x = start;
    states.push(x);
    let mut discount = 1.0;
    let mut action = 0;
    let mut next_trigger = 0;
    for t in 0..horizon {
        if t == next_trigger {
            action = policy.action(x);
            next_trigger = t + policy.waiting_time(x);
            trigger_times.push(t);
            if t > 0 {
                discounted_penalty += discount * config.update_penalty;
            }
        }
        discounted_cost += discount * model.cost(x, action);
        x = sample_next(model, x, action, &mut rng);
        states.push(x);
        actions.push(action);
        discount *= config.beta;
    }

    Ok(Trajectory {
        states,
        actions,
        trigger_times,
        discounted_cost,
        discounted_penalty,
    })
}

/// [`rollout_stream`] on stream 0.
pub fn rollout(
    model: &MdpModel,
    policy: &SelfTriggeredPolicy,
    start: usize,
    horizon: usize,
    seed: u64,
    config: &TriggerConfig,
) -> Result<Trajectory, SimError> {
    rollout_stream(model, policy, start, horizon, seed, 0, config)
}

fn validate_policy(
    model: &MdpModel,
    policy: &SelfTriggeredPolicy,
    config: &TriggerConfig,
) -> Result<(), SimError> {
    if policy.len() != model.num_states() {
        return Err(SimError::Trigger(TriggerError::DimensionMismatch {
            expected: model.num_states(),
            got: policy.len(),
        }));
    }
    for x in 0..policy.len() {
        if policy.waiting_time(x) < 1 || policy.waiting_time(x) > config.t_bar {
            return Err(SimError::Trigger(TriggerError::InvalidPolicy {
                state: x,
                message: format!(
                    "waiting time {} outside 1..={}",
                    policy.waiting_time(x),
                    config.t_bar
                ),
            }));
        }
        if policy.action(x) >= model.num_actions() {
            return Err(SimError::Trigger(TriggerError::InvalidPolicy {
                state: x,
                message: format!("action {} out of range", policy.action(x)),
            }));
        }
    }
    Ok(())
}

fn sample_next(model: &MdpModel, state: usize, action: usize, rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last = state;
    for y in 0..model.num_states() {
        let p = model.transition_prob(state, action, y);
        if p == 0.0 {
            continue;
        }
        cum += p;
        last = y;
        if u < cum {
            return y;
        }
    }
    // Row sums can fall a hair short of 1; attribute the residual mass to
    // the last reachable state.
    last
}

/// Aggregates over independently seeded rollouts.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutStats {
    pub num_episodes: usize,
    pub mean_cost: f64,
    pub stderr_cost: f64,
    pub mean_penalty: f64,
    pub stderr_penalty: f64,
    /// Cost plus penalty, the penalized objective.
    pub mean_total: f64,
    pub stderr_total: f64,
    /// Per episode: steps until the goal set was first hit (the horizon when
    /// it never was).
    pub mean_steps: f64,
    /// Per episode: triggers strictly between time zero and the goal hit.
    pub mean_updates: f64,
    /// `1 - total updates / total steps`: the fraction of steps that needed
    /// no transmission.
    pub savings_ratio: f64,
}

/// Runs `num_seeds` rollouts (streams `0..num_seeds` of `seed`) and reports
/// sample means with standard errors. `goal` is the set of states that ends
/// the step/update accounting, e.g. target plus absorbing on a grid; pass an
/// empty slice to account over the whole horizon.
#[allow(clippy::too_many_arguments)]
pub fn estimate_cost(
    model: &MdpModel,
    policy: &SelfTriggeredPolicy,
    start: usize,
    horizon: usize,
    num_seeds: usize,
    seed: u64,
    goal: &[usize],
    config: &TriggerConfig,
) -> Result<RolloutStats, SimError> {
    if num_seeds == 0 {
        return Err(SimError::NoEpisodes);
    }
    let mut costs = Vec::with_capacity(num_seeds);
    let mut penalties = Vec::with_capacity(num_seeds);
    let mut totals = Vec::with_capacity(num_seeds);
    let mut total_steps = 0usize;
    let mut total_updates = 0usize;
    for episode in 0..num_seeds {
        let traj = rollout_stream(model, policy, start, horizon, seed, episode as u64, config)?;
        let steps = if goal.is_empty() {
            horizon
        } else {
            traj.first_hit(goal).unwrap_or(horizon)
        };
        total_steps += steps;
        total_updates += traj.updates_before(steps);
        costs.push(traj.discounted_cost);
        penalties.push(traj.discounted_penalty);
        totals.push(traj.discounted_cost + traj.discounted_penalty);
    }
    let (mean_cost, stderr_cost) = mean_stderr(&costs);
    let (mean_penalty, stderr_penalty) = mean_stderr(&penalties);
    let (mean_total, stderr_total) = mean_stderr(&totals);
    let savings_ratio = if total_steps == 0 {
        0.0
    } else {
        1.0 - total_updates as f64 / total_steps as f64
    };
    Ok(RolloutStats {
        num_episodes: num_seeds,
        mean_cost,
        stderr_cost,
        mean_penalty,
        stderr_penalty,
        mean_total,
        stderr_total,
        mean_steps: total_steps as f64 / num_seeds as f64,
        mean_updates: total_updates as f64 / num_seeds as f64,
        savings_ratio,
    })
}

fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Smallest horizon at which the discounted tail `beta^h * max_cost /
/// (1 - beta)` drops below `bias`.
pub fn default_horizon(beta: f64, max_cost: f64, bias: f64) -> usize {
    assert!(beta > 0.0 && beta < 1.0);
    assert!(bias > 0.0);
    if max_cost <= 0.0 {
        return 1;
    }
    let mut h = 1usize;
    let mut tail = beta * max_cost / (1.0 - beta);
    while tail > bias && h < 1_000_000 {
        tail *= beta;
        h += 1;
    }
    h
}
