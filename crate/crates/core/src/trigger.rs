//! Self-triggered decision making.
//!
//! A self-triggered policy is a pair `(tau, pi)`: at an update instant the
//! controller picks an action `pi(x)` and holds it for `tau(x)` steps, at
//! which point the next update fires. Two synthesis routes are provided.
//!
//! [`solve_penalized`] charges a penalty `O` at every update after the first
//! and solves the resulting dynamic-programming equation, whose decision
//! variable is the pair (action, waiting time):
//!
//! ```text
//! V(x) = min over a, dt of  cbar(x,a,dt) + beta^dt * ( E[V(x_dt)] + O )
//! ```
//!
//! where `cbar(x,a,dt)` is the expected discounted cost of holding `a` for
//! `dt` steps from `x`, and the expectation is over the `dt`-step transition
//! `P_a^dt`. With `O = 0` the fixed point coincides with the classic optimal
//! value and waiting one step is always among the minimisers.
//!
//! [`synthesize_guaranteed`] instead maximises each state's waiting time
//! subject to a hard suboptimality bound: the held-action cost test
//!
//! ```text
//! cbar(x,a,dt) + alpha * beta^dt * E[V(x_dt)]  <=  alpha * V(x)
//! ```
//!
//! is sufficient for the realized no-penalty cost of the policy to stay
//! within `alpha * V` pointwise, and it is always satisfiable at `dt = 1` by
//! the classic optimal action, so the greedy scan from `t_bar` downward
//! terminates.

use ndarray::Array2;
use thiserror::Error;

use crate::linalg;
use crate::mdp::{MdpModel, ValueFunction};

/// A waiting-time policy paired with a control policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelfTriggeredPolicy {
    tau: Vec<usize>,
    pi: Vec<usize>,
}

impl SelfTriggeredPolicy {
    pub fn new(tau: Vec<usize>, pi: Vec<usize>) -> Self {
        Self { tau, pi }
    }

    /// Waiting time until the next update when updating at `state`.
    pub fn waiting_time(&self, state: usize) -> usize {
        self.tau[state]
    }

    /// Action held between this update and the next.
    pub fn action(&self, state: usize) -> usize {
        self.pi[state]
    }

    pub fn waiting_times(&self) -> &[usize] {
        &self.tau
    }

    pub fn actions(&self) -> &[usize] {
        &self.pi
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    fn validate(&self, model: &MdpModel, t_bar: usize) -> Result<(), TriggerError> {
        if self.tau.len() != model.num_states() || self.pi.len() != model.num_states() {
            return Err(TriggerError::DimensionMismatch {
                expected: model.num_states(),
                got: self.tau.len().max(self.pi.len()),
            });
        }
        for x in 0..self.tau.len() {
            if self.tau[x] < 1 || self.tau[x] > t_bar {
                return Err(TriggerError::InvalidPolicy {
                    state: x,
                    message: format!("waiting time {} outside 1..={t_bar}", self.tau[x]),
                });
            }
            if self.pi[x] >= model.num_actions() {
                return Err(TriggerError::InvalidPolicy {
                    state: x,
                    message: format!(
                        "action {} out of range for {} actions",
                        self.pi[x],
                        model.num_actions()
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Parameters shared by the self-triggered solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerConfig {
    /// Discount factor, strictly inside (0, 1).
    pub beta: f64,
    /// Upper bound on the waiting time between updates.
    pub t_bar: usize,
    /// Penalty charged (discounted) at each update after the first.
    pub update_penalty: f64,
    /// Suboptimality factor for the guaranteed synthesis, at least 1.
    pub alpha: f64,
    /// Sup-norm stopping threshold for fixed-point iterations.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl TriggerConfig {
    pub fn new(beta: f64, t_bar: usize) -> Self {
        Self {
            beta,
            t_bar,
            update_penalty: 0.0,
            alpha: 1.0,
            tolerance: 1e-5,
            max_iterations: 10_000,
        }
    }

    pub fn with_penalty(mut self, update_penalty: f64) -> Self {
        self.update_penalty = update_penalty;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn validate(&self) -> Result<(), TriggerError> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(TriggerError::InvalidConfig(format!(
                "discount factor must lie strictly inside (0, 1), got {}",
                self.beta
            )));
        }
        if self.t_bar < 1 {
            return Err(TriggerError::InvalidConfig(
                "maximum waiting time must be at least 1".into(),
            ));
        }
        if !self.update_penalty.is_finite() || self.update_penalty < 0.0 {
            return Err(TriggerError::InvalidConfig(format!(
                "update penalty must be finite and nonnegative, got {}",
                self.update_penalty
            )));
        }
        if !self.alpha.is_finite() || self.alpha < 1.0 {
            return Err(TriggerError::InvalidConfig(format!(
                "suboptimality factor must be at least 1, got {}",
                self.alpha
            )));
        }
        if self.tolerance <= 0.0 || !self.tolerance.is_finite() {
            return Err(TriggerError::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(TriggerError::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum TriggerError {
    #[error("invalid trigger configuration: {0}")]
    InvalidConfig(String),
    #[error("waiting time {dt} outside the valid range 1..={t_bar}")]
    DtOutOfRange { dt: usize, t_bar: usize },
    #[error("action {action} out of range for {num_actions} actions")]
    ActionOutOfRange { action: usize, num_actions: usize },
    #[error("state {state} out of range for {num_states} states")]
    StateOutOfRange { state: usize, num_states: usize },
    #[error("input has {got} entries but the model has {expected} states")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid self-triggered policy at state {state}: {message}")]
    InvalidPolicy { state: usize, message: String },
    #[error("lookahead tables were built for a different model or configuration: {0}")]
    TableMismatch(String),
    #[error("no convergence after {iterations} iterations, last sup-norm change {residual:.3e}")]
    NotConverged {
        iterations: usize,
        residual: f64,
        last: ValueFunction,
    },
    #[error(
        "no feasible waiting time at state {state}; the supplied value function \
         is not a converged optimal value"
    )]
    Infeasible { state: usize },
}

/// Precomputed `dt`-step transition matrices and consolidated costs for all
/// waiting times up to `t_bar`. Independent of the update penalty, so one
/// table set serves a whole penalty sweep.
#[derive(Debug, Clone)]
pub struct LookaheadTables {
    beta: f64,
    t_bar: usize,
    num_states: usize,
    num_actions: usize,
    /// `skip[a][dt-1]` is `P_a^dt`.
    skip: Vec<Vec<Array2<f64>>>,
    /// `ccost[dt-1]` is the `N x M` table of `cbar(., ., dt)`.
    ccost: Vec<Array2<f64>>,
    /// `beta_powers[k]` is `beta^k` for `k <= t_bar`.
    beta_powers: Vec<f64>,
}

impl LookaheadTables {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn t_bar(&self) -> usize {
        self.t_bar
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// The `dt`-step transition matrix for `action`.
    pub fn skip(&self, action: usize, dt: usize) -> Result<&Array2<f64>, TriggerError> {
        if action >= self.num_actions {
            return Err(TriggerError::ActionOutOfRange {
                action,
                num_actions: self.num_actions,
            });
        }
        if dt < 1 || dt > self.t_bar {
            return Err(TriggerError::DtOutOfRange {
                dt,
                t_bar: self.t_bar,
            });
        }
        Ok(&self.skip[action][dt - 1])
    }

    /// Expected discounted cost of holding `action` for `dt` steps from
    /// `state`.
    pub fn consolidated_cost(
        &self,
        state: usize,
        action: usize,
        dt: usize,
    ) -> Result<f64, TriggerError> {
        if state >= self.num_states {
            return Err(TriggerError::StateOutOfRange {
                state,
                num_states: self.num_states,
            });
        }
        if action >= self.num_actions {
            return Err(TriggerError::ActionOutOfRange {
                action,
                num_actions: self.num_actions,
            });
        }
        if dt < 1 || dt > self.t_bar {
            return Err(TriggerError::DtOutOfRange {
                dt,
                t_bar: self.t_bar,
            });
        }
        Ok(self.ccost[dt - 1][[state, action]])
    }

    fn beta_pow(&self, k: usize) -> f64 {
        self.beta_powers[k]
    }

    fn check(&self, model_or_v_len: usize, config: &TriggerConfig) -> Result<(), TriggerError> {
        if model_or_v_len != self.num_states {
            return Err(TriggerError::DimensionMismatch {
                expected: self.num_states,
                got: model_or_v_len,
            });
        }
        if config.beta != self.beta {
            return Err(TriggerError::TableMismatch(format!(
                "tables built for beta = {}, config has beta = {}",
                self.beta, config.beta
            )));
        }
        if config.t_bar != self.t_bar {
            return Err(TriggerError::TableMismatch(format!(
                "tables built for t_bar = {}, config has t_bar = {}",
                self.t_bar, config.t_bar
            )));
        }
        Ok(())
    }
}

/// The distribution of the state `dt` steps ahead when `action` is held the
/// whole time: the `dt`-th power of the one-step transition matrix.
pub fn skip_transition(
    model: &MdpModel,
    action: usize,
    dt: usize,
) -> Result<Array2<f64>, TriggerError> {
    if action >= model.num_actions() {
        return Err(TriggerError::ActionOutOfRange {
            action,
            num_actions: model.num_actions(),
        });
    }
    if dt < 1 {
        return Err(TriggerError::DtOutOfRange {
            dt,
            t_bar: usize::MAX,
        });
    }
    let p = model.transition(action);
    let mut power = p.clone();
    for _ in 1..dt {
        power = linalg::mat_mul(&power, p);
    }
    Ok(power)
}

/// Expected discounted cost of holding `action` for `dt` steps from `state`:
/// `sum over t < dt of beta^t * (P_a^t c_a)(state)`.
pub fn consolidated_cost(
    model: &MdpModel,
    state: usize,
    action: usize,
    dt: usize,
    beta: f64,
) -> Result<f64, TriggerError> {
    if state >= model.num_states() {
        return Err(TriggerError::StateOutOfRange {
            state,
            num_states: model.num_states(),
        });
    }
    if action >= model.num_actions() {
        return Err(TriggerError::ActionOutOfRange {
            action,
            num_actions: model.num_actions(),
        });
    }
    if dt < 1 {
        return Err(TriggerError::DtOutOfRange {
            dt,
            t_bar: usize::MAX,
        });
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(TriggerError::InvalidConfig(format!(
            "discount factor must lie strictly inside (0, 1), got {beta}"
        )));
    }
    let cost_col: Vec<f64> = (0..model.num_states())
        .map(|x| model.cost(x, action))
        .collect();
    let p = model.transition(action);
    let mut acc = model.cost(state, action);
    let mut power: Option<Array2<f64>> = None;
    let mut beta_pow = 1.0;
    for _ in 1..dt {
        let next = match &power {
            None => p.clone(),
            Some(prev) => linalg::mat_mul(prev, p),
        };
        beta_pow *= beta;
        acc += beta_pow * linalg::row_dot(&next, state, &cost_col);
        power = Some(next);
    }
    Ok(acc)
}

/// Precomputes skip transitions and consolidated costs for every action and
/// every waiting time up to `config.t_bar`. Table reads agree bit-for-bit
/// with [`skip_transition`] and [`consolidated_cost`], which share the same
/// kernels and accumulation order.
pub fn build_lookahead_tables(
    model: &MdpModel,
    config: &TriggerConfig,
) -> Result<LookaheadTables, TriggerError> {
    config.validate()?;
    let n = model.num_states();
    let m = model.num_actions();
    let t_bar = config.t_bar;
    let beta = config.beta;

    let mut beta_powers = Vec::with_capacity(t_bar + 1);
    let mut pow = 1.0;
    for _ in 0..=t_bar {
        beta_powers.push(pow);
        pow *= beta;
    }

    let mut skip = Vec::with_capacity(m);
    for a in 0..m {
        let p = model.transition(a);
        let mut per_action = Vec::with_capacity(t_bar);
        per_action.push(p.clone());
        for dt in 2..=t_bar {
            let next = linalg::mat_mul(&per_action[dt - 2], p);
            per_action.push(next);
        }
        skip.push(per_action);
    }

    let mut ccost = Vec::with_capacity(t_bar);
    ccost.push(model.costs().clone());
    for dt in 2..=t_bar {
        let mut table = ccost[dt - 2].clone();
        for a in 0..m {
            let cost_col: Vec<f64> = (0..n).map(|x| model.cost(x, a)).collect();
            let p_prev = &skip[a][dt - 2];
            for x in 0..n {
                table[[x, a]] += beta_powers[dt - 1] * linalg::row_dot(p_prev, x, &cost_col);
            }
        }
        ccost.push(table);
    }

    #[cfg(debug_assertions)]
    for per_action in &skip {
        for p in per_action {
            for x in 0..n {
                let sum: f64 = (0..n).map(|y| p[[x, y]]).sum();
                debug_assert!((sum - 1.0).abs() < 1e-10, "skip row drifted: {sum}");
            }
        }
    }

    Ok(LookaheadTables {
        beta,
        t_bar,
        num_states: n,
        num_actions: m,
        skip,
        ccost,
        beta_powers,
    })
}

/// Relative width of the tie window used when extracting minimisers.
///
/// Mathematically tied decompositions (e.g. updating now versus holding the
/// same action along a deterministic stretch when updates are free) evaluate
/// to floating-point numbers a few ulps apart, so an exact comparison would
/// break ties arbitrarily. Candidates within `TIE_EPS * (1 + |min|)` of the
/// minimum count as attaining it; genuine cost differences in the problems
/// this crate targets are many orders of magnitude larger.
pub const TIE_EPS: f64 = 1e-9;

fn tie_window(q_min: f64) -> f64 {
    TIE_EPS * (1.0 + q_min.abs())
}

/// One backup of the penalized lookahead equation. For every state the
/// minimum runs over actions and waiting times; ties are broken to the
/// smallest waiting time first, then the lowest action index.
pub fn lookahead_backup(
    tables: &LookaheadTables,
    config: &TriggerConfig,
    v: &ValueFunction,
) -> Result<(ValueFunction, SelfTriggeredPolicy), TriggerError> {
    config.validate()?;
    tables.check(v.len(), config)?;
    let n = tables.num_states;
    let m = tables.num_actions;
    let penalty = config.update_penalty;
    let mut values = Vec::with_capacity(n);
    let mut tau = Vec::with_capacity(n);
    let mut pi = Vec::with_capacity(n);
    let mut scratch = Vec::with_capacity(tables.t_bar * m);
    for x in 0..n {
        scratch.clear();
        let mut q_min = f64::INFINITY;
        for dt in 1..=tables.t_bar {
            let discount = tables.beta_pow(dt);
            for a in 0..m {
                let expected = linalg::row_dot(&tables.skip[a][dt - 1], x, v.as_slice());
                let q = tables.ccost[dt - 1][[x, a]] + discount * (expected + penalty);
                scratch.push(q);
                if q < q_min {
                    q_min = q;
                }
            }
        }
        // Scan in (waiting time, action) order and take the first candidate
        // inside the tie window.
        let window = tie_window(q_min);
        let pick = scratch
            .iter()
            .position(|&q| q <= q_min + window)
            .expect("minimum is in the candidate list");
        values.push(q_min);
        tau.push(pick / m + 1);
        pi.push(pick % m);
    }
    Ok((
        ValueFunction::new(values),
        SelfTriggeredPolicy::new(tau, pi),
    ))
}

/// A converged solve of the penalized lookahead equation.
#[derive(Debug, Clone)]
pub struct LookaheadSolution {
    pub values: ValueFunction,
    pub policy: SelfTriggeredPolicy,
    /// Number of backups applied before the stopping rule fired.
    pub iterations: usize,
    /// Sup-norm residual of `values` under one more backup.
    pub residual: f64,
}

/// Value iteration on the penalized lookahead equation, from the zero
/// vector, stopping when the sup-norm change drops to `config.tolerance`.
/// The returned policy is greedy with respect to the returned values.
pub fn solve_penalized(
    model: &MdpModel,
    config: &TriggerConfig,
) -> Result<LookaheadSolution, TriggerError> {
    let tables = build_lookahead_tables(model, config)?;
    solve_penalized_with_tables(&tables, config)
}

/// Same as [`solve_penalized`] but reuses prebuilt tables, e.g. across a
/// sweep of update penalties.
pub fn solve_penalized_with_tables(
    tables: &LookaheadTables,
    config: &TriggerConfig,
) -> Result<LookaheadSolution, TriggerError> {
    config.validate()?;
    let mut v = ValueFunction::zeros(tables.num_states);
    let mut change = f64::INFINITY;
    for k in 1..=config.max_iterations {
        let (next, _) = lookahead_backup(tables, config, &v)?;
        change = next.sup_dist(&v);
        v = next;
        if change <= config.tolerance {
            let (check, policy) = lookahead_backup(tables, config, &v)?;
            return Ok(LookaheadSolution {
                residual: check.sup_dist(&v),
                values: v,
                policy,
                iterations: k,
            });
        }
    }
    Err(TriggerError::NotConverged {
        iterations: config.max_iterations,
        residual: change,
        last: v,
    })
}

/// Discounted cost of following a fixed self-triggered policy: the fixed
/// point of
///
/// ```text
/// v(x) = cbar(x, pi(x), tau(x)) + beta^tau(x) * ( E[v(x_tau)] + O? )
/// ```
///
/// With `include_penalty` the update penalty is charged at every decision
/// (the criterion the penalized solver optimises); without it the result is
/// the plain discounted stage cost of the policy, the quantity the
/// suboptimality guarantee bounds.
pub fn evaluate_policy(
    model: &MdpModel,
    policy: &SelfTriggeredPolicy,
    config: &TriggerConfig,
    include_penalty: bool,
) -> Result<ValueFunction, TriggerError> {
    config.validate()?;
    policy.validate(model, config.t_bar)?;
    let tables = build_lookahead_tables(model, config)?;
    evaluate_policy_with_tables(&tables, policy, config, include_penalty)
}

pub fn evaluate_policy_with_tables(
    tables: &LookaheadTables,
    policy: &SelfTriggeredPolicy,
    config: &TriggerConfig,
    include_penalty: bool,
) -> Result<ValueFunction, TriggerError> {
    config.validate()?;
    tables.check(policy.len(), config)?;
    let n = tables.num_states;
    let penalty = if include_penalty {
        config.update_penalty
    } else {
        0.0
    };
    let mut v = ValueFunction::zeros(n);
    let mut change = f64::INFINITY;
    for _ in 1..=config.max_iterations {
        let mut next = Vec::with_capacity(n);
        for x in 0..n {
            let dt = policy.waiting_time(x);
            let a = policy.action(x);
            let expected = linalg::row_dot(&tables.skip[a][dt - 1], x, v.as_slice());
            next.push(tables.ccost[dt - 1][[x, a]] + tables.beta_pow(dt) * (expected + penalty));
        }
        let next = ValueFunction::new(next);
        change = next.sup_dist(&v);
        v = next;
        if change <= config.tolerance {
            return Ok(v);
        }
    }
    Err(TriggerError::NotConverged {
        iterations: config.max_iterations,
        residual: change,
        last: v,
    })
}

/// Result of the greedy guaranteed synthesis.
#[derive(Debug, Clone)]
pub struct GreedySynthesis {
    pub policy: SelfTriggeredPolicy,
    /// Per state, the minimised held-action objective at the accepted
    /// waiting time.
    pub bound_values: ValueFunction,
}

/// For each state, picks the largest waiting time (and a minimising action)
/// whose held-action cost stays within `alpha` times the classic optimal
/// value, scanning from `t_bar` downward. Feasibility at `dt = 1` is
/// guaranteed by the classic optimal action, so the scan terminates whenever
/// `classic_v` is a converged optimal value; the comparison allows
/// `config.tolerance` of slack so a value converged to that tolerance is not
/// spuriously rejected.
pub fn synthesize_guaranteed(
    model: &MdpModel,
    classic_v: &ValueFunction,
    config: &TriggerConfig,
) -> Result<GreedySynthesis, TriggerError> {
    config.validate()?;
    let tables = build_lookahead_tables(model, config)?;
    synthesize_guaranteed_with_tables(&tables, classic_v, config)
}

pub fn synthesize_guaranteed_with_tables(
    tables: &LookaheadTables,
    classic_v: &ValueFunction,
    config: &TriggerConfig,
) -> Result<GreedySynthesis, TriggerError> {
    config.validate()?;
    tables.check(classic_v.len(), config)?;
    let n = tables.num_states;
    let alpha = config.alpha;
    let mut tau = Vec::with_capacity(n);
    let mut pi = Vec::with_capacity(n);
    let mut bounds = Vec::with_capacity(n);
    let mut scratch = Vec::with_capacity(tables.num_actions);
    for x in 0..n {
        let mut accepted = None;
        for dt in (1..=tables.t_bar).rev() {
            let discount = tables.beta_pow(dt);
            scratch.clear();
            let mut best = f64::INFINITY;
            for a in 0..tables.num_actions {
                let expected = linalg::row_dot(&tables.skip[a][dt - 1], x, classic_v.as_slice());
                let q = tables.ccost[dt - 1][[x, a]] + alpha * discount * expected;
                scratch.push(q);
                if q < best {
                    best = q;
                }
            }
            if best <= alpha * classic_v.value(x) + config.tolerance {
                let window = tie_window(best);
                let best_action = scratch
                    .iter()
                    .position(|&q| q <= best + window)
                    .expect("minimum is in the candidate list");
                accepted = Some((dt, best_action, best));
                break;
            }
        }
        match accepted {
            Some((dt, a, bound)) => {
                tau.push(dt);
                pi.push(a);
                bounds.push(bound);
            }
            None => return Err(TriggerError::Infeasible { state: x }),
        }
    }
    Ok(GreedySynthesis {
        policy: SelfTriggeredPolicy::new(tau, pi),
        bound_values: ValueFunction::new(bounds),
    })
}

/// Per-state outcome of [`verify_guarantee`].
#[derive(Debug, Clone)]
pub struct StateGuarantee {
    pub state: usize,
    /// Held-action objective at the policy's waiting time and action.
    pub holding_cost: f64,
    /// Realized no-penalty discounted cost of the policy from this state.
    pub realized_cost: f64,
    /// `alpha` times the classic optimal value.
    pub bound: f64,
    /// Whether the sufficient held-action test passes (with tolerance).
    pub holding_ok: bool,
    /// Whether the realized cost respects the bound (with tolerance).
    pub realized_ok: bool,
}

/// Verification report over all states.
#[derive(Debug, Clone)]
pub struct GuaranteeReport {
    pub alpha: f64,
    pub states: Vec<StateGuarantee>,
}

impl GuaranteeReport {
    pub fn all_holding_ok(&self) -> bool {
        self.states.iter().all(|s| s.holding_ok)
    }

    pub fn all_realized_ok(&self) -> bool {
        self.states.iter().all(|s| s.realized_ok)
    }

    pub fn all_ok(&self) -> bool {
        self.all_holding_ok() && self.all_realized_ok()
    }

    pub fn failures(&self) -> impl Iterator<Item = &StateGuarantee> {
        self.states
            .iter()
            .filter(|s| !s.holding_ok || !s.realized_ok)
    }
}

/// Checks, state by state, (i) the sufficient held-action test at the
/// policy's own waiting time and action, and (ii) the end-to-end bound
/// `realized cost <= alpha * V + tolerance` using the no-penalty policy
/// evaluation. When (i) holds everywhere, (ii) is implied.
pub fn verify_guarantee(
    model: &MdpModel,
    policy: &SelfTriggeredPolicy,
    classic_v: &ValueFunction,
    config: &TriggerConfig,
) -> Result<GuaranteeReport, TriggerError> {
    config.validate()?;
    policy.validate(model, config.t_bar)?;
    if classic_v.len() != model.num_states() {
        return Err(TriggerError::DimensionMismatch {
            expected: model.num_states(),
            got: classic_v.len(),
        });
    }
    let tables = build_lookahead_tables(model, config)?;
    let realized = evaluate_policy_with_tables(&tables, policy, config, false)?;
    let alpha = config.alpha;
    let mut states = Vec::with_capacity(model.num_states());
    for x in 0..model.num_states() {
        let dt = policy.waiting_time(x);
        let a = policy.action(x);
        let expected = linalg::row_dot(&tables.skip[a][dt - 1], x, classic_v.as_slice());
        let holding = tables.ccost[dt - 1][[x, a]] + alpha * tables.beta_pow(dt) * expected;
        let bound = alpha * classic_v.value(x);
        states.push(StateGuarantee {
            state: x,
            holding_cost: holding,
            realized_cost: realized.value(x),
            bound,
            holding_ok: holding <= bound + config.tolerance,
            realized_ok: realized.value(x) <= bound + config.tolerance,
        });
    }
    Ok(GuaranteeReport { alpha, states })
}
