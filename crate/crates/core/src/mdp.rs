//! Finite discounted MDPs and the classic Bellman machinery.
//!
//! A model is the tuple (states, actions, per-action transition matrices,
//! stage costs). Costs are minimised. Value iteration starts from the zero
//! vector and stops when the sup-norm change between successive iterates
//! drops below the configured tolerance; with discount `beta < 1` the backup
//! is a `beta`-contraction, so
//! `||V_k - V*|| <= beta^k / (1 - beta) * ||V_1 - V_0||`.

use ndarray::{Array1, Array2};
use thiserror::Error;

use crate::linalg;

/// Transition rows must sum to one within this tolerance.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model needs at least one state and one action")]
    Empty,
    #[error("transition matrix for action {action} is {rows}x{cols}, expected {n}x{n}")]
    BadTransitionShape {
        action: usize,
        rows: usize,
        cols: usize,
        n: usize,
    },
    #[error("cost table is {rows}x{cols}, expected {n}x{m}")]
    BadCostShape {
        rows: usize,
        cols: usize,
        n: usize,
        m: usize,
    },
    #[error("P(.|{state},{action}) sums to {sum} instead of 1")]
    RowNotStochastic {
        action: usize,
        state: usize,
        sum: f64,
    },
    #[error("P({next}|{state},{action}) = {value} is not a probability")]
    BadProbability {
        action: usize,
        state: usize,
        next: usize,
        value: f64,
    },
    #[error("cost c({state},{action}) = {value} must be finite and nonnegative")]
    BadCost {
        state: usize,
        action: usize,
        value: f64,
    },
    #[error("{got} action labels provided for {expected} actions")]
    BadLabelCount { expected: usize, got: usize },
}

/// A finite MDP with dense per-action transition matrices and a stage-cost
/// table. Immutable after construction; all invariants are checked by
/// [`MdpModel::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct MdpModel {
    num_states: usize,
    num_actions: usize,
    transitions: Vec<Array2<f64>>,
    costs: Array2<f64>,
    action_labels: Option<Vec<String>>,
}

impl MdpModel {
    /// Builds a model from one `N x N` row-stochastic matrix per action and
    /// an `N x M` nonnegative cost table.
    pub fn new(transitions: Vec<Array2<f64>>, costs: Array2<f64>) -> Result<Self, ModelError> {
        let num_actions = transitions.len();
        let num_states = costs.nrows();
        if num_states == 0 || num_actions == 0 {
            return Err(ModelError::Empty);
        }
        if costs.ncols() != num_actions {
            return Err(ModelError::BadCostShape {
                rows: costs.nrows(),
                cols: costs.ncols(),
                n: num_states,
                m: num_actions,
            });
        }
        for (a, p) in transitions.iter().enumerate() {
            if p.nrows() != num_states || p.ncols() != num_states {
                return Err(ModelError::BadTransitionShape {
                    action: a,
                    rows: p.nrows(),
                    cols: p.ncols(),
                    n: num_states,
                });
            }
            for x in 0..num_states {
                let mut sum = 0.0;
                for y in 0..num_states {
                    let v = p[[x, y]];
                    if !v.is_finite() || !(0.0..=1.0 + ROW_SUM_TOLERANCE).contains(&v) {
                        return Err(ModelError::BadProbability {
                            action: a,
                            state: x,
                            next: y,
                            value: v,
                        });
                    }
                    sum += v;
                }
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return Err(ModelError::RowNotStochastic {
                        action: a,
                        state: x,
                        sum,
                    });
                }
            }
        }
        for x in 0..num_states {
            for a in 0..num_actions {
                let v = costs[[x, a]];
                if !v.is_finite() || v < 0.0 {
                    return Err(ModelError::BadCost {
                        state: x,
                        action: a,
                        value: v,
                    });
                }
            }
        }
        Ok(Self {
            num_states,
            num_actions,
            transitions,
            costs,
            action_labels: None,
        })
    }

    /// [`MdpModel::new`] from nested vectors: `transitions[a][x][y]` and
    /// `costs[x][a]`.
    pub fn from_rows(
        transitions: Vec<Vec<Vec<f64>>>,
        costs: Vec<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        let n = costs.len();
        let m = transitions.len();
        if n == 0 || m == 0 {
            return Err(ModelError::Empty);
        }
        let mut matrices = Vec::with_capacity(m);
        for (a, rows) in transitions.into_iter().enumerate() {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(ModelError::BadTransitionShape {
                    action: a,
                    rows: rows.len(),
                    cols: rows.first().map_or(0, Vec::len),
                    n,
                });
            }
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            matrices.push(Array2::from_shape_vec((n, n), flat).expect("shape checked above"));
        }
        if costs.iter().any(|r| r.len() != m) {
            return Err(ModelError::BadCostShape {
                rows: n,
                cols: costs.first().map_or(0, Vec::len),
                n,
                m,
            });
        }
        let flat: Vec<f64> = costs.into_iter().flatten().collect();
        let cost_table = Array2::from_shape_vec((n, m), flat).expect("shape checked above");
        Self::new(matrices, cost_table)
    }

    /// Attaches human-readable action names (e.g. compass directions).
    pub fn with_action_labels<S: Into<String>>(
        mut self,
        labels: Vec<S>,
    ) -> Result<Self, ModelError> {
        if labels.len() != self.num_actions {
            return Err(ModelError::BadLabelCount {
                expected: self.num_actions,
                got: labels.len(),
            });
        }
        self.action_labels = Some(labels.into_iter().map(Into::into).collect());
        Ok(self)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// The one-step transition matrix for `action`.
    pub fn transition(&self, action: usize) -> &Array2<f64> {
        &self.transitions[action]
    }

    pub fn transition_prob(&self, state: usize, action: usize, next: usize) -> f64 {
        self.transitions[action][[state, next]]
    }

    pub fn cost(&self, state: usize, action: usize) -> f64 {
        self.costs[[state, action]]
    }

    pub fn costs(&self) -> &Array2<f64> {
        &self.costs
    }

    pub fn max_cost(&self) -> f64 {
        self.costs.iter().fold(0.0, |m, &c| m.max(c))
    }

    pub fn action_labels(&self) -> Option<&[String]> {
        self.action_labels.as_deref()
    }

    /// The label of `action`, falling back to its index.
    pub fn action_label(&self, action: usize) -> String {
        match &self.action_labels {
            Some(labels) => labels[action].clone(),
            None => action.to_string(),
        }
    }
}

/// Stopping parameters for the fixed-point solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Discount factor, strictly inside (0, 1).
    pub beta: f64,
    /// Sup-norm change between successive iterates at which to stop.
    pub tolerance: f64,
    /// Hard cap on the number of backups.
    pub max_iterations: usize,
}

impl SolverConfig {
    pub fn new(beta: f64) -> Self {
        Self {
            beta,
            tolerance: 1e-5,
            max_iterations: 10_000,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(SolveError::InvalidDiscount(self.beta));
        }
        if self.tolerance <= 0.0 || !self.tolerance.is_finite() {
            return Err(SolveError::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(SolveError::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// A value estimate: one real per state.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    values: Array1<f64>,
}

impl ValueFunction {
    pub fn zeros(num_states: usize) -> Self {
        Self {
            values: Array1::zeros(num_states),
        }
    }

    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values: Array1::from_vec(values),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, state: usize) -> f64 {
        self.values[state]
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice().expect("contiguous value storage")
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied()
    }

    /// Sup-norm distance to another value function of the same length.
    pub fn sup_dist(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }
}

/// A stationary Markov policy: one action per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicPolicy {
    actions: Vec<usize>,
}

impl ClassicPolicy {
    pub fn new(actions: Vec<usize>) -> Self {
        Self { actions }
    }

    pub fn action(&self, state: usize) -> usize {
        self.actions[state]
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    fn validate(&self, model: &MdpModel) -> Result<(), SolveError> {
        if self.actions.len() != model.num_states() {
            return Err(SolveError::DimensionMismatch {
                expected: model.num_states(),
                got: self.actions.len(),
            });
        }
        for (x, &a) in self.actions.iter().enumerate() {
            if a >= model.num_actions() {
                return Err(SolveError::InvalidPolicy {
                    state: x,
                    action: a,
                    num_actions: model.num_actions(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("discount factor must lie strictly inside (0, 1), got {0}")]
    InvalidDiscount(f64),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("value function has {got} entries but the model has {expected} states")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(
        "policy assigns action {action} at state {state}, but the model has {num_actions} actions"
    )]
    InvalidPolicy {
        state: usize,
        action: usize,
        num_actions: usize,
    },
    #[error("no convergence after {iterations} iterations, last sup-norm change {residual:.3e}")]
    NotConverged {
        iterations: usize,
        residual: f64,
        last: ValueFunction,
    },
}

/// Outcome of a converged value-iteration run.
#[derive(Debug, Clone)]
pub struct Vvalue {
    pub values: ValueFunction,
    pub policy: ClassicPolicy,
    /// Number of backups applied before the stopping rule fired.
    pub iterations: usize,
    /// Sup-norm Bellman residual of `values`.
    pub residual: f64,
}

/// One Bellman backup: for every state, the minimum over actions of
/// `c(x,a) + beta * E[v(x')]`, together with the minimising policy.
/// Ties go to the lowest action index.
pub fn bellman_backup(
    model: &MdpModel,
    beta: f64,
    v: &ValueFunction,
) -> Result<(ValueFunction, ClassicPolicy), SolveError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(SolveError::InvalidDiscount(beta));
    }
    if v.len() != model.num_states() {
        return Err(SolveError::DimensionMismatch {
            expected: model.num_states(),
            got: v.len(),
        });
    }
    let n = model.num_states();
    let m = model.num_actions();
    let mut values = Vec::with_capacity(n);
    let mut actions = Vec::with_capacity(n);
    let mut scratch = Vec::with_capacity(m);
    for x in 0..n {
        scratch.clear();
        let mut q_min = f64::INFINITY;
        for a in 0..m {
            let q = model.cost(x, a) + beta * linalg::row_dot(model.transition(a), x, v.as_slice());
            scratch.push(q);
            if q < q_min {
                q_min = q;
            }
        }
        // Actions whose evaluation lands within a few ulps of the minimum
        // are mathematical ties; take the lowest index among them.
        let window = crate::trigger::TIE_EPS * (1.0 + q_min.abs());
        let pick = scratch
            .iter()
            .position(|&q| q <= q_min + window)
            .expect("minimum is in the candidate list");
        values.push(q_min);
        actions.push(pick);
    }
    Ok((ValueFunction::new(values), ClassicPolicy::new(actions)))
}

/// Value iteration from the zero vector. Stops once the sup-norm change
/// between successive iterates is at most `config.tolerance`; the returned
/// policy is greedy with respect to the returned values.
pub fn value_iteration(model: &MdpModel, config: &SolverConfig) -> Result<ViSolution, SolveError> {
    config.validate()?;
    let mut v = ValueFunction::zeros(model.num_states());
    let mut change = f64::INFINITY;
    for k in 1..=config.max_iterations {
        let (next, _) = bellman_backup(model, config.beta, &v)?;
        change = next.sup_dist(&v);
        v = next;
        if change <= config.tolerance {
            let (check, policy) = bellman_backup(model, config.beta, &v)?;
            return Ok(ViSolution {
                residual: check.sup_dist(&v),
                values: v,
                policy,
                iterations: k,
            });
        }
    }
    Err(SolveError::NotConverged {
        iterations: config.max_iterations,
        residual: change,
        last: v,
    })
}

/// Evaluates a fixed stationary policy: the fixed point of
/// `v(x) = c(x, policy(x)) + beta * E[v(x')]`, to the configured tolerance.
pub fn policy_evaluation(
    model: &MdpModel,
    policy: &ClassicPolicy,
    config: &SolverConfig,
) -> Result<ValueFunction, SolveError> {
    config.validate()?;
    policy.validate(model)?;
    let n = model.num_states();
    let mut v = ValueFunction::zeros(n);
    let mut change = f64::INFINITY;
    for _ in 1..=config.max_iterations {
        let mut next = Vec::with_capacity(n);
        for x in 0..n {
            let a = policy.action(x);
            next.push(
                model.cost(x, a)
                    + config.beta * linalg::row_dot(model.transition(a), x, v.as_slice()),
            );
        }
        let next = ValueFunction::new(next);
        change = next.sup_dist(&v);
        v = next;
        if change <= config.tolerance {
            return Ok(v);
        }
    }
    Err(SolveError::NotConverged {
        iterations: config.max_iterations,
        residual: change,
        last: v,
    })
}

/// Outcome of a converged value-iteration run.
#[derive(Debug, Clone)]
pub struct ViSolution {
    pub values: ValueFunction,
    pub policy: ClassicPolicy,
    /// Number of backups applied before the stopping rule fired.
    pub iterations: usize,
    /// Sup-norm Bellman residual of `values`.
    pub residual: f64,
}
