//! Solvers for finite discounted Markov decision processes in which the
//! controller does not observe and act at every step, but instead commits to
//! an action and a waiting time until the next update (a self-triggered
//! policy).
//!
//! The crate is organised around four pieces:
//!
//! - [`mdp`]: the classic machinery: models, Bellman backups, value
//!   iteration, policy evaluation.
//! - [`trigger`]: everything specific to self-triggering: skip-step
//!   transition and consolidated cost tables, the lookahead-optimised
//!   dynamic-programming equation under an update penalty, and greedy
//!   synthesis of maximal waiting times under a suboptimality bound.
//! - [`gridworld`]: a small map language that compiles navigation grids
//!   (deterministic or windy) into [`mdp::MdpModel`]s.
//! - [`sim`]: seeded Monte Carlo rollouts of self-triggered policies with
//!   trigger accounting and cost estimation.

pub mod gridworld;
mod linalg;
pub mod mdp;
pub mod sim;
pub mod trigger;

pub use mdp::{ClassicPolicy, MdpModel, SolverConfig, ValueFunction};
pub use trigger::{LookaheadTables, SelfTriggeredPolicy, TriggerConfig};
