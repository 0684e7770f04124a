//! Tabular MDPs and value iteration.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One action available in a state: its immediate reward and the
/// distribution over successor states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateAction {
    pub label: String,
    pub reward: f64,
    /// `(next state, probability)` pairs.
    pub transitions: Vec<(usize, f64)>,
}

/// An explicit finite MDP. `actions[s]` lists the actions of state `s` in
/// tie-break order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FiniteMdp {
    pub states: Vec<String>,
    pub actions: Vec<Vec<StateAction>>,
}

impl FiniteMdp {
    pub fn num_states(&self) -> usize {
        self.actions.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.states.len() != self.actions.len() {
            return Err(Error::InvalidMdp(format!(
                "{} state labels for {} states",
                self.states.len(),
                self.actions.len()
            )));
        }
        let n = self.num_states();
        for (s, actions) in self.actions.iter().enumerate() {
            if actions.is_empty() {
                return Err(Error::InvalidMdp(format!("state {s} has no actions")));
            }
            for (a, sa) in actions.iter().enumerate() {
                if !sa.reward.is_finite() {
                    return Err(Error::InvalidMdp(format!(
                        "state {s} action {a} has a non-finite reward"
                    )));
                }
                let mut total = 0.0;
                for &(next, p) in &sa.transitions {
                    if next >= n {
                        return Err(Error::InvalidMdp(format!(
                            "state {s} action {a} leads to unknown state {next}"
                        )));
                    }
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::InvalidMdp(format!(
                            "state {s} action {a} has probability {p}"
                        )));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidMdp(format!(
                        "state {s} action {a} probabilities sum to {total}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// One-step lookahead `r(s, a) + gamma * E[V(s')]`.
    pub fn q_value(&self, s: usize, a: usize, values: &[f64], gamma: f64) -> f64 {
        let sa = &self.actions[s][a];
        let expected: f64 = sa.transitions.iter().map(|&(n, p)| p * values[n]).sum();
        sa.reward + gamma * expected
    }

    /// Best action of `s` against `values`, lowest index on ties.
    pub fn greedy_action(&self, s: usize, values: &[f64], gamma: f64) -> (usize, f64) {
        let mut best = (0, self.q_value(s, 0, values, gamma));
        for a in 1..self.actions[s].len() {
            let q = self.q_value(s, a, values, gamma);
            if q > best.1 {
                best = (a, q);
            }
        }
        best
    }

    /// Applies the Bellman optimality operator once.
    pub fn bellman_sweep(&self, values: &[f64], gamma: f64) -> Vec<f64> {
        (0..self.num_states())
            .into_par_iter()
            .map(|s| self.greedy_action(s, values, gamma).1)
            .collect()
    }

    pub fn to_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)
            .map_err(|e| Error::InvalidMdp(format!("cannot serialize: {e}")))
    }

    pub fn from_json<R: Read>(reader: R) -> Result<Self> {
        let mdp: Self = serde_json::from_reader(reader)
            .map_err(|e| Error::InvalidMdp(format!("cannot parse: {e}")))?;
        mdp.validate()?;
        Ok(mdp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdpConfig {
    /// Discount factor in `[0, 1)`.
    pub gamma: f64,
    /// Stop once the sup-norm change of a sweep drops below this.
    pub theta: f64,
    /// Largest age a discretized state distinguishes; older ages saturate.
    pub aoi_cap: u32,
    /// Depth of finite-horizon evaluations.
    pub horizon: usize,
    /// Largest state count the solver accepts.
    pub state_budget: usize,
    pub max_sweeps: usize,
}

impl Default for MdpConfig {
    fn default() -> Self {
        Self {
            gamma: 0.9,
            theta: 1e-6,
            aoi_cap: 4,
            horizon: 3,
            state_budget: 100_000,
            max_sweeps: 100_000,
        }
    }
}

impl MdpConfig {
    fn check(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidConfig(format!(
                "gamma must lie in [0, 1), got {}",
                self.gamma
            )));
        }
        if self.theta.is_nan() || self.theta <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "theta must be positive, got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValueIterationResult {
    pub values: Vec<f64>,
    /// Index into `mdp.actions[s]` of the greedy action of each state.
    pub policy: Vec<usize>,
    /// Sup-norm change of every sweep, in order.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl ValueIterationResult {
    pub fn sweeps(&self) -> usize {
        self.residuals.len()
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }
}

/// Solves the Bellman optimality equation by synchronous value iteration
/// from `V = 0`, stopping once a sweep changes no value by `theta` or more.
///
/// Sweeps evaluate states in parallel; each state's value depends only on
/// the previous sweep, so results do not depend on the thread count.
pub fn value_iteration(mdp: &FiniteMdp, config: &MdpConfig) -> Result<ValueIterationResult> {
    config.check()?;
    if mdp.num_states() > config.state_budget {
        return Err(Error::StateBudgetExceeded {
            states: mdp.num_states(),
            budget: config.state_budget,
        });
    }
    mdp.validate()?;

    let mut values = vec![0.0; mdp.num_states()];
    let mut residuals = Vec::new();
    let mut converged = false;
    while residuals.len() < config.max_sweeps {
        let next = mdp.bellman_sweep(&values, config.gamma);
        let delta = next
            .iter()
            .zip(&values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        values = next;
        residuals.push(delta);
        if delta < config.theta {
            converged = true;
            break;
        }
    }

    let policy = (0..mdp.num_states())
        .into_par_iter()
        .map(|s| mdp.greedy_action(s, &values, config.gamma).0)
        .collect();
    Ok(ValueIterationResult {
        values,
        policy,
        residuals,
        converged,
    })
}

/// Optimal `horizon`-step discounted values (value iteration unrolled
/// `horizon` sweeps from zero) and the optimal first action of every state.
pub fn finite_horizon_values(
    mdp: &FiniteMdp,
    gamma: f64,
    horizon: usize,
) -> Result<(Vec<f64>, Vec<usize>)> {
    mdp.validate()?;
    if horizon == 0 {
        return Ok((vec![0.0; mdp.num_states()], vec![0; mdp.num_states()]));
    }
    let mut values = vec![0.0; mdp.num_states()];
    for _ in 0..horizon - 1 {
        values = mdp.bellman_sweep(&values, gamma);
    }
    let (policy, values) = (0..mdp.num_states())
        .into_par_iter()
        .map(|s| mdp.greedy_action(s, &values, gamma))
        .unzip();
    Ok((values, policy))
}
