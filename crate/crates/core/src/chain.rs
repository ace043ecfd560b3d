//! Markov chains and strategy-induced chains.

use crate::error::ModelError;
use crate::mdp::{Mdp, StateId};
use crate::number::{Number, Tolerances};
use crate::strategy::MemorylessStrategy;

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovChain<N> {
    /// Sorted by successor, no duplicates, no zero entries.
    rows: Vec<Vec<(StateId, N)>>,
    rewards: Option<Vec<N>>,
}

impl<N: Number> MarkovChain<N> {
    pub fn new(rows: Vec<Vec<(StateId, N)>>, rewards: Option<Vec<N>>) -> Self {
        let rows = rows.into_iter().map(normalize_row).collect();
        MarkovChain { rows, rewards }
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, s: StateId) -> &[(StateId, N)] {
        &self.rows[s.0]
    }

    pub fn rows(&self) -> &[Vec<(StateId, N)>] {
        &self.rows
    }

    pub fn rewards(&self) -> Option<&[N]> {
        self.rewards.as_deref()
    }

    pub fn probability(&self, s: StateId, to: StateId) -> N {
        self.rows[s.0]
            .iter()
            .find(|(x, _)| *x == to)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(N::zero)
    }

    pub fn successors(&self, s: StateId) -> impl Iterator<Item = StateId> + '_ {
        self.rows[s.0].iter().map(|(t, _)| *t)
    }

    /// Whether every row sums to one under the mode's tolerance.
    pub fn is_stochastic(&self) -> bool {
        let tol = Tolerances::default().stochastic;
        self.rows.iter().all(|row| {
            row.iter()
                .fold(N::zero(), |acc, (_, p)| acc + p.clone())
                .near(&N::one(), tol)
        })
    }

    pub fn graph(&self) -> Vec<Vec<usize>> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|(s, _)| s.0).collect())
            .collect()
    }
}

fn normalize_row<N: Number>(mut row: Vec<(StateId, N)>) -> Vec<(StateId, N)> {
    row.sort_by_key(|(s, _)| *s);
    let mut out: Vec<(StateId, N)> = Vec::with_capacity(row.len());
    for (s, p) in row {
        match out.last_mut() {
            Some((last, q)) if *last == s => *q = q.clone() + p,
            _ => out.push((s, p)),
        }
    }
    out.retain(|(_, p)| !p.is_zero());
    out
}

/// The chain `M_σ`: `P_σ(s)(s') = Σ_a σ(s)(a)·P(s,a,s')`, `r(s) = Σ_a σ(s)(a)·R(s,a)`.
pub fn induced_chain<N: Number>(
    model: &Mdp<N>,
    strategy: &MemorylessStrategy<N>,
) -> Result<MarkovChain<N>, ModelError> {
    strategy.validate_for(model)?;
    let mut rows = Vec::with_capacity(model.num_states());
    let mut rewards = Vec::with_capacity(model.num_states());
    for s in model.states() {
        let mut row = Vec::new();
        let mut reward = N::zero();
        for (a, w) in strategy.distribution(s) {
            let t = model
                .transition(s, *a)
                .ok_or(ModelError::IllegalAction { state: s, action: *a })?;
            for (succ, p) in &t.successors {
                row.push((*succ, w.clone() * p.clone()));
            }
            reward = reward + w.clone() * t.reward.clone();
        }
        rows.push(row);
        rewards.push(reward);
    }
    Ok(MarkovChain::new(
        rows,
        model.has_rewards().then_some(rewards),
    ))
}
