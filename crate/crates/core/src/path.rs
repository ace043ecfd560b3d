//! Finite paths and cylinder-set probabilities.

use crate::error::ModelError;
use crate::mdp::{ActionId, Mdp, StateId};
use crate::number::Number;
use crate::strategy::MemorylessStrategy;

/// `s0 a0 s1 a1 … sn`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FinitePath {
    start: StateId,
    steps: Vec<(ActionId, StateId)>,
}

impl FinitePath {
    pub fn new(start: StateId) -> Self {
        FinitePath { start, steps: Vec::new() }
    }

    pub fn from_steps(start: StateId, steps: Vec<(ActionId, StateId)>) -> Self {
        FinitePath { start, steps }
    }

    pub fn push(&mut self, a: ActionId, to: StateId) {
        self.steps.push((a, to));
    }

    pub fn extended(&self, a: ActionId, to: StateId) -> Self {
        let mut p = self.clone();
        p.push(a, to);
        p
    }

    pub fn first(&self) -> StateId {
        self.start
    }

    pub fn last(&self) -> StateId {
        self.steps.last().map(|(_, s)| *s).unwrap_or(self.start)
    }

    /// Number of transitions.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[(ActionId, StateId)] {
        &self.steps
    }

    /// `s_i` for `i ∈ 0..=len`.
    pub fn state(&self, i: usize) -> StateId {
        if i == 0 {
            self.start
        } else {
            self.steps[i - 1].1
        }
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        std::iter::once(self.start).chain(self.steps.iter().map(|(_, s)| *s))
    }

    /// The prefix `s0 a0 … s_i`.
    pub fn prefix(&self, i: usize) -> FinitePath {
        FinitePath {
            start: self.start,
            steps: self.steps[..i].to_vec(),
        }
    }

    /// The suffix `s_i a_i … s_n`.
    pub fn suffix(&self, i: usize) -> FinitePath {
        FinitePath {
            start: self.state(i),
            steps: self.steps[i..].to_vec(),
        }
    }

    /// Index of the first state satisfying `pred`, if any.
    pub fn first_hit(&self, pred: impl Fn(StateId) -> bool) -> Option<usize> {
        self.states().position(pred)
    }
}

/// `∏_{i<n} σ(s_i)(a_i)·P(s_i,a_i,s_{i+1})`: the measure of the cylinder of `path`.
pub fn finite_path_probability<N: Number>(
    model: &Mdp<N>,
    strategy: &MemorylessStrategy<N>,
    path: &FinitePath,
) -> Result<N, ModelError> {
    if path.first().0 >= model.num_states() {
        return Err(ModelError::UnknownState(path.first()));
    }
    let mut prob = N::one();
    let mut from = path.first();
    for (step, (a, to)) in path.steps().iter().enumerate() {
        let t = model
            .transition(from, *a)
            .ok_or(ModelError::IllegalAction { state: from, action: *a })?;
        let p = t.probability(*to);
        if p.is_zero() {
            return Err(ModelError::InconsistentPath {
                step,
                from,
                action: *a,
                to: *to,
            });
        }
        prob = prob * strategy.probability(from, *a) * p;
        from = *to;
    }
    Ok(prob)
}
