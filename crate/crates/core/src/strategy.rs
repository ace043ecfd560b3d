use crate::error::ModelError;
use crate::mdp::{ActionId, Mdp, StateId};
use crate::number::{Number, Tolerances};

/// Per-state distribution over actions.
#[derive(Clone, Debug, PartialEq)]
pub struct MemorylessStrategy<N> {
    choice: Vec<Vec<(ActionId, N)>>,
}

impl<N: Number> MemorylessStrategy<N> {
    /// Deterministic strategy playing `actions[s]` at every state `s`.
    pub fn deterministic(actions: Vec<ActionId>) -> Self {
        MemorylessStrategy {
            choice: actions.into_iter().map(|a| vec![(a, N::one())]).collect(),
        }
    }

    /// Randomised strategy from explicit distributions (zero weights dropped).
    pub fn from_distributions(choice: Vec<Vec<(ActionId, N)>>) -> Self {
        let choice = choice
            .into_iter()
            .map(|mut d| {
                d.retain(|(_, p)| !p.is_zero());
                d.sort_by_key(|(a, _)| *a);
                d
            })
            .collect();
        MemorylessStrategy { choice }
    }

    pub fn num_states(&self) -> usize {
        self.choice.len()
    }

    pub fn distribution(&self, s: StateId) -> &[(ActionId, N)] {
        &self.choice[s.0]
    }

    pub fn probability(&self, s: StateId, a: ActionId) -> N {
        self.choice[s.0]
            .iter()
            .find(|(x, _)| *x == a)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(N::zero)
    }

    pub fn support(&self, s: StateId) -> impl Iterator<Item = ActionId> + '_ {
        self.choice[s.0].iter().map(|(a, _)| *a)
    }

    pub fn is_deterministic(&self) -> bool {
        self.choice.iter().all(|d| d.len() == 1)
    }

    /// The chosen action at `s` if the strategy is deterministic there.
    pub fn action(&self, s: StateId) -> Option<ActionId> {
        match self.choice[s.0].as_slice() {
            [(a, _)] => Some(*a),
            _ => None,
        }
    }

    /// Chosen actions of a deterministic strategy.
    pub fn actions(&self) -> Option<Vec<ActionId>> {
        (0..self.choice.len()).map(|s| self.action(StateId(s))).collect()
    }

    /// Checks support ⊆ legal actions and that every distribution sums to 1.
    pub fn validate_for(&self, model: &Mdp<N>) -> Result<(), ModelError> {
        if self.choice.len() != model.num_states() {
            return Err(ModelError::StrategySize {
                expected: model.num_states(),
                got: self.choice.len(),
            });
        }
        let tol = Tolerances::default().stochastic;
        for s in model.states() {
            let dist = &self.choice[s.0];
            let mut sum = N::zero();
            for (a, p) in dist {
                if !model.is_legal(s, *a) {
                    return Err(ModelError::IllegalAction { state: s, action: *a });
                }
                if *p < N::zero() {
                    return Err(ModelError::StrategyNotStochastic(s));
                }
                sum = sum + p.clone();
            }
            if !sum.near(&N::one(), tol) {
                return Err(ModelError::StrategyNotStochastic(s));
            }
        }
        Ok(())
    }

    /// Whether every state only plays actions accepted by `allowed`.
    pub fn supported_on(&self, allowed: impl Fn(StateId, ActionId) -> bool) -> bool {
        self.choice
            .iter()
            .enumerate()
            .all(|(s, d)| d.iter().all(|(a, _)| allowed(StateId(s), *a)))
    }
}
