//! Value vectors, locally optimal actions, and the value-renormalised pruned MDP
//! shared by the reachability and safety pipelines.

use crate::error::SolveError;
use crate::mdp::{ActionId, Mdp, StateId, Transition};
use crate::number::{Number, Tolerances};
use crate::strategy::MemorylessStrategy;

/// Per-state optimal value (reachability or safety probability).
#[derive(Clone, Debug, PartialEq)]
pub struct ValueVector<N> {
    values: Vec<N>,
}

impl<N: Number> ValueVector<N> {
    pub fn new(values: Vec<N>) -> Self {
        ValueVector { values }
    }

    pub fn get(&self, s: StateId) -> &N {
        &self.values[s.0]
    }

    pub fn as_slice(&self) -> &[N] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `max_s |Val(s) − max_a Σ P(s,a,·)·Val|` over states that are not sinks.
    pub fn bellman_residual(&self, model: &Mdp<N>) -> f64 {
        model
            .states()
            .filter(|&s| !model.is_sink(s))
            .map(|s| {
                let best = model
                    .choices(s)
                    .iter()
                    .map(|t| t.expectation(&self.values).to_f64())
                    .fold(f64::NEG_INFINITY, f64::max);
                (self.values[s.0].to_f64() - best).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `Opt(s) = {a | Val(s) = Σ_{s'} P(s,a,s')·Val(s')}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptSet {
    actions: Vec<Vec<ActionId>>,
}

impl OptSet {
    pub fn at(&self, s: StateId) -> &[ActionId] {
        &self.actions[s.0]
    }

    pub fn contains(&self, s: StateId, a: ActionId) -> bool {
        self.actions[s.0].binary_search(&a).is_ok()
    }

    pub fn num_states(&self) -> usize {
        self.actions.len()
    }

    pub fn len(&self) -> usize {
        self.actions.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether `strategy` only plays Opt actions (membership in Σ^Opt).
    pub fn admits<N: Number>(&self, strategy: &MemorylessStrategy<N>) -> bool {
        strategy.supported_on(|s, a| self.contains(s, a))
    }
}

/// Locally optimal actions for a value vector. Exact mode uses equality;
/// float mode accepts `|Val(s) − Σ P·Val| ≤ η`.
pub fn opt_action_set<N: Number>(model: &Mdp<N>, values: &ValueVector<N>, tol: &Tolerances) -> OptSet {
    let actions = model
        .states()
        .map(|s| {
            model
                .choices(s)
                .iter()
                .filter(|t| t.expectation(values.as_slice()).near(values.get(s), tol.eta))
                .map(|t| t.action)
                .collect()
        })
        .collect();
    OptSet { actions }
}

/// The pruned MDP over `S' = {s | Val(s) > 0}` with Opt actions only and
/// `P'(s,a,s') = P(s,a,s')·Val(s')/Val(s)`.
#[derive(Clone, Debug)]
pub struct PrunedModel<N> {
    pub model: Mdp<N>,
    pub origin_values: ValueVector<N>,
    /// Pruned state index → original state.
    to_origin: Vec<StateId>,
    /// Original state → pruned state, if kept.
    from_origin: Vec<Option<StateId>>,
}

impl<N: Number> PrunedModel<N> {
    pub fn to_origin(&self, s: StateId) -> StateId {
        self.to_origin[s.0]
    }

    pub fn from_origin(&self, s: StateId) -> Option<StateId> {
        self.from_origin[s.0]
    }

    pub fn contains_origin(&self, s: StateId) -> bool {
        self.from_origin[s.0].is_some()
    }

    pub fn num_states(&self) -> usize {
        self.to_origin.len()
    }

    /// Restricts an original-model strategy to the pruned state space.
    pub fn restrict_strategy(&self, strategy: &MemorylessStrategy<N>) -> MemorylessStrategy<N> {
        MemorylessStrategy::from_distributions(
            self.to_origin
                .iter()
                .map(|&s| strategy.distribution(s).to_vec())
                .collect(),
        )
    }

    /// Lifts a pruned-model strategy to the original model; states outside
    /// `S'` play their lowest-index legal action.
    pub fn lift_strategy(&self, original: &Mdp<N>, strategy: &MemorylessStrategy<N>) -> MemorylessStrategy<N> {
        MemorylessStrategy::from_distributions(
            original
                .states()
                .map(|s| match self.from_origin[s.0] {
                    Some(p) => strategy.distribution(p).to_vec(),
                    None => vec![(original.choices(s)[0].action, N::one())],
                })
                .collect(),
        )
    }
}

/// Builds the pruned MDP (rewards restricted to `S'` when present).
pub fn prune<N: Number>(
    model: &Mdp<N>,
    values: &ValueVector<N>,
    opt: &OptSet,
    tol: &Tolerances,
) -> Result<PrunedModel<N>, SolveError> {
    let keep: Vec<bool> = model
        .states()
        .map(|s| !values.get(s).is_negligible(tol.eta) && *values.get(s) > N::zero())
        .collect();
    let mut from_origin = vec![None; model.num_states()];
    let mut to_origin = Vec::new();
    for s in model.states() {
        if keep[s.0] {
            from_origin[s.0] = Some(StateId(to_origin.len()));
            to_origin.push(s);
        }
    }
    let mut rows = Vec::with_capacity(to_origin.len());
    for &s in &to_origin {
        let val_s = values.get(s).clone();
        let mut row = Vec::new();
        for &a in opt.at(s) {
            let t = model.transition(s, a).expect("Opt action is legal");
            let mut successors: Vec<(StateId, N)> = t
                .successors
                .iter()
                .filter(|(to, _)| keep[to.0])
                .map(|(to, p)| {
                    let target = from_origin[to.0].expect("kept successor");
                    (target, p.clone() * values.get(*to).clone() / val_s.clone())
                })
                .collect();
            let sum = successors
                .iter()
                .fold(N::zero(), |acc, (_, p)| acc + p.clone());
            // Opt admits a slack of η in value units and dropped successors
            // carry value below η, so the unnormalised mass times `Val(s)` is
            // within 2η of `Val(s)`.
            if !(sum.clone() * val_s.clone()).near(&val_s, 2.0 * tol.eta) {
                return Err(SolveError::Internal(format!(
                    "pruned row ({}, {}) sums to {sum}",
                    model.state_name(s),
                    model.action_name(a)
                )));
            }
            if sum != N::one() {
                for (_, p) in successors.iter_mut() {
                    *p = p.clone() / sum.clone();
                }
            }
            row.push(Transition {
                action: a,
                successors,
                reward: t.reward.clone(),
            });
        }
        if row.is_empty() {
            return Err(SolveError::Internal(format!(
                "state {} has positive value but no optimal action",
                model.state_name(s)
            )));
        }
        rows.push(row);
    }
    let names = to_origin
        .iter()
        .map(|&s| model.state_name(s).to_string())
        .collect();
    let target: Vec<StateId> = to_origin
        .iter()
        .enumerate()
        .filter(|(_, s)| model.is_target(**s))
        .map(|(i, _)| StateId(i))
        .collect();
    let initial = from_origin[model.initial().0].unwrap_or(StateId(0));
    let pruned = Mdp::from_parts(
        names,
        model.action_names().to_vec(),
        rows,
        &target,
        &[],
        initial,
        model.has_rewards(),
    );
    Ok(PrunedModel {
        model: pruned,
        origin_values: values.clone(),
        to_origin,
        from_origin,
    })
}
