//! Sparse finite MDPs.

use std::collections::HashMap;
use std::fmt::{self, Display};

use crate::error::ModelError;
use crate::number::{Number, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl ActionId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

/// One legal `(state, action)` pair: its successor distribution and reward.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition<N> {
    pub action: ActionId,
    /// Sorted by successor, no duplicates.
    pub successors: Vec<(StateId, N)>,
    pub reward: N,
}

impl<N: Number> Transition<N> {
    pub fn probability(&self, to: StateId) -> N {
        self.successors
            .iter()
            .find(|(s, _)| *s == to)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(N::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.successors.iter().map(|(s, _)| *s)
    }

    /// `Σ_{s'} P(s,a,s')·values(s')`.
    pub fn expectation(&self, values: &[N]) -> N {
        self.successors
            .iter()
            .fold(N::zero(), |acc, (s, p)| acc + p.clone() * values[s.0].clone())
    }
}

/// Finite MDP with per-(state, action) successor lists, optional rewards and
/// labelled target / bad sink sets.
#[derive(Clone, Debug, PartialEq)]
pub struct Mdp<N> {
    state_names: Vec<String>,
    action_names: Vec<String>,
    rows: Vec<Vec<Transition<N>>>,
    target: Vec<bool>,
    bad: Vec<bool>,
    initial: StateId,
    has_rewards: bool,
}

impl<N: Number> Mdp<N> {
    /// Assembles a model without checking invariants; see [`Mdp::validate`].
    pub fn from_parts(
        state_names: Vec<String>,
        action_names: Vec<String>,
        mut rows: Vec<Vec<Transition<N>>>,
        target: &[StateId],
        bad: &[StateId],
        initial: StateId,
        has_rewards: bool,
    ) -> Self {
        let n = state_names.len();
        rows.resize_with(n, Vec::new);
        for row in &mut rows {
            row.sort_by_key(|t| t.action);
            for t in row.iter_mut() {
                t.successors.sort_by_key(|(s, _)| *s);
            }
        }
        let mut target_mask = vec![false; n];
        for s in target {
            if s.0 < n {
                target_mask[s.0] = true;
            }
        }
        let mut bad_mask = vec![false; n];
        for s in bad {
            if s.0 < n {
                bad_mask[s.0] = true;
            }
        }
        Mdp {
            state_names,
            action_names,
            rows,
            target: target_mask,
            bad: bad_mask,
            initial,
            has_rewards,
        }
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + Clone {
        (0..self.num_states()).map(StateId)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s.0]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.action_names[a.0]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name).map(StateId)
    }

    pub fn action_by_name(&self, name: &str) -> Option<ActionId> {
        self.action_names.iter().position(|n| n == name).map(ActionId)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn has_rewards(&self) -> bool {
        self.has_rewards
    }

    /// Legal transitions of `s`, ordered by action index.
    pub fn choices(&self, s: StateId) -> &[Transition<N>] {
        &self.rows[s.0]
    }

    pub fn transition(&self, s: StateId, a: ActionId) -> Option<&Transition<N>> {
        self.rows
            .get(s.0)?
            .binary_search_by_key(&a, |t| t.action)
            .ok()
            .map(|i| &self.rows[s.0][i])
    }

    pub fn probability(&self, s: StateId, a: ActionId, to: StateId) -> N {
        self.transition(s, a)
            .map(|t| t.probability(to))
            .unwrap_or_else(N::zero)
    }

    pub fn reward(&self, s: StateId, a: ActionId) -> N {
        self.transition(s, a)
            .map(|t| t.reward.clone())
            .unwrap_or_else(N::zero)
    }

    /// Actions with a defined transition row at `s`.
    pub fn legal_actions(&self, s: StateId) -> Result<Vec<ActionId>, ModelError> {
        self.rows
            .get(s.0)
            .map(|row| row.iter().map(|t| t.action).collect())
            .ok_or(ModelError::UnknownState(s))
    }

    pub fn is_legal(&self, s: StateId, a: ActionId) -> bool {
        self.transition(s, a).is_some()
    }

    pub fn is_target(&self, s: StateId) -> bool {
        self.target[s.0]
    }

    pub fn is_bad(&self, s: StateId) -> bool {
        self.bad[s.0]
    }

    pub fn target_set(&self) -> Vec<StateId> {
        self.states().filter(|s| self.target[s.0]).collect()
    }

    pub fn bad_set(&self) -> Vec<StateId> {
        self.states().filter(|s| self.bad[s.0]).collect()
    }

    pub fn target_mask(&self) -> &[bool] {
        &self.target
    }

    pub fn bad_mask(&self) -> &[bool] {
        &self.bad
    }

    /// Same model with a different target set.
    pub fn with_target(mut self, target: &[StateId]) -> Self {
        self.target = vec![false; self.num_states()];
        for s in target {
            self.target[s.0] = true;
        }
        self
    }

    /// Same model with a different bad set.
    pub fn with_bad(mut self, bad: &[StateId]) -> Self {
        self.bad = vec![false; self.num_states()];
        for s in bad {
            self.bad[s.0] = true;
        }
        self
    }

    pub fn with_initial(mut self, s: StateId) -> Self {
        self.initial = s;
        self
    }

    /// Number of legal (state, action) pairs.
    pub fn num_choices(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Successor adjacency over all actions (deduplicated).
    pub fn successor_graph(&self) -> Vec<Vec<usize>> {
        self.rows
            .iter()
            .map(|row| {
                let mut out: Vec<usize> = row
                    .iter()
                    .flat_map(|t| t.successors.iter().map(|(s, _)| s.0))
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            })
            .collect()
    }

    pub fn is_sink(&self, s: StateId) -> bool {
        let row = &self.rows[s.0];
        row.len() == 1
            && row[0].successors.len() == 1
            && row[0].successors[0].0 == s
            && row[0].successors[0].1.is_one()
    }

    /// Checks every structural invariant; an empty report means the model is well-formed.
    pub fn validate(&self) -> ValidationReport {
        self.validate_with(&Tolerances::default())
    }

    pub fn validate_with(&self, tol: &Tolerances) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.num_states();
        if n == 0 {
            report.push(None, None, ViolationKind::Empty);
            return report;
        }
        if self.initial.0 >= n {
            report.push(Some(self.initial), None, ViolationKind::UnknownState);
        }
        for s in self.states() {
            let row = &self.rows[s.0];
            if row.is_empty() {
                report.push(Some(s), None, ViolationKind::NoLegalAction);
            }
            for pair in row.windows(2) {
                if pair[0].action == pair[1].action {
                    report.push(Some(s), Some(pair[0].action), ViolationKind::DuplicateAction);
                }
            }
            for t in row {
                if t.action.0 >= self.num_actions() {
                    report.push(Some(s), Some(t.action), ViolationKind::UnknownAction);
                }
                let mut sum = N::zero();
                for (succ, p) in &t.successors {
                    if succ.0 >= n {
                        report.push(Some(s), Some(t.action), ViolationKind::UnknownSuccessor(*succ));
                    }
                    if *p <= N::zero() {
                        report.push(Some(s), Some(t.action), ViolationKind::NonPositiveProbability);
                    }
                    sum = sum + p.clone();
                }
                for pair in t.successors.windows(2) {
                    if pair[0].0 == pair[1].0 {
                        report.push(Some(s), Some(t.action), ViolationKind::DuplicateSuccessor(pair[0].0));
                    }
                }
                if !sum.near(&N::one(), tol.stochastic) {
                    report.push(Some(s), Some(t.action), ViolationKind::RowNotStochastic);
                }
            }
            if self.target[s.0] && !self.is_sink(s) {
                report.push(Some(s), None, ViolationKind::TargetNotSink);
            }
            if self.bad[s.0] && !self.is_sink(s) {
                report.push(Some(s), None, ViolationKind::BadNotSink);
            }
            if self.target[s.0] && self.bad[s.0] {
                report.push(Some(s), None, ViolationKind::TargetBadOverlap);
            }
        }
        report
    }

    /// Returns the model if it is well-formed.
    pub fn checked(self) -> Result<Self, ModelError> {
        let report = self.validate();
        if report.is_empty() {
            Ok(self)
        } else {
            Err(ModelError::Invalid(report))
        }
    }

    /// Converts the model to another numeric mode.
    pub fn map_numbers<M: Number>(&self, f: impl Fn(&N) -> M) -> Mdp<M> {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| Transition {
                        action: t.action,
                        successors: t.successors.iter().map(|(s, p)| (*s, f(p))).collect(),
                        reward: f(&t.reward),
                    })
                    .collect()
            })
            .collect();
        Mdp {
            state_names: self.state_names.clone(),
            action_names: self.action_names.clone(),
            rows,
            target: self.target.clone(),
            bad: self.bad.clone(),
            initial: self.initial,
            has_rewards: self.has_rewards,
        }
    }
}

/// Free-function form of [`Mdp::validate`].
pub fn validate_mdp<N: Number>(model: &Mdp<N>) -> ValidationReport {
    model.validate()
}

/// Free-function form of [`Mdp::legal_actions`].
pub fn legal_actions<N: Number>(model: &Mdp<N>, s: StateId) -> Result<Vec<ActionId>, ModelError> {
    model.legal_actions(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Empty,
    UnknownState,
    UnknownAction,
    UnknownSuccessor(StateId),
    NoLegalAction,
    DuplicateAction,
    DuplicateSuccessor(StateId),
    NonPositiveProbability,
    RowNotStochastic,
    TargetNotSink,
    BadNotSink,
    TargetBadOverlap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub state: Option<StateId>,
    pub action: Option<ActionId>,
    pub kind: ViolationKind,
}

impl Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = match (self.state, self.action) {
            (Some(s), Some(a)) => format!(" at ({}, {})", s, a),
            (Some(s), None) => format!(" at {s}"),
            _ => String::new(),
        };
        let what = match &self.kind {
            ViolationKind::Empty => "model has no states".to_string(),
            ViolationKind::UnknownState => "unknown state".to_string(),
            ViolationKind::UnknownAction => "unknown action".to_string(),
            ViolationKind::UnknownSuccessor(s) => format!("unknown successor {s}"),
            ViolationKind::NoLegalAction => "no legal action".to_string(),
            ViolationKind::DuplicateAction => "duplicate action row".to_string(),
            ViolationKind::DuplicateSuccessor(s) => format!("duplicate successor {s}"),
            ViolationKind::NonPositiveProbability => "non-positive probability".to_string(),
            ViolationKind::RowNotStochastic => "row not stochastic".to_string(),
            ViolationKind::TargetNotSink => "target not a sink".to_string(),
            ViolationKind::BadNotSink => "bad state not a sink".to_string(),
            ViolationKind::TargetBadOverlap => "state is both target and bad".to_string(),
        };
        write!(f, "{what}{at}")
    }
}

/// List of invariant violations found by [`Mdp::validate`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn push(&mut self, state: Option<StateId>, action: Option<ActionId>, kind: ViolationKind) {
        self.violations.push(Violation { state, action, kind });
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn has(&self, kind: &ViolationKind) -> bool {
        self.violations.iter().any(|v| &v.kind == kind)
    }

    /// One line per violation with state and action names from `model`
    /// where the indices resolve, indices otherwise.
    pub fn describe<N: Number>(&self, model: &Mdp<N>) -> String {
        let state = |s: StateId| model.state_names.get(s.0).map_or_else(|| s.to_string(), |n| format!("`{n}`"));
        let action = |a: ActionId| model.action_names.get(a.0).map_or_else(|| a.to_string(), |n| format!("`{n}`"));
        let mut out = String::new();
        for v in &self.violations {
            let what = match &v.kind {
                ViolationKind::UnknownSuccessor(s) => format!("unknown successor {s}"),
                ViolationKind::DuplicateSuccessor(s) => format!("duplicate successor {}", state(*s)),
                _ => Violation { state: None, action: None, kind: v.kind.clone() }.to_string(),
            };
            let at = match (v.state, v.action) {
                (Some(s), Some(a)) => format!(" at ({}, {})", state(s), action(a)),
                (Some(s), None) => format!(" at {}", state(s)),
                _ => String::new(),
            };
            out.push_str(&format!("  - {what}{at}\n"));
        }
        out
    }
}

impl Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Incremental, name-based construction of an [`Mdp`].
#[derive(Clone, Debug)]
pub struct MdpBuilder<N> {
    state_names: Vec<String>,
    state_index: HashMap<String, StateId>,
    action_names: Vec<String>,
    action_index: HashMap<String, ActionId>,
    rows: Vec<Vec<Transition<N>>>,
    target: Vec<StateId>,
    bad: Vec<StateId>,
    initial: Option<StateId>,
    has_rewards: bool,
}

impl<N: Number> Default for MdpBuilder<N> {
    fn default() -> Self {
        Self::new()
    }
}

impl<N: Number> MdpBuilder<N> {
    pub fn new() -> Self {
        MdpBuilder {
            state_names: Vec::new(),
            state_index: HashMap::new(),
            action_names: Vec::new(),
            action_index: HashMap::new(),
            rows: Vec::new(),
            target: Vec::new(),
            bad: Vec::new(),
            initial: None,
            has_rewards: false,
        }
    }

    /// Returns the id of `name`, creating the state on first use.
    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(&id) = self.state_index.get(name) {
            return id;
        }
        let id = StateId(self.state_names.len());
        self.state_names.push(name.to_string());
        self.state_index.insert(name.to_string(), id);
        self.rows.push(Vec::new());
        id
    }

    /// Returns the id of `name`, creating the action on first use.
    pub fn action(&mut self, name: &str) -> ActionId {
        if let Some(&id) = self.action_index.get(name) {
            return id;
        }
        let id = ActionId(self.action_names.len());
        self.action_names.push(name.to_string());
        self.action_index.insert(name.to_string(), id);
        id
    }

    fn row_mut(&mut self, s: StateId, a: ActionId) -> &mut Transition<N> {
        let row = &mut self.rows[s.0];
        let i = match row.iter().position(|t| t.action == a) {
            Some(i) => i,
            None => {
                row.push(Transition {
                    action: a,
                    successors: Vec::new(),
                    reward: N::zero(),
                });
                row.len() - 1
            }
        };
        &mut row[i]
    }

    /// Adds probability mass `p` on `s --a--> to` (accumulating duplicates).
    pub fn add_transition(&mut self, s: StateId, a: ActionId, to: StateId, p: N) -> &mut Self {
        let t = self.row_mut(s, a);
        match t.successors.iter_mut().find(|(x, _)| *x == to) {
            Some((_, q)) => *q = q.clone() + p,
            None => t.successors.push((to, p)),
        }
        self
    }

    pub fn set_reward(&mut self, s: StateId, a: ActionId, r: N) -> &mut Self {
        self.has_rewards = true;
        self.row_mut(s, a).reward = r;
        self
    }

    /// Adds a whole row by name: `row("s0", "a", &[("t", p), ...])`.
    pub fn row(&mut self, s: &str, a: &str, succ: &[(&str, N)]) -> &mut Self {
        let s = self.state(s);
        let a = self.action(a);
        self.row_mut(s, a);
        for (to, p) in succ {
            let to = self.state(to);
            self.add_transition(s, a, to, p.clone());
        }
        self
    }

    /// Adds a whole row with a reward.
    pub fn rewarded_row(&mut self, s: &str, a: &str, reward: N, succ: &[(&str, N)]) -> &mut Self {
        self.row(s, a, succ);
        let (s, a) = (self.state(s), self.action(a));
        self.set_reward(s, a, reward)
    }

    /// Makes `s` a sink: a single `action` self-loop with probability 1.
    pub fn sink(&mut self, s: &str, action: &str) -> &mut Self {
        self.row(s, action, &[(s, N::one())])
    }

    pub fn target(&mut self, s: &str) -> &mut Self {
        let s = self.state(s);
        self.target.push(s);
        self
    }

    pub fn bad(&mut self, s: &str) -> &mut Self {
        let s = self.state(s);
        self.bad.push(s);
        self
    }

    pub fn mark_target(&mut self, s: StateId) -> &mut Self {
        self.target.push(s);
        self
    }

    pub fn mark_bad(&mut self, s: StateId) -> &mut Self {
        self.bad.push(s);
        self
    }

    pub fn initial(&mut self, s: &str) -> &mut Self {
        let s = self.state(s);
        self.initial = Some(s);
        self
    }

    pub fn set_initial(&mut self, s: StateId) -> &mut Self {
        self.initial = Some(s);
        self
    }

    pub fn mark_rewarded(&mut self) -> &mut Self {
        self.has_rewards = true;
        self
    }

    /// Builds without validating.
    pub fn build_unchecked(&self) -> Mdp<N> {
        Mdp::from_parts(
            self.state_names.clone(),
            self.action_names.clone(),
            self.rows.clone(),
            &self.target,
            &self.bad,
            self.initial.unwrap_or(StateId(0)),
            self.has_rewards,
        )
    }

    /// Builds and validates.
    pub fn build(&self) -> Result<Mdp<N>, ModelError> {
        self.build_unchecked().checked()
    }
}
