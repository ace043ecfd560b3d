//! Maximal safety probability, then maximal conditional expected mean payoff
//! among the safety-optimal strategies.
//!
//! Every memoryless strategy playing only Opt actions is safety-optimal, so
//! the pruned MDP (renormalised by the safety values) contains exactly the
//! safety-optimal behaviour, and its plain mean payoff equals the mean payoff
//! conditioned on never visiting a bad state.

use crate::chain::induced_chain;
use crate::error::SolveError;
use crate::eval;
use crate::mdp::{Mdp, StateId};
use crate::mean_payoff::{self, MeanPayoffSolution};
use crate::number::Number;
use crate::options::{Diagnostics, SolverOptions};
use crate::prune::{self, OptSet, PrunedModel, ValueVector};
use crate::strategy::MemorylessStrategy;

/// `UPre^0 ⊆ UPre^1 ⊆ …` and the induced Good / V / Bad partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafetyPartition {
    /// `upre_levels[i][s]`: `s ∈ UPre^i(Bad)`; the last level is the fixpoint.
    pub upre_levels: Vec<Vec<bool>>,
    pub good: Vec<bool>,
    pub v: Vec<bool>,
    pub bad: Vec<bool>,
}

impl SafetyPartition {
    pub fn fixpoint(&self) -> &[bool] {
        self.upre_levels.last().expect("at least UPre^0")
    }

    pub fn is_good(&self, s: StateId) -> bool {
        self.good[s.0]
    }

    pub fn count_good(&self) -> usize {
        self.good.iter().filter(|&&g| g).count()
    }

    pub fn count_v(&self) -> usize {
        self.v.iter().filter(|&&g| g).count()
    }

    pub fn count_bad(&self) -> usize {
        self.bad.iter().filter(|&&g| g).count()
    }
}

/// `UPre^{i+1} = {s | ∀a ∃s' ∈ UPre^i: P(s,a,s') > 0}` iterated to its fixpoint.
pub fn upre_partition<N: Number>(model: &Mdp<N>, bad: &[StateId]) -> SafetyPartition {
    let n = model.num_states();
    let mut bad_mask = vec![false; n];
    for s in bad {
        bad_mask[s.0] = true;
    }
    let mut levels = vec![bad_mask.clone()];
    loop {
        let prev = levels.last().expect("nonempty");
        let next: Vec<bool> = model
            .states()
            .map(|s| {
                prev[s.0]
                    || model
                        .choices(s)
                        .iter()
                        .all(|t| t.support().any(|x| prev[x.0]))
            })
            .collect();
        if &next == prev {
            break;
        }
        levels.push(next);
    }
    let fix = levels.last().expect("nonempty");
    let good: Vec<bool> = fix.iter().map(|&u| !u).collect();
    let v: Vec<bool> = (0..n).map(|s| !good[s] && !bad_mask[s]).collect();
    SafetyPartition {
        upre_levels: levels,
        good,
        v,
        bad: bad_mask,
    }
}

/// Maximal probability of never visiting `bad`, computed as one minus the
/// minimal probability of reaching it.
pub fn max_safety_values<N: Number>(
    model: &Mdp<N>,
    bad: &[StateId],
    opts: &SolverOptions,
) -> Result<ValueVector<N>, SolveError> {
    compute_safety(model, bad, opts).map(|(v, _, _)| v)
}

fn compute_safety<N: Number>(
    model: &Mdp<N>,
    bad: &[StateId],
    opts: &SolverOptions,
) -> Result<(ValueVector<N>, SafetyPartition, usize), SolveError> {
    let partition = upre_partition(model, bad);
    let n = model.num_states();
    // Good states can avoid `bad` surely; every other undecided state reaches
    // `bad` with positive probability under every strategy, so each policy's
    // evaluation system below is nonsingular.
    let mut policy: Vec<usize> = model
        .states()
        .map(|s| {
            if partition.good[s.0] {
                model
                    .choices(s)
                    .iter()
                    .position(|t| t.support().all(|x| partition.good[x.0]))
                    .unwrap_or(0)
            } else {
                0
            }
        })
        .collect();
    let tol = opts.tolerances.eta;
    let mut rounds = 0;
    let min_reach = loop {
        rounds += 1;
        let rows: Vec<Vec<(StateId, N)>> = model
            .states()
            .map(|s| {
                if partition.v[s.0] {
                    model.choices(s)[policy[s.0]].successors.clone()
                } else {
                    vec![(s, N::one())]
                }
            })
            .collect();
        let x = eval::reach_probabilities(&rows, &partition.bad)?;
        let mut changed = false;
        for s in model.states().filter(|s| partition.v[s.0]) {
            let sums: Vec<N> = model.choices(s).iter().map(|t| t.expectation(&x)).collect();
            let current = sums[policy[s.0]].clone();
            let best = sums
                .iter()
                .cloned()
                .fold(current.clone(), |m, v| if v < m { v } else { m });
            if current.exceeds(&best, tol) {
                policy[s.0] = sums.iter().position(|v| v.near(&best, tol)).unwrap_or(policy[s.0]);
                changed = true;
            }
        }
        if !changed || rounds >= opts.max_iterations {
            break x;
        }
    };
    let values = (0..n)
        .map(|s| {
            if partition.good[s] {
                N::one()
            } else if partition.bad[s] {
                N::zero()
            } else {
                N::one() - min_reach[s].clone()
            }
        })
        .collect();
    Ok((ValueVector::new(values), partition, rounds))
}

/// Locally optimal actions of the safety value vector (same defining equality
/// as for reachability).
pub fn opt_action_set_safety<N: Number>(model: &Mdp<N>, values: &ValueVector<N>, opts: &SolverOptions) -> OptSet {
    prune::opt_action_set(model, values, &opts.tolerances)
}

/// The pruned MDP for safety, rewards restricted to the kept states.
pub fn prune_safety<N: Number>(
    model: &Mdp<N>,
    values: &ValueVector<N>,
    opt: &OptSet,
    opts: &SolverOptions,
) -> Result<PrunedModel<N>, SolveError> {
    prune::prune(model, values, opt, &opts.tolerances)
}

/// Expected mean payoff maximisation on a pruned model; the value reported
/// by callers is the gain at the pruned initial state.
pub fn max_mean_payoff<N: Number>(
    pruned: &PrunedModel<N>,
    opts: &SolverOptions,
) -> Result<MeanPayoffSolution<N>, SolveError> {
    mean_payoff::max_mean_payoff(&pruned.model, opts)
}

/// Lexicographic optimum of (max safety, max conditional mean payoff).
#[derive(Clone, Debug)]
pub struct SafetyMpResult<N> {
    /// Deterministic, over the original state space.
    pub strategy: MemorylessStrategy<N>,
    pub safety_probability: N,
    pub conditional_mean_payoff: N,
    pub values: ValueVector<N>,
    pub partition: SafetyPartition,
    pub opt: OptSet,
    pub pruned: PrunedModel<N>,
    pub diagnostics: Diagnostics,
}

pub fn solve_safety_mp<N: Number>(
    model: &Mdp<N>,
    s0: StateId,
    bad: &[StateId],
    opts: &SolverOptions,
) -> Result<SafetyMpResult<N>, SolveError> {
    opts.check_for::<N>()?;
    if s0.0 >= model.num_states() {
        return Err(crate::error::ModelError::UnknownState(s0).into());
    }
    if !model.has_rewards() {
        return Err(SolveError::MissingRewards);
    }
    let model = &model.clone().with_bad(bad).with_initial(s0);
    let (values, partition, value_iterations) = compute_safety(model, bad, opts)?;
    if values.get(s0).is_negligible(opts.tolerances.eta) {
        return Err(SolveError::SafetyUnachievable);
    }
    let opt = opt_action_set_safety(model, &values, opts);
    let pruned = prune_safety(model, &values, &opt, opts)?;
    let sol = max_mean_payoff(&pruned, opts)?;
    let s0_pruned = pruned.from_origin(s0).ok_or(SolveError::SafetyUnachievable)?;
    let mut diagnostics = Diagnostics::new::<N>(opts);
    diagnostics.value_iterations = value_iterations;
    diagnostics.strategy_iterations = sol.iterations;
    diagnostics.bellman_residual = values.bellman_residual(model);
    diagnostics.positive_states = pruned.num_states();
    diagnostics.pruned_choices = pruned.model.num_choices();
    Ok(SafetyMpResult {
        strategy: pruned.lift_strategy(model, &sol.strategy),
        safety_probability: values.get(s0).clone(),
        conditional_mean_payoff: sol.gain[s0_pruned.0].clone(),
        values,
        partition,
        opt,
        pruned,
        diagnostics,
    })
}

/// `E_σ(MP | □¬Bad)` for a strategy playing only Opt actions, evaluated as the
/// plain mean payoff of the strategy in the pruned model.
pub fn conditional_mean_payoff<N: Number>(
    model: &Mdp<N>,
    strategy: &MemorylessStrategy<N>,
    s0: StateId,
    bad: &[StateId],
    opts: &SolverOptions,
) -> Result<N, SolveError> {
    if !model.has_rewards() {
        return Err(SolveError::MissingRewards);
    }
    strategy.validate_for(model)?;
    let model = &model.clone().with_bad(bad);
    let values = max_safety_values(model, bad, opts)?;
    if values.get(s0).is_negligible(opts.tolerances.eta) {
        return Err(SolveError::ConditioningNull);
    }
    let opt = opt_action_set_safety(model, &values, opts);
    for s in model.states() {
        for a in strategy.support(s) {
            if !opt.contains(s, a) {
                return Err(SolveError::NonOptimalAction { state: s, action: a });
            }
        }
    }
    let pruned = prune_safety(model, &values, &opt, opts)?;
    let restricted = pruned.restrict_strategy(strategy);
    let chain = induced_chain(&pruned.model, &restricted)?;
    let analysis = eval::gain_analysis(&chain)?;
    let s0_pruned = pruned.from_origin(s0).ok_or(SolveError::ConditioningNull)?;
    Ok(analysis.gain[s0_pruned.0].clone())
}

/// `E_σ(Reward_n | □¬Bad)` by dynamic programming over (state, step):
/// `Σ_ρ PP(ρ)·Reward_n(ρ)·Pr(□¬Bad | ρ) / Pr(□¬Bad)`.
pub fn expected_conditional_finite_reward<N: Number>(
    model: &Mdp<N>,
    strategy: &MemorylessStrategy<N>,
    s0: StateId,
    bad: &[StateId],
    horizon: usize,
) -> Result<N, SolveError> {
    if !model.has_rewards() {
        return Err(SolveError::MissingRewards);
    }
    let chain = induced_chain(model, strategy)?;
    let n = model.num_states();
    let mut bad_mask = vec![false; n];
    for s in bad {
        bad_mask[s.0] = true;
    }
    let reach_bad = eval::reach_probabilities(chain.rows(), &bad_mask)?;
    let safe: Vec<N> = reach_bad.into_iter().map(|p| N::one() - p).collect();
    if safe[s0.0].is_zero() {
        return Err(SolveError::ConditioningNull);
    }
    // tail[k] = P_σ^k · safe: probability of staying safe forever, k steps ahead.
    let mut tail = vec![safe.clone()];
    for k in 1..horizon {
        let prev = &tail[k - 1];
        let next = (0..n)
            .map(|s| {
                chain
                    .row(StateId(s))
                    .iter()
                    .fold(N::zero(), |acc, (t, p)| acc + p.clone() * prev[t.0].clone())
            })
            .collect();
        tail.push(next);
    }
    let mut mu = vec![N::zero(); n];
    mu[s0.0] = N::one();
    let mut total = N::zero();
    for i in 0..horizon {
        let ahead = &tail[horizon - i - 1];
        for s in model.states() {
            if mu[s.0].is_zero() {
                continue;
            }
            for (a, w) in strategy.distribution(s) {
                let t = model.transition(s, *a).expect("validated strategy");
                let weight = mu[s.0].clone() * w.clone() * t.reward.clone() * t.expectation(ahead);
                total = total + weight;
            }
        }
        let mut next = vec![N::zero(); n];
        for s in 0..n {
            if mu[s].is_zero() {
                continue;
            }
            for (t, p) in chain.row(StateId(s)) {
                next[t.0] = next[t.0].clone() + mu[s].clone() * p.clone();
            }
        }
        mu = next;
    }
    Ok(total / safe[s0.0].clone())
}

/// Safety probability `Pr_σ(□¬Bad)` from every state.
pub fn safety_probability_under<N: Number>(
    model: &Mdp<N>,
    strategy: &MemorylessStrategy<N>,
    bad: &[StateId],
) -> Result<Vec<N>, SolveError> {
    let chain = induced_chain(model, strategy)?;
    let mut bad_mask = vec![false; model.num_states()];
    for s in bad {
        bad_mask[s.0] = true;
    }
    Ok(eval::reach_probabilities(chain.rows(), &bad_mask)?
        .into_iter()
        .map(|p| N::one() - p)
        .collect())
}
