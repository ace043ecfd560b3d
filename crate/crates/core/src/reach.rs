//! Maximal reachability, then minimal conditional expected length among the
//! reach-optimal strategies.
//!
//! Pipeline: positive-value states → maximal reachability values → Opt
//! actions → pruned MDP (values renormalised so that every kept run reaches
//! the target almost surely) → stochastic-shortest-path minimisation of the
//! expected number of steps in the pruned MDP.

use crate::chain::induced_chain;
use crate::error::SolveError;
use crate::eval;
use crate::graph;
use crate::mdp::{Mdp, StateId};
use crate::number::{Number, NumericMode};
use crate::options::{Diagnostics, SolverOptions};
use crate::prune::{self, OptSet, PrunedModel, ValueVector};
use crate::strategy::MemorylessStrategy;

fn mask(n: usize, set: &[StateId]) -> Vec<bool> {
    let mut m = vec![false; n];
    for s in set {
        m[s.0] = true;
    }
    m
}

/// States with a positive maximal reachability value, i.e. those with a path
/// to `target` in the transition graph.
pub fn positive_value_states<N: Number>(model: &Mdp<N>, target: &[StateId]) -> Result<Vec<bool>, SolveError> {
    if target.is_empty() {
        return Err(SolveError::EmptyTarget);
    }
    Ok(graph::backward_reachable(
        &model.successor_graph(),
        &mask(model.num_states(), target),
    ))
}

/// States from which some strategy reaches `target` almost surely (Val = 1).
pub fn almost_sure_states<N: Number>(model: &Mdp<N>, target: &[bool]) -> Vec<bool> {
    let n = model.num_states();
    let mut universe = vec![true; n];
    loop {
        let mut reach = target.to_vec();
        loop {
            let mut grew = false;
            for s in model.states() {
                if reach[s.0] || !universe[s.0] {
                    continue;
                }
                let ok = model.choices(s).iter().any(|t| {
                    t.support().all(|x| universe[x.0]) && t.support().any(|x| reach[x.0])
                });
                if ok {
                    reach[s.0] = true;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        if reach == universe {
            return universe;
        }
        universe = reach;
    }
}

/// Maximal probability of reaching `target` from every state.
///
/// Exact mode: graph precomputation, then policy iteration with exact linear
/// solves. Float mode: interval iteration (end components collapsed) to
/// absolute error `ε`.
pub fn max_reach_values<N: Number>(
    model: &Mdp<N>,
    target: &[StateId],
    opts: &SolverOptions,
) -> Result<ValueVector<N>, SolveError> {
    compute_max_reach(model, target, opts).map(|(v, _)| v)
}

pub(crate) fn compute_max_reach<N: Number>(
    model: &Mdp<N>,
    target: &[StateId],
    opts: &SolverOptions,
) -> Result<(ValueVector<N>, usize), SolveError> {
    let positive = positive_value_states(model, target)?;
    let target_mask = mask(model.num_states(), target);
    let one = almost_sure_states(model, &target_mask);
    let (values, iterations) = match N::MODE {
        NumericMode::Exact => max_reach_policy_iteration(model, &positive, &one, opts)?,
        NumericMode::Float => max_reach_interval_iteration(model, &positive, &one, opts)?,
    };
    Ok((ValueVector::new(values), iterations))
}

fn fixed_value<N: Number>(positive: &[bool], one: &[bool], s: usize) -> Option<N> {
    if one[s] {
        Some(N::one())
    } else if !positive[s] {
        Some(N::zero())
    } else {
        None
    }
}

fn max_reach_policy_iteration<N: Number>(
    model: &Mdp<N>,
    positive: &[bool],
    one: &[bool],
    opts: &SolverOptions,
) -> Result<(Vec<N>, usize), SolveError> {
    let n = model.num_states();
    let maybe: Vec<bool> = (0..n).map(|s| positive[s] && !one[s]).collect();
    // Start from a strategy that moves closer to the almost-sure region, so
    // every undecided state reaches it with positive probability.
    let dist = graph::distance_to(&model.successor_graph(), one);
    let mut policy: Vec<usize> = model
        .states()
        .map(|s| {
            if !maybe[s.0] {
                return 0;
            }
            let d = dist[s.0].expect("positive state reaches the almost-sure region");
            model
                .choices(s)
                .iter()
                .position(|t| t.support().any(|x| dist[x.0].is_some_and(|dx| dx < d)))
                .unwrap_or(0)
        })
        .collect();
    let tol = opts.tolerances.eta;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let rows: Vec<Vec<(StateId, N)>> = model
            .states()
            .map(|s| {
                if maybe[s.0] {
                    model.choices(s)[policy[s.0]].successors.clone()
                } else {
                    vec![(s, N::one())]
                }
            })
            .collect();
        let mut x = eval::reach_probabilities(&rows, one)?;
        for s in 0..n {
            if let Some(v) = fixed_value(positive, one, s) {
                x[s] = v;
            }
        }
        let mut changed = false;
        for s in model.states().filter(|s| maybe[s.0]) {
            let choices = model.choices(s);
            let current = choices[policy[s.0]].expectation(&x);
            let sums: Vec<N> = choices.iter().map(|t| t.expectation(&x)).collect();
            let best = sums
                .iter()
                .cloned()
                .fold(current.clone(), |m, v| if v > m { v } else { m });
            if best.exceeds(&current, tol) {
                policy[s.0] = sums.iter().position(|v| v.near(&best, tol)).unwrap_or(policy[s.0]);
                changed = true;
            }
        }
        if !changed || rounds >= opts.max_iterations {
            return Ok((x, rounds));
        }
    }
}

/// Maximal end components of the sub-MDP induced by `within`.
pub fn maximal_end_components<N: Number>(model: &Mdp<N>, within: &[bool]) -> Vec<Vec<usize>> {
    let n = model.num_states();
    let mut alive = within.to_vec();
    let mut allowed: Vec<Vec<usize>> = model
        .states()
        .map(|s| {
            if !alive[s.0] {
                return Vec::new();
            }
            (0..model.choices(s).len()).collect()
        })
        .collect();
    loop {
        let graph: Vec<Vec<usize>> = model
            .states()
            .map(|s| {
                let mut out: Vec<usize> = allowed[s.0]
                    .iter()
                    .flat_map(|&i| model.choices(s)[i].support().map(|x| x.0))
                    .filter(|&x| alive[x])
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            })
            .collect();
        let sccs = graph::strongly_connected_components(&graph);
        let mut comp_of = vec![usize::MAX; n];
        for (i, c) in sccs.iter().enumerate() {
            for &s in c {
                comp_of[s] = i;
            }
        }
        let mut changed = false;
        for s in model.states() {
            if !alive[s.0] {
                continue;
            }
            let before = allowed[s.0].len();
            allowed[s.0].retain(|&i| {
                model.choices(s)[i]
                    .support()
                    .all(|x| alive[x.0] && comp_of[x.0] == comp_of[s.0])
            });
            if allowed[s.0].len() != before {
                changed = true;
            }
            if allowed[s.0].is_empty() {
                alive[s.0] = false;
                changed = true;
            }
        }
        if !changed {
            let mut mecs: Vec<Vec<usize>> = sccs
                .into_iter()
                .filter(|c| c.iter().all(|&s| alive[s]))
                .collect();
            mecs.sort();
            return mecs;
        }
    }
}

fn max_reach_interval_iteration<N: Number>(
    model: &Mdp<N>,
    positive: &[bool],
    one: &[bool],
    opts: &SolverOptions,
) -> Result<(Vec<N>, usize), SolveError> {
    let n = model.num_states();
    let maybe: Vec<bool> = (0..n).map(|s| positive[s] && !one[s]).collect();
    let mecs = maximal_end_components(model, &maybe);
    let mut block_of: Vec<usize> = (0..n).collect();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut in_mec = vec![false; n];
    for mec in &mecs {
        for &s in mec {
            in_mec[s] = true;
        }
    }
    for mec in mecs {
        let id = blocks.len();
        for &s in &mec {
            block_of[s] = n + id;
        }
        blocks.push(mec);
    }
    for s in (0..n).filter(|&s| maybe[s] && !in_mec[s]) {
        blocks.push(vec![s]);
    }
    // Exit choices of each block: choices that can leave it.
    let exits: Vec<Vec<(usize, usize)>> = blocks
        .iter()
        .map(|b| {
            let key = block_of[b[0]];
            let mut out = Vec::new();
            for &s in b {
                for (i, t) in model.choices(StateId(s)).iter().enumerate() {
                    let internal = in_mec[s] && t.support().all(|x| block_of[x.0] == key);
                    if !internal {
                        out.push((s, i));
                    }
                }
            }
            out
        })
        .collect();
    let init = |upper: bool| -> Vec<N> {
        (0..n)
            .map(|s| match fixed_value::<N>(positive, one, s) {
                Some(v) => v,
                None if upper => N::one(),
                None => N::zero(),
            })
            .collect()
    };
    let mut lower = init(false);
    let mut upper = init(true);
    let eps = opts.tolerances.epsilon;
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        for (block, exit) in blocks.iter().zip(&exits) {
            for vec in [&mut lower, &mut upper] {
                let best = exit
                    .iter()
                    .map(|&(s, i)| model.choices(StateId(s))[i].expectation(vec))
                    .fold(None::<N>, |m, v| match m {
                        Some(m) if m >= v => Some(m),
                        _ => Some(v),
                    })
                    .unwrap_or_else(N::zero);
                for &s in block {
                    vec[s] = best.clone();
                }
            }
        }
        let gap = (0..n)
            .filter(|&s| maybe[s])
            .map(|s| (upper[s].clone() - lower[s].clone()).to_f64())
            .fold(0.0, f64::max);
        if gap <= 2.0 * eps || sweeps >= opts.max_iterations {
            let two = N::from_int(2);
            let mid = (0..n)
                .map(|s| {
                    if maybe[s] {
                        (lower[s].clone() + upper[s].clone()) / two.clone()
                    } else {
                        lower[s].clone()
                    }
                })
                .collect();
            return Ok((mid, sweeps));
        }
    }
}

/// Locally optimal actions of the reachability value vector.
pub fn opt_action_set<N: Number>(model: &Mdp<N>, values: &ValueVector<N>, opts: &SolverOptions) -> OptSet {
    prune::opt_action_set(model, values, &opts.tolerances)
}

/// The pruned MDP for reachability.
pub fn prune_reach<N: Number>(
    model: &Mdp<N>,
    values: &ValueVector<N>,
    opt: &OptSet,
    opts: &SolverOptions,
) -> Result<PrunedModel<N>, SolveError> {
    prune::prune(model, values, opt, &opts.tolerances)
}

/// Optimal strategy and per-state values of a secondary objective on a pruned model.
#[derive(Clone, Debug)]
pub struct SecondarySolution<N> {
    /// Deterministic, over the pruned state space.
    pub strategy: MemorylessStrategy<N>,
    pub values: Vec<N>,
    pub iterations: usize,
}

/// Deterministic strategy minimising the expected number of steps to the
/// target in the pruned model (stochastic shortest path, unit cost).
///
/// Policy iteration over proper policies, started from a breadth-first
/// distance-greedy policy. In float mode a singular evaluation falls back to
/// value iteration.
pub fn min_expected_length<N: Number>(
    pruned: &PrunedModel<N>,
    opts: &SolverOptions,
) -> Result<SecondarySolution<N>, SolveError> {
    let m = &pruned.model;
    let target = m.target_mask().to_vec();
    let dist = graph::distance_to(&m.successor_graph(), &target);
    let mut policy = Vec::with_capacity(m.num_states());
    for s in m.states() {
        if target[s.0] {
            policy.push(0);
            continue;
        }
        let d = dist[s.0].ok_or_else(|| {
            SolveError::Internal(format!("pruned state {} cannot reach the target", m.state_name(s)))
        })?;
        let i = m
            .choices(s)
            .iter()
            .position(|t| t.support().any(|x| dist[x.0].is_some_and(|dx| dx < d)))
            .ok_or_else(|| SolveError::Internal("no progress action in pruned model".into()))?;
        policy.push(i);
    }
    let tol = opts.tolerances.eta;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let rows: Vec<Vec<(StateId, N)>> = m
            .states()
            .map(|s| m.choices(s)[policy[s.0]].successors.clone())
            .collect();
        let v = match eval::expected_steps(&rows, &target) {
            Ok(v) => v,
            Err(SolveError::Singular) if N::MODE == NumericMode::Float => {
                return min_expected_length_value_iteration(pruned, opts);
            }
            Err(e) => return Err(e),
        };
        let mut changed = false;
        for s in m.states().filter(|s| !target[s.0]) {
            let costs: Vec<N> = m.choices(s).iter().map(|t| t.expectation(&v)).collect();
            let current = costs[policy[s.0]].clone();
            let best = costs
                .iter()
                .cloned()
                .fold(current.clone(), |m, c| if c < m { c } else { m });
            if current.exceeds(&best, tol) {
                policy[s.0] = costs.iter().position(|c| c.near(&best, tol)).unwrap_or(policy[s.0]);
                changed = true;
            }
        }
        if !changed || rounds >= opts.max_iterations {
            let actions = m.states().map(|s| m.choices(s)[policy[s.0]].action).collect();
            return Ok(SecondarySolution {
                strategy: MemorylessStrategy::deterministic(actions),
                values: v,
                iterations: rounds,
            });
        }
    }
}

/// Value-iteration variant of [`min_expected_length`] (float fallback);
/// stops when successive sweeps differ by at most `ε`.
pub fn min_expected_length_value_iteration<N: Number>(
    pruned: &PrunedModel<N>,
    opts: &SolverOptions,
) -> Result<SecondarySolution<N>, SolveError> {
    let m = &pruned.model;
    let target = m.target_mask();
    let mut v = vec![N::zero(); m.num_states()];
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut delta: f64 = 0.0;
        for s in m.states().filter(|s| !target[s.0]) {
            let best = m
                .choices(s)
                .iter()
                .map(|t| N::one() + t.expectation(&v))
                .fold(None::<N>, |acc, c| match acc {
                    Some(a) if a <= c => Some(a),
                    _ => Some(c),
                })
                .expect("pruned states have actions");
            delta = delta.max((best.clone() - v[s.0].clone()).to_f64().abs());
            v[s.0] = best;
        }
        if delta <= opts.tolerances.epsilon || sweeps >= opts.max_iterations {
            break;
        }
    }
    let actions = m
        .states()
        .map(|s| {
            let costs: Vec<N> = m.choices(s).iter().map(|t| t.expectation(&v)).collect();
            let best = costs.iter().cloned().fold(costs[0].clone(), |a, c| if c < a { c } else { a });
            let i = costs
                .iter()
                .position(|c| c.near(&best, opts.tolerances.eta))
                .unwrap_or(0);
            m.choices(s)[i].action
        })
        .collect();
    Ok(SecondarySolution {
        strategy: MemorylessStrategy::deterministic(actions),
        values: v,
        iterations: sweeps,
    })
}

/// Lexicographic optimum of (max reachability, min conditional expected length).
#[derive(Clone, Debug)]
pub struct ReachLexResult<N> {
    /// Deterministic, over the original state space.
    pub strategy: MemorylessStrategy<N>,
    pub reach_probability: N,
    pub conditional_expected_length: N,
    pub values: ValueVector<N>,
    pub opt: OptSet,
    pub pruned: PrunedModel<N>,
    pub diagnostics: Diagnostics,
}

/// Runs the full pipeline from `s0`.
pub fn solve_reach_length<N: Number>(
    model: &Mdp<N>,
    s0: StateId,
    target: &[StateId],
    opts: &SolverOptions,
) -> Result<ReachLexResult<N>, SolveError> {
    opts.check_for::<N>()?;
    if s0.0 >= model.num_states() {
        return Err(crate::error::ModelError::UnknownState(s0).into());
    }
    let positive = positive_value_states(model, target)?;
    if !positive[s0.0] {
        return Err(SolveError::TargetUnreachable);
    }
    let model = &model.clone().with_target(target).with_initial(s0);
    let (values, value_iterations) = compute_max_reach(model, target, opts)?;
    let opt = opt_action_set(model, &values, opts);
    let pruned = prune_reach(model, &values, &opt, opts)?;
    let secondary = min_expected_length(&pruned, opts)?;
    let s0_pruned = pruned
        .from_origin(s0)
        .ok_or(SolveError::TargetUnreachable)?;
    let strategy = pruned.lift_strategy(model, &secondary.strategy);
    let mut diagnostics = Diagnostics::new::<N>(opts);
    diagnostics.value_iterations = value_iterations;
    diagnostics.strategy_iterations = secondary.iterations;
    diagnostics.bellman_residual = values.bellman_residual(model);
    diagnostics.positive_states = pruned.num_states();
    diagnostics.pruned_choices = pruned.model.num_choices();
    Ok(ReachLexResult {
        strategy,
        reach_probability: values.get(s0).clone(),
        conditional_expected_length: secondary.values[s0_pruned.0].clone(),
        values,
        opt,
        pruned,
        diagnostics,
    })
}

/// `Pr_σ(◇T)` from every state of the original model.
pub fn reach_probability_under<N: Number>(
    model: &Mdp<N>,
    strategy: &MemorylessStrategy<N>,
    target: &[StateId],
) -> Result<Vec<N>, SolveError> {
    let chain = induced_chain(model, strategy)?;
    eval::reach_probabilities(chain.rows(), &mask(model.num_states(), target))
}

/// `E_σ(len_T | ◇T)` from `s0`, evaluated directly in the original model's
/// induced chain (no pruning involved).
pub fn conditional_expected_length<N: Number>(
    model: &Mdp<N>,
    strategy: &MemorylessStrategy<N>,
    s0: StateId,
    target: &[StateId],
) -> Result<N, SolveError> {
    let chain = induced_chain(model, strategy)?;
    let target = mask(model.num_states(), target);
    let p = eval::reach_probabilities(chain.rows(), &target)?;
    if p[s0.0].is_zero() {
        return Err(SolveError::ConditioningNull);
    }
    let w = eval::weighted_lengths(chain.rows(), &target, &p)?;
    Ok(w[s0.0].clone() / p[s0.0].clone())
}

