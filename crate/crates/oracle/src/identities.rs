//! Executable identities relating the original model, its value vector and the
//! pruned model. Each check compares a solver-side quantity against an
//! oracle-side one computed by explicit path sums or exact chain analysis.

use std::collections::BTreeMap;
use std::fmt;

use lexmdp_core::reach::{self, max_reach_values, opt_action_set, prune_reach};
use lexmdp_core::safety::{self, max_safety_values, opt_action_set_safety, prune_safety, upre_partition};
use lexmdp_core::{
    induced_chain, ActionId, Mdp, MemorylessStrategy, Number, PrunedModel, Rational, SolverOptions, StateId,
    ValueVector,
};
use num_traits::{One, Zero};
use rand::Rng;

use crate::analysis::{exact_chain_mp_analysis, exact_chain_reach_analysis};
use crate::brute::{lexicographic_brute_force, primary_values, Objective};
use crate::enumerate::md_strategies;
use crate::random::{random_strategy_within, random_deterministic_within};
use crate::OracleError;

pub const REACH_VALUES: &str = "reach-values-match-enumeration";
pub const REACH_BELLMAN: &str = "reach-bellman-upper-bound";
pub const REACH_CYLINDER: &str = "reach-pruned-cylinder-ratio";
pub const REACH_RATIO: &str = "reach-pruned-probability-ratio";
pub const REACH_OPTIMAL_IFF: &str = "reach-optimal-iff-pruned-certain";
pub const REACH_LENGTH: &str = "reach-conditional-length-preserved";
pub const REACH_LEX: &str = "reach-lexicographic-optimum";
pub const REACH_LEX_FLOAT: &str = "reach-lexicographic-optimum-float";
pub const LENGTH_LOWER_BOUND: &str = "reach-length-above-graph-distance";
pub const SAFETY_VALUES: &str = "safety-values-match-enumeration";
pub const SAFETY_PARTITION: &str = "safety-good-iff-value-one";
pub const SAFETY_BELLMAN: &str = "safety-bellman-upper-bound";
pub const SAFETY_GOOD_CLOSED: &str = "safety-opt-keeps-good";
pub const SAFETY_OPT_EXACT: &str = "safety-optimal-iff-opt-supported";
pub const SAFETY_UNFOLD_VALUE: &str = "safety-value-unfolding";
pub const SAFETY_UNFOLD_STRATEGY: &str = "safety-strategy-unfolding";
pub const SAFETY_CYLINDER: &str = "safety-pruned-cylinder-ratio";
pub const SAFETY_MP: &str = "safety-conditional-mp-preserved";
pub const SAFETY_LEX: &str = "safety-lexicographic-optimum";
pub const SAFETY_LEX_FLOAT: &str = "safety-lexicographic-optimum-float";
pub const ORACLE_SELF: &str = "oracle-reach-equals-absorption";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckTally {
    pub passed: usize,
    pub failed: usize,
    pub first_failure: Option<String>,
}

/// Pass/fail counts per named identity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdentityReport {
    pub checks: BTreeMap<&'static str, CheckTally>,
}

impl IdentityReport {
    pub fn record(&mut self, name: &'static str, ok: bool, detail: impl FnOnce() -> String) {
        let t = self.checks.entry(name).or_default();
        if ok {
            t.passed += 1;
        } else {
            t.failed += 1;
            if t.first_failure.is_none() {
                t.first_failure = Some(detail());
            }
        }
    }

    pub fn merge(&mut self, other: IdentityReport) {
        for (name, t) in other.checks {
            let mine = self.checks.entry(name).or_default();
            mine.passed += t.passed;
            mine.failed += t.failed;
            if mine.first_failure.is_none() {
                mine.first_failure = t.first_failure;
            }
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.values().all(|t| t.failed == 0)
    }

    pub fn failures(&self) -> usize {
        self.checks.values().map(|t| t.failed).sum()
    }

    pub fn tally(&self, name: &str) -> Option<&CheckTally> {
        self.checks.get(name)
    }
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, t) in &self.checks {
            let verdict = if t.failed == 0 { "PASS" } else { "FAIL" };
            write!(f, "{verdict} {name}: {} passed, {} failed", t.passed, t.failed)?;
            if let Some(d) = &t.first_failure {
                write!(f, " (first: {d})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

type Q = Rational;

/// All positive-probability paths of exactly `len` steps from `s` under
/// `sigma`, as (states, actions, weight).
fn paths_of_length(
    model: &Mdp<Q>,
    sigma: &MemorylessStrategy<Q>,
    s: StateId,
    len: usize,
) -> Vec<(Vec<StateId>, Vec<ActionId>, Q)> {
    let mut frontier = vec![(vec![s], Vec::new(), Q::one())];
    for _ in 0..len {
        let mut next = Vec::new();
        for (states, actions, w) in frontier {
            let last = *states.last().unwrap();
            for (a, pa) in sigma.distribution(last) {
                let t = model.transition(last, *a).expect("strategy legal");
                for (to, p) in &t.successors {
                    let mut st = states.clone();
                    st.push(*to);
                    let mut ac = actions.clone();
                    ac.push(*a);
                    next.push((st, ac, w.clone() * pa.clone() * p.clone()));
                }
            }
        }
        frontier = next;
    }
    frontier
}

/// Weight of a path of the original model read in the pruned model; zero if
/// the path leaves the kept states or uses a removed action.
fn pruned_weight(pruned: &PrunedModel<Q>, sigma: &MemorylessStrategy<Q>, states: &[StateId], actions: &[ActionId]) -> Q {
    let mapped: Option<Vec<StateId>> = states.iter().map(|&s| pruned.from_origin(s)).collect();
    let Some(mapped) = mapped else { return Q::zero() };
    let mut w = Q::one();
    for (i, &a) in actions.iter().enumerate() {
        let sp = sigma.probability(states[i], a);
        let p = pruned.model.probability(mapped[i], a, mapped[i + 1]);
        w = w * sp * p;
    }
    w
}

fn describe(states: &[StateId]) -> String {
    states.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

/// Checks of the reachability pipeline on one instance, using the model's
/// target set and initial state. `strategies` random Opt-supported strategies
/// are drawn for the per-strategy identities.
pub fn check_reach_instance<R: Rng>(
    model: &Mdp<Q>,
    rng: &mut R,
    strategies: usize,
    report: &mut IdentityReport,
) -> Result<(), OracleError> {
    let opts = SolverOptions::default();
    let target = model.target_set();
    let s0 = model.initial();
    let values = max_reach_values(model, &target, &opts)?;
    let brute = primary_values(model, Objective::ReachLength, crate::enumerate::DEFAULT_CAP)?;
    report.record(REACH_VALUES, values.as_slice() == brute.as_slice(), || {
        format!("solver {:?} vs enumeration {:?}", values.as_slice(), brute)
    });

    for s in model.states() {
        for t in model.choices(s) {
            let step = t.expectation(values.as_slice());
            report.record(REACH_BELLMAN, *values.get(s) >= step, || format!("at ({s}, {})", t.action));
        }
    }

    let opt = opt_action_set(model, &values, &opts);
    let pruned = prune_reach(model, &values, &opt, &opts)?;
    let v0 = values.get(s0).clone();

    for k in 0..strategies {
        let full = k % 2 == 0;
        let sigma = random_strategy_within(rng, model, &opt, full);
        let restricted = pruned.restrict_strategy(&sigma);

        for len in 0..=3 {
            for (states, actions, w) in paths_of_length(model, &sigma, s0, len) {
                if !model.is_target(*states.last().unwrap()) {
                    continue;
                }
                let lhs = pruned_weight(&pruned, &sigma, &states, &actions);
                let rhs = w / v0.clone();
                report.record(REACH_CYLINDER, lhs == rhs, || {
                    format!("path {}: pruned {lhs} vs {rhs}", describe(&states))
                });
            }
        }

        let orig = exact_chain_reach_analysis(&induced_chain(model, &sigma)?, model.target_mask())?;
        let pchain = induced_chain(&pruned.model, &restricted)?;
        let prun = exact_chain_reach_analysis(&pchain, pruned.model.target_mask())?;
        let ps0 = pruned.from_origin(s0).expect("Val(s0) > 0");
        let pr = orig.reach_probability[s0.0].clone();
        let pr_pruned = prun.reach_probability[ps0.0].clone();
        report.record(REACH_RATIO, pr_pruned == pr.clone() / v0.clone(), || {
            format!("pruned {pr_pruned} vs {pr}/{v0}")
        });
        report.record(REACH_OPTIMAL_IFF, (pr_pruned == Q::one()) == (pr == v0), || {
            format!("pruned {pr_pruned}, original {pr}, value {v0}")
        });
        if full {
            report.record(REACH_OPTIMAL_IFF, pr == v0, || format!("full-support Opt strategy reaches {pr} < {v0}"));
            let lhs = prun.conditional_expected_length[ps0.0].clone();
            let rhs = orig.conditional_expected_length[s0.0].clone();
            report.record(REACH_LENGTH, lhs.is_some() && lhs == rhs, || format!("pruned {lhs:?} vs conditional {rhs:?}"));
        }
    }
    Ok(())
}

/// Solver pair against the brute-force optimum, exact and in `f64`.
pub fn check_reach_lexicographic(model: &Mdp<Q>, report: &mut IdentityReport) -> Result<(), OracleError> {
    let s0 = model.initial();
    let target = model.target_set();
    let opts = SolverOptions::default();
    let best = lexicographic_brute_force(model, s0, Objective::ReachLength, crate::enumerate::DEFAULT_CAP, 0.0)?;
    let got = reach::solve_reach_length(model, s0, &target, &opts)?;
    let ok = got.reach_probability == best.primary && got.conditional_expected_length == best.secondary;
    report.record(REACH_LEX, ok, || {
        format!(
            "solver ({}, {}) vs oracle ({}, {})",
            got.reach_probability, got.conditional_expected_length, best.primary, best.secondary
        )
    });
    let (f, g) = crate::brute::evaluate(model, &got.strategy, s0, Objective::ReachLength)?;
    report.record(REACH_LEX, f == best.primary && g.as_ref() == Some(&best.secondary), || {
        format!("returned strategy evaluates to ({f}, {g:?})")
    });

    let distance = graph_distance(model, s0);
    report.record(LENGTH_LOWER_BOUND, distance.is_some_and(|d| got.conditional_expected_length >= Q::from_int(d as i64)), || {
        format!("length {} below distance {distance:?}", got.conditional_expected_length)
    });

    let fm = model.map_numbers(|x| x.to_f64());
    let gotf = reach::solve_reach_length(&fm, s0, &target, &opts)?;
    let (bf, bg) = (best.primary.to_f64(), best.secondary.to_f64());
    let okf = (gotf.reach_probability - bf).abs() <= 1e-6 && (gotf.conditional_expected_length - bg).abs() <= 1e-6;
    report.record(REACH_LEX_FLOAT, okf, || {
        format!("float ({}, {}) vs oracle ({bf}, {bg})", gotf.reach_probability, gotf.conditional_expected_length)
    });
    Ok(())
}

fn graph_distance(model: &Mdp<Q>, s0: StateId) -> Option<usize> {
    let graph = model.successor_graph();
    let mut dist = vec![None; graph.len()];
    dist[s0.0] = Some(0);
    let mut queue = std::collections::VecDeque::from([s0.0]);
    while let Some(s) = queue.pop_front() {
        if model.is_target(StateId(s)) {
            return dist[s];
        }
        for &t in &graph[s] {
            if dist[t].is_none() {
                dist[t] = Some(dist[s].unwrap() + 1);
                queue.push_back(t);
            }
        }
    }
    None
}

/// Checks of the safety pipeline on one instance, using the model's bad set
/// and initial state.
pub fn check_safety_instance<R: Rng>(
    model: &Mdp<Q>,
    rng: &mut R,
    strategies: usize,
    report: &mut IdentityReport,
) -> Result<(), OracleError> {
    let opts = SolverOptions::default();
    let bad = model.bad_set();
    let s0 = model.initial();
    let values = max_safety_values(model, &bad, &opts)?;
    let brute = primary_values(model, Objective::SafetyMp, crate::enumerate::DEFAULT_CAP)?;
    report.record(SAFETY_VALUES, values.as_slice() == brute.as_slice(), || {
        format!("solver {:?} vs enumeration {:?}", values.as_slice(), brute)
    });

    let partition = upre_partition(model, &bad);
    for s in model.states() {
        report.record(SAFETY_PARTITION, (*values.get(s) == Q::one()) == partition.good[s.0], || {
            format!("at {s}: value {} good {}", values.get(s), partition.good[s.0])
        });
        if model.is_bad(s) {
            continue;
        }
        for t in model.choices(s) {
            let step = t.expectation(values.as_slice());
            report.record(SAFETY_BELLMAN, *values.get(s) >= step, || format!("at ({s}, {})", t.action));
        }
    }

    let opt = opt_action_set_safety(model, &values, &opts);
    let pruned = prune_safety(model, &values, &opt, &opts)?;
    for s in model.states().filter(|s| partition.good[s.0]) {
        let ps = pruned.from_origin(s).expect("good states are kept");
        for t in pruned.model.choices(ps) {
            let closed = t.support().all(|x| partition.good[pruned.to_origin(x).0]);
            report.record(SAFETY_GOOD_CLOSED, closed, || format!("({s}, {}) leaves Good", t.action));
        }
    }

    let v0 = values.get(s0).clone();
    for k in 0..strategies {
        let sigma = if k % 4 == 3 {
            random_deterministic_within(rng, model, &opt)
        } else {
            random_strategy_within(rng, model, &opt, k % 2 == 0)
        };
        let chain = induced_chain(model, &sigma)?;
        let orig = exact_chain_mp_analysis(&chain, model.bad_mask())?;

        for s in model.states() {
            for n in 1..=3 {
                let (unfold_v, unfold_pr) = unfold(model, &sigma, s, n, &partition.v, &partition.good, &values, &orig.safety_probability);
                report.record(SAFETY_UNFOLD_VALUE, unfold_v == *values.get(s), || {
                    format!("at {s}, n={n}: unfolding {unfold_v} vs value {}", values.get(s))
                });
                report.record(SAFETY_UNFOLD_STRATEGY, unfold_pr == orig.safety_probability[s.0], || {
                    format!("at {s}, n={n}: unfolding {unfold_pr} vs {}", orig.safety_probability[s.0])
                });
            }
        }

        for len in 0..=3 {
            for (states, actions, w) in paths_of_length(model, &sigma, s0, len) {
                let lhs = pruned_weight(&pruned, &sigma, &states, &actions);
                let last = *states.last().unwrap();
                let rhs = w * values.get(last).clone() / v0.clone();
                report.record(SAFETY_CYLINDER, lhs == rhs, || {
                    format!("path {}: pruned {lhs} vs {rhs}", describe(&states))
                });
            }
        }

        let restricted = pruned.restrict_strategy(&sigma);
        let pchain = induced_chain(&pruned.model, &restricted)?;
        let prun = exact_chain_mp_analysis(&pchain, pruned.model.bad_mask())?;
        let ps0 = pruned.from_origin(s0).expect("Val(s0) > 0");
        let lhs = prun.conditional_mean_payoff[ps0.0].clone();
        let rhs = orig.conditional_mean_payoff[s0.0].clone();
        report.record(SAFETY_MP, lhs.is_some() && lhs == rhs, || format!("pruned {lhs:?} vs conditional {rhs:?}"));
        let solver_side = safety::conditional_mean_payoff(model, &sigma, s0, &bad, &opts)?;
        report.record(SAFETY_MP, Some(&solver_side) == rhs.as_ref(), || {
            format!("solver evaluator {solver_side} vs conditional {rhs:?}")
        });
    }
    Ok(())
}

/// Right-hand sides of the n-step unfolding for both the value vector and
/// the strategy's own safety probabilities:
/// `Σ_{ρ∈(VA)^n V} PP(ρ)·f(last ρ) + Σ_{ρ reaching Good within n steps through V} PP(ρ)`.
#[allow(clippy::too_many_arguments)]
fn unfold(
    model: &Mdp<Q>,
    sigma: &MemorylessStrategy<Q>,
    s: StateId,
    n: usize,
    v: &[bool],
    good: &[bool],
    values: &ValueVector<Q>,
    pr: &[Q],
) -> (Q, Q) {
    if good[s.0] {
        return (Q::one(), Q::one());
    }
    let mut sum_v = Q::zero();
    let mut sum_pr = Q::zero();
    let mut sum_good = Q::zero();
    let mut frontier: Vec<(StateId, Q)> = if v[s.0] { vec![(s, Q::one())] } else { Vec::new() };
    for _ in 0..n {
        let mut next = Vec::new();
        for (u, w) in frontier {
            for (a, pa) in sigma.distribution(u) {
                for (to, p) in &model.transition(u, *a).expect("legal").successors {
                    let wt = w.clone() * pa.clone() * p.clone();
                    if good[to.0] {
                        sum_good = sum_good + wt;
                    } else if v[to.0] {
                        next.push((*to, wt));
                    }
                }
            }
        }
        frontier = next;
    }
    for (u, w) in frontier {
        sum_v = sum_v + w.clone() * values.get(u).clone();
        sum_pr = sum_pr + w * pr[u.0].clone();
    }
    (sum_v + sum_good.clone(), sum_pr + sum_good)
}

/// Exhaustive: an MD strategy attains the safety value from every state iff
/// it only plays Opt actions.
pub fn check_safety_opt_exhaustive(model: &Mdp<Q>, report: &mut IdentityReport) -> Result<usize, OracleError> {
    let opts = SolverOptions::default();
    let values = max_safety_values(model, &model.bad_set(), &opts)?;
    let opt = opt_action_set_safety(model, &values, &opts);
    let mut opt_supported = 0;
    for sigma in md_strategies(model, crate::enumerate::DEFAULT_CAP)? {
        let in_opt = opt.admits(&sigma);
        let analysis = exact_chain_mp_analysis(&induced_chain(model, &sigma)?, model.bad_mask())?;
        let attains = analysis.safety_probability.as_slice() == values.as_slice();
        opt_supported += usize::from(in_opt);
        report.record(SAFETY_OPT_EXACT, in_opt == attains, || {
            format!(
                "strategy {:?}: opt-supported {in_opt}, safety {:?} vs values {:?}",
                sigma.actions(),
                analysis.safety_probability,
                values.as_slice()
            )
        });
    }
    Ok(opt_supported)
}

/// Safety solver pair against the brute-force optimum, exact and in `f64`.
pub fn check_safety_lexicographic(model: &Mdp<Q>, report: &mut IdentityReport) -> Result<(), OracleError> {
    let s0 = model.initial();
    let bad = model.bad_set();
    let opts = SolverOptions::default();
    let best = lexicographic_brute_force(model, s0, Objective::SafetyMp, crate::enumerate::DEFAULT_CAP, 0.0)?;
    let got = safety::solve_safety_mp(model, s0, &bad, &opts)?;
    let ok = got.safety_probability == best.primary && got.conditional_mean_payoff == best.secondary;
    report.record(SAFETY_LEX, ok, || {
        format!(
            "solver ({}, {}) vs oracle ({}, {})",
            got.safety_probability, got.conditional_mean_payoff, best.primary, best.secondary
        )
    });
    let (f, g) = crate::brute::evaluate(model, &got.strategy, s0, Objective::SafetyMp)?;
    report.record(SAFETY_LEX, f == best.primary && g.as_ref() == Some(&best.secondary), || {
        format!("returned strategy evaluates to ({f}, {g:?})")
    });

    let fm = model.map_numbers(|x| x.to_f64());
    let gotf = safety::solve_safety_mp(&fm, s0, &bad, &opts)?;
    let (bf, bg) = (best.primary.to_f64(), best.secondary.to_f64());
    let okf = (gotf.safety_probability - bf).abs() <= 1e-6 && (gotf.conditional_mean_payoff - bg).abs() <= 1e-6;
    report.record(SAFETY_LEX_FLOAT, okf, || {
        format!("float ({}, {}) vs oracle ({bf}, {bg})", gotf.safety_probability, gotf.conditional_mean_payoff)
    });
    Ok(())
}

/// Oracle self-consistency: direct reach probabilities equal absorption into
/// target components, for every MD strategy.
pub fn check_oracle_consistency(model: &Mdp<Q>, report: &mut IdentityReport) -> Result<(), OracleError> {
    for sigma in md_strategies(model, crate::enumerate::DEFAULT_CAP)? {
        let chain = induced_chain(model, &sigma)?;
        let a = crate::analysis::analyse_chain(&chain, model.target_mask(), model.bad_mask())?;
        let via = crate::analysis::reach_via_absorption(&a, model.target_mask());
        report.record(ORACLE_SELF, via == a.reach_probability, || format!("strategy {:?}", sigma.actions()));
    }
    Ok(())
}

/// `|(1/n)·E(Reward_n | □¬Bad) − E(MP | □¬Bad)|` for each horizon.
pub fn finite_horizon_gaps(
    model: &Mdp<Q>,
    sigma: &MemorylessStrategy<Q>,
    s0: StateId,
    horizons: &[usize],
) -> Result<Vec<Q>, OracleError> {
    let bad = model.bad_set();
    let analysis = exact_chain_mp_analysis(&induced_chain(model, sigma)?, model.bad_mask())?;
    let limit = analysis.conditional_mean_payoff[s0.0].clone().ok_or(OracleError::Undefined)?;
    horizons
        .iter()
        .map(|&n| {
            let total = safety::expected_conditional_finite_reward(model, sigma, s0, &bad, n)?;
            let gap = total / Q::from_int(n as i64) - limit.clone();
            Ok(if gap < Q::zero() { -gap } else { gap })
        })
        .collect()
}
