//! Reach-optimal strategies picked without looking at path length, standing
//! in for the output of a plain probabilistic model checker.

use lexmdp_core::reach::{max_reach_values, opt_action_set, prune_reach};
use lexmdp_core::{ActionId, Mdp, MemorylessStrategy, Number, SolveError, SolverOptions, StateId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TieBreak {
    FirstIndex,
    LastIndex,
    SeededRandom(u64),
}

impl TieBreak {
    pub fn label(self) -> &'static str {
        match self {
            TieBreak::FirstIndex => "first",
            TieBreak::LastIndex => "last",
            TieBreak::SeededRandom(_) => "rand",
        }
    }
}

struct Picker {
    rule: TieBreak,
    rng: ChaCha8Rng,
}

impl Picker {
    fn new(rule: TieBreak) -> Self {
        let seed = match rule {
            TieBreak::SeededRandom(s) => s,
            _ => 0,
        };
        Picker { rule, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn pick(&mut self, candidates: &[ActionId]) -> ActionId {
        match self.rule {
            TieBreak::FirstIndex => candidates[0],
            TieBreak::LastIndex => candidates[candidates.len() - 1],
            TieBreak::SeededRandom(_) => candidates[self.rng.gen_range(0..candidates.len())],
        }
    }
}

/// A deterministic reach-optimal strategy over the original state space.
///
/// Each state with positive value first gets an Opt action chosen by `rule`.
/// States whose choice cannot reach the target in the pruned model (an Opt
/// self-loop, say) are then switched, again by `rule`, to an Opt action with
/// a successor that already reaches it, until every kept state does. Every
/// state of the pruned model then reaches the target almost surely, which is
/// exactly reach-optimality in the original model. States of value 0 play
/// their lowest-index action.
pub fn baseline_reach_strategy<N: Number>(
    model: &Mdp<N>,
    target: &[StateId],
    rule: TieBreak,
    opts: &SolverOptions,
) -> Result<MemorylessStrategy<N>, SolveError> {
    let values = max_reach_values(model, target, opts)?;
    let opt = opt_action_set(model, &values, opts);
    let pruned = prune_reach(model, &values, &opt, opts)?;
    let pm = &pruned.model;
    let n = pm.num_states();
    let mut target_mask = vec![false; n];
    for &t in target {
        if let Some(p) = pruned.from_origin(t) {
            target_mask[p.0] = true;
        }
    }
    let mut picker = Picker::new(rule);
    let mut choice: Vec<ActionId> = pm
        .states()
        .map(|s| {
            let acts: Vec<ActionId> = pm.choices(s).iter().map(|t| t.action).collect();
            picker.pick(&acts)
        })
        .collect();
    loop {
        let reaching = reaching_under(pm, &target_mask, &choice);
        if reaching.iter().all(|&r| r) {
            break;
        }
        // Switch every stuck state adjacent to the reaching region in one sweep.
        let mut progressed = false;
        for s in 0..n {
            if reaching[s] {
                continue;
            }
            let candidates: Vec<ActionId> = pm
                .choices(StateId(s))
                .iter()
                .filter(|t| t.support().any(|x| reaching[x.0]))
                .map(|t| t.action)
                .collect();
            if !candidates.is_empty() {
                choice[s] = picker.pick(&candidates);
                progressed = true;
            }
        }
        if !progressed {
            return Err(SolveError::Internal("pruned state cannot reach the target".into()));
        }
    }
    let restricted = MemorylessStrategy::deterministic(choice);
    Ok(pruned.lift_strategy(model, &restricted))
}

/// States reaching the target in the graph of the chosen actions.
fn reaching_under<N: Number>(model: &Mdp<N>, target: &[bool], choice: &[ActionId]) -> Vec<bool> {
    let n = model.num_states();
    let mut reach = target.to_vec();
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..n {
            if reach[s] {
                continue;
            }
            let t = model.transition(StateId(s), choice[s]).expect("chosen action is legal");
            if t.support().any(|x| reach[x.0]) {
                reach[s] = true;
                changed = true;
            }
        }
    }
    reach
}

#[cfg(test)]
mod tests {
    use super::*;
    use lexmdp_core::fixtures::ab_model;
    use lexmdp_core::reach::{conditional_expected_length, reach_probability_under, solve_reach_length};
    use lexmdp_core::{MdpBuilder, Rational};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn last_index_on_ab_is_slow() {
        let m = ab_model::<Rational>();
        let opts = SolverOptions::default();
        let s0 = m.state_by_name("s0").unwrap();
        let sigma = baseline_reach_strategy(&m, &m.target_set(), TieBreak::LastIndex, &opts).unwrap();
        assert_eq!(sigma.action(s0), m.action_by_name("b"));
        assert_eq!(conditional_expected_length(&m, &sigma, s0, &m.target_set()).unwrap(), q(2, 1));
        let first = baseline_reach_strategy(&m, &m.target_set(), TieBreak::FirstIndex, &opts).unwrap();
        assert_eq!(first.action(s0), m.action_by_name("a"));
    }

    #[test]
    fn unique_opt_matches_length_optimal() {
        let mut b = MdpBuilder::<Rational>::new();
        b.row("s0", "go", &[("s1", q(1, 2)), ("t", q(1, 2))])
            .row("s0", "die", &[("x", q(1, 1))])
            .row("s1", "go", &[("t", q(1, 1))])
            .sink("t", "go")
            .sink("x", "go")
            .target("t");
        let m = b.build().unwrap();
        let opts = SolverOptions::default();
        let best = solve_reach_length(&m, StateId(0), &m.target_set(), &opts).unwrap();
        for rule in [TieBreak::FirstIndex, TieBreak::LastIndex, TieBreak::SeededRandom(4)] {
            let sigma = baseline_reach_strategy(&m, &m.target_set(), rule, &opts).unwrap();
            assert_eq!(sigma, best.strategy);
        }
    }

    #[test]
    fn opt_self_loop_is_repaired() {
        // `wait` keeps the value (1 = 1) but never reaches the target.
        let mut b = MdpBuilder::<Rational>::new();
        b.row("s0", "go", &[("t", q(1, 1))])
            .row("s0", "wait", &[("s0", q(1, 1))])
            .sink("t", "go")
            .target("t");
        let m = b.build().unwrap();
        let opts = SolverOptions::default();
        let sigma = baseline_reach_strategy(&m, &m.target_set(), TieBreak::LastIndex, &opts).unwrap();
        assert_eq!(sigma.action(StateId(0)), m.action_by_name("go"));
        assert_eq!(reach_probability_under(&m, &sigma, &m.target_set()).unwrap()[0], q(1, 1));
    }

    #[test]
    fn seeded_rule_is_repeatable() {
        let m = ab_model::<Rational>();
        let opts = SolverOptions::default();
        let a = baseline_reach_strategy(&m, &m.target_set(), TieBreak::SeededRandom(17), &opts).unwrap();
        let b = baseline_reach_strategy(&m, &m.target_set(), TieBreak::SeededRandom(17), &opts).unwrap();
        assert_eq!(a, b);
    }
}
