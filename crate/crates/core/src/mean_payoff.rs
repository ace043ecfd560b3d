//! Multichain policy iteration for the expected mean payoff (gain) criterion.

use crate::error::SolveError;
use crate::graph;
use crate::linalg::LinearSystem;
use crate::mdp::{Mdp, StateId};
use crate::number::Number;
use crate::options::SolverOptions;
use crate::strategy::MemorylessStrategy;

/// Gain and bias of a fixed deterministic policy.
#[derive(Clone, Debug)]
pub struct GainBias<N> {
    pub gain: Vec<N>,
    pub bias: Vec<N>,
}

/// Solves `(I−P)g = 0`, `g + (I−P)h = r` with `h = 0` at the smallest state
/// of each recurrent class.
pub fn evaluate_gain_bias<N: Number>(rows: &[Vec<(StateId, N)>], rewards: &[N]) -> Result<GainBias<N>, SolveError> {
    let n = rows.len();
    let adjacency: Vec<Vec<usize>> = rows
        .iter()
        .map(|r| r.iter().map(|(s, _)| s.0).collect())
        .collect();
    let classes = graph::bottom_components(&adjacency);
    let mut gain = vec![N::zero(); n];
    let mut bias = vec![N::zero(); n];
    let mut recurrent = vec![false; n];
    for class in &classes {
        // unknowns: g_C at slot 0, h(s) for the other members at slots 1..
        let mut slot = vec![usize::MAX; n];
        for (i, &s) in class.iter().enumerate() {
            slot[s] = i;
            recurrent[s] = true;
        }
        let mut sys = LinearSystem::new(class.len());
        for (i, &s) in class.iter().enumerate() {
            sys.add(i, 0, N::one());
            if i != 0 {
                sys.add(i, i, N::one());
            }
            for (t, p) in &rows[s] {
                let j = slot[t.0];
                if j != 0 {
                    sys.add(i, j, -p.clone());
                }
            }
            sys.add_rhs(i, rewards[s].clone());
        }
        let x = sys.solve()?;
        for (i, &s) in class.iter().enumerate() {
            gain[s] = x[0].clone();
            bias[s] = if i == 0 { N::zero() } else { x[i].clone() };
        }
    }
    let transient: Vec<usize> = (0..n).filter(|&s| !recurrent[s]).collect();
    if transient.is_empty() {
        return Ok(GainBias { gain, bias });
    }
    let mut slot = vec![usize::MAX; n];
    for (i, &s) in transient.iter().enumerate() {
        slot[s] = i;
    }
    let system = |rhs: &dyn Fn(usize) -> N| {
        let mut sys = LinearSystem::new(transient.len());
        for (i, &s) in transient.iter().enumerate() {
            sys.add(i, i, N::one());
            sys.add_rhs(i, rhs(s));
            for (t, p) in &rows[s] {
                if slot[t.0] != usize::MAX {
                    sys.add(i, slot[t.0], -p.clone());
                }
            }
        }
        sys
    };
    let recurrent_part = |s: usize, v: &[N]| -> N {
        rows[s]
            .iter()
            .filter(|(t, _)| recurrent[t.0])
            .fold(N::zero(), |acc, (t, p)| acc + p.clone() * v[t.0].clone())
    };
    let g_t = system(&|s| recurrent_part(s, &gain)).solve()?;
    for (i, &s) in transient.iter().enumerate() {
        gain[s] = g_t[i].clone();
    }
    let h_t = system(&|s| rewards[s].clone() - gain[s].clone() + recurrent_part(s, &bias)).solve()?;
    for (i, &s) in transient.iter().enumerate() {
        bias[s] = h_t[i].clone();
    }
    Ok(GainBias { gain, bias })
}

/// Result of [`max_mean_payoff`].
#[derive(Clone, Debug)]
pub struct MeanPayoffSolution<N> {
    pub strategy: MemorylessStrategy<N>,
    pub gain: Vec<N>,
    pub bias: Vec<N>,
    pub iterations: usize,
}

/// Deterministic strategy maximising the expected mean payoff from every state.
///
/// Multichain policy iteration: improve the gain first (`max_a Σ P·g`); only
/// when no state can improve its gain, improve the bias among gain-optimal
/// actions (`max_a r + Σ P·h`). The current action is kept whenever it is
/// among the maximisers; otherwise the lowest action index wins.
pub fn max_mean_payoff<N: Number>(model: &Mdp<N>, opts: &SolverOptions) -> Result<MeanPayoffSolution<N>, SolveError> {
    if !model.has_rewards() {
        return Err(SolveError::MissingRewards);
    }
    let tol = opts.tolerances.eta;
    let mut policy: Vec<usize> = vec![0; model.num_states()];
    let mut rounds = 0;
    loop {
        rounds += 1;
        let rows: Vec<Vec<(StateId, N)>> = model
            .states()
            .map(|s| model.choices(s)[policy[s.0]].successors.clone())
            .collect();
        let rewards: Vec<N> = model
            .states()
            .map(|s| model.choices(s)[policy[s.0]].reward.clone())
            .collect();
        let GainBias { gain, bias } = evaluate_gain_bias(&rows, &rewards)?;

        let mut next = policy.clone();
        let mut gain_changed = false;
        let mut gain_optimal: Vec<Vec<usize>> = Vec::with_capacity(model.num_states());
        for s in model.states() {
            let values: Vec<N> = model.choices(s).iter().map(|t| t.expectation(&gain)).collect();
            let best = values
                .iter()
                .cloned()
                .fold(values[0].clone(), |m, v| if v > m { v } else { m });
            let maximisers: Vec<usize> = (0..values.len()).filter(|&i| values[i].near(&best, tol)).collect();
            if !maximisers.contains(&policy[s.0]) {
                next[s.0] = maximisers[0];
                gain_changed = true;
            }
            gain_optimal.push(maximisers);
        }
        if !gain_changed {
            for s in model.states() {
                let choices = model.choices(s);
                let score = |i: usize| choices[i].reward.clone() + choices[i].expectation(&bias);
                let candidates = &gain_optimal[s.0];
                let scores: Vec<N> = candidates.iter().map(|&i| score(i)).collect();
                let best = scores
                    .iter()
                    .cloned()
                    .fold(scores[0].clone(), |m, v| if v > m { v } else { m });
                let current = score(policy[s.0]);
                if best.exceeds(&current, tol) {
                    let k = scores.iter().position(|v| v.near(&best, tol)).unwrap_or(0);
                    next[s.0] = candidates[k];
                }
            }
        }
        if next == policy || rounds >= opts.max_iterations {
            let actions = model.states().map(|s| model.choices(s)[policy[s.0]].action).collect();
            return Ok(MeanPayoffSolution {
                strategy: MemorylessStrategy::deterministic(actions),
                gain,
                bias,
                iterations: rounds,
            });
        }
        policy = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::MdpBuilder;
    use crate::number::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn single_loop_gain_is_reward() {
        let mut b = MdpBuilder::<Rational>::new();
        b.rewarded_row("s", "a", q(7, 2), &[("s", q(1, 1))]);
        let sol = max_mean_payoff(&b.build().unwrap(), &SolverOptions::default()).unwrap();
        assert_eq!(sol.gain[0], q(7, 2));
    }

    #[test]
    fn picks_larger_loop() {
        let mut b = MdpBuilder::<Rational>::new();
        b.rewarded_row("s", "one", q(1, 1), &[("s", q(1, 1))])
            .rewarded_row("s", "two", q(2, 1), &[("s", q(1, 1))]);
        let m = b.build().unwrap();
        let sol = max_mean_payoff(&m, &SolverOptions::default()).unwrap();
        assert_eq!(sol.gain[0], q(2, 1));
        assert_eq!(sol.strategy.action(StateId(0)), m.action_by_name("two"));
    }

    #[test]
    fn transient_state_chooses_better_class() {
        // s0 --a--> A (loop reward 1), s0 --b--> B (loop reward 3)
        let mut b = MdpBuilder::<Rational>::new();
        b.rewarded_row("s0", "a", q(0, 1), &[("A", q(1, 1))])
            .rewarded_row("s0", "b", q(0, 1), &[("B", q(1, 1))])
            .rewarded_row("A", "a", q(1, 1), &[("A", q(1, 1))])
            .rewarded_row("B", "a", q(3, 1), &[("B", q(1, 1))]);
        let m = b.build().unwrap();
        let sol = max_mean_payoff(&m, &SolverOptions::default()).unwrap();
        assert_eq!(sol.gain[0], q(3, 1));
        assert_eq!(sol.strategy.action(StateId(0)), m.action_by_name("b"));
    }

    #[test]
    fn bias_step_prefers_higher_transient_reward() {
        // both actions lead to the same loop; b collects 5 on the way
        let mut b = MdpBuilder::<Rational>::new();
        b.rewarded_row("s0", "a", q(0, 1), &[("L", q(1, 1))])
            .rewarded_row("s0", "b", q(5, 1), &[("L", q(1, 1))])
            .rewarded_row("L", "a", q(1, 1), &[("L", q(1, 1))]);
        let m = b.build().unwrap();
        let sol = max_mean_payoff(&m, &SolverOptions::default()).unwrap();
        assert_eq!(sol.gain[0], q(1, 1));
        assert_eq!(sol.strategy.action(StateId(0)), m.action_by_name("b"));
    }

    #[test]
    fn periodic_class_gain() {
        let mut b = MdpBuilder::<Rational>::new();
        b.rewarded_row("x", "a", q(0, 1), &[("y", q(1, 1))])
            .rewarded_row("y", "a", q(4, 1), &[("x", q(1, 1))]);
        let sol = max_mean_payoff(&b.build().unwrap(), &SolverOptions::default()).unwrap();
        assert_eq!(sol.gain, vec![q(2, 1), q(2, 1)]);
    }
}
