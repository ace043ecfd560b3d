//! Lexicographic optimum by exhaustive search over memoryless deterministic
//! strategies, each evaluated with the exact chain analysis.

use std::cmp::Ordering;

use lexmdp_core::{induced_chain, Mdp, MemorylessStrategy, Number, StateId};

use crate::analysis::{exact_chain_mp_analysis, exact_chain_reach_analysis};
use crate::enumerate::md_strategies;
use crate::OracleError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Maximise `Pr(◇T)`, then minimise `E(len_T | ◇T)`.
    ReachLength,
    /// Maximise `Pr(□¬Bad)`, then maximise `E(MP | □¬Bad)`.
    SafetyMp,
}

#[derive(Clone, Debug)]
pub struct LexOptimum<N> {
    pub primary: N,
    pub secondary: N,
    /// Every enumerated strategy attaining the optimum; ties are not broken.
    pub best: Vec<MemorylessStrategy<N>>,
    pub evaluated: usize,
}

/// `(primary, secondary)` of one strategy from `s0`; `secondary` is `None`
/// when the conditioning event is null.
pub fn evaluate<N: Number>(
    model: &Mdp<N>,
    strategy: &MemorylessStrategy<N>,
    s0: StateId,
    objective: Objective,
) -> Result<(N, Option<N>), OracleError> {
    let chain = induced_chain(model, strategy)?;
    match objective {
        Objective::ReachLength => {
            let r = exact_chain_reach_analysis(&chain, model.target_mask())?;
            Ok((r.reach_probability[s0.0].clone(), r.conditional_expected_length[s0.0].clone()))
        }
        Objective::SafetyMp => {
            if !model.has_rewards() {
                return Err(OracleError::MissingRewards);
            }
            let r = exact_chain_mp_analysis(&chain, model.bad_mask())?;
            Ok((r.safety_probability[s0.0].clone(), r.conditional_mean_payoff[s0.0].clone()))
        }
    }
}

fn compare<N: Number>(x: &N, y: &N, tol: f64) -> Ordering {
    if x.near(y, tol) {
        Ordering::Equal
    } else if x < y {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Lexicographic optimum from `s0`. Values within `tol` count as ties (exact
/// mode ignores `tol`).
pub fn lexicographic_brute_force<N: Number>(
    model: &Mdp<N>,
    s0: StateId,
    objective: Objective,
    cap: u128,
    tol: f64,
) -> Result<LexOptimum<N>, OracleError> {
    let mut best: Option<(N, N)> = None;
    let mut winners = Vec::new();
    let mut evaluated = 0;
    for sigma in md_strategies(model, cap)? {
        evaluated += 1;
        let (f, g) = evaluate(model, &sigma, s0, objective)?;
        let Some(g) = g else { continue };
        let ord = match &best {
            None => Ordering::Greater,
            Some((bf, bg)) => match compare(&f, bf, tol) {
                Ordering::Equal => match objective {
                    Objective::ReachLength => compare(bg, &g, tol),
                    Objective::SafetyMp => compare(&g, bg, tol),
                },
                o => o,
            },
        };
        match ord {
            Ordering::Greater => {
                best = Some((f, g));
                winners = vec![sigma];
            }
            Ordering::Equal => winners.push(sigma),
            Ordering::Less => {}
        }
    }
    let (primary, secondary) = best.ok_or(OracleError::Undefined)?;
    Ok(LexOptimum { primary, secondary, best: winners, evaluated })
}

/// Per-state maximum of the primary objective over all MD strategies.
pub fn primary_values<N: Number>(model: &Mdp<N>, objective: Objective, cap: u128) -> Result<Vec<N>, OracleError> {
    let n = model.num_states();
    let mut best: Vec<N> = vec![N::zero(); n];
    for sigma in md_strategies(model, cap)? {
        let chain = induced_chain(model, &sigma)?;
        let values = match objective {
            Objective::ReachLength => exact_chain_reach_analysis(&chain, model.target_mask())?.reach_probability,
            Objective::SafetyMp => exact_chain_mp_analysis(&chain, model.bad_mask())?.safety_probability,
        };
        for (b, v) in best.iter_mut().zip(values) {
            if v > *b {
                *b = v;
            }
        }
    }
    Ok(best)
}
