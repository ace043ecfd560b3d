//! Exact evaluation of fixed Markov chains: reachability, expected lengths,
//! stationary distributions and gains.

use crate::chain::MarkovChain;
use crate::error::SolveError;
use crate::graph;
use crate::linalg::LinearSystem;
use crate::mdp::StateId;
use crate::number::Number;

type Rows<N> = [Vec<(StateId, N)>];

fn adjacency<N>(rows: &Rows<N>) -> Vec<Vec<usize>> {
    rows.iter()
        .map(|r| r.iter().map(|(s, _)| s.0).collect())
        .collect()
}

/// `Pr(◇target)` from every state. States that cannot reach the target in
/// the chain graph get 0, which keeps the remaining system nonsingular.
pub fn reach_probabilities<N: Number>(rows: &Rows<N>, target: &[bool]) -> Result<Vec<N>, SolveError> {
    let n = rows.len();
    let can_reach = graph::backward_reachable(&adjacency(rows), target);
    let unknown: Vec<usize> = (0..n).filter(|&s| can_reach[s] && !target[s]).collect();
    let mut slot = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        slot[s] = i;
    }
    let mut sys = LinearSystem::new(unknown.len());
    for (i, &s) in unknown.iter().enumerate() {
        sys.add(i, i, N::one());
        for (t, p) in &rows[s] {
            if target[t.0] {
                sys.add_rhs(i, p.clone());
            } else if slot[t.0] != usize::MAX {
                sys.add(i, slot[t.0], -p.clone());
            }
        }
    }
    let x = sys.solve()?;
    Ok((0..n)
        .map(|s| {
            if target[s] {
                N::one()
            } else if slot[s] != usize::MAX {
                x[slot[s]].clone()
            } else {
                N::zero()
            }
        })
        .collect())
}

/// `w(s) = E(len_T · 1_{◇T})` from every state, given `p = Pr(◇T)`:
/// `w(s) = Σ P(s,s')·(p(s') + w(s'))`, `w = 0` on the target and where `p = 0`.
pub fn weighted_lengths<N: Number>(rows: &Rows<N>, target: &[bool], p: &[N]) -> Result<Vec<N>, SolveError> {
    let n = rows.len();
    let unknown: Vec<usize> = (0..n).filter(|&s| !target[s] && !p[s].is_zero()).collect();
    let mut slot = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        slot[s] = i;
    }
    let mut sys = LinearSystem::new(unknown.len());
    for (i, &s) in unknown.iter().enumerate() {
        sys.add(i, i, N::one());
        for (t, q) in &rows[s] {
            sys.add_rhs(i, q.clone() * p[t.0].clone());
            if slot[t.0] != usize::MAX {
                sys.add(i, slot[t.0], -q.clone());
            }
        }
    }
    let x = sys.solve()?;
    Ok((0..n)
        .map(|s| if slot[s] == usize::MAX { N::zero() } else { x[slot[s]].clone() })
        .collect())
}

/// Expected number of steps to `target` for a chain that reaches it almost
/// surely from every state: `v = 0` on target, `v = 1 + P·v` elsewhere.
pub fn expected_steps<N: Number>(rows: &Rows<N>, target: &[bool]) -> Result<Vec<N>, SolveError> {
    let n = rows.len();
    let unknown: Vec<usize> = (0..n).filter(|&s| !target[s]).collect();
    let mut slot = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        slot[s] = i;
    }
    let mut sys = LinearSystem::new(unknown.len());
    for (i, &s) in unknown.iter().enumerate() {
        sys.add(i, i, N::one());
        sys.add_rhs(i, N::one());
        for (t, q) in &rows[s] {
            if slot[t.0] != usize::MAX {
                sys.add(i, slot[t.0], -q.clone());
            }
        }
    }
    let x = sys.solve()?;
    Ok((0..n)
        .map(|s| if slot[s] == usize::MAX { N::zero() } else { x[slot[s]].clone() })
        .collect())
}

/// Stationary distribution of a closed class: `π = π·P`, `Σπ = 1`.
/// Returned in the order of `class`.
pub fn stationary_distribution<N: Number>(rows: &Rows<N>, class: &[usize]) -> Result<Vec<N>, SolveError> {
    let k = class.len();
    let mut slot = vec![usize::MAX; rows.len()];
    for (i, &s) in class.iter().enumerate() {
        slot[s] = i;
    }
    // Equations: for j ≥ 1, Σ_i π_i (P_ij − δ_ij) = 0; row 0 replaced by Σπ = 1.
    let mut sys = LinearSystem::new(k);
    for i in 0..k {
        sys.add(0, i, N::one());
    }
    sys.add_rhs(0, N::one());
    for (i, &s) in class.iter().enumerate() {
        for (t, p) in &rows[s] {
            let j = slot[t.0];
            if j != usize::MAX && j != 0 {
                sys.add(j, i, p.clone());
            }
        }
        if i != 0 {
            sys.add(i, i, -N::one());
        }
    }
    sys.solve()
}

/// Long-run analysis of a rewarded chain: per-state gain (expected mean payoff).
#[derive(Clone, Debug)]
pub struct GainAnalysis<N> {
    pub bottom_components: Vec<Vec<usize>>,
    pub component_gains: Vec<N>,
    /// `absorption[c][s]`: probability that `s` is absorbed into component `c`.
    pub absorption: Vec<Vec<N>>,
    pub gain: Vec<N>,
}

/// Gains via bottom components, their stationary distributions and absorption
/// probabilities.
pub fn gain_analysis<N: Number>(chain: &MarkovChain<N>) -> Result<GainAnalysis<N>, SolveError> {
    let rewards = chain.rewards().ok_or(SolveError::MissingRewards)?;
    let rows = chain.rows();
    let n = rows.len();
    let bottoms = graph::bottom_components(&chain.graph());
    let mut component_gains = Vec::with_capacity(bottoms.len());
    let mut absorption = Vec::with_capacity(bottoms.len());
    let mut gain = vec![N::zero(); n];
    for comp in &bottoms {
        let pi = stationary_distribution(rows, comp)?;
        let g = comp
            .iter()
            .zip(&pi)
            .fold(N::zero(), |acc, (&s, w)| acc + w.clone() * rewards[s].clone());
        let mut mask = vec![false; n];
        for &s in comp {
            mask[s] = true;
        }
        let absorb = reach_probabilities(rows, &mask)?;
        for s in 0..n {
            gain[s] = gain[s].clone() + absorb[s].clone() * g.clone();
        }
        component_gains.push(g);
        absorption.push(absorb);
    }
    Ok(GainAnalysis {
        bottom_components: bottoms,
        component_gains,
        absorption,
        gain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn s(i: usize) -> StateId {
        StateId(i)
    }

    #[test]
    fn geometric_reach_and_length() {
        // s0: {s0: 9/10, T: 1/10}
        let rows = vec![vec![(s(0), q(9, 10)), (s(1), q(1, 10))], vec![(s(1), q(1, 1))]];
        let t = [false, true];
        let p = reach_probabilities(&rows, &t).unwrap();
        assert_eq!(p, vec![q(1, 1), q(1, 1)]);
        let w = weighted_lengths(&rows, &t, &p).unwrap();
        assert_eq!(w[0], q(10, 1));
        assert_eq!(expected_steps(&rows, &t).unwrap()[0], q(10, 1));
    }

    #[test]
    fn period_two_stationary() {
        let rows = vec![vec![(s(1), q(1, 1))], vec![(s(0), q(1, 1))]];
        let pi = stationary_distribution(&rows, &[0, 1]).unwrap();
        assert_eq!(pi, vec![q(1, 2), q(1, 2)]);
        let chain = MarkovChain::new(rows, Some(vec![q(0, 1), q(4, 1)]));
        let g = gain_analysis(&chain).unwrap();
        assert_eq!(g.gain, vec![q(2, 1), q(2, 1)]);
    }

    #[test]
    fn absorption_weighted_gain() {
        // s0 -> {a: 1/4, b: 3/4}; a loops reward 1, b loops reward 3
        let rows = vec![
            vec![(s(1), q(1, 4)), (s(2), q(3, 4))],
            vec![(s(1), q(1, 1))],
            vec![(s(2), q(1, 1))],
        ];
        let chain = MarkovChain::new(rows, Some(vec![q(0, 1), q(1, 1), q(3, 1)]));
        let g = gain_analysis(&chain).unwrap();
        assert_eq!(g.gain[0], q(5, 2));
        assert_eq!(g.bottom_components, vec![vec![1], vec![2]]);
    }
}
