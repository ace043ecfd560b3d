//! Exact analysis of a fixed Markov chain: reachability, conditional length,
//! bottom components, stationary gains and absorption.

use lexmdp_core::{MarkovChain, Number, StateId};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::visit::{Bfs, Reversed};

use crate::dense;
use crate::OracleError;

/// Everything the oracle knows about one chain.
#[derive(Clone, Debug)]
pub struct ChainAnalysis<N> {
    pub reach_probability: Vec<N>,
    /// `None` where the target is reached with probability 0.
    pub conditional_expected_length: Vec<Option<N>>,
    /// Bottom components, each sorted, ordered by smallest member.
    pub bsccs: Vec<Vec<usize>>,
    /// Stationary distribution of each component, aligned with its members.
    pub stationary: Vec<Vec<N>>,
    /// Long-run average reward of each component; `None` without rewards.
    pub gains: Vec<Option<N>>,
    /// `absorption[s][c]`: probability of ending in component `c` from `s`.
    pub absorption: Vec<Vec<N>>,
    pub safety_probability: Vec<N>,
    /// `E(MP | □¬Bad)` where the conditioning event has positive probability
    /// and the chain carries rewards.
    pub conditional_mean_payoff: Vec<Option<N>>,
}

/// Reach probability and conditional expected length per state.
#[derive(Clone, Debug, PartialEq)]
pub struct ReachAnalysis<N> {
    pub reach_probability: Vec<N>,
    pub conditional_expected_length: Vec<Option<N>>,
}

/// Safety probability and conditional mean payoff per state.
#[derive(Clone, Debug)]
pub struct MeanPayoffAnalysis<N> {
    pub bsccs: Vec<Vec<usize>>,
    pub stationary: Vec<Vec<N>>,
    pub gains: Vec<Option<N>>,
    pub absorption: Vec<Vec<N>>,
    pub safety_probability: Vec<N>,
    pub conditional_mean_payoff: Vec<Option<N>>,
}

fn to_graph<N: Number>(chain: &MarkovChain<N>) -> DiGraph<(), ()> {
    let mut g = DiGraph::new();
    let nodes: Vec<NodeIndex> = (0..chain.num_states()).map(|_| g.add_node(())).collect();
    for s in 0..chain.num_states() {
        for (t, p) in chain.row(StateId(s)) {
            if !p.is_zero() {
                g.add_edge(nodes[s], nodes[t.0], ());
            }
        }
    }
    g
}

fn can_reach(g: &DiGraph<(), ()>, goal: &[bool]) -> Vec<bool> {
    let mut seen = vec![false; goal.len()];
    let rev = Reversed(g);
    for (s, &is_goal) in goal.iter().enumerate() {
        if !is_goal || seen[s] {
            continue;
        }
        let mut bfs = Bfs::new(rev, NodeIndex::new(s));
        while let Some(v) = bfs.next(rev) {
            seen[v.index()] = true;
        }
    }
    seen
}

/// Solves `x(s) = Σ_t P(s,t)·x(t) + c(s)` over `unknown` states, with `x`
/// fixed by `known` elsewhere.
fn solve_over<N: Number>(
    chain: &MarkovChain<N>,
    unknown: &[usize],
    constant: impl Fn(usize) -> N,
    known: impl Fn(usize) -> N,
) -> Result<Vec<N>, OracleError> {
    let n = chain.num_states();
    let mut slot = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        slot[s] = i;
    }
    let m = unknown.len();
    let mut a = vec![vec![N::zero(); m]; m];
    let mut b = vec![N::zero(); m];
    for (i, &s) in unknown.iter().enumerate() {
        a[i][i] = N::one();
        b[i] = constant(s);
        for (t, p) in chain.row(StateId(s)) {
            if slot[t.0] != usize::MAX {
                a[i][slot[t.0]] = a[i][slot[t.0]].clone() - p.clone();
            } else {
                b[i] = b[i].clone() + p.clone() * known(t.0);
            }
        }
    }
    let x = dense::solve(a, b).ok_or(OracleError::Singular)?;
    let mut out: Vec<N> = (0..n).map(&known).collect();
    for (i, &s) in unknown.iter().enumerate() {
        out[s] = x[i].clone();
    }
    Ok(out)
}

pub fn exact_chain_reach_analysis<N: Number>(
    chain: &MarkovChain<N>,
    target: &[bool],
) -> Result<ReachAnalysis<N>, OracleError> {
    let n = chain.num_states();
    let g = to_graph(chain);
    let reaching = can_reach(&g, target);
    let unknown: Vec<usize> = (0..n).filter(|&s| reaching[s] && !target[s]).collect();
    let one_if_target = |s: usize| if target[s] { N::one() } else { N::zero() };
    let p = solve_over(chain, &unknown, |_| N::zero(), one_if_target)?;
    // w(s) = E(len·1[◇T]) satisfies w(s) = Σ P(s,t)·(p(t) + w(t)), 0 on T and p = 0.
    let expected_p = |s: usize| {
        chain
            .row(StateId(s))
            .iter()
            .fold(N::zero(), |acc, (t, q)| acc + q.clone() * p[t.0].clone())
    };
    let w = solve_over(chain, &unknown, expected_p, |_| N::zero())?;
    let conditional_expected_length = (0..n)
        .map(|s| if p[s].is_zero() { None } else { Some(w[s].clone() / p[s].clone()) })
        .collect();
    Ok(ReachAnalysis { reach_probability: p, conditional_expected_length })
}

pub fn exact_chain_mp_analysis<N: Number>(
    chain: &MarkovChain<N>,
    bad: &[bool],
) -> Result<MeanPayoffAnalysis<N>, OracleError> {
    let n = chain.num_states();
    let g = to_graph(chain);
    let mut bsccs: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|v| v.index()).collect();
            c.sort_unstable();
            c
        })
        .filter(|c| {
            c.iter().all(|&s| g.neighbors(NodeIndex::new(s)).all(|t| c.binary_search(&t.index()).is_ok()))
        })
        .collect();
    bsccs.sort();

    let mut component_of = vec![usize::MAX; n];
    for (i, c) in bsccs.iter().enumerate() {
        for &s in c {
            component_of[s] = i;
        }
    }
    let transient: Vec<usize> = (0..n).filter(|&s| component_of[s] == usize::MAX).collect();

    let mut stationary = Vec::with_capacity(bsccs.len());
    let mut gains = Vec::with_capacity(bsccs.len());
    for c in &bsccs {
        let pi = stationary_of(chain, c)?;
        let gain = chain.rewards().map(|r| {
            c.iter()
                .zip(&pi)
                .fold(N::zero(), |acc, (&s, w)| acc + w.clone() * r[s].clone())
        });
        stationary.push(pi);
        gains.push(gain);
    }

    let mut absorption = vec![vec![N::zero(); bsccs.len()]; n];
    for (ci, _) in bsccs.iter().enumerate() {
        let inside = |s: usize| if component_of[s] == ci { N::one() } else { N::zero() };
        let y = solve_over(chain, &transient, |_| N::zero(), inside)?;
        for s in 0..n {
            absorption[s][ci] = y[s].clone();
        }
    }

    let unsafe_component: Vec<bool> = bsccs.iter().map(|c| c.iter().any(|&s| bad[s])).collect();
    let mut safety_probability = Vec::with_capacity(n);
    let mut conditional_mean_payoff = Vec::with_capacity(n);
    for s in 0..n {
        let mut safe = N::zero();
        let mut weighted: Option<N> = Some(N::zero());
        for (ci, a) in absorption[s].iter().enumerate() {
            if unsafe_component[ci] {
                continue;
            }
            safe = safe + a.clone();
            weighted = match (weighted, &gains[ci]) {
                (Some(acc), Some(g)) => Some(acc + a.clone() * g.clone()),
                _ => None,
            };
        }
        // A visit to a non-sink bad state already breaks safety.
        let touches_bad = bad[s];
        if touches_bad {
            safe = N::zero();
        }
        let cond = if safe.is_zero() { None } else { weighted.map(|w| w / safe.clone()) };
        safety_probability.push(safe);
        conditional_mean_payoff.push(cond);
    }
    Ok(MeanPayoffAnalysis { bsccs, stationary, gains, absorption, safety_probability, conditional_mean_payoff })
}

/// Stationary distribution of a closed class: `π = π·P`, `Σπ = 1`.
fn stationary_of<N: Number>(chain: &MarkovChain<N>, class: &[usize]) -> Result<Vec<N>, OracleError> {
    let m = class.len();
    let pos = |s: usize| class.binary_search(&s).ok();
    // Unknowns π_j; equation j (j < m-1): Σ_i π_i·P(i,j) − π_j = 0; last: Σ π = 1.
    let mut a = vec![vec![N::zero(); m]; m];
    let mut b = vec![N::zero(); m];
    for (i, &s) in class.iter().enumerate() {
        for (t, p) in chain.row(StateId(s)) {
            if let Some(j) = pos(t.0) {
                if j + 1 < m {
                    a[j][i] = a[j][i].clone() + p.clone();
                }
            }
        }
    }
    for j in 0..m.saturating_sub(1) {
        a[j][j] = a[j][j].clone() - N::one();
    }
    for i in 0..m {
        a[m - 1][i] = N::one();
    }
    b[m - 1] = N::one();
    dense::solve(a, b).ok_or(OracleError::Singular)
}

/// Both analyses at once.
pub fn analyse_chain<N: Number>(
    chain: &MarkovChain<N>,
    target: &[bool],
    bad: &[bool],
) -> Result<ChainAnalysis<N>, OracleError> {
    let reach = exact_chain_reach_analysis(chain, target)?;
    let mp = exact_chain_mp_analysis(chain, bad)?;
    Ok(ChainAnalysis {
        reach_probability: reach.reach_probability,
        conditional_expected_length: reach.conditional_expected_length,
        bsccs: mp.bsccs,
        stationary: mp.stationary,
        gains: mp.gains,
        absorption: mp.absorption,
        safety_probability: mp.safety_probability,
        conditional_mean_payoff: mp.conditional_mean_payoff,
    })
}

/// Reach probability recomputed as the absorption mass of components that
/// contain target states. Targets are sinks, so this must equal the direct
/// linear-system answer.
pub fn reach_via_absorption<N: Number>(analysis: &ChainAnalysis<N>, target: &[bool]) -> Vec<N> {
    analysis
        .absorption
        .iter()
        .map(|row| {
            row.iter()
                .zip(&analysis.bsccs)
                .filter(|(_, c)| c.iter().any(|&s| target[s]))
                .fold(N::zero(), |acc, (a, _)| acc + a.clone())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use lexmdp_core::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn chain(rows: Vec<Vec<(usize, Rational)>>, rewards: Option<Vec<Rational>>) -> MarkovChain<Rational> {
        MarkovChain::new(
            rows.into_iter().map(|r| r.into_iter().map(|(t, p)| (StateId(t), p)).collect()).collect(),
            rewards,
        )
    }

    #[test]
    fn direct_step_to_target() {
        let c = chain(vec![vec![(1, q(1, 1))], vec![(1, q(1, 1))]], None);
        let r = exact_chain_reach_analysis(&c, &[false, true]).unwrap();
        assert_eq!(r.reach_probability[0], q(1, 1));
        assert_eq!(r.conditional_expected_length[0], Some(q(1, 1)));
        assert_eq!(r.conditional_expected_length[1], Some(q(0, 1)));
    }

    #[test]
    fn geometric_retry() {
        let c = chain(vec![vec![(0, q(9, 10)), (1, q(1, 10))], vec![(1, q(1, 1))]], None);
        let r = exact_chain_reach_analysis(&c, &[false, true]).unwrap();
        assert_eq!(r.reach_probability[0], q(1, 1));
        assert_eq!(r.conditional_expected_length[0], Some(q(10, 1)));
    }

    #[test]
    fn one_step_conditional() {
        let c = chain(
            vec![vec![(1, q(1, 2)), (2, q(1, 2))], vec![(1, q(1, 1))], vec![(2, q(1, 1))]],
            None,
        );
        let r = exact_chain_reach_analysis(&c, &[false, true, false]).unwrap();
        assert_eq!(r.reach_probability[0], q(1, 2));
        assert_eq!(r.conditional_expected_length[0], Some(q(1, 1)));
        assert_eq!(r.conditional_expected_length[2], None);
    }

    #[test]
    fn self_loop_gain() {
        let c = chain(vec![vec![(0, q(1, 1))]], Some(vec![q(-3, 2)]));
        let a = exact_chain_mp_analysis(&c, &[false]).unwrap();
        assert_eq!(a.gains, vec![Some(q(-3, 2))]);
        assert_eq!(a.safety_probability[0], q(1, 1));
        assert_eq!(a.conditional_mean_payoff[0], Some(q(-3, 2)));
    }

    #[test]
    fn period_two_gain() {
        let c = chain(vec![vec![(1, q(1, 1))], vec![(0, q(1, 1))]], Some(vec![q(0, 1), q(4, 1)]));
        let a = exact_chain_mp_analysis(&c, &[false, false]).unwrap();
        assert_eq!(a.stationary, vec![vec![q(1, 2), q(1, 2)]]);
        assert_eq!(a.gains, vec![Some(q(2, 1))]);
    }

    #[test]
    fn absorbed_into_bad() {
        let c = chain(vec![vec![(1, q(1, 1))], vec![(1, q(1, 1))]], Some(vec![q(1, 1), q(0, 1)]));
        let a = exact_chain_mp_analysis(&c, &[false, true]).unwrap();
        assert_eq!(a.safety_probability[0], q(0, 1));
        assert_eq!(a.conditional_mean_payoff[0], None);
    }

    #[test]
    fn absorption_sums_to_one_and_matches_reach() {
        let c = chain(
            vec![
                vec![(0, q(1, 3)), (1, q(1, 3)), (2, q(1, 3))],
                vec![(1, q(1, 1))],
                vec![(3, q(1, 1))],
                vec![(2, q(1, 1))],
            ],
            Some(vec![q(0, 1), q(1, 1), q(2, 1), q(6, 1)]),
        );
        let target = [false, true, false, false];
        let a = analyse_chain(&c, &target, &[false; 4]).unwrap();
        for row in &a.absorption {
            assert_eq!(row.iter().fold(q(0, 1), |x, y| x + y.clone()), q(1, 1));
        }
        assert_eq!(reach_via_absorption(&a, &target), a.reach_probability);
        // half into the {2,3} cycle with gain 4, half into the gain-1 sink
        assert_eq!(a.conditional_mean_payoff[0], Some(q(5, 2)));
    }
}
