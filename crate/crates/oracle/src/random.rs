//! Random small MDPs with exact rational probabilities, and random strategies
//! restricted to a given action set.

use lexmdp_core::{ActionId, Mdp, MdpBuilder, MemorylessStrategy, OptSet, Rational};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstanceConfig {
    /// Total states, sinks included.
    pub max_states: usize,
    pub max_actions: usize,
    pub max_denominator: i64,
    pub min_reward: i64,
    pub max_reward: i64,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        InstanceConfig { max_states: 5, max_actions: 3, max_denominator: 8, min_reward: -2, max_reward: 3 }
    }
}

/// A random MDP over states `s0..s{n-1}` with initial state `s0`, a target
/// sink `t`, usually a bad sink `x`, and rewards on every choice. `s0` can
/// always reach `t` in the transition graph, so both the reach and the safety
/// value of `s0` are positive.
pub fn random_instance<R: Rng>(rng: &mut R, cfg: &InstanceConfig) -> Mdp<Rational> {
    assert!(cfg.max_states >= 2 && cfg.max_actions >= 1 && cfg.max_denominator >= 1);
    loop {
        if let Some(m) = attempt(rng, cfg) {
            return m;
        }
    }
}

fn attempt<R: Rng>(rng: &mut R, cfg: &InstanceConfig) -> Option<Mdp<Rational>> {
    let n = rng.gen_range(2..=cfg.max_states);
    let with_bad = n >= 3 && rng.gen_bool(0.8);
    let inner = if with_bad { n - 2 } else { n - 1 };
    let mut names: Vec<String> = (0..inner).map(|i| format!("s{i}")).collect();
    names.push("t".into());
    if with_bad {
        names.push("x".into());
    }
    let mut b = MdpBuilder::<Rational>::new();
    for name in &names {
        b.state(name);
    }
    let reward = |rng: &mut R| Rational::from_integer(rng.gen_range(cfg.min_reward..=cfg.max_reward).into());
    for name in names.iter().take(inner) {
        let k = rng.gen_range(1..=cfg.max_actions);
        for a in 0..k {
            let succ = random_row(rng, n, cfg.max_denominator);
            let succ: Vec<(&str, Rational)> = succ.into_iter().map(|(t, p)| (names[t].as_str(), p)).collect();
            let r = reward(rng);
            b.rewarded_row(name, &format!("a{a}"), r, &succ);
        }
    }
    let r = reward(rng);
    b.rewarded_row("t", "a0", r, &[("t", Rational::one())]).target("t");
    if with_bad {
        let r = reward(rng);
        b.rewarded_row("x", "a0", r, &[("x", Rational::one())]).bad("x");
    }
    b.initial("s0");
    let m = b.build().ok()?;
    reaches_target(&m).then_some(m)
}

/// Distribution with denominator `d ≤ max_den` over distinct successors.
fn random_row<R: Rng>(rng: &mut R, n: usize, max_den: i64) -> Vec<(usize, Rational)> {
    let d = rng.gen_range(1..=max_den);
    let k = rng.gen_range(1..=(d as usize).min(n));
    let mut states: Vec<usize> = (0..n).collect();
    states.shuffle(rng);
    states.truncate(k);
    // k positive parts summing to d: k-1 distinct cuts in 1..d.
    let mut cuts: Vec<i64> = (1..d).collect();
    cuts.shuffle(rng);
    cuts.truncate(k - 1);
    cuts.sort_unstable();
    cuts.push(d);
    let mut prev = 0;
    let mut row = Vec::with_capacity(k);
    for (s, c) in states.into_iter().zip(cuts) {
        row.push((s, Rational::new((c - prev).into(), d.into())));
        prev = c;
    }
    row
}

fn reaches_target(m: &Mdp<Rational>) -> bool {
    let mut seen = m.target_mask().to_vec();
    let graph = m.successor_graph();
    let mut changed = true;
    while changed {
        changed = false;
        for (s, succ) in graph.iter().enumerate() {
            if !seen[s] && succ.iter().any(|&t| seen[t]) {
                seen[s] = true;
                changed = true;
            }
        }
    }
    seen[m.initial().0]
}

/// A memoryless strategy playing only actions of `allowed`. With
/// `full_support`, every allowed action gets positive weight; otherwise some
/// weights may be zero (at least one stays positive).
pub fn random_strategy_within<R: Rng>(
    rng: &mut R,
    model: &Mdp<Rational>,
    allowed: &OptSet,
    full_support: bool,
) -> MemorylessStrategy<Rational> {
    let choice = model
        .states()
        .map(|s| {
            let acts: &[ActionId] = allowed.at(s);
            assert!(!acts.is_empty(), "no allowed action at {s}");
            let lo = if full_support { 1 } else { 0 };
            let mut w: Vec<i64> = acts.iter().map(|_| rng.gen_range(lo..=3)).collect();
            if w.iter().all(|x| *x == 0) {
                let i = rng.gen_range(0..w.len());
                w[i] = 1;
            }
            let total: i64 = w.iter().sum();
            acts.iter()
                .zip(w)
                .filter(|(_, x)| !x.is_zero())
                .map(|(&a, x)| (a, Rational::new(x.into(), total.into())))
                .collect()
        })
        .collect();
    MemorylessStrategy::from_distributions(choice)
}

/// A deterministic strategy picking uniformly among `allowed` actions.
pub fn random_deterministic_within<R: Rng>(
    rng: &mut R,
    model: &Mdp<Rational>,
    allowed: &OptSet,
) -> MemorylessStrategy<Rational> {
    MemorylessStrategy::deterministic(model.states().map(|s| *allowed.at(s).choose(rng).expect("nonempty")).collect())
}
