//! Seeded Monte-Carlo rollouts in `f64`. A smoke test only; the exact
//! analyses are the reference.

use lexmdp_core::{Mdp, MemorylessStrategy, Number, StateId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimulationConfig {
    pub episodes: usize,
    /// Episodes that have not hit the target after this many steps count as
    /// non-reaching, which biases the conditional length downwards.
    pub horizon: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationStats {
    pub episodes: usize,
    pub horizon: usize,
    pub seed: u64,
    pub reach_count: usize,
    pub reach_frequency: f64,
    pub reach_standard_error: f64,
    /// Mean steps to the target over reaching episodes.
    pub mean_conditional_length: Option<f64>,
    pub length_standard_error: Option<f64>,
    pub safe_count: usize,
    pub safety_frequency: f64,
    pub safety_standard_error: f64,
    /// Average reward per step over the horizon, among safe episodes.
    pub mean_reward: Option<f64>,
    pub reward_standard_error: Option<f64>,
}

struct Sampler {
    /// Per state: cumulative action weights and, per action, cumulative successor weights.
    actions: Vec<Vec<(f64, Vec<(f64, usize)>, f64)>>,
    absorbing: Vec<bool>,
}

impl Sampler {
    fn new<N: Number>(model: &Mdp<N>, strategy: &MemorylessStrategy<N>) -> Self {
        let mut actions = Vec::with_capacity(model.num_states());
        let mut absorbing = Vec::with_capacity(model.num_states());
        for s in model.states() {
            let mut acc = 0.0;
            let mut row = Vec::new();
            let mut only_self = true;
            for (a, w) in strategy.distribution(s) {
                acc += w.to_f64();
                let t = model.transition(s, *a).expect("strategy validated against model");
                let mut cum = 0.0;
                let succ = t
                    .successors
                    .iter()
                    .map(|(to, p)| {
                        cum += p.to_f64();
                        only_self &= *to == s;
                        (cum, to.0)
                    })
                    .collect();
                row.push((acc, succ, t.reward.to_f64()));
            }
            let single_action = row.len() == 1;
            absorbing.push(only_self && single_action);
            actions.push(row);
        }
        Sampler { actions, absorbing }
    }

    fn pick<T>(items: &[T], key: impl Fn(&T) -> f64, u: f64) -> &T {
        let total = key(items.last().expect("nonempty distribution"));
        let x = u * total;
        items.iter().find(|it| x < key(it)).unwrap_or_else(|| items.last().unwrap())
    }

    /// One step from `s`: (reward, next state).
    fn step(&self, s: usize, rng: &mut ChaCha8Rng) -> (f64, usize) {
        let (_, succ, reward) = Self::pick(&self.actions[s], |a| a.0, rng.gen::<f64>());
        let (_, next) = Self::pick(succ, |x| x.0, rng.gen::<f64>());
        (*reward, *next)
    }
}

fn mean_and_se(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Some((mean, (var / n).sqrt()))
}

fn bernoulli_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

pub fn simulate<N: Number>(
    model: &Mdp<N>,
    strategy: &MemorylessStrategy<N>,
    s0: StateId,
    config: SimulationConfig,
) -> SimulationStats {
    assert!(config.episodes >= 1 && config.horizon >= 1, "episodes and horizon must be positive");
    let sampler = Sampler::new(model, strategy);
    let target = model.target_mask();
    let bad = model.bad_mask();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut lengths = Vec::new();
    let mut safe_rewards = Vec::new();
    for _ in 0..config.episodes {
        let mut s = s0.0;
        let mut hit_target = if target[s] { Some(0) } else { None };
        let mut safe = !bad[s];
        let mut total = 0.0;
        let mut step = 0;
        while step < config.horizon {
            if sampler.absorbing[s] {
                total += sampler.actions[s][0].2 * (config.horizon - step) as f64;
                break;
            }
            let (r, next) = sampler.step(s, &mut rng);
            total += r;
            step += 1;
            s = next;
            if hit_target.is_none() && target[s] {
                hit_target = Some(step);
            }
            safe &= !bad[s];
        }
        if let Some(k) = hit_target {
            lengths.push(k as f64);
        }
        if safe {
            safe_rewards.push(total / config.horizon as f64);
        }
    }
    let n = config.episodes;
    let reach_frequency = lengths.len() as f64 / n as f64;
    let safety_frequency = safe_rewards.len() as f64 / n as f64;
    let length = mean_and_se(&lengths);
    let reward = if model.has_rewards() { mean_and_se(&safe_rewards) } else { None };
    SimulationStats {
        episodes: n,
        horizon: config.horizon,
        seed: config.seed,
        reach_count: lengths.len(),
        reach_frequency,
        reach_standard_error: bernoulli_se(reach_frequency, n),
        mean_conditional_length: length.map(|x| x.0),
        length_standard_error: length.map(|x| x.1),
        safe_count: safe_rewards.len(),
        safety_frequency,
        safety_standard_error: bernoulli_se(safety_frequency, n),
        mean_reward: reward.map(|x| x.0),
        reward_standard_error: reward.map(|x| x.1),
    }
}
