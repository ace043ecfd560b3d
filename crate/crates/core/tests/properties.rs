use lexmdp_core::{
    finite_path_probability, induced_chain, ActionId, FinitePath, Mdp, MdpBuilder, MemorylessStrategy, Number,
    Rational, StateId,
};
use proptest::prelude::*;

/// Each state: 1..=3 actions, each a list of successor weights over `n` states.
type RawModel = Vec<Vec<Vec<u8>>>;

fn raw_model() -> impl Strategy<Value = RawModel> {
    (1usize..=5).prop_flat_map(|n| {
        prop::collection::vec(
            prop::collection::vec(prop::collection::vec(0u8..4, n).prop_filter("nonzero", |w| w.iter().any(|&x| x > 0)), 1..=3),
            n,
        )
    })
}

fn build(raw: &RawModel) -> Mdp<Rational> {
    let mut b = MdpBuilder::<Rational>::new();
    for s in 0..raw.len() {
        b.state(&format!("s{s}"));
    }
    for (s, actions) in raw.iter().enumerate() {
        for (a, weights) in actions.iter().enumerate() {
            let total: i64 = weights.iter().map(|&w| w as i64).sum();
            let succ: Vec<(String, Rational)> = weights
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0)
                .map(|(t, &w)| (format!("s{t}"), Rational::from_ratio(w as i64, total)))
                .collect();
            let succ: Vec<(&str, Rational)> = succ.iter().map(|(t, p)| (t.as_str(), p.clone())).collect();
            b.rewarded_row(&format!("s{s}"), &format!("a{a}"), Rational::from_int(a as i64 - 1), &succ);
        }
    }
    b.build().unwrap()
}

fn random_strategy(m: &Mdp<Rational>, weights: &[u8]) -> MemorylessStrategy<Rational> {
    let mut k = 0;
    let mut next = || {
        let w = weights[k % weights.len()] as i64;
        k += 1;
        w
    };
    let choice = m
        .states()
        .map(|s| {
            let acts: Vec<ActionId> = m.choices(s).iter().map(|t| t.action).collect();
            let mut ws: Vec<i64> = acts.iter().map(|_| next()).collect();
            if ws.iter().all(|&w| w == 0) {
                ws[0] = 1;
            }
            let total: i64 = ws.iter().sum();
            acts.into_iter()
                .zip(ws)
                .map(|(a, w)| (a, Rational::from_ratio(w, total)))
                .collect()
        })
        .collect();
    MemorylessStrategy::from_distributions(choice)
}

fn random_path(m: &Mdp<Rational>, strategy: &MemorylessStrategy<Rational>, picks: &[u8]) -> FinitePath {
    let mut path = FinitePath::new(StateId(0));
    for &p in picks {
        let s = path.last();
        let support: Vec<ActionId> = strategy.support(s).collect();
        let a = support[p as usize % support.len()];
        let succ: Vec<StateId> = m.transition(s, a).unwrap().support().collect();
        path.push(a, succ[(p as usize / 3) % succ.len()]);
    }
    path
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn induced_chain_is_stochastic(raw in raw_model(), w in prop::collection::vec(0u8..5, 1..16)) {
        let m = build(&raw);
        let sigma = random_strategy(&m, &w);
        sigma.validate_for(&m).unwrap();
        let chain = induced_chain(&m, &sigma).unwrap();
        prop_assert!(chain.is_stochastic());
        for s in m.states() {
            let total = chain.row(s).iter().fold(Rational::from_int(0), |acc, (_, p)| acc + p.clone());
            prop_assert_eq!(total, Rational::from_int(1));
        }
    }

    #[test]
    fn path_probability_splits(
        raw in raw_model(),
        w in prop::collection::vec(0u8..5, 1..16),
        picks in prop::collection::vec(any::<u8>(), 0..8),
        cut in any::<prop::sample::Index>(),
    ) {
        let m = build(&raw);
        let sigma = random_strategy(&m, &w);
        let path = random_path(&m, &sigma, &picks);
        let i = cut.index(path.len() + 1);
        let whole = finite_path_probability(&m, &sigma, &path).unwrap();
        let left = finite_path_probability(&m, &sigma, &path.prefix(i)).unwrap();
        let right = finite_path_probability(&m, &sigma, &path.suffix(i)).unwrap();
        prop_assert_eq!(whole.clone(), left * right);
        prop_assert!(whole > Rational::from_int(0));
    }

    #[test]
    fn exact_mode_stays_exact(raw in raw_model()) {
        let m = build(&raw);
        let f = m.map_numbers(|p: &Rational| p.to_f64());
        for s in m.states() {
            for t in m.choices(s) {
                for (succ, p) in &t.successors {
                    prop_assert!(p.to_rational().is_some());
                    prop_assert!((f.probability(s, t.action, *succ) - p.to_f64()).abs() < 1e-15);
                }
            }
        }
    }
}
