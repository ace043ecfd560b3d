use lexmdp_core::fixtures::{safety_choice_model, safety_half_model, safety_two_class_model};
use lexmdp_core::safety::{
    conditional_mean_payoff, expected_conditional_finite_reward, max_mean_payoff, max_safety_values,
    opt_action_set_safety, prune_safety, solve_safety_mp, upre_partition,
};
use lexmdp_core::{ActionId, Mdp, MdpBuilder, MemorylessStrategy, Rational, SolveError, SolverOptions, StateId};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn id(m: &Mdp<Rational>, s: &str) -> StateId {
    m.state_by_name(s).unwrap()
}

fn act(m: &Mdp<Rational>, a: &str) -> ActionId {
    m.action_by_name(a).unwrap()
}

/// s0 -a-> s1 (safe loop); s0 -b-> {s1: 1/2, bad: 1/2}; s2 -a-> {s2: 1/2, bad: 1/2}.
fn four_state() -> Mdp<Rational> {
    let mut b = MdpBuilder::<Rational>::new();
    b.rewarded_row("s0", "a", q(0, 1), &[("s1", q(1, 1))])
        .rewarded_row("s0", "b", q(0, 1), &[("s1", q(1, 2)), ("bad", q(1, 2))])
        .rewarded_row("s1", "a", q(1, 1), &[("s1", q(1, 1))])
        .rewarded_row("s2", "a", q(0, 1), &[("s2", q(1, 2)), ("bad", q(1, 2))])
        .sink("bad", "a")
        .bad("bad")
        .initial("s0");
    b.build().unwrap()
}

#[test]
fn upre_levels_and_partition() {
    let m = four_state();
    let p = upre_partition(&m, &m.bad_set());
    assert_eq!(p.upre_levels[0], m.bad_mask().to_vec());
    assert!(p.upre_levels[1][id(&m, "s2").0]);
    assert!(!p.upre_levels[1][id(&m, "s0").0]);
    assert!(p.good[id(&m, "s0").0] && p.good[id(&m, "s1").0]);
    assert!(p.v[id(&m, "s2").0]);
    assert_eq!((p.count_good(), p.count_v(), p.count_bad()), (2, 1, 1));
    for s in m.states() {
        let member = [p.good[s.0], p.v[s.0], p.bad[s.0]];
        assert_eq!(member.iter().filter(|&&x| x).count(), 1);
    }
}

#[test]
fn safety_values_follow_partition() {
    let m = four_state();
    let v = max_safety_values(&m, &m.bad_set(), &opts()).unwrap();
    let p = upre_partition(&m, &m.bad_set());
    for s in m.states() {
        assert_eq!(*v.get(s) == q(1, 1), p.good[s.0]);
    }
    assert_eq!(v.get(id(&m, "bad")), &q(0, 1));
    // s2 loops with probability 1/2 each step and eventually falls
    assert_eq!(v.get(id(&m, "s2")), &q(0, 1));
}

#[test]
fn one_step_safety_value() {
    let m = safety_half_model::<Rational>();
    let v = max_safety_values(&m, &m.bad_set(), &opts()).unwrap();
    assert_eq!(v.get(id(&m, "s0")), &q(1, 2));
    assert_eq!(v.get(id(&m, "s1")), &q(1, 1));
}

#[test]
fn opt_on_good_states_stays_in_good() {
    let m = four_state();
    let v = max_safety_values(&m, &m.bad_set(), &opts()).unwrap();
    let opt = opt_action_set_safety(&m, &v, &opts());
    assert_eq!(opt.at(id(&m, "s0")), &[act(&m, "a")]);
    assert!(opt.contains(id(&m, "bad"), act(&m, "a")));
    let p = upre_partition(&m, &m.bad_set());
    for s in m.states().filter(|s| p.good[s.0]) {
        for &a in opt.at(s) {
            assert!(m.transition(s, a).unwrap().support().all(|t| p.good[t.0]));
        }
    }
}

#[test]
fn balancing_action_is_optimal() {
    // `mix` averages a value-1 and a value-0 state to exactly the value of `half`.
    let mut b = MdpBuilder::<Rational>::new();
    b.rewarded_row("s0", "half", q(0, 1), &[("g", q(1, 2)), ("bad", q(1, 2))])
        .rewarded_row("s0", "mix", q(0, 1), &[("g", q(1, 4)), ("h", q(1, 2)), ("bad", q(1, 4))])
        .rewarded_row("h", "a", q(0, 1), &[("g", q(1, 2)), ("bad", q(1, 2))])
        .rewarded_row("g", "a", q(1, 1), &[("g", q(1, 1))])
        .sink("bad", "a")
        .bad("bad");
    let m = b.build().unwrap();
    let v = max_safety_values(&m, &m.bad_set(), &opts()).unwrap();
    let opt = opt_action_set_safety(&m, &v, &opts());
    assert_eq!(v.get(id(&m, "s0")), &q(1, 2));
    assert!(opt.contains(id(&m, "s0"), act(&m, "mix")));
    assert!(opt.contains(id(&m, "s0"), act(&m, "half")));
}

#[test]
fn pruning_keeps_rewards_and_drops_bad() {
    let m = safety_half_model::<Rational>();
    let v = max_safety_values(&m, &m.bad_set(), &opts()).unwrap();
    let opt = opt_action_set_safety(&m, &v, &opts());
    let p = prune_safety(&m, &v, &opt, &opts()).unwrap();
    assert!(!p.contains_origin(id(&m, "bad")));
    let s0 = p.from_origin(id(&m, "s0")).unwrap();
    let s1 = p.from_origin(id(&m, "s1")).unwrap();
    assert_eq!(p.model.probability(s0, act(&m, "a"), s1), q(1, 1));
    assert_eq!(p.model.reward(s0, act(&m, "a")), q(1, 1));
    assert_eq!(p.model.reward(s1, act(&m, "a")), q(3, 1));
    assert!(p.model.has_rewards());
}

#[test]
fn mean_payoff_picks_larger_gain() {
    let m = safety_two_class_model::<Rational>();
    let v = max_safety_values(&m, &m.bad_set(), &opts()).unwrap();
    let opt = opt_action_set_safety(&m, &v, &opts());
    assert!(!opt.contains(id(&m, "s0"), act(&m, "risky")));
    let p = prune_safety(&m, &v, &opt, &opts()).unwrap();
    let sol = max_mean_payoff(&p, &opts()).unwrap();
    let s0 = p.from_origin(id(&m, "s0")).unwrap();
    assert_eq!(sol.strategy.action(s0), Some(act(&m, "right")));
    assert_eq!(sol.gain[s0.0], q(3, 1));
}

#[test]
fn loop_choice_by_reward() {
    let mut b = MdpBuilder::<Rational>::new();
    b.rewarded_row("s0", "one", q(1, 1), &[("s0", q(1, 1))])
        .rewarded_row("s0", "two", q(2, 1), &[("s0", q(1, 1))])
        .sink("bad", "one")
        .bad("bad");
    let m = b.build().unwrap();
    let r = solve_safety_mp(&m, StateId(0), &m.bad_set(), &opts()).unwrap();
    assert_eq!(r.strategy.action(StateId(0)), Some(act(&m, "two")));
    assert_eq!(r.conditional_mean_payoff, q(2, 1));
}

#[test]
fn choice_example_end_to_end() {
    let m = safety_choice_model::<Rational>();
    let r = solve_safety_mp(&m, id(&m, "s0"), &m.bad_set(), &opts()).unwrap();
    assert_eq!(r.opt.at(id(&m, "s0")), &[act(&m, "a")]);
    assert_eq!(r.strategy.action(id(&m, "s0")), Some(act(&m, "a")));
    assert_eq!(r.safety_probability, q(1, 1));
    assert_eq!(r.conditional_mean_payoff, q(1, 1));
}

#[test]
fn half_example_end_to_end() {
    let m = safety_half_model::<Rational>();
    let r = solve_safety_mp(&m, id(&m, "s0"), &m.bad_set(), &opts()).unwrap();
    assert_eq!(r.strategy.action(id(&m, "s0")), Some(act(&m, "a")));
    assert_eq!(r.safety_probability, q(1, 2));
    assert_eq!(r.conditional_mean_payoff, q(3, 1));
    let sigma = r.strategy.clone();
    assert_eq!(conditional_mean_payoff(&m, &sigma, id(&m, "s0"), &m.bad_set(), &opts()).unwrap(), q(3, 1));
}

#[test]
fn constant_reward_everywhere() {
    let mut b = MdpBuilder::<Rational>::new();
    b.rewarded_row("x", "a", q(7, 2), &[("y", q(1, 3)), ("x", q(2, 3))])
        .rewarded_row("x", "b", q(7, 2), &[("y", q(1, 1))])
        .rewarded_row("y", "a", q(7, 2), &[("x", q(1, 1))]);
    let m = b.build().unwrap();
    let r = solve_safety_mp(&m, StateId(0), &[], &opts()).unwrap();
    assert_eq!(r.safety_probability, q(1, 1));
    assert_eq!(r.conditional_mean_payoff, q(7, 2));
    let sigma = MemorylessStrategy::deterministic(vec![ActionId(0); 2]);
    assert_eq!(conditional_mean_payoff(&m, &sigma, StateId(0), &[], &opts()).unwrap(), q(7, 2));
    for n in 1..5 {
        let f = expected_conditional_finite_reward(&m, &sigma, StateId(0), &[], n).unwrap();
        assert_eq!(f, q(7 * n as i64, 2));
    }
}

#[test]
fn absorption_into_two_classes() {
    let mut b = MdpBuilder::<Rational>::new();
    b.rewarded_row("s0", "a", q(0, 1), &[("A", q(1, 4)), ("B", q(3, 4))])
        .rewarded_row("A", "a", q(1, 1), &[("A", q(1, 1))])
        .rewarded_row("B", "a", q(3, 1), &[("B", q(1, 1))])
        .sink("bad", "a")
        .bad("bad");
    let m = b.build().unwrap();
    let sigma = MemorylessStrategy::deterministic(vec![ActionId(0); m.num_states()]);
    let g = conditional_mean_payoff(&m, &sigma, StateId(0), &m.bad_set(), &opts()).unwrap();
    assert_eq!(g, q(5, 2));
}

#[test]
fn finite_horizon_rewards() {
    let m = safety_half_model::<Rational>();
    let a = act(&m, "a");
    let sigma = MemorylessStrategy::deterministic(vec![a; m.num_states()]);
    let s0 = id(&m, "s0");
    assert_eq!(expected_conditional_finite_reward(&m, &sigma, s0, &m.bad_set(), 2).unwrap(), q(4, 1));
    assert_eq!(expected_conditional_finite_reward(&m, &sigma, s0, &m.bad_set(), 1).unwrap(), q(1, 1));
    let loop_only = id(&m, "s1");
    assert_eq!(
        expected_conditional_finite_reward(&m, &sigma, loop_only, &m.bad_set(), 1).unwrap(),
        q(3, 1)
    );
    assert_eq!(
        expected_conditional_finite_reward(&m, &sigma, id(&m, "bad"), &m.bad_set(), 2),
        Err(SolveError::ConditioningNull)
    );
}

#[test]
fn precondition_errors() {
    let m = safety_choice_model::<Rational>();
    let b = MemorylessStrategy::deterministic(vec![act(&m, "b"), ActionId(0)]);
    assert_eq!(
        conditional_mean_payoff(&m, &b, id(&m, "s0"), &m.bad_set(), &opts()),
        Err(SolveError::NonOptimalAction { state: id(&m, "s0"), action: act(&m, "b") })
    );
    let r = solve_safety_mp(&m, id(&m, "bad"), &m.bad_set(), &opts());
    assert_eq!(r.unwrap_err(), SolveError::SafetyUnachievable);

    let mut nb = MdpBuilder::<Rational>::new();
    nb.row("x", "a", &[("x", q(1, 1))]);
    let plain = nb.build().unwrap();
    assert_eq!(
        solve_safety_mp(&plain, StateId(0), &[], &opts()).unwrap_err(),
        SolveError::MissingRewards
    );
}

#[test]
fn float_mode_agrees_on_fixtures() {
    let m = safety_two_class_model::<f64>();
    let r = solve_safety_mp(&m, StateId(0), &m.bad_set(), &opts()).unwrap();
    assert!((r.safety_probability - 1.0).abs() < 1e-9);
    assert!((r.conditional_mean_payoff - 3.0).abs() < 1e-9);
    let m = safety_half_model::<f64>();
    let r = solve_safety_mp(&m, StateId(0), &m.bad_set(), &opts()).unwrap();
    assert!((r.safety_probability - 0.5).abs() < 1e-9);
    assert!((r.conditional_mean_payoff - 3.0).abs() < 1e-9);
}
