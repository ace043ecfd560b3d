use std::collections::BTreeMap;

use lexmdp_core::reach::{conditional_expected_length, solve_reach_length};
use lexmdp_core::{induced_chain, MemorylessStrategy, Rational, SolverOptions};
use lexmdp_lake::bench::summary_text;
use lexmdp_lake::encode::{legal_directions, state_name, STAY};
use lexmdp_lake::{
    baseline_reach_strategy, export_prism, generate_layout, graph_shortest_distance, layout_to_mdp, parse_layout,
    run_benchmark, BenchmarkConfig, Cell, Direction, SlipParams, TieBreak,
};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

#[test]
fn interior_wall_fraction_concentrates() {
    let fractions: Vec<f64> =
        (0..100).map(|i| generate_layout(1000 + i, 10, 10, 0.1, 0.1).unwrap().interior_wall_fraction()).collect();
    let mean = fractions.iter().sum::<f64>() / fractions.len() as f64;
    assert!((mean - 0.1).abs() <= 0.03, "mean interior wall fraction {mean}");
}

/// 3x3 open interior with a uniform strategy over legal moves: each chain row
/// is the average of the slip rows, computed here from cell coordinates.
#[test]
fn uniform_strategy_on_open_interior() {
    let layout = parse_layout("#####\n#S..#\n#...#\n#..T#\n#####").unwrap();
    let m = layout_to_mdp::<Rational>(&layout, SlipParams::default()).unwrap();
    let sigma = MemorylessStrategy::from_distributions(
        m.states()
            .map(|s| {
                let k = m.choices(s).len() as i64;
                m.choices(s).iter().map(|t| (t.action, q(1, k))).collect()
            })
            .collect(),
    );
    let chain = induced_chain(&m, &sigma).unwrap();
    assert!(chain.is_stochastic());
    let inside = |r: i64, c: i64| (1..=3).contains(&r) && (1..=3).contains(&c);
    for r in 1..=3i64 {
        for c in 1..=3i64 {
            let s = m.state_by_name(&state_name(r as usize, c as usize)).unwrap();
            if (r, c) == (3, 3) {
                assert_eq!(chain.row(s), &[(s, Rational::one())]);
                continue;
            }
            let moves: Vec<(i64, i64)> =
                [(-1, 0), (0, 1), (1, 0), (0, -1)].into_iter().filter(|&(dr, dc)| inside(r + dr, c + dc)).collect();
            let mut expected: BTreeMap<(i64, i64), Rational> = BTreeMap::new();
            for &(dr, dc) in &moves {
                let sides: Vec<(i64, i64)> =
                    [(dc, dr), (-dc, -dr)].into_iter().filter(|&(a, b)| inside(r + a, c + b)).collect();
                let total = 10 + sides.len() as i64;
                *expected.entry((r + dr, c + dc)).or_insert_with(Rational::zero) += q(10, total * moves.len() as i64);
                for (a, b) in sides {
                    *expected.entry((r + a, c + b)).or_insert_with(Rational::zero) += q(1, total * moves.len() as i64);
                }
            }
            for ((er, ec), p) in expected {
                let to = m.state_by_name(&state_name(er as usize, ec as usize)).unwrap();
                assert_eq!(chain.probability(s, to), p, "row ({r},{c}) -> ({er},{ec})");
            }
        }
    }
}

#[test]
fn open_grid_without_holes() {
    let cfg = BenchmarkConfig { count: 1, seed: 8, width: 5, height: 5, wall_prob: 0.0, hole_prob: 0.0, ..Default::default() };
    let report = run_benchmark::<Rational>(&cfg, &SolverOptions::default()).unwrap();
    let r = &report.records[0];
    assert_eq!(r.val, "1");
    assert!(r.ratio.unwrap() >= 1.0);
    assert!(report.consistent(), "{}", summary_text(&report));
}

#[test]
fn fully_open_interior_distance_is_manhattan() {
    for seed in 0..20 {
        let l = generate_layout(seed, 7, 6, 0.0, 0.0).unwrap();
        let (s, t) = (l.start(), l.target());
        let manhattan = s.0.abs_diff(t.0) + s.1.abs_diff(t.1);
        assert_eq!(graph_shortest_distance(&l), Some(manhattan));
    }
}

#[test]
fn prism_export_of_lake_has_one_command_per_legal_action() {
    let layout = generate_layout(42, 10, 10, 0.1, 0.1).unwrap();
    let m = layout_to_mdp::<Rational>(&layout, SlipParams::default()).unwrap();
    let text = export_prism(&m);
    let legal: usize = m.states().map(|s| m.legal_actions(s).unwrap().len()).sum();
    let commands = text.lines().filter(|l| l.contains("->")).count();
    let labels = text.lines().filter(|l| l.starts_with("label ")).count();
    assert_eq!(commands, legal);
    assert_eq!(labels, 2);
}

#[test]
fn reference_layout_detour() {
    // The hole below the corridor forces a detour; the length-optimal
    // strategy keeps the reach probability and is never slower.
    let layout = parse_layout("#######\n#S...T#\n#.O.###\n#.....#\n#######").unwrap();
    let m = layout_to_mdp::<Rational>(&layout, SlipParams::default()).unwrap();
    let opts = SolverOptions::default();
    let best = solve_reach_length(&m, m.initial(), &m.target_set(), &opts).unwrap();
    for rule in [TieBreak::FirstIndex, TieBreak::LastIndex, TieBreak::SeededRandom(1)] {
        let sigma = baseline_reach_strategy(&m, &m.target_set(), rule, &opts).unwrap();
        let v = conditional_expected_length(&m, &sigma, m.initial(), &m.target_set()).unwrap();
        assert!(best.conditional_expected_length <= v);
    }
    assert!(best.conditional_expected_length >= Rational::from_integer(4.into()));
}

fn arbitrary_layout() -> impl Strategy<Value = lexmdp_lake::GridLayout> {
    (any::<u64>(), 3usize..9, 3usize..9, 0.0f64..0.4, 0.0f64..0.3).prop_filter_map(
        "needs two free cells",
        |(seed, w, h, wp, hp)| generate_layout(seed, w, h, wp, hp).ok(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn slip_rows_are_exact_distributions(layout in arbitrary_layout()) {
        let m = layout_to_mdp::<Rational>(&layout, SlipParams::default()).unwrap();
        let stay = m.action_by_name(STAY).unwrap();
        for s in m.states() {
            let (r, c) = lexmdp_lake::encode::CellIndex::new(&layout).cell(s);
            for t in m.choices(s) {
                let sum = t.successors.iter().fold(Rational::zero(), |acc, (_, p)| acc + p);
                prop_assert_eq!(sum, Rational::one());
                if t.action == stay {
                    continue;
                }
                let d = Direction::ALL[t.action.0];
                let back = d.reverse();
                let (br, bc) = match back {
                    Direction::N => (r - 1, c),
                    Direction::S => (r + 1, c),
                    Direction::E => (r, c + 1),
                    Direction::W => (r, c - 1),
                };
                if let Some(bs) = m.state_by_name(&state_name(br, bc)) {
                    prop_assert!(t.probability(bs).is_zero(), "reverse move in row");
                }
            }
            if matches!(layout.cell(r, c), Cell::Free | Cell::Start) && !legal_directions(&layout, r, c).is_empty() {
                prop_assert_eq!(m.choices(s).len(), legal_directions(&layout, r, c).len());
            }
        }
    }

    #[test]
    fn distopt_dominates_baselines(layout in arbitrary_layout()) {
        let m = layout_to_mdp::<Rational>(&layout, SlipParams::default()).unwrap();
        let opts = SolverOptions::default();
        let s0 = m.initial();
        let target = m.target_set();
        let Ok(best) = solve_reach_length(&m, s0, &target, &opts) else {
            prop_assert!(graph_shortest_distance(&layout).is_none());
            return Ok(());
        };
        let d = graph_shortest_distance(&layout).unwrap();
        prop_assert!(best.conditional_expected_length >= Rational::from_integer(d.into()));
        for rule in [TieBreak::FirstIndex, TieBreak::LastIndex, TieBreak::SeededRandom(3)] {
            let sigma = baseline_reach_strategy(&m, &target, rule, &opts).unwrap();
            let v = conditional_expected_length(&m, &sigma, s0, &target).unwrap();
            prop_assert!(best.conditional_expected_length <= v);
        }
    }

    #[test]
    fn generation_is_pure(seed in any::<u64>()) {
        let a = generate_layout(seed, 10, 10, 0.1, 0.1).unwrap();
        let b = generate_layout(seed, 10, 10, 0.1, 0.1).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn start_state_is_initial() {
    let layout = generate_layout(5, 8, 8, 0.1, 0.1).unwrap();
    let m = layout_to_mdp::<Rational>(&layout, SlipParams::default()).unwrap();
    let (r, c) = layout.start();
    assert_eq!(m.state_name(m.initial()), state_name(r, c));
    assert_eq!(m.initial(), m.state_by_name(&state_name(r, c)).unwrap());
}
