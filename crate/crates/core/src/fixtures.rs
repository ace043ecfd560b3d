//! Small hand-built models with known exact answers, used as regression vectors.

use crate::mdp::{Mdp, MdpBuilder};
use crate::number::Number;

fn q<N: Number>(n: i64, d: i64) -> N {
    N::from_ratio(n, d)
}

/// `s0` has `a: {t: 1/2, trap: 1/2}` and `b: {s0: 1/2, t: 1/4, trap: 1/4}`.
///
/// Both actions reach `t` with probability 1/2; conditioned on reaching it,
/// `a` takes 1 step and `b` takes 2 in expectation.
pub fn ab_model<N: Number>() -> Mdp<N> {
    let mut b = MdpBuilder::<N>::new();
    b.row("s0", "a", &[("t", q(1, 2)), ("trap", q(1, 2))])
        .row("s0", "b", &[("s0", q(1, 2)), ("t", q(1, 4)), ("trap", q(1, 4))])
        .sink("t", "a")
        .sink("trap", "a")
        .target("t")
        .bad("trap")
        .initial("s0");
    b.build().expect("fixture is well-formed")
}

/// `s0` has `a`: safe self-loop with reward 1, and `b`: reward 5,
/// `{s0: 1/2, bad: 1/2}`. Only `a` is safety-optimal.
pub fn safety_choice_model<N: Number>() -> Mdp<N> {
    let mut b = MdpBuilder::<N>::new();
    b.rewarded_row("s0", "a", q(1, 1), &[("s0", q(1, 1))])
        .rewarded_row("s0", "b", q(5, 1), &[("s0", q(1, 2)), ("bad", q(1, 2))])
        .sink("bad", "a")
        .bad("bad")
        .initial("s0");
    b.build().expect("fixture is well-formed")
}

/// `s0 --a (reward 1)--> {s1: 1/2, bad: 1/2}`, `s1` loops with reward 3.
pub fn safety_half_model<N: Number>() -> Mdp<N> {
    let mut b = MdpBuilder::<N>::new();
    b.rewarded_row("s0", "a", q(1, 1), &[("s1", q(1, 2)), ("bad", q(1, 2))])
        .rewarded_row("s1", "a", q(3, 1), &[("s1", q(1, 1))])
        .sink("bad", "a")
        .bad("bad")
        .initial("s0");
    b.build().expect("fixture is well-formed")
}

/// A transient state choosing between two classes with gains 1 and 3, plus a
/// risky shortcut into the gain-3 class.
pub fn safety_two_class_model<N: Number>() -> Mdp<N> {
    let mut b = MdpBuilder::<N>::new();
    b.rewarded_row("s0", "left", q(0, 1), &[("A", q(1, 1))])
        .rewarded_row("s0", "right", q(0, 1), &[("B", q(1, 1))])
        .rewarded_row("s0", "risky", q(2, 1), &[("B", q(1, 2)), ("bad", q(1, 2))])
        .rewarded_row("A", "stay", q(1, 1), &[("A", q(1, 1))])
        .rewarded_row("B", "stay", q(3, 1), &[("B", q(1, 1))])
        .sink("bad", "stay")
        .bad("bad")
        .initial("s0");
    b.build().expect("fixture is well-formed")
}
