use lexmdp_core::{ActionId, Mdp, MemorylessStrategy, Number};

use crate::OracleError;

pub const DEFAULT_CAP: u128 = 1_000_000;

/// Number of memoryless deterministic strategies: `∏_s |legal(s)|`.
pub fn count_md_strategies<N: Number>(model: &Mdp<N>) -> u128 {
    model
        .states()
        .map(|s| model.choices(s).len() as u128)
        .fold(1u128, |acc, k| acc.saturating_mul(k))
}

/// Odometer over `∏_s legal(s)`; state 0 is the most significant digit, so
/// strategies come out in lexicographic order of (state, action index).
#[derive(Clone, Debug)]
pub struct StrategyEnumeration {
    legal: Vec<Vec<ActionId>>,
    cursor: Vec<usize>,
    done: bool,
    count: u128,
}

impl StrategyEnumeration {
    pub fn count(&self) -> u128 {
        self.count
    }
}

impl Iterator for StrategyEnumeration {
    type Item = Vec<ActionId>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let current = self.cursor.iter().zip(&self.legal).map(|(&i, acts)| acts[i]).collect();
        self.done = true;
        for s in (0..self.cursor.len()).rev() {
            self.cursor[s] += 1;
            if self.cursor[s] < self.legal[s].len() {
                self.done = false;
                break;
            }
            self.cursor[s] = 0;
        }
        Some(current)
    }
}

pub fn enumerate_md_strategies<N: Number>(model: &Mdp<N>, cap: u128) -> Result<StrategyEnumeration, OracleError> {
    let count = count_md_strategies(model);
    if count > cap {
        return Err(OracleError::CapExceeded { count, cap });
    }
    let legal: Vec<Vec<ActionId>> = model
        .states()
        .map(|s| model.choices(s).iter().map(|t| t.action).collect())
        .collect();
    Ok(StrategyEnumeration { cursor: vec![0; legal.len()], done: count == 0, legal, count })
}

/// The enumeration as strategy objects.
pub fn md_strategies<N: Number>(
    model: &Mdp<N>,
    cap: u128,
) -> Result<impl Iterator<Item = MemorylessStrategy<N>>, OracleError> {
    Ok(enumerate_md_strategies(model, cap)?.map(MemorylessStrategy::deterministic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use lexmdp_core::fixtures::ab_model;
    use lexmdp_core::{MdpBuilder, Rational};

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn product_count_and_order() {
        let mut b = MdpBuilder::<Rational>::new();
        b.row("x", "a", &[("x", q(1))])
            .row("x", "b", &[("y", q(1))])
            .row("y", "a", &[("y", q(1))])
            .row("y", "b", &[("x", q(1))]);
        let m = b.build().unwrap();
        let all: Vec<Vec<ActionId>> = enumerate_md_strategies(&m, DEFAULT_CAP).unwrap().collect();
        let (a, bb) = (ActionId(0), ActionId(1));
        assert_eq!(all, vec![vec![a, a], vec![a, bb], vec![bb, a], vec![bb, bb]]);
    }

    #[test]
    fn single_action_model() {
        let mut b = MdpBuilder::<Rational>::new();
        b.row("x", "a", &[("x", q(1))]);
        let m = b.build().unwrap();
        assert_eq!(enumerate_md_strategies(&m, DEFAULT_CAP).unwrap().count(), 1);
    }

    #[test]
    fn ab_has_two() {
        let m = ab_model::<Rational>();
        assert_eq!(count_md_strategies(&m), 2);
        assert_eq!(md_strategies(&m, DEFAULT_CAP).unwrap().count(), 2);
    }

    #[test]
    fn cap_is_enforced() {
        let m = ab_model::<Rational>();
        assert_eq!(
            enumerate_md_strategies(&m, 1).unwrap_err(),
            OracleError::CapExceeded { count: 2, cap: 1 }
        );
    }
}
