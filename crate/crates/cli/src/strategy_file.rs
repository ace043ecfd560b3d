//! Strategy files: the chosen action per state plus the provenance header,
//! so strategies move between the solve commands and `simulate`.
//!
//! A deterministic choice is one entry without `probability`; a randomised
//! state lists one entry per action with `probability` strings summing to 1.

use std::collections::BTreeMap;

use lexmdp_core::number::parse_number;
use lexmdp_core::{ActionId, Mdp, MemorylessStrategy, Number, NumericValue, StateId};
use lexmdp_lake::bench::Provenance;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyChoice {
    pub state: String,
    pub action: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<String>,
}

impl StrategyChoice {
    pub fn list<N: Number>(model: &Mdp<N>, strategy: &MemorylessStrategy<N>) -> Vec<StrategyChoice> {
        let mut out = Vec::new();
        for s in model.states() {
            let dist = strategy.distribution(s);
            let single = dist.len() == 1;
            for (a, p) in dist {
                out.push(StrategyChoice {
                    state: model.state_name(s).into(),
                    action: model.action_name(*a).into(),
                    probability: (!single).then(|| NumericValue::of(p).render()),
                });
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyDocument {
    pub header: Provenance,
    /// Path of the model the strategy was computed for.
    pub model: String,
    pub choices: Vec<StrategyChoice>,
}

impl StrategyDocument {
    pub fn new<N: Number>(header: Provenance, model_path: &str, model: &Mdp<N>, strategy: &MemorylessStrategy<N>) -> Self {
        StrategyDocument { header, model: model_path.into(), choices: StrategyChoice::list(model, strategy) }
    }

    /// Resolves names against `model`; every state needs a choice.
    pub fn to_strategy<N: Number>(&self, model: &Mdp<N>) -> Result<MemorylessStrategy<N>, CliError> {
        let invalid = |m: String| CliError::Validation(m);
        let mut by_state: BTreeMap<usize, Vec<(ActionId, Option<N>)>> = BTreeMap::new();
        for (i, c) in self.choices.iter().enumerate() {
            let s = model.state_by_name(&c.state).ok_or_else(|| invalid(format!("choices[{i}]: unknown state `{}`", c.state)))?;
            let a = model
                .action_by_name(&c.action)
                .ok_or_else(|| invalid(format!("choices[{i}]: unknown action `{}`", c.action)))?;
            let p = match &c.probability {
                Some(text) => Some(parse_number::<N>(text).map_err(|e| invalid(format!("choices[{i}]: {e}")))?),
                None => None,
            };
            by_state.entry(s.0).or_default().push((a, p));
        }
        let mut dists = Vec::with_capacity(model.num_states());
        for s in model.states() {
            let entries = by_state
                .remove(&s.0)
                .ok_or_else(|| invalid(format!("no choice for state `{}`", model.state_name(s))))?;
            let dist = match entries.as_slice() {
                [(a, None)] => vec![(*a, N::one())],
                _ => entries
                    .into_iter()
                    .map(|(a, p)| {
                        p.map(|p| (a, p)).ok_or_else(|| {
                            invalid(format!("state `{}` lists several actions without probabilities", model.state_name(s)))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            };
            dists.push(dist);
        }
        let strategy = MemorylessStrategy::from_distributions(dists);
        strategy.validate_for(model)?;
        Ok(strategy)
    }
}

/// Deterministic strategy from `(state, action)` name pairs, for tests and tools.
pub fn deterministic_by_name<N: Number>(model: &Mdp<N>, pairs: &[(&str, &str)]) -> Option<MemorylessStrategy<N>> {
    let mut actions = vec![None; model.num_states()];
    for (s, a) in pairs {
        actions[model.state_by_name(s)?.0] = Some(model.action_by_name(a)?);
    }
    let actions: Option<Vec<ActionId>> = actions
        .into_iter()
        .enumerate()
        .map(|(i, a)| a.or_else(|| model.choices(StateId(i)).first().map(|t| t.action)))
        .collect();
    Some(MemorylessStrategy::deterministic(actions?))
}
