//! The JSON model format.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "mode": "exact",
//!   "states": ["s0", "t"],
//!   "actions": ["go"],
//!   "transitions": [{"state": "s0", "action": "go", "successor": "t", "probability": "1"}],
//!   "rewards": [{"state": "s0", "action": "go", "reward": "-1/2"}],
//!   "labels": {"init": "s0", "target": ["t"], "bad": []}
//! }
//! ```
//!
//! Probabilities and rewards are strings holding a fraction (`"1/12"`), an
//! integer or a decimal (`"0.25"`); decimals are read exactly in exact mode.
//! `rewards` may be omitted, in which case the model has none; listed
//! rewards default the unlisted choices to 0. Extra label sets beyond
//! `target` and `bad` may be added under any name.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use lexmdp_core::number::{parse_number, NumericMode};
use lexmdp_core::{ActionId, Mdp, MdpBuilder, Number, NumericValue, StateId};
use lexmdp_lake::bench::Provenance;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format_version: u32,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<Provenance>,
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub transitions: Vec<TransitionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rewards: Option<Vec<RewardEntry>>,
    pub labels: Labels,
}

fn default_mode() -> String {
    NumericMode::Exact.as_str().into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionEntry {
    pub state: String,
    pub action: String,
    pub successor: String,
    pub probability: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardEntry {
    pub state: String,
    pub action: String,
    pub reward: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    pub init: String,
    #[serde(default)]
    pub target: Vec<String>,
    #[serde(default)]
    pub bad: Vec<String>,
    #[serde(flatten)]
    pub other: BTreeMap<String, Vec<String>>,
}

impl ModelDocument {
    pub fn numeric_mode(&self) -> Result<NumericMode, CliError> {
        self.mode.parse().map_err(CliError::Validation)
    }

    /// State names of the label set `name`.
    pub fn label(&self, name: &str) -> Result<&[String], CliError> {
        match name {
            "target" => Ok(&self.labels.target),
            "bad" => Ok(&self.labels.bad),
            other => self
                .labels
                .other
                .get(other)
                .map(Vec::as_slice)
                .ok_or_else(|| CliError::Validation(format!("no label set named `{other}`"))),
        }
    }

    /// States of the label set `name`, resolved against `model`.
    pub fn label_states<N: Number>(&self, model: &Mdp<N>, name: &str) -> Result<Vec<StateId>, CliError> {
        self.label(name)?
            .iter()
            .map(|s| {
                model
                    .state_by_name(s)
                    .ok_or_else(|| CliError::Validation(format!("label `{name}` names unknown state `{s}`")))
            })
            .collect()
    }

    /// Builds and validates the model in the requested arithmetic.
    pub fn to_mdp<N: Number>(&self) -> Result<Mdp<N>, CliError> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::Validation(format!(
                "unknown format version {} (supported: {FORMAT_VERSION})",
                self.format_version
            )));
        }
        self.numeric_mode()?;
        let invalid = |m: String| Err(CliError::Validation(m));
        let mut b = MdpBuilder::<N>::new();
        let mut states = HashMap::new();
        for name in &self.states {
            if states.insert(name.as_str(), b.state(name)).is_some() {
                return invalid(format!("duplicate state `{name}`"));
            }
        }
        let mut actions = HashMap::new();
        for name in &self.actions {
            if actions.insert(name.as_str(), b.action(name)).is_some() {
                return invalid(format!("duplicate action `{name}`"));
            }
        }
        let state = |name: &str, what: &str| -> Result<StateId, CliError> {
            states.get(name).copied().ok_or_else(|| CliError::Validation(format!("{what}: unknown state `{name}`")))
        };
        let action = |name: &str, what: &str| -> Result<ActionId, CliError> {
            actions.get(name).copied().ok_or_else(|| CliError::Validation(format!("{what}: unknown action `{name}`")))
        };
        let mut seen = HashSet::new();
        for (i, t) in self.transitions.iter().enumerate() {
            let what = format!("transitions[{i}]");
            let (s, a, to) = (state(&t.state, &what)?, action(&t.action, &what)?, state(&t.successor, &what)?);
            if !seen.insert((s, a, to)) {
                return invalid(format!("{what}: duplicate entry ({}, {}, {})", t.state, t.action, t.successor));
            }
            let p = parse_number::<N>(&t.probability).map_err(|e| CliError::Validation(format!("{what}: {e}")))?;
            b.add_transition(s, a, to, p);
        }
        if let Some(rewards) = &self.rewards {
            b.mark_rewarded();
            let mut seen = HashSet::new();
            for (i, r) in rewards.iter().enumerate() {
                let what = format!("rewards[{i}]");
                let (s, a) = (state(&r.state, &what)?, action(&r.action, &what)?);
                if !seen.insert((s, a)) {
                    return invalid(format!("{what}: duplicate reward for ({}, {})", r.state, r.action));
                }
                if !seen_choice(&self.transitions, &r.state, &r.action) {
                    return invalid(format!("{what}: ({}, {}) has no transitions", r.state, r.action));
                }
                let v = parse_number::<N>(&r.reward).map_err(|e| CliError::Validation(format!("{what}: {e}")))?;
                b.set_reward(s, a, v);
            }
        }
        b.set_initial(state(&self.labels.init, "labels.init")?);
        for name in &self.labels.target {
            b.mark_target(state(name, "labels.target")?);
        }
        for name in &self.labels.bad {
            b.mark_bad(state(name, "labels.bad")?);
        }
        for (label, names) in &self.labels.other {
            for name in names {
                state(name, &format!("labels.{label}"))?;
            }
        }
        let model = b.build_unchecked();
        let report = model.validate();
        if !report.is_empty() {
            return Err(CliError::Validation(format!("model validation failed:\n{}", report.describe(&model).trim_end())));
        }
        Ok(model)
    }

    /// The document describing `model`. Rewards are listed when the model
    /// has them, zero rewards omitted.
    pub fn from_mdp<N: Number>(model: &Mdp<N>, header: Option<Provenance>) -> Self {
        let mut transitions = Vec::new();
        let mut rewards = Vec::new();
        for s in model.states() {
            for t in model.choices(s) {
                for (to, p) in &t.successors {
                    transitions.push(TransitionEntry {
                        state: model.state_name(s).into(),
                        action: model.action_name(t.action).into(),
                        successor: model.state_name(*to).into(),
                        probability: NumericValue::of(p).render(),
                    });
                }
                if !t.reward.is_zero() {
                    rewards.push(RewardEntry {
                        state: model.state_name(s).into(),
                        action: model.action_name(t.action).into(),
                        reward: NumericValue::of(&t.reward).render(),
                    });
                }
            }
        }
        let names = |mask: &[bool]| -> Vec<String> {
            model.states().filter(|s| mask[s.0]).map(|s| model.state_name(s).to_string()).collect()
        };
        ModelDocument {
            format_version: FORMAT_VERSION,
            mode: N::MODE.as_str().into(),
            header,
            states: model.state_names().to_vec(),
            actions: model.action_names().to_vec(),
            transitions,
            rewards: model.has_rewards().then_some(rewards),
            labels: Labels {
                init: model.state_name(model.initial()).into(),
                target: names(model.target_mask()),
                bad: names(model.bad_mask()),
                other: BTreeMap::new(),
            },
        }
    }
}

fn seen_choice(transitions: &[TransitionEntry], state: &str, action: &str) -> bool {
    transitions.iter().any(|t| t.state == state && t.action == action)
}

/// Parses a document; errors carry line and column.
pub fn parse_document(text: &str, origin: &str) -> Result<ModelDocument, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse { path: origin.into(), message: e.to_string() })
}

pub fn read_document(path: &Path) -> Result<ModelDocument, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_document(&text, &path.display().to_string())
}

/// Reads, parses and validates a model file in the requested arithmetic.
pub fn load_model<N: Number>(path: &Path) -> Result<(ModelDocument, Mdp<N>), CliError> {
    let doc = read_document(path)?;
    let model = doc.to_mdp::<N>()?;
    Ok((doc, model))
}

/// Pretty JSON with a trailing newline.
pub fn to_json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}
