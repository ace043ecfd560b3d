//! Result documents written by the solve commands.

use lexmdp_core::reach::ReachLexResult;
use lexmdp_core::safety::SafetyMpResult;
use lexmdp_core::{Diagnostics, Mdp, Number, NumericValue, OptSet};
use lexmdp_lake::bench::Provenance;
use serde::{Deserialize, Serialize};

use crate::strategy_file::StrategyChoice;

/// A number in lossless text (`"p/q"` in exact mode) with a float companion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumberOut {
    pub value: String,
    pub float: f64,
}

impl NumberOut {
    pub fn of<N: Number>(x: &N) -> Self {
        let v = NumericValue::of(x);
        NumberOut { value: v.render(), float: v.to_f64() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateValue {
    pub state: String,
    pub value: NumberOut,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptEntry {
    pub state: String,
    pub actions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsOut {
    pub mode: String,
    pub epsilon: f64,
    pub eta: f64,
    pub value_iterations: usize,
    pub strategy_iterations: usize,
    pub bellman_residual: f64,
    pub positive_states: usize,
    pub pruned_choices: usize,
}

impl From<&Diagnostics> for DiagnosticsOut {
    fn from(d: &Diagnostics) -> Self {
        DiagnosticsOut {
            mode: d.mode.as_str().into(),
            epsilon: d.epsilon,
            eta: d.eta,
            value_iterations: d.value_iterations,
            strategy_iterations: d.strategy_iterations,
            bellman_residual: d.bellman_residual,
            positive_states: d.positive_states,
            pruned_choices: d.pruned_choices,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachResultDocument {
    pub header: Provenance,
    pub model: String,
    pub initial: String,
    pub target_label: String,
    pub target: Vec<String>,
    pub reach_probability: NumberOut,
    pub conditional_expected_length: NumberOut,
    pub strategy: Vec<StrategyChoice>,
    pub values: Vec<StateValue>,
    pub opt: Vec<OptEntry>,
    pub diagnostics: DiagnosticsOut,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionOut {
    pub good: Vec<String>,
    pub v: Vec<String>,
    pub bad: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SafetyResultDocument {
    pub header: Provenance,
    pub model: String,
    pub initial: String,
    pub bad_label: String,
    pub bad: Vec<String>,
    pub safety_probability: NumberOut,
    pub conditional_mean_payoff: NumberOut,
    pub strategy: Vec<StrategyChoice>,
    pub values: Vec<StateValue>,
    pub partition: PartitionOut,
    pub opt: Vec<OptEntry>,
    pub diagnostics: DiagnosticsOut,
}

fn names<N: Number>(model: &Mdp<N>, mask: &[bool]) -> Vec<String> {
    model.states().filter(|s| mask[s.0]).map(|s| model.state_name(s).to_string()).collect()
}

fn values_out<N: Number>(model: &Mdp<N>, values: &[N]) -> Vec<StateValue> {
    model
        .states()
        .map(|s| StateValue { state: model.state_name(s).into(), value: NumberOut::of(&values[s.0]) })
        .collect()
}

fn opt_out<N: Number>(model: &Mdp<N>, opt: &OptSet) -> Vec<OptEntry> {
    model
        .states()
        .map(|s| OptEntry {
            state: model.state_name(s).into(),
            actions: opt.at(s).iter().map(|&a| model.action_name(a).to_string()).collect(),
        })
        .collect()
}

pub struct SolveContext<'a> {
    pub header: Provenance,
    pub model_path: &'a str,
    pub label: &'a str,
    pub label_mask: &'a [bool],
}

pub fn reach_document<N: Number>(ctx: SolveContext<'_>, model: &Mdp<N>, r: &ReachLexResult<N>) -> ReachResultDocument {
    ReachResultDocument {
        header: ctx.header,
        model: ctx.model_path.into(),
        initial: model.state_name(model.initial()).into(),
        target_label: ctx.label.into(),
        target: names(model, ctx.label_mask),
        reach_probability: NumberOut::of(&r.reach_probability),
        conditional_expected_length: NumberOut::of(&r.conditional_expected_length),
        strategy: StrategyChoice::list(model, &r.strategy),
        values: values_out(model, r.values.as_slice()),
        opt: opt_out(model, &r.opt),
        diagnostics: (&r.diagnostics).into(),
    }
}

pub fn safety_document<N: Number>(ctx: SolveContext<'_>, model: &Mdp<N>, r: &SafetyMpResult<N>) -> SafetyResultDocument {
    SafetyResultDocument {
        header: ctx.header,
        model: ctx.model_path.into(),
        initial: model.state_name(model.initial()).into(),
        bad_label: ctx.label.into(),
        bad: names(model, ctx.label_mask),
        safety_probability: NumberOut::of(&r.safety_probability),
        conditional_mean_payoff: NumberOut::of(&r.conditional_mean_payoff),
        strategy: StrategyChoice::list(model, &r.strategy),
        values: values_out(model, r.values.as_slice()),
        partition: PartitionOut {
            good: names(model, &r.partition.good),
            v: names(model, &r.partition.v),
            bad: names(model, &r.partition.bad),
        },
        opt: opt_out(model, &r.opt),
        diagnostics: (&r.diagnostics).into(),
    }
}
