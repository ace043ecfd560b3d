//! Export to the PRISM modelling language.

use std::fmt::Write;

use lexmdp_core::{Mdp, Number, NumericValue};

fn sanitize(name: &str) -> String {
    let mut out: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    if !out.starts_with(|c: char| c.is_ascii_alphabetic()) {
        out.insert(0, 'a');
    }
    out
}

fn label_formula<N: Number>(model: &Mdp<N>, mask: &[bool]) -> String {
    let terms: Vec<String> = model.states().filter(|s| mask[s.0]).map(|s| format!("s={}", s.0)).collect();
    if terms.is_empty() {
        "false".into()
    } else {
        terms.join(" | ")
    }
}

/// One module over `s : [0..n-1]`, one command per (state, action) with
/// exact `p/q` probabilities in exact mode, labels `"target"` and `"bad"`,
/// and a `rewards` block when the model carries rewards. State names appear
/// as comments.
pub fn export_prism<N: Number>(model: &Mdp<N>) -> String {
    let n = model.num_states();
    let mut out = String::new();
    writeln!(out, "mdp\n").unwrap();
    writeln!(out, "module lexmdp").unwrap();
    writeln!(out, "  s : [0..{}] init {};", n.saturating_sub(1), model.initial().0).unwrap();
    for s in model.states() {
        writeln!(out, "  // {} = {}", s.0, model.state_name(s)).unwrap();
        for t in model.choices(s) {
            let succ: Vec<String> = t
                .successors
                .iter()
                .map(|(to, p)| format!("{} : (s'={})", NumericValue::of(p).render(), to.0))
                .collect();
            writeln!(out, "  [{}] s={} -> {};", sanitize(model.action_name(t.action)), s.0, succ.join(" + ")).unwrap();
        }
    }
    writeln!(out, "endmodule\n").unwrap();
    writeln!(out, "label \"target\" = {};", label_formula(model, model.target_mask())).unwrap();
    writeln!(out, "label \"bad\" = {};", label_formula(model, model.bad_mask())).unwrap();
    if model.has_rewards() {
        writeln!(out, "\nrewards \"reward\"").unwrap();
        for s in model.states() {
            for t in model.choices(s) {
                if !t.reward.is_zero() {
                    let r = NumericValue::of(&t.reward).render();
                    writeln!(out, "  [{}] s={} : {};", sanitize(model.action_name(t.action)), s.0, r).unwrap();
                }
            }
        }
        writeln!(out, "endrewards").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use lexmdp_core::fixtures::{ab_model, safety_half_model};
    use lexmdp_core::Rational;

    #[test]
    fn one_command_per_choice() {
        let m = ab_model::<Rational>();
        let text = export_prism(&m);
        let commands = text.lines().filter(|l| l.trim_start().starts_with('[') && l.contains("->")).count();
        assert_eq!(commands, m.num_choices());
        assert!(text.contains("1/2 : (s'="));
        assert!(text.contains("label \"bad\" = s=2;"));
        assert!(text.starts_with("mdp\n"));
    }

    #[test]
    fn rewards_block() {
        let m = safety_half_model::<Rational>();
        let text = export_prism(&m);
        assert!(text.contains("rewards \"reward\""));
        assert!(text.trim_end().ends_with("endrewards"));
    }

    #[test]
    fn names_are_sanitized() {
        assert_eq!(sanitize("go-left"), "go_left");
        assert_eq!(sanitize("0a"), "a0a");
    }
}
