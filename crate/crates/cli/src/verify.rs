//! The `verify` command: shipped regression vectors plus solver/oracle
//! agreement and pruning identities on seeded random instances.

use std::fmt::Write;

use lexmdp_core::fixtures::{ab_model, safety_choice_model, safety_half_model, safety_two_class_model};
use lexmdp_core::reach::{conditional_expected_length, solve_reach_length};
use lexmdp_core::safety::solve_safety_mp;
use lexmdp_core::{Mdp, NumericMode, Rational, SolverOptions};
use lexmdp_lake::bench::{layout_seed, Provenance};
use lexmdp_lake::{baseline_reach_strategy, TieBreak};
use lexmdp_oracle::identities::{
    check_oracle_consistency, check_reach_instance, check_reach_lexicographic, check_safety_instance,
    check_safety_lexicographic, check_safety_opt_exhaustive,
};
use lexmdp_oracle::{random_instance, IdentityReport, InstanceConfig, OracleError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const FIXTURE_VECTORS: &str = "fixture-regression-vectors";
pub const ORACLE_ERRORS: &str = "oracle-completed-without-error";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub instances: usize,
    pub max_states: usize,
    pub max_actions: usize,
    pub seed: u64,
    /// Random Opt-supported strategies per instance for the identities.
    pub strategies: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { instances: 100, max_states: 5, max_actions: 3, seed: 0, strategies: 20 }
    }
}

pub struct VerifyOutcome {
    pub report: IdentityReport,
    /// Instances whose Opt-supported MD strategies were all enumerated.
    pub exhaustive_instances: usize,
    pub opt_supported_strategies: usize,
    pub text: String,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.report.all_passed()
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Known exact answers on the hand-built fixtures.
pub fn check_fixture_vectors(report: &mut IdentityReport) {
    let opts = SolverOptions::default();
    let mut expect = |what: &str, got: Result<(Rational, Rational), String>, want: (Rational, Rational)| {
        let ok = got.as_ref().is_ok_and(|g| *g == want);
        report.record(FIXTURE_VECTORS, ok, || format!("{what}: got {got:?}, want {want:?}"));
    };
    let ab = ab_model::<Rational>();
    let target = ab.target_set();
    let r = solve_reach_length(&ab, ab.initial(), &target, &opts).map_err(|e| e.to_string());
    expect("a/b reach-length", r.map(|r| (r.reach_probability, r.conditional_expected_length)), (q(1, 2), q(1, 1)));
    let slow = baseline_reach_strategy(&ab, &target, TieBreak::LastIndex, &opts)
        .and_then(|s| conditional_expected_length(&ab, &s, ab.initial(), &target))
        .map(|l| (q(1, 2), l))
        .map_err(|e| e.to_string());
    expect("a/b strategy b length", slow, (q(1, 2), q(2, 1)));
    let safety: [(&str, Mdp<Rational>, (Rational, Rational)); 3] = [
        ("safety choice", safety_choice_model(), (q(1, 1), q(1, 1))),
        ("safety half", safety_half_model(), (q(1, 2), q(3, 1))),
        ("safety two classes", safety_two_class_model(), (q(1, 1), q(3, 1))),
    ];
    for (what, m, want) in safety {
        let r = solve_safety_mp(&m, m.initial(), &m.bad_set(), &opts).map_err(|e| e.to_string());
        expect(what, r.map(|r| (r.safety_probability, r.conditional_mean_payoff)), want);
    }
}

fn record_error(report: &mut IdentityReport, index: usize, result: Result<(), OracleError>) {
    if let Err(e) = result {
        report.record(ORACLE_ERRORS, false, || format!("instance {index}: {e}"));
    }
}

/// Runs every check; the text output depends only on `cfg`.
pub fn run_verify(cfg: &VerifyConfig) -> VerifyOutcome {
    let mut report = IdentityReport::default();
    check_fixture_vectors(&mut report);
    let icfg = InstanceConfig { max_states: cfg.max_states, max_actions: cfg.max_actions, ..InstanceConfig::default() };
    let mut exhaustive = 0;
    let mut opt_supported = 0;
    for i in 0..cfg.instances {
        let mut rng = ChaCha8Rng::seed_from_u64(layout_seed(cfg.seed, i));
        let m = random_instance(&mut rng, &icfg);
        let r = check_reach_lexicographic(&m, &mut report);
        record_error(&mut report, i, r);
        let r = check_safety_lexicographic(&m, &mut report);
        record_error(&mut report, i, r);
        let r = check_reach_instance(&m, &mut rng, cfg.strategies, &mut report);
        record_error(&mut report, i, r);
        let r = check_safety_instance(&m, &mut rng, cfg.strategies, &mut report);
        record_error(&mut report, i, r);
        match check_safety_opt_exhaustive(&m, &mut report) {
            Ok(k) => {
                exhaustive += 1;
                opt_supported += k;
            }
            Err(e) => record_error(&mut report, i, Err(e)),
        }
        let r = check_oracle_consistency(&m, &mut report);
        record_error(&mut report, i, r);
    }
    let header = Provenance::new(Some(cfg.seed), NumericMode::Exact, &SolverOptions::default());
    let mut text = String::new();
    writeln!(text, "# {}", header.summary()).unwrap();
    writeln!(
        text,
        "# instances={} max_states={} max_actions={} strategies_per_instance={}",
        cfg.instances, cfg.max_states, cfg.max_actions, cfg.strategies
    )
    .unwrap();
    write!(text, "{report}").unwrap();
    writeln!(text, "exhaustively enumerated instances: {exhaustive} ({opt_supported} Opt-supported MD strategies)")
        .unwrap();
    writeln!(text, "{}", if report.all_passed() { "verify: OK" } else { "verify: FAILED" }).unwrap();
    VerifyOutcome { report, exhaustive_instances: exhaustive, opt_supported_strategies: opt_supported, text }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_pass() {
        let mut report = IdentityReport::default();
        check_fixture_vectors(&mut report);
        assert!(report.all_passed(), "{report}");
        assert_eq!(report.tally(FIXTURE_VECTORS).unwrap().passed, 5);
    }

    #[test]
    fn small_run_is_deterministic() {
        let cfg = VerifyConfig { instances: 4, strategies: 3, seed: 9, ..VerifyConfig::default() };
        let a = run_verify(&cfg);
        let b = run_verify(&cfg);
        assert!(a.passed(), "{}", a.text);
        assert_eq!(a.text, b.text);
        assert_eq!(a.exhaustive_instances, 4);
    }
}
