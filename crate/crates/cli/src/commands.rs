//! Command-line surface and the implementation of each subcommand.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use lexmdp_core::reach::{conditional_expected_length, reach_probability_under, solve_reach_length};
use lexmdp_core::safety::{safety_probability_under, solve_safety_mp};
use lexmdp_core::{Number, NumericMode, Rational, SolverOptions, StateId};
use lexmdp_lake::bench::{summary_text, write_csv, Provenance};
use lexmdp_lake::{export_prism, generate_layout, layout_to_mdp, render_layout, run_benchmark, BenchmarkConfig, SlipParams};
use lexmdp_oracle::{simulate, SimulationConfig};
use serde::Serialize;

use crate::config::solver_options;
use crate::document::{read_document, to_json_text, ModelDocument};
use crate::output::{reach_document, safety_document, NumberOut, SolveContext};
use crate::strategy_file::StrategyDocument;
use crate::verify::{run_verify, VerifyConfig};
use crate::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "lexmdp", version, about = "Lexicographic synthesis for Markov decision processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximise the probability of reaching a label, then minimise the expected
    /// number of steps to it among the optimal strategies.
    SolveReach(SolveReachArgs),
    /// Maximise the probability of avoiding a label forever, then maximise the
    /// conditional mean payoff among the optimal strategies.
    SolveSafety(SolveSafetyArgs),
    /// Generate a random Frozen Lake layout and its MDP.
    GenLake(GenLakeArgs),
    /// Compare length-optimal and plain reach-optimal strategies on a batch
    /// of random Frozen Lake layouts.
    Bench(BenchArgs),
    /// Check the solvers against brute-force enumeration and exact chain
    /// analysis on seeded random instances. Exits with 4 on any disagreement.
    Verify(VerifyArgs),
    /// Monte-Carlo rollouts of a strategy file on a model.
    Simulate(SimulateArgs),
    /// Print the model in the PRISM language.
    ExportPrism(ExportPrismArgs),
}

#[derive(Debug, Args)]
pub struct Tolerance {
    /// Float-mode convergence threshold [env: LEXMDP_EPSILON; default 1e-10].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Float-mode slack for equality tests [env: LEXMDP_ETA; default 1e-9].
    #[arg(long)]
    pub eta: Option<f64>,
}

impl Tolerance {
    fn options(&self) -> Result<SolverOptions, CliError> {
        solver_options(self.epsilon, self.eta)
    }
}

#[derive(Debug, Args)]
pub struct SolveReachArgs {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Label set to reach.
    #[arg(long, default_value = "target")]
    pub target_label: String,
    /// exact|float; defaults to the model file's mode.
    #[arg(long)]
    pub mode: Option<NumericMode>,
    /// Result JSON path (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Strategy file path [default: <model>.reach-strategy.json].
    #[arg(long)]
    pub strategy_out: Option<PathBuf>,
    #[command(flatten)]
    pub tolerance: Tolerance,
}

#[derive(Debug, Args)]
pub struct SolveSafetyArgs {
    /// Model file (JSON) with rewards.
    #[arg(long)]
    pub model: PathBuf,
    /// Label set to avoid.
    #[arg(long, default_value = "bad")]
    pub bad_label: String,
    /// exact|float; defaults to the model file's mode.
    #[arg(long)]
    pub mode: Option<NumericMode>,
    /// Result JSON path (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Strategy file path [default: <model>.safety-strategy.json].
    #[arg(long)]
    pub strategy_out: Option<PathBuf>,
    #[command(flatten)]
    pub tolerance: Tolerance,
}

#[derive(Debug, Args)]
pub struct LakeParams {
    /// Probability of a wall on each interior cell.
    #[arg(long, default_value_t = 0.1)]
    pub wall_p: f64,
    /// Probability of a hole on each remaining free cell.
    #[arg(long, default_value_t = 0.1)]
    pub hole_p: f64,
    /// Slip weights as intended:side.
    #[arg(long, default_value = "10:1", value_parser = parse_slip)]
    pub slip: SlipParams,
    /// Use 8:1 weights (0.8 intended, 0.1 per side in the open) instead of --slip.
    #[arg(long)]
    pub caption_slip: bool,
}

impl LakeParams {
    fn slip(&self) -> SlipParams {
        if self.caption_slip {
            SlipParams::caption()
        } else {
            self.slip
        }
    }
}

fn parse_slip(text: &str) -> Result<SlipParams, String> {
    let (a, b) = text.split_once(':').ok_or_else(|| format!("expected intended:side, got `{text}`"))?;
    let intended_weight: u32 = a.trim().parse().map_err(|_| format!("bad intended weight `{a}`"))?;
    let side_weight: u32 = b.trim().parse().map_err(|_| format!("bad side weight `{b}`"))?;
    if intended_weight == 0 {
        return Err("intended weight must be positive".into());
    }
    Ok(SlipParams { intended_weight, side_weight })
}

fn parse_dims(text: &str) -> Result<(usize, usize), String> {
    let (w, h) = text.split_once(['x', 'X']).ok_or_else(|| format!("expected WIDTHxHEIGHT, got `{text}`"))?;
    let w = w.parse().map_err(|_| format!("bad width `{w}`"))?;
    let h = h.parse().map_err(|_| format!("bad height `{h}`"))?;
    Ok((w, h))
}

#[derive(Debug, Args)]
pub struct GenLakeArgs {
    /// Layout seed; the same seed always gives the same layout.
    #[arg(long)]
    pub seed: u64,
    /// Grid width including the wall border.
    #[arg(long, default_value_t = 10)]
    pub width: usize,
    /// Grid height including the wall border.
    #[arg(long, default_value_t = 10)]
    pub height: usize,
    #[command(flatten)]
    pub lake: LakeParams,
    /// Arithmetic of the emitted model.
    #[arg(long, default_value = "exact")]
    pub mode: NumericMode,
    /// Directory for lake-<seed>.txt and lake-<seed>.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Number of layouts.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Base seed; each layout derives its own stream from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grid size as WIDTHxHEIGHT.
    #[arg(long, default_value = "10x10", value_parser = parse_dims)]
    pub dims: (usize, usize),
    #[command(flatten)]
    pub lake: LakeParams,
    /// Arithmetic of the solvers (exact|float).
    #[arg(long, default_value = "exact")]
    pub mode: NumericMode,
    /// Directory for bench-<seed>.csv and bench-<seed>.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub tolerance: Tolerance,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Number of random instances.
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    /// Largest instance, sink states included.
    #[arg(long, default_value_t = 5)]
    pub max_states: usize,
    /// Most actions per state.
    #[arg(long, default_value_t = 3)]
    pub max_actions: usize,
    /// Base seed for the instance generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random Opt-supported strategies per instance.
    #[arg(long, default_value_t = 20)]
    pub strategies: usize,
    /// Also write the report to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Strategy file written by a solve command.
    #[arg(long)]
    pub strategy: PathBuf,
    /// Number of independent runs.
    #[arg(long, default_value_t = 10_000)]
    pub episodes: usize,
    /// Step cap per run; runs that have not reached the target by then count as not reaching.
    #[arg(long, default_value_t = 1_000)]
    pub horizon: usize,
    /// Seed of the simulation stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Label set whose first visit ends the length measurement.
    #[arg(long, default_value = "target")]
    pub target_label: String,
    /// Label set whose visit makes a run unsafe.
    #[arg(long, default_value = "bad")]
    pub bad_label: String,
    /// Result JSON path (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportPrismArgs {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// exact|float; defaults to the model file's mode.
    #[arg(long)]
    pub mode: Option<NumericMode>,
    /// Output path (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sibling(model: &Path, suffix: &str) -> PathBuf {
    let stem = model.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into());
    model.with_file_name(format!("{stem}.{suffix}"))
}

fn mode_of(requested: Option<NumericMode>, doc: &ModelDocument) -> Result<NumericMode, CliError> {
    match requested {
        Some(m) => Ok(m),
        None => doc.numeric_mode(),
    }
}

/// Runs one parsed command; `Ok` carries the exit code.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::SolveReach(a) => solve_reach(a),
        Command::SolveSafety(a) => solve_safety(a),
        Command::GenLake(a) => gen_lake(a),
        Command::Bench(a) => bench(a),
        Command::Verify(a) => verify(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::ExportPrism(a) => export(a),
    }
}

fn solve_reach(a: &SolveReachArgs) -> Result<i32, CliError> {
    let opts = a.tolerance.options()?;
    let doc = read_document(&a.model)?;
    match mode_of(a.mode, &doc)? {
        NumericMode::Exact => solve_reach_in::<Rational>(a, &doc, &opts),
        NumericMode::Float => solve_reach_in::<f64>(a, &doc, &opts),
    }
}

fn solve_reach_in<N: Number>(a: &SolveReachArgs, doc: &ModelDocument, opts: &SolverOptions) -> Result<i32, CliError> {
    let model = doc.to_mdp::<N>()?;
    let target = doc.label_states(&model, &a.target_label)?;
    let model = model.with_target(&target);
    let result = solve_reach_length(&model, model.initial(), &target, opts)?;
    let header = Provenance::new(None, N::MODE, opts);
    let path = a.model.display().to_string();
    let strategy = StrategyDocument::new(header.clone(), &path, &model, &result.strategy);
    let ctx = SolveContext { header, model_path: &path, label: &a.target_label, label_mask: model.target_mask() };
    let out = reach_document(ctx, &model, &result);
    write_file(&a.strategy_out.clone().unwrap_or_else(|| sibling(&a.model, "reach-strategy.json")), &to_json_text(&strategy))?;
    emit(a.out.as_deref(), &to_json_text(&out))?;
    Ok(exit::OK)
}

fn solve_safety(a: &SolveSafetyArgs) -> Result<i32, CliError> {
    let opts = a.tolerance.options()?;
    let doc = read_document(&a.model)?;
    match mode_of(a.mode, &doc)? {
        NumericMode::Exact => solve_safety_in::<Rational>(a, &doc, &opts),
        NumericMode::Float => solve_safety_in::<f64>(a, &doc, &opts),
    }
}

fn solve_safety_in<N: Number>(a: &SolveSafetyArgs, doc: &ModelDocument, opts: &SolverOptions) -> Result<i32, CliError> {
    let model = doc.to_mdp::<N>()?;
    let bad = doc.label_states(&model, &a.bad_label)?;
    let model = model.with_bad(&bad);
    let result = solve_safety_mp(&model, model.initial(), &bad, opts)?;
    let header = Provenance::new(None, N::MODE, opts);
    let path = a.model.display().to_string();
    let strategy = StrategyDocument::new(header.clone(), &path, &model, &result.strategy);
    let ctx = SolveContext { header, model_path: &path, label: &a.bad_label, label_mask: model.bad_mask() };
    let out = safety_document(ctx, &model, &result);
    write_file(&a.strategy_out.clone().unwrap_or_else(|| sibling(&a.model, "safety-strategy.json")), &to_json_text(&strategy))?;
    emit(a.out.as_deref(), &to_json_text(&out))?;
    Ok(exit::OK)
}

fn gen_lake(a: &GenLakeArgs) -> Result<i32, CliError> {
    let layout = generate_layout(a.seed, a.width, a.height, a.lake.wall_p, a.lake.hole_p)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let slip = a.lake.slip();
    let header = Provenance::new(Some(a.seed), a.mode, &SolverOptions::default());
    let mut text = format!(
        "; {}\n; width={} height={} wall_p={} hole_p={} slip={}:{} used_seed={}\n",
        header.summary(),
        a.width,
        a.height,
        a.lake.wall_p,
        a.lake.hole_p,
        slip.intended_weight,
        slip.side_weight,
        layout.seed.unwrap_or(a.seed)
    );
    text.push_str(&render_layout(&layout));
    text.push('\n');
    let doc = match a.mode {
        NumericMode::Exact => ModelDocument::from_mdp(&layout_to_mdp::<Rational>(&layout, slip)?, Some(header)),
        NumericMode::Float => ModelDocument::from_mdp(&layout_to_mdp::<f64>(&layout, slip)?, Some(header)),
    };
    write_file(&a.out_dir.join(format!("lake-{}.txt", a.seed)), &text)?;
    write_file(&a.out_dir.join(format!("lake-{}.json", a.seed)), &to_json_text(&doc))?;
    print!("{text}");
    Ok(exit::OK)
}

impl From<lexmdp_lake::LakeError> for CliError {
    fn from(e: lexmdp_lake::LakeError) -> Self {
        match e {
            lexmdp_lake::LakeError::Model(m) => CliError::Model(m),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn bench(a: &BenchArgs) -> Result<i32, CliError> {
    let opts = a.tolerance.options()?;
    let cfg = BenchmarkConfig {
        count: a.count,
        seed: a.seed,
        width: a.dims.0,
        height: a.dims.1,
        wall_prob: a.lake.wall_p,
        hole_prob: a.lake.hole_p,
        slip: a.lake.slip(),
    };
    let started = Instant::now();
    let report = match a.mode {
        NumericMode::Exact => run_benchmark::<Rational>(&cfg, &opts),
        NumericMode::Float => run_benchmark::<f64>(&cfg, &opts),
    }
    .map_err(|e| match e {
        lexmdp_lake::bench::BenchError::Layout { .. } => CliError::Usage(e.to_string()),
        lexmdp_lake::bench::BenchError::Solve { source, .. } => CliError::from(source),
    })?;
    let mut csv = Vec::new();
    write_csv(&report, &mut csv).map_err(|e| CliError::io("csv", e))?;
    let csv = String::from_utf8(csv).expect("csv is utf-8");
    write_file(&a.out_dir.join(format!("bench-{}.csv", a.seed)), &csv)?;
    write_file(&a.out_dir.join(format!("bench-{}.json", a.seed)), &to_json_text(&report))?;
    print!("# {}\n{}", report.header.summary(), summary_text(&report));
    eprintln!("elapsed: {:.2?}", started.elapsed());
    Ok(if report.consistent() { exit::OK } else { exit::VERIFY_FAILED })
}

fn verify(a: &VerifyArgs) -> Result<i32, CliError> {
    if a.max_states < 2 || a.max_actions < 1 {
        return Err(CliError::Usage("need --max-states >= 2 and --max-actions >= 1".into()));
    }
    let cfg = VerifyConfig {
        instances: a.instances,
        max_states: a.max_states,
        max_actions: a.max_actions,
        seed: a.seed,
        strategies: a.strategies,
    };
    let outcome = run_verify(&cfg);
    if let Some(p) = &a.out {
        write_file(p, &outcome.text)?;
    }
    print!("{}", outcome.text);
    if outcome.passed() {
        Ok(exit::OK)
    } else {
        Err(CliError::VerifyFailed(format!("{} check(s) failed", outcome.report.failures())))
    }
}

#[derive(Serialize)]
struct ExactReference {
    reach_probability: Option<NumberOut>,
    conditional_expected_length: Option<NumberOut>,
    safety_probability: Option<NumberOut>,
}

#[derive(Serialize)]
struct SimulationDocument {
    header: Provenance,
    model: String,
    strategy: String,
    episodes: usize,
    horizon: usize,
    reach_count: usize,
    reach_frequency: f64,
    reach_standard_error: f64,
    mean_conditional_length: Option<f64>,
    length_standard_error: Option<f64>,
    safe_count: usize,
    safety_frequency: f64,
    safety_standard_error: f64,
    mean_reward: Option<f64>,
    reward_standard_error: Option<f64>,
    /// Exact values of the same quantities, for comparison.
    exact: ExactReference,
}

fn simulate_cmd(a: &SimulateArgs) -> Result<i32, CliError> {
    if a.episodes == 0 || a.horizon == 0 {
        return Err(CliError::Usage("--episodes and --horizon must be positive".into()));
    }
    let doc = read_document(&a.model)?;
    let model = doc.to_mdp::<Rational>()?;
    let target = doc.label_states(&model, &a.target_label)?;
    let bad = doc.label_states(&model, &a.bad_label)?;
    let model = model.with_target(&target).with_bad(&bad);
    let text = std::fs::read_to_string(&a.strategy).map_err(|e| CliError::io(&a.strategy, e))?;
    let sdoc: StrategyDocument = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse { path: a.strategy.display().to_string(), message: e.to_string() })?;
    let sigma = sdoc.to_strategy(&model)?;
    let s0 = model.initial();
    let stats = simulate(&model, &sigma, s0, SimulationConfig { episodes: a.episodes, horizon: a.horizon, seed: a.seed });
    let exact = exact_reference(&model, &sigma, s0, &target, &bad);
    let out = SimulationDocument {
        header: Provenance::new(Some(a.seed), NumericMode::Exact, &SolverOptions::default()),
        model: a.model.display().to_string(),
        strategy: a.strategy.display().to_string(),
        episodes: stats.episodes,
        horizon: stats.horizon,
        reach_count: stats.reach_count,
        reach_frequency: stats.reach_frequency,
        reach_standard_error: stats.reach_standard_error,
        mean_conditional_length: stats.mean_conditional_length,
        length_standard_error: stats.length_standard_error,
        safe_count: stats.safe_count,
        safety_frequency: stats.safety_frequency,
        safety_standard_error: stats.safety_standard_error,
        mean_reward: stats.mean_reward,
        reward_standard_error: stats.reward_standard_error,
        exact,
    };
    emit(a.out.as_deref(), &to_json_text(&out))?;
    Ok(exit::OK)
}

fn exact_reference(
    model: &lexmdp_core::Mdp<Rational>,
    sigma: &lexmdp_core::MemorylessStrategy<Rational>,
    s0: StateId,
    target: &[StateId],
    bad: &[StateId],
) -> ExactReference {
    let reach = (!target.is_empty())
        .then(|| reach_probability_under(model, sigma, target).ok().map(|p| NumberOut::of(&p[s0.0])))
        .flatten();
    let length = (!target.is_empty())
        .then(|| conditional_expected_length(model, sigma, s0, target).ok().map(|l| NumberOut::of(&l)))
        .flatten();
    let safety = safety_probability_under(model, sigma, bad).ok().map(|p| NumberOut::of(&p[s0.0]));
    ExactReference { reach_probability: reach, conditional_expected_length: length, safety_probability: safety }
}

fn export(a: &ExportPrismArgs) -> Result<i32, CliError> {
    let doc = read_document(&a.model)?;
    let mode = mode_of(a.mode, &doc)?;
    let body = match mode {
        NumericMode::Exact => export_prism(&doc.to_mdp::<Rational>()?),
        NumericMode::Float => export_prism(&doc.to_mdp::<f64>()?),
    };
    let header = Provenance::new(None, mode, &SolverOptions::default());
    let text = format!("// {}\n// model: {}\n{body}", header.summary(), a.model.display());
    emit(a.out.as_deref(), &text)?;
    Ok(exit::OK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parsers() {
        assert_eq!(parse_dims("10x12"), Ok((10, 12)));
        assert!(parse_dims("10").is_err());
        assert_eq!(parse_slip("8:1"), Ok(SlipParams::caption()));
        assert!(parse_slip("0:1").is_err());
    }
}
