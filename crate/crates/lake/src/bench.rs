//! Batch comparison of the length-optimal strategy against reach-optimal
//! baselines on random layouts.

use std::io::{self, Write};

use lexmdp_core::reach::{conditional_expected_length, max_reach_values, reach_probability_under, solve_reach_length};
use lexmdp_core::{Number, NumericMode, NumericValue, Rational, SolveError, SolverOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{baseline_reach_strategy, TieBreak};
use crate::encode::{graph_shortest_distance, layout_to_mdp, SlipParams};
use crate::layout::{generate_layout, render_layout};
use crate::LakeError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub count: usize,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub wall_prob: f64,
    pub hole_prob: f64,
    pub slip: SlipParams,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig { count: 100, seed: 0, width: 10, height: 10, wall_prob: 0.1, hole_prob: 0.1, slip: SlipParams::default() }
    }
}

/// Reproducibility header shared by every emitted artefact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: Option<u64>,
    pub mode: String,
    pub epsilon: f64,
    pub eta: f64,
}

impl Provenance {
    pub fn new(seed: Option<u64>, mode: NumericMode, opts: &SolverOptions) -> Self {
        Provenance {
            tool: "lexmdp".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            mode: mode.as_str().into(),
            epsilon: opts.tolerances.epsilon,
            eta: opts.tolerances.eta,
        }
    }

    /// `key=value` pairs on one line.
    pub fn summary(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "tool={} version={} seed={} mode={} epsilon={:e} eta={:e}",
            self.tool, self.version, seed, self.mode, self.epsilon, self.eta
        )
    }
}

/// Baseline tie-break rules in the order used by records and CSV columns.
pub const BASELINE_LABELS: [&str; 3] = ["first", "last", "rand"];

/// Seed of the `index`-th layout of a batch (splitmix64 finaliser of the
/// golden-ratio sequence), so layouts are independent of the batch size.
pub fn layout_seed(base: u64, index: usize) -> u64 {
    let mut z = base.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Recorded in every report so layouts can be regenerated elsewhere.
pub const PRNG_DESCRIPTION: &str = "layout i: ChaCha8 (rand_chacha 0.3, seed_from_u64) seeded with \
splitmix64(seed + (i+1)*0x9E3779B97F4A7C15); rand baseline: ChaCha8 seeded with layout_seed^0x5EED";

fn baseline_rules(seed: u64) -> [TieBreak; 3] {
    [TieBreak::FirstIndex, TieBreak::LastIndex, TieBreak::SeededRandom(seed ^ 0x5EED)]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub index: usize,
    /// Seed actually used for the layout (after any skips).
    pub seed: u64,
    pub layout: String,
    pub states: usize,
    /// Maximal reach probability from the start, exact text and float.
    pub val: String,
    pub val_f64: f64,
    /// Graph distance from start to target avoiding holes.
    pub shortest: Option<usize>,
    /// `None` on layouts where the target is unreachable.
    pub v_distopt: Option<String>,
    pub v_distopt_f64: Option<f64>,
    pub v_baseline: [Option<String>; 3],
    pub v_baseline_f64: [Option<f64>; 3],
    /// Worst baseline over the length-optimal value.
    pub ratio: Option<f64>,
    /// Every baseline attains `val`.
    pub baselines_reach_optimal: bool,
    /// `v_distopt` does not exceed any baseline.
    pub monotone: bool,
    /// `v_distopt` is at least the graph distance.
    pub distance_bound: bool,
}

impl BenchmarkRecord {
    pub fn reachable(&self) -> bool {
        self.v_distopt.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub layouts: usize,
    pub reachable: usize,
    pub unreachable: usize,
    /// Fractions over reachable layouts.
    pub frac_ratio_ge_2: f64,
    pub frac_ratio_ge_10: f64,
    pub frac_ratio_ge_1000: f64,
    /// Reachable layouts where some baseline is strictly slower.
    pub strict_improvements: usize,
    pub max_ratio: Option<f64>,
    pub monotonicity_violations: usize,
    pub reach_optimality_violations: usize,
    pub distance_bound_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub header: Provenance,
    pub prng: String,
    pub config: BenchmarkConfig,
    pub summary: BenchmarkSummary,
    pub records: Vec<BenchmarkRecord>,
}

impl BenchmarkReport {
    /// Every reachable layout respects the ordering and baselines are optimal.
    pub fn consistent(&self) -> bool {
        let s = &self.summary;
        s.monotonicity_violations == 0 && s.reach_optimality_violations == 0 && s.distance_bound_violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BenchError {
    #[error("layout {index}: {source}")]
    Layout { index: usize, source: LakeError },
    #[error("layout {index}: {source}")]
    Solve { index: usize, source: SolveError },
}

fn evaluate_layout<N: Number>(
    cfg: &BenchmarkConfig,
    index: usize,
    opts: &SolverOptions,
) -> Result<BenchmarkRecord, BenchError> {
    let seed = layout_seed(cfg.seed, index);
    let layout = generate_layout(seed, cfg.width, cfg.height, cfg.wall_prob, cfg.hole_prob)
        .map_err(|source| BenchError::Layout { index, source })?;
    let model = layout_to_mdp::<N>(&layout, cfg.slip).map_err(|source| BenchError::Layout { index, source })?;
    let solve = |source| BenchError::Solve { index, source };
    let s0 = model.initial();
    let target = model.target_set();
    let val = max_reach_values(&model, &target, opts).map_err(solve)?.get(s0).clone();
    let shortest = graph_shortest_distance(&layout);
    let mut record = BenchmarkRecord {
        index,
        seed: layout.seed.unwrap_or(seed),
        layout: render_layout(&layout),
        states: model.num_states(),
        val: NumericValue::of(&val).render(),
        val_f64: val.to_f64(),
        shortest,
        v_distopt: None,
        v_distopt_f64: None,
        v_baseline: [None, None, None],
        v_baseline_f64: [None, None, None],
        ratio: None,
        baselines_reach_optimal: true,
        monotone: true,
        distance_bound: true,
    };
    if val.is_negligible(opts.tolerances.eta) {
        return Ok(record);
    }
    let tol = opts.tolerances.eta;
    let best = solve_reach_length(&model, s0, &target, opts).map_err(solve)?;
    let v_opt = best.conditional_expected_length;
    let mut worst = v_opt.clone();
    for (k, rule) in baseline_rules(seed).into_iter().enumerate() {
        let sigma = baseline_reach_strategy(&model, &target, rule, opts).map_err(solve)?;
        let reach = reach_probability_under(&model, &sigma, &target).map_err(solve)?[s0.0].clone();
        record.baselines_reach_optimal &= reach.near(&val, tol);
        let v = conditional_expected_length(&model, &sigma, s0, &target).map_err(solve)?;
        record.monotone &= v_opt <= v || v_opt.near(&v, tol);
        if v > worst {
            worst = v.clone();
        }
        record.v_baseline[k] = Some(NumericValue::of(&v).render());
        record.v_baseline_f64[k] = Some(v.to_f64());
    }
    record.distance_bound = shortest.is_some_and(|d| {
        let d = N::from_int(d as i64);
        v_opt >= d || v_opt.near(&d, tol)
    });
    record.ratio = Some(ratio(&worst, &v_opt));
    record.v_distopt = Some(NumericValue::of(&v_opt).render());
    record.v_distopt_f64 = Some(v_opt.to_f64());
    Ok(record)
}

/// `worst / best` as a float, computed exactly when both are rational.
fn ratio<N: Number>(worst: &N, best: &N) -> f64 {
    match (worst.to_rational(), best.to_rational()) {
        (Some(w), Some(b)) if b != Rational::from_integer(0.into()) => Number::to_f64(&(w / b)),
        _ => worst.to_f64() / best.to_f64(),
    }
}

fn summarise(records: &[BenchmarkRecord]) -> BenchmarkSummary {
    let ratios: Vec<f64> = records.iter().filter_map(|r| r.ratio).collect();
    let reachable = ratios.len();
    let frac = |k: f64| {
        if reachable == 0 {
            0.0
        } else {
            ratios.iter().filter(|&&r| r >= k).count() as f64 / reachable as f64
        }
    };
    let reach_rows = || records.iter().filter(|r| r.reachable());
    BenchmarkSummary {
        layouts: records.len(),
        reachable,
        unreachable: records.len() - reachable,
        frac_ratio_ge_2: frac(2.0),
        frac_ratio_ge_10: frac(10.0),
        frac_ratio_ge_1000: frac(1000.0),
        strict_improvements: ratios.iter().filter(|&&r| r > 1.0).count(),
        max_ratio: ratios.iter().copied().reduce(f64::max),
        monotonicity_violations: reach_rows().filter(|r| !r.monotone).count(),
        reach_optimality_violations: reach_rows().filter(|r| !r.baselines_reach_optimal).count(),
        distance_bound_violations: reach_rows().filter(|r| !r.distance_bound).count(),
    }
}

/// Runs the batch in parallel; the report does not depend on scheduling.
pub fn run_benchmark<N: Number>(cfg: &BenchmarkConfig, opts: &SolverOptions) -> Result<BenchmarkReport, BenchError> {
    let records = (0..cfg.count)
        .into_par_iter()
        .map(|i| evaluate_layout::<N>(cfg, i, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BenchmarkReport {
        header: Provenance::new(Some(cfg.seed), N::MODE, opts),
        prng: PRNG_DESCRIPTION.into(),
        config: cfg.clone(),
        summary: summarise(&records),
        records,
    })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    seed: u64,
    val: &'a str,
    shortest: Option<usize>,
    v_distopt: Option<&'a str>,
    v_baseline_first: Option<&'a str>,
    v_baseline_last: Option<&'a str>,
    v_baseline_rand: Option<&'a str>,
    ratio: Option<f64>,
    val_f64: f64,
    v_distopt_f64: Option<f64>,
    v_baseline_first_f64: Option<f64>,
    v_baseline_last_f64: Option<f64>,
    v_baseline_rand_f64: Option<f64>,
}

/// One row per layout after `#`-prefixed header lines. Missing values (unreachable
/// target) are empty fields.
pub fn write_csv<W: Write>(report: &BenchmarkReport, mut out: W) -> io::Result<()> {
    let c = &report.config;
    writeln!(out, "# {}", report.header.summary())?;
    writeln!(out, "# prng: {}", report.prng)?;
    writeln!(
        out,
        "# count={} dims={}x{} wall_p={} hole_p={} slip={}:{}",
        c.count, c.width, c.height, c.wall_prob, c.hole_prob, c.slip.intended_weight, c.slip.side_weight
    )?;
    let mut w = csv::Writer::from_writer(out);
    for r in &report.records {
        w.serialize(CsvRow {
            seed: r.seed,
            val: &r.val,
            shortest: r.shortest,
            v_distopt: r.v_distopt.as_deref(),
            v_baseline_first: r.v_baseline[0].as_deref(),
            v_baseline_last: r.v_baseline[1].as_deref(),
            v_baseline_rand: r.v_baseline[2].as_deref(),
            ratio: r.ratio,
            val_f64: r.val_f64,
            v_distopt_f64: r.v_distopt_f64,
            v_baseline_first_f64: r.v_baseline_f64[0],
            v_baseline_last_f64: r.v_baseline_f64[1],
            v_baseline_rand_f64: r.v_baseline_f64[2],
        })?;
    }
    w.flush()
}

/// Human-readable aggregate block.
pub fn summary_text(report: &BenchmarkReport) -> String {
    let s = &report.summary;
    let pct = |f: f64| format!("{:.1}%", 100.0 * f);
    format!(
        "layouts: {} ({} reachable, {} unreachable)\n\
         ratio >= 2: {}\nratio >= 10: {}\nratio >= 1000: {}\n\
         strict improvements: {}\nmax ratio: {}\n\
         monotonicity violations: {}\nbaseline optimality violations: {}\ndistance bound violations: {}\n",
        s.layouts,
        s.reachable,
        s.unreachable,
        pct(s.frac_ratio_ge_2),
        pct(s.frac_ratio_ge_10),
        pct(s.frac_ratio_ge_1000),
        s.strict_improvements,
        s.max_ratio.map_or_else(|| "n/a".into(), |r| format!("{r:.4}")),
        s.monotonicity_violations,
        s.reach_optimality_violations,
        s.distance_bound_violations,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_seeds_are_spread_and_stable() {
        let a: Vec<u64> = (0..5).map(|i| layout_seed(7, i)).collect();
        let b: Vec<u64> = (0..5).map(|i| layout_seed(7, i)).collect();
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 5);
        assert_ne!(layout_seed(7, 0), layout_seed(8, 0));
    }

    #[test]
    fn small_batch_is_consistent() {
        let cfg = BenchmarkConfig { count: 6, seed: 3, width: 6, height: 6, ..BenchmarkConfig::default() };
        let opts = SolverOptions::default();
        let report = run_benchmark::<Rational>(&cfg, &opts).unwrap();
        assert_eq!(report.records.len(), 6);
        assert!(report.consistent(), "{}", summary_text(&report));
        for r in &report.records {
            if let Some(ratio) = r.ratio {
                assert!(ratio >= 1.0);
            }
        }
        let again = run_benchmark::<Rational>(&cfg, &opts).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn float_matches_exact() {
        let cfg = BenchmarkConfig { count: 4, seed: 11, width: 6, height: 6, ..BenchmarkConfig::default() };
        let opts = SolverOptions::default();
        let exact = run_benchmark::<Rational>(&cfg, &opts).unwrap();
        let float = run_benchmark::<f64>(&cfg, &opts).unwrap();
        for (e, f) in exact.records.iter().zip(&float.records) {
            assert_eq!(e.layout, f.layout);
            match (e.v_distopt_f64, f.v_distopt_f64) {
                (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-6 * x.max(1.0), "{x} vs {y}"),
                (None, None) => {}
                other => panic!("reachability disagrees: {other:?}"),
            }
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let cfg = BenchmarkConfig { count: 3, seed: 1, width: 5, height: 5, ..BenchmarkConfig::default() };
        let report = run_benchmark::<Rational>(&cfg, &SolverOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# tool=lexmdp"));
        assert!(lines[3].starts_with("seed,val,shortest,v_distopt,v_baseline_first,v_baseline_last,v_baseline_rand,ratio,"));
        assert_eq!(lines.len(), 4 + 3);
    }
}
