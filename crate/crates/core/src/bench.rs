//! Benchmark suites: effect recovery on the shipped latent-variable models and
//! conformance of the oracle-backed search.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::baselines::{run_baseline, BaselineSpec, EHS_DEFAULT_MAX_COND};
use crate::ci::{auto_backend, Oracle};
use crate::datagen::random::{random_pretreatment_case, WyEdge};
use crate::datagen::{presets, screened_sample, ModelConfig};
use crate::discovery::SeparatorPool;
use crate::estimate::Estimator;
use crate::graph::Mag;
use crate::search::{run_ce2ls_by_name, SearchConfig, SearchOutcome, Verdict};

/// Sample sizes used unless others are requested.
pub const DESK_SIZES: [usize; 3] = [5_000, 20_000, 50_000];
/// Larger sample sizes, selectable from the command line.
pub const FULL_SIZES: [usize; 2] = [200_000, 500_000];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown suite `{0}` (expected group1, group2 or oracle-conformance)")]
    UnknownSuite(String),
    #[error("could not build a worker pool: {0}")]
    Pool(String),
    #[error("{0}")]
    Setup(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Group1,
    Group2,
    OracleConformance,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Group1 => "group1",
            Suite::Group2 => "group2",
            Suite::OracleConformance => "oracle-conformance",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s.to_ascii_lowercase().as_str() {
            "group1" => Ok(Suite::Group1),
            "group2" => Ok(Suite::Group2),
            "oracle-conformance" => Ok(Suite::OracleConformance),
            _ => Err(BenchError::UnknownSuite(s.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub sizes: Vec<usize>,
    /// Seeds `base_seed..base_seed + seeds` per sample size.
    pub seeds: u64,
    pub base_seed: u64,
    pub alpha: f64,
    pub search: SearchConfig,
    pub ehs_max_cond: usize,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
    /// Random MAGs checked by the conformance suite.
    pub conformance_cases: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            sizes: DESK_SIZES.to_vec(),
            seeds: 20,
            base_seed: 0,
            alpha: crate::ci::DEFAULT_ALPHA,
            search: SearchConfig::default(),
            ehs_max_cond: EHS_DEFAULT_MAX_COND,
            workers: 0,
            conformance_cases: 200,
        }
    }
}

/// Search settings under which the oracle-backed search is complete on the
/// random conformance models (at most 12 nodes).
pub fn conformance_search_config() -> SearchConfig {
    SearchConfig {
        max_cond: 12,
        max_level: 12,
        separators: SeparatorPool::AllCandidates,
        widen: true,
        ..SearchConfig::default()
    }
}

/// Strategy name used in reports for the local search.
pub const CE2LS: &str = "ce2ls";

/// One strategy on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub strategy: String,
    pub n: usize,
    pub seed: u64,
    /// Seed actually sampled after screening, if any was usable.
    pub data_seed: Option<u64>,
    pub truth: f64,
    pub estimate: Option<f64>,
    pub ci_tests: Option<u64>,
    /// `ok` or a failure marker.
    pub status: String,
}

impl Cell {
    /// `|estimate - truth| / |truth| * 100`.
    pub fn relative_error(&self) -> Option<f64> {
        self.estimate.map(|e| relative_error(e, self.truth))
    }
}

pub fn relative_error(estimate: f64, truth: f64) -> f64 {
    (estimate - truth).abs() / truth.abs() * 100.0
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub suite: Suite,
    pub cells: Vec<Cell>,
    pub checks: Vec<Check>,
}

pub fn run_bench(suite: Suite, opts: &BenchOptions) -> Result<BenchReport, BenchError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    pool.install(|| match suite {
        Suite::Group1 => recovery(suite, &presets::group1(), opts),
        Suite::Group2 => recovery(suite, &presets::group2(), opts),
        Suite::OracleConformance => Ok(BenchReport {
            suite,
            cells: Vec::new(),
            checks: conformance(opts),
        }),
    })
}

/// Strategies compared on every dataset, in report order.
pub fn strategies(ehs_max_cond: usize) -> Vec<Option<BaselineSpec>> {
    let mut out = vec![None];
    for spec in BaselineSpec::ALL {
        out.push(Some(match spec {
            BaselineSpec::Ehs { .. } => BaselineSpec::Ehs {
                max_cond: Some(ehs_max_cond),
            },
            s => s,
        }));
    }
    out
}

fn recovery(suite: Suite, config: &ModelConfig, opts: &BenchOptions) -> Result<BenchReport, BenchError> {
    let truth = config.true_effect().map_err(|e| BenchError::Setup(e.to_string()))?;
    let jobs: Vec<(usize, u64)> = opts
        .sizes
        .iter()
        .flat_map(|&n| (0..opts.seeds).map(move |k| (n, opts.base_seed + k)))
        .collect();
    let cells: Vec<Vec<Cell>> = jobs
        .par_iter()
        .map(|&(n, seed)| dataset_cells(config, truth, n, seed, opts))
        .collect();
    Ok(BenchReport {
        suite,
        cells: cells.into_iter().flatten().collect(),
        checks: Vec::new(),
    })
}

/// Every strategy on one screened dataset.
pub fn dataset_cells(config: &ModelConfig, truth: f64, n: usize, seed: u64, opts: &BenchOptions) -> Vec<Cell> {
    let names: Vec<String> = strategies(opts.ehs_max_cond)
        .iter()
        .map(|s| s.map_or(CE2LS.to_string(), |s| s.label().to_string()))
        .collect();
    let failed = |status: String, data_seed| {
        names
            .iter()
            .map(|s| Cell {
                strategy: s.clone(),
                n,
                seed,
                data_seed,
                truth,
                estimate: None,
                ci_tests: None,
                status: status.clone(),
            })
            .collect()
    };
    let Ok((w, y)) = config.endpoints() else {
        return failed("error: treatment or outcome missing".into(), None);
    };
    let screened = match screened_sample(config, n, seed, opts.alpha, &opts.search) {
        Ok(s) => s,
        Err(e) => return failed(format!("unusable: {e}"), None),
    };
    let data = &screened.data;
    let data_seed = Some(screened.seed);
    let backend = match auto_backend(data, opts.alpha) {
        Ok(b) => b,
        Err(e) => return failed(format!("error: {e}"), data_seed),
    };
    let estimator = match Estimator::new(data, w, y, None) {
        Ok(e) => e,
        Err(e) => return failed(format!("error: {e}"), data_seed),
    };
    let covariates = config.covariates();
    let (Some(wi), Some(yi)) = (backend.index_of(w), backend.index_of(y)) else {
        return failed("error: treatment or outcome not in data".into(), data_seed);
    };
    let xi: Vec<usize> = covariates.iter().filter_map(|c| backend.index_of(c)).collect();

    let mut out = Vec::new();
    for (spec, name) in strategies(opts.ehs_max_cond).into_iter().zip(&names) {
        let result: Result<(f64, u64), String> = match spec {
            None => run_ce2ls_by_name(backend.as_ref(), w, y, &covariates, &opts.search, Some(&estimator))
                .map_err(|e| e.to_string())
                .and_then(|o| match o.ace() {
                    Some(a) => Ok((a, o.stats.ci_tests)),
                    None => Err(format!("no estimate: {}", o.verdict.as_str())),
                }),
            Some(spec) => run_baseline(backend.as_ref(), &estimator, wi, yi, &xi, spec, opts.search.max_cond)
                .map(|o| (o.estimate.ace, o.ci_tests))
                .map_err(|e| e.to_string()),
        };
        let (estimate, ci_tests, status) = match result {
            Ok((a, t)) => (Some(a), Some(t), "ok".to_string()),
            Err(e) => (None, None, format!("error: {e}")),
        };
        out.push(Cell {
            strategy: name.clone(),
            n,
            seed,
            data_seed,
            truth,
            estimate,
            ci_tests,
            status,
        });
    }
    out
}

/// Expected local structure and search trace for the Group I MAG.
pub struct GoldenTrace {
    pub adj_w: &'static [&'static str],
    pub adj_y: &'static [&'static str],
    pub q: &'static [&'static str],
    pub adj_r: &'static [&'static str],
    pub omega: &'static [&'static str],
    pub psi: &'static [&'static [&'static str]],
    /// Candidate lists by level for the first COSO loop.
    pub levels: &'static [&'static [&'static [&'static str]]],
}

pub const GROUP1_TRACE: GoldenTrace = GoldenTrace {
    adj_w: &["X1", "X3", "X5", "X8"],
    adj_y: &["X5", "X7", "X8", "X9"],
    q: &["X7"],
    adj_r: &["X1", "X3", "X5", "X8", "X9"],
    omega: &["X1", "X3"],
    psi: &[&["X3", "X5"], &["X5", "X9"]],
    levels: &[
        &[&[]],
        &[&["X3"], &["X5"], &["X8"], &["X9"]],
        &[
            &["X3", "X5"],
            &["X3", "X8"],
            &["X3", "X9"],
            &["X5", "X8"],
            &["X5", "X9"],
            &["X8", "X9"],
        ],
        &[&["X3", "X8", "X9"]],
    ],
};

/// Differences between a search outcome and a golden trace; empty when they match.
pub fn trace_mismatches(out: &SearchOutcome, golden: &GoldenTrace) -> Vec<String> {
    let mut diffs = Vec::new();
    let ctx = &out.context;
    for (label, got, want) in [
        ("Adj(W)", &ctx.adj_w, golden.adj_w),
        ("Adj(Y)", &ctx.adj_y, golden.adj_y),
        ("Q", &ctx.q_removed, golden.q),
        ("Adj_R", &ctx.adj_r, golden.adj_r),
        ("Omega", &ctx.omega, golden.omega),
    ] {
        let got = out.names_of(got);
        if got != want {
            diffs.push(format!("{label}: got {got:?}, expected {want:?}"));
        }
    }
    let psi = out.psi_sets();
    let want_psi: Vec<Vec<&str>> = golden.psi.iter().map(|s| s.to_vec()).collect();
    if psi != want_psi {
        diffs.push(format!("Psi: got {psi:?}, expected {want_psi:?}"));
    }
    match out.traces.first() {
        None => diffs.push("no search trace".into()),
        Some(t) => {
            let got: Vec<Vec<Vec<&str>>> = t
                .levels
                .iter()
                .map(|l| l.candidates.iter().map(|z| out.names_of(z)).collect())
                .collect();
            let want: Vec<Vec<Vec<&str>>> = golden
                .levels
                .iter()
                .map(|l| l.iter().map(|z| z.to_vec()).collect())
                .collect();
            if got != want {
                diffs.push(format!("levels: got {got:?}, expected {want:?}"));
            }
        }
    }
    diffs
}

fn covariates_of(mag: &Mag) -> Vec<String> {
    mag.names().iter().filter(|v| *v != "W" && *v != "Y").cloned().collect()
}

/// Verdict and adjustment-set comparison for one MAG against graphical truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseCheck {
    pub verdict_ok: bool,
    /// `None` when the verdict is not `Identifiable`.
    pub sets_ok: Option<bool>,
    pub detail: String,
}

/// Runs the oracle-backed search on `mag` (treatment `W`, outcome `Y`) and
/// compares the verdict with the `W`-`Y` edge and the adjustment sets with the
/// minimal GAC sets of the searched universe.
pub fn check_case(mag: &Mag, config: &SearchConfig) -> Result<CaseCheck, String> {
    let oracle = Oracle::new(mag.clone());
    let out = run_ce2ls_by_name(&oracle, "W", "Y", &covariates_of(mag), config, None).map_err(|e| e.to_string())?;
    let (w, y) = (mag.node("W").map_err(|e| e.to_string())?, mag.node("Y").map_err(|e| e.to_string())?);
    let edge = WyEdge::of(mag, w, y);
    let verdict_ok = matches!(
        (out.verdict, edge),
        (Verdict::NoEffect, WyEdge::None)
            | (Verdict::NonIdentifiable, WyEdge::Bidirected)
            | (Verdict::Identifiable, WyEdge::Directed)
    );
    let mut detail = format!("verdict {} for edge {edge:?}", out.verdict.as_str());
    let sets_ok = if out.verdict == Verdict::Identifiable {
        let universe: Vec<usize> = if out.stats.widened {
            (0..mag.len()).filter(|&v| v != w && v != y).collect()
        } else {
            out.context.adj_r.clone()
        };
        // Sets containing every COSO candidate are outside every per-COSO universe.
        let omega = &out.context.omega;
        let mut expected: Vec<Vec<String>> = mag
            .enumerate_minimal_gac_sets_up_to(w, y, &universe, config.max_level)
            .map_err(|e| e.to_string())?
            .into_iter()
            .filter(|s| !omega.iter().all(|v| s.contains(v)))
            .map(|s| mag.names_of(&s))
            .collect();
        let mut got: Vec<Vec<String>> = out
            .psi_sets()
            .into_iter()
            .map(|s| s.into_iter().map(String::from).collect())
            .collect();
        expected.sort();
        got.sort();
        if got != expected {
            detail = format!("{detail}; sets {got:?}, minimal GAC sets {expected:?}");
        }
        Some(got == expected)
    } else {
        None
    };
    Ok(CaseCheck {
        verdict_ok,
        sets_ok,
        detail,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConformanceSummary {
    pub cases: usize,
    pub verdicts_ok: usize,
    pub identifiable: usize,
    pub sets_ok: usize,
    /// `(case, detail)` for every case with a failed check or an error.
    pub failures: Vec<(usize, String)>,
}

/// Checks `cases` random pretreatment MAGs drawn from `seed`.
pub fn random_conformance(cases: usize, seed: u64, config: &SearchConfig) -> ConformanceSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mags: Vec<Mag> = (0..cases).map(|_| random_pretreatment_case(&mut rng).mag).collect();
    let results: Vec<Result<CaseCheck, String>> = mags.par_iter().map(|m| check_case(m, config)).collect();
    let mut s = ConformanceSummary {
        cases,
        ..Default::default()
    };
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(c) => {
                s.verdicts_ok += c.verdict_ok as usize;
                if let Some(ok) = c.sets_ok {
                    s.identifiable += 1;
                    s.sets_ok += ok as usize;
                }
                if !c.verdict_ok || c.sets_ok == Some(false) {
                    s.failures.push((i, c.detail));
                }
            }
            Err(e) => s.failures.push((i, format!("error: {e}"))),
        }
    }
    s
}

fn conformance(opts: &BenchOptions) -> Vec<Check> {
    let mut checks = Vec::new();
    let group1_mag = presets::group1_mag();
    let trace = Oracle::new(group1_mag.clone());
    let check = match run_ce2ls_by_name(&trace, "W", "Y", &covariates_of(&group1_mag), &opts.search, None) {
        Ok(out) => {
            let diffs = trace_mismatches(&out, &GROUP1_TRACE);
            Check {
                name: "group1-trace".into(),
                passed: diffs.is_empty(),
                detail: if diffs.is_empty() { "exact match".into() } else { diffs.join("; ") },
            }
        }
        Err(e) => Check {
            name: "group1-trace".into(),
            passed: false,
            detail: format!("error: {e}"),
        },
    };
    checks.push(check);
    for (name, mag) in [("group1-gac", group1_mag), ("group2-gac", presets::group2_mag())] {
        checks.push(match check_case(&mag, &opts.search) {
            Ok(c) => Check {
                name: name.into(),
                passed: c.verdict_ok && c.sets_ok != Some(false),
                detail: c.detail,
            },
            Err(e) => Check {
                name: name.into(),
                passed: false,
                detail: format!("error: {e}"),
            },
        });
    }
    if opts.conformance_cases > 0 {
        let s = random_conformance(opts.conformance_cases, opts.base_seed, &conformance_search_config());
        checks.push(Check {
            name: "random-verdicts".into(),
            passed: s.verdicts_ok == s.cases,
            detail: format!("{}/{} verdicts match the treatment-outcome edge", s.verdicts_ok, s.cases),
        });
        let mut detail = format!("{}/{} identifiable cases match the minimal GAC sets", s.sets_ok, s.identifiable);
        for (i, d) in &s.failures {
            detail.push_str(&format!("; case {i}: {d}"));
        }
        checks.push(Check {
            name: "random-adjustment-sets".into(),
            passed: s.sets_ok == s.identifiable,
            detail,
        });
    }
    checks
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    })
}

/// Per-strategy summary at one sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategySummary {
    pub strategy: String,
    pub n: usize,
    pub median_relative_error: Option<f64>,
    pub mean_ci_tests: Option<f64>,
    pub failures: usize,
}

impl BenchReport {
    /// Summaries ordered by sample size, then strategy in run order.
    pub fn summaries(&self) -> Vec<StrategySummary> {
        let mut keys: Vec<(usize, String)> = Vec::new();
        for c in &self.cells {
            let k = (c.n, c.strategy.clone());
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys.sort_by_key(|(n, _)| *n);
        keys.into_iter()
            .map(|(n, strategy)| {
                let cells: Vec<&Cell> = self.cells.iter().filter(|c| c.n == n && c.strategy == strategy).collect();
                let mut errors: Vec<f64> = cells.iter().filter_map(|c| c.relative_error()).collect();
                let tests: Vec<f64> = cells.iter().filter_map(|c| c.ci_tests.map(|t| t as f64)).collect();
                StrategySummary {
                    strategy,
                    n,
                    median_relative_error: median(&mut errors),
                    mean_ci_tests: (!tests.is_empty()).then(|| tests.iter().sum::<f64>() / tests.len() as f64),
                    failures: cells.iter().filter(|c| c.estimate.is_none()).count(),
                }
            })
            .collect()
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One row per cell, or one row per check for the conformance suite.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let to_io = |e: csv::Error| io::Error::new(io::ErrorKind::Other, e);
        if self.suite == Suite::OracleConformance {
            w.write_record(["check", "passed", "detail"]).map_err(to_io)?;
            for c in &self.checks {
                w.write_record([c.name.as_str(), if c.passed { "true" } else { "false" }, &c.detail])
                    .map_err(to_io)?;
            }
        } else {
            w.write_record([
                "suite", "strategy", "n", "seed", "data_seed", "truth", "estimate", "relative_error", "ci_tests", "status",
            ])
            .map_err(to_io)?;
            let opt = |v: Option<String>| v.unwrap_or_default();
            for c in &self.cells {
                w.write_record([
                    self.suite.as_str().to_string(),
                    c.strategy.clone(),
                    c.n.to_string(),
                    c.seed.to_string(),
                    opt(c.data_seed.map(|s| s.to_string())),
                    c.truth.to_string(),
                    opt(c.estimate.map(|e| format!("{e:.6}"))),
                    opt(c.relative_error().map(|e| format!("{e:.4}"))),
                    opt(c.ci_tests.map(|t| t.to_string())),
                    c.status.clone(),
                ])
                .map_err(to_io)?;
            }
        }
        w.flush()
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "suite: {}", self.suite)?;
        if self.suite == Suite::OracleConformance {
            for c in &self.checks {
                writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
            }
            return Ok(());
        }
        if let Some(c) = self.cells.first() {
            writeln!(out, "true effect: {}", c.truth)?;
        }
        writeln!(
            out,
            "{:>8}  {:<12} {:>14} {:>14} {:>9}",
            "n", "strategy", "median rel.err", "mean CI tests", "failures"
        )?;
        let fmt = |v: Option<f64>, p: usize| v.map_or("-".to_string(), |v| format!("{v:.p$}"));
        for s in self.summaries() {
            writeln!(
                out,
                "{:>8}  {:<12} {:>13}% {:>14} {:>9}",
                s.n,
                s.strategy,
                fmt(s.median_relative_error, 2),
                fmt(s.mean_ci_tests, 1),
                s.failures
            )?;
        }
        Ok(())
    }
}
