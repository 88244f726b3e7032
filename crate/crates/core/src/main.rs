use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use local_adjust::baselines::{baseline_adjustment_sets, run_baseline, BaselineSpec, EHS_DEFAULT_MAX_COND};
use local_adjust::bench::{run_bench, BenchOptions, Suite, DESK_SIZES, FULL_SIZES};
use local_adjust::ci::{auto_backend, CiBackend, Oracle, DEFAULT_ALPHA};
use local_adjust::data::Dataset;
use local_adjust::datagen::{mask_latents, parse_model_config, presets, ModelConfig};
use local_adjust::discovery::DEFAULT_MAX_COND;
use local_adjust::estimate::{EffectScale, Estimator};
use local_adjust::graph::{parse_graph_spec, Mag};
use local_adjust::search::{run_ce2ls, write_csv_report, write_text_report, SearchConfig, Verdict, DEFAULT_MAX_LEVEL};

const EXIT_NO_EFFECT: u8 = 10;
const EXIT_NON_IDENTIFIABLE: u8 = 11;
const EXIT_UNDETERMINED: u8 = 12;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NO_INPUT: u8 = 66;
const EXIT_SOFTWARE: u8 = 70;
const EXIT_IO: u8 = 74;
/// A conformance check failed.
const EXIT_CHECK_FAILED: u8 = 1;

#[derive(Parser)]
#[command(name = "local-adjust", version, about = "Local identification and estimation of causal effects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the effect of a treatment on an outcome and estimate it.
    Estimate(EstimateArgs),
    /// Sample a dataset from a SEM or discrete network configuration.
    Simulate(SimulateArgs),
    /// Run a benchmark suite: group1, group2 or oracle-conformance.
    Bench(BenchArgs),
    /// Check a graph file and, given endpoints, list its minimal adjustment sets.
    Verify(VerifyArgs),
    /// Print the latent projection of a DAG.
    Project(ProjectArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    /// Statistical tests on `--data`.
    Data,
    /// m-separation in `--graph`.
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Difference,
    LogOr,
    RiskDifference,
}

impl From<ScaleArg> for EffectScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Difference => EffectScale::Difference,
            ScaleArg::LogOr => EffectScale::LogOddsRatio,
            ScaleArg::RiskDifference => EffectScale::RiskDifference,
        }
    }
}

#[derive(Args, Clone)]
struct SearchArgs {
    /// Significance level of every CI test.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Largest conditioning set in adjacency learning.
    #[arg(long, default_value_t = DEFAULT_MAX_COND)]
    max_cond: usize,
    /// Largest adjustment set searched.
    #[arg(long, default_value_t = DEFAULT_MAX_LEVEL)]
    max_level: usize,
    /// Keep searching after a no-effect witness.
    #[arg(long)]
    exhaustive: bool,
    /// Repeat an inconclusive search over all covariates.
    #[arg(long)]
    widen: bool,
}

impl SearchArgs {
    fn config(&self) -> Result<SearchConfig, Failure> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Failure::usage(format!("--alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.max_cond == 0 || self.max_level == 0 {
            return Err(Failure::usage("--max-cond and --max-level must be at least 1"));
        }
        Ok(SearchConfig {
            max_cond: self.max_cond,
            max_level: self.max_level,
            exhaustive: self.exhaustive,
            widen: self.widen,
            ..SearchConfig::default()
        })
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// CSV dataset (header row of names).
    #[arg(long)]
    data: Option<PathBuf>,
    /// MAG in the plain-text graph format.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Treatment variable.
    #[arg(long)]
    treatment: String,
    /// Outcome variable.
    #[arg(long)]
    outcome: String,
    /// Pretreatment covariates, comma-separated; defaults to every other variable.
    #[arg(long, value_delimiter = ',')]
    covariates: Option<Vec<String>>,
    /// Defaults to `oracle` when only `--graph` is given.
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
    /// `ce2ls` or a baseline: null, pre, mass-xw, mass-xy, mass-qw, mass-zy,
    /// disjunctive, ehs.
    #[arg(long, default_value = "ce2ls")]
    strategy: String,
    /// Subset-size cap of the exhaustive baseline; `none` removes it.
    #[arg(long, default_value_t = EHS_DEFAULT_MAX_COND.to_string())]
    ehs_max_cond: String,
    /// Effect scale; defaults to a difference for continuous outcomes and the
    /// log odds ratio for binary ones.
    #[arg(long, value_enum)]
    scale: Option<ScaleArg>,
    /// Also write a CSV report here.
    #[arg(long)]
    report_csv: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Configuration file, or `group1` / `group2` for the shipped models.
    config: String,
    /// Number of rows.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; with latent variables the masked copy is written next to it
    /// with a `.masked` suffix before the extension.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// group1, group2 or oracle-conformance.
    suite: String,
    /// Seeds per sample size.
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample sizes, comma-separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Use the large sample sizes instead of the desk-scale defaults.
    #[arg(long, conflicts_with = "sizes")]
    full_sizes: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Random models in the conformance suite.
    #[arg(long, default_value_t = 200)]
    cases: usize,
    /// Subset-size cap of the exhaustive baseline.
    #[arg(long, default_value_t = EHS_DEFAULT_MAX_COND)]
    ehs_max_cond: usize,
    /// Also write the table as CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// MAG or DAG in the plain-text graph format.
    graph: PathBuf,
    #[arg(long, requires = "outcome")]
    treatment: Option<String>,
    #[arg(long, requires = "treatment")]
    outcome: Option<String>,
    /// Covariates the adjustment sets are drawn from; defaults to every other node.
    #[arg(long, value_delimiter = ',')]
    covariates: Option<Vec<String>>,
}

#[derive(Args)]
struct ProjectArgs {
    /// DAG file; `latent` lines are honoured.
    graph: PathBuf,
    /// Extra latent variables, comma-separated.
    #[arg(long, value_delimiter = ',')]
    latents: Vec<String>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure::new(EXIT_USAGE, message)
    }

    fn data(e: impl std::fmt::Display) -> Self {
        Failure::new(EXIT_DATA, e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(EXIT_IO, e.to_string())
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_NO_INPUT, format!("{}: {e}", path.display())))
}

fn read_mag(path: &Path) -> Result<Mag, Failure> {
    let text = read_text(path)?;
    parse_graph_spec(&text)
        .and_then(|s| s.to_mag())
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn read_data(path: &Path) -> Result<Dataset, Failure> {
    if !path.exists() {
        return Err(Failure::new(EXIT_NO_INPUT, format!("{}: no such file", path.display())));
    }
    Dataset::from_csv_path(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Identifiable => 0,
        Verdict::NoEffect => EXIT_NO_EFFECT,
        Verdict::NonIdentifiable => EXIT_NON_IDENTIFIABLE,
        Verdict::Undetermined => EXIT_UNDETERMINED,
    }
}

fn estimate(args: &EstimateArgs) -> Result<u8, Failure> {
    let config = args.search.config()?;
    let backend_kind = match (args.backend, &args.graph, &args.data) {
        (Some(b), _, _) => b,
        (None, Some(_), None) => BackendKind::Oracle,
        (None, _, Some(_)) => BackendKind::Data,
        (None, None, None) => return Err(Failure::usage("one of --data or --graph is required")),
    };
    let data = args.data.as_deref().map(read_data).transpose()?;
    let backend: Box<dyn CiBackend> = match backend_kind {
        BackendKind::Oracle => {
            let path = args.graph.as_deref().ok_or_else(|| Failure::usage("--backend oracle needs --graph"))?;
            Box::new(Oracle::new(read_mag(path)?))
        }
        BackendKind::Data => {
            let d = data.as_ref().ok_or_else(|| Failure::usage("--backend data needs --data"))?;
            auto_backend(d, args.search.alpha).map_err(Failure::data)?
        }
    };
    let estimator = data
        .as_ref()
        .map(|d| Estimator::new(d, &args.treatment, &args.outcome, args.scale.map(Into::into)))
        .transpose()
        .map_err(Failure::data)?;

    let index = |name: &str| {
        backend
            .index_of(name)
            .ok_or_else(|| Failure::data(format!("unknown variable `{name}`")))
    };
    let (w, y) = (index(&args.treatment)?, index(&args.outcome)?);
    let x: Vec<usize> = match &args.covariates {
        Some(names) => names.iter().map(|n| index(n)).collect::<Result<_, _>>()?,
        None => (0..backend.variables().len()).filter(|&v| v != w && v != y).collect(),
    };

    let stdout = io::stdout();
    let mut out = stdout.lock();
    if args.strategy.eq_ignore_ascii_case("ce2ls") {
        let outcome = run_ce2ls(backend.as_ref(), w, y, &x, &config, estimator.as_ref())
            .map_err(|e| Failure::new(EXIT_SOFTWARE, e.to_string()))?;
        write_text_report(&mut out, &outcome)?;
        if let Some(path) = &args.report_csv {
            let mut f = create(path)?;
            write_csv_report(&mut f, &outcome)?;
            f.flush()?;
        }
        return Ok(verdict_code(outcome.verdict));
    }

    let mut spec: BaselineSpec = args.strategy.parse().map_err(|e| Failure::usage(format!("{e}")))?;
    if let BaselineSpec::Ehs { max_cond } = &mut spec {
        *max_cond = match args.ehs_max_cond.as_str() {
            "none" => None,
            s => Some(s.parse().map_err(|_| Failure::usage(format!("--ehs-max-cond: `{s}` is not a number")))?),
        };
    }
    let names = backend.variables();
    writeln!(out, "treatment: {}", names[w])?;
    writeln!(out, "outcome:   {}", names[y])?;
    writeln!(out, "strategy:  {spec}")?;
    let start = backend.tests_performed();
    let (sets, effects, ace) = match &estimator {
        Some(est) => {
            let o = run_baseline(backend.as_ref(), est, w, y, &x, spec, config.max_cond)
                .map_err(|e| Failure::new(EXIT_SOFTWARE, e.to_string()))?;
            let effects: Vec<Option<f64>> = o.estimate.per_set.iter().map(|(_, v)| Some(*v)).collect();
            (o.sets, effects, Some(o.estimate.ace))
        }
        None => {
            let sets = baseline_adjustment_sets(backend.as_ref(), w, y, &x, spec, config.max_cond)
                .map_err(|e| Failure::new(EXIT_SOFTWARE, e.to_string()))?;
            let sets: Vec<Vec<String>> = sets
                .iter()
                .map(|s| s.iter().map(|&v| names[v].clone()).collect())
                .collect();
            let effects = vec![None; sets.len()];
            (sets, effects, None)
        }
    };
    writeln!(out)?;
    writeln!(out, "adjustment sets:")?;
    for (s, e) in sets.iter().zip(&effects) {
        let set = format!("{{{}}}", s.join(", "));
        match e {
            Some(v) => writeln!(out, "  {set:<30} effect {v:.6}")?,
            None => writeln!(out, "  {set}")?,
        }
    }
    if let Some(a) = ace {
        writeln!(out, "ACE:     {a:.6}")?;
    }
    writeln!(out)?;
    writeln!(out, "CI tests: {}", backend.tests_performed() - start)?;
    if let Some(path) = &args.report_csv {
        let mut f = create(path)?;
        writeln!(f, "set,size,effect")?;
        for (s, e) in sets.iter().zip(&effects) {
            writeln!(f, "{},{},{}", s.join(";"), s.len(), e.map(|v| v.to_string()).unwrap_or_default())?;
        }
        f.flush()?;
    }
    Ok(0)
}

fn load_config(name: &str) -> Result<ModelConfig, Failure> {
    let text = match presets::config_text(name) {
        Some(t) => t.to_string(),
        None => read_text(Path::new(name))?,
    };
    parse_model_config(&text).map_err(|e| Failure::data(format!("{name}: {e}")))
}

fn masked_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("data");
    let name = match out.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}.masked.{ext}"),
        None => format!("{stem}.masked"),
    };
    out.with_file_name(name)
}

fn simulate(args: &SimulateArgs) -> Result<u8, Failure> {
    if args.n == 0 {
        return Err(Failure::usage("--n must be at least 1"));
    }
    let config = load_config(&args.config)?;
    let data = config.model.sample(args.n, args.seed).map_err(Failure::data)?;
    let mut f = create(&args.out)?;
    data.write_csv(&mut f).map_err(Failure::data)?;
    f.flush()?;
    println!("wrote {} ({} rows, {} columns)", args.out.display(), data.n_rows(), data.n_cols());
    if !config.latents.is_empty() {
        let (w, y) = config.endpoints().map_err(Failure::data)?;
        let masked = mask_latents(&data, &config.latents, w, y).map_err(Failure::data)?;
        let path = masked_path(&args.out);
        let mut f = create(&path)?;
        masked.write_csv(&mut f).map_err(Failure::data)?;
        f.flush()?;
        println!("wrote {} ({} rows, {} columns)", path.display(), masked.n_rows(), masked.n_cols());
    }
    if config.endpoints().is_ok() {
        match config.true_effect() {
            Ok(t) => println!("true effect: {t}"),
            Err(e) => println!("true effect: unavailable ({e})"),
        }
    }
    Ok(0)
}

fn bench(args: &BenchArgs) -> Result<u8, Failure> {
    let suite: Suite = args.suite.parse().map_err(|e| Failure::usage(format!("{e}")))?;
    let sizes = match (&args.sizes, args.full_sizes) {
        (Some(s), _) => s.clone(),
        (None, true) => FULL_SIZES.to_vec(),
        (None, false) => DESK_SIZES.to_vec(),
    };
    if sizes.contains(&0) {
        return Err(Failure::usage("sample sizes must be at least 1"));
    }
    let opts = BenchOptions {
        sizes,
        seeds: args.seeds,
        base_seed: args.seed,
        alpha: args.search.alpha,
        search: args.search.config()?,
        ehs_max_cond: args.ehs_max_cond,
        workers: args.workers,
        conformance_cases: args.cases,
    };
    let report = run_bench(suite, &opts).map_err(|e| Failure::new(EXIT_SOFTWARE, e.to_string()))?;
    report.write_text(io::stdout().lock())?;
    if let Some(path) = &args.csv {
        let mut f = create(path)?;
        report.write_csv(&mut f)?;
        f.flush()?;
    }
    Ok(if report.all_checks_pass() { 0 } else { EXIT_CHECK_FAILED })
}

fn verify(args: &VerifyArgs) -> Result<u8, Failure> {
    let mag = read_mag(&args.graph)?;
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{} nodes, {} directed and {} bidirected edges",
        mag.len(),
        mag.directed_edges().len(),
        mag.bidirected_edges().len()
    )?;
    writeln!(out, "ancestral: yes")?;
    writeln!(out, "maximal:   {}", if mag.is_maximal() { "yes" } else { "no" })?;
    let (Some(t), Some(o)) = (&args.treatment, &args.outcome) else {
        return Ok(0);
    };
    let (w, y) = (mag.node(t).map_err(Failure::data)?, mag.node(o).map_err(Failure::data)?);
    let universe: Vec<usize> = match &args.covariates {
        Some(c) => mag.nodes_of(c).map_err(Failure::data)?,
        None => (0..mag.len()).filter(|&v| v != w && v != y).collect(),
    };
    let amenable = mag.is_amenable(w, y).map_err(Failure::data)?;
    let forbidden = mag.forbidden_set(w, y).map_err(Failure::data)?;
    writeln!(out, "amenable:  {}", if amenable { "yes" } else { "no" })?;
    writeln!(out, "forbidden: {{{}}}", mag.names_of(&forbidden.nodes).join(", "))?;
    let sets = mag.enumerate_minimal_gac_sets(w, y, &universe).map_err(Failure::data)?;
    writeln!(out, "minimal adjustment sets:")?;
    if sets.is_empty() {
        writeln!(out, "  none")?;
    }
    for s in &sets {
        writeln!(out, "  {{{}}}", mag.names_of(s).join(", "))?;
    }
    Ok(0)
}

fn project(args: &ProjectArgs) -> Result<u8, Failure> {
    let text = read_text(&args.graph)?;
    let config = parse_model_config(&text).map_err(|e| Failure::data(format!("{}: {e}", args.graph.display())))?;
    let mut latents = config.latents.clone();
    latents.extend(args.latents.iter().cloned());
    let mag = config.model.dag().latent_project(&latents).map_err(Failure::data)?;
    print!("{mag}");
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Simulate(a) => simulate(a),
        Command::Bench(a) => bench(a),
        Command::Verify(a) => verify(a),
        Command::Project(a) => project(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masked_file_name() {
        assert_eq!(masked_path(Path::new("out/d.csv")), PathBuf::from("out/d.masked.csv"));
        assert_eq!(masked_path(Path::new("d")), PathBuf::from("d.masked"));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
