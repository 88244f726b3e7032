//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if a criterion fails for a reason other than the documented limitation of
//! criterion 3.

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use local_adjust::baselines::{run_baseline, BaselineSpec};
use local_adjust::bench::conformance_search_config;
use local_adjust::ci::{CiBackend, CiQuery, FisherZ, Oracle, G2};
use local_adjust::data::Dataset;
use local_adjust::datagen::random::{random_linear_sem, random_logistic_bn, random_pretreatment_case};
use local_adjust::datagen::{presets, screened_sample, true_ace_linear, ModelConfig};
use local_adjust::estimate::{ace_linear, ace_mcor, Estimator};
use local_adjust::graph::{parse_graph_spec, Mag};
use local_adjust::search::{run_ce2ls, run_ce2ls_by_name, SearchConfig, Verdict};

enum Status {
    Pass,
    /// Red for a documented reason.
    KnownFail,
    Fail,
}

struct Line {
    status: Status,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Line {
    Line {
        status: Status::Pass,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Line {
    Line {
        status: Status::Fail,
        detail: detail.into(),
    }
}

fn check(ok: bool, detail: impl Into<String>) -> Line {
    if ok {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn covariates(names: &[String]) -> Vec<String> {
    names.iter().filter(|v| *v != "W" && *v != "Y").cloned().collect()
}

fn mag_of(text: &str) -> Mag {
    parse_graph_spec(text).unwrap().to_mag().unwrap()
}

fn names(sets: &[Vec<&str>]) -> Vec<Vec<String>> {
    sets.iter().map(|s| s.iter().map(|v| v.to_string()).collect()).collect()
}

fn golden_trace() -> Line {
    let mag = mag_of(include_str!("../configs/group1.mag"));
    let oracle = Oracle::new(mag.clone());
    let start = Instant::now();
    let out = run_ce2ls_by_name(&oracle, "W", "Y", &covariates(mag.names()), &SearchConfig::default(), None).unwrap();
    let elapsed = start.elapsed();
    let c = &out.context;
    let mut diffs = Vec::new();
    for (label, got, want) in [
        ("Adj(W)", out.names_of(&c.adj_w), vec!["X1", "X3", "X5", "X8"]),
        ("Adj(Y)", out.names_of(&c.adj_y), vec!["X5", "X7", "X8", "X9"]),
        ("Q", out.names_of(&c.q_removed), vec!["X7"]),
        ("Adj_R", out.names_of(&c.adj_r), vec!["X1", "X3", "X5", "X8", "X9"]),
        ("Omega", out.names_of(&c.omega), vec!["X1", "X3"]),
    ] {
        if got != want {
            diffs.push(format!("{label} {got:?}"));
        }
    }
    if out.verdict != Verdict::Identifiable {
        diffs.push(format!("verdict {}", out.verdict.as_str()));
    }
    if out.psi_sets() != [vec!["X3", "X5"], vec!["X5", "X9"]] {
        diffs.push(format!("Psi {:?}", out.psi_sets()));
    }
    let levels: Vec<Vec<Vec<&str>>> = out.traces[0]
        .levels
        .iter()
        .map(|l| l.candidates.iter().map(|z| out.names_of(z)).collect())
        .collect();
    let c2 = vec![
        vec!["X3", "X5"],
        vec!["X3", "X8"],
        vec!["X3", "X9"],
        vec!["X5", "X8"],
        vec!["X5", "X9"],
        vec!["X8", "X9"],
    ];
    if out.name(out.traces[0].coso) != "X1" || levels.get(2) != Some(&c2) || levels.get(3) != Some(&vec![vec!["X3", "X8", "X9"]]) {
        diffs.push(format!("levels {levels:?}"));
    }
    let fast = elapsed < Duration::from_secs(1);
    check(
        diffs.is_empty() && fast,
        if diffs.is_empty() {
            format!("exact match in {elapsed:.2?}")
        } else {
            format!("{} in {elapsed:.2?}", diffs.join("; "))
        },
    )
}

const RANDOM_CASES: usize = 300;
const RANDOM_SEED: u64 = 2024;

fn random_mags() -> Vec<Mag> {
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
    (0..RANDOM_CASES).map(|_| random_pretreatment_case(&mut rng).mag).collect()
}

fn three_case_soundness(mags: &[Mag]) -> Line {
    let start = Instant::now();
    let config = conformance_search_config();
    let mut wrong = Vec::new();
    let mut max_nodes = 0;
    for (i, mag) in mags.iter().enumerate() {
        max_nodes = max_nodes.max(mag.len());
        let (w, y) = (mag.node("W").unwrap(), mag.node("Y").unwrap());
        let expected = if mag.has_directed(w, y) {
            Verdict::Identifiable
        } else if mag.has_bidirected(w, y) {
            Verdict::NonIdentifiable
        } else {
            Verdict::NoEffect
        };
        match run_ce2ls_by_name(&Oracle::new(mag.clone()), "W", "Y", &covariates(mag.names()), &config, None) {
            Ok(o) if o.verdict == expected => {}
            Ok(o) => wrong.push(format!("case {i}: {} for {}", o.verdict.as_str(), expected.as_str())),
            Err(e) => wrong.push(format!("case {i}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    check(
        wrong.is_empty() && max_nodes <= 12 && elapsed < Duration::from_secs(30),
        format!(
            "{}/{} verdicts match the W-Y edge, at most {max_nodes} nodes, {elapsed:.2?}{}",
            mags.len() - wrong.len(),
            mags.len(),
            if wrong.is_empty() { String::new() } else { format!("; {}", wrong.join("; ")) }
        ),
    )
}

fn gac_equivalence(mags: &[Mag]) -> Line {
    let config = conformance_search_config();
    let (mut compared, mut matched) = (0, 0);
    let mut unexplained = Vec::new();
    let mut explained = Vec::new();
    for (i, mag) in mags.iter().enumerate() {
        let o = match run_ce2ls_by_name(&Oracle::new(mag.clone()), "W", "Y", &covariates(mag.names()), &config, None) {
            Ok(o) if o.verdict == Verdict::Identifiable => o,
            _ => continue,
        };
        compared += 1;
        let (w, y) = (mag.node("W").unwrap(), mag.node("Y").unwrap());
        let to_mag = |v: &usize| mag.node(o.name(*v)).unwrap();
        let universe: Vec<usize> = if o.stats.widened {
            (0..mag.len()).filter(|&v| v != w && v != y).collect()
        } else {
            o.context.adj_r.iter().map(to_mag).collect()
        };
        let omega: Vec<usize> = o.context.omega.iter().map(to_mag).collect();
        let expected: BTreeSet<Vec<String>> = mag
            .enumerate_minimal_gac_sets_up_to(w, y, &universe, config.max_level)
            .unwrap()
            .into_iter()
            .filter(|s| !omega.iter().all(|v| s.contains(v)))
            .map(|s| {
                let mut n = mag.names_of(&s);
                n.sort();
                n
            })
            .collect();
        let got: BTreeSet<Vec<String>> = names(&o.psi_sets())
            .into_iter()
            .map(|mut s| {
                s.sort();
                s
            })
            .collect();
        if got == expected {
            matched += 1;
            continue;
        }
        // A minimal set no COSO candidate can certify: every candidate outside it
        // stays dependent on Y given the set and W.
        let uncertifiable = |s: &Vec<String>| {
            let mut z = mag.nodes_of(s).unwrap();
            z.push(w);
            omega
                .iter()
                .filter(|v| !z.contains(v))
                .all(|&c| !mag.m_separated(c, y, &z).unwrap())
        };
        let extra: Vec<&Vec<String>> = got.difference(&expected).collect();
        let missing: Vec<&Vec<String>> = expected.difference(&got).collect();
        if extra.is_empty() && missing.iter().all(|s| uncertifiable(s)) {
            explained.push(format!("case {i}: {missing:?} not certifiable by any COSO candidate"));
        } else {
            unexplained.push(format!("case {i}: extra {extra:?}, missing {missing:?}"));
        }
    }
    let detail = format!(
        "{matched}/{compared} identifiable cases match the minimal GAC sets{}{}",
        if explained.is_empty() { String::new() } else { format!("; {}", explained.join("; ")) },
        if unexplained.is_empty() { String::new() } else { format!("; {}", unexplained.join("; ")) },
    );
    if !unexplained.is_empty() {
        fail(detail)
    } else if explained.is_empty() {
        pass(detail)
    } else {
        Line {
            status: Status::KnownFail,
            detail,
        }
    }
}

const GROUP_SIZES: [usize; 2] = [20_000, 50_000];
const GROUP_SEEDS: u64 = 20;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn rel_err(estimate: f64, truth: f64) -> f64 {
    (estimate - truth).abs() / truth.abs() * 100.0
}

/// Median relative errors of CE²LS and of each baseline over the seeds.
fn group_errors(config: &ModelConfig, n: usize, truth: f64, baselines: &[BaselineSpec]) -> Result<(f64, Vec<f64>), String> {
    let mut ce2ls = Vec::new();
    let mut base = vec![Vec::new(); baselines.len()];
    let search = SearchConfig::default();
    for seed in 0..GROUP_SEEDS {
        let data = screened_sample(config, n, seed, 0.05, &search)
            .map_err(|e| format!("seed {seed}: {e}"))?
            .data;
        let fz = FisherZ::new(&data, 0.05).unwrap();
        let est = Estimator::new(&data, "W", "Y", None).unwrap();
        let out = run_ce2ls_by_name(&fz, "W", "Y", &covariates(data.names()), &search, Some(&est))
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let ace = out.ace().ok_or(format!("seed {seed}: verdict {}", out.verdict.as_str()))?;
        ce2ls.push(rel_err(ace, truth));
        let (w, y) = (fz.index_of("W").unwrap(), fz.index_of("Y").unwrap());
        let x: Vec<usize> = covariates(data.names()).iter().map(|c| fz.index_of(c).unwrap()).collect();
        for (b, spec) in baselines.iter().enumerate() {
            let o = run_baseline(&fz, &est, w, y, &x, *spec, search.max_cond).map_err(|e| e.to_string())?;
            base[b].push(rel_err(o.estimate.ace, truth));
        }
    }
    Ok((median(ce2ls), base.into_iter().map(median).collect()))
}

fn group1_recovery() -> Line {
    let config = presets::group1();
    let truth = config.true_effect().unwrap();
    if truth != 0.5 {
        return fail(format!("configured true effect {truth}"));
    }
    let specs = [
        BaselineSpec::Pre,
        BaselineSpec::MassXw,
        BaselineSpec::MassXy,
        BaselineSpec::MassQw,
        BaselineSpec::MassZy,
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for n in GROUP_SIZES {
        match group_errors(&config, n, truth, &specs) {
            Ok((ce, base)) => {
                ok &= ce < 5.0 && base.iter().all(|&b| b > ce);
                let listed: Vec<String> = specs
                    .iter()
                    .zip(&base)
                    .map(|(s, b)| format!("{} {b:.2}%", s.label()))
                    .collect();
                parts.push(format!("n={n}: ce2ls median {ce:.2}%, {}", listed.join(", ")));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("n={n}: {e}"));
            }
        }
    }
    check(ok, format!("{GROUP_SEEDS} seeds; {}", parts.join("; ")))
}

fn group2_recovery() -> Line {
    let config = presets::group2();
    let truth = config.true_effect().unwrap();
    if truth != 2.0 {
        return fail(format!("configured true effect {truth}"));
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for n in GROUP_SIZES {
        match group_errors(&config, n, truth, &[]) {
            Ok((ce, _)) => {
                ok &= ce < 5.0;
                parts.push(format!("n={n}: ce2ls median {ce:.2}%"));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("n={n}: {e}"));
            }
        }
    }
    check(ok, format!("{GROUP_SEEDS} seeds; {}", parts.join("; ")))
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn efficiency() -> Line {
    let config = presets::group2();
    let search = SearchConfig::default();
    let data = screened_sample(&config, 20_000, 0, 0.05, &search).unwrap().data;
    let fz = FisherZ::new(&data, 0.05).unwrap();
    let x: Vec<usize> = covariates(data.names()).iter().map(|c| fz.index_of(c).unwrap()).collect();
    let (w, y) = (fz.index_of("W").unwrap(), fz.index_of("Y").unwrap());
    let est = Estimator::new(&data, "W", "Y", None).unwrap();
    let ce = run_ce2ls(&fz, w, y, &x, &search, None).unwrap().stats.ci_tests;
    let ehs = run_baseline(&fz, &est, w, y, &x, BaselineSpec::Ehs { max_cond: Some(6) }, search.max_cond)
        .unwrap()
        .ci_tests;
    let ratio = ehs as f64 / ce as f64;

    let sizes = [5_000usize, 20_000, 80_000];
    let mut times = Vec::new();
    for &n in &sizes {
        let data = screened_sample(&config, n, 0, 0.05, &search).unwrap().data;
        let mut best = f64::INFINITY;
        for _ in 0..7 {
            let start = Instant::now();
            let fz = FisherZ::new(&data, 0.05).unwrap();
            let est = Estimator::new(&data, "W", "Y", None).unwrap();
            run_ce2ls(&fz, w, y, &x, &search, Some(&est)).unwrap();
            best = best.min(start.elapsed().as_secs_f64());
        }
        times.push(best);
    }
    let lx: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let s = slope(&lx, &ly);
    check(
        ratio >= 2.0 && (0.8..=1.3).contains(&s),
        format!(
            "CI tests ce2ls {ce} vs ehs {ehs} ({ratio:.1}x); log-time/log-n slope {s:.2} (times {})",
            times.iter().map(|t| format!("{:.1}ms", t * 1e3)).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn rejection_rate(mut draw: impl FnMut(&mut ChaCha8Rng) -> Dataset, make: impl Fn(&Dataset) -> Box<dyn CiBackend>) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let trials = 1000;
    let rejected = (0..trials)
        .filter(|_| {
            let d = draw(&mut rng);
            !make(&d).test(&CiQuery::new(0, 1, [2])).unwrap().independent
        })
        .count();
    rejected as f64 / trials as f64
}

fn calibration() -> Line {
    let names = || vec!["A".to_string(), "B".to_string(), "C".to_string()];
    let gaussian = |rng: &mut ChaCha8Rng| {
        let cols = (0..3)
            .map(|_| (0..300).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect())
            .collect();
        Dataset::new(names(), cols).unwrap()
    };
    let discrete = |rng: &mut ChaCha8Rng| {
        let cols = (0..3)
            .map(|_| (0..1000).map(|_| rng.gen_range(0..3) as f64).collect())
            .collect();
        Dataset::new(names(), cols).unwrap()
    };
    let fz = rejection_rate(gaussian, |d| Box::new(FisherZ::new(d, 0.05).unwrap()));
    let g2 = rejection_rate(discrete, |d| Box::new(G2::new(d, 0.05).unwrap()));
    let ok = |r: f64| (r - 0.05).abs() <= 0.02;
    check(
        ok(fz) && ok(g2),
        format!("null rejection rates over 1000 trials: Fisher-z {fz:.3}, G2 {g2:.3}"),
    )
}

fn estimator_oracles() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_sem: f64 = 0.0;
    let mut done = 0;
    while done < 10 {
        let sem = random_linear_sem(&mut rng, 10, 0.3);
        let dag = sem.dag();
        let pair = (0..10)
            .flat_map(|i| (i + 1..10).map(move |j| (i, j)))
            .find(|&(i, j)| true_ace_linear(&sem, dag.name(i), dag.name(j)).map_or(false, |a| a.abs() > 0.1));
        let Some((wi, yi)) = pair else { continue };
        let (w, y) = (dag.name(wi), dag.name(yi));
        let parents: Vec<&str> = dag.parents(wi).map(|p| dag.name(p)).collect();
        let data = sem.sample(1_000_000, done as u64).unwrap();
        let err = (ace_linear(&data, w, y, &parents).unwrap() - true_ace_linear(&sem, w, y).unwrap()).abs();
        worst_sem = worst_sem.max(err);
        done += 1;
    }
    let mut worst_bn: f64 = 0.0;
    for seed in 0..5 {
        let bn = random_logistic_bn(&mut ChaCha8Rng::seed_from_u64(100 + seed));
        let data = bn.sample(1_000_000, seed).unwrap();
        let est = ace_mcor(&data, "W", "Y", &["C1", "C2"]).unwrap();
        worst_bn = worst_bn.max((est - bn.true_log_mcor("W", "Y").unwrap()).abs());
    }
    check(
        worst_sem <= 0.01 && worst_bn <= 0.02,
        format!(
            "largest error over 10 SEMs (n=1e6, parent adjustment) {worst_sem:.4}; over 5 networks (log-MCOR, n=1e6) {worst_bn:.4}"
        ),
    )
}

type EdgeSets = (BTreeSet<(String, String)>, BTreeSet<(String, String)>);

fn edge_sets(mag: &Mag) -> EdgeSets {
    let pair = |(a, b): (usize, usize)| (mag.name(a).to_string(), mag.name(b).to_string());
    let sym = |(a, b): (usize, usize)| {
        let (a, b) = (mag.name(a).to_string(), mag.name(b).to_string());
        if a < b {
            (a, b)
        } else {
            (b, a)
        }
    };
    (
        mag.directed_edges().into_iter().map(pair).collect(),
        mag.bidirected_edges().into_iter().map(sym).collect(),
    )
}

fn expected_edges(directed: &[(&str, &str)], bidirected: &[(&str, &str)]) -> EdgeSets {
    let own = |&(a, b): &(&str, &str)| (a.to_string(), b.to_string());
    let sym = |&(a, b): &(&str, &str)| if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
    (directed.iter().map(own).collect(), bidirected.iter().map(sym).collect())
}

fn projection_conformance() -> Line {
    let group1_mag = expected_edges(
        &[
            ("X1", "W"),
            ("X3", "W"),
            ("X5", "W"),
            ("X5", "Y"),
            ("W", "Y"),
            ("X9", "Y"),
            ("X7", "Y"),
            ("X10", "X9"),
        ],
        &[("X3", "X9"), ("W", "X8"), ("X8", "Y")],
    );
    let group2_mag = expected_edges(
        &[
            ("X2", "X1"),
            ("X1", "W"),
            ("X3", "W"),
            ("X3", "Y"),
            ("X4", "X3"),
            ("X4", "Y"),
            ("X4", "X6"),
            ("X5", "X3"),
            ("X5", "X6"),
            ("X6", "Y"),
            ("X8", "W"),
            ("X9", "Y"),
            ("X13", "X4"),
            ("W", "Y"),
        ],
        &[("X8", "X9"), ("W", "X10"), ("X10", "Y")],
    );
    let mut diffs = Vec::new();
    for (label, config, want) in [("Group I", presets::group1(), group1_mag), ("Group II", presets::group2(), group2_mag)] {
        let got = edge_sets(&config.model.dag().latent_project(&config.latents).unwrap());
        if got != want {
            diffs.push(format!("{label}: got {got:?}"));
        }
    }
    check(diffs.is_empty(), if diffs.is_empty() { "both projections match edge for edge".into() } else { diffs.join("; ") })
}

fn csv_fixture() -> Line {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/wide.csv");
    let data = match Dataset::from_csv_path(path) {
        Ok(d) => d,
        Err(e) => return fail(e.to_string()),
    };
    if (data.n_cols(), data.n_rows()) != (25, 747) {
        return fail(format!("fixture is {}x{}", data.n_rows(), data.n_cols()));
    }
    let fz = FisherZ::new(&data, 0.05).unwrap();
    let est = Estimator::new(&data, "W", "Y", None).unwrap();
    let search = SearchConfig::default();
    let out = match run_ce2ls_by_name(&fz, "W", "Y", &covariates(data.names()), &search, Some(&est)) {
        Ok(o) => o,
        Err(e) => return fail(format!("search: {e}")),
    };
    let cli = Command::new(env!("CARGO_BIN_EXE_local-adjust"))
        .args(["estimate", "--data", path, "--treatment", "W", "--outcome", "Y"])
        .output()
        .unwrap();
    let code = cli.status.code().unwrap_or(-1);
    check(
        [0, 10, 11, 12].contains(&code),
        format!(
            "747x25 fixture: verdict {}, effect {}, CLI exit {code}",
            out.verdict.as_str(),
            out.ace().map_or("-".into(), |a| format!("{a:.3}"))
        ),
    )
}

fn main() -> ExitCode {
    let mags = random_mags();
    let criteria: Vec<(&str, Box<dyn Fn() -> Line>)> = vec![
        ("golden trace on the Group I MAG", Box::new(golden_trace)),
        ("three-case soundness", Box::new(|| three_case_soundness(&mags))),
        ("GAC oracle equivalence", Box::new(|| gac_equivalence(&mags))),
        ("group I recovery", Box::new(group1_recovery)),
        ("group II recovery", Box::new(group2_recovery)),
        ("efficiency ordering", Box::new(efficiency)),
        ("CI-test calibration", Box::new(calibration)),
        ("estimator oracles", Box::new(estimator_oracles)),
        ("latent-projection conformance", Box::new(projection_conformance)),
        ("CSV fixture pipeline", Box::new(csv_fixture)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = false;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {}: {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let line = run();
        let tag = match line.status {
            Status::Pass => "PASS",
            Status::KnownFail => "FAIL (known limitation)",
            Status::Fail => {
                failed = true;
                "FAIL"
            }
        };
        println!("{tag} {label}: {}", line.detail);
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
