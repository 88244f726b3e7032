//! Three-case identifiability classification and level-wise search for minimal
//! adjustment sets.
//!
//! For each COSO candidate `S`, candidate sets `Z` drawn from `adj_r \ {S}` are
//! examined from the empty set upwards:
//!
//! * `W ⫫ Y | Z` shows there is no edge between `W` and `Y` (no effect);
//! * `S ⫫ Y | Z` rules out `W -> Y`, so the effect is not identifiable unless a
//!   no-effect witness also exists;
//! * `S ⫫ Y | Z ∪ {W}` makes `Z` an adjustment set, and no superset of `Z` is
//!   generated afterwards.

mod candidates;
mod report;

pub use candidates::candidate_gen;
pub use report::{write_csv_report, write_text_report};

use std::collections::HashSet;

use thiserror::Error;

use crate::ci::{CiBackend, CiError, CiQuery};
use crate::combin::Combinations;
use crate::discovery::{build_context, AdjacencyContext, DiscoveryOptions, QScope, SeparatorPool, DEFAULT_MAX_COND};
use crate::estimate::{EstimateError, Estimator};
use crate::names::natural_cmp;

/// Default largest adjustment-set size searched.
pub const DEFAULT_MAX_LEVEL: usize = 5;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Ci(#[from] CiError),
    #[error("estimation failed for {{{set}}}: {source}")]
    Estimation {
        set: String,
        #[source]
        source: EstimateError,
    },
    #[error("conflicting evidence: {witness} but {{{set}}} was accepted as an adjustment set")]
    FaithfulnessConflict { witness: String, set: String },
    #[error("`{0}` appears more than once among treatment, outcome and covariates")]
    Overlap(String),
}

pub type Result<T> = std::result::Result<T, SearchError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_cond: usize,
    pub max_level: usize,
    /// Keep searching after a no-effect witness and collect every witness.
    pub exhaustive: bool,
    pub q_scope: QScope,
    pub separators: SeparatorPool,
    /// Repeat an inconclusive search with every covariate as a candidate member.
    pub widen: bool,
}

impl SearchConfig {
    pub fn discovery(&self) -> DiscoveryOptions {
        DiscoveryOptions {
            max_cond: self.max_cond,
            q_scope: self.q_scope,
            separators: self.separators,
        }
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_cond: DEFAULT_MAX_COND,
            max_level: DEFAULT_MAX_LEVEL,
            exhaustive: false,
            q_scope: QScope::default(),
            separators: SeparatorPool::default(),
            widen: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    NoEffect,
    NonIdentifiable,
    Identifiable,
    Undetermined,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NoEffect => "NoEffect",
            Verdict::NonIdentifiable => "NonIdentifiable",
            Verdict::Identifiable => "Identifiable",
            Verdict::Undetermined => "Undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UndeterminedReason {
    /// No COSO candidate was found.
    NoCoso,
    /// Candidates existed but no test up to the size cap was conclusive.
    SearchExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// `W ⫫ Y | Z`
    CaseI,
    /// `S ⫫ Y | Z`
    CaseII,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// COSO variable whose loop produced the witness; `None` for the final
    /// no-effect scan over sets containing every COSO candidate.
    pub coso: Option<usize>,
    pub z: Vec<usize>,
    pub rule: Rule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiEntry {
    pub z: Vec<usize>,
    pub coso: usize,
    pub level: usize,
    pub effect: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelTrace {
    pub k: usize,
    pub candidates: Vec<Vec<usize>>,
    /// Sets accepted as adjustment sets at this level.
    pub found: Vec<Vec<usize>>,
    /// Sets passed on to candidate generation.
    pub remaining: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosoTrace {
    pub coso: usize,
    pub levels: Vec<LevelTrace>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    /// All CI tests, adjacency learning included.
    pub ci_tests: u64,
    pub discovery_tests: u64,
    /// Largest `k` whose candidate list was non-empty.
    pub levels_explored: usize,
    /// The search was repeated over all covariates.
    pub widened: bool,
}

/// Result of one run. Variable indices refer to `variables`; every set is sorted
/// by name.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub variables: Vec<String>,
    pub verdict: Verdict,
    pub undetermined: Option<UndeterminedReason>,
    /// Ordered by size, then by members.
    pub psi: Vec<PsiEntry>,
    /// The witness behind a NoEffect or NonIdentifiable verdict.
    pub witness: Option<Witness>,
    /// Every witness seen, in discovery order.
    pub witnesses: Vec<Witness>,
    pub context: AdjacencyContext,
    pub traces: Vec<CosoTrace>,
    pub stats: SearchStats,
}

impl SearchOutcome {
    pub fn name(&self, v: usize) -> &str {
        &self.variables[v]
    }

    pub fn names_of(&self, set: &[usize]) -> Vec<&str> {
        set.iter().map(|&v| self.variables[v].as_str()).collect()
    }

    pub fn psi_sets(&self) -> Vec<Vec<&str>> {
        self.psi.iter().map(|e| self.names_of(&e.z)).collect()
    }

    /// Mean of the attached effects.
    pub fn ace(&self) -> Option<f64> {
        let effects: Vec<f64> = self.psi.iter().filter_map(|e| e.effect).collect();
        if effects.is_empty() || effects.len() != self.psi.len() {
            return None;
        }
        Some(effects.iter().sum::<f64>() / effects.len() as f64)
    }

    fn describe_witness(&self, w: &Witness) -> String {
        let z = self.names_of(&w.z).join(", ");
        let (a, b) = (self.name(self.context.w), self.name(self.context.y));
        match (w.rule, w.coso) {
            (Rule::CaseI, _) => format!("{a} ⫫ {b} | {{{z}}}"),
            (Rule::CaseII, Some(s)) => format!("{} ⫫ {b} | {{{z}}}", self.name(s)),
            (Rule::CaseII, None) => format!("COSO ⫫ {b} | {{{z}}}"),
        }
    }
}

/// Positions in natural name order, so that sorting ranks sorts by name.
struct Ranks {
    index_of_rank: Vec<usize>,
    rank_of_index: Vec<usize>,
}

impl Ranks {
    fn new(names: &[String]) -> Self {
        let mut index_of_rank: Vec<usize> = (0..names.len()).collect();
        index_of_rank.sort_by(|&a, &b| natural_cmp(&names[a], &names[b]));
        let mut rank_of_index = vec![0; names.len()];
        for (r, &i) in index_of_rank.iter().enumerate() {
            rank_of_index[i] = r;
        }
        Ranks {
            index_of_rank,
            rank_of_index,
        }
    }

    fn to_ranks(&self, set: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = set.iter().map(|&i| self.rank_of_index[i]).collect();
        out.sort_unstable();
        out
    }

    fn to_indices(&self, set: &[usize]) -> Vec<usize> {
        set.iter().map(|&r| self.index_of_rank[r]).collect()
    }
}

struct Searcher<'a, B: CiBackend + ?Sized> {
    backend: &'a B,
    ranks: Ranks,
    w: usize,
    y: usize,
    exhaustive: bool,
    psi: Vec<(Vec<usize>, usize, usize)>,
    psi_sets: HashSet<Vec<usize>>,
    witnesses: Vec<Witness>,
    traces: Vec<CosoTrace>,
    levels_explored: usize,
}

enum Step {
    Continue,
    /// A no-effect witness ends the search.
    Stop,
}

impl<B: CiBackend + ?Sized> Searcher<'_, B> {
    fn independent(&self, x: usize, y: usize, z: &[usize]) -> Result<bool> {
        Ok(self.backend.test(&CiQuery::new(x, y, z.iter().copied()))?.independent)
    }

    /// Tests one candidate. Returns whether it becomes an adjustment set.
    fn examine(&mut self, s: usize, z_ranks: &[usize], level: usize) -> Result<(bool, Step)> {
        let z = self.ranks.to_indices(z_ranks);
        if self.independent(self.w, self.y, &z)? {
            self.witnesses.push(Witness {
                coso: Some(s),
                z,
                rule: Rule::CaseI,
            });
            let step = if self.exhaustive { Step::Continue } else { Step::Stop };
            return Ok((false, step));
        }
        if self.independent(s, self.y, &z)? {
            self.witnesses.push(Witness {
                coso: Some(s),
                z,
                rule: Rule::CaseII,
            });
            return Ok((false, Step::Continue));
        }
        let mut with_w = z;
        with_w.push(self.w);
        if self.independent(s, self.y, &with_w)? {
            // Sets found for an earlier COSO that strictly contain this one were
            // not minimal.
            self.psi.retain(|(p, _, _)| !is_proper_subset(z_ranks, p));
            self.psi_sets.retain(|p| !is_proper_subset(z_ranks, p));
            self.psi.push((z_ranks.to_vec(), s, level));
            self.psi_sets.insert(z_ranks.to_vec());
            return Ok((true, Step::Continue));
        }
        Ok((false, Step::Continue))
    }

    fn search_coso(&mut self, s: usize, adj_r: &[usize], max_level: usize) -> Result<Step> {
        let s_rank = self.ranks.rank_of_index[s];
        let universe: Vec<usize> = self
            .ranks
            .to_ranks(adj_r)
            .into_iter()
            .filter(|&r| r != s_rank)
            .collect();
        let mut trace = CosoTrace {
            coso: s,
            levels: Vec::new(),
        };
        let mut level: Vec<Vec<usize>> = vec![Vec::new()];
        let mut k = 0;
        while !level.is_empty() && k <= max_level {
            let mut lt = LevelTrace {
                k,
                candidates: level.iter().map(|z| self.ranks.to_indices(z)).collect(),
                found: Vec::new(),
                remaining: Vec::new(),
            };
            let mut kept = Vec::new();
            let mut stop = false;
            for z in &level {
                if self.psi_sets.contains(z) {
                    continue;
                }
                let (accepted, step) = self.examine(s, z, k)?;
                if accepted {
                    lt.found.push(self.ranks.to_indices(z));
                } else {
                    kept.push(z.clone());
                }
                if let Step::Stop = step {
                    stop = true;
                    break;
                }
            }
            lt.remaining = kept.iter().map(|z| self.ranks.to_indices(z)).collect();
            trace.levels.push(lt);
            if k > 0 {
                self.levels_explored = self.levels_explored.max(k);
            }
            if stop {
                self.traces.push(trace);
                return Ok(Step::Stop);
            }
            k += 1;
            level = if k == 1 {
                // The empty set's survival gates every singleton.
                if kept.is_empty() {
                    Vec::new()
                } else {
                    universe.iter().map(|&r| vec![r]).collect()
                }
            } else {
                candidate_gen(&kept, k)
            };
        }
        self.traces.push(trace);
        Ok(Step::Continue)
    }

    /// No-effect scan over the sets the COSO loops never build: those containing
    /// every COSO candidate.
    fn no_effect_scan(&mut self, adj_r: &[usize], omega: &[usize], max_level: usize) -> Result<()> {
        let required: Vec<usize> = omega.iter().copied().filter(|v| adj_r.contains(v)).collect();
        let rest: Vec<usize> = adj_r.iter().copied().filter(|v| !required.contains(v)).collect();
        for extra in 0..=rest.len() {
            if required.len() + extra > max_level {
                break;
            }
            for add in Combinations::new(&rest, extra) {
                let mut z = required.clone();
                z.extend(add);
                let ranks = self.ranks.to_ranks(&z);
                let z = self.ranks.to_indices(&ranks);
                if self.independent(self.w, self.y, &z)? {
                    self.witnesses.push(Witness {
                        coso: None,
                        z,
                        rule: Rule::CaseI,
                    });
                    return Ok(());
                }
            }
        }
        Ok(())
    }
}

fn is_proper_subset(a: &[usize], b: &[usize]) -> bool {
    a.len() < b.len() && a.iter().all(|v| b.contains(v))
}

/// Classification and adjustment-set search over a prepared context. `x` is only
/// used when `config.widen` is set.
pub fn classify_and_search(
    backend: &(impl CiBackend + ?Sized),
    ctx: AdjacencyContext,
    x: &[usize],
    config: &SearchConfig,
) -> Result<SearchOutcome> {
    let max_level = config.max_level;
    let exhaustive = config.exhaustive;
    let mut s = Searcher {
        backend,
        ranks: Ranks::new(backend.variables()),
        w: ctx.w,
        y: ctx.y,
        exhaustive,
        psi: Vec::new(),
        psi_sets: HashSet::new(),
        witnesses: Vec::new(),
        traces: Vec::new(),
        levels_explored: 0,
    };
    let mut outcome = SearchOutcome {
        variables: backend.variables().to_vec(),
        verdict: Verdict::Undetermined,
        undetermined: None,
        psi: Vec::new(),
        witness: None,
        witnesses: Vec::new(),
        context: ctx,
        traces: Vec::new(),
        stats: SearchStats::default(),
    };
    if outcome.context.omega.is_empty() {
        outcome.undetermined = Some(UndeterminedReason::NoCoso);
        return Ok(outcome);
    }

    let ctx = &outcome.context;
    let has = |s: &Searcher<'_, _>, rule| s.witnesses.iter().any(|w: &Witness| w.rule == rule);
    let mut universes = vec![ctx.adj_r.clone()];
    if config.widen {
        let mut all: Vec<usize> = x.iter().copied().filter(|&v| v != ctx.w && v != ctx.y).collect();
        all.sort_by_key(|&v| s.ranks.rank_of_index[v]);
        if all != ctx.adj_r {
            universes.push(all);
        }
    }
    for (round, universe) in universes.iter().enumerate() {
        if round > 0 {
            if !s.psi.is_empty() || !s.witnesses.is_empty() {
                break;
            }
            outcome.stats.widened = true;
        }
        for &coso in &ctx.omega {
            if let Step::Stop = s.search_coso(coso, universe, max_level)? {
                break;
            }
        }
        if s.psi.is_empty() && !has(&s, Rule::CaseI) {
            s.no_effect_scan(universe, &ctx.omega, max_level)?;
        }
    }

    let first = |s: &Searcher<'_, _>, rule| s.witnesses.iter().find(|w: &&Witness| w.rule == rule).cloned();
    let case_i = first(&s, Rule::CaseI);
    let case_ii = first(&s, Rule::CaseII);

    let mut psi: Vec<PsiEntry> = s
        .psi
        .iter()
        .map(|(z, coso, level)| PsiEntry {
            z: s.ranks.to_indices(z),
            coso: *coso,
            level: *level,
            effect: None,
            notes: Vec::new(),
        })
        .collect();
    let rank_key = |e: &PsiEntry| (e.z.len(), s.ranks.to_ranks(&e.z));
    psi.sort_by_key(rank_key);

    outcome.witnesses = s.witnesses.clone();
    outcome.traces = std::mem::take(&mut s.traces);
    outcome.stats.levels_explored = s.levels_explored;

    if !exhaustive {
        if let (Some(w), Some(p)) = (case_i.as_ref().or(case_ii.as_ref()), psi.first()) {
            return Err(SearchError::FaithfulnessConflict {
                witness: outcome.describe_witness(w),
                set: outcome.names_of(&p.z).join(", "),
            });
        }
    }
    if let Some(w) = case_i {
        outcome.verdict = Verdict::NoEffect;
        outcome.witness = Some(w);
    } else if let Some(w) = case_ii {
        outcome.verdict = Verdict::NonIdentifiable;
        outcome.witness = Some(w);
    } else if !psi.is_empty() {
        outcome.verdict = Verdict::Identifiable;
        outcome.psi = psi;
    } else {
        outcome.undetermined = Some(UndeterminedReason::SearchExhausted);
    }
    Ok(outcome)
}

/// Full pipeline: local structure, classification, search and, with an
/// estimator, one effect per adjustment set.
pub fn run_ce2ls(
    backend: &(impl CiBackend + ?Sized),
    w: usize,
    y: usize,
    x: &[usize],
    config: &SearchConfig,
    estimator: Option<&Estimator<'_>>,
) -> Result<SearchOutcome> {
    let names = backend.variables();
    let mut seen = HashSet::new();
    for &v in [w, y].iter().chain(x) {
        if v >= names.len() {
            return Err(CiError::UnknownVariable(format!("#{v}")).into());
        }
        if !seen.insert(v) {
            return Err(SearchError::Overlap(names[v].clone()));
        }
    }
    let start = backend.tests_performed();
    let ctx = build_context(backend, w, y, x, &config.discovery())?;
    let discovery_tests = backend.tests_performed() - start;
    let mut outcome = classify_and_search(backend, ctx, x, config)?;
    outcome.stats.discovery_tests = discovery_tests;
    outcome.stats.ci_tests = backend.tests_performed() - start;

    if let Some(est) = estimator {
        for entry in &mut outcome.psi {
            let z: Vec<&str> = entry.z.iter().map(|&v| names[v].as_str()).collect();
            let e = est.effect(&z).map_err(|source| SearchError::Estimation {
                set: z.join(", "),
                source,
            })?;
            entry.effect = Some(e.value);
            entry.notes = e.notes;
        }
    }
    Ok(outcome)
}

/// Resolves names against the backend and runs [`run_ce2ls`].
pub fn run_ce2ls_by_name<S: AsRef<str>>(
    backend: &(impl CiBackend + ?Sized),
    w: &str,
    y: &str,
    x: &[S],
    config: &SearchConfig,
    estimator: Option<&Estimator<'_>>,
) -> Result<SearchOutcome> {
    let idx = |s: &str| {
        backend
            .index_of(s)
            .ok_or_else(|| SearchError::Ci(CiError::UnknownVariable(s.to_string())))
    };
    let xs = x.iter().map(|s| idx(s.as_ref())).collect::<Result<Vec<_>>>()?;
    run_ce2ls(backend, idx(w)?, idx(y)?, &xs, config, estimator)
}
