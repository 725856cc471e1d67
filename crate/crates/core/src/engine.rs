//! The decision pipeline: validation, filters, closed forms, reductions and
//! finally the exhaustive oracle, with memoization on the canonical datum.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;
use std::time::Instant;

use rayon::prelude::*;

use crate::criteria::{
    corollary_filter, detect_structures, prop1_filter, songxu_decide, songxu_match, FilterReport,
};
use crate::oracle::{self, ConstellationWitness, SearchBudget, SearchOutcome};
use crate::partition::{enumerate_candidates, CandidateDatum};
use crate::perm::canonical_of_type;
use crate::reduction::{
    children_thm1, children_thm2, children_thm3, ChainBase, Children, ReductionChain, Theorem,
};
use crate::verdict::{Certificate, Method, Stats, Status, Verdict};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineConfig {
    pub budget: SearchBudget,
    /// Use `>` instead of `>=` in the corollary length bounds.
    pub strict_corollaries: bool,
    pub no_cache: bool,
}

#[derive(Default)]
struct Ctx {
    nodes: u64,
    cache_hits: u64,
}

pub struct Engine {
    config: EngineConfig,
    cache: RwLock<HashMap<String, Verdict>>,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Self {
        Engine { config, cache: RwLock::new(HashMap::new()) }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn cache_len(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    /// Full pipeline decision.
    pub fn decide(&self, datum: &CandidateDatum) -> Verdict {
        let started = Instant::now();
        let mut ctx = Ctx::default();
        let mut v = self.decide_inner(datum, &mut ctx);
        v.stats = Stats {
            nodes: ctx.nodes,
            cache_hits: ctx.cache_hits,
            millis: if self.config.budget.deterministic { 0 } else { started.elapsed().as_millis() as u64 },
        };
        v
    }

    fn decide_inner(&self, datum: &CandidateDatum, ctx: &mut Ctx) -> Verdict {
        let key = datum.to_string();
        if !self.config.no_cache {
            if let Some(v) = self.cache.read().unwrap().get(&key) {
                ctx.cache_hits += 1;
                return v.clone();
            }
        }
        let v = self.compute(datum, ctx);
        if !self.config.no_cache {
            self.cache.write().unwrap().entry(key).or_insert_with(|| v.clone());
        }
        v
    }

    fn compute(&self, datum: &CandidateDatum, ctx: &mut Ctx) -> Verdict {
        if datum.rh_defect() != 0 {
            return Verdict::exceptional(Method::Rh);
        }
        if let Some(v) = base_case(datum) {
            return v;
        }

        let mut reasons = prop1_filter(datum);
        reasons.extend(corollary_filter(datum, self.config.strict_corollaries));
        if let Some(first) = reasons.first() {
            let mut v = Verdict::exceptional(Method::Filter(first.rule));
            reasons.dedup();
            v.reasons = reasons;
            return v;
        }

        if let Some(shape) = songxu_match(datum) {
            let closed = songxu_decide(shape.k, shape.x, shape.y, &shape.first)
                .expect("matched shapes satisfy the preconditions");
            if closed.status == Status::Exceptional {
                return closed;
            }
            // realizable: look for a certificate the usual way
            let certificate = self
                .reduce(datum, ctx)
                .or_else(|| Some(self.run_oracle(datum, ctx)))
                .filter(|v| v.status == Status::Realizable)
                .and_then(|v| v.certificate);
            return Verdict { certificate, ..closed };
        }

        if let Some(v) = self.reduce(datum, ctx) {
            return v;
        }
        self.run_oracle(datum, ctx)
    }

    fn run_oracle(&self, datum: &CandidateDatum, ctx: &mut Ctx) -> Verdict {
        let v = oracle::decide(datum, &self.config.budget).expect("candidate passed the RH gate");
        ctx.nodes += v.stats.nodes;
        Verdict { stats: Stats::default(), ..v }
    }

    /// Tries every reduction labeling, smallest child degree first. Returns
    /// `None` when no labeling is conclusive.
    fn reduce(&self, datum: &CandidateDatum, ctx: &mut Ctx) -> Option<Verdict> {
        for (thm, stream) in labelings(datum) {
            let mut complete = true;
            for step in stream {
                let child = self.decide_inner(&step.child, ctx);
                match child.status {
                    Status::Realizable => {
                        let (mut steps, base) = match child.certificate {
                            Some(Certificate::Chain(c)) => (c.steps, c.base),
                            Some(Certificate::Witness(w)) if step.child.is_empty() && w.degree == 1 => {
                                (Vec::new(), ChainBase::Identity)
                            }
                            Some(Certificate::Witness(w)) => (Vec::new(), ChainBase::Witness(w)),
                            None => (Vec::new(), ChainBase::SongXu),
                        };
                        steps.insert(0, step);
                        let chain = ReductionChain { steps, base };
                        return Some(Verdict::realizable(Method::Reduction(thm), Certificate::Chain(chain)));
                    }
                    Status::Exceptional => {}
                    Status::Unknown => complete = false,
                }
            }
            if complete {
                // every child is exceptional, so the parent is too
                return Some(Verdict::exceptional(Method::Reduction(thm)));
            }
        }
        None
    }
}

/// Data with at most two branch points.
fn base_case(datum: &CandidateDatum) -> Option<Verdict> {
    let d = datum.degree();
    match datum.len() {
        0 if d == 1 => Some(Verdict::realizable(
            Method::BaseCase,
            Certificate::Witness(ConstellationWitness { degree: 1, perms: Vec::new() }),
        )),
        0 | 1 => Some(Verdict::exceptional(Method::BaseCase)),
        2 => {
            let p = datum.partitions();
            if p.iter().all(|a| a.len() == 1) {
                let c = canonical_of_type(&p[0]);
                let w = ConstellationWitness { degree: d as usize, perms: vec![c.clone(), c.inverse()] };
                Some(Verdict::realizable(Method::BaseCase, Certificate::Witness(w)))
            } else {
                Some(Verdict::exceptional(Method::BaseCase))
            }
        }
        _ => None,
    }
}

/// Every admissible role assignment, ordered by child degree.
fn labelings(datum: &CandidateDatum) -> Vec<(Theorem, Children)> {
    let mut out: Vec<(u64, Theorem, Children)> = Vec::new();
    for m in detect_structures(datum) {
        if let Ok(c) = children_thm1(datum, &m) {
            out.push((m.d_prime, Theorem::Thm1, c));
        }
        for o in &m.others {
            if m.s == 2 {
                let mut ts: Vec<u64> =
                    (2..=o.gcd).filter(|t| o.gcd % t == 0 && m.d_prime % t == 0).collect();
                ts.reverse();
                for t in ts {
                    if let Ok(c) = children_thm2(datum, &m, o.index, t) {
                        out.push((m.d_prime / t, Theorem::Thm2, c));
                    }
                }
            }
            if m.s == 3 && o.gcd % 2 == 0 && m.d_prime % 4 == 0 {
                if let Ok(c) = children_thm3(datum, &m, o.index) {
                    out.push((m.d_prime / 4, Theorem::Thm3, c));
                }
            }
        }
    }
    out.sort_by_key(|(deg, _, _)| *deg);
    out.into_iter().map(|(_, t, c)| (t, c)).collect()
}

/// Re-checks a verdict from scratch with the default budget.
pub fn verify(verdict: &Verdict, datum: &CandidateDatum) -> bool {
    verify_with(verdict, datum, &EngineConfig::default())
}

pub fn verify_with(verdict: &Verdict, datum: &CandidateDatum, config: &EngineConfig) -> bool {
    match verdict.status {
        Status::Realizable => verify_realizable(verdict, datum),
        Status::Exceptional => verify_exceptional(verdict, datum, config),
        Status::Unknown => verdict.limit().is_some(),
    }
}

fn verify_realizable(verdict: &Verdict, datum: &CandidateDatum) -> bool {
    if !matches!(
        verdict.method,
        Method::BaseCase | Method::Reduction(_) | Method::Oracle | Method::SongXu
    ) {
        return false;
    }
    match &verdict.certificate {
        Some(Certificate::Witness(w)) => w.check(datum).is_ok(),
        Some(Certificate::Chain(c)) => c.verify().map(|root| &root == datum).unwrap_or(false),
        None => {
            verdict.method == Method::SongXu
                && songxu_match(datum)
                    .and_then(|s| songxu_decide(s.k, s.x, s.y, &s.first).ok())
                    .is_some_and(|v| v.status == Status::Realizable)
        }
    }
}

fn verify_exceptional(verdict: &Verdict, datum: &CandidateDatum, config: &EngineConfig) -> bool {
    if verdict.certificate.is_some() {
        return false;
    }
    match verdict.method {
        Method::Rh => datum.rh_defect() != 0,
        Method::BaseCase => {
            datum.rh_defect() == 0
                && base_case(datum).is_some_and(|v| v.status == Status::Exceptional)
        }
        Method::Filter(rule) => {
            let mut fresh: Vec<FilterReport> = prop1_filter(datum);
            fresh.extend(corollary_filter(datum, false));
            fresh.extend(corollary_filter(datum, true));
            !verdict.reasons.is_empty()
                && verdict.reasons.iter().any(|r| r.rule == rule)
                && verdict.reasons.iter().all(|r| fresh.contains(r))
        }
        Method::SongXu => songxu_match(datum)
            .and_then(|s| songxu_decide(s.k, s.x, s.y, &s.first).ok())
            .is_some_and(|v| v.status == Status::Exceptional),
        Method::Oracle => {
            let budget = SearchBudget { deterministic: true, ..config.budget };
            matches!(
                oracle::search(datum, &budget).map(|r| r.outcome),
                Ok(SearchOutcome::Exhausted)
            )
        }
        Method::Reduction(_) => {
            let fresh = Engine::new(EngineConfig { no_cache: false, ..*config }).decide(datum);
            fresh.status == Status::Exceptional
        }
        Method::Limit(_) => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanMode {
    Both,
    OracleOnly,
    PipelineOnly,
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub datum: CandidateDatum,
    pub pipeline: Option<Verdict>,
    pub oracle: Option<Verdict>,
    /// Flagged by the strict corollary bounds but not by any weak filter.
    pub strict_only: bool,
}

impl ScanRow {
    /// Best available status: the oracle's when decided, else the pipeline's.
    pub fn status(&self) -> Status {
        let o = self.oracle.as_ref().map(|v| v.status);
        let p = self.pipeline.as_ref().map(|v| v.status);
        match (o, p) {
            (Some(Status::Unknown), Some(p)) => p,
            (Some(o), _) => o,
            (None, Some(p)) => p,
            (None, None) => Status::Unknown,
        }
    }

    pub fn agrees(&self) -> bool {
        match (&self.pipeline, &self.oracle) {
            (Some(p), Some(o)) => {
                p.status == o.status || p.status == Status::Unknown || o.status == Status::Unknown
            }
            _ => true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CellCounts {
    pub realizable: usize,
    pub exceptional: usize,
    pub unknown: usize,
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    pub disagreements: Vec<CandidateDatum>,
    /// Keyed by `(degree, branch points)`.
    pub counts: BTreeMap<(u64, usize), CellCounts>,
    /// Realizable data that only the strict corollary bounds reject.
    pub strict_audit: Vec<CandidateDatum>,
}

/// Enumerates every candidate with `2 <= d <= d_max`, `1 <= n <= n_max`, and
/// decides each by the pipeline and by the oracle alone.
pub fn scan(d_max: u64, n_max: usize, config: &EngineConfig, mode: ScanMode) -> ScanReport {
    let candidates: Vec<CandidateDatum> = (2..=d_max)
        .flat_map(|d| (1..=n_max).flat_map(move |n| enumerate_candidates(d, n)))
        .collect();
    let engine = Engine::new(*config);
    let oracle_budget = config.budget;
    let row = |datum: &CandidateDatum| {
        let pipeline = (mode != ScanMode::OracleOnly).then(|| engine.decide(datum));
        let oracle = (mode != ScanMode::PipelineOnly).then(|| {
            let started = Instant::now();
            let mut v = oracle::decide(datum, &oracle_budget).expect("enumerated data are candidates");
            v.stats.millis = if oracle_budget.deterministic { 0 } else { started.elapsed().as_millis() as u64 };
            v
        });
        let weak = !prop1_filter(datum).is_empty() || !corollary_filter(datum, false).is_empty();
        let strict_only = !weak && !corollary_filter(datum, true).is_empty();
        ScanRow { datum: datum.clone(), pipeline, oracle, strict_only }
    };
    let rows: Vec<ScanRow> = if config.budget.deterministic {
        candidates.iter().map(row).collect()
    } else {
        candidates.par_iter().map(row).collect()
    };

    let mut counts: BTreeMap<(u64, usize), CellCounts> = BTreeMap::new();
    let mut disagreements = Vec::new();
    let mut strict_audit = Vec::new();
    for r in &rows {
        let cell = counts.entry((r.datum.degree(), r.datum.len())).or_default();
        match r.status() {
            Status::Realizable => cell.realizable += 1,
            Status::Exceptional => cell.exceptional += 1,
            Status::Unknown => cell.unknown += 1,
        }
        if !r.agrees() {
            disagreements.push(r.datum.clone());
        }
        if r.strict_only && r.status() == Status::Realizable {
            strict_audit.push(r.datum.clone());
        }
    }
    ScanReport { rows, disagreements, counts, strict_audit }
}

impl ScanReport {
    pub fn unknown_count(&self) -> usize {
        self.counts.values().map(|c| c.unknown).sum()
    }
}
