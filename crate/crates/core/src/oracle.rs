//! Exhaustive search for monodromy tuples.
//!
//! A candidate datum of degree `d` with partitions `A1, .., An` is realizable
//! exactly when there are permutations `s1, .., sn` in `S_d` with
//! `cycle_type(si) = Ai`, product equal to the identity, and a transitive
//! generated group. The search below decides that question completely:
//!
//! * the tuple may be reordered (Hurwitz moves preserve the cycle types, the
//!   product, and the generated group), so the factor with the largest
//!   conjugacy class goes first and the second largest goes last;
//! * the first factor is fixed to [`canonical_of_type`], since simultaneous
//!   conjugation preserves every condition;
//! * the middle factors are enumerated cycle by cycle;
//! * the last factor is the inverse of the running product and is only
//!   checked, never enumerated.
//!
//! After each middle factor the orbit count of the partial group is compared
//! with the number of merges the remaining factors can still perform (a
//! factor of type `A` merges at most `d - l(A)` orbits).

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::partition::{CandidateDatum, Partition};
use crate::perm::{canonical_of_type, compose, cycle_type, orbit_count, product, Permutation};
use crate::verdict::{Certificate, Limit, Method, Stats, Verdict};

const CHECK_INTERVAL: u64 = 1 << 14;

/// Hard cap on the degree the search can represent.
pub const MAX_SEARCH_DEGREE: u64 = 255;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_degree: u64,
    pub max_nodes: u64,
    /// Single-threaded search with a reproducible witness.
    pub deterministic: bool,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_degree: 12, max_nodes: 100_000_000, deterministic: false }
    }
}

impl SearchBudget {
    pub fn deterministic() -> Self {
        SearchBudget { deterministic: true, ..SearchBudget::default() }
    }
}

/// Permutations realizing a datum, in the datum's canonical partition order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ConstellationWitness {
    pub degree: usize,
    pub perms: Vec<Permutation>,
}

impl ConstellationWitness {
    /// Re-verifies every witness condition from scratch against `datum`.
    pub fn check(&self, datum: &CandidateDatum) -> Result<(), String> {
        let d = datum.degree() as usize;
        if self.degree != d {
            return Err(format!("witness degree {} for datum of degree {d}", self.degree));
        }
        if self.perms.len() != datum.len() {
            return Err(format!(
                "{} permutations for {} partitions",
                self.perms.len(),
                datum.len()
            ));
        }
        for (i, (p, a)) in self.perms.iter().zip(datum.partitions()).enumerate() {
            if p.degree() != d {
                return Err(format!("permutation {i} has degree {}", p.degree()));
            }
            let t = cycle_type(p);
            if &t != a {
                return Err(format!("permutation {i} has cycle type {t}, expected {a}"));
            }
        }
        let prod = product(d, &self.perms).map_err(|e| e.to_string())?;
        if !prod.is_identity() {
            return Err(format!("product is {prod}, not the identity"));
        }
        let orbits = orbit_count(d, &self.perms);
        if orbits != 1 {
            return Err(format!("generated group has {orbits} orbits"));
        }
        Ok(())
    }

    /// Disjoint-cycle rendering of each factor on points `1..=d`.
    pub fn render_cycles(&self) -> Vec<String> {
        self.perms.iter().map(|p| p.to_string()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(ConstellationWitness),
    /// The search space was exhausted without a witness.
    Exhausted,
    Limited(Limit),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchReport {
    pub outcome: SearchOutcome,
    pub nodes: u64,
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Natural log of the size of the conjugacy class of type `t` in `S_d`:
/// `d! / prod(m_j! * j^m_j)`.
pub fn class_size_ln(t: &Partition) -> f64 {
    let centralizer: f64 = t
        .multiplicities()
        .iter()
        .map(|&(len, m)| ln_factorial(m as u64) + m as f64 * (len as f64).ln())
        .sum();
    ln_factorial(t.total()) - centralizer
}

/// Order in which the datum's partitions are placed in the search tuple:
/// largest class first, second largest last, the rest by increasing class
/// size. Ties keep datum order.
pub fn search_order(datum: &CandidateDatum) -> Vec<usize> {
    let sizes: Vec<f64> = datum.partitions().iter().map(class_size_ln).collect();
    let mut by_size: Vec<usize> = (0..sizes.len()).collect();
    // decreasing size, stable on index
    by_size.sort_by(|&a, &b| sizes[b].partial_cmp(&sizes[a]).unwrap().then(a.cmp(&b)));
    if by_size.len() < 2 {
        return by_size;
    }
    let first = by_size[0];
    let last = by_size[1];
    let mut middle: Vec<usize> = by_size[2..].to_vec();
    middle.sort_by(|&a, &b| sizes[a].partial_cmp(&sizes[b]).unwrap().then(a.cmp(&b)));
    let mut order = vec![first];
    order.extend(middle);
    order.push(last);
    order
}

/// Decides realizability of a candidate by exhaustive search.
pub fn search(datum: &CandidateDatum, budget: &SearchBudget) -> Result<SearchReport, Error> {
    let defect = datum.rh_defect();
    if defect != 0 {
        return Err(Error::RhDefect(defect));
    }
    if datum.degree() > budget.max_degree || datum.degree() > MAX_SEARCH_DEGREE {
        return Ok(SearchReport { outcome: SearchOutcome::Limited(Limit::DegreeLimit), nodes: 0 });
    }
    let d = datum.degree() as usize;
    let order = search_order(datum);
    let types: Vec<Partition> = order.iter().map(|&i| datum.partitions()[i].clone()).collect();
    let fixed = match types.first() {
        Some(t) => canonical_of_type(t),
        None => Permutation::identity(d),
    };
    let report = search_tuple(d, &types, &fixed, budget);
    Ok(match report.outcome {
        SearchOutcome::Found(w) => SearchReport {
            outcome: SearchOutcome::Found(reorder_witness(w, &order)),
            nodes: report.nodes,
        },
        other => SearchReport { outcome: other, nodes: report.nodes },
    })
}

/// Oracle verdict for a candidate datum.
pub fn decide(datum: &CandidateDatum, budget: &SearchBudget) -> Result<Verdict, Error> {
    let report = search(datum, budget)?;
    let mut verdict = match report.outcome {
        SearchOutcome::Found(w) => Verdict::realizable(Method::Oracle, Certificate::Witness(w)),
        SearchOutcome::Exhausted => Verdict::exceptional(Method::Oracle),
        SearchOutcome::Limited(limit) => Verdict::unknown(limit),
    };
    verdict.stats = Stats { nodes: report.nodes, ..Stats::default() };
    Ok(verdict)
}

/// Searches for a tuple whose i-th factor has type `types[i]`, whose first
/// factor is exactly `fixed`, and whose product is the identity. The witness
/// is reported in the given order. `fixed` must have type `types[0]`.
pub fn search_tuple(
    d: usize,
    types: &[Partition],
    fixed: &Permutation,
    budget: &SearchBudget,
) -> SearchReport {
    match types.len() {
        0 => {
            let outcome = if d == 1 {
                SearchOutcome::Found(ConstellationWitness { degree: 1, perms: Vec::new() })
            } else {
                SearchOutcome::Exhausted
            };
            return SearchReport { outcome, nodes: 0 };
        }
        1 => {
            let outcome = if fixed.is_identity() && d == 1 {
                SearchOutcome::Found(ConstellationWitness { degree: 1, perms: vec![fixed.clone()] })
            } else {
                SearchOutcome::Exhausted
            };
            return SearchReport { outcome, nodes: 0 };
        }
        _ => {}
    }
    debug_assert_eq!(cycle_type(fixed), types[0]);
    let problem = Problem::new(d, types, fixed, budget.max_nodes);
    if budget.deterministic || problem.middle.is_empty() {
        let mut s = Searcher::new(&problem, None);
        s.start();
        return s.into_report();
    }

    let seeds = {
        let mut s = Searcher::new(&problem, None);
        s.seeds = Some(Vec::new());
        s.start();
        s.seeds.take().unwrap_or_default()
    };
    let shared = Shared { nodes: AtomicU64::new(0), stop: AtomicBool::new(false) };
    let results: Vec<SearchReport> = seeds
        .par_iter()
        .map(|seed| {
            let mut s = Searcher::new(&problem, Some(&shared));
            s.resume(seed);
            s.into_report()
        })
        .collect();
    let nodes = results.iter().map(|r| r.nodes).sum::<u64>() + seeds.len() as u64;
    let mut limited = None;
    for r in results {
        match r.outcome {
            SearchOutcome::Found(w) => return SearchReport { outcome: SearchOutcome::Found(w), nodes },
            SearchOutcome::Limited(l) => limited = Some(l),
            SearchOutcome::Exhausted => {}
        }
    }
    let outcome = match limited {
        Some(l) => SearchOutcome::Limited(l),
        None => SearchOutcome::Exhausted,
    };
    SearchReport { outcome, nodes }
}

/// Moves a witness from search order back to datum order with Hurwitz moves
/// `(a, b) -> (b, b⁻¹ a b)`, which keep the product and the generated group.
fn reorder_witness(w: ConstellationWitness, order: &[usize]) -> ConstellationWitness {
    let mut labels = order.to_vec();
    let mut perms = w.perms;
    let n = perms.len();
    for pass in 0..n {
        for i in 0..n.saturating_sub(1 + pass) {
            if labels[i] > labels[i + 1] {
                let a = perms[i].clone();
                let b = perms[i + 1].clone();
                let conj = compose(&b.inverse(), &compose(&a, &b).unwrap()).unwrap();
                perms[i] = b;
                perms[i + 1] = conj;
                labels.swap(i, i + 1);
            }
        }
    }
    ConstellationWitness { degree: w.degree, perms }
}

struct Problem {
    d: usize,
    fixed: Vec<u8>,
    /// Remaining-cycle counts per middle factor, indexed by cycle length.
    middle: Vec<Vec<usize>>,
    forced: Vec<usize>,
    /// `slack[k]`: orbit merges available from middle factor `k` onwards,
    /// including the forced factor.
    slack: Vec<usize>,
    max_nodes: u64,
}

impl Problem {
    fn new(d: usize, types: &[Partition], fixed: &Permutation, max_nodes: u64) -> Self {
        let counts = |t: &Partition| {
            let mut c = vec![0usize; d + 1];
            for &p in t.parts() {
                c[p as usize] += 1;
            }
            c
        };
        let n = types.len();
        let middle: Vec<Vec<usize>> = types[1..n - 1].iter().map(counts).collect();
        let forced = counts(&types[n - 1]);
        let merges = |t: &Partition| d - t.len();
        let mut slack = vec![0; n - 1];
        slack[n - 2] = merges(&types[n - 1]);
        for k in (0..n - 2).rev() {
            slack[k] = slack[k + 1] + merges(&types[k + 1]);
        }
        Problem {
            d,
            fixed: fixed.images().iter().map(|&x| x as u8).collect(),
            middle,
            forced,
            slack,
            max_nodes,
        }
    }
}

struct Shared {
    nodes: AtomicU64,
    stop: AtomicBool,
}

#[derive(Clone)]
struct Seed {
    perm: Vec<u8>,
    used: Vec<bool>,
    counts: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stop {
    Found,
    Budget,
    Cancelled,
}

struct Searcher<'p> {
    p: &'p Problem,
    shared: Option<&'p Shared>,
    perms: Vec<Vec<u8>>,
    used: Vec<Vec<bool>>,
    counts: Vec<Vec<usize>>,
    /// `prods[k]`: product of the fixed factor and middle factors `0..k`.
    prods: Vec<Vec<u8>>,
    nodes: u64,
    stop: Option<Stop>,
    witness: Option<Vec<Vec<u8>>>,
    /// When set, the first cycle of factor 0 is collected instead of searched.
    seeds: Option<Vec<Seed>>,
    uf: Vec<usize>,
}

impl<'p> Searcher<'p> {
    fn new(p: &'p Problem, shared: Option<&'p Shared>) -> Self {
        let m = p.middle.len();
        let mut prods = vec![vec![0u8; p.d]; m + 1];
        prods[0] = p.fixed.clone();
        Searcher {
            p,
            shared,
            perms: vec![vec![0u8; p.d]; m],
            used: vec![vec![false; p.d]; m],
            counts: p.middle.clone(),
            prods,
            nodes: 0,
            stop: None,
            witness: None,
            seeds: None,
            uf: vec![0; p.d],
        }
    }

    fn start(&mut self) {
        let orbits = self.orbits(0);
        if orbits - 1 > self.p.slack[0] {
            return;
        }
        self.run_factor(0);
    }

    fn resume(&mut self, seed: &Seed) {
        if self.orbits(0) - 1 > self.p.slack[0] {
            return;
        }
        self.perms[0] = seed.perm.clone();
        self.used[0] = seed.used.clone();
        self.counts[0] = seed.counts.clone();
        self.next_cycle(0);
    }

    fn into_report(self) -> SearchReport {
        let outcome = match self.stop {
            Some(Stop::Found) => {
                let perms = self
                    .witness
                    .unwrap()
                    .into_iter()
                    .map(|v| Permutation::from_images_unchecked(v.into_iter().map(usize::from).collect()))
                    .collect();
                SearchOutcome::Found(ConstellationWitness { degree: self.p.d, perms })
            }
            Some(Stop::Budget) => SearchOutcome::Limited(Limit::Budget),
            // Cancelled searchers only run beside one that found a witness or
            // ran out of budget; the caller reports that one.
            Some(Stop::Cancelled) | None => SearchOutcome::Exhausted,
        };
        SearchReport { outcome, nodes: self.nodes }
    }

    /// Orbit count of the group generated by the fixed factor and middle
    /// factors `0..k`.
    fn orbits(&mut self, k: usize) -> usize {
        let d = self.p.d;
        for i in 0..d {
            self.uf[i] = i;
        }
        let mut comps = d;
        let sources = std::iter::once(&self.p.fixed).chain(self.perms[..k].iter());
        for perm in sources {
            for i in 0..d {
                let (mut a, mut b) = (i, perm[i] as usize);
                while self.uf[a] != a {
                    a = self.uf[a];
                }
                while self.uf[b] != b {
                    b = self.uf[b];
                }
                if a != b {
                    self.uf[a] = b;
                    comps -= 1;
                }
            }
        }
        comps
    }

    // true = stop the whole search
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes % CHECK_INTERVAL != 0 {
            return false;
        }
        match self.shared {
            Some(shared) => {
                if shared.stop.load(Ordering::Relaxed) {
                    self.stop = Some(Stop::Cancelled);
                    return true;
                }
                let total = shared.nodes.fetch_add(CHECK_INTERVAL, Ordering::Relaxed) + CHECK_INTERVAL;
                if total >= self.p.max_nodes {
                    self.stop = Some(Stop::Budget);
                    shared.stop.store(true, Ordering::Relaxed);
                    return true;
                }
            }
            None => {
                if self.nodes >= self.p.max_nodes {
                    self.stop = Some(Stop::Budget);
                    return true;
                }
            }
        }
        false
    }

    fn run_factor(&mut self, k: usize) -> bool {
        if k == self.p.middle.len() {
            return self.check_forced();
        }
        self.next_cycle(k)
    }

    fn check_forced(&mut self) -> bool {
        let d = self.p.d;
        let m = self.p.middle.len();
        let prod = &self.prods[m];
        // The forced factor is prod⁻¹, which has the same cycle type.
        let mut seen = vec![false; d];
        let mut counts = vec![0usize; d + 1];
        for start in 0..d {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = prod[x] as usize;
                len += 1;
            }
            counts[len] += 1;
            if counts[len] > self.p.forced[len] {
                return false;
            }
        }
        // prod has the same orbits as its inverse
        let last = prod.clone();
        if self.orbits_with(m, &last) != 1 {
            return false;
        }
        let mut inv = vec![0u8; d];
        for (i, &x) in last.iter().enumerate() {
            inv[x as usize] = i as u8;
        }
        let mut w = vec![self.p.fixed.clone()];
        w.extend(self.perms.iter().cloned());
        w.push(inv);
        self.witness = Some(w);
        self.stop = Some(Stop::Found);
        if let Some(shared) = self.shared {
            shared.stop.store(true, Ordering::Relaxed);
        }
        true
    }

    fn orbits_with(&mut self, k: usize, extra: &[u8]) -> usize {
        let mut comps = self.orbits(k);
        for i in 0..self.p.d {
            let (mut a, mut b) = (i, extra[i] as usize);
            while self.uf[a] != a {
                a = self.uf[a];
            }
            while self.uf[b] != b {
                b = self.uf[b];
            }
            if a != b {
                self.uf[a] = b;
                comps -= 1;
            }
        }
        comps
    }

    fn next_cycle(&mut self, k: usize) -> bool {
        let d = self.p.d;
        let Some(start) = (0..d).find(|&x| !self.used[k][x]) else {
            return self.factor_done(k);
        };
        for len in (1..=d).rev() {
            if self.counts[k][len] == 0 {
                continue;
            }
            self.counts[k][len] -= 1;
            self.used[k][start] = true;
            let stop = if len == 1 {
                self.perms[k][start] = start as u8;
                self.cycle_done(k)
            } else {
                self.extend(k, start, start, len - 1)
            };
            self.used[k][start] = false;
            self.counts[k][len] += 1;
            if stop {
                return true;
            }
        }
        false
    }

    fn extend(&mut self, k: usize, start: usize, prev: usize, left: usize) -> bool {
        if left == 0 {
            self.perms[k][prev] = start as u8;
            return self.cycle_done(k);
        }
        for x in start + 1..self.p.d {
            if self.used[k][x] {
                continue;
            }
            self.used[k][x] = true;
            self.perms[k][prev] = x as u8;
            let stop = self.extend(k, start, x, left - 1);
            self.used[k][x] = false;
            if stop {
                return true;
            }
        }
        false
    }

    fn cycle_done(&mut self, k: usize) -> bool {
        if let Some(seeds) = self.seeds.as_mut() {
            seeds.push(Seed {
                perm: self.perms[k].clone(),
                used: self.used[k].clone(),
                counts: self.counts[k].clone(),
            });
            return false;
        }
        if self.tick() {
            return true;
        }
        self.next_cycle(k)
    }

    fn factor_done(&mut self, k: usize) -> bool {
        let d = self.p.d;
        for x in 0..d {
            let y = self.perms[k][x] as usize;
            self.prods[k + 1][x] = self.prods[k][y];
        }
        if self.orbits(k + 1) - 1 > self.p.slack[k + 1] {
            return false;
        }
        self.run_factor(k + 1)
    }
}
