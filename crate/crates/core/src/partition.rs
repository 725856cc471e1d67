//! Partitions, candidate branching data, and the decomposition primitive.
//!
//! A [`Partition`] is the list of local degrees over one branch point. A
//! [`CandidateDatum`] is a degree together with the multiset of nontrivial
//! partitions over all branch points; it is always held in canonical form so
//! that equal data compare (and hash, and render) equal.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Divisors of `n` that are at least 2, in increasing order.
pub(crate) fn divisors_from_two(n: u64) -> Vec<u64> {
    (2..=n).filter(|s| n % s == 0).collect()
}

/// A multiset of positive integers, stored in non-increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Partition {
    parts: Vec<u64>,
    total: u64,
}

impl Partition {
    /// Builds a partition from parts in any order. Parts must be positive and
    /// the list nonempty.
    pub fn new(mut parts: Vec<u64>) -> Result<Self, Error> {
        if parts.is_empty() {
            return Err(Error::EmptyPartition);
        }
        if parts.contains(&0) {
            return Err(Error::NonPositivePart);
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        let total = parts.iter().sum();
        Ok(Partition { parts, total })
    }

    /// The all-ones partition of `d`.
    pub fn trivial(d: u64) -> Self {
        Partition { parts: vec![1; d as usize], total: d }
    }

    /// A single part `[d]`.
    pub fn full_cycle(d: u64) -> Self {
        Partition { parts: vec![d], total: d }
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn largest(&self) -> u64 {
        self.parts[0]
    }

    pub fn is_trivial(&self) -> bool {
        self.parts.iter().all(|&p| p == 1)
    }

    pub fn gcd(&self) -> u64 {
        self.parts.iter().fold(0, |g, &p| gcd(g, p))
    }

    /// Divides every part by `s`.
    pub fn divide(&self, s: u64) -> Result<Partition, Error> {
        if s == 0 {
            return Err(Error::NotDivisible { partition: self.to_string(), divisor: s });
        }
        if self.parts.iter().any(|&p| p % s != 0) {
            return Err(Error::NotDivisible { partition: self.to_string(), divisor: s });
        }
        Ok(Partition {
            parts: self.parts.iter().map(|p| p / s).collect(),
            total: self.total / s,
        })
    }

    /// Multiplies every part by `s`.
    pub fn scale(&self, s: u64) -> Partition {
        Partition {
            parts: self.parts.iter().map(|p| p * s).collect(),
            total: self.total * s,
        }
    }

    /// Multiset union of the parts of several partitions.
    pub fn merge<'a>(groups: impl IntoIterator<Item = &'a Partition>) -> Result<Partition, Error> {
        let parts: Vec<u64> = groups.into_iter().flat_map(|g| g.parts.iter().copied()).collect();
        Partition::new(parts)
    }

    /// Multiplicity of each distinct part, as `(part, count)` in decreasing
    /// part order.
    pub fn multiplicities(&self) -> Vec<(u64, usize)> {
        let mut out: Vec<(u64, usize)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((q, c)) if *q == p => *c += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }
}

impl TryFrom<Vec<u64>> for Partition {
    type Error = Error;
    fn try_from(parts: Vec<u64>) -> Result<Self, Error> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<u64> {
    fn from(p: Partition) -> Vec<u64> {
        p.parts
    }
}

/// Datum order: shorter partitions first, then lexicographic on the
/// (non-increasing) parts.
impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.parts
            .len()
            .cmp(&other.parts.len())
            .then_with(|| self.parts.cmp(&other.parts))
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("]")
    }
}

/// A degree plus the multiset of nontrivial partitions of that degree, in
/// canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandidateDatum {
    degree: u64,
    partitions: Vec<Partition>,
}

impl CandidateDatum {
    /// Normalizes: checks every total, drops trivial partitions and sorts.
    pub fn new(degree: u64, partitions: Vec<Partition>) -> Result<Self, Error> {
        if degree < 1 {
            return Err(Error::ZeroDegree);
        }
        for p in &partitions {
            if p.total() != degree {
                return Err(Error::SumMismatch { partition: p.to_string(), sum: p.total(), degree });
            }
        }
        let mut partitions: Vec<Partition> =
            partitions.into_iter().filter(|p| !p.is_trivial()).collect();
        partitions.sort();
        Ok(CandidateDatum { degree, partitions })
    }

    /// The empty datum of the identity cover in degree 1.
    pub fn identity() -> Self {
        CandidateDatum { degree: 1, partitions: Vec::new() }
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    /// Number of branch points.
    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    /// Riemann–Hurwitz defect for covers of the sphere by the sphere:
    /// `(n - 2) d + 2 - sum of lengths`. Zero exactly for valid candidates.
    pub fn rh_defect(&self) -> i64 {
        let n = self.partitions.len() as i64;
        let lengths: i64 = self.partitions.iter().map(|p| p.len() as i64).sum();
        (n - 2) * self.degree as i64 + 2 - lengths
    }

    pub fn is_candidate(&self) -> bool {
        self.rh_defect() == 0
    }
}

impl fmt::Display for CandidateDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.degree)?;
        for p in &self.partitions {
            write!(f, " {p}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for CandidateDatum {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        parse_datum(s)
    }
}

/// Riemann–Hurwitz defect of a datum; see [`CandidateDatum::rh_defect`].
pub fn rh_defect(datum: &CandidateDatum) -> i64 {
    datum.rh_defect()
}

struct Scanner<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Syntax { position: self.pos, message: message.into() }
    }

    fn expect(&mut self, c: char) -> Result<(), Error> {
        self.skip_ws();
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => Err(self.err(format!("expected '{c}', found '{x}'"))),
            None => Err(self.err(format!("expected '{c}', found end of input"))),
        }
    }

    fn int(&mut self) -> Result<u64, Error> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some('-') {
            return Err(Error::NonPositivePart);
        }
        while matches!(self.peek(), Some('0'..='9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.peek() {
                Some(c) => self.err(format!("expected integer, found '{c}'")),
                None => self.err("expected integer, found end of input"),
            });
        }
        self.text[start..self.pos].parse().map_err(|_| Error::Syntax {
            position: start,
            message: "integer out of range".into(),
        })
    }
}

/// Parses `degree ":" partition*` where `partition := "[" int ("," int)* "]"`.
/// The result is normalized.
pub fn parse_datum(text: &str) -> Result<CandidateDatum, Error> {
    let mut sc = Scanner { text, pos: 0 };
    let degree = sc.int()?;
    if degree == 0 {
        return Err(Error::ZeroDegree);
    }
    sc.expect(':')?;
    let mut partitions = Vec::new();
    loop {
        sc.skip_ws();
        match sc.peek() {
            None => break,
            Some('[') => {
                sc.pos += 1;
                let mut parts = vec![sc.int()?];
                loop {
                    sc.skip_ws();
                    match sc.peek() {
                        Some(',') => {
                            sc.pos += 1;
                            parts.push(sc.int()?);
                        }
                        Some(']') => {
                            sc.pos += 1;
                            break;
                        }
                        Some(c) => return Err(sc.err(format!("expected ',' or ']', found '{c}'"))),
                        None => return Err(sc.err("unterminated partition")),
                    }
                }
                partitions.push(Partition::new(parts)?);
            }
            Some(c) => return Err(sc.err(format!("expected '[', found '{c}'"))),
        }
    }
    CandidateDatum::new(degree, partitions)
}

/// One way of splitting a partition into `m` sub-partitions of equal total.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Decomposition {
    /// Index of the source partition in its datum (0 when standalone).
    pub source: usize,
    /// Groups in datum order; trivial groups are kept.
    pub groups: Vec<Partition>,
}

/// Divides every part of `partition` by `s`.
pub fn divide(partition: &Partition, s: u64) -> Result<Partition, Error> {
    partition.divide(s)
}

/// All distinct multisets of `m` partitions of `u` whose parts reassemble
/// `partition`.
pub fn decompose(partition: &Partition, m: u64, u: u64) -> Result<Vec<Decomposition>, Error> {
    decompose_from(partition, m, u, 0)
}

pub(crate) fn decompose_from(
    partition: &Partition,
    m: u64,
    u: u64,
    source: usize,
) -> Result<Vec<Decomposition>, Error> {
    if m == 0 || u == 0 || m.checked_mul(u) != Some(partition.total()) {
        return Err(Error::BadSplit { partition: partition.to_string(), groups: m, size: u });
    }
    let mut out = Vec::new();
    if partition.largest() > u {
        return Ok(out);
    }
    let mut state = SplitState {
        parts: partition.parts(),
        u,
        groups: vec![Vec::new(); m as usize],
        fill: vec![0; m as usize],
    };
    state.place(0, 0, &mut |groups| {
        let mut groups: Vec<Partition> = groups
            .iter()
            .map(|g| Partition::new(g.clone()).expect("groups are nonempty"))
            .collect();
        groups.sort();
        out.push(Decomposition { source, groups });
    });
    Ok(out)
}

struct SplitState<'a> {
    parts: &'a [u64],
    u: u64,
    groups: Vec<Vec<u64>>,
    fill: Vec<u64>,
}

impl SplitState<'_> {
    // Parts arrive in non-increasing order. Copies of an equal part go to
    // non-decreasing group indices, and a part never enters a group when an
    // earlier group holds the same content.
    fn place(&mut self, idx: usize, min_group: usize, emit: &mut dyn FnMut(&[Vec<u64>])) {
        if idx == self.parts.len() {
            emit(&self.groups);
            return;
        }
        let part = self.parts[idx];
        let next_equal = idx + 1 < self.parts.len() && self.parts[idx + 1] == part;
        for g in min_group..self.groups.len() {
            if self.fill[g] + part > self.u {
                continue;
            }
            if (0..g).any(|h| self.groups[h] == self.groups[g]) {
                continue;
            }
            self.groups[g].push(part);
            self.fill[g] += part;
            let lower = if next_equal { g } else { 0 };
            self.place(idx + 1, lower, emit);
            self.fill[g] -= part;
            self.groups[g].pop();
        }
    }
}

/// Nontrivial partitions of `d` in datum order.
pub fn nontrivial_partitions(d: u64) -> Vec<Partition> {
    fn rec(rem: u64, max: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=rem.min(max)).rev() {
            cur.push(p);
            rec(rem - p, p, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(d, d, &mut Vec::new(), &mut raw);
    let mut out: Vec<Partition> = raw
        .into_iter()
        .map(|parts| Partition { total: d, parts })
        .filter(|p| !p.is_trivial())
        .collect();
    out.sort();
    out
}

/// Lazily yields every candidate datum of degree `d` with `n` branch points,
/// each once, in canonical order.
pub fn enumerate_candidates(d: u64, n: usize) -> Candidates {
    let pool = if d >= 2 { nontrivial_partitions(d) } else { Vec::new() };
    let target = (n as i64 - 2) * d as i64 + 2;
    Candidates { d, pool, target, stack: Vec::new(), n, started: false, done: n == 0 || d < 2 }
}

/// Iterator returned by [`enumerate_candidates`].
pub struct Candidates {
    d: u64,
    pool: Vec<Partition>,
    target: i64,
    // Chosen pool indices, non-decreasing.
    stack: Vec<usize>,
    n: usize,
    started: bool,
    done: bool,
}

impl Candidates {
    fn used_length(&self) -> i64 {
        self.stack.iter().map(|&i| self.pool[i].len() as i64).sum()
    }

    // Whether the current prefix can still be completed within the length
    // budget. Lengths of nontrivial partitions range over 1..=d-1.
    fn feasible(&self) -> bool {
        let left = (self.n - self.stack.len()) as i64;
        let rem = self.target - self.used_length();
        let min_len = self.stack.last().map_or(1, |&i| self.pool[i].len() as i64);
        rem >= left * min_len && rem <= left * (self.d as i64 - 1)
    }

    // Advances the odometer to the next complete, feasible tuple.
    fn advance(&mut self) -> bool {
        loop {
            if self.stack.len() == self.n {
                if self.used_length() == self.target {
                    return true;
                }
                if !self.bump() {
                    return false;
                }
                continue;
            }
            if !self.feasible() {
                if !self.bump() {
                    return false;
                }
                continue;
            }
            let from = self.stack.last().copied().unwrap_or(0);
            self.stack.push(from);
        }
    }

    // Moves to the next sibling of the deepest position, popping exhausted
    // levels.
    fn bump(&mut self) -> bool {
        while let Some(top) = self.stack.pop() {
            if top + 1 < self.pool.len() {
                self.stack.push(top + 1);
                return true;
            }
        }
        false
    }
}

impl Iterator for Candidates {
    type Item = CandidateDatum;

    fn next(&mut self) -> Option<CandidateDatum> {
        if self.done {
            return None;
        }
        let ok = if self.started {
            self.bump() && self.advance()
        } else {
            self.started = true;
            self.advance()
        };
        if !ok {
            self.done = true;
            return None;
        }
        let partitions = self.stack.iter().map(|&i| self.pool[i].clone()).collect();
        Some(CandidateDatum { degree: self.d, partitions })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[u64]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn parses_and_normalizes() {
        let a = parse_datum("4: [3,1] [2,2] [2,2]").unwrap();
        let b = parse_datum("4: [1,3] [2,2] [1,1,1,1] [2,2]").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.degree(), 4);
        assert_eq!(a.to_string(), "4: [2,2] [2,2] [3,1]");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_datum("4: [3,2]"),
            Err(Error::SumMismatch { sum: 5, degree: 4, .. })
        ));
        assert!(matches!(parse_datum("4: [3,0,1]"), Err(Error::NonPositivePart)));
        assert!(matches!(parse_datum("4: [-3,1]"), Err(Error::NonPositivePart)));
        assert!(matches!(parse_datum("0: "), Err(Error::ZeroDegree)));
        match parse_datum("4: [3,1 [2,2]") {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 8),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_datum("4 [3,1]"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_datum("4: []"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn empty_datum_round_trips() {
        let d = parse_datum("3: [1,1,1]").unwrap();
        assert!(d.is_empty());
        assert_eq!(parse_datum(&d.to_string()).unwrap(), d);
    }

    #[test]
    fn rh_defect_examples() {
        assert_eq!(parse_datum("4: [3,1] [2,2] [2,2]").unwrap().rh_defect(), 0);
        assert_eq!(parse_datum("3: [3] [3] [3]").unwrap().rh_defect(), 2);
        assert_eq!(parse_datum("6: [2,2,2] [2,2,2] [3,3]").unwrap().rh_defect(), 0);
    }

    #[test]
    fn divide_examples() {
        assert_eq!(p(&[2, 2, 2]).divide(2).unwrap(), p(&[1, 1, 1]));
        assert_eq!(p(&[6, 3]).divide(3).unwrap(), p(&[2, 1]));
        assert!(matches!(p(&[4, 2]).divide(4), Err(Error::NotDivisible { .. })));
    }

    #[test]
    fn partition_invariants() {
        let q = p(&[1, 4, 2, 2]);
        assert_eq!(q.parts(), &[4, 2, 2, 1]);
        assert_eq!(q.total(), 9);
        assert_eq!(q.gcd(), 1);
        assert_eq!(p(&[6, 4]).gcd(), 2);
        assert!(p(&[1, 1]).is_trivial());
        assert!(!q.is_trivial());
        assert_eq!(q.multiplicities(), vec![(4, 1), (2, 2), (1, 1)]);
    }

    fn groups(ds: &[Decomposition]) -> Vec<Vec<Partition>> {
        ds.iter().map(|d| d.groups.clone()).collect()
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(groups(&decompose(&p(&[3, 3]), 2, 3).unwrap()), vec![vec![p(&[3]), p(&[3])]]);
        assert!(decompose(&p(&[3, 1]), 2, 2).unwrap().is_empty());
        assert_eq!(
            groups(&decompose(&p(&[4, 2, 1, 1]), 2, 4).unwrap()),
            vec![vec![p(&[4]), p(&[2, 1, 1])]]
        );
        assert_eq!(
            groups(&decompose(&p(&[2, 2, 1, 1]), 2, 3).unwrap()),
            vec![vec![p(&[2, 1]), p(&[2, 1])]]
        );
        assert!(matches!(decompose(&p(&[2, 2]), 3, 2), Err(Error::BadSplit { .. })));
    }

    #[test]
    fn decompose_keeps_trivial_groups() {
        let ds = decompose(&p(&[2, 1, 1]), 2, 2).unwrap();
        assert_eq!(groups(&ds), vec![vec![p(&[2]), p(&[1, 1])]]);
    }

    #[test]
    fn candidates_degree_four() {
        let all: Vec<String> = enumerate_candidates(4, 3).map(|c| c.to_string()).collect();
        assert_eq!(all.len(), 6);
        assert!(all.contains(&"4: [2,2] [2,2] [3,1]".to_string()));
        assert!(all.contains(&"4: [2,2] [2,2] [2,2]".to_string()));
    }

    #[test]
    fn candidates_small_edges() {
        let two: Vec<String> = enumerate_candidates(2, 2).map(|c| c.to_string()).collect();
        assert_eq!(two, vec!["2: [2] [2]"]);
        let three: Vec<String> = enumerate_candidates(3, 3).map(|c| c.to_string()).collect();
        assert_eq!(three, vec!["3: [3] [2,1] [2,1]"]);
        assert_eq!(enumerate_candidates(5, 1).count(), 0);
    }

    #[test]
    fn candidates_are_canonical_sorted() {
        let all: Vec<CandidateDatum> = enumerate_candidates(6, 4).collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        for c in &all {
            assert!(c.partitions().windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
