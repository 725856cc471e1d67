//! Necessary conditions and closed-form deciders driven by divisibility
//! structure in the datum.
//!
//! A *structure* is a pair of partitions whose parts are all divisible by
//! some `s >= 2`. Around a structure, the remaining partitions are
//! constrained: their gcds must divide the quotient degree in specific ways,
//! their parts are bounded, and their lengths are bounded below. Every check
//! here is one-sided: a report means "exceptional", and silence means
//! nothing.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::Error;
use crate::partition::{decompose, divisors_from_two, gcd, nontrivial_partitions, CandidateDatum, Partition};
use crate::verdict::{Method, Status, Verdict};

/// Gcd of a non-paired partition, recorded against its datum index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct OtherGcd {
    pub index: usize,
    pub gcd: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct StructureMatch {
    pub pair: (usize, usize),
    pub s: u64,
    pub d_prime: u64,
    pub others: Vec<OtherGcd>,
}

impl StructureMatch {
    pub fn is_paired(&self, index: usize) -> bool {
        index == self.pair.0 || index == self.pair.1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Prop1Case1,
    Prop1Case2,
    Prop1Case3,
    Cor1Parts,
    Cor1Length,
    Cor2Parts,
    Cor2Length,
    Cor3Parts,
    Cor3Length,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Prop1Case1 => "prop1.case1",
            Rule::Prop1Case2 => "prop1.case2",
            Rule::Prop1Case3 => "prop1.case3",
            Rule::Cor1Parts => "cor1.parts",
            Rule::Cor1Length => "cor1.length",
            Rule::Cor2Parts => "cor2.parts",
            Rule::Cor2Length => "cor2.length",
            Rule::Cor3Parts => "cor3.parts",
            Rule::Cor3Length => "cor3.length",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Rule {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Hint {
    Pass,
    Exceptional,
}

/// The concrete inequality a datum violates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FilterDetail {
    pub pair: (usize, usize),
    pub s: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
    pub d_prime: u64,
    /// Datum index of the offending partition.
    pub partition: usize,
    pub violation: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FilterReport {
    pub verdict_hint: Hint,
    pub rule: Rule,
    pub witness_detail: FilterDetail,
}

impl FilterReport {
    fn exceptional(rule: Rule, witness_detail: FilterDetail) -> Self {
        FilterReport { verdict_hint: Hint::Exceptional, rule, witness_detail }
    }
}

/// Every pair of partitions and every `s >= 2` dividing all their parts.
pub fn detect_structures(datum: &CandidateDatum) -> Vec<StructureMatch> {
    let parts = datum.partitions();
    let gcds: Vec<u64> = parts.iter().map(Partition::gcd).collect();
    let mut out = Vec::new();
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            let g = gcd(gcds[i], gcds[j]);
            for s in divisors_from_two(g) {
                let others = (0..parts.len())
                    .filter(|&m| m != i && m != j)
                    .map(|m| OtherGcd { index: m, gcd: gcds[m] })
                    .collect();
                out.push(StructureMatch { pair: (i, j), s, d_prime: datum.degree() / s, others });
            }
        }
    }
    out
}

fn detail(m: &StructureMatch, t: Option<u64>, partition: usize, violation: String) -> FilterDetail {
    FilterDetail { pair: m.pair, s: m.s, t, d_prime: m.d_prime, partition, violation }
}

/// Divisibility constraints on the gcd of a third partition next to an
/// `s`-pair.
pub fn prop1_filter(datum: &CandidateDatum) -> Vec<FilterReport> {
    let mut out = Vec::new();
    for m in detect_structures(datum) {
        let dp = m.d_prime;
        for o in &m.others {
            let t = o.gcd;
            let hit = if m.s >= 4 && t >= 2 {
                // unreachable on Riemann-Hurwitz valid data; kept as a check
                Some((Rule::Prop1Case1, format!("s = {} >= 4 requires t = 1, got t = {t}", m.s)))
            } else if m.s == 3 && t > 2 {
                Some((Rule::Prop1Case2, format!("s = 3 requires t in {{1,2}}, got t = {t}")))
            } else if m.s == 3 && t == 2 && dp % 4 != 0 {
                Some((Rule::Prop1Case2, format!("s = 3, t = 2 requires 4 | d' = {dp}")))
            } else if m.s == 2 && t >= 2 && dp % t != 0 {
                Some((Rule::Prop1Case3, format!("s = 2 requires t = {t} to divide d' = {dp}")))
            } else {
                None
            };
            if let Some((rule, violation)) = hit {
                out.push(FilterReport::exceptional(rule, detail(&m, Some(t), o.index, violation)));
            }
        }
    }
    out
}

/// Part-size and length bounds implied by the reduction theorems.
///
/// With `strict = false` the length bounds are the provable `>=` form;
/// `strict = true` uses `>`, which rejects some realizable data.
pub fn corollary_filter(datum: &CandidateDatum, strict: bool) -> Vec<FilterReport> {
    let parts = datum.partitions();
    let mut out = Vec::new();
    let too_short = |len: u64, bound: u64| if strict { len <= bound } else { len < bound };
    let rel = if strict { ">" } else { ">=" };

    for m in detect_structures(datum) {
        let dp = m.d_prime;
        // single structure: every other partition splits into s partitions of d'
        for o in &m.others {
            let a = &parts[o.index];
            if a.largest() > dp {
                let v = format!("part {} > d' = {dp}", a.largest());
                out.push(FilterReport::exceptional(Rule::Cor1Parts, detail(&m, None, o.index, v)));
            }
            if too_short(a.len() as u64, m.s) {
                let v = format!("length {} violates length {rel} s = {}", a.len(), m.s);
                out.push(FilterReport::exceptional(Rule::Cor1Length, detail(&m, None, o.index, v)));
            }
        }

        if m.s == 2 {
            for third in &m.others {
                let t = third.gcd;
                if t < 2 || dp % t != 0 {
                    continue;
                }
                let bounds = [(2 * dp / t, "2d'/t"), (dp, "d'"), (dp / t, "d'/t")];
                check_double_structure(
                    datum, &m, third.index, t, bounds, 2 * t, Rule::Cor2Parts, Rule::Cor2Length,
                    &too_short, rel, &mut out,
                );
            }
        }

        if m.s == 3 && dp % 4 == 0 {
            for third in &m.others {
                if third.gcd % 2 != 0 {
                    continue;
                }
                let bounds = [(3 * dp / 4, "3d'/4"), (dp / 2, "d'/2"), (dp / 4, "d'/4")];
                check_double_structure(
                    datum, &m, third.index, 2, bounds, 12, Rule::Cor3Parts, Rule::Cor3Length,
                    &too_short, rel, &mut out,
                );
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn check_double_structure(
    datum: &CandidateDatum,
    m: &StructureMatch,
    third: usize,
    t: u64,
    // part bounds for: paired, third, remaining
    bounds: [(u64, &str); 3],
    min_len: u64,
    parts_rule: Rule,
    length_rule: Rule,
    too_short: &dyn Fn(u64, u64) -> bool,
    rel: &str,
    out: &mut Vec<FilterReport>,
) {
    for (idx, a) in datum.partitions().iter().enumerate() {
        let (bound, name) = if m.is_paired(idx) {
            bounds[0]
        } else if idx == third {
            bounds[1]
        } else {
            bounds[2]
        };
        if a.largest() > bound {
            let v = format!("part {} > {name} = {bound}", a.largest());
            out.push(FilterReport::exceptional(parts_rule, detail(m, Some(t), idx, v)));
        }
        if !m.is_paired(idx) && idx != third && too_short(a.len() as u64, min_len) {
            let v = format!("length {} violates length {rel} {min_len}", a.len());
            out.push(FilterReport::exceptional(length_rule, detail(m, Some(t), idx, v)));
        }
    }
}

/// Parameters of the three-point family `{first, [2^(k-y), 2y], [2^(k-x), 2x]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SongXuShape {
    pub k: u64,
    pub x: u64,
    pub y: u64,
    pub first: Partition,
}

fn even_shape(p: &Partition) -> Option<u64> {
    // [2, .., 2, 2y] with all other parts equal to 2
    if p.parts().iter().any(|&a| a % 2 != 0) {
        return None;
    }
    let big: Vec<u64> = p.parts().iter().copied().filter(|&a| a != 2).collect();
    match big.as_slice() {
        [] => Some(1),
        [b] => Some(b / 2),
        _ => None,
    }
}

/// The datum of the family, normalized.
pub fn songxu_datum(k: u64, x: u64, y: u64, first: &Partition) -> Result<CandidateDatum, Error> {
    check_songxu(k, x, y, first)?;
    let mut second = vec![2; (k - y) as usize];
    second.push(2 * y);
    let mut third = vec![2; (k - x) as usize];
    third.push(2 * x);
    CandidateDatum::new(
        2 * k,
        vec![first.clone(), Partition::new(second)?, Partition::new(third)?],
    )
}

fn check_songxu(k: u64, x: u64, y: u64, first: &Partition) -> Result<(), Error> {
    if k < 3 || x < 1 || y < 1 || k < x.max(y) {
        return Err(Error::Precondition(format!("need k >= 3 and 1 <= x, y <= k; got k={k}, x={x}, y={y}")));
    }
    if first.len() as u64 != x + y || first.total() != 2 * k {
        return Err(Error::Precondition(format!(
            "first partition {first} must have {} parts summing to {}",
            x + y,
            2 * k
        )));
    }
    Ok(())
}

/// Closed-form decision for the family: realizable iff `first` splits into
/// two partitions of `k` and `k / gcd(first) >= max(x, y)`.
pub fn songxu_decide(k: u64, x: u64, y: u64, first: &Partition) -> Result<Verdict, Error> {
    check_songxu(k, x, y, first)?;
    let splits = !decompose(first, 2, k)?.is_empty();
    // k / g >= max(x, y) as an exact rational comparison
    let ratio_ok = k >= x.max(y) * first.gcd();
    let status = if splits && ratio_ok { Status::Realizable } else { Status::Exceptional };
    Ok(Verdict::new(status, Method::SongXu))
}

/// Recognizes a datum of exactly the family's shape.
pub fn songxu_match(datum: &CandidateDatum) -> Option<SongXuShape> {
    let parts = datum.partitions();
    if parts.len() != 3 || datum.degree() % 2 != 0 {
        return None;
    }
    let k = datum.degree() / 2;
    if k < 3 {
        return None;
    }
    for f in 0..3 {
        let (a, b) = match f {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let (Some(y), Some(x)) = (even_shape(&parts[a]), even_shape(&parts[b])) else {
            continue;
        };
        let first = &parts[f];
        if check_songxu(k, x, y, first).is_ok() {
            return Some(SongXuShape { k, x, y, first: first.clone() });
        }
    }
    None
}

/// One datum of the exceptional families built around two `[s^k]` partitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyInstance {
    pub datum: CandidateDatum,
    /// `Some(Exceptional)` when a free partition has a part `>= k + 1`.
    pub expected: Option<Status>,
    pub rule: Option<Rule>,
}

/// Which family member: the numbered cases fix the number of free partitions
/// (`t = n + 1`), the general one takes it explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyExample {
    Numbered(u8),
    General { t: u64 },
}

impl FamilyExample {
    pub fn free_count(self) -> Result<u64, Error> {
        match self {
            FamilyExample::Numbered(n @ 1..=5) => Ok(n as u64 + 1),
            FamilyExample::Numbered(n) => Err(Error::Precondition(format!("no family example {n}"))),
            FamilyExample::General { t } if t >= 1 => Ok(t),
            FamilyExample::General { .. } => Err(Error::Precondition("need t >= 1".into())),
        }
    }
}

/// Total length the free partitions must have for the datum to satisfy
/// Riemann–Hurwitz.
pub fn family_length_budget(s: u64, k: u64, t: u64) -> i64 {
    (t as i64 * s as i64 - 2) * k as i64 + 2
}

/// Builds `(sk, {free.., [s^k], [s^k]})` and its expected verdict.
pub fn family_generate(
    example: FamilyExample,
    s: u64,
    k: u64,
    free: &[Partition],
) -> Result<FamilyInstance, Error> {
    let t = example.free_count()?;
    if s < 2 || k < 2 {
        return Err(Error::Precondition(format!("need s >= 2 and k >= 2; got s={s}, k={k}")));
    }
    if free.len() as u64 != t {
        return Err(Error::Precondition(format!("expected {t} free partitions, got {}", free.len())));
    }
    let d = s * k;
    for p in free {
        if p.total() != d || p.is_trivial() {
            return Err(Error::Precondition(format!("{p} is not a nontrivial partition of {d}")));
        }
    }
    let budget = family_length_budget(s, k, t);
    let used: i64 = free.iter().map(|p| p.len() as i64).sum();
    if used != budget {
        return Err(Error::Precondition(format!("free lengths sum to {used}, length budget is {budget}")));
    }
    let mut partitions = free.to_vec();
    let paired = Partition::new(vec![s; k as usize])?;
    partitions.push(paired.clone());
    partitions.push(paired);
    let datum = CandidateDatum::new(d, partitions)?;
    debug_assert_eq!(datum.rh_defect(), 0);
    let large = free.iter().any(|p| p.largest() > k);
    Ok(FamilyInstance {
        datum,
        expected: large.then_some(Status::Exceptional),
        rule: large.then_some(Rule::Cor1Parts),
    })
}

/// Every family datum whose free partitions meet the length budget and carry
/// a part `>= k + 1`. Empty when the budget cannot be met.
pub fn family_enumerate(s: u64, k: u64, t: u64) -> Result<Vec<FamilyInstance>, Error> {
    if s < 2 || k < 2 || t < 1 {
        return Err(Error::Precondition(format!("need s, k >= 2 and t >= 1; got s={s}, k={k}, t={t}")));
    }
    let pool = nontrivial_partitions(s * k);
    let budget = family_length_budget(s, k, t);
    let mut out = Vec::new();
    let mut pick = Vec::new();
    fn rec(
        pool: &[Partition],
        from: usize,
        left: u64,
        rem: i64,
        pick: &mut Vec<usize>,
        emit: &mut dyn FnMut(&[usize]),
    ) {
        if left == 0 {
            if rem == 0 {
                emit(pick);
            }
            return;
        }
        for i in from..pool.len() {
            let len = pool[i].len() as i64;
            if len * left as i64 > rem {
                // pool is sorted by length
                break;
            }
            pick.push(i);
            rec(pool, i, left - 1, rem - len, pick, emit);
            pick.pop();
        }
    }
    let mut emit = |idx: &[usize]| {
        let free: Vec<Partition> = idx.iter().map(|&i| pool[i].clone()).collect();
        if free.iter().any(|p| p.largest() > k) {
            let inst = family_generate(FamilyExample::General { t }, s, k, &free)
                .expect("enumerated free partitions meet the budget");
            out.push(inst);
        }
    };
    rec(&pool, 0, t, budget, &mut pick, &mut emit);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::parse_datum;

    fn p(parts: &[u64]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn rules(reports: &[FilterReport]) -> Vec<&'static str> {
        let mut r: Vec<&str> = reports.iter().map(|r| r.rule.name()).collect();
        r.sort();
        r.dedup();
        r
    }

    #[test]
    fn structures_eks() {
        let d = parse_datum("4: [2,2] [2,2] [3,1]").unwrap();
        let ms = detect_structures(&d);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].pair, (0, 1));
        assert_eq!((ms[0].s, ms[0].d_prime), (2, 2));
        assert_eq!(ms[0].others, vec![OtherGcd { index: 2, gcd: 1 }]);
    }

    #[test]
    fn structures_klein() {
        let d = parse_datum("4: [2,2] [2,2] [2,2]").unwrap();
        let ms = detect_structures(&d);
        assert_eq!(ms.len(), 3);
        for m in &ms {
            assert_eq!((m.s, m.d_prime), (2, 2));
            assert_eq!(m.others.len(), 1);
            assert_eq!(m.others[0].gcd, 2);
        }
    }

    #[test]
    fn structures_degree_six() {
        let d = parse_datum("6: [3,2,1] [2,2,2] [4,2]").unwrap();
        let ms = detect_structures(&d);
        assert_eq!(ms.len(), 1);
        let m = &ms[0];
        let pair = [&d.partitions()[m.pair.0], &d.partitions()[m.pair.1]];
        assert!(pair.contains(&&p(&[2, 2, 2])) && pair.contains(&&p(&[4, 2])));
        assert_eq!((m.s, m.d_prime), (2, 3));
        assert_eq!(m.others[0].gcd, 1);
    }

    #[test]
    fn prop1_case3() {
        let d = parse_datum("12: [2,2,2,2,2,2] [2,2,2,2,2,2] [8,4]").unwrap();
        let r = prop1_filter(&d);
        assert_eq!(rules(&r), vec!["prop1.case3"]);
        let det = &r[0].witness_detail;
        assert_eq!((det.s, det.d_prime, det.t), (2, 6, Some(4)));
    }

    #[test]
    fn prop1_case2() {
        let d = parse_datum("18: [3,3,3,3,3,3] [3,3,3,3,3,3] [4,2,2,2,2,2,2,2]").unwrap();
        assert_eq!(d.rh_defect(), 0);
        let r = prop1_filter(&d);
        assert_eq!(rules(&r), vec!["prop1.case2"]);
        assert_eq!((r[0].witness_detail.s, r[0].witness_detail.d_prime), (3, 6));
    }

    #[test]
    fn prop1_passes_klein() {
        assert!(prop1_filter(&parse_datum("4: [2,2] [2,2] [2,2]").unwrap()).is_empty());
    }

    #[test]
    fn cor1_parts_eks() {
        let d = parse_datum("4: [3,1] [2,2] [2,2]").unwrap();
        let r = corollary_filter(&d, false);
        assert_eq!(rules(&r), vec!["cor1.parts"]);
        assert!(r[0].witness_detail.violation.contains("part 3 > d' = 2"));
    }

    #[test]
    fn cor1_parts_family_example() {
        let d = parse_datum("6: [4,1,1] [2,1,1,1,1] [2,2,2] [2,2,2]").unwrap();
        let r = corollary_filter(&d, false);
        assert!(rules(&r).contains(&"cor1.parts"));
        assert!(r.iter().any(|x| x.rule == Rule::Cor1Parts && x.witness_detail.violation.contains("part 4 > d' = 3")));
    }

    #[test]
    fn strict_lengths_reject_klein() {
        let d = parse_datum("4: [2,2] [2,2] [2,2]").unwrap();
        assert!(corollary_filter(&d, false).is_empty());
        assert_eq!(rules(&corollary_filter(&d, true)), vec!["cor1.length"]);
    }

    #[test]
    fn songxu_examples() {
        let v = songxu_decide(3, 1, 1, &p(&[3, 3])).unwrap();
        assert_eq!((v.status, v.method), (Status::Realizable, Method::SongXu));
        assert_eq!(songxu_datum(3, 1, 1, &p(&[3, 3])).unwrap().to_string(), "6: [3,3] [2,2,2] [2,2,2]");
        assert_eq!(songxu_decide(3, 1, 1, &p(&[5, 1])).unwrap().status, Status::Exceptional);
        assert_eq!(songxu_decide(4, 3, 1, &p(&[2, 2, 2, 2])).unwrap().status, Status::Exceptional);
        assert_eq!(
            songxu_datum(4, 3, 1, &p(&[2, 2, 2, 2])).unwrap().to_string(),
            "8: [6,2] [2,2,2,2] [2,2,2,2]"
        );
    }

    #[test]
    fn songxu_preconditions() {
        assert!(songxu_decide(2, 1, 1, &p(&[2, 2])).is_err());
        assert!(songxu_decide(3, 4, 1, &p(&[2, 1, 1, 1, 1])).is_err());
        assert!(songxu_decide(3, 1, 1, &p(&[4, 1, 1])).is_err());
    }

    #[test]
    fn songxu_shape_detection() {
        let d = parse_datum("8: [2,2,2,2] [2,2,2,2] [6,2]").unwrap();
        let m = songxu_match(&d).unwrap();
        assert_eq!(m.k, 4);
        assert_eq!(songxu_datum(m.k, m.x, m.y, &m.first).unwrap(), d);
        assert!(songxu_match(&parse_datum("4: [2,2] [2,2] [2,2]").unwrap()).is_none());
        assert!(songxu_match(&parse_datum("8: [5,3] [2,2,2,2] [3,2,2,1]").unwrap()).is_none());
    }

    #[test]
    fn family_example_one() {
        let inst =
            family_generate(FamilyExample::Numbered(1), 2, 3, &[p(&[4, 1, 1]), p(&[2, 1, 1, 1, 1])]).unwrap();
        assert_eq!(inst.datum.to_string(), "6: [2,2,2] [2,2,2] [4,1,1] [2,1,1,1,1]");
        assert_eq!(inst.expected, Some(Status::Exceptional));
        assert_eq!(inst.rule, Some(Rule::Cor1Parts));
    }

    #[test]
    fn family_budget_errors() {
        let r = family_generate(FamilyExample::General { t: 2 }, 2, 2, &[p(&[3, 1]), p(&[2, 1, 1])]);
        assert!(matches!(r, Err(Error::Precondition(_))));
        assert!(family_enumerate(2, 2, 2).unwrap().is_empty());
        assert_eq!(family_length_budget(3, 2, 2), 10);
    }

    #[test]
    fn family_enumerate_is_rh_exact() {
        let all = family_enumerate(2, 3, 2).unwrap();
        assert!(all.iter().any(|i| i.datum.to_string() == "6: [2,2,2] [2,2,2] [4,1,1] [2,1,1,1,1]"));
        for i in &all {
            assert_eq!(i.datum.rh_defect(), 0);
            assert_eq!(i.expected, Some(Status::Exceptional));
        }
        for i in family_enumerate(3, 2, 2).unwrap() {
            assert_eq!(i.datum.rh_defect(), 0);
            assert!(rules(&corollary_filter(&i.datum, false)).contains(&"cor1.parts"));
        }
    }
}
