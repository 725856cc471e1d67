//! Degree-reducing equivalences.
//!
//! Each theorem takes a datum with an `s`-pair (and, for the second and
//! third, a partition whose parts share a factor `t`) and produces smaller
//! data, the *children*, such that the parent is realizable exactly when some
//! child is. Every parent partition is divided by a factor and split into a
//! fixed number of partitions of the child degree:
//!
//! | theorem | pair          | third         | others        | child degree |
//! |---------|---------------|---------------|---------------|--------------|
//! | thm1    | `/s`, 1 group | -             | `s` groups    | `d'`         |
//! | thm2    | `/2`, `t`     | `/t`, 2       | `2t` groups   | `d'/t`       |
//! | thm3    | `/3`, 4       | `/2`, 6       | 12 groups     | `d'/4`       |

use std::collections::HashSet;
use std::fmt;
use std::ops::Range;

use itertools::{Itertools, MultiProduct};
use serde::{Serialize, Serializer};

use crate::criteria::{songxu_decide, songxu_match, StructureMatch};
use crate::error::Error;
use crate::oracle::ConstellationWitness;
use crate::partition::{decompose_from, CandidateDatum, Decomposition, Partition};
use crate::verdict::Status;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Theorem {
    Thm1,
    Thm2,
    Thm3,
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::Thm1 => "thm1",
            Theorem::Thm2 => "thm2",
            Theorem::Thm3 => "thm3",
        })
    }
}

impl Serialize for Theorem {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A parent partition divided by `factor` and split into groups.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Split {
    pub factor: u64,
    #[serde(flatten)]
    pub decomposition: Decomposition,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReductionStep {
    pub theorem: Theorem,
    pub structure: StructureMatch,
    pub t: Option<u64>,
    /// Datum index of the `t`-divisible partition (thm2, thm3).
    pub third: Option<usize>,
    /// One entry per parent partition, in parent order.
    pub splits: Vec<Split>,
    pub child: CandidateDatum,
}

impl Serialize for ReductionStep {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            theorem: Theorem,
            s: u64,
            t: Option<u64>,
            pair_indices: [usize; 2],
            #[serde(skip_serializing_if = "Option::is_none")]
            third_index: Option<usize>,
            decompositions: &'a [Split],
            child: String,
        }
        Repr {
            theorem: self.theorem,
            s: self.structure.s,
            t: self.t,
            pair_indices: [self.structure.pair.0, self.structure.pair.1],
            third_index: self.third,
            decompositions: &self.splits,
            child: self.child.to_string(),
        }
        .serialize(s)
    }
}

/// What certifies the last child of a chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChainBase {
    /// The last child is the empty datum in degree 1.
    Identity,
    Witness(ConstellationWitness),
    /// The last child is decided by the closed-form three-point family.
    SongXu,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionChain {
    pub steps: Vec<ReductionStep>,
    pub base: ChainBase,
}

impl ReductionChain {
    /// Replays every step from the leaf upwards and re-checks the base
    /// certificate. Returns the root datum.
    pub fn verify(&self) -> Result<CandidateDatum, Error> {
        let leaf = match self.steps.last() {
            Some(step) => &step.child,
            None => return Err(Error::InconsistentStep("empty chain".into())),
        };
        match &self.base {
            ChainBase::Identity => {
                if leaf.degree() != 1 || !leaf.is_empty() {
                    return Err(Error::InconsistentStep(format!("base {leaf} is not the identity")));
                }
            }
            ChainBase::Witness(w) => w.check(leaf).map_err(Error::InconsistentStep)?,
            ChainBase::SongXu => {
                let shape = songxu_match(leaf)
                    .ok_or_else(|| Error::InconsistentStep(format!("{leaf} is not a closed-form datum")))?;
                let v = songxu_decide(shape.k, shape.x, shape.y, &shape.first)?;
                if v.status != Status::Realizable {
                    return Err(Error::InconsistentStep(format!("{leaf} is not realizable")));
                }
            }
        }
        let mut expected_child = leaf.clone();
        for step in self.steps.iter().rev() {
            if step.child != expected_child {
                return Err(Error::InconsistentStep(format!(
                    "step child {} does not match {}",
                    step.child, expected_child
                )));
            }
            expected_child = replay(step)?;
        }
        Ok(expected_child)
    }
}

// (factor, number of groups) for a parent partition in a given role.
fn role_shape(theorem: Theorem, s: u64, t: u64, paired: bool, third: bool) -> (u64, u64) {
    match (theorem, paired, third) {
        (Theorem::Thm1, true, _) => (s, 1),
        (Theorem::Thm1, false, _) => (1, s),
        (Theorem::Thm2, true, _) => (2, t),
        (Theorem::Thm2, false, true) => (t, 2),
        (Theorem::Thm2, false, false) => (1, 2 * t),
        (Theorem::Thm3, true, _) => (3, 4),
        (Theorem::Thm3, false, true) => (2, 6),
        (Theorem::Thm3, false, false) => (1, 12),
    }
}

fn child_degree(theorem: Theorem, d_prime: u64, t: u64) -> u64 {
    match theorem {
        Theorem::Thm1 => d_prime,
        Theorem::Thm2 => d_prime / t,
        Theorem::Thm3 => d_prime / 4,
    }
}

/// Lazy, deduplicated stream of reduction steps.
pub struct Children {
    theorem: Theorem,
    structure: StructureMatch,
    t: Option<u64>,
    third: Option<usize>,
    u: u64,
    factors: Vec<u64>,
    options: Vec<Vec<Decomposition>>,
    product: Option<MultiProduct<Range<usize>>>,
    seen: HashSet<CandidateDatum>,
}

impl Iterator for Children {
    type Item = ReductionStep;

    fn next(&mut self) -> Option<ReductionStep> {
        let product = self.product.as_mut()?;
        for choice in product.by_ref() {
            let splits: Vec<Split> = choice
                .iter()
                .enumerate()
                .map(|(i, &c)| Split { factor: self.factors[i], decomposition: self.options[i][c].clone() })
                .collect();
            let groups: Vec<Partition> =
                splits.iter().flat_map(|s| s.decomposition.groups.iter().cloned()).collect();
            let child = CandidateDatum::new(self.u, groups).expect("groups have the child degree");
            assert_eq!(child.rh_defect(), 0, "reduction produced a non-candidate {child}");
            if !self.seen.insert(child.clone()) {
                continue;
            }
            return Some(ReductionStep {
                theorem: self.theorem,
                structure: self.structure.clone(),
                t: self.t,
                third: self.third,
                splits,
                child,
            });
        }
        None
    }
}

fn children(
    datum: &CandidateDatum,
    theorem: Theorem,
    structure: &StructureMatch,
    third: Option<usize>,
    t: u64,
) -> Result<Children, Error> {
    let u = child_degree(theorem, structure.d_prime, t);
    let mut factors = Vec::new();
    let mut options = Vec::new();
    for (i, a) in datum.partitions().iter().enumerate() {
        let (factor, count) = role_shape(theorem, structure.s, t, structure.is_paired(i), third == Some(i));
        let quotient = a.divide(factor)?;
        factors.push(factor);
        options.push(decompose_from(&quotient, count, u, i)?);
    }
    let product = if options.iter().any(Vec::is_empty) {
        None
    } else {
        Some(options.iter().map(|o| 0..o.len()).multi_cartesian_product())
    };
    Ok(Children {
        theorem,
        structure: structure.clone(),
        t: (theorem != Theorem::Thm1).then_some(t),
        third,
        u,
        factors,
        options,
        product,
        seen: HashSet::new(),
    })
}

fn check_pair(datum: &CandidateDatum, m: &StructureMatch, s: Option<u64>) -> Result<(), Error> {
    let n = datum.len();
    if datum.rh_defect() != 0 {
        return Err(Error::RhDefect(datum.rh_defect()));
    }
    if m.pair.0 >= n || m.pair.1 >= n || m.pair.0 == m.pair.1 {
        return Err(Error::Precondition(format!("bad pair {:?}", m.pair)));
    }
    if m.s < 2 || m.s * m.d_prime != datum.degree() {
        return Err(Error::Precondition(format!("bad s = {} for degree {}", m.s, datum.degree())));
    }
    if let Some(s) = s {
        if m.s != s {
            return Err(Error::Precondition(format!("pair must have s = {s}, got {}", m.s)));
        }
    }
    for i in [m.pair.0, m.pair.1] {
        if datum.partitions()[i].gcd() % m.s != 0 {
            return Err(Error::Precondition(format!("{} is not divisible by {}", datum.partitions()[i], m.s)));
        }
    }
    Ok(())
}

fn check_third(datum: &CandidateDatum, m: &StructureMatch, third: usize, t: u64) -> Result<(), Error> {
    if third >= datum.len() || m.is_paired(third) {
        return Err(Error::Precondition(format!("bad third index {third}")));
    }
    let a = &datum.partitions()[third];
    if t < 2 || a.gcd() % t != 0 {
        return Err(Error::Precondition(format!("{t} does not divide every part of {a}")));
    }
    Ok(())
}

/// Children under the single-pair reduction.
pub fn children_thm1(datum: &CandidateDatum, m: &StructureMatch) -> Result<Children, Error> {
    check_pair(datum, m, None)?;
    children(datum, Theorem::Thm1, m, None, 1)
}

/// Children under the `s = 2` reduction with a `t`-divisible third partition.
pub fn children_thm2(
    datum: &CandidateDatum,
    m: &StructureMatch,
    third: usize,
    t: u64,
) -> Result<Children, Error> {
    check_pair(datum, m, Some(2))?;
    check_third(datum, m, third, t)?;
    if m.d_prime % t != 0 {
        return Err(Error::Precondition(format!("t = {t} does not divide d' = {}", m.d_prime)));
    }
    children(datum, Theorem::Thm2, m, Some(third), t)
}

/// Children under the `s = 3` reduction with an even third partition.
pub fn children_thm3(datum: &CandidateDatum, m: &StructureMatch, third: usize) -> Result<Children, Error> {
    check_pair(datum, m, Some(3))?;
    check_third(datum, m, third, 2)?;
    if m.d_prime % 4 != 0 {
        return Err(Error::Precondition(format!("4 does not divide d' = {}", m.d_prime)));
    }
    children(datum, Theorem::Thm3, m, Some(third), 2)
}

/// Rebuilds the parent datum from a step, checking that the recorded splits
/// are well formed and produce the recorded child.
pub fn replay(step: &ReductionStep) -> Result<CandidateDatum, Error> {
    let m = &step.structure;
    let t = match step.theorem {
        Theorem::Thm1 => 1,
        Theorem::Thm2 => step.t.ok_or_else(|| Error::InconsistentStep("thm2 step without t".into()))?,
        Theorem::Thm3 => 2,
    };
    if step.theorem != Theorem::Thm1 && step.third.is_none() {
        return Err(Error::InconsistentStep("missing third partition".into()));
    }
    let u = step.child.degree();
    let n = step.splits.len();
    if m.pair.0 >= n || m.pair.1 >= n {
        return Err(Error::InconsistentStep(format!("pair {:?} out of range", m.pair)));
    }
    let mut parent = Vec::with_capacity(n);
    let mut groups = Vec::new();
    let mut degree = None;
    for (i, split) in step.splits.iter().enumerate() {
        if split.decomposition.source != i {
            return Err(Error::InconsistentStep(format!("split {i} has source {}", split.decomposition.source)));
        }
        let (factor, count) = role_shape(step.theorem, m.s, t, m.is_paired(i), step.third == Some(i));
        if split.factor != factor || split.decomposition.groups.len() as u64 != count {
            return Err(Error::InconsistentStep(format!("split {i} does not match {}", step.theorem)));
        }
        if let Some(g) = split.decomposition.groups.iter().find(|g| g.total() != u) {
            return Err(Error::InconsistentStep(format!("group {g} does not sum to {u}")));
        }
        let merged = Partition::merge(&split.decomposition.groups)?.scale(factor);
        if *degree.get_or_insert(merged.total()) != merged.total() {
            return Err(Error::InconsistentStep("parent partitions have different totals".into()));
        }
        if merged.is_trivial() {
            return Err(Error::InconsistentStep(format!("split {i} rebuilds a trivial partition")));
        }
        parent.push(merged);
        groups.extend(split.decomposition.groups.iter().cloned());
    }
    let rebuilt_child = CandidateDatum::new(u, groups)?;
    if rebuilt_child != step.child {
        return Err(Error::InconsistentStep(format!(
            "groups give {rebuilt_child}, step records {}",
            step.child
        )));
    }
    let degree = degree.ok_or_else(|| Error::InconsistentStep("step has no splits".into()))?;
    if m.s * m.d_prime != degree {
        return Err(Error::InconsistentStep(format!("s·d' = {} ≠ {degree}", m.s * m.d_prime)));
    }
    CandidateDatum::new(degree, parent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::detect_structures;
    use crate::partition::parse_datum;

    fn first_match(d: &CandidateDatum) -> StructureMatch {
        detect_structures(d).into_iter().next().unwrap()
    }

    #[test]
    fn thm1_forced_child() {
        let d = parse_datum("6: [2,2,2] [2,2,2] [3,3]").unwrap();
        let steps: Vec<_> = children_thm1(&d, &first_match(&d)).unwrap().collect();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].child.to_string(), "3: [3] [3]");
        assert_eq!(replay(&steps[0]).unwrap(), d);
    }

    #[test]
    fn thm1_empty_stream() {
        let d = parse_datum("4: [2,2] [2,2] [3,1]").unwrap();
        assert_eq!(children_thm1(&d, &first_match(&d)).unwrap().count(), 0);
    }

    #[test]
    fn thm1_klein() {
        let d = parse_datum("4: [2,2] [2,2] [2,2]").unwrap();
        let steps: Vec<_> = children_thm1(&d, &first_match(&d)).unwrap().collect();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].child.to_string(), "2: [2] [2]");
    }

    #[test]
    fn thm2_klein_reaches_identity() {
        let d = parse_datum("4: [2,2] [2,2] [2,2]").unwrap();
        let m = first_match(&d);
        let steps: Vec<_> = children_thm2(&d, &m, 2, 2).unwrap().collect();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].child, CandidateDatum::identity());
        assert_eq!(replay(&steps[0]).unwrap(), d);
    }

    #[test]
    fn thm2_degree_eight() {
        let d = parse_datum("8: [4,4] [2,2,2,2] [2,2,2,2]").unwrap();
        let m = detect_structures(&d).into_iter().find(|m| m.pair == (0, 1) && m.s == 2).unwrap();
        let steps: Vec<_> = children_thm2(&d, &m, 2, 2).unwrap().collect();
        let kids: Vec<String> = steps.iter().map(|s| s.child.to_string()).collect();
        assert_eq!(kids, vec!["2: [2] [2]"]);
        for s in &steps {
            assert_eq!(replay(s).unwrap(), d);
        }
    }

    #[test]
    fn thm2_preconditions() {
        let d = parse_datum("8: [4,4] [2,2,2,2] [2,2,2,2]").unwrap();
        let m = detect_structures(&d).into_iter().find(|m| m.pair == (0, 1) && m.s == 2).unwrap();
        assert!(matches!(children_thm2(&d, &m, 2, 3), Err(Error::Precondition(_))));
        assert!(matches!(children_thm2(&d, &m, 0, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn thm3_tetrahedral() {
        let d = parse_datum("12: [3,3,3,3] [3,3,3,3] [2,2,2,2,2,2]").unwrap();
        let m = detect_structures(&d).into_iter().find(|m| m.s == 3).unwrap();
        let third = (0..3).find(|&i| !m.is_paired(i)).unwrap();
        let steps: Vec<_> = children_thm3(&d, &m, third).unwrap().collect();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].child, CandidateDatum::identity());
        assert_eq!(replay(&steps[0]).unwrap(), d);
    }

    #[test]
    fn thm3_preconditions() {
        let d = parse_datum("18: [3,3,3,3,3,3] [3,3,3,3,3,3] [4,2,2,2,2,2,2,2]").unwrap();
        let m = detect_structures(&d).into_iter().find(|m| m.s == 3).unwrap();
        let third = (0..3).find(|&i| !m.is_paired(i)).unwrap();
        assert!(matches!(children_thm3(&d, &m, third), Err(Error::Precondition(_))));
    }

    #[test]
    fn replay_rejects_tampering() {
        let d = parse_datum("6: [2,2,2] [2,2,2] [3,3]").unwrap();
        let mut step = children_thm1(&d, &first_match(&d)).unwrap().next().unwrap();
        let j = (0..3).find(|&i| !step.structure.is_paired(i)).unwrap();
        step.splits[j].decomposition.groups[0] = Partition::new(vec![2, 1]).unwrap();
        assert!(matches!(replay(&step), Err(Error::InconsistentStep(_))));
    }

    #[test]
    fn children_are_deduplicated() {
        let d = parse_datum("8: [2,2,2,2] [2,2,2,2] [2,2,1,1,1,1] [4,2,1,1]").unwrap();
        assert_eq!(d.rh_defect(), 0);
        for m in detect_structures(&d) {
            let kids: Vec<CandidateDatum> = children_thm1(&d, &m).unwrap().map(|s| s.child).collect();
            let uniq: HashSet<_> = kids.iter().collect();
            assert_eq!(uniq.len(), kids.len());
        }
    }
}
