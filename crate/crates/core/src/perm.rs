//! Permutations of `{0, .., d-1}`.
//!
//! Composition convention used throughout the crate: `compose(p, q)` applies
//! `q` first and then `p`, i.e. `compose(p, q)(x) = p(q(x))`. A tuple
//! `(s1, .., sn)` has product `compose(s1, compose(s2, .. sn))`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::partition::Partition;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn from_images(images: Vec<usize>) -> Result<Self, Error> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &x in &images {
            if x >= d || seen[x] {
                return Err(Error::NotPermutation(format!("{images:?}")));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    pub(crate) fn from_images_unchecked(images: Vec<usize>) -> Self {
        debug_assert!(Permutation::from_images(images.clone()).is_ok());
        Permutation { images }
    }

    pub fn identity(d: usize) -> Self {
        Permutation { images: (0..d).collect() }
    }

    /// Builds a permutation from disjoint cycles on 0-based points; points not
    /// mentioned are fixed.
    pub fn from_cycles(d: usize, cycles: &[&[usize]]) -> Result<Self, Error> {
        let mut images: Vec<usize> = (0..d).collect();
        let mut seen = vec![false; d];
        for cycle in cycles {
            for (k, &x) in cycle.iter().enumerate() {
                if x >= d || seen[x] {
                    return Err(Error::NotPermutation(format!("{cycles:?}")));
                }
                seen[x] = true;
                images[x] = cycle[(k + 1) % cycle.len()];
            }
        }
        Ok(Permutation { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { images: inv }
    }

    /// `r ∘ self ∘ r⁻¹`: the same cycle structure with points renamed by `r`.
    pub fn conjugate_by(&self, r: &Permutation) -> Permutation {
        let mut images = vec![0; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[r.images[i]] = r.images[x];
        }
        Permutation { images }
    }

    /// Disjoint cycles, each starting at its smallest point, including fixed
    /// points.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let d = self.images.len();
        let mut seen = vec![false; d];
        let mut out = Vec::new();
        for start in 0..d {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.images[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.images[x];
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_type(&self) -> Partition {
        cycle_type(self)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(images: Vec<usize>) -> Result<Self, Error> {
        Permutation::from_images(images)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Vec<usize> {
        p.images
    }
}

/// Disjoint-cycle notation on points `1..=d`, omitting fixed points.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for cycle in self.cycles().into_iter().filter(|c| c.len() > 1) {
            any = true;
            f.write_str("(")?;
            for (k, x) in cycle.iter().enumerate() {
                if k > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}", x + 1)?;
            }
            f.write_str(")")?;
        }
        if !any {
            f.write_str("()")?;
        }
        Ok(())
    }
}

/// Multiset of cycle lengths, fixed points included.
pub fn cycle_type(p: &Permutation) -> Partition {
    let lengths: Vec<u64> = p.cycles().iter().map(|c| c.len() as u64).collect();
    if lengths.is_empty() {
        // degree-0 permutation; only reachable through the empty tuple
        return Partition::trivial(0);
    }
    Partition::new(lengths).expect("cycle lengths are positive")
}

/// The permutation of type `t` whose cycles occupy consecutive points, longest
/// cycle first.
pub fn canonical_of_type(t: &Partition) -> Permutation {
    let d = t.total() as usize;
    let mut images = vec![0; d];
    let mut start = 0;
    for &len in t.parts() {
        let len = len as usize;
        for k in 0..len {
            images[start + k] = start + (k + 1) % len;
        }
        start += len;
    }
    Permutation { images }
}

/// `compose(p, q)(x) = p(q(x))`: apply `q` first, then `p`.
pub fn compose(p: &Permutation, q: &Permutation) -> Result<Permutation, Error> {
    if p.degree() != q.degree() {
        return Err(Error::DegreeMismatch(p.degree(), q.degree()));
    }
    Ok(Permutation { images: q.images.iter().map(|&x| p.images[x]).collect() })
}

/// Product of a tuple under the crate convention.
pub fn product(degree: usize, perms: &[Permutation]) -> Result<Permutation, Error> {
    let mut acc = Permutation::identity(degree);
    for p in perms {
        acc = compose(&acc, p)?;
    }
    Ok(acc)
}

/// Number of orbits of the group generated by `perms` on `0..degree`.
pub fn orbit_count(degree: usize, perms: &[Permutation]) -> usize {
    let mut uf = UnionFind::new(degree);
    for p in perms {
        for (i, &x) in p.images().iter().enumerate() {
            uf.union(i, x);
        }
    }
    uf.components()
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), components: n }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
            self.components -= 1;
        }
    }

    pub(crate) fn components(&self) -> usize {
        self.components
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[u64]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn cycle_type_examples() {
        let a = Permutation::from_cycles(5, &[&[0, 1, 2], &[3, 4]]).unwrap();
        assert_eq!(a.cycle_type(), p(&[3, 2]));
        assert_eq!(Permutation::identity(4).cycle_type(), p(&[1, 1, 1, 1]));
        let c = Permutation::from_cycles(6, &[&[0, 1, 2, 3, 4, 5]]).unwrap();
        assert_eq!(c.cycle_type(), p(&[6]));
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(
            canonical_of_type(&p(&[3, 2])),
            Permutation::from_cycles(5, &[&[0, 1, 2], &[3, 4]]).unwrap()
        );
        assert_eq!(canonical_of_type(&p(&[1, 1])), Permutation::identity(2));
        assert_eq!(
            canonical_of_type(&p(&[4])),
            Permutation::from_cycles(4, &[&[0, 1, 2, 3]]).unwrap()
        );
    }

    #[test]
    fn compose_convention() {
        let p4 = Permutation::from_cycles(4, &[&[0, 1, 2, 3]]).unwrap();
        // 0→2, 2→1, 1→0
        let q = Permutation::from_cycles(4, &[&[0, 2, 1]]).unwrap();
        let r = compose(&p4, &q).unwrap();
        assert_eq!(r.images(), &[3, 1, 2, 0]);
        assert_eq!(r, Permutation::from_cycles(4, &[&[0, 3]]).unwrap());
        assert_eq!(compose(&p4, &Permutation::identity(4)).unwrap(), p4);
        assert!(compose(&p4, &p4.inverse()).unwrap().is_identity());
        assert!(matches!(
            compose(&p4, &Permutation::identity(3)),
            Err(Error::DegreeMismatch(4, 3))
        ));
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::from_images(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_images(vec![0, 3, 1]).is_err());
        assert!(Permutation::from_cycles(3, &[&[0, 1], &[1, 2]]).is_err());
    }

    #[test]
    fn display_one_based() {
        let a = Permutation::from_cycles(5, &[&[0, 1, 2], &[3, 4]]).unwrap();
        assert_eq!(a.to_string(), "(1 2 3)(4 5)");
        assert_eq!(Permutation::identity(3).to_string(), "()");
    }

    #[test]
    fn conjugation_preserves_type() {
        let a = Permutation::from_cycles(5, &[&[0, 1, 2], &[3, 4]]).unwrap();
        let r = Permutation::from_images(vec![4, 2, 0, 1, 3]).unwrap();
        let c = a.conjugate_by(&r);
        assert_eq!(c.cycle_type(), a.cycle_type());
        assert_eq!(c.apply(r.apply(0)), r.apply(a.apply(0)));
    }

    #[test]
    fn orbits() {
        let a = Permutation::from_cycles(4, &[&[0, 1]]).unwrap();
        let b = Permutation::from_cycles(4, &[&[2, 3]]).unwrap();
        assert_eq!(orbit_count(4, std::slice::from_ref(&a)), 3);
        assert_eq!(orbit_count(4, &[a, b]), 2);
    }
}
