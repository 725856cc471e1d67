//! Slow, obviously-correct reference implementations used as test oracles.
//! Nothing here calls into the search or decomposition code under test.
#![allow(dead_code)]

use std::collections::BTreeSet;

use itertools::Itertools;

pub type Perm = Vec<usize>;

pub fn all_perms(d: usize) -> Vec<Perm> {
    (0..d).permutations(d).collect()
}

/// Cycle lengths, largest first.
pub fn naive_cycle_type(p: &[usize]) -> Vec<u64> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = p[x];
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// `(p * q)(x) = p(q(x))`.
pub fn mul(p: &[usize], q: &[usize]) -> Perm {
    q.iter().map(|&x| p[x]).collect()
}

pub fn inv(p: &[usize]) -> Perm {
    let mut out = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        out[x] = i;
    }
    out
}

pub fn transitive(d: usize, perms: &[Perm]) -> bool {
    let mut reached = vec![false; d];
    let mut stack = vec![0];
    reached[0] = true;
    while let Some(x) = stack.pop() {
        for p in perms {
            for y in [p[x], inv(p)[x]] {
                if !reached[y] {
                    reached[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    reached.into_iter().all(|r| r)
}

/// Every permutation of `0..d` with the given cycle type.
pub fn class(d: usize, ty: &[u64]) -> Vec<Perm> {
    let mut want = ty.to_vec();
    want.sort_unstable_by(|a, b| b.cmp(a));
    all_perms(d).into_iter().filter(|p| naive_cycle_type(p) == want).collect()
}

/// Realizability by enumeration: the first factor ranges over one fixed
/// element of its class (any element will do, since conjugating a whole tuple
/// preserves every property checked), the middle ones over their full classes,
/// and the last is the inverse of the product so far.
pub fn brute_realizable(d: usize, types: &[Vec<u64>]) -> bool {
    match types.len() {
        0 => return d == 1,
        1 => return d == 1,
        _ => {}
    }
    let classes: Vec<Vec<Perm>> = types.iter().map(|t| class(d, t)).collect();
    let first = classes[0][0].clone();
    let last_type = {
        let mut t = types[types.len() - 1].clone();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    };
    let middle = &classes[1..classes.len() - 1];
    let mut chosen = vec![first.clone()];
    fn go(
        d: usize,
        middle: &[Vec<Perm>],
        k: usize,
        acc: &Perm,
        chosen: &mut Vec<Perm>,
        last_type: &[u64],
    ) -> bool {
        if k == middle.len() {
            let last = inv(acc);
            if naive_cycle_type(&last) != last_type {
                return false;
            }
            chosen.push(last);
            let ok = transitive(d, chosen);
            chosen.pop();
            return ok;
        }
        for p in &middle[k] {
            let next = mul(acc, p);
            chosen.push(p.clone());
            let ok = go(d, middle, k + 1, &next, chosen, last_type);
            chosen.pop();
            if ok {
                return true;
            }
        }
        false
    }
    go(d, middle, 0, &first, &mut chosen, &last_type)
}

/// All ways to split `parts` into `m` unlabeled groups each summing to `u`,
/// found by trying every labeled assignment of parts to groups.
pub fn brute_decompose(parts: &[u64], m: usize, u: u64) -> BTreeSet<Vec<Vec<u64>>> {
    let mut out = BTreeSet::new();
    let mut groups: Vec<Vec<u64>> = vec![Vec::new(); m];
    let mut sums = vec![0u64; m];
    fn go(
        parts: &[u64],
        i: usize,
        u: u64,
        groups: &mut Vec<Vec<u64>>,
        sums: &mut Vec<u64>,
        out: &mut BTreeSet<Vec<Vec<u64>>>,
    ) {
        if i == parts.len() {
            if sums.iter().all(|&s| s == u) {
                out.insert(canonical_groups(groups));
            }
            return;
        }
        for g in 0..groups.len() {
            if sums[g] + parts[i] > u {
                continue;
            }
            sums[g] += parts[i];
            groups[g].push(parts[i]);
            go(parts, i + 1, u, groups, sums, out);
            groups[g].pop();
            sums[g] -= parts[i];
        }
    }
    if m > 0 {
        go(parts, 0, u, &mut groups, &mut sums, &mut out);
    }
    out
}

/// Each group sorted largest first, then the list of groups sorted.
pub fn canonical_groups(groups: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut gs: Vec<Vec<u64>> = groups
        .iter()
        .map(|g| {
            let mut g = g.clone();
            g.sort_unstable_by(|a, b| b.cmp(a));
            g
        })
        .collect();
    gs.sort();
    gs
}

pub fn library_decompose(parts: &[u64], m: usize, u: u64) -> BTreeSet<Vec<Vec<u64>>> {
    let p = hurwitz::Partition::new(parts.to_vec()).unwrap();
    hurwitz::decompose(&p, m as u64, u)
        .unwrap()
        .into_iter()
        .map(|dec| canonical_groups(&dec.groups.iter().map(|g| g.parts().to_vec()).collect::<Vec<_>>()))
        .collect()
}
