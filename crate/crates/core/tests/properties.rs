mod common;

use hurwitz::{cycle_type, parse_datum, CandidateDatum, Partition, Permutation};
use proptest::prelude::*;

/// A partition of `m * u` into at most 12 parts, plus `m` and `u`.
fn split_problem() -> impl Strategy<Value = (Vec<u64>, usize, u64)> {
    (1usize..=4, 1u64..=8).prop_flat_map(|(m, u)| {
        let total = m as u64 * u;
        proptest::collection::vec(1u64..=total, 1..=12).prop_filter_map("parts must fit the total", move |raw| {
            let mut parts = Vec::new();
            let mut left = total;
            for p in raw {
                if left == 0 || parts.len() == 12 {
                    break;
                }
                let p = p.min(left);
                parts.push(p);
                left -= p;
            }
            if left > 0 {
                if parts.len() == 12 {
                    return None;
                }
                parts.push(left);
            }
            Some((parts, m, u))
        })
    })
}

fn partition_of(d: u64) -> impl Strategy<Value = Vec<u64>> {
    proptest::collection::vec(1u64..=d, 1..=d as usize).prop_map(move |raw| {
        let mut parts = Vec::new();
        let mut left = d;
        for p in raw {
            if left == 0 {
                break;
            }
            let p = p.min(left);
            parts.push(p);
            left -= p;
        }
        if left > 0 {
            parts.push(left);
        }
        parts
    })
}

fn datum_parts() -> impl Strategy<Value = (u64, Vec<Vec<u64>>)> {
    (1u64..=9).prop_flat_map(|d| (Just(d), proptest::collection::vec(partition_of(d), 0..=5)))
}

proptest! {
    #[test]
    fn decompose_matches_labeled_brute_force((parts, m, u) in split_problem()) {
        let lib = hurwitz::decompose(&Partition::new(parts.clone()).unwrap(), m as u64, u).unwrap();
        let set = common::library_decompose(&parts, m, u);
        prop_assert_eq!(lib.len(), set.len(), "duplicate decompositions");
        prop_assert_eq!(set, common::brute_decompose(&parts, m, u));
    }

    #[test]
    fn normalization_is_idempotent((d, parts) in datum_parts()) {
        let partitions: Vec<Partition> = parts.iter().map(|p| Partition::new(p.clone()).unwrap()).collect();
        let a = CandidateDatum::new(d, partitions.clone()).unwrap();
        let mut reversed = partitions.clone();
        reversed.reverse();
        let b = CandidateDatum::new(d, reversed).unwrap();
        prop_assert_eq!(&a, &b);
        let again = CandidateDatum::new(a.degree(), a.partitions().to_vec()).unwrap();
        prop_assert_eq!(&a, &again);
        prop_assert_eq!(parse_datum(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn cycle_type_matches_naive(images in (1usize..=9).prop_flat_map(|d| Just((0..d).collect::<Vec<_>>()).prop_shuffle())) {
        let p = Permutation::from_images(images.clone()).unwrap();
        prop_assert_eq!(cycle_type(&p).parts().to_vec(), common::naive_cycle_type(&images));
        let inv = p.inverse();
        prop_assert!(hurwitz::compose(&p, &inv).unwrap().is_identity());
        prop_assert_eq!(hurwitz::compose(&p, &inv).unwrap().images().to_vec(), common::mul(&images, &common::inv(&images)));
    }
}
