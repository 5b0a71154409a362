use std::collections::BTreeSet;

use percolab_core::blob::{blob_region, blobs, check_radius_bound, grow_tree, merge_radii};
use percolab_core::lattice::linf_distance;
use percolab_core::Site;
use proptest::prelude::*;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Prim's algorithm on the complete L∞ graph; returns sorted MST weights.
fn prim_weights(points: &[Site]) -> Vec<i64> {
    let k = points.len();
    let mut in_tree = vec![false; k];
    let mut best = vec![i64::MAX; k];
    best[0] = 0;
    let mut out = Vec::new();
    for step in 0..k {
        let j = (0..k).filter(|&i| !in_tree[i]).min_by_key(|&i| best[i]).unwrap();
        in_tree[j] = true;
        if step > 0 {
            out.push(best[j]);
        }
        for i in 0..k {
            if !in_tree[i] {
                best[i] = best[i].min(linf_distance(&points[i], &points[j]).unwrap());
            }
        }
    }
    out.sort();
    out
}

fn random_points(rng: &mut ChaCha8Rng, k: usize, n: i64, d: usize) -> Vec<Site> {
    let mut set = BTreeSet::new();
    while set.len() < k {
        let c: Vec<i64> = (0..d).map(|_| (rng.next_u64() % (2 * n as u64 + 1)) as i64 - n).collect();
        set.insert(Site::new(c));
    }
    set.into_iter().collect()
}

#[test]
fn merge_heights_match_prim() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..500 {
        let d = 1 + trial % 3;
        let k = 1 + (rng.next_u64() % 12) as usize;
        let pts = random_points(&mut rng, k, 6, d);
        assert_eq!(merge_radii(&pts).unwrap(), prim_weights(&pts), "{pts:?}");
    }
}

#[test]
fn shells_are_disjoint_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 5;
    for _ in 0..1000 {
        let k = 2 + (rng.next_u64() % 5) as usize;
        let pts = random_points(&mut rng, k, n, 2);
        let rec = grow_tree(&pts).unwrap();
        let bl = blobs(&rec, n).unwrap();
        assert_eq!(bl.len(), 2 * k - 1);
        let mut seen = BTreeSet::new();
        for b in &bl {
            for w in blob_region(b, n).unwrap().sites() {
                assert!(w.coords().iter().all(|c| c.abs() <= 2 * n));
                assert!(seen.insert(w.clone()), "site {w} in two shells for {pts:?}");
            }
        }
        assert!(check_radius_bound(&rec, n).unwrap().violations.is_empty());
    }
}

fn point_set() -> impl Strategy<Value = Vec<Site>> {
    prop::collection::btree_set((-8i64..=8, -8i64..=8), 1..10)
        .prop_map(|s| s.into_iter().map(|(a, b)| Site::new(vec![a, b])).collect())
}

proptest! {
    #[test]
    fn radii_are_sorted_and_complete(pts in point_set()) {
        let r = merge_radii(&pts).unwrap();
        prop_assert_eq!(r.len(), pts.len() - 1);
        prop_assert!(r.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(r.iter().all(|&x| x >= 1));
    }

    #[test]
    fn radii_are_permutation_and_translation_invariant(pts in point_set(), dx in -5i64..5, dy in -5i64..5) {
        let r = merge_radii(&pts).unwrap();
        let mut rev = pts.clone();
        rev.reverse();
        prop_assert_eq!(&r, &merge_radii(&rev).unwrap());
        let moved: Vec<Site> = pts.iter().map(|p| p.offset(&[dx, dy])).collect();
        prop_assert_eq!(&r, &merge_radii(&moved).unwrap());
    }

    #[test]
    fn radius_observation_holds(pts in point_set()) {
        let rec = grow_tree(&pts).unwrap();
        prop_assert!(check_radius_bound(&rec, 8).unwrap().violations.is_empty());
    }
}
