use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use proptest::prelude::*;

use percmix::geometry::{
    classify_good_vertices, coarse_grain, coupling_check, fpp_regression, DualFppField, FppOptions, SiteStatus,
};
use percmix::lattice::BoxSpec;
use percmix::percolation::BondConfig;

/// Dijkstra over the dual edge list.
fn dijkstra(field: &DualFppField, source: u32) -> Vec<u32> {
    let dual = field.dual();
    let nv = dual.num_vertices();
    let mut adj = vec![Vec::new(); nv];
    for e in 0..dual.num_edges() as u32 {
        let [a, b] = dual.endpoints(e);
        let w = field.weight(e) as u32;
        adj[a as usize].push((b, w));
        adj[b as usize].push((a, w));
    }
    let mut dist = vec![u32::MAX; nv];
    let mut heap = BinaryHeap::from([Reverse((0u32, source))]);
    while let Some(Reverse((d, v))) = heap.pop() {
        if d >= dist[v as usize] {
            continue;
        }
        dist[v as usize] = d;
        for &(u, w) in &adj[v as usize] {
            if d + w < dist[u as usize] {
                heap.push(Reverse((d + w, u)));
            }
        }
    }
    dist
}

#[test]
fn zero_one_bfs_matches_dijkstra() {
    for seed in 0..40 {
        let n = 2 + (seed % 5) as u32;
        let cfg = BondConfig::sample(BoxSpec::new(2, n), 0.3 + 0.015 * seed as f64, seed).unwrap();
        let field = DualFppField::build(&cfg).unwrap();
        for s in [0, field.dual().outer(), (field.dual().num_vertices() / 2) as u32] {
            assert_eq!(field.distances_from(s).unwrap(), dijkstra(&field, s), "seed {seed} source {s}");
        }
    }
}

#[test]
fn supercritical_passage_time_grows() {
    let cfg = BondConfig::sample(BoxSpec::new(2, 32), 0.7, 3).unwrap();
    let probe = fpp_regression(&cfg, &FppOptions { seed: 3, ..Default::default() }).unwrap();
    assert_eq!(probe.pairs.len(), 300);
    assert!(probe.pairs.iter().all(|p| (10..=60).contains(&p.l1) && p.distance <= p.l1));
    assert!(probe.fit.slope > 0.0);
}

#[test]
fn coupling_never_loses_crossings() {
    let spec = BoxSpec::new(2, 40);
    for seed in 0..5 {
        let rep = coupling_check(spec, 0.7, 0.95, 16, seed).unwrap();
        assert_eq!(rep.crossing_violations, 0);
        assert!(rep.good_hi + rep.good_exceptions >= rep.good_lo);
    }
}

#[test]
fn every_interior_site_is_classified() {
    let cfg = BondConfig::sample(BoxSpec::new(2, 40), 0.8, 1).unwrap();
    let f = classify_good_vertices(&cfg, 8).unwrap();
    for s in &f.sites {
        let interior = s.coords.iter().all(|c| c.abs() + 10 <= 40);
        assert_eq!(interior, s.status != SiteStatus::Unclassified);
        if s.status == SiteStatus::Good {
            assert!(s.crossing && s.large_components == 1 && s.witness.is_some());
        }
    }
}

/// A connected set grown from the origin by attaching lattice neighbours.
fn grow(steps: &[(u8, u8)], n: i32) -> Vec<Vec<i32>> {
    let mut set: Vec<Vec<i32>> = vec![vec![0, 0]];
    let mut seen: BTreeSet<Vec<i32>> = set.iter().cloned().collect();
    for &(pick, dir) in steps {
        let base = set[pick as usize % set.len()].clone();
        let mut x = base;
        match dir % 4 {
            0 => x[0] += 1,
            1 => x[0] -= 1,
            2 => x[1] += 1,
            _ => x[1] -= 1,
        }
        if x.iter().all(|c| c.abs() <= n) && seen.insert(x.clone()) {
            set.push(x);
        }
    }
    set
}

fn sites_connected(sites: &[Vec<i32>], block: i32) -> bool {
    let Some(first) = sites.first() else { return true };
    let all: BTreeSet<&Vec<i32>> = sites.iter().collect();
    let mut seen = BTreeSet::from([first]);
    let mut stack = vec![first];
    while let Some(v) = stack.pop() {
        for a in 0..v.len() {
            for s in [-block, block] {
                let mut u = v.clone();
                u[a] += s;
                if let Some(&w) = all.get(&u) {
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
        }
    }
    seen.len() == all.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn coarse_graining_of_connected_sets(steps in prop::collection::vec((any::<u8>(), any::<u8>()), 0..400)) {
        let spec = BoxSpec::new(2, 16);
        let block = 8u32;
        let set = grow(&steps, 16);
        let image = coarse_grain(spec, &set, block).unwrap();
        prop_assert!(sites_connected(&image, block as i32));
        // at most 3 sites per axis see a point, and every image site holds
        // at least N/10 points of A
        prop_assert!(image.len() * block as usize <= 10 * 9 * set.len());
        if 10 * set.len() >= block as usize {
            prop_assert!(!image.is_empty());
            prop_assert!(image.len() as f64 >= set.len() as f64 / (2.0 * block as f64).powi(2));
        }
    }
}
