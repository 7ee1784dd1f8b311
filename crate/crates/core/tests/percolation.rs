mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use percmix::lattice::{BoxGraph, BoxSpec, EdgeId};
use percmix::percolation::{chemical_distance_probe, cluster_census, largest_cluster, BondConfig, SiteConfig};

fn open_fraction_within_three_se(n: u32, p: f64) {
    let spec = BoxSpec::new(2, n);
    let per = spec.edge_count().unwrap() as f64;
    let seeds = 200u64;
    let open: usize = (0..seeds)
        .map(|s| BondConfig::sample(spec, p, s).unwrap().open_count())
        .sum();
    let trials = per * seeds as f64;
    let frac = open as f64 / trials;
    let se = (p * (1.0 - p) / trials).sqrt();
    assert!((frac - p).abs() <= 3.0 * se, "fraction {frac} vs {p} (se {se})");

    let sites: usize = (0..seeds)
        .map(|s| SiteConfig::sample(spec, p, s).unwrap().open_count())
        .sum();
    let trials = spec.vertex_count().unwrap() as f64 * seeds as f64;
    let se = (p * (1.0 - p) / trials).sqrt();
    assert!((sites as f64 / trials - p).abs() <= 3.0 * se);
}

#[test]
fn bond_fraction_at_p_07() {
    open_fraction_within_three_se(32, 0.7);
}

#[test]
fn bond_fraction_at_p_09() {
    open_fraction_within_three_se(16, 0.9);
}

#[test]
fn largest_cluster_matches_flood_fill() {
    let spec = BoxSpec::new(2, 3);
    let boxg = BoxGraph::build(spec).unwrap();
    for seed in 0..1000u64 {
        let p = [0.3, 0.5, 0.7][(seed % 3) as usize];
        let cfg = BondConfig::sample(spec, p, seed).unwrap();
        let (verts, edges) = common::flood_fill_largest(&boxg, &cfg);
        match largest_cluster(&boxg, &cfg) {
            Ok(c) => {
                let got_v: BTreeSet<u32> = c.labels().iter().map(|v| v.0).collect();
                let got_e: BTreeSet<u32> = c.edge_labels().iter().map(|e| e.0).collect();
                assert_eq!(got_v, verts, "seed {seed}");
                assert_eq!(got_e, edges, "seed {seed}");
            }
            Err(_) => assert!(edges.is_empty(), "seed {seed}"),
        }
    }
}

#[test]
fn three_dimensional_cluster_matches_flood_fill() {
    let spec = BoxSpec::new(3, 2);
    let boxg = BoxGraph::build(spec).unwrap();
    for seed in 0..50u64 {
        let cfg = BondConfig::sample(spec, 0.4, seed).unwrap();
        let (verts, _) = common::flood_fill_largest(&boxg, &cfg);
        let c = largest_cluster(&boxg, &cfg).unwrap();
        assert_eq!(c.labels().iter().map(|v| v.0).collect::<BTreeSet<_>>(), verts);
    }
}

#[test]
fn chemical_distance_dominates_l1() {
    let spec = BoxSpec::new(2, 32);
    let boxg = BoxGraph::build(spec).unwrap();
    let cfg = BondConfig::sample(spec, 0.7, 0).unwrap();
    let cluster = largest_cluster(&boxg, &cfg).unwrap();
    let probe = chemical_distance_probe(&cluster, 500, 16, 0).unwrap();
    assert_eq!(probe.pairs.len(), 500);
    assert!(probe.pairs.iter().all(|&(l1, chem)| l1 >= 16 && chem >= l1));
    assert!(probe.through_origin > 1.0);
    assert!(probe.through_origin <= probe.max_ratio);
    assert!(probe.max_ratio.is_finite());
    assert!(probe.fit.r2 > 0.9, "R2 {}", probe.fit.r2);
}

#[test]
fn census_is_stable_across_seeds() {
    let spec = BoxSpec::new(2, 16);
    let boxg = BoxGraph::build(spec).unwrap();
    for seed in 0..10 {
        let c = cluster_census(&boxg, &BondConfig::sample(spec, 0.7, seed).unwrap()).unwrap();
        let largest = largest_cluster(&boxg, &BondConfig::sample(spec, 0.7, seed).unwrap()).unwrap();
        assert_eq!(c.largest().vertices as usize, largest.num_vertices());
        assert_eq!(c.largest().edges as usize, largest.num_edges());
        assert_eq!(c.components.iter().map(|s| s.vertices).sum::<u64>(), c.total_vertices);
        assert_eq!(c.components.iter().map(|s| s.edges).sum::<u64>(), c.total_open_edges);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coupling_is_monotone(seed in any::<u64>(), p in 0.0f64..1.0, q in 0.0f64..1.0, n in 1u32..6) {
        let spec = BoxSpec::new(2, n);
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        let a = BondConfig::sample(spec, lo, seed).unwrap();
        let b = BondConfig::sample(spec, hi, seed).unwrap();
        for e in 0..a.num_edges() as u32 {
            prop_assert!(!a.is_open(EdgeId(e)) || b.is_open(EdgeId(e)));
        }
    }

    #[test]
    fn sampling_is_a_pure_function(seed in any::<u64>(), p in 0.0f64..=1.0, d in 1usize..4, n in 0u32..4) {
        let spec = BoxSpec::new(d, n);
        prop_assert_eq!(BondConfig::sample(spec, p, seed).unwrap(), BondConfig::sample(spec, p, seed).unwrap());
    }

    #[test]
    fn serialisation_round_trips(seed in any::<u64>(), p in 0.0f64..=1.0, d in 1usize..4, n in 0u32..4) {
        let spec = BoxSpec::new(d, n);
        let c = BondConfig::sample(spec, p, seed).unwrap();
        prop_assert_eq!(&BondConfig::from_bytes(&c.to_bytes()).unwrap(), &c);
        prop_assert_eq!(&BondConfig::from_text(&c.to_text()).unwrap(), &c);
        let s = SiteConfig::sample(spec, p, seed).unwrap();
        prop_assert_eq!(&SiteConfig::from_bytes(&s.to_bytes()).unwrap(), &s);
        prop_assert_eq!(&SiteConfig::from_text(&s.to_text()).unwrap(), &s);
    }

    #[test]
    fn largest_cluster_is_connected_and_maximal(seed in any::<u64>(), p in 0.2f64..0.9) {
        let spec = BoxSpec::new(2, 4);
        let boxg = BoxGraph::build(spec).unwrap();
        let cfg = BondConfig::sample(spec, p, seed).unwrap();
        if let Ok(c) = largest_cluster(&boxg, &cfg) {
            prop_assert!(c.is_connected());
            let census = cluster_census(&boxg, &cfg).unwrap();
            prop_assert!(census.components.iter().all(|s| s.edges <= c.num_edges() as u64));
        }
    }
}
