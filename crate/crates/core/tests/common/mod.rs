//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use num_rational::Ratio;
use percmix::graph::ClusterGraph;
use percmix::lattice::{BoxGraph, BoxSpec, VertexId};
use percmix::percolation::{largest_cluster, BondConfig};
use percmix::walk::Chain;

/// Largest open component by flood fill over lattice coordinates: the
/// vertex set and the open edges inside it. Ties on the edge count go to
/// the component holding the smallest vertex id.
pub fn flood_fill_largest(boxg: &BoxGraph, cfg: &BondConfig) -> (BTreeSet<u32>, BTreeSet<u32>) {
    let spec = boxg.spec();
    let n = spec.n as i32;
    let nv = boxg.num_vertices();
    let mut seen = vec![false; nv];
    let mut best: Option<(BTreeSet<u32>, BTreeSet<u32>)> = None;
    for s in 0..nv {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut verts = BTreeSet::from([s as u32]);
        let mut edges = BTreeSet::new();
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            let x = boxg.coords(VertexId(v as u32)).to_vec();
            for a in 0..spec.d {
                for step in [-1, 1] {
                    let mut y = x.clone();
                    y[a] += step;
                    if y[a].abs() > n {
                        continue;
                    }
                    let w = boxg.vertex_at(&y).unwrap();
                    let e = boxg.edge_between(VertexId(v as u32), w).unwrap();
                    if !cfg.is_open(e) {
                        continue;
                    }
                    edges.insert(e.0);
                    if !seen[w.index()] {
                        seen[w.index()] = true;
                        verts.insert(w.0);
                        queue.push_back(w.index());
                    }
                }
            }
        }
        // components are discovered in order of their smallest vertex
        if best.as_ref().is_none_or(|(_, be)| edges.len() > be.len()) {
            best = Some((verts, edges));
        }
    }
    best.unwrap()
}

pub fn cluster_chain(d: usize, n: u32, p: f64, seed: u64) -> Option<(Chain, BondConfig)> {
    let spec = BoxSpec::new(d, n);
    let boxg = BoxGraph::build(spec).unwrap();
    let cfg = BondConfig::sample(spec, p, seed).unwrap();
    let cluster = largest_cluster(&boxg, &cfg).ok()?;
    Some((Chain::new(cluster).ok()?, cfg))
}

/// `φ_A` from first principles: crossing edges times `Σdeg` over
/// `vol(A) vol(Aᶜ)`.
pub fn phi_of_mask(g: &ClusterGraph, mask: u64) -> Ratio<u64> {
    let inside = |v: u32| mask >> v & 1 == 1;
    let total = g.degree_sum();
    let vol: u64 = (0..g.num_vertices()).filter(|&v| inside(v as u32)).map(|v| g.degree(v) as u64).sum();
    let crossing = g.edges().iter().filter(|e| inside(e[0]) != inside(e[1])).count() as u64;
    Ratio::new(crossing * total, vol * (total - vol))
}

/// Minimum of `φ_A` over every subset with `0 < π(A) ≤ x`, connected or
/// not.
pub fn brute_force_profile_at(g: &ClusterGraph, x: Ratio<u64>) -> Option<Ratio<u64>> {
    let nv = g.num_vertices();
    assert!(nv < 64);
    let total = g.degree_sum();
    let mut best: Option<Ratio<u64>> = None;
    for mask in 1..(1u64 << nv) - 1 {
        let vol: u64 = (0..nv).filter(|&v| mask >> v & 1 == 1).map(|v| g.degree(v) as u64).sum();
        if Ratio::new(vol, total) > x {
            continue;
        }
        let phi = phi_of_mask(g, mask);
        if best.is_none_or(|b| phi < b) {
            best = Some(phi);
        }
    }
    best
}
