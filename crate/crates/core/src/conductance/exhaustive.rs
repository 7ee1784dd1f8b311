//! Exhaustive search over connected vertex subsets.
//!
//! Each connected set is produced exactly once, grown from its smallest
//! vertex by the usual extension-set scheme: a vertex joins the extension
//! set only when it is a neighbour of the newest member and not already
//! adjacent to the set.

use std::collections::BTreeMap;

use num_rational::Ratio;

use super::{phi_f64, phi_ratio, Certification, ConductanceProfile, CutValue, ProfilePoint};
use crate::error::{Error, Result};
use crate::walk::Chain;

/// Largest chain handled by the exhaustive routines.
pub const EXHAUSTIVE_CAP: usize = 22;

fn masks(chain: &Chain, cap: usize) -> Result<Vec<u64>> {
    let nv = chain.num_states();
    if nv > cap || nv > 63 {
        return Err(Error::Capacity(format!(
            "{nv} states exceed the exhaustive cap of {cap}; use the upper-bound profiles instead"
        )));
    }
    let g = chain.graph();
    Ok((0..nv)
        .map(|x| g.neighbors(x).iter().fold(0u64, |m, &y| m | 1 << y))
        .collect())
}

/// Calls `visit(mask, crossing, volume)` once for every nonempty connected
/// vertex set of a graph on at most 63 vertices given by neighbour masks.
pub fn for_each_connected_subset(adj: &[u64], mut visit: impl FnMut(u64, u64, u64)) {
    let degree: Vec<u64> = adj.iter().map(|m| m.count_ones() as u64).collect();
    struct Ctx<'a, F> {
        adj: &'a [u64],
        degree: &'a [u64],
        allowed: u64,
        visit: F,
    }
    fn grow<F: FnMut(u64, u64, u64)>(ctx: &mut Ctx<'_, F>, set: u64, mut ext: u64, closed: u64, crossing: u64, vol: u64) {
        (ctx.visit)(set, crossing, vol);
        while ext != 0 {
            let w = ext.trailing_zeros() as usize;
            ext &= ext - 1;
            let fresh = ctx.adj[w] & !closed & ctx.allowed;
            let inner = (ctx.adj[w] & set).count_ones() as u64;
            grow(
                ctx,
                set | 1 << w,
                ext | fresh,
                closed | ctx.adj[w],
                crossing + ctx.degree[w] - 2 * inner,
                vol + ctx.degree[w],
            );
        }
    }
    let n = adj.len();
    for v in 0..n {
        let allowed = if v + 1 >= 64 { 0 } else { !0u64 << (v + 1) };
        let mut ctx = Ctx {
            adj,
            degree: &degree,
            allowed,
            visit: &mut visit,
        };
        let start = 1u64 << v;
        grow(&mut ctx, start, adj[v] & allowed, start | adj[v], degree[v], degree[v]);
    }
}

fn connected_mask(adj: &[u64], set: u64) -> bool {
    if set == 0 {
        return false;
    }
    let mut seen = 1u64 << set.trailing_zeros();
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0;
        let mut f = frontier;
        while f != 0 {
            let x = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= adj[x];
        }
        next &= set & !seen;
        seen |= next;
        frontier = next;
    }
    seen == set
}

fn mask_to_set(mask: u64) -> Vec<u32> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros());
        m &= m - 1;
    }
    out
}

fn cut_from_mask(adj: &[u64], mask: u64, crossing: u64, volume: u64, total: u64) -> CutValue {
    let full = if adj.len() == 64 { !0 } else { (1u64 << adj.len()) - 1 };
    CutValue {
        set: mask_to_set(mask),
        crossing,
        volume,
        total,
        a_connected: connected_mask(adj, mask),
        complement_connected: connected_mask(adj, full & !mask),
    }
}

#[derive(Debug, Clone)]
pub struct Cheeger {
    pub phi: f64,
    pub phi_exact: Ratio<u64>,
    /// A minimiser with `π(A) ≤ ½`, `A` and `Aᶜ` both connected.
    pub witness: CutValue,
}

pub fn cheeger_exact(chain: &Chain) -> Result<Cheeger> {
    cheeger_exact_with_cap(chain, EXHAUSTIVE_CAP)
}

/// `min φ_A` over `π(A) ≤ ½`, searching connected `A` with connected
/// complement.
pub fn cheeger_exact_with_cap(chain: &Chain, cap: usize) -> Result<Cheeger> {
    let adj = masks(chain, cap)?;
    let total = chain.degree_sum();
    let full = (1u64 << adj.len()) - 1;
    let mut best: Option<(Ratio<u64>, u64, u64, u64)> = None;
    for_each_connected_subset(&adj, |mask, crossing, vol| {
        if mask == full || 2 * vol > total {
            return;
        }
        let phi = phi_ratio(crossing, vol, total);
        let better = best.is_none_or(|(b, bm, _, _)| phi < b || (phi == b && mask < bm));
        if better && connected_mask(&adj, full & !mask) {
            best = Some((phi, mask, crossing, vol));
        }
    });
    let (phi_exact, mask, crossing, vol) = best.ok_or_else(|| Error::Domain("no admissible cut".into()))?;
    Ok(Cheeger {
        phi: phi_f64(crossing, vol, total),
        phi_exact,
        witness: cut_from_mask(&adj, mask, crossing, vol, total),
    })
}

pub fn profile_exact(chain: &Chain) -> Result<ConductanceProfile> {
    profile_exact_with_cap(chain, EXHAUSTIVE_CAP)
}

/// The exact profile on `(0, ½]` from all connected sets.
pub fn profile_exact_with_cap(chain: &Chain, cap: usize) -> Result<ConductanceProfile> {
    let adj = masks(chain, cap)?;
    let total = chain.degree_sum();
    let full = (1u64 << adj.len()) - 1;
    // best set for each achievable volume
    let mut by_volume: BTreeMap<u64, (Ratio<u64>, u64)> = BTreeMap::new();
    for_each_connected_subset(&adj, |mask, crossing, vol| {
        if mask == full || 2 * vol > total {
            return;
        }
        let phi = phi_ratio(crossing, vol, total);
        by_volume
            .entry(vol)
            .and_modify(|e| {
                if phi < e.0 || (phi == e.0 && mask < e.1) {
                    *e = (phi, mask);
                }
            })
            .or_insert((phi, mask));
    });
    let mut points = Vec::new();
    let mut running: Option<Ratio<u64>> = None;
    for (vol, (phi, mask)) in by_volume {
        if running.is_none_or(|r| phi < r) {
            running = Some(phi);
            points.push(ProfilePoint {
                x: vol as f64 / total as f64,
                phi: *phi.numer() as f64 / *phi.denom() as f64,
                certification: Certification::Exact,
                witness: mask_to_set(mask),
            });
        }
    }
    ConductanceProfile::from_points(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ClusterGraph;

    fn chain(g: ClusterGraph) -> Chain {
        Chain::new(g).unwrap()
    }

    fn adj_of(c: &Chain) -> Vec<u64> {
        masks(c, 63).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        // connected subsets of a path on m vertices: m(m+1)/2 intervals
        let c = chain(ClusterGraph::path(6).unwrap());
        let mut seen = std::collections::HashSet::new();
        for_each_connected_subset(&adj_of(&c), |m, _, _| assert!(seen.insert(m)));
        assert_eq!(seen.len(), 21);
        // every nonempty subset of K_5 is connected
        let c = chain(ClusterGraph::complete(5).unwrap());
        let mut count = 0;
        for_each_connected_subset(&adj_of(&c), |_, _, _| count += 1);
        assert_eq!(count, 31);
        // cycle C_m: m(m-1) arcs plus the whole cycle
        let c = chain(ClusterGraph::cycle(7).unwrap());
        let mut count = 0;
        for_each_connected_subset(&adj_of(&c), |_, _, _| count += 1);
        assert_eq!(count, 43);
    }

    #[test]
    fn enumeration_matches_bitmask_filter() {
        let c = chain(
            ClusterGraph::from_edges(9, &[(0, 1), (1, 2), (0, 3), (1, 4), (2, 5), (3, 4), (4, 5), (3, 6), (5, 8), (6, 7), (7, 8)])
                .unwrap(),
        );
        let adj = adj_of(&c);
        let mut got = Vec::new();
        for_each_connected_subset(&adj, |m, crossing, vol| {
            let members = mask_to_set(m);
            let v: u64 = members.iter().map(|&x| adj[x as usize].count_ones() as u64).sum();
            let cr: u64 = members.iter().map(|&x| (adj[x as usize] & !m).count_ones() as u64).sum();
            assert_eq!((vol, crossing), (v, cr));
            got.push(m);
        });
        got.sort_unstable();
        let want: Vec<u64> = (1u64..1 << 9).filter(|&m| connected_mask(&adj, m)).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn cheeger_examples() {
        let c4 = cheeger_exact(&chain(ClusterGraph::cycle(4).unwrap())).unwrap();
        assert_eq!(c4.phi_exact, Ratio::from_integer(1));
        assert_eq!(c4.witness.set.len(), 2);
        assert!(c4.witness.a_connected && c4.witness.complement_connected);
        let two = cheeger_exact(&chain(ClusterGraph::path(2).unwrap())).unwrap();
        assert_eq!(two.phi_exact, Ratio::from_integer(2));
        // path on three vertices: the endpoint cut, (1/4) / (1/4 · 3/4)
        let p3 = cheeger_exact(&chain(ClusterGraph::path(3).unwrap())).unwrap();
        assert_eq!(p3.phi_exact, Ratio::new(4, 3));
        assert_eq!(p3.witness.set, vec![0]);
    }

    #[test]
    fn profile_examples() {
        let c4 = profile_exact(&chain(ClusterGraph::cycle(4).unwrap())).unwrap();
        let pts: Vec<(f64, f64)> = c4.points().iter().map(|p| (p.x, p.phi)).collect();
        assert_eq!(pts, vec![(0.25, 4.0 / 3.0), (0.5, 1.0)]);
        assert_eq!(c4.value_at(0.3), Some(4.0 / 3.0));
        let two = profile_exact(&chain(ClusterGraph::path(2).unwrap())).unwrap();
        assert_eq!(two.value_at(0.5), Some(2.0));
        assert_eq!(two.value_at(0.4), None);
    }

    #[test]
    fn cap_is_enforced() {
        let c = chain(ClusterGraph::path(23).unwrap());
        assert!(matches!(cheeger_exact(&c), Err(Error::Capacity(_))));
        assert!(matches!(profile_exact(&c), Err(Error::Capacity(_))));
        assert!(profile_exact_with_cap(&c, 30).is_ok());
    }
}
