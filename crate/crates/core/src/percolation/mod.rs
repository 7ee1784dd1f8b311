//! Bernoulli bond and site percolation on a box, cluster extraction and
//! cluster statistics.

mod io;
pub mod rng;
mod union_find;

use bitvec::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{ClusterGraph, UNREACHABLE};
use crate::lattice::{BoxGraph, BoxSpec, EdgeId, VertexId};
use crate::stats::{self, LinearFit};

pub use union_find::UnionFind;

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability {p} outside [0, 1]")))
    }
}

/// Open/closed state of every edge of a box.
#[derive(Debug, Clone, PartialEq)]
pub struct BondConfig {
    spec: BoxSpec,
    p: f64,
    seed: u64,
    open: BitVec<u64, Lsb0>,
}

impl BondConfig {
    /// Edge `e` is open iff `rng::word(seed, DOMAIN_BOND, e) < p * 2^64`.
    pub fn sample(spec: BoxSpec, p: f64, seed: u64) -> Result<Self> {
        check_probability(p)?;
        let ne = spec
            .edge_count()
            .filter(|&e| e <= u32::MAX as u64)
            .ok_or_else(|| Error::Capacity(format!("{spec}: too many edges")))?;
        let t = rng::threshold(p);
        let open = (0..ne)
            .map(|e| rng::bernoulli(rng::word(seed, rng::DOMAIN_BOND, e), t))
            .collect();
        Ok(BondConfig { spec, p, seed, open })
    }

    /// Configuration with exactly the listed edges open. `p` and `seed` are
    /// carried as metadata only.
    pub fn from_open_edges<I>(spec: BoxSpec, p: f64, seed: u64, open_edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = EdgeId>,
    {
        check_probability(p)?;
        let ne = spec
            .edge_count()
            .filter(|&e| e <= u32::MAX as u64)
            .ok_or_else(|| Error::Capacity(format!("{spec}: too many edges")))?;
        let mut open = bitvec![u64, Lsb0; 0; ne as usize];
        for e in open_edges {
            if e.index() >= open.len() {
                return Err(Error::Domain(format!("edge {} outside {spec}", e.0)));
            }
            open.set(e.index(), true);
        }
        Ok(BondConfig { spec, p, seed, open })
    }

    pub(crate) fn from_bits(spec: BoxSpec, p: f64, seed: u64, open: BitVec<u64, Lsb0>) -> Self {
        BondConfig { spec, p, seed, open }
    }

    pub fn spec(&self) -> BoxSpec {
        self.spec
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_edges(&self) -> usize {
        self.open.len()
    }

    pub fn is_open(&self, e: EdgeId) -> bool {
        self.open[e.index()]
    }

    pub fn open_count(&self) -> usize {
        self.open.count_ones()
    }

    pub fn open_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.open.iter_ones().map(|e| EdgeId(e as u32))
    }

    pub fn bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.open
    }

    fn check_box(&self, boxg: &BoxGraph) -> Result<()> {
        if boxg.spec() != self.spec {
            return Err(Error::Domain(format!(
                "configuration is for {} but the box is {}",
                self.spec,
                boxg.spec()
            )));
        }
        Ok(())
    }
}

/// Open/closed state of every vertex of a box.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteConfig {
    spec: BoxSpec,
    p: f64,
    seed: u64,
    open: BitVec<u64, Lsb0>,
}

impl SiteConfig {
    /// Vertex `v` is open iff `rng::word(seed, DOMAIN_SITE, v) < p * 2^64`.
    pub fn sample(spec: BoxSpec, p: f64, seed: u64) -> Result<Self> {
        check_probability(p)?;
        let nv = spec
            .vertex_count()
            .filter(|&v| v <= u32::MAX as u64)
            .ok_or_else(|| Error::Capacity(format!("{spec}: too many vertices")))?;
        let t = rng::threshold(p);
        let open = (0..nv)
            .map(|v| rng::bernoulli(rng::word(seed, rng::DOMAIN_SITE, v), t))
            .collect();
        Ok(SiteConfig { spec, p, seed, open })
    }

    pub(crate) fn from_bits(spec: BoxSpec, p: f64, seed: u64, open: BitVec<u64, Lsb0>) -> Self {
        SiteConfig { spec, p, seed, open }
    }

    pub fn spec(&self) -> BoxSpec {
        self.spec
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_sites(&self) -> usize {
        self.open.len()
    }

    pub fn is_open(&self, v: VertexId) -> bool {
        self.open[v.index()]
    }

    pub fn open_count(&self) -> usize {
        self.open.count_ones()
    }

    pub fn bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.open
    }
}

/// Labels every vertex of the box by its open component.
fn components(boxg: &BoxGraph, config: &BondConfig) -> UnionFind {
    let mut uf = UnionFind::new(boxg.num_vertices());
    for e in config.open_edges() {
        let (a, b) = boxg.endpoints(e);
        uf.union(a.0, b.0);
    }
    uf
}

/// Per-root `(edges, vertices, smallest vertex)`.
fn component_sizes(boxg: &BoxGraph, config: &BondConfig, uf: &mut UnionFind) -> Vec<(u64, u64, u32)> {
    let nv = boxg.num_vertices();
    let mut stats = vec![(0u64, 0u64, u32::MAX); nv];
    for v in 0..nv as u32 {
        let r = uf.find(v) as usize;
        stats[r].1 += 1;
        stats[r].2 = stats[r].2.min(v);
    }
    for e in config.open_edges() {
        let (a, _) = boxg.endpoints(e);
        let r = uf.find(a.0) as usize;
        stats[r].0 += 1;
    }
    stats
}

/// The open component with the most edges; ties go to the component
/// containing the smallest [`VertexId`].
pub fn largest_cluster(boxg: &BoxGraph, config: &BondConfig) -> Result<ClusterGraph> {
    config.check_box(boxg)?;
    if config.open_count() == 0 {
        return Err(Error::EmptyCluster);
    }
    let mut uf = components(boxg, config);
    let stats = component_sizes(boxg, config, &mut uf);
    let best_root = (0..stats.len())
        .filter(|&r| stats[r].1 > 0)
        .max_by(|&a, &b| stats[a].0.cmp(&stats[b].0).then(stats[b].2.cmp(&stats[a].2)))
        .expect("box has vertices") as u32;

    let d = boxg.dim();
    let mut local = vec![u32::MAX; boxg.num_vertices()];
    let mut labels = Vec::new();
    let mut coords = Vec::new();
    for v in 0..boxg.num_vertices() as u32 {
        if uf.find(v) == best_root {
            local[v as usize] = labels.len() as u32;
            labels.push(VertexId(v));
            coords.extend_from_slice(boxg.coords(VertexId(v)));
        }
    }
    let mut edges = Vec::new();
    let mut edge_labels = Vec::new();
    for e in config.open_edges() {
        let (a, b) = boxg.endpoints(e);
        if local[a.index()] != u32::MAX {
            edges.push((local[a.index()], local[b.index()]));
            edge_labels.push(e);
        }
    }
    ClusterGraph::from_lattice_parts(labels, &edges, edge_labels, d, coords)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ComponentSize {
    pub edges: u64,
    pub vertices: u64,
}

/// Component decomposition statistics of a configuration.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ClusterCensus {
    /// All components including isolated vertices, sorted by edges then
    /// vertices, descending.
    pub components: Vec<ComponentSize>,
    pub total_vertices: u64,
    pub total_open_edges: u64,
    /// Edges of the largest cluster over `d (2n+1)^d`.
    pub largest_edge_density: f64,
    /// Vertices of the largest cluster over `(2n+1)^d`.
    pub largest_vertex_fraction: f64,
    /// Edges of the second cluster over edges of the largest (0 if the
    /// largest has no edges).
    pub second_to_largest: f64,
}

impl ClusterCensus {
    pub fn largest(&self) -> ComponentSize {
        self.components[0]
    }
}

pub fn cluster_census(boxg: &BoxGraph, config: &BondConfig) -> Result<ClusterCensus> {
    config.check_box(boxg)?;
    let mut uf = components(boxg, config);
    let stats = component_sizes(boxg, config, &mut uf);
    let mut components: Vec<ComponentSize> = stats
        .iter()
        .filter(|s| s.1 > 0)
        .map(|s| ComponentSize {
            edges: s.0,
            vertices: s.1,
        })
        .collect();
    components.sort_by(|a, b| b.edges.cmp(&a.edges).then(b.vertices.cmp(&a.vertices)));
    let spec = boxg.spec();
    let nv = boxg.num_vertices() as f64;
    let largest = components[0];
    let second_edges = components.get(1).map_or(0, |c| c.edges);
    Ok(ClusterCensus {
        total_vertices: boxg.num_vertices() as u64,
        total_open_edges: config.open_count() as u64,
        largest_edge_density: largest.edges as f64 / (spec.d as f64 * nv),
        largest_vertex_fraction: largest.vertices as f64 / nv,
        second_to_largest: if largest.edges == 0 {
            0.0
        } else {
            second_edges as f64 / largest.edges as f64
        },
        components,
    })
}

/// Graph distance inside the cluster between two box vertices.
pub fn chemical_distance(cluster: &ClusterGraph, x: VertexId, y: VertexId) -> Result<u32> {
    let lx = cluster.local_index(x).ok_or(Error::NotInCluster(x.0))?;
    let ly = cluster.local_index(y).ok_or(Error::NotInCluster(y.0))?;
    let d = cluster.bfs_distances(lx)[ly];
    debug_assert_ne!(d, UNREACHABLE);
    Ok(d)
}

/// Chemical vs L1 distances over sampled cluster pairs.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ChemicalProbe {
    /// `(L1 distance, chemical distance)` per sampled pair.
    pub pairs: Vec<(u32, u32)>,
    pub fit: LinearFit,
    /// Least-squares slope of the line through the origin,
    /// `Σ l1·chem / Σ l1²`; at least 1 since chemical distance dominates L1.
    pub through_origin: f64,
    /// Largest per-pair ratio `chem / l1`.
    pub max_ratio: f64,
}

/// Samples `count` pairs of cluster vertices at L1 distance at least
/// `min_l1` (and distinct) and regresses chemical on L1 distance.
pub fn chemical_distance_probe(cluster: &ClusterGraph, count: usize, min_l1: u32, seed: u64) -> Result<ChemicalProbe> {
    if cluster.dim() == 0 {
        return Err(Error::Domain("cluster has no lattice coordinates".into()));
    }
    let nv = cluster.num_vertices() as u64;
    let mut sampler = rng::StreamSampler::new(seed, 0xC4E3);
    let l1 = |a: usize, b: usize| -> u32 {
        let (ca, cb) = (cluster.coords(a).unwrap(), cluster.coords(b).unwrap());
        ca.iter().zip(cb).map(|(x, y)| x.abs_diff(*y)).sum()
    };
    let mut pairs = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while pairs.len() < count {
        attempts += 1;
        if attempts > 1000 * count.max(1) {
            return Err(Error::Domain(format!(
                "could not find {count} pairs at L1 distance >= {min_l1}"
            )));
        }
        let a = sampler.below(nv) as usize;
        let b = sampler.below(nv) as usize;
        let dl1 = l1(a, b);
        if dl1 < min_l1.max(1) {
            continue;
        }
        let chem = cluster.bfs_distances(a)[b];
        pairs.push((dl1, chem));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
    let fit = stats::linear_fit(&xs, &ys)?;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let max_ratio = xs.iter().zip(&ys).map(|(x, y)| y / x).fold(0.0, f64::max);
    Ok(ChemicalProbe {
        pairs,
        fit,
        through_origin: sxy / sxx,
        max_ratio,
    })
}
