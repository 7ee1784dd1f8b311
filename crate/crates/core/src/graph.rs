//! Finite simple graphs used as walk state spaces: percolation clusters
//! extracted from a box, or small synthetic fixtures.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::lattice::{EdgeId, VertexId};

pub const UNREACHABLE: u32 = u32::MAX;

/// A finite simple graph in CSR form. Vertices are addressed by local
/// indices `0..num_vertices()`; each local vertex carries a label (its
/// [`VertexId`] in the parent box, or its own index for fixtures), and
/// optionally lattice coordinates.
#[derive(Debug, Clone)]
pub struct ClusterGraph {
    offsets: Vec<u32>,
    adj: Vec<u32>,
    edges: Vec<[u32; 2]>,
    labels: Vec<VertexId>,
    edge_labels: Vec<EdgeId>,
    dim: usize,
    coords: Vec<i32>,
}

impl ClusterGraph {
    /// Graph on `0..num_vertices` with the given undirected edges. Loops and
    /// repeated edges are rejected.
    pub fn from_edges(num_vertices: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let labels = (0..num_vertices as u32).map(VertexId).collect();
        let edge_labels = (0..edges.len() as u32).map(EdgeId).collect();
        Self::assemble(labels, edges, edge_labels, 0, Vec::new())
    }

    /// Graph on labelled vertices (sorted ascending) with coordinates, as
    /// extracted from a lattice box. `edges` are local index pairs.
    pub fn from_lattice_parts(
        labels: Vec<VertexId>,
        edges: &[(u32, u32)],
        edge_labels: Vec<EdgeId>,
        dim: usize,
        coords: Vec<i32>,
    ) -> Result<Self> {
        if coords.len() != labels.len() * dim {
            return Err(Error::Domain("coordinate array has the wrong length".into()));
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("vertex labels must be strictly increasing".into()));
        }
        Self::assemble(labels, edges, edge_labels, dim, coords)
    }

    fn assemble(
        labels: Vec<VertexId>,
        edges: &[(u32, u32)],
        edge_labels: Vec<EdgeId>,
        dim: usize,
        coords: Vec<i32>,
    ) -> Result<Self> {
        let nv = labels.len();
        if edge_labels.len() != edges.len() {
            return Err(Error::Domain("edge label count mismatch".into()));
        }
        let mut deg = vec![0u32; nv];
        let mut canon = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a as usize >= nv || b as usize >= nv {
                return Err(Error::Domain(format!("edge ({a},{b}) out of range")));
            }
            if a == b {
                return Err(Error::Domain(format!("loop at vertex {a}")));
            }
            deg[a as usize] += 1;
            deg[b as usize] += 1;
            canon.push([a.min(b), a.max(b)]);
        }
        let mut offsets = vec![0u32; nv + 1];
        for v in 0..nv {
            offsets[v + 1] = offsets[v] + deg[v];
        }
        let mut fill = offsets.clone();
        let mut adj = vec![0u32; 2 * canon.len()];
        for &[a, b] in &canon {
            adj[fill[a as usize] as usize] = b;
            fill[a as usize] += 1;
            adj[fill[b as usize] as usize] = a;
            fill[b as usize] += 1;
        }
        for v in 0..nv {
            let s = &mut adj[offsets[v] as usize..offsets[v + 1] as usize];
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Domain(format!("repeated edge at vertex {v}")));
            }
        }
        Ok(ClusterGraph {
            offsets,
            adj,
            edges: canon,
            labels,
            edge_labels,
            dim,
            coords,
        })
    }

    /// Cycle on `m >= 3` vertices.
    pub fn cycle(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::Domain("a cycle needs at least 3 vertices".into()));
        }
        let edges: Vec<_> = (0..m as u32).map(|i| (i, (i + 1) % m as u32)).collect();
        Self::from_edges(m, &edges)
    }

    /// Path on `m >= 1` vertices.
    pub fn path(m: usize) -> Result<Self> {
        let edges: Vec<_> = (1..m as u32).map(|i| (i - 1, i)).collect();
        Self::from_edges(m, &edges)
    }

    /// Complete graph on `m` vertices.
    pub fn complete(m: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..m as u32 {
            for j in i + 1..m as u32 {
                edges.push((i, j));
            }
        }
        Self::from_edges(m, &edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        (self.offsets[v + 1] - self.offsets[v]) as usize
    }

    /// Sum of all degrees, `2|E|`.
    pub fn degree_sum(&self) -> u64 {
        2 * self.edges.len() as u64
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    /// Undirected edges as local pairs `[a, b]` with `a < b`.
    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn edge_labels(&self) -> &[EdgeId] {
        &self.edge_labels
    }

    pub fn label(&self, v: usize) -> VertexId {
        self.labels[v]
    }

    pub fn labels(&self) -> &[VertexId] {
        &self.labels
    }

    /// Local index of a labelled vertex.
    pub fn local_index(&self, id: VertexId) -> Option<usize> {
        self.labels.binary_search(&id).ok()
    }

    /// Lattice dimension of attached coordinates (0 for fixtures).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self, v: usize) -> Option<&[i32]> {
        (self.dim > 0).then(|| &self.coords[v * self.dim..(v + 1) * self.dim])
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_vertices()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        if self.num_vertices() == 0 {
            return true;
        }
        self.bfs_distances(0).iter().all(|&d| d != UNREACHABLE)
    }

    /// Hop distances from `src`; unreachable vertices get [`UNREACHABLE`].
    pub fn bfs_distances(&self, src: usize) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.num_vertices()];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src as u32);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v as usize];
            for &u in self.neighbors(v as usize) {
                if dist[u as usize] == UNREACHABLE {
                    dist[u as usize] = dv + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Connected components of the subgraph induced by `members`
    /// (a membership flag per vertex). Each component is sorted ascending;
    /// components are ordered by their smallest vertex.
    pub fn induced_components(&self, members: &[bool]) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.num_vertices()];
        let mut out = Vec::new();
        for s in 0..self.num_vertices() {
            if !members[s] || seen[s] {
                continue;
            }
            let mut comp = vec![s as u32];
            seen[s] = true;
            let mut head = 0;
            while head < comp.len() {
                let v = comp[head] as usize;
                head += 1;
                for &u in self.neighbors(v) {
                    if members[u as usize] && !seen[u as usize] {
                        seen[u as usize] = true;
                        comp.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures() {
        let c4 = ClusterGraph::cycle(4).unwrap();
        assert_eq!((c4.num_vertices(), c4.num_edges()), (4, 4));
        assert!((0..4).all(|v| c4.degree(v) == 2));
        assert_eq!(c4.bfs_distances(0), vec![0, 1, 2, 1]);
        let k5 = ClusterGraph::complete(5).unwrap();
        assert_eq!(k5.num_edges(), 10);
        let p3 = ClusterGraph::path(3).unwrap();
        assert_eq!(p3.neighbors(1), &[0, 2]);
        assert!(p3.is_connected());
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(ClusterGraph::from_edges(2, &[(0, 0)]).is_err());
        assert!(ClusterGraph::from_edges(2, &[(0, 1), (1, 0)]).is_err());
        assert!(ClusterGraph::from_edges(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn components_of_subset() {
        let p = ClusterGraph::path(5).unwrap();
        let comps = p.induced_components(&[true, true, false, true, false]);
        assert_eq!(comps, vec![vec![0, 1], vec![3]]);
        let g = ClusterGraph::from_edges(3, &[(0, 1)]).unwrap();
        assert!(!g.is_connected());
    }
}
