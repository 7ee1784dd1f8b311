//! The box graph `B_d(n)`: vertices `{-n..n}^d` joined at L1 distance one.
//!
//! Vertices are ranked row-major over their coordinate tuple (axis 0 most
//! significant). Edges are ranked by walking vertices in rank order and, for
//! each vertex, emitting its positive-axis neighbours in axis order. Both
//! orders are fixed so that configurations indexed by them are reproducible
//! across machines.

use std::fmt;

use crate::error::{Error, Result};

/// Dimension and radius of the box `{-n..n}^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct BoxSpec {
    pub d: usize,
    pub n: u32,
}

impl BoxSpec {
    pub fn new(d: usize, n: u32) -> Self {
        BoxSpec { d, n }
    }

    /// Side length `2n + 1`.
    pub fn side(&self) -> u64 {
        2 * self.n as u64 + 1
    }

    /// `(2n+1)^d`, or `None` when it overflows `u64`.
    pub fn vertex_count(&self) -> Option<u64> {
        let mut acc: u64 = 1;
        for _ in 0..self.d {
            acc = acc.checked_mul(self.side())?;
        }
        Some(acc)
    }

    /// `d * 2n * (2n+1)^(d-1)`, or `None` on overflow.
    pub fn edge_count(&self) -> Option<u64> {
        if self.d == 0 {
            return Some(0);
        }
        let mut acc: u64 = (self.d as u64).checked_mul(2 * self.n as u64)?;
        for _ in 1..self.d {
            acc = acc.checked_mul(self.side())?;
        }
        Some(acc)
    }
}

impl fmt::Display for BoxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B_{}({})", self.d, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct EdgeId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Immutable box graph with canonical vertex and edge indexings.
#[derive(Debug, Clone)]
pub struct BoxGraph {
    spec: BoxSpec,
    strides: Vec<u32>,
    coords: Vec<i32>,
    edge_base: Vec<u32>,
    edges: Vec<[u32; 2]>,
    edge_axis: Vec<u8>,
}

impl BoxGraph {
    /// Builds `B_d(n)`. Fails when the vertex or edge count exceeds the
    /// 32-bit index range.
    pub fn build(spec: BoxSpec) -> Result<Self> {
        if spec.d == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if spec.d > u8::MAX as usize {
            return Err(Error::Capacity(format!("dimension {} too large", spec.d)));
        }
        let nv = spec
            .vertex_count()
            .filter(|&v| v <= u32::MAX as u64)
            .ok_or_else(|| Error::Capacity(format!("{spec}: (2n+1)^d exceeds the 32-bit vertex index range")))?;
        let ne = spec
            .edge_count()
            .filter(|&e| e <= u32::MAX as u64)
            .ok_or_else(|| Error::Capacity(format!("{spec}: edge count exceeds the 32-bit edge index range")))?;
        let nv = nv as usize;
        let d = spec.d;
        let side = spec.side() as u32;
        let n = spec.n as i32;

        let mut strides = vec![1u32; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * side;
        }

        let mut coords = Vec::with_capacity(nv * d);
        let mut x = vec![-n; d];
        for _ in 0..nv {
            coords.extend_from_slice(&x);
            // odometer increment, last axis fastest
            for a in (0..d).rev() {
                if x[a] < n {
                    x[a] += 1;
                    break;
                }
                x[a] = -n;
            }
        }

        let mut edge_base = Vec::with_capacity(nv + 1);
        let mut edges = Vec::with_capacity(ne as usize);
        let mut edge_axis = Vec::with_capacity(ne as usize);
        for v in 0..nv {
            edge_base.push(edges.len() as u32);
            let c = &coords[v * d..(v + 1) * d];
            for a in 0..d {
                if c[a] < n {
                    edges.push([v as u32, v as u32 + strides[a]]);
                    edge_axis.push(a as u8);
                }
            }
        }
        edge_base.push(edges.len() as u32);
        debug_assert_eq!(edges.len() as u64, ne);

        Ok(BoxGraph {
            spec,
            strides,
            coords,
            edge_base,
            edges,
            edge_axis,
        })
    }

    pub fn spec(&self) -> BoxSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.d
    }

    pub fn num_vertices(&self) -> usize {
        self.edge_base.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn coords(&self, v: VertexId) -> &[i32] {
        let d = self.spec.d;
        &self.coords[v.index() * d..(v.index() + 1) * d]
    }

    pub fn contains(&self, x: &[i32]) -> bool {
        let n = self.spec.n as i32;
        x.len() == self.spec.d && x.iter().all(|&c| (-n..=n).contains(&c))
    }

    /// Row-major rank of a coordinate tuple, if it lies in the box.
    pub fn vertex_at(&self, x: &[i32]) -> Option<VertexId> {
        if !self.contains(x) {
            return None;
        }
        let n = self.spec.n as i32;
        let id = x
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| (c + n) as u32 * s)
            .sum();
        Some(VertexId(id))
    }

    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        let [a, b] = self.edges[e.index()];
        (VertexId(a), VertexId(b))
    }

    /// Axis along which the edge points.
    pub fn axis(&self, e: EdgeId) -> usize {
        self.edge_axis[e.index()] as usize
    }

    /// The edge from `v` to `v + e_axis`, if that neighbour is in the box.
    pub fn edge_from(&self, v: VertexId, axis: usize) -> Option<EdgeId> {
        let n = self.spec.n as i32;
        let c = self.coords(v);
        if c[axis] >= n {
            return None;
        }
        let skipped = c[..axis].iter().filter(|&&x| x >= n).count() as u32;
        Some(EdgeId(self.edge_base[v.index()] + axis as u32 - skipped))
    }

    /// The edge joining `u` and `v`, if they are lattice neighbours.
    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        let diff = hi.0 - lo.0;
        let axis = self.strides.iter().position(|&s| s == diff)?;
        let e = self.edge_from(lo, axis)?;
        (self.edges[e.index()][1] == hi.0).then_some(e)
    }

    /// Neighbours of `v` together with the connecting edge, negative
    /// directions first, then positive, each in axis order.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, EdgeId)> + '_ {
        let n = self.spec.n as i32;
        let d = self.spec.d;
        (0..2 * d).filter_map(move |k| {
            let axis = k % d;
            let c = self.coords(v)[axis];
            if k < d {
                if c > -n {
                    let u = VertexId(v.0 - self.strides[axis]);
                    self.edge_from(u, axis).map(|e| (u, e))
                } else {
                    None
                }
            } else if c < n {
                let e = self.edge_from(v, axis)?;
                Some((VertexId(self.edges[e.index()][1]), e))
            } else {
                None
            }
        })
    }

    pub fn degree(&self, v: VertexId) -> usize {
        let n = self.spec.n as i32;
        self.coords(v)
            .iter()
            .map(|&c| (c > -n) as usize + (c < n) as usize)
            .sum()
    }

    /// Planar dual of `B_2(n)`. Only defined in two dimensions.
    pub fn dual_lattice(&self) -> Result<DualGraph> {
        DualGraph::build(self)
    }
}

/// Planar dual of `B_2(n)`: one vertex per unit face plus a single merged
/// outer vertex. Dual edge `k` crosses primal edge `k`, so the pairing is the
/// identity on indices.
#[derive(Debug, Clone)]
pub struct DualGraph {
    n: u32,
    ends: Vec<[u32; 2]>,
    offsets: Vec<u32>,
    adj: Vec<(u32, u32)>,
}

impl DualGraph {
    pub fn build(boxg: &BoxGraph) -> Result<Self> {
        if boxg.dim() != 2 {
            return Err(Error::UnsupportedDimension {
                d: boxg.dim(),
                what: "the dual lattice",
            });
        }
        let n = boxg.spec().n;
        let faces_per_axis = 2 * n;
        let outer = faces_per_axis * faces_per_axis;
        let ni = n as i32;
        // face (i, j) has lower-left corner (-n + i, -n + j)
        let face = |x: i32, y: i32| -> u32 {
            if x < -ni || y < -ni || x >= ni || y >= ni {
                outer
            } else {
                (x + ni) as u32 * faces_per_axis + (y + ni) as u32
            }
        };
        let mut ends = Vec::with_capacity(boxg.num_edges());
        for e in 0..boxg.num_edges() {
            let e = EdgeId(e as u32);
            let (a, _) = boxg.endpoints(e);
            let c = boxg.coords(a);
            let (x, y) = (c[0], c[1]);
            let pair = if boxg.axis(e) == 0 {
                // (x,y)-(x+1,y): faces above and below
                [face(x, y - 1), face(x, y)]
            } else {
                // (x,y)-(x,y+1): faces left and right
                [face(x - 1, y), face(x, y)]
            };
            ends.push(pair);
        }

        let nv = outer as usize + 1;
        let mut deg = vec![0u32; nv];
        for &[a, b] in &ends {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        let mut offsets = vec![0u32; nv + 1];
        for v in 0..nv {
            offsets[v + 1] = offsets[v] + deg[v];
        }
        let mut fill = offsets.clone();
        let mut adj = vec![(0u32, 0u32); 2 * ends.len()];
        for (k, &[a, b]) in ends.iter().enumerate() {
            adj[fill[a as usize] as usize] = (b, k as u32);
            fill[a as usize] += 1;
            adj[fill[b as usize] as usize] = (a, k as u32);
            fill[b as usize] += 1;
        }
        Ok(DualGraph {
            n,
            ends,
            offsets,
            adj,
        })
    }

    pub fn radius(&self) -> u32 {
        self.n
    }

    /// Faces per axis, `2n`.
    pub fn faces_per_axis(&self) -> u32 {
        2 * self.n
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.ends.len()
    }

    pub fn outer(&self) -> u32 {
        (self.num_vertices() - 1) as u32
    }

    /// Face with grid position `(i, j)`, `0 <= i, j < 2n`.
    pub fn face(&self, i: u32, j: u32) -> Option<u32> {
        let m = self.faces_per_axis();
        (i < m && j < m).then_some(i * m + j)
    }

    pub fn face_position(&self, f: u32) -> Option<(u32, u32)> {
        let m = self.faces_per_axis();
        (f < self.outer()).then(|| (f / m, f % m))
    }

    /// Twice the centre coordinates of a face (kept integral).
    pub fn center2(&self, f: u32) -> Option<[i32; 2]> {
        let n = self.n as i32;
        self.face_position(f)
            .map(|(i, j)| [2 * (i as i32 - n) + 1, 2 * (j as i32 - n) + 1])
    }

    /// L1 distance between face centres.
    pub fn l1(&self, a: u32, b: u32) -> Option<u32> {
        let (ai, aj) = self.face_position(a)?;
        let (bi, bj) = self.face_position(b)?;
        Some(ai.abs_diff(bi) + aj.abs_diff(bj))
    }

    /// Hop distance from a face to the outer vertex.
    pub fn outer_distance(&self, f: u32) -> Option<u32> {
        let m = self.faces_per_axis();
        self.face_position(f)
            .map(|(i, j)| i.min(j).min(m - 1 - i).min(m - 1 - j) + 1)
    }

    /// Dual edge crossing the given primal edge.
    pub fn dual_of(&self, e: EdgeId) -> u32 {
        e.0
    }

    /// Primal edge crossed by the given dual edge.
    pub fn primal_of(&self, dual_edge: u32) -> EdgeId {
        EdgeId(dual_edge)
    }

    pub fn endpoints(&self, dual_edge: u32) -> [u32; 2] {
        self.ends[dual_edge as usize]
    }

    /// `(neighbour, dual edge)` pairs; parallel edges to the outer vertex
    /// appear once per crossing primal edge.
    pub fn neighbors(&self, v: u32) -> &[(u32, u32)] {
        let v = v as usize;
        &self.adj[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }
}

/// Largest L1 distance between two points of a non-empty set.
pub fn l1_diameter<I, P>(points: I) -> Result<u64>
where
    I: IntoIterator<Item = P>,
    P: AsRef<[i32]>,
{
    let points: Vec<P> = points.into_iter().collect();
    let first = points
        .first()
        .ok_or_else(|| Error::Domain("L1 diameter of an empty set".into()))?;
    let d = first.as_ref().len();
    if points.iter().any(|p| p.as_ref().len() != d) {
        return Err(Error::Domain("points of mixed dimension".into()));
    }
    if d == 0 {
        return Ok(0);
    }
    // max |x - y|_1 = max over sign vectors s of (max s.x - min s.x); fixing
    // the first sign leaves 2^(d-1) patterns
    let mut best: i64 = 0;
    for mask in 0u32..(1 << (d - 1)) {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for p in &points {
            let s: i64 = p
                .as_ref()
                .iter()
                .enumerate()
                .map(|(a, &c)| {
                    if a > 0 && mask >> (a - 1) & 1 == 1 {
                        -(c as i64)
                    } else {
                        c as i64
                    }
                })
                .sum();
            lo = lo.min(s);
            hi = hi.max(s);
        }
        best = best.max(hi - lo);
    }
    Ok(best as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashSet, VecDeque};

    fn brute_edges(spec: BoxSpec) -> usize {
        let g = BoxGraph::build(spec).unwrap();
        let mut seen = HashSet::new();
        for v in 0..g.num_vertices() {
            let c = g.coords(VertexId(v as u32)).to_vec();
            for a in 0..spec.d {
                for delta in [-1, 1] {
                    let mut y = c.clone();
                    y[a] += delta;
                    if let Some(u) = g.vertex_at(&y) {
                        seen.insert((v.min(u.index()), v.max(u.index())));
                    }
                }
            }
        }
        seen.len()
    }

    #[test]
    fn small_box_counts() {
        let g = BoxGraph::build(BoxSpec::new(2, 1)).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (9, 12));
        let g = BoxGraph::build(BoxSpec::new(1, 2)).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (5, 4));
        let g = BoxGraph::build(BoxSpec::new(3, 2)).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (125, 300));
        assert_eq!(brute_edges(BoxSpec::new(3, 2)), 300);
    }

    #[test]
    fn edge_count_formula_matches_enumeration() {
        for d in 1..=4 {
            for n in 0..4 {
                let spec = BoxSpec::new(d, n);
                if spec.vertex_count().unwrap() > 5000 {
                    continue;
                }
                assert_eq!(brute_edges(spec) as u64, spec.edge_count().unwrap(), "{spec}");
            }
        }
    }

    #[test]
    fn degrees_and_roundtrip() {
        let g = BoxGraph::build(BoxSpec::new(3, 2)).unwrap();
        for v in 0..g.num_vertices() {
            let v = VertexId(v as u32);
            let c = g.coords(v).to_vec();
            assert_eq!(g.vertex_at(&c), Some(v));
            let nb: Vec<_> = g.neighbors(v).collect();
            assert_eq!(nb.len(), g.degree(v));
            if c.iter().all(|&x| x.abs() < 2) {
                assert_eq!(g.degree(v), 6);
            }
            for (u, e) in nb {
                assert_eq!(g.edge_between(u, v), Some(e));
                let (a, b) = g.endpoints(e);
                assert!((a == u && b == v) || (a == v && b == u));
            }
        }
        for e in 0..g.num_edges() {
            let e = EdgeId(e as u32);
            let (a, b) = g.endpoints(e);
            assert!(a < b);
            assert_eq!(g.edge_from(a, g.axis(e)), Some(e));
            let l1: i32 = g
                .coords(a)
                .iter()
                .zip(g.coords(b))
                .map(|(x, y)| (x - y).abs())
                .sum();
            assert_eq!(l1, 1);
        }
    }

    #[test]
    fn edges_follow_canonical_order() {
        let g = BoxGraph::build(BoxSpec::new(2, 1)).unwrap();
        // vertex 0 = (-1,-1): +axis0 -> (0,-1) = 3, +axis1 -> (-1,0) = 1
        assert_eq!(g.endpoints(EdgeId(0)), (VertexId(0), VertexId(3)));
        assert_eq!(g.endpoints(EdgeId(1)), (VertexId(0), VertexId(1)));
        assert_eq!(g.coords(VertexId(5)), &[0, 1]);
    }

    #[test]
    fn capacity_overflow_is_rejected() {
        assert!(matches!(
            BoxGraph::build(BoxSpec::new(8, 1000)),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(BoxGraph::build(BoxSpec::new(0, 3)), Err(Error::Domain(_))));
    }

    #[test]
    fn dual_pairing_is_total() {
        let g = BoxGraph::build(BoxSpec::new(2, 1)).unwrap();
        let dual = g.dual_lattice().unwrap();
        assert_eq!(dual.num_edges(), 12);
        assert_eq!(dual.num_vertices(), 5);
        for e in 0..12 {
            let k = dual.dual_of(EdgeId(e));
            assert_eq!(dual.primal_of(k), EdgeId(e));
        }
        let g0 = BoxGraph::build(BoxSpec::new(2, 0)).unwrap();
        assert_eq!(g0.dual_lattice().unwrap().num_edges(), 0);
        let g3 = BoxGraph::build(BoxSpec::new(3, 1)).unwrap();
        assert!(matches!(
            g3.dual_lattice(),
            Err(Error::UnsupportedDimension { d: 3, .. })
        ));
    }

    #[test]
    fn interior_dual_edges_join_adjacent_faces() {
        let g = BoxGraph::build(BoxSpec::new(2, 3)).unwrap();
        let dual = g.dual_lattice().unwrap();
        let outer = dual.outer();
        let mut interior = 0;
        for k in 0..dual.num_edges() as u32 {
            let [a, b] = dual.endpoints(k);
            assert_ne!(a, b);
            if a != outer && b != outer {
                interior += 1;
                assert_eq!(dual.l1(a, b), Some(1));
            }
        }
        // interior primal edges: those not on the boundary of the box
        let boundary = 4 * 2 * 3;
        assert_eq!(interior, g.num_edges() - boundary);
    }

    #[test]
    fn dual_is_connected() {
        let g = BoxGraph::build(BoxSpec::new(2, 2)).unwrap();
        let dual = g.dual_lattice().unwrap();
        let mut seen = vec![false; dual.num_vertices()];
        let mut q = VecDeque::from([0u32]);
        seen[0] = true;
        while let Some(v) = q.pop_front() {
            for &(u, _) in dual.neighbors(v) {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    q.push_back(u);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn l1_diameter_examples() {
        assert_eq!(l1_diameter([[0, 0]]).unwrap(), 0);
        assert_eq!(l1_diameter([[0, 0], [3, 4]]).unwrap(), 7);
        assert!(l1_diameter(Vec::<Vec<i32>>::new()).is_err());
    }

    #[test]
    fn l1_diameter_lower_bound_exhaustive_on_b2_1() {
        let g = BoxGraph::build(BoxSpec::new(2, 1)).unwrap();
        for mask in 1u32..(1 << 9) {
            let pts: Vec<&[i32]> = (0..9)
                .filter(|v| mask >> v & 1 == 1)
                .map(|v| g.coords(VertexId(v)))
                .collect();
            let s = pts.len() as f64;
            let brute = pts
                .iter()
                .flat_map(|a| pts.iter().map(move |b| {
                    a.iter().zip(b.iter()).map(|(x, y)| (x - y).unsigned_abs() as u64).sum::<u64>()
                }))
                .max()
                .unwrap();
            let diam = l1_diameter(&pts).unwrap();
            assert_eq!(diam, brute);
            assert!(diam as f64 >= s.sqrt().ceil() - 1.0);
        }
    }
}
