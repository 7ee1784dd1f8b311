//! First-passage distances on the planar dual of a box.
//!
//! A dual edge has passage time 1 when the primal edge it crosses is open
//! and 0 when it is closed, so `D(x*, y*)` counts the open primal edges a
//! dual path must cut.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{BoxGraph, DualGraph, EdgeId};
use crate::percolation::rng::{StreamSampler, DOMAIN_SAMPLER};
use crate::percolation::BondConfig;
use crate::stats::{linear_fit, LinearFit};

const UNSEEN: u32 = u32::MAX;

/// Dual graph of `B_2(n)` with 0/1 passage times.
#[derive(Debug, Clone)]
pub struct DualFppField {
    dual: DualGraph,
    weight: Vec<u8>,
}

impl DualFppField {
    pub fn build(config: &BondConfig) -> Result<Self> {
        let spec = config.spec();
        if spec.d != 2 {
            return Err(Error::UnsupportedDimension {
                d: spec.d,
                what: "dual first-passage percolation",
            });
        }
        let boxg = BoxGraph::build(spec)?;
        let dual = boxg.dual_lattice()?;
        let weight = (0..dual.num_edges())
            .map(|k| u8::from(config.is_open(dual.primal_of(k as u32))))
            .collect();
        Ok(DualFppField { dual, weight })
    }

    pub fn dual(&self) -> &DualGraph {
        &self.dual
    }

    /// `X(e*)`.
    pub fn weight(&self, dual_edge: u32) -> u8 {
        self.weight[dual_edge as usize]
    }

    /// Passage time of the dual edge crossing primal edge `e`.
    pub fn weight_of_primal(&self, e: EdgeId) -> u8 {
        self.weight[self.dual.dual_of(e) as usize]
    }

    /// Passage times from `source` to every dual vertex (0-1 BFS).
    pub fn distances_from(&self, source: u32) -> Result<Vec<u32>> {
        let nv = self.dual.num_vertices();
        if source as usize >= nv {
            return Err(Error::Domain(format!("dual vertex {source} out of range")));
        }
        let mut dist = vec![UNSEEN; nv];
        let mut queue = VecDeque::new();
        dist[source as usize] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &(v, e) in self.dual.neighbors(u) {
                let w = self.weight[e as usize] as u32;
                if du + w < dist[v as usize] {
                    dist[v as usize] = du + w;
                    if w == 0 {
                        queue.push_front(v);
                    } else {
                        queue.push_back(v);
                    }
                }
            }
        }
        Ok(dist)
    }

    pub fn distance(&self, a: u32, b: u32) -> Result<u32> {
        if b as usize >= self.dual.num_vertices() {
            return Err(Error::Domain(format!("dual vertex {b} out of range")));
        }
        Ok(self.distances_from(a)?[b as usize])
    }
}

pub fn dual_fpp_distance(config: &BondConfig, a: u32, b: u32) -> Result<u32> {
    DualFppField::build(config)?.distance(a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FppPair {
    pub a: u32,
    pub b: u32,
    pub l1: u32,
    pub distance: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct FppProbe {
    pub pairs: Vec<FppPair>,
    /// Passage time regressed on L1 distance.
    pub fit: LinearFit,
}

#[derive(Debug, Clone)]
pub struct FppOptions {
    pub pairs: usize,
    pub min_l1: u32,
    pub max_l1: u32,
    /// Minimum number of dual steps from a sampled face to the outer face.
    pub margin: u32,
    pub seed: u64,
}

impl Default for FppOptions {
    fn default() -> Self {
        FppOptions {
            pairs: 300,
            min_l1: 10,
            max_l1: 60,
            margin: 5,
            seed: 0,
        }
    }
}

/// Samples interior face pairs and regresses `D` on the L1 distance.
///
/// A pair is kept only if its L1 distance is at most the cost of going
/// through the outer face, `outer(a) + outer(b)`, so the all-open field
/// reproduces `D = L1` exactly.
pub fn fpp_regression(config: &BondConfig, opts: &FppOptions) -> Result<FppProbe> {
    let field = DualFppField::build(config)?;
    let dual = field.dual();
    let faces: Vec<u32> = (0..dual.outer())
        .filter(|&f| dual.outer_distance(f).is_some_and(|o| o >= opts.margin))
        .collect();
    if faces.is_empty() {
        return Err(Error::Domain(format!("no faces at margin {}", opts.margin)));
    }
    let mut sampler = StreamSampler::new(opts.seed, DOMAIN_SAMPLER ^ 0xF99);
    let mut pairs = Vec::with_capacity(opts.pairs);
    let mut attempts = 0usize;
    while pairs.len() < opts.pairs {
        attempts += 1;
        if attempts > 10_000 * opts.pairs.max(1) {
            return Err(Error::Domain(format!(
                "could not find {} face pairs with L1 in [{}, {}]",
                opts.pairs, opts.min_l1, opts.max_l1
            )));
        }
        let a = faces[sampler.below(faces.len() as u64) as usize];
        let b = faces[sampler.below(faces.len() as u64) as usize];
        let l1 = dual.l1(a, b).expect("faces are inner vertices");
        let detour = dual.outer_distance(a).unwrap() + dual.outer_distance(b).unwrap();
        if l1 < opts.min_l1 || l1 > opts.max_l1 || l1 > detour {
            continue;
        }
        let distance = field.distance(a, b)?;
        pairs.push(FppPair { a, b, l1, distance });
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.l1 as f64).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.distance as f64).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok(FppProbe { pairs, fit })
}
