//! The continuous-time simple random walk on a finite connected graph.
//!
//! The generator has rates `Q(x,y) = 1/deg(x)` to each neighbour and
//! `Q(x,x) = -1`; the stationary law is `π(x) = deg(x) / Σ deg`; every
//! directed edge carries the same stationary flow `π(x) Q(x,y) = 1 / Σ deg`.

mod mixing;
mod transient;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::graph::ClusterGraph;

pub use mixing::{
    mixing_time, mixing_time_with_spectrum, pairwise_distance, stationarity_distance, MixingEngine, MixingMode, MixingOptions, MixingResult,
    DEFAULT_POISSON_TOL,
};
pub use transient::{
    poisson_window, transient_distribution, transient_rows_spectral, transient_rows_uniformized, PoissonWindow,
};

/// Reversible walk data on a connected graph.
#[derive(Debug, Clone)]
pub struct Chain {
    graph: ClusterGraph,
    pi: Vec<f64>,
    inv_degree: Vec<f64>,
    inv_sqrt_degree: Vec<f64>,
}

impl Chain {
    /// Fails on graphs that are disconnected or have fewer than two
    /// vertices.
    pub fn new(graph: ClusterGraph) -> Result<Self> {
        if graph.num_vertices() < 2 {
            return Err(Error::Domain("a walk needs at least two states".into()));
        }
        if !graph.is_connected() {
            return Err(Error::Domain("graph is not connected".into()));
        }
        let total = graph.degree_sum() as f64;
        let nv = graph.num_vertices();
        let pi = (0..nv).map(|v| graph.degree(v) as f64 / total).collect();
        let inv_degree = (0..nv).map(|v| 1.0 / graph.degree(v) as f64).collect();
        let inv_sqrt_degree = (0..nv).map(|v| 1.0 / (graph.degree(v) as f64).sqrt()).collect();
        Ok(Chain {
            graph,
            pi,
            inv_degree,
            inv_sqrt_degree,
        })
    }

    pub fn graph(&self) -> &ClusterGraph {
        &self.graph
    }

    pub fn num_states(&self) -> usize {
        self.graph.num_vertices()
    }

    /// `Σ_y deg(y) = 2|E|`.
    pub fn degree_sum(&self) -> u64 {
        self.graph.degree_sum()
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn pi_exact(&self, x: usize) -> Ratio<u64> {
        Ratio::new(self.graph.degree(x) as u64, self.degree_sum())
    }

    pub fn pi_min(&self) -> f64 {
        self.pi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn stationary(&self) -> Distribution {
        Distribution(self.pi.clone())
    }

    pub(crate) fn inv_degrees(&self) -> &[f64] {
        &self.inv_degree
    }

    pub(crate) fn inv_sqrt_degrees(&self) -> &[f64] {
        &self.inv_sqrt_degree
    }

    /// Generator entry `Q(x,y)`.
    pub fn rate(&self, x: usize, y: usize) -> f64 {
        if x == y {
            -1.0
        } else if self.graph.neighbors(x).binary_search(&(y as u32)).is_ok() {
            self.inv_degree[x]
        } else {
            0.0
        }
    }

    /// Off-diagonal generator entry as an exact rational, `None` on the
    /// diagonal.
    pub fn rate_exact(&self, x: usize, y: usize) -> Option<Ratio<u64>> {
        if x == y {
            return None;
        }
        let adjacent = self.graph.neighbors(x).binary_search(&(y as u32)).is_ok();
        Some(if adjacent {
            Ratio::new(1, self.graph.degree(x) as u64)
        } else {
            Ratio::from_integer(0)
        })
    }

    /// Stationary flow `q(x,y) = π(x) Q(x,y)` as an exact rational.
    pub fn edge_measure_exact(&self, x: usize, y: usize) -> Option<Ratio<u64>> {
        self.rate_exact(x, y).map(|r| self.pi_exact(x) * r)
    }

    /// The common value `1 / Σ deg` of the flow across any directed edge.
    pub fn edge_measure(&self) -> f64 {
        1.0 / self.degree_sum() as f64
    }

    /// `out = mu P` for the jump kernel `P = I + Q`.
    pub fn step(&self, mu: &[f64], out: &mut [f64]) {
        for (y, o) in out.iter_mut().enumerate() {
            *o = self
                .graph
                .neighbors(y)
                .iter()
                .map(|&z| mu[z as usize] * self.inv_degree[z as usize])
                .sum();
        }
    }
}

/// Tolerance on the total mass of a [`Distribution`].
pub const MASS_TOL: f64 = 1e-12;

/// A probability vector over chain states.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::Domain("distribution has a negative or NaN entry".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::Domain(format!("distribution sums to {total}")));
        }
        Ok(Distribution(weights))
    }

    pub fn point_mass(len: usize, at: usize) -> Self {
        let mut w = vec![0.0; len];
        w[at] = 1.0;
        Distribution(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub(crate) fn from_raw(w: Vec<f64>) -> Self {
        Distribution(w)
    }
}

/// `½ Σ |μ(x) - ν(x)|`.
pub fn tv_distance(mu: &Distribution, nu: &Distribution) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::Domain(format!(
            "distributions have lengths {} and {}",
            mu.len(),
            nu.len()
        )));
    }
    Ok(tv_raw(mu.as_slice(), nu.as_slice()))
}

#[inline]
pub(crate) fn tv_raw(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
