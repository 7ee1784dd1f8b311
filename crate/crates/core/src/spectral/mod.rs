//! Spectral gap and relaxation time of the walk generator.
//!
//! All eigen-computations run on the symmetrised generator
//! `S = Π^{1/2} Q Π^{-1/2}`, which has entries `1/sqrt(deg x deg y)` on
//! edges and `-1` on the diagonal and shares the spectrum of `Q`. The top
//! eigenvector of `S` is `sqrt(π)` with eigenvalue 0.

mod lanczos;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::walk::Chain;

pub use lanczos::{lanczos_second, LanczosOptions};

/// Chains up to this many states use the dense eigensolver by default.
pub const DENSE_LIMIT: usize = 5000;

/// Builds `S` as a dense matrix.
pub fn symmetrized_generator(chain: &Chain) -> DMatrix<f64> {
    let g = chain.graph();
    let nv = g.num_vertices();
    let mut s = DMatrix::<f64>::zeros(nv, nv);
    for v in 0..nv {
        s[(v, v)] = -1.0;
    }
    for &[a, b] in g.edges() {
        let w = 1.0 / ((g.degree(a as usize) * g.degree(b as usize)) as f64).sqrt();
        s[(a as usize, b as usize)] = w;
        s[(b as usize, a as usize)] = w;
    }
    s
}

/// `y = S x` without forming `S`.
pub fn apply_symmetrized(chain: &Chain, x: &[f64], y: &mut [f64]) {
    let g = chain.graph();
    let inv_sqrt = chain.inv_sqrt_degrees();
    for v in 0..g.num_vertices() {
        let acc: f64 = g.neighbors(v).iter().map(|&u| inv_sqrt[u as usize] * x[u as usize]).sum();
        y[v] = inv_sqrt[v] * acc - x[v];
    }
}

/// Full eigendecomposition of `S`, eigenvalues sorted descending (the
/// stationary eigenvalue 0 first).
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    eigenvalues: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl DenseSpectrum {
    pub fn compute(chain: &Chain) -> Result<Self> {
        let s = symmetrized_generator(chain);
        let eig = s.symmetric_eigen();
        let nv = chain.num_states();
        let mut order: Vec<usize> = (0..nv).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = DMatrix::<f64>::zeros(nv, nv);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Ok(DenseSpectrum {
            eigenvalues,
            vectors,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalues of `Q`, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors of `S` as columns, matching
    /// [`eigenvalues`](Self::eigenvalues).
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn gap(&self) -> f64 {
        -self.eigenvalues[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralMethod {
    Dense,
    Iterative,
}

#[derive(Debug, Clone)]
pub struct SpectralResult {
    /// `-λ2` of `Q`.
    pub gap: f64,
    /// Relaxation time `1 / gap`.
    pub tau2: f64,
    pub method: SpectralMethod,
    /// Residual `|S v - λ2 v|` of the returned eigenvector (iterative: the
    /// eigenvalue error bound used as stopping criterion).
    pub residual: f64,
    /// Unit eigenvector of `S` for `λ2`.
    pub second_vector: Vec<f64>,
}

impl SpectralResult {
    pub fn from_dense(chain: &Chain, spectrum: &DenseSpectrum) -> Self {
        let lambda2 = spectrum.eigenvalues()[1];
        let v: Vec<f64> = spectrum.vectors().column(1).iter().copied().collect();
        let mut sv = vec![0.0; v.len()];
        apply_symmetrized(chain, &v, &mut sv);
        let residual = sv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda2 * b).powi(2))
            .sum::<f64>()
            .sqrt();
        SpectralResult {
            gap: -lambda2,
            tau2: -1.0 / lambda2,
            method: SpectralMethod::Dense,
            residual,
            second_vector: v,
        }
    }

    /// Right eigenvector of `Q` for `λ2`: `v / sqrt(π)`.
    pub fn second_eigenfunction(&self, chain: &Chain) -> Vec<f64> {
        self.second_vector
            .iter()
            .zip(chain.pi())
            .map(|(v, p)| v / p.sqrt())
            .collect()
    }
}

/// Spectral gap to relative accuracy `rtol`: dense for chains up to
/// [`DENSE_LIMIT`] states, deflated Lanczos above.
pub fn spectral_gap(chain: &Chain, rtol: f64) -> Result<SpectralResult> {
    let method = if chain.num_states() <= DENSE_LIMIT {
        SpectralMethod::Dense
    } else {
        SpectralMethod::Iterative
    };
    spectral_gap_with(chain, rtol, method)
}

pub fn spectral_gap_with(chain: &Chain, rtol: f64, method: SpectralMethod) -> Result<SpectralResult> {
    if !(rtol > 0.0) {
        return Err(Error::Domain(format!("rtol must be positive, got {rtol}")));
    }
    match method {
        SpectralMethod::Dense => {
            let spectrum = DenseSpectrum::compute(chain)?;
            Ok(SpectralResult::from_dense(chain, &spectrum))
        }
        SpectralMethod::Iterative => {
            let out = lanczos_second(chain, &LanczosOptions { rtol, ..Default::default() })?;
            Ok(SpectralResult {
                gap: -out.eigenvalue,
                tau2: -1.0 / out.eigenvalue,
                method: SpectralMethod::Iterative,
                residual: out.error_bound,
                second_vector: out.vector,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceTag {
    /// Maximum over every source vertex.
    Exact,
    /// Maximum over a subset of sources: a lower bound of the lower bound.
    SampledSources,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DistanceVariance {
    /// `max_v Var_π(D_v)`.
    pub value: f64,
    /// Local index of the maximising source.
    pub source: usize,
    pub tag: VarianceTag,
}

fn distance_variance(chain: &Chain, v: usize) -> f64 {
    let pi = chain.pi();
    let dist = chain.graph().bfs_distances(v);
    let (mut m1, mut m2) = (0.0, 0.0);
    for (p, &d) in pi.iter().zip(&dist) {
        let d = d as f64;
        m1 += p * d;
        m2 += p * d * d;
    }
    (m2 - m1 * m1).max(0.0)
}

/// `max_v (π[D_v²] - π[D_v]²)` over all sources; a lower bound on the
/// relaxation time.
pub fn distance_variance_lower_bound(chain: &Chain) -> DistanceVariance {
    distance_variance_over(chain, 0..chain.num_states(), VarianceTag::Exact)
}

/// Same maximum over `sources` only. With the highest-degree vertices and
/// the extreme-coordinate vertices as sources this is a cheap stand-in on
/// large clusters.
pub fn distance_variance_sampled(chain: &Chain, sources: &[usize]) -> DistanceVariance {
    distance_variance_over(chain, sources.iter().copied(), VarianceTag::SampledSources)
}

/// Extreme-coordinate vertices (min and max along every axis and of the
/// coordinate sum) plus the `extra` highest-degree vertices.
pub fn variance_sources(chain: &Chain, extra: usize) -> Vec<usize> {
    let g = chain.graph();
    let nv = g.num_vertices();
    let mut out = Vec::new();
    if g.dim() > 0 {
        let key = |v: usize, axis: usize| -> i64 {
            let c = g.coords(v).unwrap();
            if axis < g.dim() {
                c[axis] as i64
            } else {
                c.iter().map(|&x| x as i64).sum()
            }
        };
        for axis in 0..=g.dim() {
            out.push((0..nv).min_by_key(|&v| key(v, axis)).unwrap());
            out.push((0..nv).max_by_key(|&v| key(v, axis)).unwrap());
        }
    }
    let mut by_degree: Vec<usize> = (0..nv).collect();
    by_degree.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
    out.extend(by_degree.into_iter().take(extra));
    out.sort_unstable();
    out.dedup();
    out
}

fn distance_variance_over(chain: &Chain, sources: impl Iterator<Item = usize>, tag: VarianceTag) -> DistanceVariance {
    let mut best = DistanceVariance {
        value: 0.0,
        source: 0,
        tag,
    };
    for v in sources {
        let var = distance_variance(chain, v);
        if var > best.value {
            best.value = var;
            best.source = v;
        }
    }
    best
}

/// Relative slack granted to floating-point inputs of [`sandwich_check`].
pub const SANDWICH_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SandwichReport {
    pub tau1: f64,
    pub tau2: f64,
    /// `τ2 (1 + ½ ln(1/π_min))`.
    pub upper: f64,
    /// `τ1 - τ2`.
    pub lower_slack: f64,
    /// `upper - τ1`.
    pub upper_slack: f64,
}

/// Checks `τ2 <= τ1 <= τ2 (1 + ½ ln(1/π_min))`.
pub fn sandwich_check(tau1: f64, spectral: &SpectralResult, pi_min: f64) -> Result<SandwichReport> {
    let tau2 = spectral.tau2;
    let upper = tau2 * (1.0 + 0.5 * (1.0 / pi_min).ln());
    if tau2 > tau1 * (1.0 + SANDWICH_RTOL) {
        return Err(Error::InequalityViolation {
            side: "tau2 <= tau1",
            lhs: tau2,
            rhs: tau1,
        });
    }
    if tau1 > upper * (1.0 + SANDWICH_RTOL) {
        return Err(Error::InequalityViolation {
            side: "tau1 <= tau2 (1 + ln(1/pi_min)/2)",
            lhs: tau1,
            rhs: upper,
        });
    }
    Ok(SandwichReport {
        tau1,
        tau2,
        upper,
        lower_slack: tau1 - tau2,
        upper_slack: upper - tau1,
    })
}

/// Convenience: `S v` as a vector.
pub fn symmetrized_apply(chain: &Chain, v: &DVector<f64>) -> DVector<f64> {
    let mut out = vec![0.0; v.len()];
    apply_symmetrized(chain, v.as_slice(), &mut out);
    DVector::from_vec(out)
}
