//! Restarted Lanczos for the second eigenpair of the symmetrised generator.
//!
//! The stationary direction `sqrt(π)` is projected out of every Krylov
//! vector analytically, so the iteration targets `λ2` directly as the top
//! of the remaining spectrum.

use nalgebra::{DMatrix, SymmetricEigen};

use super::apply_symmetrized;
use crate::error::{Error, Result};
use crate::percolation::rng::StreamSampler;
use crate::walk::Chain;

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Target relative accuracy of the eigenvalue.
    pub rtol: f64,
    /// Krylov dimension per restart cycle.
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Seed of the deterministic start vector.
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            rtol: 1e-10,
            krylov_dim: 160,
            max_restarts: 200,
            seed: 0x1a2c05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LanczosOutcome {
    pub eigenvalue: f64,
    pub vector: Vec<f64>,
    /// `min(r, r²/δ)` with `r` the residual norm and `δ` the distance to
    /// the next Ritz value.
    pub error_bound: f64,
    pub matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

pub fn lanczos_second(chain: &Chain, opts: &LanczosOptions) -> Result<LanczosOutcome> {
    let nv = chain.num_states();
    if nv < 2 {
        return Err(Error::Domain("need at least two states".into()));
    }
    let mut top: Vec<f64> = chain.pi().iter().map(|p| p.sqrt()).collect();
    normalize(&mut top);
    let deflate = |v: &mut [f64]| {
        let c = dot(v, &top);
        axpy(v, -c, &top);
    };

    let mut sampler = StreamSampler::new(opts.seed, nv as u64);
    let mut start: Vec<f64> = (0..nv).map(|_| sampler.unit() - 0.5).collect();
    deflate(&mut start);
    normalize(&mut start);

    let m = opts.krylov_dim.min(nv - 1).max(1);
    let mut matvecs = 0;
    let mut last = (f64::NAN, f64::INFINITY);
    for _cycle in 0..opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        basis.push(start.clone());
        let mut w = vec![0.0; nv];
        for j in 0..m {
            apply_symmetrized(chain, &basis[j], &mut w);
            matvecs += 1;
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            // full reorthogonalisation, twice
            for _ in 0..2 {
                deflate(&mut w);
                for q in &basis {
                    let c = dot(&w, q);
                    axpy(&mut w, -c, q);
                }
            }
            let b = normalize(&mut w);
            if j + 1 == m || b < 1e-14 {
                beta.push(b);
                break;
            }
            beta.push(b);
            basis.push(w.clone());
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let theta = eig.eigenvalues[order[0]];
        let next = order.get(1).map(|&i| eig.eigenvalues[i]);
        let y = eig.eigenvectors.column(order[0]);

        let mut x = vec![0.0; nv];
        for (i, q) in basis.iter().enumerate().take(k) {
            axpy(&mut x, y[i], q);
        }
        deflate(&mut x);
        normalize(&mut x);
        let mut sx = vec![0.0; nv];
        apply_symmetrized(chain, &x, &mut sx);
        matvecs += 1;
        let rq = dot(&x, &sx);
        axpy(&mut sx, -rq, &x);
        let res = dot(&sx, &sx).sqrt();
        let delta = next.map_or(f64::INFINITY, |nx| (theta - nx).abs());
        let bound = res.min(res * res / delta);
        last = (rq, bound);
        let exhausted = k < m && beta[k - 1] < 1e-14;
        if bound <= opts.rtol * rq.abs() || exhausted {
            return Ok(LanczosOutcome {
                eigenvalue: rq,
                vector: x,
                error_bound: bound,
                matvecs,
            });
        }
        start = x;
    }
    Err(Error::EigenNonConvergence {
        iterations: matvecs,
        estimate: last.0,
        residual: last.1,
    })
}
