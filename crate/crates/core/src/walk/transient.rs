//! Transient laws `μ e^{tQ}`.
//!
//! Since every diagonal rate is `-1`, `e^{tQ} = Σ_k Pois(t)(k) P^k` with
//! `P = I + Q` the jump kernel of the simple random walk (uniformisation).
//! Poisson weights are generated outward from the mode and normalised over
//! a window whose neglected tails are bounded geometrically.

use nalgebra::DMatrix;

use super::{Chain, Distribution};
use crate::error::{Error, Result};
use crate::spectral::DenseSpectrum;

/// Normalised Poisson weights on `left..left + weights.len()`, with the
/// neglected mass outside the window at most `tol`.
#[derive(Debug, Clone)]
pub struct PoissonWindow {
    pub left: usize,
    pub weights: Vec<f64>,
}

impl PoissonWindow {
    pub fn right(&self) -> usize {
        self.left + self.weights.len() - 1
    }

    pub fn weight(&self, k: usize) -> f64 {
        if k < self.left {
            0.0
        } else {
            self.weights.get(k - self.left).copied().unwrap_or(0.0)
        }
    }
}

pub fn poisson_window(t: f64, tol: f64) -> Result<PoissonWindow> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if t == 0.0 {
        return Ok(PoissonWindow {
            left: 0,
            weights: vec![1.0],
        });
    }
    let mode = t.floor() as usize;
    let half = 0.5 * tol;
    let mut sum = 1.0;

    // right of the mode: w_{k+1} = w_k t / (k+1); tail past k is at most
    // w_k r / (1 - r) with r = t / (k+1) once r < 1
    let mut right = vec![1.0];
    let mut k = mode;
    loop {
        let w = right[right.len() - 1];
        let r = t / (k + 1) as f64;
        if r < 1.0 && w * r / (1.0 - r) <= half * sum {
            break;
        }
        let next = w * r;
        right.push(next);
        sum += next;
        k += 1;
    }

    // left of the mode: w_{k-1} = w_k k / t; tail below k is at most
    // w_k r / (1 - r) with r = k / t
    let mut left = Vec::new();
    let mut k = mode;
    let mut w = 1.0;
    while k > 0 {
        let r = k as f64 / t;
        if r < 1.0 && w * r / (1.0 - r) <= half * sum {
            break;
        }
        w *= r;
        left.push(w);
        sum += w;
        k -= 1;
    }
    left.reverse();
    let mut weights = left;
    weights.extend(right);
    weights.iter_mut().for_each(|w| *w /= sum);
    Ok(PoissonWindow { left: k, weights })
}

/// `start · e^{tQ}` by uniformisation, renormalised to unit mass.
pub fn transient_distribution(chain: &Chain, start: &Distribution, t: f64, tol: f64) -> Result<Distribution> {
    if start.len() != chain.num_states() {
        return Err(Error::Domain("start distribution has the wrong length".into()));
    }
    let window = poisson_window(t, tol)?;
    let nv = chain.num_states();
    let mut cur = start.as_slice().to_vec();
    let mut next = vec![0.0; nv];
    let mut acc = vec![0.0; nv];
    for k in 0..=window.right() {
        let w = window.weight(k);
        if w > 0.0 {
            acc.iter_mut().zip(&cur).for_each(|(a, c)| *a += w * c);
        }
        if k < window.right() {
            chain.step(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
    }
    let total: f64 = acc.iter().sum();
    acc.iter_mut().for_each(|a| *a /= total);
    Ok(Distribution::from_raw(acc))
}

/// All rows of `e^{tQ}` (row `x` is the law at time `t` from `x`),
/// row-major, by uniformisation.
pub fn transient_rows_uniformized(chain: &Chain, t: f64, tol: f64) -> Result<Vec<f64>> {
    let window = poisson_window(t, tol)?;
    let nv = chain.num_states();
    let g = chain.graph();
    let inv = chain.inv_degrees();
    let mut cur = vec![0.0; nv * nv];
    for x in 0..nv {
        cur[x * nv + x] = 1.0;
    }
    let mut next = vec![0.0; nv * nv];
    let mut acc = vec![0.0; nv * nv];
    for k in 0..=window.right() {
        let w = window.weight(k);
        if w > 0.0 {
            acc.iter_mut().zip(&cur).for_each(|(a, c)| *a += w * c);
        }
        if k < window.right() {
            for x in 0..nv {
                let row = &cur[x * nv..(x + 1) * nv];
                let out = &mut next[x * nv..(x + 1) * nv];
                for (y, o) in out.iter_mut().enumerate() {
                    *o = g
                        .neighbors(y)
                        .iter()
                        .map(|&z| row[z as usize] * inv[z as usize])
                        .sum();
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
    }
    for row in acc.chunks_mut(nv) {
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|a| *a /= total);
    }
    Ok(acc)
}

/// Modes with `λ t` below this are dropped from the spectral expansion.
const LOG_MODE_CUTOFF: f64 = -38.0;

/// All rows of `e^{tQ}`, row-major, from a full eigendecomposition:
/// `P_t(x,y) = sqrt(π(y)/π(x)) Σ_k e^{λ_k t} u_k(x) u_k(y)`.
pub fn transient_rows_spectral(chain: &Chain, spectrum: &DenseSpectrum, t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
    }
    let nv = chain.num_states();
    if spectrum.len() != nv {
        return Err(Error::Domain("spectrum does not match the chain".into()));
    }
    let r = spectrum
        .eigenvalues()
        .iter()
        .take_while(|&&l| l * t >= LOG_MODE_CUTOFF)
        .count()
        .max(1);
    let u = spectrum.vectors().columns(0, r);
    let mut w = u.clone_owned();
    for (k, mut col) in w.column_iter_mut().enumerate() {
        col *= (spectrum.eigenvalues()[k] * t).exp();
    }
    let sym: DMatrix<f64> = &w * u.transpose();
    let sqrt_pi: Vec<f64> = chain.pi().iter().map(|p| p.sqrt()).collect();
    // sym is symmetric, so its column-major storage is also row-major
    let mut rows = sym.data.as_vec().clone();
    for x in 0..nv {
        let scale = 1.0 / sqrt_pi[x];
        for (y, v) in rows[x * nv..(x + 1) * nv].iter_mut().enumerate() {
            *v *= scale * sqrt_pi[y];
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ClusterGraph;
    use crate::walk::tv_distance;
    use approx::assert_abs_diff_eq;

    fn two_state() -> Chain {
        Chain::new(ClusterGraph::path(2).unwrap()).unwrap()
    }

    #[test]
    fn poisson_window_mass() {
        for &t in &[0.3, 1.0, 7.5, 120.0, 4000.0] {
            let w = poisson_window(t, 1e-12).unwrap();
            let total: f64 = w.weights.iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-14);
            let mean: f64 = w
                .weights
                .iter()
                .enumerate()
                .map(|(i, p)| (w.left + i) as f64 * p)
                .sum();
            assert_abs_diff_eq!(mean, t, epsilon = 1e-8 * t.max(1.0));
        }
        let w = poisson_window(2.0, 1e-15).unwrap();
        // Pois(2) at k = 3 is 4/3 e^-2
        assert_abs_diff_eq!(w.weight(3), 4.0 / 3.0 * (-2.0f64).exp(), epsilon = 1e-12);
        assert!(poisson_window(-1.0, 1e-10).is_err());
        assert!(poisson_window(1.0, 0.0).is_err());
    }

    #[test]
    fn time_zero_is_identity() {
        let c = Chain::new(ClusterGraph::path(4).unwrap()).unwrap();
        let start = Distribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let out = transient_distribution(&c, &start, 0.0, 1e-10).unwrap();
        assert_eq!(out, start);
    }

    #[test]
    fn two_state_closed_form() {
        let c = two_state();
        for &t in &[0.05, 0.5, 1.0, 3.0] {
            let out = transient_distribution(&c, &Distribution::point_mass(2, 0), t, 1e-13).unwrap();
            let e = (-2.0 * t).exp();
            assert_abs_diff_eq!(out.as_slice()[0], 0.5 * (1.0 + e), epsilon = 1e-12);
            assert_abs_diff_eq!(out.as_slice()[1], 0.5 * (1.0 - e), epsilon = 1e-12);
        }
    }

    #[test]
    fn converges_to_stationarity() {
        let c = Chain::new(ClusterGraph::from_edges(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)]).unwrap()).unwrap();
        let tol = 1e-10;
        let out = transient_distribution(&c, &Distribution::point_mass(5, 4), 200.0, tol).unwrap();
        assert!(tv_distance(&out, &c.stationary()).unwrap() <= 10.0 * tol);
    }

    #[test]
    fn semigroup_property() {
        let c = Chain::new(ClusterGraph::path(6).unwrap()).unwrap();
        let tol = 1e-12;
        let start = Distribution::point_mass(6, 0);
        let direct = transient_distribution(&c, &start, 2.5, tol).unwrap();
        let mid = transient_distribution(&c, &start, 1.0, tol).unwrap();
        let composed = transient_distribution(&c, &mid, 1.5, tol).unwrap();
        assert!(tv_distance(&direct, &composed).unwrap() <= 10.0 * tol);
    }

    #[test]
    fn spectral_rows_match_uniformized() {
        let c = Chain::new(ClusterGraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)]).unwrap())
            .unwrap();
        let spec = DenseSpectrum::compute(&c).unwrap();
        for &t in &[0.0, 0.4, 2.0, 9.0] {
            let a = transient_rows_uniformized(&c, t, 1e-13).unwrap();
            let b = transient_rows_spectral(&c, &spec, t).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-11);
            }
        }
    }
}
