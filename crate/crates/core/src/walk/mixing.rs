//! Total-variation mixing time by bracketing and bisection in `t`.

use serde::{Deserialize, Serialize};

use super::transient::{transient_rows_spectral, transient_rows_uniformized};
use super::{tv_raw, Chain};
use crate::error::{Error, Result};
use crate::spectral::{DenseSpectrum, DENSE_LIMIT};

/// Poisson tail mass neglected by uniformisation.
pub const DEFAULT_POISSON_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixingMode {
    /// `d(t) = max_{x,y} ‖π^t_x - π^t_y‖`.
    PairwiseSup,
    /// `d̄(t) = max_x ‖π^t_x - π‖`, within a factor 2 of `d(t)`.
    FromStationarity,
}

/// How the rows of `e^{tQ}` are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixingEngine {
    /// Spectral expansion when the chain is small enough for a dense
    /// eigensolve, uniformisation otherwise.
    Auto,
    Uniformization,
    Spectral,
}

#[derive(Debug, Clone)]
pub struct MixingOptions {
    pub mode: MixingMode,
    pub engine: MixingEngine,
    /// Bracket width; `None` means `max(1e-3, 1e-3 τ2)`.
    pub resolution: Option<f64>,
    pub poisson_tol: f64,
}

impl Default for MixingOptions {
    fn default() -> Self {
        MixingOptions {
            mode: MixingMode::PairwiseSup,
            engine: MixingEngine::Auto,
            resolution: None,
            poisson_tol: DEFAULT_POISSON_TOL,
        }
    }
}

impl MixingOptions {
    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = Some(resolution);
        self
    }

    pub fn with_mode(mut self, mode: MixingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_engine(mut self, engine: MixingEngine) -> Self {
        self.engine = engine;
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixingResult {
    /// Upper end of the final bracket.
    pub tau1: f64,
    pub mode: MixingMode,
    pub engine: MixingEngine,
    pub t_lo: f64,
    pub t_hi: f64,
    pub d_lo: f64,
    pub d_hi: f64,
    pub resolution: f64,
    pub poisson_tol: f64,
    /// Every evaluated `(t, distance)`, sorted by `t`.
    pub trace: Vec<(f64, f64)>,
}

/// `max_{x,y} ½ Σ_z |R(x,z) - R(y,z)|` over the rows of a row-major
/// `n × n` matrix whose rows are probability vectors.
///
/// Pairs are visited in decreasing order of their distance to `pi` and
/// skipped once `d̄(x) + d̄(y)` cannot beat the best pair found.
pub fn pairwise_distance(rows: &[f64], pi: &[f64]) -> f64 {
    let n = pi.len();
    let row = |x: usize| &rows[x * n..(x + 1) * n];
    let mut order: Vec<(f64, usize)> = (0..n).map(|x| (tv_raw(row(x), pi), x)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best: f64 = 0.0;
    for i in 0..n {
        let (di, x) = order[i];
        if 2.0 * di <= best {
            break;
        }
        for &(dj, y) in &order[i + 1..] {
            if di + dj <= best {
                break;
            }
            best = best.max(tv_raw(row(x), row(y)));
        }
    }
    best.min(1.0)
}

/// `max_x ½ Σ_z |R(x,z) - π(z)|`.
pub fn stationarity_distance(rows: &[f64], pi: &[f64]) -> f64 {
    let n = pi.len();
    rows.chunks(n).map(|r| tv_raw(r, pi)).fold(0.0, f64::max)
}

struct Evaluator<'a> {
    chain: &'a Chain,
    spectrum: Option<&'a DenseSpectrum>,
    mode: MixingMode,
    tol: f64,
    trace: Vec<(f64, f64)>,
}

impl Evaluator<'_> {
    fn distance(&mut self, t: f64) -> Result<f64> {
        let rows = match self.spectrum {
            Some(s) => transient_rows_spectral(self.chain, s, t)?,
            None => transient_rows_uniformized(self.chain, t, self.tol)?,
        };
        let pi = self.chain.pi();
        let d = match self.mode {
            MixingMode::PairwiseSup => pairwise_distance(&rows, pi),
            MixingMode::FromStationarity => stationarity_distance(&rows, pi),
        };
        self.trace.push((t, d));
        Ok(d)
    }
}

/// Bracket the first time the chosen distance falls to `e^{-1}`.
pub fn mixing_time(chain: &Chain, opts: &MixingOptions) -> Result<MixingResult> {
    let spectrum = match opts.engine {
        MixingEngine::Uniformization => None,
        MixingEngine::Spectral => Some(DenseSpectrum::compute(chain)?),
        MixingEngine::Auto if chain.num_states() <= DENSE_LIMIT => Some(DenseSpectrum::compute(chain)?),
        MixingEngine::Auto => None,
    };
    mixing_time_inner(chain, spectrum.as_ref(), opts)
}

/// As [`mixing_time`], reusing an already computed spectrum.
pub fn mixing_time_with_spectrum(chain: &Chain, spectrum: &DenseSpectrum, opts: &MixingOptions) -> Result<MixingResult> {
    mixing_time_inner(chain, Some(spectrum), opts)
}

fn mixing_time_inner(chain: &Chain, spectrum: Option<&DenseSpectrum>, opts: &MixingOptions) -> Result<MixingResult> {
    if !(opts.poisson_tol > 0.0) {
        return Err(Error::Domain(format!("Poisson tolerance must be positive, got {}", opts.poisson_tol)));
    }
    let tau2 = spectrum.map(|s| 1.0 / s.gap());
    let resolution = match opts.resolution {
        Some(r) if r > 0.0 && r.is_finite() => r,
        Some(r) => return Err(Error::Domain(format!("resolution must be positive, got {r}"))),
        None => tau2.map_or(1e-3, |t2| (1e-3 * t2).max(1e-3)),
    };
    let target = (-1.0f64).exp();
    let nv = chain.num_states() as f64;
    let t_max = 100.0 * nv * nv;
    let mut eval = Evaluator {
        chain,
        spectrum,
        mode: opts.mode,
        tol: opts.poisson_tol,
        trace: Vec::new(),
    };

    // at t = 0 the laws are point masses
    let mut t_lo = 0.0;
    let mut d_lo = match opts.mode {
        MixingMode::PairwiseSup => 1.0,
        MixingMode::FromStationarity => 1.0 - chain.pi_min(),
    };
    eval.trace.push((0.0, d_lo));

    let mut t = match (opts.mode, tau2) {
        (MixingMode::PairwiseSup, Some(t2)) => t2,
        (MixingMode::FromStationarity, Some(t2)) => 0.5 * t2,
        (_, None) => 1.0,
    };
    let (mut t_hi, mut d_hi);
    loop {
        let d = eval.distance(t)?;
        if d <= target {
            t_hi = t;
            d_hi = d;
            break;
        }
        t_lo = t;
        d_lo = d;
        if t >= t_max {
            return Err(Error::MixingNonConvergence {
                t_max,
                last_distance: d,
            });
        }
        t = (2.0 * t).min(t_max);
    }
    while t_hi - t_lo > resolution {
        let mid = 0.5 * (t_lo + t_hi);
        let d = eval.distance(mid)?;
        if d <= target {
            t_hi = mid;
            d_hi = d;
        } else {
            t_lo = mid;
            d_lo = d;
        }
    }
    let mut trace = eval.trace;
    trace.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(MixingResult {
        tau1: t_hi,
        mode: opts.mode,
        engine: if spectrum.is_some() {
            MixingEngine::Spectral
        } else {
            MixingEngine::Uniformization
        },
        t_lo,
        t_hi,
        d_lo,
        d_hi,
        resolution,
        poisson_tol: opts.poisson_tol,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ClusterGraph;
    use crate::walk::transient_distribution;
    use crate::walk::{tv_distance, Distribution};
    use approx::assert_abs_diff_eq;

    fn chain(g: ClusterGraph) -> Chain {
        Chain::new(g).unwrap()
    }

    fn brute_pairwise(rows: &[f64], n: usize) -> f64 {
        let mut best: f64 = 0.0;
        for x in 0..n {
            for y in 0..n {
                best = best.max(tv_raw(&rows[x * n..(x + 1) * n], &rows[y * n..(y + 1) * n]));
            }
        }
        best
    }

    #[test]
    fn two_state_tau1() {
        let c = chain(ClusterGraph::path(2).unwrap());
        for engine in [MixingEngine::Uniformization, MixingEngine::Spectral] {
            let opts = MixingOptions::default().with_engine(engine).with_resolution(1e-4);
            let r = mixing_time(&c, &opts).unwrap();
            assert!((r.tau1 - 0.5).abs() <= 1e-4, "{engine:?}: {}", r.tau1);
            assert!(r.t_lo < r.tau1 && r.tau1 <= r.t_hi);
            assert!(r.t_hi - r.t_lo <= 1e-4);
            assert!(r.d_lo > (-1.0f64).exp() && r.d_hi <= (-1.0f64).exp());
        }
    }

    #[test]
    fn four_cycle_tau1() {
        let c = chain(ClusterGraph::cycle(4).unwrap());
        for engine in [MixingEngine::Uniformization, MixingEngine::Spectral] {
            let opts = MixingOptions::default().with_engine(engine).with_resolution(1e-4);
            let r = mixing_time(&c, &opts).unwrap();
            assert!((r.tau1 - 1.0).abs() <= 1e-4, "{engine:?}: {}", r.tau1);
        }
    }

    #[test]
    fn default_resolution_follows_tau2() {
        let c = chain(ClusterGraph::path(12).unwrap());
        let r = mixing_time(&c, &MixingOptions::default()).unwrap();
        let tau2 = 1.0 / DenseSpectrum::compute(&c).unwrap().gap();
        assert_abs_diff_eq!(r.resolution, 1e-3 * tau2, epsilon = 1e-12);
        assert!(r.t_hi - r.t_lo <= r.resolution);
    }

    #[test]
    fn pruned_pairwise_matches_brute_force() {
        let c = chain(ClusterGraph::from_edges(7, &[(0, 1), (1, 2), (2, 3), (3, 4), (2, 5), (5, 6), (6, 0)]).unwrap());
        for &t in &[0.0, 0.3, 1.7, 6.0, 25.0] {
            let rows = transient_rows_uniformized(&c, t, 1e-12).unwrap();
            assert_abs_diff_eq!(pairwise_distance(&rows, c.pi()), brute_pairwise(&rows, 7), epsilon = 1e-15);
        }
    }

    #[test]
    fn pairwise_within_factor_two_of_stationarity() {
        let c = chain(ClusterGraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 4)]).unwrap());
        for &t in &[0.1, 0.8, 2.0, 5.0, 12.0] {
            let rows = transient_rows_uniformized(&c, t, 1e-12).unwrap();
            let d = pairwise_distance(&rows, c.pi());
            let dbar = stationarity_distance(&rows, c.pi());
            assert!(dbar <= d + 1e-12 && d <= 2.0 * dbar + 1e-12, "t={t}: {dbar} {d}");
        }
        let pair = mixing_time(&c, &MixingOptions::default()).unwrap();
        let stat = mixing_time(&c, &MixingOptions::default().with_mode(MixingMode::FromStationarity)).unwrap();
        assert!(stat.tau1 <= pair.tau1 + pair.resolution);
    }

    #[test]
    fn trace_is_monotone() {
        let c = chain(ClusterGraph::path(9).unwrap());
        for mode in [MixingMode::PairwiseSup, MixingMode::FromStationarity] {
            let r = mixing_time(&c, &MixingOptions::default().with_mode(mode)).unwrap();
            assert!(r.trace.len() > 3);
            for w in r.trace.windows(2) {
                assert!(w[1].1 <= w[0].1 + 1e-12, "{mode:?}: {w:?}");
            }
        }
    }

    #[test]
    fn rows_agree_with_single_start_sweeps() {
        let c = chain(ClusterGraph::cycle(5).unwrap());
        let rows = transient_rows_uniformized(&c, 1.3, 1e-12).unwrap();
        for x in 0..5 {
            let single = transient_distribution(&c, &Distribution::point_mass(5, x), 1.3, 1e-12).unwrap();
            let row = Distribution::new(rows[x * 5..(x + 1) * 5].to_vec()).unwrap();
            assert!(tv_distance(&single, &row).unwrap() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_resolution() {
        let c = chain(ClusterGraph::path(2).unwrap());
        assert!(mixing_time(&c, &MixingOptions::default().with_resolution(0.0)).is_err());
        assert!(mixing_time(&c, &MixingOptions::default().with_resolution(-1.0)).is_err());
    }
}
