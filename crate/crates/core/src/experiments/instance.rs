//! Evaluation of one `(n, seed)` instance.

use super::{Certification, ExperimentConfig, Quantity, Row};
use crate::conductance::{
    cheeger_exact, envelope, lk_bound, profile_exact, profile_upper_box, sweep_cut, window_cuts, Cheeger,
    ConductanceProfile, EXHAUSTIVE_CAP,
};
use crate::error::{Error, Result};
use crate::geometry::{classify_good_vertices, fpp_regression, FppOptions};
use crate::lattice::{BoxGraph, BoxSpec};
use crate::percolation::{cluster_census, largest_cluster, BondConfig};
use crate::spectral::{
    distance_variance_lower_bound, distance_variance_sampled, sandwich_check, spectral_gap_with, variance_sources,
    DenseSpectrum, SpectralMethod, SpectralResult, DENSE_LIMIT,
};
use crate::walk::{mixing_time, mixing_time_with_spectrum, Chain, MixingMode, MixingOptions};

/// Above this many states the distance variance uses sampled sources.
const VARIANCE_FULL_LIMIT: usize = 10_000;

/// Relative slack for floating-point inequality checks.
const CHECK_RTOL: f64 = 1e-9;

struct Emitter<'a> {
    config: &'a ExperimentConfig,
    n: u32,
    seed: u64,
    rows: Vec<Row>,
}

impl Emitter<'_> {
    fn push(&mut self, quantity: &str, value: f64, certification: Certification, detail: String) {
        self.rows.push(Row {
            d: self.config.d,
            p: self.config.p,
            n: self.n,
            seed: self.seed,
            quantity: quantity.to_string(),
            value,
            certification,
            detail,
        });
    }

    fn error(&mut self, quantity: &str, e: &Error) {
        self.push(quantity, f64::NAN, Certification::Error, e.to_string());
    }

    fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.push(name, if ok { 1.0 } else { 0.0 }, Certification::Exact, detail);
    }

    fn wants(&self, q: Quantity) -> bool {
        self.config.quantities.contains(&q)
    }
}

/// All rows for one instance; failures become rows with error
/// certification.
pub fn analyze_instance(config: &ExperimentConfig, n: u32, seed: u64) -> Vec<Row> {
    let mut out = Emitter {
        config,
        n,
        seed,
        rows: Vec::new(),
    };
    let spec = BoxSpec::new(config.d, n);
    let setup = BoxGraph::build(spec).and_then(|b| BondConfig::sample(spec, config.p, seed).map(|c| (b, c)));
    let (boxg, bond) = match setup {
        Ok(x) => x,
        Err(e) => {
            for q in &config.quantities {
                out.error(q.name(), &e);
            }
            return out.rows;
        }
    };

    if out.wants(Quantity::Census) {
        match cluster_census(&boxg, &bond) {
            Ok(c) => {
                let detail = format!("components={};largest_edges={}", c.components.len(), c.largest().edges);
                out.push("census-vertex-fraction", c.largest_vertex_fraction, Certification::Exact, detail.clone());
                out.push("census-edge-density", c.largest_edge_density, Certification::Exact, detail.clone());
                out.push("census-second-ratio", c.second_to_largest, Certification::Exact, detail);
            }
            Err(e) => out.error("census", &e),
        }
    }
    if out.wants(Quantity::Fpp) {
        let opts = FppOptions {
            pairs: config.fpp_pairs,
            seed,
            ..Default::default()
        };
        match fpp_regression(&bond, &opts) {
            Ok(probe) => {
                let detail = format!(
                    "pairs={};l1=[{},{}];intercept={}",
                    probe.pairs.len(),
                    opts.min_l1,
                    opts.max_l1,
                    probe.fit.intercept
                );
                out.push("fpp-slope", probe.fit.slope, Certification::Heuristic, detail.clone());
                out.push("fpp-r2", probe.fit.r2, Certification::Heuristic, detail);
            }
            Err(e) => out.error("fpp", &e),
        }
    }
    if out.wants(Quantity::Renorm) {
        for &block in &config.renorm_blocks {
            let name = format!("renorm-density-N{block}");
            match classify_good_vertices(&bond, block) {
                Ok(field) => match field.density() {
                    Some(dens) => {
                        let detail = format!("good={};classified={}", field.good(), field.classified());
                        out.push(&name, dens, Certification::Exact, detail);
                    }
                    None => out.error(
                        &name,
                        &Error::Domain(format!("no interior renormalised sites at N = {block}")),
                    ),
                },
                Err(e) => out.error(&name, &e),
            }
        }
    }

    let chain_quantities = [
        Quantity::Tau1,
        Quantity::Tau2,
        Quantity::PhiUpper,
        Quantity::Lk,
        Quantity::VarLower,
    ];
    let wanted: Vec<Quantity> = chain_quantities.into_iter().filter(|&q| out.wants(q)).collect();
    if wanted.is_empty() {
        return out.rows;
    }
    let chain = match largest_cluster(&boxg, &bond).and_then(Chain::new) {
        Ok(c) => c,
        Err(e) => {
            for q in wanted {
                out.error(q.name(), &e);
            }
            return out.rows;
        }
    };
    chain_rows(&mut out, &chain, &bond);
    out.rows
}

fn chain_rows(out: &mut Emitter<'_>, chain: &Chain, bond: &BondConfig) {
    let config = out.config;
    let nv = chain.num_states();
    let size = format!("V={};E={}", nv, chain.graph().num_edges());

    let (dense, spectral) = if nv <= DENSE_LIMIT {
        match DenseSpectrum::compute(chain) {
            Ok(s) => {
                let r = SpectralResult::from_dense(chain, &s);
                (Some(s), Ok(r))
            }
            Err(e) => (None, Err(e)),
        }
    } else {
        (None, spectral_gap_with(chain, config.eig_rtol, SpectralMethod::Iterative))
    };
    let spectral = match spectral {
        Ok(s) => Some(s),
        Err(e) => {
            for q in [Quantity::Tau1, Quantity::Tau2, Quantity::VarLower] {
                if out.wants(q) {
                    out.error(q.name(), &e);
                }
            }
            None
        }
    };
    if let (true, Some(s)) = (out.wants(Quantity::Tau2), &spectral) {
        let method = match s.method {
            SpectralMethod::Dense => "dense",
            SpectralMethod::Iterative => "iterative",
        };
        let detail = format!("{size};method={method};residual={:e}", s.residual);
        out.push("tau2", s.tau2, Certification::Exact, detail);
    }

    // mixing time; pairwise only while all transient rows fit
    let mut tau1_exact: Option<f64> = None;
    if let (true, Some(_)) = (out.wants(Quantity::Tau1), &spectral) {
        let mode = if nv > DENSE_LIMIT {
            MixingMode::FromStationarity
        } else {
            config.mode
        };
        let opts = MixingOptions {
            mode,
            resolution: config.resolution,
            poisson_tol: config.poisson_tol,
            ..Default::default()
        };
        let res = match &dense {
            Some(s) => mixing_time_with_spectrum(chain, s, &opts),
            None => mixing_time(chain, &opts),
        };
        match res {
            Ok(m) => {
                let cert = if mode == MixingMode::PairwiseSup {
                    tau1_exact = Some(m.tau1);
                    Certification::Exact
                } else {
                    Certification::Heuristic
                };
                let detail = format!(
                    "{size};mode={};t_lo={};t_hi={};resolution={}",
                    match mode {
                        MixingMode::PairwiseSup => "pairwise-sup",
                        MixingMode::FromStationarity => "from-stationarity",
                    },
                    m.t_lo,
                    m.t_hi,
                    m.resolution
                );
                out.push("tau1", m.tau1, cert, detail);
            }
            Err(e) => out.error("tau1", &e),
        }
    }

    let needs_cuts = out.wants(Quantity::PhiUpper) || out.wants(Quantity::Lk);
    let enumerable = nv <= EXHAUSTIVE_CAP;
    let cheeger: Option<Cheeger> = if enumerable && needs_cuts {
        cheeger_exact(chain).ok()
    } else {
        None
    };
    let exact_profile: Option<ConductanceProfile> = if enumerable && needs_cuts {
        profile_exact(chain).ok()
    } else {
        None
    };
    // every cut value evaluated on this instance, for the gap check
    let mut min_cut: Option<f64> = cheeger.as_ref().map(|c| c.phi);
    let mut upper_profile: Option<ConductanceProfile> = None;
    if needs_cuts {
        match window_cuts(chain, bond) {
            Ok(cuts) => {
                for w in &cuts {
                    for c in std::iter::once(&w.cut).chain(&w.surgery) {
                        min_cut = Some(min_cut.map_or(c.phi(), |m: f64| m.min(c.phi())));
                    }
                }
                match envelope(&cuts) {
                    Ok(p) => upper_profile = Some(p),
                    Err(e) => out.error("phi-upper", &e),
                }
            }
            Err(e) => out.error("phi-upper", &e),
        }
    }
    if out.wants(Quantity::PhiUpper) {
        let window = upper_profile.as_ref().and_then(|p| p.value_at(0.5));
        let sweep = spectral.as_ref().and_then(|s| sweep_cut(chain, s).ok());
        if let Some(c) = &sweep {
            min_cut = Some(min_cut.map_or(c.phi(), |m| m.min(c.phi())));
        }
        let best = [window, sweep.as_ref().map(|c| c.phi())]
            .into_iter()
            .flatten()
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
        match best {
            Some(v) => {
                let detail = format!(
                    "{size};window={};sweep={}",
                    window.map_or("none".into(), |w| w.to_string()),
                    sweep.as_ref().map_or("none".into(), |c| c.phi().to_string())
                );
                out.push("phi-upper", v, Certification::UpperBound, detail);
            }
            None => out.error("phi-upper", &Error::Domain("no cut evaluated".into())),
        }
        if let Some(c) = &cheeger {
            let detail = format!("{size};witness_size={}", c.witness.set.len());
            out.push("phi-upper-exact", c.phi, Certification::Exact, detail);
        }
    }

    let mut lk_exact: Option<f64> = None;
    if out.wants(Quantity::Lk) {
        let pi_min = chain.pi_min();
        let res = match (&exact_profile, &upper_profile) {
            (Some(p), _) => lk_bound(p, pi_min, false),
            (None, Some(p)) => lk_bound(p, pi_min, true),
            (None, None) => Err(Error::Domain("no conductance profile".into())),
        };
        match res {
            Ok(b) => {
                let cert = if b.rigorous {
                    lk_exact = Some(b.value);
                    Certification::Exact
                } else {
                    Certification::Heuristic
                };
                let profile = if b.rigorous { "exact" } else { "window-envelope" };
                out.push("lk", b.value, cert, format!("{size};profile={profile}"));
            }
            Err(e) => out.error("lk", &e),
        }
    }

    let mut var_exact: Option<f64> = None;
    if let (true, Some(_)) = (out.wants(Quantity::VarLower), &spectral) {
        if nv <= VARIANCE_FULL_LIMIT {
            let v = distance_variance_lower_bound(chain);
            var_exact = Some(v.value);
            out.push("var-lower", v.value, Certification::Exact, format!("{size};source={}", v.source));
        } else {
            let v = distance_variance_sampled(chain, &variance_sources(chain, 16));
            out.push(
                "var-lower",
                v.value,
                Certification::Heuristic,
                format!("{size};source={};sampled-sources", v.source),
            );
        }
    }

    // inequality suite over whatever exact inputs exist
    let Some(s) = &spectral else { return };
    if let Some(tau1) = tau1_exact {
        match sandwich_check(tau1, s, chain.pi_min()) {
            Ok(r) => out.check(
                "check-sandwich",
                true,
                format!("lower_slack={};upper_slack={}", r.lower_slack, r.upper_slack),
            ),
            Err(e) => out.check("check-sandwich", false, e.to_string()),
        }
    }
    if let Some(c) = &cheeger {
        let rhs = 8.0 / (c.phi * c.phi);
        out.check(
            "check-cheeger",
            s.tau2 <= rhs * (1.0 + CHECK_RTOL),
            format!("tau2={};bound={rhs}", s.tau2),
        );
    }
    if let Some(v) = var_exact {
        out.check(
            "check-var-lower",
            v <= s.tau2 * (1.0 + 1e-8),
            format!("var={v};tau2={}", s.tau2),
        );
    }
    if let Some(m) = min_cut {
        out.check(
            "check-gap-phi",
            s.gap <= m * (1.0 + CHECK_RTOL),
            format!("gap={};min_phi={m}", s.gap),
        );
    }
    if let (Some(tau1), Some(lk)) = (tau1_exact, lk_exact) {
        out.check("check-lk", tau1 <= lk * (1.0 + CHECK_RTOL), format!("tau1={tau1};lk={lk}"));
    }
}

/// Conductance profile of one instance: exact when the cluster is small
/// enough to enumerate, the window envelope otherwise.
#[derive(Debug, Clone)]
pub struct InstanceProfile {
    pub profile: ConductanceProfile,
    pub states: usize,
    pub pi_min: f64,
}

pub fn instance_profile(d: usize, n: u32, p: f64, seed: u64) -> Result<InstanceProfile> {
    let spec = BoxSpec::new(d, n);
    let boxg = BoxGraph::build(spec)?;
    let bond = BondConfig::sample(spec, p, seed)?;
    let chain = Chain::new(largest_cluster(&boxg, &bond)?)?;
    let profile = if chain.num_states() <= EXHAUSTIVE_CAP {
        profile_exact(&chain)?
    } else {
        profile_upper_box(&chain, &bond)?
    };
    Ok(InstanceProfile {
        profile,
        states: chain.num_states(),
        pi_min: chain.pi_min(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(quantities: Vec<Quantity>) -> ExperimentConfig {
        ExperimentConfig {
            n_list: vec![2, 3, 4],
            seeds: vec![0, 1],
            quantities,
            ..ExperimentConfig::preset()
        }
    }

    #[test]
    fn small_instance_rows_and_checks() {
        let cfg = config(ExperimentConfig::preset().quantities);
        for seed in 0..6 {
            let rows = analyze_instance(&cfg, 2, seed);
            let names: Vec<&str> = rows.iter().map(|r| r.quantity.as_str()).collect();
            for q in ["tau1", "tau2", "phi-upper", "lk", "var-lower", "check-sandwich", "check-gap-phi"] {
                assert!(names.contains(&q), "seed {seed}: missing {q} in {names:?}");
            }
            for r in &rows {
                assert_ne!(r.certification, Certification::Error, "{r:?}");
                if r.is_check() {
                    assert_eq!(r.value, 1.0, "{r:?}");
                }
            }
            let get = |q: &str| rows.iter().find(|r| r.quantity == q).unwrap().value;
            assert!(get("var-lower") <= get("tau2") * (1.0 + 1e-8));
            assert!(get("tau2") <= get("tau1") * (1.0 + 1e-9));
        }
    }

    #[test]
    fn enumerable_instance_reports_exact_cheeger() {
        // B_2(1) at p = 1: 9 states, fully enumerable
        let cfg = ExperimentConfig {
            p: 1.0,
            ..config(vec![Quantity::PhiUpper, Quantity::Lk, Quantity::Tau2])
        };
        let rows = analyze_instance(&cfg, 1, 0);
        let exact = rows.iter().find(|r| r.quantity == "phi-upper-exact").unwrap();
        let upper = rows.iter().find(|r| r.quantity == "phi-upper").unwrap();
        assert!(exact.value <= upper.value + 1e-12);
        let lk = rows.iter().find(|r| r.quantity == "lk").unwrap();
        assert_eq!(lk.certification, Certification::Exact);
        assert!(rows.iter().any(|r| r.quantity == "check-cheeger" && r.value == 1.0));
    }

    #[test]
    fn geometry_rows() {
        let cfg = ExperimentConfig {
            fpp_pairs: 20,
            ..config(vec![Quantity::Census, Quantity::Fpp, Quantity::Renorm])
        };
        let rows = analyze_instance(&cfg, 20, 4);
        let names: Vec<&str> = rows.iter().map(|r| r.quantity.as_str()).collect();
        assert_eq!(
            names,
            [
                "census-vertex-fraction",
                "census-edge-density",
                "census-second-ratio",
                "fpp-slope",
                "fpp-r2",
                "renorm-density-N8"
            ]
        );
        assert!(rows.iter().all(|r| r.certification != Certification::Error));
    }

    #[test]
    fn fpp_in_three_dimensions_is_an_error_row() {
        let cfg = ExperimentConfig {
            d: 3,
            ..config(vec![Quantity::Fpp, Quantity::Tau2])
        };
        let rows = analyze_instance(&cfg, 2, 0);
        let fpp = rows.iter().find(|r| r.quantity == "fpp").unwrap();
        assert_eq!(fpp.certification, Certification::Error);
        assert!(fpp.value.is_nan());
        assert!(rows.iter().any(|r| r.quantity == "tau2" && r.certification == Certification::Exact));
    }

    #[test]
    fn profile_of_small_instance_is_exact() {
        let p = instance_profile(2, 1, 1.0, 0).unwrap();
        assert_eq!(p.states, 9);
        assert!(p.profile.is_exact());
    }
}
