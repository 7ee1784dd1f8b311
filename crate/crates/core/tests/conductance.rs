mod common;

use num_rational::Ratio;
use proptest::prelude::*;

use percmix::conductance::{
    cheeger_exact, lk_bound, profile_exact, profile_upper_box, set_conductance, small_set_floor, sweep_cut,
};
use percmix::graph::ClusterGraph;
use percmix::spectral::spectral_gap;
use percmix::stats::linear_fit;
use percmix::walk::{mixing_time, Chain, MixingOptions};

fn small_cluster(max_states: usize) -> impl Strategy<Value = (Chain, percmix::percolation::BondConfig)> {
    (any::<u64>(), 0.4f64..0.9, 1u32..3).prop_filter_map("cluster size", move |(seed, p, n)| {
        let (chain, cfg) = common::cluster_chain(2, n, p, seed)?;
        (2..=max_states).contains(&chain.num_states()).then_some((chain, cfg))
    })
}

#[test]
fn exact_profile_matches_brute_force_at_breakpoints() {
    let fixtures = [
        ClusterGraph::cycle(6).unwrap(),
        ClusterGraph::path(7).unwrap(),
        ClusterGraph::complete(5).unwrap(),
    ];
    for g in fixtures {
        let chain = Chain::new(g.clone()).unwrap();
        let profile = profile_exact(&chain).unwrap();
        let total = g.degree_sum();
        for x in 1..=total / 2 {
            let x = Ratio::new(x, total);
            let want = common::brute_force_profile_at(&g, x);
            let got = profile.value_at(*x.numer() as f64 / *x.denom() as f64);
            match (want, got) {
                (Some(w), Some(v)) => assert!((v - *w.numer() as f64 / *w.denom() as f64).abs() < 1e-12),
                (None, None) => {}
                other => panic!("mismatch at {x}: {other:?}"),
            }
        }
    }
}

#[test]
fn envelope_slope_in_mass_at_fixed_n() {
    for seed in 0..2 {
        let (chain, cfg) = common::cluster_chain(2, 32, 0.7, seed).unwrap();
        let upper = profile_upper_box(&chain, &cfg).unwrap();
        let xs: Vec<f64> = upper.points().iter().map(|p| p.x.ln()).collect();
        let ys: Vec<f64> = upper.points().iter().map(|p| p.phi.ln()).collect();
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!((fit.slope + 0.5).abs() <= 0.2, "seed {seed}: slope {}", fit.slope);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cheeger_witness_is_optimal_and_connected((chain, _) in small_cluster(16)) {
        let c = cheeger_exact(&chain).unwrap();
        let g = chain.graph();
        let want = common::brute_force_profile_at(g, Ratio::new(1, 2)).unwrap();
        prop_assert_eq!(c.phi_exact, want);
        prop_assert!(c.witness.a_connected && c.witness.complement_connected);
        prop_assert!(2 * c.witness.volume <= c.witness.total);
    }

    #[test]
    fn floor_and_envelope_bracket_exact_profile((chain, cfg) in small_cluster(18)) {
        let exact = profile_exact(&chain).unwrap();
        for p in exact.points() {
            prop_assert!(small_set_floor(&chain, p.x).unwrap() <= p.phi * (1.0 + 1e-12));
        }
        for p in profile_upper_box(&chain, &cfg).unwrap().points() {
            prop_assert!(exact.value_at(p.x).unwrap() <= p.phi + 1e-12);
        }
    }

    #[test]
    fn gap_is_below_every_cut((chain, _) in small_cluster(22), picks in prop::collection::vec(any::<u32>(), 1..8)) {
        let s = spectral_gap(&chain, 1e-12).unwrap();
        let nv = chain.num_states() as u32;
        let mut set: Vec<u32> = picks.iter().map(|p| p % nv).collect();
        set.sort_unstable();
        set.dedup();
        if set.len() < nv as usize {
            let cut = set_conductance(&chain, &set).unwrap();
            prop_assert!(s.gap <= cut.phi() * (1.0 + 1e-9));
        }
        let sweep = sweep_cut(&chain, &s).unwrap();
        prop_assert!(sweep.phi() >= cheeger_exact(&chain).unwrap().phi - 1e-12);
        prop_assert!(s.tau2 <= 8.0 / cheeger_exact(&chain).unwrap().phi.powi(2));
    }

    #[test]
    fn lk_dominates_mixing_time((chain, _) in small_cluster(22)) {
        prop_assume!(chain.num_states() >= 3);
        let profile = profile_exact(&chain).unwrap();
        let lk = lk_bound(&profile, chain.pi_min(), false).unwrap();
        prop_assert!(lk.rigorous);
        let m = mixing_time(&chain, &MixingOptions::default()).unwrap();
        prop_assert!(m.tau1 <= lk.value);
    }
}
