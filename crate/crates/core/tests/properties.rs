use proptest::prelude::*;

use apltune::generators::{watts_strogatz, WsConfig};
use apltune::graph::{clustering_stats, path_stats};
use apltune::majority::{flip_probability, is_majority, simulate, MajorityConfig};
use apltune::seeds::rng_from_seed;
use apltune::tuner::{apply_move, propose_move, revert_move, tune_apl, AnnealConfig};

fn ws() -> impl Strategy<Value = WsConfig> {
    (30usize..120, 1usize..4, 0.0f64..1.0, any::<u64>())
        .prop_filter("lattice needs n > 4k", |(n, k, _, _)| *n > 4 * k)
        .prop_map(|(n, k, p, seed)| WsConfig { n, k, p, seed })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_graphs_are_simple_and_connected(cfg in ws()) {
        if let Ok(g) = watts_strogatz(&cfg) {
            g.check_invariants().unwrap();
            prop_assert!(g.is_connected());
            prop_assert_eq!(g.n_edges(), cfg.n * cfg.k);
        }
    }

    #[test]
    fn apply_then_revert_is_identity(cfg in ws(), seed in any::<u64>()) {
        let Ok(g) = watts_strogatz(&cfg) else { return Ok(()); };
        let mut rng = rng_from_seed(seed);
        if let Some(m) = propose_move(&g, &mut rng, 20 * cfg.n) {
            let mut h = g.clone();
            apply_move(&mut h, &m).unwrap();
            prop_assert_eq!(h.degrees(), g.degrees());
            prop_assert_eq!(
                clustering_stats(&h).per_node_triangles,
                clustering_stats(&g).per_node_triangles
            );
            revert_move(&mut h, &m).unwrap();
            prop_assert_eq!(h, g);
        }
    }

    #[test]
    fn short_tuning_runs_preserve_invariants(cfg in ws(), seed in any::<u64>(), factor in 0.8f64..1.3) {
        let Ok(g) = watts_strogatz(&cfg) else { return Ok(()); };
        let l0 = path_stats(&g).unwrap().apl;
        let anneal = AnnealConfig {
            target_apl: factor * l0,
            max_proposals: 200,
            plateau_window: 100,
            seed,
            ..Default::default()
        };
        let r = tune_apl(g.clone(), &anneal).unwrap();
        prop_assert!(r.graph.is_connected());
        prop_assert_eq!(r.graph.degrees(), g.degrees());
        prop_assert_eq!(
            clustering_stats(&r.graph).per_node_triangles,
            clustering_stats(&g).per_node_triangles
        );
        prop_assert_eq!(r.apl, path_stats(&r.graph).unwrap().apl);
        prop_assert!(r.trace.len() as u64 <= anneal.max_proposals);
    }

    #[test]
    fn density_stays_in_unit_interval(cfg in ws(), d0 in 0.0f64..=1.0, eps in 0.01f64..0.49, seed in any::<u64>()) {
        let Ok(g) = watts_strogatz(&cfg) else { return Ok(()); };
        let m = MajorityConfig { epsilon: eps, d0, steps: 20, seed, ..Default::default() };
        let t = simulate(&g, &m).unwrap();
        let expected = (d0 * cfg.n as f64).round() / cfg.n as f64;
        prop_assert_eq!(t.densities[0], expected);
        prop_assert!(t.densities.iter().all(|d| (0.0..=1.0).contains(d)));
    }

    #[test]
    fn flip_probabilities_are_complementary(k in 0usize..40, eps in 0.001f64..0.499) {
        for sigma in 1..=k + 1 {
            let on = flip_probability(true, sigma, k, eps);
            let off = flip_probability(false, sigma, k, eps);
            if is_majority(sigma, k) {
                prop_assert!((on + off - 1.0).abs() < 1e-15);
                prop_assert_eq!(on, eps);
            } else {
                prop_assert_eq!(on, 1.0 - eps);
                prop_assert_eq!(off, eps);
            }
        }
        prop_assert_eq!(flip_probability(false, 0, k, eps), 0.0);
    }
}
