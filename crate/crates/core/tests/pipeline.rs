use apltune::generators::{ring_lattice, watts_strogatz, WsConfig};
use apltune::graph::edgelist::{parse_edge_list, read_edge_list, to_edge_list_string};
use apltune::graph::{clustering_stats, path_stats, sampled_apl};
use apltune::majority::{simulate, simulate_from, MajorityConfig, StateVector, UpdateScheme};
use apltune::tuner::{tune_apl, AnnealConfig, AplMode, StopReason};

#[test]
fn edge_list_round_trip_preserves_measurements() {
    let g = watts_strogatz(&WsConfig {
        n: 400,
        k: 3,
        p: 0.2,
        seed: 21,
    })
    .unwrap();
    let text = to_edge_list_string(&g);
    let back = read_edge_list(text.as_bytes()).unwrap();
    assert_eq!(back, g);
    assert_eq!(path_stats(&back).unwrap(), path_stats(&g).unwrap());
    assert_eq!(clustering_stats(&back), clustering_stats(&g));
    assert_eq!(to_edge_list_string(&back), text);
}

#[test]
fn edge_list_rejects_malformed_input() {
    for bad in [
        "3 1\n0 0\n",
        "3 2\n0 1\n",
        "3 1\n1 0\n",
        "3 2\n0 2\n0 1\n",
        "3 1\n0 3\n",
        "3 1\n0  1\n",
        "x\n",
        "",
    ] {
        assert!(parse_edge_list(bad).is_err(), "accepted {bad:?}");
    }
}

#[test]
fn tuning_up_and_down_keeps_local_structure() {
    let g = watts_strogatz(&WsConfig {
        n: 300,
        k: 3,
        p: 0.1,
        seed: 2,
    })
    .unwrap();
    let l0 = path_stats(&g).unwrap().apl;
    let degrees = g.degrees();
    let triangles = clustering_stats(&g).per_node_triangles;
    for factor in [1.1, 0.95] {
        let cfg = AnnealConfig {
            target_apl: factor * l0,
            tolerance: 0.01,
            seed: 8,
            ..Default::default()
        };
        let r = tune_apl(g.clone(), &cfg).unwrap();
        assert_eq!(r.stop, StopReason::Converged, "factor {factor}");
        let stats = path_stats(&r.graph).unwrap();
        assert!((stats.apl - cfg.target_apl).abs() <= cfg.tolerance);
        assert_eq!(stats.apl, r.apl);
        assert_eq!(r.graph.degrees(), degrees);
        assert_eq!(clustering_stats(&r.graph).per_node_triangles, triangles);
        assert!(r.graph.is_connected());
    }
}

#[test]
fn sampled_mode_tracks_the_exact_value() {
    let g = watts_strogatz(&WsConfig {
        n: 600,
        k: 3,
        p: 0.1,
        seed: 4,
    })
    .unwrap();
    let l0 = path_stats(&g).unwrap().apl;
    let cfg = AnnealConfig {
        target_apl: 1.1 * l0,
        tolerance: 0.02,
        seed: 1,
        apl_mode: AplMode::Sampled(64),
        ..Default::default()
    };
    let r = tune_apl(g, &cfg).unwrap();
    let exact = path_stats(&r.graph).unwrap().apl;
    assert!(
        (exact - cfg.target_apl).abs() < 0.1 * l0,
        "exact {exact}, target {}",
        cfg.target_apl
    );
    let all: Vec<usize> = (0..600).collect();
    assert_eq!(sampled_apl(&r.graph, &all).unwrap(), exact);
}

#[test]
fn majority_on_generated_graphs() {
    let g = watts_strogatz(&WsConfig {
        n: 1000,
        k: 3,
        p: 0.25,
        seed: 0,
    })
    .unwrap();
    for scheme in [UpdateScheme::Synchronous, UpdateScheme::Asynchronous] {
        let zero = simulate_from(
            &g,
            StateVector::all_inactive(1000),
            &MajorityConfig {
                steps: 200,
                scheme,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(zero.densities.iter().all(|&d| d == 0.0));

        let cfg = MajorityConfig {
            d0: 0.3,
            steps: 100,
            scheme,
            seed: 5,
            ..Default::default()
        };
        let a = simulate(&g, &cfg).unwrap();
        assert_eq!(a, simulate(&g, &cfg).unwrap());
        assert_eq!(a.densities[0], 0.3);
        assert_eq!(a.len(), 101);
        assert!(a.densities.iter().all(|d| (0.0..=1.0).contains(d)));
    }
}

#[test]
fn identical_adjacency_gives_identical_traces() {
    let a = ring_lattice(200, 3).unwrap();
    let b = parse_edge_list(&to_edge_list_string(&a)).unwrap();
    let cfg = MajorityConfig {
        d0: 0.7,
        steps: 80,
        seed: 12,
        ..Default::default()
    };
    assert_eq!(simulate(&a, &cfg).unwrap(), simulate(&b, &cfg).unwrap());
}
