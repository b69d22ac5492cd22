use overlap_pack::alpha::{build_predicate, validate_well_conditioned, AlphaSpec, OverlapPredicate, Verdict};
use overlap_pack::gen::{self, AlphaKind, AlphaParams};
use overlap_pack::graph::{
    enumerate_pi_subgraphs, graph_distance_matrix, is_isomorphic, reduce_to_set_instance, Graph, GraphInstance, PiSpec,
};
use overlap_pack::instance::{ElementSet, SetFamily, SetSystemInstance, Universe};
use overlap_pack::pch::{solve_pch, wrap_alpha_pch, ClusterHeads, PchConfig};
use petgraph::graph::UnGraph;
use proptest::prelude::*;
use rand::Rng;

fn to_petgraph(g: &Graph) -> UnGraph<(), ()> {
    let mut pg = UnGraph::new_undirected();
    let nodes: Vec<_> = (0..g.n()).map(|_| pg.add_node(())).collect();
    for (u, v) in g.edges() {
        pg.add_edge(nodes[u], nodes[v], ());
    }
    pg
}

fn set(v: &[usize]) -> ElementSet {
    ElementSet::new(v.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn isomorphism_matches_petgraph(seed in any::<u64>(), n in 1usize..=6, p in 0.1f64..0.9) {
        let mut rng = gen::rng_from_seed(seed);
        let a = gen::random_graph(&mut rng, n, p);
        // Half the time compare against a relabelled copy.
        let b = if rng.gen_bool(0.5) {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.sort_by_key(|_| rng.gen::<u32>());
            let edges: Vec<[usize; 2]> = a.edges().map(|(u, v)| [perm[u], perm[v]]).collect();
            Graph::from_edges(n, &edges).unwrap()
        } else {
            gen::random_graph(&mut rng, n, p)
        };
        let ours = is_isomorphic(&a.as_small(), &b.as_small());
        let theirs = petgraph::algo::is_isomorphic(&to_petgraph(&a), &to_petgraph(&b));
        prop_assert_eq!(ours, theirs);
    }

    #[test]
    fn enumeration_is_sound_and_bounded(seed in any::<u64>(), n in 1usize..=8, r in 1usize..=4) {
        let mut rng = gen::rng_from_seed(seed);
        let g = gen::random_graph(&mut rng, n, 0.5);
        let family = enumerate_pi_subgraphs(&g, &PiSpec::Clique, r);
        let cap: u128 = (1..=r.min(n)).map(|i| overlap_pack::solver::binomial(n as u128, i as u128)).sum();
        prop_assert!((family.len() as u128) <= cap);
        for s in family.members() {
            prop_assert!(s.len() <= r);
            prop_assert!(s.iter().all(|u| s.iter().all(|v| u == v || g.has_edge(u, v))));
        }
        // Every vertex is a 1-clique.
        prop_assert!(family.members().iter().filter(|s| s.len() == 1).count() == n);
    }

    #[test]
    fn head_wrapper_stays_well_conditioned(seed in any::<u64>(), kind_ix in 0usize..AlphaKind::ALL.len()) {
        let mut rng = gen::rng_from_seed(seed);
        let draw = gen::random_alpha(&mut rng, AlphaKind::ALL[kind_ix], &AlphaParams::default(), 6);
        let inner = build_predicate(&draw.spec, &draw.universe, draw.graph.as_ref()).unwrap();
        let count = rng.gen_range(1..=3);
        let heads: Vec<ElementSet> = (0..count)
            .map(|_| {
                let mut v: Vec<usize> = (0..6).filter(|_| rng.gen_bool(0.3)).collect();
                if v.is_empty() {
                    v.push(rng.gen_range(0..6));
                }
                ElementSet::from_sorted(v)
            })
            .collect();
        let wrapped = wrap_alpha_pch(inner, &ClusterHeads::new(heads, 4));
        prop_assert!(validate_well_conditioned(&wrapped, 6, 4).passed());
    }
}

#[test]
fn distance_uses_whole_graph_hops() {
    // Path 0-1-2: in G, dist(0,2) = 2. Inside the overlap {0,2} alone the two
    // vertices would be disconnected, which must not matter.
    let g = Graph::from_edges(3, &[[0, 1], [1, 2]]).unwrap();
    let pred = build_predicate(&AlphaSpec::Distance { d_t: 2.0 }, &Universe::new(3), Some(&g)).unwrap();
    assert_eq!(pred.evaluate(&set(&[0, 1, 2]), &set(&[0, 2])), Verdict::NoConflict);
    let tight = build_predicate(&AlphaSpec::Distance { d_t: 1.0 }, &Universe::new(3), Some(&g)).unwrap();
    assert_eq!(tight.evaluate(&set(&[0, 1, 2]), &set(&[0, 2])), Verdict::Conflict);
    assert_eq!(graph_distance_matrix(&g).get(0, 2), 2.0);
}

#[test]
fn two_triangles_sharing_a_vertex() {
    let g = Graph::from_edges(5, &[[0, 1], [1, 2], [0, 2], [2, 3], [3, 4], [2, 4]]).unwrap();
    let gi = GraphInstance {
        graph: g,
        r: 3,
        k: 2,
        pi: PiSpec::Family { graphs: vec![Graph::complete(3)] },
        alpha: AlphaSpec::Size { t: 1 },
        cluster_heads: None,
    };
    let inst = reduce_to_set_instance(&gi).unwrap();
    assert_eq!(inst.family.members(), &[set(&[0, 1, 2]), set(&[2, 3, 4])]);
    let report = overlap_pack::solve(&inst).unwrap();
    assert_eq!(report.solution, Some(vec![0, 1]));
    assert!(report.seeded_by_maximal);

    let strict = GraphInstance { alpha: AlphaSpec::Size { t: 0 }, ..gi };
    let report = overlap_pack::solve(&reduce_to_set_instance(&strict).unwrap()).unwrap();
    assert_eq!(report.solution, None);
    assert!(!report.budget_exhausted);
}

#[test]
fn heads_shared_only_when_allowed() {
    let inst = SetSystemInstance {
        universe: Universe::new(6),
        family: SetFamily::new(vec![set(&[0, 1, 2]), set(&[0, 3, 4])], 3, 6).unwrap(),
        k: 2,
        alpha: AlphaSpec::Size { t: 1 },
        cluster_heads: Some(vec![set(&[1]), set(&[3])]),
        graph: None,
    };
    // Heads {1} and {3} are disjoint from the shared element 0.
    assert_eq!(solve_pch(&inst, PchConfig::default()).unwrap().solution, Some(vec![0, 1]));
    let inst = SetSystemInstance { cluster_heads: Some(vec![set(&[0, 1]), set(&[3])]), ..inst };
    assert_eq!(solve_pch(&inst, PchConfig::default()).unwrap().solution, None);
    let shared = PchConfig { shared_heads: true, ..Default::default() };
    assert_eq!(solve_pch(&inst, shared).unwrap().solution, Some(vec![0, 1]));
}

#[test]
fn shared_heads_mode_matches_oracle() {
    use overlap_pack::gen::SetGenConfig;
    use overlap_pack::instance::{validate_solution_with, HeadCheck, Solution};
    use overlap_pack::oracle::{brute_force_solve, OracleConfig};

    let mut rng = gen::rng_from_seed(77);
    let shared = PchConfig { shared_heads: true, ..Default::default() };
    let oracle_cfg = OracleConfig { pch_mode: true, shared_heads: true, ..Default::default() };
    let mut solved = 0;
    for i in 0..300 {
        let kind = [AlphaKind::Size, AlphaKind::Weight, AlphaKind::DenseOverlap][i % 3];
        let n = rng.gen_range(4..=8);
        let cfg = SetGenConfig {
            n,
            m: rng.gen_range(2..=10),
            r: rng.gen_range(2..=3),
            k: rng.gen_range(1..=3),
            alpha: kind,
            params: AlphaParams::default(),
            heads: rng.gen_range(1..=4),
        };
        let inst = gen::generate_set_instance(&mut rng, &cfg).unwrap();
        let report = solve_pch(&inst, shared).unwrap();
        let oracle = brute_force_solve(&inst, oracle_cfg).unwrap();
        assert_eq!(report.solution.is_some(), oracle.is_some(), "{}", inst.to_json());
        if let Some(c) = report.solution {
            solved += 1;
            let pred = inst.predicate().unwrap();
            let heads = HeadCheck { heads: inst.cluster_heads.as_deref().unwrap(), exclusive: false };
            assert!(validate_solution_with(&inst.family, inst.k, &pred, &Solution::new(c), Some(heads)).valid);
        }
    }
    assert!(solved > 0);
}
