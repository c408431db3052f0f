//! Property tests over random instances: format round trips, traversal
//! duality, oracle agreement, run invariants, determinism.

use std::collections::VecDeque;

use proptest::prelude::*;

use treex::analysis::{self, coverage_count};
use treex::engine::{format_trace, ExplorationState};
use treex::generate::{gen_random, random_instance};
use treex::oracle;
use treex::strategy::{self, ldfs_sequence, rdfs_sequence, Strategy};
use treex::tree::{parse_tree, serialize_tree, Instance, Tree};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_serialize_roundtrip(n in 1usize..50, seed in 0u64..10_000) {
        let tree = gen_random(n, 4, seed).unwrap();
        let text = serialize_tree(&tree);
        let back = parse_tree(&text).unwrap();
        prop_assert_eq!(&tree, &back);
        prop_assert_eq!(text, serialize_tree(&back));
    }

    #[test]
    fn normalization_invariants(n in 2usize..40, seed in 0u64..10_000) {
        let tree = gen_random(n, 4, seed).unwrap();
        prop_assert!(tree.is_normalized());
        prop_assert_eq!(tree.clone().normalize(), tree.clone());
        for v in 0..tree.n() {
            if v != tree.root() {
                prop_assert_eq!(Some(tree.neighbor(v, 0)), tree.parent(v));
            }
        }
        let degree_sum: usize = (0..tree.n()).map(|v| tree.degree(v)).sum();
        prop_assert_eq!(degree_sum, 2 * (tree.n() - 1));
    }

    #[test]
    fn dfs_sequence_duality(n in 2usize..40, seed in 0u64..10_000) {
        let tree = gen_random(n, 4, seed).unwrap();
        let l = ldfs_sequence(&tree);
        prop_assert_eq!(l.len(), 2 * (n - 1));
        let flipped: Vec<_> = l.iter().rev().map(|&(a, b)| (b, a)).collect();
        prop_assert_eq!(flipped, rdfs_sequence(&tree));
    }

    #[test]
    fn oracle_routes_agree_on_tiny_instances(n in 1usize..8, k in 1usize..3, b in 0usize..6, seed in 0u64..5_000) {
        let tree = gen_random(n, 3, seed).unwrap();
        let inst = Instance::new(tree, k, b);
        let exact = oracle::opt_exact(&inst).unwrap();
        let naive = oracle::opt_naive_walks(&inst).unwrap();
        prop_assert_eq!(exact, naive);
    }

    #[test]
    fn opt_is_monotone_and_bounded(n in 2usize..12, k in 1usize..3, b in 0usize..7, seed in 0u64..5_000) {
        let tree = gen_random(n, 3, seed).unwrap();
        let inst = Instance::new(tree.clone(), k, b);
        let opt = oracle::opt_exact(&inst).unwrap();
        prop_assert!(opt <= (k * b + 1).min(n));
        let more_b = oracle::opt_exact(&Instance::new(tree.clone(), k, b + 1)).unwrap();
        prop_assert!(more_b >= opt);
        let more_k = oracle::opt_exact(&Instance::new(tree, k + 1, b)).unwrap();
        prop_assert!(more_k >= opt);
    }

    #[test]
    fn runs_are_deterministic(seed in 0u64..5_000) {
        let inst = random_instance(seed, 14, 3, 8);
        let run_one = || {
            let mut st = ExplorationState::from_instance(&inst);
            let run = strategy::run(&mut st, Strategy::DivideAndExplore);
            format_trace(&run.trace)
        };
        prop_assert_eq!(run_one(), run_one());
    }

    #[test]
    fn dnd_iteration_invariants(seed in 0u64..5_000) {
        let inst = random_instance(seed, 14, 3, 8);
        let mut st = ExplorationState::from_instance(&inst);
        let run = strategy::run(&mut st, Strategy::DivideAndExplore);
        // chosen root depths never decrease
        let depths: Vec<usize> = run.iterations.iter().map(|r| r.root_depth).collect();
        prop_assert!(depths.windows(2).all(|w| w[0] <= w[1]), "{:?}", depths);
        // every dispatched agent is fresh and the agent budget holds
        let used: usize = run.iterations.iter().map(|r| r.k_t).sum();
        prop_assert!(used + run.init_agents <= inst.k);
        // counts agree with the known map through both metrics
        prop_assert_eq!(run.explored_incl_root, run.explored_excl_root + 1);
    }

    #[test]
    fn alg_count_dominates_half_the_coverage(seed in 0u64..5_000) {
        let inst = random_instance(seed, 14, 3, 8);
        let mut st = ExplorationState::from_instance(&inst);
        let run = strategy::run(&mut st, Strategy::DivideAndExplore);
        let cov = coverage_count(&run, &inst.tree);
        // each undirected edge appears twice in the sequence
        prop_assert!(2 * (run.explored_incl_root as i64 - 1) >= cov.covered as i64);
    }

    #[test]
    fn dfs_budget_yields_half_as_many_vertices(m in 1usize..12, n in 2usize..25, seed in 0u64..5_000) {
        let tree = gen_random(n, 3, seed).unwrap();
        let inst = Instance::new(tree, 1, 2 * m);
        let mut st = ExplorationState::from_instance(&inst);
        let run = strategy::run(&mut st, Strategy::Ldfs);
        prop_assert!(run.explored_excl_root >= m.min(n - 1));
    }

    #[test]
    fn walk_cost_matches_walk_enumeration(n in 1usize..8, seed in 0u64..2_000) {
        let tree = gen_random(n, 3, seed).unwrap();
        // every root-connected prefix along a BFS order
        let mut order = vec![tree.root()];
        let mut queue = VecDeque::from([tree.root()]);
        while let Some(v) = queue.pop_front() {
            for &w in tree.ports(v) {
                if Some(v) == tree.parent(w) {
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
        for take in 1..=order.len() {
            let set: Vec<usize> = order[..take].to_vec();
            let cost = oracle::walk_cost_min(&tree, &set).unwrap();
            prop_assert_eq!(cost, brute_force_walk_cost(&tree, &set));
        }
    }
}

/// Shortest walk from the root visiting all of `set`, by breadth-first
/// search over (position, visited-subset) states.
fn brute_force_walk_cost(tree: &Tree, set: &[usize]) -> usize {
    let want: u32 = set.iter().fold(0, |m, &v| m | (1 << v));
    let root = tree.root();
    let start = (root, 1u32 << root);
    let mut dist = std::collections::HashMap::new();
    dist.insert(start, 0usize);
    let mut queue = VecDeque::from([start]);
    while let Some((pos, mask)) = queue.pop_front() {
        let d = dist[&(pos, mask)];
        if mask & want == want {
            return d;
        }
        for &w in tree.ports(pos) {
            let next = (w, mask | (1 << w));
            if !dist.contains_key(&next) {
                dist.insert(next, d + 1);
                queue.push_back(next);
            }
        }
    }
    unreachable!("the walk space always reaches the target set");
}

/// Interleaved biased random walks against the budgeted adversary: the
/// construction invariants and partition bounds must hold for arbitrary
/// online behavior, not just the shipped strategies.
#[test]
fn adaptive_adversary_survives_random_interleaved_agents() {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use treex::adversary::checks::{check_lemma3, check_lemma4};
    use treex::adversary::{AdaptiveAdversary, LbParams};
    use treex::engine::World;

    let params = LbParams::new(2, 1024, 260).unwrap();
    for seed in 0..12u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut st = ExplorationState::new(
            World::Adaptive(AdaptiveAdversary::new(params)),
            params.k(),
            params.budget,
        );
        loop {
            let movable: Vec<usize> = (0..params.k())
                .filter(|&a| st.agent(a).energy > 0)
                .collect();
            let Some(&agent) = movable.choose(&mut rng) else { break };
            let pos = st.agent(agent).pos;
            let ports = st.known.ports(pos).to_vec();
            // bias toward unexplored ground so the walk actually gets deep
            let stub_ports: Vec<usize> = (0..ports.len())
                .filter(|&p| st.known.is_stub(ports[p]))
                .collect();
            let port = if !stub_ports.is_empty() && rng.gen_bool(0.8) {
                *stub_ports.choose(&mut rng).unwrap()
            } else {
                rng.gen_range(0..ports.len())
            };
            st.traverse(agent, port).unwrap();
        }
        let trace = st.trace.clone();
        let World::Adaptive(adv) = &mut st.world else { unreachable!() };
        let (tree, report, plan) = adv.finalize();
        for c in check_lemma3(&trace, &tree, &report) {
            assert!(c.pass, "seed {seed}: {} failed: {}", c.name, c.detail);
        }
        for c in check_lemma4(&trace, &tree, &report) {
            assert!(c.pass, "seed {seed}: {} failed: {}", c.name, c.detail);
        }
        let replayed = treex::verify::replay_plan(&tree, &plan, params.budget);
        assert!(
            replayed as i128 >= report.opt_bound,
            "seed {seed}: replay {replayed} < bound {}",
            report.opt_bound
        );
    }
}

#[test]
fn star_adversary_caps_every_strategy() {
    for &k in &[1usize, 2, 3] {
        for &budget in &[2usize, 4, 6] {
            for strat in Strategy::ALL {
                let (run, _) = treex::verify::run_star(k, budget, strat);
                assert!(
                    run.explored_excl_root <= k * budget / 2,
                    "k={k} B={budget} {} explored {}",
                    strat.name(),
                    run.explored_excl_root
                );
            }
        }
    }
}

#[test]
fn lb_inner_expression_is_monotone_across_the_domain() {
    for i in 1..100 {
        let b1 = i as f64 * (1.0 / 3.0) / 100.0;
        assert!(analysis::lb_inner_monotone(b1), "b1={b1}");
    }
}
