//! Deterministic instance families and seeded random trees.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::tree::{Instance, Tree, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("tightness family needs k >= 2, got {0}")]
    TightnessK(usize),
    #[error("tightness family needs d >= 3, got {0}")]
    TightnessD(usize),
    #[error("star family needs an even budget >= 2, got {0}")]
    StarBudget(usize),
    #[error("star family needs k >= 1")]
    StarK,
    #[error("random family needs n >= 1")]
    RandomN,
}

/// Root with `2k` paths: the first `k` of length `d` behind ports `0..k-1`,
/// then `k` of length `3(d-1)` behind ports `k..2k-1`; the instance carries
/// `k` agents with budget `3(d-1)`.
pub fn gen_tightness(k: usize, d: usize) -> Result<Instance, GenError> {
    if k < 2 {
        return Err(GenError::TightnessK(k));
    }
    if d < 3 {
        return Err(GenError::TightnessD(d));
    }
    let budget = 3 * (d - 1);
    let mut edges = Vec::new();
    let mut next: VertexId = 1;
    for (i, len) in (0..k).map(|_| d).chain((0..k).map(|_| budget)).enumerate() {
        let mut prev: VertexId = 0;
        for step in 0..len {
            let port_prev = if step == 0 { i } else { 1 };
            edges.push((prev, next, port_prev, 0));
            prev = next;
            next += 1;
        }
    }
    let tree = Tree::from_edges(next, 0, &edges).expect("generator outputs a valid tree");
    debug_assert!(tree.is_normalized());
    Ok(Instance::new(tree, k, budget))
}

/// The completed star: `k * budget / 2` rays of length one behind the low
/// ports, then `k` rays of length `budget`. The adaptive ray ordering lives
/// in the adversary module; this static layout serves the oracle.
pub fn gen_star_static(k: usize, budget: usize) -> Result<Instance, GenError> {
    if k < 1 {
        return Err(GenError::StarK);
    }
    if budget < 2 || budget % 2 != 0 {
        return Err(GenError::StarBudget(budget));
    }
    let shorts = k * budget / 2;
    let mut edges = Vec::new();
    let mut next: VertexId = 1;
    for port in 0..shorts {
        edges.push((0, next, port, 0));
        next += 1;
    }
    for ray in 0..k {
        let mut prev: VertexId = 0;
        for step in 0..budget {
            let port_prev = if step == 0 { shorts + ray } else { 1 };
            edges.push((prev, next, port_prev, 0));
            prev = next;
            next += 1;
        }
    }
    let tree = Tree::from_edges(next, 0, &edges).expect("generator outputs a valid tree");
    Ok(Instance::new(tree, k, budget))
}

/// Uniform random recursive tree truncated by `max_degree`, with ports
/// shuffled by the seeded generator. Deterministic per seed.
pub fn gen_random(n: usize, max_degree: usize, seed: u64) -> Result<Tree, GenError> {
    if n == 0 {
        return Err(GenError::RandomN);
    }
    let max_degree = max_degree.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; n];
    let mut parents: Vec<VertexId> = Vec::with_capacity(n.saturating_sub(1));
    for v in 1..n {
        let open: Vec<VertexId> = (0..v).filter(|&u| degree[u] < max_degree).collect();
        // every prefix keeps at least one attachable vertex when max_degree >= 2;
        // for max_degree == 1 fall back to a path
        let parent = *open.choose(&mut rng).unwrap_or(&(v - 1));
        degree[parent] += 1;
        degree[v] += 1;
        parents.push(parent);
    }
    // assign shuffled ports per vertex
    let mut incident: Vec<Vec<(VertexId, usize)>> = vec![Vec::new(); n]; // (edge idx, side)
    for (idx, &p) in parents.iter().enumerate() {
        let v = idx + 1;
        incident[p].push((idx, 0));
        incident[v].push((idx, 1));
    }
    let mut edge_ports = vec![(0usize, 0usize); parents.len()];
    for v in 0..n {
        let mut ports: Vec<usize> = (0..incident[v].len()).collect();
        ports.shuffle(&mut rng);
        for (&(idx, side), &port) in incident[v].iter().zip(ports.iter()) {
            if side == 0 {
                edge_ports[idx].0 = port;
            } else {
                edge_ports[idx].1 = port;
            }
        }
    }
    let edges: Vec<_> = parents
        .iter()
        .enumerate()
        .map(|(idx, &p)| (p, idx + 1, edge_ports[idx].0, edge_ports[idx].1))
        .collect();
    let tree = Tree::from_edges(n, 0, &edges).expect("generator outputs a valid tree");
    Ok(tree.normalize())
}

/// Seeded random instance in a parameter box, for property sweeps.
pub fn random_instance(seed: u64, max_n: usize, max_k: usize, max_b: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = rng.gen_range(2..=max_n.max(2));
    let max_degree = rng.gen_range(2..=4);
    let k = rng.gen_range(1..=max_k.max(1));
    let b = rng.gen_range(0..=max_b);
    let tree = gen_random(n, max_degree, rng.gen()).expect("n >= 2");
    Instance::new(tree, k, b)
}
