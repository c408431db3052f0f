//! Exact offline optimum for small instances, plus analytic optima for the
//! generator families.
//!
//! Two independent routes exist on purpose: [`opt_naive_walks`] enumerates
//! joint agent walks outright, while [`opt_exact`] searches over
//! root-connected vertex sets priced by the minimal-walk cost identity
//! `2(|S|-1) - max_depth(S)`. The former validates the latter on tiny
//! instances before the subset search is trusted at larger sizes.

use std::collections::HashSet;

use thiserror::Error;

use crate::adversary::LbParams;
use crate::tree::{Instance, Tree, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance (n={n}, k={k}, B={b}) exceeds the oracle guard (n<={max_n}, k<={max_k}, B<={max_b})")]
    SizeGuard {
        n: usize,
        k: usize,
        b: usize,
        max_n: usize,
        max_k: usize,
        max_b: usize,
    },
    #[error("vertex set is not root-connected")]
    DisconnectedSet,
    #[error("infeasible parameters: {0}")]
    InfeasibleParams(String),
}

/// Size limits for the exact search.
#[derive(Debug, Clone, Copy)]
pub struct OptGuard {
    pub max_n: usize,
    pub max_k: usize,
    pub max_b: usize,
}

impl Default for OptGuard {
    fn default() -> Self {
        OptGuard {
            max_n: 20,
            max_k: 4,
            max_b: 12,
        }
    }
}

/// Minimal number of edge traversals for one agent starting at the root to
/// visit every vertex of the root-connected set `s`: a depth-first sweep
/// ending at the deepest vertex, `2(|S|-1) - max_depth(S)`.
pub fn walk_cost_min(tree: &Tree, s: &[VertexId]) -> Result<usize, OracleError> {
    let set: HashSet<VertexId> = s.iter().copied().collect();
    if !set.contains(&tree.root()) {
        return Err(OracleError::DisconnectedSet);
    }
    // connectivity: every non-root member's parent is a member
    for &v in &set {
        if v >= tree.n() {
            return Err(OracleError::DisconnectedSet);
        }
        if v != tree.root() && !set.contains(&tree.parent(v).unwrap()) {
            return Err(OracleError::DisconnectedSet);
        }
    }
    let max_depth = set.iter().map(|&v| tree.depth(v)).max().unwrap_or(0);
    Ok(2 * (set.len() - 1) - max_depth)
}

/// Exhaustive enumeration of joint agent walks, the brute-force oracle.
/// Guarded to tiny instances (n <= 8, k <= 2, B <= 6).
pub fn opt_naive_walks(instance: &Instance) -> Result<usize, OracleError> {
    let (n, k, b) = (instance.tree.n(), instance.k, instance.budget);
    if n > 8 || k > 2 || b > 6 {
        return Err(OracleError::SizeGuard {
            n,
            k,
            b,
            max_n: 8,
            max_k: 2,
            max_b: 6,
        });
    }
    let masks = reachable_masks(&instance.tree, b);
    let mut best = 0;
    // agents are identical: combine masks as a multiset
    match k {
        1 => {
            for &m in &masks {
                best = best.max(m.count_ones() as usize);
            }
        }
        _ => {
            for i in 0..masks.len() {
                for j in i..masks.len() {
                    best = best.max((masks[i] | masks[j]).count_ones() as usize);
                }
            }
        }
    }
    Ok(best)
}

/// Every visited-vertex set achievable by a single agent walking at most
/// `b` edges from the root.
fn reachable_masks(tree: &Tree, b: usize) -> Vec<u32> {
    let root = tree.root();
    let mut out: HashSet<u32> = HashSet::new();
    let mut seen: HashSet<(VertexId, usize, u32)> = HashSet::new();
    let mut stack = vec![(root, b, 1u32 << root)];
    while let Some((pos, energy, mask)) = stack.pop() {
        if !seen.insert((pos, energy, mask)) {
            continue;
        }
        out.insert(mask);
        if energy == 0 {
            continue;
        }
        for &w in tree.ports(pos) {
            stack.push((w, energy - 1, mask | (1u32 << w)));
        }
    }
    let mut masks: Vec<u32> = out.into_iter().collect();
    masks.sort_unstable();
    // keep only inclusion-maximal visited sets
    let all = masks.clone();
    masks.retain(|&m| !all.iter().any(|&o| o != m && o & m == m));
    masks
}

/// Maximum number of distinct vertices (including the root) coverable by
/// `k` agents with budget `B`, via branch-and-bound over root-connected
/// subsets of per-agent cost at most `B`. Guarded by `guard`.
pub fn opt_exact_with_guard(instance: &Instance, guard: OptGuard) -> Result<usize, OracleError> {
    let (n, k, b) = (instance.tree.n(), instance.k, instance.budget);
    if n > guard.max_n || k > guard.max_k || b > guard.max_b {
        return Err(OracleError::SizeGuard {
            n,
            k,
            b,
            max_n: guard.max_n,
            max_k: guard.max_k,
            max_b: guard.max_b,
        });
    }
    assert!(n <= 32, "mask width");
    let tree = &instance.tree;
    let mut cands = maximal_budget_sets(tree, b);
    cands.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));

    // greedy seed for pruning
    let mut union = 0u32;
    for _ in 0..k {
        if let Some(&m) = cands.iter().max_by_key(|&&m| (m & !union).count_ones()) {
            union |= m;
        }
    }
    let mut best = union.count_ones() as usize;

    let per_agent_cap = ((b + tree.max_depth()) / 2)
        .min(cands.first().map_or(0, |m| m.count_ones() as usize - 1));
    search(&cands, k, 0, 0, 1u32 << tree.root(), per_agent_cap, n, &mut best);
    Ok(best)
}

/// [`opt_exact_with_guard`] under the default guard.
pub fn opt_exact(instance: &Instance) -> Result<usize, OracleError> {
    opt_exact_with_guard(instance, OptGuard::default())
}

fn search(
    cands: &[u32],
    k: usize,
    used: usize,
    start: usize,
    union: u32,
    per_agent_cap: usize,
    n: usize,
    best: &mut usize,
) {
    let covered = union.count_ones() as usize;
    if covered > *best {
        *best = covered;
    }
    if used == k {
        return;
    }
    let remaining = k - used;
    let bound = covered + (remaining * per_agent_cap).min(n - covered);
    if bound <= *best {
        return;
    }
    for ci in start..cands.len() {
        if cands[ci] & !union == 0 {
            continue;
        }
        search(cands, k, used + 1, ci, union | cands[ci], per_agent_cap, n, best);
    }
}

/// All inclusion-maximal root-connected vertex sets with walk cost at most
/// `b`, as bitmasks. Cost is strictly increasing along set extensions, so
/// branches are cut as soon as a candidate no longer fits.
fn maximal_budget_sets(tree: &Tree, b: usize) -> Vec<u32> {
    struct Ctx<'a> {
        tree: &'a Tree,
        b: usize,
        out: Vec<u32>,
    }
    fn cost_with(tree: &Tree, size: usize, max_depth: usize, v: VertexId) -> usize {
        2 * size - max_depth.max(tree.depth(v))
    }
    fn rec(
        ctx: &mut Ctx,
        set: u32,
        size: usize,
        max_depth: usize,
        mut cand: Vec<VertexId>,
        mut banned: Vec<VertexId>,
    ) {
        match cand.pop() {
            Some(c) => {
                // cost(S + c) = 2*size - max(max_depth, depth(c))
                if cost_with(ctx.tree, size, max_depth, c) <= ctx.b {
                    let mut with_cand = cand.clone();
                    for &w in ctx.tree.ports(c) {
                        if ctx.tree.parent(w) == Some(c) && set & (1 << w) == 0 {
                            with_cand.push(w);
                        }
                    }
                    rec(
                        ctx,
                        set | (1 << c),
                        size + 1,
                        max_depth.max(ctx.tree.depth(c)),
                        with_cand,
                        banned.clone(),
                    );
                    banned.push(c);
                    rec(ctx, set, size, max_depth, cand, banned);
                } else {
                    banned.push(c);
                    rec(ctx, set, size, max_depth, cand, banned);
                }
            }
            None => {
                let maximal = banned
                    .iter()
                    .all(|&v| cost_with(ctx.tree, size, max_depth, v) > ctx.b);
                if maximal {
                    ctx.out.push(set);
                }
            }
        }
    }
    let root = tree.root();
    let mut ctx = Ctx {
        tree,
        b,
        out: Vec::new(),
    };
    let cand: Vec<VertexId> = tree.ports(root).iter().rev().copied().collect();
    rec(&mut ctx, 1 << root, 1, 0, cand, Vec::new());
    ctx.out
}

/// Analytic optimum family parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticFamily {
    /// Exact optimum `k * budget` (excluding the root).
    Star { k: usize, budget: usize },
    /// Exact optimum `3k(d-1)` (excluding the root).
    Tightness { k: usize, d: usize },
    /// Certified lower bound `(l-t)B + (l-1+t)(B-d1-delta)` for the
    /// finalized adversarial tree (excluding the root).
    LbFinalized {
        l: usize,
        budget: usize,
        d1: usize,
        t: usize,
    },
}

/// Exact optimum for the star and tightness families and the certified
/// lower bound for the finalized adversarial family, all excluding the root.
pub fn opt_analytic(family: AnalyticFamily) -> Result<i128, OracleError> {
    match family {
        AnalyticFamily::Star { k, budget } => {
            if k < 1 || budget % 2 != 0 {
                return Err(OracleError::InfeasibleParams(format!(
                    "star needs k >= 1 and even budget, got k={k}, budget={budget}"
                )));
            }
            Ok((k * budget) as i128)
        }
        AnalyticFamily::Tightness { k, d } => {
            if k < 2 || d < 3 {
                return Err(OracleError::InfeasibleParams(format!(
                    "tightness needs k >= 2 and d >= 3, got k={k}, d={d}"
                )));
            }
            Ok((3 * k * (d - 1)) as i128)
        }
        AnalyticFamily::LbFinalized { l, budget, d1, t } => {
            let p = LbParams::new(l, budget, d1)
                .map_err(|e| OracleError::InfeasibleParams(e.to_string()))?;
            if t >= l {
                return Err(OracleError::InfeasibleParams(format!(
                    "t={t} must be < l={l}"
                )));
            }
            Ok(p.opt_bound(t))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_star_static, gen_tightness};
    use crate::tree::Tree;

    fn path(n: usize) -> Tree {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v, usize::from(v > 1), 0)).collect();
        Tree::from_edges(n, 0, &edges).unwrap()
    }

    fn two_leaf_star() -> Tree {
        Tree::from_edges(3, 0, &[(0, 1, 0, 0), (0, 2, 1, 0)]).unwrap()
    }

    #[test]
    fn walk_cost_examples() {
        let t = path(3);
        assert_eq!(walk_cost_min(&t, &[0, 1, 2]).unwrap(), 2);
        assert_eq!(walk_cost_min(&t, &[0]).unwrap(), 0);
        let s = two_leaf_star();
        assert_eq!(walk_cost_min(&s, &[0, 1, 2]).unwrap(), 3);
        assert_eq!(
            walk_cost_min(&s, &[0, 1, 4]).unwrap_err(),
            OracleError::DisconnectedSet
        );
    }

    #[test]
    fn naive_walk_examples() {
        let t = path(2);
        assert_eq!(opt_naive_walks(&Instance::new(t, 1, 1)).unwrap(), 2);
        assert_eq!(
            opt_naive_walks(&Instance::new(two_leaf_star(), 2, 1)).unwrap(),
            3
        );
        assert_eq!(
            opt_naive_walks(&Instance::new(two_leaf_star(), 1, 2)).unwrap(),
            2
        );
    }

    #[test]
    fn exact_matches_pinned_examples() {
        // path r-a-b-c, one agent, B=2: walk r,a,b
        assert_eq!(opt_exact(&Instance::new(path(4), 1, 2)).unwrap(), 3);
        assert_eq!(opt_exact(&Instance::new(two_leaf_star(), 1, 2)).unwrap(), 2);
        // B = 0 keeps every agent at the root
        assert_eq!(opt_exact(&Instance::new(path(4), 2, 0)).unwrap(), 1);
    }

    #[test]
    fn exact_on_tightness_and_star_matches_analytic() {
        let inst = gen_tightness(3, 3).unwrap();
        let guard = OptGuard {
            max_n: 30,
            max_k: 4,
            max_b: 12,
        };
        let opt = opt_exact_with_guard(&inst, guard).unwrap();
        assert_eq!(opt, 19); // 18 excluding the root
        assert_eq!(
            opt_analytic(AnalyticFamily::Tightness { k: 3, d: 3 }).unwrap(),
            18
        );

        let star = gen_star_static(1, 2).unwrap();
        assert_eq!(opt_exact(&Instance::new(star.tree, 1, 2)).unwrap(), 3);
        assert_eq!(
            opt_analytic(AnalyticFamily::Star { k: 2, budget: 4 }).unwrap(),
            8
        );
    }

    #[test]
    fn analytic_lb_example() {
        let v = opt_analytic(AnalyticFamily::LbFinalized {
            l: 2,
            budget: 1024,
            d1: 260,
            t: 0,
        })
        .unwrap();
        assert_eq!(v, 2744);
    }

    #[test]
    fn guard_is_enforced() {
        let inst = Instance::new(path(4), 1, 50);
        assert!(matches!(
            opt_exact(&inst),
            Err(OracleError::SizeGuard { .. })
        ));
    }
}
