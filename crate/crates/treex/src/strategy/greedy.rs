//! Nearest-stub baseline: each agent repeatedly walks to the closest stub
//! until none is reachable. Simple fodder for the adversaries.

use std::collections::VecDeque;

use super::dfs::walk_to;
use super::RunResult;
use crate::engine::{ExplorationState, KnownMap};
use crate::tree::VertexId;

pub fn greedy_nearest(state: &mut ExplorationState) -> RunResult {
    let k = state.k();
    for agent in 0..k {
        if state.is_fully_explored() {
            break;
        }
        state.mark_dispatched(agent);
        loop {
            let pos = state.agent(agent).pos;
            let energy = state.agent(agent).energy;
            let Some((stub, dist)) = nearest_stub(&state.known, pos) else {
                break;
            };
            if dist > energy {
                break;
            }
            walk_to(state, agent, stub);
        }
    }
    let modes = vec![None; k];
    RunResult::collect(state, Vec::new(), 0, modes, vec![state.known.root()])
}

/// Breadth-first search over the known tree from `pos`; among the stubs in
/// the first layer containing any, the smallest id wins.
fn nearest_stub(known: &KnownMap, pos: VertexId) -> Option<(VertexId, usize)> {
    if known.stub_count() == 0 {
        return None;
    }
    let mut seen = vec![false; known.len_ids()];
    let mut queue = VecDeque::new();
    seen[pos] = true;
    queue.push_back((pos, 0usize));
    let mut found: Option<(VertexId, usize)> = None;
    while let Some((v, d)) = queue.pop_front() {
        if let Some((_, fd)) = found {
            if d >= fd {
                break;
            }
        }
        for &w in known.ports(v) {
            if seen[w] {
                continue;
            }
            seen[w] = true;
            if known.is_stub(w) {
                match found {
                    Some((fv, fd)) if fd == d + 1 && fv < w => {}
                    Some((_, fd)) if fd <= d + 1 => {}
                    _ => found = Some((w, d + 1)),
                }
            } else {
                queue.push_back((w, d + 1));
            }
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy;
    use crate::tree::{Instance, Tree};

    #[test]
    fn greedy_explores_a_small_star() {
        let t = Tree::from_edges(4, 0, &[(0, 1, 0, 0), (0, 2, 1, 0), (0, 3, 2, 0)]).unwrap();
        let mut st = ExplorationState::from_instance(&Instance::new(t, 1, 6));
        let r = strategy::run(&mut st, strategy::Strategy::GreedyNearest);
        assert_eq!(r.explored_excl_root, 3);
        assert!(r.fully_explored);
    }

    #[test]
    fn greedy_stops_when_nothing_is_reachable() {
        let t = Tree::from_edges(3, 0, &[(0, 1, 0, 0), (1, 2, 1, 0)]).unwrap();
        let mut st = ExplorationState::from_instance(&Instance::new(t, 1, 1));
        let r = strategy::run(&mut st, strategy::Strategy::GreedyNearest);
        assert_eq!(r.explored_excl_root, 1);
    }
}
