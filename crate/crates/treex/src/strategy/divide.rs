//! The subtree-splitting exploration algorithm.
//!
//! Two agents first sweep the whole tree from opposite label ends. Then,
//! while unexplored vertices and fresh agents remain: roots of the tracked
//! subtrees move down where the remaining work is confined to one branch;
//! the subtree with the highest root is either explored from its leftmost or
//! rightmost unexplored vertex (when that vertex is close enough to the
//! root) or split in two, one agent per side.

use super::dfs::{leftmost_unexplored, rightmost_unexplored, run_ldfs, run_rdfs, Subtree};
use super::{Action, DfsMode, IterationRecord, RunResult};
use crate::engine::{ExplorationState, KnownMap};
use crate::tree::VertexId;

/// The evolving collection of edge-disjoint rooted subtrees.
#[derive(Debug, Clone)]
pub(crate) struct SubtreeSet {
    subs: Vec<Subtree>,
    next_id: usize,
}

impl SubtreeSet {
    fn new(root: VertexId) -> SubtreeSet {
        SubtreeSet {
            subs: vec![Subtree::whole(root)],
            next_id: 1,
        }
    }

    #[cfg(test)]
    pub(crate) fn subtrees(&self) -> &[Subtree] {
        &self.subs
    }

    /// For each subtree still holding a stub: while the current root has
    /// exactly one child branch leading to an unexplored vertex and no stub
    /// child, the root descends into that branch and the subtree becomes the
    /// full subtree below it. Returns the roots that moved.
    pub(crate) fn move_roots_down(&mut self, known: &KnownMap) -> Vec<VertexId> {
        let mut moved = Vec::new();
        for s in &mut self.subs {
            if s.stub_count(known) == 0 {
                continue;
            }
            let mut descended = false;
            loop {
                let mut lead = None;
                let mut lead_count = 0;
                let mut stub_child = false;
                for (_, c) in s.child_ports(known, s.root) {
                    if known.is_stub(c) {
                        stub_child = true;
                    } else if known.stubs_below(c) > 0 {
                        lead = Some(c);
                        lead_count += 1;
                    }
                }
                if stub_child || lead_count != 1 {
                    break;
                }
                s.root = lead.unwrap();
                s.branches = None;
                descended = true;
            }
            if descended {
                moved.push(s.root);
            }
        }
        moved
    }

    /// Subtree with an unexplored vertex minimizing root depth; ties go to
    /// the earliest-created subtree.
    fn pick(&self, known: &KnownMap) -> Option<usize> {
        (0..self.subs.len())
            .filter(|&i| self.subs[i].stub_count(known) > 0)
            .min_by_key(|&i| (known.depth(self.subs[i].root), self.subs[i].id))
    }

    /// Replaces subtree `i` by the two sides of a split at the branch of
    /// `v_r`: the branch child's subtree plus the root on one side,
    /// everything else on the other.
    fn split(&mut self, known: &KnownMap, i: usize, v_r: VertexId) -> (usize, usize) {
        let s = self.subs[i].clone();
        let v = s
            .branch_of(known, v_r)
            .expect("the rightmost unexplored vertex lies strictly below the root");
        let all: Vec<VertexId> = s
            .child_ports(known, s.root)
            .into_iter()
            .map(|(_, c)| c)
            .collect();
        let rest: Vec<VertexId> = all.iter().copied().filter(|&c| c != v).collect();
        assert!(!rest.is_empty(), "split requires work on both sides");
        let s1 = Subtree {
            id: self.next_id,
            root: s.root,
            branches: Some(rest),
        };
        let s2 = Subtree {
            id: self.next_id + 1,
            root: s.root,
            branches: Some(vec![v]),
        };
        self.next_id += 2;
        self.subs.remove(i);
        self.subs.push(s1);
        self.subs.push(s2);
        (self.subs.len() - 2, self.subs.len() - 1)
    }
}

/// Runs the algorithm to completion and reports iteration records, per-agent
/// traversal modes and every root ever active.
pub fn divide_and_explore(state: &mut ExplorationState) -> RunResult {
    let k = state.k();
    let budget = state.budget;
    let root = state.known.root();
    let mut modes: Vec<Option<DfsMode>> = vec![None; k];
    let mut roots_ever = vec![root];
    let mut records = Vec::new();

    let mut tset = SubtreeSet::new(root);
    let whole = Subtree::whole(root);

    state.set_iteration(0);
    state.mark_dispatched(0);
    modes[0] = Some(DfsMode::L);
    run_ldfs(state, 0, &whole, root);
    let mut init_agents = 1;
    if k >= 2 {
        state.mark_dispatched(1);
        modes[1] = Some(DfsMode::R);
        run_rdfs(state, 1, &whole, root);
        init_agents = 2;
    }

    let mut next_agent = init_agents;
    let mut t: u32 = 0;
    while !state.is_fully_explored() && next_agent < k {
        t += 1;
        state.set_iteration(t);
        roots_ever.extend(tset.move_roots_down(&state.known));
        let Some(i) = tset.pick(&state.known) else {
            break;
        };
        let s = tset.subs[i].clone();
        let d_r = state.known.depth(s.root);
        debug_assert!(d_r <= budget);
        let v_l = leftmost_unexplored(&state.known, &s).expect("picked subtree has a stub");
        let v_r = rightmost_unexplored(&state.known, &s).expect("picked subtree has a stub");
        let (dl, dr) = (state.known.depth(v_l), state.known.depth(v_r));
        // exact integer form of the closeness test: 3 * (d(v) - d(r_S)) <= max(3, B - d(r_S))
        let threshold = 3.max(budget - d_r);
        let mut rec = IterationRecord {
            t,
            root: s.root,
            root_depth: d_r,
            k_t: 1,
            action: Action::Ldfs,
            v_l_depth: Some(dl),
            v_r_depth: Some(dr),
        };
        if 3 * (dl - d_r) <= threshold {
            let a = next_agent;
            next_agent += 1;
            state.mark_dispatched(a);
            modes[a] = Some(DfsMode::L);
            run_ldfs(state, a, &s, v_l);
        } else if 3 * (dr - d_r) <= threshold {
            rec.action = Action::Rdfs;
            let a = next_agent;
            next_agent += 1;
            state.mark_dispatched(a);
            modes[a] = Some(DfsMode::R);
            run_rdfs(state, a, &s, v_r);
        } else {
            rec.action = Action::Split;
            assert_ne!(
                s.branch_of(&state.known, v_l),
                s.branch_of(&state.known, v_r),
                "after roots moved down, both sides of a split hold unexplored work"
            );
            let (i1, i2) = tset.split(&state.known, i, v_r);
            let s1 = tset.subs[i1].clone();
            let a = next_agent;
            next_agent += 1;
            state.mark_dispatched(a);
            modes[a] = Some(DfsMode::R);
            run_rdfs(state, a, &s1, s1.root);
            if next_agent < k {
                let s2 = tset.subs[i2].clone();
                let b = next_agent;
                next_agent += 1;
                state.mark_dispatched(b);
                modes[b] = Some(DfsMode::L);
                run_ldfs(state, b, &s2, s2.root);
                rec.k_t = 2;
            }
        }
        records.push(rec);
    }
    state.finish();
    RunResult::collect(state, records, init_agents, modes, roots_ever)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{Instance, Tree};

    fn state_of(tree: Tree, k: usize, budget: usize) -> ExplorationState {
        ExplorationState::from_instance(&Instance::new(tree, k, budget))
    }

    #[test]
    fn single_agent_path_is_fully_explored() {
        let t = Tree::from_edges(3, 0, &[(0, 1, 0, 0), (1, 2, 1, 0)]).unwrap();
        let mut st = state_of(t, 1, 4);
        let r = divide_and_explore(&mut st);
        assert_eq!(r.explored_excl_root, 2);
        assert!(r.fully_explored);
        assert_eq!(r.init_agents, 1);
        assert!(r.iterations.is_empty());
    }

    #[test]
    fn move_roots_down_descends_single_branch_chains() {
        // root -> a -> {two stub branches}
        let t = Tree::from_edges(
            4,
            0,
            &[(0, 1, 0, 0), (1, 2, 1, 0), (1, 3, 2, 0)],
        )
        .unwrap();
        let mut st = state_of(t, 1, 10);
        st.traverse(0, 0).unwrap(); // explore a; stubs 2 and 3 below it
        let mut tset = SubtreeSet::new(0);
        let moved = tset.move_roots_down(&st.known);
        assert_eq!(moved, vec![1]);
        assert_eq!(tset.subtrees()[0].root, 1);

        // root with a stub child stays put
        let t = Tree::from_edges(3, 0, &[(0, 1, 0, 0), (1, 2, 1, 0)]).unwrap();
        let st = state_of(t, 1, 10);
        let mut tset = SubtreeSet::new(0);
        assert!(tset.move_roots_down(&st.known).is_empty());
        assert_eq!(tset.subtrees()[0].root, 0);
    }

    #[test]
    fn move_roots_down_stops_at_forks() {
        // root with two explored children, each with a stub below
        let t = Tree::from_edges(
            5,
            0,
            &[(0, 1, 0, 0), (0, 2, 1, 0), (1, 3, 1, 0), (2, 4, 1, 0)],
        )
        .unwrap();
        let mut st = state_of(t, 1, 10);
        st.traverse(0, 0).unwrap();
        st.traverse(0, 0).unwrap();
        st.traverse(0, 1).unwrap();
        let mut tset = SubtreeSet::new(0);
        assert!(tset.move_roots_down(&st.known).is_empty());
    }

    #[test]
    fn split_partitions_branches() {
        let t = Tree::from_edges(
            7,
            0,
            &[
                (0, 1, 0, 0),
                (0, 2, 1, 0),
                (0, 3, 2, 0),
                (1, 4, 1, 0),
                (2, 5, 1, 0),
                (3, 6, 1, 0),
            ],
        )
        .unwrap();
        let mut st = state_of(t, 1, 20);
        for port in [0, 0, 1, 0, 2] {
            st.traverse(0, port).unwrap();
        }
        let mut tset = SubtreeSet::new(0);
        let (i1, i2) = tset.split(&st.known, 0, 6); // rightmost stub under branch 3
        let (s1, s2) = (tset.subtrees()[i1].clone(), tset.subtrees()[i2].clone());
        assert_eq!(s1.branches, Some(vec![1, 2]));
        assert_eq!(s2.branches, Some(vec![3]));
        for v in 1..7 {
            let in1 = s1.contains(&st.known, v);
            let in2 = s2.contains(&st.known, v);
            assert!(in1 ^ in2, "vertex {v} must live on exactly one side");
        }
    }
}
