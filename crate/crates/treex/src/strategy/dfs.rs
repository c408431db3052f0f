//! Depth-first traversal machinery: canonical directed-edge sequences over a
//! known tree, leftmost/rightmost unexplored vertices of a subtree, and the
//! two agent movers.

use crate::engine::{ExplorationState, KnownMap};
use crate::tree::{Tree, VertexId};

/// An edge-disjoint rooted subtree of the evolving decomposition.
///
/// Membership is by branch: `branches` lists the children of `root` whose
/// entire subtrees belong; vertices revealed later inherit the side of their
/// branch. `None` means every branch below `root`.
#[derive(Debug, Clone)]
pub struct Subtree {
    pub id: usize,
    pub root: VertexId,
    pub branches: Option<Vec<VertexId>>,
}

impl Subtree {
    pub fn whole(root: VertexId) -> Subtree {
        Subtree {
            id: 0,
            root,
            branches: None,
        }
    }

    /// Child ports of `v` that stay inside this subtree, ascending, with
    /// their targets. Port 0 of a non-root vertex leads to the parent and is
    /// never included.
    pub fn child_ports(&self, known: &KnownMap, v: VertexId) -> Vec<(usize, VertexId)> {
        let ports = known.ports(v);
        let skip = usize::from(v != known.root());
        ports
            .iter()
            .enumerate()
            .skip(skip)
            .filter(|&(_, &c)| {
                v != self.root
                    || self
                        .branches
                        .as_ref()
                        .is_none_or(|m| m.contains(&c))
            })
            .map(|(p, &c)| (p, c))
            .collect()
    }

    /// Number of stubs inside this subtree strictly below `v` (which must be
    /// an explored member).
    pub fn stubs_below(&self, known: &KnownMap, v: VertexId) -> usize {
        if v != self.root {
            return known.stubs_below(v);
        }
        self.child_ports(known, v)
            .iter()
            .map(|&(_, c)| {
                if known.is_stub(c) {
                    1
                } else {
                    known.stubs_below(c)
                }
            })
            .sum()
    }

    /// Total stubs in this subtree.
    pub fn stub_count(&self, known: &KnownMap) -> usize {
        self.stubs_below(known, self.root)
    }

    /// True iff `v` belongs to this subtree.
    pub fn contains(&self, known: &KnownMap, v: VertexId) -> bool {
        self.branch_of(known, v).is_some() || v == self.root
    }

    /// The child of `root` whose branch holds `v`, if `v` lies strictly
    /// below `root`.
    pub fn branch_of(&self, known: &KnownMap, v: VertexId) -> Option<VertexId> {
        if v == self.root || !known.is_known(v) {
            return None;
        }
        let rd = known.depth(self.root);
        let mut cur = v;
        while known.depth(cur) > rd + 1 {
            cur = known.parent(cur)?;
        }
        if known.depth(cur) != rd + 1 || known.parent(cur) != Some(self.root) {
            return None;
        }
        match &self.branches {
            Some(m) if !m.contains(&cur) => None,
            _ => Some(cur),
        }
    }
}

/// Canonical directed-edge order of a full smallest-label-first DFS from the
/// root: every undirected edge appears once in each direction; length is
/// `2(n-1)`.
pub fn ldfs_sequence(tree: &Tree) -> Vec<(VertexId, VertexId)> {
    dfs_sequence(tree, false)
}

/// Largest-label-first counterpart; equals the reversed, edge-flipped
/// smallest-label sequence.
pub fn rdfs_sequence(tree: &Tree) -> Vec<(VertexId, VertexId)> {
    dfs_sequence(tree, true)
}

fn dfs_sequence(tree: &Tree, largest_first: bool) -> Vec<(VertexId, VertexId)> {
    let mut seq = Vec::with_capacity(2 * (tree.n() - 1));
    // explicit stack of (vertex, child iterator index) to survive deep paths
    let children = |v: VertexId| -> Vec<VertexId> {
        let skip = usize::from(v != tree.root());
        let mut c: Vec<VertexId> = tree.ports(v)[skip..].to_vec();
        if largest_first {
            c.reverse();
        }
        c
    };
    let root = tree.root();
    let mut stack: Vec<(VertexId, Vec<VertexId>, usize)> = vec![(root, children(root), 0)];
    while let Some((v, kids, idx)) = stack.last_mut() {
        if *idx < kids.len() {
            let c = kids[*idx];
            *idx += 1;
            let v = *v;
            seq.push((v, c));
            stack.push((c, children(c), 0));
        } else {
            let v = *v;
            stack.pop();
            if let Some((p, _, _)) = stack.last() {
                seq.push((v, *p));
            }
        }
    }
    seq
}

/// First stub reached by a virtual smallest-label-first DFS over the known
/// part of the subtree.
pub fn leftmost_unexplored(known: &KnownMap, s: &Subtree) -> Option<VertexId> {
    scan_unexplored(known, s, false)
}

/// First stub on the largest-label-first side.
pub fn rightmost_unexplored(known: &KnownMap, s: &Subtree) -> Option<VertexId> {
    scan_unexplored(known, s, true)
}

fn scan_unexplored(known: &KnownMap, s: &Subtree, largest_first: bool) -> Option<VertexId> {
    if known.is_stub(s.root) {
        return Some(s.root);
    }
    let mut v = s.root;
    loop {
        let ports = s.child_ports(known, v);
        let mut iter = ports.iter();
        let hit = if largest_first {
            iter.rfind(|&&(_, c)| known.is_stub(c) || known.stubs_below(c) > 0)
        } else {
            iter.find(|&&(_, c)| known.is_stub(c) || known.stubs_below(c) > 0)
        };
        let &(_, c) = hit?;
        if known.is_stub(c) {
            return Some(c);
        }
        v = c;
    }
}

/// Moves the agent along the unique path to `target` (an explored vertex or
/// stub), halting early when energy runs out.
pub(crate) fn walk_to(state: &mut ExplorationState, agent: usize, target: VertexId) {
    let path = path_between(&state.known, state.agent(agent).pos, target);
    for w in path {
        if state.agent(agent).energy == 0 {
            return;
        }
        let pos = state.agent(agent).pos;
        let port = state
            .known
            .port_to(pos, w)
            .expect("path steps through adjacent known vertices");
        state.traverse(agent, port).expect("validated move");
    }
}

/// Vertices on the path from `from` (exclusive) to `to` (inclusive).
fn path_between(known: &KnownMap, from: VertexId, to: VertexId) -> Vec<VertexId> {
    let mut up = Vec::new();
    let mut down = Vec::new();
    let (mut a, mut b) = (from, to);
    while known.depth(a) > known.depth(b) {
        a = known.parent(a).unwrap();
        up.push(a);
    }
    while known.depth(b) > known.depth(a) {
        down.push(b);
        b = known.parent(b).unwrap();
    }
    while a != b {
        a = known.parent(a).unwrap();
        up.push(a);
        down.push(b);
        b = known.parent(b).unwrap();
    }
    down.reverse();
    up.extend(down);
    up
}

/// Smallest-label-first exploration of subtree `s` starting at `start`.
///
/// The agent walks to `start`, then repeatedly: if the part of `s` below its
/// position is completely explored it moves toward the subtree root through
/// port 0, otherwise it moves toward unexplored territory taking the
/// smallest admissible label. It stops when energy is exhausted, `s` is
/// completely explored, or it stands at the subtree root with nothing
/// unexplored below.
pub fn run_ldfs(state: &mut ExplorationState, agent: usize, s: &Subtree, start: VertexId) {
    run_dfs(state, agent, s, start, false)
}

/// Largest-label-first counterpart of [`run_ldfs`].
pub fn run_rdfs(state: &mut ExplorationState, agent: usize, s: &Subtree, start: VertexId) {
    run_dfs(state, agent, s, start, true)
}

fn run_dfs(
    state: &mut ExplorationState,
    agent: usize,
    s: &Subtree,
    start: VertexId,
    largest_first: bool,
) {
    walk_to(state, agent, start);
    loop {
        if state.agent(agent).energy == 0 {
            return;
        }
        let pos = state.agent(agent).pos;
        if s.stubs_below(&state.known, pos) == 0 {
            // everything below is done: climb toward the subtree root (the
            // full walk home keeps the visit order on the canonical
            // sequence), ending there
            if pos == s.root {
                return;
            }
            state.traverse(agent, 0).expect("validated move");
            continue;
        }
        let ports = s.child_ports(&state.known, pos);
        let pick = |pred: &dyn Fn(VertexId) -> bool| -> Option<usize> {
            if largest_first {
                ports.iter().rev().find(|&&(_, c)| pred(c)).map(|&(p, _)| p)
            } else {
                ports.iter().find(|&&(_, c)| pred(c)).map(|&(p, _)| p)
            }
        };
        // The unexplored edge with the smallest (largest) label, widened at
        // the root where all ports lead to children; when no port leads
        // directly to a stub, descend into the nearest branch that still
        // holds one.
        let port = pick(&|c| state.known.is_stub(c))
            .or_else(|| pick(&|c| state.known.stubs_below(c) > 0))
            .expect("a stub exists below this position");
        state.traverse(agent, port).expect("validated move");
    }
}
