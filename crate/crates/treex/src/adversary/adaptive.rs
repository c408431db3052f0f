//! The budgeted adaptive adversary.
//!
//! The skeleton is a root with `l` paths of length `d1` ending in hubs of
//! degree `delta + 1`. Everything below a hub is materialized on demand:
//! paths extend while the subtree's non-leaf budget `N_i` lasts and no stop
//! rule fires, and may spawn a second hub at depth `d2`. Entry of agents
//! into a subtree triggers the case rules that raise budgets, passivate
//! regions, designate a reachable second hub, or arm stop rules.

use std::collections::HashMap;

use super::LbParams;
use crate::engine::Arrival;
use crate::tree::{Tree, VertexId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseEvent {
    Case1 { agent: usize },
    Case2a { agent: usize },
    Case2b { agent: usize },
    Case2c { agent: usize },
    Case3 { agent: usize, b_a: usize },
}

impl CaseEvent {
    pub fn label(&self) -> &'static str {
        match self {
            CaseEvent::Case1 { .. } => "1",
            CaseEvent::Case2a { .. } => "2a",
            CaseEvent::Case2b { .. } => "2b",
            CaseEvent::Case2c { .. } => "2c",
            CaseEvent::Case3 { .. } => "3",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum V2 {
    None,
    /// A second hub was promised at depth `d2`; `frontier` is the next stub
    /// on the committed chain, `end` the deepest materialized chain vertex.
    Designated { frontier: VertexId, end: VertexId },
    /// The committed chain was cut off by budget depletion before reaching
    /// depth `d2`; `end` is where it stopped.
    Dead { end: VertexId },
    Materialized { vertex: VertexId },
}

#[derive(Debug, Clone)]
struct SubtreeState {
    v1: Option<VertexId>,
    /// Deepest materialized vertex of the access path (depth <= d1).
    path_tip: VertexId,
    v2: V2,
    v2_branch: Option<VertexId>,
    n_budget: usize,
    presented_nonleaf: usize,
    v1_active: bool,
    v2_active: bool,
    stop_all_d2: bool,
    stop_all_d1: bool,
    case_log: Vec<CaseEvent>,
    a1: Vec<usize>,
    a2: Vec<(usize, usize)>,
    /// Vertices explored per agent strictly below the first hub.
    explored_by: HashMap<usize, usize>,
}

#[derive(Debug, Clone, Default)]
struct AgentTrack {
    trees: Vec<usize>,
    b_a: usize,
    pos: VertexId,
    energy: usize,
}

/// Per-subtree summary published at finalization.
#[derive(Debug, Clone)]
pub struct SubtreeReport {
    pub index: usize,
    pub v1: VertexId,
    pub v2: Option<VertexId>,
    /// Path vertices strictly below the first hub attributed to the first
    /// fresh agent (includes the second hub when it exists).
    pub v2_attrib_chain: Vec<VertexId>,
    pub case_log: Vec<CaseEvent>,
    pub n_budget: usize,
    pub presented_nonleaf: usize,
    pub v1_active: bool,
    pub fully_explored: bool,
    pub a1: Vec<usize>,
    pub a2: Vec<(usize, usize)>,
    pub u_vertex: Option<VertexId>,
}

/// Finalization output: chosen attachment points, the analytic optimum
/// bound, and everything the lemma checkers consume.
#[derive(Debug, Clone)]
pub struct FinalReport {
    pub params: LbParams,
    pub t: usize,
    pub subtrees: Vec<SubtreeReport>,
    pub opt_bound: i128,
    pub u_one: VertexId,
    /// First id materialized by finalization (skeleton/chain completion).
    pub watermark: VertexId,
    /// First id belonging to an attached optimum path.
    pub upath_watermark: VertexId,
    pub alg_explored_excl_root: usize,
}

/// Prescribed offline plan: per agent, waypoints to walk through in order
/// (each leg along the shortest path) until energy runs out.
#[derive(Debug, Clone)]
pub struct OptPlan {
    pub agents: Vec<Vec<VertexId>>,
}

pub struct AdaptiveAdversary {
    p: LbParams,
    parent: Vec<Option<VertexId>>,
    depth: Vec<usize>,
    children: Vec<Vec<VertexId>>,
    subtree: Vec<Option<usize>>,
    below_v2: Vec<bool>,
    /// The hub-child ancestor of each vertex strictly below its first hub.
    branch_at_v1: Vec<Option<VertexId>>,
    explored: Vec<bool>,
    subs: Vec<SubtreeState>,
    agents: Vec<AgentTrack>,
}

enum Decision {
    Hub { is_v2: bool },
    Extend { designated: bool },
    Leaf,
}

impl AdaptiveAdversary {
    pub fn new(p: LbParams) -> AdaptiveAdversary {
        AdaptiveAdversary {
            p,
            parent: Vec::new(),
            depth: Vec::new(),
            children: Vec::new(),
            subtree: Vec::new(),
            below_v2: Vec::new(),
            branch_at_v1: Vec::new(),
            explored: Vec::new(),
            subs: Vec::new(),
            agents: vec![AgentTrack::default(); p.k()],
        }
    }

    pub fn params(&self) -> &LbParams {
        &self.p
    }

    fn alloc(&mut self, parent: Option<VertexId>, subtree: Option<usize>) -> VertexId {
        let id = self.parent.len();
        let depth = parent.map_or(0, |q| self.depth[q] + 1);
        self.parent.push(parent);
        self.depth.push(depth);
        self.children.push(Vec::new());
        self.subtree.push(subtree);
        self.explored.push(false);
        let (below_v2, branch) = match (parent, subtree) {
            (Some(q), Some(i)) => {
                let s = &self.subs[i];
                let below = matches!(s.v2, V2::Materialized { vertex } if vertex == q)
                    || self.below_v2[q];
                let branch = if s.v1 == Some(q) {
                    Some(id)
                } else {
                    self.branch_at_v1[q]
                };
                (below, branch)
            }
            _ => (false, None),
        };
        self.below_v2.push(below_v2);
        self.branch_at_v1.push(branch);
        if let Some(q) = parent {
            self.children[q].push(id);
        }
        if let Some(i) = subtree {
            if depth == self.p.d1 {
                debug_assert!(self.subs[i].v1.is_none());
                self.subs[i].v1 = Some(id);
            } else if depth < self.p.d1 {
                self.subs[i].path_tip = id;
            }
        }
        id
    }

    pub(crate) fn init(&mut self) -> (VertexId, Vec<VertexId>) {
        let root = self.alloc(None, None);
        self.explored[root] = true;
        self.subs = (0..self.p.l)
            .map(|_| SubtreeState {
                v1: None,
                path_tip: root,
                v2: V2::None,
                v2_branch: None,
                n_budget: 2,
                presented_nonleaf: 0,
                v1_active: true,
                v2_active: false,
                stop_all_d2: false,
                stop_all_d1: false,
                case_log: Vec::new(),
                a1: Vec::new(),
                a2: Vec::new(),
                explored_by: HashMap::new(),
            })
            .collect();
        let children: Vec<VertexId> = (0..self.p.l).map(|i| self.alloc(Some(root), Some(i))).collect();
        for track in self.agents.iter_mut() {
            track.pos = root;
            track.energy = self.p.budget;
        }
        (root, children)
    }

    pub(crate) fn on_arrival(&mut self, ctx: &Arrival) {
        let track = &mut self.agents[ctx.agent];
        track.pos = ctx.to;
        track.energy = ctx.energy_after;
        let Some(i) = self.subtree[ctx.to] else { return };
        if self.subs[i].v1 != Some(ctx.to) {
            return;
        }
        if self.agents[ctx.agent].trees.contains(&i) {
            return;
        }
        self.agents[ctx.agent].trees.push(i);
        match self.agents[ctx.agent].trees.len() {
            1 => self.on_fresh_entry(i, ctx.agent),
            2 => self.on_second_tree_entry(i, ctx.agent, ctx.energy_after),
            n => panic!("agent {} entered a {n}-th subtree; construction guarantees at most two", ctx.agent),
        }
    }

    fn on_fresh_entry(&mut self, i: usize, agent: usize) {
        self.subs[i].a1.push(agent);
        match self.subs[i].a1.len() {
            1 => {
                let bump = (self.p.budget + self.p.d2) / 2 - self.p.d1 + 2 * self.p.delta;
                self.subs[i].n_budget += bump;
                self.subs[i].case_log.push(CaseEvent::Case1 { agent });
            }
            2 => self.on_second_fresh_entry(i, agent),
            _ => {}
        }
    }

    fn on_second_fresh_entry(&mut self, i: usize, agent: usize) {
        let a1 = self.subs[i].a1[0];
        let explored_by_a1 = self.subs[i].explored_by.get(&a1).copied().unwrap_or(0);
        if explored_by_a1 <= (self.p.d1 + self.p.d2) / 2 {
            let s = &mut self.subs[i];
            s.v1_active = false;
            s.v2_active = false;
            if let V2::Designated { end, .. } = s.v2 {
                s.v2 = V2::Dead { end };
            }
            s.case_log.push(CaseEvent::Case2a { agent });
            return;
        }
        if matches!(self.subs[i].v2, V2::Materialized { .. }) {
            let s = &mut self.subs[i];
            s.v1_active = false;
            s.stop_all_d2 = true;
            s.case_log.push(CaseEvent::Case2b { agent });
            return;
        }
        if let Some(stub) = self.designation_target(i, a1) {
            let s = &mut self.subs[i];
            s.v1_active = false;
            s.stop_all_d2 = true;
            s.v2 = V2::Designated { frontier: stub, end: stub };
            s.case_log.push(CaseEvent::Case2b { agent });
            self.subs[i].v2_branch = self.branch_at_v1[stub];
            return;
        }
        let s = &mut self.subs[i];
        s.stop_all_d1 = true;
        s.case_log.push(CaseEvent::Case2c { agent });
    }

    /// The stub the committed second-hub chain will run through: the first
    /// fresh agent must be able to reach depth `d2` through it. Cheapest
    /// total cost first, then deepest, then smallest id.
    fn designation_target(&self, i: usize, a1: usize) -> Option<VertexId> {
        if !self.subs[i].v1_active || self.depleted(i) {
            return None;
        }
        let track = &self.agents[a1];
        let mut best: Option<(usize, usize, VertexId)> = None;
        for v in 0..self.parent.len() {
            if self.explored[v] || self.subtree[v] != Some(i) || self.depth[v] <= self.p.d1 {
                continue;
            }
            if self.depth[v] > self.p.d2 {
                continue;
            }
            let cost = self.dist(track.pos, v) + (self.p.d2 - self.depth[v]);
            if cost > track.energy {
                continue;
            }
            let key = (cost, self.p.d2 - self.depth[v], v);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        best.map(|(_, _, v)| v)
    }

    fn on_second_tree_entry(&mut self, i: usize, agent: usize, b_a: usize) {
        assert!(
            b_a + 3 * self.p.d1 <= self.p.budget,
            "agent {agent} entered a second subtree with energy {b_a} > budget - 3*d1"
        );
        debug_assert_eq!(b_a % 2, 0);
        self.agents[agent].b_a = b_a;
        self.subs[i].a2.push((agent, b_a));
        self.subs[i].n_budget += b_a / 2 + 2;
        self.subs[i].case_log.push(CaseEvent::Case3 { agent, b_a });
    }

    fn dist(&self, u: VertexId, v: VertexId) -> usize {
        let (mut a, mut b) = (u, v);
        let mut d = 0;
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].unwrap();
            d += 1;
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].unwrap();
            d += 1;
        }
        while a != b {
            a = self.parent[a].unwrap();
            b = self.parent[b].unwrap();
            d += 2;
        }
        d
    }

    fn depleted(&self, i: usize) -> bool {
        self.subs[i].presented_nonleaf >= self.subs[i].n_budget
    }

    /// Counts a non-leaf presentation against `N_i`; once the budget is
    /// reached both adaptive trees become passive.
    fn try_consume_nonleaf(&mut self, i: usize) -> bool {
        if self.depleted(i) {
            return false;
        }
        let s = &mut self.subs[i];
        s.presented_nonleaf += 1;
        if s.presented_nonleaf == s.n_budget {
            s.v1_active = false;
            s.v2_active = false;
            if let V2::Designated { end, .. } = s.v2 {
                s.v2 = V2::Dead { end };
            }
        }
        true
    }

    fn stop_rule_fires(&self, i: usize, v: VertexId, agent: usize, e: usize, d: usize) -> bool {
        let s = &self.subs[i];
        let (d1, d2) = (self.p.d1, self.p.d2);
        if s.a1.first() == Some(&agent) && d > d2 && e <= d - d2 {
            return true;
        }
        if s.stop_all_d2 && d > d2 && e <= d - d2 {
            return true;
        }
        if s.stop_all_d1 && d > d1 && e <= d - d1 {
            return true;
        }
        if s.a2.iter().any(|&(a, _)| a == agent) {
            if self.below_v2[v] {
                if d > d2 && e <= d - d2 {
                    return true;
                }
            } else if (self.branch_at_v1[v] != s.v2_branch || s.v2_branch.is_none())
                && d > d1
                && e <= d - d1
            {
                return true;
            }
        }
        false
    }

    fn decide(&mut self, i: usize, v: VertexId, agent: usize, e: usize, d: usize) -> Decision {
        if let V2::Designated { frontier, .. } = self.subs[i].v2 {
            if frontier == v {
                if !self.try_consume_nonleaf(i) {
                    self.subs[i].v2 = V2::Dead { end: v };
                    return Decision::Leaf;
                }
                return if d == self.p.d2 {
                    Decision::Hub { is_v2: true }
                } else {
                    Decision::Extend { designated: true }
                };
            }
        }
        if self.stop_rule_fires(i, v, agent, e, d) {
            return Decision::Leaf;
        }
        let s = &self.subs[i];
        let active = if self.below_v2[v] { s.v2_active } else { s.v1_active };
        if !active || self.depleted(i) {
            return Decision::Leaf;
        }
        if matches!(s.v2, V2::None) && s.a1.first() == Some(&agent) && d == self.p.d2 {
            return if self.try_consume_nonleaf(i) {
                Decision::Hub { is_v2: true }
            } else {
                Decision::Leaf
            };
        }
        if self.try_consume_nonleaf(i) {
            Decision::Extend { designated: false }
        } else {
            Decision::Leaf
        }
    }

    pub(crate) fn reveal(&mut self, ctx: &Arrival) -> Vec<VertexId> {
        let v = ctx.to;
        debug_assert!(!self.explored[v]);
        debug_assert_eq!(self.depth[v], ctx.depth_to);
        self.explored[v] = true;
        let i = self.subtree[v].expect("only the root has no subtree and it is pre-explored");
        let d = self.depth[v];

        if d < self.p.d1 {
            return vec![self.alloc(Some(v), Some(i))];
        }
        if d == self.p.d1 {
            return (0..self.p.delta).map(|_| self.alloc(Some(v), Some(i))).collect();
        }

        self.subs[i]
            .explored_by
            .entry(ctx.agent)
            .and_modify(|c| *c += 1)
            .or_insert(1);

        match self.decide(i, v, ctx.agent, ctx.energy_after, d) {
            Decision::Hub { is_v2 } => {
                if is_v2 {
                    self.subs[i].v2 = V2::Materialized { vertex: v };
                    self.subs[i].v2_active = true;
                    if self.subs[i].v2_branch.is_none() {
                        self.subs[i].v2_branch = self.branch_at_v1[v];
                    }
                }
                (0..self.p.delta).map(|_| self.alloc(Some(v), Some(i))).collect()
            }
            Decision::Extend { designated } => {
                let child = self.alloc(Some(v), Some(i));
                if designated {
                    self.subs[i].v2 = V2::Designated { frontier: child, end: child };
                }
                vec![child]
            }
            Decision::Leaf => Vec::new(),
        }
    }

    fn subtree_fully_explored(&self, i: usize) -> bool {
        let Some(v1) = self.subs[i].v1 else { return false };
        if !self.explored[v1] {
            return false;
        }
        (0..self.parent.len()).all(|v| {
            self.subtree[v] != Some(i) || self.depth[v] <= self.p.d1 || self.explored[v]
        })
    }

    /// Completes the lazily materialized tree, attaches the optimum paths
    /// and returns the finalized instance tree together with the report and
    /// the prescribed offline plan.
    pub fn finalize(&mut self) -> (Tree, FinalReport, OptPlan) {
        let fully: Vec<bool> = (0..self.p.l).map(|i| self.subtree_fully_explored(i)).collect();
        let t = fully.iter().filter(|&&f| f).count();
        assert!(t < self.p.l, "at least one subtree must stay incomplete");

        let watermark = self.parent.len();

        // Complete the skeleton: every access path runs to its hub and every
        // hub has its full fan-out of (possibly unexplored) path starts.
        for i in 0..self.p.l {
            while self.subs[i].v1.is_none() {
                let tip = self.subs[i].path_tip;
                self.alloc(Some(tip), Some(i));
            }
            let v1 = self.subs[i].v1.unwrap();
            if self.explored[v1] {
                continue;
            }
            debug_assert!(self.children[v1].is_empty());
            for _ in 0..self.p.delta {
                self.alloc(Some(v1), Some(i));
            }
        }
        // Complete live designated chains into real second hubs.
        for i in 0..self.p.l {
            if let V2::Designated { frontier, .. } = self.subs[i].v2 {
                let mut cur = frontier;
                while self.depth[cur] < self.p.d2 {
                    cur = self.alloc(Some(cur), Some(self.subtree[frontier].unwrap()));
                }
                self.subs[i].v2 = V2::Materialized { vertex: cur };
                for _ in 0..self.p.delta {
                    self.alloc(Some(cur), Some(i));
                }
            }
        }

        // Attachment points: u_1 sits in a subtree that saw at most one
        // fresh agent and must be shallow; the others only need to exist.
        let shallow_unexplored = |adv: &Self, i: usize| -> Option<VertexId> {
            (0..adv.parent.len())
                .filter(|&v| {
                    adv.subtree[v] == Some(i) && !adv.explored[v] && adv.depth[v] >= adv.p.d1
                })
                .min_by_key(|&v| (adv.depth[v], v))
        };
        let host = (0..self.p.l)
            .find(|&i| self.subs[i].a1.len() <= 1)
            .expect("with 2l-1 agents some subtree sees at most one fresh agent");
        assert!(!fully[host]);
        let u_one = shallow_unexplored(self, host).expect("incomplete subtree has an unexplored vertex");
        assert!(
            self.depth[u_one] <= self.p.d1 + self.p.delta,
            "u_1 at depth {} exceeds d1 + delta",
            self.depth[u_one]
        );

        let mut u_vertex: Vec<Option<VertexId>> = vec![None; self.p.l];
        u_vertex[host] = Some(u_one);
        for i in 0..self.p.l {
            if !fully[i] && i != host {
                u_vertex[i] = Some(shallow_unexplored(self, i).expect("incomplete subtree has an unexplored vertex"));
            }
        }

        let upath_watermark = self.parent.len();
        let attach_path = |adv: &mut Self, at: VertexId| -> VertexId {
            let i = adv.subtree[at];
            let mut cur = at;
            for _ in 0..adv.p.budget {
                cur = adv.alloc(Some(cur), i);
            }
            cur
        };
        let mut u_one_leaves = Vec::with_capacity(2 * self.p.l - 1);
        for _ in 0..2 * self.p.l - 1 {
            u_one_leaves.push(attach_path(self, u_one));
        }
        let mut other_leaves: Vec<(usize, VertexId)> = Vec::new();
        let targets: Vec<(usize, VertexId)> = u_vertex
            .iter()
            .enumerate()
            .filter(|&(i, u)| i != host && u.is_some())
            .map(|(i, u)| (i, u.unwrap()))
            .collect();
        for (i, u) in targets {
            other_leaves.push((i, attach_path(self, u)));
        }

        // Offline plan: one agent per incomplete subtree walks to u_i and
        // down a fresh path; the remaining l-1+t agents all reuse u_1.
        let mut plan: Vec<Vec<VertexId>> = Vec::with_capacity(self.p.k());
        plan.push(vec![u_one, u_one_leaves[0]]);
        for &(i, leaf) in &other_leaves {
            plan.push(vec![u_vertex[i].unwrap(), leaf]);
        }
        let mut next_u1_path = 1;
        while plan.len() < self.p.k() {
            plan.push(vec![u_one, u_one_leaves[next_u1_path]]);
            next_u1_path += 1;
        }

        let tree = self.build_tree();
        let report = FinalReport {
            params: self.p,
            t,
            opt_bound: self.p.opt_bound(t),
            u_one,
            watermark,
            upath_watermark,
            alg_explored_excl_root: self.explored.iter().filter(|&&e| e).count() - 1,
            subtrees: (0..self.p.l)
                .map(|i| {
                    let s = &self.subs[i];
                    let (v2, chain_end) = match s.v2 {
                        V2::None => (None, None),
                        V2::Materialized { vertex } => (Some(vertex), Some(vertex)),
                        V2::Dead { end } => (None, Some(end)),
                        V2::Designated { .. } => unreachable!("chains were completed above"),
                    };
                    let v2_attrib_chain = chain_end.map_or(Vec::new(), |end| {
                        let mut chain = Vec::new();
                        let mut cur = end;
                        while Some(cur) != s.v1 {
                            chain.push(cur);
                            cur = self.parent[cur].unwrap();
                        }
                        chain.reverse();
                        chain
                    });
                    SubtreeReport {
                        index: i,
                        v1: s.v1.unwrap(),
                        v2,
                        v2_attrib_chain,
                        case_log: s.case_log.clone(),
                        n_budget: s.n_budget,
                        presented_nonleaf: s.presented_nonleaf,
                        v1_active: s.v1_active,
                        fully_explored: fully[i],
                        a1: s.a1.clone(),
                        a2: s.a2.clone(),
                        u_vertex: u_vertex[i],
                    }
                })
                .collect(),
        };
        (tree, report, OptPlan { agents: plan })
    }

    fn build_tree(&self) -> Tree {
        let n = self.parent.len();
        let mut edges = Vec::with_capacity(n - 1);
        for v in 0..n {
            for (idx, &c) in self.children[v].iter().enumerate() {
                let port = if self.parent[v].is_none() { idx } else { idx + 1 };
                edges.push((v, c, port, 0));
            }
        }
        Tree::from_edges(n, 0, &edges).expect("adversary arena forms a valid tree")
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{ExplorationState, World};

    fn desk_params() -> LbParams {
        LbParams::new(2, 1024, 260).unwrap()
    }

    /// Walks one agent straight down: port 0 at the root, then always port 1.
    fn straight_down(st: &mut ExplorationState, agent: usize) {
        let mut port = 0;
        while st.agent(agent).energy > 0 {
            let pos = st.agent(agent).pos;
            if st.known.degree(pos) <= port {
                break;
            }
            let target = st.known.target(pos, port).unwrap();
            if st.known.is_explored(target) && st.known.degree(target) == 1 {
                break;
            }
            st.traverse(agent, port).unwrap();
            port = 1;
        }
    }

    #[test]
    fn first_agent_meets_hub_second_hub_and_stop_rule() {
        let p = desk_params();
        let mut st = ExplorationState::new(World::Adaptive(AdaptiveAdversary::new(p)), p.k(), p.budget);
        straight_down(&mut st, 0);
        // depth at which the stop rule fires going straight down:
        // budget - d = d - d2  =>  d = (budget + d2) / 2 = 703
        let agent = st.agent(0);
        assert_eq!(st.known.depth(agent.pos), (p.budget + p.d2) / 2);
        assert_eq!(agent.energy, p.budget - (p.budget + p.d2) / 2);
        // hub degrees along the way
        let World::Adaptive(adv) = &st.world else { unreachable!() };
        let v1 = adv.subs[0].v1.unwrap();
        assert_eq!(st.known.degree(v1), p.delta + 1);
        assert_eq!(st.known.depth(v1), p.d1);
        let V2::Materialized { vertex: v2 } = adv.subs[0].v2 else {
            panic!("straight descent by the first fresh agent must create the second hub")
        };
        assert_eq!(st.known.depth(v2), p.d2);
        assert_eq!(st.known.degree(v2), p.delta + 1);
        assert_eq!(adv.subs[0].case_log.len(), 1);
        assert_eq!(adv.subs[0].case_log[0].label(), "1");
    }

    fn fresh_state(p: LbParams) -> ExplorationState {
        ExplorationState::new(World::Adaptive(AdaptiveAdversary::new(p)), p.k(), p.budget)
    }

    /// Traverse `port` once, then port 1 for `count - 1` further steps.
    fn down(st: &mut ExplorationState, agent: usize, port: usize, count: usize) {
        if count == 0 {
            return;
        }
        st.traverse(agent, port).unwrap();
        for _ in 1..count {
            st.traverse(agent, 1).unwrap();
        }
    }

    fn climb(st: &mut ExplorationState, agent: usize, count: usize) {
        for _ in 0..count {
            st.traverse(agent, 0).unwrap();
        }
    }

    /// Descend through unexplored vertices (first `first_port`, then always
    /// port 1) until a leaf, explored ground or exhaustion stops the agent.
    fn descend_until_leaf(st: &mut ExplorationState, agent: usize, first_port: usize) {
        let mut port = first_port;
        loop {
            let pos = st.agent(agent).pos;
            match st.known.target(pos, port) {
                Some(t) if !st.known.is_explored(t) && st.agent(agent).energy > 0 => {
                    st.traverse(agent, port).unwrap();
                    port = 1;
                }
                _ => return,
            }
        }
    }

    fn sub_state(st: &ExplorationState, i: usize) -> &SubtreeState {
        let World::Adaptive(adv) = &st.world else { unreachable!() };
        &adv.subs[i]
    }

    fn case_labels(st: &ExplorationState, i: usize) -> Vec<&'static str> {
        sub_state(st, i).case_log.iter().map(|c| c.label()).collect()
    }

    fn run_checks(mut st: ExplorationState) {
        let trace = st.trace.clone();
        let World::Adaptive(adv) = &mut st.world else { unreachable!() };
        let (tree, report, _plan) = adv.finalize();
        let l3 = crate::adversary::checks::check_lemma3(&trace, &tree, &report);
        let l4 = crate::adversary::checks::check_lemma4(&trace, &tree, &report);
        for c in l3.iter().chain(l4.iter()) {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
    }

    /// A barely-started first agent makes the second fresh entry passivate
    /// both adaptive trees; a tree-hopping agent raises the budget on entry.
    #[test]
    fn case_2a_and_case_3_bookkeeping() {
        let p = desk_params();
        let mut st = fresh_state(p);
        // agent 0: to the first hub, then 10 vertices deep
        down(&mut st, 0, 0, p.d1);
        down(&mut st, 0, 1, 10);
        // agent 1: second fresh entry while agent 0 explored 10 <= (d1+d2)/2
        down(&mut st, 1, 0, p.d1);
        assert_eq!(case_labels(&st, 0), vec!["1", "2a"]);
        assert!(!sub_state(&st, 0).v1_active);
        // passive tree: the next stub is a leaf
        let v1 = sub_state(&st, 0).v1.unwrap();
        assert_eq!(st.agent(1).pos, v1);
        st.traverse(1, 2).unwrap();
        assert_eq!(st.known.degree(st.agent(1).pos), 1);
        // agent 2: enters the other subtree first, then returns into this one
        down(&mut st, 2, 1, p.d1);
        assert_eq!(case_labels(&st, 1), vec!["1"]);
        climb(&mut st, 2, p.d1);
        down(&mut st, 2, 0, p.d1);
        let b_a = p.budget - 3 * p.d1;
        assert_eq!(sub_state(&st, 0).a2, vec![(2, b_a)]);
        assert_eq!(case_labels(&st, 0), vec!["1", "2a", "3"]);
        assert_eq!(
            sub_state(&st, 0).n_budget,
            2 + (p.budget + p.d2) / 2 - p.d1 + 2 * p.delta + b_a / 2 + 2
        );
        run_checks(st);
    }

    /// Three hub-path round trips leave the first agent with plenty
    /// explored but no way to reach depth d2, so the second fresh entry
    /// arms the shallow stop rule.
    #[test]
    fn case_2c_arms_the_shallow_stop_rule() {
        let p = desk_params();
        let reach = p.d2 - p.d1 - 1; // down to depth d2 - 1
        let mut st = fresh_state(p);
        down(&mut st, 0, 0, p.d1);
        for port in [1, 2, 3] {
            down(&mut st, 0, port, reach);
            climb(&mut st, 0, reach);
        }
        assert_eq!(st.agent(0).energy, p.budget - p.d1 - 6 * reach);
        down(&mut st, 1, 0, p.d1);
        assert_eq!(case_labels(&st, 0), vec!["1", "2c"]);
        assert!(sub_state(&st, 0).stop_all_d1);
        assert!(sub_state(&st, 0).v1_active);
        // burn energy on explored ground so the armed rule fires before the
        // non-leaf budget runs out, then descend a fresh path: it ends
        // where the remaining energy exactly covers the climb back
        for port in [1, 2] {
            down(&mut st, 1, port, reach);
            climb(&mut st, 1, reach);
        }
        descend_until_leaf(&mut st, 1, 4);
        let d = st.known.depth(st.agent(1).pos);
        assert_eq!(st.agent(1).energy, d - p.d1);
        assert_eq!(2 * d, p.budget + p.d1 - 4 * reach);
        run_checks(st);
    }

    /// The second fresh entry finds the first agent short of depth d2 but
    /// able to reach it through a stub: the adversary commits to a chain
    /// that later becomes a real second hub.
    #[test]
    fn case_2b_designates_a_reachable_second_hub() {
        let p = desk_params();
        let reach = p.d2 - p.d1 - 1;
        let mut st = fresh_state(p);
        down(&mut st, 0, 0, p.d1);
        for port in [1, 2] {
            down(&mut st, 0, port, reach);
            climb(&mut st, 0, reach);
        }
        // partial third descent: enough explored, still mobile
        let partial = (p.d1 + p.d2) / 2 + 1 - 2 * reach;
        down(&mut st, 0, 3, partial);
        down(&mut st, 1, 0, p.d1);
        assert_eq!(case_labels(&st, 0), vec!["1", "2b"]);
        {
            let s = sub_state(&st, 0);
            assert!(!s.v1_active);
            assert!(s.stop_all_d2);
            let V2::Designated { frontier, .. } = s.v2 else {
                panic!("expected a designated chain, got {:?}", s.v2)
            };
            assert_eq!(st.known.depth(frontier), p.d1 + partial + 1);
        }
        // agent 0 walks the committed chain into a real hub at depth d2
        while !matches!(sub_state(&st, 0).v2, V2::Materialized { .. }) {
            st.traverse(0, 1).unwrap();
        }
        let V2::Materialized { vertex: v2 } = sub_state(&st, 0).v2 else {
            unreachable!()
        };
        assert_eq!(st.known.depth(v2), p.d2);
        assert_eq!(st.known.degree(v2), p.delta + 1);
        // below the new hub the late stop rule ends the path with exactly
        // the energy to climb back
        while st.known.stubs_below(st.agent(0).pos) > 0 && st.agent(0).energy > 0 {
            st.traverse(0, 1).unwrap();
        }
        let d = st.known.depth(st.agent(0).pos);
        assert_eq!(st.agent(0).energy, d - p.d2);
        run_checks(st);
    }

    /// An agent whose first hub visit happens after a different subtree:
    /// the per-agent stop rules fire both below the first hub and below a
    /// second hub created by someone else.
    #[test]
    fn case_3_stop_rules_fire_on_both_hub_levels() {
        let p = desk_params();
        let mut st = fresh_state(p);
        // agent 0 builds the second hub in subtree 0 by straight descent
        straight_down(&mut st, 0);
        let v2 = {
            let V2::Materialized { vertex } = sub_state(&st, 0).v2 else {
                panic!("straight descent creates the second hub")
            };
            vertex
        };
        // agent 1 hops: first into subtree 1, then into subtree 0
        down(&mut st, 1, 1, p.d1);
        climb(&mut st, 1, p.d1);
        down(&mut st, 1, 0, p.d1);
        let b_a = p.budget - 3 * p.d1;
        assert_eq!(sub_state(&st, 0).a2, vec![(1, b_a)]);
        // descend the explored chain to the second hub, then explore below
        down(&mut st, 1, 1, p.d2 - p.d1);
        assert_eq!(st.agent(1).pos, v2);
        descend_until_leaf(&mut st, 1, 2);
        // the path ends leaving exactly the climb back to the second hub
        let d = st.known.depth(st.agent(1).pos);
        assert!(d > p.d2);
        assert_eq!(st.agent(1).energy, d - p.d2);
        // and a second-tree agent never creates hubs in a fresh region:
        // subtree 1 keeps only its first-level hub
        assert!(matches!(sub_state(&st, 1).v2, V2::None));
        run_checks(st);
    }

    /// A subtree entered only by a tree-hopping agent: the budget rises by
    /// the entry rule and the shallow stop rule caps the descent.
    #[test]
    fn second_tree_only_subtree_stays_shallow() {
        let p = desk_params();
        let mut st = fresh_state(p);
        down(&mut st, 0, 1, p.d1); // fresh in subtree 1
        climb(&mut st, 0, p.d1);
        down(&mut st, 0, 0, p.d1); // second tree: subtree 0
        let b_a = p.budget - 3 * p.d1;
        assert!(sub_state(&st, 0).a1.is_empty());
        assert_eq!(sub_state(&st, 0).n_budget, 2 + b_a / 2 + 2);
        // straight descent below the hub ends at depth where energy equals
        // the climb back: d - d1 = b_a - (d - d1)
        descend_until_leaf(&mut st, 0, 1);
        let d = st.known.depth(st.agent(0).pos);
        assert_eq!(d - p.d1, b_a / 2);
        run_checks(st);
    }

    #[test]
    fn finalize_untouched_run_attaches_plan_paths() {
        let p = desk_params();
        let mut st = ExplorationState::new(World::Adaptive(AdaptiveAdversary::new(p)), p.k(), p.budget);
        // no moves at all
        let World::Adaptive(adv) = &mut st.world else { unreachable!() };
        let (tree, report, plan) = adv.finalize();
        assert_eq!(report.t, 0);
        assert_eq!(plan.agents.len(), p.k());
        assert_eq!(report.opt_bound, p.opt_bound(0));
        // u_1 is the untouched first hub at depth d1
        assert_eq!(tree.depth(report.u_one), p.d1);
        assert!(tree.degree(report.u_one) >= 2 * p.l - 1);
        assert!(tree.is_normalized());
    }
}
