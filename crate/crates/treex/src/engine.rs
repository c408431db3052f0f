//! Execution engine: agent moves on a (possibly lazily revealed) tree, the
//! globally shared knowledge map, energies and the event trace.
//!
//! One [`ExplorationState`] is confined to a single logical thread; distinct
//! runs are independent. The trace is the single source of truth for all
//! checkers downstream: they never read engine internals.

use std::fmt::Write as _;

use thiserror::Error;

use crate::adversary::{AdaptiveAdversary, StarAdversary};
use crate::tree::{Tree, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MoveError {
    #[error("agent {0} is out of energy")]
    OutOfEnergy(usize),
    #[error("invalid port {port} at vertex {vertex}")]
    InvalidPort { vertex: VertexId, port: usize },
    #[error("move submitted after the run finished")]
    RunFinished,
    #[error("unknown agent {0}")]
    UnknownAgent(usize),
}

/// What the agents collectively know: explored vertices with their full port
/// maps, and stubs (known-to-exist, not-yet-visited vertices implied by
/// unused ports).
///
/// Invariants: the root is always explored; knowledge only grows; at every
/// explored vertex the number of explored-neighbor ports plus stub ports
/// equals the degree; a stub's depth is its attachment depth plus one.
#[derive(Debug, Clone)]
pub struct KnownMap {
    root: VertexId,
    depth: Vec<usize>,
    parent: Vec<Option<VertexId>>,
    /// `Some(ports)` for explored vertices, `None` for stubs.
    ports: Vec<Option<Vec<VertexId>>>,
    /// Number of stubs strictly below each vertex.
    stubs_below: Vec<usize>,
    stub_count: usize,
    explored_count: usize,
}

impl KnownMap {
    fn new(root: VertexId, root_children: &[VertexId]) -> KnownMap {
        let mut km = KnownMap {
            root,
            depth: Vec::new(),
            parent: Vec::new(),
            ports: Vec::new(),
            stubs_below: Vec::new(),
            stub_count: 0,
            explored_count: 0,
        };
        km.ensure(root);
        km.depth[root] = 0;
        km.ports[root] = Some(root_children.to_vec());
        km.explored_count = 1;
        for &c in root_children {
            km.add_stub(c, root);
        }
        km.stubs_below[root] = root_children.len();
        km
    }

    fn ensure(&mut self, id: VertexId) {
        if self.depth.len() <= id {
            let n = id + 1;
            self.depth.resize(n, usize::MAX);
            self.parent.resize(n, None);
            self.ports.resize(n, None);
            self.stubs_below.resize(n, 0);
        }
    }

    fn add_stub(&mut self, id: VertexId, parent: VertexId) {
        self.ensure(id);
        debug_assert_eq!(self.depth[id], usize::MAX, "vertex {id} already known");
        self.depth[id] = self.depth[parent] + 1;
        self.parent[id] = Some(parent);
        self.stub_count += 1;
    }

    /// Marks stub `v` explored with `children` behind ports `1..=children.len()`
    /// (port 0 is the arrival edge back to `from`).
    fn explore(&mut self, v: VertexId, from: VertexId, children: &[VertexId]) {
        debug_assert!(self.is_stub(v));
        let mut ports = Vec::with_capacity(children.len() + 1);
        ports.push(from);
        ports.extend_from_slice(children);
        self.ports[v] = Some(ports);
        self.explored_count += 1;
        for &c in children {
            self.add_stub(c, v);
        }
        self.stubs_below[v] = children.len();
        self.stub_count -= 1; // v itself; the children were counted above
        // for every proper ancestor, v stopped being a stub but its
        // children appeared
        let delta = children.len() as isize - 1;
        let mut cur = from;
        loop {
            self.stubs_below[cur] = (self.stubs_below[cur] as isize + delta) as usize;
            match self.parent[cur] {
                Some(p) => cur = p,
                None => break,
            }
        }
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn is_known(&self, v: VertexId) -> bool {
        v < self.depth.len() && self.depth[v] != usize::MAX
    }

    pub fn is_explored(&self, v: VertexId) -> bool {
        v < self.ports.len() && self.ports[v].is_some()
    }

    pub fn is_stub(&self, v: VertexId) -> bool {
        self.is_known(v) && self.ports[v].is_none()
    }

    pub fn depth(&self, v: VertexId) -> usize {
        debug_assert!(self.is_known(v));
        self.depth[v]
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    /// Port map of an explored vertex.
    pub fn ports(&self, v: VertexId) -> &[VertexId] {
        self.ports[v].as_deref().expect("vertex not explored")
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.ports(v).len()
    }

    pub fn target(&self, v: VertexId, port: usize) -> Option<VertexId> {
        self.ports[v].as_deref().and_then(|p| p.get(port)).copied()
    }

    /// Port at `v` leading to its known neighbor `w`.
    pub fn port_to(&self, v: VertexId, w: VertexId) -> Option<usize> {
        self.ports[v].as_deref().and_then(|p| p.iter().position(|&x| x == w))
    }

    /// Number of stubs strictly below `v`.
    pub fn stubs_below(&self, v: VertexId) -> usize {
        self.stubs_below[v]
    }

    pub fn stub_count(&self) -> usize {
        self.stub_count
    }

    /// Upper bound (exclusive) on allocated vertex ids.
    pub fn len_ids(&self) -> usize {
        self.depth.len()
    }

    pub fn explored_count(&self) -> usize {
        self.explored_count
    }

    /// All current stubs, in increasing id order.
    pub fn stubs(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.depth.len()).filter(|&v| self.is_stub(v))
    }

    /// Tree distance between two known vertices, via depths and parents.
    pub fn distance(&self, u: VertexId, v: VertexId) -> usize {
        let (mut a, mut b) = (u, v);
        let mut dist = 0;
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].unwrap();
            dist += 1;
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].unwrap();
            dist += 1;
        }
        while a != b {
            a = self.parent[a].unwrap();
            b = self.parent[b].unwrap();
            dist += 2;
        }
        dist
    }
}

/// A single mobile agent: position, remaining energy, dispatch flag.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub id: usize,
    pub pos: VertexId,
    pub energy: usize,
    pub dispatched: bool,
}

/// One traversal, as recorded in the trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveEvent {
    pub step: u64,
    pub agent: usize,
    pub from: VertexId,
    pub to: VertexId,
    pub port: usize,
    pub energy_left: usize,
    pub newly_explored: bool,
    pub iteration: u32,
}

/// Context handed to the world on every move.
#[derive(Debug, Clone, Copy)]
pub struct Arrival {
    pub agent: usize,
    pub from: VertexId,
    pub to: VertexId,
    pub port: usize,
    pub depth_to: usize,
    pub energy_after: usize,
    pub newly_explored: bool,
}

/// Ground truth behind the exploration: a fixed instance or an adaptive
/// adversary that materializes the tree on demand.
pub enum World {
    Static(Tree),
    Star(StarAdversary),
    Adaptive(AdaptiveAdversary),
}

impl World {
    fn init(&mut self) -> (VertexId, Vec<VertexId>) {
        match self {
            World::Static(t) => (t.root(), t.ports(t.root()).to_vec()),
            World::Star(a) => a.init(),
            World::Adaptive(a) => a.init(),
        }
    }

    fn on_arrival(&mut self, ctx: &Arrival) {
        match self {
            World::Static(_) => {}
            World::Star(_) => {}
            World::Adaptive(a) => a.on_arrival(ctx),
        }
    }

    fn reveal(&mut self, ctx: &Arrival) -> Vec<VertexId> {
        match self {
            World::Static(t) => {
                debug_assert_eq!(t.ports(ctx.to)[0], ctx.from);
                t.ports(ctx.to)[1..].to_vec()
            }
            World::Star(a) => a.reveal(ctx),
            World::Adaptive(a) => a.reveal(ctx),
        }
    }

    fn pending(&self) -> bool {
        false
    }

    pub fn ground_truth(&self) -> Option<&Tree> {
        match self {
            World::Static(t) => Some(t),
            _ => None,
        }
    }
}

/// Shared run state: world, knowledge map, agents and trace.
pub struct ExplorationState {
    pub world: World,
    pub known: KnownMap,
    agents: Vec<AgentState>,
    pub trace: Vec<MoveEvent>,
    pub budget: usize,
    iteration: u32,
    finished: bool,
}

impl ExplorationState {
    /// All agents start at the root with full energy; the root is explored
    /// and its degree known.
    pub fn new(mut world: World, k: usize, budget: usize) -> ExplorationState {
        assert!(k >= 1, "need at least one agent");
        let (root, children) = world.init();
        let known = KnownMap::new(root, &children);
        let agents = (0..k)
            .map(|id| AgentState {
                id,
                pos: root,
                energy: budget,
                dispatched: false,
            })
            .collect();
        ExplorationState {
            world,
            known,
            agents,
            trace: Vec::new(),
            budget,
            iteration: 0,
            finished: false,
        }
    }

    pub fn from_instance(instance: &crate::tree::Instance) -> ExplorationState {
        let tree = if instance.tree.is_normalized() {
            instance.tree.clone()
        } else {
            instance.tree.clone().normalize()
        };
        ExplorationState::new(World::Static(tree), instance.k, instance.budget)
    }

    pub fn k(&self) -> usize {
        self.agents.len()
    }

    pub fn agent(&self, id: usize) -> &AgentState {
        &self.agents[id]
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn mark_dispatched(&mut self, id: usize) {
        self.agents[id].dispatched = true;
    }

    /// Iteration id stamped on subsequent trace events.
    pub fn set_iteration(&mut self, it: u32) {
        self.iteration = it;
    }

    /// True iff nothing unexplored remains: no stubs in the known map and no
    /// pending revelation from the world.
    pub fn is_fully_explored(&self) -> bool {
        self.known.stub_count() == 0 && !self.world.pending()
    }

    pub fn finish(&mut self) {
        self.finished = true;
    }

    /// Moves an agent through `port`; if the destination was a stub, it is
    /// revealed (by ground truth or by the adversary) and the shared map is
    /// updated for all agents instantly.
    pub fn traverse(&mut self, agent: usize, port: usize) -> Result<&MoveEvent, MoveError> {
        if self.finished {
            return Err(MoveError::RunFinished);
        }
        let a = self.agents.get(agent).ok_or(MoveError::UnknownAgent(agent))?;
        if a.energy == 0 {
            return Err(MoveError::OutOfEnergy(agent));
        }
        let from = a.pos;
        let to = self
            .known
            .target(from, port)
            .ok_or(MoveError::InvalidPort { vertex: from, port })?;

        let energy_after = a.energy - 1;
        let newly = self.known.is_stub(to);
        let ctx = Arrival {
            agent,
            from,
            to,
            port,
            depth_to: self.known.depth(to),
            energy_after,
            newly_explored: newly,
        };
        self.world.on_arrival(&ctx);
        if newly {
            let children = self.world.reveal(&ctx);
            self.known.explore(to, from, &children);
        }
        self.agents[agent].energy = energy_after;
        self.agents[agent].pos = to;
        let ev = MoveEvent {
            step: self.trace.len() as u64,
            agent,
            from,
            to,
            port,
            energy_left: energy_after,
            newly_explored: newly,
            iteration: self.iteration,
        };
        self.trace.push(ev);
        Ok(self.trace.last().unwrap())
    }
}

/// Renders a trace in the line format
/// `step agent from to port energy_left newly_explored iteration_id`.
pub fn format_trace(trace: &[MoveEvent]) -> String {
    let mut out = String::new();
    for e in trace {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {} {}",
            e.step,
            e.agent,
            e.from,
            e.to,
            e.port,
            e.energy_left,
            u8::from(e.newly_explored),
            e.iteration
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Instance;

    fn path(n: usize) -> Tree {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v, usize::from(v > 1), 0)).collect();
        Tree::from_edges(n, 0, &edges).unwrap()
    }

    #[test]
    fn init_places_agents_at_root() {
        let st = ExplorationState::from_instance(&Instance::new(path(3), 2, 5));
        assert_eq!(st.k(), 2);
        assert!(st.agents().iter().all(|a| a.pos == 0 && a.energy == 5));
        assert_eq!(st.known.explored_count(), 1);
        assert_eq!(st.known.stub_count(), 1);
    }

    #[test]
    fn traverse_explores_and_decrements() {
        let mut st = ExplorationState::from_instance(&Instance::new(path(3), 1, 5));
        let ev = st.traverse(0, 0).unwrap().clone();
        assert!(ev.newly_explored);
        assert_eq!(ev.to, 1);
        assert_eq!(st.agent(0).energy, 4);
        assert_eq!(st.known.explored_count(), 2);
        // re-traversing a known edge explores nothing
        let ev = st.traverse(0, 0).unwrap().clone();
        assert!(!ev.newly_explored);
        assert_eq!(ev.to, 0);
        assert_eq!(st.known.explored_count(), 2);
    }

    #[test]
    fn zero_energy_is_an_error() {
        let mut st = ExplorationState::from_instance(&Instance::new(path(3), 1, 0));
        assert_eq!(st.traverse(0, 0), Err(MoveError::OutOfEnergy(0)));
        assert_eq!(st.known.explored_count(), 1);
    }

    #[test]
    fn invalid_port_is_an_error() {
        let mut st = ExplorationState::from_instance(&Instance::new(path(3), 1, 5));
        assert_eq!(
            st.traverse(0, 7),
            Err(MoveError::InvalidPort { vertex: 0, port: 7 })
        );
    }

    #[test]
    fn stub_counters_track_explorations() {
        // star with 3 leaves
        let t = Tree::from_edges(4, 0, &[(0, 1, 0, 0), (0, 2, 1, 0), (0, 3, 2, 0)]).unwrap();
        let mut st = ExplorationState::from_instance(&Instance::new(t, 1, 10));
        assert_eq!(st.known.stubs_below(0), 3);
        st.traverse(0, 1).unwrap();
        assert_eq!(st.known.stubs_below(0), 2);
        assert_eq!(st.known.stub_count(), 2);
        assert!(!st.is_fully_explored());
    }

    #[test]
    fn energy_conservation_holds_along_the_trace() {
        let mut st = ExplorationState::from_instance(&Instance::new(path(5), 1, 6));
        for port in [0, 1, 1, 1, 0, 0] {
            st.traverse(0, port).unwrap();
        }
        let moves = st.trace.iter().filter(|e| e.agent == 0).count();
        assert_eq!(st.agent(0).energy, 6 - moves);
        assert!(st.is_fully_explored());
    }

    #[test]
    fn known_map_distance() {
        let t = Tree::from_edges(5, 0, &[(0, 1, 0, 0), (1, 2, 1, 0), (0, 3, 1, 0), (3, 4, 1, 0)])
            .unwrap();
        let mut st = ExplorationState::from_instance(&Instance::new(t, 1, 20));
        for port in [0, 1, 0, 0, 1, 1] {
            st.traverse(0, port).unwrap();
        }
        assert_eq!(st.known.distance(2, 4), 4);
        assert_eq!(st.known.distance(2, 2), 0);
        assert_eq!(st.known.distance(0, 4), 2);
    }
}
