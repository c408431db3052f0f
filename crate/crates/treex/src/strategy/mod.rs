//! Agent programs: depth-first traversals, the subtree-splitting exploration
//! algorithm, and a nearest-stub baseline.

mod dfs;
mod divide;
mod greedy;

pub use dfs::{
    ldfs_sequence, leftmost_unexplored, rdfs_sequence, rightmost_unexplored, run_ldfs, run_rdfs,
    Subtree,
};
pub use divide::divide_and_explore;
pub use greedy::greedy_nearest;

use std::str::FromStr;

use crate::engine::{AgentState, ExplorationState, MoveEvent};
use crate::tree::VertexId;

/// Traversal direction of a dispatched agent: smallest labels first or
/// largest labels first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfsMode {
    L,
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Ldfs,
    Rdfs,
    Split,
}

/// One iteration of the outer exploration loop.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub t: u32,
    pub root: VertexId,
    pub root_depth: usize,
    pub k_t: usize,
    pub action: Action,
    pub v_l_depth: Option<usize>,
    pub v_r_depth: Option<usize>,
}

/// Everything a finished run exposes to analysis and checkers.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub explored_incl_root: usize,
    pub explored_excl_root: usize,
    pub trace: Vec<MoveEvent>,
    pub iterations: Vec<IterationRecord>,
    /// Agents consumed by the initial full-tree L-DFS/R-DFS pair.
    pub init_agents: usize,
    pub agent_modes: Vec<Option<DfsMode>>,
    /// Every subtree root that was ever active, in creation order.
    pub roots_ever: Vec<VertexId>,
    pub final_agents: Vec<AgentState>,
    pub fully_explored: bool,
    pub k: usize,
    pub budget: usize,
}

impl RunResult {
    pub(crate) fn collect(
        state: &ExplorationState,
        iterations: Vec<IterationRecord>,
        init_agents: usize,
        agent_modes: Vec<Option<DfsMode>>,
        roots_ever: Vec<VertexId>,
    ) -> RunResult {
        let incl = state.known.explored_count();
        RunResult {
            explored_incl_root: incl,
            explored_excl_root: incl - 1,
            trace: state.trace.clone(),
            iterations,
            init_agents,
            agent_modes,
            roots_ever,
            final_agents: state.agents().to_vec(),
            fully_explored: state.is_fully_explored(),
            k: state.k(),
            budget: state.budget,
        }
    }

    pub fn explored(&self, metric: Metric) -> usize {
        match metric {
            Metric::InclRoot => self.explored_incl_root,
            Metric::ExclRoot => self.explored_excl_root,
        }
    }
}

/// Whether vertex counts include the starting vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    InclRoot,
    ExclRoot,
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "incl" => Ok(Metric::InclRoot),
            "excl" => Ok(Metric::ExclRoot),
            other => Err(format!("unknown metric '{other}' (expected incl|excl)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    DivideAndExplore,
    Ldfs,
    Rdfs,
    GreedyNearest,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::DivideAndExplore,
        Strategy::Ldfs,
        Strategy::Rdfs,
        Strategy::GreedyNearest,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::DivideAndExplore => "dnd",
            Strategy::Ldfs => "ldfs",
            Strategy::Rdfs => "rdfs",
            Strategy::GreedyNearest => "greedy-nearest",
        }
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dnd" => Ok(Strategy::DivideAndExplore),
            "ldfs" => Ok(Strategy::Ldfs),
            "rdfs" => Ok(Strategy::Rdfs),
            "greedy-nearest" => Ok(Strategy::GreedyNearest),
            other => Err(format!(
                "unknown strategy '{other}' (expected dnd|ldfs|rdfs|greedy-nearest)"
            )),
        }
    }
}

/// Moves an agent along the unique known path to `target`, halting early
/// when energy runs out. Used to replay prescribed plans.
pub fn walk_to_target(state: &mut ExplorationState, agent: usize, target: VertexId) {
    dfs::walk_to(state, agent, target)
}

/// Runs the named strategy to completion on a fresh exploration state.
pub fn run(state: &mut ExplorationState, strategy: Strategy) -> RunResult {
    match strategy {
        Strategy::DivideAndExplore => divide_and_explore(state),
        Strategy::Ldfs => run_uniform_dfs(state, DfsMode::L),
        Strategy::Rdfs => run_uniform_dfs(state, DfsMode::R),
        Strategy::GreedyNearest => greedy_nearest(state),
    }
}

/// Every agent in turn performs a full-tree DFS from the root, over the
/// shared knowledge map.
fn run_uniform_dfs(state: &mut ExplorationState, mode: DfsMode) -> RunResult {
    let k = state.k();
    let whole = Subtree::whole(state.known.root());
    for agent in 0..k {
        if state.is_fully_explored() {
            break;
        }
        state.mark_dispatched(agent);
        match mode {
            DfsMode::L => run_ldfs(state, agent, &whole, state.known.root()),
            DfsMode::R => run_rdfs(state, agent, &whole, state.known.root()),
        }
    }
    let modes = vec![Some(mode); k];
    RunResult::collect(state, Vec::new(), 0, modes, vec![state.known.root()])
}
