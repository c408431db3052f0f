//! Rooted port-labeled trees, the `TREE v1` file format, and port normalization.
//!
//! Every vertex `v` labels its incident edges with local port numbers
//! `0..deg(v)-1`. A tree is *normalized* when at every non-root vertex port 0
//! leads toward the root; all algorithms in this crate assume normalized
//! trees, and [`parse_tree`] normalizes on input.

use std::collections::VecDeque;
use std::fmt::Write as _;

use thiserror::Error;

/// Dense vertex identifier, `0..n`.
pub type VertexId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("malformed line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("vertex id {0} out of range (n = {1})")]
    IdOutOfRange(usize, usize),
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("port collision at vertex {vertex}, port {port}")]
    PortCollision { vertex: VertexId, port: usize },
    #[error("edge count {0} does not match n - 1 = {1}")]
    WrongEdgeCount(usize, usize),
    #[error("graph is disconnected or cyclic")]
    Disconnected,
    #[error("ports at vertex {0} are not 0..degree-1")]
    PortGap(VertexId),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
}

/// Immutable rooted tree with per-vertex port maps and cached depth, parent
/// and subtree-size metadata. Safe to share read-only across runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    root: VertexId,
    /// `ports[v][p]` is the neighbor reached from `v` through port `p`.
    ports: Vec<Vec<VertexId>>,
    parent: Vec<Option<VertexId>>,
    depth: Vec<usize>,
    subtree_size: Vec<usize>,
}

impl Tree {
    /// Builds and validates a tree from `(u, v, port_u, port_v)` edges.
    ///
    /// Validation enforces the tree invariants: exactly `n - 1` edges, ports
    /// forming a bijection `0..deg-1` at every vertex, connectivity. The
    /// result is not necessarily normalized; see [`Tree::normalize`].
    pub fn from_edges(
        n: usize,
        root: VertexId,
        edges: &[(VertexId, VertexId, usize, usize)],
    ) -> Result<Self, TreeError> {
        if n == 0 || root >= n {
            return Err(TreeError::IdOutOfRange(root, n));
        }
        if edges.len() != n - 1 {
            return Err(TreeError::WrongEdgeCount(edges.len(), n - 1));
        }
        let mut slots: Vec<Vec<Option<VertexId>>> = vec![Vec::new(); n];
        let mut seen: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for &(u, v, pu, pv) in edges {
            if u >= n {
                return Err(TreeError::IdOutOfRange(u, n));
            }
            if v >= n {
                return Err(TreeError::IdOutOfRange(v, n));
            }
            if u == v {
                return Err(TreeError::SelfLoop(u));
            }
            if seen[u].contains(&v) {
                return Err(TreeError::DuplicateEdge(u.min(v), u.max(v)));
            }
            seen[u].push(v);
            seen[v].push(u);
            for (w, p, other) in [(u, pu, v), (v, pv, u)] {
                if slots[w].len() <= p {
                    slots[w].resize(p + 1, None);
                }
                if slots[w][p].is_some() {
                    return Err(TreeError::PortCollision { vertex: w, port: p });
                }
                slots[w][p] = Some(other);
            }
        }
        let mut ports = Vec::with_capacity(n);
        for (v, s) in slots.into_iter().enumerate() {
            let mut row = Vec::with_capacity(s.len());
            for slot in s {
                match slot {
                    Some(w) => row.push(w),
                    None => return Err(TreeError::PortGap(v)),
                }
            }
            ports.push(row);
        }
        let (parent, depth, subtree_size) = compute_meta(&ports, root)?;
        Ok(Tree {
            root,
            ports,
            parent,
            depth,
            subtree_size,
        })
    }

    pub fn n(&self) -> usize {
        self.ports.len()
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.ports[v].len()
    }

    /// Neighbor reached from `v` through port `p`.
    pub fn neighbor(&self, v: VertexId, p: usize) -> VertexId {
        self.ports[v][p]
    }

    pub fn ports(&self, v: VertexId) -> &[VertexId] {
        &self.ports[v]
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    pub fn depth(&self, v: VertexId) -> usize {
        self.depth[v]
    }

    pub fn subtree_size(&self, v: VertexId) -> usize {
        self.subtree_size[v]
    }

    pub fn max_depth(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// True iff at every non-root vertex port 0 leads to the parent.
    pub fn is_normalized(&self) -> bool {
        (0..self.n()).all(|v| v == self.root || Some(self.ports[v][0]) == self.parent[v])
    }

    /// Swaps, at every non-root vertex, the label of the parent edge with
    /// label 0. All other labels are unchanged, so the relative layout of the
    /// remaining sibling edges is preserved. Idempotent.
    pub fn normalize(mut self) -> Tree {
        for v in 0..self.n() {
            if let Some(par) = self.parent[v] {
                let p = self.ports[v]
                    .iter()
                    .position(|&w| w == par)
                    .expect("parent must be adjacent");
                self.ports[v].swap(0, p);
            }
        }
        self
    }

    /// True iff `v` lies in the subtree rooted at `anc` (including `anc`).
    pub fn is_descendant(&self, v: VertexId, anc: VertexId) -> bool {
        let mut cur = v;
        loop {
            if cur == anc {
                return true;
            }
            match self.parent[cur] {
                Some(p) if self.depth[cur] > self.depth[anc] => cur = p,
                _ => return false,
            }
        }
    }
}

fn compute_meta(
    ports: &[Vec<VertexId>],
    root: VertexId,
) -> Result<(Vec<Option<VertexId>>, Vec<usize>, Vec<usize>), TreeError> {
    let n = ports.len();
    let mut parent = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    depth[root] = 0;
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &ports[v] {
            if depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                parent[w] = Some(v);
                queue.push_back(w);
            }
        }
    }
    if order.len() != n {
        return Err(TreeError::Disconnected);
    }
    let mut subtree_size = vec![1usize; n];
    for &v in order.iter().rev() {
        if let Some(p) = parent[v] {
            subtree_size[p] += subtree_size[v];
        }
    }
    Ok((parent, depth, subtree_size))
}

/// Problem instance: a tree to explore with `k` colocated agents, each with
/// an energy budget of `budget` edge traversals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub tree: Tree,
    pub k: usize,
    pub budget: usize,
}

impl Instance {
    pub fn new(tree: Tree, k: usize, budget: usize) -> Instance {
        assert!(k >= 1, "instance requires at least one agent");
        Instance { tree, k, budget }
    }
}

/// Parses the `TREE v1` text format and returns the validated, normalized
/// tree.
///
/// Format (ASCII, newline-delimited, space-separated):
/// ```text
/// TREE v1
/// n <n>
/// root <id>
/// edge <u> <v> <port_u> <port_v>   (n - 1 lines)
/// ```
pub fn parse_tree(text: &str) -> Result<Tree, TreeError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (ln, header) = lines.next().ok_or(TreeError::MalformedLine {
        line: 1,
        reason: "empty input".into(),
    })?;
    if header != "TREE v1" {
        return Err(TreeError::MalformedLine {
            line: ln,
            reason: format!("expected 'TREE v1', got '{header}'"),
        });
    }

    let n = parse_kv(lines.next(), "n")?;
    let root = parse_kv(lines.next(), "root")?;

    let mut edges = Vec::new();
    for (ln, line) in lines {
        let mut it = line.split_ascii_whitespace();
        if it.next() != Some("edge") {
            return Err(TreeError::MalformedLine {
                line: ln,
                reason: "expected 'edge u v port_u port_v'".into(),
            });
        }
        let mut num = |name: &str| -> Result<usize, TreeError> {
            it.next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| TreeError::MalformedLine {
                    line: ln,
                    reason: format!("bad {name}"),
                })
        };
        let (u, v, pu, pv) = (num("u")?, num("v")?, num("port_u")?, num("port_v")?);
        if it.next().is_some() {
            return Err(TreeError::MalformedLine {
                line: ln,
                reason: "trailing tokens".into(),
            });
        }
        edges.push((u, v, pu, pv));
    }
    Ok(Tree::from_edges(n, root, &edges)?.normalize())
}

fn parse_kv(item: Option<(usize, &str)>, key: &str) -> Result<usize, TreeError> {
    let (ln, line) = item.ok_or(TreeError::MalformedLine {
        line: 0,
        reason: format!("missing '{key}' line"),
    })?;
    let mut it = line.split_ascii_whitespace();
    if it.next() != Some(key) {
        return Err(TreeError::MalformedLine {
            line: ln,
            reason: format!("expected '{key} <value>'"),
        });
    }
    it.next()
        .and_then(|t| t.parse().ok())
        .filter(|_| it.clone().next().is_none())
        .ok_or_else(|| TreeError::MalformedLine {
            line: ln,
            reason: format!("bad '{key}' value"),
        })
}

/// Serializes a tree to canonical `TREE v1` text: edges sorted by
/// `(min id, max id)`, each emitted as `edge min max port_min port_max`.
pub fn serialize_tree(tree: &Tree) -> String {
    let mut edges = Vec::with_capacity(tree.n().saturating_sub(1));
    for v in 0..tree.n() {
        for (p, &w) in tree.ports(v).iter().enumerate() {
            if v < w {
                let pw = tree.ports(w).iter().position(|&x| x == v).unwrap();
                edges.push((v, w, p, pw));
            }
        }
    }
    edges.sort_unstable();
    let mut out = String::new();
    let _ = writeln!(out, "TREE v1");
    let _ = writeln!(out, "n {}", tree.n());
    let _ = writeln!(out, "root {}", tree.root());
    for (u, v, pu, pv) in edges {
        let _ = writeln!(out, "edge {u} {v} {pu} {pv}");
    }
    out
}
