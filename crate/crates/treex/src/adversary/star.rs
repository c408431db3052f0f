//! The star adversary: a center with `k * budget / 2` rays of length one and
//! `k` rays of length `budget`, where ray kinds are assigned adaptively so
//! that agents leaving the root are directed into short rays while any
//! remain.

use crate::engine::Arrival;
use crate::tree::{Tree, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RayKind {
    Unassigned,
    Short,
    Long,
}

pub struct StarAdversary {
    budget: usize,
    short_slots: usize,
    assignment: Vec<RayKind>,
    /// Materialized vertices: parent and depth per id; id 0 is the root.
    parent: Vec<Option<VertexId>>,
    depth: Vec<usize>,
    /// Deepest materialized vertex of each ray, indexed by root port.
    ray_tip: Vec<VertexId>,
    shorts_assigned: usize,
}

impl StarAdversary {
    pub fn new(k: usize, budget: usize) -> StarAdversary {
        assert!(k >= 1, "star adversary needs k >= 1");
        assert!(budget >= 2 && budget % 2 == 0, "star adversary needs even budget >= 2");
        let degree = k + k * budget / 2;
        StarAdversary {
            budget,
            short_slots: k * budget / 2,
            assignment: vec![RayKind::Unassigned; degree],
            parent: Vec::new(),
            depth: Vec::new(),
            ray_tip: Vec::new(),
            shorts_assigned: 0,
        }
    }

    fn alloc(&mut self, parent: Option<VertexId>, depth: usize) -> VertexId {
        let id = self.parent.len();
        self.parent.push(parent);
        self.depth.push(depth);
        id
    }

    pub(crate) fn init(&mut self) -> (VertexId, Vec<VertexId>) {
        let root = self.alloc(None, 0);
        let degree = self.assignment.len();
        let children: Vec<VertexId> = (0..degree).map(|_| self.alloc(Some(root), 1)).collect();
        self.ray_tip = children.clone();
        (root, children)
    }

    pub(crate) fn reveal(&mut self, ctx: &Arrival) -> Vec<VertexId> {
        let v = ctx.to;
        if self.depth[v] == 1 {
            // First entry through an unexplored root port: hand out a short
            // ray while any remain unassigned.
            let port = v - 1;
            debug_assert_eq!(self.assignment[port], RayKind::Unassigned);
            if self.shorts_assigned < self.short_slots {
                self.assignment[port] = RayKind::Short;
                self.shorts_assigned += 1;
                return Vec::new();
            }
            self.assignment[port] = RayKind::Long;
        }
        // Interior of a long ray: continue until length `budget`.
        if self.depth[v] < self.budget {
            let child = self.alloc(Some(v), self.depth[v] + 1);
            let port = self.root_port_of(v);
            self.ray_tip[port] = child;
            vec![child]
        } else {
            Vec::new()
        }
    }

    fn root_port_of(&self, v: VertexId) -> usize {
        let mut cur = v;
        while self.depth[cur] > 1 {
            cur = self.parent[cur].unwrap();
        }
        cur - 1
    }

    /// Completes the star: never-entered ports take the remaining short
    /// slots in port order, the rest become length-`budget` rays.
    pub fn finalize(&mut self) -> Tree {
        let degree = self.assignment.len();
        for port in 0..degree {
            if self.assignment[port] == RayKind::Unassigned {
                if self.shorts_assigned < self.short_slots {
                    self.assignment[port] = RayKind::Short;
                    self.shorts_assigned += 1;
                } else {
                    self.assignment[port] = RayKind::Long;
                }
            }
        }
        for port in 0..degree {
            if self.assignment[port] == RayKind::Long {
                while self.depth[self.ray_tip[port]] < self.budget {
                    let tip = self.ray_tip[port];
                    let child = self.alloc(Some(tip), self.depth[tip] + 1);
                    self.ray_tip[port] = child;
                }
            }
        }
        let mut edges = Vec::with_capacity(self.parent.len() - 1);
        let mut down_port = vec![1usize; self.parent.len()];
        for v in 1..self.parent.len() {
            let p = self.parent[v].unwrap();
            let port_at_parent = if p == 0 {
                v - 1
            } else {
                let q = down_port[p];
                down_port[p] += 1;
                q
            };
            edges.push((p, v, port_at_parent, 0));
        }
        Tree::from_edges(self.parent.len(), 0, &edges).expect("star adversary builds a valid tree")
    }
}
