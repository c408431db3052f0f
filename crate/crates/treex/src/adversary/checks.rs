//! Trace-driven verification of the adversarial-run invariants.
//!
//! Everything here is recomputed from the trace and the finalized tree:
//! which subtrees each agent entered and with how much energy, who explored
//! what, and the attribution of the hub-to-hub path to the first fresh
//! agent. The adversary's own bookkeeping is cross-validated against the
//! recomputation before the substantial bounds are tested.

use std::collections::{HashMap, HashSet};

use super::adaptive::{CaseEvent, FinalReport};
use crate::engine::MoveEvent;
use crate::tree::{Tree, VertexId};

/// One named check with its outcome.
#[derive(Debug, Clone)]
pub struct LemmaCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl LemmaCheck {
    fn ok(name: impl Into<String>) -> LemmaCheck {
        LemmaCheck {
            name: name.into(),
            pass: true,
            detail: String::new(),
        }
    }

    fn fail(name: impl Into<String>, detail: String) -> LemmaCheck {
        LemmaCheck {
            name: name.into(),
            pass: false,
            detail,
        }
    }

    fn assert(name: impl Into<String>, pass: bool, detail: impl FnOnce() -> String) -> LemmaCheck {
        if pass {
            LemmaCheck::ok(name)
        } else {
            LemmaCheck::fail(name, detail())
        }
    }
}

pub fn all_pass(checks: &[LemmaCheck]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// Facts recomputed from the trace against the finalized tree.
struct Derived {
    /// Per subtree: agents in first-entry order whose first tree it is.
    a1: Vec<Vec<usize>>,
    /// Per subtree: (agent, energy on entry) for second-tree entries.
    a2: Vec<Vec<(usize, usize)>>,
    /// Per agent: energy on entering a second subtree (0 = never).
    b_a: Vec<usize>,
    /// Per subtree: vertices explored strictly below the first hub.
    explored_in: Vec<HashSet<VertexId>>,
    /// Per subtree and agent: exploration counts after path attribution.
    attributed: Vec<HashMap<usize, usize>>,
    /// Per subtree: explored vertex set unioned with the attributed chain.
    subtree_of: Vec<Option<usize>>,
}

fn derive(trace: &[MoveEvent], tree: &Tree, report: &FinalReport, k: usize) -> Derived {
    let p = &report.params;
    let l = p.l;
    // map every vertex to its subtree via the root branch
    let mut subtree_of: Vec<Option<usize>> = vec![None; tree.n()];
    for (j, &c) in tree.ports(tree.root()).iter().enumerate() {
        subtree_of[c] = Some(j);
    }
    let mut order: Vec<VertexId> = (0..tree.n()).collect();
    order.sort_by_key(|&v| tree.depth(v));
    for &v in &order {
        if subtree_of[v].is_none() {
            if let Some(q) = tree.parent(v) {
                subtree_of[v] = subtree_of[q];
            }
        }
    }

    let v1_of: HashMap<VertexId, usize> = report
        .subtrees
        .iter()
        .map(|s| (s.v1, s.index))
        .collect();

    let mut a1: Vec<Vec<usize>> = vec![Vec::new(); l];
    let mut a2: Vec<Vec<(usize, usize)>> = vec![Vec::new(); l];
    let mut b_a = vec![0usize; k];
    let mut entered: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut explored_in: Vec<HashSet<VertexId>> = vec![HashSet::new(); l];
    let mut owner: HashMap<VertexId, usize> = HashMap::new();

    for ev in trace {
        if let Some(&i) = v1_of.get(&ev.to) {
            if !entered[ev.agent].contains(&i) {
                entered[ev.agent].push(i);
                match entered[ev.agent].len() {
                    1 => a1[i].push(ev.agent),
                    _ => {
                        a2[i].push((ev.agent, ev.energy_left));
                        b_a[ev.agent] = ev.energy_left;
                    }
                }
            }
        }
        if ev.newly_explored {
            owner.entry(ev.to).or_insert(ev.agent);
            if let Some(i) = subtree_of[ev.to] {
                if tree.depth(ev.to) > p.d1 {
                    explored_in[i].insert(ev.to);
                }
            }
        }
    }

    // ownership with the hub-to-hub path attributed to the first fresh agent
    let mut attributed: Vec<HashMap<usize, usize>> = vec![HashMap::new(); l];
    for i in 0..l {
        let chain: HashSet<VertexId> = report.subtrees[i].v2_attrib_chain.iter().copied().collect();
        for &v in &explored_in[i] {
            if chain.contains(&v) {
                continue;
            }
            let a = owner[&v];
            *attributed[i].entry(a).or_insert(0) += 1;
        }
        if !chain.is_empty() {
            let first = *report.subtrees[i]
                .a1
                .first()
                .expect("a second hub requires a first fresh agent");
            *attributed[i].entry(first).or_insert(0) += chain.len();
        }
    }

    Derived {
        a1,
        a2,
        b_a,
        explored_in,
        attributed,
        subtree_of,
    }
}

/// Cross-validates the adversary's bookkeeping against the trace, then
/// checks the six per-run invariants of the construction.
pub fn check_lemma3(trace: &[MoveEvent], tree: &Tree, report: &FinalReport) -> Vec<LemmaCheck> {
    let p = report.params;
    let k = p.k();
    let d = derive(trace, tree, report, k);
    let mut out = Vec::new();

    for (i, sub) in report.subtrees.iter().enumerate() {
        out.push(LemmaCheck::assert(
            format!("bookkeeping/entries/T{i}"),
            d.a1[i] == sub.a1 && d.a2[i] == sub.a2,
            || {
                format!(
                    "trace says a1={:?} a2={:?}, adversary says a1={:?} a2={:?}",
                    d.a1[i], d.a2[i], sub.a1, sub.a2
                )
            },
        ));
        let n_recomputed = 2
            + if d.a1[i].is_empty() {
                0
            } else {
                (p.budget + p.d2) / 2 - p.d1 + 2 * p.delta
            }
            + d.a2[i].iter().map(|&(_, ba)| ba / 2 + 2).sum::<usize>();
        out.push(LemmaCheck::assert(
            format!("bookkeeping/budget/T{i}"),
            n_recomputed == sub.n_budget,
            || format!("recomputed N={n_recomputed}, adversary N={}", sub.n_budget),
        ));
    }

    // 1: on entering a second subtree an agent has at most B - 3 d1 energy
    for a in 0..k {
        out.push(LemmaCheck::assert(
            format!("lemma3.1/agent{a}"),
            d.b_a[a] + 3 * p.d1 <= p.budget || d.b_a[a] == 0,
            || format!("B_A={} > B - 3 d1 = {}", d.b_a[a], p.budget - 3 * p.d1),
        ));
    }

    // 2: a late case in a subtree pins its first fresh agent there
    for (i, sub) in report.subtrees.iter().enumerate() {
        let late_case = sub
            .case_log
            .iter()
            .any(|c| matches!(c, CaseEvent::Case2b { .. } | CaseEvent::Case2c { .. }));
        if late_case {
            let first = d.a1[i][0];
            out.push(LemmaCheck::assert(
                format!("lemma3.2/T{i}"),
                d.b_a[first] == 0,
                || format!("first fresh agent {first} left with B_A={}", d.b_a[first]),
            ));
        }
    }

    // 3: second-tree agents explore at most B_A/2 + 2 vertices in the tree
    for i in 0..p.l {
        for &(a, ba) in &d.a2[i] {
            let count = d.attributed[i].get(&a).copied().unwrap_or(0);
            out.push(LemmaCheck::assert(
                format!("lemma3.3/T{i}/agent{a}"),
                count <= ba / 2 + 2,
                || format!("agent {a} explored {count} > B_A/2+2 = {}", ba / 2 + 2),
            ));
        }
    }

    // 4: the first fresh agent explores at most (B+d2)/2 - d1 + 2 delta
    let cap4 = (p.budget + p.d2) / 2 - p.d1 + 2 * p.delta;
    for i in 0..p.l {
        if let Some(&first) = d.a1[i].first() {
            let count = d.attributed[i].get(&first).copied().unwrap_or(0);
            out.push(LemmaCheck::assert(
                format!("lemma3.4/T{i}"),
                count <= cap4,
                || format!("first fresh agent explored {count} > {cap4}"),
            ));
        }
    }

    // 5: a subtree with at most one fresh agent never exhausts its budget
    for (i, sub) in report.subtrees.iter().enumerate() {
        if d.a1[i].len() <= 1 {
            let count = d.explored_in[i].len();
            out.push(LemmaCheck::assert(
                format!("lemma3.5/T{i}"),
                count < sub.n_budget,
                || format!("explored {count} >= N={}", sub.n_budget),
            ));
        }
    }

    // 6: active hub tree with remaining budget keeps a shallow unexplored
    // vertex (at depth at most d1 + delta)
    let explored_vertices: HashSet<VertexId> = trace
        .iter()
        .filter(|e| e.newly_explored)
        .map(|e| e.to)
        .collect();
    for (i, sub) in report.subtrees.iter().enumerate() {
        if sub.v1_active && sub.presented_nonleaf < sub.n_budget {
            let found = (0..report.upath_watermark).any(|v| {
                v < tree.n()
                    && d.subtree_of[v] == Some(i)
                    && tree.depth(v) >= p.d1
                    && tree.depth(v) <= p.d1 + p.delta
                    && !explored_vertices.contains(&v)
                    && v != tree.root()
            });
            out.push(LemmaCheck::assert(
                format!("lemma3.6/T{i}"),
                found,
                || "no unexplored vertex at depth <= d1 + delta".to_string(),
            ));
        }
    }

    out
}

/// The three-way outcome partition of the subtrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MPartition {
    pub m0: Vec<usize>,
    pub m1: Vec<usize>,
    pub m2: Vec<usize>,
}

/// Partitions subtree indices by outcome: every fresh agent left (or the
/// early case fired); incomplete with a pinned fresh agent; completely
/// explored under a late case.
pub fn classify_m(report: &FinalReport, b_a: &[usize]) -> MPartition {
    let mut m = MPartition {
        m0: Vec::new(),
        m1: Vec::new(),
        m2: Vec::new(),
    };
    for (i, sub) in report.subtrees.iter().enumerate() {
        let case_2a = sub.case_log.iter().any(|c| matches!(c, CaseEvent::Case2a { .. }));
        let late_case = sub
            .case_log
            .iter()
            .any(|c| matches!(c, CaseEvent::Case2b { .. } | CaseEvent::Case2c { .. }));
        let all_positive = sub.a1.iter().all(|&a| b_a[a] > 0);
        let some_zero = sub.a1.iter().any(|&a| b_a[a] == 0);
        if all_positive || case_2a {
            m.m0.push(i);
        }
        if !sub.fully_explored && some_zero && !case_2a {
            m.m1.push(i);
        }
        if sub.fully_explored && late_case {
            m.m2.push(i);
        }
    }
    m
}

/// Checks the partition property and the four per-class counting bounds.
pub fn check_lemma4(trace: &[MoveEvent], tree: &Tree, report: &FinalReport) -> Vec<LemmaCheck> {
    let p = report.params;
    let k = p.k();
    let d = derive(trace, tree, report, k);
    let mut out = Vec::new();

    let m = classify_m(report, &d.b_a);
    let mut seen = vec![0usize; p.l];
    for &i in m.m0.iter().chain(&m.m1).chain(&m.m2) {
        seen[i] += 1;
    }
    out.push(LemmaCheck::assert(
        "lemma4.1/partition",
        seen.iter().all(|&c| c == 1),
        || format!("membership counts {seen:?} (m0={:?} m1={:?} m2={:?})", m.m0, m.m1, m.m2),
    ));

    let (b, d1, d2, delta) = (
        p.budget as i128,
        p.d1 as i128,
        p.d2 as i128,
        p.delta as i128,
    );
    let sum_a2 = |i: usize| -> i128 { d.a2[i].iter().map(|&(_, ba)| ba as i128 / 2).sum() };
    let sum_a1 = |i: usize| -> i128 {
        d.a1[i].iter().map(|&a| d.b_a[a] as i128).sum()
    };

    // (2): every subtree obeys the general counting bound
    for i in 0..p.l {
        let ti = d.explored_in[i].len() as i128;
        let bound = (b + d2) / 2 - d1 + 6 * delta + sum_a2(i);
        out.push(LemmaCheck::assert(
            format!("lemma4.2/T{i}"),
            ti <= bound,
            || format!("|T_i|={ti} > {bound}"),
        ));
    }

    // (3): the tighter bound on subtrees whose fresh agents all moved on
    for &i in &m.m0 {
        let ti = d.explored_in[i].len() as i128;
        let a1_len = d.a1[i].len() as i128;
        let bound = (b + d2) / 2 - d1 + 4 * delta + (a1_len - 2) * (b - 3 * d1) / 2 + sum_a2(i)
            - sum_a1(i) / 2;
        out.push(LemmaCheck::assert(
            format!("lemma4.3/T{i}"),
            ti <= bound,
            || format!("|T_i|={ti} > {bound}"),
        ));
    }

    // (4): incomplete subtrees with a pinned agent
    for &i in &m.m1 {
        let lhs = sum_a1(i);
        let bound = (d.a1[i].len() as i128 - 1) * (b - 3 * d1);
        out.push(LemmaCheck::assert(
            format!("lemma4.4/T{i}"),
            lhs <= bound,
            || format!("sum B_A = {lhs} > {bound}"),
        ));
    }

    // (5): completed subtrees under a late case
    for &i in &m.m2 {
        let lhs = sum_a1(i);
        let bound = (d.a1[i].len() as i128 - 2) * (b - 3 * d1);
        out.push(LemmaCheck::assert(
            format!("lemma4.5/T{i}"),
            lhs <= bound,
            || format!("sum B_A = {lhs} > {bound}"),
        ));
    }

    out
}
