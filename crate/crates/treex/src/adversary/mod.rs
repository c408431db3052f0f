//! Adaptive instance constructors: adversaries that answer reveal queries
//! online, materializing the tree lazily as agents move.

mod adaptive;
pub mod checks;
mod star;

pub use adaptive::{AdaptiveAdversary, CaseEvent, FinalReport, OptPlan, SubtreeReport};
pub use star::StarAdversary;

use thiserror::Error;

/// Integer ceil of the square root.
fn ceil_sqrt(x: u64) -> u64 {
    let r = x.isqrt();
    if r * r < x {
        r + 1
    } else {
        r
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("infeasible lower-bound parameters: {}", violations.join("; "))]
pub struct LbParamsError {
    pub violations: Vec<String>,
}

/// Parameters of the budgeted adversary family.
///
/// `l` subtrees are reachable over paths of length `d1` from the root; hubs
/// have degree `delta + 1`; `k = 2l - 1` agents with budget `budget` each.
/// `d2 = (budget - d1) / 2` is the depth of the optional second hub.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LbParams {
    pub l: usize,
    pub budget: usize,
    pub d1: usize,
    pub d2: usize,
    pub delta: usize,
}

impl LbParams {
    /// Derives `delta` and `d2` and validates every feasibility constraint,
    /// listing all violated ones on error.
    pub fn new(l: usize, budget: usize, d1: usize) -> Result<LbParams, LbParamsError> {
        let delta = ceil_sqrt(2 * l as u64 * budget as u64) as usize + 2 * l;
        let d2 = (budget.saturating_sub(d1)) / 2;
        let mut violations = Vec::new();
        if l < 2 {
            violations.push(format!("l={l} must be at least 2"));
        }
        if budget % 2 != 0 {
            violations.push(format!("budget={budget} must be even"));
        }
        if d1 % 2 != 0 {
            violations.push(format!("d1={d1} must be even"));
        }
        if (budget.saturating_sub(d1)) % 2 != 0 {
            violations.push(format!("budget-d1={} must be even", budget.saturating_sub(d1)));
        }
        if d2 % 2 != 0 {
            violations.push(format!("d2={d2} must be even"));
        }
        if d1 + delta >= d2 {
            violations.push(format!("d1+delta={} must be < d2={d2}", d1 + delta));
        }
        if 3 * d2 > 5 * d1 {
            violations.push(format!("d2={d2} must be <= 5/3*d1 (3*d2={} > 5*d1={})", 3 * d2, 5 * d1));
        }
        if 3 * d1 >= budget {
            violations.push(format!("need 3*d1={} < budget={budget}", 3 * d1));
        }
        if budget > d1 + 2 * d2 {
            violations.push(format!("need budget={budget} <= d1+2*d2={}", d1 + 2 * d2));
        }
        if violations.is_empty() {
            Ok(LbParams {
                l,
                budget,
                d1,
                d2,
                delta,
            })
        } else {
            Err(LbParamsError { violations })
        }
    }

    /// Number of agents in this family.
    pub fn k(&self) -> usize {
        2 * self.l - 1
    }

    /// Analytic lower bound on the offline optimum (vertices excluding the
    /// root) when `t` of the `l` subtrees end up completely explored.
    pub fn opt_bound(&self, t: usize) -> i128 {
        let (l, b) = (self.l as i128, self.budget as i128);
        let t = t as i128;
        let da = (self.d1 + self.delta) as i128;
        (l - t) * b + (l - 1 + t) * (b - da)
    }
}
