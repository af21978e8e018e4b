//! Continuation of nodal branches in `q` and multiplicity runs.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::grid::{RadialFunction, RadialGrid};
use crate::nonlinearity::NonlinearityModel;
use crate::verify::{distinctness, DistinctnessReport};

use super::shooting::nodal_shoot_from;
use super::{MinimaxConfig, SolveReport};

/// Smallest positive coupling used when a branch starts at `q = 0`,
/// relative to the end of the range.
const FIRST_POSITIVE_FRACTION: f64 = 1e-4;
const REFINE_STEPS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub q: f64,
    pub level: f64,
    pub u0: f64,
    pub l2_norm: f64,
    pub truncation_inactive: bool,
    pub converged: bool,
}

impl BranchPoint {
    fn from_report(r: &SolveReport) -> Self {
        Self {
            q: r.q,
            level: r.level,
            u0: r.u0,
            l2_norm: r.l2_norm,
            truncation_inactive: r.truncation_inactive,
            converged: r.converged,
        }
    }

    fn ok(&self) -> bool {
        self.converged && self.truncation_inactive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub nodes: usize,
    pub points: Vec<BranchPoint>,
    /// First coupling (after refinement) at which the branch was lost.
    pub q_star: Option<f64>,
    /// Largest coupling with a converged, untruncated solution.
    pub q_last_good: Option<f64>,
    pub failure: Option<String>,
}

impl Branch {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("q,level,u0,l2,trunc_inactive,converged\n");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                p.q, p.level, p.u0, p.l2_norm, p.truncation_inactive, p.converged
            );
        }
        s
    }
}

fn failure_reason(r: &SolveReport) -> String {
    if !r.converged {
        format!("no convergence: {}", r.message)
    } else {
        format!("truncation active: qN(u) = {:.6}", r.verification.q_times_n)
    }
}

fn schedule(q_start: f64, q_end: f64, steps: usize) -> Vec<f64> {
    let (first, count, mut out) = if q_start == 0.0 {
        (q_end * FIRST_POSITIVE_FRACTION, steps - 1, vec![0.0])
    } else {
        (q_start, steps, Vec::new())
    };
    if count == 1 {
        out.push(q_end);
        return out;
    }
    let ratio = (q_end / first).powf(1.0 / (count - 1) as f64);
    for i in 0..count {
        out.push(if i + 1 == count { q_end } else { first * ratio.powi(i as i32) });
    }
    out
}

/// Follows the `k`-node branch from `q_start` to `q_end` on a geometric
/// schedule, warm-starting every solve from the previous profile. Stops at
/// the first failure and brackets the failure point by bisection.
pub fn continuation_in_q(
    model: &NonlinearityModel,
    grid: &Arc<RadialGrid>,
    k: usize,
    q_start: f64,
    q_end: f64,
    steps: usize,
    cfg: &MinimaxConfig,
) -> Result<Branch> {
    cfg.validate()?;
    if !(q_start >= 0.0 && q_start < q_end && q_end.is_finite()) {
        return invalid(format!("need 0 <= q_start < q_end, got {q_start} and {q_end}"));
    }
    if steps < 2 {
        return invalid("continuation needs at least 2 steps");
    }
    let mut points = Vec::new();
    let mut warm: Option<RadialFunction> = None;
    let mut last_good: Option<f64> = None;
    for q in schedule(q_start, q_end, steps) {
        let rep = nodal_shoot_from(q, model, grid, k, cfg, warm.as_ref())?;
        let point = BranchPoint::from_report(&rep);
        points.push(point);
        if !point.ok() {
            let reason = failure_reason(&rep);
            let (good, bad) = match (last_good, warm.as_ref()) {
                (Some(lo), Some(w)) => {
                    let (g, b) = refine(model, grid, k, cfg, lo, q, w.clone())?;
                    (Some(g), b)
                }
                _ => (None, q),
            };
            return Ok(Branch {
                nodes: k,
                points,
                q_star: Some(bad),
                q_last_good: good,
                failure: Some(reason),
            });
        }
        last_good = Some(q);
        warm = Some(rep.u);
    }
    Ok(Branch {
        nodes: k,
        points,
        q_star: None,
        q_last_good: last_good,
        failure: None,
    })
}

/// Bisection between a good and a failing coupling; returns the final
/// `(good, failing)` pair.
fn refine(
    model: &NonlinearityModel,
    grid: &Arc<RadialGrid>,
    k: usize,
    cfg: &MinimaxConfig,
    mut lo: f64,
    mut hi: f64,
    mut warm: RadialFunction,
) -> Result<(f64, f64)> {
    for _ in 0..REFINE_STEPS {
        let mid = 0.5 * (lo + hi);
        let rep = nodal_shoot_from(mid, model, grid, k, cfg, Some(&warm))?;
        if BranchPoint::from_report(&rep).ok() {
            lo = mid;
            warm = rep.u;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityFailure {
    pub k: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiplicityOutcome {
    pub reports: Vec<SolveReport>,
    pub distinctness: Option<DistinctnessReport>,
    pub failure: Option<MultiplicityFailure>,
}

impl MultiplicityOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Solves for `k = 0..n` sign changes (independently, possibly in parallel)
/// and checks convergence, untruncated coupling, distinctness and strictly
/// increasing positive levels.
pub fn multiplicity_run(
    q: f64,
    model: &NonlinearityModel,
    grid: &Arc<RadialGrid>,
    n: usize,
    cfg: &MinimaxConfig,
    exec: Execution,
) -> Result<MultiplicityOutcome> {
    cfg.validate()?;
    if n == 0 {
        return invalid("multiplicity run needs n >= 1");
    }
    let reports: Vec<SolveReport> = exec
        .map_indexed(n, |k| nodal_shoot_from(q, model, grid, k, cfg, None))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut failures: Vec<MultiplicityFailure> = Vec::new();
    for (k, r) in reports.iter().enumerate() {
        if !r.converged {
            failures.push(MultiplicityFailure {
                k,
                reason: format!("no convergence: {}", r.message),
            });
        } else if !r.truncation_inactive {
            failures.push(MultiplicityFailure {
                k,
                reason: failure_reason(r),
            });
        } else if r.level <= 0.0 {
            failures.push(MultiplicityFailure {
                k,
                reason: format!("nonpositive level {}", r.level),
            });
        } else if k > 0 && r.level <= reports[k - 1].level {
            failures.push(MultiplicityFailure {
                k,
                reason: format!("level {} not above level {} of k = {}", r.level, reports[k - 1].level, k - 1),
            });
        }
    }
    let dist = if n >= 2 {
        let profiles: Vec<RadialFunction> = reports.iter().map(|r| r.u.clone()).collect();
        let levels: Vec<f64> = reports.iter().map(|r| r.level).collect();
        let d = distinctness(&profiles, &levels, cfg.distinct_threshold)?;
        for &(i, j) in &d.flagged {
            failures.push(MultiplicityFailure {
                k: j,
                reason: format!(
                    "solutions {i} and {j} are only {:.3e} apart",
                    d.distances[i][j]
                ),
            });
        }
        Some(d)
    } else {
        None
    };
    let failure = failures.into_iter().min_by_key(|f| f.k);
    Ok(MultiplicityOutcome {
        reports,
        distinctness: dist,
        failure,
    })
}
