//! Critical points of the truncated functional: mountain-pass path
//! deformation, nodal shooting with frozen nonlocal coefficients, Newton
//! polishing, continuation in `q` and multiplicity runs.

mod continuation;
mod mountain;
mod newton;
mod shooting;

use serde::{Deserialize, Serialize};

pub use continuation::{continuation_in_q, multiplicity_run, Branch, BranchPoint, MultiplicityFailure, MultiplicityOutcome};
pub use mountain::{initial_path, mountain_pass, InitialPath};
pub use newton::newton_refine;
pub use shooting::nodal_shoot;

use crate::energy::{d_theta_j_tilde, j_trunc};
use crate::error::{invalid, Result};
use crate::grid::{norm_l2, RadialFunction};
use crate::nonlinearity::NonlinearityModel;
use crate::verify::{verify, VerificationReport};

/// Profiles whose value at the outer radius exceeds this feel the truncation
/// of the domain.
pub const TAIL_WARNING: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimaxConfig {
    /// Number of samples on a path (or on the parameter disk).
    pub path_points: usize,
    /// Initial step length of the Sobolev-gradient descent.
    pub descent_step: f64,
    pub max_outer_iters: usize,
    pub max_inner_iters: usize,
    /// Sobolev norm of the gradient at which path deformation stops.
    pub grad_tol: f64,
    /// Half-width of the `θ` interval searched when checking dilation
    /// stationarity of a solution.
    pub theta_window: f64,
    pub seed: u64,
    /// Sup norm of the strong residual accepted by Newton.
    pub newton_tol: f64,
    /// Sup-norm change below which the frozen-coefficient iteration stops.
    pub fixed_point_tol: f64,
    /// Weight of the new iterate in the frozen-coefficient update.
    pub relaxation: f64,
    /// Minimal plane-L² distance between distinct solutions.
    pub distinct_threshold: f64,
}

impl Default for MinimaxConfig {
    fn default() -> Self {
        Self {
            path_points: 24,
            descent_step: 0.5,
            max_outer_iters: 4000,
            max_inner_iters: 60,
            grad_tol: 1e-4,
            theta_window: 1.0,
            seed: 0,
            newton_tol: 1e-9,
            fixed_point_tol: 1e-7,
            relaxation: 0.8,
            distinct_threshold: 0.1,
        }
    }
}

impl MinimaxConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("descent_step", self.descent_step),
            ("grad_tol", self.grad_tol),
            ("theta_window", self.theta_window),
            ("newton_tol", self.newton_tol),
            ("fixed_point_tol", self.fixed_point_tol),
            ("distinct_threshold", self.distinct_threshold),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        if self.path_points < 8 {
            return invalid(format!("path_points must be at least 8, got {}", self.path_points));
        }
        if self.max_outer_iters == 0 || self.max_inner_iters == 0 {
            return invalid("iteration limits must be positive");
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return invalid(format!("relaxation must lie in (0, 1], got {}", self.relaxation));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MountainPass,
    NodalShoot,
    Newton,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    /// The profile is exported separately as CSV.
    #[serde(skip)]
    pub u: RadialFunction,
    pub method: Method,
    pub level: f64,
    pub q: f64,
    pub node_count: usize,
    pub requested_nodes: Option<usize>,
    pub u0: f64,
    pub l2_norm: f64,
    pub residual_pde: f64,
    pub residual_nehari: f64,
    pub residual_pohozaev: f64,
    pub truncation_inactive: bool,
    /// Root of `θ ↦ ∂_θ𝒥̃(θ, u)` inside the configured window, if bracketed.
    pub theta_star: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub message: String,
    /// Euclidean norm of the discrete residual before and after each
    /// accepted Newton step.
    pub newton_history: Vec<f64>,
    pub verification: VerificationReport,
}

/// Evaluates every diagnostic of a candidate solution.
#[allow(clippy::too_many_arguments)]
pub fn report_for(
    u: RadialFunction,
    q: f64,
    model: &NonlinearityModel,
    cfg: &MinimaxConfig,
    method: Method,
    requested_nodes: Option<usize>,
    iterations: usize,
    solved: bool,
    message: impl Into<String>,
) -> Result<SolveReport> {
    let verification = verify(&u, q, model)?;
    let level = j_trunc(&u, q, model)?.total;
    let floor = 1e-6 * u.sup_norm();
    let node_count = u.sign_changes(floor);
    let nontrivial = u.sup_norm() > model.delta0();
    let nodes_ok = requested_nodes.is_none_or(|k| k == node_count);
    let mut message = message.into();
    if solved && !nontrivial {
        message = "collapsed to the trivial solution".into();
    } else if solved && !nodes_ok {
        message = format!(
            "node count {node_count} differs from requested {}",
            requested_nodes.unwrap_or(0)
        );
    }
    let tail = u.values().last().copied().unwrap_or(0.0).abs();
    if solved && tail >= TAIL_WARNING {
        message.push_str(&format!("; warning: |u(R_max)| = {tail:e}, consider a larger r_max"));
    }
    Ok(SolveReport {
        method,
        level,
        q,
        node_count,
        requested_nodes,
        u0: u.value_at_origin(),
        l2_norm: norm_l2(&u),
        residual_pde: verification.residual_pde_sup,
        residual_nehari: verification.nehari,
        residual_pohozaev: verification.pohozaev,
        truncation_inactive: verification.q_n_check,
        theta_star: theta_star(&u, q, model, cfg.theta_window),
        iterations,
        converged: solved && nontrivial && nodes_ok,
        message,
        newton_history: Vec::new(),
        verification,
        u,
    })
}

fn theta_star(u: &RadialFunction, q: f64, model: &NonlinearityModel, window: f64) -> Option<f64> {
    let f = |t: f64| d_theta_j_tilde(t, u, q, model).ok();
    let (mut a, mut b) = (-window, window);
    let (mut fa, fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Some(a);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 || (b - a) < 1e-14 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}
