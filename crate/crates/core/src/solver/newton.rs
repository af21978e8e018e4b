//! Damped Newton–Krylov iteration on the discrete strong form.
//!
//! Unknowns are the nodal values. Every row but the last is the strong
//! residual; the last row imposes the asymptotic Robin condition
//! `u' + (κ + 1/(2R)) u = 0` at `R = R_max`, scaled like a second difference.

use crate::error::Result;
use crate::grid::{RadialFunction, RadialGrid};
use crate::linalg::{gmres, solve_tridiagonal};
use crate::nonlinearity::NonlinearityModel;
use crate::nonlocal::prefix_h;
use crate::verify::strong_residual;

use super::{report_for, Method, MinimaxConfig, SolveReport};

const ARMIJO: f64 = 1e-4;
const DAMPING_FLOOR: f64 = 1e-12;
const MAX_NEWTON_STEPS: usize = 60;
const GMRES_RESTART: usize = 60;
const GMRES_MAX: usize = 600;

pub(crate) struct NewtonOutcome {
    pub u: RadialFunction,
    pub iterations: usize,
    pub converged: bool,
    /// Euclidean norm of the residual after each accepted step (first entry
    /// is the starting point).
    pub history: Vec<f64>,
    pub message: String,
}

/// Decay constant used in the boundary row.
fn robin_coefficient(u: &RadialFunction, q: f64, model: &NonlinearityModel) -> f64 {
    let r = u.grid().r_max();
    let h_end = *prefix_h(u).values().last().expect("non-empty");
    (model.decay_rate_sq() + q * h_end * h_end / (r * r)).max(0.0).sqrt() + 0.5 / r
}

fn last_spacing(grid: &RadialGrid) -> f64 {
    let nodes = grid.nodes();
    nodes[nodes.len() - 1] - nodes[nodes.len() - 2]
}

pub(crate) fn system_residual(u: &RadialFunction, q: f64, model: &NonlinearityModel, kappa: f64) -> Vec<f64> {
    let mut f = strong_residual(u, q, model).residual;
    let grid = u.grid();
    let n = f.len();
    let du = grid.derivative(u.values());
    f[n - 1] = (du[n - 1] + kappa * u.values()[n - 1]) / last_spacing(grid);
    f
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Second-order three-point discretisation of `−Δ + c` with the same
/// boundary row, used as preconditioner.
struct Preconditioner {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
}

impl Preconditioner {
    fn new(grid: &RadialGrid, c: f64, kappa: f64) -> Self {
        let r = grid.nodes();
        let n = r.len();
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let h1 = r[1] - r[0];
        diag[0] = 4.0 / (h1 * h1) + c;
        sup[0] = -4.0 / (h1 * h1);
        for i in 1..n - 1 {
            let hm = r[i] - r[i - 1];
            let hp = r[i + 1] - r[i];
            let s = hm + hp;
            let a = 2.0 / (hm * s) - 1.0 / (s * r[i]);
            let b = 2.0 / (hp * s) + 1.0 / (s * r[i]);
            sub[i] = -a;
            sup[i] = -b;
            diag[i] = a + b + c;
        }
        let h = r[n - 1] - r[n - 2];
        sub[n - 1] = -1.0 / (h * h);
        diag[n - 1] = (1.0 / h + kappa) / h;
        Self { sub, diag, sup }
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        solve_tridiagonal(&self.sub, &self.diag, &self.sup, v).unwrap_or_else(|_| v.to_vec())
    }
}

pub(crate) fn newton_core(u: &RadialFunction, q: f64, model: &NonlinearityModel, cfg: &MinimaxConfig) -> NewtonOutcome {
    let grid = u.grid().clone();
    let kappa = robin_coefficient(u, q, model);
    let pre = Preconditioner::new(&grid, 2.0 * model.m0(), kappa);
    let with_values = |vals: Vec<f64>| RadialFunction::from_parts(grid.clone(), vals);
    let mut cur = u.clone();
    let mut f = system_residual(&cur, q, model, kappa);
    let mut merit = norm2(&f);
    let mut history = vec![merit];
    let mut iterations = 0;
    let mut message = String::new();
    let mut converged = false;
    while iterations < MAX_NEWTON_STEPS {
        if sup(&f) < cfg.newton_tol {
            converged = true;
            break;
        }
        let base = cur.values().to_vec();
        let scale_u = 1.0 + sup(&base);
        let jvp = |v: &[f64]| {
            let vn = sup(v);
            if vn == 0.0 {
                return vec![0.0; v.len()];
            }
            let eps = 1e-7 * scale_u / vn;
            let plus = with_values(base.iter().zip(v).map(|(a, b)| a + eps * b).collect());
            let minus = with_values(base.iter().zip(v).map(|(a, b)| a - eps * b).collect());
            let fp = system_residual(&plus, q, model, kappa);
            let fm = system_residual(&minus, q, model, kappa);
            fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * eps)).collect()
        };
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let (delta, _) = gmres(jvp, |v| pre.apply(v), &rhs, 1e-10, GMRES_RESTART, GMRES_MAX);
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= DAMPING_FLOOR {
            let trial = with_values(base.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect());
            let ft = system_residual(&trial, q, model, kappa);
            let mt = norm2(&ft);
            if mt.is_finite() && mt <= (1.0 - ARMIJO * lambda) * merit {
                cur = trial;
                f = ft;
                merit = mt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            message = format!("line search underflow at sup residual {:.3e}", sup(&f));
            break;
        }
        iterations += 1;
        history.push(merit);
    }
    if !converged && message.is_empty() {
        if sup(&f) < cfg.newton_tol {
            converged = true;
        } else {
            message = format!("Newton stopped after {iterations} steps at sup residual {:.3e}", sup(&f));
        }
    }
    NewtonOutcome {
        u: cur,
        iterations,
        converged,
        history,
        message,
    }
}

/// Polishes a near-solution; returns the last accepted iterate if the line
/// search underflows.
pub fn newton_refine(
    u: &RadialFunction,
    q: f64,
    model: &NonlinearityModel,
    cfg: &MinimaxConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    let out = newton_core(u, q, model, cfg);
    let message = if out.converged {
        format!("converged in {} Newton steps", out.iterations)
    } else {
        out.message
    };
    let mut report = report_for(out.u, q, model, cfg, Method::Newton, None, out.iterations, out.converged, message)?;
    report.newton_history = out.history;
    Ok(report)
}
