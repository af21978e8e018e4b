//! Nodal shooting: freeze the nonlocal potential, shoot the local radial ODE
//! on `u(0)` for a prescribed number of sign changes, iterate, then hand the
//! profile to Newton on the full nonlocal system.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{RadialFunction, RadialGrid};
use crate::nonlinearity::NonlinearityModel;
use crate::nonlocal::{prefix_h, suffix_a};

use super::newton::newton_core;
use super::{report_for, Method, MinimaxConfig, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    /// More than the requested number of sign changes.
    Over,
    /// `|u|` turns back up with at most the requested sign changes.
    Under,
}

/// Frozen potential `V = 2q A_u + q h_u²/r²` at the nodes and at the
/// interval midpoints.
pub(crate) struct Frozen {
    nodes: Vec<f64>,
    v: Vec<f64>,
    v_mid: Vec<f64>,
}

impl Frozen {
    pub(crate) fn new(u: &RadialFunction, q: f64) -> Self {
        let nodes = u.grid().nodes().to_vec();
        let v: Vec<f64> = if q == 0.0 {
            vec![0.0; nodes.len()]
        } else {
            let a = suffix_a(u);
            let h = prefix_h(u);
            nodes
                .iter()
                .zip(a.values().iter().zip(h.values()))
                .map(|(&r, (a, h))| {
                    let hh = if r == 0.0 { 0.0 } else { h * h / (r * r) };
                    q * (2.0 * a + hh)
                })
                .collect()
        };
        let v_mid = (0..nodes.len() - 1)
            .map(|i| {
                let j0 = i.saturating_sub(1).min(nodes.len() - 4);
                lagrange4(&nodes[j0..j0 + 4], &v[j0..j0 + 4], 0.5 * (nodes[i] + nodes[i + 1]))
            })
            .collect();
        Self { nodes, v, v_mid }
    }
}

fn lagrange4(x: &[f64], y: &[f64], t: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        let mut l = 1.0;
        for j in 0..4 {
            if i != j {
                l *= (t - x[j]) / (x[i] - x[j]);
            }
        }
        s += l * y[i];
    }
    s
}

struct Shot {
    class: Class,
    values: Vec<f64>,
}

fn rhs(r: f64, u: f64, p: f64, v: f64, model: &NonlinearityModel) -> (f64, f64) {
    let source = v * u - model.g(u);
    if r == 0.0 {
        (p, 0.5 * source)
    } else {
        (p, -p / r + source)
    }
}

fn shoot(u0: f64, frozen: &Frozen, model: &NonlinearityModel, k: usize, record: bool) -> Shot {
    let nodes = &frozen.nodes;
    let n = nodes.len();
    let (mut u, mut p) = (u0, 0.0);
    let mut values = Vec::with_capacity(if record { n } else { 0 });
    if record {
        values.push(u);
    }
    let mut zeros = 0;
    let mut sign = u0.signum();
    let mut seen_peak = true;
    for i in 0..n - 1 {
        let (r, h) = (nodes[i], nodes[i + 1] - nodes[i]);
        let (vi, vm, ve) = (frozen.v[i], frozen.v_mid[i], frozen.v[i + 1]);
        let (k1u, k1p) = rhs(r, u, p, vi, model);
        let (k2u, k2p) = rhs(r + 0.5 * h, u + 0.5 * h * k1u, p + 0.5 * h * k1p, vm, model);
        let (k3u, k3p) = rhs(r + 0.5 * h, u + 0.5 * h * k2u, p + 0.5 * h * k2p, vm, model);
        let (k4u, k4p) = rhs(r + h, u + h * k3u, p + h * k3p, ve, model);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if !(u.is_finite() && p.is_finite()) {
            return Shot {
                class: Class::Under,
                values,
            };
        }
        if record {
            values.push(u);
        }
        if u != 0.0 && u.signum() != sign {
            sign = u.signum();
            zeros += 1;
            seen_peak = false;
            if zeros > k {
                return Shot {
                    class: Class::Over,
                    values,
                };
            }
        }
        if u * p < 0.0 {
            seen_peak = true;
        } else if u * p > 0.0 && seen_peak {
            return Shot {
                class: Class::Under,
                values,
            };
        }
    }
    let kappa = (model.decay_rate_sq() + frozen.v[n - 1]).max(0.0).sqrt();
    let class = if zeros == k && p / u < -kappa {
        Class::Over
    } else {
        Class::Under
    };
    Shot { class, values }
}

/// Bisection on `u(0) > 0`; returns the Under/Over bracket.
fn bracket(frozen: &Frozen, model: &NonlinearityModel, k: usize, guess: f64) -> Option<(f64, f64)> {
    let mut lo = guess;
    let mut hi = guess;
    let mut tries = 0;
    while shoot(lo, frozen, model, k, false).class != Class::Under {
        lo *= 0.5;
        tries += 1;
        if tries > 80 {
            return None;
        }
    }
    tries = 0;
    while shoot(hi, frozen, model, k, false).class != Class::Over {
        hi *= 2.0;
        tries += 1;
        if tries > 80 {
            return None;
        }
    }
    if hi == lo {
        return None;
    }
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(mid, frozen, model, k, false).class {
            Class::Under => lo = mid,
            Class::Over => hi = mid,
        }
    }
    Some((lo, hi))
}

/// Profile of the bracketed trajectory, with the unstable tail replaced by
/// the decaying asymptotic `u(r_b) e^{−κ(r−r_b)} (r_b/r)^{1/2}`.
fn splice(frozen: &Frozen, model: &NonlinearityModel, k: usize, lo: f64, hi: f64) -> Vec<f64> {
    let a = shoot(lo, frozen, model, k, true).values;
    let b = shoot(hi, frozen, model, k, true).values;
    let n = frozen.nodes.len();
    let scale = lo.abs();
    let mut split = a.len().min(b.len());
    for i in 0..split {
        if (a[i] - b[i]).abs() > 1e-6 * scale {
            split = i;
            break;
        }
    }
    let rb_idx = split.saturating_sub(1).max(1).min(n - 1);
    let mut out = Vec::with_capacity(n);
    for i in 0..=rb_idx {
        out.push(0.5 * (a[i] + b[i]));
    }
    let rb = frozen.nodes[rb_idx];
    let ub = out[rb_idx];
    let kappa = (model.decay_rate_sq() + frozen.v[rb_idx]).max(0.0).sqrt();
    for &r in &frozen.nodes[rb_idx + 1..] {
        out.push(ub * (-kappa * (r - rb)).exp() * (rb / r).sqrt());
    }
    out
}

fn initial_amplitude(model: &NonlinearityModel) -> f64 {
    let mut x = model.delta0().max(1e-3);
    while model.big_g(x) <= 0.0 && x < 1e6 {
        x *= 1.25;
    }
    2.0 * x
}

pub(crate) fn nodal_shoot_from(
    q: f64,
    model: &NonlinearityModel,
    grid: &Arc<RadialGrid>,
    k: usize,
    cfg: &MinimaxConfig,
    warm: Option<&RadialFunction>,
) -> Result<SolveReport> {
    cfg.validate()?;
    if !(q.is_finite() && q >= 0.0) {
        return Err(Error::InvalidArgument(format!("q must be nonnegative, got {q}")));
    }
    if let Some(w) = warm {
        if !Arc::ptr_eq(w.grid(), grid) && w.grid().as_ref() != grid.as_ref() {
            return Err(Error::GridMismatch);
        }
    }
    let mut current = warm
        .map(|w| RadialFunction::from_parts(Arc::clone(grid), w.values().to_vec()))
        .unwrap_or_else(|| RadialFunction::zeros(grid));
    let mut guess = if current.value_at_origin().abs() > 0.0 {
        current.value_at_origin().abs()
    } else {
        initial_amplitude(model)
    };
    let mut first_size = None;
    let mut iterations = 0;
    let mut settled = false;
    while iterations < cfg.max_inner_iters {
        iterations += 1;
        let frozen = Frozen::new(&current, q);
        let Some((lo, hi)) = bracket(&frozen, model, k, guess) else {
            return report_for(
                current,
                q,
                model,
                cfg,
                Method::NodalShoot,
                Some(k),
                iterations,
                false,
                "no shooting bracket for the requested node count",
            );
        };
        guess = lo;
        let shot = splice(&frozen, model, k, lo, hi);
        let beta = if current.sup_norm() == 0.0 { 1.0 } else { cfg.relaxation };
        let next: Vec<f64> = current
            .values()
            .iter()
            .zip(&shot)
            .map(|(a, b)| (1.0 - beta) * a + beta * b)
            .collect();
        let change = current
            .values()
            .iter()
            .zip(&next)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        current = RadialFunction::from_parts(Arc::clone(grid), next);
        let size = current.sup_norm();
        let reference = *first_size.get_or_insert(size);
        if size > 10.0 * reference {
            return report_for(
                current,
                q,
                model,
                cfg,
                Method::NodalShoot,
                Some(k),
                iterations,
                false,
                "frozen-coefficient iteration diverged",
            );
        }
        if change < cfg.fixed_point_tol {
            settled = true;
            break;
        }
    }
    let newton = newton_core(&current, q, model, cfg);
    let message = if newton.converged {
        format!(
            "{} frozen-coefficient iterations{}, {} Newton steps",
            iterations,
            if settled { "" } else { " (not settled)" },
            newton.iterations
        )
    } else {
        newton.message
    };
    let history = newton.history;
    let mut report = report_for(
        newton.u,
        q,
        model,
        cfg,
        Method::NodalShoot,
        Some(k),
        iterations + newton.iterations,
        newton.converged,
        message,
    )?;
    report.newton_history = history;
    Ok(report)
}

/// Solution with exactly `k` sign changes and `u(0) > 0`.
pub fn nodal_shoot(
    q: f64,
    model: &NonlinearityModel,
    grid: &Arc<RadialGrid>,
    k: usize,
    cfg: &MinimaxConfig,
) -> Result<SolveReport> {
    nodal_shoot_from(q, model, grid, k, cfg, None)
}
