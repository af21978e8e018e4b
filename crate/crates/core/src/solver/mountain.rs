//! Initial path families and discrete mountain-pass path deformation.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{gradient_vector, j_trunc, potential_integral, SobolevMetric};
use crate::error::{invalid, Error, Result};
use crate::grid::{RadialFunction, RadialGrid};
use crate::nonlinearity::NonlinearityModel;

use super::newton::newton_core;
use super::{report_for, Method, MinimaxConfig, SolveReport};

const MAX_DOUBLINGS: usize = 60;
const ARMIJO: f64 = 1e-4;

/// Samples `σ ↦ α_n(σ)` of an odd path family over the closed unit
/// `n`-disk, dilated so that every sampled boundary point has negative
/// truncated energy.
#[derive(Debug, Clone)]
pub struct InitialPath {
    pub sigmas: Vec<Vec<f64>>,
    pub profiles: Vec<RadialFunction>,
    /// Dilation factor applied to the base bumps.
    pub theta: f64,
    pub amplitude: f64,
    /// Largest truncated energy over the sampled boundary `|σ| = 1`.
    pub boundary_energy: f64,
}

/// `(1 − t²)³` on `|t| < 1`.
fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let s = 1.0 - t * t;
        s * s * s
    }
}

/// Base profile number `i` of `n`: a Gaussian for `n = 1`, otherwise a disc
/// bump (`i = 0`) or disjoint annular bumps.
fn base(n: usize, i: usize, r: f64) -> f64 {
    if n == 1 {
        (-r * r).exp()
    } else if i == 0 {
        bump(r)
    } else {
        bump(r - 2.5 * i as f64)
    }
}

fn combine(grid: &Arc<RadialGrid>, n: usize, sigma: &[f64], amp: f64, theta: f64) -> RadialFunction {
    RadialFunction::from_fn(grid, |r| {
        let x = r / theta;
        amp * sigma.iter().enumerate().map(|(i, s)| s * base(n, i, x)).sum::<f64>()
    })
}

fn boundary_samples(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    if n == 1 {
        return vec![vec![1.0]];
    }
    let mut out = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        out.push(e.clone());
        e[i] = -1.0;
        out.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < 2 * n + count {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            out.push(v.iter().map(|x| x / norm).collect());
        }
    }
    out
}

fn starting_amplitude(model: &NonlinearityModel) -> f64 {
    let mut x = model.delta0().max(1e-3);
    while model.big_g(x) <= 0.0 && x < 1e6 {
        x *= 1.25;
    }
    2.0 * x
}

pub fn initial_path(
    model: &NonlinearityModel,
    grid: &Arc<RadialGrid>,
    n: usize,
    q: f64,
    cfg: &MinimaxConfig,
) -> Result<InitialPath> {
    cfg.validate()?;
    if n == 0 {
        return invalid("path family index must be at least 1");
    }
    let boundary = boundary_samples(n, cfg.path_points, cfg.seed);
    let mut amp = starting_amplitude(model);
    let mut theta = 1.0;
    let mut worst = f64::INFINITY;
    let mut found = false;
    for _ in 0..=MAX_DOUBLINGS {
        let mut worst_sigma = &boundary[0];
        worst = f64::NEG_INFINITY;
        for s in &boundary {
            let e = j_trunc(&combine(grid, n, s, amp, theta), q, model)?.total;
            if e > worst {
                worst = e;
                worst_sigma = s;
            }
        }
        if worst < 0.0 {
            found = true;
            break;
        }
        let profile = combine(grid, n, worst_sigma, amp, theta);
        if potential_integral(&profile, model) <= 0.0 {
            amp *= 2.0;
        } else {
            theta *= 2.0;
        }
    }
    if !found {
        return Err(Error::NoNegativeEnergy(format!(
            "boundary energy still {worst:.3e} after {MAX_DOUBLINGS} doublings"
        )));
    }
    let mut sigmas = Vec::new();
    if n == 1 {
        let m = cfg.path_points;
        for j in 0..m {
            sigmas.push(vec![j as f64 / (m - 1) as f64]);
        }
    } else {
        sigmas.push(vec![0.0; n]);
        for s in &boundary {
            for t in [0.25, 0.5, 0.75, 1.0] {
                sigmas.push(s.iter().map(|x| t * x).collect());
            }
        }
    }
    let profiles = sigmas.iter().map(|s| combine(grid, n, s, amp, theta)).collect();
    Ok(InitialPath {
        sigmas,
        profiles,
        theta,
        amplitude: amp,
        boundary_energy: worst,
    })
}

/// Maximum of `t ↦ E(t v)` on `[0, ∞)`: coarse scan over `samples` points
/// of `[0, t_end]` (extended until the energy is negative) refined by golden
/// section. Returns `(t, E(t v))`.
fn ray_max(
    v: &RadialFunction,
    samples: usize,
    energy: &dyn Fn(&RadialFunction) -> Result<f64>,
) -> Result<(f64, f64)> {
    let at = |t: f64| energy(&v.scale(t));
    let mut t_end = 1.0;
    let mut tries = 0;
    while at(t_end)? >= 0.0 {
        t_end *= 2.0;
        tries += 1;
        if tries > MAX_DOUBLINGS {
            return Err(Error::NoNegativeEnergy("ray energy stays nonnegative".into()));
        }
    }
    let h = t_end / (samples - 1) as f64;
    let mut best = (0, f64::NEG_INFINITY);
    for j in 1..samples {
        let e = at(j as f64 * h)?;
        if e > best.1 {
            best = (j, e);
        }
    }
    let (mut a, mut b) = ((best.0 as f64 - 1.0) * h, (best.0 as f64 + 1.0) * h);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (at(c)?, at(d)?);
    while b - a > 1e-12 * b {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = at(d)?;
        }
    }
    let t = 0.5 * (a + b);
    Ok((t, at(t)?))
}

/// Mountain-pass critical point of the truncated functional for `n = 1`.
///
/// The path is kept as the segment `σ ↦ σ T v`; each iteration takes a
/// Sobolev-gradient step at the maximiser on the segment and rebuilds the
/// segment through the moved point.
pub fn mountain_pass(
    q: f64,
    model: &NonlinearityModel,
    grid: &Arc<RadialGrid>,
    cfg: &MinimaxConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    if !(q.is_finite() && q >= 0.0) {
        return invalid(format!("q must be nonnegative, got {q}"));
    }
    let init = initial_path(model, grid, 1, q, cfg)?;
    let metric = SobolevMetric::new(grid, model.m0())?;
    let energy = |u: &RadialFunction| j_trunc(u, q, model).map(|e| e.total);
    let endpoint = init.profiles.last().expect("path has points").clone();
    let (t, mut level) = ray_max(&endpoint, cfg.path_points, &energy)?;
    let mut u = endpoint.scale(t);
    let mut alpha = cfg.descent_step;
    let mut converged = false;
    let mut iterations = 0;
    let mut message = String::new();
    while iterations < cfg.max_outer_iters {
        iterations += 1;
        let rhs = gradient_vector(0.0, &u, q, model);
        let w = metric.solve(&rhs);
        let gnorm_sq: f64 = rhs.iter().zip(&w).map(|(a, b)| a * b).sum();
        if gnorm_sq.max(0.0).sqrt() < cfg.grad_tol {
            converged = true;
            break;
        }
        let mut accepted = None;
        for _ in 0..cfg.max_inner_iters {
            let moved = RadialFunction::from_parts(
                Arc::clone(grid),
                u.values().iter().zip(&w).map(|(a, b)| a - alpha * b).collect(),
            );
            let (s, e) = ray_max(&moved, cfg.path_points, &energy)?;
            if e <= level - ARMIJO * alpha * gnorm_sq {
                accepted = Some((moved.scale(s), e));
                break;
            }
            alpha *= 0.5;
        }
        let Some((next, e)) = accepted else {
            message = format!("descent step underflow at gradient norm {:.3e}", gnorm_sq.sqrt());
            break;
        };
        u = next;
        level = e;
        alpha = (alpha * 1.5).min(cfg.descent_step.max(1.0));
    }
    if !converged {
        if message.is_empty() {
            message = format!("path deformation did not converge in {} iterations", cfg.max_outer_iters);
        }
        return report_for(u, q, model, cfg, Method::MountainPass, None, iterations, false, message);
    }
    let newton = newton_core(&u, q, model, cfg);
    let message = if newton.converged {
        format!("{iterations} path iterations, {} Newton steps", newton.iterations)
    } else {
        newton.message
    };
    let history = newton.history;
    let mut report = report_for(
        newton.u,
        q,
        model,
        cfg,
        Method::MountainPass,
        None,
        iterations + newton.iterations,
        newton.converged,
        message,
    )?;
    report.newton_history = history;
    Ok(report)
}
