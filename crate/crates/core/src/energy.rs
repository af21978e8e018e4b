//! Energies of a radial profile: the functional `J_q`, its truncated form,
//! the comparison functional `ℐ`, the dilation-augmented `𝒥̃_q(θ, u)` with
//! both partial derivatives, Sobolev gradients and the `ω`-rescaling.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{dirichlet_sq, RadialFunction, RadialGrid};
use crate::linalg::{BandCholesky, SymBand};
use crate::nonlinearity::NonlinearityModel;
use crate::nonlocal::{big_n_gradient, big_n_prime_with_h, n_with_h};

/// Smooth cutoff: 1 on `[0, 1]`, 0 on `[2, ∞)`, quintic smoothstep between.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TruncationPhi;

impl TruncationPhi {
    pub const MAX_SLOPE: f64 = 15.0 / 8.0;

    pub fn value(s: f64) -> f64 {
        if s <= 1.0 {
            1.0
        } else if s >= 2.0 {
            0.0
        } else {
            let t = s - 1.0;
            1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
        }
    }

    pub fn derivative(s: f64) -> f64 {
        if s <= 1.0 || s >= 2.0 {
            0.0
        } else {
            let t = s - 1.0;
            -30.0 * t * t * (1.0 - t) * (1.0 - t)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub dirichlet: f64,
    pub nonlocal: f64,
    pub potential: f64,
    pub total: f64,
    pub q: f64,
    pub theta: f64,
    pub truncation_active: bool,
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q >= 0.0 {
        Ok(())
    } else {
        invalid(format!("q must be a finite nonnegative number, got {q}"))
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() {
        Ok(())
    } else {
        invalid(format!("theta must be finite, got {theta}"))
    }
}

/// `∫_{ℝ²} G(u)`.
pub fn potential_integral(u: &RadialFunction, model: &NonlinearityModel) -> f64 {
    let vals: Vec<f64> = u.values().iter().map(|&x| model.big_g(x)).collect();
    u.grid().integrate_plane(&vals)
}

fn breakdown(dirichlet: f64, nonlocal: f64, potential: f64, q: f64, theta: f64, active: bool) -> EnergyBreakdown {
    EnergyBreakdown {
        dirichlet,
        nonlocal,
        potential,
        total: dirichlet + nonlocal + potential,
        q,
        theta,
        truncation_active: active,
    }
}

pub fn j_q(u: &RadialFunction, q: f64, model: &NonlinearityModel) -> Result<EnergyBreakdown> {
    check_q(q)?;
    let (n, _) = n_with_h(u);
    Ok(breakdown(
        0.5 * dirichlet_sq(u),
        0.5 * q * n,
        -potential_integral(u, model),
        q,
        0.0,
        q * n > 1.0,
    ))
}

pub fn j_trunc(u: &RadialFunction, q: f64, model: &NonlinearityModel) -> Result<EnergyBreakdown> {
    j_tilde(0.0, u, q, model)
}

/// `ℐ(u) = ½‖∇u‖² − ∫Λ̄(u)`.
pub fn i_comparison(u: &RadialFunction, model: &NonlinearityModel) -> f64 {
    let lb = model.capital_lambda_bar_many(u.values());
    0.5 * dirichlet_sq(u) - u.grid().integrate_plane(&lb)
}

pub fn j_tilde(theta: f64, u: &RadialFunction, q: f64, model: &NonlinearityModel) -> Result<EnergyBreakdown> {
    check_q(q)?;
    check_theta(theta)?;
    let (n, _) = n_with_h(u);
    let e4 = (4.0 * theta).exp();
    let s = q * e4 * n;
    Ok(breakdown(
        0.5 * dirichlet_sq(u),
        0.5 * q * e4 * TruncationPhi::value(s) * n,
        -(2.0 * theta).exp() * potential_integral(u, model),
        q,
        theta,
        s > 1.0,
    ))
}

pub fn d_theta_j_tilde(theta: f64, u: &RadialFunction, q: f64, model: &NonlinearityModel) -> Result<f64> {
    check_q(q)?;
    check_theta(theta)?;
    let (n, _) = n_with_h(u);
    let e4 = (4.0 * theta).exp();
    let s = q * e4 * n;
    Ok(2.0 * q * e4 * TruncationPhi::value(s) * n
        + 2.0 * q * q * e4 * e4 * TruncationPhi::derivative(s) * n * n
        - 2.0 * (2.0 * theta).exp() * potential_integral(u, model))
}

/// The terms `C = q e^{4θ} φ N` and `D = 2 q² e^{8θ} φ' N²` with
/// `‖∇u‖² = 2𝒥̃ − ∂_θ𝒥̃ + C + D`.
pub fn ledger_terms(theta: f64, u: &RadialFunction, q: f64) -> Result<(f64, f64)> {
    check_q(q)?;
    check_theta(theta)?;
    let (n, _) = n_with_h(u);
    let e4 = (4.0 * theta).exp();
    let s = q * e4 * n;
    Ok((
        q * e4 * TruncationPhi::value(s) * n,
        2.0 * q * q * e4 * e4 * TruncationPhi::derivative(s) * n * n,
    ))
}

/// Coefficient multiplying `N'(u)[·]` in `∂_u𝒥̃`.
fn nonlocal_coefficient(theta: f64, q: f64, n: f64) -> f64 {
    let e4 = (4.0 * theta).exp();
    let s = q * e4 * n;
    0.5 * q * q * e4 * e4 * TruncationPhi::derivative(s) * n + 0.5 * q * e4 * TruncationPhi::value(s)
}

pub fn weak_gradient(
    theta: f64,
    u: &RadialFunction,
    q: f64,
    model: &NonlinearityModel,
    v: &RadialFunction,
) -> Result<f64> {
    check_q(q)?;
    check_theta(theta)?;
    u.check_same_grid(v)?;
    let grid = u.grid();
    let du = grid.derivative(u.values());
    let dv = grid.derivative(v.values());
    let (n, h) = n_with_h(u);
    let grad: Vec<f64> = du.iter().zip(&dv).map(|(a, b)| a * b).collect();
    let gv: Vec<f64> = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(&x, &y)| model.g(x) * y)
        .collect();
    Ok(grid.integrate_plane(&grad)
        + nonlocal_coefficient(theta, q, n) * big_n_prime_with_h(u, v.values(), &h)
        - (2.0 * theta).exp() * grid.integrate_plane(&gv))
}

/// Nodal representation of `∂_u𝒥̃(θ, u)`: `weak_gradient[v] = Σ_j out_j v_j`.
pub(crate) fn gradient_vector(theta: f64, u: &RadialFunction, q: f64, model: &NonlinearityModel) -> Vec<f64> {
    let grid = u.grid();
    let w = grid.plane_weights();
    let du = grid.derivative(u.values());
    let weighted: Vec<f64> = du.iter().zip(&w).map(|(d, wi)| d * wi).collect();
    let mut out = derivative_transpose(grid, &weighted);
    let (n, h) = n_with_h(u);
    let coef = nonlocal_coefficient(theta, q, n);
    if coef != 0.0 {
        for (o, gn) in out.iter_mut().zip(big_n_gradient(u, &h)) {
            *o += coef * gn;
        }
    }
    let e2 = (2.0 * theta).exp();
    for ((o, &x), wi) in out.iter_mut().zip(u.values()).zip(&w) {
        *o -= e2 * wi * model.g(x);
    }
    out
}

/// Rows of the discrete first-derivative operator, diagonal included.
fn derivative_rows(grid: &RadialGrid) -> Vec<Vec<(usize, f64)>> {
    grid.d1_stencils()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(7);
            let mut diag = 0.0;
            for (j, c) in s.entries() {
                diag -= c;
                row.push((j, c));
            }
            match row.iter_mut().find(|(j, _)| *j == i) {
                Some(e) => e.1 += diag,
                None => row.push((i, diag)),
            }
            row
        })
        .collect()
}

fn derivative_transpose(grid: &RadialGrid, y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for (row, yi) in derivative_rows(grid).iter().zip(y) {
        for &(j, c) in row {
            out[j] += c * yi;
        }
    }
    out
}

/// Discrete Gram matrix of `⟨u, v⟩ = ∫u'v' + m0 ∫uv` on the plane,
/// factored once and reused for Riesz representatives.
#[derive(Debug, Clone)]
pub(crate) struct SobolevMetric {
    chol: BandCholesky,
}

impl SobolevMetric {
    pub(crate) fn new(grid: &RadialGrid, m0: f64) -> Result<Self> {
        if !(m0.is_finite() && m0 > 0.0) {
            return invalid(format!("m0 must be positive, got {m0}"));
        }
        let rows = derivative_rows(grid);
        let w = grid.plane_weights();
        let bw = rows
            .iter()
            .map(|r| {
                let lo = r.iter().map(|e| e.0).min().unwrap_or(0);
                let hi = r.iter().map(|e| e.0).max().unwrap_or(0);
                hi - lo
            })
            .max()
            .unwrap_or(0);
        let mut a = SymBand::zeros(grid.len(), bw);
        for (row, wk) in rows.iter().zip(&w) {
            for &(i, ci) in row {
                for &(j, cj) in row {
                    if j <= i {
                        a.add(i, j, wk * ci * cj);
                    }
                }
            }
        }
        for (i, wi) in w.iter().enumerate() {
            a.add(i, i, m0 * wi);
        }
        Ok(Self { chol: a.cholesky()? })
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.chol.solve(rhs)
    }
}

/// The representative `w` of `∂_u𝒥̃(θ, u)` in the `‖∇·‖² + m0‖·‖²` inner product.
pub fn riesz_gradient(theta: f64, u: &RadialFunction, q: f64, model: &NonlinearityModel) -> Result<RadialFunction> {
    check_q(q)?;
    check_theta(theta)?;
    let metric = SobolevMetric::new(u.grid(), model.m0())?;
    Ok(riesz_with(&metric, theta, u, q, model))
}

pub(crate) fn riesz_with(
    metric: &SobolevMetric,
    theta: f64,
    u: &RadialFunction,
    q: f64,
    model: &NonlinearityModel,
) -> RadialFunction {
    let rhs = gradient_vector(theta, u, q, model);
    RadialFunction::from_parts(Arc::clone(u.grid()), metric.solve(&rhs))
}

/// Sobolev inner product `∫∇u·∇v + m0 ∫uv`.
pub fn sobolev_inner(u: &RadialFunction, v: &RadialFunction, m0: f64) -> Result<f64> {
    u.check_same_grid(v)?;
    let grid = u.grid();
    let du = grid.derivative(u.values());
    let dv = grid.derivative(v.values());
    let f: Vec<f64> = du
        .iter()
        .zip(&dv)
        .zip(u.values().iter().zip(v.values()))
        .map(|((a, b), (x, y))| a * b + m0 * x * y)
        .collect();
    Ok(grid.integrate_plane(&f))
}

/// Maps a profile solving `−Δu + ωu + (nonlocal) = |u|^{p−1}u` to
/// `v(y) = ω^{−1/(p−1)} u(ω^{−1/2} y)`, which solves the unit-mass equation
/// with coupling `q = ω^{2(3−p)/(p−1)}`. The result lives on the source grid
/// stretched by `√ω`, so no interpolation is involved.
pub fn rescale_omega(u: &RadialFunction, omega: f64, p: f64) -> Result<(RadialFunction, f64)> {
    if !(omega.is_finite() && omega > 0.0) {
        return invalid(format!("omega must be positive, got {omega}"));
    }
    if !(p > 1.0 && p <= 5.0) {
        return invalid(format!("p must lie in (1, 5], got {p}"));
    }
    if p == 3.0 {
        return invalid("p = 3 makes the coupling independent of omega");
    }
    let q = omega.powf(2.0 * (3.0 - p) / (p - 1.0));
    if omega == 1.0 {
        return Ok((u.clone(), q));
    }
    let grid = Arc::new(u.grid().scaled(omega.sqrt())?);
    let amp = omega.powf(-1.0 / (p - 1.0));
    let values = u.values().iter().map(|x| amp * x).collect();
    Ok((RadialFunction::from_parts(grid, values), q))
}
