//! Policy-free checks of candidate solutions: strong-form residual, Nehari
//! and Pohozaev residuals, the dilation ledger identity, the interpolation
//! inequality `‖u‖₄⁴ ≤ 2‖∇u‖₂ N(u)^{1/2}` and pairwise distinctness.

use serde::{Deserialize, Serialize};

use crate::energy::{d_theta_j_tilde, j_tilde, ledger_terms, weak_gradient};
use crate::error::{invalid, Error, Result};
use crate::grid::{dirichlet_sq, norm_l2, norm_lp, RadialFunction};
use crate::nonlinearity::NonlinearityModel;
use crate::nonlocal::{big_n, n_with_h};

/// Strong-form residual `−Δu + q u (2A_u + h_u²/r²) − g(u)` at every node,
/// together with the pointwise size of its three parts.
pub(crate) struct StrongResidual {
    pub residual: Vec<f64>,
    pub scale: Vec<f64>,
}

pub(crate) fn strong_residual(u: &RadialFunction, q: f64, model: &NonlinearityModel) -> StrongResidual {
    let grid = u.grid();
    let lap = grid.laplacian(u.values());
    let (_, h) = n_with_h(u);
    let nodes = grid.nodes();
    let integrand: Vec<f64> = nodes
        .iter()
        .zip(u.values().iter().zip(&h))
        .map(|(&r, (v, hv))| if r == 0.0 { 0.0 } else { v * v * hv / r })
        .collect();
    let a = grid.suffix_integral(&integrand);
    let n = nodes.len();
    let mut residual = Vec::with_capacity(n);
    let mut scale = Vec::with_capacity(n);
    for i in 0..n {
        let r = nodes[i];
        let v = u.values()[i];
        let h2 = if r == 0.0 { 0.0 } else { h[i] * h[i] / (r * r) };
        let nl = q * v * (2.0 * a[i] + h2);
        let g = model.g(v);
        residual.push(-lap[i] + nl - g);
        scale.push(lap[i].abs() + nl.abs() + g.abs());
    }
    StrongResidual { residual, scale }
}

/// Sup and plane-L² norms of the strong residual over all nodes but the
/// outermost one, where the truncated problem carries a boundary condition.
pub fn residual_pde(u: &RadialFunction, q: f64, model: &NonlinearityModel) -> (f64, f64) {
    let StrongResidual { residual, .. } = strong_residual(u, q, model);
    let n = residual.len();
    let interior = &residual[..n - 1];
    let sup = interior.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut sq: Vec<f64> = interior.iter().map(|x| x * x).collect();
    sq.push(0.0);
    (sup, u.grid().integrate_plane(&sq).max(0.0).sqrt())
}

/// `∂_u𝒥̃(0, u)[u]`; equals `‖∇u‖² + 3qN(u) − ∫g(u)u` when `qN(u) ≤ 1`.
pub fn nehari_residual(u: &RadialFunction, q: f64, model: &NonlinearityModel) -> Result<f64> {
    weak_gradient(0.0, u, q, model, u)
}

/// `∂_θ𝒥̃(0, u)`; equals `2qN(u) − 2∫G(u)` when `qN(u) ≤ 1`.
pub fn pohozaev_residual(u: &RadialFunction, q: f64, model: &NonlinearityModel) -> Result<f64> {
    d_theta_j_tilde(0.0, u, q, model)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerCheck {
    /// `|2𝒥̃ − ∂_θ𝒥̃ − ‖∇u‖² + C + D|`.
    pub residual: f64,
    /// Sum of the magnitudes of all terms, for relative comparisons.
    pub scale: f64,
    pub c: f64,
    pub d: f64,
    /// `q e^{4θ} N(u)`.
    pub s: f64,
}

impl LedgerCheck {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.residual / self.scale
        }
    }
}

pub fn ledger_check(theta: f64, u: &RadialFunction, q: f64, model: &NonlinearityModel) -> Result<LedgerCheck> {
    let j = j_tilde(theta, u, q, model)?.total;
    let dj = d_theta_j_tilde(theta, u, q, model)?;
    let grad = dirichlet_sq(u);
    let (c, d) = ledger_terms(theta, u, q)?;
    Ok(LedgerCheck {
        residual: (2.0 * j - dj - grad + c + d).abs(),
        scale: 2.0 * j.abs() + dj.abs() + grad + c.abs() + d.abs(),
        c,
        d,
        s: q * (4.0 * theta).exp() * big_n(u),
    })
}

pub fn ledger_identity(theta: f64, u: &RadialFunction, q: f64, model: &NonlinearityModel) -> Result<f64> {
    Ok(ledger_check(theta, u, q, model)?.residual)
}

/// Both sides of `‖u‖₄⁴ ≤ 2‖∇u‖₂ N(u)^{1/2}`.
pub fn bhs_sides(u: &RadialFunction) -> Result<(f64, f64)> {
    if u.sup_norm() == 0.0 {
        return invalid("interpolation inequality needs a nonzero profile");
    }
    let lhs = norm_lp(u, 4.0)?.powi(4);
    let rhs = 2.0 * dirichlet_sq(u).sqrt() * big_n(u).sqrt();
    Ok((lhs, rhs))
}

pub fn bhs_inequality(u: &RadialFunction) -> Result<bool> {
    let (lhs, rhs) = bhs_sides(u)?;
    Ok(lhs <= rhs + 1e-12)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistinctnessReport {
    /// Plane-L² distances `‖u_i − u_j‖₂`.
    pub distances: Vec<Vec<f64>>,
    /// `level_j − level_i`.
    pub level_gaps: Vec<Vec<f64>>,
    pub threshold: f64,
    /// Pairs `(i, j)`, `i < j`, closer than the threshold.
    pub flagged: Vec<(usize, usize)>,
}

pub fn distinctness(profiles: &[RadialFunction], levels: &[f64], threshold: f64) -> Result<DistinctnessReport> {
    if profiles.len() < 2 || levels.len() != profiles.len() {
        return invalid("distinctness needs at least two profiles with one level each");
    }
    let first = &profiles[0];
    if profiles.iter().any(|p| !p.same_grid(first)) {
        return Err(Error::GridMismatch);
    }
    let m = profiles.len();
    let mut distances = vec![vec![0.0; m]; m];
    let mut flagged = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let d = norm_l2(&profiles[i].axpy(-1.0, &profiles[j])?);
            distances[i][j] = d;
            distances[j][i] = d;
            if d <= threshold {
                flagged.push((i, j));
            }
        }
    }
    let level_gaps = (0..m)
        .map(|i| (0..m).map(|j| levels[j] - levels[i]).collect())
        .collect();
    Ok(DistinctnessReport {
        distances,
        level_gaps,
        threshold,
        flagged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub residual_pde_sup: f64,
    pub residual_pde_l2: f64,
    /// Sup residual divided by the sup of `|Δu| + |nonlocal| + |g(u)|`.
    pub residual_pde_relative: f64,
    pub nehari: f64,
    /// Nehari residual over `‖∇u‖² + 3qN + |∫g(u)u|`.
    pub nehari_relative: f64,
    pub pohozaev: f64,
    /// Pohozaev residual over `2∫|G(u)| + 2qN`.
    pub pohozaev_relative: f64,
    pub q_times_n: f64,
    pub q_n_check: bool,
    pub bhs_inequality_ok: bool,
    pub ledger_identity_err: f64,
}

pub fn verify(u: &RadialFunction, q: f64, model: &NonlinearityModel) -> Result<VerificationReport> {
    let grid = u.grid();
    let StrongResidual { residual, scale } = strong_residual(u, q, model);
    let n_nodes = residual.len();
    let (sup, l2) = residual_pde(u, q, model);
    let pde_scale = scale[..n_nodes - 1].iter().fold(0.0f64, |m, x| m.max(*x));
    let n = big_n(u);
    let nehari = nehari_residual(u, q, model)?;
    let gu: Vec<f64> = u.values().iter().map(|&x| model.g(x) * x).collect();
    let nehari_scale = dirichlet_sq(u) + 3.0 * q * n + grid.integrate_plane(&gu).abs();
    let pohozaev = pohozaev_residual(u, q, model)?;
    let abs_g: Vec<f64> = u.values().iter().map(|&x| model.big_g(x).abs()).collect();
    let pohozaev_scale = 2.0 * grid.integrate_plane(&abs_g) + 2.0 * q * n;
    let rel = |x: f64, s: f64| if s == 0.0 { 0.0 } else { x.abs() / s };
    let bhs = if u.sup_norm() == 0.0 { true } else { bhs_inequality(u)? };
    Ok(VerificationReport {
        residual_pde_sup: sup,
        residual_pde_l2: l2,
        residual_pde_relative: rel(sup, pde_scale),
        nehari,
        nehari_relative: rel(nehari, nehari_scale),
        pohozaev,
        pohozaev_relative: rel(pohozaev, pohozaev_scale),
        q_times_n: q * n,
        q_n_check: q * n <= 1.0,
        bhs_inequality_ok: bhs,
        ledger_identity_err: ledger_check(0.0, u, q, model)?.relative(),
    })
}
