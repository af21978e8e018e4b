//! Radial grids on `[0, R_max]`, planar quadrature, finite-difference calculus
//! and dilation for radially symmetric functions on the plane.
//!
//! All derivative stencils are built once per grid with Fornberg's algorithm
//! and folded through the even reflection `u(-r) = u(r)` near the origin, so
//! `u'(0) = 0` holds exactly and the radial Laplacian at the origin is the
//! smooth limit `2u''(0)`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::interp::Pchip;

pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Grading {
    Uniform,
    /// Consecutive spacings grow by `ratio`.
    Geometric { ratio: f64 },
}

/// Finite-difference or quadrature stencil: `sum_k coef[k] * f[idx[k]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Stencil {
    idx: [usize; 6],
    coef: [f64; 6],
    len: usize,
}

impl Stencil {
    const EMPTY: Stencil = Stencil {
        idx: [0; 6],
        coef: [0.0; 6],
        len: 0,
    };

    fn push(&mut self, j: usize, c: f64) {
        if let Some(k) = self.idx[..self.len].iter().position(|&i| i == j) {
            self.coef[k] += c;
        } else {
            self.idx[self.len] = j;
            self.coef[self.len] = c;
            self.len += 1;
        }
    }

    pub(crate) fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.idx[..self.len]
            .iter()
            .copied()
            .zip(self.coef[..self.len].iter().copied())
    }

    #[inline]
    fn apply(&self, f: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 0..self.len {
            s += self.coef[k] * f[self.idx[k]];
        }
        s
    }

    /// Applies a difference stencil whose weights sum to zero as
    /// `sum coef * (f_j - f_center)`, which annihilates constants exactly.
    #[inline]
    fn apply_centered(&self, f: &[f64], center: usize) -> f64 {
        let fc = f[center];
        let mut s = 0.0;
        for k in 0..self.len {
            s += self.coef[k] * (f[self.idx[k]] - fc);
        }
        s
    }

    fn scale(mut self, c: f64) -> Self {
        for v in &mut self.coef[..self.len] {
            *v *= c;
        }
        self
    }

    fn add(mut self, other: &Stencil) -> Self {
        for (j, c) in other.entries() {
            self.push(j, c);
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    grading: Grading,
    d1: Vec<Stencil>,
    d2: Vec<Stencil>,
    lap: Vec<Stencil>,
    // cubic interval rules for ∫_{r_m}^{r_{m+1}}, m = 0..n-2
    interval: Vec<Stencil>,
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize, grading: Grading) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return invalid(format!("R_max must be positive and finite, got {r_max}"));
        }
        if n < MIN_NODES {
            return invalid(format!("need at least {MIN_NODES} nodes, got {n}"));
        }
        let nodes = match grading {
            Grading::Uniform => uniform_nodes(r_max, n),
            Grading::Geometric { ratio } => {
                if !(ratio.is_finite() && ratio > 0.0) {
                    return invalid(format!("geometric ratio must be positive, got {ratio}"));
                }
                if (ratio - 1.0).abs() < 1e-14 {
                    uniform_nodes(r_max, n)
                } else {
                    geometric_nodes(r_max, n, ratio)
                }
            }
        };
        let weights = match grading {
            Grading::Uniform => simpson_weights(&nodes),
            Grading::Geometric { .. } => trapezoid_weights(&nodes),
        };
        Ok(Self::assemble(nodes, weights, grading))
    }

    fn assemble(nodes: Vec<f64>, weights: Vec<f64>, grading: Grading) -> Self {
        let n = nodes.len();
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        let mut lap = Vec::with_capacity(n);
        for i in 0..n {
            let first = if i == 0 {
                Stencil::EMPTY
            } else {
                fd_stencil(&nodes, i, 1, 5)
            };
            let width = if i + 3 > n { 6 } else { 5 };
            let second = fd_stencil(&nodes, i, 2, width);
            let l = if i == 0 {
                second.scale(2.0)
            } else {
                second.add(&first.scale(1.0 / nodes[i]))
            };
            d1.push(first);
            d2.push(second);
            lap.push(l);
        }
        let interval = (0..n - 1).map(|m| interval_rule(&nodes, m)).collect();
        Self {
            nodes,
            weights,
            grading,
            d1,
            d2,
            lap,
            interval,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().expect("grid has nodes")
    }

    /// The same grid stretched by `factor` (nodes and weights scale, stencils
    /// are rebuilt).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return invalid(format!("scale factor must be positive, got {factor}"));
        }
        let nodes: Vec<f64> = self.nodes.iter().map(|r| r * factor).collect();
        let weights = self.weights.iter().map(|w| w * factor).collect();
        Ok(Self::assemble(nodes, weights, self.grading))
    }

    /// `2π Σ w_i r_i`, the planar measure attached to each node.
    pub fn plane_weights(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| 2.0 * PI * r * w)
            .collect()
    }

    /// `2π ∫ f(r) r dr` for nodal values `f`.
    pub fn integrate_plane(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .zip(f)
            .map(|((r, w), v)| w * r * v)
            .sum();
        2.0 * PI * s
    }

    /// `∫_0^{R_max} f(r) dr` with the grid weights.
    pub fn integrate_line(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Cumulative integral `F_i = ∫_0^{r_i} f(s) ds`, fourth order.
    pub fn prefix_integral(&self, f: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(f.len());
        let mut acc = 0.0;
        out.push(0.0);
        for rule in &self.interval {
            acc += rule.apply(f);
            out.push(acc);
        }
        out
    }

    /// Tail integral `F_i = ∫_{r_i}^{R_max} f(s) ds`, fourth order.
    pub fn suffix_integral(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let mut out = vec![0.0; n];
        let mut acc = 0.0;
        for m in (0..n - 1).rev() {
            acc += self.interval[m].apply(f);
            out[m] = acc;
        }
        out
    }

    /// Adjoint of [`prefix_integral`](Self::prefix_integral): returns `Pᵀ a`
    /// where `(P f)_i` is the cumulative integral.
    pub fn prefix_integral_adjoint(&self, a: &[f64]) -> Vec<f64> {
        let n = a.len();
        let mut out = vec![0.0; n];
        let mut tail = 0.0;
        for m in (0..n - 1).rev() {
            tail += a[m + 1];
            for (j, c) in self.interval[m].entries() {
                out[j] += tail * c;
            }
        }
        out
    }

    /// First derivative at every node (`u'(0) = 0` by symmetry).
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        self.d1
            .iter()
            .enumerate()
            .map(|(i, s)| s.apply_centered(f, i))
            .collect()
    }

    /// Second derivative at every node.
    pub fn second_derivative(&self, f: &[f64]) -> Vec<f64> {
        self.d2
            .iter()
            .enumerate()
            .map(|(i, s)| s.apply_centered(f, i))
            .collect()
    }

    /// Radial Laplacian `u'' + u'/r`, with the limit `2u''(0)` at the origin.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        self.lap
            .iter()
            .enumerate()
            .map(|(i, s)| s.apply_centered(f, i))
            .collect()
    }

    pub(crate) fn d1_stencils(&self) -> &[Stencil] {
        &self.d1
    }
}

fn uniform_nodes(r_max: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|i| r_max * i as f64 / (n - 1) as f64)
        .collect();
    v[n - 1] = r_max;
    v
}

fn geometric_nodes(r_max: f64, n: usize, ratio: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(n);
    let mut r = 0.0;
    let mut h = 1.0;
    v.push(0.0);
    for _ in 1..n {
        r += h;
        h *= ratio;
        v.push(r);
    }
    let total = v[n - 1];
    for x in &mut v {
        *x *= r_max / total;
    }
    v[n - 1] = r_max;
    v
}

fn simpson_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h = x[n - 1] / (n - 1) as f64;
    let mut w = vec![0.0; n];
    let intervals = n - 1;
    let simpson_end = if intervals.is_multiple_of(2) { n - 1 } else { n - 4 };
    let mut k = 0;
    while k < simpson_end {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
        k += 2;
    }
    if intervals % 2 == 1 {
        // Simpson 3/8 over the last three intervals
        let c = 3.0 * h / 8.0;
        w[n - 4] += c;
        w[n - 3] += 3.0 * c;
        w[n - 2] += 3.0 * c;
        w[n - 1] += c;
    }
    w
}

fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for k in 0..n - 1 {
        let h = x[k + 1] - x[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    w
}

/// Fornberg's recursion: weights `c[k][j]` of the k-th derivative at `z`.
fn fornberg(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Derivative stencil of order `deriv` at node `i` using `width` nodes,
/// centered where possible; indices below zero are even reflections.
fn fd_stencil(x: &[f64], i: usize, deriv: usize, width: usize) -> Stencil {
    let n = x.len() as isize;
    let w = width as isize;
    let lo = (i as isize - w / 2).min(n - w);
    let mut pos = Vec::with_capacity(width);
    let mut idx = Vec::with_capacity(width);
    for j in lo..lo + w {
        if j < 0 {
            pos.push(-x[(-j) as usize]);
            idx.push((-j) as usize);
        } else {
            pos.push(x[j as usize]);
            idx.push(j as usize);
        }
    }
    let c = fornberg(x[i], &pos, deriv);
    let mut s = Stencil::EMPTY;
    for (k, &j) in idx.iter().enumerate() {
        s.push(j, c[deriv][k]);
    }
    s
}

/// Integral over `[x_m, x_{m+1}]` of the cubic through four nearby nodes.
fn interval_rule(x: &[f64], m: usize) -> Stencil {
    let n = x.len();
    let start = m.saturating_sub(1).min(n - 4);
    let pts = &x[start..start + 4];
    let (a, b) = (x[m], x[m + 1]);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let g = half / 3f64.sqrt();
    let mut s = Stencil::EMPTY;
    for k in 0..4 {
        let basis = |t: f64| {
            let mut v = 1.0;
            for (l, &pl) in pts.iter().enumerate() {
                if l != k {
                    v *= (t - pl) / (pts[k] - pl);
                }
            }
            v
        };
        s.push(start + k, half * (basis(mid - g) + basis(mid + g)));
    }
    s
}

/// A radial profile sampled on a [`RadialGrid`].
#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite value at node {i}"));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len()],
        }
    }

    pub(crate) fn from_parts(grid: Arc<RadialGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value_at_origin(&self) -> f64 {
        self.values[0]
    }

    pub fn same_grid(&self, other: &RadialFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.nodes == other.grid.nodes
    }

    pub(crate) fn check_same_grid(&self, other: &RadialFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_parts(
            Arc::clone(&self.grid),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &RadialFunction) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self::from_parts(
            Arc::clone(&self.grid),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        ))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Number of sign changes, ignoring exact zeros and values below `floor`.
    pub fn sign_changes(&self, floor: f64) -> usize {
        count_sign_changes(&self.values, floor)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.values.len() * 40);
        s.push_str("r,value\n");
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            let _ = writeln!(s, "{r},{v}");
        }
        s
    }

    /// Parses `r,value` CSV produced by [`to_csv`](Self::to_csv) onto `grid`.
    pub fn from_csv(grid: &Arc<RadialGrid>, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "r,value" => {}
            _ => return invalid("profile CSV must start with header `r,value`"),
        }
        let mut values = Vec::with_capacity(grid.len());
        for (k, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            let mut parts = line.split(',');
            let (r, v) = match (parts.next(), parts.next(), parts.next()) {
                (Some(r), Some(v), None) => (r, v),
                _ => return invalid(format!("malformed CSV row {}", k + 2)),
            };
            let r: f64 = r
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad radius on row {}", k + 2)))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value on row {}", k + 2)))?;
            match grid.nodes().get(k) {
                Some(&node) if (node - r).abs() <= 1e-12 * node.abs().max(1.0) => values.push(v),
                _ => return Err(Error::GridMismatch),
            }
        }
        Self::new(Arc::clone(grid), values)
    }
}

pub(crate) fn count_sign_changes(values: &[f64], floor: f64) -> usize {
    let mut count = 0;
    let mut prev = 0.0f64;
    for &v in values {
        if v.abs() <= floor {
            continue;
        }
        if prev != 0.0 && prev.signum() != v.signum() {
            count += 1;
        }
        prev = v;
    }
    count
}

pub fn make_grid(r_max: f64, n: usize, grading: Grading) -> Result<Arc<RadialGrid>> {
    RadialGrid::new(r_max, n, grading).map(Arc::new)
}

pub fn integrate_plane(f: &RadialFunction) -> f64 {
    f.grid.integrate_plane(&f.values)
}

pub fn differentiate(u: &RadialFunction) -> RadialFunction {
    RadialFunction::from_parts(Arc::clone(&u.grid), u.grid.derivative(&u.values))
}

/// `‖∇u‖₂²` on the plane.
pub fn dirichlet_sq(u: &RadialFunction) -> f64 {
    let du = u.grid.derivative(&u.values);
    let sq: Vec<f64> = du.iter().map(|d| d * d).collect();
    u.grid.integrate_plane(&sq)
}

/// `‖u‖₂²` on the plane.
pub fn l2_sq(u: &RadialFunction) -> f64 {
    let sq: Vec<f64> = u.values.iter().map(|v| v * v).collect();
    u.grid.integrate_plane(&sq)
}

pub fn norm_l2(u: &RadialFunction) -> f64 {
    l2_sq(u).max(0.0).sqrt()
}

/// `sqrt(‖∇u‖₂² + m0 ‖u‖₂²)`.
pub fn norm_sobolev(u: &RadialFunction, m0: f64) -> Result<f64> {
    if !(m0.is_finite() && m0 > 0.0) {
        return invalid(format!("m0 must be positive, got {m0}"));
    }
    Ok((dirichlet_sq(u) + m0 * l2_sq(u)).max(0.0).sqrt())
}

pub fn norm_lp(u: &RadialFunction, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return invalid(format!("p must be >= 1, got {p}"));
    }
    let f: Vec<f64> = u.values.iter().map(|v| v.abs().powf(p)).collect();
    Ok(u.grid.integrate_plane(&f).max(0.0).powf(1.0 / p))
}

/// `v(r) = u(τ r)` by monotone cubic interpolation; zero where `τ r > R_max`.
pub fn dilate(u: &RadialFunction, tau: f64) -> Result<RadialFunction> {
    if !(tau.is_finite() && tau > 0.0) {
        return invalid(format!("dilation factor must be positive, got {tau}"));
    }
    if tau == 1.0 {
        return Ok(u.clone());
    }
    let nodes = u.grid.nodes();
    let interp = Pchip::new(nodes, &u.values).with_left_slope(0.0);
    let r_max = u.grid.r_max();
    let values = nodes
        .iter()
        .map(|&r| {
            let s = tau * r;
            if s > r_max * (1.0 + 1e-14) {
                0.0
            } else {
                interp.eval(s.min(r_max))
            }
        })
        .collect();
    Ok(RadialFunction::from_parts(Arc::clone(&u.grid), values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &Arc<RadialGrid>) -> RadialFunction {
        RadialFunction::from_fn(grid, |r| (-r * r).exp())
    }

    #[test]
    fn uniform_nodes_are_equispaced() {
        let g = make_grid(1.0, 17, Grading::Uniform).unwrap();
        for (i, r) in g.nodes().iter().enumerate() {
            assert_eq!(*r, i as f64 / 16.0);
        }
        let g = make_grid(8.0, 4096, Grading::Uniform).unwrap();
        let h = g.nodes()[1] - g.nodes()[0];
        assert!((h - 8.0 / 4095.0).abs() < 1e-15);
    }

    #[test]
    fn geometric_grid_ends_exactly() {
        let g = make_grid(8.0, 1024, Grading::Geometric { ratio: 1.003 }).unwrap();
        assert_eq!(g.r_max(), 8.0);
        assert_eq!(g.nodes()[0], 0.0);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        let h0 = g.nodes()[1];
        let h1 = g.nodes()[2] - g.nodes()[1];
        assert!((h1 / h0 - 1.003).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(make_grid(0.0, 32, Grading::Uniform).is_err());
        assert!(make_grid(-1.0, 32, Grading::Uniform).is_err());
        assert!(make_grid(1.0, 15, Grading::Uniform).is_err());
        assert!(make_grid(1.0, 32, Grading::Geometric { ratio: -2.0 }).is_err());
        let g = make_grid(1.0, 32, Grading::Uniform).unwrap();
        assert!(RadialFunction::new(g.clone(), vec![0.0; 31]).is_err());
        let mut v = vec![0.0; 32];
        v[3] = f64::NAN;
        assert!(RadialFunction::new(g, v).is_err());
    }

    #[test]
    fn weights_sum_to_r_max() {
        for (n, grading) in [
            (17, Grading::Uniform),
            (64, Grading::Uniform),
            (1024, Grading::Geometric { ratio: 1.003 }),
        ] {
            let g = make_grid(8.0, n, grading).unwrap();
            let s: f64 = g.weights().iter().sum();
            assert!((s - 8.0).abs() < 1e-12, "{n}: {s}");
            assert!(g.weights().iter().all(|w| *w > 0.0));
        }
    }

    #[test]
    fn unit_disk_area() {
        for n in [17, 64, 65] {
            let g = make_grid(1.0, n, Grading::Uniform).unwrap();
            let one = RadialFunction::from_fn(&g, |_| 1.0);
            assert!((integrate_plane(&one) - PI).abs() < 1e-8);
        }
        let g = make_grid(1.0, 32, Grading::Uniform).unwrap();
        assert_eq!(integrate_plane(&RadialFunction::zeros(&g)), 0.0);
    }

    #[test]
    fn gaussian_plane_integral() {
        let g = make_grid(8.0, 4096, Grading::Uniform).unwrap();
        let f = RadialFunction::from_fn(&g, |r| (-2.0 * r * r).exp());
        assert!((integrate_plane(&f) - PI / 2.0).abs() < 1e-8);
    }

    #[test]
    fn simpson_is_exact_for_low_degree() {
        // integrand f(r) * r with f quadratic is a cubic in r
        for n in [17, 18] {
            let g = make_grid(2.0, n, Grading::Uniform).unwrap();
            let f = RadialFunction::from_fn(&g, |r| 1.0 - 3.0 * r + 0.5 * r * r);
            let exact = 2.0 * PI * (2.0 - 8.0 + 0.125 * 16.0);
            assert!((integrate_plane(&f) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn prefix_and_suffix_are_fourth_order() {
        let g = make_grid(3.0, 200, Grading::Uniform).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| r.cos()).collect();
        let p = g.prefix_integral(&f);
        let s = g.suffix_integral(&f);
        for (i, r) in g.nodes().iter().enumerate() {
            assert!((p[i] - r.sin()).abs() < 1e-9);
            assert!((s[i] - (3f64.sin() - r.sin())).abs() < 1e-9);
        }
        // exact on cubics
        let c: Vec<f64> = g.nodes().iter().map(|r| r * r * r - r).collect();
        let pc = g.prefix_integral(&c);
        let r = g.r_max();
        assert!((pc.last().unwrap() - (r.powi(4) / 4.0 - r * r / 2.0)).abs() < 1e-11);
    }

    #[test]
    fn prefix_adjoint_matches_transpose() {
        let g = make_grid(2.0, 40, Grading::Geometric { ratio: 1.02 }).unwrap();
        let f: Vec<f64> = (0..40).map(|i| ((i * 7 % 11) as f64).sin()).collect();
        let a: Vec<f64> = (0..40).map(|i| ((i * 3 % 5) as f64).cos()).collect();
        let pf = g.prefix_integral(&f);
        let pta = g.prefix_integral_adjoint(&a);
        let lhs: f64 = a.iter().zip(&pf).map(|(x, y)| x * y).sum();
        let rhs: f64 = pta.iter().zip(&f).map(|(x, y)| x * y).sum();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let g = make_grid(5.0, 64, Grading::Geometric { ratio: 1.01 }).unwrap();
        let c = RadialFunction::from_fn(&g, |_| 3.7);
        assert!(differentiate(&c).values().iter().all(|&d| d == 0.0));
        assert!(g.laplacian(c.values()).iter().all(|&d| d == 0.0));
    }

    #[test]
    fn derivative_exact_for_quadratic() {
        let g = make_grid(1.0, 33, Grading::Uniform).unwrap();
        let u = RadialFunction::from_fn(&g, |r| r * r);
        let du = differentiate(&u);
        for (r, d) in g.nodes().iter().zip(du.values()) {
            assert!((d - 2.0 * r).abs() < 1e-11, "{r} {d}");
        }
        // Δ(r²) = 4 everywhere, including the origin
        for l in g.laplacian(u.values()) {
            assert!((l - 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gaussian_derivative_accuracy() {
        let g = make_grid(8.0, 1024, Grading::Uniform).unwrap();
        let du = differentiate(&gaussian(&g));
        let h = g.nodes()[1];
        for (r, d) in g.nodes().iter().zip(du.values()) {
            let exact = -2.0 * r * (-r * r).exp();
            assert!((d - exact).abs() < 10.0 * h * h);
        }
    }

    #[test]
    fn gaussian_norms() {
        let g = make_grid(8.0, 4096, Grading::Uniform).unwrap();
        let u = gaussian(&g);
        assert!((norm_lp(&u, 2.0).unwrap() - (PI / 2.0).sqrt()).abs() < 1e-8);
        assert!((norm_lp(&u, 4.0).unwrap() - (PI / 4.0).powf(0.25)).abs() < 1e-8);
        // ‖∇u‖² = 2π∫4r²e^{-2r²} r dr = π, ‖u‖² = π/2
        let ns = norm_sobolev(&u, 1.0).unwrap();
        assert!((ns - (1.5 * PI).sqrt()).abs() < 1e-4);
        assert!(norm_sobolev(&u, 0.0).is_err());
        assert!(norm_lp(&u, 0.5).is_err());
        let z = RadialFunction::zeros(&g);
        assert_eq!(norm_lp(&z, 3.0).unwrap(), 0.0);
        assert_eq!(norm_sobolev(&z, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn norms_scale_under_dilation() {
        let g = make_grid(12.0, 2048, Grading::Uniform).unwrap();
        let u = gaussian(&g);
        let tau = 2.0;
        let v = dilate(&u, tau).unwrap();
        // ‖∇(u(τ·))‖² = ‖∇u‖², ‖u(τ·)‖² = τ^{-2}‖u‖²
        assert!((dirichlet_sq(&v) - dirichlet_sq(&u)).abs() < 1e-6);
        assert!((l2_sq(&v) - l2_sq(&u) / (tau * tau)).abs() < 1e-6);
    }

    #[test]
    fn dilation_identity_and_semigroup() {
        let g = make_grid(8.0, 2048, Grading::Uniform).unwrap();
        let u = gaussian(&g);
        assert_eq!(dilate(&u, 1.0).unwrap().values(), u.values());
        let ab = dilate(&dilate(&u, 0.8).unwrap(), 1.5).unwrap();
        let direct = dilate(&u, 1.2).unwrap();
        let diff = ab.axpy(-1.0, &direct).unwrap().sup_norm();
        assert!(diff < 1e-5, "{diff}");
        assert!(dilate(&u, 0.0).is_err());
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let g = make_grid(3.0, 20, Grading::Geometric { ratio: 1.05 }).unwrap();
        let u = RadialFunction::from_fn(&g, |r| (r * 1.3).sin() / 7.0);
        let text = u.to_csv();
        assert!(text.starts_with("r,value\n"));
        let back = RadialFunction::from_csv(&g, &text).unwrap();
        assert_eq!(back.values(), u.values());
        let other = make_grid(3.0, 20, Grading::Uniform).unwrap();
        assert!(RadialFunction::from_csv(&other, &text).is_err());
    }

    #[test]
    fn counts_sign_changes() {
        assert_eq!(count_sign_changes(&[1.0, 0.5, -0.2, -1.0, 0.0, 2.0], 0.0), 2);
        assert_eq!(count_sign_changes(&[1.0, 1e-20, -1e-20, 1.0], 1e-15), 0);
    }
}
