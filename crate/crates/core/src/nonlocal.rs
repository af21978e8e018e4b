//! Chern–Simons nonlocal quantities for a radial profile `u`.
//!
//! * `h_u(s) = ∫_0^s τ u²(τ) dτ` (prefix field),
//! * `A_u(r) = ∫_r^∞ (u²(s)/s) h_u(s) ds` (suffix field),
//! * `N(u) = 2π ∫ u² h_u² / r dr`,
//! * `N'(u)[v]`, the exact derivative of the discrete `N`.
//!
//! Every quantity here is built from the same outer weights and the same
//! cumulative interval rule, so the discrete `N` is a homogeneous polynomial
//! of degree six in the nodal values and `N'(u)[u] = 6 N(u)` holds to
//! rounding. Integrands of the form `u²h²/r` and `u²h/s` take their limit 0
//! at the origin.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::RadialFunction;

/// `h_u` at every node.
pub fn prefix_h(u: &RadialFunction) -> RadialFunction {
    RadialFunction::from_parts(Arc::clone(u.grid()), prefix_h_values(u.values(), u))
}

pub(crate) fn prefix_h_values(u: &[f64], f: &RadialFunction) -> Vec<f64> {
    let integrand: Vec<f64> = f
        .grid()
        .nodes()
        .iter()
        .zip(u)
        .map(|(r, v)| r * v * v)
        .collect();
    f.grid().prefix_integral(&integrand)
}

fn suffix_integrand(u: &[f64], h: &[f64], nodes: &[f64]) -> Vec<f64> {
    nodes
        .iter()
        .zip(u.iter().zip(h))
        .map(|(&r, (v, hv))| if r == 0.0 { 0.0 } else { v * v * hv / r })
        .collect()
}

/// `A_u(r) = ∫_r^{R_max} (u²(s)/s) h_u(s) ds`; `A_u(R_max) = 0`.
pub fn suffix_a(u: &RadialFunction) -> RadialFunction {
    let h = prefix_h_values(u.values(), u);
    let f = suffix_integrand(u.values(), &h, u.grid().nodes());
    RadialFunction::from_parts(Arc::clone(u.grid()), u.grid().suffix_integral(&f))
}

/// Prefix field and `N(u)` in one pass.
pub(crate) fn n_with_h(u: &RadialFunction) -> (f64, Vec<f64>) {
    let grid = u.grid();
    let h = prefix_h_values(u.values(), u);
    let mut s = 0.0;
    for ((&r, &w), (&v, &hv)) in grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(u.values().iter().zip(&h))
    {
        if r > 0.0 {
            s += w * v * v * hv * hv / r;
        }
    }
    (2.0 * PI * s, h)
}

/// `N(u) = ∫_{ℝ²} (u²/|x|²) h_u(|x|)² dx`.
pub fn big_n(u: &RadialFunction) -> f64 {
    n_with_h(u).0
}

/// `N'(u)[v] = 2∫ (u v/|x|²) h_u² dx + 4∫ (u²/|x|²) h_u (∫_0^{|x|} s u v ds) dx`.
pub fn big_n_prime(u: &RadialFunction, v: &RadialFunction) -> Result<f64> {
    u.check_same_grid(v)?;
    let (_, h) = n_with_h(u);
    Ok(big_n_prime_with_h(u, v.values(), &h))
}

pub(crate) fn big_n_prime_with_h(u: &RadialFunction, v: &[f64], h: &[f64]) -> f64 {
    let grid = u.grid();
    let nodes = grid.nodes();
    let uv: Vec<f64> = nodes
        .iter()
        .zip(u.values().iter().zip(v))
        .map(|(r, (a, b))| r * a * b)
        .collect();
    let k = grid.prefix_integral(&uv);
    let mut first = 0.0;
    let mut second = 0.0;
    for i in 0..nodes.len() {
        let r = nodes[i];
        if r == 0.0 {
            continue;
        }
        let w = grid.weights()[i];
        let ui = u.values()[i];
        first += w * ui * v[i] * h[i] * h[i] / r;
        second += w * ui * ui * h[i] * k[i] / r;
    }
    2.0 * PI * (2.0 * first + 4.0 * second)
}

/// Nodal gradient `∂N/∂u_j` of the discrete `N`, so that
/// `N'(u)[v] = Σ_j grad_j v_j`.
pub(crate) fn big_n_gradient(u: &RadialFunction, h: &[f64]) -> Vec<f64> {
    let grid = u.grid();
    let nodes = grid.nodes();
    let w = grid.weights();
    let uv = u.values();
    let n = nodes.len();
    let mut a = vec![0.0; n];
    let mut direct = vec![0.0; n];
    for i in 0..n {
        let r = nodes[i];
        if r == 0.0 {
            continue;
        }
        direct[i] = 4.0 * PI * w[i] * uv[i] * h[i] * h[i] / r;
        a[i] = 2.0 * PI * w[i] * uv[i] * uv[i] * h[i] / r;
    }
    let pta = grid.prefix_integral_adjoint(&a);
    (0..n)
        .map(|j| direct[j] + 4.0 * nodes[j] * uv[j] * pta[j])
        .collect()
}

/// Physical constants entering the gauge-field reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants {
    #[serde(default = "one")]
    pub e_coupling: f64,
    #[serde(default = "one")]
    pub kappa: f64,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub c_light: f64,
    #[serde(default = "one")]
    pub hbar: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            e_coupling: 1.0,
            kappa: 1.0,
            mass: 1.0,
            c_light: 1.0,
            hbar: 1.0,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("e_coupling", self.e_coupling),
            ("kappa", self.kappa),
            ("mass", self.mass),
            ("c_light", self.c_light),
            ("hbar", self.hbar),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }

    /// Coupling `q = e⁴/(c²κ²)` of the normalized equation.
    pub fn coupling_q(&self) -> f64 {
        self.e_coupling.powi(4) / (self.c_light * self.kappa).powi(2)
    }
}

/// Static radial gauge fields reconstructed from `u`.
#[derive(Debug, Clone)]
pub struct GaugeFields {
    pub h: RadialFunction,
    /// Electric potential `A⁰`.
    pub a0: RadialFunction,
    /// Magnitude `(e/κ) h_u(r)/r` of the tangential vector potential.
    pub a_tangential: RadialFunction,
    /// Magnetic field; the orientation of the tangential ansatz gives
    /// `B = -(e/κ) u²`, hence flux `= -charge/κ`.
    pub b_field: RadialFunction,
    /// Radial electric field `-dA⁰/dr`.
    pub e_field: RadialFunction,
    pub charge: f64,
    pub flux: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GaugeSummary {
    pub charge: f64,
    pub flux: f64,
    pub kappa: f64,
}

impl GaugeFields {
    pub fn summary(&self) -> GaugeSummary {
        GaugeSummary {
            charge: self.charge,
            flux: self.flux,
            kappa: self.kappa,
        }
    }

    /// CSV with header `r,h,a0,a_tan,b,e_r`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::from("r,h,a0,a_tan,b,e_r\n");
        let nodes = self.h.grid().nodes();
        for i in 0..nodes.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                nodes[i],
                self.h.values()[i],
                self.a0.values()[i],
                self.a_tangential.values()[i],
                self.b_field.values()[i],
                self.e_field.values()[i]
            );
        }
        s
    }
}

pub fn gauge_fields(u: &RadialFunction, consts: &PhysicalConstants) -> Result<GaugeFields> {
    consts.validate()?;
    let grid = u.grid();
    let PhysicalConstants {
        e_coupling: e,
        kappa,
        mass,
        c_light: c,
        ..
    } = *consts;
    let h = prefix_h(u);
    let a0 = suffix_a(u).scale(e.powi(3) / (mass * c * c * kappa * kappa));
    let ek = e / kappa;
    let a_tan = RadialFunction::from_parts(
        Arc::clone(grid),
        grid.nodes()
            .iter()
            .zip(h.values())
            .map(|(&r, &hv)| if r == 0.0 { 0.0 } else { ek * hv / r })
            .collect(),
    );
    let b = u.map(|v| -ek * v * v);
    let e_field = RadialFunction::from_parts(
        Arc::clone(grid),
        grid.derivative(a0.values()).iter().map(|d| -d).collect(),
    );
    let density: Vec<f64> = u.values().iter().map(|v| v * v).collect();
    let charge = e * grid.integrate_plane(&density);
    let flux = grid.integrate_plane(b.values());
    Ok(GaugeFields {
        h,
        a0,
        a_tangential: a_tan,
        b_field: b,
        e_field,
        charge,
        flux,
        kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Grading, RadialGrid};

    fn gauss(g: &Arc<RadialGrid>) -> RadialFunction {
        RadialFunction::from_fn(g, |r| (-r * r).exp())
    }

    #[test]
    fn zero_profile_gives_zero_fields() {
        let g = make_grid(4.0, 64, Grading::Uniform).unwrap();
        let z = RadialFunction::zeros(&g);
        assert!(prefix_h(&z).values().iter().all(|&v| v == 0.0));
        assert!(suffix_a(&z).values().iter().all(|&v| v == 0.0));
        assert_eq!(big_n(&z), 0.0);
        assert_eq!(big_n_prime(&z, &gauss(&g)).unwrap(), 0.0);
        let f = gauge_fields(&z, &PhysicalConstants::default()).unwrap();
        assert_eq!(f.charge, 0.0);
        assert_eq!(f.flux, 0.0);
    }

    #[test]
    fn h_of_constant_near_origin() {
        let g = make_grid(2.0, 201, Grading::Uniform).unwrap();
        let u = RadialFunction::from_fn(&g, |r| if r < 1.5 { 1.0 } else { 0.0 });
        let h = prefix_h(&u);
        for (r, hv) in g.nodes().iter().zip(h.values()) {
            if *r <= 1.4 {
                assert!((hv - r * r / 2.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn h_of_gaussian_closed_form() {
        let g = make_grid(8.0, 4096, Grading::Uniform).unwrap();
        let h = prefix_h(&gauss(&g));
        for (r, hv) in g.nodes().iter().zip(h.values()) {
            let exact = (1.0 - (-2.0 * r * r).exp()) / 4.0;
            assert!((hv - exact).abs() < 1e-10);
        }
        assert!(h.values().windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn suffix_is_monotone_and_vanishes_at_end() {
        let g = make_grid(6.0, 300, Grading::Geometric { ratio: 1.01 }).unwrap();
        let u = RadialFunction::from_fn(&g, |r| (1.0 - r) * (-r * r).exp());
        let a = suffix_a(&u);
        assert_eq!(*a.values().last().unwrap(), 0.0);
        assert!(a.values().windows(2).all(|w| w[0] >= w[1] - 1e-15));
    }

    #[test]
    fn n_prime_is_linear_in_direction() {
        let g = make_grid(6.0, 256, Grading::Uniform).unwrap();
        let u = gauss(&g);
        let v = RadialFunction::from_fn(&g, |r| r * (-r * r).exp());
        let w = RadialFunction::from_fn(&g, |r| (r).cos() * (-r).exp());
        let a = big_n_prime(&u, &v).unwrap();
        let b = big_n_prime(&u, &w).unwrap();
        let vw = v.axpy(2.5, &w).unwrap();
        let c = big_n_prime(&u, &vw).unwrap();
        assert!((c - (a + 2.5 * b)).abs() < 1e-13);
        let other = make_grid(6.0, 128, Grading::Uniform).unwrap();
        assert!(big_n_prime(&u, &RadialFunction::zeros(&other)).is_err());
    }

    #[test]
    fn nodal_gradient_matches_directional_derivative() {
        let g = make_grid(5.0, 120, Grading::Geometric { ratio: 1.01 }).unwrap();
        let u = RadialFunction::from_fn(&g, |r| (1.0 + r) * (-r * r / 2.0).exp());
        let v = RadialFunction::from_fn(&g, |r| (2.0 * r).sin() * (-r).exp());
        let (_, h) = n_with_h(&u);
        let grad = big_n_gradient(&u, &h);
        let via_grad: f64 = grad.iter().zip(v.values()).map(|(a, b)| a * b).sum();
        let direct = big_n_prime(&u, &v).unwrap();
        assert!((via_grad - direct).abs() < 1e-12 * direct.abs().max(1e-3));
    }

    #[test]
    fn b_field_orientation() {
        let g = make_grid(8.0, 1024, Grading::Uniform).unwrap();
        let consts = PhysicalConstants {
            e_coupling: 2.0,
            kappa: 3.0,
            ..Default::default()
        };
        let f = gauge_fields(&gauss(&g), &consts).unwrap();
        assert!((f.flux + f.charge / 3.0).abs() < 1e-12);
        assert!(f.a0.values().windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(f.a_tangential.values()[0], 0.0);
        assert!(f.a_tangential.values()[1] < 1e-2);
        let bad = PhysicalConstants {
            kappa: 0.0,
            ..Default::default()
        };
        assert!(gauge_fields(&gauss(&g), &bad).is_err());
        let csv = f.to_csv();
        assert!(csv.starts_with("r,h,a0,a_tan,b,e_r\n"));
        assert_eq!(csv.lines().count(), 1025);
    }
}
