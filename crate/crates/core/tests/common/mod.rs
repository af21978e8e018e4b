//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::io::Write;

/// Writes past the test harness's output capture so the line always shows up
/// in the test log.
pub fn report_line(line: &str) {
    match std::fs::OpenOptions::new().write(true).open("/dev/stdout") {
        Ok(mut out) => {
            let _ = writeln!(out, "{line}");
        }
        Err(_) => println!("{line}"),
    }
}

/// `K_0(x) = ∫_0^∞ e^{−x cosh t} dt` by the trapezoidal rule, which converges
/// geometrically for this integrand.
pub fn bessel_k0(x: f64) -> f64 {
    let dt: f64 = 0.02;
    let mut s = 0.5 * (-x).exp();
    let mut t: f64 = dt;
    loop {
        let v = (-x * t.cosh()).exp();
        s += v;
        if v < 1e-300 || x * t.cosh() > 745.0 {
            break;
        }
        t += dt;
    }
    s * dt
}

/// Composite Simpson on `[a, b]` with `m` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    assert!(m.is_multiple_of(2));
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Positive radial ground state of `−u'' − u'/r + ω u = |u|u` from a
/// fine-step RK4 shooting with bisection on `u(0)` and a `K_0` tail.
pub struct GroundStateOracle {
    pub u0: f64,
    /// Values at the requested nodes.
    pub values: Vec<f64>,
    /// `½‖∇u‖² − ∫G(u)` on the plane.
    pub level: f64,
}

fn accel(r: f64, u: f64, p: f64, omega: f64) -> f64 {
    -p / r + omega * u - u.abs() * u
}

/// RK4 trajectory with step `h`.
/// Returns `(samples (r, u, u'), class)` where class is +1 for overshoot
/// (crosses zero) and −1 for undershoot (turns back up).
fn trajectory(u0: f64, omega: f64, r_end: f64, h: f64) -> (Vec<(f64, f64, f64)>, i32) {
    // Taylor start: u''(0) = (ω u0 − u0²)/2
    let a = 0.5 * (omega * u0 - u0 * u0);
    let mut r = h;
    let mut u = u0 + 0.5 * a * h * h;
    let mut p = a * h;
    let mut out = vec![(0.0, u0, 0.0), (r, u, p)];
    while r < r_end {
        let k1u = p;
        let k1p = accel(r, u, p, omega);
        let k2u = p + 0.5 * h * k1p;
        let k2p = accel(r + 0.5 * h, u + 0.5 * h * k1u, k2u, omega);
        let k3u = p + 0.5 * h * k2p;
        let k3p = accel(r + 0.5 * h, u + 0.5 * h * k2u, k3u, omega);
        let k4u = p + h * k3p;
        let k4p = accel(r + h, u + h * k3u, k4u, omega);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        r += h;
        out.push((r, u, p));
        if u < 0.0 {
            return (out, 1);
        }
        if p > 0.0 {
            return (out, -1);
        }
    }
    let class = if p / u < -omega.sqrt() { 1 } else { -1 };
    (out, class)
}

pub fn ground_state_oracle(nodes: &[f64], omega: f64) -> GroundStateOracle {
    let r_end = *nodes.last().unwrap();
    let h = 1.0 / 4096.0;
    let (mut lo, mut hi) = (1.5 * omega, 4.0 * omega);
    assert_eq!(trajectory(lo, omega, r_end, h).1, -1);
    assert_eq!(trajectory(hi, omega, r_end, h).1, 1);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if trajectory(mid, omega, r_end, h).1 == 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (a, _) = trajectory(lo, omega, r_end, h);
    let (b, _) = trajectory(hi, omega, r_end, h);
    let mut split = a.len().min(b.len()) - 1;
    for i in 0..split {
        if (a[i].1 - b[i].1).abs() > 1e-9 * lo {
            split = i;
            break;
        }
    }
    let fine: Vec<(f64, f64, f64)> = a[..split].to_vec();
    let (rb, ub, _) = *fine.last().unwrap();
    let kappa = omega.sqrt();
    let c = ub / bessel_k0(kappa * rb);
    let values = nodes
        .iter()
        .map(|&r| {
            if r <= rb {
                let x = r / h;
                let i = (x.floor() as usize).min(fine.len() - 2);
                // cubic Hermite between fine samples
                let (r0, u0, p0) = fine[i];
                let (r1, u1, p1) = fine[i + 1];
                let d = r1 - r0;
                let s = (r - r0) / d;
                let (s2, s3) = (s * s, s * s * s);
                (2.0 * s3 - 3.0 * s2 + 1.0) * u0
                    + (s3 - 2.0 * s2 + s) * d * p0
                    + (-2.0 * s3 + 3.0 * s2) * u1
                    + (s3 - s2) * d * p1
            } else {
                c * bessel_k0(kappa * r)
            }
        })
        .collect();
    // level by Simpson over the fine samples (even count of intervals)
    let m = if (fine.len() - 1).is_multiple_of(2) { fine.len() - 1 } else { fine.len() - 2 };
    let mut s = 0.0;
    for (i, &(r, u, p)) in fine[..=m].iter().enumerate() {
        let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let big_g = u.abs().powi(3) / 3.0 - 0.5 * omega * u * u;
        s += w * (0.5 * p * p - big_g) * r;
    }
    GroundStateOracle {
        u0: lo,
        values,
        level: 2.0 * PI * s * h / 3.0,
    }
}

/// Smooth profile `Σ a_j e^{−b_j r²}(1 + c_j r²)`.
pub fn random_profile(r: f64, coefs: &[(f64, f64, f64)]) -> f64 {
    coefs.iter().map(|(a, b, c)| a * (-b * r * r).exp() * (1.0 + c * r * r)).sum()
}

pub fn random_coefs(rng: &mut impl rand::Rng, terms: usize) -> Vec<(f64, f64, f64)> {
    (0..terms)
        .map(|_| {
            (
                rng.gen_range(-2.0..3.0),
                rng.gen_range(0.3..2.0),
                rng.gen_range(-0.5..0.5),
            )
        })
        .collect()
}
