//! The nonlinearity `g`, its primitive `G`, the constant
//! `m0 = -½ limsup_{ξ→0} g(ξ)/ξ` and the envelopes `λ`, `Λ`, `λ̄`, `Λ̄` used
//! to build the comparison functional.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::interp::Pchip;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub const DEFAULT_P0: f64 = 2.0;

const ENVELOPE_SAMPLES: usize = 4096;
const ENVELOPE_LO: f64 = 1e-8;
const ENVELOPE_HI: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelKind {
    Power { p: f64, omega: f64 },
    Table,
    Custom,
}

/// Running maximum of `λ(τ)/τ^{p0}` on a logarithmic sample of `τ`.
#[derive(Debug, Clone)]
struct EnvelopeCache {
    log_lo: f64,
    log_step: f64,
    taus: Vec<f64>,
    running_max: Vec<f64>,
}

#[derive(Clone)]
pub struct NonlinearityModel {
    kind: ModelKind,
    g: ScalarFn,
    big_g: ScalarFn,
    m0: f64,
    decay_sq: f64,
    p0: f64,
    delta0: f64,
    description: String,
    envelope: EnvelopeCache,
}

impl fmt::Debug for NonlinearityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearityModel")
            .field("kind", &self.kind)
            .field("m0", &self.m0)
            .field("p0", &self.p0)
            .field("delta0", &self.delta0)
            .field("description", &self.description)
            .finish()
    }
}

impl NonlinearityModel {
    /// `g(ξ) = |ξ|^{p-1} ξ - ω ξ`, `p ∈ (1, 5]`, `ω > 0`.
    pub fn power(p: f64, omega: f64) -> Result<Self> {
        if !(p > 1.0 && p <= 5.0) {
            return invalid(format!("power exponent must lie in (1, 5], got {p}"));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return invalid(format!("omega must be positive, got {omega}"));
        }
        let g: ScalarFn = Arc::new(move |x: f64| x.abs().powf(p - 1.0) * x - omega * x);
        let big_g: ScalarFn =
            Arc::new(move |x: f64| x.abs().powf(p + 1.0) / (p + 1.0) - 0.5 * omega * x * x);
        let m0 = 0.5 * omega;
        let delta0 = m0.powf(1.0 / (p - 1.0));
        Ok(Self::assemble(
            ModelKind::Power { p, omega },
            g,
            big_g,
            m0,
            omega,
            DEFAULT_P0,
            Some(delta0),
            format!("power p={p} omega={omega}"),
        ))
    }

    /// Odd extension of a tabulated `g` on `ξ ≥ 0` (monotone cubic in between,
    /// `G` integrated exactly on the same cubic).
    pub fn from_table(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 4 {
            return invalid("custom table needs at least 4 samples");
        }
        if samples[0].0 != 0.0 || samples[0].1 != 0.0 {
            return invalid("custom table must start at (0, 0)");
        }
        if samples
            .windows(2)
            .any(|w| !(w[1].0 > w[0].0) || !w[1].1.is_finite())
        {
            return invalid("custom table abscissae must be strictly increasing");
        }
        let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let interp = Arc::new(Pchip::new(&xs, &ys));
        let gi = Arc::clone(&interp);
        let g: ScalarFn = Arc::new(move |x: f64| x.signum() * gi.eval(x.abs()));
        let big_g: ScalarFn = Arc::new(move |x: f64| interp.integral(x.abs()));
        Self::estimated(ModelKind::Table, g, big_g, "custom table".into())
    }

    /// Arbitrary `g` with primitive `G`; `m0` is estimated numerically.
    pub fn custom(
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        big_g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        description: impl Into<String>,
    ) -> Result<Self> {
        Self::estimated(ModelKind::Custom, Arc::new(g), Arc::new(big_g), description.into())
    }

    fn estimated(kind: ModelKind, g: ScalarFn, big_g: ScalarFn, description: String) -> Result<Self> {
        let (lo, hi) = ratio_tail(&*g);
        let m0 = -0.5 * hi;
        if !(m0.is_finite() && m0 > 0.0) {
            return invalid(format!(
                "m0 = -limsup g(ξ)/ξ / 2 must be positive, estimated {m0}"
            ));
        }
        Ok(Self::assemble(kind, g, big_g, m0, -lo, DEFAULT_P0, None, description))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        kind: ModelKind,
        g: ScalarFn,
        big_g: ScalarFn,
        m0: f64,
        decay_sq: f64,
        p0: f64,
        delta0: Option<f64>,
        description: String,
    ) -> Self {
        let lambda = |x: f64| (g(x) + m0 * x).max(0.0);
        let log_lo = ENVELOPE_LO.ln();
        let log_step = (ENVELOPE_HI.ln() - log_lo) / (ENVELOPE_SAMPLES - 1) as f64;
        let taus: Vec<f64> = (0..ENVELOPE_SAMPLES)
            .map(|k| (log_lo + k as f64 * log_step).exp())
            .collect();
        let mut running_max = Vec::with_capacity(ENVELOPE_SAMPLES);
        let mut m = 0.0f64;
        for &t in &taus {
            m = m.max(lambda(t) / t.powf(p0));
            running_max.push(m);
        }
        let delta0 = delta0.unwrap_or_else(|| estimate_delta0(&taus, &lambda));
        Self {
            kind,
            g,
            big_g,
            m0,
            decay_sq,
            p0,
            delta0,
            description,
            envelope: EnvelopeCache {
                log_lo,
                log_step,
                taus,
                running_max,
            },
        }
    }

    /// Replaces the envelope exponent `p0 > 1` (rebuilds the cache).
    pub fn with_p0(self, p0: f64) -> Result<Self> {
        if !(p0.is_finite() && p0 > 1.0) {
            return invalid(format!("p0 must exceed 1, got {p0}"));
        }
        let delta0 = matches!(self.kind, ModelKind::Power { .. }).then_some(self.delta0);
        Ok(Self::assemble(
            self.kind,
            self.g,
            self.big_g,
            self.m0,
            self.decay_sq,
            p0,
            delta0,
            self.description,
        ))
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    #[inline]
    pub fn g(&self, x: f64) -> f64 {
        (self.g)(x)
    }

    #[inline]
    pub fn big_g(&self, x: f64) -> f64 {
        (self.big_g)(x)
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    /// `-lim_{ξ→0} g(ξ)/ξ`: the squared exponential decay rate of solutions.
    pub fn decay_rate_sq(&self) -> f64 {
        self.decay_sq
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    /// Largest `δ` with `λ = 0` on `[0, δ]` (exact for power models).
    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn lambda(&self, x: f64) -> f64 {
        let a = x.abs();
        x.signum() * (self.g(a) + self.m0 * a).max(0.0)
    }

    pub fn lambda_bar(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let a = x.abs();
        let ratio = |t: f64| (self.g(t) + self.m0 * t).max(0.0) / t.powf(self.p0);
        let env = &self.envelope;
        let own = (self.g(a) + self.m0 * a).max(0.0);
        let mut m = 0.0f64;
        if a >= env.taus[0] {
            let k = (((a.ln() - env.log_lo) / env.log_step).floor() as usize).min(env.taus.len() - 1);
            // floor() of the log index can land one past the true cell
            let k = if env.taus[k] > a && k > 0 { k - 1 } else { k };
            m = m.max(env.running_max[k]);
            let last = *env.taus.last().expect("non-empty cache");
            if a > last {
                let mut t = last;
                while t < a {
                    m = m.max(ratio(t));
                    t *= env.log_step.exp();
                }
            }
        }
        x.signum() * own.max(a.powf(self.p0) * m)
    }

    pub fn capital_lambda(&self, x: f64) -> f64 {
        integrate_adaptive(&|t| self.lambda(t), 0.0, x.abs())
    }

    pub fn capital_lambda_bar(&self, x: f64) -> f64 {
        integrate_adaptive(&|t| self.lambda_bar(t), 0.0, x.abs())
    }
}

impl NonlinearityModel {
    /// `Λ̄` at many points at once, integrating once along the sorted `|ξ|`.
    pub fn capital_lambda_bar_many(&self, xs: &[f64]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| xs[a].abs().total_cmp(&xs[b].abs()));
        let mut out = vec![0.0; xs.len()];
        let (mut at, mut acc) = (0.0, 0.0);
        for i in order {
            let x = xs[i].abs();
            if x > at {
                acc += integrate_adaptive(&|t| self.lambda_bar(t), at, x);
                at = x;
            }
            out[i] = acc;
        }
        out
    }
}

pub fn lambda_of(model: &NonlinearityModel, xi: f64) -> f64 {
    model.lambda(xi)
}

pub fn lambda_bar_of(model: &NonlinearityModel, xi: f64) -> f64 {
    model.lambda_bar(xi)
}

pub fn capital_lambda(model: &NonlinearityModel, xi: f64) -> f64 {
    model.capital_lambda(xi)
}

pub fn capital_lambda_bar(model: &NonlinearityModel, xi: f64) -> f64 {
    model.capital_lambda_bar(xi)
}

/// Smallest and largest of `g(ξ)/ξ` over `ξ = 2^{-k}`, `k = 20..=40`.
fn ratio_tail(g: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 20..=40 {
        let x = 2f64.powi(-k);
        let r = g(x) / x;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}

fn estimate_delta0(taus: &[f64], lambda: &dyn Fn(f64) -> f64) -> f64 {
    let Some(first) = taus.iter().position(|&t| lambda(t) > 0.0) else {
        return *taus.last().expect("non-empty");
    };
    if first == 0 {
        return 0.0;
    }
    let (mut a, mut b) = (taus[first - 1], taus[first]);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if lambda(m) > 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    a
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    whole: f64,
    m: f64,
    fm: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (left, lm, flm) = simpson(f, a, fa, m, fm);
    let (right, rm, frm) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_step(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
        + adaptive_step(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub(crate) fn integrate_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    // split first so that kinks near an endpoint are still resolved
    let pieces = 16;
    let h = (b - a) / pieces as f64;
    let mut total = 0.0;
    let mut xa = a;
    let mut fxa = fa;
    for k in 1..=pieces {
        let xb = if k == pieces { b } else { a + k as f64 * h };
        let fxb = if k == pieces { fb } else { f(xb) };
        let (whole, m, fm) = simpson(f, xa, fxa, xb, fxb);
        let tol = 1e-14 * (1.0 + whole.abs());
        total += adaptive_step(f, xa, fxa, xb, fxb, whole, m, fm, tol, 40);
        xa = xb;
        fxa = fxb;
    }
    total
}

/// Sampling range for [`check_hypotheses`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub xi_max: f64,
    pub samples: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            xi_max: 20.0,
            samples: 4000,
        }
    }
}

/// Numerical check of the structural hypotheses on `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// `max |g(ξ) + g(-ξ)|` over the sample (oddness).
    pub odd_violation: f64,
    pub m0: f64,
    pub delta0: f64,
    /// Smallest sampled `ζ` with `G(ζ) > 0`, if any.
    pub zeta0: Option<f64>,
    /// `g(ξ)/e^{αξ²} → 0` for `α ∈ {0.1, 1}`.
    pub growth_ok: bool,
    /// `-∞ < liminf g(ξ)/ξ ≤ limsup g(ξ)/ξ < 0` as `ξ → 0`.
    pub g2prime_ok: bool,
}

impl HypothesisReport {
    pub const ODD_TOLERANCE: f64 = 1e-12;

    pub fn odd_ok(&self) -> bool {
        self.odd_violation <= Self::ODD_TOLERANCE
    }

    pub fn all_passed(&self) -> bool {
        self.odd_ok() && self.growth_ok && self.g2prime_ok && self.zeta0.is_some()
    }
}

pub fn check_hypotheses(model: &NonlinearityModel, spec: SampleSpec) -> Result<HypothesisReport> {
    if !(spec.xi_max.is_finite() && spec.xi_max > 0.0) || spec.samples < 2 {
        return invalid("sample spec needs xi_max > 0 and at least 2 samples");
    }
    let mut odd_violation = 0.0f64;
    let mut zeta0 = None;
    for k in 1..=spec.samples {
        let x = spec.xi_max * k as f64 / spec.samples as f64;
        let scale = 1.0 + model.g(x).abs();
        odd_violation = odd_violation.max((model.g(x) + model.g(-x)).abs() / scale);
        if zeta0.is_none() && model.big_g(x) > 0.0 {
            zeta0 = Some(x);
        }
    }
    let (lo, hi) = ratio_tail(&|x| model.g(x));
    let g2prime_ok = lo.is_finite() && hi < 0.0;
    let growth_ok = [0.1, 1.0].iter().all(|&alpha| {
        let ratios: Vec<f64> = (0..=6)
            .map(|j| {
                let x = 2f64.powi(j) * spec.xi_max.max(1.0);
                model.g(x).abs() / (alpha * x * x).exp()
            })
            .collect();
        let last = *ratios.last().expect("non-empty");
        last.is_finite() && last < 1e-6
    });
    Ok(HypothesisReport {
        odd_violation,
        m0: model.m0(),
        delta0: model.delta0(),
        zeta0,
        growth_ok,
        g2prime_ok,
    })
}
