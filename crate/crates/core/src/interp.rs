//! Shape-preserving (monotone) piecewise cubic Hermite interpolation.

/// Fritsch–Carlson monotone cubic interpolant through `(x_i, y_i)`.
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    /// `x` must be strictly increasing with at least two points.
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2);
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                let (a, b) = (delta[k - 1], delta[k]);
                if a * b <= 0.0 {
                    d[k] = 0.0;
                } else {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / a + w2 / b);
                }
            }
            d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            d,
        }
    }

    /// Overrides the end slope at the first node (e.g. zero for even extensions).
    pub fn with_left_slope(mut self, slope: f64) -> Self {
        self.d[0] = slope;
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let k = match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }
}

impl Pchip {
    /// `∫_{x_0}^t p(s) ds`, exact for the piecewise cubic (also when
    /// extrapolating beyond the last node with the end cubic).
    pub fn integral(&self, t: f64) -> f64 {
        let n = self.x.len();
        let seg = |k: usize, s: f64| {
            let h = self.x[k + 1] - self.x[k];
            let (s2, s3, s4) = (s * s, s * s * s, s * s * s * s);
            let i00 = s4 / 2.0 - s3 + s;
            let i10 = s4 / 4.0 - 2.0 * s3 / 3.0 + s2 / 2.0;
            let i01 = -s4 / 2.0 + s3;
            let i11 = s4 / 4.0 - s3 / 3.0;
            h * (i00 * self.y[k] + i10 * h * self.d[k] + i01 * self.y[k + 1] + i11 * h * self.d[k + 1])
        };
        let mut acc = 0.0;
        let mut k = 0;
        while k + 1 < n - 1 && self.x[k + 1] <= t {
            acc += seg(k, 1.0);
            k += 1;
        }
        let h = self.x[k + 1] - self.x[k];
        acc + seg(k, (t - self.x[k]) / h)
    }
}

// Three-point end formula with the shape-preserving corrections.
fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}
