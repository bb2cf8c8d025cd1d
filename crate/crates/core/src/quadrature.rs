//! One-dimensional quadrature rules and smooth cutoffs.

use std::f64::consts::PI;

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let hw = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + hw * x, hw * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights of a composite rule: `per_panel` Gauss points on each
/// consecutive pair of `breaks`.
pub fn composite(breaks: &[f64], per_panel: usize) -> (Vec<f64>, Vec<f64>) {
    let gl = GaussLegendre::new(per_panel);
    let mut xs = Vec::with_capacity(breaks.len().saturating_sub(1) * per_panel);
    let mut ws = Vec::with_capacity(xs.capacity());
    for pair in breaks.windows(2) {
        for (x, w) in gl.mapped(pair[0], pair[1]) {
            xs.push(x);
            ws.push(w);
        }
    }
    (xs, ws)
}

/// Breakpoints on [0, b] refined geometrically towards 0: b·2^{-levels}, ..., b/2, b.
pub fn geometric_breaks(b: f64, levels: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(levels + 2);
    out.push(0.0);
    for k in (0..=levels).rev() {
        out.push(b * 0.5f64.powi(k as i32));
    }
    out
}

/// Breakpoints on [a, b] refined geometrically towards both ends by `ratio`
/// for `levels` steps, with a uniform interior of panel width at most `width`.
pub fn graded_breaks(a: f64, b: f64, levels: usize, width: f64) -> Vec<f64> {
    let len = b - a;
    let mut inner = 0.25 * len;
    let mut left = vec![a];
    let mut scale = inner * 0.5f64.powi(levels as i32);
    for _ in 0..levels {
        left.push(a + scale);
        scale *= 2.0;
    }
    left.push(a + inner);
    let n = ((len - 2.0 * inner) / width).ceil().max(1.0) as usize;
    let step = (len - 2.0 * inner) / n as f64;
    let mut out = left.clone();
    for k in 1..n {
        out.push(a + inner + step * k as f64);
    }
    inner = b - inner;
    out.push(inner);
    let mut right: Vec<f64> = left.iter().rev().skip(1).map(|&x| a + b - x).collect();
    right.retain(|&x| x > inner);
    out.extend(right);
    out
}

/// C^∞ step: 0 for x ≤ 0, 1 for x ≥ 1.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Exp-sinh rule for ∫₀^∞: returns (nodes, weights) with step `h` over
/// k ∈ [-n_neg, n_pos].
pub fn exp_sinh(h: f64, n_neg: usize, n_pos: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for k in -(n_neg as i64)..=(n_pos as i64) {
        let t = k as f64 * h;
        let u = 0.5 * PI * t.sinh();
        let x = u.exp();
        let w = h * 0.5 * PI * t.cosh() * x;
        if x.is_finite() && w.is_finite() && x > 0.0 {
            xs.push(x);
            ws.push(w);
        }
    }
    (xs, ws)
}
