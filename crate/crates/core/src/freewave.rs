//! Closed-form free (`V = 0`) wave kernels.

use std::collections::HashSet;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result, Warning};
use crate::grid::{Grid2D, LatticeInterpolator};
use crate::quadrature::{smooth_step, GaussLegendre};
use crate::specfun::{j0y0_unchecked, sici};

static GRAZING: AtomicUsize = AtomicUsize::new(0);

/// Number of exact light-cone hits seen by `sine_kernel` so far.
pub fn grazing_count() -> usize {
    GRAZING.load(Ordering::Relaxed)
}

/// Values on an observation grid plus anything worth reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub values: Vec<f64>,
    pub warnings: Vec<Warning>,
}

/// A sample of the light-cone kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeKernelSample {
    pub t: f64,
    pub r: f64,
    pub value: f64,
}

impl FreeKernelSample {
    pub fn new(t: f64, r: f64) -> Self {
        Self { t, r, value: sine_kernel(t, r) }
    }
}

/// `(1/2π)·1_{t>r}(t²−r²)^{−1/2}`.
pub fn sine_kernel(t: f64, r: f64) -> f64 {
    if t == r {
        GRAZING.fetch_add(1, Ordering::Relaxed);
        return 0.0;
    }
    if !(t > r) {
        return 0.0;
    }
    1.0 / (2.0 * PI * ((t - r) * (t + r)).sqrt())
}

/// `R₀((λ+i0)²)` at distance `r`: `(i/4)H₀^+(λr)` for λ > 0 and its complex
/// conjugate for λ < 0.
pub fn resolvent_kernel_free(lambda: f64, r: f64) -> Result<Complex64> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be nonzero and finite, got {lambda}")));
    }
    if r == 0.0 {
        return Err(Error::Domain("r = 0 is the singular diagonal; use cell averaging".into()));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("r must be positive, got {r}")));
    }
    Ok(free_kernel_unchecked(lambda, r))
}

#[inline]
pub(crate) fn free_kernel_unchecked(lambda: f64, r: f64) -> Complex64 {
    let (j, y) = j0y0_unchecked(lambda.abs() * r);
    Complex64::new(-0.25 * y, 0.25 * j * lambda.signum())
}

struct PolarRule {
    phi: Vec<(f64, f64)>,
    n_theta: usize,
}

fn polar_rule(t: f64, h: f64) -> PolarRule {
    let gl = GaussLegendre::new(8);
    let panels = ((t / (2.0 * h)).ceil() as usize).max(2);
    let dphi = FRAC_PI_2 / panels as f64;
    let mut phi = Vec::with_capacity(panels * 8);
    for p in 0..panels {
        phi.extend(gl.mapped(p as f64 * dphi, (p + 1) as f64 * dphi));
    }
    let n_theta = (((2.0 * PI * t / (0.5 * h)).ceil() as usize).max(32) + 3) / 4 * 4;
    PolarRule { phi, n_theta }
}

/// Sum of `g(x + ρω(θ_k))` over equally spaced angles, visiting only the
/// angles whose points can meet the support disk of the interpolant.
fn ring_sum<F: FnMut([f64; 2], f64, f64) -> f64>(
    x: [f64; 2],
    rho: f64,
    n_theta: usize,
    support: ([f64; 2], f64),
    mut g: F,
) -> f64 {
    let (c, big_r) = support;
    let dx = c[0] - x[0];
    let dy = c[1] - x[1];
    let d = dx.hypot(dy);
    if rho + big_r < d || rho > d + big_r {
        return 0.0;
    }
    let dtheta = 2.0 * PI / n_theta as f64;
    let (k0, k1) = if d + rho <= big_r || d == 0.0 {
        (0i64, n_theta as i64 - 1)
    } else {
        let cosa = ((rho * rho + d * d - big_r * big_r) / (2.0 * rho * d)).clamp(-1.0, 1.0);
        let alpha = cosa.acos();
        let center = dy.atan2(dx);
        (
            ((center - alpha) / dtheta).floor() as i64,
            ((center + alpha) / dtheta).ceil() as i64,
        )
    };
    let count = (k1 - k0 + 1).min(n_theta as i64);
    let mut acc = 0.0;
    for m in 0..count {
        let k = (k0 + m).rem_euclid(n_theta as i64);
        let theta = k as f64 * dtheta;
        let (s, co) = theta.sin_cos();
        acc += g([x[0] + rho * co, x[1] + rho * s], co, s);
    }
    acc * dtheta
}

/// `(sin(t√−Δ)/√−Δ f)(x)` for `f` given on a lattice grid.
///
/// With `r = t sin φ` the light-cone integral becomes
/// `(1/2π)∫₀^{π/2} t sin φ ∫_{S¹} f̃(x + t sin φ ω) dω dφ`, where `f̃` is the
/// six-point Lagrange interpolant of the samples.
pub fn free_sine_apply(t: f64, grid: &Grid2D, f: &[f64], obs: &Grid2D) -> Result<Evaluated> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("t must be finite and nonnegative, got {t}")));
    }
    let interp = LatticeInterpolator::new(grid, f)?;
    let mut warnings = boundary_warning(grid, f);
    if t == 0.0 || interp.is_zero() {
        return Ok(Evaluated { values: vec![0.0; obs.len()], warnings });
    }
    let rule = polar_rule(t, grid.cell_width());
    let support = interp.support();
    let h = grid.cell_width();
    let mut grazing = 0usize;
    let values = obs
        .nodes()
        .iter()
        .map(|&x| {
            let d = (support.0[0] - x[0]).hypot(support.0[1] - x[1]);
            if (d - t).abs() <= support.1 + h {
                grazing += 1;
            }
            let mut acc = 0.0;
            for &(phi, w) in &rule.phi {
                let rho = t * phi.sin();
                let ring = ring_sum(x, rho, rule.n_theta, support, |p, _, _| interp.eval(p));
                acc += w * rho * ring;
            }
            acc / (2.0 * PI)
        })
        .collect();
    if grazing > 0 {
        warnings.push(Warning::GrazingCone { count: grazing });
    }
    Ok(Evaluated { values, warnings })
}

/// `(cos(t√−Δ) f)(x)` from the sampled field and its gradient, in the form
/// `−(1/2π)∫_t^∞ m(r) dr + (1/2π)∫₀^{π/2} t(1 − cos φ) m(t sin φ) dφ` with
/// `m(r) = ∫_{S¹} ω·∇f(x + rω) dω`.
pub fn free_cosine_apply(
    t: f64,
    grid: &Grid2D,
    f: &[f64],
    grad_f: (&[f64], &[f64]),
    obs: &Grid2D,
) -> Result<Evaluated> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("t must be finite and nonnegative, got {t}")));
    }
    let warnings = boundary_warning(grid, f);
    if t == 0.0 {
        let interp = LatticeInterpolator::new(grid, f)?;
        let values = obs.nodes().iter().map(|&x| interp.eval(x)).collect();
        return Ok(Evaluated { values, warnings });
    }
    let gx = LatticeInterpolator::new(grid, grad_f.0)?;
    let gy = LatticeInterpolator::new(grid, grad_f.1)?;
    let (c, rx) = gx.support();
    let (c2, ry) = gy.support();
    let support = if rx >= ry { (c, rx) } else { (c2, ry) };
    if support.1 == 0.0 {
        return Ok(Evaluated { values: vec![0.0; obs.len()], warnings });
    }
    let h = grid.cell_width();
    let rule = polar_rule(t, h);
    let gl = GaussLegendre::new(8);
    let values = obs
        .nodes()
        .iter()
        .map(|&x| {
            let m = |r: f64| {
                let n_theta = rule.n_theta.max(((2.0 * PI * r / (0.5 * h)).ceil() as usize + 3) / 4 * 4);
                ring_sum(x, r, n_theta, support, |p, co, s| co * gx.eval(p) + s * gy.eval(p))
            };
            let d = (support.0[0] - x[0]).hypot(support.0[1] - x[1]);
            let outer = d + support.1;
            let mut tail = 0.0;
            if outer > t {
                let lo = t.max(d - support.1);
                if outer > lo {
                    let panels = ((outer - lo) / h).ceil().max(1.0) as usize;
                    let dr = (outer - lo) / panels as f64;
                    for p in 0..panels {
                        for (r, w) in gl.mapped(lo + p as f64 * dr, lo + (p + 1) as f64 * dr) {
                            tail += w * m(r);
                        }
                    }
                }
            }
            let mut inner = 0.0;
            for &(phi, w) in &rule.phi {
                inner += w * t * (1.0 - phi.cos()) * m(t * phi.sin());
            }
            (inner - tail) / (2.0 * PI)
        })
        .collect();
    Ok(Evaluated { values, warnings })
}

fn boundary_warning(grid: &Grid2D, f: &[f64]) -> Vec<Warning> {
    let Some(lat) = grid.lattice() else { return Vec::new() };
    let set: HashSet<[i64; 2]> = lat.index.iter().copied().collect();
    let field_max = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut boundary_max = 0.0f64;
    for (k, &[i, j]) in lat.index.iter().enumerate() {
        let interior = set.contains(&[i + 1, j])
            && set.contains(&[i - 1, j])
            && set.contains(&[i, j + 1])
            && set.contains(&[i, j - 1]);
        if !interior {
            boundary_max = boundary_max.max(f[k].abs());
        }
    }
    if boundary_max > 1e-6 * field_max {
        vec![Warning::TruncationBias { boundary_max, field_max }]
    } else {
        Vec::new()
    }
}

/// Mollifier width and time truncation for the cone decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeKernelParams {
    pub epsilon: f64,
    pub t_max: f64,
}

impl Default for ConeKernelParams {
    fn default() -> Self {
        Self { epsilon: 0.1, t_max: 64.0 }
    }
}

impl ConeKernelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.25) {
            return Err(Error::Domain(format!("epsilon must lie in (0, 1/4), got {}", self.epsilon)));
        }
        if !(self.t_max > 2.0) {
            return Err(Error::Domain(format!("t_max must exceed 2, got {}", self.t_max)));
        }
        Ok(())
    }

    /// C² step rising from 0 at `1 − ε` to 1 at `1 + ε`.
    pub fn eta(&self, t: f64) -> f64 {
        let u = ((t - (1.0 - self.epsilon)) / (2.0 * self.epsilon)).clamp(0.0, 1.0);
        u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
    }
}

/// Low-frequency cutoff `h(λ)`: 1 on |λ| ≤ 1, 0 on |λ| ≥ 2.
pub fn low_cutoff(lambda: f64) -> f64 {
    1.0 - smooth_step(lambda.abs() - 1.0)
}

/// `(i/4)sgn λ − (1/2π)log|λ|`.
pub fn log_profile(lambda: f64) -> Complex64 {
    Complex64::new(-lambda.abs().ln() / (2.0 * PI), 0.25f64.copysign(lambda))
}

/// The decomposition `K = L + η(t)/t − ĝ`, with
/// `L(t) = 1_{t≥r}(t²−r²)^{−1/2} − η(t)t^{−1} + ĝ(t)` and `ĝ` the Fourier
/// transform of `g̃ = (η t^{−1})^∨ − h·((i/4)sgn λ − (1/2π)log|λ|)`.
#[derive(Debug, Clone)]
pub struct ConeKernel {
    params: ConeKernelParams,
    t0: f64,
    dt: f64,
    table: Vec<f64>,
}

const GHAT_STEP: f64 = 1.0 / 64.0;
const LAMBDA_CUT: f64 = 400.0;

impl ConeKernel {
    pub fn new(params: ConeKernelParams) -> Result<Self> {
        params.validate()?;
        let gl = GaussLegendre::new(8);
        let mut lam = Vec::new();
        let mut wts = Vec::new();
        let width = 0.05;
        let panels = (LAMBDA_CUT / width) as usize;
        for p in 0..panels {
            for (l, w) in gl.mapped(p as f64 * width, (p + 1) as f64 * width) {
                lam.push(l);
                wts.push(w);
            }
        }
        let gvals: Vec<Complex64> = lam.iter().map(|&l| g_tilde(&params, l)).collect();
        let half = (params.t_max / GHAT_STEP).round() as usize;
        let mut even = vec![0.0; half + 1];
        let mut odd = vec![0.0; half + 1];
        for ((&l, &w), g) in lam.iter().zip(&wts).zip(&gvals) {
            let step = Complex64::from_polar(1.0, l * GHAT_STEP);
            let mut z = Complex64::new(1.0, 0.0);
            for k in 0..=half {
                if k % 256 == 0 {
                    z = Complex64::from_polar(1.0, l * k as f64 * GHAT_STEP);
                }
                even[k] += w * g.re * z.re;
                odd[k] += w * g.im * z.im;
                z *= step;
            }
        }
        let t0 = -(half as f64) * GHAT_STEP;
        let table = (0..=2 * half)
            .map(|k| {
                if k < half {
                    2.0 * (even[half - k] - odd[half - k])
                } else {
                    2.0 * (even[k - half] + odd[k - half])
                }
            })
            .collect();
        Ok(Self { params, t0, dt: GHAT_STEP, table })
    }

    /// Shared kernel for the default parameters, built on first use.
    pub fn shared_default() -> &'static ConeKernel {
        static DEFAULT: OnceLock<ConeKernel> = OnceLock::new();
        DEFAULT.get_or_init(|| ConeKernel::new(ConeKernelParams::default()).expect("default parameters are valid"))
    }

    pub fn params(&self) -> ConeKernelParams {
        self.params
    }

    /// Tabulated `ĝ(t)`, cubic interpolation; 0 beyond the table.
    pub fn g_hat(&self, t: f64) -> f64 {
        let s = (t - self.t0) / self.dt;
        let n = self.table.len();
        if s < 0.0 || s > (n - 1) as f64 {
            return 0.0;
        }
        let i = (s.floor() as usize).clamp(1, n - 3);
        let u = s - i as f64;
        let p = [self.table[i - 1], self.table[i], self.table[i + 1], self.table[i + 2]];
        let a = -p[0] / 6.0 + p[1] / 2.0 - p[2] / 2.0 + p[3] / 6.0;
        let b = p[0] / 2.0 - p[1] + p[2] / 2.0;
        let c = -p[0] / 3.0 - p[1] / 2.0 + p[2] - p[3] / 6.0;
        ((a * u + b) * u + c) * u + p[1]
    }

    /// `L(t)(x, y)` at `|x − y| = r`.
    pub fn eval(&self, t: f64, r: f64) -> f64 {
        let k = if t > r { 1.0 / ((t - r) * (t + r)).sqrt() } else { 0.0 };
        let tail = if t > 0.0 { self.params.eta(t) / t } else { 0.0 };
        k - tail + self.g_hat(t)
    }
}

pub fn cone_l_kernel(t: f64, r: f64, kernel: &ConeKernel) -> Result<f64> {
    if !(r > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("need r > 0 and finite t, got r = {r}, t = {t}")));
    }
    if t == r {
        GRAZING.fetch_add(1, Ordering::Relaxed);
        return Ok(kernel.g_hat(t) - kernel.params.eta(t) / t);
    }
    Ok(kernel.eval(t, r))
}

/// `(η t^{−1})^∨(λ) = (1/2π)∫ e^{iλt} η(t)/t dt`.
pub fn eta_over_t_transform(params: &ConeKernelParams, lambda: f64) -> Complex64 {
    let gl = GaussLegendre::new(8);
    let a = 1.0 - params.epsilon;
    let b = 1.0 + params.epsilon;
    let panels = ((lambda.abs() * (b - a) / 1.5).ceil() as usize).max(2);
    let dt = (b - a) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        for (t, w) in gl.mapped(a + p as f64 * dt, a + (p + 1) as f64 * dt) {
            acc += Complex64::from_polar(w * params.eta(t) / t, lambda * t);
        }
    }
    let x = lambda * b;
    let tail = if x == 0.0 {
        Complex64::new(f64::INFINITY, 0.0)
    } else {
        let (si, ci) = sici(x.abs());
        Complex64::new(-ci, (FRAC_PI_2 - si) * x.signum())
    };
    (acc + tail) / (2.0 * PI)
}

fn g_tilde(params: &ConeKernelParams, lambda: f64) -> Complex64 {
    if lambda == 0.0 {
        return g_tilde(params, 1e-12);
    }
    eta_over_t_transform(params, lambda) - log_profile(lambda) * low_cutoff(lambda)
}
