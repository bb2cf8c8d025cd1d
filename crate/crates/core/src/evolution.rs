//! Spectral synthesis of `sin(t√H)P_c/√H`, `cos(t√H)P_c` and
//! `cos(t√H)P_c/H` from the limiting-absorption resolvent, the fractional
//! kernel `M(t)`, Duhamel integration against banked propagators and the
//! semilinear Picard solver.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use statrs::function::gamma::{digamma, gamma};

use crate::error::{Error, Result, Warning};
use crate::grid::{Grid2D, LatticeInterpolator};
use crate::norms::{reversed_norm_raw, Exponent};
use crate::operator::{discretize_h_on, point_spectrum, project_continuous, PotentialSpec, SpectrumData};
use crate::quadrature::{composite, geometric_breaks, graded_breaks, smooth_step, GaussLegendre};
use crate::resolvent::{regularity_check, RegularityReport, ResolventEngine, Verdict};
use crate::specfun::{hankel_asymptotic_coefficients, j0y0_unchecked, sici, EULER_GAMMA};

const GL_PER_PANEL: usize = 8;

/// Default `lambda_max·cell_width`; kept below the lattice Nyquist limit π.
pub const LAMBDA_MAX_PER_INVERSE_CELL: f64 = 2.5;
pub const DEFAULT_NODES: usize = 2048;
pub const DEFAULT_REFINEMENT: usize = 12;

/// Symmetric λ-quadrature with geometric refinement at 0 and a smooth
/// taper on the outer fifth.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    pub lambda_nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub lambda_max: f64,
    pub near_zero_refinement: usize,
}

impl SpectralGrid {
    pub fn taper(&self, lambda: f64) -> f64 {
        let l = self.lambda_max;
        1.0 - smooth_step((lambda.abs() - 0.8 * l) / (0.2 * l))
    }

    /// Positive half as `(λ, weight)` pairs.
    pub fn positive(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.lambda_nodes.iter().zip(&self.weights).filter(|(l, _)| **l > 0.0).map(|(l, w)| (*l, *w))
    }

    /// Defaults for data sampled at spacing `cell_width`.
    pub fn for_cell_width(cell_width: f64) -> Result<Self> {
        make_spectral_grid(LAMBDA_MAX_PER_INVERSE_CELL / cell_width, DEFAULT_NODES, DEFAULT_REFINEMENT)
    }

    pub fn len(&self) -> usize {
        self.lambda_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda_nodes.is_empty()
    }
}

/// `n_nodes/16` Gauss panels of 8 points on each half line (at least
/// `refinement + 2`), of which `refinement + 1` resolve `[0, δ]`
/// geometrically and the rest are uniform of width `δ`.
pub fn make_spectral_grid(lambda_max: f64, n_nodes: usize, refinement: usize) -> Result<SpectralGrid> {
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(Error::Domain("lambda_max must be positive".into()));
    }
    if n_nodes < 64 {
        return Err(Error::Domain(format!("n_nodes must be at least 64, got {n_nodes}")));
    }
    let panels = (n_nodes / (2 * GL_PER_PANEL)).max(refinement + 2);
    let n_bulk = panels - refinement;
    let delta = lambda_max / n_bulk as f64;
    let mut breaks = geometric_breaks(delta, refinement);
    for k in 2..=n_bulk {
        breaks.push(delta * k as f64);
    }
    *breaks.last_mut().unwrap() = lambda_max;
    let (pos, pw) = composite(&breaks, GL_PER_PANEL);
    let mut lambda_nodes: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
    lambda_nodes.extend(&pos);
    let mut weights: Vec<f64> = pw.iter().rev().copied().collect();
    weights.extend(&pw);
    Ok(SpectralGrid { lambda_nodes, weights, lambda_max, near_zero_refinement: refinement })
}

/// Snapshots of a real field on `obs` at increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub obs: Grid2D,
    pub times: Vec<f64>,
    /// `values[j][i]` is the field at `times[j]` and node `i`.
    pub values: Vec<Vec<f64>>,
}

impl WaveField {
    pub fn new(obs: Grid2D, times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("times must be strictly increasing".into()));
        }
        if values.len() != times.len() || values.iter().any(|v| v.len() != obs.len()) {
            return Err(Error::Domain("wave field shape does not match grid and times".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("wave field has non-finite values".into()));
        }
        Ok(Self { obs, times, values })
    }

    pub fn zeros(obs: Grid2D, times: Vec<f64>) -> Result<Self> {
        let values = vec![vec![0.0; obs.len()]; times.len()];
        Self::new(obs, times, values)
    }

    /// Uniform step of the time axis, if it has one.
    pub fn uniform_step(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let dt = self.times[1] - self.times[0];
        let ok = self.times.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1.0));
        ok.then_some(dt)
    }
}

/// Refuses non-regular potentials; `None` for `V = 0`.
fn check_assumptions(pot: &PotentialSpec) -> Result<Option<RegularityReport>> {
    if pot.is_zero() {
        return Ok(None);
    }
    let rep = regularity_check(pot, None)?;
    match rep.verdict {
        Verdict::Regular => Ok(Some(rep)),
        _ => Err(Error::SpectralAssumptionViolated(format!(
            "zero energy is not regular (sigma_min = {:.3e}, tol = {:.3e}, {} zero suspects)",
            rep.sigma_min,
            rep.tol_regular,
            rep.zero_suspects.len()
        ))),
    }
}

/// Largest observation lattice on which bound states are projected out of
/// synthesized fields.
pub const PROJECTION_MAX_NODES: usize = 2500;

fn projector(rep: Option<&RegularityReport>, pot: &PotentialSpec, obs: &Grid2D) -> Result<Option<SpectrumData>> {
    let Some(rep) = rep else { return Ok(None) };
    if rep.bound_state_count == 0 || obs.lattice().is_none() || obs.len() > PROJECTION_MAX_NODES {
        return Ok(None);
    }
    let interp = crate::grid::LatticeInterpolator::new(pot.grid(), pot.values())?;
    let v: Vec<f64> = obs.nodes().iter().map(|&p| interp.eval(p)).collect();
    let h = discretize_h_on(obs, &v)?;
    let spec = point_spectrum(&h, obs, crate::operator::default_tol_zero(&h))?;
    Ok((spec.bound_state_count() > 0).then_some(spec))
}

/// `R_V((λ_k+i0)²)f` on the observation grid at every positive node of a
/// spectral grid; any real-time propagator of `f` is a weighted sum of
/// these columns.
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    obs: Grid2D,
    lambdas: Vec<f64>,
    weights: Vec<f64>,
    imag: Vec<Vec<f64>>,
    real: Option<Vec<Vec<f64>>>,
    /// `f` on `obs` and `λ_max`, for the high-frequency tail of `Re R_V f`.
    tail: Option<(Vec<f64>, f64)>,
    projector: Option<SpectrumData>,
    max_condition: f64,
    warnings: Vec<Warning>,
}

/// Propagator output with anything worth reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOutput {
    pub values: Vec<f64>,
    /// Same quantity on the grid with twice the nodes, when requested.
    pub refined: Option<Vec<f64>>,
    pub warnings: Vec<Warning>,
}

impl SpectralProfile {
    /// Solves at every positive node. `keep_real` also stores `Re R_V f`,
    /// needed only for the full Fourier synthesis.
    pub fn build(
        pot: &PotentialSpec,
        src: &Grid2D,
        f: &[f64],
        obs: &Grid2D,
        sg: &SpectralGrid,
        keep_real: bool,
    ) -> Result<Self> {
        let rep = check_assumptions(pot)?;
        let mut warnings = rep.as_ref().map(|r| r.warnings.clone()).unwrap_or_default();
        let engine = ResolventEngine::new(pot, src, obs);
        let mut lambdas = Vec::new();
        let mut weights = Vec::new();
        let mut imag = Vec::new();
        let mut real = keep_real.then(Vec::new);
        let mut max_condition: f64 = 1.0;
        for (l, w) in sg.positive() {
            if let Some(re) = real.as_mut() {
                let col = engine.apply(l, f)?;
                re.push(col.iter().map(|z| z.re).collect());
                imag.push(col.iter().map(|z| z.im).collect());
            } else {
                let (col, cond) = engine.apply_imag(l, f)?;
                max_condition = max_condition.max(cond);
                imag.push(col);
            }
            lambdas.push(l);
            weights.push(w * sg.taper(l));
        }
        if max_condition > 1e8 {
            warnings.push(Warning::NearSingular { lambda: 0.0, condition: max_condition });
        }
        let projector = projector(rep.as_ref(), pot, obs)?;
        let tail = keep_real
            .then(|| LatticeInterpolator::new(src, f).ok())
            .flatten()
            .map(|interp| (obs.nodes().iter().map(|&p| interp.eval(p)).collect(), sg.lambda_max));
        Ok(Self { obs: obs.clone(), lambdas, weights, imag, real, tail, projector, max_condition, warnings })
    }

    pub fn obs(&self) -> &Grid2D {
        &self.obs
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn max_condition(&self) -> f64 {
        self.max_condition
    }

    fn combine<F: Fn(f64) -> f64>(&self, coef: F) -> Vec<f64> {
        let mut out = vec![0.0; self.obs.len()];
        for ((&l, &w), col) in self.lambdas.iter().zip(&self.weights).zip(&self.imag) {
            let c = 2.0 / PI * w * coef(l);
            for (o, x) in out.iter_mut().zip(col) {
                *o += c * x;
            }
        }
        match &self.projector {
            Some(spec) => project_continuous(&out, spec),
            None => out,
        }
    }

    /// `sin(t√H)P_c f/√H`.
    pub fn sine(&self, t: f64) -> Vec<f64> {
        self.combine(|l| (t * l).sin())
    }

    /// `cos(t√H)P_c f`.
    pub fn cosine(&self, t: f64) -> Vec<f64> {
        self.combine(|l| l * (t * l).cos())
    }

    /// `∫_t^{t_max} sin(τ√H)P_c f/√H dτ`, the truncation of
    /// `cos(t√H)P_c f/H`; the time integral is exact node by node.
    pub fn cos_over_h(&self, t: f64, t_max: f64) -> SynthesisOutput {
        let values = self.combine(|l| ((t * l).cos() - (t_max * l).cos()) / l);
        let lo = 0.1 * t_max;
        let tail = self.combine(|l| ((lo * l).cos() - (t_max * l).cos()) / l);
        let last_decade = self.obs.l2_norm(&tail);
        let total = self.obs.l2_norm(&values);
        let mut warnings = Vec::new();
        if last_decade > 0.1 * total {
            warnings.push(Warning::Truncation { last_decade, total });
        }
        SynthesisOutput { values, refined: None, warnings }
    }

    /// `(1/2π)∫ e^{−iλt} R_V((λ+i0)²)f dλ` over the tapered grid; vanishes
    /// for `t < 0` up to quadrature error.
    pub fn fourier_synthesis(&self, t: f64) -> Result<Vec<f64>> {
        let real = self
            .real
            .as_ref()
            .ok_or_else(|| Error::Domain("profile was built without real parts".into()))?;
        let mut out = vec![0.0; self.obs.len()];
        for (k, (&l, &w)) in self.lambdas.iter().zip(&self.weights).enumerate() {
            let (s, c) = (t * l).sin_cos();
            for (i, o) in out.iter_mut().enumerate() {
                *o += w / PI * (c * real[k][i] + s * self.imag[k][i]);
            }
        }
        // Re R_V f = −f/λ² + O(λ⁻⁴); add what the taper removed of that term.
        if let Some((f_obs, lambda_max)) = &self.tail {
            let k = tapered_tail(t, *lambda_max);
            for (o, x) in out.iter_mut().zip(f_obs) {
                *o -= k / PI * x;
            }
        }
        Ok(out)
    }
}

/// `∫₀^∞ (1 − taper(λ)) cos(λt)/λ² dλ`.
fn tapered_tail(t: f64, lambda_max: f64) -> f64 {
    let a = 0.8 * lambda_max;
    let gl = GaussLegendre::new(GL_PER_PANEL);
    let band: f64 = (0..4)
        .map(|k| {
            let lo = a + 0.05 * lambda_max * k as f64;
            gl.integrate(lo, lo + 0.05 * lambda_max, |l| {
                smooth_step((l - a) / (0.2 * lambda_max)) * (l * t).cos() / (l * l)
            })
        })
        .sum();
    let at = lambda_max * t.abs();
    let si = if at > 0.0 { sici(at).0 } else { 0.0 };
    let beyond = (lambda_max * t).cos() / lambda_max - t.abs() * (FRAC_PI_2 - si);
    band + beyond
}

fn nonnegative(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

pub fn apply_sine_h(
    t: f64,
    pot: &PotentialSpec,
    src: &Grid2D,
    f: &[f64],
    obs: &Grid2D,
    sg: &SpectralGrid,
) -> Result<SynthesisOutput> {
    nonnegative(t)?;
    let p = SpectralProfile::build(pot, src, f, obs, sg, false)?;
    Ok(SynthesisOutput { values: p.sine(t), refined: None, warnings: p.warnings.clone() })
}

pub fn apply_cosine_h(
    t: f64,
    pot: &PotentialSpec,
    src: &Grid2D,
    f: &[f64],
    obs: &Grid2D,
    sg: &SpectralGrid,
) -> Result<SynthesisOutput> {
    nonnegative(t)?;
    let p = SpectralProfile::build(pot, src, f, obs, sg, false)?;
    Ok(SynthesisOutput { values: p.cosine(t), refined: None, warnings: p.warnings.clone() })
}

pub fn cos_over_h(
    t: f64,
    pot: &PotentialSpec,
    src: &Grid2D,
    f: &[f64],
    obs: &Grid2D,
    sg: &SpectralGrid,
    t_max: f64,
) -> Result<SynthesisOutput> {
    nonnegative(t)?;
    if !(t_max > t) {
        return Err(Error::Domain("t_max must exceed t".into()));
    }
    let p = SpectralProfile::build(pot, src, f, obs, sg, false)?;
    let mut out = p.cos_over_h(t, t_max);
    out.warnings.extend(p.warnings.iter().cloned());
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Propagator {
    Sine,
    Cosine,
    /// `cos(t√H)P_c/H` truncated at `t_max`.
    CosOverH { t_max: f64 },
}

/// Sine or cosine evolution evaluated on `sg` and on the grid with twice
/// the nodes; a relative L² difference above `tol` is reported.
pub fn synthesis_self_difference(
    kind: Propagator,
    t: f64,
    pot: &PotentialSpec,
    src: &Grid2D,
    f: &[f64],
    obs: &Grid2D,
    sg: &SpectralGrid,
    tol: f64,
) -> Result<SynthesisOutput> {
    nonnegative(t)?;
    let fine = make_spectral_grid(sg.lambda_max, 2 * sg.len(), sg.near_zero_refinement)?;
    let eval = |g: &SpectralGrid| -> Result<(Vec<f64>, Vec<Warning>)> {
        let p = SpectralProfile::build(pot, src, f, obs, g, false)?;
        let v = match kind {
            Propagator::Sine => p.sine(t),
            Propagator::Cosine => p.cosine(t),
            Propagator::CosOverH { t_max } => p.cos_over_h(t, t_max).values,
        };
        Ok((v, p.warnings.clone()))
    };
    let (values, mut warnings) = eval(sg)?;
    let (refined, _) = eval(&fine)?;
    let diff: Vec<f64> = values.iter().zip(&refined).map(|(a, b)| a - b).collect();
    let relative = obs.l2_norm(&diff) / obs.l2_norm(&refined).max(f64::MIN_POSITIVE);
    if relative > tol {
        warnings.push(Warning::QuadratureSelfDifference { relative });
    }
    Ok(SynthesisOutput { values, refined: Some(refined), warnings })
}

/// Kernel matrices (obs × src) of the requested propagators at the
/// requested times, with the taper raised to `taper_power`.
pub fn synthesize_kernels(
    pot: &PotentialSpec,
    src: &Grid2D,
    obs: &Grid2D,
    sg: &SpectralGrid,
    requests: &[(Propagator, Vec<f64>)],
    taper_power: i32,
) -> Result<Vec<Vec<DMatrix<f64>>>> {
    check_assumptions(pot)?;
    for (_, times) in requests {
        for &t in times {
            nonnegative(t)?;
        }
    }
    let engine = ResolventEngine::new(pot, src, obs);
    let (no, ns) = (obs.len(), src.len());
    let mut out: Vec<Vec<DMatrix<f64>>> =
        requests.iter().map(|(_, ts)| vec![DMatrix::zeros(no, ns); ts.len()]).collect();
    for (l, w) in sg.positive() {
        let k = engine.kernel(l)?.map(|z| z.im);
        let base = 2.0 / PI * w * sg.taper(l).powi(taper_power);
        for ((kind, times), mats) in requests.iter().zip(out.iter_mut()) {
            for (&t, m) in times.iter().zip(mats.iter_mut()) {
                let c = base
                    * match *kind {
                        Propagator::Sine => (t * l).sin(),
                        Propagator::Cosine => l * (t * l).cos(),
                        Propagator::CosOverH { t_max } => ((t * l).cos() - (t_max * l).cos()) / l,
                    };
                for (x, y) in m.iter_mut().zip(k.iter()) {
                    *x += c * y;
                }
            }
        }
    }
    Ok(out)
}

/// `sin(τ√H)P_c/√H` (and optionally `cos(τ√H)P_c`) kernels at
/// `τ = 0, dt, 2dt, …` from `src` to `obs`.
#[derive(Debug, Clone)]
pub struct PropagatorBank {
    pub dt: f64,
    pub times: Vec<f64>,
    pub src: Grid2D,
    pub obs: Grid2D,
    pub sine: Vec<DMatrix<f64>>,
    pub cosine: Option<Vec<DMatrix<f64>>>,
}

impl PropagatorBank {
    pub fn build(
        pot: &PotentialSpec,
        src: &Grid2D,
        obs: &Grid2D,
        sg: &SpectralGrid,
        dt: f64,
        n_times: usize,
        with_cosine: bool,
    ) -> Result<Self> {
        if !(dt > 0.0) || n_times == 0 {
            return Err(Error::Config("bank needs dt > 0 and at least one time".into()));
        }
        let times: Vec<f64> = (0..n_times).map(|k| k as f64 * dt).collect();
        let mut req = vec![(Propagator::Sine, times.clone())];
        if with_cosine {
            req.push((Propagator::Cosine, times.clone()));
        }
        let mut mats = synthesize_kernels(pot, src, obs, sg, &req, 1)?;
        let cosine = with_cosine.then(|| mats.pop().unwrap());
        let mut sine = mats.pop().unwrap();
        sine[0].fill(0.0);
        Ok(Self { dt, times, src: src.clone(), obs: obs.clone(), sine, cosine })
    }

    fn weighted(&self, f: &[f64]) -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_iterator(f.len(), f.iter().zip(self.src.weights()).map(|(a, w)| a * w))
    }

    pub fn apply_sine(&self, k: usize, f: &[f64]) -> Vec<f64> {
        (&self.sine[k] * self.weighted(f)).iter().copied().collect()
    }

    pub fn apply_cosine(&self, k: usize, f: &[f64]) -> Option<Vec<f64>> {
        let c = self.cosine.as_ref()?;
        Some((&c[k] * self.weighted(f)).iter().copied().collect())
    }

    /// Largest `|S − Sᵀ|` over the bank relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for m in &self.sine {
            if m.nrows() == m.ncols() {
                let scale = m.amax().max(f64::MIN_POSITIVE);
                worst = worst.max((m - m.transpose()).amax() / scale);
            }
        }
        worst
    }
}

/// `u(t_j) = Σ_{s_k ≤ t_j} dt·S(t_j − s_k)F(s_k)`.
pub fn duhamel_inhomogeneous(forcing: &WaveField, bank: &PropagatorBank) -> Result<WaveField> {
    if forcing.obs.len() != bank.src.len() {
        return Err(Error::Config("forcing grid does not match the bank source grid".into()));
    }
    let n = forcing.times.len();
    if n > 1 {
        let dt = forcing
            .uniform_step()
            .ok_or_else(|| Error::Config("forcing times must be uniform".into()))?;
        if (dt - bank.dt).abs() > 1e-9 * bank.dt {
            return Err(Error::Config(format!("forcing step {dt} differs from bank step {}", bank.dt)));
        }
    }
    if n > bank.times.len() {
        return Err(Error::Config(format!(
            "bank covers offsets up to {} steps, forcing needs {}",
            bank.times.len() - 1,
            n - 1
        )));
    }
    let wf: Vec<nalgebra::DVector<f64>> = forcing.values.iter().map(|f| bank.weighted(f)).collect();
    let mut values = vec![vec![0.0; bank.obs.len()]; n];
    for (j, out) in values.iter_mut().enumerate() {
        let mut acc = nalgebra::DVector::zeros(bank.obs.len());
        for k in 0..j {
            acc.gemv(bank.dt, &bank.sine[j - k], &wf[k], 1.0);
        }
        out.copy_from_slice(acc.as_slice());
    }
    WaveField::new(bank.obs.clone(), forcing.times.clone(), values)
}

/// Mixed-norm exponents `(q₁, r₁)` measuring Picard differences; inside
/// the reversed-Strichartz rectangle `[0, 1/8] × [0, 1/2]`.
pub const SEMILINEAR_NORM: (Exponent, Exponent) = (Exponent::Finite(8.0), Exponent::Finite(12.0));

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub iterations: usize,
    /// `‖f_{k+1} − f_k‖` in `L^{q₁}_x L^{r₁}_t`.
    pub differences: Vec<f64>,
    /// Consecutive difference ratios.
    pub ratios: Vec<f64>,
    pub first_correction: f64,
}

/// Picard iteration `f_{k+1} = cos(t√H)f₀ + sin(t√H)f₁/√H + Duhamel(|f_k|^{p−1}f_k + F)`
/// on the bank's time axis; the bank must map a grid to itself and carry
/// cosines.
pub fn semilinear_solve(
    f0: &[f64],
    f1: &[f64],
    forcing: Option<&WaveField>,
    p: f64,
    n_iter: usize,
    bank: &PropagatorBank,
) -> Result<(WaveField, ContractionReport)> {
    if !(p >= 2.0) {
        return Err(Error::Domain("p must be at least 2".into()));
    }
    let grid = &bank.src;
    if bank.obs.len() != grid.len() || bank.cosine.is_none() {
        return Err(Error::Config("semilinear solve needs a square bank with cosines".into()));
    }
    if f0.len() != grid.len() || f1.len() != grid.len() {
        return Err(Error::Domain("data length does not match the bank grid".into()));
    }
    let nt = bank.times.len();
    if let Some(fw) = forcing {
        if fw.times.len() != nt || fw.obs.len() != grid.len() {
            return Err(Error::Config("forcing must live on the bank grid and times".into()));
        }
    }
    let times = bank.times.clone();
    let linear: Vec<Vec<f64>> = (0..nt)
        .map(|k| {
            let c = bank.apply_cosine(k, f0).unwrap();
            let s = bank.apply_sine(k, f1);
            c.iter().zip(&s).map(|(a, b)| a + b).collect()
        })
        .collect();
    let (q, r) = SEMILINEAR_NORM;
    let mut current: Vec<Vec<f64>> = vec![vec![0.0; grid.len()]; nt];
    let mut differences = Vec::new();
    let mut first_correction = 0.0;
    let mut rising = 0;
    for it in 0..n_iter.max(1) {
        let source: Vec<Vec<f64>> = (0..nt)
            .map(|k| {
                current[k]
                    .iter()
                    .enumerate()
                    .map(|(i, &u)| u.abs().powf(p - 1.0) * u + forcing.map_or(0.0, |fw| fw.values[k][i]))
                    .collect()
            })
            .collect();
        let duh = duhamel_inhomogeneous(&WaveField::new(grid.clone(), times.clone(), source)?, bank)?;
        let next: Vec<Vec<f64>> = linear
            .iter()
            .zip(&duh.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        let diff: Vec<Vec<f64>> = next
            .iter()
            .zip(&current)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        let d = reversed_norm_raw(&diff, grid.weights(), &vec![bank.dt; nt], q, r);
        if !d.is_finite() {
            return Err(Error::Divergence("Picard difference is not finite".into()));
        }
        if it == 1 {
            first_correction = d;
        }
        if let Some(&prev) = differences.last() {
            if d >= prev {
                rising += 1;
                if rising >= 3 {
                    return Err(Error::Divergence(format!(
                        "Picard differences did not decrease for 3 iterations (last {d:.3e})"
                    )));
                }
            } else {
                rising = 0;
            }
        }
        differences.push(d);
        current = next;
        if d == 0.0 {
            break;
        }
    }
    let ratios = differences.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 }).collect();
    let report = ContractionReport { iterations: differences.len(), differences, ratios, first_correction };
    Ok((WaveField::new(grid.clone(), times, current)?, report))
}

/// Panel scale of the λ quadrature: number of λr units covered directly.
const M_DIRECT_SPAN: f64 = 20.0;

fn check_fractional(s: f64, r: f64) -> Result<()> {
    if !(s > 0.25) {
        return Err(Error::Domain(format!("M(t) is not locally integrable in t for s <= 1/4 (s = {s})")));
    }
    if !(s < 1.0) {
        return Err(Error::Domain(format!("s must be below 1, got {s}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain("r must be positive".into()));
    }
    Ok(())
}

/// `∫_Λ^∞ λ^{−ν} e^{iωλ} dλ` for `ω ≠ 0` along the steepest-descent ray.
fn oscillatory_tail(lambda0: f64, nu: f64, omega: f64, gl: &GaussLegendre) -> Complex64 {
    let sigma = omega.signum();
    let aw = omega.abs();
    let c = lambda0 * aw;
    let mut breaks = vec![0.0];
    let mut b = c.min(1.0) / 64.0;
    while b < 48.0 {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(48.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for pair in breaks.windows(2) {
        for (y, w) in gl.mapped(pair[0], pair[1]) {
            let z = Complex64::new(lambda0, sigma * y / aw);
            acc += z.powf(-nu) * ((-y).exp() * w);
        }
    }
    Complex64::new(0.0, omega * lambda0).exp() * Complex64::new(0.0, sigma / aw) * acc
}

/// The fractional kernel
/// `M(t)(x,y) = ∫ e^{−iλt} R₀((λ+i0)²)(x,y) |λ|^{1−2s} sgn λ dλ` at `|x−y| = r`,
/// which is purely imaginary.
pub fn fractional_kernel_m(t: f64, r: f64, s: f64) -> Result<Complex64> {
    check_fractional(s, r)?;
    if !t.is_finite() {
        return Err(Error::Domain("t must be finite".into()));
    }
    if t == r && s <= 0.75 {
        return Err(Error::Domain("M is singular on the cone t = r for s <= 3/4".into()));
    }
    let a = 1.0 - 2.0 * s;
    let mu = a + 1.0;
    let freq = r + t.abs();
    let b0 = 1.0 / freq;
    let eps_levels = 20;
    let lam_hi = M_DIRECT_SPAN / r;
    let gl = GaussLegendre::new(GL_PER_PANEL);
    let integrand = |l: f64| {
        let (j, y) = j0y0_unchecked(l * r);
        let (sn, cs) = (l * t).sin_cos();
        l.powf(a) * (j * cs + y * sn)
    };
    // [0, ε] from the small-argument law H₀⁺(z) ≈ 1 + (2i/π)(log(z/2) + γ).
    let eps = b0 * 0.5f64.powi(eps_levels);
    let mut acc = eps.powf(mu) / mu;
    let mut breaks = geometric_breaks(b0, eps_levels as usize);
    breaks.remove(0);
    let n = ((lam_hi - b0) * freq / 1.5).ceil().max(1.0) as usize;
    let step = (lam_hi - b0) / n as f64;
    for k in 1..=n {
        breaks.push(b0 + step * k as f64);
    }
    for pair in breaks.windows(2) {
        acc += gl.integrate(pair[0], pair[1], integrand);
    }
    // Tail from the Hankel expansion H₀⁺(z) ~ (2/πz)^{1/2} e^{i(z−π/4)} Σ iᵏaₖ z^{−k}.
    let coeffs = hankel_asymptotic_coefficients(12);
    let omega = r - t;
    let gl_tail = GaussLegendre::new(12);
    let mut tail = Complex64::new(0.0, 0.0);
    let mut ik = Complex64::new(1.0, 0.0);
    for (k, &ak) in coeffs.iter().enumerate() {
        let size = ak.abs() / (lam_hi * r).powi(k as i32);
        if k > 0 && size < 1e-17 {
            break;
        }
        let ck = (2.0 / (PI * r)).sqrt() * Complex64::from_polar(1.0, -FRAC_PI_4) * ik * (ak / r.powi(k as i32));
        let nu = k as f64 + 0.5 - a;
        let integral = if omega == 0.0 {
            Complex64::new(lam_hi.powf(1.0 - nu) / (nu - 1.0), 0.0)
        } else {
            oscillatory_tail(lam_hi, nu, omega, &gl_tail)
        };
        tail += ck * integral;
        ik *= Complex64::new(0.0, 1.0);
    }
    acc += tail.re;
    Ok(Complex64::new(0.0, 0.5 * acc))
}

/// Leading large-`|t|` behaviour of `M(t)` at `|x−y| = r`, from the Mellin
/// transform of the small-λ law of `R₀`.
pub fn fractional_kernel_far(t: f64, r: f64, s: f64) -> Result<Complex64> {
    check_fractional(s, r)?;
    if t == 0.0 || !t.is_finite() {
        return Err(Error::Domain("far-field form needs t != 0".into()));
    }
    let mu = 2.0 - 2.0 * s;
    let tau = t / r;
    let log_itau = Complex64::new(tau.abs().ln(), FRAC_PI_2 * tau.signum());
    let itau_pow = (-mu * log_itau).exp();
    let bracket =
        Complex64::new(1.0, 0.0) + Complex64::new(0.0, 2.0 / PI) * (digamma(mu) - log_itau - 2f64.ln() + EULER_GAMMA);
    let m = (gamma(mu) * itau_pow * bracket).re;
    Ok(Complex64::new(0.0, 0.5 * r.powf(2.0 * s - 2.0) * m))
}

/// `M(0)` at `|x−y| = r` in closed form: `(i/2) r^{2s−2} 2^{1−2s} Γ(1−s)/Γ(s)`.
pub fn fractional_kernel_at_zero(r: f64, s: f64) -> Result<Complex64> {
    check_fractional(s, r)?;
    Ok(Complex64::new(0.0, 0.5 * r.powf(2.0 * s - 2.0) * 2f64.powf(1.0 - 2.0 * s) * gamma(1.0 - s) / gamma(s)))
}

/// Multiple of `r` beyond which `‖M(·)‖_{L^p_t}` uses the far-field form.
pub const M_FAR_FIELD: f64 = 64.0;

/// `‖M(·)(x,y)‖_{L^p_t(ℝ)}` at `|x−y| = r`.
pub fn fractional_kernel_norm(r: f64, s: f64, p: f64) -> Result<f64> {
    check_fractional(s, r)?;
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Domain("p must be finite and at least 1".into()));
    }
    if s < 0.75 && (2.0 * s - 1.5) * p <= -1.0 {
        return Err(Error::Domain("M is not p-integrable across the cone".into()));
    }
    if (2.0 - 2.0 * s) * p <= 1.0 {
        return Err(Error::Domain("M is not p-integrable at large t".into()));
    }
    let big = M_FAR_FIELD * r;
    let gl = GaussLegendre::new(GL_PER_PANEL);
    let mut acc = 0.0;
    for (a, b) in [(-big, r), (r, big)] {
        let breaks = graded_breaks(a, b, 24, r);
        for pair in breaks.windows(2) {
            for (t, w) in gl.mapped(pair[0], pair[1]) {
                acc += w * fractional_kernel_m(t, r, s)?.norm().powf(p);
            }
        }
    }
    for sign in [-1.0, 1.0] {
        for k in 0..80 {
            let (x0, x1) = (0.75 * k as f64, 0.75 * (k + 1) as f64);
            for (x, w) in gl.mapped(x0, x1) {
                let t = big * x.exp();
                acc += w * t * fractional_kernel_far(sign * t, r, s)?.norm().powf(p);
            }
        }
    }
    Ok(acc.powf(1.0 / p))
}
