//! Birman–Schwinger inversion of `U + T(λ)`, the zero-energy regularity
//! test, the perturbed resolvent via the symmetric identity, and the Born
//! series.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result, Warning};
use crate::grid::{DistanceTable, Grid2D, Lattice};
use crate::operator::{
    condition_estimate, discretize_h_on, equivalent_disk_radius, point_spectrum, FreeResolvent, Kernel,
    KernelOperator, LaplaceGreen, PotentialSpec,
};

/// Default ceiling on the condition estimate of `U + T(λ)`.
pub const CONDITION_LIMIT: f64 = 1e12;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn radial_values(kernel: &dyn Kernel, table: &DistanceTable, a: f64) -> Vec<Complex64> {
    let diag = kernel.disk_mean(a);
    table.dists.iter().map(|&r| if r == 0.0 { diag } else { kernel.radial(r).unwrap() }).collect()
}

/// `T(λ)_ij = v_i R₀(λ)(x_i, x_j) v_j`, log-class cell means on the diagonal.
pub fn build_t(lambda: f64, pot: &PotentialSpec) -> Result<KernelOperator> {
    nonzero(lambda)?;
    let g = pot.grid();
    let table = DistanceTable::new(g, g);
    let vals = radial_values(&FreeResolvent { lambda }, &table, equivalent_disk_radius(g.cell_width()));
    let v = pot.v();
    let n = g.len();
    let matrix = DMatrix::from_fn(n, n, |i, j| vals[table.idx[i * n + j] as usize] * (v[i] * v[j]));
    Ok(KernelOperator { matrix, src: g.clone(), dst: g.clone() })
}

fn nonzero(lambda: f64) -> Result<()> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be nonzero and finite, got {lambda}")));
    }
    Ok(())
}

/// `(U + T(λ))^{−1}` as an operator on the potential grid, acting on plain
/// node values.
#[derive(Debug, Clone)]
pub struct ResolventSlice {
    pub lambda: f64,
    pub ut_inverse: DMatrix<Complex64>,
    pub condition_estimate: f64,
}

/// Weighted symmetric form `S = U + W^{1/2}T W^{1/2}`; the operator
/// `U + T·W` equals `W^{−1/2} S W^{1/2}`.
fn symmetric_system(vals: &[Complex64], table: &DistanceTable, pot: &PotentialSpec) -> DMatrix<Complex64> {
    let n = pot.grid().len();
    let sv: Vec<f64> = pot.v().iter().zip(pot.grid().weights()).map(|(v, w)| v * w.sqrt()).collect();
    let u = pot.u();
    DMatrix::from_fn(n, n, |i, j| {
        let t = vals[table.idx[i * n + j] as usize] * (sv[i] * sv[j]);
        if i == j {
            t + u[i]
        } else {
            t
        }
    })
}

pub fn invert_ut(lambda: f64, pot: &PotentialSpec) -> Result<ResolventSlice> {
    nonzero(lambda)?;
    if pot.is_zero() {
        return Err(Error::ZeroPotential);
    }
    let g = pot.grid();
    let table = DistanceTable::new(g, g);
    let vals = radial_values(&FreeResolvent { lambda }, &table, equivalent_disk_radius(g.cell_width()));
    let s = symmetric_system(&vals, &table, pot);
    let s_inv = s.clone().lu().try_inverse().ok_or(Error::NearSingular { lambda, condition: f64::INFINITY })?;
    let condition = condition_estimate(&s, &s_inv);
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::NearSingular { lambda, condition });
    }
    let sw: Vec<f64> = g.weights().iter().map(|w| w.sqrt()).collect();
    let n = g.len();
    let ut_inverse = DMatrix::from_fn(n, n, |i, j| s_inv[(i, j)] * (sw[j] / sw[i]));
    Ok(ResolventSlice { lambda, ut_inverse, condition_estimate: condition })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Regular,
    Singular,
    ZeroPotential,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Regular => "regular",
            Verdict::Singular => "singular",
            Verdict::ZeroPotential => "zero_potential",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub sigma_min: f64,
    pub tol_regular: f64,
    pub norm_m: f64,
    pub verdict: Verdict,
    pub bound_state_count: usize,
    pub zero_suspects: Vec<f64>,
    pub warnings: Vec<Warning>,
}

/// Largest side of the lattice used for the discrete Hamiltonian in the
/// regularity test.
pub const HAMILTONIAN_MAX_SIDE: usize = 41;

/// `Q(U + vG₀v)Q` restricted to `{v}^⊥` in the weighted inner product,
/// symmetrised with `W^{1/2}`.
fn q_block(pot: &PotentialSpec) -> (DMatrix<f64>, f64) {
    let g = pot.grid();
    let table = DistanceTable::new(g, g);
    let vals = radial_values(&LaplaceGreen, &table, equivalent_disk_radius(g.cell_width()));
    let s = symmetric_system(&vals, &table, pot).map(|z| z.re);
    let n = s.nrows();
    let mut vhat: Vec<f64> = pot.v().iter().zip(g.weights()).map(|(v, w)| v * w.sqrt()).collect();
    let norm = vhat.iter().map(|x| x * x).sum::<f64>().sqrt();
    vhat.iter_mut().for_each(|x| *x /= norm);
    // Householder reflector H = I − 2uuᵀ with H v̂ = −sgn(v̂₀)e₁.
    let mut u = vhat.clone();
    u[0] += if vhat[0] >= 0.0 { 1.0 } else { -1.0 };
    let un = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    u.iter_mut().for_each(|x| *x /= un);
    let u = DVector::from_vec(u);
    let su = &s * &u;
    let utsu = u.dot(&su);
    // H S H = S − 2u(Su)ᵀ − 2(Su)uᵀ + 4(uᵀSu)uuᵀ
    let hsh = &s - (&u * su.transpose()) * 2.0 - (&su * u.transpose()) * 2.0 + (&u * u.transpose()) * (4.0 * utsu);
    let block = hsh.view((1, 1), (n - 1, n - 1)).into_owned();
    let norm_m = SymmetricEigen::new(s).eigenvalues.amax();
    (block, norm_m)
}

/// Eigenvalues of the `{v}^⊥` block of `U + vG₀v`.
pub fn q_block_eigenvalues(pot: &PotentialSpec) -> Result<Vec<f64>> {
    if pot.is_zero() {
        return Err(Error::ZeroPotential);
    }
    let (block, _) = q_block(pot);
    Ok(SymmetricEigen::new(block).eigenvalues.iter().copied().collect())
}

/// Lattice of the same origin and spacing class as the potential grid
/// covering twice its support, thinned to at most `HAMILTONIAN_MAX_SIDE` per
/// side, carrying the point samples of `V`.
fn hamiltonian_grid(pot: &PotentialSpec) -> Result<(Grid2D, Vec<f64>)> {
    let g = pot.grid();
    let lat = g
        .lattice()
        .ok_or_else(|| Error::Domain("regularity check needs a lattice potential grid".into()))?;
    let mut lo = [i64::MAX; 2];
    let mut hi = [i64::MIN; 2];
    for ix in &lat.index {
        for d in 0..2 {
            lo[d] = lo[d].min(ix[d]);
            hi[d] = hi[d].max(ix[d]);
        }
    }
    let c = [(lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2];
    let half = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(2);
    let side = 2 * half + 1;
    let stride = ((side as usize + HAMILTONIAN_MAX_SIDE - 1) / HAMILTONIAN_MAX_SIDE).max(1) as i64;
    let m = half / stride;
    let lookup: std::collections::HashMap<[i64; 2], f64> =
        lat.index.iter().copied().zip(pot.values().iter().copied()).collect();
    let mut index = Vec::new();
    let mut values = Vec::new();
    for j in -m..=m {
        for i in -m..=m {
            let ix = [c[0] + i * stride, c[1] + j * stride];
            index.push([i + m, j + m]);
            values.push(lookup.get(&ix).copied().unwrap_or(0.0));
        }
    }
    let h = lat.h * stride as f64;
    let origin = [
        lat.origin[0] + lat.h * (c[0] - m * stride) as f64,
        lat.origin[1] + lat.h * (c[1] - m * stride) as f64,
    ];
    Ok((Grid2D::from_lattice(Lattice { origin, h, index }), values))
}

/// Zero is regular when the `{v}^⊥` block of `U + vG₀v` has smallest
/// |eigenvalue| above `tol_regular` (default `1e−4‖U + vG₀v‖₂`) and the
/// discrete Hamiltonian shows nothing in the zero window.
pub fn regularity_check(pot: &PotentialSpec, tol_regular: Option<f64>) -> Result<RegularityReport> {
    if pot.is_zero() {
        return Ok(RegularityReport {
            sigma_min: 0.0,
            tol_regular: tol_regular.unwrap_or(0.0),
            norm_m: 0.0,
            verdict: Verdict::ZeroPotential,
            bound_state_count: 0,
            zero_suspects: Vec::new(),
            warnings: Vec::new(),
        });
    }
    let (block, norm_m) = q_block(pot);
    let sigma_min = if block.nrows() == 0 {
        f64::INFINITY
    } else {
        SymmetricEigen::new(block).eigenvalues.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()))
    };
    let tol = tol_regular.unwrap_or(1e-4 * norm_m);
    let (hgrid, hv) = hamiltonian_grid(pot)?;
    let hmat = discretize_h_on(&hgrid, &hv)?;
    let spec = point_spectrum(&hmat, &hgrid, crate::operator::default_tol_zero(&hmat))?;
    let warnings = spec.zero_suspects.iter().map(|&e| Warning::ZeroSuspect { eigenvalue: e }).collect();
    let verdict = if sigma_min > tol && spec.zero_suspects.is_empty() { Verdict::Regular } else { Verdict::Singular };
    Ok(RegularityReport {
        sigma_min,
        tol_regular: tol,
        norm_m,
        verdict,
        bound_state_count: spec.bound_state_count(),
        zero_suspects: spec.zero_suspects,
        warnings,
    })
}

/// First coupling `β ∈ (0, beta_max]` at which an eigenvalue of the
/// `{v}^⊥` block of `U + vG₀v` for `V_β = −β·bump` passes through zero,
/// located by a scan of `n_scan` points and bisection.
pub fn coupling_threshold(bump: &PotentialSpec, beta_max: f64, n_scan: usize) -> Result<Option<f64>> {
    if bump.is_zero() {
        return Err(Error::ZeroPotential);
    }
    if !(beta_max > 0.0) || n_scan < 2 {
        return Err(Error::Domain("need beta_max > 0 and at least two scan points".into()));
    }
    let inertia = |beta: f64| -> Result<usize> {
        let ev = q_block_eigenvalues(&bump.scaled(-beta))?;
        Ok(ev.iter().filter(|&&e| e > 0.0).count())
    };
    let mut prev_beta = beta_max / n_scan as f64;
    let mut prev = inertia(prev_beta)?;
    for k in 2..=n_scan {
        let beta = beta_max * k as f64 / n_scan as f64;
        let cur = inertia(beta)?;
        if cur != prev {
            let (mut a, mut b) = (prev_beta, beta);
            for _ in 0..40 {
                let m = 0.5 * (a + b);
                if inertia(m)? == prev {
                    a = m;
                } else {
                    b = m;
                }
                if b - a < 1e-10 * b {
                    break;
                }
            }
            return Ok(Some(0.5 * (a + b)));
        }
        prev = cur;
        prev_beta = beta;
    }
    Ok(None)
}

/// Reusable evaluator of `R_V((λ+i0)²)` between a source grid and an
/// observation grid, sharing distance tables across λ.
#[derive(Debug, Clone)]
pub struct ResolventEngine {
    pot: PotentialSpec,
    src: Grid2D,
    obs: Grid2D,
    free: DistanceTable,
    ps: Option<DistanceTable>,
    op: Option<DistanceTable>,
    pp: Option<DistanceTable>,
    a_src: f64,
    a_pot: f64,
    condition_limit: f64,
}

/// One frequency of the engine: the factored system plus the kernel values
/// it was built from.
struct Factored {
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    sv: Vec<f64>,
    ps_vals: Vec<Complex64>,
    op_vals: Vec<Complex64>,
    condition: f64,
}

impl ResolventEngine {
    pub fn new(pot: &PotentialSpec, src: &Grid2D, obs: &Grid2D) -> Self {
        let free = DistanceTable::new(obs, src);
        let (ps, op, pp) = if pot.is_zero() {
            (None, None, None)
        } else {
            let g = pot.grid();
            (Some(DistanceTable::new(g, src)), Some(DistanceTable::new(obs, g)), Some(DistanceTable::new(g, g)))
        };
        Self {
            pot: pot.clone(),
            src: src.clone(),
            obs: obs.clone(),
            free,
            ps,
            op,
            pp,
            a_src: equivalent_disk_radius(src.cell_width()),
            a_pot: equivalent_disk_radius(pot.grid().cell_width()),
            condition_limit: CONDITION_LIMIT,
        }
    }

    pub fn with_condition_limit(mut self, limit: f64) -> Self {
        self.condition_limit = limit;
        self
    }

    pub fn src(&self) -> &Grid2D {
        &self.src
    }

    pub fn obs(&self) -> &Grid2D {
        &self.obs
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.pot
    }

    fn factor(&self, lambda: f64) -> Result<Option<Factored>> {
        let (Some(ps), Some(op), Some(pp)) = (&self.ps, &self.op, &self.pp) else { return Ok(None) };
        let k = FreeResolvent { lambda };
        let pp_vals = radial_values(&k, pp, self.a_pot);
        let s = symmetric_system(&pp_vals, pp, &self.pot);
        let lu = s.clone().lu();
        let condition = estimate_condition(&s, &lu)
            .ok_or(Error::NearSingular { lambda, condition: f64::INFINITY })?;
        if !condition.is_finite() || condition > self.condition_limit {
            return Err(Error::NearSingular { lambda, condition });
        }
        let sv = self.pot.v().iter().zip(self.pot.grid().weights()).map(|(v, w)| v * w.sqrt()).collect();
        Ok(Some(Factored {
            lu,
            sv,
            ps_vals: radial_values(&k, ps, self.a_src),
            op_vals: radial_values(&k, op, self.a_pot),
            condition,
        }))
    }

    /// Scattered part `R₀v(U+T)^{−1}vR₀ f` on the observation grid.
    fn correction(&self, fac: &Factored, wf: &[f64]) -> Result<Vec<Complex64>> {
        let ps = self.ps.as_ref().unwrap();
        let op = self.op.as_ref().unwrap();
        let np = self.pot.grid().len();
        let ns = self.src.len();
        // b = W^{1/2} v R₀ f
        let mut b = DVector::from_element(np, ZERO);
        for i in 0..np {
            let row = &ps.idx[i * ns..(i + 1) * ns];
            let mut acc = ZERO;
            for (k, &u) in row.iter().enumerate() {
                if wf[k] != 0.0 {
                    acc += fac.ps_vals[u as usize] * wf[k];
                }
            }
            b[i] = acc * fac.sv[i];
        }
        let z = fac.lu.solve(&b).ok_or_else(|| Error::Numeric("singular factorisation".into()))?;
        let coef: Vec<Complex64> = (0..np).map(|i| z[i] * fac.sv[i]).collect();
        let no = self.obs.len();
        let mut out = vec![ZERO; no];
        for (m, o) in out.iter_mut().enumerate() {
            let row = &op.idx[m * np..(m + 1) * np];
            let mut acc = ZERO;
            for (i, &u) in row.iter().enumerate() {
                acc += fac.op_vals[u as usize] * coef[i];
            }
            *o = acc;
        }
        Ok(out)
    }

    fn weighted(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.src.len() {
            return Err(Error::Domain("field length does not match the source grid".into()));
        }
        Ok(f.iter().zip(self.src.weights()).map(|(a, w)| a * w).collect())
    }

    /// `R_V((λ+i0)²) f` on the observation grid.
    pub fn apply(&self, lambda: f64, f: &[f64]) -> Result<Vec<Complex64>> {
        nonzero(lambda)?;
        let wf = self.weighted(f)?;
        let vals = radial_values(&FreeResolvent { lambda }, &self.free, self.a_src);
        let ns = self.src.len();
        let mut out: Vec<Complex64> = (0..self.obs.len())
            .map(|m| {
                let row = &self.free.idx[m * ns..(m + 1) * ns];
                let mut acc = ZERO;
                for (k, &u) in row.iter().enumerate() {
                    acc += vals[u as usize] * wf[k];
                }
                acc
            })
            .collect();
        if let Some(fac) = self.factor(lambda)? {
            for (o, c) in out.iter_mut().zip(self.correction(&fac, &wf)?) {
                *o -= c;
            }
        }
        Ok(out)
    }

    /// `Im R_V((λ+i0)²) f` for real `f`, with the condition estimate of the
    /// solve (1 when `V = 0`).
    pub fn apply_imag(&self, lambda: f64, f: &[f64]) -> Result<(Vec<f64>, f64)> {
        nonzero(lambda)?;
        let wf = self.weighted(f)?;
        let diag = FreeResolvent { lambda }.disk_mean(self.a_src).im;
        let la = lambda.abs();
        let sign = lambda.signum();
        let vals: Vec<f64> = self
            .free
            .dists
            .iter()
            .map(|&r| if r == 0.0 { diag } else { sign * 0.25 * crate::specfun::j0_unchecked(la * r) })
            .collect();
        let ns = self.src.len();
        let mut out: Vec<f64> = (0..self.obs.len())
            .map(|m| {
                let row = &self.free.idx[m * ns..(m + 1) * ns];
                let mut acc = 0.0;
                for (k, &u) in row.iter().enumerate() {
                    acc += vals[u as usize] * wf[k];
                }
                acc
            })
            .collect();
        let mut condition = 1.0;
        if let Some(fac) = self.factor(lambda)? {
            condition = fac.condition;
            for (o, c) in out.iter_mut().zip(self.correction(&fac, &wf)?) {
                *o -= c.im;
            }
        }
        Ok((out, condition))
    }

    /// Kernel matrix `R_V((λ+i0)²)(x_m, y_k)` (observation × source).
    pub fn kernel(&self, lambda: f64) -> Result<DMatrix<Complex64>> {
        nonzero(lambda)?;
        let vals = radial_values(&FreeResolvent { lambda }, &self.free, self.a_src);
        let (no, ns) = (self.obs.len(), self.src.len());
        let mut k = DMatrix::from_fn(no, ns, |m, j| vals[self.free.idx[m * ns + j] as usize]);
        if let Some(fac) = self.factor(lambda)? {
            let ps = self.ps.as_ref().unwrap();
            let op = self.op.as_ref().unwrap();
            let np = self.pot.grid().len();
            let b = DMatrix::from_fn(np, ns, |i, j| fac.ps_vals[ps.idx[i * ns + j] as usize] * fac.sv[i]);
            let mut z = b;
            if !fac.lu.solve_mut(&mut z) {
                return Err(Error::Numeric("singular factorisation".into()));
            }
            for i in 0..np {
                let s = fac.sv[i];
                z.row_mut(i).iter_mut().for_each(|x| *x *= s);
            }
            let a = DMatrix::from_fn(no, np, |m, i| fac.op_vals[op.idx[m * np + i] as usize]);
            k -= a * z;
        }
        Ok(k)
    }
}

/// Hager's 1-norm estimate of `‖S‖₁‖S^{−1}‖₁` for complex symmetric `S`.
fn estimate_condition(
    s: &DMatrix<Complex64>,
    lu: &nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
) -> Option<f64> {
    let n = s.nrows();
    let norm_s = s
        .column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut x = DVector::from_element(n, Complex64::new(1.0 / n as f64, 0.0));
    let mut est = 0.0;
    for _ in 0..5 {
        let y = lu.solve(&x)?;
        est = y.iter().map(|z| z.norm()).sum::<f64>();
        let xi = y.map(|z| if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) });
        // S^{−H}ξ = conj(S^{−1} conj ξ) since Sᵀ = S.
        let z = lu.solve(&xi.map(|c| c.conj()))?.map(|c| c.conj());
        let (j, zmax) = z.iter().enumerate().fold((0, 0.0), |b, (k, c)| if c.norm() > b.1 { (k, c.norm()) } else { b });
        let ztx: f64 = z.iter().zip(x.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        if zmax <= ztx {
            break;
        }
        x = DVector::from_element(n, ZERO);
        x[j] = Complex64::new(1.0, 0.0);
    }
    Some(norm_s * est)
}

/// `R_V((λ+i0)²) f` through the symmetric resolvent identity.
pub fn apply_rv(lambda: f64, pot: &PotentialSpec, src: &Grid2D, f: &[f64], obs: &Grid2D) -> Result<Vec<Complex64>> {
    ResolventEngine::new(pot, src, obs).apply(lambda, f)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BornReport {
    pub field: Vec<Complex64>,
    /// `‖term_n‖ / ‖term_{n−1}‖` on the potential grid, n ≥ 1.
    pub ratios: Vec<f64>,
    pub diverged: bool,
}

/// Partial sum `Σ_{n ≤ n_terms} R₀(−VR₀)ⁿ f` on the observation grid.
pub fn born_series_rv(
    lambda: f64,
    pot: &PotentialSpec,
    src: &Grid2D,
    f: &[f64],
    obs: &Grid2D,
    n_terms: usize,
) -> Result<BornReport> {
    nonzero(lambda)?;
    let engine = ResolventEngine::new(&PotentialSpec::new(src.clone(), vec![0.0; src.len()])?, src, obs);
    let mut field = engine.apply(lambda, f)?;
    let mut ratios = Vec::new();
    if n_terms == 0 || pot.is_zero() {
        return Ok(BornReport { field, ratios, diverged: false });
    }
    let g = pot.grid();
    let k = FreeResolvent { lambda };
    let ps = DistanceTable::new(g, src);
    let pp = DistanceTable::new(g, g);
    let op = DistanceTable::new(obs, g);
    let ps_vals = radial_values(&k, &ps, equivalent_disk_radius(src.cell_width()));
    let a = equivalent_disk_radius(g.cell_width());
    let pp_vals = radial_values(&k, &pp, a);
    let op_vals = radial_values(&k, &op, a);
    let (np, ns) = (g.len(), src.len());
    let wf: Vec<f64> = f.iter().zip(src.weights()).map(|(x, w)| x * w).collect();
    let mut term: Vec<Complex64> = (0..np)
        .map(|i| (0..ns).map(|j| ps_vals[ps.idx[i * ns + j] as usize] * wf[j]).sum())
        .collect();
    let wv: Vec<f64> = pot.values().iter().zip(g.weights()).map(|(v, w)| -v * w).collect();
    let norm = |x: &[Complex64]| x.iter().zip(g.weights()).map(|(z, w)| z.norm_sqr() * w).sum::<f64>().sqrt();
    let mut prev_norm = norm(&term);
    let mut diverged = false;
    for _ in 0..n_terms {
        let src_term: Vec<Complex64> = term.iter().zip(&wv).map(|(z, w)| z * w).collect();
        for (m, o) in field.iter_mut().enumerate() {
            let mut acc = ZERO;
            for i in 0..np {
                acc += op_vals[op.idx[m * np + i] as usize] * src_term[i];
            }
            *o += acc;
        }
        let next: Vec<Complex64> = (0..np)
            .map(|i| (0..np).map(|j| pp_vals[pp.idx[i * np + j] as usize] * src_term[j]).sum())
            .collect();
        let nn = norm(&next);
        let ratio = if prev_norm > 0.0 { nn / prev_norm } else { 0.0 };
        diverged |= ratio > 1.0;
        ratios.push(ratio);
        prev_norm = nn;
        term = next;
    }
    Ok(BornReport { field, ratios, diverged })
}
