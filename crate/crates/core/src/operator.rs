//! Dense kernel operators with weakly singular diagonals, sampled potentials,
//! Feshbach block inversion and the discrete Hamiltonian.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result, Warning};
use crate::freewave::free_kernel_unchecked;
use crate::grid::{make_grid, DistanceTable, Grid2D, Lattice, LatticeInterpolator};
use crate::specfun::hankel0_plus_disk_mean;

/// Condition numbers above this are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e13;

/// Behaviour of a kernel as `|x − y| → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityClass {
    None,
    /// `−log|x − y|`
    Log,
    /// `|x − y|^{−1/2}`
    InvSqrt,
    /// `−log|x − y|·|x − y|^{−1/2}`
    LogInvSqrt,
}

impl SingularityClass {
    /// Mean of the unit-strength model singularity over a disk of radius `a`.
    pub fn unit_disk_mean(self, a: f64) -> f64 {
        match self {
            SingularityClass::None => 0.0,
            SingularityClass::Log => 0.5 - a.ln(),
            SingularityClass::InvSqrt => 4.0 / 3.0 / a.sqrt(),
            SingularityClass::LogInvSqrt => (-4.0 / 3.0 * a.ln() + 8.0 / 9.0) / a.sqrt(),
        }
    }
}

/// Radius of the disk with the same area as a square cell of width `h`.
pub fn equivalent_disk_radius(h: f64) -> f64 {
    h / PI.sqrt()
}

pub trait Kernel: Sync {
    fn eval(&self, x: [f64; 2], y: [f64; 2]) -> Complex64;

    fn class(&self) -> SingularityClass;

    /// Profile in `r = |x − y|` for translation- and rotation-invariant kernels.
    fn radial(&self, _r: f64) -> Option<Complex64> {
        None
    }

    /// Mean over a disk of radius `a` centred on the singular point. The
    /// default assumes the kernel is exactly the unit model singularity.
    fn disk_mean(&self, a: f64) -> Complex64 {
        Complex64::new(self.class().unit_disk_mean(a), 0.0)
    }
}

/// `G₀(x, y) = −(1/2π)log|x − y|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LaplaceGreen;

impl Kernel for LaplaceGreen {
    fn eval(&self, x: [f64; 2], y: [f64; 2]) -> Complex64 {
        self.radial((x[0] - y[0]).hypot(x[1] - y[1])).unwrap()
    }

    fn class(&self) -> SingularityClass {
        SingularityClass::Log
    }

    fn radial(&self, r: f64) -> Option<Complex64> {
        Some(Complex64::new(-r.ln() / (2.0 * PI), 0.0))
    }

    fn disk_mean(&self, a: f64) -> Complex64 {
        Complex64::new((0.5 - a.ln()) / (2.0 * PI), 0.0)
    }
}

/// `R₀((λ+i0)²)(x, y)`.
#[derive(Debug, Clone, Copy)]
pub struct FreeResolvent {
    pub lambda: f64,
}

impl Kernel for FreeResolvent {
    fn eval(&self, x: [f64; 2], y: [f64; 2]) -> Complex64 {
        self.radial((x[0] - y[0]).hypot(x[1] - y[1])).unwrap()
    }

    fn class(&self) -> SingularityClass {
        SingularityClass::Log
    }

    fn radial(&self, r: f64) -> Option<Complex64> {
        Some(free_kernel_unchecked(self.lambda, r))
    }

    /// Only the `Y₀` part is averaged; the smooth `J₀` part keeps its point
    /// value so that lattice sums against smooth data stay spectrally accurate.
    fn disk_mean(&self, a: f64) -> Complex64 {
        let y = hankel0_plus_disk_mean(self.lambda.abs(), a).im;
        let m = Complex64::new(0.0, 0.25) * Complex64::new(1.0, y);
        if self.lambda < 0.0 {
            m.conj()
        } else {
            m
        }
    }
}

/// A radial kernel given by a closure, with the declared singularity being
/// exactly the unit model one.
pub struct RadialFn<F> {
    pub profile: F,
    pub class: SingularityClass,
}

impl<F: Fn(f64) -> Complex64 + Sync> Kernel for RadialFn<F> {
    fn eval(&self, x: [f64; 2], y: [f64; 2]) -> Complex64 {
        (self.profile)((x[0] - y[0]).hypot(x[1] - y[1]))
    }

    fn class(&self) -> SingularityClass {
        self.class
    }

    fn radial(&self, r: f64) -> Option<Complex64> {
        Some((self.profile)(r))
    }

    fn disk_mean(&self, a: f64) -> Complex64 {
        match self.class {
            SingularityClass::None => (self.profile)(0.0),
            c => Complex64::new(c.unit_disk_mean(a), 0.0),
        }
    }
}

/// Dense matrix of a kernel between two grids, applied as
/// `(Af)_i = Σ_j A_ij w_j f_j` with the source weights.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    pub matrix: DMatrix<Complex64>,
    pub src: Grid2D,
    pub dst: Grid2D,
}

impl KernelOperator {
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let w = self.src.weights();
        let mut out = vec![Complex64::new(0.0, 0.0); self.dst.len()];
        for (j, col) in self.matrix.column_iter().enumerate() {
            let c = f[j] * w[j];
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, a) in out.iter_mut().zip(col.iter()) {
                *o += a * c;
            }
        }
        out
    }

    pub fn apply_real(&self, f: &[f64]) -> Vec<Complex64> {
        let fc: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.apply(&fc)
    }

    /// `max_ij |A_ij − A_ji|` for square operators.
    pub fn asymmetry(&self) -> f64 {
        let a = &self.matrix;
        let mut m = 0.0f64;
        for i in 0..a.nrows() {
            for j in 0..i {
                m = m.max((a[(i, j)] - a[(j, i)]).norm());
            }
        }
        m
    }
}

/// Off-diagonal entries are point values; coincident nodes get the
/// equivalent-disk cell mean of the kernel.
pub fn assemble_operator(kernel: &dyn Kernel, src: &Grid2D, dst: &Grid2D) -> Result<KernelOperator> {
    let a = equivalent_disk_radius(src.cell_width());
    let (rows, cols) = (dst.len(), src.len());
    let diag = match kernel.class() {
        SingularityClass::None => None,
        _ => Some(kernel.disk_mean(a)),
    };
    let mut matrix = DMatrix::from_element(rows, cols, Complex64::new(0.0, 0.0));
    if kernel.radial(1.0).is_some() {
        let table = DistanceTable::new(dst, src);
        let values: Vec<Complex64> = table
            .dists
            .iter()
            .map(|&r| match (r == 0.0, diag) {
                (true, Some(d)) => d,
                _ => kernel.radial(r).unwrap(),
            })
            .collect();
        for i in 0..rows {
            for j in 0..cols {
                let u = table.idx[i * cols + j] as usize;
                let v = values[u];
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::Assembly { row: i, col: j });
                }
                matrix[(i, j)] = v;
            }
        }
    } else {
        for (i, &x) in dst.nodes().iter().enumerate() {
            for (j, &y) in src.nodes().iter().enumerate() {
                let v = match (x == y, diag) {
                    (true, Some(d)) => d,
                    _ => kernel.eval(x, y),
                };
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::Assembly { row: i, col: j });
                }
                matrix[(i, j)] = v;
            }
        }
    }
    Ok(KernelOperator { matrix, src: src.clone(), dst: dst.clone() })
}

/// Sampled potential with its Birman–Schwinger factors and norms.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    grid: Grid2D,
    values: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    l1_norm: f64,
    weighted_l1: [f64; 3],
    kato_half: f64,
    kato_log: f64,
}

impl PotentialSpec {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain("potential length does not match grid".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("potential has non-finite samples".into()));
        }
        let u = values.iter().map(|&x| if x < 0.0 { -1.0 } else { 1.0 }).collect();
        let v = values.iter().map(|x| x.abs().sqrt()).collect();
        let w = grid.weights();
        let l1_norm = values.iter().zip(w).map(|(x, w)| x.abs() * w).sum();
        let mut weighted_l1 = [0.0; 3];
        for (k, slot) in weighted_l1.iter_mut().enumerate() {
            let power = (k + 2) as i32;
            *slot = values
                .iter()
                .zip(w)
                .zip(grid.nodes())
                .map(|((x, w), p)| x.abs() * w * log_weight(*p).powi(power))
                .sum();
        }
        let abs: Vec<f64> = values.iter().map(|x| x.abs()).collect();
        let (kato_half, kato_log) = kato_tilde_pair(&grid, &abs);
        Ok(Self { grid, values, u, v, l1_norm, weighted_l1, kato_half, kato_log })
    }

    /// Samples `f` on the lattice of spacing `h` centred at the origin and
    /// keeps the nodes where `|V| ≥ rel_cutoff·max|V|`.
    pub fn sampled<F: Fn([f64; 2]) -> f64>(half_width: f64, h: f64, f: F, rel_cutoff: f64) -> Result<Self> {
        let full = Grid2D::centered_lattice(half_width, h)?;
        let values = full.sample(&f);
        let vmax = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if vmax == 0.0 {
            return Self::new(full, values);
        }
        let keep: Vec<usize> = (0..values.len()).filter(|&k| values[k].abs() >= rel_cutoff * vmax).collect();
        let grid = full.select(&keep);
        let values = keep.iter().map(|&k| values[k]).collect();
        Self::new(grid, values)
    }

    /// `c·V` on the same grid; norms scale by `|c|`.
    pub fn scaled(&self, c: f64) -> Self {
        let values: Vec<f64> = self.values.iter().map(|x| c * x).collect();
        let u = values.iter().map(|&x| if x < 0.0 { -1.0 } else { 1.0 }).collect();
        let v = values.iter().map(|x| x.abs().sqrt()).collect();
        let a = c.abs();
        Self {
            grid: self.grid.clone(),
            values,
            u,
            v,
            l1_norm: a * self.l1_norm,
            weighted_l1: self.weighted_l1.map(|x| a * x),
            kato_half: a * self.kato_half,
            kato_log: a * self.kato_log,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    /// `‖(1 + log₊|x|)^k V‖₁` for k = 2, 3, 4.
    pub fn weighted_l1(&self) -> [f64; 3] {
        self.weighted_l1
    }

    pub fn kato_half(&self) -> f64 {
        self.kato_half
    }

    pub fn kato_log(&self) -> f64 {
        self.kato_log
    }

    pub fn is_zero(&self) -> bool {
        self.l1_norm == 0.0
    }
}

/// `1 + log₊|x|`.
pub fn log_weight(p: [f64; 2]) -> f64 {
    1.0 + p[0].hypot(p[1]).ln().max(0.0)
}

/// Candidate points for Kato-type suprema: nodes plus cell midpoints.
pub(crate) fn kato_candidates(grid: &Grid2D) -> Vec<([f64; 2], bool)> {
    let mut out: Vec<([f64; 2], bool)> = grid.nodes().iter().map(|&p| (p, true)).collect();
    let h = grid.cell_width();
    if grid.lattice().is_some() {
        for &p in grid.nodes() {
            for off in [[0.5, 0.0], [0.0, 0.5], [0.5, 0.5]] {
                out.push(([p[0] + off[0] * h, p[1] + off[1] * h], false));
            }
        }
    }
    out
}

/// `sup_y ∫_{|x−y|≤1} f |x−y|^{−1/2}` and the same with `log_−|x−y|` inserted.
pub(crate) fn kato_tilde_pair(grid: &Grid2D, f: &[f64]) -> (f64, f64) {
    if f.iter().all(|&x| x == 0.0) {
        return (0.0, 0.0);
    }
    let a = equivalent_disk_radius(grid.cell_width());
    let mean_half = SingularityClass::InvSqrt.unit_disk_mean(a);
    let mean_log = SingularityClass::LogInvSqrt.unit_disk_mean(a);
    let w = grid.weights();
    let support: Vec<usize> = (0..f.len()).filter(|&k| f[k] != 0.0).collect();
    let mut best = (0.0f64, 0.0f64);
    for (y, on_node) in kato_candidates(grid) {
        let mut s_half = 0.0;
        let mut s_log = 0.0;
        for &k in &support {
            let x = grid.nodes()[k];
            let r = (x[0] - y[0]).hypot(x[1] - y[1]);
            if r > 1.0 {
                continue;
            }
            let m = f[k] * w[k];
            if on_node && r == 0.0 {
                s_half += m * mean_half;
                s_log += m * mean_log;
            } else {
                let s = 1.0 / r.sqrt();
                s_half += m * s;
                s_log += m * (-r.ln()) * s;
            }
        }
        best.0 = best.0.max(s_half);
        best.1 = best.1.max(s_log);
    }
    best
}

/// Rank-one projector onto `v` in the weighted inner product, and its complement.
#[derive(Debug, Clone)]
pub struct BlockSplit {
    pub p: DMatrix<f64>,
    pub q: DMatrix<f64>,
}

impl BlockSplit {
    pub fn new(pot: &PotentialSpec) -> Result<Self> {
        if pot.is_zero() {
            return Err(Error::ZeroPotential);
        }
        let n = pot.v.len();
        let w = pot.grid.weights();
        let p = DMatrix::from_fn(n, n, |i, j| pot.v[i] * pot.v[j] * w[j] / pot.l1_norm);
        let q = DMatrix::identity(n, n) - &p;
        Ok(Self { p, q })
    }
}

fn norm1<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `‖M‖₁‖M⁻¹‖₁`.
pub fn condition_estimate<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, inv: &DMatrix<T>) -> f64 {
    norm1(m) * norm1(inv)
}

/// LU inverse with its condition estimate; `None` when singular to working precision.
pub fn checked_inverse<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Option<(DMatrix<T>, f64)> {
    let inv = m.clone().lu().try_inverse()?;
    let cond = condition_estimate(m, &inv);
    if !cond.is_finite() || cond > SINGULAR_CONDITION {
        return None;
    }
    Some((inv, cond))
}

/// Block inverse through the Schur complement `C = L₁₁ − L₁₀L₀₀⁻¹L₀₁`.
pub fn feshbach_invert<T: ComplexField<RealField = f64>>(
    l00: &DMatrix<T>,
    l01: &DMatrix<T>,
    l10: &DMatrix<T>,
    l11: &DMatrix<T>,
) -> Result<DMatrix<T>> {
    let n0 = l00.nrows();
    let n1 = l11.nrows();
    if l00.ncols() != n0
        || l11.ncols() != n1
        || l01.shape() != (n0, n1)
        || l10.shape() != (n1, n0)
    {
        return Err(Error::Domain("inconsistent block shapes".into()));
    }
    let (a, _) = checked_inverse(l00).ok_or(Error::FeshbachL00Singular)?;
    let a01 = &a * l01;
    let l10a = l10 * &a;
    let c = l11 - l10 * &a01;
    let (ci, _) = checked_inverse(&c).ok_or(Error::FeshbachSchurSingular)?;
    let ci_l10a = &ci * &l10a;
    let top_left = &a + &a01 * &ci_l10a;
    let top_right = -(&a01 * &ci);
    let bottom_left = -ci_l10a;
    let mut out = DMatrix::zeros(n0 + n1, n0 + n1);
    out.view_mut((0, 0), (n0, n0)).copy_from(&top_left);
    out.view_mut((0, n0), (n0, n1)).copy_from(&top_right);
    out.view_mut((n0, 0), (n1, n0)).copy_from(&bottom_left);
    out.view_mut((n0, n0), (n1, n1)).copy_from(&ci);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Dirichlet,
    /// Wraps around the bounding rectangle of the lattice indices; the grid
    /// must fill that rectangle.
    Periodic,
}

/// Five-point `−Δ_h` on a lattice grid.
pub fn lattice_laplacian(grid: &Grid2D, boundary: Boundary) -> Result<DMatrix<f64>> {
    let lat = grid
        .lattice()
        .ok_or_else(|| Error::Domain("the Laplacian needs a lattice grid".into()))?;
    let n = lat.index.len();
    let h2 = lat.h * lat.h;
    let map: HashMap<[i64; 2], usize> = lat.index.iter().enumerate().map(|(k, &ix)| (ix, k)).collect();
    let (lo, hi) = index_box(lat);
    let (nx, ny) = (hi[0] - lo[0] + 1, hi[1] - lo[1] + 1);
    if boundary == Boundary::Periodic && (nx * ny) as usize != n {
        return Err(Error::Domain("periodic Laplacian needs a full rectangle".into()));
    }
    let mut m = DMatrix::zeros(n, n);
    for (k, &[i, j]) in lat.index.iter().enumerate() {
        m[(k, k)] = 4.0 / h2;
        for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let mut key = [i + di, j + dj];
            if boundary == Boundary::Periodic {
                key = [lo[0] + (key[0] - lo[0]).rem_euclid(nx), lo[1] + (key[1] - lo[1]).rem_euclid(ny)];
            }
            if let Some(&l) = map.get(&key) {
                m[(k, l)] -= 1.0 / h2;
            }
        }
    }
    Ok(m)
}

fn index_box(lat: &Lattice) -> ([i64; 2], [i64; 2]) {
    let mut lo = [i64::MAX; 2];
    let mut hi = [i64::MIN; 2];
    for ix in &lat.index {
        for d in 0..2 {
            lo[d] = lo[d].min(ix[d]);
            hi[d] = hi[d].max(ix[d]);
        }
    }
    (lo, hi)
}

/// `−Δ_h + V` with Dirichlet truncation at the grid boundary.
pub fn discretize_h(pot: &PotentialSpec) -> Result<DMatrix<f64>> {
    discretize_h_on(&pot.grid, &pot.values)
}

pub fn discretize_h_on(grid: &Grid2D, v: &[f64]) -> Result<DMatrix<f64>> {
    if v.len() != grid.len() {
        return Err(Error::Domain("potential length does not match grid".into()));
    }
    let mut m = lattice_laplacian(grid, Boundary::Dirichlet)?;
    for (k, &x) in v.iter().enumerate() {
        m[(k, k)] += x;
    }
    Ok(m)
}

/// Eigen-data of a discrete Hamiltonian: the full spectrum, bound states
/// normalised in the weighted inner product, and eigenvalues in the zero window.
#[derive(Debug, Clone)]
pub struct SpectrumData {
    pub eigenvalues: Vec<f64>,
    pub bound_values: Vec<f64>,
    pub bound_vectors: Vec<Vec<f64>>,
    pub zero_suspects: Vec<f64>,
    pub tol_zero: f64,
    pub weights: Vec<f64>,
}

impl SpectrumData {
    pub fn bound_state_count(&self) -> usize {
        self.bound_values.len()
    }
}

/// `1e−6·max|H_ij|`.
pub fn default_tol_zero(hmat: &DMatrix<f64>) -> f64 {
    1e-6 * hmat.amax()
}

pub fn point_spectrum(hmat: &DMatrix<f64>, grid: &Grid2D, tol_zero: f64) -> Result<SpectrumData> {
    let n = hmat.nrows();
    if hmat.ncols() != n || grid.len() != n {
        return Err(Error::Domain("matrix and grid sizes differ".into()));
    }
    if !(tol_zero > 0.0) {
        return Err(Error::Domain("tol_zero must be positive".into()));
    }
    let w = grid.weights();
    let sw: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    // S = W^{1/2} H W^{−1/2}, symmetrised against round-off.
    let s = DMatrix::from_fn(n, n, |i, j| {
        0.5 * (sw[i] * hmat[(i, j)] / sw[j] + sw[j] * hmat[(j, i)] / sw[i])
    });
    let eig = SymmetricEigen::try_new(s, 1e-15, 100 * n.max(10))
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut bound_values = Vec::new();
    let mut bound_vectors = Vec::new();
    let mut zero_suspects = Vec::new();
    for &k in &order {
        let e = eig.eigenvalues[k];
        if e < -tol_zero {
            bound_values.push(e);
            bound_vectors.push((0..n).map(|i| eig.eigenvectors[(i, k)] / sw[i]).collect());
        } else if e <= tol_zero {
            zero_suspects.push(e);
        }
    }
    Ok(SpectrumData { eigenvalues, bound_values, bound_vectors, zero_suspects, tol_zero, weights: w.to_vec() })
}

/// `f − Σ_k ⟨f, φ_k⟩φ_k` over the bound states.
pub fn project_continuous(f: &[f64], spec: &SpectrumData) -> Vec<f64> {
    let mut out = f.to_vec();
    for phi in &spec.bound_vectors {
        let c: f64 = f.iter().zip(phi).zip(&spec.weights).map(|((a, b), w)| a * b * w).sum();
        for (o, p) in out.iter_mut().zip(phi) {
            *o -= c * p;
        }
    }
    out
}

/// One grid size of `fractional_power_bound_check`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalPowerRow {
    pub n_per_side: usize,
    pub lambda0: f64,
    /// Induced L¹ norm via eigendecompositions.
    pub norm_spectral: f64,
    /// Induced L¹ norm via the double-integral representation, when computed.
    pub norm_quadrature: Option<f64>,
    /// `max|A − B| / max|A|` between the two operators.
    pub agreement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalPowerReport {
    pub alpha: f64,
    pub beta: f64,
    pub rows: Vec<FractionalPowerRow>,
    pub warnings: Vec<Warning>,
}

/// Induced `L¹ → L¹` norm of `(H + λ₀)^α(−Δ + 1)^{−β}` on uniform grids of
/// the given sizes covering the potential's grid. The spectral route is
/// always taken; the quadrature route of
/// `c_α c_β ∫∫ λ^{α−1}μ^{−β}(H+λ₀)(H+λ₀+λ)^{−1}(−Δ+1+μ)^{−1} dλ dμ` only for
/// sizes up to `quadrature_max_n`.
pub fn fractional_power_bound_check(
    pot: &PotentialSpec,
    alpha: f64,
    beta: f64,
    sizes: &[usize],
    quadrature_max_n: usize,
) -> Result<FractionalPowerReport> {
    if !(0.0..1.0).contains(&alpha) || !(beta > alpha && beta < 1.0) {
        return Err(Error::Domain(format!("need 0 ≤ alpha < beta < 1, got ({alpha}, {beta})")));
    }
    let half_width = pot.grid.bounding_radius();
    let interp = if pot.grid.lattice().is_some() {
        Some(LatticeInterpolator::new(&pot.grid, &pot.values)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for &n in sizes {
        let grid = make_grid(half_width, n)?;
        let v: Vec<f64> = match &interp {
            Some(it) => grid.nodes().iter().map(|&p| it.eval(p)).collect(),
            None => grid.nodes().iter().map(|&p| pot.values[pot.grid.nearest(p)]).collect(),
        };
        let lap = lattice_laplacian(&grid, Boundary::Dirichlet)?;
        let mut h = lap.clone();
        for (k, x) in v.iter().enumerate() {
            h[(k, k)] += x;
        }
        let lambda0 = choose_shift(&lap, &v)?;
        if lambda0 > 1.0 {
            warnings.push(Warning::PotentialShift { lambda0 });
        }
        let dim = grid.len();
        let shifted = &h + DMatrix::identity(dim, dim) * lambda0;
        let b = &lap + DMatrix::identity(dim, dim);
        let spectral = matrix_power(&shifted, alpha)? * matrix_power(&b, -beta)?;
        let norm_spectral = norm1(&spectral);
        let (norm_quadrature, agreement) = if n <= quadrature_max_n {
            let q = power_by_quadrature(&shifted, alpha)? * inverse_power_by_quadrature(&b, beta)?;
            let diff = (&q - &spectral).amax() / spectral.amax();
            (Some(norm1(&q)), Some(diff))
        } else {
            (None, None)
        };
        rows.push(FractionalPowerRow { n_per_side: n, lambda0, norm_spectral, norm_quadrature, agreement });
    }
    Ok(FractionalPowerReport { alpha, beta, rows, warnings })
}

/// Smallest `λ₀ = 2^k ≥ 1` with `‖V(−Δ_h + λ₀)^{−1}‖_{L¹→L¹} ≤ 1/2`.
fn choose_shift(lap: &DMatrix<f64>, v: &[f64]) -> Result<f64> {
    let n = lap.nrows();
    let mut lambda0 = 1.0;
    for _ in 0..60 {
        let r = (lap + DMatrix::identity(n, n) * lambda0)
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Numeric("shifted Laplacian is singular".into()))?;
        let mut worst = 0.0f64;
        for j in 0..n {
            let s: f64 = (0..n).map(|i| (v[i] * r[(i, j)]).abs()).sum();
            worst = worst.max(s);
        }
        if worst <= 0.5 {
            return Ok(lambda0);
        }
        lambda0 *= 2.0;
    }
    Err(Error::Numeric("no admissible potential shift found".into()))
}

fn matrix_power(a: &DMatrix<f64>, p: f64) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, 1e-15, 100 * n.max(10))
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
    if eig.eigenvalues.iter().any(|&e| e <= 0.0) {
        return Err(Error::Numeric("matrix power of a non-positive matrix".into()));
    }
    let d = eig.eigenvalues.map(|e| e.powf(p));
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&d) * q.transpose())
}

const LOG_STEP: f64 = 0.5;

/// `(sin πα/π) ∫₀^∞ λ^{α−1} A(A+λ)^{−1} dλ = A^α`, by the trapezoid rule in
/// `s = log λ` with closed-form tails.
fn power_by_quadrature(a: &DMatrix<f64>, alpha: f64) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if alpha == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    let top = a.amax() * n as f64;
    let s_lo = -36.0 / alpha;
    let s_hi = top.ln() + 36.0 / (1.0 - alpha);
    let steps = ((s_hi - s_lo) / LOG_STEP).ceil() as usize;
    let ds = (s_hi - s_lo) / steps as f64;
    let mut acc = DMatrix::zeros(n, n);
    for k in 0..=steps {
        let s = s_lo + k as f64 * ds;
        let lam = s.exp();
        let w = if k == 0 || k == steps { 0.5 * ds } else { ds };
        let inv = (a + DMatrix::identity(n, n) * lam)
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Numeric("singular resolvent in quadrature".into()))?;
        acc += (a * inv) * (w * (alpha * s).exp());
    }
    // Below s_lo the integrand is ≈ e^{αs}; above s_hi it is ≈ e^{(α−1)s}A.
    acc += DMatrix::identity(n, n) * ((alpha * s_lo).exp() / alpha);
    acc += a * (((alpha - 1.0) * s_hi).exp() / (1.0 - alpha));
    Ok(acc * ((PI * alpha).sin() / PI))
}

/// `(sin πβ/π) ∫₀^∞ μ^{−β}(B+μ)^{−1} dμ = B^{−β}`.
fn inverse_power_by_quadrature(b: &DMatrix<f64>, beta: f64) -> Result<DMatrix<f64>> {
    let n = b.nrows();
    let top = b.amax() * n as f64;
    let s_lo = -36.0 / (1.0 - beta);
    let s_hi = top.ln() + 36.0 / beta;
    let steps = ((s_hi - s_lo) / LOG_STEP).ceil() as usize;
    let ds = (s_hi - s_lo) / steps as f64;
    let mut acc = DMatrix::zeros(n, n);
    for k in 0..=steps {
        let s = s_lo + k as f64 * ds;
        let mu = s.exp();
        let w = if k == 0 || k == steps { 0.5 * ds } else { ds };
        let inv = (b + DMatrix::identity(n, n) * mu)
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Numeric("singular resolvent in quadrature".into()))?;
        acc += inv * (w * ((1.0 - beta) * s).exp());
    }
    let b_inv = b
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Numeric("singular operator in quadrature".into()))?;
    acc += b_inv * (((1.0 - beta) * s_lo).exp() / (1.0 - beta));
    acc += DMatrix::identity(n, n) * ((-beta * s_hi).exp() / beta);
    Ok(acc * ((PI * beta).sin() / PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disk_means_match_radial_integrals() {
        let a = 0.13;
        let n = 200_000;
        let mut acc = [0.0; 3];
        for i in 0..n {
            let r = a * (i as f64 + 0.5) / n as f64;
            let w = 2.0 * r * (a / n as f64) / (a * a);
            acc[0] += w * (-r.ln());
            acc[1] += w / r.sqrt();
            acc[2] += w * (-r.ln()) / r.sqrt();
        }
        assert!((acc[0] - SingularityClass::Log.unit_disk_mean(a)).abs() < 1e-6);
        assert!((acc[1] / SingularityClass::InvSqrt.unit_disk_mean(a) - 1.0).abs() < 1e-3);
        assert!((acc[2] / SingularityClass::LogInvSqrt.unit_disk_mean(a) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn quadrature_powers_match_scalar_identities() {
        let a = DMatrix::from_diagonal_element(1, 1, 3.0);
        let p = power_by_quadrature(&a, 0.3).unwrap()[(0, 0)];
        assert!((p - 3f64.powf(0.3)).abs() < 1e-8, "{p}");
        let q = inverse_power_by_quadrature(&a, 0.7).unwrap()[(0, 0)];
        assert!((q - 3f64.powf(-0.7)).abs() < 1e-8, "{q}");
    }
}
