//! Leapfrog finite differences for `∂²f/∂t² − Δf + Vf = F` on a square
//! lattice with zero Dirichlet data one cell outside the grid.

use crate::error::{Error, Result};
use crate::evolution::WaveField;
use crate::grid::{Grid2D, Lattice, LatticeInterpolator};
use crate::operator::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdtdConfig {
    pub half_width: f64,
    pub n_per_side: usize,
    pub dt: f64,
    pub t_final: f64,
}

impl FdtdConfig {
    /// Spacing of the lattice: nodes at `k·h` for `|k| ≤ (n_per_side − 1)/2`.
    pub fn cell_width(&self) -> f64 {
        2.0 * self.half_width / (self.n_per_side - 1) as f64
    }

    /// Largest stable step allowed, `0.9·h/√2`.
    pub fn max_dt(&self) -> f64 {
        0.9 * self.cell_width() / std::f64::consts::SQRT_2
    }

    /// Config with `dt = factor·max_dt`, rounded down so that one unit of
    /// time is a whole number of steps.
    pub fn with_dt_factor(half_width: f64, n_per_side: usize, factor: f64, t_final: f64) -> Result<Self> {
        let mut cfg = Self { half_width, n_per_side, dt: 1.0, t_final };
        cfg.check_shape()?;
        let target = factor * cfg.max_dt();
        cfg.dt = 1.0 / (1.0 / target).ceil();
        cfg.validate()?;
        Ok(cfg)
    }

    fn check_shape(&self) -> Result<()> {
        if self.n_per_side < 3 || self.n_per_side % 2 == 0 {
            return Err(Error::Config(format!("n_per_side must be odd and at least 3, got {}", self.n_per_side)));
        }
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return Err(Error::Config("half_width must be positive".into()));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::Config("t_final must be positive".into()));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check_shape()?;
        if !(self.dt > 0.0) || self.dt > self.max_dt() * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "dt = {} violates the CFL bound {:.6} for h = {:.6}",
                self.dt,
                self.max_dt(),
                self.cell_width()
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt - 1e-9).ceil() as usize
    }

    pub fn grid(&self) -> Grid2D {
        let m = ((self.n_per_side - 1) / 2) as i64;
        let h = self.cell_width();
        let side = self.n_per_side as i64;
        let mut index = Vec::with_capacity(self.n_per_side * self.n_per_side);
        for j in 0..side {
            for i in 0..side {
                index.push([i, j]);
            }
        }
        let o = -(m as f64) * h;
        Grid2D::from_lattice(Lattice { origin: [o, o], h, index })
    }
}

/// Two-level leapfrog state on the configured lattice.
#[derive(Debug, Clone)]
pub struct Leapfrog {
    n: usize,
    h: f64,
    dt: f64,
    v: Vec<f64>,
    prev: Vec<f64>,
    cur: Vec<f64>,
    step: usize,
}

impl Leapfrog {
    fn laplacian(&self, f: &[f64], out: &mut [f64]) {
        let n = self.n;
        let inv = 1.0 / (self.h * self.h);
        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                let mut s = -4.0 * f[k];
                if i > 0 {
                    s += f[k - 1];
                }
                if i + 1 < n {
                    s += f[k + 1];
                }
                if j > 0 {
                    s += f[k - n];
                }
                if j + 1 < n {
                    s += f[k + n];
                }
                out[k] = s * inv;
            }
        }
    }

    /// State after the Taylor start `f¹ = f₀ + dt·f₁ + (dt²/2)(Δf₀ − Vf₀ + F⁰)`.
    pub fn start(cfg: &FdtdConfig, v: Vec<f64>, f0: &[f64], f1: &[f64], forcing0: Option<&[f64]>) -> Self {
        let n = cfg.n_per_side;
        let mut lf = Self { n, h: cfg.cell_width(), dt: cfg.dt, v, prev: f0.to_vec(), cur: vec![0.0; n * n], step: 1 };
        let mut lap = vec![0.0; n * n];
        lf.laplacian(f0, &mut lap);
        let dt = cfg.dt;
        for k in 0..n * n {
            let force = forcing0.map_or(0.0, |f| f[k]);
            lf.cur[k] = f0[k] + dt * f1[k] + 0.5 * dt * dt * (lap[k] - lf.v[k] * f0[k] + force);
        }
        lf
    }

    /// State `(f^{n−1}, f^n)` given directly.
    pub fn from_pair(cfg: &FdtdConfig, v: Vec<f64>, prev: Vec<f64>, cur: Vec<f64>) -> Self {
        Self { n: cfg.n_per_side, h: cfg.cell_width(), dt: cfg.dt, v, prev, cur, step: 1 }
    }

    /// `f^{n+1} = 2fⁿ − f^{n−1} + dt²(Δ_h fⁿ − Vfⁿ + Fⁿ)`; returns the step index reached.
    pub fn advance(&mut self, forcing: Option<&[f64]>) -> Result<usize> {
        let mut lap = vec![0.0; self.cur.len()];
        self.laplacian(&self.cur, &mut lap);
        let dt2 = self.dt * self.dt;
        let mut bad = false;
        for k in 0..self.cur.len() {
            let force = forcing.map_or(0.0, |f| f[k]);
            let next = 2.0 * self.cur[k] - self.prev[k] + dt2 * (lap[k] - self.v[k] * self.cur[k] + force);
            bad |= !next.is_finite();
            self.prev[k] = next;
        }
        std::mem::swap(&mut self.prev, &mut self.cur);
        self.step += 1;
        if bad {
            return Err(Error::Instability { step: self.step });
        }
        Ok(self.step)
    }

    /// Exchanges the two levels, reversing the direction of time.
    pub fn reverse(&mut self) {
        std::mem::swap(&mut self.prev, &mut self.cur);
    }

    pub fn current(&self) -> &[f64] {
        &self.cur
    }

    pub fn previous(&self) -> &[f64] {
        &self.prev
    }

    /// Energy of the pair `(f^{n−1}, fⁿ)`.
    pub fn energy(&self) -> f64 {
        staggered_energy(&self.prev, &self.cur, &self.v, self.n, self.h, self.dt)
    }
}

/// The quantity leapfrog conserves exactly:
/// `Σ h²((b − a)/dt)² + ⟨a, (−Δ_h + V) b⟩_h`.
fn staggered_energy(a: &[f64], b: &[f64], v: &[f64], n: usize, h: f64, dt: f64) -> f64 {
    let mut kinetic = 0.0;
    let mut potential = 0.0;
    for k in 0..a.len() {
        let d = (b[k] - a[k]) / dt;
        kinetic += d * d;
        potential += v[k] * a[k] * b[k];
    }
    // Edges, including the ones to the zero exterior.
    let mut grad = 0.0;
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            let (ar, br) = if i + 1 < n { (a[k + 1], b[k + 1]) } else { (0.0, 0.0) };
            let (au, bu) = if j + 1 < n { (a[k + n], b[k + n]) } else { (0.0, 0.0) };
            grad += (ar - a[k]) * (br - b[k]) + (au - a[k]) * (bu - b[k]);
            if i == 0 {
                grad += a[k] * b[k];
            }
            if j == 0 {
                grad += a[k] * b[k];
            }
        }
    }
    h * h * (kinetic + potential) + grad
}

/// `E = Σ w[((f^{n+1} − fⁿ)/dt)² + ∇_h fⁿ·∇_h f^{n+1} + V fⁿ f^{n+1}]`.
pub fn energy(pair: (&[f64], &[f64]), pot: &PotentialSpec, cfg: &FdtdConfig) -> Result<f64> {
    let n = cfg.n_per_side;
    if pair.0.len() != n * n || pair.1.len() != n * n {
        return Err(Error::Domain("snapshot length does not match the lattice".into()));
    }
    let v = potential_on(pot, &cfg.grid())?;
    Ok(staggered_energy(pair.0, pair.1, &v, n, cfg.cell_width(), cfg.dt))
}

/// Point samples of `V` on the lattice: exact at shared nodes, otherwise
/// interpolated.
pub fn potential_on(pot: &PotentialSpec, grid: &Grid2D) -> Result<Vec<f64>> {
    if pot.is_zero() {
        return Ok(vec![0.0; grid.len()]);
    }
    let interp = LatticeInterpolator::new(pot.grid(), pot.values())?;
    let (c, rad) = interp.support();
    Ok(grid
        .nodes()
        .iter()
        .map(|&p| if (p[0] - c[0]).hypot(p[1] - c[1]) > rad { 0.0 } else { interp.eval(p) })
        .collect())
}

fn support_radius(grid: &Grid2D, f: &[f64]) -> f64 {
    let fmax = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if fmax == 0.0 {
        return 0.0;
    }
    grid.nodes()
        .iter()
        .zip(f)
        .filter(|(_, x)| x.abs() > 1e-12 * fmax)
        .map(|(p, _)| p[0].hypot(p[1]))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdtdRun {
    pub field: WaveField,
    /// Energy of the pair starting at each stored sample.
    pub energy: Vec<f64>,
}

/// Leapfrog run from `(f₀, f₁)` with optional forcing, storing every
/// `cadence`-th step (and the final one).
pub fn fdtd_solve(
    f0: &[f64],
    f1: &[f64],
    forcing: Option<&WaveField>,
    pot: &PotentialSpec,
    cfg: &FdtdConfig,
    cadence: usize,
) -> Result<FdtdRun> {
    cfg.validate()?;
    let grid = cfg.grid();
    let n2 = grid.len();
    if f0.len() != n2 || f1.len() != n2 {
        return Err(Error::Config("initial data does not match the FDTD lattice".into()));
    }
    let reach = support_radius(&grid, f0).max(support_radius(&grid, f1)) + cfg.t_final;
    if reach > cfg.half_width {
        return Err(Error::Config(format!(
            "half_width {} is below data support plus t_final ({reach:.4})",
            cfg.half_width
        )));
    }
    if let Some(fw) = forcing {
        if fw.obs.len() != n2 || fw.times.is_empty() {
            return Err(Error::Config("forcing does not match the FDTD lattice".into()));
        }
    }
    let cadence = cadence.max(1);
    let v = potential_on(pot, &grid)?;
    let force_at = |t: f64| forcing.map(|fw| interpolate_in_time(fw, t));
    let steps = cfg.steps();
    let f_start = force_at(0.0);
    let mut lf = Leapfrog::start(cfg, v, f0, f1, f_start.as_deref());
    let mut times = vec![0.0];
    let mut values = vec![f0.to_vec()];
    let mut energy = vec![staggered_energy(f0, lf.current(), &lf.v, lf.n, lf.h, lf.dt)];
    let mut pending: Option<(f64, Vec<f64>)> = None;
    if cadence == 1 || steps == 1 {
        pending = Some((cfg.dt, lf.current().to_vec()));
    }
    for s in 1..steps {
        let fs = force_at(s as f64 * cfg.dt);
        lf.advance(fs.as_deref())?;
        if let Some((t, snap)) = pending.take() {
            energy.push(staggered_energy(&snap, lf.current(), &lf.v, lf.n, lf.h, lf.dt));
            times.push(t);
            values.push(snap);
        }
        let reached = s + 1;
        if reached % cadence == 0 || reached == steps {
            pending = Some((reached as f64 * cfg.dt, lf.current().to_vec()));
        }
    }
    if let Some((t, snap)) = pending.take() {
        let mut probe = lf.clone();
        probe.advance(force_at(steps as f64 * cfg.dt).as_deref())?;
        energy.push(staggered_energy(&snap, probe.current(), &probe.v, probe.n, probe.h, probe.dt));
        times.push(t);
        values.push(snap);
    }
    Ok(FdtdRun { field: WaveField::new(grid, times, values)?, energy })
}

fn interpolate_in_time(fw: &WaveField, t: f64) -> Vec<f64> {
    let ts = &fw.times;
    if t <= ts[0] {
        return fw.values[0].clone();
    }
    if t >= *ts.last().unwrap() {
        return fw.values.last().unwrap().clone();
    }
    let k = ts.partition_point(|&x| x <= t) - 1;
    let a = (t - ts[k]) / (ts[k + 1] - ts[k]);
    fw.values[k].iter().zip(&fw.values[k + 1]).map(|(x, y)| (1.0 - a) * x + a * y).collect()
}
