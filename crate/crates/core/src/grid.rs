//! Cell-centred quadrature grids, lattice bookkeeping and interpolation.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Largest node count `make_grid` will allocate.
pub const MAX_NODES: usize = 1 << 24;

/// Integer lattice underlying a uniform grid: node k sits at
/// `origin + h·index[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub origin: [f64; 2],
    pub h: f64,
    pub index: Vec<[i64; 2]>,
}

/// Quadrature nodes with cell-area weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    nodes: Vec<[f64; 2]>,
    weights: Vec<f64>,
    cell_width: f64,
    bounding_radius: f64,
    lattice: Option<Lattice>,
}

pub fn make_grid(half_width: f64, n_per_side: usize) -> Result<Grid2D> {
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(Error::Domain(format!("half_width must be positive, got {half_width}")));
    }
    if n_per_side < 8 {
        return Err(Error::Domain(format!("n_per_side must be at least 8, got {n_per_side}")));
    }
    if n_per_side.checked_mul(n_per_side).map_or(true, |n| n > MAX_NODES) {
        return Err(Error::Capacity(format!("{n_per_side}^2 nodes exceed the budget of {MAX_NODES}")));
    }
    let h = 2.0 * half_width / n_per_side as f64;
    let o = -half_width + 0.5 * h;
    let mut index = Vec::with_capacity(n_per_side * n_per_side);
    for j in 0..n_per_side as i64 {
        for i in 0..n_per_side as i64 {
            index.push([i, j]);
        }
    }
    Ok(Grid2D::from_lattice(Lattice { origin: [o, o], h, index }))
}

impl Grid2D {
    /// Grid whose nodes are the given lattice points, each with weight h².
    pub fn from_lattice(lattice: Lattice) -> Self {
        let h = lattice.h;
        let nodes: Vec<[f64; 2]> = lattice
            .index
            .iter()
            .map(|&[i, j]| [lattice.origin[0] + h * i as f64, lattice.origin[1] + h * j as f64])
            .collect();
        let weights = vec![h * h; nodes.len()];
        let bounding_radius = radius_of(&nodes) + h / std::f64::consts::SQRT_2;
        Self { nodes, weights, cell_width: h, bounding_radius, lattice: Some(lattice) }
    }

    /// Arbitrary nodes and weights; no lattice structure is assumed.
    pub fn from_nodes(nodes: Vec<[f64; 2]>, weights: Vec<f64>, cell_width: f64) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::Domain("nodes and weights differ in length".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Domain("weights must be positive".into()));
        }
        if !(cell_width > 0.0) {
            return Err(Error::Domain("cell_width must be positive".into()));
        }
        let bounding_radius = radius_of(&nodes) + 0.5 * cell_width;
        Ok(Self { nodes, weights, cell_width, bounding_radius, lattice: None })
    }

    /// Lattice square `[-half_width, half_width]²` with spacing `h`, nodes at
    /// integer multiples of `h` (the origin is a node).
    pub fn centered_lattice(half_width: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !(half_width > 0.0) {
            return Err(Error::Domain("spacing and half width must be positive".into()));
        }
        let m = (half_width / h + 1e-9).floor() as i64;
        let side = (2 * m + 1) as usize;
        if side * side > MAX_NODES {
            return Err(Error::Capacity(format!("{side}^2 nodes exceed the budget")));
        }
        let mut index = Vec::with_capacity(side * side);
        for j in 0..side as i64 {
            for i in 0..side as i64 {
                index.push([i, j]);
            }
        }
        let o = -(m as f64) * h;
        Ok(Self::from_lattice(Lattice { origin: [o, o], h, index }))
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Keeps the nodes for which `keep` holds.
    pub fn restrict<F: Fn([f64; 2]) -> bool>(&self, keep: F) -> Self {
        let sel: Vec<usize> = (0..self.len()).filter(|&k| keep(self.nodes[k])).collect();
        self.select(&sel)
    }

    /// Subgrid with the given node indices, in order.
    pub fn select(&self, sel: &[usize]) -> Self {
        let nodes: Vec<[f64; 2]> = sel.iter().map(|&k| self.nodes[k]).collect();
        let weights = sel.iter().map(|&k| self.weights[k]).collect();
        let lattice = self.lattice.as_ref().map(|l| Lattice {
            origin: l.origin,
            h: l.h,
            index: sel.iter().map(|&k| l.index[k]).collect(),
        });
        let bounding_radius = radius_of(&nodes) + self.cell_width / std::f64::consts::SQRT_2;
        Self { nodes, weights, cell_width: self.cell_width, bounding_radius, lattice }
    }

    /// Same nodes with every weight multiplied by `c`.
    pub fn scaled_weights(&self, c: f64) -> Self {
        let mut g = self.clone();
        g.weights.iter_mut().for_each(|w| *w *= c);
        g
    }

    /// Index of the node nearest to `p`.
    pub fn nearest(&self, p: [f64; 2]) -> usize {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (k, q) in self.nodes.iter().enumerate() {
            let d = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
            if d < bd {
                bd = d;
                best = k;
            }
        }
        best
    }

    /// Samples a function at the nodes.
    pub fn sample<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(|&p| f(p)).collect()
    }

    /// Weighted inner product Σ wᵢ fᵢ gᵢ.
    pub fn dot(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
    }

    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        self.dot(f, f).sqrt()
    }
}

fn radius_of(nodes: &[[f64; 2]]) -> f64 {
    nodes.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max)
}

/// Integer coordinates of both grids' nodes in a common lattice whose spacing
/// is the finer of the two, when the coarser spacing is an integer multiple
/// of it and the origins are aligned.
pub fn common_lattice(a: &Grid2D, b: &Grid2D) -> Option<(f64, Vec<[i64; 2]>, Vec<[i64; 2]>)> {
    let la = a.lattice()?;
    let lb = b.lattice()?;
    let h = la.h.min(lb.h);
    let origin = la.origin;
    let embed = |l: &Lattice| -> Option<Vec<[i64; 2]>> {
        let m = l.h / h;
        let mr = m.round();
        if (m - mr).abs() > 1e-9 * m {
            return None;
        }
        let m = mr as i64;
        let mut shift = [0i64; 2];
        for d in 0..2 {
            let s = (l.origin[d] - origin[d]) / h;
            let r = s.round();
            if (s - r).abs() > 1e-9 * s.abs().max(1.0) {
                return None;
            }
            shift[d] = r as i64;
        }
        Some(l.index.iter().map(|&[i, j]| [i * m + shift[0], j * m + shift[1]]).collect())
    };
    Some((h, embed(la)?, embed(lb)?))
}

/// Pairwise distances between `dst` and `src` nodes, deduplicated when the
/// grids share a lattice. Entry (i, j) has distance `dists[idx[i·cols + j]]`.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    pub rows: usize,
    pub cols: usize,
    pub idx: Vec<u32>,
    pub dists: Vec<f64>,
}

impl DistanceTable {
    pub fn new(dst: &Grid2D, src: &Grid2D) -> Self {
        let rows = dst.len();
        let cols = src.len();
        if let Some((h, id, is)) = common_lattice(dst, src) {
            let mut map: HashMap<i64, u32> = HashMap::new();
            let mut keys = Vec::new();
            let mut idx = Vec::with_capacity(rows * cols);
            for a in &id {
                for b in &is {
                    let di = a[0] - b[0];
                    let dj = a[1] - b[1];
                    let key = di * di + dj * dj;
                    let n = map.len() as u32;
                    let e = *map.entry(key).or_insert_with(|| {
                        keys.push(key);
                        n
                    });
                    idx.push(e);
                }
            }
            let dists = keys.iter().map(|&k| h * (k as f64).sqrt()).collect();
            Self { rows, cols, idx, dists }
        } else {
            let mut dists = Vec::with_capacity(rows * cols);
            for p in dst.nodes() {
                for q in src.nodes() {
                    dists.push((p[0] - q[0]).hypot(p[1] - q[1]));
                }
            }
            let idx = (0..(rows * cols) as u32).collect();
            Self { rows, cols, idx, dists }
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dists[self.idx[i * self.cols + j] as usize]
    }
}

/// Six-point tensor Lagrange interpolation of lattice data (zero outside).
#[derive(Debug, Clone)]
pub struct LatticeInterpolator {
    origin: [f64; 2],
    h: f64,
    lo: [i64; 2],
    nx: usize,
    ny: usize,
    data: Vec<f64>,
    support_center: [f64; 2],
    support_radius: f64,
}

const STENCIL: i64 = 6;
const PAD: i64 = 3;

impl LatticeInterpolator {
    pub fn new(grid: &Grid2D, values: &[f64]) -> Result<Self> {
        let lat = grid
            .lattice()
            .ok_or_else(|| Error::Domain("interpolation needs a lattice grid".into()))?;
        if values.len() != grid.len() {
            return Err(Error::Domain("field length does not match grid".into()));
        }
        let mut lo = [i64::MAX; 2];
        let mut hi = [i64::MIN; 2];
        let mut any = false;
        for (k, ix) in lat.index.iter().enumerate() {
            if values[k] != 0.0 {
                any = true;
                for d in 0..2 {
                    lo[d] = lo[d].min(ix[d]);
                    hi[d] = hi[d].max(ix[d]);
                }
            }
        }
        if !any {
            lo = [0, 0];
            hi = [0, 0];
        }
        let nx = (hi[0] - lo[0] + 1) as usize;
        let ny = (hi[1] - lo[1] + 1) as usize;
        let mut data = vec![0.0; nx * ny];
        let mut cx = 0.0;
        let mut cy = 0.0;
        for (k, ix) in lat.index.iter().enumerate() {
            if ix[0] >= lo[0] && ix[0] <= hi[0] && ix[1] >= lo[1] && ix[1] <= hi[1] {
                data[(ix[1] - lo[1]) as usize * nx + (ix[0] - lo[0]) as usize] = values[k];
            }
        }
        if any {
            cx = lat.origin[0] + lat.h * 0.5 * (lo[0] + hi[0]) as f64;
            cy = lat.origin[1] + lat.h * 0.5 * (lo[1] + hi[1]) as f64;
        }
        let half_diag = 0.5 * lat.h * (((nx - 1).pow(2) + (ny - 1).pow(2)) as f64).sqrt();
        let support_radius = if any { half_diag + lat.h * (PAD as f64) * std::f64::consts::SQRT_2 } else { 0.0 };
        Ok(Self {
            origin: lat.origin,
            h: lat.h,
            lo,
            nx,
            ny,
            data,
            support_center: [cx, cy],
            support_radius,
        })
    }

    /// Disk outside of which the interpolant vanishes identically.
    pub fn support(&self) -> ([f64; 2], f64) {
        (self.support_center, self.support_radius)
    }

    pub fn is_zero(&self) -> bool {
        self.support_radius == 0.0
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    #[inline]
    fn axis(&self, s: f64, lo: i64, n: usize) -> Option<(i64, [f64; 6])> {
        let base = s.floor() as i64 - (PAD - 1);
        if base + STENCIL - 1 < lo || base > lo + n as i64 - 1 {
            return None;
        }
        Some((base, lagrange6(s - base as f64)))
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let sx = (p[0] - self.origin[0]) / self.h;
        let sy = (p[1] - self.origin[1]) / self.h;
        let Some((bx, wx)) = self.axis(sx, self.lo[0], self.nx) else { return 0.0 };
        let Some((by, wy)) = self.axis(sy, self.lo[1], self.ny) else { return 0.0 };
        let mut acc = 0.0;
        for (b, &wyb) in wy.iter().enumerate() {
            let j = by + b as i64 - self.lo[1];
            if j < 0 || j >= self.ny as i64 {
                continue;
            }
            let row = &self.data[j as usize * self.nx..(j as usize + 1) * self.nx];
            let mut racc = 0.0;
            for (a, &wxa) in wx.iter().enumerate() {
                let i = bx + a as i64 - self.lo[0];
                if i < 0 || i >= self.nx as i64 {
                    continue;
                }
                racc += wxa * row[i as usize];
            }
            acc += wyb * racc;
        }
        acc
    }
}

/// Lagrange cardinal weights at offset `u` ∈ [2, 3) from the first of six
/// unit-spaced nodes 0..5.
#[inline]
fn lagrange6(u: f64) -> [f64; 6] {
    let d = [u, u - 1.0, u - 2.0, u - 3.0, u - 4.0, u - 5.0];
    const DEN: [f64; 6] = [-120.0, 24.0, -12.0, 12.0, -24.0, 120.0];
    let mut w = [0.0; 6];
    for k in 0..6 {
        let mut prod = 1.0;
        for (m, dm) in d.iter().enumerate() {
            if m != k {
                prod *= dm;
            }
        }
        w[k] = prod / DEN[k];
    }
    w
}

/// Fourth-order centred finite-difference gradient of lattice data, with
/// missing neighbours read as zero.
pub fn finite_difference_gradient(grid: &Grid2D, f: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let lat = grid
        .lattice()
        .ok_or_else(|| Error::Domain("gradient needs a lattice grid".into()))?;
    let map: HashMap<[i64; 2], usize> = lat.index.iter().enumerate().map(|(k, &ix)| (ix, k)).collect();
    let get = |i: i64, j: i64| map.get(&[i, j]).map_or(0.0, |&k| f[k]);
    let h = lat.h;
    let mut gx = vec![0.0; f.len()];
    let mut gy = vec![0.0; f.len()];
    for (k, &[i, j]) in lat.index.iter().enumerate() {
        gx[k] = (8.0 * (get(i + 1, j) - get(i - 1, j)) - (get(i + 2, j) - get(i - 2, j))) / (12.0 * h);
        gy[k] = (8.0 * (get(i, j + 1) - get(i, j - 1)) - (get(i, j + 2) - get(i, j - 2))) / (12.0 * h);
    }
    Ok((gx, gy))
}
