//! Fixtures shared by the criterion benches in `benches/`.

use dispwave2d::fdtd::{potential_on, FdtdConfig, Leapfrog};
use dispwave2d::operator::PotentialSpec;
use dispwave2d::Grid2D;

pub fn gaussian(sigma: f64) -> impl Fn([f64; 2]) -> f64 {
    move |p| (-(p[0] * p[0] + p[1] * p[1]) / (2.0 * sigma * sigma)).exp()
}

/// Repulsive Gaussian bump on the lattice of spacing `h`.
pub fn bump_potential(h: f64) -> PotentialSpec {
    PotentialSpec::sampled(1.0, h, |p| 5.0 * gaussian(0.3)(p), 1e-3).expect("valid potential")
}

/// Gaussian data on the disk of radius 1.6 and an observation disk of
/// radius 2.4, both on the lattice of spacing `h`.
pub fn free_setup(h: f64) -> (Grid2D, Vec<f64>, Grid2D) {
    let lattice = Grid2D::centered_lattice(2.4, h).expect("lattice");
    let src = lattice.restrict(|p| p[0].hypot(p[1]) <= 1.6);
    let f = src.sample(gaussian(0.4));
    let obs = lattice.restrict(|p| p[0].hypot(p[1]) <= 2.4);
    (src, f, obs)
}

/// Leapfrog on a `n × n` lattice with the bump potential.
pub fn leapfrog(n: usize) -> Leapfrog {
    let cfg = FdtdConfig::with_dt_factor(5.0, n, 0.5, 1.0).expect("config");
    let g = cfg.grid();
    let v = potential_on(&bump_potential(0.2), &g).expect("potential");
    let f0 = g.sample(gaussian(0.5));
    let zeros = vec![0.0; g.len()];
    Leapfrog::start(&cfg, v, &f0, &zeros, None)
}
