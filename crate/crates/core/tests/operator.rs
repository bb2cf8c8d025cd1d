use std::f64::consts::PI;

use dispwave2d::grid::Grid2D;
use dispwave2d::make_grid;
use dispwave2d::operator::{
    assemble_operator, discretize_h, feshbach_invert, fractional_power_bound_check, lattice_laplacian,
    point_spectrum, project_continuous, Boundary, BlockSplit, FreeResolvent, LaplaceGreen, PotentialSpec,
    RadialFn, SingularityClass,
};
use dispwave2d::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn make_grid_examples() {
    let g = make_grid(1.0, 8).unwrap();
    assert_eq!(g.len(), 64);
    assert!((g.area() - 4.0).abs() < 1e-12);
    let g = make_grid(2.0, 16).unwrap();
    assert_eq!(g.cell_width(), 0.25);
    let w0 = g.weights()[0];
    assert!(w0 > 0.0 && g.weights().iter().all(|&w| w == w0));
    assert!(make_grid(1.0, 4).is_err());
    assert!(matches!(make_grid(1.0, 1 << 13), Err(Error::Capacity(_))));
}

#[test]
fn log_diagonal_matches_subgrid_average() {
    let h = 0.25;
    let grid = make_grid(1.0, 8).unwrap();
    assert_eq!(grid.cell_width(), h);
    let op = assemble_operator(&LaplaceGreen, &grid, &grid).unwrap();
    // Mean of −(1/2π)log|y| over the square cell by a 256 × 256 midpoint subgrid.
    let m = 256;
    let mut acc = 0.0;
    for i in 0..m {
        for j in 0..m {
            let x = h * ((i as f64 + 0.5) / m as f64 - 0.5);
            let y = h * ((j as f64 + 0.5) / m as f64 - 0.5);
            acc += -(x.hypot(y)).ln() / (2.0 * PI);
        }
    }
    acc /= (m * m) as f64;
    let a = h / PI.sqrt();
    let closed = (0.5 - a.ln()) / (2.0 * PI);
    assert!((op.matrix[(0, 0)].re - closed).abs() < 1e-14);
    assert!((closed - acc).abs() < 1e-2 * closed, "{closed} vs {acc}");
    assert!((op.matrix[(0, 0)].re - acc).abs() < 1e-2);
}

#[test]
fn none_class_diagonal_is_point_value() {
    let grid = make_grid(1.0, 8).unwrap();
    let k = RadialFn { profile: |r: f64| c((-r * r).exp() + 2.0), class: SingularityClass::None };
    let op = assemble_operator(&k, &grid, &grid).unwrap();
    for i in 0..grid.len() {
        assert_eq!(op.matrix[(i, i)], c(3.0));
    }
}

#[test]
fn symmetric_kernels_give_symmetric_matrices() {
    let grid = make_grid(1.0, 12).unwrap();
    for op in [
        assemble_operator(&LaplaceGreen, &grid, &grid).unwrap(),
        assemble_operator(&FreeResolvent { lambda: 2.3 }, &grid, &grid).unwrap(),
    ] {
        assert!(op.asymmetry() < 1e-12);
    }
}

#[test]
fn nonfinite_kernel_reports_the_pair() {
    let grid = make_grid(1.0, 8).unwrap();
    let k = RadialFn { profile: |r: f64| if r > 1.9 { c(f64::NAN) } else { c(1.0) }, class: SingularityClass::None };
    match assemble_operator(&k, &grid, &grid) {
        Err(Error::Assembly { row, col }) => {
            let p = grid.nodes()[row];
            let q = grid.nodes()[col];
            assert!((p[0] - q[0]).hypot(p[1] - q[1]) > 1.9);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn laplace_green_application_converges() {
    let f = |p: [f64; 2]| (-(p[0] * p[0] + p[1] * p[1]) / 0.18).exp();
    let obs = Grid2D::from_nodes(vec![[0.0, 0.0], [0.3, -0.2], [1.5, 1.5]], vec![1.0; 3], 0.1).unwrap();
    let apply = |n: usize| {
        let g = make_grid(1.5, n).unwrap();
        let op = assemble_operator(&LaplaceGreen, &g, &obs).unwrap();
        op.apply_real(&g.sample(f)).iter().map(|z| z.re).collect::<Vec<_>>()
    };
    let reference = apply(192);
    let err = |n: usize| {
        apply(n).iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let (e1, e2) = (err(24), err(48));
    assert!(e1 / e2 >= 2.0, "{e1} {e2}");
}

#[test]
fn feshbach_two_by_two() {
    let m = |x: f64| DMatrix::from_element(1, 1, x);
    let inv = feshbach_invert(&m(2.0), &m(1.0), &m(1.0), &m(1.0)).unwrap();
    let want = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 2.0]);
    assert!((inv - want).amax() < 1e-14);
    assert!(matches!(
        feshbach_invert(&m(0.0), &m(1.0), &m(1.0), &m(1.0)),
        Err(Error::FeshbachL00Singular)
    ));
    assert!(matches!(
        feshbach_invert(&m(1.0), &m(1.0), &m(1.0), &m(1.0)),
        Err(Error::FeshbachSchurSingular)
    ));
}

fn random_complex(rng: &mut ChaCha8Rng, n: usize, symmetric: bool) -> DMatrix<Complex64> {
    let mut a = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    if symmetric {
        a = (&a + a.transpose()) * c(0.5);
    }
    for i in 0..n {
        a[(i, i)] += c(n as f64 * 0.5);
    }
    a
}

fn split(a: &DMatrix<Complex64>, k: usize) -> [DMatrix<Complex64>; 4] {
    let n = a.nrows();
    [
        a.view((0, 0), (k, k)).into_owned(),
        a.view((0, k), (k, n - k)).into_owned(),
        a.view((k, 0), (n - k, k)).into_owned(),
        a.view((k, k), (n - k, n - k)).into_owned(),
    ]
}

#[test]
fn feshbach_random_twenty() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = random_complex(&mut rng, 20, false);
    let [l00, l01, l10, l11] = split(&a, 12);
    let inv = feshbach_invert(&l00, &l01, &l10, &l11).unwrap();
    let direct = a.clone().lu().try_inverse().unwrap();
    assert!((&inv - &direct).camax() / direct.camax() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]
    #[test]
    fn feshbach_equals_direct_inverse(seed in any::<u64>(), n in 2usize..=40, frac in 0.1f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_complex(&mut rng, n, true);
        let k = ((n as f64 * frac).round() as usize).clamp(1, n - 1);
        let [l00, l01, l10, l11] = split(&a, k);
        let inv = feshbach_invert(&l00, &l01, &l10, &l11).unwrap();
        let direct = a.clone().lu().try_inverse().unwrap();
        prop_assert!((&inv - &direct).camax() / direct.camax() < 1e-9);
    }
}

fn gaussian_pot(amplitude: f64, sigma: f64, h: f64) -> PotentialSpec {
    PotentialSpec::sampled(
        4.0 * sigma,
        h,
        |p| amplitude * (-(p[0] * p[0] + p[1] * p[1]) / (2.0 * sigma * sigma)).exp(),
        1e-4,
    )
    .unwrap()
}

#[test]
fn potential_factors_are_consistent() {
    let pot = PotentialSpec::sampled(1.0, 0.1, |p| p[0] - 0.2 * p[1], 0.0).unwrap();
    for k in 0..pot.values().len() {
        let (v, u, s) = (pot.values()[k], pot.u()[k], pot.v()[k]);
        assert!((u * s * s - v).abs() < 1e-14);
        assert_eq!(u * u, 1.0);
        assert!((s - v.abs().sqrt()).abs() < 1e-15);
        if v == 0.0 {
            assert_eq!(u, 1.0);
        }
    }
    let w = pot.weighted_l1();
    assert!(pot.l1_norm() <= w[0] && w[0] <= w[1] && w[1] <= w[2]);
    let doubled = pot.scaled(2.0);
    assert!((doubled.kato_half() - 2.0 * pot.kato_half()).abs() < 1e-12);
}

#[test]
fn block_split_is_a_projector() {
    let pot = gaussian_pot(-3.0, 0.4, 0.1);
    let s = BlockSplit::new(&pot).unwrap();
    assert!((&s.p * &s.p - &s.p).amax() < 1e-10);
    assert!((&s.p * &s.q).amax() < 1e-10);
    let sv = s.p.clone().svd(false, false).singular_values;
    assert_eq!(sv.iter().filter(|&&x| x > 1e-8).count(), 1);
    let zero = PotentialSpec::sampled(1.0, 0.1, |_| 0.0, 1e-4).unwrap();
    assert!(matches!(BlockSplit::new(&zero), Err(Error::ZeroPotential)));
}

#[test]
fn discrete_hamiltonian_structure() {
    let zero = PotentialSpec::sampled(1.0, 0.1, |_| 0.0, 1e-4).unwrap();
    let h = discretize_h(&zero).unwrap();
    assert!((&h - h.transpose()).amax() == 0.0);
    let lat = zero.grid().lattice().unwrap();
    let (lo, hi) = (lat.index.iter().map(|x| x[0]).min().unwrap(), lat.index.iter().map(|x| x[0]).max().unwrap());
    for (k, ix) in lat.index.iter().enumerate() {
        let interior = ix[0] > lo && ix[0] < hi && ix[1] > lo && ix[1] < hi;
        let row: f64 = h.row(k).iter().sum();
        if interior {
            assert!(row.abs() < 1e-9);
        } else {
            assert!(row > 0.0);
        }
    }
    let pot = gaussian_pot(2.0, 0.3, 0.1);
    let h = discretize_h(&pot).unwrap();
    assert!((&h - h.transpose()).amax() == 0.0);
}

#[test]
fn plane_wave_symbol_on_periodic_lattice() {
    let n = 16;
    let grid = make_grid(1.0, n).unwrap();
    let h = grid.cell_width();
    let lap = lattice_laplacian(&grid, Boundary::Periodic).unwrap();
    let len = 2.0;
    for &(m1, m2) in &[(1, 0), (2, 3), (5, 7)] {
        let k = [2.0 * PI * m1 as f64 / len, 2.0 * PI * m2 as f64 / len];
        let symbol = 4.0 / (h * h) * ((k[0] * h / 2.0).sin().powi(2) + (k[1] * h / 2.0).sin().powi(2));
        for part in 0..2 {
            let f: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|p| {
                    let ph = k[0] * p[0] + k[1] * p[1];
                    if part == 0 { ph.cos() } else { ph.sin() }
                })
                .collect();
            let lf = &lap * nalgebra::DVector::from_vec(f.clone());
            for (a, b) in lf.iter().zip(&f) {
                assert!((a - symbol * b).abs() < 1e-10 * symbol.max(1.0));
            }
        }
    }
}

#[test]
fn free_laplacian_has_no_bound_states() {
    let grid = Grid2D::centered_lattice(1.0, 0.1).unwrap();
    let zero = PotentialSpec::new(grid.clone(), vec![0.0; grid.len()]).unwrap();
    let h = discretize_h(&zero).unwrap();
    let spec = point_spectrum(&h, &grid, 1e-6 * h.amax()).unwrap();
    assert_eq!(spec.bound_state_count(), 0);
    assert!(spec.eigenvalues[0] > 0.0);
    let f = grid.sample(|p| p[0] + 1.0);
    assert_eq!(project_continuous(&f, &spec), f);
}

/// Rayleigh quotient of `e^{−r²/(2s²)}` for `−Δ − 50·1_{r<1/2}` in closed form.
fn gaussian_trial_energy(s: f64) -> f64 {
    1.0 / (s * s) - 50.0 * (1.0 - (-0.25 / (s * s)).exp())
}

#[test]
fn deep_well_binds_and_projection_behaves() {
    let bound: f64 = [0.3, 0.4, 0.5, 0.7].iter().map(|&s| gaussian_trial_energy(s)).fold(f64::INFINITY, f64::min);
    assert!(bound < 0.0);
    let grid = Grid2D::centered_lattice(1.2, 0.08).unwrap();
    let v = grid.sample(|p| if p[0].hypot(p[1]) < 0.5 { -50.0 } else { 0.0 });
    let pot = PotentialSpec::new(grid.clone(), v).unwrap();
    let h = discretize_h(&pot).unwrap();
    let spec = point_spectrum(&h, &grid, 1e-6 * h.amax()).unwrap();
    assert!(spec.bound_state_count() >= 1);
    for (a, pa) in spec.bound_vectors.iter().enumerate() {
        for (b, pb) in spec.bound_vectors.iter().enumerate() {
            let ip = grid.dot(pa, pb);
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-8);
        }
    }
    let phi = spec.bound_vectors[0].clone();
    let p = project_continuous(&phi, &spec);
    assert!(p.iter().fold(0.0f64, |m, x| m.max(x.abs())) < 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let f: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let once = project_continuous(&f, &spec);
        let twice = project_continuous(&once, &spec);
        assert!(once.iter().zip(&twice).all(|(a, b)| (a - b).abs() < 1e-10));
        let bessel: f64 = spec.bound_vectors.iter().map(|phi| grid.dot(&f, phi).powi(2)).sum();
        assert!(bessel <= grid.dot(&f, &f));
    }
}

#[test]
fn fractional_power_routes_agree_for_free_operator() {
    let grid = make_grid(1.0, 16).unwrap();
    let zero = PotentialSpec::new(grid.clone(), vec![0.0; grid.len()]).unwrap();
    let report = fractional_power_bound_check(&zero, 0.3, 0.6, &[16], 16).unwrap();
    let row = &report.rows[0];
    assert!(row.agreement.unwrap() < 1e-3, "{row:?}");
    assert!((row.norm_quadrature.unwrap() / row.norm_spectral - 1.0).abs() < 1e-3);
}

#[test]
fn fractional_power_alpha_zero_is_a_contraction() {
    let grid = make_grid(1.0, 16).unwrap();
    let zero = PotentialSpec::new(grid.clone(), vec![0.0; grid.len()]).unwrap();
    let report = fractional_power_bound_check(&zero, 0.0, 0.5, &[16], 16).unwrap();
    let row = &report.rows[0];
    assert!(row.norm_spectral <= 1.0 + 1e-8);
    assert!(row.agreement.unwrap() < 1e-3);
}

#[test]
fn fractional_power_norm_refinement_trend() {
    let pot = gaussian_pot(4.0, 0.4, 0.1);
    let report = fractional_power_bound_check(&pot, 0.25, 0.5, &[16, 24, 32], 0).unwrap();
    let norms: Vec<f64> = report.rows.iter().map(|r| r.norm_spectral).collect();
    assert!(norms[1] / norms[0] <= 1.2 && norms[2] / norms[1] <= 1.2, "{norms:?}");
}
