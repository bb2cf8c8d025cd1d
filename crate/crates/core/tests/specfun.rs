use std::f64::consts::PI;

use dispwave2d::specfun::{
    bessel_j0, bessel_y0, hankel0, hankel_ft_check, HankelBranch, QuadratureScheme,
    QuadratureSpec, EULER_GAMMA,
};
use num_complex::Complex64;

// Reference values from an independent double-precision library.
const REFERENCE: [(f64, f64, f64); 16] = [
    (0.1, 9.97501562066040015e-01, -1.53423865135036674e+00),
    (0.5, 9.38469807240812970e-01, -4.44518733506706620e-01),
    (1.0, 7.65197686557966494e-01, 8.82569642156769696e-02),
    (2.0, 2.23890779141235619e-01, 5.10375672649745149e-01),
    (3.0, -2.60051954901933502e-01, 3.76850010012790615e-01),
    (5.0, -1.77596771314338292e-01, -3.08517625249033034e-01),
    (7.5, 2.66339657880378389e-01, 1.17313286148208629e-01),
    (8.5, 4.19392518429344899e-02, 2.70205105365787457e-01),
    (10.0, -2.45935764451348321e-01, 5.56711672835996096e-02),
    (15.0, -1.42244728267805973e-02, 2.05464296038918248e-01),
    (20.0, 1.67024664340583218e-01, 6.26405968093836918e-02),
    (24.0, -5.62302741668594189e-02, -1.52834028797587756e-01),
    (26.0, 1.55999315522421161e-01, 1.20446258607554684e-02),
    (30.0, -8.63679835810403085e-02, -1.17295731686663976e-01),
    (50.0, 5.58123276692520862e-02, -9.80649954700769239e-02),
    (100.0, 1.99858503042233300e-02, -7.72443133650830976e-02),
];

fn reference_j0_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 0..80 {
        if k > 0 {
            term *= -(x * x / 4.0) / (k as f64 * k as f64);
        }
        sum += term;
    }
    sum
}

#[test]
fn j0_y0_match_reference_table() {
    for &(x, j, y) in &REFERENCE {
        let gj = bessel_j0(x).unwrap();
        let gy = bessel_y0(x).unwrap();
        assert!(((gj - j) / j).abs() < 1e-10, "J0({x}) = {gj}, want {j}");
        assert!(((gy - y) / y).abs() < 1e-9, "Y0({x}) = {gy}, want {y}");
    }
}

#[test]
fn j0_first_zero_located_by_bisection() {
    let (mut a, mut b) = (2.0, 3.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if reference_j0_series(a) * reference_j0_series(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    assert!((0.5 * (a + b) - 2.4048255577).abs() < 1e-9);
    assert!(bessel_j0(2.4048255577).unwrap().abs() <= 1e-8);
}

#[test]
fn j0_large_argument_leading_term() {
    let x = 50.0;
    let lead = (2.0 / (PI * x)).sqrt() * (x - PI / 4.0).cos();
    assert!((bessel_j0(x).unwrap() - lead).abs() < 1e-3);
}

#[test]
fn y0_small_argument_log_law() {
    let mut prev = f64::INFINITY;
    for &x in &[1e-2, 1e-3, 1e-4, 1e-6] {
        let d = (bessel_y0(x).unwrap() - (2.0 / PI) * ((x / 2.0).ln() + EULER_GAMMA)).abs();
        assert!(d < prev);
        prev = d;
    }
    assert!(prev < 1e-11);
    let y = bessel_y0(1e-8).unwrap();
    assert!(y < -10.0);
    assert!((y - (2.0 / PI) * (0.5e-8f64).ln()).abs() < 0.5);
}

#[test]
fn wronskian_identity() {
    for &x in &[0.5, 1.0, 5.0] {
        let h = 1e-5;
        let j = bessel_j0(x).unwrap();
        let y = bessel_y0(x).unwrap();
        let dj = (bessel_j0(x + h).unwrap() - bessel_j0(x - h).unwrap()) / (2.0 * h);
        let dy = (bessel_y0(x + h).unwrap() - bessel_y0(x - h).unwrap()) / (2.0 * h);
        let w = j * dy - dj * y;
        assert!((w - 2.0 / (PI * x)).abs() < 1e-8, "x = {x}: {w}");
    }
}

#[test]
fn hankel_branches_differ_by_twice_j0() {
    for i in 0..40 {
        let rho = 1e-3 * (50.0f64 / 1e-3).powf(i as f64 / 39.0);
        let d = hankel0(HankelBranch::Plus, rho).unwrap() - hankel0(HankelBranch::Minus, rho).unwrap();
        let j = bessel_j0(rho).unwrap();
        assert!((d - Complex64::new(2.0 * j, 0.0)).norm() < 1e-8);
    }
}

#[test]
fn hankel_minus_shares_imaginary_part_with_negated_conjugate() {
    for &rho in &[0.1, 1.0, 7.0, 30.0] {
        let p = hankel0(HankelBranch::Plus, rho).unwrap();
        let m = hankel0(HankelBranch::Minus, rho).unwrap();
        assert_eq!((-p.conj()).re, m.re);
        assert!((p.im - m.im).abs() < 1e-15);
    }
}

#[test]
fn hankel_small_argument_constant_is_stable() {
    let approx = |rho: f64| {
        Complex64::new(1.0, (2.0 / PI) * ((rho / 2.0).ln() + EULER_GAMMA))
    };
    let c = |rho: f64| {
        (hankel0(HankelBranch::Plus, rho).unwrap() - approx(rho)).norm()
            / (rho * rho * (1.0 + rho.ln().abs()))
    };
    let c1 = c(0.05);
    let c2 = c(0.025);
    let c3 = c(0.0125);
    assert!(c1 < 1.0 && c2 < 1.0 && c3 < 1.0, "{c1} {c2} {c3}");
    assert!((c2 / c1 - 1.0).abs() < 0.25 && (c3 / c2 - 1.0).abs() < 0.25);
}

#[test]
fn hankel_modulus_at_twenty() {
    let h = hankel0(HankelBranch::Plus, 20.0).unwrap();
    let lead = (2.0 / (PI * 20.0)).sqrt();
    assert!((h.norm() / lead - 1.0).abs() < 0.02);
}

#[test]
fn fourier_representation_at_selected_points() {
    for &rho in &[0.5, 2.0, 8.0] {
        let got = hankel_ft_check(HankelBranch::Plus, rho, QuadratureSpec::default()).unwrap();
        let want = hankel0(HankelBranch::Plus, rho).unwrap();
        assert!((got - want).norm() < 1e-4, "rho = {rho}: {got} vs {want}");
    }
    let p = hankel_ft_check(HankelBranch::Plus, 2.0, QuadratureSpec::default()).unwrap();
    let m = hankel_ft_check(HankelBranch::Minus, 2.0, QuadratureSpec::default()).unwrap();
    assert!((p.im - m.im).abs() < 1e-4);
}

#[test]
fn fourier_representation_tanh_sinh_endpoint() {
    let quad = QuadratureSpec { scheme: QuadratureScheme::TanhSinh, ..QuadratureSpec::default() };
    for &rho in &[0.3, 3.0, 15.0] {
        let got = hankel_ft_check(HankelBranch::Minus, rho, quad).unwrap();
        let want = hankel0(HankelBranch::Minus, rho).unwrap();
        assert!((got - want).norm() < 1e-4, "rho = {rho}: {got} vs {want}");
    }
}

#[test]
fn fourier_representation_rejects_bad_specs() {
    let quad = QuadratureSpec { node_count: 4, ..QuadratureSpec::default() };
    assert!(hankel_ft_check(HankelBranch::Plus, 1.0, quad).is_err());
    let quad = QuadratureSpec { truncation: 0.5, ..QuadratureSpec::default() };
    assert!(hankel_ft_check(HankelBranch::Plus, 1.0, quad).is_err());
    let quad = QuadratureSpec { truncation: 3.0, ..QuadratureSpec::default() };
    assert!(hankel_ft_check(HankelBranch::Plus, 0.3, quad).is_err());
}
