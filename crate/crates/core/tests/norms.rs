use dispwave2d::evolution::{make_spectral_grid, PropagatorBank, WaveField};
use dispwave2d::freewave::free_cosine_apply;
use dispwave2d::grid::{finite_difference_gradient, Grid2D};
use dispwave2d::norms::*;
use dispwave2d::operator::PotentialSpec;
use dispwave2d::Error;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = Ratio<i64>;

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

fn as_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn exp(x: Q) -> Exponent {
    Exponent::from_inverse(as_f64(x)).unwrap()
}

fn disk(h: f64, r: f64) -> (Grid2D, Vec<f64>) {
    let g = Grid2D::centered_lattice(r + 0.5, h).unwrap();
    let f = g.sample(|p| if p[0].hypot(p[1]) <= r { 1.0 } else { 0.0 });
    (g, f)
}

#[test]
fn reversed_norm_basics() {
    let g = Grid2D::centered_lattice(1.0, 0.25).unwrap();
    let times: Vec<f64> = (0..9).map(|k| 0.125 * k as f64).collect();
    let space = g.sample(|p| (1.0 + p[0] - 0.5 * p[1]).sin());
    let time: Vec<f64> = times.iter().map(|t| (2.0 * t).cos() + 0.3).collect();
    let field = WaveField::new(
        g.clone(),
        times.clone(),
        time.iter().map(|a| space.iter().map(|b| a * b).collect()).collect(),
    )
    .unwrap();
    let cases = [(3.0, 2.0), (1.0, 5.0), (f64::INFINITY, 4.0), (2.5, f64::INFINITY), (f64::INFINITY, f64::INFINITY)];
    for (qq, rr) in cases {
        let (qe, re) = (Exponent::new(qq).unwrap(), Exponent::new(rr).unwrap());
        let lq = match qe {
            Exponent::Infinity => space.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            Exponent::Finite(p) => g.weights().iter().zip(&space).map(|(w, x)| w * x.abs().powf(p)).sum::<f64>().powf(1.0 / p),
        };
        let lr = match re {
            Exponent::Infinity => time.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            Exponent::Finite(p) => time.iter().map(|x| 0.125 * x.abs().powf(p)).sum::<f64>().powf(1.0 / p),
        };
        let got = reversed_norm(&field, qe, re);
        assert!((got - lq * lr).abs() <= 1e-12 * lq * lr, "({qq}, {rr})");
        let scaled = WaveField::new(
            g.clone(),
            times.clone(),
            field.values.iter().map(|row| row.iter().map(|x| -2.5 * x).collect()).collect(),
        )
        .unwrap();
        assert!((reversed_norm(&scaled, qe, re) - 2.5 * got).abs() <= 1e-12 * got);
    }
    // q = r is the full space-time norm.
    let p = Exponent::new(3.0).unwrap();
    let full: f64 = field
        .values
        .iter()
        .flat_map(|row| row.iter().zip(g.weights()).map(|(x, w)| 0.125 * w * x.abs().powi(3)))
        .sum::<f64>()
        .cbrt();
    assert!((reversed_norm(&field, p, p) - full).abs() < 1e-12 * full);
    let zero = WaveField::zeros(g, times).unwrap();
    assert_eq!(reversed_norm(&zero, p, Exponent::Infinity), 0.0);
}

proptest! {
    #[test]
    fn reversed_norm_is_monotone(seed in 0u64..1000, q in 1.0f64..6.0, r in 1.0f64..6.0) {
        let g = Grid2D::centered_lattice(0.5, 0.25).unwrap();
        let times: Vec<f64> = (0..5).map(|k| 0.2 * k as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let big: Vec<Vec<f64>> = times.iter().map(|_| (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let small: Vec<Vec<f64>> = big.iter().map(|row| row.iter().map(|x| x * rng.gen_range(0.0..1.0)).collect()).collect();
        let a = WaveField::new(g.clone(), times.clone(), small).unwrap();
        let b = WaveField::new(g, times, big).unwrap();
        let (qe, re) = (Exponent::new(q).unwrap(), Exponent::new(r).unwrap());
        prop_assert!(reversed_norm(&a, qe, re) <= reversed_norm(&b, qe, re) * (1.0 + 1e-12));
    }
}

#[test]
fn kato_norm_of_the_unit_disk() {
    let (g, f) = disk(0.03, 1.0);
    let k = kato_norm(&g, &f, 1.0).unwrap();
    assert!((k / (std::f64::consts::PI / 2.0) - 1.0).abs() < 0.02, "{k}");
    assert_eq!(kato_norm(&g, &vec![0.0; g.len()], 1.0).unwrap(), 0.0);
    assert!(kato_norm(&g, &f, 0.0).is_err());
}

#[test]
fn kato_norm_is_translation_invariant_and_homogeneous() {
    let g = Grid2D::centered_lattice(3.0, 0.1).unwrap();
    let bump = |c: [f64; 2]| {
        move |p: [f64; 2]| {
            let r2 = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
            if r2 < 0.64 {
                (0.64 - r2) * (1.0 + p[0] - c[0])
            } else {
                0.0
            }
        }
    };
    let a = g.sample(bump([0.0, 0.0]));
    let b = g.sample(bump([0.7, -1.2]));
    for theta in [0.5, 1.0, 2.0] {
        let ka = kato_norm(&g, &a, theta).unwrap();
        let kb = kato_norm(&g, &b, theta).unwrap();
        assert!((ka - kb).abs() < 1e-10 * ka, "theta {theta}: {ka} vs {kb}");
        let c: Vec<f64> = a.iter().map(|x| -3.0 * x).collect();
        assert!((kato_norm(&g, &c, theta).unwrap() - 3.0 * ka).abs() < 1e-12 * ka);
    }
}

#[test]
fn kato_tilde_norms_of_the_unit_disk() {
    let (g, f) = disk(0.03, 1.0);
    let pot = PotentialSpec::new(g.clone(), f.clone()).unwrap();
    let (half, log) = kato_tilde_norms(&pot);
    assert!((half / (4.0 * std::f64::consts::PI / 3.0) - 1.0).abs() < 0.02, "{half}");
    // ∫_{|x|≤1} −log|x| |x|^{−1/2} = 2π·4/9.
    assert!((log / (8.0 * std::f64::consts::PI / 9.0) - 1.0).abs() < 0.02, "{log}");
    let doubled = kato_tilde_norms(&pot.scaled(2.0));
    assert_eq!(doubled, (2.0 * half, 2.0 * log));
    let zero = PotentialSpec::new(g.clone(), vec![0.0; g.len()]).unwrap();
    assert_eq!(kato_tilde_norms(&zero), (0.0, 0.0));
}

#[test]
fn weighted_sup_properties() {
    let g = Grid2D::centered_lattice(6.0, 0.5).unwrap();
    let inner = g.sample(|p| if p[0].hypot(p[1]) <= 1.0 { 1.0 + p[0] } else { 0.0 });
    let plain = inner.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert_eq!(weighted_sup(&g, &inner, 2.0), plain);
    let spread = g.sample(|p| (-0.05 * (p[0] * p[0] + p[1] * p[1])).exp() * (1.0 + 0.1 * p[1]));
    let s0 = weighted_sup(&g, &spread, 0.0);
    assert_eq!(s0, spread.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    let s1 = weighted_sup(&g, &spread, 1.0);
    let s2 = weighted_sup(&g, &spread, 2.0);
    assert!(s0 >= s1 && s1 >= s2);
}

#[test]
fn decay_fit_on_synthetic_series() {
    let times: Vec<f64> = (1..=20).map(|k| k as f64).collect();
    let power: Vec<f64> = times.iter().map(|t| 3.0 * t.powf(-0.5)).collect();
    let fit = decay_fit(&times, &power, (2.0, 20.0)).unwrap();
    assert!((fit.slope + 0.5).abs() < 1e-10);
    assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-10);
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
    let flat = vec![2.0; 20];
    assert!(decay_fit(&times, &flat, (2.0, 20.0)).unwrap().slope.abs() < 1e-12);
    let mut bad = power.clone();
    bad[5] = 0.0;
    assert!(matches!(decay_fit(&times, &bad, (2.0, 20.0)), Err(Error::Domain(_))));
    assert!(decay_fit(&times, &power, (2.0, 6.0)).is_err());
}

#[test]
fn free_cosine_decay_rate() {
    // Smooth radial bump; the sup sits on the outgoing front, sampled along a ray.
    let g = Grid2D::centered_lattice(1.2, 0.1).unwrap();
    let f = g.sample(|p| {
        let r2 = p[0] * p[0] + p[1] * p[1];
        if r2 < 1.0 {
            (1.0 - r2).powi(4)
        } else {
            0.0
        }
    });
    let (gx, gy) = finite_difference_gradient(&g, &f).unwrap();
    let times: Vec<f64> = (0..10).map(|k| 2.0 * 10f64.powf(k as f64 / 9.0)).collect();
    let sups: Vec<f64> = times
        .iter()
        .map(|&t| {
            let nodes: Vec<[f64; 2]> = (0..=200).map(|k| [(t - 2.0).max(0.0) + 0.02 * k as f64, 0.0]).collect();
            let ray = Grid2D::from_nodes(nodes.clone(), vec![1.0; nodes.len()], 0.02).unwrap();
            let u = free_cosine_apply(t, &g, &f, (&gx, &gy), &ray).unwrap().values;
            u.iter().fold(0.0f64, |m, x| m.max(x.abs()))
        })
        .collect();
    let fit = decay_fit(&times, &sups, (2.0, 20.0)).unwrap();
    assert!(fit.r_squared >= 0.9, "{fit:?}");
    assert!(fit.slope >= -0.65 && fit.slope <= -0.35, "{fit:?}");
}

fn small_bank() -> PropagatorBank {
    let src = Grid2D::centered_lattice(0.6, 0.2).unwrap();
    let pot = PotentialSpec::new(src.clone(), vec![0.0; src.len()]).unwrap();
    let sg = make_spectral_grid(12.5, 256, 8).unwrap();
    PropagatorBank::build(&pot, &src, &src, &sg, 0.1, 31, false).unwrap()
}

#[test]
fn kernel_time_integral_properties() {
    let bank = small_bank();
    let n = bank.src.len();
    assert_eq!(kernel_time_integral(&bank, (1.0, 1.0)).unwrap(), nalgebra::DMatrix::zeros(n, n));
    for split in [1.5, 1.55, 2.0] {
        let a = kernel_time_integral(&bank, (0.45, split)).unwrap();
        let b = kernel_time_integral(&bank, (split, 2.93)).unwrap();
        let c = kernel_time_integral(&bank, (0.45, 2.93)).unwrap();
        assert!((&a + &b - &c).amax() <= 1e-12 * c.amax());
    }
    let full = kernel_time_integral(&bank, (0.0, 3.0)).unwrap();
    assert!(full.iter().all(|&x| x >= 0.0));
    assert!(matches!(kernel_time_integral(&bank, (0.0, 3.5)), Err(Error::Config(_))));
}

#[test]
fn admissibility_examples() {
    assert!(admissible_reversed(0.125, 0.5));
    assert!(!admissible_reversed(0.25, 0.5));
    assert!(admissible_reversed(0.0, 0.0));
    assert!(admissible_direct(0.125, 0.125));
    assert!(!admissible_direct(0.0, 0.0));
    assert!(!admissible_direct(0.5, 0.5));
    assert!(admissible_direct(0.5, 0.0));

    let inf = Exponent::Infinity;
    let t = ExponentTuple::new(inf, inf, Exponent::new(4.0 / 3.0).unwrap(), Exponent::new(2.0).unwrap());
    let a = admissible_theorem11(&t);
    assert!(a.admissible, "{a:?}");
    assert!(a.flags.contains(&LorentzFlag::R1InfiniteR2Two));
    let same_r = ExponentTuple::new(inf, Exponent::new(2.0).unwrap(), Exponent::new(1.0).unwrap(), Exponent::new(2.0).unwrap());
    let a = admissible_theorem11(&same_r);
    assert_eq!((a.admissible, a.reason()), (false, "r-gap"));
    let off = ExponentTuple::new(Exponent::new(10.0).unwrap(), inf, Exponent::new(4.0 / 3.0).unwrap(), Exponent::new(2.0).unwrap());
    let a = admissible_theorem11(&off);
    assert_eq!((a.admissible, a.reason()), (false, "scaling"));

    assert!(admissible_lemma15(0.5, 0.0, 0.5).unwrap());
    assert!(!admissible_lemma15(0.75, 0.0, 1.0).unwrap());
    assert!(admissible_lemma15(0.3, 0.25, 0.25).unwrap());
    assert!(admissible_lemma15(0.25, 0.0, 0.1).is_err());
}

fn oracle_reversed(x: Q, y: Q) -> bool {
    x >= q(0, 1) && x <= q(1, 8) && y >= q(0, 1) && y <= q(1, 2)
}

fn oracle_direct(x: Q, y: Q) -> bool {
    let zero = q(0, 1);
    y >= zero && y <= x && x + y * 3 <= q(1, 2) && !(x == zero && y == zero)
}

fn oracle_theorem11(inv: [Q; 4]) -> Option<&'static str> {
    let [q1, r1, q2, r2] = inv;
    if q1 * 2 + r1 + 2 != q2 * 2 + r2 {
        return Some("scaling");
    }
    let gap = r2 - r1;
    if gap > q(0, 1) && gap <= q(1, 2) {
        None
    } else {
        Some("r-gap")
    }
}

fn oracle_lemma15(s: Q, gap: Q) -> bool {
    let top = (s * 4 - 1) / 2;
    let low = s * 2 - 1;
    if s < q(1, 2) {
        gap >= q(0, 1) && gap <= top
    } else if s < q(3, 4) {
        gap > low && gap <= top
    } else if s == q(3, 4) {
        gap > low && gap < top
    } else {
        gap > low && gap <= q(1, 1)
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Q {
    let d = rng.gen_range(1..=24);
    q(rng.gen_range(0..=d), d)
}

#[test]
fn checkers_agree_with_rational_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let (x, y) = (random_unit(&mut rng), random_unit(&mut rng));
        assert_eq!(admissible_reversed(as_f64(x), as_f64(y)), oracle_reversed(x, y), "{x} {y}");
        assert_eq!(admissible_direct(as_f64(x), as_f64(y)), oracle_direct(x, y), "{x} {y}");
        // Half the tuples are built to satisfy the scaling identity.
        let (q1, r1, r2) = (random_unit(&mut rng), random_unit(&mut rng), random_unit(&mut rng));
        let mut q2 = random_unit(&mut rng);
        if rng.gen_bool(0.5) {
            let solved = (q1 * 2 + r1 + 2 - r2) / 2;
            if solved >= q(0, 1) && solved <= q(1, 1) {
                q2 = solved;
            }
        }
        let inv = [q1, r1, q2, r2];
        let t = ExponentTuple::new(exp(q1), exp(r1), exp(q2), exp(r2));
        let got = admissible_theorem11(&t);
        let want = oracle_theorem11(inv);
        assert_eq!(got.admissible, want.is_none(), "{inv:?}");
        if let Some(reason) = want {
            assert_eq!(got.reason(), reason, "{inv:?}");
        }
        let s = q(rng.gen_range(13..=47), 48);
        let (a, b) = (random_unit(&mut rng), random_unit(&mut rng));
        assert_eq!(admissible_lemma15(as_f64(s), as_f64(a), as_f64(b)).unwrap(), oracle_lemma15(s, b - a), "{s} {a} {b}");
    }
}

#[test]
fn strichartz_check_rejects_inadmissible_and_zero_forcing_is_zero() {
    let bank = small_bank();
    let setup = StrichartzSetup { half_width: 0.6, obs_radius: 0.6, dt: 0.1, duration: 3.0, pulse: 1.0, mu: 2.0 };
    let inf = Exponent::Infinity;
    let bad = ExponentTuple::new(inf, inf, Exponent::new(1.0).unwrap(), Exponent::new(1.0).unwrap());
    assert!(matches!(strichartz_ratio_check(&bad, &bank, &setup), Err(Error::Domain(_))));
    let good = ExponentTuple::new(inf, inf, Exponent::new(4.0 / 3.0).unwrap(), Exponent::new(2.0).unwrap());
    let rep = strichartz_ratio_check(&good, &bank, &setup).unwrap();
    assert_eq!(rep.ratios.len(), 6);
    assert!(rep.ratios.iter().all(|r| r.is_finite() && *r > 0.0));
    assert_eq!(rep.scaling_exponent_predicted, 0.0);
}
