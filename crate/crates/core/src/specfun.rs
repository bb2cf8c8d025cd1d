//! Bessel functions of order zero and the outgoing/incoming Hankel functions.
//!
//! `J₀`, `Y₀` use the power series for x ≤ 8, Miller backward recurrence with
//! the Neumann series for `Y₀` on (8, 25], and the Hankel asymptotic expansion
//! beyond 25.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{smooth_step, GaussLegendre};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

const SERIES_MAX: f64 = 8.0;
const ASYMPTOTIC_MIN: f64 = 25.0;

/// Which Hankel function: `plus = J₀ + iY₀`, `minus = −J₀ + iY₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HankelBranch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureScheme {
    GaussLegendrePanels,
    TanhSinh,
}

/// Settings for the Fourier-integral oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub node_count: usize,
    pub truncation: f64,
    pub scheme: QuadratureScheme,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            node_count: 16,
            truncation: 2000.0,
            scheme: QuadratureScheme::GaussLegendrePanels,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.node_count < 8 {
            return Err(Error::Domain(format!(
                "node_count must be at least 8, got {}",
                self.node_count
            )));
        }
        if !(self.truncation > 1.0) {
            return Err(Error::Domain(format!(
                "truncation must exceed 1, got {}",
                self.truncation
            )));
        }
        Ok(())
    }
}

pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("bessel_j0 needs finite x >= 0, got {x}")));
    }
    Ok(j0y0_unchecked(x).0)
}

pub fn bessel_y0(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("bessel_y0 needs finite x > 0, got {x}")));
    }
    Ok(j0y0_unchecked(x).1)
}

pub fn hankel0(branch: HankelBranch, rho: f64) -> Result<Complex64> {
    if !rho.is_finite() || rho <= 0.0 {
        return Err(Error::Domain(format!("hankel0 needs finite rho > 0, got {rho}")));
    }
    let (j, y) = j0y0_unchecked(rho);
    Ok(match branch {
        HankelBranch::Plus => Complex64::new(j, y),
        HankelBranch::Minus => Complex64::new(-j, y),
    })
}

/// `(J₀(x), Y₀(x))` for x > 0 without argument checks. `Y₀(0)` is returned as −∞.
pub fn j0y0_unchecked(x: f64) -> (f64, f64) {
    if x == 0.0 {
        (1.0, f64::NEG_INFINITY)
    } else if x <= SERIES_MAX {
        series(x)
    } else if x <= ASYMPTOTIC_MIN {
        miller(x)
    } else {
        asymptotic(x)
    }
}

/// `J₀(x)` alone, skipping the `Y₀` work where possible.
pub fn j0_unchecked(x: f64) -> f64 {
    if x <= SERIES_MAX {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= -q / (k * k);
            sum += term;
            if term.abs() < 1e-17 * sum.abs().max(1e-300) && k > 2.0 {
                break;
            }
            k += 1.0;
        }
        sum
    } else {
        j0y0_unchecked(x).0
    }
}

fn series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut j = 1.0;
    let mut harmonic = 0.0;
    let mut s = 0.0;
    let mut k = 1.0;
    loop {
        term *= -q / (k * k);
        harmonic += 1.0 / k;
        j += term;
        // (-1)^{k+1} H_k q^k / (k!)^2 = -H_k * term
        let contrib = -harmonic * term;
        s += contrib;
        if term.abs() < 1e-18 && contrib.abs() < 1e-18 {
            break;
        }
        k += 1.0;
    }
    let y = (2.0 / PI) * (((0.5 * x).ln() + EULER_GAMMA) * j + s);
    (j, y)
}

fn miller(x: f64) -> (f64, f64) {
    let mut n = (x + 40.0) as usize;
    if n % 2 == 1 {
        n += 1;
    }
    let mut jp1 = 0.0;
    let mut jk = 1e-30;
    let mut norm = 0.0;
    let mut neumann = 0.0;
    let mut k = n;
    loop {
        if k % 2 == 0 {
            if k == 0 {
                norm += jk;
                break;
            }
            norm += 2.0 * jk;
            let half = (k / 2) as f64;
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            neumann += sign * jk / half;
        }
        let jm1 = 2.0 * k as f64 / x * jk - jp1;
        jp1 = jk;
        jk = jm1;
        k -= 1;
        if jk.abs() > 1e250 {
            jk *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            neumann *= 1e-250;
        }
    }
    let j = jk / norm;
    let neumann = neumann / norm;
    let y = (2.0 / PI) * (((0.5 * x).ln() + EULER_GAMMA) * j - 2.0 * neumann);
    (j, y)
}

/// Coefficients `a_k(0)` of the Hankel asymptotic expansion.
pub fn hankel_asymptotic_coefficients(n: usize) -> Vec<f64> {
    let mut a = Vec::with_capacity(n);
    let mut ak = 1.0;
    a.push(ak);
    for k in 1..n {
        let m = (2 * k - 1) as f64;
        ak *= -m * m / (8.0 * k as f64);
        a.push(ak);
    }
    a
}

fn asymptotic(x: f64) -> (f64, f64) {
    let (p, q) = asymptotic_pq(x);
    let (s, c) = x.sin_cos();
    let cos_chi = (c + s) * std::f64::consts::FRAC_1_SQRT_2;
    let sin_chi = (s - c) * std::f64::consts::FRAC_1_SQRT_2;
    let amp = (2.0 / (PI * x)).sqrt();
    (
        amp * (p * cos_chi - q * sin_chi),
        amp * (p * sin_chi + q * cos_chi),
    )
}

fn asymptotic_pq(x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60usize {
        if k > 0 {
            let m = (2 * k - 1) as f64;
            term *= -m * m / (8.0 * k as f64 * x);
        }
        if term.abs() > prev || term.abs() < 1e-18 {
            break;
        }
        prev = term.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
    }
    (p, q)
}

/// Sine and cosine integrals `(Si(x), Ci(x))` for x > 0.
pub fn sici(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        let x2 = x * x;
        let mut si = 0.0;
        let mut ci = 0.0;
        let mut odd = x;
        let mut even = 1.0;
        for k in 0..40 {
            let n = (2 * k + 1) as f64;
            if k > 0 {
                odd *= -x2 / ((n - 1.0) * n);
            }
            si += odd / n;
            let m = (2 * k + 2) as f64;
            even *= -x2 / ((m - 1.0) * m);
            ci += even / m;
            if odd.abs() < 1e-18 && even.abs() < 1e-18 {
                break;
            }
        }
        (si, EULER_GAMMA + x.ln() + ci)
    } else {
        // Lentz evaluation of the continued fraction for E₁(ix).
        let tiny = 1e-300;
        let mut b = Complex64::new(1.0, x);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 1..200 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = Complex64::new(1.0, 0.0) / (d * a + b);
            c = b + Complex64::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        let e1 = h * Complex64::from_polar(1.0, -x);
        (FRAC_PI_2 + e1.im, -e1.re)
    }
}

/// Cell mean of `H₀^+(λ|y|)` over a disk of radius `a` centred at the origin.
pub fn hankel0_plus_disk_mean(lambda: f64, a: f64) -> Complex64 {
    // r = a u², r dr = 2a² u³ du keeps the logarithm tame.
    let gl = disk_rule();
    let mut sum = Complex64::new(0.0, 0.0);
    for (u, w) in gl.mapped(0.0, 1.0) {
        let r = a * u * u;
        let (j, y) = j0y0_unchecked(lambda * r);
        sum += Complex64::new(j, y) * (w * 4.0 * u * u * u);
    }
    sum
}

fn disk_rule() -> &'static GaussLegendre {
    use std::sync::OnceLock;
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(32))
}

/// Evaluates the Fourier-integral representation of `H₀^±(ρ)` along the real
/// axis. The plus branch integrates `(2/(iπ))∫₁^∞ (t²−1)^{−1/2} e^{iρt} dt`;
/// the minus branch the mirror integral over (−∞, −1] with the square root
/// continued as `t` itself, so that it is negative there.
pub fn hankel_ft_check(branch: HankelBranch, rho: f64, quad: QuadratureSpec) -> Result<Complex64> {
    if !rho.is_finite() || rho <= 0.0 {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    quad.validate()?;
    let coarse = ft_integral(rho, quad.node_count, quad.truncation, 1.0, quad.scheme);
    let fine = ft_integral(rho, quad.node_count, 1.5 * quad.truncation, 0.5, quad.scheme);
    if (fine - coarse).norm() > 1e-4 {
        return Err(Error::Accuracy(format!(
            "hankel_ft_check at rho = {rho}: refinements differ by {:e}",
            (fine - coarse).norm()
        )));
    }
    // ∫₁^∞ e^{iρt}/√(t²−1) dt = fine; the minus branch integrand is e^{−iρu}/(−√(u²−1)).
    let pref = Complex64::new(0.0, -2.0 / PI);
    Ok(match branch {
        HankelBranch::Plus => pref * fine,
        HankelBranch::Minus => pref * fine.conj(),
    })
}

/// `∫₁^∞ e^{iρt}(t²−1)^{−1/2} w(t) dt` with a smooth cutoff `w` over
/// [T, 2T]; `panel_scale` shrinks panels for the refinement pass.
fn ft_integral(rho: f64, n: usize, truncation: f64, panel_scale: f64, scheme: QuadratureScheme) -> Complex64 {
    let gl = GaussLegendre::new(n);
    let mut total = Complex64::new(0.0, 0.0);
    match scheme {
        QuadratureScheme::GaussLegendrePanels => {
            // t = cosh u on [1, 2]
            let u_max = 2f64.acosh();
            let u_panels = ((u_max * rho * 2.0).ceil() as usize).max(4);
            let du = u_max / u_panels as f64;
            for p in 0..u_panels {
                for (u, w) in gl.mapped(p as f64 * du, (p + 1) as f64 * du) {
                    total += Complex64::from_polar(w, rho * u.cosh());
                }
            }
        }
        QuadratureScheme::TanhSinh => {
            let h = 1.0 / n as f64;
            let kmax = (4.0 * n as f64) as i64;
            for k in -kmax..=kmax {
                let tau = k as f64 * h;
                let s = FRAC_PI_2 * tau.sinh();
                // t − 1 = (1 + tanh s)/2 on [1, 2]
                let d = 1.0 / (1.0 + (-2.0 * s).exp());
                if d == 0.0 || d >= 1.0 {
                    continue;
                }
                let w = h * FRAC_PI_2 * tau.cosh() * 0.5 / s.cosh().powi(2);
                let t = 1.0 + d;
                total += Complex64::from_polar(w / (d * (t + 1.0)).sqrt(), rho * t);
            }
        }
    }
    let end = 2.0 * truncation;
    let width = (FRAC_PI_2 / rho).min(1.0) * panel_scale;
    let n_panels = ((end - 2.0) / width).ceil() as usize;
    let dt = (end - 2.0) / n_panels as f64;
    for p in 0..n_panels {
        let a = 2.0 + p as f64 * dt;
        for (t, w) in gl.mapped(a, a + dt) {
            let taper = 1.0 - smooth_step((t - truncation) / truncation);
            if taper == 0.0 {
                continue;
            }
            let amp = w * taper / ((t - 1.0) * (t + 1.0)).sqrt();
            total += Complex64::from_polar(amp, rho * t);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_at_zero() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_j0(-1.0).is_err());
        assert!(bessel_j0(f64::NAN).is_err());
        assert!(bessel_y0(0.0).is_err());
        assert!(hankel0(HankelBranch::Plus, 0.0).is_err());
    }

    #[test]
    fn regimes_join_continuously() {
        for &x in &[SERIES_MAX] {
            let a = series(x);
            let b = miller(x);
            assert!((a.0 - b.0).abs() < 1e-13 && (a.1 - b.1).abs() < 1e-13, "{a:?} {b:?}");
        }
        let a = miller(ASYMPTOTIC_MIN);
        let b = asymptotic(ASYMPTOTIC_MIN);
        assert!((a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-14, "{a:?} {b:?}");
    }

    #[test]
    fn sici_branches_agree_at_switch() {
        let (s1, c1) = sici(2.0);
        let (s2, c2) = sici(2.0 + 1e-12);
        assert!((s1 - s2).abs() < 1e-11 && (c1 - c2).abs() < 1e-11);
        // Si(∞) = π/2, Ci(x) ~ sin x / x
        let (s, c) = sici(200.0);
        assert!((s - FRAC_PI_2).abs() < 1e-2);
        assert!((c - 200f64.sin() / 200.0).abs() < 1e-4);
        for &(x, si, ci) in &[
            (2.5, 1.77852017344382674e+00, 2.85871196365383495e-01),
            (5.0, 1.54993124494467405e+00, -1.90029749656643904e-01),
            (10.0, 1.65834759421887390e+00, -4.54564330044553710e-02),
            (33.0, 1.57028469816868577e+00, 3.02574341717473105e-02),
        ] {
            let (s, c) = sici(x);
            assert!((s - si).abs() < 1e-13 && (c - ci).abs() < 1e-13, "{x}");
        }
        let (s, c) = sici(1.0);
        assert!((s - 0.946_083_070_367_183_1).abs() < 1e-14);
        assert!((c - 0.337_403_922_900_968_1).abs() < 1e-14);
    }

    #[test]
    fn disk_mean_matches_fine_polar_average() {
        let (lambda, a) = (3.0, 0.2);
        let got = hankel0_plus_disk_mean(lambda, a);
        let n = 4000;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let r = a * (i as f64 + 0.5) / n as f64;
            let (j, y) = j0y0_unchecked(lambda * r);
            acc += Complex64::new(j, y) * (2.0 * r * a / n as f64);
        }
        acc /= a * a;
        assert!((got - acc).norm() < 1e-5);
    }
}
