//! Gamma, incomplete gamma, error function, Riemann zeta and J₁.

use std::f64::consts::PI;

use super::quadrature::QuadratureResult;
use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
/// Relative accuracy of the Lanczos evaluation (with margin).
pub const GAMMA_REL_ERR: f64 = 3e-14;

fn lanczos_sum(z: f64) -> f64 {
    // z = s - 1
    let mut x = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    x
}

/// Γ(s) for s > 0, in plain floating point.
pub fn gamma_f64(s: f64) -> f64 {
    if s.fract() == 0.0 && s >= 1.0 && s <= 171.0 {
        return (1..s as u64).fold(1.0, |acc, k| acc * k as f64);
    }
    if s < 0.5 {
        return gamma_f64(s + 1.0) / s;
    }
    let z = s - 1.0;
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
}

/// ln Γ(s) for s > 0.
pub fn ln_gamma(s: f64) -> f64 {
    if s < 0.5 {
        return ln_gamma(s + 1.0) - s.ln();
    }
    let z = s - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

/// Γ(s) with an error estimate; `tol` is relative to `max(1, Γ(s))`.
pub fn gamma(s: f64, tol: f64) -> Result<QuadratureResult> {
    if !(s > 0.0) {
        return Err(Error::DomainError(format!("gamma needs s > 0, got {s}")));
    }
    let value = gamma_f64(s);
    let exact_int = s.fract() == 0.0 && s <= 19.0;
    let error = if exact_int { 0.0 } else { GAMMA_REL_ERR * value.abs() };
    if error > tol * value.abs().max(1.0) {
        return Err(Error::QuadratureFailure { tol, error, evaluations: 1 });
    }
    Ok(QuadratureResult { value, error, evaluations: 1 })
}

/// Regularized lower incomplete gamma P(a, x), a > 0, x ≥ 0.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cf(a, x)
    }
}

/// Non-regularized upper incomplete gamma Γ(a, x).
pub fn upper_gamma(a: f64, x: f64) -> f64 {
    if x < a + 1.0 {
        gamma_f64(a) * gamma_q(a, x)
    } else {
        gamma_cf_scaled(a, x) * (a * x.ln() - x).exp()
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..10_000 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Continued fraction for Γ(a,x)·e^x·x^{-a} (modified Lentz).
fn gamma_cf_scaled(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

fn gamma_cf(a: f64, x: f64) -> f64 {
    gamma_cf_scaled(a, x) * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Upper bound for Γ(a, x) with a ≥ 1 and x > a − 1:
/// Γ(a,x) ≤ x^{a−1}e^{−x} / (1 − (a−1)/x).
pub fn upper_gamma_bound(a: f64, x: f64) -> f64 {
    if a <= 1.0 {
        // x^{a-1} is decreasing: Γ(a,x) ≤ x^{a-1} e^{-x}
        return (x.powf(a - 1.0)) * (-x).exp();
    }
    if x <= a - 1.0 {
        return f64::INFINITY;
    }
    ((a - 1.0) * x.ln() - x).exp() / (1.0 - (a - 1.0) / x)
}

pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        -erf(-x)
    } else {
        gamma_p(0.5, x * x)
    }
}

pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        2.0 - erfc(-x)
    } else {
        gamma_q(0.5, x * x)
    }
}

/// B₂, B₄, …, B₂₆.
const BERNOULLI: [f64; 13] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
];

/// Euler–Maclaurin evaluation of ζ(s), valid for real s > −23, s ≠ 1.
/// Returns (value, truncation bound).
pub(crate) fn zeta_euler_maclaurin(s: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mut terms: Vec<f64> = (1..n).map(|k| (k as f64).powf(-s)).collect();
    terms.push(nf.powf(1.0 - s) / (s - 1.0));
    terms.push(0.5 * nf.powf(-s));
    let mut fact = 1.0; // (2k)!
    let mut rising = s; // s(s+1)…(s+2k−2)
    let mut power = nf.powf(-s - 1.0); // N^{-s-2k+1}
    let mut last = 0.0;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let k = k + 1;
        fact *= ((2 * k - 1) * (2 * k)) as f64;
        let term = b / fact * rising * power;
        if k == BERNOULLI.len() {
            last = term.abs();
            break;
        }
        terms.push(term);
        rising *= (s + (2 * k - 1) as f64) * (s + (2 * k) as f64);
        power /= nf * nf;
    }
    let value = super::quadrature::sum_sorted(terms.iter().rev().copied());
    let rounding = 4.0 * f64::EPSILON * (n as f64) * value.abs().max(1.0);
    (value, last + rounding)
}

/// Borwein's accelerated alternating series for η(s), divided by 1 − 2^{1−s}.
fn zeta_borwein(s: f64) -> (f64, f64) {
    const N: usize = 30;
    let n = N as f64;
    let mut d = Vec::with_capacity(N + 1);
    let mut term = 1.0 / n;
    let mut acc = term;
    d.push(n * acc);
    for i in 1..=N {
        let fi = i as f64;
        term *= (n + fi - 1.0) * (n - fi + 1.0) * 4.0 / ((2.0 * fi - 1.0) * (2.0 * fi));
        acc += term;
        d.push(n * acc);
    }
    let dn = d[N];
    let mut sum = 0.0;
    for k in 0..N {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (d[k] - dn) / dn * (k as f64 + 1.0).powf(-s);
    }
    let eta = -sum;
    let factor = 1.0 - 2f64.powf(1.0 - s);
    let trunc = 3.0 / (3.0 + 8f64.sqrt()).powf(n);
    let value = eta / factor;
    let error = (trunc + 4.0 * n * f64::EPSILON) / factor.abs();
    (value, error)
}

/// ζ(s) for real s > 0, s ≠ 1.
pub fn riemann_zeta(s: f64, tol: f64) -> Result<QuadratureResult> {
    if s == 1.0 {
        return Err(Error::PoleAtOne);
    }
    if !(s > 0.0) {
        return Err(Error::DomainError(format!("zeta needs s > 0, got {s}")));
    }
    let (value, error) = if s > 1.0 {
        let n = 20usize.max(s.ceil() as usize);
        zeta_euler_maclaurin(s, n)
    } else {
        zeta_borwein(s)
    };
    if error > tol {
        return Err(Error::QuadratureFailure { tol, error, evaluations: 1 });
    }
    Ok(QuadratureResult { value, error, evaluations: 1 })
}

pub fn zeta_f64(s: f64) -> f64 {
    if s > 1.0 {
        zeta_euler_maclaurin(s, 20usize.max(s.ceil() as usize)).0
    } else {
        zeta_borwein(s).0
    }
}

/// Z(s) = 2π^{−s/2}Γ(s/2)ζ(s).
pub fn complete_zeta(s: f64, tol: f64) -> Result<QuadratureResult> {
    let g = gamma(s / 2.0, 1e-12)?;
    let z = riemann_zeta(s, tol.min(1e-12).max(1e-15))?;
    let pre = 2.0 * PI.powf(-s / 2.0);
    let value = pre * g.value * z.value;
    let error = pre * (g.error * z.value.abs() + g.value.abs() * z.error + g.error * z.error)
        + 4.0 * f64::EPSILON * value.abs();
    if error > tol {
        return Err(Error::QuadratureFailure { tol, error, evaluations: 2 });
    }
    Ok(QuadratureResult { value, error, evaluations: 2 })
}

/// Bessel J₁(z) from (1/2π)∫₀^{2π} cos(τ − z sin τ)dτ by the trapezoidal rule,
/// which converges geometrically for this periodic entire integrand.
pub fn bessel_j1(z: f64) -> f64 {
    let m = (2.0 * (z.abs() + 40.0)).ceil() as usize;
    let h = 2.0 * PI / m as f64;
    let s: f64 = (0..m).map(|k| {
        let tau = k as f64 * h;
        (tau - z * tau.sin()).cos()
    }).sum();
    s / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::quadrature::integrate;

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(1.0, 1e-12).unwrap().value, 1.0);
        assert_eq!(gamma(10.0, 1e-12).unwrap().value, 362880.0);
        assert!((gamma(0.5, 1e-12).unwrap().value - PI.sqrt()).abs() < 1e-14);
        assert!(matches!(gamma(0.0, 1e-12), Err(Error::DomainError(_))));
        assert!(matches!(gamma(-1.5, 1e-12), Err(Error::DomainError(_))));
    }

    #[test]
    fn gamma_matches_integral_oracle() {
        for &s in &[0.3, 0.75, 1.5, 2.5, 4.2, 7.7] {
            let g = gamma_f64(s);
            let q = integrate(|u: f64| {
                // u = e^w substitution keeps the integrand smooth at 0
                let x = u.exp();
                x.powf(s) * (-x).exp()
            }, -200.0, 5.0, 1e-13 * g.max(1.0)).unwrap();
            assert!((q.value - g).abs() <= 2e-12 * g.max(1.0), "s={s}: {} vs {g}", q.value);
        }
    }

    #[test]
    fn gamma_recurrence() {
        for &s in &[0.1, 0.7, 1.3, 3.9, 11.2] {
            let lhs = gamma_f64(s + 1.0);
            let rhs = s * gamma_f64(s);
            assert!((lhs - rhs).abs() <= 1e-13 * lhs);
        }
        assert!((ln_gamma(30.5) - gamma_f64(30.5).ln()).abs() < 1e-12);
    }

    #[test]
    fn incomplete_gamma() {
        // P(1, x) = 1 - e^{-x}
        for &x in &[0.1, 1.0, 2.5, 10.0] {
            assert!((gamma_p(1.0, x) - (1.0 - (-x as f64).exp())).abs() < 1e-15);
        }
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erfc(3.0) - 2.209_049_699_858_544e-5).abs() < 1e-19);
        // Γ(2, x) = (x+1) e^{-x}
        for &x in &[0.5, 3.0, 40.0] {
            let exact = (x + 1.0) * (-x as f64).exp();
            assert!((upper_gamma(2.0, x) - exact).abs() <= 1e-14 * exact);
            assert!(upper_gamma_bound(2.0, x.max(1.5)) >= upper_gamma(2.0, x.max(1.5)));
        }
    }

    #[test]
    fn zeta_values() {
        let z2 = riemann_zeta(2.0, 1e-13).unwrap();
        assert!((z2.value - PI * PI / 6.0).abs() <= 1e-14);
        let z4 = riemann_zeta(4.0, 1e-13).unwrap();
        assert!((z4.value - PI.powi(4) / 90.0).abs() <= 1e-14);
        assert!(matches!(riemann_zeta(1.0, 1e-10), Err(Error::PoleAtOne)));
        assert!(matches!(riemann_zeta(-1.0, 1e-10), Err(Error::DomainError(_))));
    }

    #[test]
    fn zeta_below_one_matches_continuation() {
        // Euler–Maclaurin is valid for the continuation too
        for &s in &[0.1, 0.3, 0.5, 0.75, 0.95] {
            let (oracle, err) = zeta_euler_maclaurin(s, 40);
            let z = riemann_zeta(s, 1e-12).unwrap();
            assert!((z.value - oracle).abs() <= z.error + err + 1e-14, "s={s}");
        }
        assert!((zeta_f64(0.5) + 1.460_354_508_809_586_8).abs() < 1e-13);
    }

    #[test]
    fn complete_zeta_functional_equation() {
        for &s in &[0.3, 0.4] {
            let a = complete_zeta(s, 1e-10).unwrap();
            let b = complete_zeta(1.0 - s, 1e-10).unwrap();
            assert!((a.value - b.value).abs() <= 1e-8);
        }
        assert!((complete_zeta(2.0, 1e-10).unwrap().value - PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn bessel_j1_values() {
        assert!((bessel_j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_j1(10.0) - 0.043_472_746_168_861_44).abs() < 1e-15);
        assert!(bessel_j1(0.0).abs() < 1e-16);
    }
}
