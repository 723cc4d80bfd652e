//! Mellin transforms of positive test functions with declared decay
//! envelopes, the divisor integral over Arakelov divisors of ℚ, and the
//! identity relating the two.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::quadrature::{integrate, QuadratureResult};
use super::special::riemann_zeta;
use crate::arakelov::EffectivityFn;
use crate::error::{Error, Result};

/// Open strip `a < s < b` on which a Mellin transform converges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MellinBand {
    pub a: f64,
    pub b: f64,
}

impl MellinBand {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidParameter(format!("band needs a < b, got ({a}, {b})")));
        }
        Ok(MellinBand { a, b })
    }

    pub fn contains(&self, s: f64) -> bool {
        self.a < s && s < self.b
    }
}

/// Decay envelope `f(e^{±w}) ≤ C·exp(α·w − β·e^w)` for `w ≥ from`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub from: f64,
}

impl Envelope {
    pub fn at(&self, w: f64) -> f64 {
        self.c * (self.alpha * w - self.beta * w.exp()).exp()
    }

    /// Bound on `∫_W^∞ C e^{a w − β e^w} dw` where `a` already includes the
    /// Mellin exponent. Infinite when the integral diverges or no bound applies.
    fn tail(&self, a: f64, w0: f64) -> f64 {
        if self.beta > 0.0 {
            let x = w0.exp();
            let core = self.c * ((a - 1.0) * w0 - self.beta * x).exp();
            if a <= 1.0 {
                core / self.beta
            } else if self.beta * x > a - 1.0 {
                core / (self.beta - (a - 1.0) / x)
            } else {
                f64::INFINITY
            }
        } else if a < 0.0 {
            self.c * (a * w0).exp() / -a
        } else {
            f64::INFINITY
        }
    }
}

/// A positive function on ℝ₊ with its supremum and decay envelopes at
/// ∞ (`upper`) and at 0 (`lower`).
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub sup: f64,
    pub upper: Envelope,
    pub lower: Envelope,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("sup", &self.sup)
            .field("upper", &self.upper)
            .field("lower", &self.lower)
            .finish()
    }
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    /// `e^{−πx}`, sup 1.
    pub fn gaussian() -> TestFunction {
        TestFunction {
            name: "gs".into(),
            f: Arc::new(|x: f64| (-PI * x).exp()),
            sup: 1.0,
            upper: Envelope { c: 1.0, alpha: 0.0, beta: PI, from: 0.0 },
            lower: Envelope { c: 1.0, alpha: 0.0, beta: 0.0, from: 0.0 },
        }
    }

    /// `e^{−π(x + 1/x)}`, sup `e^{−2π}` at x = 1.
    pub fn symmetric_exp() -> TestFunction {
        let env = Envelope { c: 1.0, alpha: 0.0, beta: PI, from: 0.0 };
        TestFunction {
            name: "symexp".into(),
            f: Arc::new(|x: f64| (-PI * (x + 1.0 / x)).exp()),
            sup: (-2.0 * PI).exp(),
            upper: env,
            lower: env,
        }
    }

    /// Convergence strip implied by the envelopes.
    pub fn band(&self) -> MellinBand {
        let b = if self.upper.beta > 0.0 { f64::INFINITY } else { -self.upper.alpha };
        let a = if self.lower.beta > 0.0 { f64::NEG_INFINITY } else { self.lower.alpha };
        MellinBand { a, b }
    }

    /// Spot-checks positivity and both envelopes on a sample grid.
    pub fn validate(&self, w_max: f64) -> Result<()> {
        let steps = 64;
        for (env, sign) in [(&self.upper, 1.0), (&self.lower, -1.0)] {
            let span = (w_max - env.from).max(1.0);
            for k in 0..=steps {
                let w = env.from + span * k as f64 / steps as f64;
                let u = sign * w;
                let value = self.eval(u.exp());
                if !(value >= 0.0) {
                    return Err(Error::InvalidParameter(format!("{} is not positive at x = e^{u}", self.name)));
                }
                let bound = env.at(w);
                if value > bound * (1.0 + 1e-12) + 1e-300 {
                    return Err(Error::EnvelopeViolation { u, value, envelope: bound });
                }
            }
        }
        for k in -8..=8 {
            let x = (k as f64 * 0.5).exp();
            if !(self.eval(x) > 0.0) {
                return Err(Error::InvalidParameter(format!("{} is not positive at x = {x}", self.name)));
            }
            if self.eval(x) > self.sup * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!("{} exceeds its declared sup at x = {x}", self.name)));
            }
        }
        Ok(())
    }

    /// Truncation points `(W_lower, W_upper)` whose envelope tails for the
    /// exponent `s` are each below `target`.
    fn cutoffs(&self, s: f64, target: f64) -> Result<(f64, f64)> {
        let find = |env: &Envelope, a: f64| -> Result<f64> {
            let mut w = env.from.max(0.0);
            for _ in 0..100_000 {
                if env.tail(a, w) <= target {
                    return Ok(w);
                }
                w += 0.25;
            }
            Err(Error::QuadratureFailure { tol: target, error: f64::INFINITY, evaluations: 0 })
        };
        Ok((find(&self.lower, self.lower.alpha - s)?, find(&self.upper, self.upper.alpha + s)?))
    }
}

fn check_band(tf: &TestFunction, s: f64) -> Result<()> {
    let band = tf.band();
    if !band.contains(s) {
        return Err(Error::OutOfBand { s, a: band.a, b: band.b });
    }
    Ok(())
}

/// `∫₀^∞ x^{s−1} f(x) dx`, integrated in `u = ln x`.
pub fn mellin(tf: &TestFunction, s: f64, tol: f64) -> Result<QuadratureResult> {
    check_band(tf, s)?;
    let (wl, wu) = tf.cutoffs(s, tol / 8.0)?;
    tf.validate(wl.max(wu) + 4.0)?;
    let tails = tf.lower.tail(tf.lower.alpha - s, wl) + tf.upper.tail(tf.upper.alpha + s, wu);
    let q = integrate(|u: f64| (s * u).exp() * tf.eval(u.exp()), -wl, wu, tol / 2.0)?;
    Ok(QuadratureResult { value: q.value, error: q.error + tails, evaluations: q.evaluations })
}

/// `∫ₗ (1/c) f(e^{−2λ}) e^{−sλ} dλ`, integrated in λ.
pub fn lambda_integral(tf: &TestFunction, s: f64, tol: f64) -> Result<QuadratureResult> {
    let half = s / 2.0;
    check_band(tf, half)?;
    // λ → −∞ is x → ∞ (upper envelope), λ → +∞ is x → 0 (lower)
    let (wl, wu) = tf.cutoffs(half, tol * tf.sup / 8.0)?;
    tf.validate(wl.max(wu) + 4.0)?;
    let c = tf.sup;
    let tails = (tf.lower.tail(tf.lower.alpha - half, wl) + tf.upper.tail(tf.upper.alpha + half, wu)) / (2.0 * c);
    let q = integrate(
        |lam: f64| tf.eval((-2.0 * lam).exp()) / c * (-s * lam).exp(),
        -wu / 2.0,
        wl / 2.0,
        tol / 2.0,
    )?;
    Ok(QuadratureResult { value: q.value, error: q.error + tails, evaluations: q.evaluations })
}

/// `∫_{Div} e(D) N(D)^{−s} dD = ζ(s) · ∫ (1/c) f(e^{−2λ}) e^{−sλ} dλ`, for s > 1.
pub fn divisor_integral(eff: &EffectivityFn, s: f64, tol: f64) -> Result<QuadratureResult> {
    if !(s > 1.0) {
        return Err(Error::DomainError(format!("divisor integral needs s > 1, got {s}")));
    }
    let tf = eff.test_function();
    let z = riemann_zeta(s, 1e-13)?;
    let li = lambda_integral(&tf, s, tol / (2.0 * z.value))?;
    let value = z.value * li.value;
    let error = z.value * li.error + z.error * li.value.abs() + z.error * li.error + 2.0 * f64::EPSILON * value.abs();
    Ok(QuadratureResult { value, error, evaluations: li.evaluations + z.evaluations })
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityRow {
    pub s: f64,
    pub mellin: QuadratureResult,
    pub divisor_route: QuadratureResult,
    pub difference: f64,
    pub bound: f64,
    pub passed: bool,
}

/// Compares `M(f)(s)` with `(2c/ζ(2s)) · ∫ e(D) N(D)^{−2s} dD` for each s.
/// A row passes when the two sides differ by at most `tol`.
pub fn verify_mellin_identity(eff: &EffectivityFn, s_list: &[f64], tol: f64) -> Result<Vec<IdentityRow>> {
    let tf = eff.test_function();
    let c = tf.sup;
    let mut rows = Vec::with_capacity(s_list.len());
    for &s in s_list {
        if !(2.0 * s > 1.0) {
            return Err(Error::DomainError(format!("identity needs 2s > 1, got s = {s}")));
        }
        let m = mellin(&tf, s, tol / 10.0)?;
        let z = riemann_zeta(2.0 * s, 1e-13)?;
        let pre = 2.0 * c / z.value;
        let di = divisor_integral(eff, 2.0 * s, tol / (10.0 * pre))?;
        let value = pre * di.value;
        let error = pre * di.error + value.abs() * z.error / z.value + 2.0 * f64::EPSILON * value.abs();
        let route = QuadratureResult { value, error, evaluations: di.evaluations };
        let difference = (m.value - route.value).abs();
        rows.push(IdentityRow {
            s,
            mellin: m,
            divisor_route: route,
            difference,
            bound: m.error + route.error,
            passed: difference <= tol,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::special::{gamma_f64, zeta_f64};

    #[test]
    fn gaussian_mellin_is_gamma() {
        let tf = TestFunction::gaussian();
        for &s in &[0.5, 1.0, 2.0, 3.0] {
            let m = mellin(&tf, s, 1e-11).unwrap();
            let exact = PI.powf(-s) * gamma_f64(s);
            assert!((m.value - exact).abs() <= m.error + 1e-13 * exact, "s={s}");
        }
        let m = mellin(&tf, 2.0, 1e-12).unwrap();
        assert!((m.value - 1.0 / (PI * PI)).abs() <= 1e-12);
    }

    #[test]
    fn band_is_enforced() {
        let tf = TestFunction::gaussian();
        assert!(matches!(mellin(&tf, -0.5, 1e-8), Err(Error::OutOfBand { .. })));
        assert!(mellin(&TestFunction::symmetric_exp(), -3.0, 1e-8).is_ok());
    }

    #[test]
    fn symmetric_function_is_even_in_s() {
        let tf = TestFunction::symmetric_exp();
        for &s in &[0.0, 0.7, 1.5] {
            let a = mellin(&tf, s, 1e-12).unwrap();
            let b = mellin(&tf, -s, 1e-12).unwrap();
            assert!((a.value - b.value).abs() <= a.error + b.error);
            assert!(a.value > 0.0);
        }
    }

    #[test]
    fn x_space_oracle_agrees() {
        // direct x-space quadrature of x^{s-1} e^{-π(x+1/x)} at s = 1
        let tf = TestFunction::symmetric_exp();
        let oracle = integrate(|x: f64| (-PI * (x + 1.0 / x)).exp(), 1e-9, 30.0, 1e-14).unwrap();
        let m = mellin(&tf, 1.0, 1e-12).unwrap();
        assert!((m.value - oracle.value).abs() <= 1e-12);
    }

    #[test]
    fn envelope_violation_detected() {
        let mut tf = TestFunction::gaussian();
        tf.upper.beta = 10.0;
        assert!(matches!(mellin(&tf, 1.0, 1e-8), Err(Error::EnvelopeViolation { .. })));
    }

    #[test]
    fn divisor_integral_for_gaussian() {
        let d = divisor_integral(&EffectivityFn::Gs, 2.0, 1e-11).unwrap();
        let exact = zeta_f64(2.0) / (2.0 * PI);
        assert!((d.value - exact).abs() <= d.error + 1e-14);
        assert!(divisor_integral(&EffectivityFn::Gs, 1.0, 1e-8).is_err());
        let g = divisor_integral(&EffectivityFn::General(TestFunction::symmetric_exp()), 3.0, 1e-10).unwrap();
        assert!(g.value > 0.0 && g.value.is_finite());
    }

    #[test]
    fn identity_holds() {
        let eff = EffectivityFn::General(TestFunction::symmetric_exp());
        let rows = verify_mellin_identity(&eff, &[1.0, 1.5, 2.0], 1e-6).unwrap();
        assert!(rows.iter().all(|r| r.passed && r.difference <= 1e-8));
        let rows = verify_mellin_identity(&EffectivityFn::Gs, &[2.0], 1e-6).unwrap();
        assert!(rows[0].passed);
        assert!(verify_mellin_identity(&eff, &[], 1e-6).unwrap().is_empty());
    }
}
