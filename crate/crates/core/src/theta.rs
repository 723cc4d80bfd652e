//! Certified theta series `Σ_{v∈L} e^{−πt‖v‖²}`, h⁰_θ and the Riemann–Roch defect.

use std::f64::consts::PI;

use serde::Serialize;

use crate::analysis::special::upper_gamma_bound;
use crate::bounded::BoundedReal;
use crate::enumeration::{BallWalker, Budget};
use crate::error::{Error, Result};
use crate::lattice::{from_f64, Lattice, Rational};

/// A theta value with `value ≤ Σ ≤ value + tail` for the true sum Σ.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaValue {
    pub t: f64,
    pub value: f64,
    pub tail: f64,
    #[serde(serialize_with = "ser_rational")]
    pub radius_sq_used: Rational,
    pub terms: u64,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

impl ThetaValue {
    /// Midpoint of the certified enclosure.
    pub fn bounded(&self) -> BoundedReal {
        BoundedReal::new(self.value + 0.5 * self.tail, 0.5 * self.tail)
    }
}

/// Upper bound for `Σ_{‖v‖>R} e^{−πt‖v‖²}` from the point-count bound
/// `N(ρ) ≤ ∏ (1 + 2ρ/√q_i)` over Gram–Schmidt squared lengths `q_i`.
pub(crate) fn tail_bound(gs_sq: &[f64], t: f64, r2: f64) -> f64 {
    let mut coef = vec![1.0f64];
    for &q in gs_sq {
        let c = 2.0 / (q * (1.0 - 1e-9)).sqrt();
        let mut next = vec![0.0; coef.len() + 1];
        for (k, a) in coef.iter().enumerate() {
            next[k] += a;
            next[k + 1] += a * c;
        }
        coef = next;
    }
    let pt = PI * t;
    let x = pt * r2;
    coef.iter()
        .enumerate()
        .map(|(k, a)| {
            let k = k as f64;
            a * pt.powf(-k / 2.0) * upper_gamma_bound(k / 2.0 + 1.0, x)
        })
        .sum()
}

fn check_params(t: f64, eps: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

/// Smallest radius (on a geometric grid) whose tail bound is at most `target`.
fn choose_radius_sq(gs_sq: &[f64], t: f64, target: f64) -> f64 {
    let mut r2 = ((4.0 / target).ln() / (PI * t)).max(1e-300);
    for _ in 0..400 {
        if tail_bound(gs_sq, t, r2) <= target {
            return r2;
        }
        r2 *= 1.2;
    }
    r2
}

/// Neumaier-compensated sum of nonnegative terms in increasing order.
fn compensated_sum(terms: &mut [f64]) -> f64 {
    terms.sort_by(|a, b| a.total_cmp(b));
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in terms.iter() {
        let s = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - s) + x;
        } else {
            comp += (x - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

pub fn theta_series(lattice: &Lattice, t: f64, eps: f64) -> Result<ThetaValue> {
    theta_series_with(lattice, t, eps, Budget::default())
}

/// θ(t) with total error (truncation plus rounding) at most `eps`.
pub fn theta_series_with(lattice: &Lattice, t: f64, eps: f64, budget: Budget) -> Result<ThetaValue> {
    check_params(t, eps)?;
    let walker = BallWalker::new(lattice)?;
    let r2 = choose_radius_sq(&walker.gs_lengths_sq(), t, eps / 2.0);
    let r2 = from_f64(r2).ok_or_else(|| Error::InvalidParameter("radius overflow".into()))?;
    let v = sum_over_ball(&walker, t, &r2, budget)?;
    if v.tail > eps {
        return Err(Error::BudgetExceeded { what: "theta precision", needed: v.tail / eps, cap: budget.0 });
    }
    Ok(v)
}

/// θ(t) summed over the closed ball of the given squared radius, with the
/// certified tail for that radius.
pub fn theta_series_at_radius(lattice: &Lattice, t: f64, radius_sq: &Rational, budget: Budget) -> Result<ThetaValue> {
    check_params(t, 1.0)?;
    let walker = BallWalker::new(lattice)?;
    sum_over_ball(&walker, t, radius_sq, budget)
}

fn sum_over_ball(walker: &BallWalker, t: f64, radius_sq: &Rational, budget: Budget) -> Result<ThetaValue> {
    let mut terms = Vec::new();
    walker.walk(radius_sq, budget, |_, s| {
        let norm = walker.scaled_norm_to_f64(s);
        terms.push((-PI * t * norm).exp());
    })?;
    let m = terms.len() as f64;
    let sum = compensated_sum(&mut terms);
    let r2 = crate::lattice::to_f64(radius_sq);
    let eps = f64::EPSILON;
    let allowance = sum * eps * (3.0 * PI * t * r2 + 6.0 + m * eps);
    let trunc = tail_bound(&walker.gs_lengths_sq(), t, r2);
    let value = (sum - allowance).max(1.0);
    Ok(ThetaValue {
        t,
        value,
        tail: trunc + 2.0 * allowance,
        radius_sq_used: radius_sq.clone(),
        terms: m as u64,
    })
}

/// θ(t) for the rank-one lattice with an inexact Gram entry `a`.
/// The uncertainty of `a` is folded into the tail.
pub fn theta_rank1_real(a: BoundedReal, t: f64, eps: f64) -> Result<ThetaValue> {
    check_params(t, eps)?;
    let lo = a.lower();
    if !(lo > 0.0) {
        return Err(Error::InvalidParameter("gram entry must be bounded away from zero".into()));
    }
    let c = PI * t * lo;
    // 2 Σ_{k>K} e^{−c k²} ≤ 2 e^{−c(K+1)²} / (1 − e^{−c(2K+3)})
    let tail_after = |k: f64| 2.0 * (-c * (k + 1.0) * (k + 1.0)).exp() / (1.0 - (-c * (2.0 * k + 3.0)).exp());
    let mut k_max = 0u64;
    while tail_after(k_max as f64) > eps / 4.0 {
        k_max += 1;
        if k_max > 100_000_000 {
            return Err(Error::BudgetExceeded { what: "rank-one theta", needed: k_max as f64, cap: 100_000_000 });
        }
    }
    let mut terms: Vec<f64> = Vec::with_capacity(k_max as usize + 1);
    let mut sens = 0.0;
    terms.push(1.0);
    for k in 1..=k_max {
        let k2 = (k * k) as f64;
        terms.push(2.0 * (-PI * t * a.estimate * k2).exp());
        sens += 2.0 * PI * t * k2 * (-c * k2).exp();
    }
    let m = terms.len() as f64;
    let sum = compensated_sum(&mut terms);
    let e = f64::EPSILON;
    let allowance = sum * e * (3.0 * c * (k_max * k_max) as f64 + 6.0 + m * e) + sens * a.bound;
    Ok(ThetaValue {
        t,
        value: (sum - allowance).max(1.0),
        tail: tail_after(k_max as f64) + 2.0 * allowance,
        radius_sq_used: from_f64(a.estimate * (k_max * k_max) as f64).unwrap_or_default(),
        terms: 2 * k_max + 1,
    })
}

/// `ln` of a theta enclosure; the bound covers `[value, value + tail]`.
pub fn log_theta(v: &ThetaValue) -> BoundedReal {
    let est = v.value.ln();
    BoundedReal::new(est, v.tail / v.value + 2.0 * f64::EPSILON * est.abs())
}

/// h⁰_θ(L) = log θ_L(1), with `eps` bounding the error of the logarithm.
pub fn h0_theta(lattice: &Lattice, eps: f64) -> Result<BoundedReal> {
    h0_theta_with(lattice, eps, Budget::default())
}

pub fn h0_theta_with(lattice: &Lattice, eps: f64, budget: Budget) -> Result<BoundedReal> {
    // θ_L(1) = covol⁻¹ θ_{L^∨}(1) ≥ max(1, 1/covol)
    let floor = (1.0 / lattice.covolume().upper()).max(1.0);
    Ok(log_theta(&theta_series_with(lattice, 1.0, eps * floor, budget)?))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RiemannRoch {
    pub h0_theta: BoundedReal,
    pub h0_theta_dual: BoundedReal,
    pub degree: BoundedReal,
    pub defect: BoundedReal,
}

/// h⁰_θ(L) − h⁰_θ(L^∨) − deg(L), with each ingredient reported.
pub fn riemann_roch(lattice: &Lattice, eps: f64, budget: Budget) -> Result<RiemannRoch> {
    let h = h0_theta_with(lattice, eps, budget)?;
    let hd = h0_theta_with(&lattice.dual(), eps, budget)?;
    let deg = lattice.arithmetic_degree();
    Ok(RiemannRoch { h0_theta: h, h0_theta_dual: hd, degree: deg, defect: h - hd - deg })
}

pub fn rr_defect(lattice: &Lattice, eps: f64) -> Result<BoundedReal> {
    Ok(riemann_roch(lattice, eps, Budget::default())?.defect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{int, rat};

    const THETA_Z_1: f64 = 1.086_434_811_213_308;

    /// Direct summation over |k| ≤ K of a rank-one theta series.
    fn oracle_rank1(a: f64, t: f64, k: i64) -> f64 {
        let mut s = 0.0;
        for j in (1..=k).rev() {
            s += 2.0 * (-PI * t * a * (j * j) as f64).exp();
        }
        1.0 + s
    }

    #[test]
    fn integers_at_one() {
        let v = theta_series(&Lattice::standard(1), 1.0, 1e-12).unwrap();
        assert!(v.tail <= 1e-12);
        assert!((v.value - THETA_Z_1).abs() <= 1e-12);
        assert!((oracle_rank1(1.0, 1.0, 8) - THETA_Z_1).abs() <= 2e-16);
        let closed = PI.powf(0.25) / crate::analysis::special::gamma_f64(0.75);
        assert!((closed - THETA_Z_1).abs() <= 1e-14);
    }

    #[test]
    fn enclosure_contains_oracle() {
        for (g, a) in [(int(4), 4.0), (rat(1, 4), 0.25), (rat(9, 100), 0.09)] {
            let l = crate::lattice::make_lattice(vec![vec![g]]).unwrap();
            for &t in &[0.3, 1.0, 2.0] {
                let v = theta_series(&l, t, 1e-11).unwrap();
                let o = oracle_rank1(a, t, 400);
                assert!(v.value <= o + 1e-15 && o <= v.value + v.tail + 1e-15, "a={a} t={t}");
            }
        }
    }

    #[test]
    fn large_t_limit() {
        let l = Lattice::from_integers(&[&[2, 1], &[1, 2]]).unwrap();
        let v = theta_series(&l, 1e6, 1e-9).unwrap();
        assert!((v.value - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn scaling_relation() {
        let l = Lattice::from_integers(&[&[2, 1], &[1, 3]]).unwrap();
        let c = rat(3, 2);
        let a = theta_series(&l.scale(&c).unwrap(), 1.0, 1e-12).unwrap();
        let b = theta_series(&l, 2.25, 1e-12).unwrap();
        assert!((a.value - b.value).abs() <= a.tail + b.tail + 1e-15);
    }

    #[test]
    fn h0_theta_examples() {
        let h = h0_theta(&Lattice::standard(1), 1e-12).unwrap();
        assert!((h.estimate - THETA_Z_1.ln()).abs() <= 1e-12);
        let big = Lattice::from_integers(&[&[1_000_000]]).unwrap();
        let h = h0_theta(&big, 1e-12).unwrap();
        assert!(h.estimate.abs() <= 1e-12 && h.estimate >= 0.0);
    }

    #[test]
    fn rr_defect_examples() {
        for l in [
            Lattice::standard(3),
            Lattice::from_integers(&[&[4]]).unwrap(),
            Lattice::from_integers(&[&[2, 1], &[1, 2]]).unwrap(),
        ] {
            let d = rr_defect(&l, 1e-12).unwrap();
            assert!(d.estimate.abs() <= d.bound && d.bound <= 1e-9, "{l}: {d}");
        }
        // log θ([4]) − log θ([1/4]) = −log 2 via the direct oracles
        let lhs = oracle_rank1(4.0, 1.0, 10).ln() - oracle_rank1(0.25, 1.0, 40).ln();
        assert!((lhs + 2f64.ln()).abs() <= 1e-14);
    }

    #[test]
    fn doubling_radius_stays_within_tail() {
        let l = Lattice::from_integers(&[&[3, 1, 0], &[1, 2, 1], &[0, 1, 4]]).unwrap();
        let v = theta_series(&l, 0.7, 1e-6).unwrap();
        let r4 = &v.radius_sq_used * int(4);
        let w = theta_series_at_radius(&l, 0.7, &r4, Budget::default()).unwrap();
        assert!((w.value - v.value).abs() <= v.tail);
    }

    #[test]
    fn rank_one_real_gram() {
        let v = theta_rank1_real(BoundedReal::exact(1.0), 1.0, 1e-12).unwrap();
        assert!((v.value - THETA_Z_1).abs() <= 1e-12);
        let a = BoundedReal::new(0.25, 1e-13);
        let v = theta_rank1_real(a, 1.0, 1e-10).unwrap();
        let o = oracle_rank1(0.25, 1.0, 40);
        assert!(v.value <= o && o <= v.value + v.tail);
    }

    #[test]
    fn invalid_parameters() {
        assert!(theta_series(&Lattice::standard(1), 0.0, 1e-6).is_err());
        assert!(theta_series(&Lattice::standard(1), 1.0, 0.0).is_err());
    }
}
