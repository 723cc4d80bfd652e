//! Gaussian (θ), smeared (quantum) and indicator (classical) measures on a
//! lattice, their limits, and a numerical check of Poisson summation for the
//! smeared ball indicator.
//!
//! Gaussians are normalized to unit mass in rank n: `t^{n/2} e^{−πt‖x‖²}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::analysis::quadrature::integrate_with_breaks;
use crate::analysis::special::{bessel_j1, erfc, gamma_f64, gamma_p};
use crate::bounded::BoundedReal;
use crate::enumeration::{count_ball, BallWalker, Budget};
use crate::error::{Error, Result};
use crate::lattice::{from_f64, to_f64, Lattice, LatticeVector, Rational};
use crate::theta::tail_bound;

pub const NORMALIZATION: &str = "t^{n/2}";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureParams {
    pub t: f64,
    pub r: f64,
}

impl MeasureParams {
    pub fn new(t: f64, r: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
        }
        Ok(MeasureParams { t, r })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub lhs: BoundedReal,
    pub rhs: BoundedReal,
    pub reference: f64,
}

impl SweepRow {
    pub fn deviation(&self) -> f64 {
        (self.lhs.estimate - self.reference).abs()
    }
}

/// Volume of the n-dimensional ball of radius r.
pub fn vol_ball(n: usize, r: f64) -> f64 {
    let n = n as f64;
    PI.powf(n / 2.0) * r.powf(n) / gamma_f64(n / 2.0 + 1.0)
}

pub fn mu_theta(lattice: &Lattice, v: &LatticeVector, t: f64) -> Result<f64> {
    let n2 = to_f64(&lattice.norm_sq(v)?);
    Ok(t.powf(lattice.rank() as f64 / 2.0) * (-PI * t * n2).exp())
}

/// Mass inside the closed ball `B_r(0)` of the unit-mass Gaussian centred at
/// a point at distance √d2 from the origin, in dimension n.
pub(crate) fn smeared_mass(n: usize, d2: f64, t: f64, r: f64, tol: f64) -> Result<BoundedReal> {
    let d = d2.max(0.0).sqrt();
    let st = (PI * t).sqrt();
    // keep x₁ within k/√(πt) of d; the dropped mass is ≤ erfc(k)
    let mut k = 1.0;
    while erfc(k) > tol / 4.0 {
        k += 0.5;
    }
    let half = k / st;
    let lo = (-r).max(d - half);
    let hi = r.min(d + half);
    let dropped = erfc(k);
    if lo >= hi {
        return Ok(BoundedReal::new(0.0, dropped));
    }
    let a = (n as f64 - 1.0) / 2.0;
    let integrand = |x: f64| {
        let g = t.sqrt() * (-PI * t * (x - d) * (x - d)).exp();
        if n == 1 {
            g
        } else {
            g * gamma_p(a, PI * t * (r * r - x * x).max(0.0))
        }
    };
    let mut breaks = vec![lo];
    if d > lo && d < hi {
        breaks.push(d);
    }
    breaks.push(hi);
    let q = integrate_with_breaks(integrand, &breaks, tol / 2.0)?;
    let value = q.value.clamp(0.0, 1.0);
    // gamma_p is accurate to a few ulps; its error integrates to ≤ 1e-15·mass
    Ok(BoundedReal::new(value, q.error + dropped + 1e-15))
}

/// `∫_{B_r} t^{n/2} e^{−πt‖x − v‖²} dx`.
pub fn mu_quantum(lattice: &Lattice, v: &LatticeVector, t: f64, r: f64, tol: f64) -> Result<BoundedReal> {
    MeasureParams::new(t, r)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let d2 = to_f64(&lattice.norm_sq(v)?);
    smeared_mass(lattice.rank(), d2, t, r, tol)
}

fn exact_radius_sq(r: f64) -> Result<Rational> {
    if !(r >= 0.0) {
        return Err(Error::RadiusNegative);
    }
    let q = from_f64(r).ok_or_else(|| Error::InvalidParameter(format!("radius {r} is not finite")))?;
    Ok(&q * &q)
}

/// 1 when ‖v‖ ≤ r (closed ball, exact comparison against the binary value of r).
pub fn mu_classical(lattice: &Lattice, v: &LatticeVector, r: f64) -> Result<u8> {
    let r2 = exact_radius_sq(r)?;
    Ok(u8::from(lattice.norm_sq(v)? <= r2))
}

/// Rows `(r, μ_Q/vol(B_r), μ_θ)` for decreasing radii.
pub fn small_ball_sweep(lattice: &Lattice, v: &LatticeVector, t: f64, r_list: &[f64], tol: f64) -> Result<Vec<SweepRow>> {
    if r_list.windows(2).any(|w| !(w[1] < w[0])) || r_list.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidParameter("radii must be positive and strictly decreasing".into()));
    }
    let reference = mu_theta(lattice, v, t)?;
    r_list
        .iter()
        .map(|&r| {
            let vol = vol_ball(lattice.rank(), r);
            let m = mu_quantum(lattice, v, t, r, tol)?;
            Ok(SweepRow {
                parameter: r,
                lhs: m / BoundedReal::rounded(vol),
                rhs: BoundedReal::exact(reference),
                reference,
            })
        })
        .collect()
}

/// Rows `(t, μ_Q, ψ_{B_r}(v))` for increasing t.
pub fn large_t_sweep(lattice: &Lattice, v: &LatticeVector, t_list: &[f64], r: f64, tol: f64) -> Result<Vec<SweepRow>> {
    if t_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("t values must be strictly increasing".into()));
    }
    let r2 = exact_radius_sq(r)?;
    if lattice.norm_sq(v)? == r2 {
        return Err(Error::BoundaryVector);
    }
    let reference = f64::from(mu_classical(lattice, v, r)?);
    t_list
        .iter()
        .map(|&t| {
            Ok(SweepRow {
                parameter: t,
                lhs: mu_quantum(lattice, v, t, r, tol)?,
                rhs: BoundedReal::exact(reference),
                reference,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PoissonCheck {
    pub t: f64,
    pub r: f64,
    pub lhs: BoundedReal,
    pub rhs: BoundedReal,
    pub count_primal: u64,
    pub count_dual: BoundedReal,
}

impl PoissonCheck {
    pub fn consistent(&self) -> bool {
        self.lhs.overlaps(&self.rhs)
    }
}

/// Fourier transform of the indicator of the radius-r ball at |ξ| = `rho`.
fn ball_transform(n: usize, r: f64, rho: f64) -> f64 {
    match n {
        1 => {
            if rho == 0.0 {
                2.0 * r
            } else {
                (2.0 * PI * r * rho).sin() / (PI * rho)
            }
        }
        _ => {
            if rho == 0.0 {
                PI * r * r
            } else {
                r * bessel_j1(2.0 * PI * r * rho) / rho
            }
        }
    }
}

fn radius_for(walker: &BallWalker, t: f64, target: f64, at_least: f64) -> Result<Rational> {
    let gs = walker.gs_lengths_sq();
    let mut r2 = at_least.max(((4.0 / target).ln() / (PI * t)).max(1e-12));
    while tail_bound(&gs, t, r2) > target {
        r2 *= 1.2;
    }
    from_f64(r2).ok_or_else(|| Error::InvalidParameter("radius overflow".into()))
}

/// Both sides of Poisson summation for `f = 1_{B_r} ⋆ g_t`:
/// `Σ_{v∈L} μ_Q(v)` and `covol⁻¹ Σ_{ξ∈L^∨} 1̂_{B_r}(ξ) e^{−π‖ξ‖²/t}`.
pub fn poisson_identity(lattice: &Lattice, t: f64, r: f64, eps: f64) -> Result<PoissonCheck> {
    poisson_identity_with(lattice, t, r, eps, Budget::default())
}

pub fn poisson_identity_with(lattice: &Lattice, t: f64, r: f64, eps: f64, budget: Budget) -> Result<PoissonCheck> {
    MeasureParams::new(t, r)?;
    let n = lattice.rank();
    if n > 2 {
        return Err(Error::RankUnsupported { rank: n, max: 2 });
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let vol = vol_ball(n, r);
    let amp = vol * t.powf(n as f64 / 2.0);

    // left side: μ_Q(v) ≤ amp·e^{−πt(‖v‖−r)²} ≤ amp·e^{−π(t/4)‖v‖²} once ‖v‖ ≥ 2r
    let walker = BallWalker::new(lattice)?;
    let big_r2 = radius_for(&walker, t / 4.0, eps / (4.0 * amp), 4.0 * r * r)?;
    let mut shells: BTreeMap<Rational, u64> = BTreeMap::new();
    walker.walk(&big_r2, budget, |_, s| *shells.entry(s.to_rational(walker.denom())).or_insert(0) += 1)?;
    let per_term = eps / (4.0 * shells.len() as f64 * 2.0);
    let mut lhs = BoundedReal::exact(0.0);
    for (norm, mult) in shells.iter().rev() {
        let m = smeared_mass(n, to_f64(norm), t, r, per_term / *mult as f64)?;
        lhs = lhs + m.scale(*mult as f64);
    }
    let lhs_tail = amp * tail_bound(&walker.gs_lengths_sq(), t / 4.0, to_f64(&big_r2));
    let lhs = lhs + BoundedReal::new(0.0, lhs_tail);

    // right side over the dual lattice; |1̂_{B_r}| ≤ vol
    let dual = lattice.dual();
    let covol = lattice.covolume();
    let dwalker = BallWalker::new(&dual)?;
    let dual_r2 = radius_for(&dwalker, 1.0 / t, eps * covol.estimate / (4.0 * vol), 0.0)?;
    let mut terms = Vec::new();
    dwalker.walk(&dual_r2, budget, |_, s| {
        let n2 = dwalker.scaled_norm_to_f64(s);
        terms.push(ball_transform(n, r, n2.sqrt()) * (-PI * n2 / t).exp());
    })?;
    let m = terms.len() as f64;
    let sum = crate::analysis::quadrature::sum_sorted(terms);
    let rounding = vol * m * 8.0 * f64::EPSILON + vol * 1e-15 * m;
    let rhs_tail = vol * tail_bound(&dwalker.gs_lengths_sq(), 1.0 / t, to_f64(&dual_r2));
    let rhs = BoundedReal::new(sum, rounding + rhs_tail) / covol;

    let r2 = exact_radius_sq(r)?;
    let count_primal = count_ball(lattice, &r2, budget)?;
    let count_dual = BoundedReal::exact(count_ball(&dual, &r2, budget)? as f64) / covol;
    Ok(PoissonCheck { t, r, lhs, rhs, count_primal, count_dual })
}

/// Poisson check across a grid of t, exhibiting both degenerations:
/// `lhs → |L ∩ B_r|` as t → ∞ and `rhs → vol(B_r)/covol` as t → 0.
pub fn uncertainty_report(lattice: &Lattice, r: f64, t_grid: &[f64], eps: f64) -> Result<Vec<PoissonCheck>> {
    t_grid.iter().map(|&t| poisson_identity(lattice, t, r, eps)).collect()
}
