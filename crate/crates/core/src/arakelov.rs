//! Arakelov divisors on Spec ℤ and their rank-one line bundles.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::analysis::mellin::TestFunction;
use crate::bounded::BoundedReal;
use crate::enumeration::H0Ar;
use crate::error::{Error, Result};
use crate::lattice::{ln_rational, Lattice, Rational};
use crate::theta::{log_theta, theta_rank1_real};

/// Number of roots of unity in ℤ.
pub const W_ROOTS_OF_UNITY: usize = 2;

/// `Σ n_p [p] + λ [∞]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArakelovDivisor {
    finite: BTreeMap<u64, i64>,
    pub lambda: f64,
}

impl ArakelovDivisor {
    pub fn new(finite: BTreeMap<u64, i64>, lambda: f64) -> Result<Self> {
        for &p in finite.keys() {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter("lambda must be finite".into()));
        }
        let finite = finite.into_iter().filter(|&(_, n)| n != 0).collect();
        Ok(ArakelovDivisor { finite, lambda })
    }

    pub fn zero() -> Self {
        ArakelovDivisor { finite: BTreeMap::new(), lambda: 0.0 }
    }

    /// `n·[p]` plus `λ[∞]`.
    pub fn single(p: u64, n: i64, lambda: f64) -> Result<Self> {
        ArakelovDivisor::new(BTreeMap::from([(p, n)]), lambda)
    }

    pub fn finite(&self) -> &BTreeMap<u64, i64> {
        &self.finite
    }

    pub fn multiplicity(&self, p: u64) -> i64 {
        self.finite.get(&p).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &ArakelovDivisor) -> ArakelovDivisor {
        let mut finite = self.finite.clone();
        for (&p, &n) in &other.finite {
            *finite.entry(p).or_insert(0) += n;
        }
        finite.retain(|_, n| *n != 0);
        ArakelovDivisor { finite, lambda: self.lambda + other.lambda }
    }

    /// `Σ n_p log p + λ`.
    pub fn degree(&self) -> f64 {
        let mut terms: Vec<f64> = self.finite.iter().map(|(&p, &n)| n as f64 * (p as f64).ln()).collect();
        terms.push(self.lambda);
        crate::analysis::quadrature::sum_sorted(terms)
    }

    pub fn norm(&self) -> f64 {
        self.degree().exp()
    }

    pub fn is_effective_finite_part(&self) -> bool {
        self.finite.values().all(|&n| n >= 0)
    }

    /// Generator `∏ p^{−n_p}` of the fractional ideal attached to the finite part.
    pub fn generator(&self) -> Rational {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (&p, &n) in &self.finite {
            let pk = num_traits::pow(BigInt::from(p), n.unsigned_abs() as usize);
            if n > 0 {
                den *= pk;
            } else {
                num *= pk;
            }
        }
        Rational::new(num, den)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: DivisorJson = serde_json::from_str(s)?;
        j.try_into()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&DivisorJson::from(self)).expect("divisor serializes")
    }
}

impl fmt::Display for ArakelovDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, n) in &self.finite {
            write!(f, "{n}[{p}] + ")?;
        }
        write!(f, "{}[∞]", self.lambda)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivisorJson {
    #[serde(default)]
    pub finite: BTreeMap<String, i64>,
    pub lambda: f64,
}

impl TryFrom<DivisorJson> for ArakelovDivisor {
    type Error = Error;
    fn try_from(j: DivisorJson) -> Result<Self> {
        let mut finite = BTreeMap::new();
        for (k, n) in j.finite {
            let p: u64 = k.trim().parse().map_err(|_| Error::Parse(format!("bad prime key {k:?}")))?;
            *finite.entry(p).or_insert(0) += n;
        }
        ArakelovDivisor::new(finite, j.lambda)
    }
}

impl From<&ArakelovDivisor> for DivisorJson {
    fn from(d: &ArakelovDivisor) -> Self {
        DivisorJson { finite: d.finite.iter().map(|(p, n)| (p.to_string(), *n)).collect(), lambda: d.lambda }
    }
}

/// `div(f) = Σ ord_p(f)[p] − log|f| [∞]`.
pub fn principal_divisor(f: &Rational) -> Result<ArakelovDivisor> {
    if f.is_zero() {
        return Err(Error::ZeroInput);
    }
    let mut finite = BTreeMap::new();
    for (part, sign) in [(f.numer().abs(), 1i64), (f.denom().clone(), -1i64)] {
        let m = part.to_u64().ok_or_else(|| Error::Unfactorable(part.to_string()))?;
        for (p, e) in factor_u64(m) {
            *finite.entry(p).or_insert(0) += sign * e as i64;
        }
    }
    finite.retain(|_, n| *n != 0);
    Ok(ArakelovDivisor { finite, lambda: -ln_rational(&f.abs()) })
}

/// Effectivity functional: Gaussian `e^{−πx}` or a general test function
/// normalized by its supremum.
#[derive(Debug, Clone)]
pub enum EffectivityFn {
    Gs,
    General(TestFunction),
}

impl EffectivityFn {
    pub fn general(tf: TestFunction) -> Result<Self> {
        if !(tf.sup > 0.0) {
            return Err(Error::InvalidParameter("sup of the test function must be positive".into()));
        }
        tf.validate(6.0)?;
        Ok(EffectivityFn::General(tf))
    }

    pub fn test_function(&self) -> TestFunction {
        match self {
            EffectivityFn::Gs => TestFunction::gaussian(),
            EffectivityFn::General(tf) => tf.clone(),
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            EffectivityFn::Gs => 1.0,
            EffectivityFn::General(tf) => tf.sup,
        }
    }
}

/// `e(D) = (1/c) f(‖1‖²_D)` when every `n_p ≥ 0`, else 0.
pub fn effectivity(d: &ArakelovDivisor, eff: &EffectivityFn) -> f64 {
    if !d.is_effective_finite_part() {
        return 0.0;
    }
    let x = (-2.0 * d.lambda).exp();
    let v = match eff {
        EffectivityFn::Gs => (-std::f64::consts::PI * x).exp(),
        EffectivityFn::General(tf) => tf.eval(x) / tf.sup,
    };
    v.clamp(0.0, 1.0)
}

/// `O(D)`: the rank-one lattice generated by `∏p^{−n_p}` with metric `e^{−λ}|·|`.
#[derive(Debug, Clone)]
pub struct LineBundle {
    pub generator: Rational,
    /// `e^{−2λ} g²`
    pub gram: BoundedReal,
    /// The same lattice with exact Gram entry, available when λ = 0.
    pub exact: Option<Lattice>,
}

pub fn line_bundle_lattice(d: &ArakelovDivisor) -> LineBundle {
    let g = d.generator();
    let g2 = &g * &g;
    let g2f = crate::lattice::to_f64(&g2);
    let scale = BoundedReal::rounded((-2.0 * d.lambda).exp());
    let gram = scale * BoundedReal::rounded(g2f);
    let exact = if d.lambda == 0.0 {
        Some(crate::lattice::make_lattice(vec![vec![g2]]).expect("positive square"))
    } else {
        None
    };
    LineBundle { generator: g, gram, exact }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LineBundleH0 {
    pub h0: H0Ar,
    /// Some lattice point lies within the Gram uncertainty of the unit sphere.
    pub boundary_uncertain: bool,
}

/// `h⁰_Ar(O(D))`. With an inexact metric, points whose norm is within the
/// uncertainty of 1 are counted as inside.
pub fn h0_ar_divisor(d: &ArakelovDivisor) -> Result<LineBundleH0> {
    let lb = line_bundle_lattice(d);
    if let Some(l) = &lb.exact {
        return Ok(LineBundleH0 { h0: crate::enumeration::h0_ar(l)?, boundary_uncertain: false });
    }
    let lo = lb.gram.lower();
    let hi = lb.gram.upper();
    if !(lo > 0.0) {
        return Err(Error::InvalidParameter("metric too degenerate for a certified count".into()));
    }
    let k_lo = (1.0 / lo).sqrt().floor() as u64;
    let k_hi = (1.0 / hi).sqrt().floor() as u64;
    let budget = crate::enumeration::DEFAULT_POINT_BUDGET;
    if 2 * k_lo + 1 > budget {
        return Err(Error::BudgetExceeded { what: "line bundle count", needed: (2 * k_lo + 1) as f64, cap: budget });
    }
    let count = 2 * k_lo + 1;
    let v = (count as f64).ln();
    Ok(LineBundleH0 {
        h0: H0Ar { value: BoundedReal::new(v, f64::EPSILON * v), count },
        boundary_uncertain: k_lo != k_hi,
    })
}

pub fn h0_theta_divisor(d: &ArakelovDivisor, eps: f64) -> Result<BoundedReal> {
    let lb = line_bundle_lattice(d);
    Ok(log_theta(&theta_rank1_real(lb.gram, 1.0, eps)?))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChiReport {
    pub degree: BoundedReal,
    pub theta_difference: BoundedReal,
    pub agree: bool,
}

/// χ(L) = deg(L), reported together with h⁰_θ(L) − h⁰_θ(L^∨).
pub fn chi(lattice: &Lattice, eps: f64) -> Result<ChiReport> {
    let rr = crate::theta::riemann_roch(lattice, eps, crate::enumeration::Budget::default())?;
    let diff = rr.h0_theta - rr.h0_theta_dual;
    Ok(ChiReport { degree: rr.degree, theta_difference: diff, agree: diff.overlaps(&rr.degree) })
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
    }
    unreachable!()
}

/// Prime factorization as (prime, exponent) pairs in increasing order.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    let mut primes = Vec::new();
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m <= 1 {
            continue;
        }
        if is_prime(m) {
            primes.push(m);
            continue;
        }
        let mut small = None;
        for p in 2..1000u64 {
            if m % p == 0 {
                small = Some(p);
                break;
            }
        }
        let d = small.unwrap_or_else(|| pollard_rho(m));
        stack.push(d);
        stack.push(m / d);
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}
