//! Fincke–Pohst enumeration of lattice vectors in closed balls.
//!
//! Pruning runs on a floating LDLᵀ factorization of an LLL-reduced Gram
//! matrix, widened by a relative slack; every leaf is then re-checked with
//! exact integer arithmetic, so the returned sets are exact.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::bounded::BoundedReal;
use crate::error::{Error, Result};
use crate::lattice::{GramMatrix, Lattice, LatticeVector, Rational};
use crate::lll::lll_gram;

pub const DEFAULT_POINT_BUDGET: u64 = 10_000_000;
pub const MAX_RANK: usize = 24;
/// Relative slack added to the floating pruning radius.
pub const FP_SLACK: f64 = 1e-9;

/// Cap on the number of lattice points any single enumeration may produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_POINT_BUDGET)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BallEnumeration {
    #[serde(serialize_with = "ser_rational")]
    pub radius_sq: Rational,
    pub vectors: Vec<LatticeVector>,
    pub exact_count: u64,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

/// Exact value `d·‖v‖²` for the integer-scaled form.
#[derive(Debug, Clone)]
pub(crate) enum ScaledNorm {
    Small(i128),
    Big(BigInt),
}

impl ScaledNorm {
    pub(crate) fn to_rational(&self, denom: &BigInt) -> Rational {
        let n = match self {
            ScaledNorm::Small(x) => BigInt::from(*x),
            ScaledNorm::Big(x) => x.clone(),
        };
        Rational::new(n, denom.clone())
    }
}

enum ExactForm {
    Small(Vec<Vec<i128>>),
    Big(Vec<Vec<BigInt>>),
}

/// Prepared state for repeated ball walks over one lattice.
pub(crate) struct BallWalker {
    n: usize,
    /// columns: reduced basis in original coordinates
    transform: Vec<Vec<i64>>,
    reduced: GramMatrix,
    /// LDLᵀ data: q[i][i] diagonal, q[i][j] (j > i) multipliers
    q: Vec<Vec<f64>>,
    denom: BigInt,
    denom_f64: f64,
    form: ExactForm,
    covolume: f64,
}

impl BallWalker {
    pub(crate) fn new(lattice: &Lattice) -> Result<BallWalker> {
        let n = lattice.rank();
        if n > MAX_RANK {
            return Err(Error::RankTooLarge { rank: n, max: MAX_RANK });
        }
        let red = lll_gram(lattice.gram());
        let transform = red
            .transform
            .iter()
            .map(|r| r.iter().map(|x| x.to_i64().ok_or(Error::Overflow("basis transform"))).collect())
            .collect::<Result<Vec<Vec<i64>>>>()?;
        let reduced = red.gram;
        let q = ldl(&reduced.to_f64());
        let (denom, m) = reduced.integer_scaled();
        let limit = BigInt::from(1u64 << 40);
        let form = if m.iter().flatten().all(|x| x.abs() < limit) {
            ExactForm::Small(m.iter().map(|r| r.iter().map(|x| x.to_i128().unwrap()).collect()).collect())
        } else {
            ExactForm::Big(m)
        };
        let denom_f64 = denom.to_f64().unwrap_or(f64::INFINITY);
        Ok(BallWalker {
            n,
            transform,
            covolume: lattice.covolume().estimate,
            reduced,
            q,
            denom,
            denom_f64,
            form,
        })
    }

    pub(crate) fn rank(&self) -> usize {
        self.n
    }

    pub(crate) fn denom(&self) -> &BigInt {
        &self.denom
    }

    /// Squared Gram–Schmidt lengths of the reduced basis (LDLᵀ diagonal).
    pub(crate) fn gs_lengths_sq(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.q[i][i]).collect()
    }

    pub(crate) fn reduced_gram(&self) -> &GramMatrix {
        &self.reduced
    }

    /// Gaussian-heuristic estimate of the number of points in a ball.
    pub(crate) fn estimate_count(&self, radius_sq: f64) -> f64 {
        let n = self.n as f64;
        let vol = PI.powf(n / 2.0) / crate::analysis::special::gamma_f64(n / 2.0 + 1.0)
            * radius_sq.max(0.0).powf(n / 2.0);
        vol / self.covolume + 1.0
    }

    pub(crate) fn to_original(&self, y: &[i64]) -> Vec<i64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.transform[i][j] * y[j]).sum())
            .collect()
    }

    pub(crate) fn scaled_norm_to_f64(&self, s: &ScaledNorm) -> f64 {
        match s {
            ScaledNorm::Small(x) => *x as f64 / self.denom_f64,
            ScaledNorm::Big(x) => crate::lattice::to_f64(&Rational::new(x.clone(), self.denom.clone())),
        }
    }

    fn scaled_norm(&self, y: &[i64]) -> ScaledNorm {
        if let ExactForm::Small(m) = &self.form {
            let mut acc: i128 = 0;
            let mut ok = true;
            for i in 0..self.n {
                if y[i] == 0 {
                    continue;
                }
                let mut row: i128 = 0;
                for j in 0..self.n {
                    match m[i][j].checked_mul(y[j] as i128).and_then(|t| row.checked_add(t)) {
                        Some(v) => row = v,
                        None => ok = false,
                    }
                }
                match row.checked_mul(y[i] as i128).and_then(|t| acc.checked_add(t)) {
                    Some(v) => acc = v,
                    None => ok = false,
                }
                if !ok {
                    break;
                }
            }
            if ok {
                return ScaledNorm::Small(acc);
            }
        }
        let m: Vec<Vec<BigInt>> = match &self.form {
            ExactForm::Big(m) => m.clone(),
            ExactForm::Small(m) => m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect(),
        };
        let mut acc = BigInt::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc += &m[i][j] * BigInt::from(y[i]) * BigInt::from(y[j]);
            }
        }
        ScaledNorm::Big(acc)
    }

    /// Visits every vector (in reduced coordinates) with `‖v‖² ≤ radius_sq`,
    /// exactly. Returns the number of points visited.
    pub(crate) fn walk<F>(&self, radius_sq: &Rational, budget: Budget, mut visit: F) -> Result<u64>
    where
        F: FnMut(&[i64], &ScaledNorm),
    {
        if radius_sq.is_negative() {
            return Err(Error::RadiusNegative);
        }
        let r2 = crate::lattice::to_f64(radius_sq);
        let est = self.estimate_count(r2);
        if est > budget.0 as f64 {
            return Err(Error::BudgetExceeded { what: "ball enumeration", needed: est, cap: budget.0 });
        }
        // exact threshold on the scaled norm: d·‖v‖² ≤ floor(d·R²)
        let threshold = (radius_sq * Rational::from_integer(self.denom.clone())).floor().to_integer();
        let small_threshold = threshold.to_i128();
        let bound = r2 * (1.0 + FP_SLACK) + f64::MIN_POSITIVE;
        let mut y = vec![0i64; self.n];
        let mut count = 0u64;
        let mut overflow = false;
        self.recurse(self.n - 1, &mut y, 0.0, bound, &mut |y| {
            let s = self.scaled_norm(y);
            let inside = match (&s, small_threshold) {
                (ScaledNorm::Small(v), Some(t)) => *v <= t,
                (ScaledNorm::Small(v), None) => BigInt::from(*v) <= threshold,
                (ScaledNorm::Big(v), _) => *v <= threshold,
            };
            if inside {
                count += 1;
                if count > budget.0 {
                    overflow = true;
                    return false;
                }
                visit(y, &s);
            }
            true
        });
        if overflow {
            return Err(Error::BudgetExceeded { what: "ball enumeration", needed: count as f64, cap: budget.0 });
        }
        Ok(count)
    }

    fn recurse(&self, i: usize, y: &mut [i64], partial: f64, bound: f64, leaf: &mut dyn FnMut(&[i64]) -> bool) -> bool {
        let qii = self.q[i][i];
        let c: f64 = -(i + 1..self.n).map(|j| self.q[i][j] * y[j] as f64).sum::<f64>();
        let rem = bound - partial;
        if rem < 0.0 {
            return true;
        }
        let w = (rem / qii).sqrt();
        let lo = (c - w).ceil() as i64;
        let hi = (c + w).floor() as i64;
        for yi in lo..=hi {
            let d = yi as f64 - c;
            let p = partial + qii * d * d;
            if p > bound {
                continue;
            }
            y[i] = yi;
            let keep_going = if i == 0 { leaf(y) } else { self.recurse(i - 1, y, p, bound, leaf) };
            if !keep_going {
                y[i] = 0;
                return false;
            }
        }
        y[i] = 0;
        true
    }
}

/// `G = Lᵀ D L` in the Fincke–Pohst layout: `Q(x) = Σ_i q_ii (x_i + Σ_{j>i} q_ij x_j)²`.
fn ldl(g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut q = g.to_vec();
    for i in 0..n {
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
    }
    q
}

/// All vectors with `‖v‖² ≤ radius_sq` (closed ball), sorted
/// lexicographically starting from the last coordinate.
pub fn enumerate_ball(lattice: &Lattice, radius_sq: &Rational) -> Result<BallEnumeration> {
    enumerate_ball_with(lattice, radius_sq, Budget::default())
}

pub fn enumerate_ball_with(lattice: &Lattice, radius_sq: &Rational, budget: Budget) -> Result<BallEnumeration> {
    if radius_sq.is_negative() {
        return Err(Error::RadiusNegative);
    }
    let walker = BallWalker::new(lattice)?;
    let mut vectors = Vec::new();
    walker.walk(radius_sq, budget, |y, _| vectors.push(LatticeVector::new(walker.to_original(y))))?;
    vectors.sort_by(|a, b| a.coords.iter().rev().cmp(b.coords.iter().rev()));
    let exact_count = vectors.len() as u64;
    Ok(BallEnumeration { radius_sq: radius_sq.clone(), vectors, exact_count })
}

/// Number of points in the closed ball of squared radius `radius_sq`.
pub fn count_ball(lattice: &Lattice, radius_sq: &Rational, budget: Budget) -> Result<u64> {
    let walker = BallWalker::new(lattice)?;
    walker.walk(radius_sq, budget, |_, _| {})
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct H0Ar {
    pub value: BoundedReal,
    pub count: u64,
}

/// `log |E ∩ B₁|` with the closed unit ball.
pub fn h0_ar(lattice: &Lattice) -> Result<H0Ar> {
    h0_ar_with(lattice, Budget::default())
}

pub fn h0_ar_with(lattice: &Lattice, budget: Budget) -> Result<H0Ar> {
    let count = count_ball(lattice, &Rational::from_integer(1.into()), budget)?;
    let v = (count as f64).ln();
    Ok(H0Ar { value: BoundedReal::new(v, f64::EPSILON * v), count })
}

/// Exact minimum nonzero squared norm and every vector attaining it.
pub fn minimum_and_short_vectors(lattice: &Lattice) -> Result<(Rational, Vec<LatticeVector>)> {
    minimum_and_short_vectors_with(lattice, Budget::default())
}

pub fn minimum_and_short_vectors_with(lattice: &Lattice, budget: Budget) -> Result<(Rational, Vec<LatticeVector>)> {
    let walker = BallWalker::new(lattice)?;
    // the first reduced basis vector bounds the minimum from above
    let red = walker.reduced_gram();
    let r2 = (0..walker.rank()).map(|i| red.get(i, i).clone()).min().expect("rank >= 1");
    let mut best: Option<Rational> = None;
    let mut found: Vec<Vec<i64>> = Vec::new();
    walker.walk(&r2, budget, |y, s| {
        if y.iter().all(|&c| c == 0) {
            return;
        }
        let norm = s.to_rational(walker.denom());
        match &best {
            Some(b) if norm > *b => {}
            Some(b) if norm == *b => found.push(y.to_vec()),
            _ => {
                best = Some(norm);
                found.clear();
                found.push(y.to_vec());
            }
        }
    })?;
    let min = best.expect("a reduced basis vector lies in the ball");
    let mut vecs: Vec<LatticeVector> = found.iter().map(|y| LatticeVector::new(walker.to_original(y))).collect();
    vecs.sort_by(|a, b| a.coords.iter().rev().cmp(b.coords.iter().rev()));
    Ok((min, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{int, rat};

    fn brute_force(l: &Lattice, r2: &Rational, b: i64) -> Vec<LatticeVector> {
        let n = l.rank();
        let mut out = Vec::new();
        let mut x = vec![-b; n];
        loop {
            let v = LatticeVector::new(x.clone());
            if &l.norm_sq(&v).unwrap() <= r2 {
                out.push(v);
            }
            let mut k = 0;
            loop {
                if k == n {
                    out.sort_by(|a, b| a.coords.iter().rev().cmp(b.coords.iter().rev()));
                    return out;
                }
                x[k] += 1;
                if x[k] <= b {
                    break;
                }
                x[k] = -b;
                k += 1;
            }
        }
    }

    #[test]
    fn small_examples() {
        let z1 = Lattice::standard(1);
        let e = enumerate_ball(&z1, &int(1)).unwrap();
        assert_eq!(e.exact_count, 3);
        assert_eq!(e.vectors, vec![vec![-1].into(), vec![0].into(), vec![1].into()]);
        assert_eq!(enumerate_ball(&Lattice::standard(2), &int(1)).unwrap().exact_count, 5);
        let hex = Lattice::from_integers(&[&[2, 1], &[1, 2]]).unwrap();
        let e = enumerate_ball(&hex, &int(2)).unwrap();
        assert_eq!(e.exact_count, 7);
        assert_eq!(e.vectors, brute_force(&hex, &int(2), 2));
    }

    #[test]
    fn negative_radius_rejected() {
        assert!(matches!(enumerate_ball(&Lattice::standard(1), &int(-1)), Err(Error::RadiusNegative)));
    }

    #[test]
    fn zero_radius_gives_origin() {
        let e = enumerate_ball(&Lattice::standard(3), &int(0)).unwrap();
        assert_eq!(e.exact_count, 1);
        assert!(e.vectors[0].is_zero());
    }

    #[test]
    fn budget_is_enforced() {
        let r = enumerate_ball_with(&Lattice::standard(3), &int(100), Budget(50));
        assert!(matches!(r, Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn h0_ar_examples() {
        for n in 1..=4 {
            let h = h0_ar(&Lattice::standard(n)).unwrap();
            assert_eq!(h.count, 2 * n as u64 + 1);
            assert_eq!(h.value.estimate, ((2 * n + 1) as f64).ln());
        }
        assert_eq!(h0_ar(&Lattice::from_integers(&[&[4]]).unwrap()).unwrap().count, 1);
        let quarter = crate::lattice::make_lattice(vec![vec![rat(1, 4)]]).unwrap();
        assert_eq!(h0_ar(&quarter).unwrap().count, 5);
    }

    #[test]
    fn minimum_examples() {
        let (m, v) = minimum_and_short_vectors(&Lattice::standard(2)).unwrap();
        assert_eq!(m, int(1));
        assert_eq!(v.len(), 4);
        let a = Lattice::from_integers(&[&[2, 1], &[1, 12]]).unwrap();
        assert_eq!(minimum_and_short_vectors(&a).unwrap().0, int(2));
        let b = Lattice::from_integers(&[&[4, 1], &[1, 6]]).unwrap();
        assert_eq!(minimum_and_short_vectors(&b).unwrap().0, int(4));
        // brute-force oracle over |x_i| <= 4
        for l in [&a, &b] {
            let all = brute_force(l, &int(40), 4);
            let min = all.iter().filter(|v| !v.is_zero()).map(|v| l.norm_sq(v).unwrap()).min().unwrap();
            assert_eq!(min, minimum_and_short_vectors(l).unwrap().0);
        }
    }

    #[test]
    fn skewed_basis_matches_brute_force() {
        let l = Lattice::from_integers(&[&[1, 3], &[3, 10]]).unwrap();
        let e = enumerate_ball(&l, &int(5)).unwrap();
        assert_eq!(e.vectors, brute_force(&l, &int(5), 12));
    }
}
