//! Euclidean lattices represented by exact rational Gram matrices.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::bounded::BoundedReal;
use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Nearest `f64` to an exact rational.
pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // out of f64 range: go through logarithms so the sign is still right
        let mag = ln_rational(&q.abs()).exp();
        if q.is_negative() {
            -mag
        } else {
            mag
        }
    })
}

/// Exact dyadic rational equal to a finite `f64`.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        n.to_f64().map(f64::ln).unwrap_or(f64::NAN)
    } else {
        let shift = bits - 64;
        let top: BigInt = n >> shift;
        top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Natural logarithm of a positive rational.
pub fn ln_rational(q: &Rational) -> f64 {
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

/// Exact determinant of a square rational matrix (Gaussian elimination with
/// row pivoting on nonzero entries).
pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = Rational::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return Rational::zero();
        };
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        let pivot = a[k][k].clone();
        det *= &pivot;
        for r in k + 1..n {
            if a[r][k].is_zero() {
                continue;
            }
            let f = &a[r][k] / &pivot;
            for c in k..n {
                let t = &f * &a[k][c];
                a[r][c] -= t;
            }
        }
    }
    det
}

/// Exact inverse of a nonsingular rational matrix (Gauss-Jordan).
pub fn inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for k in 0..n {
        let p = (k..n).find(|&r| !a[r][k].is_zero())?;
        a.swap(p, k);
        let pivot = a[k][k].clone();
        for c in 0..2 * n {
            a[k][c] = &a[k][c] / &pivot;
        }
        for r in 0..n {
            if r == k || a[r][k].is_zero() {
                continue;
            }
            let f = a[r][k].clone();
            for c in 0..2 * n {
                let t = &f * &a[k][c];
                a[r][c] -= t;
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Symmetric positive definite rational matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GramMatrix {
    entries: Vec<Vec<Rational>>,
}

impl GramMatrix {
    /// Validates squareness, symmetry and positive definiteness (exact leading
    /// principal minors).
    pub fn new(entries: Vec<Vec<Rational>>) -> Result<GramMatrix> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        for (row, r) in entries.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare { row, len: r.len(), expected: n });
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::NotSymmetric { i, j });
                }
            }
        }
        let minors = leading_minors(&entries);
        if let Some((k, m)) = minors.iter().enumerate().find(|(_, m)| !m.is_positive()) {
            return Err(Error::NotPositiveDefinite { index: k + 1, minor: m.clone() });
        }
        Ok(GramMatrix { entries })
    }

    pub fn from_integers(rows: &[&[i64]]) -> Result<GramMatrix> {
        GramMatrix::new(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    pub fn diagonal(diag: &[Rational]) -> Result<GramMatrix> {
        let n = diag.len();
        let mut e = vec![vec![Rational::zero(); n]; n];
        for (i, d) in diag.iter().enumerate() {
            e[i][i] = d.clone();
        }
        GramMatrix::new(e)
    }

    pub fn identity(n: usize) -> GramMatrix {
        let mut e = vec![vec![Rational::zero(); n]; n];
        for (i, row) in e.iter_mut().enumerate() {
            row[i] = Rational::one();
        }
        GramMatrix { entries: e }
    }

    pub(crate) fn from_validated(entries: Vec<Vec<Rational>>) -> GramMatrix {
        GramMatrix { entries }
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn determinant(&self) -> Rational {
        determinant(&self.entries)
    }

    pub fn inverse(&self) -> GramMatrix {
        let inv = inverse(&self.entries).expect("positive definite matrices are invertible");
        GramMatrix { entries: inv }
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|r| r.iter().map(to_f64).collect()).collect()
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().flatten().all(|q| q.is_integer())
    }

    /// `vᵀ G w` for integer coordinate vectors.
    pub fn bilinear(&self, v: &[i64], w: &[i64]) -> Rational {
        let mut acc = Rational::zero();
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0 {
                continue;
            }
            for (j, &wj) in w.iter().enumerate() {
                if wj != 0 {
                    acc += &self.entries[i][j] * BigInt::from(vi * wj);
                }
            }
        }
        acc
    }

    /// `Uᵀ G U` for an integer matrix `U` (columns are the new basis).
    pub fn transform(&self, u: &[Vec<BigInt>]) -> Vec<Vec<Rational>> {
        let n = self.rank();
        let m = u[0].len();
        // G U
        let gu: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let mut acc = Rational::zero();
                        for k in 0..n {
                            if !u[k][j].is_zero() {
                                acc += &self.entries[i][k] * &u[k][j];
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let mut acc = Rational::zero();
                        for k in 0..n {
                            if !u[k][i].is_zero() {
                                acc += &gu[k][j] * &u[k][i];
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }

    /// Smallest `d > 0` with `d·G` integral, and that integral matrix.
    pub fn integer_scaled(&self) -> (BigInt, Vec<Vec<BigInt>>) {
        let d = self
            .entries
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let m = self
            .entries
            .iter()
            .map(|r| r.iter().map(|q| (q * &d).to_integer()).collect())
            .collect();
        (d, m)
    }
}

/// Leading principal minors computed by fraction-exact elimination.
fn leading_minors(m: &[Vec<Rational>]) -> Vec<Rational> {
    let n = m.len();
    let mut a = m.to_vec();
    let mut minors = Vec::with_capacity(n);
    let mut prod = Rational::one();
    for k in 0..n {
        let pivot = a[k][k].clone();
        prod *= &pivot;
        minors.push(prod.clone());
        if pivot.is_zero() {
            // later minors are not determined by this elimination; the caller
            // stops at the first nonpositive minor anyway
            break;
        }
        for r in k + 1..n {
            if a[r][k].is_zero() {
                continue;
            }
            let f = &a[r][k] / &pivot;
            for c in k..n {
                let t = &f * &a[k][c];
                a[r][c] -= t;
            }
        }
    }
    minors
}

/// Integer coordinates with respect to the lattice basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector {
    pub coords: Vec<i64>,
}

impl LatticeVector {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticeVector { coords }
    }

    pub fn zero(n: usize) -> Self {
        LatticeVector { coords: vec![0; n] }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn negated(&self) -> Self {
        LatticeVector { coords: self.coords.iter().map(|c| -c).collect() }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

impl From<Vec<i64>> for LatticeVector {
    fn from(coords: Vec<i64>) -> Self {
        LatticeVector { coords }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    gram: GramMatrix,
    pub label: Option<String>,
}

/// Validates the matrix and wraps it as a lattice.
pub fn make_lattice(entries: Vec<Vec<Rational>>) -> Result<Lattice> {
    Ok(Lattice::new(GramMatrix::new(entries)?))
}

impl Lattice {
    pub fn new(gram: GramMatrix) -> Lattice {
        Lattice { gram, label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Lattice {
        self.label = Some(label.into());
        self
    }

    /// The standard lattice ℤⁿ.
    pub fn standard(n: usize) -> Lattice {
        Lattice::new(GramMatrix::identity(n)).with_label(format!("Z^{n}"))
    }

    pub fn from_integers(rows: &[&[i64]]) -> Result<Lattice> {
        Ok(Lattice::new(GramMatrix::from_integers(rows)?))
    }

    pub fn rank(&self) -> usize {
        self.gram.rank()
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn norm_sq(&self, v: &LatticeVector) -> Result<Rational> {
        self.check_dim(v)?;
        Ok(self.gram.bilinear(&v.coords, &v.coords))
    }

    pub fn inner(&self, v: &LatticeVector, w: &LatticeVector) -> Result<Rational> {
        self.check_dim(v)?;
        self.check_dim(w)?;
        Ok(self.gram.bilinear(&v.coords, &w.coords))
    }

    pub(crate) fn check_dim(&self, v: &LatticeVector) -> Result<()> {
        if v.len() != self.rank() {
            return Err(Error::DimensionMismatch { expected: self.rank(), found: v.len() });
        }
        Ok(())
    }

    /// Dual lattice; its Gram matrix is the exact inverse.
    pub fn dual(&self) -> Lattice {
        Lattice {
            gram: self.gram.inverse(),
            label: self.label.as_ref().map(|l| format!("{l}^dual")),
        }
    }

    pub fn determinant(&self) -> Rational {
        self.gram.determinant()
    }

    /// `sqrt(det G)`; the determinant is exact, only the square root rounds.
    pub fn covolume(&self) -> BoundedReal {
        let det = self.determinant();
        if det.is_one() {
            return BoundedReal::exact(1.0);
        }
        let est = (ln_rational(&det) / 2.0).exp();
        let direct = to_f64(&det).sqrt();
        let est = if direct.is_finite() && direct > 0.0 { direct } else { est };
        BoundedReal::new(est, 4.0 * f64::EPSILON * est)
    }

    /// `-log covol`, the arithmetic degree of the top exterior power.
    pub fn arithmetic_degree(&self) -> BoundedReal {
        let det = self.determinant();
        if det.is_one() {
            return BoundedReal::exact(0.0);
        }
        let est = -ln_rational(&det) / 2.0;
        BoundedReal::new(est, 4.0 * f64::EPSILON * est.abs().max(1.0))
    }

    /// Lattice with every length multiplied by `c` (Gram times `c²`).
    pub fn scale(&self, c: &Rational) -> Result<Lattice> {
        if !c.is_positive() {
            return Err(Error::NonPositiveScale);
        }
        let c2 = c * c;
        let entries = self
            .gram
            .entries()
            .iter()
            .map(|r| r.iter().map(|q| q * &c2).collect())
            .collect();
        Ok(Lattice::new(GramMatrix::from_validated(entries)))
    }

    /// Orthogonal direct sum (block-diagonal Gram matrix).
    pub fn direct_sum(&self, other: &Lattice) -> Lattice {
        let (a, b) = (self.rank(), other.rank());
        let n = a + b;
        let mut e = vec![vec![Rational::zero(); n]; n];
        for i in 0..a {
            for j in 0..a {
                e[i][j] = self.gram.get(i, j).clone();
            }
        }
        for i in 0..b {
            for j in 0..b {
                e[a + i][a + j] = other.gram.get(i, j).clone();
            }
        }
        Lattice::new(GramMatrix::from_validated(e))
    }

    pub fn is_integral(&self) -> bool {
        self.gram.is_integral()
    }

    pub fn from_json_str(s: &str) -> Result<Lattice> {
        let raw: LatticeJson = serde_json::from_str(s)?;
        raw.try_into()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&LatticeJson::from(self)).expect("lattice json is always serializable")
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = &self.label {
            write!(f, "{l} ")?;
        }
        write!(f, "[")?;
        for (i, row) in self.gram.entries().iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let cells: Vec<String> = row.iter().map(|q| q.to_string()).collect();
            write!(f, "{}", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

/// On-disk rational: decimal strings, reduced, positive denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

impl RationalJson {
    pub fn parse(&self) -> Result<Rational> {
        let num: BigInt = self
            .num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator {:?}", self.num)))?;
        let den: BigInt = self
            .den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator {:?}", self.den)))?;
        if den.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        if den.is_negative() {
            return Err(Error::Parse(format!("negative denominator {den}")));
        }
        if !num.gcd(&den).is_one() {
            return Err(Error::Parse(format!("{num}/{den} is not reduced")));
        }
        Ok(Rational::new_raw(num, den))
    }
}

impl From<&Rational> for RationalJson {
    fn from(q: &Rational) -> Self {
        RationalJson { num: q.numer().to_string(), den: q.denom().to_string() }
    }
}

pub fn parse_gram_json(rows: &[Vec<RationalJson>]) -> Result<GramMatrix> {
    let entries = rows
        .iter()
        .map(|r| r.iter().map(RationalJson::parse).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    GramMatrix::new(entries)
}

pub fn gram_to_json(g: &GramMatrix) -> Vec<Vec<RationalJson>> {
    g.entries().iter().map(|r| r.iter().map(RationalJson::from).collect()).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub rank: usize,
    pub gram: Vec<Vec<RationalJson>>,
}

impl TryFrom<LatticeJson> for Lattice {
    type Error = Error;
    fn try_from(raw: LatticeJson) -> Result<Lattice> {
        if raw.rank != raw.gram.len() {
            return Err(Error::DimensionMismatch { expected: raw.rank, found: raw.gram.len() });
        }
        let gram = parse_gram_json(&raw.gram)?;
        Ok(Lattice { gram, label: raw.label })
    }
}

impl From<&Lattice> for LatticeJson {
    fn from(l: &Lattice) -> Self {
        LatticeJson { label: l.label.clone(), rank: l.rank(), gram: gram_to_json(l.gram()) }
    }
}
