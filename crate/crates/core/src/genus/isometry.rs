use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::{lll_reduce, IsometryCertificate};
use crate::enumeration::{enumerate_ball_with, Budget};
use crate::error::{Error, Result};
use crate::lattice::{inverse, GramMatrix, Lattice, Rational};

/// Search nodes visited before the backtracking gives up.
pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "snake_case")]
pub enum IsometryVerdict {
    Isometric(IsometryCertificate),
    NotIsometric(String),
    Inconclusive(String),
}

impl IsometryVerdict {
    pub fn is_isometric(&self) -> bool {
        matches!(self, IsometryVerdict::Isometric(_))
    }
}

pub fn is_isometric(g1: &GramMatrix, g2: &GramMatrix) -> Result<IsometryVerdict> {
    is_isometric_with(g1, g2, Budget::default(), DEFAULT_NODE_CAP)
}

fn to_i128_matrix(m: &[Vec<BigInt>]) -> Result<Vec<Vec<i128>>> {
    m.iter()
        .map(|r| r.iter().map(|x| x.to_i128().ok_or(Error::Overflow("scaled gram entry"))).collect())
        .collect()
}

fn mat_vec(m: &[Vec<i128>], v: &[i64]) -> Result<Vec<i128>> {
    m.iter()
        .map(|row| {
            row.iter().zip(v).try_fold(0i128, |acc, (&a, &b)| {
                a.checked_mul(b as i128).and_then(|x| acc.checked_add(x)).ok_or(Error::Overflow("inner product"))
            })
        })
        .collect()
}

fn dot(a: &[i128], b: &[i64]) -> Option<i128> {
    a.iter().zip(b).try_fold(0i128, |acc, (&x, &y)| x.checked_mul(y as i128).and_then(|p| acc.checked_add(p)))
}

struct Candidate {
    coords: Vec<i64>,
    image: Vec<i128>,
}

/// Decide whether `g1` and `g2` are integrally equivalent.
///
/// The second form is LLL-reduced to `H = Vᵀ G₂ V`; columns of `U'` with
/// `U'ᵀ G₁ U' = H` are searched among vectors of `G₁` whose norms match the
/// diagonal of `H`, matching every inner product exactly. The certificate is
/// `U = U' V⁻¹`. Exhausting the node cap or enumeration budget gives
/// `Inconclusive`.
pub fn is_isometric_with(g1: &GramMatrix, g2: &GramMatrix, budget: Budget, node_cap: u64) -> Result<IsometryVerdict> {
    let n = g1.rank();
    if g2.rank() != n {
        return Ok(IsometryVerdict::NotIsometric(format!("rank {} vs {}", n, g2.rank())));
    }
    let (d1, d2) = (g1.determinant(), g2.determinant());
    if d1 != d2 {
        return Ok(IsometryVerdict::NotIsometric(format!("determinant {d1} vs {d2}")));
    }
    if g1 == g2 {
        return Ok(IsometryVerdict::Isometric(IsometryCertificate::identity(n)));
    }
    let (h, v) = lll_reduce(g2)?;
    let (s1, m1) = g1.integer_scaled();
    let (s2, mh) = h.integer_scaled();
    if s1 != s2 {
        return Ok(IsometryVerdict::NotIsometric(format!("entry denominators {s1} vs {s2}")));
    }
    let m1 = to_i128_matrix(&m1)?;
    let target = to_i128_matrix(&mh)?;

    let radius = (0..n).map(|i| h.get(i, i).clone()).max().expect("rank >= 1");
    let l1 = Lattice::new(g1.clone());
    let lh = Lattice::new(h.clone());
    let (e1, eh) = match (enumerate_ball_with(&l1, &radius, budget), enumerate_ball_with(&lh, &radius, budget)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e @ Error::BudgetExceeded { .. }), _) | (_, Err(e @ Error::BudgetExceeded { .. })) => {
            return Ok(IsometryVerdict::Inconclusive(e.to_string()))
        }
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };

    let mut by_norm: BTreeMap<i128, Vec<Candidate>> = BTreeMap::new();
    for w in e1.vectors.into_iter().filter(|w| !w.is_zero()) {
        let image = mat_vec(&m1, &w.coords)?;
        let norm = dot(&image, &w.coords).ok_or(Error::Overflow("norm"))?;
        by_norm.entry(norm).or_default().push(Candidate { coords: w.coords, image });
    }
    let mut counts_h: BTreeMap<i128, usize> = BTreeMap::new();
    for w in eh.vectors.iter().filter(|w| !w.is_zero()) {
        let img = mat_vec(&target, &w.coords)?;
        *counts_h.entry(dot(&img, &w.coords).ok_or(Error::Overflow("norm"))?).or_default() += 1;
    }
    let counts_1: BTreeMap<i128, usize> = by_norm.iter().map(|(k, v)| (*k, v.len())).collect();
    if counts_1 != counts_h {
        let min1 = counts_1.keys().next().copied();
        let minh = counts_h.keys().next().copied();
        let reason = if min1 != minh {
            let show = |m: Option<i128>| {
                m.map(|x| Rational::new(x.into(), s1.clone()).to_string()).unwrap_or_else(|| "none".into())
            };
            format!("minimum {} vs {}", show(min1), show(minh))
        } else {
            format!("short vector counts up to norm {radius} differ")
        };
        return Ok(IsometryVerdict::NotIsometric(reason));
    }

    let empty: Vec<Candidate> = Vec::new();
    let lists: Vec<&Vec<Candidate>> = (0..n).map(|j| by_norm.get(&target[j][j]).unwrap_or(&empty)).collect();
    let mut search = Search { lists: &lists, target: &target, chosen: Vec::with_capacity(n), nodes: 0, cap: node_cap };
    match search.run() {
        SearchOutcome::Found => {}
        SearchOutcome::Exhausted => {
            return Ok(IsometryVerdict::NotIsometric("no basis of G1 realises the reduced form of G2".into()))
        }
        SearchOutcome::CapHit => {
            return Ok(IsometryVerdict::Inconclusive(format!("search exceeded {node_cap} nodes")))
        }
    }
    let u_prime: Vec<Vec<Rational>> = (0..n)
        .map(|r| (0..n).map(|j| Rational::from_integer(lists[j][search.chosen[j]].coords[r].into())).collect())
        .collect();
    let v_rat: Vec<Vec<Rational>> =
        v.u.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect()).collect();
    let v_inv = inverse(&v_rat).expect("LLL transform is unimodular");
    let u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| &u_prime[i][k] * &v_inv[k][j]).sum::<Rational>().to_integer())
                .collect()
        })
        .collect();
    let cert = IsometryCertificate::from_bigint(&u)?;
    debug_assert!(cert.verify(g1, g2));
    Ok(IsometryVerdict::Isometric(cert))
}

enum SearchOutcome {
    Found,
    Exhausted,
    CapHit,
}

struct Search<'a> {
    lists: &'a [&'a Vec<Candidate>],
    target: &'a [Vec<i128>],
    chosen: Vec<usize>,
    nodes: u64,
    cap: u64,
}

impl Search<'_> {
    fn run(&mut self) -> SearchOutcome {
        let j = self.chosen.len();
        if j == self.lists.len() {
            return SearchOutcome::Found;
        }
        for (idx, c) in self.lists[j].iter().enumerate() {
            // U and −U both work, so fix the sign of the first column
            if j == 0 && c.coords.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.cap {
                return SearchOutcome::CapHit;
            }
            let fits = self.chosen.iter().enumerate().all(|(i, &ci)| {
                dot(&c.image, &self.lists[i][ci].coords) == Some(self.target[i][j])
            });
            if !fits {
                continue;
            }
            self.chosen.push(idx);
            match self.run() {
                SearchOutcome::Exhausted => {
                    self.chosen.pop();
                }
                other => return other,
            }
        }
        SearchOutcome::Exhausted
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g(rows: &[&[i64]]) -> GramMatrix {
        GramMatrix::from_integers(rows).unwrap()
    }

    pub(crate) fn random_unimodular(n: usize, rng: &mut ChaCha8Rng, steps: usize) -> Vec<Vec<BigInt>> {
        let mut u: Vec<Vec<BigInt>> =
            (0..n).map(|i| (0..n).map(|j| BigInt::from(i64::from(i == j))).collect()).collect();
        for _ in 0..steps {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a == b {
                continue;
            }
            let k = BigInt::from(rng.gen_range(-2i64..=2));
            for row in u.iter_mut() {
                let add = &row[b] * &k;
                row[a] += add;
            }
        }
        u
    }

    #[test]
    fn examples() {
        let v = is_isometric(&GramMatrix::identity(2), &g(&[&[2, 1], &[1, 1]])).unwrap();
        match &v {
            IsometryVerdict::Isometric(c) => assert!(c.verify(&GramMatrix::identity(2), &g(&[&[2, 1], &[1, 1]]))),
            _ => panic!("{v:?}"),
        }
        let v = is_isometric(&GramMatrix::identity(2), &g(&[&[1, 0], &[0, 2]])).unwrap();
        assert!(matches!(v, IsometryVerdict::NotIsometric(ref r) if r.contains("determinant")));
        // discriminant −23 classes: same genus, different classes
        let v = is_isometric(&g(&[&[2, 1], &[1, 12]]), &g(&[&[4, 1], &[1, 6]])).unwrap();
        assert!(matches!(v, IsometryVerdict::NotIsometric(_)), "{v:?}");
        let v = is_isometric(&g(&[&[4, 1], &[1, 6]]), &g(&[&[4, -1], &[-1, 6]])).unwrap();
        assert!(v.is_isometric());
        let v = is_isometric(&g(&[&[2, 1], &[1, 12]]), &g(&[&[2, 1], &[1, 12]])).unwrap();
        assert_eq!(v, IsometryVerdict::Isometric(IsometryCertificate::identity(2)));
        let v = is_isometric(&GramMatrix::identity(2), &GramMatrix::identity(3)).unwrap();
        assert!(matches!(v, IsometryVerdict::NotIsometric(_)));
    }

    #[test]
    fn planted_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let bases = [
            g(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]),
            g(&[&[2, -1, 0, 0], &[-1, 2, -1, 0], &[0, -1, 2, -1], &[0, 0, -1, 2]]),
            g(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]),
            g(&[&[3, 1], &[1, 5]]),
        ];
        for base in &bases {
            for _ in 0..5 {
                let u = random_unimodular(base.rank(), &mut rng, 12);
                let g2 = GramMatrix::new(base.transform(&u)).unwrap();
                match is_isometric(base, &g2).unwrap() {
                    IsometryVerdict::Isometric(c) => assert!(c.verify(base, &g2)),
                    other => panic!("{other:?}"),
                }
            }
        }
    }

    #[test]
    fn node_cap_gives_inconclusive() {
        let z = GramMatrix::identity(6);
        let mut u = IsometryCertificate::identity(6).as_bigint();
        u[0][5] = BigInt::from(1);
        let w = GramMatrix::new(z.transform(&u)).unwrap();
        let v = is_isometric_with(&z, &w, Budget::default(), 2).unwrap();
        assert!(matches!(v, IsometryVerdict::Inconclusive(_)));
        let v = is_isometric_with(&z, &w, Budget(3), DEFAULT_NODE_CAP).unwrap();
        assert!(matches!(v, IsometryVerdict::Inconclusive(_)));
    }
}
