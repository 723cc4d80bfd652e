//! LLL reduction of a Gram matrix in exact rational arithmetic.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::lattice::{rat, GramMatrix, Rational};

/// Result of a basis change: `transformᵀ · input · transform = gram`.
///
/// Columns of `transform` are the new basis vectors in old coordinates.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub gram: GramMatrix,
    pub transform: Vec<Vec<BigInt>>,
}

struct State {
    n: usize,
    h: Vec<Vec<Rational>>,
    u: Vec<Vec<BigInt>>,
    mu: Vec<Vec<Rational>>,
    b: Vec<Rational>,
}

fn round_rational(x: &Rational) -> BigInt {
    (x + rat(1, 2)).floor().to_integer()
}

impl State {
    fn gso(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in 0..i {
                let mut acc = self.h[i][j].clone();
                for k in 0..j {
                    acc -= &self.mu[j][k] * &self.mu[i][k] * &self.b[k];
                }
                self.mu[i][j] = acc / &self.b[j];
            }
            let mut bi = self.h[i][i].clone();
            for k in 0..i {
                bi -= &self.mu[i][k] * &self.mu[i][k] * &self.b[k];
            }
            self.b[i] = bi;
        }
    }

    /// b_k <- b_k - round(mu_kj) b_j
    fn size_reduce(&mut self, k: usize, j: usize) {
        let r = round_rational(&self.mu[k][j]);
        if r.is_zero() {
            return;
        }
        let rq = Rational::from_integer(r.clone());
        for row in self.u.iter_mut() {
            let t = &r * &row[j];
            row[k] -= t;
        }
        let hkk = &self.h[k][k] - &rq * &self.h[k][j] * rat(2, 1) + &rq * &rq * &self.h[j][j];
        for i in 0..self.n {
            if i != k {
                let v = &self.h[k][i] - &rq * &self.h[j][i];
                self.h[k][i] = v.clone();
                self.h[i][k] = v;
            }
        }
        self.h[k][k] = hkk;
        self.mu[k][j] -= &rq;
        for i in 0..j {
            let t = &rq * &self.mu[j][i];
            self.mu[k][i] -= t;
        }
    }

    fn swap(&mut self, k: usize) {
        self.h.swap(k, k - 1);
        for row in self.h.iter_mut() {
            row.swap(k, k - 1);
        }
        for row in self.u.iter_mut() {
            row.swap(k, k - 1);
        }
        self.gso();
    }
}

/// LLL with the given Lovász parameter `delta` (use 3/4 for the classical choice).
pub fn lll_gram_with(g: &GramMatrix, delta: &Rational) -> Reduction {
    let n = g.rank();
    let mut st = State {
        n,
        h: g.entries().to_vec(),
        u: (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect(),
        mu: vec![vec![Rational::zero(); n]; n],
        b: vec![Rational::zero(); n],
    };
    st.gso();
    let mut k = 1;
    while k < n {
        st.size_reduce(k, k - 1);
        let lhs = &st.b[k];
        let rhs = (delta - &st.mu[k][k - 1] * &st.mu[k][k - 1]) * &st.b[k - 1];
        if *lhs < rhs {
            st.swap(k);
            k = (k - 1).max(1);
        } else {
            for j in (0..k.saturating_sub(1)).rev() {
                st.size_reduce(k, j);
            }
            k += 1;
        }
    }
    // keep a canonical sign convention: first nonzero entry of each column positive
    for j in 0..n {
        if let Some(i) = (0..n).find(|&i| !st.u[i][j].is_zero()) {
            if st.u[i][j].is_negative() {
                for row in st.u.iter_mut() {
                    row[j] = -row[j].clone();
                }
                for i2 in 0..n {
                    if i2 != j {
                        let v = -st.h[j][i2].clone();
                        st.h[j][i2] = v.clone();
                        st.h[i2][j] = v;
                    }
                }
            }
        }
    }
    Reduction { gram: GramMatrix::from_validated(st.h), transform: st.u }
}

pub fn lll_gram(g: &GramMatrix) -> Reduction {
    lll_gram_with(g, &rat(3, 4))
}
