#![allow(dead_code)]

use lattika::{GramMatrix, Lattice};
use proptest::prelude::*;

/// Positive definite integral Gram matrices `BᵀB + I` with small entries.
pub fn integral_gram(max_rank: usize) -> impl Strategy<Value = GramMatrix> {
    (1..=max_rank).prop_flat_map(|n| {
        proptest::collection::vec(proptest::collection::vec(-3i64..=3, n), n).prop_map(move |b| {
            let rows: Vec<Vec<i64>> = (0..n)
                .map(|i| (0..n).map(|j| (0..n).map(|k| b[k][i] * b[k][j]).sum::<i64>() + i64::from(i == j)).collect())
                .collect();
            let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
            GramMatrix::from_integers(&refs).unwrap()
        })
    })
}

pub fn integral_lattice(max_rank: usize) -> impl Strategy<Value = Lattice> {
    integral_gram(max_rank).prop_map(Lattice::new)
}

/// Unimodular matrices as products of elementary column operations.
pub fn unimodular(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    proptest::collection::vec((0..n, 0..n, prop_oneof![Just(-1i64), Just(1i64)]), 0..8).prop_map(move |ops| {
        let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        for (a, b, k) in ops {
            if a != b {
                for row in u.iter_mut() {
                    row[a] += k * row[b];
                }
            }
        }
        u
    })
}

pub fn to_big(u: &[Vec<i64>]) -> Vec<Vec<num_bigint::BigInt>> {
    u.iter().map(|r| r.iter().map(|&x| x.into()).collect()).collect()
}
