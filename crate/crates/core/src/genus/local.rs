use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arakelov::is_prime;
use crate::error::{Error, Result};
use crate::lattice::{GramMatrix, Rational};

/// One Jordan constituent `p^valuation` of dimension `dim`; `unit_class` is
/// the Legendre symbol of its unit determinant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymbolComponent {
    pub valuation: u32,
    pub dim: usize,
    pub unit_class: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OddLocalSymbol {
    pub p: u64,
    pub components: Vec<SymbolComponent>,
}

fn val_int(n: &BigInt, p: &BigInt) -> u32 {
    let mut n = n.abs();
    let mut v = 0;
    while !n.is_zero() && n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// p-adic valuation of a nonzero rational; `None` for zero.
fn valuation(q: &Rational, p: &BigInt) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    Some(val_int(q.numer(), p) as i64 - val_int(q.denom(), p) as i64)
}

fn legendre(a: &BigInt, p: &BigInt) -> i8 {
    let r = a.mod_floor(p);
    let e = (p - 1u32) / 2u32;
    if r.modpow(&e, p).is_one() {
        1
    } else {
        -1
    }
}

/// Jordan decomposition of an integral form over ℤ_p for an odd prime `p`:
/// valuation, dimension and the square class of the unit part of each
/// constituent, in increasing valuation.
pub fn local_symbol_odd(g: &GramMatrix, p: u64) -> Result<OddLocalSymbol> {
    if p == 2 {
        return Err(Error::EvenPrime(p));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if !g.is_integral() {
        return Err(Error::NotIntegral);
    }
    let pb = BigInt::from(p);
    let n = g.rank();
    let mut m: Vec<Vec<Rational>> = g.entries().to_vec();
    let mut diag: Vec<Rational> = Vec::with_capacity(n);
    for k in 0..n {
        // entry of least valuation in the remaining block
        let mut best: Option<(i64, usize, usize)> = None;
        for i in k..n {
            for j in i..n {
                if let Some(v) = valuation(&m[i][j], &pb) {
                    let better = match best {
                        None => true,
                        Some((bv, bi, bj)) => v < bv || (v == bv && i == j && bi != bj),
                    };
                    if better {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let (_, i, j) = best.expect("nondegenerate form");
        let piv = if i == j {
            i
        } else {
            let dv = valuation(&m[i][i], &pb);
            let bv = valuation(&m[i][j], &pb).expect("nonzero");
            if dv == Some(bv) {
                i
            } else if valuation(&m[j][j], &pb) == Some(bv) {
                j
            } else {
                // e_i ← e_i + e_j has norm of valuation v(m_ij) because p is odd
                for c in 0..n {
                    let add = m[j][c].clone();
                    m[i][c] += add;
                }
                for r in 0..n {
                    let add = m[r][j].clone();
                    m[r][i] += add;
                }
                i
            }
        };
        m.swap(k, piv);
        for row in m.iter_mut() {
            row.swap(k, piv);
        }
        let a = m[k][k].clone();
        for r in k + 1..n {
            let f = &m[r][k] / &a;
            if f.is_zero() {
                continue;
            }
            for c in k..n {
                let sub = &f * &m[k][c];
                m[r][c] -= sub;
            }
        }
        for r in k + 1..n {
            m[k][r] = Rational::zero();
            m[r][k] = Rational::zero();
        }
        diag.push(a);
    }

    let mut components: Vec<SymbolComponent> = Vec::new();
    let mut by_val: std::collections::BTreeMap<u32, (usize, i8)> = std::collections::BTreeMap::new();
    for d in &diag {
        let v = valuation(d, &pb).expect("nonzero pivot");
        let v = u32::try_from(v).expect("integral form has p-integral pivots");
        let unit_num = d.numer() / pb.pow(val_int(d.numer(), &pb));
        let unit_den = d.denom() / pb.pow(val_int(d.denom(), &pb));
        let s = legendre(&unit_num, &pb) * legendre(&unit_den, &pb);
        let e = by_val.entry(v).or_insert((0, 1));
        e.0 += 1;
        e.1 *= s;
    }
    for (valuation, (dim, unit_class)) in by_val {
        components.push(SymbolComponent { valuation, dim, unit_class });
    }
    Ok(OddLocalSymbol { p, components })
}
