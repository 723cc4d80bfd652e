mod common;

use lattika::genus::{classify_family, is_isometric, local_symbol_odd, same_genus_partial, GenusVerdict, IsometryVerdict, DEFAULT_NODE_CAP};
use lattika::enumeration::{minimum_and_short_vectors, Budget};
use lattika::{GramMatrix, Lattice};
use proptest::prelude::*;

fn planted() -> impl Strategy<Value = (GramMatrix, GramMatrix)> {
    common::integral_gram(4).prop_flat_map(|g| {
        let n = g.rank();
        common::unimodular(n).prop_map(move |u| {
            let h = GramMatrix::new(g.transform(&common::to_big(&u))).unwrap();
            (g.clone(), h)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn planted_isometry_is_found_both_ways((g, h) in planted()) {
        for (a, b) in [(&g, &h), (&h, &g)] {
            match is_isometric(a, b).unwrap() {
                IsometryVerdict::Isometric(c) => prop_assert!(c.verify(a, b)),
                other => prop_assert!(false, "{:?}", other),
            }
        }
    }

    #[test]
    fn isometric_forms_share_invariants((g, h) in planted()) {
        prop_assert_eq!(g.determinant(), h.determinant());
        let (mg, vg) = minimum_and_short_vectors(&Lattice::new(g.clone())).unwrap();
        let (mh, vh) = minimum_and_short_vectors(&Lattice::new(h.clone())).unwrap();
        prop_assert_eq!(mg, mh);
        prop_assert_eq!(vg.len(), vh.len());
        for p in [3u64, 5, 7, 11, 13] {
            prop_assert_eq!(local_symbol_odd(&g, p).unwrap(), local_symbol_odd(&h, p).unwrap());
        }
        let d = Lattice::new(g.clone()).arithmetic_degree() - Lattice::new(h.clone()).arithmetic_degree();
        prop_assert!(d.estimate.abs() <= 1e-12);
        let v = same_genus_partial(&g, &h).unwrap();
        prop_assert!(!matches!(v, GenusVerdict::Different(_)), "{}", v);
    }

    #[test]
    fn composed_certificates_are_transitive(
        (g, u1, u2) in common::integral_gram(4).prop_flat_map(|g| {
            let n = g.rank();
            (Just(g), common::unimodular(n), common::unimodular(n))
        })
    ) {
        let h = GramMatrix::new(g.transform(&common::to_big(&u1))).unwrap();
        let k = GramMatrix::new(h.transform(&common::to_big(&u2))).unwrap();
        let (IsometryVerdict::Isometric(a), IsometryVerdict::Isometric(b)) =
            (is_isometric(&g, &h).unwrap(), is_isometric(&h, &k).unwrap())
        else {
            return Err(TestCaseError::fail("isometry not found"));
        };
        prop_assert!(a.compose(&b).verify(&g, &k));
    }

    #[test]
    fn classification_is_permutation_invariant(forms in proptest::collection::vec(common::integral_gram(2), 2..6), rot in 0usize..6) {
        let p1 = classify_family(&forms, Budget::default(), DEFAULT_NODE_CAP).unwrap();
        let k = rot % forms.len();
        let rotated: Vec<GramMatrix> = forms[k..].iter().chain(&forms[..k]).cloned().collect();
        let p2 = classify_family(&rotated, Budget::default(), DEFAULT_NODE_CAP).unwrap();
        prop_assert!(p1.inconclusive.is_empty() && p2.inconclusive.is_empty());
        let back = |i: usize| (i + k) % forms.len();
        let mut s1: Vec<Vec<usize>> = p1.classes.iter().map(|c| { let mut c = c.clone(); c.sort(); c }).collect();
        let mut s2: Vec<Vec<usize>> = p2.classes.iter().map(|c| { let mut c: Vec<usize> = c.iter().map(|&i| back(i)).collect(); c.sort(); c }).collect();
        s1.sort();
        s2.sort();
        prop_assert_eq!(s1, s2);
    }
}

#[test]
fn classify_examples() {
    let g = |rows: &[&[i64]]| GramMatrix::from_integers(rows).unwrap();
    let p = classify_family(&[g(&[&[2, 1], &[1, 12]])], Budget::default(), DEFAULT_NODE_CAP).unwrap();
    assert_eq!(p.classes, vec![vec![0]]);
    let a = g(&[&[4, 1], &[1, 6]]);
    let p = classify_family(&[a.clone(), a.clone()], Budget::default(), DEFAULT_NODE_CAP).unwrap();
    assert_eq!(p.classes, vec![vec![0, 1]]);
    assert_eq!(p.certificates[0].certificate, lattika::genus::IsometryCertificate::identity(2));
}
