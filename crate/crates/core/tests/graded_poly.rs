use std::collections::BTreeMap;
use std::sync::Arc;

use novikov::graded_poly::{basis_in_degree, multiply, substitute, Alphabet, Generator, Monomial, MonomialPoly, PolyError};
use novikov::scalar_linalg::{Scalar, ScalarRing};
use proptest::prelude::*;

fn bp_alphabet() -> Arc<Alphabet> {
    Arc::new(
        Alphabet::new(vec![
            Generator::even("v1", 2),
            Generator::even("v2", 6),
            Generator::even("t1", 2),
            Generator::even("t2", 6),
        ])
        .unwrap(),
    )
}

fn exterior_alphabet() -> Arc<Alphabet> {
    Arc::new(
        Alphabet::new(vec![
            Generator::exterior("tau0", 1),
            Generator::even("xi1", 4),
            Generator::exterior("tau1", 5),
            Generator::even("xi2", 16),
        ])
        .unwrap(),
    )
}

fn z2() -> ScalarRing {
    ScalarRing::Zp(2)
}

fn parse(a: &Arc<Alphabet>, ring: ScalarRing, cap: u32, s: &str) -> MonomialPoly {
    MonomialPoly::parse(a, ring, cap, s).unwrap()
}

#[test]
fn multiply_examples() {
    let a = bp_alphabet();
    let v1 = MonomialPoly::generator(&a, z2(), 8, "v1").unwrap();
    assert_eq!(multiply(&v1, &v1).unwrap().to_string(), "v1^2");
    let v1c = MonomialPoly::generator(&a, z2(), 2, "v1").unwrap();
    assert!(multiply(&v1c, &v1c).unwrap().is_zero());

    let x = parse(&a, z2(), 8, "v1 + 2*t1");
    let y = parse(&a, z2(), 8, "v1 - 2*t1");
    let prod = multiply(&x, &y).unwrap();
    assert_eq!(prod, parse(&a, z2(), 8, "v1^2 - 4*t1^2"));
    assert_eq!(prod.to_string(), "v1^2 - 4*t1^2");
}

#[test]
fn multiply_rejects_mismatches() {
    let a = bp_alphabet();
    let b = exterior_alphabet();
    let x = MonomialPoly::generator(&a, z2(), 8, "v1").unwrap();
    let y = MonomialPoly::generator(&b, z2(), 8, "xi1").unwrap();
    assert_eq!(multiply(&x, &y), Err(PolyError::AlphabetMismatch));
    let z = MonomialPoly::generator(&a, z2(), 6, "v1").unwrap();
    assert_eq!(multiply(&x, &z), Err(PolyError::CapMismatch(8, 6)));
}

#[test]
fn basis_examples() {
    let a = bp_alphabet();
    assert_eq!(basis_in_degree(&a, 0, &[0, 1, 2, 3]), vec![Monomial::one()]);
    assert_eq!(basis_in_degree(&a, 4, &[2]), vec![Monomial::power(2, 2)]);
    let b = basis_in_degree(&a, 6, &[0, 1]);
    let rendered: Vec<String> = b.iter().map(|m| m.render(&a)).collect();
    assert_eq!(rendered, vec!["v1^3", "v2"]);
}

#[test]
fn substitute_examples() {
    let a = bp_alphabet();
    let img = parse(&a, z2(), 8, "v1 + 2*t1");
    let map: BTreeMap<usize, MonomialPoly> = [(0, img.clone())].into();
    let v1 = MonomialPoly::generator(&a, z2(), 8, "v1").unwrap();
    assert_eq!(substitute(&v1, &map, &a, 8).unwrap(), img);
    let sq = substitute(&v1.pow(2), &map, &a, 8).unwrap();
    assert_eq!(sq, parse(&a, z2(), 8, "v1^2 + 4*v1*t1 + 4*t1^2"));
    assert_eq!(sq.to_string(), "v1^2 + 4*v1*t1 + 4*t1^2");
    let c = MonomialPoly::constant(&a, z2(), 8, Scalar::from_i64(z2(), 7));
    assert_eq!(substitute(&c, &map, &a, 8).unwrap(), c);
}

#[test]
fn substitute_errors() {
    let a = bp_alphabet();
    let bad: BTreeMap<usize, MonomialPoly> = [(0, parse(&a, z2(), 8, "v1 + v1^2"))].into();
    let v1 = MonomialPoly::generator(&a, z2(), 8, "v1").unwrap();
    assert!(matches!(substitute(&v1, &bad, &a, 8), Err(PolyError::DegreeMismatch { .. })));
    let t1 = MonomialPoly::generator(&a, z2(), 8, "t1").unwrap();
    let ok: BTreeMap<usize, MonomialPoly> = [(0, v1.clone())].into();
    assert_eq!(substitute(&t1, &ok, &a, 8), Err(PolyError::MissingAssignment("t1".into())));
}

#[test]
fn render_and_parse() {
    let a = bp_alphabet();
    for s in ["0", "1", "v1^2 + 4*v1*t1", "-3*v2 + v1^3", "1/3*v1 - t1"] {
        let p = parse(&a, z2(), 12, s);
        assert_eq!(parse(&a, z2(), 12, &p.to_string()), p);
    }
    assert_eq!(parse(&a, z2(), 12, "-3*v2 + v1^3").to_string(), "v1^3 - 3*v2");
    assert!(matches!(MonomialPoly::parse(&a, z2(), 12, "v1 + w3"), Err(PolyError::Parse { col: 6, .. })));
    assert!(matches!(MonomialPoly::parse(&a, z2(), 12, "1/2*v1"), Err(PolyError::Parse { .. })));
    assert_eq!(MonomialPoly::parse(&a, z2(), 4, "v2"), Err(PolyError::AboveCap(6, 4)));
}

#[test]
fn exterior_signs() {
    let a = exterior_alphabet();
    let f3 = ScalarRing::Fp(3);
    let t0 = MonomialPoly::generator(&a, f3, 30, "tau0").unwrap();
    let t1 = MonomialPoly::generator(&a, f3, 30, "tau1").unwrap();
    assert!(multiply(&t0, &t0).unwrap().is_zero());
    let ab = multiply(&t0, &t1).unwrap();
    let ba = multiply(&t1, &t0).unwrap();
    assert_eq!(ab, ba.neg());
    assert_eq!(parse(&a, f3, 30, "tau1*tau0"), ab.neg());
}

// coefficient of x^t in prod 1/(1 - x^d)
fn partition_count(degrees: &[u32], t: u32) -> usize {
    let mut ways = vec![0usize; t as usize + 1];
    ways[0] = 1;
    for &d in degrees {
        for n in d as usize..=t as usize {
            ways[n] += ways[n - d as usize];
        }
    }
    ways[t as usize]
}

#[test]
fn basis_sizes_match_generating_function() {
    let gens: Vec<Generator> =
        [2u32, 6, 14, 2, 6, 14, 3].iter().enumerate().map(|(i, &d)| Generator::even(format!("g{i}"), d)).collect();
    let a = Alphabet::new(gens).unwrap();
    let all: Vec<usize> = (0..7).collect();
    let degrees: Vec<u32> = (0..7).map(|i| a.degree(i)).collect();
    for t in 0..=20 {
        assert_eq!(basis_in_degree(&a, t, &all).len(), partition_count(&degrees, t), "t = {t}");
        let sub = basis_in_degree(&a, t, &[0, 2, 6]);
        assert_eq!(sub.len(), partition_count(&[2, 14, 3], t), "t = {t}");
    }
}

fn poly_strategy(a: Arc<Alphabet>, ring: ScalarRing, cap: u32) -> impl Strategy<Value = MonomialPoly> {
    let n = a.len();
    prop::collection::vec((prop::collection::vec(0u32..3, n), -4i64..=4), 0..5).prop_map(move |terms| {
        MonomialPoly::from_terms(
            &a,
            ring,
            cap,
            terms.into_iter().map(|(e, c)| (Monomial::from_pairs(e.into_iter().enumerate()), Scalar::from_i64(ring, c))),
        )
    })
}

proptest! {
    #[test]
    fn multiplication_associative_commutative(
        x in poly_strategy(bp_alphabet(), ScalarRing::Zp(2), 16),
        y in poly_strategy(bp_alphabet(), ScalarRing::Zp(2), 16),
        z in poly_strategy(bp_alphabet(), ScalarRing::Zp(2), 16),
    ) {
        let xy = multiply(&x, &y).unwrap();
        prop_assert_eq!(&xy, &multiply(&y, &x).unwrap());
        prop_assert_eq!(multiply(&xy, &z).unwrap(), multiply(&x, &multiply(&y, &z).unwrap()).unwrap());
    }

    #[test]
    fn graded_commutativity_with_exterior(
        x in poly_strategy(exterior_alphabet(), ScalarRing::Fp(3), 40),
        y in poly_strategy(exterior_alphabet(), ScalarRing::Fp(3), 40),
        z in poly_strategy(exterior_alphabet(), ScalarRing::Fp(3), 40),
    ) {
        let xy = multiply(&x, &y).unwrap();
        prop_assert_eq!(multiply(&xy, &z).unwrap(), multiply(&x, &multiply(&y, &z).unwrap()).unwrap());
        // homogeneous pieces: x y = (-1)^{|x||y|} y x for odd-degree parts
        let a = exterior_alphabet();
        for (mx, cx) in x.terms() {
            for (my, cy) in y.terms() {
                let px = MonomialPoly::monomial(&a, ScalarRing::Fp(3), 40, mx.clone(), cx.clone());
                let py = MonomialPoly::monomial(&a, ScalarRing::Fp(3), 40, my.clone(), cy.clone());
                let sign = (mx.degree(&a) * my.degree(&a)) % 2 == 1;
                let lhs = multiply(&px, &py).unwrap();
                let rhs = multiply(&py, &px).unwrap();
                prop_assert_eq!(lhs, if sign { rhs.neg() } else { rhs });
            }
        }
    }

    #[test]
    fn substitution_is_multiplicative(
        x in poly_strategy(bp_alphabet(), ScalarRing::Zp(2), 14),
        y in poly_strategy(bp_alphabet(), ScalarRing::Zp(2), 14),
    ) {
        let a = bp_alphabet();
        let r = ScalarRing::Zp(2);
        let map: BTreeMap<usize, MonomialPoly> = [
            (0, parse(&a, r, 14, "v1 + 2*t1")),
            (1, parse(&a, r, 14, "v2 + 2*t2 - 5*v1*t1^2 - 3*v1^2*t1")),
            (2, parse(&a, r, 14, "-t1")),
            (3, parse(&a, r, 14, "t2 + v1*t1^2 - t1^3")),
        ].into();
        let sx = substitute(&x, &map, &a, 14).unwrap();
        let sy = substitute(&y, &map, &a, 14).unwrap();
        let sxy = substitute(&multiply(&x, &y).unwrap(), &map, &a, 14).unwrap();
        prop_assert_eq!(sxy, multiply(&sx, &sy).unwrap());
    }
}
