use std::collections::BTreeMap;
use std::sync::Arc;

use novikov::bp_hopf::{
    build_bp, build_dual_steenrod, build_quotient_p, check_axioms, dump, ideal_power_basis, load, AugmentationIdeal,
    HopfError,
};
use novikov::graded_poly::{substitute, Monomial, MonomialPoly};
use novikov::scalar_linalg::{Scalar, ScalarRing};

const GOLDEN_BP_2_12: &str = include_str!("golden/bp_p2_cap12.hopf");

fn parse(a: &Arc<novikov::graded_poly::Alphabet>, ring: ScalarRing, cap: u32, s: &str) -> MonomialPoly {
    MonomialPoly::parse(a, ring, cap, s).unwrap()
}

#[test]
fn right_unit_bottom_generator() {
    for (p, cap) in [(2, 6), (3, 4), (5, 8)] {
        let h = build_bp(p, cap).unwrap();
        let expect = parse(&h.gamma, h.ring, cap, &format!("v1 + {p}*t1"));
        assert_eq!(h.eta_r[0], expect, "p = {p}");
    }
}

#[test]
fn counit_examples() {
    let h = build_bp(2, 12).unwrap();
    // ε sends t1 to 0 and fixes v1
    let mut eps: BTreeMap<usize, MonomialPoly> = BTreeMap::new();
    for v in 0..h.nb() {
        eps.insert(v, MonomialPoly::monomial(&h.base, h.ring, h.cap, Monomial::gen(v), Scalar::one(h.ring)));
    }
    for j in 0..h.nh() {
        eps.insert(h.nb() + j, MonomialPoly::zero(&h.base, h.ring, h.cap));
    }
    let t1 = MonomialPoly::generator(&h.gamma, h.ring, h.cap, "t1").unwrap();
    assert!(substitute(&t1, &eps, &h.base, h.cap).unwrap().is_zero());
    let v1 = MonomialPoly::generator(&h.gamma, h.ring, h.cap, "v1").unwrap();
    assert_eq!(substitute(&v1, &eps, &h.base, h.cap).unwrap().to_string(), "v1");
}

// η_R(v2) − v2 − 2 t2 lies in the ideal (I^2, v1 t1) of Γ at p = 2
#[test]
fn right_unit_v2_congruence() {
    let h = build_bp(2, 6).unwrap();
    let rest = h.eta_r[1].sub(&parse(&h.gamma, h.ring, 6, "v2 + 2*t2")).unwrap();
    let ideal = AugmentationIdeal::new(&h, 2);
    let (v1, t1) = (h.gamma.find("v1").unwrap(), h.gamma.find("t1").unwrap());
    assert!(!rest.is_zero());
    for (m, c) in rest.terms() {
        let in_i2 = ideal.weight(m, c).unwrap() >= 2;
        let mult_v1t1 = m.exponent(v1) >= 1 && m.exponent(t1) >= 1;
        assert!(in_i2 || mult_v1t1, "term {} of {}", m.render(&h.gamma), rest);
    }
}

#[test]
fn quotient_p_examples() {
    let bp = build_bp(2, 12).unwrap();
    let p = build_quotient_p(&bp);
    assert_eq!(p.ring, ScalarRing::Fp(2));
    assert!(p.base.is_empty());
    assert!(p.gamma.gens().iter().all(|g| g.name.starts_with('t')));
    let a2 = p.tensor_alphabet(2);
    assert_eq!(p.delta[0], parse(&a2, p.ring, 12, "t1' + t1''"));
    // Δ(t2) = t2⊗1 + t1⊗t1^2 + 1⊗t2 mod I at p = 2
    assert_eq!(p.delta[1], parse(&a2, p.ring, 12, "t2' + t1'*t1''^2 + t2''"));
    assert!(check_axioms(&p).passed());
}

#[test]
fn dual_steenrod_examples() {
    let a = build_dual_steenrod(2, 20).unwrap();
    let a2 = a.tensor_alphabet(2);
    assert_eq!(a.delta[0], parse(&a2, a.ring, 20, "xi1' + xi1''"));
    assert_eq!(a.delta[1], parse(&a2, a.ring, 20, "xi2' + xi1'^2*xi1'' + xi2''"));
    assert!(check_axioms(&a).passed());
    let a3 = build_dual_steenrod(3, 20).unwrap();
    let r = check_axioms(&a3);
    assert!(r.passed(), "{:?}", r.violation);
    let a3_2 = a3.tensor_alphabet(2);
    let tau1 = a3.gamma.find("tau1").unwrap();
    assert_eq!(a3.delta[tau1], parse(&a3_2, a3.ring, 20, "tau1' + xi1'*tau0'' + tau1''"));
}

#[test]
fn bp_axioms_small_caps() {
    for (p, cap) in [(2, 12), (2, 20), (3, 16), (5, 16)] {
        let h = build_bp(p, cap).unwrap();
        let r = check_axioms(&h);
        assert!(r.passed(), "p = {p}, cap = {cap}: {:?}", r.violation);
        assert_eq!(r.checked.len(), 8);
    }
}

#[test]
fn corrupted_coproduct_is_reported() {
    let mut h = build_bp(2, 12).unwrap();
    let a2 = h.tensor_alphabet(2);
    h.delta[0] = parse(&a2, h.ring, 12, "t1' + t1'' + v1");
    let r = check_axioms(&h);
    let v = r.violation.unwrap();
    assert_eq!(v.axiom, "coassociativity");
    assert_eq!(v.generator, "t1");
    assert_eq!(v.degree, 2);
}

#[test]
fn cap_too_small() {
    assert_eq!(build_bp(3, 3).unwrap_err(), HopfError::CapTooSmall { p: 3, cap: 3 });
    assert_eq!(build_bp(4, 30).unwrap_err(), HopfError::NotPrime(4));
}

#[test]
fn ideal_power_examples() {
    let h = build_bp(2, 12).unwrap();
    let i = AugmentationIdeal::new(&h, 0);
    let q = i.graded_alphabet();
    let render = |ms: &[Monomial]| ms.iter().map(|m| m.render(&q)).collect::<Vec<_>>();
    assert_eq!(render(&ideal_power_basis(&i, 0, 0).graded), vec!["1"]);
    assert_eq!(render(&ideal_power_basis(&i, 1, 0).graded), vec!["q0"]);
    assert_eq!(render(&ideal_power_basis(&i, 2, 2).graded), vec!["q0*q1"]);
    assert_eq!(render(&ideal_power_basis(&i, 3, 6).graded), vec!["q1^3", "q0^2*q2"]);
    let b = ideal_power_basis(&i, 2, 2);
    assert_eq!(b.power, vec![(1, Monomial::gen(0))]);
}

#[test]
fn ideal_membership() {
    let h = build_bp(2, 12).unwrap();
    let i2 = AugmentationIdeal::new(&h, 2);
    assert!(i2.contains(&parse(&h.gamma, h.ring, 12, "4*t1 + 2*v1 + v1^2*t2")));
    assert!(!i2.contains(&parse(&h.gamma, h.ring, 12, "2*t1")));
    // I^{n+1} ⊆ I^n
    let i3 = AugmentationIdeal::new(&h, 3);
    let x = parse(&h.gamma, h.ring, 12, "8 + 2*v1^2 + v1^2*v2*t1");
    assert!(i3.contains(&x) && i2.contains(&x));
}

#[test]
fn right_unit_congruent_to_left_unit_mod_i() {
    for (p, cap) in [(2, 30), (3, 20)] {
        let h = build_bp(p, cap).unwrap();
        let i1 = AugmentationIdeal::new(&h, 1);
        for (v, e) in h.eta_r.iter().enumerate() {
            let vv = MonomialPoly::monomial(&h.gamma, h.ring, cap, Monomial::gen(v), Scalar::one(h.ring));
            assert!(i1.contains(&e.sub(&vv).unwrap()));
        }
    }
}

#[test]
fn golden_dump_p2_cap12() {
    let h = build_bp(2, 12).unwrap();
    let text = dump(&h);
    assert_eq!(text, GOLDEN_BP_2_12);
    let back = load(&text).unwrap();
    assert_eq!(dump(&back), text);
    assert!(check_axioms(&back).passed());
}

#[test]
fn dump_round_trips_other_presets() {
    for h in [build_dual_steenrod(3, 20).unwrap(), build_quotient_p(&build_bp(3, 20).unwrap())] {
        let text = dump(&h);
        let back = load(&text).unwrap();
        assert_eq!(dump(&back), text);
        assert_eq!(back.kind, h.kind);
    }
}

#[test]
fn load_rejects_bad_files() {
    assert!(matches!(load("novikov-hopf 2\n"), Err(HopfError::Format { line: 1, .. })));
    let mut text = dump(&build_bp(2, 6).unwrap());
    text = text.replace("eta_R v1 = v1 + 2*t1", "eta_R v1 = v1 + 2*t1^2");
    assert!(matches!(load(&text), Err(HopfError::Format { .. })));
}
