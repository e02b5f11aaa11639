use std::sync::Arc;

use novikov::bp_hopf::{build_bp, cached, HopfAlgebroidData, HopfKind};
use novikov::comodules::{
    bp_mod_in, check_comodule, cyclic_quotient, finite_field_layer, ideal_p_v1, layer_family, module_shape,
    parse_comodule, real_layer, render_comodule, unit_comodule, ComoduleError, ComoduleFaces, Field, ModElem,
};
use novikov::graded_poly::Monomial;
use novikov::scalar_linalg::{ModuleShape, Scalar};

mod oracles;

use oracles::{enumerate_real, layer_shapes, nu2};

const GOLDEN_BP: &str = include_str!("golden/bp.comodule");
const GOLDEN_BP_I2: &str = include_str!("golden/bp_mod_i2.comodule");
const GOLDEN_REAL: &str = include_str!("golden/real_layers.txt");

fn bp(cap: u32) -> Arc<HopfAlgebroidData> {
    cached(HopfKind::BrownPeterson, 2, cap).unwrap()
}

#[test]
fn unit_round_trips() {
    let h = bp(20);
    let m = bp_mod_in(&h, -1).unwrap();
    let text = render_comodule(&m);
    assert_eq!(parse_comodule(&text).unwrap(), m);
    assert_eq!(text, GOLDEN_BP);
}

#[test]
fn bp_mod_i2_golden() {
    let h = bp(20);
    let m = bp_mod_in(&h, 2).unwrap();
    assert_eq!(render_comodule(&m), GOLDEN_BP_I2);
    assert_eq!(parse_comodule(GOLDEN_BP_I2).unwrap(), m);
    assert_eq!(m.relations.len(), 3);
}

#[test]
fn real_layer_table_golden() {
    let h = bp(20);
    let mut text = String::new();
    for n in 0..=8 {
        let layer = real_layer(&h, n).unwrap();
        text.push_str(&format!("# chow {n}: {}\n", layer.describe()));
        for c in &layer.summands {
            text.push_str(&render_comodule(c));
        }
    }
    assert_eq!(text, GOLDEN_REAL);
}

#[test]
fn bp_mod_p_is_an_fp_module() {
    let h = bp(12);
    let m = bp_mod_in(&h, 0).unwrap();
    for t in [0, 2, 4, 6, 8] {
        let s = module_shape(&m, t);
        assert_eq!(s.free_rank, 0);
        assert!(s.torsion.iter().all(|&e| e == 1));
    }
    assert_eq!(cyclic_quotient(&h, 1).unwrap().relations, m.relations);
}

// 1 ⊗ v1 = η_R(v1) = v1 + 2 t1 has t1-component 0 mod 2
#[test]
fn right_unit_on_v1_mod_two() {
    let h = bp(12);
    let m = bp_mod_in(&h, 0).unwrap();
    let cf: ComoduleFaces<Scalar> = ComoduleFaces::new(&m, 1);
    let v1: ModElem<Scalar> = vec![vec![(Monomial::gen(0), Scalar::one(h.ring))]];
    let image = cf.face(0, 0, &v1);
    let t1 = h.gamma.find("t1").unwrap();
    let coeff = image[0].iter().find(|(mono, _)| *mono == Monomial::gen(t1)).map(|(_, c)| c.clone()).unwrap();
    assert_eq!(coeff.valuation(), Some(1));
}

#[test]
fn cyclic_quotient_by_four() {
    let h = bp(12);
    let m = cyclic_quotient(&h, 2).unwrap();
    assert_eq!(module_shape(&m, 0), ModuleShape { free_rank: 0, torsion: vec![2] });
    check_comodule(&cyclic_quotient(&h, 3).unwrap()).unwrap();
}

#[test]
fn ideal_summand_is_a_comodule() {
    let h = bp(12);
    let m = ideal_p_v1(&h).unwrap();
    check_comodule(&m).unwrap();
    assert!(m.cyclic_quotient().is_none());
    // the ideal is torsion-free of full rank in each degree
    assert_eq!(module_shape(&m, 0), ModuleShape { free_rank: 1, torsion: vec![] });
    assert_eq!(module_shape(&m, 6), ModuleShape { free_rank: 2, torsion: vec![] });
    let text = render_comodule(&m);
    assert_eq!(parse_comodule(&text).unwrap(), m);
    let wrong = text.replace("-t1*gp + gv", "t1*gp + gv");
    assert_ne!(wrong, text);
    assert!(matches!(parse_comodule(&wrong), Err(ComoduleError::AxiomViolation { .. })));
}

#[test]
fn presets_pass_axioms() {
    let h = bp(20);
    for n in -1..=3 {
        check_comodule(&bp_mod_in(&h, n).unwrap()).unwrap();
    }
    for n in 0..=8 {
        for c in real_layer(&h, n).unwrap().summands {
            check_comodule(&c).unwrap();
        }
    }
    let a = cached(HopfKind::DualSteenrod, 2, 20).unwrap();
    check_comodule(&unit_comodule(&a)).unwrap();
}

#[test]
fn parse_errors() {
    let base = "novikov-comodule 1\nname M\nhopf bp 2 12\ngen g 0\ngen h 2\ncoact g = g\n";
    match parse_comodule(base) {
        Err(ComoduleError::AxiomViolation { generator, .. }) => assert_eq!(generator, "h"),
        other => panic!("{other:?}"),
    }
    let odd = "novikov-comodule 1\nhopf bp 2 12\ngen g 3\ncoact g = g\n";
    assert!(matches!(parse_comodule(odd), Err(ComoduleError::DegreeError { line: 3, .. })));
    let bad = "novikov-comodule 1\nhopf bp 2 12\ngen g 0\ncoact g = g + * t1\n";
    match parse_comodule(bad) {
        Err(ComoduleError::SyntaxError { line, col, .. }) => {
            assert_eq!(line, 4);
            assert!(col > 10, "column {col}");
        }
        other => panic!("{other:?}"),
    }
    let nonlinear = "novikov-comodule 1\nhopf bp 2 12\ngen g 0\nrel g^2\ncoact g = g\n";
    assert!(matches!(parse_comodule(nonlinear), Err(ComoduleError::SyntaxError { line: 4, .. })));
    assert!(matches!(parse_comodule("comodule\n"), Err(ComoduleError::SyntaxError { line: 1, col: 1, .. })));
}

#[test]
fn layer_examples() {
    let h = bp(20);
    let l0 = real_layer(&h, 0).unwrap();
    assert_eq!(l0.summands.len(), 1);
    assert_eq!(l0.summands[0].shift, (0, 0));
    let l3 = real_layer(&h, 3).unwrap();
    assert_eq!(l3.describe(), "S^(-3,-3)BP/(2,v1)");
    let l4 = real_layer(&h, 4).unwrap();
    assert_eq!(l4.describe(), "S^(-4,-4)BP/(2,v1) + S^(0,-2)BP");
    assert_eq!(real_layer(&h, 9).unwrap_err(), ComoduleError::OutOfTabulatedRange(9));

    let f5 = finite_field_layer(&h, 5, 1).unwrap();
    assert_eq!(f5.describe(), "S^(-1,-1)BP/4");
    assert!(finite_field_layer(&h, 5, 2).unwrap().is_zero());
    assert_eq!(finite_field_layer(&h, 9, 0).unwrap().describe(), "BP");
    assert_eq!(finite_field_layer(&h, 3, 1).unwrap().describe(), "S^(-1,-1)BP/2");
    assert_eq!(finite_field_layer(&h, 8, 1).unwrap_err(), ComoduleError::NotOddPrimePower(8));
    assert_eq!(finite_field_layer(&h, 15, 1).unwrap_err(), ComoduleError::NotOddPrimePower(15));
    let fam = layer_family(&h, Field::C, 3).unwrap();
    assert_eq!(fam.layers.iter().map(|l| l.summands.len()).collect::<Vec<_>>(), vec![1, 0, 1, 0]);
}

#[test]
fn finite_field_layers_are_concentrated() {
    let h = bp(12);
    for q in [3u64, 5, 7, 9, 11, 13, 17, 25, 27, 125] {
        for n in 0..=9 {
            let l = finite_field_layer(&h, q, n).unwrap();
            if n == 0 {
                assert_eq!(l.describe(), "BP");
            } else if n % 2 == 0 {
                assert!(l.is_zero(), "q = {q}, n = {n}");
            } else {
                let w = (n + 1) / 2;
                let c = &l.summands[0];
                assert_eq!(c.shift, (-1, -(w as i32)));
                assert_eq!(module_shape(c, 0).torsion, vec![nu2(q, w)], "q = {q}, w = {w}");
            }
        }
    }
}

// partitions of t into the degrees 2(2^i - 1), i > n
fn partitions(t: u32, n: u32) -> usize {
    let parts: Vec<u32> = (n + 1..8).map(|i| 2 * ((1 << i) - 1)).filter(|&d| d <= t).collect();
    let mut ways = vec![0usize; t as usize + 1];
    ways[0] = 1;
    for d in parts {
        for x in d as usize..=t as usize {
            ways[x] += ways[x - d as usize];
        }
    }
    ways[t as usize]
}

#[test]
fn tower_ranks_are_partition_counts() {
    let h = bp(20);
    for n in 0..=3 {
        let m = bp_mod_in(&h, n).unwrap();
        for t in (0..=20).step_by(2) {
            assert_eq!(module_shape(&m, t).mod_p_dim(), partitions(t, n as u32), "n = {n}, t = {t}");
        }
    }
}

#[test]
fn real_layers_match_presentation() {
    let h = bp(24);
    let max_a = 16;
    for n in 0..=8 {
        let expected = enumerate_real(n, max_a);
        let got = layer_shapes(&real_layer(&h, n).unwrap(), 24, max_a);
        assert_eq!(got, expected, "Chow degree {n}");
    }
}

#[test]
fn layers_need_bp_at_two() {
    let h3 = Arc::new(build_bp(3, 12).unwrap());
    assert!(matches!(real_layer(&h3, 0), Err(ComoduleError::WrongHopfAlgebroid(_))));
}
