use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::faces::{FaceMaps, IntCoeffs};
use super::{AugmentationIdeal, HopfAlgebroidData};
use crate::graded_poly::terms::{Substitution, Terms};
use crate::graded_poly::Monomial;
use crate::scalar_linalg::{Scalar, ScalarRing};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomViolation {
    pub axiom: String,
    pub generator: String,
    pub degree: u32,
}

impl std::fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} fails on {} in degree {}", self.axiom, self.generator, self.degree)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    /// Names of the axiom families that were checked, in order.
    pub checked: Vec<String>,
    pub violation: Option<AxiomViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Verifies, up to the cap and in this order: coassociativity, the counit
/// laws, `ε η_R = id`, compatibility of `Δ` with the right unit, `η_R ≡ η_L`
/// mod I, p-integrality, `c ∘ c = id` and the antipode law
/// `μ(1 ⊗ c)Δ = η_L ε`. Stops at the first failure.
pub fn check_axioms(h: &HopfAlgebroidData) -> AxiomReport {
    match h.ring {
        ScalarRing::Zp(_) if all_integral(h) => run::<BigInt>(h),
        _ => run::<Scalar>(h),
    }
}

fn all_integral(h: &HopfAlgebroidData) -> bool {
    h.eta_r.iter().chain(h.delta.iter()).all(|x| x.terms().iter().all(|(_, c)| super::scalar_to_int(c).is_some()))
}

struct Checker<'a> {
    h: &'a HopfAlgebroidData,
    report: AxiomReport,
}

impl Checker<'_> {
    fn begin(&mut self, name: &str) {
        self.report.checked.push(name.to_string());
    }

    fn fail(&mut self, axiom: &str, generator: &str, degree: u32) {
        self.report.violation =
            Some(AxiomViolation { axiom: axiom.to_string(), generator: generator.to_string(), degree });
    }

    fn hopf_name(&self, j: usize) -> (String, u32) {
        let g = self.h.hopf_generator(j);
        (g.name.clone(), g.degree)
    }

    fn base_name(&self, v: usize) -> (String, u32) {
        let g = self.h.base.gen(v);
        (g.name.clone(), g.degree)
    }
}

fn run<C: IntCoeffs>(h: &HopfAlgebroidData) -> AxiomReport {
    let mut ck = Checker { h, report: AxiomReport { checked: Vec::new(), violation: None } };
    let f: FaceMaps<C> = FaceMaps::new(h, 2);
    let (nb, nh) = (f.nb, f.nh);
    let unit = |g: usize| -> Terms<C> { vec![(Monomial::gen(g), f.one.clone())] };
    let apply = |images: &[Option<Terms<C>>], target: usize, x: &Terms<C>| -> Terms<C> {
        Substitution::new(images, &f.alphabets[target], f.cap, f.one.clone()).apply(x)
    };

    ck.begin("coassociativity");
    let d1 = f.images(2, 1);
    let d2 = f.images(2, 2);
    for j in 0..nh {
        if apply(&d1, 3, &f.delta[j]) != apply(&d2, 3, &f.delta[j]) {
            let (n, d) = ck.hopf_name(j);
            ck.fail("coassociativity", &n, d);
            return ck.report;
        }
    }

    ck.begin("counit");
    for side in [0usize, 1] {
        let mut images: Vec<Option<Terms<C>>> = (0..nb).map(|v| Some(unit(v))).collect();
        for c in 0..2 {
            for j in 0..nh {
                images.push(Some(if c == side { Vec::new() } else { unit(nb + j) }));
            }
        }
        for j in 0..nh {
            if apply(&images, 1, &f.delta[j]) != unit(nb + j) {
                let (n, d) = ck.hopf_name(j);
                ck.fail(if side == 0 { "left counit" } else { "right counit" }, &n, d);
                return ck.report;
            }
        }
    }

    if nb > 0 {
        ck.begin("counit of right unit");
        let mut images: Vec<Option<Terms<C>>> = (0..nb).map(|v| Some(unit(v))).collect();
        images.extend((0..nh).map(|_| Some(Vec::new())));
        for v in 0..nb {
            if apply(&images, 0, &f.eta_r[v]) != unit(v) {
                let (n, d) = ck.base_name(v);
                ck.fail("counit of right unit", &n, d);
                return ck.report;
            }
        }

        ck.begin("right unit");
        let d1 = f.images(1, 1);
        for v in 0..nb {
            if apply(&d1, 2, &f.eta_r[v]) != f.rho[2][v] {
                let (n, d) = ck.base_name(v);
                ck.fail("right unit", &n, d);
                return ck.report;
            }
        }

        ck.begin("right unit mod I");
        let ideal = AugmentationIdeal::new(h, 1);
        for v in 0..nb {
            let diff = h.eta_r[v].sub(&crate::graded_poly::MonomialPoly::monomial(
                &h.gamma,
                h.ring,
                h.cap,
                Monomial::gen(v),
                Scalar::one(h.ring),
            ));
            if !diff.map(|x| ideal.contains(&x)).unwrap_or(false) {
                let (n, d) = ck.base_name(v);
                ck.fail("right unit mod I", &n, d);
                return ck.report;
            }
        }
    }

    ck.begin("integrality");
    if let ScalarRing::Zp(p) = h.ring {
        let fp = ScalarRing::Fp(p);
        for (j, x) in h.delta.iter().enumerate() {
            if x.convert(fp).is_err() {
                let (n, d) = ck.hopf_name(j);
                ck.fail("integrality", &n, d);
                return ck.report;
            }
        }
        for (v, x) in h.eta_r.iter().enumerate() {
            if x.convert(fp).is_err() {
                let (n, d) = ck.base_name(v);
                ck.fail("integrality", &n, d);
                return ck.report;
            }
        }
    }

    ck.begin("conjugation");
    let conj: Vec<Terms<C>> =
        h.conjugation().iter().map(|x| x.terms().iter().map(|(m, c)| (m.clone(), C::from_scalar(c))).collect()).collect();
    let mut c_images: Vec<Option<Terms<C>>> = f.eta_r.iter().cloned().map(Some).collect();
    c_images.extend(conj.iter().cloned().map(Some));
    for j in 0..nh {
        if apply(&c_images, 1, &conj[j]) != unit(nb + j) {
            let (n, d) = ck.hopf_name(j);
            ck.fail("conjugation", &n, d);
            return ck.report;
        }
    }
    for v in 0..nb {
        if apply(&c_images, 1, &f.eta_r[v]) != unit(v) {
            let (n, d) = ck.base_name(v);
            ck.fail("conjugation", &n, d);
            return ck.report;
        }
    }

    ck.begin("antipode");
    let mut images: Vec<Option<Terms<C>>> = (0..nb).map(|v| Some(unit(v))).collect();
    images.extend((0..nh).map(|j| Some(unit(nb + j))));
    images.extend(conj.iter().cloned().map(Some));
    for j in 0..nh {
        if !apply(&images, 1, &f.delta[j]).is_empty() {
            let (n, d) = ck.hopf_name(j);
            ck.fail("antipode", &n, d);
            return ck.report;
        }
    }
    ck.report
}
