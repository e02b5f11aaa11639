//! Cosimplicial structure on `Γ^{⊗s} ⊗_A F` for the free module `F` on the
//! generators, and the comodule axiom checks built on it.

use std::collections::HashMap;

use num_rational::BigRational;

use super::{Comodule, ComoduleError};
use crate::bp_hopf::{FaceMaps, HopfKind, IntCoeffs};
use crate::graded_poly::terms::{self, Coeff, Substitution, Terms};
use crate::graded_poly::{basis_in_degree, Monomial};
use crate::scalar_linalg::fp::{FpRow, FpSubspace};
use crate::scalar_linalg::lattice::Lattice;
use crate::scalar_linalg::{ModuleShape, Scalar, ScalarRing, ZpLocal};

/// An element of `Γ^{⊗s} ⊗_A F`: one polynomial in `B_s` per generator.
pub type ModElem<C> = Vec<Terms<C>>;

pub struct ComoduleFaces<C: Coeff> {
    pub faces: FaceMaps<C>,
    pub gen_degrees: Vec<u32>,
    /// `psi[s][i]`: `ψ(g_i)` placed on factor `s + 1` with its coefficients
    /// moved across the first `s` factors, as `(j, polynomial in B_{s+1})`.
    pub psi: Vec<Vec<Vec<(usize, Terms<C>)>>>,
    /// `relations[s][k]`: relation `k` with coefficients moved across `s`
    /// factors, in `B_s`.
    pub relations: Vec<Vec<ModElem<C>>>,
    /// `images[s][i]`: generator images of `δ^i: B_s -> B_{s+1}`, `i <= s`.
    pub images: Vec<Vec<Vec<Option<Terms<C>>>>>,
}

impl<C: IntCoeffs> ComoduleFaces<C> {
    pub fn new(m: &Comodule, s_max: usize) -> ComoduleFaces<C> {
        let h = &m.hopf;
        let faces: FaceMaps<C> = FaceMaps::new(h, s_max);
        let (nb, nh, cap) = (faces.nb, faces.nh, faces.cap);
        let conv = |x: &[(Monomial, Scalar)]| -> Terms<C> {
            x.iter().map(|(m, c)| (m.clone(), C::from_scalar(c))).filter(|(_, c)| !c.is_zero()).collect()
        };
        let unit = |g: usize| -> Terms<C> { vec![(Monomial::gen(g), faces.one.clone())] };
        let mut psi = Vec::new();
        let mut relations = Vec::new();
        for s in 0..=s_max {
            let mut img: Vec<Option<Terms<C>>> = faces.rho[s].iter().cloned().map(Some).collect();
            img.extend((0..nh).map(|j| Some(unit(faces.gen_index(s + 1, j)))));
            let mut sub = Substitution::new(&img, &faces.alphabets[s + 1], cap, faces.one.clone());
            psi.push(
                m.coaction
                    .iter()
                    .map(|row| row.iter().map(|(j, g)| (*j, sub.apply(&conv(g.terms())))).collect())
                    .collect(),
            );
            let mut rsub = Substitution::new(&img[..nb], &faces.alphabets[s], cap, faces.one.clone());
            relations.push(
                m.relations
                    .iter()
                    .map(|rel| {
                        let mut e: ModElem<C> = vec![Vec::new(); m.generators.len()];
                        for (g, a) in rel {
                            e[*g] = terms::add(&e[*g], &rsub.apply(&conv(a.terms())));
                        }
                        e
                    })
                    .collect(),
            );
        }
        let images = (0..=s_max).map(|s| (0..=s).map(|i| faces.images(s, i)).collect()).collect();
        ComoduleFaces { faces, gen_degrees: m.generators.iter().map(|g| g.degree).collect(), psi, relations, images }
    }

    pub fn ngens(&self) -> usize {
        self.gen_degrees.len()
    }

    /// `δ^i` on `Γ^{⊗s} ⊗ F`, `0 <= i <= s + 1`; the last coface applies
    /// the coaction.
    pub fn face(&self, s: usize, i: usize, x: &ModElem<C>) -> ModElem<C> {
        if i <= s {
            let mut sub = Substitution::new(&self.images[s][i], &self.faces.alphabets[s + 1], self.faces.cap, self.faces.one.clone());
            x.iter().map(|p| sub.apply(p)).collect()
        } else {
            self.last_face(s, x)
        }
    }

    pub fn last_face(&self, s: usize, x: &ModElem<C>) -> ModElem<C> {
        let alph = &self.faces.alphabets[s + 1];
        let mut out: ModElem<C> = vec![Vec::new(); self.ngens()];
        for (g, p) in x.iter().enumerate() {
            if p.is_empty() {
                continue;
            }
            for (j, gamma) in &self.psi[s][g] {
                out[*j] = terms::add(&out[*j], &terms::mul(p, gamma, alph, self.faces.cap));
            }
        }
        out
    }

    /// `Σ (-1)^i δ^i` on the unreduced complex.
    pub fn differential(&self, s: usize, x: &ModElem<C>) -> ModElem<C> {
        let mut out: ModElem<C> = vec![Vec::new(); self.ngens()];
        for i in 0..=s + 1 {
            let y = self.face(s, i, x);
            for (o, p) in out.iter_mut().zip(&y) {
                *o = if i % 2 == 0 { terms::add(o, p) } else { terms::add(o, &terms::neg(p)) };
            }
        }
        out
    }
}

fn sub_elem<C: Coeff>(a: &ModElem<C>, b: &ModElem<C>) -> ModElem<C> {
    a.iter().zip(b).map(|(x, y)| terms::add(x, &terms::neg(y))).collect()
}

fn hopf_free<C: Coeff>(p: &Terms<C>, nb: usize) -> Terms<C> {
    p.iter().filter(|(m, _)| m.factors().iter().all(|&(g, _)| (g as usize) < nb)).cloned().collect()
}

/// Whether `x` lies in the span of `μ * ρ_s(r)` over all monomials `μ` of
/// `B_s` and relations `r`.
fn in_relation_span<C: IntCoeffs>(cf: &ComoduleFaces<C>, s: usize, degree: u32, x: &ModElem<C>, ring: ScalarRing) -> bool {
    if x.iter().all(|p| p.is_empty()) {
        return true;
    }
    let alph = &cf.faces.alphabets[s];
    let vars: Vec<usize> = (0..alph.len()).collect();
    let mut gens: Vec<ModElem<C>> = Vec::new();
    for rel in &cf.relations[s] {
        let Some(d) = rel.iter().enumerate().find_map(|(g, p)| p.first().map(|(m, _)| m.degree(alph) + cf.gen_degrees[g]))
        else {
            continue;
        };
        if d > degree {
            continue;
        }
        for mu in basis_in_degree(alph, degree - d, &vars) {
            let mu = vec![(mu, cf.faces.one.clone())];
            gens.push(rel.iter().map(|p| terms::mul(&mu, p, alph, cf.faces.cap)).collect());
        }
    }
    let mut keys: HashMap<(Monomial, usize), usize> = HashMap::new();
    let mut index = |e: &ModElem<C>| -> Vec<(usize, Scalar)> {
        let mut v = Vec::new();
        for (g, p) in e.iter().enumerate() {
            for (m, c) in p {
                let n = keys.len();
                let k = *keys.entry((m.clone(), g)).or_insert(n);
                v.push((k, c.to_scalar(ring)));
            }
        }
        v
    };
    let gens: Vec<Vec<(usize, Scalar)>> = gens.iter().map(&mut index).collect();
    let target = index(x);
    let n = keys.len();
    match ring {
        ScalarRing::Fp(p) => {
            let row = |v: &[(usize, Scalar)]| -> FpRow {
                let mut r: Vec<(usize, u32)> = v.iter().filter_map(|(k, c)| c.residue().map(|x| (*k, x))).filter(|x| x.1 != 0).collect();
                r.sort_unstable();
                r
            };
            let space = FpSubspace::from_rows(p, gens.iter().map(|g| row(g)).collect());
            space.contains(&row(&target))
        }
        _ => {
            let p = ring.prime().unwrap_or(2);
            let r = ZpLocal { p };
            let dense = |v: &[(usize, Scalar)]| -> Vec<BigRational> {
                let mut d = vec![BigRational::from_integer(0.into()); n];
                for (k, c) in v {
                    d[*k] += c.to_rational();
                }
                d
            };
            let lat = Lattice::from_gens(&r, n, &gens.iter().map(|g| dense(g)).collect::<Vec<_>>());
            lat.contains(&r, &dense(&target))
        }
    }
}

/// Degree, counit, relation-invariance and coassociativity checks, below
/// the cap. Coassociativity must hold on the free module itself. Cyclic quotients by `(p^e)` or `(p, v_1, ..., v_n)` with the
/// unit coaction are accepted after the degree checks, since those ideals
/// are invariant.
pub fn check_comodule(m: &Comodule) -> Result<(), ComoduleError> {
    let h = &m.hopf;
    let nb = h.nb();
    let degree_err = |msg: String| ComoduleError::DegreeError { line: 0, msg };
    let violation =
        |axiom: &str, g: usize| ComoduleError::AxiomViolation { axiom: axiom.into(), generator: m.generators[g].name.clone() };
    if m.coaction.len() != m.generators.len() {
        return Err(ComoduleError::AxiomViolation {
            axiom: "counit".into(),
            generator: m.generators.get(m.coaction.len()).map_or(String::new(), |g| g.name.clone()),
        });
    }
    for g in &m.generators {
        if g.degree > h.cap {
            return Err(degree_err(format!("generator {} has degree {} above the cap {}", g.name, g.degree, h.cap)));
        }
        if h.kind == HopfKind::BrownPeterson && g.degree % 2 == 1 {
            return Err(degree_err(format!("generator {} has odd degree {}", g.name, g.degree)));
        }
    }
    let mut rel_degrees = Vec::new();
    for (k, rel) in m.relations.iter().enumerate() {
        let mut d = None;
        for (g, a) in rel {
            for (mono, _) in a.terms() {
                let e = mono.degree(&h.base) + m.generators[*g].degree;
                if d.is_some_and(|d| d != e) {
                    return Err(degree_err(format!("relation {} is not homogeneous", k + 1)));
                }
                d = Some(e);
            }
        }
        rel_degrees.push(d);
    }
    for (i, row) in m.coaction.iter().enumerate() {
        let di = m.generators[i].degree;
        for (j, gamma) in row {
            let dj = m.generators[*j].degree;
            if dj > di || !gamma.is_homogeneous_of(di - dj) {
                return Err(degree_err(format!("coaction of {} is not homogeneous", m.generators[i].name)));
            }
        }
    }
    for (i, row) in m.coaction.iter().enumerate() {
        let mut seen_self = false;
        for (j, gamma) in row {
            let free = hopf_free(&gamma.terms().to_vec(), nb);
            let ok = if *j == i {
                seen_self = true;
                free.len() == 1 && free[0].0.is_one() && free[0].1.is_one()
            } else {
                free.is_empty()
            };
            if !ok {
                return Err(violation("counit", i));
            }
        }
        if !seen_self {
            return Err(violation("counit", i));
        }
    }
    if m.cyclic_quotient().is_some() {
        return Ok(());
    }
    let ring = h.ring;
    let cf: ComoduleFaces<Scalar> = ComoduleFaces::new(m, 2);
    for (k, rel) in cf.relations[0].iter().enumerate() {
        let Some(d) = rel_degrees[k] else { continue };
        let image = cf.face(0, 1, rel);
        if !in_relation_span(&cf, 1, d, &image, ring) {
            let g = m.relations[k].first().map_or(0, |x| x.0);
            return Err(violation("relations are not subcomodules", g));
        }
    }
    for i in 0..m.generators.len() {
        let mut x: ModElem<Scalar> = vec![Vec::new(); m.generators.len()];
        for (j, gamma) in &m.coaction[i] {
            x[*j] = terms::add(&x[*j], &gamma.terms().to_vec());
        }
        // exact on the free module, so that the reduced complex of F is a
        // complex and R a subcomplex
        let diff = sub_elem(&cf.face(1, 1, &x), &cf.face(1, 2, &x));
        if diff.iter().any(|p| !p.is_empty()) {
            return Err(violation("coassociativity", i));
        }
    }
    Ok(())
}

/// The underlying module of `m` in internal degree `t`.
pub fn module_shape(m: &Comodule, t: u32) -> ModuleShape {
    let h = &m.hopf;
    let base_vars: Vec<usize> = (0..h.nb()).collect();
    let mut keys: HashMap<(Monomial, usize), usize> = HashMap::new();
    for (g, gen) in m.generators.iter().enumerate() {
        if gen.degree <= t {
            for mono in basis_in_degree(&h.base, t - gen.degree, &base_vars) {
                let n = keys.len();
                keys.insert((mono, g), n);
            }
        }
    }
    let n = keys.len();
    let mut rows: Vec<Vec<(usize, Scalar)>> = Vec::new();
    for rel in &m.relations {
        let Some(d) = rel.iter().find_map(|(g, a)| a.terms().first().map(|(x, _)| x.degree(&h.base) + m.generators[*g].degree))
        else {
            continue;
        };
        if d > t {
            continue;
        }
        for mu in basis_in_degree(&h.base, t - d, &base_vars) {
            let mut row = Vec::new();
            for (g, a) in rel {
                for (x, c) in a.terms() {
                    let (prod, _) = mu.mul(x, &h.base).expect("base ring is commutative");
                    row.push((keys[&(prod, *g)], c.clone()));
                }
            }
            rows.push(row);
        }
    }
    match h.ring {
        ScalarRing::Fp(p) => {
            let fp_rows = rows
                .iter()
                .map(|r| {
                    let mut acc: HashMap<usize, u32> = HashMap::new();
                    for (k, c) in r {
                        let e = acc.entry(*k).or_insert(0);
                        *e = (*e + c.residue().unwrap()) % p;
                    }
                    let mut v: FpRow = acc.into_iter().filter(|x| x.1 != 0).collect();
                    v.sort_unstable();
                    v
                })
                .collect();
            let rank = FpSubspace::from_rows(p, fp_rows).dim();
            ModuleShape { free_rank: n - rank, torsion: Vec::new() }
        }
        ring => {
            let r = ZpLocal { p: ring.prime().unwrap_or(2) };
            let gens: Vec<Vec<BigRational>> = rows
                .iter()
                .map(|row| {
                    let mut d = vec![BigRational::from_integer(0.into()); n];
                    for (k, c) in row {
                        d[*k] += c.to_rational();
                    }
                    d
                })
                .collect();
            let lat = Lattice::from_gens(&r, n, &gens);
            let mut torsion: Vec<u32> = lat.vals.iter().copied().filter(|&e| e > 0).collect();
            torsion.sort_unstable();
            ModuleShape { free_rank: n - lat.rank(), torsion }
        }
    }
}
