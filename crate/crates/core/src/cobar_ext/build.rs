//! Basis enumeration and differential assembly for the reduced cobar
//! complex `Γ̄^{⊗s} ⊗_A M`.

use std::collections::{BTreeMap, HashMap};

use super::{CobarBasis, CobarCell, CobarError, CoefficientModel, SparseVec};
use crate::bp_hopf::IntCoeffs;
use crate::comodules::{Comodule, ComoduleError, ComoduleFaces, CyclicQuotient, ModElem};
use crate::graded_poly::terms::{self, Substitution};
use crate::graded_poly::{basis_in_degree, Monomial};
use crate::scalar_linalg::{Scalar, ScalarRing};

pub(crate) struct Enumerator {
    nb: usize,
    nh: usize,
    /// Copy-1 monomials in the Hopf generators, by degree.
    hopf: Vec<Vec<Monomial>>,
    /// Monomials in the allowed base generators, by degree.
    base: Vec<Vec<Monomial>>,
    pub gen_degrees: Vec<u32>,
}

impl Enumerator {
    pub fn new(m: &Comodule, t_max: u32, killed: usize) -> Enumerator {
        let h = &m.hopf;
        let (nb, nh) = (h.nb(), h.nh());
        let hopf_vars: Vec<usize> = (nb..nb + nh).collect();
        let base_vars: Vec<usize> = (killed.min(nb)..nb).collect();
        let hopf = (0..=t_max).map(|d| if d == 0 { Vec::new() } else { basis_in_degree(&h.gamma, d, &hopf_vars) }).collect();
        let base = (0..=t_max).map(|d| basis_in_degree(&h.base, d, &base_vars)).collect();
        Enumerator { nb, nh, hopf, base, gen_degrees: m.generators.iter().map(|g| g.degree).collect() }
    }

    fn reduced_rec(&self, copy: usize, left: usize, deg: u32, acc: &mut Vec<(usize, u32)>, out: &mut Vec<Monomial>) {
        if left == 0 {
            if deg == 0 {
                out.push(Monomial::from_pairs(acc.iter().copied()));
            }
            return;
        }
        // every remaining copy needs degree at least 1
        for d in 1..=deg.saturating_sub(left as u32 - 1) {
            for m in &self.hopf[d as usize] {
                let mark = acc.len();
                acc.extend(m.factors().iter().map(|&(g, e)| (g as usize + (copy - 1) * self.nh, e)));
                self.reduced_rec(copy + 1, left - 1, deg - d, acc, out);
                acc.truncate(mark);
            }
        }
    }

    /// Reduced monomials of `B_s` in degree `deg` (every copy nonconstant,
    /// no base generators).
    pub fn reduced(&self, s: usize, deg: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        self.reduced_rec(1, s, deg, &mut Vec::new(), &mut out);
        out
    }

    /// Reduced monomials of `B_s` in degree `deg` times allowed base monomials.
    pub fn with_base(&self, s: usize, deg: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        for e in 0..=deg {
            let tails = self.reduced(s, deg - e);
            if tails.is_empty() {
                continue;
            }
            for b in &self.base[e as usize] {
                for tail in &tails {
                    out.push(Monomial::from_pairs(
                        b.factors().iter().chain(tail.factors()).map(|&(g, e)| (g as usize, e)),
                    ));
                }
            }
        }
        out
    }

    pub fn cell_basis(&self, s: usize, t: u32, reversed: bool) -> Vec<CobarBasis> {
        let mut basis = Vec::new();
        for (g, &dg) in self.gen_degrees.iter().enumerate() {
            if dg > t {
                continue;
            }
            basis.extend(self.with_base(s, t - dg).into_iter().map(|mono| CobarBasis { mono, gen: g }));
        }
        basis.sort();
        if reversed {
            basis.reverse();
        }
        basis
    }

    pub fn weight(&self, b: &CobarBasis) -> u32 {
        b.mono.factors().iter().filter(|&&(g, _)| (g as usize) < self.nb).map(|&(_, e)| e).sum()
    }

    /// Whether every copy `1..=s` of the Hopf generators occurs in `m`.
    pub fn is_reduced(&self, m: &Monomial, s: usize) -> bool {
        let mut seen = vec![false; s + 1];
        for &(g, _) in m.factors() {
            let g = g as usize;
            if g >= self.nb {
                let c = (g - self.nb) / self.nh + 1;
                if c <= s {
                    seen[c] = true;
                }
            }
        }
        seen[1..].iter().all(|x| *x)
    }
}

impl CoefficientModel {
    pub fn prime(&self) -> u32 {
        match *self {
            CoefficientModel::Field { p } | CoefficientModel::Local { p } | CoefficientModel::Truncated { p, .. } => p,
        }
    }

    pub fn scalar_ring(&self) -> ScalarRing {
        match *self {
            CoefficientModel::Field { p } => ScalarRing::Fp(p),
            CoefficientModel::Local { p } | CoefficientModel::Truncated { p, .. } => ScalarRing::Zp(p),
        }
    }

    /// Canonical representative of `c` in the coefficient ring of the model.
    pub fn reduce(&self, c: &Scalar) -> Scalar {
        match *self {
            CoefficientModel::Field { p } => c.convert(ScalarRing::Fp(p)).expect("p-local coefficient"),
            CoefficientModel::Local { .. } => c.clone(),
            CoefficientModel::Truncated { p, k } => {
                let r = crate::scalar_linalg::ModPn::new(p, k);
                Scalar::from_i64(ScalarRing::Zp(p), r.from_rational(&c.to_rational()) as i64)
            }
        }
    }
}

pub(crate) fn push_reduced(model: &CoefficientModel, v: &mut SparseVec) {
    let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
    for (k, c) in v.drain(..) {
        let e = acc.entry(k).or_insert_with(|| Scalar::zero(c.ring()));
        *e = &*e + &c;
    }
    v.extend(acc.into_iter().map(|(k, c)| (k, model.reduce(&c))).filter(|(_, c)| !c.is_zero()));
}

fn kills(m: &Monomial, killed: usize) -> bool {
    m.factors().iter().any(|&(g, _)| (g as usize) < killed)
}

/// Builds cells `s <= s_max + 1`, `t <= t_max` with differentials for
/// `s <= s_max`.
pub(crate) fn build_cells<C: IntCoeffs>(
    m: &Comodule,
    s_max: u32,
    t_max: u32,
    model: CoefficientModel,
    fast: Option<CyclicQuotient>,
    reversed: bool,
) -> Result<BTreeMap<(u32, u32), CobarCell>, CobarError> {
    let killed = fast.map_or(0, |c| c.killed);
    let en = Enumerator::new(m, t_max, killed);
    let cf: ComoduleFaces<C> = ComoduleFaces::new(m, s_max as usize + 1);
    let ring = model.scalar_ring();
    let mut cells: BTreeMap<(u32, u32), CobarCell> = BTreeMap::new();
    for s in 0..=s_max + 1 {
        for t in 0..=t_max {
            let basis = en.cell_basis(s as usize, t, reversed);
            let weights = basis.iter().map(|b| en.weight(b)).collect();
            let index: HashMap<CobarBasis, usize> = basis.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
            cells.insert((s, t), CobarCell { s, t, basis, weights, relations: Vec::new(), d: Vec::new(), index });
        }
    }
    if fast.is_none() && !m.relations.is_empty() {
        for s in 0..=s_max + 1 {
            let alph = &cf.faces.alphabets[s as usize];
            for (k, rel) in cf.relations[s as usize].iter().enumerate() {
                let Some(dk) = m.relations[k].iter().find_map(|(g, a)| {
                    a.terms().first().map(|(x, _)| x.degree(&m.hopf.base) + m.generators[*g].degree)
                }) else {
                    continue;
                };
                for t in dk..=t_max {
                    let cell = cells.get_mut(&(s, t)).unwrap();
                    for mu in en.with_base(s as usize, t - dk) {
                        let mu = vec![(mu, cf.faces.one.clone())];
                        let mut v: SparseVec = Vec::new();
                        for (g, p) in rel.iter().enumerate() {
                            for (x, c) in terms::mul(&mu, p, alph, cf.faces.cap) {
                                let key = CobarBasis { mono: x, gen: g };
                                let i = *cell.index.get(&key).expect("relation terms are reduced");
                                v.push((i, c.to_scalar(ring)));
                            }
                        }
                        push_reduced(&model, &mut v);
                        if !v.is_empty() {
                            cell.relations.push(v);
                        }
                    }
                }
            }
        }
    }
    let violation = |g: usize| {
        CobarError::Comodule(ComoduleError::AxiomViolation {
            axiom: "counit".into(),
            generator: m.generators[g].name.clone(),
        })
    };
    for s in 0..=s_max as usize {
        let mut subs: Vec<Substitution<C>> = (0..=s).map(|i| cf.faces.substitution(&cf.images[s][i], s)).collect();
        for t in 0..=t_max {
            let n = cells[&(s as u32, t)].basis.len();
            let mut cols: Vec<SparseVec> = Vec::with_capacity(n);
            for j in 0..n {
                let b = cells[&(s as u32, t)].basis[j].clone();
                let mut img: HashMap<(Monomial, usize), C> = HashMap::new();
                let mut add = |gen: usize, terms: Vec<(Monomial, C)>, negate: bool| {
                    for (x, c) in terms {
                        if kills(&x, killed) {
                            continue;
                        }
                        let c = if negate { c.neg() } else { c };
                        match img.get_mut(&(x.clone(), gen)) {
                            Some(e) => *e = e.add(&c),
                            None => {
                                img.insert((x, gen), c);
                            }
                        }
                    }
                };
                let unit = vec![(b.mono.clone(), cf.faces.one.clone())];
                for (i, sub) in subs.iter_mut().enumerate() {
                    add(b.gen, sub.apply(&unit), i % 2 == 1);
                }
                let mut x: ModElem<C> = vec![Vec::new(); cf.ngens()];
                x[b.gen] = unit;
                for (g, p) in cf.last_face(s, &x).into_iter().enumerate() {
                    add(g, p, (s + 1) % 2 == 1);
                }
                let target = &cells[&(s as u32 + 1, t)];
                let mut v: SparseVec = Vec::new();
                for ((x, g), c) in img {
                    let c = model.reduce(&c.to_scalar(ring));
                    if c.is_zero() {
                        continue;
                    }
                    if !en.is_reduced(&x, s + 1) {
                        return Err(violation(g));
                    }
                    let i = *target.index.get(&CobarBasis { mono: x, gen: g }).expect("differential stays in range");
                    v.push((i, c));
                }
                v.sort_by_key(|e| e.0);
                cols.push(v);
            }
            cells.get_mut(&(s as u32, t)).unwrap().d = cols;
        }
    }
    Ok(cells)
}
