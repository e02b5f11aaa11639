//! Reduced cobar complexes, Ext groups with representatives, Yoneda
//! products, Koszul Tor and Levin's index-one test.
//!
//! `C^{s,t}(M) = Γ̄^{⊗s} ⊗_A M` in internal degree `t`, with
//! `d = Σ_{i=0}^{s+1} (-1)^i δ^i`, where `δ^0..δ^s` are the ring cofaces and
//! `δ^{s+1}` applies the coaction. A cell basis element is a monomial of
//! `B_s` in which every tensor copy has positive degree, times a generator.
//!
//! Coefficients follow [`CoefficientModel`]: F_p for Hopf algebras over F_p,
//! exact Z_(p) for free BP_*-modules, and Z/p^k for quotients with p^k = 0.
//! Cyclic quotients `A/(p^e, v_1..v_n)` drop the killed `v_i` from the basis;
//! other presentations carry a relation lattice per cell.

mod build;
mod homology;
pub mod koszul;
pub mod lambda;
pub mod minres;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

use crate::bp_hopf::{scalar_to_int, FaceMaps, HopfAlgebroidData, HopfKind};
use crate::chart::{Chart, ChartNode};
use crate::comodules::{check_comodule, Comodule, ComoduleError, CyclicQuotient};
use crate::graded_poly::terms::{self, Substitution, Terms};
use crate::graded_poly::Monomial;
use crate::scalar_linalg::{ModPn, ModuleShape, Scalar, ScalarRing, ZpLocal};

use homology::{FpSolver, LatticeSolver, Solver, Spot};
use lambda::LambdaComplex;

pub use koszul::{koszul_tor, levin_index_one, LevinReport, LevinVerdict, TorTable};

pub type SparseVec = Vec<(usize, Scalar)>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CobarError {
    #[error(transparent)]
    Comodule(#[from] ComoduleError),
    #[error("d∘d is not zero at (s, t) = ({s}, {t})")]
    CompositionNotZero { s: u32, t: u32 },
    #[error("(s, t) = ({s}, {t}) is outside the computed range")]
    OutOfRange { s: u32, t: u32 },
    #[error("t_max {t_max} exceeds the cap {cap} of the Hopf algebroid")]
    CapTooSmall { t_max: u32, cap: u32 },
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CoefficientModel {
    Field { p: u32 },
    Local { p: u32 },
    /// `Z/p^k`; the module is killed by `p^k`.
    Truncated { p: u32, k: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CobarBasis {
    pub mono: Monomial,
    pub gen: usize,
}

#[derive(Clone, Debug)]
pub struct CobarCell {
    pub s: u32,
    pub t: u32,
    pub basis: Vec<CobarBasis>,
    /// Total exponent of base generators (`v`-adic weight) per basis element.
    pub weights: Vec<u32>,
    /// Generators of the relation submodule, in basis coordinates.
    pub relations: Vec<SparseVec>,
    /// `d(basis[j])` in the cell `(s + 1, t)`; empty on the top row.
    pub d: Vec<SparseVec>,
    pub(crate) index: HashMap<CobarBasis, usize>,
}

impl CobarCell {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, b: &CobarBasis) -> Option<usize> {
        self.index.get(b).copied()
    }
}

pub struct CobarComplex {
    pub comodule: Arc<Comodule>,
    pub s_max: u32,
    pub t_max: u32,
    pub model: CoefficientModel,
    pub cyclic: Option<CyclicQuotient>,
    /// Cells for `s <= s_max + 1`.
    pub cells: BTreeMap<(u32, u32), CobarCell>,
    faces: OnceLock<FaceMaps<Scalar>>,
}

impl std::fmt::Debug for CobarComplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CobarComplex")
            .field("comodule", &self.comodule.name)
            .field("s_max", &self.s_max)
            .field("t_max", &self.t_max)
            .field("model", &self.model)
            .finish()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BuildOptions {
    /// Enumerate each cell basis in reverse order.
    pub reversed: bool,
}

fn choose_model(m: &Comodule) -> (CoefficientModel, Option<CyclicQuotient>) {
    let p = m.prime();
    if m.ring().is_fp() {
        let cq = m.cyclic_quotient().filter(|_| m.relations.is_empty());
        return (CoefficientModel::Field { p }, cq);
    }
    if let Some(cq) = m.cyclic_quotient() {
        let model = match cq.p_exponent {
            None => CoefficientModel::Local { p },
            Some(k) => CoefficientModel::Truncated { p, k },
        };
        return (model, Some(cq));
    }
    match m.torsion_exponent() {
        Some(k) if k > 0 => (CoefficientModel::Truncated { p, k }, None),
        _ => (CoefficientModel::Local { p }, None),
    }
}

fn integral(m: &Comodule) -> bool {
    let ok = |x: &crate::graded_poly::MonomialPoly| x.terms().iter().all(|(_, c)| scalar_to_int(c).is_some());
    m.relations.iter().flatten().all(|(_, a)| ok(a)) && m.coaction.iter().flatten().all(|(_, g)| ok(g))
}

fn same_hopf(h: &HopfAlgebroidData, m: &Comodule) -> Result<(), CobarError> {
    let g = &m.hopf;
    if g.kind != h.kind || g.prime != h.prime || g.cap != h.cap {
        return Err(ComoduleError::WrongHopfAlgebroid(format!(
            "{} is a comodule over {} at p = {} (cap {}), not {} at p = {} (cap {})",
            m.name,
            g.kind.tag(),
            g.prime,
            g.cap,
            h.kind.tag(),
            h.prime,
            h.cap
        ))
        .into());
    }
    Ok(())
}

/// Builds the reduced cobar complex through `s_max + 1` and verifies
/// `d∘d = 0` for `s < s_max`.
pub fn build_cobar(h: &HopfAlgebroidData, m: &Comodule, s_max: u32, t_max: u32) -> Result<CobarComplex, CobarError> {
    build_cobar_with(h, m, s_max, t_max, BuildOptions::default())
}

pub fn build_cobar_with(
    h: &HopfAlgebroidData,
    m: &Comodule,
    s_max: u32,
    t_max: u32,
    opts: BuildOptions,
) -> Result<CobarComplex, CobarError> {
    same_hopf(h, m)?;
    if t_max > h.cap {
        return Err(CobarError::CapTooSmall { t_max, cap: h.cap });
    }
    check_comodule(m)?;
    let (model, cyclic) = choose_model(m);
    let cells = if integral(m) {
        build::build_cells::<BigInt>(m, s_max, t_max, model, cyclic, opts.reversed)?
    } else {
        build::build_cells::<Scalar>(m, s_max, t_max, model, cyclic, opts.reversed)?
    };
    let c = CobarComplex { comodule: Arc::new(m.clone()), s_max, t_max, model, cyclic, cells, faces: OnceLock::new() };
    c.verify_square_zero()?;
    Ok(c)
}

impl CobarComplex {
    pub fn cell(&self, s: u32, t: u32) -> Option<&CobarCell> {
        self.cells.get(&(s, t))
    }

    pub fn dim(&self, s: u32, t: u32) -> usize {
        self.cell(s, t).map_or(0, |c| c.dim())
    }

    fn verify_square_zero(&self) -> Result<(), CobarError> {
        for s in 0..self.s_max {
            for t in 0..=self.t_max {
                let (c0, c1) = (&self.cells[&(s, t)], &self.cells[&(s + 1, t)]);
                for col in &c0.d {
                    let mut acc: SparseVec = Vec::new();
                    for (k, c) in col {
                        acc.extend(c1.d[*k].iter().map(|(i, x)| (*i, x * c)));
                    }
                    build::push_reduced(&self.model, &mut acc);
                    if !acc.is_empty() {
                        return Err(CobarError::CompositionNotZero { s, t });
                    }
                }
            }
        }
        Ok(())
    }

    /// Human-readable basis element, e.g. `v1[t1|t1^2]`.
    pub fn render_basis(&self, b: &CobarBasis) -> String {
        render_basis(&self.comodule, b)
    }

    fn faces(&self) -> &FaceMaps<Scalar> {
        self.faces.get_or_init(|| FaceMaps::new(&self.comodule.hopf, self.s_max as usize))
    }

    /// `μ[x|...] * ν[y|...] = μ ρ(ν)[x|...|y|...]` for a comodule algebra
    /// `A/J` with one generator in degree 0.
    pub fn multiply(&self, a: (u32, u32, &SparseVec), b: (u32, u32, &SparseVec)) -> Result<SparseVec, CobarError> {
        let m = &self.comodule;
        let unit_like = m.generators.len() == 1 && m.generators[0].degree == 0 && m.coaction[0].len() == 1;
        if !unit_like {
            return Err(CobarError::Unsupported(format!("{} is not a cyclic comodule algebra", m.name)));
        }
        let (s, t) = (a.0 + b.0, a.1 + b.1);
        if s > self.s_max || t > self.t_max {
            return Err(CobarError::OutOfRange { s, t });
        }
        let (ca, cb, target) = (&self.cells[&(a.0, a.1)], &self.cells[&(b.0, b.1)], &self.cells[&(s, t)]);
        let f = self.faces();
        let s1 = a.0 as usize;
        let mut images: Vec<Option<Terms<Scalar>>> = f.rho[s1].iter().cloned().map(Some).collect();
        for c in 1..=b.0 as usize {
            for j in 0..f.nh {
                images.push(Some(vec![(Monomial::gen(f.gen_index(c + s1, j)), f.one.clone())]));
            }
        }
        let alph = &f.alphabets[s as usize];
        let mut sub = Substitution::new(&images, alph, f.cap, f.one.clone());
        let killed = self.cyclic.map_or(0, |c| c.killed);
        let mut out: SparseVec = Vec::new();
        for (j, y) in b.2 {
            let shifted = terms::scale(&sub.monomial(&cb.basis[*j].mono), y);
            for (i, x) in a.2 {
                let prod = terms::mul(&vec![(ca.basis[*i].mono.clone(), x.clone())], &shifted, alph, f.cap);
                for (mono, c) in prod {
                    if mono.factors().iter().any(|&(g, _)| (g as usize) < killed) {
                        continue;
                    }
                    let k = target.index_of(&CobarBasis { mono, gen: 0 }).expect("products stay reduced");
                    out.push((k, c));
                }
            }
        }
        build::push_reduced(&self.model, &mut out);
        Ok(out)
    }
}

pub fn render_basis(m: &Comodule, b: &CobarBasis) -> String {
    let h = &m.hopf;
    let (nb, nh) = (h.nb(), h.nh());
    let base = Monomial::from_pairs(b.mono.factors().iter().filter(|f| (f.0 as usize) < nb).map(|&(g, e)| (g as usize, e)));
    let mut copies: BTreeMap<usize, Vec<(usize, u32)>> = BTreeMap::new();
    for &(g, e) in b.mono.factors() {
        let g = g as usize;
        if g >= nb {
            let c = (g - nb) / nh;
            copies.entry(c).or_default().push((g - c * nh, e));
        }
    }
    let mut s = String::new();
    if !base.is_one() || copies.is_empty() {
        s.push_str(&base.render(&h.base));
    }
    if !copies.is_empty() {
        let parts: Vec<String> =
            copies.values().map(|f| Monomial::from_pairs(f.iter().copied()).render(&h.gamma)).collect();
        write!(s, "[{}]", parts.join("|")).unwrap();
    }
    if m.generators.len() > 1 {
        write!(s, " {}", m.generators[b.gen].name).unwrap();
    }
    s
}

fn render_vector(v: &SparseVec, name: impl Fn(usize) -> String) -> String {
    if v.is_empty() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (k, c) in v.iter().take(4) {
        let coeff = if c.is_one() { String::new() } else { format!("{c}*") };
        parts.push(format!("{coeff}{}", name(*k)));
    }
    if v.len() > 4 {
        parts.push("...".into());
    }
    parts.join(" + ")
}

/// How `ext` computes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Route {
    /// Lambda algebra for the trivial comodule over the mod 2 dual Steenrod
    /// algebra, cobar otherwise.
    #[default]
    Auto,
    Cobar,
    Lambda,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ExtOptions {
    pub route: Route,
    pub reversed: bool,
}

#[derive(Clone, Debug)]
pub enum ExtComplex {
    Cobar(Arc<CobarComplex>),
    Lambda(Arc<LambdaComplex>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtClass {
    /// `Some(k)` for a `Z/p^k` summand; `None` for a free summand or a
    /// vector space direction over F_p.
    pub order: Option<u32>,
    pub representative: SparseVec,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtGroup {
    pub s: u32,
    pub t: u32,
    pub shape: ModuleShape,
    pub classes: Vec<ExtClass>,
}

/// An element of `Ext^{s,t}` in the coordinates of the stored generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtElement {
    pub s: u32,
    pub t: u32,
    pub coords: Vec<Scalar>,
}

impl ExtElement {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
}

#[derive(Clone, Debug)]
pub struct ExtTable {
    pub comodule: String,
    pub hopf: HopfKind,
    pub prime: u32,
    pub model: CoefficientModel,
    pub shift: (i32, i32),
    pub s_max: u32,
    pub t_max: u32,
    pub groups: BTreeMap<(u32, u32), ExtGroup>,
    pub complex: ExtComplex,
    solvers: BTreeMap<(u32, u32), Solver>,
}

fn is_trivial_f2(h: &HopfAlgebroidData, m: &Comodule) -> bool {
    h.kind == HopfKind::DualSteenrod
        && h.prime == 2
        && m.generators.len() == 1
        && m.generators[0].degree == 0
        && m.relations.is_empty()
        && m.cyclic_quotient().is_some()
}

fn solve(model: CoefficientModel, spot: &Spot) -> Option<Solver> {
    let plain = spot.rel.is_empty() && spot.rel_next.is_empty();
    Some(match model {
        CoefficientModel::Field { p } | CoefficientModel::Truncated { p, k: 1 } if plain => Solver::Fp(FpSolver::new(p, spot)),
        CoefficientModel::Field { p } => Solver::Truncated(LatticeSolver::new(ModPn::new(p, 1), spot)?),
        CoefficientModel::Truncated { p, k } => Solver::Truncated(LatticeSolver::new(ModPn::new(p, k), spot)?),
        CoefficientModel::Local { p } => Solver::Local(LatticeSolver::new(ZpLocal { p }, spot)?),
    })
}

fn orders(model: CoefficientModel, solver: &Solver) -> Vec<Option<u32>> {
    match (model, solver) {
        (CoefficientModel::Field { .. }, _) => vec![None; solver.len()],
        (CoefficientModel::Truncated { .. }, Solver::Fp(_)) => vec![Some(1); solver.len()],
        _ => solver.orders(),
    }
}

/// Residues mod p read as integers in `ring`; other scalars pass through.
fn lift(ring: ScalarRing, c: &Scalar) -> Scalar {
    match c {
        Scalar::Fp { v, .. } if ring.is_zp() => Scalar::from_i64(ring, *v as i64),
        _ => c.clone(),
    }
}

fn lift_vec(ring: ScalarRing, v: SparseVec) -> SparseVec {
    v.iter().map(|(k, c)| (*k, lift(ring, c))).collect()
}

fn shape_of(orders: &[Option<u32>]) -> ModuleShape {
    let mut torsion: Vec<u32> = orders.iter().flatten().copied().collect();
    torsion.sort_unstable();
    ModuleShape { free_rank: orders.iter().filter(|o| o.is_none()).count(), torsion }
}

/// `Ext^{s,t}_Γ(A, M)` for `s <= s_max`, `t <= t_max`.
pub fn ext(h: &HopfAlgebroidData, m: &Comodule, s_max: u32, t_max: u32) -> Result<ExtTable, CobarError> {
    ext_with(h, m, s_max, t_max, ExtOptions::default())
}

pub fn ext_with(h: &HopfAlgebroidData, m: &Comodule, s_max: u32, t_max: u32, opts: ExtOptions) -> Result<ExtTable, CobarError> {
    let lambda = match opts.route {
        Route::Auto => is_trivial_f2(h, m),
        Route::Cobar => false,
        Route::Lambda => {
            same_hopf(h, m)?;
            if !is_trivial_f2(h, m) {
                return Err(CobarError::Unsupported("the Lambda algebra only computes Ext(F_2, F_2) at p = 2".into()));
            }
            true
        }
    };
    if lambda {
        same_hopf(h, m)?;
        return Ok(ext_lambda(m, s_max, t_max, opts.reversed));
    }
    let c = build_cobar_with(h, m, s_max, t_max, BuildOptions { reversed: opts.reversed })?;
    ext_of_complex(Arc::new(c))
}

pub fn ext_of_complex(c: Arc<CobarComplex>) -> Result<ExtTable, CobarError> {
    let keys: Vec<(u32, u32)> = (0..=c.s_max).flat_map(|s| (0..=c.t_max).map(move |t| (s, t))).collect();
    let empty: Vec<SparseVec> = Vec::new();
    let solved: Vec<((u32, u32), Option<Solver>)> = keys
        .par_iter()
        .map(|&(s, t)| {
            let cell = &c.cells[&(s, t)];
            let next = &c.cells[&(s + 1, t)];
            let d_in = if s == 0 { &empty } else { &c.cells[&(s - 1, t)].d };
            let spot = Spot {
                n: cell.dim(),
                n_next: next.dim(),
                d_in,
                d_out: &cell.d,
                rel: &cell.relations,
                rel_next: &next.relations,
            };
            ((s, t), solve(c.model, &spot))
        })
        .collect();
    let mut solvers = BTreeMap::new();
    let mut groups = BTreeMap::new();
    for ((s, t), solver) in solved {
        let solver = solver.ok_or(CobarError::CompositionNotZero { s, t })?;
        let cell = &c.cells[&(s, t)];
        let ords = orders(c.model, &solver);
        let classes = ords
            .iter()
            .enumerate()
            .map(|(i, &order)| {
                let representative = lift_vec(c.model.scalar_ring(), solver.generator(i));
                let label = render_vector(&representative, |k| c.render_basis(&cell.basis[k]));
                ExtClass { order, representative, label }
            })
            .collect();
        groups.insert((s, t), ExtGroup { s, t, shape: shape_of(&ords), classes });
        solvers.insert((s, t), solver);
    }
    let m = &c.comodule;
    Ok(ExtTable {
        comodule: m.name.clone(),
        hopf: m.hopf.kind,
        prime: m.prime(),
        model: c.model,
        shift: m.shift,
        s_max: c.s_max,
        t_max: c.t_max,
        groups,
        complex: ExtComplex::Cobar(c.clone()),
        solvers,
    })
}

fn ext_lambda(m: &Comodule, s_max: u32, t_max: u32, reversed: bool) -> ExtTable {
    let lc = Arc::new(LambdaComplex::new(s_max, t_max, reversed));
    let keys: Vec<(u32, u32)> = (0..=s_max).flat_map(|s| (0..=t_max).map(move |t| (s, t))).collect();
    let empty: Vec<SparseVec> = Vec::new();
    let solved: Vec<((u32, u32), FpSolver)> = keys
        .par_iter()
        .map(|&(s, t)| {
            let cell = &lc.cells[&(s, t)];
            let d_in = if s == 0 { &empty } else { &lc.cells[&(s - 1, t)].d };
            let spot = Spot {
                n: cell.basis.len(),
                n_next: lc.cells[&(s + 1, t)].basis.len(),
                d_in,
                d_out: &cell.d,
                rel: &[],
                rel_next: &[],
            };
            ((s, t), FpSolver::new(2, &spot))
        })
        .collect();
    let mut solvers = BTreeMap::new();
    let mut groups = BTreeMap::new();
    for ((s, t), solver) in solved {
        let cell = &lc.cells[&(s, t)];
        let solver = Solver::Fp(solver);
        let classes: Vec<ExtClass> = (0..solver.len())
            .map(|i| {
                let representative = solver.generator(i);
                let label = render_vector(&representative, |k| lambda::render_word(&cell.basis[k]));
                ExtClass { order: None, representative, label }
            })
            .collect();
        groups.insert((s, t), ExtGroup { s, t, shape: ModuleShape { free_rank: classes.len(), torsion: Vec::new() }, classes });
        solvers.insert((s, t), solver);
    }
    ExtTable {
        comodule: m.name.clone(),
        hopf: HopfKind::DualSteenrod,
        prime: 2,
        model: CoefficientModel::Field { p: 2 },
        shift: m.shift,
        s_max,
        t_max,
        groups,
        complex: ExtComplex::Lambda(lc),
        solvers,
    }
}

impl ExtTable {
    pub fn group(&self, s: u32, t: u32) -> Option<&ExtGroup> {
        self.groups.get(&(s, t))
    }

    pub fn shape(&self, s: u32, t: u32) -> ModuleShape {
        self.group(s, t).map(|g| g.shape.clone()).unwrap_or_default()
    }

    /// Dimension after tensoring with F_p (number of cyclic summands).
    pub fn dim(&self, s: u32, t: u32) -> usize {
        self.group(s, t).map_or(0, |g| g.classes.len())
    }

    fn ring(&self) -> ScalarRing {
        match self.model {
            CoefficientModel::Field { p } => ScalarRing::Fp(p),
            CoefficientModel::Local { p } | CoefficientModel::Truncated { p, .. } => ScalarRing::Zp(p),
        }
    }

    /// The i-th generator of `Ext^{s,t}`.
    pub fn class(&self, s: u32, t: u32, i: usize) -> Result<ExtElement, CobarError> {
        let n = self.dim(s, t);
        if i >= n {
            return Err(CobarError::OutOfRange { s, t });
        }
        let ring = self.ring();
        let coords = (0..n).map(|k| if k == i { Scalar::one(ring) } else { Scalar::zero(ring) }).collect();
        Ok(ExtElement { s, t, coords })
    }

    /// The class of `1` in `Ext^{0,0}`, when it is a generator.
    pub fn unit(&self) -> Result<ExtElement, CobarError> {
        let v = vec![(0usize, Scalar::one(self.ring()))];
        self.class_of(0, 0, &v)
    }

    fn cell_dim(&self, s: u32, t: u32) -> usize {
        match &self.complex {
            ExtComplex::Cobar(c) => c.dim(s, t),
            ExtComplex::Lambda(l) => l.cells.get(&(s, t)).map_or(0, |c| c.basis.len()),
        }
    }

    /// A cocycle representing `x`.
    pub fn cocycle(&self, x: &ExtElement) -> Result<SparseVec, CobarError> {
        let g = self.group(x.s, x.t).ok_or(CobarError::OutOfRange { s: x.s, t: x.t })?;
        let mut acc: SparseVec = Vec::new();
        for (c, class) in x.coords.iter().zip(&g.classes) {
            acc.extend(class.representative.iter().map(|(k, y)| (*k, y * c)));
        }
        match &self.complex {
            ExtComplex::Cobar(c) => build::push_reduced(&c.model, &mut acc),
            ExtComplex::Lambda(_) => build::push_reduced(&CoefficientModel::Field { p: 2 }, &mut acc),
        }
        Ok(acc)
    }

    /// The class of a cocycle, or `None` if `v` is not a cocycle.
    pub fn class_of(&self, s: u32, t: u32, v: &SparseVec) -> Result<ExtElement, CobarError> {
        let solver = self.solvers.get(&(s, t)).ok_or(CobarError::OutOfRange { s, t })?;
        let coords = solver
            .coords(self.cell_dim(s, t), v)
            .ok_or_else(|| CobarError::Unsupported(format!("vector at ({s}, {t}) is not a cocycle")))?;
        let ring = self.ring();
        Ok(ExtElement { s, t, coords: coords.iter().map(|c| lift(ring, c)).collect() })
    }

    pub fn render(&self, x: &ExtElement) -> String {
        let g = &self.groups[&(x.s, x.t)];
        let parts: Vec<String> = x
            .coords
            .iter()
            .zip(&g.classes)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, cl)| if c.is_one() { format!("[{}]", cl.label) } else { format!("{c}*[{}]", cl.label) })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    /// TSV with columns `s, t, w, free_rank, torsion, representatives`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("s\tt\tw\tfree_rank\ttorsion\trepresentatives\n");
        for g in self.groups.values().filter(|g| !g.classes.is_empty()) {
            let torsion: Vec<String> = g.shape.torsion.iter().map(|k| format!("Z/{}^{k}", self.prime)).collect();
            let reps: Vec<String> = g.classes.iter().map(|c| c.label.clone()).collect();
            writeln!(out, "{}\t{}\t\t{}\t{}\t{}", g.s, g.t, g.shape.free_rank, torsion.join(","), reps.join("; ")).unwrap();
        }
        out
    }

    pub fn chart(&self) -> Chart {
        let nodes = self
            .groups
            .values()
            .filter(|g| !g.classes.is_empty())
            .map(|g| ChartNode {
                s: g.s,
                t: g.t,
                w: None,
                dim: g.classes.len(),
                labels: g.classes.iter().map(|c| c.label.clone()).collect(),
                provenance: vec!["machine".into(); g.classes.len()],
            })
            .collect();
        Chart {
            title: format!("Ext({})", self.comodule),
            prime: self.prime,
            page: None,
            source: None,
            shift: self.shift,
            collapsed: false,
            nodes,
            edges: Vec::new(),
            undetermined: Vec::new(),
        }
    }
}

/// Yoneda product of two classes, computed on cobar (or Lambda)
/// representatives by concatenation and reduced to the stored basis.
pub fn yoneda_product(e: &ExtTable, x: &ExtElement, y: &ExtElement) -> Result<ExtElement, CobarError> {
    let (s, t) = (x.s + y.s, x.t + y.t);
    if s > e.s_max || t > e.t_max {
        return Err(CobarError::OutOfRange { s, t });
    }
    let (a, b) = (e.cocycle(x)?, e.cocycle(y)?);
    let v = match &e.complex {
        ExtComplex::Cobar(c) => c.multiply((x.s, x.t, &a), (y.s, y.t, &b))?,
        ExtComplex::Lambda(l) => l.multiply((x.s, x.t, &a), (y.s, y.t, &b)).ok_or(CobarError::OutOfRange { s, t })?,
    };
    e.class_of(s, t, &v)
}
