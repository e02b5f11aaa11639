//! Cohomology of one bidegree of a (possibly presented) cochain complex.
//!
//! The complex at a spot is `F_{s-1} -> F_s -> F_{s+1}` with relation
//! submodules `R_s, R_{s+1}`; the cohomology is
//! `{x : dx ∈ R_{s+1}} / (R_s + d F_{s-1})`.

use num_rational::BigRational;

use super::SparseVec;
use crate::scalar_linalg::fp::{FpRow, FpSubspace};
use crate::scalar_linalg::lattice::{kernel, Lattice};
use crate::scalar_linalg::local::{local_snf, mat_vec, Dense, Track};
use crate::scalar_linalg::{fp_cohomology_reps, LocalRing, ModPn, Scalar, ScalarRing, ZpLocal};

pub(crate) trait RingConv: LocalRing {
    fn embed(&self, s: &Scalar) -> Self::E;
    fn export(&self, e: &Self::E) -> Scalar;
}

impl RingConv for ZpLocal {
    fn embed(&self, s: &Scalar) -> BigRational {
        s.to_rational()
    }
    fn export(&self, e: &BigRational) -> Scalar {
        Scalar::Zp { p: self.p, q: e.clone() }
    }
}

impl RingConv for ModPn {
    fn embed(&self, s: &Scalar) -> u64 {
        self.from_rational(&s.to_rational())
    }
    fn export(&self, e: &u64) -> Scalar {
        Scalar::from_i64(ScalarRing::Zp(self.p), *e as i64)
    }
}

pub(crate) fn to_fp_row(p: u32, v: &SparseVec) -> FpRow {
    let mut r: FpRow = v.iter().filter_map(|(k, c)| c.residue().map(|x| (*k, x % p))).filter(|x| x.1 != 0).collect();
    r.sort_unstable();
    r
}

fn dense<R: RingConv>(r: &R, n: usize, v: &SparseVec) -> Vec<R::E> {
    let mut out = vec![r.zero(); n];
    for (k, c) in v {
        out[*k] = r.add(&out[*k], &r.embed(c));
    }
    out
}

/// The data of one spot, borrowed from the complex.
pub(crate) struct Spot<'a> {
    pub n: usize,
    pub n_next: usize,
    /// Columns of `d: F_{s-1} -> F_s`.
    pub d_in: &'a [SparseVec],
    /// Columns of `d: F_s -> F_{s+1}`.
    pub d_out: &'a [SparseVec],
    pub rel: &'a [SparseVec],
    pub rel_next: &'a [SparseVec],
}

pub(crate) fn dense_vec<R: RingConv>(r: &R, n: usize, v: &SparseVec) -> Vec<R::E> {
    dense(r, n, v)
}

/// `{x : d x ∈ R_next}` for `d` given by columns into a space of dimension
/// `n_next`.
pub(crate) fn preimage<R: RingConv>(r: &R, n: usize, n_next: usize, d: &[SparseVec], rel_next: &[SparseVec]) -> Lattice<R::E> {
    if n_next == 0 {
        let id: Vec<Vec<R::E>> = (0..n).map(|i| (0..n).map(|j| if i == j { r.one() } else { r.zero() }).collect()).collect();
        return Lattice::from_gens(r, n, &id);
    }
    let m = rel_next.len();
    let mut a: Dense<R::E> = vec![vec![r.zero(); n + m]; n_next];
    for (j, col) in d.iter().enumerate() {
        for (k, c) in col {
            a[*k][j] = r.add(&a[*k][j], &r.embed(c));
        }
    }
    for (j, col) in rel_next.iter().enumerate() {
        for (k, c) in col {
            a[*k][n + j] = r.sub(&a[*k][n + j], &r.embed(c));
        }
    }
    let ker: Vec<Vec<R::E>> = kernel(r, a, n_next, n + m)
        .into_iter()
        .map(|mut v| {
            v.truncate(n);
            v
        })
        .collect();
    Lattice::from_gens(r, n, &ker)
}

#[derive(Clone, Debug)]
pub(crate) struct LatticeSolver<R: LocalRing> {
    pub r: R,
    z: Lattice<R::E>,
    u: Dense<R::E>,
    /// `(row of u, order exponent)`; `None` marks a free summand.
    pub classes: Vec<(usize, Option<u32>)>,
    pub gens: Vec<Vec<R::E>>,
}

impl<R: RingConv + Clone> LatticeSolver<R> {
    /// `None` when `d(R_s + d F_{s-1})` is not inside `R_{s+1}`.
    pub fn new(r: R, spot: &Spot) -> Option<LatticeSolver<R>> {
        let n = spot.n;
        let z = preimage(&r, n, spot.n_next, spot.d_out, spot.rel_next);
        let kz = z.rank();
        let mut cols: Vec<Vec<R::E>> = Vec::new();
        for v in spot.rel.iter().chain(spot.d_in) {
            cols.push(z.coords(&r, &dense(&r, n, v))?);
        }
        if let Some(big) = r.truncation() {
            for (j, &f) in z.vals.iter().enumerate() {
                if f > 0 {
                    let mut c = vec![r.zero(); kz];
                    c[j] = r.p_power(big - f);
                    cols.push(c);
                }
            }
        }
        let pres: Dense<R::E> = (0..kz).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
        let snf = local_snf(&r, pres, kz, cols.len(), Track { u: true, u_inv: true, v: false, v_inv: false });
        let u_inv = snf.u_inv.unwrap();
        let mut classes = Vec::new();
        let mut gens = Vec::new();
        for i in 0..kz {
            let order = match snf.vals.get(i) {
                Some(0) => continue,
                Some(&k) => Some(k),
                None => r.truncation(),
            };
            let g: Vec<R::E> = (0..n)
                .map(|row| (0..kz).fold(r.zero(), |acc, j| r.add(&acc, &r.mul(&z.basis[j][row], &u_inv[j][i]))))
                .collect();
            classes.push((i, order));
            gens.push(g);
        }
        Some(LatticeSolver { r, z, u: snf.u.unwrap(), classes, gens })
    }

    /// Coordinates of the class of the cocycle `x`, each reduced modulo the
    /// order of its generator. `None` when `x` is not a cocycle.
    pub fn coords(&self, n: usize, x: &SparseVec) -> Option<Vec<Scalar>> {
        let c = self.z.coords(&self.r, &dense(&self.r, n, x))?;
        let y = mat_vec(&self.r, &self.u, &c);
        let p = self.r.prime();
        Some(
            self.classes
                .iter()
                .map(|&(row, order)| {
                    let s = self.r.export(&y[row]);
                    match order {
                        Some(k) => {
                            let m = ModPn::new(p, k);
                            Scalar::from_i64(ScalarRing::Zp(p), m.from_rational(&s.to_rational()) as i64)
                        }
                        None => s,
                    }
                })
                .collect(),
        )
    }

    pub fn generator(&self, i: usize) -> SparseVec {
        self.gens[i].iter().enumerate().filter(|(_, e)| !self.r.is_zero(e)).map(|(k, e)| (k, self.r.export(e))).collect()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct FpSolver {
    pub p: u32,
    image: FpSubspace,
    reps: FpSubspace,
    pub gens: Vec<FpRow>,
}

impl FpSolver {
    pub fn new(p: u32, spot: &Spot) -> FpSolver {
        let d_in: Vec<FpRow> = spot.d_in.iter().map(|c| to_fp_row(p, c)).collect();
        // rows of d_out from its columns
        let mut rows: Vec<FpRow> = vec![Vec::new(); spot.n_next];
        for (j, col) in spot.d_out.iter().enumerate() {
            for (k, x) in to_fp_row(p, col) {
                rows[k].push((j, x));
            }
        }
        let gens = fp_cohomology_reps(p, spot.n, &d_in, rows);
        FpSolver { p, image: FpSubspace::from_rows(p, d_in), reps: FpSubspace::from_rows(p, gens.clone()), gens }
    }

    pub fn coords(&self, x: &SparseVec) -> Option<Vec<Scalar>> {
        let r = self.image.reduce(&to_fp_row(self.p, x));
        let c = self.reps.coordinates(&r)?;
        let mut out = vec![Scalar::zero(ScalarRing::Fp(self.p)); self.gens.len()];
        for (k, v) in c {
            out[k] = Scalar::Fp { p: self.p, v };
        }
        Some(out)
    }

    pub fn generator(&self, i: usize) -> SparseVec {
        self.gens[i].iter().map(|&(k, v)| (k, Scalar::Fp { p: self.p, v })).collect()
    }
}

/// One solved spot.
#[derive(Clone, Debug)]
pub(crate) enum Solver {
    Fp(FpSolver),
    Local(LatticeSolver<ZpLocal>),
    Truncated(LatticeSolver<ModPn>),
}

impl Solver {
    /// Order exponents of the generators (`None` = free or field direction).
    pub fn orders(&self) -> Vec<Option<u32>> {
        match self {
            Solver::Fp(s) => vec![None; s.gens.len()],
            Solver::Local(l) => l.classes.iter().map(|c| c.1).collect(),
            Solver::Truncated(l) => l.classes.iter().map(|c| c.1).collect(),
        }
    }

    pub fn coords(&self, n: usize, x: &SparseVec) -> Option<Vec<Scalar>> {
        match self {
            Solver::Fp(s) => s.coords(x),
            Solver::Local(l) => l.coords(n, x),
            Solver::Truncated(l) => l.coords(n, x),
        }
    }

    pub fn generator(&self, i: usize) -> SparseVec {
        match self {
            Solver::Fp(s) => s.generator(i),
            Solver::Local(l) => l.generator(i),
            Solver::Truncated(l) => l.generator(i),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Solver::Fp(s) => s.gens.len(),
            Solver::Local(l) => l.gens.len(),
            Solver::Truncated(l) => l.gens.len(),
        }
    }
}
