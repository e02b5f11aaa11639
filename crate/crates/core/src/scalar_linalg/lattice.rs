//! Submodules of free modules over a discrete valuation ring.
//!
//! A [`Lattice`] stores an adapted basis `p^{e_i} u_i` where the `u_i` are
//! columns of an invertible matrix, which makes membership and coordinate
//! queries a single matrix-vector product.

use super::local::{local_snf, mat_vec, Dense, LocalRing, ModPn, Track};

#[derive(Clone, Debug)]
pub struct Lattice<E> {
    pub n: usize,
    /// Adapted basis vectors `p^{e_i} u_i`.
    pub basis: Vec<Vec<E>>,
    pub vals: Vec<u32>,
    /// `U` with `U * (generator matrix) * V` diagonal; row i of `U x` reads
    /// the coordinate of `x` along `u_i`.
    u: Dense<E>,
}

impl<E: Clone + PartialEq + std::fmt::Debug> Lattice<E> {
    pub fn from_gens<R: LocalRing<E = E>>(r: &R, n: usize, gens: &[Vec<E>]) -> Lattice<E> {
        let k = gens.len();
        let a: Dense<E> = (0..n).map(|i| gens.iter().map(|g| g[i].clone()).collect()).collect();
        let snf = local_snf(r, a, n, k, Track { u: true, u_inv: true, v: false, v_inv: false });
        let u_inv = snf.u_inv.unwrap();
        let basis = snf
            .vals
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let pe = r.p_power(e);
                (0..n).map(|row| r.mul(&u_inv[row][i], &pe)).collect()
            })
            .collect();
        Lattice { n, basis, vals: snf.vals, u: snf.u.unwrap() }
    }

    pub fn zero<R: LocalRing<E = E>>(r: &R, n: usize) -> Lattice<E> {
        Lattice::from_gens(r, n, &[])
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of `x` in the adapted basis, or `None` if `x` is not in
    /// the lattice.
    pub fn coords<R: LocalRing<E = E>>(&self, r: &R, x: &[E]) -> Option<Vec<E>> {
        let y = mat_vec(r, &self.u, x);
        let mut out = Vec::with_capacity(self.vals.len());
        for (i, yi) in y.iter().enumerate() {
            if i < self.vals.len() {
                let e = self.vals[i];
                match r.valuation(yi) {
                    None => out.push(r.zero()),
                    Some(v) if v >= e => out.push(r.div(yi, &r.p_power(e))),
                    Some(_) => return None,
                }
            } else if !r.is_zero(yi) {
                return None;
            }
        }
        Some(out)
    }

    pub fn contains<R: LocalRing<E = E>>(&self, r: &R, x: &[E]) -> bool {
        self.coords(r, x).is_some()
    }

    pub fn contains_lattice<R: LocalRing<E = E>>(&self, r: &R, other: &Lattice<E>) -> bool {
        other.basis.iter().all(|b| self.contains(r, b))
    }

    pub fn sum<R: LocalRing<E = E>>(&self, r: &R, other: &Lattice<E>) -> Lattice<E> {
        let gens: Vec<Vec<E>> = self.basis.iter().chain(other.basis.iter()).cloned().collect();
        Lattice::from_gens(r, self.n, &gens)
    }

    pub fn intersect<R: LocalRing<E = E>>(&self, r: &R, other: &Lattice<E>) -> Lattice<E> {
        // kernel of [B1 | -B2], then map the first block through B1
        let k1 = self.basis.len();
        let k2 = other.basis.len();
        let a: Dense<E> = (0..self.n)
            .map(|i| {
                self.basis
                    .iter()
                    .map(|b| b[i].clone())
                    .chain(other.basis.iter().map(|b| r.sub(&r.zero(), &b[i])))
                    .collect()
            })
            .collect();
        let ker = kernel(r, a, self.n, k1 + k2);
        let gens: Vec<Vec<E>> = ker
            .iter()
            .map(|c| {
                (0..self.n)
                    .map(|i| (0..k1).fold(r.zero(), |acc, j| r.add(&acc, &r.mul(&self.basis[j][i], &c[j]))))
                    .collect()
            })
            .collect();
        Lattice::from_gens(r, self.n, &gens)
    }
}

/// Generators of the kernel of `x -> A x` for an `rows x cols` matrix.
pub fn kernel<R: LocalRing>(r: &R, a: Dense<R::E>, rows: usize, cols: usize) -> Vec<Vec<R::E>> {
    let snf = local_snf(r, a, rows, cols, Track { u: false, u_inv: false, v: true, v_inv: false });
    let v = snf.v.unwrap();
    let rank = snf.vals.len();
    let torsion_bound = r.truncation();
    let mut out = Vec::new();
    for k in 0..cols {
        let scale = if k < rank {
            match torsion_bound {
                Some(n) if snf.vals[k] > 0 => r.p_power(n - snf.vals[k]),
                _ => continue,
            }
        } else {
            r.one()
        };
        out.push((0..cols).map(|i| r.mul(&v[i][k], &scale)).collect());
    }
    out
}

impl Lattice<u64> {
    /// Composition length of `(Z/p^N)^n`-submodule.
    pub fn length(&self, r: &ModPn) -> u32 {
        self.vals.iter().map(|e| r.n - e).sum()
    }

    /// The diagonal lattice spanned by `p^{e_i} b_i`; exponents `>= N` give zero.
    pub fn diagonal(r: &ModPn, exps: &[u32]) -> Lattice<u64> {
        let n = exps.len();
        let gens: Vec<Vec<u64>> = exps
            .iter()
            .enumerate()
            .filter(|(_, e)| **e < r.n)
            .map(|(i, &e)| {
                let mut g = vec![0; n];
                g[i] = r.p_power(e);
                g
            })
            .collect();
        Lattice::from_gens(r, n, &gens)
    }
}
