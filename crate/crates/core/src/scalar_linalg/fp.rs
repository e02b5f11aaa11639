//! Sparse row reduction over F_p.

use std::collections::{BTreeMap, BTreeSet};

use super::scalar::mod_inv;

/// Sparse vector: (column, nonzero residue) pairs sorted by column.
pub type FpRow = Vec<(usize, u32)>;

/// Returns `a + f*b` mod p.
pub fn axpy(a: &[(usize, u32)], f: u32, b: &[(usize, u32)], p: u32) -> FpRow {
    if f == 0 {
        return a.to_vec();
    }
    let p64 = p as u64;
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, ((f as u64 * b[j].1 as u64) % p64) as u32));
            j += 1;
        } else {
            let v = ((a[i].1 as u64 + f as u64 * b[j].1 as u64) % p64) as u32;
            if v != 0 {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn scale(a: &[(usize, u32)], f: u32, p: u32) -> FpRow {
    if f == 0 {
        return Vec::new();
    }
    a.iter().map(|&(c, v)| (c, ((v as u64 * f as u64) % p as u64) as u32)).collect()
}

pub fn get(a: &[(usize, u32)], col: usize) -> u32 {
    match a.binary_search_by_key(&col, |e| e.0) {
        Ok(k) => a[k].1,
        Err(_) => 0,
    }
}

pub fn to_dense(a: &[(usize, u32)], n: usize) -> Vec<u32> {
    let mut out = vec![0; n];
    for &(c, v) in a {
        out[c] = v;
    }
    out
}

pub fn from_dense(a: &[u32]) -> FpRow {
    a.iter().enumerate().filter(|(_, v)| **v != 0).map(|(c, v)| (c, *v)).collect()
}

/// Forward elimination to echelon form.
///
/// Pivots are chosen column by column from the left; among rows whose
/// leading entry sits in the current column the one with the fewest nonzeros
/// wins, ties going to the lowest original index. Returned rows have leading
/// coefficient 1 and strictly increasing pivot columns.
pub fn echelon(p: u32, rows: Vec<FpRow>) -> (Vec<FpRow>, Vec<usize>) {
    // bucket: leading column -> set of (nnz, index)
    let mut store: Vec<Option<FpRow>> = Vec::with_capacity(rows.len());
    let mut buckets: BTreeMap<usize, BTreeSet<(usize, usize)>> = BTreeMap::new();
    for (i, r) in rows.into_iter().enumerate() {
        if let Some(&(c, _)) = r.first() {
            buckets.entry(c).or_default().insert((r.len(), i));
        }
        store.push(Some(r));
    }
    let mut out_rows = Vec::new();
    let mut pivots = Vec::new();
    while let Some((col, set)) = buckets.pop_first() {
        let mut it = set.into_iter();
        let (_, pi) = it.next().unwrap();
        let prow = store[pi].take().unwrap();
        let inv = mod_inv(prow[0].1 as u64, p as u64) as u32;
        let prow = scale(&prow, inv, p);
        for (_, i) in it {
            let r = store[i].take().unwrap();
            let f = p - r[0].1;
            let nr = axpy(&r, f, &prow, p);
            if let Some(&(c, _)) = nr.first() {
                buckets.entry(c).or_default().insert((nr.len(), i));
            }
            store[i] = Some(nr);
        }
        pivots.push(col);
        out_rows.push(prow);
    }
    (out_rows, pivots)
}

/// Back-substitution turning an echelon basis into the reduced form.
pub fn back_substitute(p: u32, rows: &mut [FpRow], pivots: &[usize]) {
    for k in (0..rows.len()).rev() {
        let pc = pivots[k];
        let (head, tail) = rows.split_at_mut(k);
        let prow = &tail[0];
        for r in head.iter_mut() {
            let f = get(r, pc);
            if f != 0 {
                *r = axpy(r, p - f, prow, p);
            }
        }
    }
}

pub fn rank(p: u32, rows: Vec<FpRow>) -> usize {
    echelon(p, rows).0.len()
}

/// Kernel of the map `x -> M x` where `M` has the given rows and `cols` columns.
pub fn kernel(p: u32, cols: usize, rows: Vec<FpRow>) -> Vec<FpRow> {
    let (mut ech, piv) = echelon(p, rows);
    back_substitute(p, &mut ech, &piv);
    let pivset: BTreeSet<usize> = piv.iter().copied().collect();
    let mut basis = Vec::new();
    for f in (0..cols).filter(|c| !pivset.contains(c)) {
        let mut v: FpRow = Vec::new();
        for (k, r) in ech.iter().enumerate() {
            let x = get(r, f);
            if x != 0 {
                v.push((piv[k], p - x));
            }
        }
        v.push((f, 1));
        v.sort_unstable_by_key(|e| e.0);
        basis.push(v);
    }
    basis
}

/// A subspace of F_p^n held in fully reduced echelon form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FpSubspace {
    pub p: u32,
    rows: BTreeMap<usize, FpRow>,
}

impl FpSubspace {
    pub fn new(p: u32) -> FpSubspace {
        FpSubspace { p, rows: BTreeMap::new() }
    }

    pub fn from_rows(p: u32, rows: Vec<FpRow>) -> FpSubspace {
        let (mut ech, piv) = echelon(p, rows);
        back_substitute(p, &mut ech, &piv);
        FpSubspace { p, rows: piv.into_iter().zip(ech).collect() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn basis(&self) -> impl Iterator<Item = &FpRow> + '_ {
        self.rows.values()
    }

    /// Normal form of `v` modulo the subspace (zero at every pivot column).
    pub fn reduce(&self, v: &[(usize, u32)]) -> FpRow {
        let mut out = v.to_vec();
        for &(c, x) in v {
            if let Some(r) = self.rows.get(&c) {
                let f = get(&out, c);
                debug_assert_eq!(f, x);
                out = axpy(&out, self.p - f, r, self.p);
            }
        }
        out
    }

    /// Coefficients of `v` in the stored basis, if `v` lies in the subspace.
    pub fn coordinates(&self, v: &[(usize, u32)]) -> Option<Vec<(usize, u32)>> {
        let coeffs: Vec<(usize, u32)> =
            self.rows.keys().enumerate().map(|(k, &c)| (k, get(v, c))).filter(|e| e.1 != 0).collect();
        self.reduce(v).is_empty().then_some(coeffs)
    }

    pub fn contains(&self, v: &[(usize, u32)]) -> bool {
        self.reduce(v).is_empty()
    }

    /// Adds `v`; returns false when it was already in the span.
    pub fn insert(&mut self, v: &[(usize, u32)]) -> bool {
        let r = self.reduce(v);
        let Some(&(c, lead)) = r.first() else { return false };
        let r = scale(&r, mod_inv(lead as u64, self.p as u64) as u32, self.p);
        for row in self.rows.values_mut() {
            let f = get(row, c);
            if f != 0 {
                *row = axpy(row, self.p - f, &r, self.p);
            }
        }
        self.rows.insert(c, r);
        true
    }

    pub fn sum(&self, other: &FpSubspace) -> FpSubspace {
        let mut out = self.clone();
        for r in other.basis() {
            out.insert(r);
        }
        out
    }

    pub fn is_subspace_of(&self, other: &FpSubspace) -> bool {
        self.basis().all(|r| other.contains(r))
    }
}
