//! The mod 2 Lambda algebra, a small complex computing
//! `Ext_{A_*}(F_2, F_2)` for the dual Steenrod algebra at p = 2.
//!
//! `λ_i` has bidegree `(s, t) = (1, i + 1)`. A word `λ_{i_1} ... λ_{i_s}` is
//! admissible when `2 i_k >= i_{k+1}`; admissible words form a basis. For
//! `n >= 0`
//!
//! ```text
//! λ_i λ_{2i+1+n} = Σ_{j>=0} C(n-j-1, j) λ_{i+n-j} λ_{2i+1+j}
//! d(λ_n)         = Σ_{j>=1} C(n-j, j) λ_{n-j} λ_{j-1}
//! ```
//!
//! and `d` is a derivation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::SparseVec;
use crate::scalar_linalg::Scalar;

fn binom2(n: i64, k: i64) -> bool {
    n >= 0 && k >= 0 && k <= n && (n & k) == k
}

#[derive(Default)]
pub struct Reducer {
    memo: HashMap<Vec<u32>, BTreeSet<Vec<u32>>>,
}

fn toggle(set: &mut BTreeSet<Vec<u32>>, w: Vec<u32>) {
    if !set.remove(&w) {
        set.insert(w);
    }
}

pub fn is_admissible(w: &[u32]) -> bool {
    w.windows(2).all(|p| 2 * p[0] >= p[1])
}

impl Reducer {
    /// Admissible expansion of a word, as a set (coefficients mod 2).
    pub fn reduce(&mut self, w: &[u32]) -> BTreeSet<Vec<u32>> {
        let Some(k) = w.windows(2).position(|p| p[1] > 2 * p[0]) else {
            return BTreeSet::from([w.to_vec()]);
        };
        if let Some(r) = self.memo.get(w) {
            return r.clone();
        }
        let i = w[k] as i64;
        let n = w[k + 1] as i64 - 2 * i - 1;
        let mut out = BTreeSet::new();
        let mut j = 0;
        while 2 * j < n {
            if binom2(n - j - 1, j) {
                let mut nw = w[..k].to_vec();
                nw.push((i + n - j) as u32);
                nw.push((2 * i + 1 + j) as u32);
                nw.extend_from_slice(&w[k + 2..]);
                for x in self.reduce(&nw) {
                    toggle(&mut out, x);
                }
            }
            j += 1;
        }
        self.memo.insert(w.to_vec(), out.clone());
        out
    }

    pub fn differential(&mut self, w: &[u32]) -> BTreeSet<Vec<u32>> {
        let mut out = BTreeSet::new();
        for (k, &a) in w.iter().enumerate() {
            let a = a as i64;
            let mut j = 1;
            while j <= a - j {
                if binom2(a - j, j) {
                    let mut nw = w[..k].to_vec();
                    nw.push((a - j) as u32);
                    nw.push((j - 1) as u32);
                    nw.extend_from_slice(&w[k + 1..]);
                    for x in self.reduce(&nw) {
                        toggle(&mut out, x);
                    }
                }
                j += 1;
            }
        }
        out
    }
}

pub fn render_word(w: &[u32]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter().map(|i| format!("λ{i}")).collect::<Vec<_>>().join(" ")
}

fn admissible_rec(prev: Option<u32>, left: u32, t: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if left == 0 {
        if t == 0 {
            out.push(acc.clone());
        }
        return;
    }
    if t < left {
        return;
    }
    let hi = (t - left).min(prev.map_or(u32::MAX, |p| 2 * p));
    for i in 0..=hi {
        acc.push(i);
        admissible_rec(Some(i), left - 1, t - i - 1, acc, out);
        acc.pop();
    }
}

/// Admissible words of length `s` and internal degree `t`.
pub fn admissible_words(s: u32, t: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    admissible_rec(None, s, t, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Debug)]
pub struct LambdaCell {
    pub basis: Vec<Vec<u32>>,
    pub(crate) index: HashMap<Vec<u32>, usize>,
    /// Columns of `d` into the cell `(s + 1, t)`.
    pub d: Vec<SparseVec>,
}

/// The Lambda algebra through `s <= s_max + 1`, `t <= t_max`.
#[derive(Clone, Debug)]
pub struct LambdaComplex {
    pub s_max: u32,
    pub t_max: u32,
    pub cells: BTreeMap<(u32, u32), LambdaCell>,
}

impl LambdaComplex {
    pub fn new(s_max: u32, t_max: u32, reversed: bool) -> LambdaComplex {
        let mut cells = BTreeMap::new();
        for s in 0..=s_max + 1 {
            for t in 0..=t_max {
                let mut basis = admissible_words(s, t);
                if reversed {
                    basis.reverse();
                }
                let index = basis.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
                cells.insert((s, t), LambdaCell { basis, index, d: Vec::new() });
            }
        }
        let mut red = Reducer::default();
        for s in 0..=s_max {
            for t in 0..=t_max {
                let cols: Vec<SparseVec> = cells[&(s, t)]
                    .basis
                    .iter()
                    .map(|w| {
                        let target = &cells[&(s + 1, t)];
                        let mut v: SparseVec =
                            red.differential(w).into_iter().map(|x| (target.index[&x], Scalar::Fp { p: 2, v: 1 })).collect();
                        v.sort_by_key(|e| e.0);
                        v
                    })
                    .collect();
                cells.get_mut(&(s, t)).unwrap().d = cols;
            }
        }
        LambdaComplex { s_max, t_max, cells }
    }

    /// Product of two cochains, expressed in the cell of the concatenation.
    pub fn multiply(&self, a: (u32, u32, &SparseVec), b: (u32, u32, &SparseVec)) -> Option<SparseVec> {
        let (ca, cb) = (self.cells.get(&(a.0, a.1))?, self.cells.get(&(b.0, b.1))?);
        let target = self.cells.get(&(a.0 + b.0, a.1 + b.1))?;
        let mut red = Reducer::default();
        let mut acc: BTreeSet<Vec<u32>> = BTreeSet::new();
        for (i, x) in a.2 {
            for (j, y) in b.2 {
                if x.is_zero() || y.is_zero() {
                    continue;
                }
                let mut w = ca.basis[*i].clone();
                w.extend_from_slice(&cb.basis[*j]);
                for r in red.reduce(&w) {
                    toggle(&mut acc, r);
                }
            }
        }
        let mut v: SparseVec = acc.into_iter().map(|w| (target.index[&w], Scalar::Fp { p: 2, v: 1 })).collect();
        v.sort_by_key(|e| e.0);
        Some(v)
    }
}
