//! Minimal resolutions of `F_p` over algebras with a Milnor basis `P(R)`.
//!
//! This is an oracle: it works on the dual side (the algebra, not the
//! coalgebra) and shares no code with the cobar or Lambda complexes. It covers
//! the dual of `P = F_p[t_1, t_2, ...]` at any prime and the mod 2 Steenrod
//! algebra.
//!
//! Milnor's product formula: `P(R) P(S) = Σ_X b(X) P(T(X))` over matrices
//! `X = (x_ij)` with `Σ_j p^j x_ij = r_i` and `Σ_i x_ij = s_j`, where
//! `T_n = Σ_{i+j=n} x_ij` and `b(X) = Π_n (x_n0, x_{n-1,1}, ..., x_0n)!`
//! (multinomial, mod p).

use std::collections::{BTreeMap, HashMap};

use crate::scalar_linalg::fp::{self, FpRow, FpSubspace};

pub struct MilnorAlgebra {
    pub p: u32,
    /// Degree of `P(0, ..., 0, 1)` with the 1 in slot i.
    pub xi_degrees: Vec<u32>,
    pub t_max: u32,
    by_degree: Vec<Vec<Vec<u32>>>,
    products: std::cell::RefCell<HashMap<(Vec<u32>, Vec<u32>), Vec<(Vec<u32>, u32)>>>,
}

fn binom_mod(n: u32, k: u32, p: u32) -> u32 {
    // Lucas
    let (mut n, mut k) = (n, k);
    let mut out: u64 = 1;
    while n > 0 || k > 0 {
        let (a, b) = (n % p, k % p);
        if b > a {
            return 0;
        }
        let mut c: u64 = 1;
        for i in 0..b {
            c = c * (a - i) as u64 / (i + 1) as u64;
        }
        out = out * (c % p as u64) % p as u64;
        n /= p;
        k /= p;
    }
    out as u32
}

fn multinomial_mod(parts: &[u32], p: u32) -> u32 {
    let mut total = 0;
    let mut out: u64 = 1;
    for &a in parts {
        total += a;
        out = out * binom_mod(total, a, p) as u64 % p as u64;
        if out == 0 {
            return 0;
        }
    }
    out as u32
}

fn trim(mut v: Vec<u32>) -> Vec<u32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

impl MilnorAlgebra {
    pub fn new(p: u32, xi_degrees: Vec<u32>, t_max: u32) -> MilnorAlgebra {
        let mut by_degree = vec![Vec::new(); t_max as usize + 1];
        let mut acc = Vec::new();
        Self::enumerate(&xi_degrees, 0, 0, t_max, &mut acc, &mut by_degree);
        for v in &mut by_degree {
            v.sort();
        }
        MilnorAlgebra { p, xi_degrees, t_max, by_degree, products: Default::default() }
    }

    fn enumerate(degs: &[u32], i: usize, d: u32, t_max: u32, acc: &mut Vec<u32>, out: &mut [Vec<Vec<u32>>]) {
        if i == degs.len() || degs[i] > t_max - d {
            out[d as usize].push(trim(acc.clone()));
            return;
        }
        let mut r = 0;
        while d + r * degs[i] <= t_max {
            acc.push(r);
            Self::enumerate(degs, i + 1, d + r * degs[i], t_max, acc, out);
            acc.pop();
            r += 1;
        }
    }

    /// The mod 2 Steenrod algebra, `|Sq(R)| = Σ r_i (2^i - 1)`.
    pub fn steenrod2(t_max: u32) -> MilnorAlgebra {
        let degs = (1..).map(|i| (1u32 << i) - 1).take_while(|d| *d <= t_max.max(1)).collect();
        MilnorAlgebra::new(2, degs, t_max)
    }

    /// The dual of `F_p[t_1, t_2, ...]`, `|t_i| = 2(p^i - 1)`.
    pub fn quotient_p(p: u32, t_max: u32) -> MilnorAlgebra {
        let degs = (1..).map(|i| 2 * (p.pow(i) - 1)).take_while(|d| *d <= t_max.max(2)).collect();
        MilnorAlgebra::new(p, degs, t_max)
    }

    pub fn basis(&self, t: u32) -> &[Vec<u32>] {
        &self.by_degree[t as usize]
    }

    pub fn degree(&self, r: &[u32]) -> u32 {
        r.iter().zip(&self.xi_degrees).map(|(a, d)| a * d).sum()
    }

    pub fn multiply(&self, r: &[u32], s: &[u32]) -> Vec<(Vec<u32>, u32)> {
        let key = (r.to_vec(), s.to_vec());
        if let Some(v) = self.products.borrow().get(&key) {
            return v.clone();
        }
        let (lr, ls) = (r.len(), s.len());
        let mut x = vec![vec![0u32; ls + 1]; lr + 1];
        let mut acc: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
        self.matrices(r, s, 1, 1, &mut x, &mut acc);
        let out: Vec<(Vec<u32>, u32)> = acc.into_iter().filter(|(_, c)| *c != 0).collect();
        self.products.borrow_mut().insert(key, out.clone());
        out
    }

    fn matrices(&self, r: &[u32], s: &[u32], i: usize, j: usize, x: &mut Vec<Vec<u32>>, acc: &mut BTreeMap<Vec<u32>, u32>) {
        let (lr, ls) = (r.len(), s.len());
        let p = self.p;
        if i > lr {
            // fill the zeroth row and column
            for i in 1..=lr {
                let used: u32 = (1..=ls).map(|j| p.pow(j as u32) * x[i][j]).sum();
                x[i][0] = r[i - 1] - used;
            }
            for j in 1..=ls {
                let used: u32 = (1..=lr).map(|i| x[i][j]).sum();
                x[0][j] = s[j - 1] - used;
            }
            let mut t = Vec::new();
            let mut coeff: u64 = 1;
            for n in 1..=lr + ls {
                let parts: Vec<u32> =
                    (0..=n).filter(|&a| a <= lr && n - a <= ls).map(|a| x[a][n - a]).collect();
                t.push(parts.iter().sum());
                coeff = coeff * multinomial_mod(&parts, p) as u64 % p as u64;
                if coeff == 0 {
                    return;
                }
            }
            let e = acc.entry(trim(t)).or_insert(0);
            *e = ((*e as u64 + coeff) % p as u64) as u32;
            return;
        }
        if j > ls {
            return self.matrices(r, s, i + 1, 1, x, acc);
        }
        let row_used: u32 = (1..j).map(|c| p.pow(c as u32) * x[i][c]).sum();
        let col_used: u32 = (1..i).map(|a| x[a][j]).sum();
        let pj = p.pow(j as u32);
        let hi = ((r[i - 1] - row_used) / pj).min(s[j - 1] - col_used);
        for v in 0..=hi {
            x[i][j] = v;
            self.matrices(r, s, i, j + 1, x, acc);
        }
        x[i][j] = 0;
    }
}

type Elem = Vec<((usize, Vec<u32>), u32)>;

/// Dimensions of `Ext^{s,t}_A(F_p, F_p)` for `s <= s_max`, `t <= t_max`,
/// read off a minimal resolution.
pub fn minimal_resolution_ext(alg: &MilnorAlgebra, s_max: u32, t_max: u32) -> BTreeMap<(u32, u32), usize> {
    assert!(t_max <= alg.t_max);
    let p = alg.p;
    // gens[s]: degrees; dgen[s][g]: image of generator g in F_{s-1}
    let mut gens: Vec<Vec<u32>> = vec![Vec::new(); s_max as usize + 1];
    let mut dgen: Vec<Vec<Elem>> = vec![Vec::new(); s_max as usize + 1];
    let mut out = BTreeMap::new();
    let basis_of = |gens: &[u32], t: u32| -> Vec<(usize, Vec<u32>)> {
        let mut b = Vec::new();
        for (g, &d) in gens.iter().enumerate() {
            if d <= t {
                b.extend(alg.basis(t - d).iter().map(|r| (g, r.clone())));
            }
        }
        b
    };
    let act = |r: &[u32], e: &Elem| -> BTreeMap<(usize, Vec<u32>), u32> {
        let mut acc: BTreeMap<(usize, Vec<u32>), u32> = BTreeMap::new();
        for ((g, s), c) in e {
            for (t, k) in alg.multiply(r, s) {
                let x = acc.entry((*g, t)).or_insert(0);
                *x = ((*x as u64 + *c as u64 * k as u64) % p as u64) as u32;
            }
        }
        acc.retain(|_, c| *c != 0);
        acc
    };
    for t in 0..=t_max {
        for s in 0..=s_max as usize {
            if s == 0 {
                if t == 0 {
                    gens[0].push(0);
                    dgen[0].push(Vec::new());
                }
                out.insert((0, t), if t == 0 { 1 } else { 0 });
                continue;
            }
            let src = basis_of(&gens[s - 1], t);
            let src_index: HashMap<(usize, Vec<u32>), usize> = src.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
            let kernel: Vec<FpRow> = if s == 1 {
                if t == 0 {
                    Vec::new()
                } else {
                    (0..src.len()).map(|i| vec![(i, 1)]).collect()
                }
            } else {
                let tgt = basis_of(&gens[s - 2], t);
                let tgt_index: HashMap<(usize, Vec<u32>), usize> =
                    tgt.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
                let mut rows: Vec<FpRow> = vec![Vec::new(); tgt.len()];
                for (j, (g, r)) in src.iter().enumerate() {
                    for (key, c) in act(r, &dgen[s - 1][*g]) {
                        rows[tgt_index[&key]].push((j, c));
                    }
                }
                fp::kernel(p, src.len(), rows)
            };
            let mut image = FpSubspace::new(p);
            for (g, &d) in gens[s].iter().enumerate() {
                if d < t {
                    for r in alg.basis(t - d) {
                        let mut v: FpRow = act(r, &dgen[s][g]).into_iter().map(|(k, c)| (src_index[&k], c)).collect();
                        v.sort_unstable();
                        image.insert(&v);
                    }
                }
            }
            let mut count = 0;
            for k in kernel {
                if image.insert(&k) {
                    gens[s].push(t);
                    dgen[s].push(k.iter().map(|&(i, c)| (src[i].clone(), c)).collect());
                    count += 1;
                }
            }
            out.insert((s as u32, t), count);
        }
    }
    out
}
