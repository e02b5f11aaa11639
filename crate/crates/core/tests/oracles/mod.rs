//! Independent oracles shared by the test targets.
#![allow(dead_code)]

use std::collections::BTreeMap;

use novikov::comodules::{module_shape, Layer};
use novikov::scalar_linalg::ModuleShape;

/// Unreduced cobar complex of the dual Steenrod algebra at p = 2, written
/// from the Milnor coproduct `Δξ_n = Σ ξ_{n-i}^{2^i} ⊗ ξ_i`.
pub mod dense_cobar {
    use std::collections::{BTreeMap, HashMap};

    pub type Mono = Vec<u32>;

    fn xi_degree(i: usize) -> u32 {
        (1 << (i + 1)) - 1
    }

    pub fn monomials(d: u32) -> Vec<Mono> {
        fn rec(i: usize, left: u32, acc: &mut Mono, out: &mut Vec<Mono>) {
            if left == 0 {
                out.push(acc.clone());
                return;
            }
            if xi_degree(i) > left {
                return;
            }
            for e in 0..=left / xi_degree(i) {
                acc.push(e);
                rec(i + 1, left - e * xi_degree(i), acc, out);
                acc.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, d, &mut Vec::new(), &mut out);
        out.into_iter()
            .map(|mut m| {
                while m.last() == Some(&0) {
                    m.pop();
                }
                m
            })
            .collect()
    }

    fn mul(a: &Mono, b: &Mono) -> Mono {
        let n = a.len().max(b.len());
        let mut m: Mono = (0..n).map(|i| a.get(i).unwrap_or(&0) + b.get(i).unwrap_or(&0)).collect();
        while m.last() == Some(&0) {
            m.pop();
        }
        m
    }

    type Tensor = BTreeMap<(Mono, Mono), u8>;

    fn tensor_mul(x: &Tensor, y: &Tensor) -> Tensor {
        let mut out = Tensor::new();
        for ((a, b), _) in x {
            for ((c, d), _) in y {
                let k = (mul(a, c), mul(b, d));
                *out.entry(k).or_insert(0) ^= 1;
            }
        }
        out.retain(|_, v| *v == 1);
        out
    }

    pub fn coproduct(m: &Mono) -> Tensor {
        let mut acc = Tensor::from([((vec![], vec![]), 1)]);
        for (k, &e) in m.iter().enumerate() {
            let n = k + 1;
            let mut dx = Tensor::new();
            for i in 0..=n {
                let mut left = vec![0; n];
                if n - i > 0 {
                    left[n - i - 1] = 1 << i;
                }
                let mut right = vec![0; n];
                if i > 0 {
                    right[i - 1] = 1;
                }
                dx.insert((mul(&left, &vec![]), mul(&right, &vec![])), 1);
            }
            for _ in 0..e {
                acc = tensor_mul(&acc, &dx);
            }
        }
        acc
    }

    /// Basis of `A^{⊗s}` in total degree `t`.
    pub fn basis(s: usize, t: u32) -> Vec<Vec<Mono>> {
        if s == 0 {
            return if t == 0 { vec![vec![]] } else { vec![] };
        }
        let mut out = Vec::new();
        for d in 0..=t {
            for m in monomials(d) {
                for rest in basis(s - 1, t - d) {
                    let mut v = vec![m.clone()];
                    v.extend(rest);
                    out.push(v);
                }
            }
        }
        out
    }

    fn degree(m: &Mono) -> u32 {
        m.iter().enumerate().map(|(i, e)| e * xi_degree(i)).sum()
    }

    /// Columns of `d: C^s -> C^{s+1}` as index sets over F_2.
    pub fn differential(s: usize, t: u32) -> (usize, usize, Vec<Vec<usize>>) {
        let src = basis(s, t);
        let tgt = basis(s + 1, t);
        let index: HashMap<Vec<Mono>, usize> = tgt.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
        let cols = src
            .iter()
            .map(|b| {
                let mut acc: BTreeMap<usize, u8> = BTreeMap::new();
                let mut toggle = |v: Vec<Mono>| *acc.entry(index[&v]).or_insert(0) ^= 1;
                let mut first = vec![vec![]];
                first.extend(b.iter().cloned());
                toggle(first);
                for i in 0..s {
                    for ((x, y), _) in coproduct(&b[i]) {
                        let mut v = b[..i].to_vec();
                        v.push(x);
                        v.push(y);
                        v.extend(b[i + 1..].iter().cloned());
                        toggle(v);
                    }
                }
                let mut last = b.clone();
                last.push(vec![]);
                toggle(last);
                acc.into_iter().filter(|e| e.1 == 1).map(|e| e.0).collect()
            })
            .collect();
        let _ = degree;
        (src.len(), tgt.len(), cols)
    }

    pub fn rank(cols: &[Vec<usize>]) -> usize {
        let mut pivots: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut r = 0;
        for c in cols {
            let mut v: std::collections::BTreeSet<usize> = c.iter().copied().collect();
            while let Some(&lead) = v.iter().next() {
                match pivots.get(&lead) {
                    Some(p) => {
                        for x in p {
                            if !v.remove(x) {
                                v.insert(*x);
                            }
                        }
                    }
                    None => {
                        pivots.insert(lead, v.iter().copied().collect());
                        r += 1;
                        break;
                    }
                }
            }
        }
        r
    }

    pub fn ext_dim(s: usize, t: u32) -> usize {
        let (n, _, out) = differential(s, t);
        let rank_in = if s == 0 { 0 } else { rank(&differential(s - 1, t).2) };
        n - rank(&out) - rank_in
    }
}

// 2-adic valuation of q^w - 1 by big-integer arithmetic
pub fn nu2(q: u64, w: u32) -> u32 {
    let x: num_bigint::BigInt = num_bigint::BigInt::from(q).pow(w) - 1;
    x.trailing_zeros().unwrap() as u32
}

// Brute-force enumeration of π_{*,*}BPGL^∧_2 over ℝ from its presentation:
// Z_2[ρ, v_0, τ^2 v_0, τ^4 v_0, ..., v_1, τ^4 v_1, ..., v_2, τ^8 v_2, ...]
// with v_0 = 2, ρ^{2^{i+1}-1} v_i = 0, and τ-multiples multiplying as if τ
// were an element. A monomial ρ^a τ^m 2^k v^α (α over v_1, v_2, ...) lies
// in the ring when m = 0 or some factor v_i with 2^{i+1} | m carries the
// τ-power; it vanishes when a > 0 and k > 0, or when a >= 2^{i+1} - 1 for
// the lowest v_i present.
pub fn enumerate_real(chow: u32, max_a: i32) -> BTreeMap<(i32, i32), ModuleShape> {
    let vdeg = |i: u32| (2 * ((1i32 << i) - 1), (1i32 << i) - 1);
    let mut out: BTreeMap<(i32, i32), ModuleShape> = BTreeMap::new();
    // α as exponents of v1, v2, v3, v4
    let mut alphas: Vec<[u32; 4]> = Vec::new();
    for e1 in 0..16 {
        for e2 in 0..6 {
            for e3 in 0..3 {
                for e4 in 0..2 {
                    let d = e1 * 2 + e2 * 6 + e3 * 14 + e4 * 30;
                    if d as i32 <= max_a + 8 {
                        alphas.push([e1, e2, e3, e4]);
                    }
                }
            }
        }
    }
    for a in 0..=chow {
        if (chow - a) % 2 != 0 {
            continue;
        }
        let m = (chow - a) / 2;
        for alpha in &alphas {
            let lowest = alpha.iter().position(|&e| e > 0).map(|i| i as u32 + 1);
            let carried = |i: u32| m % (1 << (i + 1)) == 0;
            let (deg_a, deg_b) = alpha.iter().enumerate().fold((0, 0), |acc, (i, &e)| {
                let (x, y) = vdeg(i as u32 + 1);
                (acc.0 + e as i32 * x, acc.1 + e as i32 * y)
            });
            let bideg = (deg_a - a as i32, deg_b - a as i32 - m as i32);
            if bideg.0 > max_a {
                continue;
            }
            let slot = if a == 0 {
                // smallest power of 2 making the monomial exist
                let exists = m == 0 || lowest.is_some_and(carried) || m % 2 == 0;
                exists.then_some(None)
            } else {
                let in_ring = m == 0 || lowest.is_some_and(carried);
                let nonzero = lowest.is_none_or(|i| (a as i32) < (1 << (i + 1)) - 1);
                (in_ring && nonzero).then_some(Some(1))
            };
            if let Some(kind) = slot {
                let e = out.entry(bideg).or_default();
                match kind {
                    None => e.free_rank += 1,
                    Some(k) => e.torsion.push(k),
                }
            }
        }
    }
    out.retain(|_, s| !s.is_zero());
    out
}

/// Summed module shapes of a layer by motivic bidegree, for `t <= t_max` and
/// first degree at most `max_a`.
pub fn layer_shapes(layer: &Layer, t_max: u32, max_a: i32) -> BTreeMap<(i32, i32), ModuleShape> {
    let mut got: BTreeMap<(i32, i32), ModuleShape> = BTreeMap::new();
    for c in &layer.summands {
        for t in (0..=t_max).step_by(2) {
            let (a, b) = c.motivic_degree(t);
            if a > max_a {
                continue;
            }
            let s = module_shape(c, t);
            let e = got.entry((a, b)).or_default();
            e.free_rank += s.free_rank;
            e.torsion.extend(s.torsion);
        }
    }
    for s in got.values_mut() {
        s.torsion.sort_unstable();
    }
    got.retain(|_, s| !s.is_zero());
    got
}
