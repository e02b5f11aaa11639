//! Smith normal form over discrete valuation rings.
//!
//! Two coefficient models share one elimination routine: exact p-local
//! fractions ([`ZpLocal`]) and residues modulo p^N ([`ModPn`]). The latter is
//! used for filtration lattices, which always contain p^N times the ambient
//! module, so nothing is lost by working modulo p^N there.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::scalar::{int_valuation, mod_inv};

pub trait LocalRing {
    type E: Clone + PartialEq + std::fmt::Debug;
    fn prime(&self) -> u32;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    /// `None` for zero.
    fn valuation(&self, a: &Self::E) -> Option<u32>;
    /// Some `x` with `x * b = a`; requires `valuation(a) >= valuation(b)`.
    fn div(&self, a: &Self::E, b: &Self::E) -> Self::E;
    /// Inverse of a unit.
    fn unit_inverse(&self, a: &Self::E) -> Self::E;
    fn p_power(&self, e: u32) -> Self::E;
    /// `Some(N)` when computing modulo p^N.
    fn truncation(&self) -> Option<u32>;
}

#[derive(Clone, Copy, Debug)]
pub struct ZpLocal {
    pub p: u32,
}

impl LocalRing for ZpLocal {
    type E = BigRational;
    fn prime(&self) -> u32 {
        self.p
    }
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn valuation(&self, a: &BigRational) -> Option<u32> {
        (!a.is_zero()).then(|| int_valuation(a.numer(), self.p))
    }
    fn div(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a / b
    }
    fn unit_inverse(&self, a: &BigRational) -> BigRational {
        a.recip()
    }
    fn p_power(&self, e: u32) -> BigRational {
        BigRational::from_integer(BigInt::from(self.p).pow(e))
    }
    fn truncation(&self) -> Option<u32> {
        None
    }
}

/// Residues modulo p^n with p^n < 2^63.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModPn {
    pub p: u32,
    pub n: u32,
    pub modulus: u64,
}

impl ModPn {
    pub fn new(p: u32, n: u32) -> ModPn {
        let modulus = (p as u64).checked_pow(n).filter(|m| *m < (1u64 << 62)).expect("p^n exceeds 62 bits");
        ModPn { p, n, modulus }
    }

    /// Largest exponent with p^n below 2^62.
    pub fn max_exponent(p: u32) -> u32 {
        let mut n = 0;
        let mut m: u64 = 1;
        while let Some(x) = m.checked_mul(p as u64).filter(|x| *x < (1u64 << 62)) {
            m = x;
            n += 1;
        }
        n
    }

    pub fn reduce_i128(&self, x: i128) -> u64 {
        x.rem_euclid(self.modulus as i128) as u64
    }

    pub fn from_rational(&self, q: &BigRational) -> u64 {
        let m = BigInt::from(self.modulus);
        let num = q.numer() % &m;
        let den = q.denom() % &m;
        let num: i128 = num.try_into().unwrap();
        let den: i128 = den.try_into().unwrap();
        let num = self.reduce_i128(num);
        let den = self.reduce_i128(den);
        let inv = mod_inv(den, self.modulus);
        self.mul(&num, &inv)
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }
}

impl LocalRing for ModPn {
    type E = u64;
    fn prime(&self) -> u32 {
        self.p
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.modulus
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.modulus as u128) as u64
    }
    fn valuation(&self, a: &u64) -> Option<u32> {
        if *a == 0 {
            return None;
        }
        let mut v = 0;
        let mut x = *a;
        while x % self.p as u64 == 0 {
            x /= self.p as u64;
            v += 1;
        }
        Some(v)
    }
    fn div(&self, a: &u64, b: &u64) -> u64 {
        let e = self.valuation(b).expect("division by zero");
        let pe = (self.p as u64).pow(e);
        let unit = b / pe;
        self.mul(&(a / pe), &mod_inv(unit % self.modulus, self.modulus))
    }
    fn unit_inverse(&self, a: &u64) -> u64 {
        mod_inv(*a, self.modulus)
    }
    fn p_power(&self, e: u32) -> u64 {
        if e >= self.n {
            0
        } else {
            (self.p as u64).pow(e)
        }
    }
    fn truncation(&self) -> Option<u32> {
        Some(self.n)
    }
}

pub type Dense<E> = Vec<Vec<E>>;

/// Result of a Smith reduction `U * A * V = D`.
///
/// `vals[k]` is the valuation of the k-th diagonal entry (the entry itself is
/// exactly `p^vals[k]`). Transforms are present only when requested.
#[derive(Clone, Debug)]
pub struct LocalSnf<E> {
    pub rows: usize,
    pub cols: usize,
    pub vals: Vec<u32>,
    pub u: Option<Dense<E>>,
    pub u_inv: Option<Dense<E>>,
    pub v: Option<Dense<E>>,
    pub v_inv: Option<Dense<E>>,
}

impl<E> LocalSnf<E> {
    pub fn rank(&self) -> usize {
        self.vals.len()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Track {
    pub u: bool,
    pub u_inv: bool,
    pub v: bool,
    pub v_inv: bool,
}

impl Track {
    pub const NONE: Track = Track { u: false, u_inv: false, v: false, v_inv: false };
    pub const ALL: Track = Track { u: true, u_inv: true, v: true, v_inv: true };
}

fn identity<R: LocalRing>(r: &R, n: usize) -> Dense<R::E> {
    (0..n).map(|i| (0..n).map(|j| if i == j { r.one() } else { r.zero() }).collect()).collect()
}

/// Smith normal form of an `rows x cols` dense matrix.
///
/// Pivot choice: minimal valuation, then leftmost column, then lowest row.
/// Choosing a global minimum keeps the diagonal in divisibility order.
pub fn local_snf<R: LocalRing>(r: &R, mut a: Dense<R::E>, rows: usize, cols: usize, track: Track) -> LocalSnf<R::E> {
    let mut u = track.u.then(|| identity(r, rows));
    let mut u_inv = track.u_inv.then(|| identity(r, rows));
    let mut v = track.v.then(|| identity(r, cols));
    let mut v_inv = track.v_inv.then(|| identity(r, cols));
    let mut vals = Vec::new();
    let kmax = rows.min(cols);
    for k in 0..kmax {
        let mut best: Option<(u32, usize, usize)> = None;
        for j in k..cols {
            for (i, row) in a.iter().enumerate().skip(k) {
                if let Some(val) = r.valuation(&row[j]) {
                    if best.is_none_or(|b| val < b.0) {
                        best = Some((val, j, i));
                        if val == 0 {
                            break;
                        }
                    }
                }
            }
            if best.is_some_and(|b| b.0 == 0) {
                break;
            }
        }
        let Some((val, pj, pi)) = best else { break };
        if pi != k {
            a.swap(pi, k);
            if let Some(u) = u.as_mut() {
                u.swap(pi, k);
            }
            if let Some(ui) = u_inv.as_mut() {
                for row in ui.iter_mut() {
                    row.swap(pi, k);
                }
            }
        }
        if pj != k {
            for row in a.iter_mut() {
                row.swap(pj, k);
            }
            if let Some(v) = v.as_mut() {
                for row in v.iter_mut() {
                    row.swap(pj, k);
                }
            }
            if let Some(vi) = v_inv.as_mut() {
                vi.swap(pj, k);
            }
        }
        // normalize the pivot to p^val by scaling row k
        let pv = r.p_power(val);
        let unit = r.div(&a[k][k], &pv);
        let unit_inv = r.unit_inverse(&unit);
        if unit_inv != r.one() {
            for x in a[k].iter_mut() {
                *x = r.mul(x, &unit_inv);
            }
            if let Some(u) = u.as_mut() {
                for x in u[k].iter_mut() {
                    *x = r.mul(x, &unit_inv);
                }
            }
            if let Some(ui) = u_inv.as_mut() {
                for row in ui.iter_mut() {
                    row[k] = r.mul(&row[k], &unit);
                }
            }
        }
        let pivot = a[k][k].clone();
        // clear column k below the pivot
        for i in k + 1..rows {
            if r.is_zero(&a[i][k]) {
                continue;
            }
            let f = r.div(&a[i][k], &pivot);
            let (top, bottom) = a.split_at_mut(i);
            let prow = &top[k];
            for (x, y) in bottom[0].iter_mut().zip(prow.iter()).skip(k) {
                *x = r.sub(x, &r.mul(&f, y));
            }
            if let Some(u) = u.as_mut() {
                let (top, bottom) = u.split_at_mut(i);
                for (x, y) in bottom[0].iter_mut().zip(top[k].iter()) {
                    *x = r.sub(x, &r.mul(&f, y));
                }
            }
            if let Some(ui) = u_inv.as_mut() {
                for row in ui.iter_mut() {
                    row[k] = r.add(&row[k], &r.mul(&f, &row[i]));
                }
            }
        }
        // clear row k right of the pivot; column k is now zero below the pivot
        for j in k + 1..cols {
            if r.is_zero(&a[k][j]) {
                continue;
            }
            let f = r.div(&a[k][j], &pivot);
            a[k][j] = r.zero();
            if let Some(v) = v.as_mut() {
                for row in v.iter_mut() {
                    let t = r.mul(&f, &row[k]);
                    row[j] = r.sub(&row[j], &t);
                }
            }
            if let Some(vi) = v_inv.as_mut() {
                let (top, bottom) = vi.split_at_mut(j);
                for (x, y) in top[k].iter_mut().zip(bottom[0].iter()) {
                    *x = r.add(x, &r.mul(&f, y));
                }
            }
        }
        vals.push(val);
    }
    LocalSnf { rows, cols, vals, u, u_inv, v, v_inv }
}

pub fn mat_vec<R: LocalRing>(r: &R, m: &Dense<R::E>, x: &[R::E]) -> Vec<R::E> {
    m.iter()
        .map(|row| row.iter().zip(x).fold(r.zero(), |acc, (a, b)| if r.is_zero(a) || r.is_zero(b) { acc } else { r.add(&acc, &r.mul(a, b)) }))
        .collect()
}

pub fn mat_mul<R: LocalRing>(r: &R, a: &Dense<R::E>, b: &Dense<R::E>, inner: usize, cols: usize) -> Dense<R::E> {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(r.zero(), |acc, k| {
                        if r.is_zero(&row[k]) || r.is_zero(&b[k][j]) {
                            acc
                        } else {
                            r.add(&acc, &r.mul(&row[k], &b[k][j]))
                        }
                    })
                })
                .collect()
        })
        .collect()
}
