//! Coefficient-generic sparse polynomial kernels shared by [`MonomialPoly`]
//! and the cobar builder.
//!
//! [`MonomialPoly`]: super::MonomialPoly

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Alphabet, Monomial};
use crate::scalar_linalg::Scalar;

pub trait Coeff: Clone + PartialEq + std::fmt::Debug + Send + Sync {
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Coeff for Scalar {
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
}

impl Coeff for BigInt {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// Terms sorted by the structural order of [`Monomial`], no zero
/// coefficients.
pub type Terms<C> = Vec<(Monomial, C)>;

pub fn normalize<C: Coeff>(acc: HashMap<Monomial, C>) -> Terms<C> {
    let mut v: Terms<C> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

fn accumulate<C: Coeff>(acc: &mut HashMap<Monomial, C>, m: Monomial, c: C) {
    match acc.get_mut(&m) {
        Some(x) => *x = x.add(&c),
        None => {
            acc.insert(m, c);
        }
    }
}

pub fn add<C: Coeff>(a: &Terms<C>, b: &Terms<C>) -> Terms<C> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push(b[j].clone());
            j += 1;
        } else {
            let c = a[i].1.add(&b[j].1);
            if !c.is_zero() {
                out.push((a[i].0.clone(), c));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn scale<C: Coeff>(a: &Terms<C>, c: &C) -> Terms<C> {
    a.iter().map(|(m, x)| (m.clone(), x.mul(c))).filter(|(_, x)| !x.is_zero()).collect()
}

pub fn neg<C: Coeff>(a: &Terms<C>) -> Terms<C> {
    a.iter().map(|(m, x)| (m.clone(), x.neg())).collect()
}

/// Product truncated at `cap`, with Koszul signs for exterior generators.
pub fn mul<C: Coeff>(a: &Terms<C>, b: &Terms<C>, alph: &Alphabet, cap: u32) -> Terms<C> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let db: Vec<u32> = b.iter().map(|(m, _)| m.degree(alph)).collect();
    let mut acc = HashMap::with_capacity(a.len() * b.len() / 2 + 1);
    for (ma, ca) in a {
        let da = ma.degree(alph);
        if da > cap {
            continue;
        }
        for ((mb, cb), &d) in b.iter().zip(&db) {
            if da + d > cap {
                continue;
            }
            if let Some((m, neg)) = ma.mul(mb, alph) {
                let c = ca.mul(cb);
                accumulate(&mut acc, m, if neg { c.neg() } else { c });
            }
        }
    }
    normalize(acc)
}

pub fn pow<C: Coeff>(a: &Terms<C>, e: u32, one: &C, alph: &Alphabet, cap: u32) -> Terms<C> {
    let mut result: Terms<C> = vec![(Monomial::one(), one.clone())];
    let mut base = a.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = mul(&result, &base, alph, cap);
        }
        e >>= 1;
        if e > 0 {
            base = mul(&base, &base, alph, cap);
        }
    }
    result
}

/// Applies the ring map sending source generator `g` to `images[g]`.
/// Source generators without an image must not occur in `src`.
pub struct Substitution<'a, C: Coeff> {
    pub images: &'a [Option<Terms<C>>],
    pub target: &'a Alphabet,
    pub cap: u32,
    pub one: C,
    powers: HashMap<(u32, u32), Terms<C>>,
}

impl<'a, C: Coeff> Substitution<'a, C> {
    pub fn new(images: &'a [Option<Terms<C>>], target: &'a Alphabet, cap: u32, one: C) -> Self {
        Substitution { images, target, cap, one, powers: HashMap::new() }
    }

    fn power(&mut self, g: u32, e: u32) -> &Terms<C> {
        if !self.powers.contains_key(&(g, e)) {
            let img = self.images[g as usize].as_ref().expect("substitution image missing");
            let v = if e == 1 {
                img.clone()
            } else {
                let prev = self.power(g, e - 1).clone();
                mul(&prev, img, self.target, self.cap)
            };
            self.powers.insert((g, e), v);
        }
        &self.powers[&(g, e)]
    }

    pub fn monomial(&mut self, m: &Monomial) -> Terms<C> {
        let mut acc: Terms<C> = vec![(Monomial::one(), self.one.clone())];
        for &(g, e) in m.factors() {
            let p = self.power(g, e).clone();
            acc = mul(&acc, &p, self.target, self.cap);
            if acc.is_empty() {
                break;
            }
        }
        acc
    }

    pub fn apply(&mut self, src: &[(Monomial, C)]) -> Terms<C> {
        let mut acc = HashMap::new();
        for (m, c) in src {
            for (tm, tc) in self.monomial(m) {
                accumulate(&mut acc, tm, tc.mul(c));
            }
        }
        normalize(acc)
    }
}
