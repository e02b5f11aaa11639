//! Coface maps `δ^i: Γ^{⊗s} -> Γ^{⊗(s+1)}` as ring substitutions.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;

use super::HopfAlgebroidData;
use crate::graded_poly::terms::{Coeff, Substitution, Terms};
use crate::graded_poly::{Alphabet, Monomial};
use crate::scalar_linalg::{Scalar, ScalarRing};

/// Integer value of an integral Z_(p) (or Q) scalar.
pub fn scalar_to_int(s: &Scalar) -> Option<BigInt> {
    match s {
        Scalar::Fp { v, .. } => Some(BigInt::from(*v)),
        Scalar::Zp { q, .. } | Scalar::Q(q) => q.is_integer().then(|| q.numer().clone()),
    }
}

/// Marker for coefficient conversions used by [`FaceMaps`].
pub trait IntCoeffs: Coeff {
    fn from_scalar(s: &Scalar) -> Self;
    fn one_like(s: &Scalar) -> Self;
    fn to_scalar(&self, ring: ScalarRing) -> Scalar;
}

impl IntCoeffs for BigInt {
    fn from_scalar(s: &Scalar) -> Self {
        scalar_to_int(s).expect("structure maps are integral")
    }
    fn one_like(_: &Scalar) -> Self {
        BigInt::one()
    }
    fn to_scalar(&self, ring: ScalarRing) -> Scalar {
        Scalar::from_bigint(ring, self.clone())
    }
}

impl IntCoeffs for Scalar {
    fn from_scalar(s: &Scalar) -> Self {
        s.clone()
    }
    fn one_like(s: &Scalar) -> Self {
        Scalar::one(s.ring())
    }
    fn to_scalar(&self, _: ScalarRing) -> Scalar {
        self.clone()
    }
}

/// Everything needed to apply cofaces up to cobar degree `s_max`.
pub struct FaceMaps<C: Coeff> {
    pub nb: usize,
    pub nh: usize,
    pub cap: u32,
    pub one: C,
    /// `alphabets[k]` is the k-fold tensor alphabet, `k <= s_max + 1`.
    pub alphabets: Vec<Arc<Alphabet>>,
    pub eta_r: Vec<Terms<C>>,
    pub delta: Vec<Terms<C>>,
    /// `rho[k][v]`: the base generator `v` moved across `k` tensor factors,
    /// i.e. `1 ⊗ ... ⊗ 1 ⊗ v` expressed with left coefficients, in `B_k`.
    pub rho: Vec<Vec<Terms<C>>>,
    /// `delta_at[i][j]`: `Δ(x_j)` placed on factors `i, i+1`, in `B_{i+1}`.
    pub delta_at: Vec<Vec<Terms<C>>>,
}

impl<C: IntCoeffs> FaceMaps<C> {
    pub fn new(h: &HopfAlgebroidData, s_max: usize) -> FaceMaps<C> {
        let one = C::one_like(&Scalar::one(h.ring));
        let conv = |t: &[(Monomial, Scalar)]| -> Terms<C> {
            t.iter().map(|(m, c)| (m.clone(), C::from_scalar(c))).filter(|(_, c)| !c.is_zero()).collect()
        };
        let (nb, nh, cap) = (h.nb(), h.nh(), h.cap);
        let alphabets: Vec<Arc<Alphabet>> = (0..=s_max + 1).map(|k| h.tensor_alphabet(k)).collect();
        let eta_r: Vec<Terms<C>> = h.eta_r.iter().map(|x| conv(x.terms())).collect();
        let delta: Vec<Terms<C>> = h.delta.iter().map(|x| conv(x.terms())).collect();
        let gen = |c: usize, j: usize| nb + (c - 1) * nh + j;
        let unit = |g: usize| -> Terms<C> { vec![(Monomial::gen(g), one.clone())] };

        let mut rho: Vec<Vec<Terms<C>>> = vec![(0..nb).map(unit).collect()];
        for k in 1..=s_max.max(1) {
            let mut images: Vec<Option<Terms<C>>> = rho[k - 1].iter().cloned().map(Some).collect();
            images.extend((0..nh).map(|j| Some(unit(gen(k, j)))));
            let mut sub = Substitution::new(&images, &alphabets[k], cap, one.clone());
            let row = eta_r.iter().map(|x| sub.apply(x)).collect();
            rho.push(row);
        }

        let mut delta_at: Vec<Vec<Terms<C>>> = vec![Vec::new()];
        for i in 1..=s_max.max(2) {
            if i + 1 >= alphabets.len() {
                break;
            }
            let mut images: Vec<Option<Terms<C>>> = rho[i - 1].iter().cloned().map(Some).collect();
            images.extend((0..nh).map(|j| Some(unit(gen(i, j)))));
            images.extend((0..nh).map(|j| Some(unit(gen(i + 1, j)))));
            let mut sub = Substitution::new(&images, &alphabets[i + 1], cap, one.clone());
            delta_at.push(delta.iter().map(|x| sub.apply(x)).collect());
        }
        FaceMaps { nb, nh, cap, one, alphabets, eta_r, delta, rho, delta_at }
    }
}

impl<C: Coeff> FaceMaps<C> {
    pub fn gen_index(&self, copy: usize, j: usize) -> usize {
        self.nb + (copy - 1) * self.nh + j
    }

    fn unit(&self, g: usize) -> Terms<C> {
        vec![(Monomial::gen(g), self.one.clone())]
    }

    /// Images of the generators of `B_s` under `δ^i: B_s -> B_{s+1}`.
    /// `δ^{s+1}` is the inclusion (the unit coaction of the base ring).
    pub fn images(&self, s: usize, i: usize) -> Vec<Option<Terms<C>>> {
        let mut out: Vec<Option<Terms<C>>> = Vec::with_capacity(self.nb + s * self.nh);
        for v in 0..self.nb {
            out.push(Some(if i == 0 { self.rho[1][v].clone() } else { self.unit(v) }));
        }
        for c in 1..=s {
            for j in 0..self.nh {
                let img = if c < i {
                    self.unit(self.gen_index(c, j))
                } else if c == i {
                    self.delta_at[i][j].clone()
                } else {
                    self.unit(self.gen_index(c + 1, j))
                };
                out.push(Some(img));
            }
        }
        out
    }

    /// A substitution engine for `δ^i` on `B_s`.
    pub fn substitution<'a>(&'a self, images: &'a [Option<Terms<C>>], s: usize) -> Substitution<'a, C> {
        Substitution::new(images, &self.alphabets[s + 1], self.cap, self.one.clone())
    }
}
