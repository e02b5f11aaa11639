//! Coefficient scalars: residues mod p, p-local integers and rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::LinalgError;

/// Which coefficient ring a scalar, polynomial or matrix lives in.
///
/// `Q` is only used for intermediate computations (the Hazewinkel logarithm
/// coefficients have `p` in their denominators).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScalarRing {
    Fp(u32),
    Zp(u32),
    Q,
}

impl ScalarRing {
    pub fn prime(&self) -> Option<u32> {
        match *self {
            ScalarRing::Fp(p) | ScalarRing::Zp(p) => Some(p),
            ScalarRing::Q => None,
        }
    }

    pub fn is_fp(&self) -> bool {
        matches!(self, ScalarRing::Fp(_))
    }

    pub fn is_zp(&self) -> bool {
        matches!(self, ScalarRing::Zp(_))
    }
}

impl fmt::Display for ScalarRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarRing::Fp(p) => write!(f, "F_{p}"),
            ScalarRing::Zp(p) => write!(f, "Z_({p})"),
            ScalarRing::Q => write!(f, "Q"),
        }
    }
}

/// A ring element with a canonical representative, so derived equality is
/// mathematical equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Fp { p: u32, v: u32 },
    Zp { p: u32, q: BigRational },
    Q(BigRational),
}

pub(crate) fn mod_inv(a: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (a as i128 % p as i128, p as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1, "not invertible");
    s0.rem_euclid(p as i128) as u64
}

/// p-adic valuation of a nonzero integer.
pub fn int_valuation(n: &BigInt, p: u32) -> u32 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

fn residue_of_bigint(n: &BigInt, p: u32) -> u32 {
    n.mod_floor(&BigInt::from(p)).to_u32().unwrap()
}

impl Scalar {
    pub fn zero(ring: ScalarRing) -> Scalar {
        Scalar::from_i64(ring, 0)
    }

    pub fn one(ring: ScalarRing) -> Scalar {
        Scalar::from_i64(ring, 1)
    }

    pub fn from_i64(ring: ScalarRing, n: i64) -> Scalar {
        match ring {
            ScalarRing::Fp(p) => Scalar::Fp { p, v: n.rem_euclid(p as i64) as u32 },
            ScalarRing::Zp(p) => Scalar::Zp { p, q: BigRational::from_integer(n.into()) },
            ScalarRing::Q => Scalar::Q(BigRational::from_integer(n.into())),
        }
    }

    pub fn from_bigint(ring: ScalarRing, n: BigInt) -> Scalar {
        match ring {
            ScalarRing::Fp(p) => Scalar::Fp { p, v: residue_of_bigint(&n, p) },
            ScalarRing::Zp(p) => Scalar::Zp { p, q: BigRational::from_integer(n) },
            ScalarRing::Q => Scalar::Q(BigRational::from_integer(n)),
        }
    }

    /// Converts a rational into `ring`; fails when the denominator is
    /// divisible by the prime of a p-local or mod-p ring.
    pub fn from_rational(ring: ScalarRing, q: BigRational) -> Result<Scalar, LinalgError> {
        match ring {
            ScalarRing::Q => Ok(Scalar::Q(q)),
            ScalarRing::Zp(p) => {
                if (q.denom() % BigInt::from(p)).is_zero() {
                    Err(LinalgError::NotPLocal(q.to_string(), p))
                } else {
                    Ok(Scalar::Zp { p, q })
                }
            }
            ScalarRing::Fp(p) => {
                let d = residue_of_bigint(q.denom(), p);
                if d == 0 {
                    return Err(LinalgError::NotPLocal(q.to_string(), p));
                }
                let n = residue_of_bigint(q.numer(), p) as u64;
                let v = n * mod_inv(d as u64, p as u64) % p as u64;
                Ok(Scalar::Fp { p, v: v as u32 })
            }
        }
    }

    pub fn ring(&self) -> ScalarRing {
        match self {
            Scalar::Fp { p, .. } => ScalarRing::Fp(*p),
            Scalar::Zp { p, .. } => ScalarRing::Zp(*p),
            Scalar::Q(_) => ScalarRing::Q,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Fp { v, .. } => *v == 0,
            Scalar::Zp { q, .. } | Scalar::Q(q) => q.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Fp { v, .. } => *v == 1,
            Scalar::Zp { q, .. } | Scalar::Q(q) => q.is_one(),
        }
    }

    /// The value as a rational number (residues use 0..p-1).
    pub fn to_rational(&self) -> BigRational {
        match self {
            Scalar::Fp { v, .. } => BigRational::from_integer((*v).into()),
            Scalar::Zp { q, .. } | Scalar::Q(q) => q.clone(),
        }
    }

    /// Reinterprets the scalar in another ring (reduction `Z_(p) -> F_p`,
    /// inclusion `Z_(p) -> Q`, or a p-integrality checked `Q -> Z_(p)`).
    pub fn convert(&self, ring: ScalarRing) -> Result<Scalar, LinalgError> {
        if self.ring() == ring {
            return Ok(self.clone());
        }
        match (self, ring) {
            (Scalar::Fp { p, .. }, _) => Err(LinalgError::RingMismatch(ScalarRing::Fp(*p), ring)),
            (Scalar::Zp { q, .. } | Scalar::Q(q), r) => Scalar::from_rational(r, q.clone()),
        }
    }

    /// p-adic valuation (`None` for zero). Residues mod p have valuation 0.
    pub fn valuation(&self) -> Option<u32> {
        match self {
            Scalar::Fp { v, .. } => (*v != 0).then_some(0),
            Scalar::Zp { p, q } => (!q.is_zero()).then(|| int_valuation(q.numer(), *p)),
            Scalar::Q(_) => None,
        }
    }

    pub fn is_unit(&self) -> bool {
        match self {
            Scalar::Fp { v, .. } => *v != 0,
            Scalar::Zp { .. } => self.valuation() == Some(0),
            Scalar::Q(q) => !q.is_zero(),
        }
    }

    /// Multiplicative inverse when it exists in the ring.
    pub fn inverse(&self) -> Option<Scalar> {
        if !self.is_unit() {
            return None;
        }
        Some(match self {
            Scalar::Fp { p, v } => Scalar::Fp { p: *p, v: mod_inv(*v as u64, *p as u64) as u32 },
            Scalar::Zp { p, q } => Scalar::Zp { p: *p, q: q.recip() },
            Scalar::Q(q) => Scalar::Q(q.recip()),
        })
    }

    /// Residue mod p of a p-integral value.
    pub fn residue(&self) -> Option<u32> {
        match self {
            Scalar::Fp { v, .. } => Some(*v),
            Scalar::Zp { p, .. } => match self.convert(ScalarRing::Fp(*p)) {
                Ok(Scalar::Fp { v, .. }) => Some(v),
                _ => None,
            },
            Scalar::Q(_) => None,
        }
    }

    fn combine(&self, other: &Scalar, op: fn(&BigRational, &BigRational) -> BigRational, fop: fn(u64, u64, u64) -> u64) -> Scalar {
        match (self, other) {
            (Scalar::Fp { p, v }, Scalar::Fp { p: p2, v: w }) => {
                assert_eq!(p, p2, "mixed primes");
                Scalar::Fp { p: *p, v: fop(*v as u64, *w as u64, *p as u64) as u32 }
            }
            (Scalar::Zp { p, q }, Scalar::Zp { p: p2, q: r }) => {
                assert_eq!(p, p2, "mixed primes");
                Scalar::Zp { p: *p, q: op(q, r) }
            }
            (Scalar::Q(q), Scalar::Q(r)) => Scalar::Q(op(q, r)),
            (a, b) => panic!("scalar ring mismatch: {} vs {}", a.ring(), b.ring()),
        }
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = Scalar::one(self.ring());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        self.combine(o, |a, b| a + b, |a, b, p| (a + b) % p)
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        self.combine(o, |a, b| a - b, |a, b, p| (a + p - b) % p)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        self.combine(o, |a, b| a * b, |a, b, p| a * b % p)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Fp { p, v } => Scalar::Fp { p: *p, v: (p - v) % p },
            Scalar::Zp { p, q } => Scalar::Zp { p: *p, q: -q },
            Scalar::Q(q) => Scalar::Q(-q),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Fp { v, .. } => write!(f, "{v}"),
            Scalar::Zp { q, .. } | Scalar::Q(q) => {
                if q.is_integer() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
        }
    }
}

/// Parses an integer or `a/b` fraction into `ring`.
pub fn parse_scalar(ring: ScalarRing, text: &str) -> Option<Scalar> {
    let text = text.trim();
    let q = if let Some((a, b)) = text.split_once('/') {
        let a: BigInt = a.trim().parse().ok()?;
        let b: BigInt = b.trim().parse().ok()?;
        if b.is_zero() {
            return None;
        }
        BigRational::new(a, b)
    } else {
        BigRational::from_integer(text.parse::<BigInt>().ok()?)
    };
    Scalar::from_rational(ring, q).ok()
}
