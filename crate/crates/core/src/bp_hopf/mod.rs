//! Truncated Hopf algebroids: (BP_*, BP_*BP) with Hazewinkel generators, its
//! reduction P = BP_*BP/I = F_p[t_1, t_2, ...], and the dual Steenrod
//! algebra.
//!
//! Elements of `Γ^{⊗k}` are stored as polynomials in the *k-fold tensor
//! alphabet*: the base generators `v_n` followed by `k` primed copies of the
//! Hopf generators (`t1'`, `t1''`, ...). All coefficients are pushed into the
//! leftmost base ring, so a monomial `a * x' * y''` stands for `a x ⊗ y`.
//! The index layout is prefix-compatible: copy `c` of generator `j` sits at
//! `nb + (c - 1) * nh + j` in every alphabet with at least `c` copies.

mod axioms;
mod dump;
mod faces;

use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::graded_poly::terms::{self, Terms};
use crate::graded_poly::{basis_in_degree, Alphabet, Generator, Monomial, MonomialPoly};
use crate::scalar_linalg::{Scalar, ScalarRing};

pub use axioms::{check_axioms, AxiomReport, AxiomViolation};
pub use dump::{dump, load};
pub use faces::{scalar_to_int, FaceMaps, IntCoeffs};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HopfError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("cap {cap} admits no generator at p = {p}")]
    CapTooSmall { p: u32, cap: u32 },
    #[error("structure map of {0} is not p-locally integral")]
    NotIntegral(String),
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum HopfKind {
    BrownPeterson,
    QuotientP,
    DualSteenrod,
}

impl HopfKind {
    pub fn tag(&self) -> &'static str {
        match self {
            HopfKind::BrownPeterson => "bp",
            HopfKind::QuotientP => "P",
            HopfKind::DualSteenrod => "steenrod",
        }
    }
}

#[derive(Debug)]
pub struct HopfAlgebroidData {
    pub kind: HopfKind,
    pub prime: u32,
    pub cap: u32,
    pub ring: ScalarRing,
    /// Base ring generators (`v_n`); empty for Hopf algebras over F_p.
    pub base: Arc<Alphabet>,
    /// Base generators followed by the Hopf generators.
    pub gamma: Arc<Alphabet>,
    /// `η_R(v_n)` in `gamma`, one per base generator.
    pub eta_r: Vec<MonomialPoly>,
    /// `Δ(x)` in the 2-fold tensor alphabet, one per Hopf generator.
    pub delta: Vec<MonomialPoly>,
    conjugation: OnceLock<Vec<MonomialPoly>>,
}

impl Clone for HopfAlgebroidData {
    fn clone(&self) -> Self {
        let h = HopfAlgebroidData::from_parts(
            self.kind,
            self.prime,
            self.cap,
            self.ring,
            self.base.clone(),
            self.gamma.clone(),
            self.eta_r.clone(),
            self.delta.clone(),
        );
        if let Some(c) = self.conjugation.get() {
            let _ = h.conjugation.set(c.clone());
        }
        h
    }
}

pub(crate) fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn ipow(p: u32, e: u32) -> u32 {
    p.pow(e)
}

impl HopfAlgebroidData {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        kind: HopfKind,
        prime: u32,
        cap: u32,
        ring: ScalarRing,
        base: Arc<Alphabet>,
        gamma: Arc<Alphabet>,
        eta_r: Vec<MonomialPoly>,
        delta: Vec<MonomialPoly>,
    ) -> HopfAlgebroidData {
        HopfAlgebroidData { kind, prime, cap, ring, base, gamma, eta_r, delta, conjugation: OnceLock::new() }
    }

    pub fn nb(&self) -> usize {
        self.base.len()
    }

    /// Number of Hopf generators.
    pub fn nh(&self) -> usize {
        self.gamma.len() - self.base.len()
    }

    pub fn is_hopf_algebra(&self) -> bool {
        self.base.is_empty()
    }

    pub fn hopf_generator(&self, j: usize) -> &Generator {
        self.gamma.gen(self.nb() + j)
    }

    /// The `k`-fold tensor alphabet (`k = 1` is `gamma`, `k = 0` is `base`).
    pub fn tensor_alphabet(&self, k: usize) -> Arc<Alphabet> {
        match k {
            0 => self.base.clone(),
            1 => self.gamma.clone(),
            _ => Arc::new(tensor_alphabet(&self.base, &self.gamma, k)),
        }
    }

    /// Conjugation `c(x)` on Hopf generators, computed on first use.
    pub fn conjugation(&self) -> &[MonomialPoly] {
        self.conjugation.get_or_init(|| self.compute_conjugation())
    }

    // μ(c ⊗ 1)Δ(x) = η_R ε(x) = 0 for every Hopf generator x; the only term
    // involving c(x) itself is x ⊗ 1, so c(x) is minus the rest.
    fn compute_conjugation(&self) -> Vec<MonomialPoly> {
        let (nb, nh) = (self.nb(), self.nh());
        let mut out: Vec<MonomialPoly> = Vec::with_capacity(nh);
        for j in 0..nh {
            let mut images: Vec<Option<Terms<Scalar>>> = Vec::with_capacity(nb + 2 * nh);
            for v in 0..nb {
                images.push(Some(self.eta_r[v].terms().to_vec()));
            }
            for k in 0..nh {
                images.push(Some(if k < j { out[k].terms().to_vec() } else { Vec::new() }));
            }
            for k in 0..nh {
                images.push(Some(vec![(Monomial::gen(nb + k), Scalar::one(self.ring))]));
            }
            let mut sub = terms::Substitution::new(&images, &self.gamma, self.cap, Scalar::one(self.ring));
            let rest = sub.apply(self.delta[j].terms());
            out.push(MonomialPoly::from_raw(&self.gamma, self.ring, self.cap, terms::neg(&rest)));
        }
        out
    }
}

pub(crate) fn tensor_alphabet(base: &Alphabet, gamma: &Alphabet, k: usize) -> Alphabet {
    let nb = base.len();
    let mut gens: Vec<Generator> = base.gens().to_vec();
    for c in 1..=k {
        for g in &gamma.gens()[nb..] {
            let name = if k == 1 { g.name.clone() } else { format!("{}{}", g.name, "'".repeat(c)) };
            gens.push(Generator { name, degree: g.degree, odd: g.odd });
        }
    }
    Alphabet::new(gens).expect("tensor alphabet names are distinct")
}

fn q_int(n: i64) -> Scalar {
    Scalar::from_i64(ScalarRing::Q, n)
}

/// Hazewinkel presentation of (BP_*, BP_*BP) at `p`, truncated at `cap`.
pub fn build_bp(p: u32, cap: u32) -> Result<HopfAlgebroidData, HopfError> {
    if !is_prime(p) {
        return Err(HopfError::NotPrime(p));
    }
    let mut n = 0u32;
    while 2 * (ipow(p, n + 1) - 1) <= cap {
        n += 1;
    }
    if n == 0 {
        return Err(HopfError::CapTooSmall { p, cap });
    }
    let n = n as usize;
    let deg = |k: usize| 2 * (ipow(p, k as u32) - 1);
    let base = Arc::new(Alphabet::new((1..=n).map(|k| Generator::even(format!("v{k}"), deg(k))).collect()).unwrap());
    let mut gens = base.gens().to_vec();
    gens.extend((1..=n).map(|k| Generator::even(format!("t{k}"), deg(k))));
    let gamma = Arc::new(Alphabet::new(gens).unwrap());
    let gamma2 = Arc::new(tensor_alphabet(&base, &gamma, 2));
    let q = ScalarRing::Q;
    let inv_p = Scalar::Q(BigRational::new(1.into(), BigInt::from(p)));

    let v = |a: &Arc<Alphabet>, k: usize| MonomialPoly::monomial(a, q, cap, Monomial::gen(k - 1), q_int(1));
    // t_k in copy c of alphabet a (t_0 = 1)
    let t = |a: &Arc<Alphabet>, c: usize, k: usize| {
        if k == 0 {
            MonomialPoly::one(a, q, cap)
        } else {
            MonomialPoly::monomial(a, q, cap, Monomial::gen(n + (c - 1) * n + k - 1), q_int(1))
        }
    };
    let add = |a: &MonomialPoly, b: &MonomialPoly| a.add(b).unwrap();
    let mul = |a: &MonomialPoly, b: &MonomialPoly| a.multiply(b).unwrap();

    // logarithm coefficients m_k, as polynomials in gamma (base is a prefix)
    let mut m: Vec<MonomialPoly> = vec![MonomialPoly::one(&gamma, q, cap)];
    for k in 1..=n {
        let mut s = MonomialPoly::zero(&gamma, q, cap);
        for i in 0..k {
            s = add(&s, &mul(&m[i], &v(&gamma, k - i).pow(ipow(p, i as u32))));
        }
        m.push(s.scale(&inv_p));
    }

    let mut eta_m: Vec<MonomialPoly> = vec![MonomialPoly::one(&gamma, q, cap)];
    let mut eta_v: Vec<MonomialPoly> = vec![MonomialPoly::zero(&gamma, q, cap)];
    for k in 1..=n {
        let mut s = MonomialPoly::zero(&gamma, q, cap);
        for i in 0..=k {
            s = add(&s, &mul(&m[i], &t(&gamma, 1, k - i).pow(ipow(p, i as u32))));
        }
        eta_m.push(s);
        let mut r = eta_m[k].scale(&q_int(p as i64));
        for i in 1..k {
            r = r.sub(&mul(&eta_m[i], &eta_v[k - i].pow(ipow(p, i as u32)))).unwrap();
        }
        eta_v.push(r);
    }

    let m2: Vec<MonomialPoly> = m.iter().map(|x| x.reindex(&gamma2, &(0..gamma.len()).collect::<Vec<_>>())).collect();
    let mut delta: Vec<MonomialPoly> = vec![MonomialPoly::one(&gamma2, q, cap)];
    for k in 1..=n {
        let mut s = MonomialPoly::zero(&gamma2, q, cap);
        for i in 0..=k {
            for j in 0..=k - i {
                let l = k - i - j;
                let term = mul(
                    &mul(&m2[i], &t(&gamma2, 1, j).pow(ipow(p, i as u32))),
                    &t(&gamma2, 2, l).pow(ipow(p, (i + j) as u32)),
                );
                s = add(&s, &term);
            }
        }
        for i in 1..=k {
            s = s.sub(&mul(&m2[i], &delta[k - i].pow(ipow(p, i as u32)))).unwrap();
        }
        delta.push(s);
    }

    let zp = ScalarRing::Zp(p);
    let integral = |x: &MonomialPoly, what: String| x.convert(zp).map_err(|_| HopfError::NotIntegral(what));
    let eta_r =
        (1..=n).map(|k| integral(&eta_v[k], format!("eta_R(v{k})"))).collect::<Result<Vec<_>, _>>()?;
    let delta =
        (1..=n).map(|k| integral(&delta[k], format!("delta(t{k})"))).collect::<Result<Vec<_>, _>>()?;
    let base_z = base.clone();
    Ok(HopfAlgebroidData::from_parts(HopfKind::BrownPeterson, p, cap, zp, base_z, gamma, eta_r, delta))
}

/// `P = Γ / IΓ = F_p[t_1, t_2, ...]` with the induced coproduct.
pub fn build_quotient_p(bp: &HopfAlgebroidData) -> HopfAlgebroidData {
    let p = bp.prime;
    let fp = ScalarRing::Fp(p);
    let nb = bp.nb();
    let nh = bp.nh();
    let base = Arc::new(Alphabet::new(Vec::new()).unwrap());
    let gamma = Arc::new(Alphabet::new(bp.gamma.gens()[nb..].to_vec()).unwrap());
    let gamma2 = Arc::new(tensor_alphabet(&base, &gamma, 2));
    let delta = bp
        .delta
        .iter()
        .map(|d| {
            let items = d.terms().iter().filter(|(m, _)| m.factors().iter().all(|&(g, _)| g as usize >= nb)).map(|(m, c)| {
                (
                    Monomial::from_pairs(m.factors().iter().map(|&(g, e)| (g as usize - nb, e))),
                    c.convert(fp).expect("integral coefficient"),
                )
            });
            MonomialPoly::from_terms(&gamma2, fp, bp.cap, items)
        })
        .collect();
    debug_assert_eq!(gamma.len(), nh);
    HopfAlgebroidData::from_parts(HopfKind::QuotientP, p, bp.cap, fp, base, gamma, Vec::new(), delta)
}

/// The dual Steenrod algebra: `F_2[ξ_1, ξ_2, ...]` at p = 2, and
/// `F_p[ξ_1, ...] ⊗ E(τ_0, τ_1, ...)` at odd p, with Milnor coproducts.
pub fn build_dual_steenrod(p: u32, cap: u32) -> Result<HopfAlgebroidData, HopfError> {
    if !is_prime(p) {
        return Err(HopfError::NotPrime(p));
    }
    let fp = ScalarRing::Fp(p);
    // (name, degree, odd, kind, index) with kind 0 = xi, 1 = tau
    let mut gen_table: Vec<(String, u32, bool, u8, u32)> = Vec::new();
    if p == 2 {
        let mut i = 1;
        while (1u32 << i) - 1 <= cap {
            gen_table.push((format!("xi{i}"), (1 << i) - 1, false, 0, i));
            i += 1;
        }
    } else {
        let mut i = 0;
        loop {
            let dt = 2 * ipow(p, i) - 1;
            if dt > cap {
                break;
            }
            if i > 0 {
                gen_table.push((format!("xi{i}"), 2 * (ipow(p, i) - 1), false, 0, i));
            }
            gen_table.push((format!("tau{i}"), dt, true, 1, i));
            i += 1;
        }
        let xi_next = 2 * (ipow(p, i) - 1);
        if xi_next <= cap {
            gen_table.push((format!("xi{i}"), xi_next, false, 0, i));
        }
    }
    if gen_table.is_empty() {
        return Err(HopfError::CapTooSmall { p, cap });
    }
    let base = Arc::new(Alphabet::new(Vec::new()).unwrap());
    let gamma = Arc::new(
        Alphabet::new(gen_table.iter().map(|(n, d, odd, _, _)| Generator { name: n.clone(), degree: *d, odd: *odd }).collect())
            .unwrap(),
    );
    let gamma2 = Arc::new(tensor_alphabet(&base, &gamma, 2));
    let nh = gen_table.len();
    let find = |kind: u8, i: u32| gen_table.iter().position(|s| s.3 == kind && s.4 == i);
    let one = Scalar::one(fp);
    // ξ_k in copy c (ξ_0 = 1)
    let xi = |c: usize, k: u32| -> Option<Monomial> {
        if k == 0 {
            Some(Monomial::one())
        } else {
            find(0, k).map(|j| Monomial::gen((c - 1) * nh + j))
        }
    };
    let mut delta = Vec::new();
    for (_, _, _, kind, n) in &gen_table {
        let mut items: Vec<(Monomial, Scalar)> = Vec::new();
        match kind {
            0 => {
                for i in 0..=*n {
                    if let (Some(a), Some(b)) = (xi(1, n - i), xi(2, i)) {
                        let a = Monomial::from_pairs(a.factors().iter().map(|&(g, e)| (g as usize, e * ipow(p, i))));
                        items.push((a.mul(&b, &gamma2).unwrap().0, one.clone()));
                    }
                }
            }
            _ => {
                items.push((Monomial::gen(find(1, *n).unwrap()), one.clone()));
                for i in 0..=*n {
                    if let (Some(a), Some(j)) = (xi(1, n - i), find(1, i)) {
                        let a = Monomial::from_pairs(a.factors().iter().map(|&(g, e)| (g as usize, e * ipow(p, i))));
                        items.push((a.mul(&Monomial::gen(nh + j), &gamma2).unwrap().0, one.clone()));
                    }
                }
            }
        }
        delta.push(MonomialPoly::from_terms(&gamma2, fp, cap, items));
    }
    Ok(HopfAlgebroidData::from_parts(HopfKind::DualSteenrod, p, cap, fp, base, gamma, Vec::new(), delta))
}

/// Powers of the augmentation ideal `I = (p, v_1, v_2, ...)` of `BP_*`.
#[derive(Clone, Debug)]
pub struct AugmentationIdeal {
    pub prime: u32,
    pub base: Arc<Alphabet>,
    pub power: u32,
}

impl AugmentationIdeal {
    pub fn new(h: &HopfAlgebroidData, power: u32) -> AugmentationIdeal {
        AugmentationIdeal { prime: h.prime, base: h.base.clone(), power }
    }

    /// I-adic weight of `c * m`, counting only base generators (indices
    /// below the base length). `None` for a zero coefficient.
    pub fn weight(&self, m: &Monomial, c: &Scalar) -> Option<u32> {
        let nb = self.base.len() as u32;
        let v: u32 = m.factors().iter().filter(|(g, _)| *g < nb).map(|(_, e)| e).sum();
        c.valuation().map(|val| val + v)
    }

    /// Whether every term of `x` (in an alphabet whose prefix is the base)
    /// lies in `I^power`.
    pub fn contains(&self, x: &MonomialPoly) -> bool {
        x.terms().iter().all(|(m, c)| self.weight(m, c).is_none_or(|w| w >= self.power))
    }

    /// Alphabet of the associated graded classes `q_0, q_1, ...`.
    pub fn graded_alphabet(&self) -> Arc<Alphabet> {
        let mut gens = vec![Generator::even("q0", 0)];
        gens.extend(self.base.gens().iter().enumerate().map(|(i, g)| Generator::even(format!("q{}", i + 1), g.degree)));
        Arc::new(Alphabet::new(gens).unwrap())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealPowerBasis {
    /// Z_(p)-basis of `(I^n)_t`: pairs `(e, m)` meaning `p^e * m`.
    pub power: Vec<(u32, Monomial)>,
    /// F_p-basis of `(I^n / I^{n+1})_t` as monomials in `q_0, q_1, ...`.
    pub graded: Vec<Monomial>,
}

pub fn ideal_power_basis(ideal: &AugmentationIdeal, n: u32, t: u32) -> IdealPowerBasis {
    let vars: Vec<usize> = (0..ideal.base.len()).collect();
    let mut power = Vec::new();
    let mut graded = Vec::new();
    for m in basis_in_degree(&ideal.base, t, &vars) {
        let k = m.total_exponent();
        power.push((n.saturating_sub(k), m.clone()));
        if k <= n {
            graded.push(Monomial::from_pairs(
                std::iter::once((0, n - k)).chain(m.factors().iter().map(|&(g, e)| (g as usize + 1, e))),
            ));
        }
    }
    IdealPowerBasis { power, graded }
}

/// Builds (or reuses) the preset of the given kind. Presets are immutable,
/// so one copy per `(kind, prime, cap)` is shared process-wide.
pub fn cached(kind: HopfKind, prime: u32, cap: u32) -> Result<Arc<HopfAlgebroidData>, HopfError> {
    use std::collections::HashMap;
    use std::sync::Mutex;
    type Cache = Mutex<HashMap<(HopfKind, u32, u32), Arc<HopfAlgebroidData>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(h) = cache.lock().unwrap().get(&(kind, prime, cap)) {
        return Ok(h.clone());
    }
    let h = Arc::new(match kind {
        HopfKind::BrownPeterson => build_bp(prime, cap)?,
        HopfKind::QuotientP => build_quotient_p(&build_bp(prime, cap)?),
        HopfKind::DualSteenrod => build_dual_steenrod(prime, cap)?,
    });
    Ok(cache.lock().unwrap().entry((kind, prime, cap)).or_insert(h).clone())
}

impl std::str::FromStr for HopfKind {
    type Err = String;
    fn from_str(s: &str) -> Result<HopfKind, String> {
        match s {
            "bp" => Ok(HopfKind::BrownPeterson),
            "P" => Ok(HopfKind::QuotientP),
            "steenrod" => Ok(HopfKind::DualSteenrod),
            _ => Err(format!("unknown Hopf algebroid {s}")),
        }
    }
}
