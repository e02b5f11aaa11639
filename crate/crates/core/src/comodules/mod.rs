//! Finitely presented comodules over a truncated Hopf algebroid, and the
//! preset families used by the layer pipeline.
//!
//! A comodule is presented by generators `g_i` of internal degree `d_i`,
//! relations `r_k = Σ a_ki g_i` with `a_ki` in the base ring `A`, and a
//! coaction `ψ(g_i) = Σ_j γ_ij ⊗ g_j` with `γ_ij ∈ Γ` (coefficients pushed
//! to the left, as everywhere else). The presentation must be normalized:
//! the `t`-free part of `γ_ij` is exactly `δ_ij`.

mod check;
mod format;

use std::sync::Arc;

use thiserror::Error;

use crate::bp_hopf::{HopfAlgebroidData, HopfError, HopfKind};
use crate::graded_poly::{Monomial, MonomialPoly};
use crate::scalar_linalg::{Scalar, ScalarRing};

pub use check::{check_comodule, module_shape, ComoduleFaces, ModElem};
pub use format::{parse_comodule, parse_comodule_with, render_comodule, HopfResolver};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComoduleError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    SyntaxError { line: usize, col: usize, msg: String },
    #[error("axiom violation ({axiom}) on generator {generator}")]
    AxiomViolation { axiom: String, generator: String },
    #[error("degree error at line {line}: {msg}")]
    DegreeError { line: usize, msg: String },
    #[error("Chow degree {0} is outside the tabulated range 0..=8")]
    OutOfTabulatedRange(u32),
    #[error("{0} is not an odd prime power")]
    NotOddPrimePower(u64),
    #[error("{0}")]
    WrongHopfAlgebroid(String),
    #[error(transparent)]
    Hopf(#[from] HopfError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComoduleGenerator {
    pub name: String,
    pub degree: u32,
}

/// Cyclic quotients `A/(p^e, v_1, ..., v_n)` by an invariant ideal. The
/// cobar builder works with normal forms for these instead of a relation
/// lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CyclicQuotient {
    /// `None` when no power of p is killed.
    pub p_exponent: Option<u32>,
    /// Number of killed `v_i`, starting at `v_1`.
    pub killed: usize,
}

#[derive(Clone, Debug)]
pub struct Comodule {
    pub name: String,
    pub hopf: Arc<HopfAlgebroidData>,
    /// Motivic bidegree `(a, b)` of the suspension. Metadata only: a class in
    /// internal degree `t` sits in motivic bidegree `(a + t, b + t/2)`.
    pub shift: (i32, i32),
    pub generators: Vec<ComoduleGenerator>,
    /// Each relation lists `(generator, coefficient in A)`.
    pub relations: Vec<Vec<(usize, MonomialPoly)>>,
    /// `coaction[i]` lists `(j, γ_ij)` with `γ_ij` in the `Γ` alphabet.
    pub coaction: Vec<Vec<(usize, MonomialPoly)>>,
}

impl PartialEq for Comodule {
    fn eq(&self, o: &Comodule) -> bool {
        self.name == o.name
            && self.shift == o.shift
            && self.generators == o.generators
            && self.relations == o.relations
            && self.coaction == o.coaction
            && self.hopf.kind == o.hopf.kind
            && self.hopf.prime == o.hopf.prime
            && self.hopf.cap == o.hopf.cap
    }
}

impl Comodule {
    pub fn prime(&self) -> u32 {
        self.hopf.prime
    }

    pub fn cap(&self) -> u32 {
        self.hopf.cap
    }

    pub fn ring(&self) -> ScalarRing {
        self.hopf.ring
    }

    pub fn with_shift(&self, shift: (i32, i32)) -> Comodule {
        Comodule { shift, ..self.clone() }
    }

    pub fn with_name(&self, name: impl Into<String>) -> Comodule {
        Comodule { name: name.into(), ..self.clone() }
    }

    /// Motivic bidegree of an element of internal degree `t`.
    pub fn motivic_degree(&self, t: u32) -> (i32, i32) {
        (self.shift.0 + t as i32, self.shift.1 + t as i32 / 2)
    }

    /// Recognizes `A/(p^e, v_1, ..., v_n)` with the unit coaction.
    pub fn cyclic_quotient(&self) -> Option<CyclicQuotient> {
        if self.generators.len() != 1 || self.generators[0].degree != 0 {
            return None;
        }
        let unit_coaction = match self.coaction[0].as_slice() {
            [(0, g)] => g.terms().len() == 1 && g.terms()[0].0.is_one() && g.terms()[0].1.is_one(),
            _ => false,
        };
        if !unit_coaction {
            return None;
        }
        let mut p_exponent = None;
        let mut vs: Vec<usize> = Vec::new();
        for rel in &self.relations {
            let [(0, a)] = rel.as_slice() else { return None };
            let [(m, c)] = a.terms() else { return None };
            if m.is_one() {
                if self.ring().is_fp() {
                    continue;
                }
                let e = c.valuation()?;
                if e == 0 {
                    return None;
                }
                p_exponent = Some(p_exponent.map_or(e, |x: u32| x.min(e)));
            } else if c.is_unit() && m.factors().len() == 1 && m.factors()[0].1 == 1 {
                vs.push(m.factors()[0].0 as usize);
            } else {
                return None;
            }
        }
        vs.sort_unstable();
        vs.dedup();
        let killed = vs.len();
        if vs.iter().enumerate().any(|(i, &v)| v != i) {
            return None;
        }
        // killing v_1 is only invariant once p is killed
        if killed > 0 && p_exponent != Some(1) {
            return None;
        }
        Some(CyclicQuotient { p_exponent, killed })
    }

    /// Whether the relations contain `p^k g_i` for every generator, and the
    /// least such uniform `k`.
    pub fn torsion_exponent(&self) -> Option<u32> {
        if self.ring().is_fp() {
            return Some(1);
        }
        let mut worst = 0;
        for i in 0..self.generators.len() {
            let best = self
                .relations
                .iter()
                .filter_map(|rel| match rel.as_slice() {
                    [(g, a)] if *g == i => match a.terms() {
                        [(m, c)] if m.is_one() => c.valuation(),
                        _ => None,
                    },
                    _ => None,
                })
                .min()?;
            worst = worst.max(best);
        }
        Some(worst)
    }
}

fn require_bp(h: &HopfAlgebroidData) -> Result<(), ComoduleError> {
    if h.kind != HopfKind::BrownPeterson {
        return Err(ComoduleError::WrongHopfAlgebroid(format!("needs BP_*BP, got {}", h.kind.tag())));
    }
    Ok(())
}

fn unit_coaction(h: &HopfAlgebroidData) -> Vec<Vec<(usize, MonomialPoly)>> {
    vec![vec![(0, MonomialPoly::one(&h.gamma, h.ring, h.cap))]]
}

fn scalar_relation(h: &HopfAlgebroidData, c: Scalar) -> Vec<(usize, MonomialPoly)> {
    vec![(0, MonomialPoly::constant(&h.base, h.ring, h.cap, c))]
}

/// The unit comodule `A` (for a Hopf algebra over F_p, the trivial
/// comodule F_p).
pub fn unit_comodule(h: &Arc<HopfAlgebroidData>) -> Comodule {
    let name = match h.kind {
        HopfKind::BrownPeterson => "BP".to_string(),
        _ => format!("F{}", h.prime),
    };
    Comodule {
        name,
        hopf: h.clone(),
        shift: (0, 0),
        generators: vec![ComoduleGenerator { name: "g".into(), degree: 0 }],
        relations: Vec::new(),
        coaction: unit_coaction(h),
    }
}

pub fn zero_comodule(h: &Arc<HopfAlgebroidData>) -> Comodule {
    Comodule {
        name: "0".into(),
        hopf: h.clone(),
        shift: (0, 0),
        generators: Vec::new(),
        relations: Vec::new(),
        coaction: Vec::new(),
    }
}

/// `BP_*/(p, v_1, ..., v_n)`; `n = -1` gives `BP_*` and `n = 0` gives `BP_*/p`.
/// Generators `v_i` above the cap are ignored.
pub fn bp_mod_in(h: &Arc<HopfAlgebroidData>, n: i32) -> Result<Comodule, ComoduleError> {
    require_bp(h)?;
    let mut c = unit_comodule(h);
    if n < 0 {
        return Ok(c);
    }
    let p = h.prime;
    c.relations.push(scalar_relation(h, Scalar::from_i64(h.ring, p as i64)));
    let mut names = vec![p.to_string()];
    for v in 0..(n as usize).min(h.nb()) {
        let m = MonomialPoly::monomial(&h.base, h.ring, h.cap, Monomial::gen(v), Scalar::one(h.ring));
        c.relations.push(vec![(0, m)]);
        names.push(h.base.gen(v).name.clone());
    }
    c.name = format!("BP/({})", names.join(","));
    Ok(c)
}

/// `BP_*/p^k`.
pub fn cyclic_quotient(h: &Arc<HopfAlgebroidData>, k: u32) -> Result<Comodule, ComoduleError> {
    require_bp(h)?;
    if k == 0 {
        return Err(ComoduleError::DegreeError { line: 0, msg: "cyclic quotient needs k >= 1".into() });
    }
    let mut c = unit_comodule(h);
    let pk = Scalar::from_i64(h.ring, (h.prime as i64).pow(k));
    c.relations.push(scalar_relation(h, pk));
    c.name = format!("BP/{}", (h.prime as u64).pow(k));
    Ok(c)
}

/// The invariant ideal `(p, v_1) ⊂ BP_*` as a comodule: generators `gp = p`
/// and `gv = v_1`, relation `v_1 gp = p gv`, and
/// `ψ(gv) = 1 ⊗ gv - ((η_R(v_1) - v_1)/p) ⊗ gp`.
pub fn ideal_p_v1(h: &Arc<HopfAlgebroidData>) -> Result<Comodule, ComoduleError> {
    require_bp(h)?;
    let (ring, cap, p) = (h.ring, h.cap, h.prime);
    let v1_base = MonomialPoly::monomial(&h.base, ring, cap, Monomial::gen(0), Scalar::one(ring));
    let v1_gamma = MonomialPoly::monomial(&h.gamma, ring, cap, Monomial::gen(0), Scalar::one(ring));
    let diff = h.eta_r[0].sub(&v1_gamma).expect("same alphabet");
    let p_q = num_rational::BigRational::from_integer(p.into());
    let divided = diff.terms().iter().map(|(m, c)| {
        let q = Scalar::from_rational(ring, c.to_rational() / &p_q).expect("η_R(v1) ≡ v1 mod p");
        (m.clone(), q)
    });
    let diff = MonomialPoly::from_terms(&h.gamma, ring, cap, divided);
    let one = MonomialPoly::one(&h.gamma, ring, cap);
    Ok(Comodule {
        name: format!("({p},v1)"),
        hopf: h.clone(),
        shift: (0, 0),
        generators: vec![
            ComoduleGenerator { name: "gp".into(), degree: 0 },
            ComoduleGenerator { name: "gv".into(), degree: h.base.degree(0) },
        ],
        relations: vec![vec![
            (0, v1_base),
            (1, MonomialPoly::constant(&h.base, ring, cap, Scalar::from_i64(ring, -(p as i64)))),
        ]],
        coaction: vec![vec![(0, one.clone())], vec![(0, diff.neg()), (1, one)]],
    })
}

/// Field over which the motivic layers are taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Field {
    C,
    R,
    Fq(u64),
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Field::C => write!(f, "C"),
            Field::R => write!(f, "R"),
            Field::Fq(q) => write!(f, "Fq:{q}"),
        }
    }
}

impl std::str::FromStr for Field {
    type Err = String;
    fn from_str(s: &str) -> Result<Field, String> {
        match s {
            "C" => Ok(Field::C),
            "R" => Ok(Field::R),
            _ => {
                let q = s.strip_prefix("Fq:").or_else(|| s.strip_prefix("F_")).or_else(|| s.strip_prefix('F'));
                q.and_then(|q| q.parse().ok())
                    .map(Field::Fq)
                    .ok_or_else(|| format!("unknown field preset {s:?} (expected C, R or Fq:<q>)"))
            }
        }
    }
}

/// One Chow-degree layer: a direct sum of shifted comodules, kept as a list.
#[derive(Clone, Debug)]
pub struct Layer {
    pub field: Field,
    pub chow: u32,
    pub summands: Vec<Arc<Comodule>>,
}

impl Layer {
    pub fn is_zero(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn describe(&self) -> String {
        if self.summands.is_empty() {
            return "0".into();
        }
        self.summands
            .iter()
            .map(|c| if c.shift == (0, 0) { c.name.clone() } else { format!("S^({},{}){}", c.shift.0, c.shift.1, c.name) })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

fn two_primary_bp(h: &Arc<HopfAlgebroidData>) -> Result<(), ComoduleError> {
    require_bp(h)?;
    if h.prime != 2 {
        return Err(ComoduleError::WrongHopfAlgebroid("motivic layers are 2-primary".into()));
    }
    Ok(())
}

fn shifted(c: Comodule, n: i32) -> Arc<Comodule> {
    Arc::new(c.with_shift((-n, -n)))
}

/// The Chow degree `n` layer over ℝ, `0 <= n <= 8`.
pub fn real_layer(h: &Arc<HopfAlgebroidData>, n: u32) -> Result<Layer, ComoduleError> {
    two_primary_bp(h)?;
    let k = n as i32;
    let summands = match n {
        0 => vec![Arc::new(bp_mod_in(h, -1)?)],
        1 | 2 => vec![shifted(bp_mod_in(h, 0)?, k)],
        3 | 5 | 6 => vec![shifted(bp_mod_in(h, 1)?, k)],
        4 => vec![shifted(bp_mod_in(h, 1)?, k), Arc::new(bp_mod_in(h, -1)?.with_shift((0, -2)))],
        7 => vec![shifted(bp_mod_in(h, 2)?, k)],
        8 => vec![shifted(bp_mod_in(h, 2)?, k), Arc::new(ideal_p_v1(h)?.with_shift((0, -4)))],
        _ => return Err(ComoduleError::OutOfTabulatedRange(n)),
    };
    Ok(Layer { field: Field::R, chow: n, summands })
}

/// The Chow degree `n` layer over ℂ: `Σ^{0,-n/2} BP_*` for even `n`, zero
/// for odd `n`.
pub fn complex_layer(h: &Arc<HopfAlgebroidData>, n: u32) -> Result<Layer, ComoduleError> {
    two_primary_bp(h)?;
    let summands =
        if n % 2 == 0 { vec![Arc::new(bp_mod_in(h, -1)?.with_shift((0, -(n as i32) / 2)))] } else { Vec::new() };
    Ok(Layer { field: Field::C, chow: n, summands })
}

/// Returns `(ℓ, e)` with `q = ℓ^e`, `ℓ` prime.
fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let l = (2..).take_while(|d| d * d <= q).find(|d| q % d == 0).unwrap_or(q);
    let (mut r, mut e) = (q, 0);
    while r % l == 0 {
        r /= l;
        e += 1;
    }
    (r == 1).then_some((l, e))
}

/// 2-adic valuation of `q^w - 1`.
pub fn nu2_q_power_minus_one(q: u64, w: u32) -> u32 {
    // q^w - 1 mod 2^64 keeps every bit below 64, which suffices for the
    // valuations that occur (they are at most about log2(q) + log2(w) + 2)
    let x = (0..w).fold(1u64, |acc, _| acc.wrapping_mul(q)).wrapping_sub(1);
    x.trailing_zeros()
}

/// The Chow degree `n` layer over `F_q`: `BP_*` for `n = 0`,
/// `Σ^{-1,-w} BP_*/2^{ν_2(q^w - 1)}` for `n = 2w - 1`, zero otherwise.
pub fn finite_field_layer(h: &Arc<HopfAlgebroidData>, q: u64, n: u32) -> Result<Layer, ComoduleError> {
    match prime_power(q) {
        Some((l, _)) if l != 2 => {}
        _ => return Err(ComoduleError::NotOddPrimePower(q)),
    }
    two_primary_bp(h)?;
    let summands = if n == 0 {
        vec![Arc::new(bp_mod_in(h, -1)?)]
    } else if n % 2 == 1 {
        let w = n.div_ceil(2);
        let k = nu2_q_power_minus_one(q, w);
        vec![Arc::new(cyclic_quotient(h, k)?.with_shift((-1, -(w as i32))))]
    } else {
        Vec::new()
    };
    Ok(Layer { field: Field::Fq(q), chow: n, summands })
}

/// The layer of the given field in Chow degree `n`.
pub fn layer(h: &Arc<HopfAlgebroidData>, field: Field, n: u32) -> Result<Layer, ComoduleError> {
    match field {
        Field::C => complex_layer(h, n),
        Field::R => real_layer(h, n),
        Field::Fq(q) => finite_field_layer(h, q, n),
    }
}

/// Layers `0..=chow_max` of one field.
#[derive(Clone, Debug)]
pub struct LayerFamily {
    pub field: Field,
    pub prime: u32,
    pub layers: Vec<Layer>,
}

pub fn layer_family(h: &Arc<HopfAlgebroidData>, field: Field, chow_max: u32) -> Result<LayerFamily, ComoduleError> {
    let layers = (0..=chow_max).map(|n| layer(h, field, n)).collect::<Result<Vec<_>, _>>()?;
    Ok(LayerFamily { field, prime: h.prime, layers })
}
