//! Sparse graded polynomials with a hard internal-degree cap.
//!
//! Text format used for rendering and parsing (also in golden files):
//!
//! ```text
//! poly   := ["-"] term (("+" | "-") term)*   |  "0"
//! term   := coeff | [coeff "*"] factor ("*" factor)*
//! factor := name ["^" integer]
//! coeff  := integer ["/" integer]
//! name   := letter (letter | digit | "_" | "'")*
//! ```
//!
//! Terms are printed in graded-lexicographic order: internal degree first,
//! then exponents compared by generator index, larger exponent first. So
//! `(v1 + 2*t1)^2` over Z_(2) renders as `v1^2 + 4*v1*t1 + 4*t1^2`.

pub mod terms;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;
use thiserror::Error;

use crate::scalar_linalg::{parse_scalar, Scalar, ScalarRing};
use terms::Terms;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("polynomials live over different alphabets")]
    AlphabetMismatch,
    #[error("coefficient rings differ: {0} vs {1}")]
    RingMismatch(ScalarRing, ScalarRing),
    #[error("truncation caps differ: {0} vs {1}")]
    CapMismatch(u32, u32),
    #[error("image of {generator} is not homogeneous of degree {expected}")]
    DegreeMismatch { generator: String, expected: u32 },
    #[error("no image given for generator {0}")]
    MissingAssignment(String),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("duplicate generator {0}")]
    DuplicateGenerator(String),
    #[error("term of degree {0} exceeds cap {1}")]
    AboveCap(u32, u32),
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    pub degree: u32,
    /// Exterior generator (squares to zero, anticommutes with other
    /// exterior generators).
    pub odd: bool,
}

impl Generator {
    pub fn even(name: impl Into<String>, degree: u32) -> Generator {
        Generator { name: name.into(), degree, odd: false }
    }

    pub fn exterior(name: impl Into<String>, degree: u32) -> Generator {
        Generator { name: name.into(), degree, odd: true }
    }
}

#[derive(Clone, Debug)]
pub struct Alphabet {
    gens: Vec<Generator>,
    index: HashMap<String, usize>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.gens == other.gens
    }
}

impl Eq for Alphabet {}

impl Alphabet {
    pub fn new(gens: Vec<Generator>) -> Result<Alphabet, PolyError> {
        let mut index = HashMap::new();
        for (i, g) in gens.iter().enumerate() {
            if index.insert(g.name.clone(), i).is_some() {
                return Err(PolyError::DuplicateGenerator(g.name.clone()));
            }
        }
        Ok(Alphabet { gens, index })
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn gens(&self) -> &[Generator] {
        &self.gens
    }

    pub fn gen(&self, i: usize) -> &Generator {
        &self.gens[i]
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.gens[i].degree
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Display order: degree, then exponents by ascending generator index
    /// with larger exponents first.
    pub fn display_cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        a.degree(self).cmp(&b.degree(self)).then_with(|| {
            let (mut i, mut j) = (0, 0);
            let (fa, fb) = (a.factors(), b.factors());
            loop {
                match (fa.get(i), fb.get(j)) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Less,
                    (None, Some(_)) => return Ordering::Greater,
                    (Some(&(ga, ea)), Some(&(gb, eb))) => {
                        if ga != gb {
                            // the one with the smaller generator index has the
                            // larger exponent at that index
                            return ga.cmp(&gb);
                        }
                        if ea != eb {
                            return eb.cmp(&ea);
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
        })
    }
}

/// Sparse exponent vector: `(generator index, exponent)` pairs sorted by
/// index with positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(SmallVec<[(u32, u32); 4]>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(SmallVec::new())
    }

    pub fn gen(i: usize) -> Monomial {
        Monomial::power(i, 1)
    }

    pub fn power(i: usize, e: u32) -> Monomial {
        if e == 0 {
            return Monomial::one();
        }
        let mut v = SmallVec::new();
        v.push((i as u32, e));
        Monomial(v)
    }

    /// Builds a monomial from `(index, exponent)` pairs in any order.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, u32)>) -> Monomial {
        let mut m: BTreeMap<u32, u32> = BTreeMap::new();
        for (g, e) in pairs {
            if e > 0 {
                *m.entry(g as u32).or_default() += e;
            }
        }
        Monomial(m.into_iter().collect())
    }

    pub fn factors(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, g: usize) -> u32 {
        self.0.iter().find(|(i, _)| *i as usize == g).map_or(0, |(_, e)| *e)
    }

    pub fn degree(&self, alph: &Alphabet) -> u32 {
        self.0.iter().map(|&(g, e)| alph.degree(g as usize) * e).sum()
    }

    pub fn total_exponent(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    /// Product with its Koszul sign (`true` means negate); `None` when an
    /// exterior generator would appear twice.
    pub fn mul(&self, other: &Monomial, alph: &Alphabet) -> Option<(Monomial, bool)> {
        let mut out: SmallVec<[(u32, u32); 4]> = SmallVec::with_capacity(self.0.len() + other.0.len());
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        let mut swaps = 0u32;
        // odd generators of `a` not yet passed
        let mut odd_left_in_a: u32 = a.iter().filter(|(g, _)| alph.gens[*g as usize].odd).count() as u32;
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                if alph.gens[a[i].0 as usize].odd {
                    odd_left_in_a -= 1;
                }
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                if alph.gens[b[j].0 as usize].odd {
                    swaps += odd_left_in_a;
                }
                out.push(b[j]);
                j += 1;
            } else {
                if alph.gens[a[i].0 as usize].odd {
                    return None;
                }
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
        Some((Monomial(out), swaps % 2 == 1))
    }

    /// Whether `other` divides `self` (as exponent vectors).
    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().all(|&(g, e)| other.exponent(g as usize) >= e)
    }

    pub fn render(&self, alph: &Alphabet) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&(g, e)| {
                let name = &alph.gens[g as usize].name;
                if e == 1 {
                    name.clone()
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect();
        parts.join("*")
    }
}

/// A polynomial over a fixed alphabet, coefficient ring and degree cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialPoly {
    alphabet: Arc<Alphabet>,
    ring: ScalarRing,
    cap: u32,
    terms: Terms<Scalar>,
}

impl MonomialPoly {
    pub fn zero(alphabet: &Arc<Alphabet>, ring: ScalarRing, cap: u32) -> MonomialPoly {
        MonomialPoly { alphabet: alphabet.clone(), ring, cap, terms: Vec::new() }
    }

    pub fn constant(alphabet: &Arc<Alphabet>, ring: ScalarRing, cap: u32, c: Scalar) -> MonomialPoly {
        MonomialPoly::monomial(alphabet, ring, cap, Monomial::one(), c)
    }

    pub fn one(alphabet: &Arc<Alphabet>, ring: ScalarRing, cap: u32) -> MonomialPoly {
        MonomialPoly::constant(alphabet, ring, cap, Scalar::one(ring))
    }

    /// `c * m`, or zero if `m` is above the cap.
    pub fn monomial(alphabet: &Arc<Alphabet>, ring: ScalarRing, cap: u32, m: Monomial, c: Scalar) -> MonomialPoly {
        let mut p = MonomialPoly::zero(alphabet, ring, cap);
        if !c.is_zero() && m.degree(alphabet) <= cap {
            p.terms.push((m, c));
        }
        p
    }

    pub fn generator(alphabet: &Arc<Alphabet>, ring: ScalarRing, cap: u32, name: &str) -> Result<MonomialPoly, PolyError> {
        let g = alphabet.find(name).ok_or_else(|| PolyError::UnknownGenerator(name.to_string()))?;
        Ok(MonomialPoly::monomial(alphabet, ring, cap, Monomial::gen(g), Scalar::one(ring)))
    }

    /// Builds from arbitrary terms: duplicates are summed, zero and
    /// above-cap terms dropped, exterior squares rejected by dropping.
    pub fn from_terms(
        alphabet: &Arc<Alphabet>,
        ring: ScalarRing,
        cap: u32,
        items: impl IntoIterator<Item = (Monomial, Scalar)>,
    ) -> MonomialPoly {
        let mut acc: HashMap<Monomial, Scalar> = HashMap::new();
        for (m, c) in items {
            assert_eq!(c.ring(), ring, "coefficient ring");
            if m.degree(alphabet) > cap || m.factors().iter().any(|&(g, e)| e > 1 && alphabet.gen(g as usize).odd) {
                continue;
            }
            let e = acc.entry(m).or_insert_with(|| Scalar::zero(ring));
            *e = &*e + &c;
        }
        MonomialPoly { alphabet: alphabet.clone(), ring, cap, terms: terms::normalize(acc) }
    }

    pub(crate) fn from_raw(alphabet: &Arc<Alphabet>, ring: ScalarRing, cap: u32, terms: Terms<Scalar>) -> MonomialPoly {
        MonomialPoly { alphabet: alphabet.clone(), ring, cap, terms }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn ring(&self) -> ScalarRing {
        self.ring
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn terms(&self) -> &[(Monomial, Scalar)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        match self.terms.binary_search_by(|(x, _)| x.cmp(m)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => Scalar::zero(self.ring),
        }
    }

    /// The common degree of all terms, if homogeneous (zero counts as
    /// homogeneous of every degree and returns `None`).
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.iter().map(|(m, _)| m.degree(&self.alphabet));
        let d = it.next()?;
        it.all(|x| x == d).then_some(d)
    }

    pub fn is_homogeneous_of(&self, d: u32) -> bool {
        self.terms.iter().all(|(m, _)| m.degree(&self.alphabet) == d)
    }

    fn check_compatible(&self, o: &MonomialPoly) -> Result<(), PolyError> {
        if !Arc::ptr_eq(&self.alphabet, &o.alphabet) && *self.alphabet != *o.alphabet {
            return Err(PolyError::AlphabetMismatch);
        }
        if self.ring != o.ring {
            return Err(PolyError::RingMismatch(self.ring, o.ring));
        }
        if self.cap != o.cap {
            return Err(PolyError::CapMismatch(self.cap, o.cap));
        }
        Ok(())
    }

    pub fn add(&self, o: &MonomialPoly) -> Result<MonomialPoly, PolyError> {
        self.check_compatible(o)?;
        Ok(self.with_terms(terms::add(&self.terms, &o.terms)))
    }

    pub fn sub(&self, o: &MonomialPoly) -> Result<MonomialPoly, PolyError> {
        self.check_compatible(o)?;
        Ok(self.with_terms(terms::add(&self.terms, &terms::neg(&o.terms))))
    }

    pub fn neg(&self) -> MonomialPoly {
        self.with_terms(terms::neg(&self.terms))
    }

    pub fn scale(&self, c: &Scalar) -> MonomialPoly {
        self.with_terms(terms::scale(&self.terms, c))
    }

    pub fn multiply(&self, o: &MonomialPoly) -> Result<MonomialPoly, PolyError> {
        self.check_compatible(o)?;
        Ok(self.with_terms(terms::mul(&self.terms, &o.terms, &self.alphabet, self.cap)))
    }

    pub fn pow(&self, e: u32) -> MonomialPoly {
        self.with_terms(terms::pow(&self.terms, e, &Scalar::one(self.ring), &self.alphabet, self.cap))
    }

    /// Same polynomial with a smaller cap (terms above it dropped) or a
    /// larger one.
    pub fn recap(&self, cap: u32) -> MonomialPoly {
        let terms = self.terms.iter().filter(|(m, _)| m.degree(&self.alphabet) <= cap).cloned().collect();
        MonomialPoly { alphabet: self.alphabet.clone(), ring: self.ring, cap, terms }
    }

    /// Coefficientwise ring change (for example `Q -> Z_(p)` or
    /// `Z_(p) -> F_p`).
    pub fn convert(&self, ring: ScalarRing) -> Result<MonomialPoly, crate::scalar_linalg::LinalgError> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let c = c.convert(ring)?;
            if !c.is_zero() {
                terms.push((m.clone(), c));
            }
        }
        Ok(MonomialPoly { alphabet: self.alphabet.clone(), ring, cap: self.cap, terms })
    }

    /// Moves the polynomial into another alphabet by renaming generators;
    /// `map[g]` is the target index of source generator `g`.
    pub fn reindex(&self, target: &Arc<Alphabet>, map: &[usize]) -> MonomialPoly {
        let items = self
            .terms
            .iter()
            .map(|(m, c)| (Monomial::from_pairs(m.factors().iter().map(|&(g, e)| (map[g as usize], e))), c.clone()));
        MonomialPoly::from_terms(target, self.ring, self.cap, items)
    }

    fn with_terms(&self, terms: Terms<Scalar>) -> MonomialPoly {
        MonomialPoly { alphabet: self.alphabet.clone(), ring: self.ring, cap: self.cap, terms }
    }

    /// Terms in display order.
    pub fn display_terms(&self) -> Vec<(Monomial, Scalar)> {
        let mut v = self.terms.clone();
        v.sort_by(|a, b| self.alphabet.display_cmp(&a.0, &b.0));
        v
    }

    pub fn parse(alphabet: &Arc<Alphabet>, ring: ScalarRing, cap: u32, text: &str) -> Result<MonomialPoly, PolyError> {
        parse_poly(alphabet, ring, cap, text)
    }
}

impl fmt::Display for MonomialPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.display_terms().iter().enumerate() {
            let negative = matches!(c, Scalar::Zp { q, .. } | Scalar::Q(q) if q < &num_rational::BigRational::from_integer(0.into()));
            let abs = if negative { -c } else { c.clone() };
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.is_one() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", m.render(&self.alphabet))?;
            } else {
                write!(f, "{abs}*{}", m.render(&self.alphabet))?;
            }
        }
        Ok(())
    }
}

/// Product of two polynomials over the same alphabet, ring and cap.
pub fn multiply(a: &MonomialPoly, b: &MonomialPoly) -> Result<MonomialPoly, PolyError> {
    a.multiply(b)
}

/// All monomials of internal degree exactly `t` in the generators `vars`,
/// in display order. Degree-zero generators are skipped (their powers would
/// make the list infinite).
pub fn basis_in_degree(alphabet: &Alphabet, t: u32, vars: &[usize]) -> Vec<Monomial> {
    let mut vars: Vec<usize> = vars.iter().copied().filter(|&g| alphabet.degree(g) > 0).collect();
    vars.sort_unstable();
    vars.dedup();
    let mut out = Vec::new();
    let mut cur: Vec<(usize, u32)> = Vec::new();
    enumerate(alphabet, &vars, 0, t, &mut cur, &mut out);
    out.sort_by(|a, b| alphabet.display_cmp(a, b));
    out
}

fn enumerate(alph: &Alphabet, vars: &[usize], k: usize, rem: u32, cur: &mut Vec<(usize, u32)>, out: &mut Vec<Monomial>) {
    if rem == 0 {
        out.push(Monomial::from_pairs(cur.iter().copied()));
        return;
    }
    if k == vars.len() {
        return;
    }
    let g = vars[k];
    let d = alph.degree(g);
    let max = if alph.gen(g).odd { 1.min(rem / d) } else { rem / d };
    for e in (0..=max).rev() {
        if e > 0 {
            cur.push((g, e));
        }
        enumerate(alph, vars, k + 1, rem - e * d, cur, out);
        if e > 0 {
            cur.pop();
        }
    }
}

/// Image of `poly` under the ring map determined by `assignment`, landing
/// in `target` with the given cap.
pub fn substitute(
    poly: &MonomialPoly,
    assignment: &BTreeMap<usize, MonomialPoly>,
    target: &Arc<Alphabet>,
    cap: u32,
) -> Result<MonomialPoly, PolyError> {
    let alph = poly.alphabet();
    let mut images: Vec<Option<Terms<Scalar>>> = vec![None; alph.len()];
    for (&g, img) in assignment {
        if img.ring() != poly.ring() {
            return Err(PolyError::RingMismatch(poly.ring(), img.ring()));
        }
        if **img.alphabet() != **target {
            return Err(PolyError::AlphabetMismatch);
        }
        if !img.is_homogeneous_of(alph.degree(g)) {
            return Err(PolyError::DegreeMismatch { generator: alph.gen(g).name.clone(), expected: alph.degree(g) });
        }
        images[g] = Some(img.terms().to_vec());
    }
    for (m, _) in poly.terms() {
        for &(g, _) in m.factors() {
            if images[g as usize].is_none() {
                return Err(PolyError::MissingAssignment(alph.gen(g as usize).name.clone()));
            }
        }
    }
    let mut sub = terms::Substitution::new(&images, target, cap, Scalar::one(poly.ring()));
    Ok(MonomialPoly::from_raw(target, poly.ring(), cap, sub.apply(&poly.terms)))
}

struct Lexer<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Lexer<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn err(&self, msg: impl Into<String>) -> PolyError {
        PolyError::Parse { col: self.pos + 1, msg: msg.into() }
    }

    fn integer(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.s.len() && self.s[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
            while self.pos < self.s.len() {
                let c = self.s[self.pos];
                if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }
}

fn parse_poly(alphabet: &Arc<Alphabet>, ring: ScalarRing, cap: u32, text: &str) -> Result<MonomialPoly, PolyError> {
    let mut lx = Lexer { s: text.as_bytes(), pos: 0 };
    let mut items: Vec<(Monomial, Scalar)> = Vec::new();
    let mut negative = false;
    if lx.peek() == Some(b'-') {
        lx.pos += 1;
        negative = true;
    }
    loop {
        let (m, c) = parse_term(&mut lx, alphabet, ring)?;
        let d = m.degree(alphabet);
        if d > cap {
            return Err(PolyError::AboveCap(d, cap));
        }
        items.push((m, if negative { -&c } else { c }));
        match lx.peek() {
            None => break,
            Some(b'+') => negative = false,
            Some(b'-') => negative = true,
            Some(_) => return Err(lx.err("expected '+' or '-'")),
        }
        lx.pos += 1;
    }
    Ok(MonomialPoly::from_terms(alphabet, ring, cap, items))
}

fn parse_term(lx: &mut Lexer, alphabet: &Alphabet, ring: ScalarRing) -> Result<(Monomial, Scalar), PolyError> {
    let mut coeff = Scalar::one(ring);
    let mut pairs: Vec<(usize, u32)> = Vec::new();
    let mut first = true;
    loop {
        match lx.peek() {
            Some(c) if c.is_ascii_digit() && first => {
                let start = lx.pos;
                let mut text = lx.integer().unwrap();
                if lx.peek() == Some(b'/') {
                    lx.pos += 1;
                    let Some(d) = lx.integer() else { return Err(lx.err("expected denominator")) };
                    text = format!("{text}/{d}");
                }
                coeff = parse_scalar(ring, &text).ok_or(PolyError::Parse {
                    col: start + 1,
                    msg: format!("coefficient {text} is not valid in {ring}"),
                })?;
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = lx.pos;
                let name = lx.ident().unwrap();
                let g = alphabet.find(&name).ok_or(PolyError::Parse {
                    col: start + 1,
                    msg: format!("unknown generator {name}"),
                })?;
                let mut e = 1;
                if lx.peek() == Some(b'^') {
                    lx.pos += 1;
                    let Some(x) = lx.integer().and_then(|x| x.parse().ok()) else { return Err(lx.err("expected exponent")) };
                    e = x;
                }
                pairs.push((g, e));
            }
            _ => return Err(lx.err("expected a coefficient or generator")),
        }
        first = false;
        if lx.peek() == Some(b'*') {
            lx.pos += 1;
        } else {
            break;
        }
    }
    // ordered product, so exterior signs follow the written order
    let mut m = Monomial::one();
    let mut negate = false;
    for (g, e) in pairs {
        if e == 0 {
            continue;
        }
        if alphabet.gen(g).odd && e > 1 {
            return Ok((Monomial::one(), Scalar::zero(ring)));
        }
        match m.mul(&Monomial::power(g, e), alphabet) {
            Some((x, s)) => {
                m = x;
                negate ^= s;
            }
            None => return Ok((Monomial::one(), Scalar::zero(ring))),
        }
    }
    Ok((m, if negate { -&coeff } else { coeff }))
}
