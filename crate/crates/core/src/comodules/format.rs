//! Comodule definition files.
//!
//! ```text
//! novikov-comodule 1
//! name (2,v1)
//! hopf bp 2 20
//! shift 0 -4
//! gen gp 0
//! gen gv 2
//! rel v1*gp - 2*gv
//! coact gp = gp
//! coact gv = gv - t1*gp
//! ```
//!
//! `hopf` names a preset (`bp`, `P` or `steenrod`), its prime and cap.
//! Relations are linear combinations of generators with coefficients in the
//! base ring; coaction lines give `ψ(g)` as a combination of generators with
//! coefficients in `Γ` (left coefficients). Every generator needs a `coact`
//! line. `shift` is optional and defaults to `0 0`. Blank lines and `#`
//! comments are ignored.

use std::fmt::Write;
use std::sync::Arc;

use super::{check_comodule, Comodule, ComoduleError, ComoduleGenerator};
use crate::bp_hopf::{cached, HopfAlgebroidData, HopfKind};
use crate::graded_poly::{Alphabet, Generator, Monomial, MonomialPoly, PolyError};
use crate::scalar_linalg::Scalar;

const HEADER: &str = "novikov-comodule 1";

/// Builds the Hopf algebroid named by a `hopf` line.
pub type HopfResolver<'a> = &'a dyn Fn(HopfKind, u32, u32) -> Result<Arc<HopfAlgebroidData>, ComoduleError>;

fn with_generators(prefix: &Alphabet, gens: &[ComoduleGenerator]) -> Result<Arc<Alphabet>, PolyError> {
    let mut all = prefix.gens().to_vec();
    all.extend(gens.iter().map(|g| Generator::even(g.name.clone(), g.degree)));
    Alphabet::new(all).map(Arc::new)
}

fn render_combination(prefix: &Alphabet, gens: &[ComoduleGenerator], items: &[(usize, MonomialPoly)]) -> String {
    let alph = with_generators(prefix, gens).expect("generator names are distinct from the ring's");
    let np = prefix.len();
    let mut terms: Vec<(Monomial, Scalar)> = Vec::new();
    let mut ring = None;
    for (g, a) in items {
        ring = Some(a.ring());
        for (m, c) in a.terms() {
            let mono = Monomial::from_pairs(m.factors().iter().map(|&(x, e)| (x as usize, e)).chain([(np + g, 1)]));
            terms.push((mono, c.clone()));
        }
    }
    match ring {
        Some(r) => MonomialPoly::from_terms(&alph, r, u32::MAX, terms).to_string(),
        None => "0".into(),
    }
}

pub fn render_comodule(m: &Comodule) -> String {
    let h = &m.hopf;
    let mut s = String::new();
    writeln!(s, "{HEADER}").unwrap();
    writeln!(s, "name {}", m.name).unwrap();
    writeln!(s, "hopf {} {} {}", h.kind.tag(), h.prime, h.cap).unwrap();
    writeln!(s, "shift {} {}", m.shift.0, m.shift.1).unwrap();
    for g in &m.generators {
        writeln!(s, "gen {} {}", g.name, g.degree).unwrap();
    }
    for rel in &m.relations {
        writeln!(s, "rel {}", render_combination(&h.base, &m.generators, rel)).unwrap();
    }
    for (g, row) in m.generators.iter().zip(&m.coaction) {
        writeln!(s, "coact {} = {}", g.name, render_combination(&h.gamma, &m.generators, row)).unwrap();
    }
    s
}

/// Splits a polynomial in `prefix + generators` into a combination of
/// generators; every term must contain exactly one generator to the first
/// power.
fn split_combination(
    poly: &MonomialPoly,
    prefix: &Arc<Alphabet>,
    ngens: usize,
    cap: u32,
) -> Result<Vec<(usize, MonomialPoly)>, String> {
    let np = prefix.len();
    let mut parts: Vec<Vec<(Monomial, Scalar)>> = vec![Vec::new(); ngens];
    for (m, c) in poly.terms() {
        let gens: Vec<(u32, u32)> = m.factors().iter().copied().filter(|&(g, _)| g as usize >= np).collect();
        match gens.as_slice() {
            [(g, 1)] => {
                let rest = Monomial::from_pairs(m.factors().iter().filter(|&&(x, _)| (x as usize) < np).map(|&(x, e)| (x as usize, e)));
                parts[*g as usize - np].push((rest, c.clone()));
            }
            _ => return Err(format!("term {} is not linear in the generators", m.render(poly.alphabet()))),
        }
    }
    Ok(parts
        .into_iter()
        .enumerate()
        .filter(|(_, t)| !t.is_empty())
        .map(|(g, t)| (g, MonomialPoly::from_terms(prefix, poly.ring(), cap, t)))
        .collect())
}

fn default_resolver(kind: HopfKind, p: u32, cap: u32) -> Result<Arc<HopfAlgebroidData>, ComoduleError> {
    Ok(cached(kind, p, cap)?)
}

/// Parses and axiom-checks a comodule definition.
pub fn parse_comodule(text: &str) -> Result<Comodule, ComoduleError> {
    parse_comodule_with(text, &default_resolver)
}

pub fn parse_comodule_with(text: &str, resolve: HopfResolver) -> Result<Comodule, ComoduleError> {
    let mut name = None;
    let mut hopf: Option<Arc<HopfAlgebroidData>> = None;
    let mut shift = (0, 0);
    let mut gens: Vec<ComoduleGenerator> = Vec::new();
    // (line, column of the text, text)
    let mut rels: Vec<(usize, usize, String)> = Vec::new();
    let mut coacts: Vec<(usize, usize, String, String)> = Vec::new();
    let mut saw_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let indent = raw.len() - raw.trim_start().len();
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let syntax = |col: usize, msg: &str| ComoduleError::SyntaxError { line, col, msg: msg.to_string() };
        if !saw_header {
            if l != HEADER {
                return Err(syntax(indent + 1, &format!("expected '{HEADER}'")));
            }
            saw_header = true;
            continue;
        }
        let (key, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        let rest_col = indent + 1 + l.len() - rest.len() + (rest.len() - rest.trim_start().len());
        let rest = rest.trim();
        let words: Vec<&str> = rest.split_whitespace().collect();
        match key {
            "name" => name = Some(rest.to_string()),
            "hopf" => {
                let [kind, p, cap] = words.as_slice() else {
                    return Err(syntax(rest_col, "expected 'hopf <kind> <prime> <cap>'"));
                };
                let kind: HopfKind = kind.parse().map_err(|e: String| syntax(rest_col, &e))?;
                let p = p.parse().map_err(|_| syntax(rest_col, "bad prime"))?;
                let cap = cap.parse().map_err(|_| syntax(rest_col, "bad cap"))?;
                hopf = Some(resolve(kind, p, cap)?);
            }
            "shift" => {
                let [a, b] = words.as_slice() else { return Err(syntax(rest_col, "expected 'shift <a> <b>'")) };
                shift = (
                    a.parse().map_err(|_| syntax(rest_col, "bad shift"))?,
                    b.parse().map_err(|_| syntax(rest_col, "bad shift"))?,
                );
            }
            "gen" => {
                let [n, d] = words.as_slice() else { return Err(syntax(rest_col, "expected 'gen <name> <degree>'")) };
                let degree: i64 = d.parse().map_err(|_| syntax(rest_col, "bad degree"))?;
                if degree < 0 {
                    return Err(ComoduleError::DegreeError { line, msg: format!("negative degree {degree}") });
                }
                if let Some(h) = &hopf {
                    if h.kind == HopfKind::BrownPeterson && degree % 2 == 1 {
                        return Err(ComoduleError::DegreeError { line, msg: format!("generator {n} has odd degree {degree}") });
                    }
                }
                gens.push(ComoduleGenerator { name: n.to_string(), degree: degree as u32 });
            }
            "rel" => rels.push((line, rest_col, rest.to_string())),
            "coact" => {
                let Some((g, poly)) = rest.split_once('=') else { return Err(syntax(rest_col, "expected '='")) };
                let poly_col = rest_col + g.len() + 1 + (poly.len() - poly.trim_start().len());
                coacts.push((line, poly_col, g.trim().to_string(), poly.trim().to_string()));
            }
            _ => return Err(syntax(indent + 1, &format!("unknown key '{key}'"))),
        }
    }
    let missing = |what: &str| ComoduleError::SyntaxError { line: text.lines().count().max(1), col: 1, msg: format!("missing {what}") };
    if !saw_header {
        return Err(missing("header"));
    }
    let h = hopf.ok_or_else(|| missing("hopf line"))?;
    let (ring, cap) = (h.ring, h.cap);
    let clash = |e: PolyError| ComoduleError::SyntaxError { line: 0, col: 1, msg: e.to_string() };
    let base_alph = with_generators(&h.base, &gens).map_err(clash)?;
    let gamma_alph = with_generators(&h.gamma, &gens).map_err(clash)?;
    let parse = |line: usize, col: usize, alph: &Arc<Alphabet>, prefix: &Arc<Alphabet>, s: &str| {
        let poly = MonomialPoly::parse(alph, ring, u32::MAX, s).map_err(|e| match e {
            PolyError::Parse { col: c, msg } => ComoduleError::SyntaxError { line, col: col + c - 1, msg },
            other => ComoduleError::SyntaxError { line, col, msg: other.to_string() },
        })?;
        split_combination(&poly, prefix, gens.len(), cap).map_err(|msg| ComoduleError::SyntaxError { line, col, msg })
    };
    let mut relations = Vec::new();
    for (line, col, s) in &rels {
        relations.push(parse(*line, *col, &base_alph, &h.base, s)?);
    }
    let mut coaction: Vec<Option<Vec<(usize, MonomialPoly)>>> = vec![None; gens.len()];
    for (line, col, g, s) in &coacts {
        let idx = gens.iter().position(|x| x.name == *g).ok_or_else(|| ComoduleError::SyntaxError {
            line: *line,
            col: 1,
            msg: format!("unknown generator {g}"),
        })?;
        coaction[idx] = Some(parse(*line, *col, &gamma_alph, &h.gamma, s)?);
    }
    let coaction = coaction
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            c.ok_or_else(|| ComoduleError::AxiomViolation { axiom: "counit".into(), generator: gens[i].name.clone() })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let m = Comodule {
        name: name.unwrap_or_else(|| "M".into()),
        hopf: h,
        shift,
        generators: gens,
        relations,
        coaction,
    };
    check_comodule(&m)?;
    Ok(m)
}
