//! Versioned text dump of a built Hopf algebroid.
//!
//! ```text
//! novikov-hopf 1
//! kind bp
//! prime 2
//! cap 12
//! base v1:2 v2:6
//! hopf t1:2 t2:6
//! eta_R v1 = v1 + 2*t1
//! delta t1 = t1' + t1''
//! ```
//!
//! Exterior generators carry a trailing `:odd` (`tau0:1:odd`). Coproducts
//! are written in the 2-fold tensor alphabet (`x'` left factor, `x''` right
//! factor, coefficients on the left). Blank lines and `#` comments are
//! ignored.

use std::fmt::Write;
use std::sync::Arc;

use super::{is_prime, tensor_alphabet, HopfAlgebroidData, HopfError, HopfKind};
use crate::graded_poly::{Alphabet, Generator, MonomialPoly};
use crate::scalar_linalg::ScalarRing;

const HEADER: &str = "novikov-hopf 1";

fn gen_list(gens: &[Generator]) -> String {
    gens.iter()
        .map(|g| if g.odd { format!("{}:{}:odd", g.name, g.degree) } else { format!("{}:{}", g.name, g.degree) })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn dump(h: &HopfAlgebroidData) -> String {
    let mut s = String::new();
    let nb = h.nb();
    writeln!(s, "{HEADER}").unwrap();
    writeln!(s, "kind {}", h.kind.tag()).unwrap();
    writeln!(s, "prime {}", h.prime).unwrap();
    writeln!(s, "cap {}", h.cap).unwrap();
    writeln!(s, "base {}", gen_list(h.base.gens())).unwrap();
    writeln!(s, "hopf {}", gen_list(&h.gamma.gens()[nb..])).unwrap();
    for (v, x) in h.eta_r.iter().enumerate() {
        writeln!(s, "eta_R {} = {}", h.base.gen(v).name, x).unwrap();
    }
    for (j, x) in h.delta.iter().enumerate() {
        writeln!(s, "delta {} = {}", h.hopf_generator(j).name, x).unwrap();
    }
    s
}

fn parse_gens(line: usize, text: &str) -> Result<Vec<Generator>, HopfError> {
    let err = |msg: String| HopfError::Format { line, msg };
    text.split_whitespace()
        .map(|item| {
            let parts: Vec<&str> = item.split(':').collect();
            let (name, degree, odd) = match parts.as_slice() {
                [n, d] => (n, d, false),
                [n, d, "odd"] => (n, d, true),
                _ => return Err(err(format!("bad generator {item}"))),
            };
            let degree = degree.parse().map_err(|_| err(format!("bad degree in {item}")))?;
            Ok(Generator { name: name.to_string(), degree, odd })
        })
        .collect()
}

pub fn load(text: &str) -> Result<HopfAlgebroidData, HopfError> {
    let mut kind = None;
    let mut prime = None;
    let mut cap = None;
    let mut base: Option<Vec<Generator>> = None;
    let mut hopf: Option<Vec<Generator>> = None;
    let mut eta: Vec<(usize, String, String)> = Vec::new();
    let mut delta: Vec<(usize, String, String)> = Vec::new();
    let mut saw_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if !saw_header {
            if l != HEADER {
                return Err(HopfError::Format { line, msg: format!("expected header '{HEADER}'") });
            }
            saw_header = true;
            continue;
        }
        let (key, rest) = l.split_once(' ').unwrap_or((l, ""));
        let rest = rest.trim();
        let err = |msg: &str| HopfError::Format { line, msg: msg.to_string() };
        match key {
            "kind" => {
                kind = Some(match rest {
                    "bp" => HopfKind::BrownPeterson,
                    "P" => HopfKind::QuotientP,
                    "steenrod" => HopfKind::DualSteenrod,
                    _ => return Err(err("unknown kind")),
                })
            }
            "prime" => prime = Some(rest.parse::<u32>().map_err(|_| err("bad prime"))?),
            "cap" => cap = Some(rest.parse::<u32>().map_err(|_| err("bad cap"))?),
            "base" => base = Some(parse_gens(line, rest)?),
            "hopf" => hopf = Some(parse_gens(line, rest)?),
            "eta_R" | "delta" => {
                let (name, poly) = rest.split_once('=').ok_or_else(|| err("expected '='"))?;
                let entry = (line, name.trim().to_string(), poly.trim().to_string());
                if key == "eta_R" {
                    eta.push(entry)
                } else {
                    delta.push(entry)
                }
            }
            _ => return Err(err("unknown key")),
        }
    }
    let missing = |what: &str| HopfError::Format { line: 0, msg: format!("missing {what}") };
    let kind = kind.ok_or_else(|| missing("kind"))?;
    let prime = prime.ok_or_else(|| missing("prime"))?;
    if !is_prime(prime) {
        return Err(HopfError::NotPrime(prime));
    }
    let cap = cap.ok_or_else(|| missing("cap"))?;
    let base_gens = base.unwrap_or_default();
    let hopf_gens = hopf.ok_or_else(|| missing("hopf"))?;
    let ring = if kind == HopfKind::BrownPeterson { ScalarRing::Zp(prime) } else { ScalarRing::Fp(prime) };
    let dup = |e| HopfError::Format { line: 0, msg: format!("{e}") };
    let base = Arc::new(Alphabet::new(base_gens.clone()).map_err(dup)?);
    let mut all = base_gens.clone();
    all.extend(hopf_gens.iter().cloned());
    let gamma = Arc::new(Alphabet::new(all).map_err(dup)?);
    let gamma2 = Arc::new(tensor_alphabet(&base, &gamma, 2));

    let read = |entries: &[(usize, String, String)],
                names: &[Generator],
                alph: &Arc<Alphabet>,
                what: &str|
     -> Result<Vec<MonomialPoly>, HopfError> {
        let mut out = Vec::new();
        for g in names {
            let (line, _, poly) = entries
                .iter()
                .find(|(_, n, _)| *n == g.name)
                .ok_or_else(|| HopfError::Format { line: 0, msg: format!("missing {what} {}", g.name) })?;
            let p = MonomialPoly::parse(alph, ring, cap, poly)
                .map_err(|e| HopfError::Format { line: *line, msg: e.to_string() })?;
            if !p.is_homogeneous_of(g.degree) {
                return Err(HopfError::Format { line: *line, msg: format!("{what} {} is not homogeneous", g.name) });
            }
            if ring.is_zp() && p.terms().iter().any(|(_, c)| super::scalar_to_int(c).is_none()) {
                return Err(HopfError::NotIntegral(g.name.clone()));
            }
            out.push(p);
        }
        Ok(out)
    };
    let eta_r = read(&eta, &base_gens, &gamma, "eta_R")?;
    let delta = read(&delta, &hopf_gens, &gamma2, "delta")?;
    Ok(HopfAlgebroidData::from_parts(kind, prime, cap, ring, base, gamma, eta_r, delta))
}
