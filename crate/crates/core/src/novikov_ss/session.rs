//! Sessions: a machine-computed base plus an event log of user assertions.
//!
//! The state is recomputed from the base and the applied events page by
//! page. On each page a spot carries `Zbar_r ⊇ Bbar_r` inside `E_1` (or
//! inside `E_2` for Ext charts) and a partially known `d_r`. Classes whose
//! differential is unknown survive to the next page. Machine-computed spots
//! of an algebraic Novikov session are fully known.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::filtered::{inv_mod, run_columns, FilteredComplex};
use super::{comodule_is_zero, Caps, Definition, Shift, SsError, Tri};
use crate::chart::{Chart, ChartEdge, ChartNode, NodeRef};
use crate::cobar_ext::{build_cobar, ext};
use crate::comodules::{parse_comodule, render_comodule, unit_comodule, Comodule};
use crate::scalar_linalg::fp::{self, FpRow, FpSubspace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpotInfo {
    /// Dimension on the first page.
    pub dim: usize,
    pub labels: Vec<String>,
    /// Outside the visible caps; kept as a target of visible differentials.
    pub hidden: bool,
}

/// The machine part of a session.
#[derive(Clone, Debug)]
pub struct Base {
    pub title: String,
    pub prime: u32,
    pub motivic_shift: (i32, i32),
    pub first_page: u32,
    pub shift: Shift,
    /// Spots carry a weight (algebraic Novikov charts).
    pub weighted: bool,
    /// `d_r` is known at every visible spot.
    pub machine_total: bool,
    /// Caps with `w_max` resolved.
    pub caps: Caps,
    pub spots: BTreeMap<Tri, SpotInfo>,
    /// Page `r`: spot -> pairs `(E_r basis vector, d_r of it)` in first-page coordinates.
    pub machine: BTreeMap<u32, BTreeMap<Tri, Vec<(FpRow, FpRow)>>>,
    /// Page dimensions from the lattice computation (nonzero entries).
    pub lattice_dims: BTreeMap<u32, BTreeMap<Tri, usize>>,
    pub e_infinity: BTreeMap<Tri, usize>,
    pub last_page: u32,
    /// `(r, spot)` where `E_r` had not reached `E_∞` when precision ran out.
    pub undetermined: Vec<(u32, Tri)>,
    /// Every machine differential vanishes.
    pub collapsed: bool,
    /// Largest I-adic weight of a cochain in `C^{s,t}`.
    pub weight_top: BTreeMap<(u32, u32), u32>,
}

impl Base {
    fn empty(title: String, prime: u32, motivic_shift: (i32, i32), caps: Caps, shift: Shift, first_page: u32) -> Base {
        let weighted = shift == Shift::Algnss;
        Base {
            title,
            prime,
            motivic_shift,
            first_page,
            shift,
            weighted,
            machine_total: weighted,
            caps,
            spots: BTreeMap::new(),
            machine: BTreeMap::new(),
            lattice_dims: BTreeMap::new(),
            e_infinity: BTreeMap::new(),
            last_page: first_page,
            undetermined: Vec::new(),
            collapsed: true,
            weight_top: BTreeMap::new(),
        }
    }

    pub fn visible(&self, x: &Tri) -> bool {
        self.spots.get(x).is_some_and(|s| !s.hidden)
    }

    fn dim(&self, x: &Tri) -> usize {
        self.spots.get(x).map_or(0, |s| s.dim)
    }
}

fn filtered_for(m: &Comodule, def: Definition, caps: Caps) -> Result<FilteredComplex, SsError> {
    let iadic = || -> Result<FilteredComplex, SsError> {
        let c = build_cobar(&m.hopf, m, caps.s_max + 1, caps.t_max)?;
        Ok(FilteredComplex::from_cobar(&c))
    };
    match def {
        Definition::Iadic => iadic(),
        Definition::Cosimplicial => {
            if m.ring().is_fp() || m.relations.is_empty() {
                return iadic();
            }
            match m.cyclic_quotient() {
                Some(cq) if cq.killed == 0 => match cq.p_exponent {
                    None => iadic(),
                    Some(k) => {
                        let free = unit_comodule(&m.hopf).with_shift(m.shift);
                        let c = build_cobar(&m.hopf, &free, caps.s_max + 2, caps.t_max)?;
                        Ok(FilteredComplex::from_cobar(&c).cone(k))
                    }
                },
                _ => Err(SsError::Unsupported {
                    msg: format!("the cosimplicial definition handles free comodules and BP/p^k, not {}", m.name),
                }),
            }
        }
    }
}

fn algnss_base(m: &Comodule, def: Definition, caps: Caps) -> Result<Base, SsError> {
    let p = m.prime();
    let w_max = caps.resolved_w_max(p);
    let rcaps = Caps { w_max: Some(w_max), ..caps };
    let title = format!("algNSS {} ({def})", m.name);
    let mut base = Base::empty(title, p, m.shift, rcaps, Shift::Algnss, 1);
    if caps.t_max > m.cap() {
        return Err(SsError::CapTooSmall { msg: format!("t_max {} exceeds the Hopf algebroid cap {}", caps.t_max, m.cap()) });
    }
    if comodule_is_zero(m) {
        return Ok(base);
    }
    let fc = filtered_for(m, def, caps)?;
    for s in 0..=caps.s_max {
        for t in 0..=caps.t_max {
            base.weight_top.insert((s, t), fc.max_weight(s, t));
        }
    }
    let hidden = |s: u32, u: u32| s > caps.s_max || u + s > w_max;
    let cols = run_columns(&fc, caps.s_max, w_max);
    let last_page = cols.iter().map(|c| c.last_page).max().unwrap_or(1);
    for col in cols {
        let t = col.t;
        let tri = |s: u32, u: u32| Tri { s, t, w: u + s };
        for ((s, u), labels) in col.spots {
            if !labels.is_empty() {
                base.spots.insert(tri(s, u), SpotInfo { dim: labels.len(), labels, hidden: hidden(s, u) });
            }
        }
        for (r, page) in col.pages {
            let entry = base.machine.entry(r).or_default();
            for ((s, u), pairs) in page {
                if pairs.iter().any(|(_, w)| !w.is_empty()) {
                    base.collapsed = false;
                }
                entry.insert(tri(s, u), pairs);
            }
        }
        // a column that settled early repeats its last page
        for r in 1..=last_page {
            let Some((_, dims)) = col.dims.range(..=r).next_back() else { continue };
            let entry = base.lattice_dims.entry(r).or_default();
            entry.extend(dims.iter().filter(|e| *e.1 > 0).map(|(&(s, u), &d)| (tri(s, u), d)));
        }
        base.e_infinity.extend(col.e_infinity.into_iter().filter(|e| e.1 > 0).map(|((s, u), d)| (tri(s, u), d)));
        base.undetermined.extend(col.undetermined.into_iter().map(|(r, s, u)| (r, tri(s, u))));
    }
    base.last_page = base.last_page.max(last_page);
    base.undetermined.sort();
    Ok(base)
}

fn ext_base(m: &Comodule, s_max: u32, t_max: u32) -> Result<Base, SsError> {
    let caps = Caps { s_max, t_max, w_max: Some(0) };
    let mut base = Base::empty(format!("Ext({})", m.name), m.prime(), m.shift, caps, Shift::Adams, 2);
    base.machine_total = false;
    if comodule_is_zero(m) {
        return Ok(base);
    }
    let table = ext(&m.hopf, m, s_max, t_max)?;
    for g in table.groups.values().filter(|g| !g.classes.is_empty()) {
        let labels: Vec<String> = g.classes.iter().map(|c| c.label.clone()).collect();
        base.spots.insert(Tri { s: g.s, t: g.t, w: 0 }, SpotInfo { dim: labels.len(), labels, hidden: false });
    }
    Ok(base)
}

/// What a session was built from; enough to rebuild its base.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Algnss { comodule: String, definition: Definition, caps: Caps },
    /// The Ext chart of a comodule, read as an `E_2` page with Adams-graded differentials.
    Ext { comodule: String, s_max: u32, t_max: u32 },
}

impl Origin {
    pub fn comodule(&self) -> Result<Comodule, SsError> {
        let text = match self {
            Origin::Algnss { comodule, .. } | Origin::Ext { comodule, .. } => comodule,
        };
        parse_comodule(text).map_err(|e| SsError::Format { msg: e.to_string() })
    }

    /// Builds the base, reusing earlier results for the same origin.
    pub fn build(&self) -> Result<Arc<Base>, SsError> {
        static CACHE: OnceLock<Mutex<HashMap<String, Arc<Base>>>> = OnceLock::new();
        let key = serde_json::to_string(self).expect("origins serialize");
        let cache = CACHE.get_or_init(Default::default);
        if let Some(b) = cache.lock().unwrap().get(&key) {
            return Ok(b.clone());
        }
        let base = Arc::new(self.build_uncached()?);
        cache.lock().unwrap().insert(key, base.clone());
        Ok(base)
    }

    pub fn build_uncached(&self) -> Result<Base, SsError> {
        let m = self.comodule()?;
        match self {
            Origin::Algnss { definition, caps, .. } => algnss_base(&m, *definition, *caps),
            Origin::Ext { s_max, t_max, .. } => ext_base(&m, *s_max, *t_max),
        }
    }
}

/// A class on some page: a vector in first-page coordinates at a spot, or a
/// basis element named by its label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRef {
    pub s: u32,
    pub t: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coords: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl ClassRef {
    pub fn labelled(s: u32, t: u32, w: Option<u32>, label: &str) -> ClassRef {
        ClassRef { s, t, w, coords: Vec::new(), label: Some(label.to_string()) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    /// `d_r(source) = target`; no target pins `d_r(source) = 0`.
    AssertDifferential {
        r: u32,
        source: ClassRef,
        #[serde(default)]
        target: Option<ClassRef>,
    },
    RecordProduct { left: ClassRef, right: ClassRef, result: ClassRef },
    ImportDifferential {
        from: String,
        r: u32,
        source: ClassRef,
        #[serde(default)]
        target: Option<ClassRef>,
    },
    Undo,
    Redo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Dep {
    Machine(u32, Tri),
    Fact(usize),
}

#[derive(Clone, Debug)]
struct EdgeData {
    source: Tri,
    v: FpRow,
    target: Tri,
    w: FpRow,
}

#[derive(Clone, Debug)]
struct FactRecord {
    provenance: String,
    text: String,
    /// Index into the applied events, for user facts and products.
    event: Option<usize>,
    edge: Option<EdgeData>,
}

type Row = (FpRow, FpRow, BTreeSet<Dep>);

/// Known part of `d_r` at one spot: rows `(v, d_r v)` in echelon form on `v`
/// with leading coefficient 1.
#[derive(Clone, Debug, Default)]
struct PartialMap {
    rows: BTreeMap<usize, Row>,
}

impl PartialMap {
    fn reduce(&self, p: u32, v: &[(usize, u32)]) -> Row {
        let mut v = v.to_vec();
        let mut w: FpRow = Vec::new();
        let mut deps = BTreeSet::new();
        while let Some(&(c, x)) = v.iter().find(|(c, _)| self.rows.contains_key(c)) {
            let (rv, rw, rd) = &self.rows[&c];
            v = fp::axpy(&v, p - x, rv, p);
            w = fp::axpy(&w, x, rw, p);
            deps.extend(rd.iter().copied());
        }
        (v, w, deps)
    }

    /// `d_r v` if it is determined.
    fn eval(&self, p: u32, v: &[(usize, u32)]) -> Option<(FpRow, BTreeSet<Dep>)> {
        let (left, w, deps) = self.reduce(p, v);
        left.is_empty().then_some((w, deps))
    }

    /// Records `d_r v = w`. Returns whether this was new, or the facts it
    /// contradicts.
    fn insert(&mut self, p: u32, v: &[(usize, u32)], w: &[(usize, u32)], deps: BTreeSet<Dep>, tgt: &FpSubspace) -> Result<bool, BTreeSet<Dep>> {
        let (left, acc, mut d2) = self.reduce(p, v);
        let value = tgt.reduce(&fp::axpy(w, p - 1, &acc, p));
        if left.is_empty() {
            if value.is_empty() {
                return Ok(false);
            }
            d2.extend(deps);
            return Err(d2);
        }
        let inv = inv_mod(left[0].1, p);
        d2.extend(deps);
        self.rows.insert(left[0].0, (fp::scale(&left, inv, p), fp::scale(&value, inv, p), d2));
        Ok(true)
    }

    fn rank(&self, p: u32) -> usize {
        FpSubspace::from_rows(p, self.rows.values().map(|r| r.1.clone()).collect()).dim()
    }
}

fn full_space(p: u32, n: usize) -> FpSubspace {
    FpSubspace::from_rows(p, (0..n).map(|i| vec![(i, 1)]).collect())
}

#[derive(Clone, Debug)]
struct PageData {
    r: u32,
    zbar: BTreeMap<Tri, FpSubspace>,
    bbar: BTreeMap<Tri, FpSubspace>,
    maps: BTreeMap<Tri, PartialMap>,
    /// Non-machine facts on this page.
    facts: Vec<usize>,
}

impl PageData {
    fn bbar(&self, p: u32, x: &Tri) -> FpSubspace {
        self.bbar.get(x).cloned().unwrap_or_else(|| FpSubspace::new(p))
    }

    fn alive(&self, x: &Tri, v: &[(usize, u32)]) -> bool {
        self.zbar.get(x).is_some_and(|z| z.contains(v))
    }

    fn dim(&self, x: &Tri) -> usize {
        self.zbar.get(x).map_or(0, |z| z.dim()) - self.bbar.get(x).map_or(0, |b| b.dim())
    }
}

#[derive(Clone, Debug)]
struct State {
    pages: Vec<PageData>,
    facts: Vec<FactRecord>,
}

struct Failure {
    event: Option<usize>,
    err: SsError,
}

struct Resolved {
    r: u32,
    source: Tri,
    v: FpRow,
    target: Tri,
    w: FpRow,
    provenance: String,
    text: String,
}

struct Product {
    fact: usize,
    a: (Tri, FpRow),
    b: (Tri, FpRow),
    c: (Tri, FpRow),
}

fn render(labels: &[String], v: &[(usize, u32)]) -> String {
    if v.is_empty() {
        return "0".into();
    }
    v.iter()
        .map(|&(i, c)| {
            let l = labels.get(i).map_or("?", |s| s.as_str());
            if c == 1 {
                l.to_string()
            } else {
                format!("{c}*{l}")
            }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

struct Engine<'a> {
    base: &'a Base,
    p: u32,
}

impl<'a> Engine<'a> {
    fn labels(&self, x: &Tri) -> &'a [String] {
        self.base.spots.get(x).map_or(&[], |s| s.labels.as_slice())
    }

    fn describe(&self, x: &Tri, v: &[(usize, u32)]) -> String {
        format!("{} at {x}", render(self.labels(x), v))
    }

    fn resolve(&self, c: &ClassRef, allow_zero: bool) -> Result<(Tri, FpRow), SsError> {
        let w = if self.base.weighted {
            c.w.ok_or_else(|| SsError::IncompatibleTridegree { msg: format!("class at ({}, {}) needs a weight", c.s, c.t) })?
        } else {
            0
        };
        let x = Tri { s: c.s, t: c.t, w };
        let Some(spot) = self.base.spots.get(&x) else {
            if allow_zero && c.coords.iter().all(|&a| a % self.p == 0) && c.label.is_none() {
                return Ok((x, Vec::new()));
            }
            return Err(SsError::UnknownClass { msg: format!("no classes at {x}") });
        };
        let v: FpRow = if !c.coords.is_empty() {
            if c.coords.len() != spot.dim {
                return Err(SsError::UnknownClass {
                    msg: format!("{} coordinates given at {x}, which has dimension {}", c.coords.len(), spot.dim),
                });
            }
            fp::from_dense(&c.coords.iter().map(|a| a % self.p).collect::<Vec<_>>())
        } else if let Some(l) = &c.label {
            let i = spot
                .labels
                .iter()
                .position(|m| m == l)
                .ok_or_else(|| SsError::UnknownClass { msg: format!("no class {l:?} at {x}") })?;
            vec![(i, 1)]
        } else {
            Vec::new()
        };
        if v.is_empty() && !allow_zero {
            return Err(SsError::UnknownClass { msg: format!("the zero class at {x} cannot support a differential") });
        }
        Ok((x, v))
    }

    fn resolve_differential(&self, r: u32, source: &ClassRef, target: &Option<ClassRef>) -> Result<(Tri, FpRow, Tri, FpRow), SsError> {
        if r < self.base.first_page {
            return Err(SsError::IncompatibleTridegree { msg: format!("page {r} precedes the first page {}", self.base.first_page) });
        }
        let (x, v) = self.resolve(source, false)?;
        let y = self.base.shift.target(x, r).expect("r >= 1");
        let w = match target {
            None => Vec::new(),
            Some(c) => {
                let (y2, w) = self.resolve(c, true)?;
                if y2 != y {
                    return Err(SsError::IncompatibleTridegree { msg: format!("d_{r} maps {x} to {y}, not {y2}") });
                }
                w
            }
        };
        Ok((x, v, y, w))
    }

    fn chain(&self, facts: &[FactRecord], deps: &BTreeSet<Dep>) -> Vec<String> {
        deps.iter()
            .map(|d| match d {
                Dep::Machine(r, x) => format!("machine d_{r} at {x}"),
                Dep::Fact(i) => facts[*i].text.clone(),
            })
            .collect()
    }

    fn latest_event(facts: &[FactRecord], deps: &BTreeSet<Dep>) -> Option<usize> {
        deps.iter()
            .filter_map(|d| match d {
                Dep::Fact(i) => facts[*i].event,
                Dep::Machine(..) => None,
            })
            .max()
    }

    fn compute(&self, applied: &[Event]) -> Result<State, Failure> {
        let p = self.p;
        let base = self.base;
        let mut facts: Vec<FactRecord> = Vec::new();
        let mut user: BTreeMap<u32, Vec<(usize, Resolved)>> = BTreeMap::new();
        let mut products: Vec<Product> = Vec::new();
        for (k, e) in applied.iter().enumerate() {
            let fail = |err| Failure { event: Some(k), err };
            match e {
                Event::AssertDifferential { r, source, target } | Event::ImportDifferential { r, source, target, .. } => {
                    let (x, v, y, w) = self.resolve_differential(*r, source, target).map_err(fail)?;
                    let provenance = match e {
                        Event::ImportDifferential { from, .. } => format!("pulled-from:{from}"),
                        _ => "user".to_string(),
                    };
                    let text = format!("{provenance} d_{r}({}) = {}", self.describe(&x, &v), self.describe(&y, &w));
                    user.entry(*r).or_default().push((k, Resolved { r: *r, source: x, v, target: y, w, provenance, text }));
                }
                Event::RecordProduct { left, right, result } => {
                    let a = self.resolve(left, false).map_err(fail)?;
                    let b = self.resolve(right, false).map_err(fail)?;
                    let c = self.resolve(result, true).map_err(fail)?;
                    let sum = Tri { s: a.0.s + b.0.s, t: a.0.t + b.0.t, w: a.0.w + b.0.w };
                    if sum != c.0 {
                        return Err(fail(SsError::IncompatibleTridegree {
                            msg: format!("a product of classes at {} and {} lies at {sum}, not {}", a.0, b.0, c.0),
                        }));
                    }
                    let text = format!(
                        "product {} * {} = {}",
                        self.describe(&a.0, &a.1),
                        self.describe(&b.0, &b.1),
                        self.describe(&c.0, &c.1)
                    );
                    facts.push(FactRecord { provenance: "user".into(), text, event: Some(k), edge: None });
                    products.push(Product { fact: facts.len() - 1, a, b, c });
                }
                Event::Undo | Event::Redo => {}
            }
        }
        let last = base.last_page.max(user.keys().next_back().map_or(0, |r| r + 1));
        let mut page = PageData {
            r: base.first_page,
            zbar: base.spots.iter().map(|(x, s)| (*x, full_space(p, s.dim))).collect(),
            bbar: BTreeMap::new(),
            maps: BTreeMap::new(),
            facts: Vec::new(),
        };
        let mut pages = Vec::new();
        loop {
            let r = page.r;
            self.machine_rows(&mut page).map_err(|err| Failure { event: None, err })?;
            for (k, f) in user.remove(&r).unwrap_or_default() {
                self.user_fact(&mut page, &mut facts, k, f)?;
            }
            self.propagate(&mut page, &mut facts, &products)?;
            if r >= last {
                pages.push(page);
                break;
            }
            let next = self.turn(&page);
            pages.push(page);
            page = next;
        }
        Ok(State { pages, facts })
    }

    fn machine_rows(&self, page: &mut PageData) -> Result<(), SsError> {
        if !self.base.machine_total {
            return Ok(());
        }
        let (p, r) = (self.p, page.r);
        let empty = BTreeMap::new();
        let pairs_at = self.base.machine.get(&r).unwrap_or(&empty);
        for (x, _) in self.base.spots.iter().filter(|(_, s)| !s.hidden) {
            let y = self.base.shift.target(*x, r).unwrap();
            let tb = page.bbar(p, &y);
            let sb = page.bbar(p, x);
            let pairs: Vec<(FpRow, FpRow)> = match pairs_at.get(x) {
                Some(pairs) if r <= self.base.last_page => pairs.clone(),
                _ if r > self.base.last_page => {
                    let basis: Vec<FpRow> = page.zbar.get(x).map(|z| z.basis().map(|v| sb.reduce(v)).collect()).unwrap_or_default();
                    FpSubspace::from_rows(p, basis).basis().map(|v| (v.clone(), Vec::new())).collect()
                }
                _ => Vec::new(),
            };
            let map = page.maps.entry(*x).or_default();
            for (v, w) in pairs {
                let v = sb.reduce(&v);
                let deps = BTreeSet::from([Dep::Machine(r, *x)]);
                if map.insert(p, &v, &w, deps, &tb).is_err() {
                    return Err(SsError::Cobar { msg: format!("machine d_{r} at {x} is inconsistent") });
                }
            }
        }
        Ok(())
    }

    fn user_fact(&self, page: &mut PageData, facts: &mut Vec<FactRecord>, k: usize, f: Resolved) -> Result<(), Failure> {
        let p = self.p;
        let fail = |err| Failure { event: Some(k), err };
        if !page.alive(&f.source, &f.v) {
            return Err(fail(SsError::DeadClass {
                msg: format!("{} does not survive to E_{}", self.describe(&f.source, &f.v), f.r),
            }));
        }
        let sb = page.bbar(p, &f.source);
        let v = sb.reduce(&f.v);
        if v.is_empty() {
            return Err(fail(SsError::DeadClass { msg: format!("{} is already hit", self.describe(&f.source, &f.v)) }));
        }
        let tb = page.bbar(p, &f.target);
        if !f.w.is_empty() {
            if !page.alive(&f.target, &f.w) {
                return Err(fail(SsError::DeadClass {
                    msg: format!("{} does not survive to E_{}", self.describe(&f.target, &f.w), f.r),
                }));
            }
            if tb.reduce(&f.w).is_empty() {
                return Err(fail(SsError::DeadClass { msg: format!("{} is already hit", self.describe(&f.target, &f.w)) }));
            }
        }
        let id = facts.len();
        facts.push(FactRecord {
            provenance: f.provenance.clone(),
            text: f.text.clone(),
            event: Some(k),
            edge: Some(EdgeData { source: f.source, v: v.clone(), target: f.target, w: tb.reduce(&f.w) }),
        });
        let map = page.maps.entry(f.source).or_default();
        match map.insert(p, &v, &f.w, BTreeSet::from([Dep::Fact(id)]), &tb) {
            Ok(_) => {
                page.facts.push(id);
                Ok(())
            }
            Err(deps) => {
                let mut deps = deps;
                deps.insert(Dep::Fact(id));
                Err(fail(SsError::ContradictionDetected { chain: self.chain(facts, &deps) }))
            }
        }
    }

    fn find_product(&self, page: &PageData, products: &[Product], a: (&Tri, &FpRow), b: (&Tri, &FpRow)) -> Option<(FpRow, usize)> {
        let p = self.p;
        products.iter().find_map(|q| {
            let same = |x: &(Tri, FpRow), y: (&Tri, &FpRow)| x.0 == *y.0 && page.bbar(p, y.0).reduce(&x.1) == *y.1;
            (same(&q.a, a) && same(&q.b, b)).then(|| (page.bbar(p, &q.c.0).reduce(&q.c.1), q.fact))
        })
    }

    /// Leibniz propagation over recorded products and `d∘d = 0`, to a fixpoint.
    fn propagate(&self, page: &mut PageData, facts: &mut Vec<FactRecord>, products: &[Product]) -> Result<(), Failure> {
        let p = self.p;
        let r = page.r;
        let shift = self.base.shift;
        loop {
            let mut changed = false;
            for q in products {
                let alive = [&q.a, &q.b, &q.c].iter().all(|(x, v)| page.alive(x, v));
                if !alive {
                    continue;
                }
                let red = |x: &(Tri, FpRow)| page.bbar(p, &x.0).reduce(&x.1);
                let (a, b, c) = (red(&q.a), red(&q.b), red(&q.c));
                if a.is_empty() || b.is_empty() {
                    continue;
                }
                let eval = |x: &Tri, v: &FpRow| page.maps.get(x).map_or(None, |m| m.eval(p, v)).or_else(|| {
                    // a spot without rows is only known on zero
                    v.is_empty().then(|| (Vec::new(), BTreeSet::new()))
                });
                let (Some(da), Some(db)) = (eval(&q.a.0, &a), eval(&q.b.0, &b)) else { continue };
                let (ya, yb, yc) = (shift.target(q.a.0, r).unwrap(), shift.target(q.b.0, r).unwrap(), shift.target(q.c.0, r).unwrap());
                let mut deps: BTreeSet<Dep> = da.1.iter().chain(&db.1).copied().collect();
                deps.insert(Dep::Fact(q.fact));
                let mut value: FpRow = Vec::new();
                if !da.0.is_empty() {
                    let Some((t1, f1)) = self.find_product(page, products, (&ya, &da.0), (&q.b.0, &b)) else { continue };
                    value = fp::axpy(&value, 1, &t1, p);
                    deps.insert(Dep::Fact(f1));
                }
                if !db.0.is_empty() {
                    let Some((t2, f2)) = self.find_product(page, products, (&q.a.0, &a), (&yb, &db.0)) else { continue };
                    let sign = if q.a.0.s % 2 == 0 { 1 } else { p - 1 };
                    value = fp::axpy(&value, sign, &t2, p);
                    deps.insert(Dep::Fact(f2));
                }
                let tb = page.bbar(p, &yc);
                let value = tb.reduce(&value);
                let id = facts.len();
                let text = format!("leibniz d_{r}({}) = {}", self.describe(&q.c.0, &c), self.describe(&yc, &value));
                let event = Self::latest_event(facts, &deps);
                facts.push(FactRecord {
                    provenance: "leibniz".into(),
                    text,
                    event,
                    edge: Some(EdgeData { source: q.c.0, v: c.clone(), target: yc, w: value.clone() }),
                });
                deps.insert(Dep::Fact(id));
                let map = page.maps.entry(q.c.0).or_default();
                match map.insert(p, &c, &value, deps.clone(), &tb) {
                    Ok(true) => {
                        page.facts.push(id);
                        changed = true;
                    }
                    Ok(false) => {
                        facts.pop();
                    }
                    Err(more) => {
                        deps.extend(more);
                        return Err(Failure {
                            event: Self::latest_event(facts, &deps),
                            err: SsError::ContradictionDetected { chain: self.chain(facts, &deps) },
                        });
                    }
                }
            }
            // d_r of a target must vanish
            let mut pins: Vec<(Tri, FpRow, BTreeSet<Dep>)> = Vec::new();
            for (x, m) in &page.maps {
                let y = shift.target(*x, r).unwrap();
                for (_, w, deps) in m.rows.values() {
                    if w.is_empty() {
                        continue;
                    }
                    match page.maps.get(&y).and_then(|my| my.eval(p, w)) {
                        Some((dw, more)) if !dw.is_empty() => {
                            let deps: BTreeSet<Dep> = deps.iter().chain(&more).copied().collect();
                            return Err(Failure {
                                event: Self::latest_event(facts, &deps),
                                err: SsError::ContradictionDetected { chain: self.chain(facts, &deps) },
                            });
                        }
                        Some(_) => {}
                        None => pins.push((y, w.clone(), deps.clone())),
                    }
                }
            }
            for (y, w, deps) in pins {
                let z = shift.target(y, r).unwrap();
                let tb = page.bbar(p, &z);
                if page.maps.entry(y).or_default().insert(p, &w, &[], deps, &tb) == Ok(true) {
                    changed = true;
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn turn(&self, page: &PageData) -> PageData {
        let p = self.p;
        let r = page.r;
        let mut zbar = BTreeMap::new();
        let mut bbar: BTreeMap<Tri, FpSubspace> = page.bbar.clone();
        for (x, z) in &page.zbar {
            let bb = page.bbar(p, x);
            let rows: Vec<&Row> = page.maps.get(x).map(|m| m.rows.values().collect()).unwrap_or_default();
            let mut wech: BTreeMap<usize, (FpRow, FpRow)> = BTreeMap::new();
            let mut kernel: Vec<FpRow> = Vec::new();
            let y = self.base.shift.target(*x, r).unwrap();
            for (v, w, _) in &rows {
                if !w.is_empty() {
                    bbar.entry(y).or_insert_with(|| FpSubspace::new(p)).insert(w);
                }
                let (mut v, mut w) = (v.clone(), w.clone());
                while let Some(&(c, a)) = w.iter().find(|(c, _)| wech.contains_key(c)) {
                    let (ew, ev) = &wech[&c];
                    w = fp::axpy(&w, p - a, ew, p);
                    v = fp::axpy(&v, p - a, ev, p);
                }
                match w.first() {
                    None => kernel.push(v),
                    Some(&(c, a)) => {
                        let inv = inv_mod(a, p);
                        wech.insert(c, (fp::scale(&w, inv, p), fp::scale(&v, inv, p)));
                    }
                }
            }
            let mut known = bb.clone();
            for (v, _, _) in &rows {
                known.insert(v);
            }
            let mut next: Vec<FpRow> = bb.basis().cloned().collect();
            next.extend(kernel);
            for b in z.basis() {
                if known.insert(b) {
                    next.push(b.clone());
                }
            }
            zbar.insert(*x, FpSubspace::from_rows(p, next));
        }
        PageData { r: r + 1, zbar, bbar, maps: BTreeMap::new(), facts: Vec::new() }
    }
}

/// Dimensions and differential ranks of one page at visible spots.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PageTable {
    pub page: u32,
    pub dims: BTreeMap<Tri, usize>,
    /// Rank of the known part of `d_r` at each source.
    pub ranks: BTreeMap<Tri, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpotEntry {
    pub tri: Tri,
    pub dim: usize,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Differential {
    pub source: Tri,
    /// Source class in first-page coordinates.
    pub v: FpRow,
    pub target: Tri,
    pub w: FpRow,
    pub provenance: String,
}

/// One page: its table and the differentials known on it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SsPage {
    pub r: u32,
    pub weight_shift: u32,
    pub table: Vec<SpotEntry>,
    pub differentials: Vec<Differential>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimChange {
    pub page: u32,
    pub s: u32,
    pub t: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<u32>,
    pub before: usize,
    pub after: usize,
}

/// What one event changed, for broadcasting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delta {
    pub seq: usize,
    pub event: Event,
    pub changes: Vec<DimChange>,
    pub last_page: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionFile {
    pub format: String,
    pub version: u32,
    pub id: String,
    pub origin: Origin,
    pub events: Vec<Event>,
}

pub const SESSION_FORMAT: &str = "novikov-session";
pub const SESSION_VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct Session {
    pub id: String,
    pub origin: Origin,
    base: Arc<Base>,
    log: Vec<Event>,
    applied: Vec<Event>,
    redo: Vec<Event>,
    state: Arc<State>,
}

impl Session {
    pub fn new(id: impl Into<String>, origin: Origin) -> Result<Session, SsError> {
        let base = origin.build()?;
        Session::from_base(id, origin, base)
    }

    pub fn from_base(id: impl Into<String>, origin: Origin, base: Arc<Base>) -> Result<Session, SsError> {
        let state = Engine { base: &base, p: base.prime }.compute(&[]).map_err(|f| f.err)?;
        Ok(Session { id: id.into(), origin, base, log: Vec::new(), applied: Vec::new(), redo: Vec::new(), state: Arc::new(state) })
    }

    pub fn base(&self) -> &Base {
        &self.base
    }

    pub fn log(&self) -> &[Event] {
        &self.log
    }

    pub fn first_page(&self) -> u32 {
        self.base.first_page
    }

    pub fn last_page(&self) -> u32 {
        self.state.pages.last().map_or(self.base.first_page, |p| p.r)
    }

    fn engine(&self) -> Engine<'_> {
        Engine { base: &self.base, p: self.base.prime }
    }

    fn page_data(&self, r: u32) -> Result<&PageData, SsError> {
        if r < self.base.first_page {
            return Err(SsError::IncompatibleTridegree { msg: format!("page {r} precedes the first page {}", self.base.first_page) });
        }
        let i = ((r - self.base.first_page) as usize).min(self.state.pages.len() - 1);
        Ok(&self.state.pages[i])
    }

    pub fn apply(&mut self, event: Event) -> Result<Delta, SsError> {
        let before = self.tables();
        match &event {
            Event::Undo => {
                let e = self.applied.pop().ok_or(SsError::NothingTo { what: "undo".into() })?;
                self.redo.push(e);
                self.recompute();
            }
            Event::Redo => {
                let e = self.redo.pop().ok_or(SsError::NothingTo { what: "redo".into() })?;
                self.applied.push(e);
                self.recompute();
            }
            e => {
                let mut applied = self.applied.clone();
                applied.push(e.clone());
                let new = applied.len() - 1;
                let state = self.engine().compute(&applied).map_err(|f| match f.event {
                    Some(k) if k == new => f.err,
                    _ => {
                        let mut chain = vec![format!("new event: {}", event_text(e))];
                        match f.err {
                            SsError::ContradictionDetected { chain: more } => chain.extend(more),
                            other => chain.push(other.to_string()),
                        }
                        SsError::ContradictionDetected { chain }
                    }
                })?;
                self.applied = applied;
                self.redo.clear();
                self.state = Arc::new(state);
            }
        }
        self.log.push(event.clone());
        let after = self.tables();
        Ok(Delta { seq: self.log.len(), event, changes: diff_tables(&before, &after, self.base.weighted), last_page: self.last_page() })
    }

    fn recompute(&mut self) {
        let state = match self.engine().compute(&self.applied) {
            Ok(s) => s,
            Err(_) => unreachable!("a prefix of accepted events is consistent"),
        };
        self.state = Arc::new(state);
    }

    pub fn assert_differential(&mut self, r: u32, source: ClassRef, target: Option<ClassRef>) -> Result<Delta, SsError> {
        self.apply(Event::AssertDifferential { r, source, target })
    }

    pub fn record_product(&mut self, left: ClassRef, right: ClassRef, result: ClassRef) -> Result<Delta, SsError> {
        self.apply(Event::RecordProduct { left, right, result })
    }

    pub fn undo(&mut self) -> Result<Delta, SsError> {
        self.apply(Event::Undo)
    }

    pub fn redo(&mut self) -> Result<Delta, SsError> {
        self.apply(Event::Redo)
    }

    /// `d_r(source)` if it is known on page `r`.
    pub fn differential(&self, r: u32, source: &ClassRef) -> Result<Option<ClassRef>, SsError> {
        let eng = self.engine();
        let page = self.page_data(r)?;
        let (x, v) = eng.resolve(source, false)?;
        if !page.alive(&x, &v) {
            return Err(SsError::DeadClass { msg: format!("{} does not survive to E_{r}", eng.describe(&x, &v)) });
        }
        let v = page.bbar(eng.p, &x).reduce(&v);
        let known = if v.is_empty() {
            Some(Vec::new())
        } else {
            page.maps.get(&x).and_then(|m| m.eval(eng.p, &v)).map(|(w, _)| w)
        };
        let y = self.base.shift.target(x, page.r.max(r)).unwrap();
        Ok(known.map(|w| self.class_ref(&y, &w)))
    }

    /// Copies `d_r(source)` from another session, with provenance `pulled-from:{other.id}`.
    pub fn import_from(&mut self, other: &Session, r: u32, source: ClassRef) -> Result<Delta, SsError> {
        let target = other
            .differential(r, &source)?
            .ok_or_else(|| SsError::UnknownClass { msg: format!("d_{r} of that class is not known in session {}", other.id) })?;
        let target = (!target.coords.iter().all(|&c| c == 0)).then_some(target);
        self.apply(Event::ImportDifferential { from: other.id.clone(), r, source, target })
    }

    pub fn class_ref(&self, x: &Tri, v: &[(usize, u32)]) -> ClassRef {
        let dim = self.base.dim(x);
        ClassRef {
            s: x.s,
            t: x.t,
            w: self.base.weighted.then_some(x.w),
            coords: fp::to_dense(v, dim),
            label: Some(render(self.engine().labels(x), v)),
        }
    }

    pub fn page_table(&self, r: u32) -> Result<PageTable, SsError> {
        let page = self.page_data(r)?;
        let p = self.base.prime;
        let mut t = PageTable { page: r, ..Default::default() };
        for x in self.base.spots.keys().filter(|x| self.base.visible(x)) {
            let d = page.dim(x);
            if d > 0 {
                t.dims.insert(*x, d);
            }
            if page.r == r {
                if let Some(m) = page.maps.get(x) {
                    let k = m.rank(p);
                    if k > 0 {
                        t.ranks.insert(*x, k);
                    }
                }
            }
        }
        Ok(t)
    }

    /// Tables for every computed page.
    pub fn tables(&self) -> Vec<PageTable> {
        self.state.pages.iter().map(|pg| self.page_table(pg.r).expect("computed page")).collect()
    }

    fn basis_labels(&self, page: &PageData, x: &Tri) -> Vec<String> {
        let p = self.base.prime;
        let bb = page.bbar(p, x);
        let Some(z) = page.zbar.get(x) else { return Vec::new() };
        let reduced: Vec<FpRow> = z.basis().map(|v| bb.reduce(v)).collect();
        let labels = self.engine().labels(x);
        FpSubspace::from_rows(p, reduced).pivots().map(|c| labels[c].clone()).collect()
    }

    fn differentials(&self, page: &PageData, r: u32) -> Vec<Differential> {
        let mut out = Vec::new();
        if page.r != r {
            return out;
        }
        if self.base.machine_total {
            if let Some(m) = self.base.machine.get(&r) {
                for (x, pairs) in m.iter().filter(|(x, _)| self.base.visible(x)) {
                    let y = self.base.shift.target(*x, r).unwrap();
                    for (v, w) in pairs.iter().filter(|(_, w)| !w.is_empty()) {
                        out.push(Differential { source: *x, v: v.clone(), target: y, w: w.clone(), provenance: "machine".into() });
                    }
                }
            }
        }
        for &id in &page.facts {
            let f = &self.state.facts[id];
            if let Some(e) = &f.edge {
                out.push(Differential { source: e.source, v: e.v.clone(), target: e.target, w: e.w.clone(), provenance: f.provenance.clone() });
            }
        }
        out
    }

    pub fn page(&self, r: u32) -> Result<SsPage, SsError> {
        let page = self.page_data(r)?;
        let table = self
            .base
            .spots
            .keys()
            .filter(|x| self.base.visible(x))
            .filter_map(|x| {
                let dim = page.dim(x);
                (dim > 0).then(|| SpotEntry { tri: *x, dim, labels: self.basis_labels(page, x) })
            })
            .collect();
        Ok(SsPage { r, weight_shift: self.base.shift.weight_shift(r), table, differentials: self.differentials(page, r) })
    }

    /// Whether every known differential vanishes.
    pub fn collapsed(&self) -> bool {
        self.base.collapsed && self.state.facts.iter().all(|f| f.edge.as_ref().is_none_or(|e| e.w.is_empty()))
    }

    pub fn chart(&self, r: u32) -> Result<Chart, SsError> {
        let pg = self.page(r)?;
        let eng = self.engine();
        let w_of = |x: &Tri| self.base.weighted.then_some(x.w);
        let node_ref = |x: &Tri, v: &[(usize, u32)]| NodeRef { s: x.s, t: x.t, w: w_of(x), label: render(eng.labels(x), v) };
        let mut prov: BTreeMap<Tri, Vec<String>> = BTreeMap::new();
        let edges: Vec<ChartEdge> = pg
            .differentials
            .iter()
            .map(|d| {
                if d.provenance != "machine" {
                    for x in [d.source, d.target] {
                        let e = prov.entry(x).or_default();
                        if !e.contains(&d.provenance) {
                            e.push(d.provenance.clone());
                        }
                    }
                }
                ChartEdge {
                    r,
                    source: node_ref(&d.source, &d.v),
                    target: if d.w.is_empty() { Vec::new() } else { vec![node_ref(&d.target, &d.w)] },
                    provenance: d.provenance.clone(),
                }
            })
            .collect();
        let base_prov = if self.base.weighted { "machine" } else { "ext" };
        let nodes = pg
            .table
            .iter()
            .map(|e| {
                let mut provenance = vec![base_prov.to_string()];
                provenance.extend(prov.remove(&e.tri).unwrap_or_default());
                ChartNode { s: e.tri.s, t: e.tri.t, w: w_of(&e.tri), dim: e.dim, labels: e.labels.clone(), provenance }
            })
            .collect();
        let undetermined = self
            .base
            .undetermined
            .iter()
            .filter(|(_, x)| self.base.visible(x))
            .map(|(q, x)| NodeRef { s: x.s, t: x.t, w: w_of(x), label: format!("open after E_{q}") })
            .collect();
        Ok(Chart {
            title: self.base.title.clone(),
            prime: self.base.prime,
            page: Some(r),
            source: None,
            shift: self.base.motivic_shift,
            collapsed: self.collapsed(),
            nodes,
            edges,
            undetermined,
        })
    }

    pub fn to_file(&self) -> SessionFile {
        SessionFile {
            format: SESSION_FORMAT.into(),
            version: SESSION_VERSION,
            id: self.id.clone(),
            origin: self.origin.clone(),
            events: self.log.clone(),
        }
    }

    pub fn save(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("sessions serialize")
    }

    pub fn from_file(f: SessionFile) -> Result<Session, SsError> {
        if f.format != SESSION_FORMAT {
            return Err(SsError::Format { msg: format!("expected format {SESSION_FORMAT:?}, found {:?}", f.format) });
        }
        if f.version != SESSION_VERSION {
            return Err(SsError::Format { msg: format!("unsupported version {}", f.version) });
        }
        let mut s = Session::new(f.id, f.origin)?;
        for (i, e) in f.events.into_iter().enumerate() {
            s.apply(e).map_err(|err| SsError::Format { msg: format!("event {i} does not replay: {err}") })?;
        }
        Ok(s)
    }

    pub fn load(json: &str) -> Result<Session, SsError> {
        let f: SessionFile = serde_json::from_str(json).map_err(|e| SsError::Format { msg: e.to_string() })?;
        Session::from_file(f)
    }
}

fn event_text(e: &Event) -> String {
    serde_json::to_string(e).expect("events serialize")
}

fn diff_tables(before: &[PageTable], after: &[PageTable], weighted: bool) -> Vec<DimChange> {
    let mut out = Vec::new();
    let empty = PageTable::default();
    let pages: BTreeSet<u32> = before.iter().chain(after).map(|t| t.page).collect();
    for r in pages {
        // a page past the last computed one repeats it
        let find = |ts: &'_ [PageTable]| ts.iter().rposition(|t| t.page <= r);
        let (b, a) = (find(before).map_or(&empty, |i| &before[i]), find(after).map_or(&empty, |i| &after[i]));
        let keys: BTreeSet<&Tri> = b.dims.keys().chain(a.dims.keys()).collect();
        for x in keys {
            let (d0, d1) = (b.dims.get(x).copied().unwrap_or(0), a.dims.get(x).copied().unwrap_or(0));
            if d0 != d1 {
                out.push(DimChange { page: r, s: x.s, t: x.t, w: weighted.then_some(x.w), before: d0, after: d1 });
            }
        }
    }
    out
}

pub fn algnss(m: &Comodule, definition: Definition, caps: Caps) -> Result<Session, SsError> {
    let origin = Origin::Algnss { comodule: render_comodule(m), definition, caps };
    Session::new("session", origin)
}

/// The I-adic algebraic Novikov spectral sequence of `M`.
pub fn algnss_iadic(m: &Comodule, caps: Caps) -> Result<Session, SsError> {
    algnss(m, Definition::Iadic, caps)
}

/// The spectral sequence of the cosimplicial cobar object of `M`.
pub fn algnss_cosimplicial(m: &Comodule, caps: Caps) -> Result<Session, SsError> {
    algnss(m, Definition::Cosimplicial, caps)
}

/// A session on the Ext chart of `M`, starting at `E_2`.
pub fn ext_session(m: &Comodule, s_max: u32, t_max: u32) -> Result<Session, SsError> {
    Session::new("session", Origin::Ext { comodule: render_comodule(m), s_max, t_max })
}
