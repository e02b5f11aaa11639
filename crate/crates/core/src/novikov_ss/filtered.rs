//! The I-adic filtration of a cobar complex and its spectral sequence.
//!
//! A cell is a quotient `Z_(p)^n / R`, and all lattice work happens in
//! `(Z/p^N)^n` with `N` the largest exponent that fits in 62 bits. The
//! lattice `Z_r^u = F^u ∩ d^{-1} F^{u+r}` contains `p^{u+r} C`, so it is
//! determined modulo `p^N` whenever `u + r <= N`.
//!
//! Pages are subquotients of `E_1`:
//! `E_r^u = Z_r^u / (Z_{r-1}^{u+1} + d Z_{r-1}^{u-r+1})`, and the image of
//! `Z_{r-1}^{u+1}` in `E_1` is zero, so only the image of `d` matters.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::cobar_ext::{CobarBasis, CobarComplex, CoefficientModel};
use crate::comodules::Comodule;
use crate::graded_poly::Monomial;
use crate::scalar_linalg::fp::{self, FpRow, FpSubspace};
use crate::scalar_linalg::lattice::{kernel, Lattice};
use crate::scalar_linalg::{LocalRing, ModPn, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisName {
    /// Base monomial with `v_i` written `q_i`; empty for 1.
    pub q: String,
    /// Hopf part `[..|..]` and generator name.
    pub rest: String,
    /// Basis element of the shifted copy in a cone.
    pub suspended: bool,
}

impl BasisName {
    /// Name of `p^k` times this basis element in the associated graded.
    pub fn label(&self, k: u32) -> String {
        let mut parts = Vec::new();
        match k {
            0 => {}
            1 => parts.push("q0".to_string()),
            _ => parts.push(format!("q0^{k}")),
        }
        if !self.q.is_empty() {
            parts.push(self.q.clone());
        }
        let mut s = parts.join(" ");
        s.push_str(&self.rest);
        if s.is_empty() {
            s.push('1');
        }
        if self.suspended {
            format!("σ({s})")
        } else {
            s
        }
    }
}

fn basis_name(m: &Comodule, b: &CobarBasis) -> BasisName {
    let h = &m.hopf;
    let (nb, nh) = (h.nb(), h.nh());
    let base = Monomial::from_pairs(b.mono.factors().iter().filter(|f| (f.0 as usize) < nb).map(|&(g, e)| (g as usize, e)));
    let q = if base.is_one() { String::new() } else { base.render(&h.base).replace('v', "q").replace('*', " ") };
    let mut copies: BTreeMap<usize, Vec<(usize, u32)>> = BTreeMap::new();
    for &(g, e) in b.mono.factors() {
        let g = g as usize;
        if g >= nb {
            let c = (g - nb) / nh;
            copies.entry(c).or_default().push((g - c * nh, e));
        }
    }
    let mut rest = String::new();
    if !copies.is_empty() {
        let parts: Vec<String> =
            copies.values().map(|f| Monomial::from_pairs(f.iter().copied()).render(&h.gamma)).collect();
        rest = format!("[{}]", parts.join("|"));
    }
    if m.generators.len() > 1 {
        rest.push_str(&format!(" {}", m.generators[b.gen].name));
    }
    BasisName { q, rest, suspended: false }
}

#[derive(Clone, Debug)]
pub struct FilteredCell {
    pub n: usize,
    /// I-adic weight of each basis element.
    pub weights: Vec<u32>,
    pub names: Vec<BasisName>,
    /// Generators of `R` as dense vectors mod `p^N`.
    pub relations: Vec<Vec<u64>>,
    /// `d` as dense rows over the next cell; `None` on the top row.
    pub d: Option<Vec<Vec<u64>>>,
}

/// A cobar complex with its I-adic filtration, reduced mod `p^N`.
#[derive(Clone, Debug)]
pub struct FilteredComplex {
    pub ring: ModPn,
    /// `d` is known for `s <= s_max`; cells exist for `s <= s_max + 1`.
    pub s_max: u32,
    pub t_max: u32,
    /// Cell `j` sits in cohomological degree `j - offset`.
    pub offset: u32,
    pub cells: BTreeMap<(u32, u32), FilteredCell>,
}

fn to_u64(r: &ModPn, c: &Scalar) -> u64 {
    match c {
        Scalar::Fp { v, .. } => *v as u64,
        _ => r.from_rational(&c.to_rational()),
    }
}

impl FilteredComplex {
    pub fn from_cobar(c: &CobarComplex) -> FilteredComplex {
        let p = c.model.prime();
        let ring = ModPn::new(p, ModPn::max_exponent(p));
        let killed_by = match c.model {
            CoefficientModel::Field { .. } => Some(1),
            CoefficientModel::Truncated { k, .. } => Some(k),
            CoefficientModel::Local { .. } => None,
        };
        let mut cells = BTreeMap::new();
        for (&(s, t), cell) in &c.cells {
            let n = cell.dim();
            let mut relations: Vec<Vec<u64>> = cell
                .relations
                .iter()
                .map(|v| {
                    let mut x = vec![0u64; n];
                    for (i, a) in v {
                        x[*i] = ring.add(&x[*i], &to_u64(&ring, a));
                    }
                    x
                })
                .collect();
            if let Some(k) = killed_by {
                for i in 0..n {
                    let mut x = vec![0u64; n];
                    x[i] = ring.p_power(k);
                    relations.push(x);
                }
            }
            let d = (s <= c.s_max).then(|| {
                let next = c.cells[&(s + 1, t)].dim();
                let mut rows = vec![vec![0u64; n]; next];
                for (j, col) in cell.d.iter().enumerate() {
                    for (i, a) in col {
                        rows[*i][j] = ring.add(&rows[*i][j], &to_u64(&ring, a));
                    }
                }
                rows
            });
            let names = cell.basis.iter().map(|b| basis_name(&c.comodule, b)).collect();
            cells.insert((s, t), FilteredCell { n, weights: cell.weights.clone(), names, relations, d });
        }
        FilteredComplex { ring, s_max: c.s_max, t_max: c.t_max, offset: 0, cells }
    }

    /// The mapping cone of multiplication by `p^k`. Cell `j` holds
    /// `Cone^{j-1} = X^j ⊕ X^{j-1}` with `d(x, y) = (-dx, p^k x + dy)`, so the
    /// cone starts in degree -1 and `offset` is 1. Both summands keep their
    /// weights.
    pub fn cone(&self, k: u32) -> FilteredComplex {
        assert_eq!(self.offset, 0);
        let r = self.ring;
        let pk = r.p_power(k);
        let empty = FilteredCell { n: 0, weights: Vec::new(), names: Vec::new(), relations: Vec::new(), d: None };
        let mut cells = BTreeMap::new();
        for (&(j, t), x) in &self.cells {
            let y = if j == 0 { &empty } else { &self.cells[&(j - 1, t)] };
            let (n1, n0) = (x.n, y.n);
            let n = n1 + n0;
            let mut weights = x.weights.clone();
            weights.extend(&y.weights);
            let mut names: Vec<BasisName> = x.names.iter().map(|b| BasisName { suspended: true, ..b.clone() }).collect();
            names.extend(y.names.iter().cloned());
            let mut relations: Vec<Vec<u64>> =
                x.relations.iter().map(|v| v.iter().copied().chain(std::iter::repeat_n(0, n0)).collect()).collect();
            relations.extend(y.relations.iter().map(|v| std::iter::repeat_n(0, n1).chain(v.iter().copied()).collect()));
            let d = x.d.as_ref().map(|dx| {
                let x2 = self.cells[&(j + 1, t)].n;
                let mut rows = vec![vec![0u64; n]; x2 + n1];
                for i in 0..x2 {
                    for c in 0..n1 {
                        rows[i][c] = r.neg(dx[i][c]);
                    }
                }
                for i in 0..n1 {
                    rows[x2 + i][i] = pk;
                }
                if let Some(dy) = &y.d {
                    for i in 0..n1 {
                        for c in 0..n0 {
                            rows[x2 + i][n1 + c] = dy[i][c];
                        }
                    }
                }
                rows
            });
            cells.insert((j, t), FilteredCell { n, weights, names, relations, d });
        }
        FilteredComplex { ring: r, s_max: self.s_max, t_max: self.t_max, offset: 1, cells }
    }

    /// Whether `d` never lowers weight: every entry `c` of `d(b)` at basis
    /// element `i` has `v_p(c) + w_i >= w_b` (entries in `R` excepted).
    pub fn weight_monotone(&self) -> bool {
        let r = &self.ring;
        self.cells.iter().all(|(&(s, t), cell)| {
            let Some(d) = &cell.d else { return true };
            let next = &self.cells[&(s + 1, t)];
            (0..cell.n).all(|j| {
                (0..next.n).all(|i| match r.valuation(&d[i][j]) {
                    None => true,
                    Some(v) => v + next.weights[i] >= cell.weights[j],
                })
            })
        })
    }

    /// Top weight in degree `s`.
    pub fn max_weight(&self, s: u32, t: u32) -> u32 {
        self.cells.get(&(s + self.offset, t)).and_then(|c| c.weights.iter().max().copied()).unwrap_or(0)
    }
}

/// `E_1` at one `(s, t, u)`: the quotient `A / B` with `A = Z_1^u`,
/// `B = F^{u+1} + d F^u`, read in the adapted basis of `A` mod p.
struct E1Spot {
    a: Lattice<u64>,
    b: FpSubspace,
    /// Columns of `A`'s adapted basis that form the `E_1` basis.
    free: Vec<usize>,
    labels: Vec<String>,
}

impl E1Spot {
    fn coords(&self, r: &ModPn, x: &[u64]) -> FpRow {
        let c = self.a.coords(r, x).expect("vector lies in Z_1");
        let p = r.p as u64;
        let row: FpRow = c.iter().enumerate().filter_map(|(i, v)| ((v % p) != 0).then_some((i, (v % p) as u32))).collect();
        let red = self.b.reduce(&row);
        red.iter()
            .map(|&(i, v)| (self.free.binary_search(&i).expect("reduced vector has no pivot entries"), v))
            .collect()
    }
}

type Key = (u32, u32, Option<u32>);

/// One internal degree `t` of a filtered complex.
struct Column<'a> {
    fc: &'a FilteredComplex,
    t: u32,
    r: ModPn,
    zmemo: HashMap<Key, Lattice<u64>>,
    spots: HashMap<(u32, u32), E1Spot>,
}

impl<'a> Column<'a> {
    fn cell(&self, s: u32) -> &'a FilteredCell {
        &self.fc.cells[&(s, self.t)]
    }

    fn filt_gens(&self, s: u32, u: u32) -> Vec<Vec<u64>> {
        let c = self.cell(s);
        let mut gens: Vec<Vec<u64>> = (0..c.n)
            .filter_map(|i| {
                let e = u.saturating_sub(c.weights[i]);
                (e < self.r.n).then(|| {
                    let mut x = vec![0u64; c.n];
                    x[i] = self.r.p_power(e);
                    x
                })
            })
            .collect();
        gens.extend(c.relations.iter().cloned());
        gens
    }

    fn rel_gens(&self, s: u32) -> Vec<Vec<u64>> {
        self.cell(s).relations.clone()
    }

    fn apply_d(&self, s: u32, x: &[u64]) -> Vec<u64> {
        let d = self.cell(s).d.as_ref().expect("differential below the top row");
        d.iter()
            .map(|row| row.iter().zip(x).fold(0u64, |acc, (a, b)| self.r.add(&acc, &self.r.mul(a, b))))
            .collect()
    }

    /// `F^lo ∩ d^{-1}(F^hi)`, or `F^lo ∩ d^{-1}(R)` when `hi` is `None`.
    fn z(&mut self, s: u32, lo: u32, hi: Option<u32>) -> Lattice<u64> {
        let key = (s, lo, hi);
        if let Some(l) = self.zmemo.get(&key) {
            return l.clone();
        }
        let r = self.r;
        let n = self.cell(s).n;
        let src = self.filt_gens(s, lo);
        let tgt = match hi {
            Some(h) => self.filt_gens(s + 1, h),
            None => self.rel_gens(s + 1),
        };
        let m = self.cell(s + 1).n;
        let images: Vec<Vec<u64>> = src.iter().map(|g| self.apply_d(s, g)).collect();
        // kernel of [d B | -T]
        let cols = src.len() + tgt.len();
        let a: Vec<Vec<u64>> = (0..m)
            .map(|i| images.iter().map(|g| g[i]).chain(tgt.iter().map(|g| r.neg(g[i]))).collect())
            .collect();
        let ker = if m == 0 { (0..cols).map(|k| unit(cols, k)).collect() } else { kernel(&r, a, m, cols) };
        let gens: Vec<Vec<u64>> = ker
            .iter()
            .map(|c| {
                let mut x = vec![0u64; n];
                for (j, g) in src.iter().enumerate() {
                    if c[j] != 0 {
                        for i in 0..n {
                            x[i] = r.add(&x[i], &r.mul(&g[i], &c[j]));
                        }
                    }
                }
                x
            })
            .collect();
        let l = Lattice::from_gens(&r, n, &gens);
        self.zmemo.insert(key, l.clone());
        l
    }

    fn spot(&mut self, s: u32, u: u32) -> &E1Spot {
        if !self.spots.contains_key(&(s, u)) {
            let r = self.r;
            let a = self.z(s, u, Some(u + 1));
            let mut bgens = self.filt_gens(s, u + 1);
            if s > 0 {
                for g in self.filt_gens(s - 1, u) {
                    bgens.push(self.apply_d(s - 1, &g));
                }
            }
            let p = r.p as u64;
            let rows: Vec<FpRow> = bgens
                .iter()
                .map(|g| {
                    let c = a.coords(&r, g).expect("B lies in Z_1");
                    c.iter().enumerate().filter_map(|(i, v)| ((v % p) != 0).then_some((i, (v % p) as u32))).collect()
                })
                .collect();
            let b = FpSubspace::from_rows(r.p, rows);
            let pivots: Vec<usize> = b.pivots().collect();
            let free: Vec<usize> = (0..a.rank()).filter(|i| pivots.binary_search(i).is_err()).collect();
            let cell = self.cell(s);
            let labels = free.iter().map(|&j| leading_label(&r, cell, &a.basis[j], u)).collect();
            self.spots.insert((s, u), E1Spot { a, b, free, labels });
        }
        &self.spots[&(s, u)]
    }

    fn coords(&mut self, s: u32, u: u32, x: &[u64]) -> FpRow {
        let r = self.r;
        self.spot(s, u).coords(&r, x)
    }

    /// Images in `E_1^{s,u}` of `d` applied to the generators of a lattice in `C^{s-1}`.
    fn boundary_rows(&mut self, s: u32, u: u32, l: &Lattice<u64>) -> Vec<FpRow> {
        let imgs: Vec<Vec<u64>> = l.basis.iter().map(|g| self.apply_d(s - 1, g)).collect();
        imgs.iter().map(|x| self.coords(s, u, x)).filter(|v| !v.is_empty()).collect()
    }

    /// `Bbar_r` at `(s, u)`: the image of `d Z_{r-1}^{u-r+1}` in `E_1`.
    fn bbar(&mut self, s: u32, u: u32, r: u32) -> FpSubspace {
        if s == 0 || r == 1 {
            return FpSubspace::new(self.r.p);
        }
        let lo = (u + 1).saturating_sub(r);
        let l = self.z(s - 1, lo, Some(u));
        FpSubspace::from_rows(self.r.p, self.boundary_rows(s, u, &l))
    }

    fn zbar(&mut self, s: u32, u: u32, r: u32) -> FpSubspace {
        let l = self.z(s, u, Some(u + r));
        let rows: Vec<FpRow> = l.basis.iter().map(|g| self.coords(s, u, g)).collect();
        FpSubspace::from_rows(self.r.p, rows)
    }

    fn e_infinity(&mut self, s: u32, u: u32) -> usize {
        let r = self.r;
        let zl = self.z(s, u, None);
        let zrows: Vec<FpRow> = zl.basis.iter().map(|g| self.coords(s, u, g)).collect();
        let zbar = FpSubspace::from_rows(r.p, zrows);
        let n = self.cell(s).n;
        let mut bg = self.rel_gens(s);
        if s > 0 {
            let m = self.cell(s - 1).n;
            for k in 0..m {
                bg.push(self.apply_d(s - 1, &unit(m, k)));
            }
        }
        let f = Lattice::from_gens(&r, n, &self.filt_gens(s, u));
        let b = Lattice::from_gens(&r, n, &bg).intersect(&r, &f);
        let brows: Vec<FpRow> = b.basis.iter().map(|g| self.coords(s, u, g)).collect();
        let bbar = FpSubspace::from_rows(r.p, brows);
        zbar.dim() - bbar.dim()
    }

    /// The `E_r` basis at `(s, u)` and `d_r` on it, in `E_1` coordinates.
    fn differential(&mut self, s: u32, u: u32, r: u32) -> Vec<(FpRow, FpRow)> {
        let p = self.r.p;
        let l = self.z(s, u, Some(u + r));
        let src_b = self.bbar(s, u, r);
        let tgt_b = {
            // d Z_{r-1}^{u+1} in C^{s+1}
            let lo = u + 1;
            if r == 1 {
                FpSubspace::new(p)
            } else {
                let lt = self.z(s, lo, Some(u + r));
                FpSubspace::from_rows(p, self.boundary_rows(s + 1, u + r, &lt))
            }
        };
        let mut pairs: Vec<(FpRow, FpRow)> = Vec::new();
        for g in &l.basis {
            let e = self.coords(s, u, g);
            let dg = self.apply_d(s, g);
            let de = self.coords(s + 1, u + r, &dg);
            pairs.push((e, de));
        }
        let basis = pair_echelon(p, &src_b, pairs);
        basis.into_iter().map(|(v, w)| (v, tgt_b.reduce(&w))).collect()
    }
}

fn unit(n: usize, k: usize) -> Vec<u64> {
    let mut x = vec![0u64; n];
    x[k] = 1;
    x
}

fn leading_label(r: &ModPn, cell: &FilteredCell, z: &[u64], u: u32) -> String {
    let mut best: Option<(u32, usize, u32)> = None;
    for (i, c) in z.iter().enumerate() {
        if let Some(v) = r.valuation(c) {
            let w = v + cell.weights[i];
            if best.is_none_or(|b| w < b.0) {
                best = Some((w, i, v));
            }
            if w == u {
                break;
            }
        }
    }
    match best {
        Some((_, i, v)) => cell.names[i].label(v),
        None => "0".into(),
    }
}

/// Echelon form of pairs `(v, w)` on the `v` part, modulo `base` on `v`.
/// Returns the pairs whose `v` parts are a basis of `span(v) / base`.
pub(crate) fn pair_echelon(p: u32, base: &FpSubspace, pairs: Vec<(FpRow, FpRow)>) -> Vec<(FpRow, FpRow)> {
    let mut rows: BTreeMap<usize, (FpRow, FpRow)> = BTreeMap::new();
    for (v, w) in pairs {
        let (mut v, mut w) = (base.reduce(&v), w);
        loop {
            let Some(&(c, x)) = v.iter().find(|(c, _)| rows.contains_key(c)) else { break };
            let (rv, rw) = &rows[&c];
            v = fp::axpy(&v, p - x, rv, p);
            w = fp::axpy(&w, p - x, rw, p);
        }
        let Some(&(c, lead)) = v.first() else { continue };
        let inv = inv_mod(lead, p);
        let (v, w) = (fp::scale(&v, inv, p), fp::scale(&w, inv, p));
        // keep the stored rows fully reduced at the new pivot
        for (rv, rw) in rows.values_mut() {
            let f = fp::get(rv, c);
            if f != 0 {
                *rv = fp::axpy(rv, p - f, &v, p);
                *rw = fp::axpy(rw, p - f, &w, p);
            }
        }
        rows.insert(c, (v, w));
    }
    rows.into_values().collect()
}

/// Output of the machine computation at one `t`.
#[derive(Clone, Debug, Default)]
pub struct ColumnResult {
    pub t: u32,
    /// `E_1` labels per `(s, u)`, including hidden target spots.
    pub spots: BTreeMap<(u32, u32), Vec<String>>,
    /// Per page `r`: `(s, u) -> (E_r basis, d_r images)` at visible spots.
    pub pages: BTreeMap<u32, BTreeMap<(u32, u32), Vec<(FpRow, FpRow)>>>,
    /// Lattice dimensions of `E_r` at visible spots.
    pub dims: BTreeMap<u32, BTreeMap<(u32, u32), usize>>,
    pub e_infinity: BTreeMap<(u32, u32), usize>,
    /// Spots whose pages did not reach `E_∞` within the precision bound.
    pub undetermined: Vec<(u32, u32, u32)>,
    pub last_page: u32,
}

/// Visible spots are `s <= s_max` and `u + s <= w_max`.
pub fn run_columns(fc: &FilteredComplex, s_max: u32, w_max: u32) -> Vec<ColumnResult> {
    let ts: Vec<u32> = (0..=fc.t_max).collect();
    ts.par_iter().map(|&t| run_column(fc, t, s_max, w_max)).collect()
}

fn run_column(fc: &FilteredComplex, t: u32, s_max: u32, w_max: u32) -> ColumnResult {
    let mut out = ColumnResult { t, ..Default::default() };
    let off = fc.offset;
    // cell indices from here on
    let visible: Vec<(u32, u32)> =
        (0..=s_max.min(w_max)).flat_map(|s| (0..=w_max - s).map(move |u| (s + off, u))).collect();
    if (0..=s_max + 1 + off).all(|s| fc.cells.get(&(s, t)).is_none_or(|c| c.n == 0)) {
        return out;
    }
    let mut col = Column { fc, t, r: fc.ring, zmemo: HashMap::new(), spots: HashMap::new() };
    for &(s, u) in &visible {
        let e = col.e_infinity(s, u);
        out.e_infinity.insert((s, u), e);
    }
    let bound = fc.ring.n.saturating_sub(w_max + 2);
    let mut r = 1;
    loop {
        let mut dims = BTreeMap::new();
        let mut page = BTreeMap::new();
        for &(s, u) in &visible {
            let zb = col.zbar(s, u, r);
            let bb = col.bbar(s, u, r);
            let dim = zb.dim() - bb.dim();
            dims.insert((s, u), dim);
            if dim > 0 {
                page.insert((s, u), col.differential(s, u, r));
            }
        }
        let done = visible.iter().all(|k| dims[k] == out.e_infinity[k]);
        out.dims.insert(r, dims);
        out.pages.insert(r, page);
        out.last_page = r;
        if done {
            break;
        }
        if r >= bound {
            for &(s, u) in &visible {
                if out.dims[&r][&(s, u)] != out.e_infinity[&(s, u)] {
                    out.undetermined.push((r, s, u));
                }
            }
            break;
        }
        // keep the memo to lattices the next page can use
        col.zmemo.retain(|k, _| match k.2 {
            Some(h) => h >= k.1 + r,
            None => true,
        });
        r += 1;
    }
    for (&(s, u), spot) in &col.spots {
        if s >= off {
            out.spots.insert((s - off, u), spot.labels.clone());
        }
    }
    let shift = |m: BTreeMap<(u32, u32), usize>| m.into_iter().map(|((s, u), d)| ((s - off, u), d)).collect();
    out.e_infinity = shift(std::mem::take(&mut out.e_infinity));
    out.dims = std::mem::take(&mut out.dims).into_iter().map(|(r, m)| (r, shift(m))).collect();
    out.pages = std::mem::take(&mut out.pages)
        .into_iter()
        .map(|(r, m)| (r, m.into_iter().map(|((s, u), v)| ((s - off, u), v)).collect()))
        .collect();
    for x in &mut out.undetermined {
        x.1 -= off;
    }
    out
}

pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    let (mut r, mut b, mut e) = (1u64, a as u64 % p as u64, p as u64 - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}
