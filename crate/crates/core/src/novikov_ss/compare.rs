//! Comparing sessions and checking convergence against Ext.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::session::Session;
use super::{SsError, Tri};
use crate::cobar_ext::ExtTable;

/// A relabelling of tridegrees applied to the second session of a comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regrading {
    Identity,
    /// `(s, t, w) -> matrix * (s, t, w) + offset`; spots leaving the
    /// nonnegative octant are dropped.
    Linear { matrix: [[i64; 3]; 3], offset: [i64; 3] },
}

impl Regrading {
    pub fn apply(&self, x: Tri) -> Option<Tri> {
        match self {
            Regrading::Identity => Some(x),
            Regrading::Linear { matrix, offset } => {
                let v = [x.s as i64, x.t as i64, x.w as i64];
                let mut out = [0u32; 3];
                for i in 0..3 {
                    let y = (0..3).map(|j| matrix[i][j] * v[j]).sum::<i64>() + offset[i];
                    out[i] = u32::try_from(y).ok()?;
                }
                Some(Tri { s: out[0], t: out[1], w: out[2] })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MismatchKind {
    Dimension { a: usize, b: usize },
    /// Ranks of the known `d_r` leaving the spot.
    Differential { a: usize, b: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub page: u32,
    pub tri: Tri,
    pub kind: MismatchKind,
}

/// Every page and visible spot where the two sessions disagree, after
/// regrading `b`. Pages past a session's last page repeat its last page.
pub fn compare_sessions(a: &Session, b: &Session, regrading: &Regrading) -> Vec<Mismatch> {
    let first = a.first_page().max(b.first_page());
    let last = a.last_page().max(b.last_page());
    let mut out = Vec::new();
    for r in first..=last {
        let ta = a.page_table(r).expect("page in range");
        let tb = b.page_table(r).expect("page in range");
        let regrade = |m: &std::collections::BTreeMap<Tri, usize>| -> std::collections::BTreeMap<Tri, usize> {
            m.iter().filter_map(|(x, d)| regrading.apply(*x).map(|y| (y, *d))).collect()
        };
        let (dims_b, ranks_b) = (regrade(&tb.dims), regrade(&tb.ranks));
        let keys: BTreeSet<Tri> = ta.dims.keys().chain(dims_b.keys()).chain(ta.ranks.keys()).chain(ranks_b.keys()).copied().collect();
        for x in keys {
            let get = |m: &std::collections::BTreeMap<Tri, usize>| m.get(&x).copied().unwrap_or(0);
            let (da, db) = (get(&ta.dims), get(&dims_b));
            if da != db {
                out.push(Mismatch { page: r, tri: x, kind: MismatchKind::Dimension { a: da, b: db } });
            }
            let (ra, rb) = (get(&ta.ranks), get(&ranks_b));
            if ra != rb {
                out.push(Mismatch { page: r, tri: x, kind: MismatchKind::Differential { a: ra, b: rb } });
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub s: u32,
    pub t: u32,
    /// `Σ_w dim E_∞^{s,t,w}` over visible weights.
    pub found: usize,
    /// Length of `Ext^{s,t} / F^{U+1}` is pinned between these bounds; they
    /// agree unless `Ext^{s,t}` has a free part.
    pub expected_min: usize,
    pub expected_max: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// `(s, t)` outside the stable range.
    pub unstable: Vec<(u32, u32)>,
}

impl ConvergenceReport {
    pub fn passes(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }

    pub fn mismatches(&self) -> Vec<&ConvergenceRow> {
        self.rows.iter().filter(|r| !r.ok).collect()
    }

    pub fn row(&self, s: u32, t: u32) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.s == s && r.t == t)
    }
}

/// Compares the `E_∞` columns of an algebraic Novikov session with the
/// p-adic filtration of Ext computed directly.
///
/// With `U = w_max - s`, the visible weights of column `(s, t)` add up to the
/// length of `Ext / F^{U+1} Ext`. Since `p^{U+1} Ext ⊆ F^{U+1} Ext ⊆
/// p^{U+1-W} Ext` for `W` the top weight of `C^{s,t}`, this length is
/// `torsion length + free rank * (U + 1 - δ)` with `0 <= δ <= W` once
/// `U >= W + e`, where `p^e` kills the torsion. Those `(s, t)` are stable.
pub fn convergence_check(session: &Session, ext: &ExtTable) -> Result<ConvergenceReport, SsError> {
    let base = session.base();
    if !base.weighted {
        return Err(SsError::Unsupported { msg: "convergence needs an algebraic Novikov session".into() });
    }
    let w_max = base.caps.w_max.unwrap_or(0);
    let mut report = ConvergenceReport::default();
    let mut nonempty = false;
    for s in 0..=base.caps.s_max.min(ext.s_max) {
        for t in 0..=base.caps.t_max.min(ext.t_max) {
            let shape = ext.shape(s, t);
            let found: usize = (s..=w_max).map(|w| base.e_infinity.get(&Tri { s, t, w }).copied().unwrap_or(0)).sum();
            if shape.is_zero() && found == 0 {
                continue;
            }
            nonempty = true;
            let e_max = shape.torsion.iter().copied().max().unwrap_or(0);
            let top = base.weight_top.get(&(s, t)).copied().unwrap_or(0);
            let open = base.undetermined.iter().any(|(_, x)| x.s == s && x.t == t);
            if w_max < s || open || w_max - s < top + e_max {
                report.unstable.push((s, t));
                continue;
            }
            let u = (w_max - s) as usize;
            let tl = shape.torsion_length() as usize;
            let expected_max = tl + shape.free_rank * (u + 1);
            let expected_min = tl + shape.free_rank * (u + 1 - top as usize);
            let ok = (expected_min..=expected_max).contains(&found);
            report.rows.push(ConvergenceRow { s, t, found, expected_min, expected_max, ok });
        }
    }
    if nonempty && report.rows.is_empty() {
        return Err(SsError::RangeUnstable);
    }
    Ok(report)
}
