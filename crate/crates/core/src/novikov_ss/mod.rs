//! The algebraic Novikov spectral sequence and interactive sessions on top
//! of it.
//!
//! Tridegrees are `(s, t, w)` with `s` the cobar degree, `t` the internal
//! degree and `w = u + s`, where `u` is the I-adic weight of a cochain. With
//! this grading `d_r` maps `(s, t, w)` to `(s + 1, t, w + r + 1)`; each page
//! records its weight shift. The unit of `BP_*` sits at `(0, 0, 0)` and
//! `α_1 = [t_1]` at `(1, 2, 1)`.
//!
//! Two definitions are offered. [`algnss_iadic`] filters the cobar complex
//! of `M` by powers of `I = (p, v_1, ...)`. [`algnss_cosimplicial`] filters a
//! resolution of `M` by free comodules: for `M = BP_*/p^k` it is the
//! mapping cone of `p^k` on the cobar complex of `BP_*`, filtered by the
//! weights of the two copies. For a free `M` the two agree.

mod filtered;
pub mod compare;
pub mod session;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cobar_ext::CobarError;
use crate::comodules::Comodule;

pub use compare::{compare_sessions, convergence_check, ConvergenceReport, ConvergenceRow, Mismatch, MismatchKind, Regrading};
pub use filtered::{FilteredComplex, FilteredCell};
pub use session::{
    algnss, algnss_cosimplicial, algnss_iadic, ext_session, Base, ClassRef, Delta, DimChange, Event, Origin, PageTable, Session,
    SessionFile, SsPage,
};

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum SsError {
    #[error("{msg}")]
    Cobar { msg: String },
    #[error("caps too small: {msg}")]
    CapTooSmall { msg: String },
    #[error("unsupported: {msg}")]
    Unsupported { msg: String },
    #[error("incompatible tridegree: {msg}")]
    IncompatibleTridegree { msg: String },
    #[error("dead class: {msg}")]
    DeadClass { msg: String },
    #[error("unknown class: {msg}")]
    UnknownClass { msg: String },
    #[error("contradiction detected: {}", chain.join(" / "))]
    ContradictionDetected { chain: Vec<String> },
    #[error("no (s, t) is in the stable range of the caps")]
    RangeUnstable,
    #[error("nothing to {what}")]
    NothingTo { what: String },
    #[error("session file: {msg}")]
    Format { msg: String },
}

impl From<CobarError> for SsError {
    fn from(e: CobarError) -> SsError {
        match e {
            CobarError::CapTooSmall { .. } => SsError::CapTooSmall { msg: e.to_string() },
            CobarError::Unsupported(msg) => SsError::Unsupported { msg },
            e => SsError::Cobar { msg: e.to_string() },
        }
    }
}

/// Bounds of a computation. Spots with `s <= s_max`, `t <= t_max` and
/// `w <= w_max` are visible; `w_max` defaults from `s_max` and `t_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Caps {
    pub s_max: u32,
    pub t_max: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_max: Option<u32>,
}

impl Caps {
    pub fn new(s_max: u32, t_max: u32) -> Caps {
        Caps { s_max, t_max, w_max: None }
    }

    /// `s_max + t_max / |v_1| + 4`: room for every `v`-power in range and a
    /// few powers of `p` above it.
    pub fn resolved_w_max(&self, p: u32) -> u32 {
        self.w_max.unwrap_or(self.s_max + self.t_max / (2 * (p - 1)) + 4)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Definition {
    Iadic,
    Cosimplicial,
}

impl fmt::Display for Definition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Definition::Iadic => "iadic",
            Definition::Cosimplicial => "cosimplicial",
        })
    }
}

impl FromStr for Definition {
    type Err = String;
    fn from_str(s: &str) -> Result<Definition, String> {
        match s {
            "iadic" => Ok(Definition::Iadic),
            "cosimplicial" => Ok(Definition::Cosimplicial),
            _ => Err(format!("unknown definition {s:?} (expected iadic or cosimplicial)")),
        }
    }
}

/// A spot of a chart. Ext charts have no weight and use `w = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tri {
    pub s: u32,
    pub t: u32,
    pub w: u32,
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.s, self.t, self.w)
    }
}

/// Where `d_r` lands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shift {
    /// `(s, t, w) -> (s + 1, t, w + r + 1)`.
    Algnss,
    /// `(s, t) -> (s + r, t + r - 1)`.
    Adams,
}

impl Shift {
    pub fn target(&self, x: Tri, r: u32) -> Option<Tri> {
        match self {
            Shift::Algnss => Some(Tri { s: x.s + 1, t: x.t, w: x.w + r + 1 }),
            Shift::Adams => (r >= 1).then_some(Tri { s: x.s + r, t: x.t + r - 1, w: 0 }),
        }
    }

    /// The change in `w` made by `d_r`.
    pub fn weight_shift(&self, r: u32) -> u32 {
        match self {
            Shift::Algnss => r + 1,
            Shift::Adams => 0,
        }
    }
}

pub(crate) fn comodule_is_zero(m: &Comodule) -> bool {
    m.generators.is_empty()
}
