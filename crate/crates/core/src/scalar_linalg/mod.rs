//! Exact linear algebra over F_p and over the p-local integers Z_(p).

pub mod fp;
pub mod lattice;
pub mod local;
mod scalar;
mod sparse;

use num_rational::BigRational;
use thiserror::Error;

pub use local::{LocalRing, ModPn, ZpLocal};
pub use scalar::{int_valuation, parse_scalar, Scalar, ScalarRing};
pub use sparse::SparseMatrix;

use fp::FpRow;
use local::{local_snf, Track};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("ring mismatch: expected {0}, found {1}")]
    RingMismatch(ScalarRing, ScalarRing),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0} is not p-local for p = {1}")]
    NotPLocal(String, u32),
    #[error("composition of differentials is not zero")]
    CompositionNotZero,
}

fn require_fp(m: &SparseMatrix) -> Result<u32, LinalgError> {
    match m.ring() {
        ScalarRing::Fp(p) => Ok(p),
        r => Err(LinalgError::RingMismatch(ScalarRing::Fp(r.prime().unwrap_or(0)), r)),
    }
}

fn require_zp(m: &SparseMatrix) -> Result<u32, LinalgError> {
    match m.ring() {
        ScalarRing::Zp(p) => Ok(p),
        r => Err(LinalgError::RingMismatch(ScalarRing::Zp(r.prime().unwrap_or(0)), r)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: SparseMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

/// Reduced row echelon form over F_p. Zero rows are kept at the bottom so
/// the output has the shape of the input.
pub fn rref(m: &SparseMatrix) -> Result<Rref, LinalgError> {
    let p = require_fp(m)?;
    let (mut rows, pivots) = fp::echelon(p, m.fp_rows());
    fp::back_substitute(p, &mut rows, &pivots);
    let rank = rows.len();
    rows.resize(m.rows(), Vec::new());
    Ok(Rref { matrix: SparseMatrix::from_fp_rows(p, m.cols(), &rows), pivots, rank })
}

/// Basis of `{x : m x = 0}` over F_p, one vector per free column.
pub fn kernel_basis(m: &SparseMatrix) -> Result<Vec<Vec<Scalar>>, LinalgError> {
    let p = require_fp(m)?;
    let ker = fp::kernel(p, m.cols(), m.fp_rows());
    Ok(ker
        .iter()
        .map(|v| fp::to_dense(v, m.cols()).into_iter().map(|x| Scalar::Fp { p, v: x }).collect())
        .collect())
}

/// Smith form `U * A * V = diag` over Z_(p).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    /// Elementary divisors `p^k`, in divisibility order, one per row/column
    /// pair up to `min(rows, cols)`; entries past the rank are zero.
    pub diag: Vec<Scalar>,
    pub u: SparseMatrix,
    pub v: SparseMatrix,
    pub rank: usize,
}

impl SmithForm {
    /// Exponents `k` of the divisors `p^k` (rank many).
    pub fn exponents(&self) -> Vec<u32> {
        self.diag.iter().filter_map(|d| d.valuation()).collect()
    }

    /// Exponents of the torsion summands `Z/p^k` of the cokernel.
    pub fn torsion(&self) -> Vec<u32> {
        self.exponents().into_iter().filter(|k| *k > 0).collect()
    }
}

fn to_dense_q(m: &SparseMatrix) -> Vec<Vec<BigRational>> {
    let mut out = vec![vec![BigRational::from_integer(0.into()); m.cols()]; m.rows()];
    for (r, c, x) in m.entries() {
        out[*r][*c] = x.to_rational();
    }
    out
}

fn from_dense_q(p: u32, d: &[Vec<BigRational>], rows: usize, cols: usize) -> SparseMatrix {
    let ring = ScalarRing::Zp(p);
    let dense: Vec<Vec<Scalar>> = d.iter().map(|r| r.iter().map(|q| Scalar::Zp { p, q: q.clone() }).collect()).collect();
    SparseMatrix::from_dense(ring, rows, cols, &dense)
}

pub fn smith_normal_form(m: &SparseMatrix) -> Result<SmithForm, LinalgError> {
    let p = require_zp(m)?;
    let r = ZpLocal { p };
    let snf = local_snf(&r, to_dense_q(m), m.rows(), m.cols(), Track { u: true, u_inv: false, v: true, v_inv: false });
    let ring = ScalarRing::Zp(p);
    let mut diag: Vec<Scalar> = snf.vals.iter().map(|&k| Scalar::from_i64(ring, p as i64).pow(k)).collect();
    diag.resize(m.rows().min(m.cols()), Scalar::zero(ring));
    Ok(SmithForm {
        diag,
        u: from_dense_q(p, snf.u.as_ref().unwrap(), m.rows(), m.rows()),
        v: from_dense_q(p, snf.v.as_ref().unwrap(), m.cols(), m.cols()),
        rank: snf.vals.len(),
    })
}

/// A finitely generated module `Z_(p)^free ⊕ ⊕ Z/p^k` (or an F_p vector
/// space, in which case `torsion` is empty).
#[derive(Clone, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct ModuleShape {
    pub free_rank: usize,
    pub torsion: Vec<u32>,
}

impl ModuleShape {
    /// Composition length of the torsion part.
    pub fn torsion_length(&self) -> u32 {
        self.torsion.iter().sum()
    }

    /// Dimension of the module tensored with F_p.
    pub fn mod_p_dim(&self) -> usize {
        self.free_rank + self.torsion.len()
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

/// `ker(dout) / im(din)` at one spot of a complex.
pub fn cohomology_at(din: &SparseMatrix, dout: &SparseMatrix) -> Result<ModuleShape, LinalgError> {
    if din.ring() != dout.ring() {
        return Err(LinalgError::RingMismatch(din.ring(), dout.ring()));
    }
    if din.rows() != dout.cols() {
        return Err(LinalgError::DimensionMismatch(format!(
            "din has {} rows but dout has {} columns",
            din.rows(),
            dout.cols()
        )));
    }
    if !dout.mul(din)?.is_zero() {
        return Err(LinalgError::CompositionNotZero);
    }
    match din.ring() {
        ScalarRing::Fp(p) => {
            let n = din.rows();
            let rk_out = fp::rank(p, dout.fp_rows());
            let rk_in = fp::rank(p, din.transpose().fp_rows());
            Ok(ModuleShape { free_rank: n - rk_out - rk_in, torsion: Vec::new() })
        }
        ScalarRing::Zp(p) => Ok(zp_cohomology(p, din, dout).shape),
        r => Err(LinalgError::RingMismatch(ScalarRing::Zp(0), r)),
    }
}

/// Cohomology over Z_(p) together with cocycle generators.
#[derive(Clone, Debug)]
pub struct ZpCohomology {
    pub shape: ModuleShape,
    /// Generators paired with their order exponent (`None` for free ones).
    /// Torsion generators come first, in divisibility order.
    pub generators: Vec<(Option<u32>, Vec<BigRational>)>,
}

pub fn zp_cohomology(p: u32, din: &SparseMatrix, dout: &SparseMatrix) -> ZpCohomology {
    let r = ZpLocal { p };
    let n = din.rows();
    let out = local_snf(&r, to_dense_q(dout), dout.rows(), n, Track { u: false, u_inv: false, v: true, v_inv: true });
    let rk = out.vals.len();
    let v = out.v.unwrap();
    let v_inv = out.v_inv.unwrap();
    let kdim = n - rk;
    // coordinates of the image of din inside the kernel basis V[:, rk..]
    let din_d = to_dense_q(din);
    let coords: Vec<Vec<BigRational>> = (rk..n)
        .map(|i| (0..din.cols()).map(|j| (0..n).fold(r.zero(), |acc, k| acc + &v_inv[i][k] * &din_d[k][j])).collect())
        .collect();
    let inner = local_snf(&r, coords, kdim, din.cols(), Track { u: false, u_inv: true, v: false, v_inv: false });
    let u_inv = inner.u_inv.unwrap();
    let mut generators = Vec::new();
    let mut torsion = Vec::new();
    for i in 0..kdim {
        let order = match inner.vals.get(i) {
            Some(0) => continue,
            Some(&k) => {
                torsion.push(k);
                Some(k)
            }
            None => None,
        };
        let vec: Vec<BigRational> =
            (0..n).map(|row| (0..kdim).fold(r.zero(), |acc, c| acc + &v[row][rk + c] * &u_inv[c][i])).collect();
        generators.push((order, vec));
    }
    ZpCohomology { shape: ModuleShape { free_rank: kdim - inner.vals.len(), torsion }, generators }
}

/// Cohomology over F_p with canonical representatives: each representative
/// is in normal form modulo the image (zero at every pivot of the image).
pub fn fp_cohomology_reps(p: u32, n: usize, din_cols: &[FpRow], dout_rows: Vec<FpRow>) -> Vec<FpRow> {
    let image = fp::FpSubspace::from_rows(p, din_cols.to_vec());
    let ker = fp::kernel(p, n, dout_rows);
    let reduced: Vec<FpRow> = ker.iter().map(|k| image.reduce(k)).filter(|v| !v.is_empty()).collect();
    let comp = fp::FpSubspace::from_rows(p, reduced);
    comp.basis().cloned().collect()
}
