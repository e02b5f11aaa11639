//! Coordinate-list sparse matrices with canonical row-major ordering.

use std::collections::BTreeMap;

use super::{LinalgError, Scalar, ScalarRing};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    ring: ScalarRing,
    rows: usize,
    cols: usize,
    /// Sorted by (row, col); no zeros, no duplicates.
    entries: Vec<(usize, usize, Scalar)>,
}

impl SparseMatrix {
    pub fn zero(ring: ScalarRing, rows: usize, cols: usize) -> SparseMatrix {
        SparseMatrix { ring, rows, cols, entries: Vec::new() }
    }

    pub fn identity(ring: ScalarRing, n: usize) -> SparseMatrix {
        let entries = (0..n).map(|i| (i, i, Scalar::one(ring))).collect();
        SparseMatrix { ring, rows: n, cols: n, entries }
    }

    /// Builds a matrix from triplets, summing duplicates and dropping zeros.
    pub fn from_entries<I>(ring: ScalarRing, rows: usize, cols: usize, entries: I) -> Result<SparseMatrix, LinalgError>
    where
        I: IntoIterator<Item = (usize, usize, Scalar)>,
    {
        let mut acc: BTreeMap<(usize, usize), Scalar> = BTreeMap::new();
        for (r, c, x) in entries {
            if r >= rows || c >= cols {
                return Err(LinalgError::DimensionMismatch(format!("entry ({r},{c}) outside {rows}x{cols}")));
            }
            if x.ring() != ring {
                return Err(LinalgError::RingMismatch(ring, x.ring()));
            }
            match acc.get_mut(&(r, c)) {
                Some(y) => *y = &*y + &x,
                None => {
                    acc.insert((r, c), x);
                }
            }
        }
        let entries = acc.into_iter().filter(|(_, x)| !x.is_zero()).map(|((r, c), x)| (r, c, x)).collect();
        Ok(SparseMatrix { ring, rows, cols, entries })
    }

    pub fn from_i64_rows(ring: ScalarRing, rows: &[Vec<i64>]) -> SparseMatrix {
        let ncols = rows.first().map_or(0, |r| r.len());
        let entries = rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &x)| (i, j, Scalar::from_i64(ring, x))));
        SparseMatrix::from_entries(ring, rows.len(), ncols, entries).expect("well-formed dense rows")
    }

    pub fn ring(&self) -> ScalarRing {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[(usize, usize, Scalar)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        match self.entries.binary_search_by(|(i, j, _)| (*i, *j).cmp(&(r, c))) {
            Ok(k) => self.entries[k].2.clone(),
            Err(_) => Scalar::zero(self.ring),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<Scalar>> {
        let mut out = vec![vec![Scalar::zero(self.ring); self.cols]; self.rows];
        for (r, c, x) in &self.entries {
            out[*r][*c] = x.clone();
        }
        out
    }

    pub fn from_dense(ring: ScalarRing, rows: usize, cols: usize, dense: &[Vec<Scalar>]) -> SparseMatrix {
        let entries = dense
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(move |(j, x)| (i, j, x.clone())))
            .collect();
        SparseMatrix { ring, rows, cols, entries }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut entries: Vec<_> = self.entries.iter().map(|(r, c, x)| (*c, *r, x.clone())).collect();
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        SparseMatrix { ring: self.ring, rows: self.cols, cols: self.rows, entries }
    }

    pub fn mul(&self, other: &SparseMatrix) -> Result<SparseMatrix, LinalgError> {
        if self.ring != other.ring {
            return Err(LinalgError::RingMismatch(self.ring, other.ring));
        }
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let other_rows = other.row_slices();
        let mut out = Vec::new();
        for (r, c, x) in &self.entries {
            for (c2, y) in &other_rows[*c] {
                out.push((*r, *c2, x * y));
            }
        }
        SparseMatrix::from_entries(self.ring, self.rows, other.cols, out)
    }

    /// Entries grouped by row, each row sorted by column.
    pub fn row_slices(&self) -> Vec<Vec<(usize, Scalar)>> {
        let mut rows = vec![Vec::new(); self.rows];
        for (r, c, x) in &self.entries {
            rows[*r].push((*c, x.clone()));
        }
        rows
    }

    /// Rows as residues mod p; only meaningful for `F_p` matrices.
    pub(crate) fn fp_rows(&self) -> Vec<Vec<(usize, u32)>> {
        let mut rows = vec![Vec::new(); self.rows];
        for (r, c, x) in &self.entries {
            if let Scalar::Fp { v, .. } = x {
                rows[*r].push((*c, *v));
            }
        }
        rows
    }

    pub(crate) fn from_fp_rows(p: u32, cols: usize, rows: &[Vec<(usize, u32)>]) -> SparseMatrix {
        let entries = rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().filter(|(_, v)| *v != 0).map(move |&(j, v)| (i, j, Scalar::Fp { p, v })))
            .collect();
        SparseMatrix { ring: ScalarRing::Fp(p), rows: rows.len(), cols, entries }
    }

    /// Matrix-vector product on a dense column vector.
    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(self.ring); self.rows];
        for (r, c, x) in &self.entries {
            out[*r] = &out[*r] + &(x * &v[*c]);
        }
        out
    }
}
