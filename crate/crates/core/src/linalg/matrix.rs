use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::field::Field;

/// A dense matrix of row vectors over an exact field.
///
/// Entries are stored row-major in a single buffer. A matrix is
/// *canonical* when it is in reduced row echelon form with unit pivots and
/// no zero rows; two canonical matrices have equal row spaces exactly when
/// their entry buffers are equal, which is what makes them usable as flat
/// keys.
#[derive(Clone, PartialEq, Eq)]
pub struct RowMatrix<F: Field> {
    field: F,
    ncols: usize,
    entries: Vec<F::Elem>,
}

impl<F: Field> RowMatrix<F> {
    pub fn new(field: F, ncols: usize, rows: Vec<Vec<F::Elem>>) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows.len() * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::RowLength {
                    expected: ncols,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(RowMatrix { field, ncols, entries })
    }

    /// Convenience constructor from small integers, reduced into the field.
    pub fn from_i64_rows(field: F, ncols: usize, rows: &[&[i64]]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| field.from_i64(v)).collect())
            .collect();
        Self::new(field, ncols, rows)
    }

    pub fn empty(field: F, ncols: usize) -> Self {
        RowMatrix {
            field,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.entries.len().checked_div(self.ncols).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn row(&self, i: usize) -> &[F::Elem] {
        &self.entries[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[F::Elem]> {
        // chunks_exact panics on a zero chunk size
        self.entries.chunks_exact(self.ncols.max(1))
    }

    /// The row-major entry buffer. For canonical matrices this is the
    /// flat's identity key.
    pub fn entries(&self) -> &[F::Elem] {
        &self.entries
    }

    /// Reduced row echelon form with zero rows deleted.
    pub fn rref(&self) -> Self {
        let f = &self.field;
        let n = self.ncols;
        let mut rows: Vec<Vec<F::Elem>> = self.rows().map(|r| r.to_vec()).collect();
        let mut rank = 0;
        for col in 0..n {
            let Some(piv) = (rank..rows.len()).find(|&r| !f.is_zero(&rows[r][col])) else {
                continue;
            };
            rows.swap(rank, piv);
            let inv = f.inv(&rows[rank][col]);
            for v in rows[rank].iter_mut() {
                *v = f.mul(v, &inv);
            }
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r == rank || f.is_zero(&row[col]) {
                    continue;
                }
                let c = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x = f.sub_mul(x, &c, p);
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rows.truncate(rank);
        RowMatrix {
            field: self.field.clone(),
            ncols: n,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rank(&self) -> usize {
        if self.is_canonical() {
            self.nrows()
        } else {
            self.rref().nrows()
        }
    }

    /// Whether the matrix is already in reduced row echelon form with unit
    /// pivots and no zero rows.
    pub fn is_canonical(&self) -> bool {
        let f = &self.field;
        let mut last_pivot: Option<usize> = None;
        for (i, row) in self.rows().enumerate() {
            let Some(p) = row.iter().position(|x| !f.is_zero(x)) else {
                return false;
            };
            if !f.is_one(&row[p]) || last_pivot.is_some_and(|lp| p <= lp) {
                return false;
            }
            for (j, other) in self.rows().enumerate() {
                if j != i && !f.is_zero(&other[p]) {
                    return false;
                }
            }
            last_pivot = Some(p);
        }
        true
    }

    fn pivot_columns(&self) -> Vec<usize> {
        let f = &self.field;
        self.rows()
            .map(|r| {
                r.iter()
                    .position(|x| !f.is_zero(x))
                    .expect("canonical matrix has no zero rows")
            })
            .collect()
    }

    /// Remainder of `v` after clearing this (canonical) matrix's pivot
    /// columns; zero exactly when `v` lies in the row space.
    pub fn reduce(&self, v: &[F::Elem]) -> Vec<F::Elem> {
        debug_assert_eq!(v.len(), self.ncols);
        let f = &self.field;
        let mut out = v.to_vec();
        for row in self.rows() {
            let piv = row.iter().position(|x| !f.is_zero(x)).unwrap();
            if f.is_zero(&out[piv]) {
                continue;
            }
            let c = out[piv].clone();
            for (x, r) in out.iter_mut().zip(row) {
                *x = f.sub_mul(x, &c, r);
            }
        }
        out
    }

    /// Whether `v` lies in the row space of this canonical matrix.
    pub fn contains_vector(&self, v: &[F::Elem]) -> bool {
        let f = &self.field;
        self.reduce(v).iter().all(|x| f.is_zero(x))
    }

    /// The canonical matrix of `rowspace(self) + span(v)`, or `None` when
    /// `v` already lies in the row space. `self` must be canonical.
    pub fn with_row(&self, v: &[F::Elem]) -> Option<Self> {
        let f = &self.field;
        let mut r = self.reduce(v);
        let piv = r.iter().position(|x| !f.is_zero(x))?;
        let inv = f.inv(&r[piv]);
        for x in r.iter_mut() {
            *x = f.mul(x, &inv);
        }
        let n = self.ncols;
        let mut entries = Vec::with_capacity(self.entries.len() + n);
        let mut inserted = false;
        for (row, rp) in self.rows().zip(self.pivot_columns()) {
            if !inserted && rp > piv {
                entries.extend(r.iter().cloned());
                inserted = true;
            }
            if f.is_zero(&row[piv]) {
                entries.extend(row.iter().cloned());
            } else {
                let c = row[piv].clone();
                entries.extend(row.iter().zip(&r).map(|(x, y)| f.sub_mul(x, &c, y)));
            }
        }
        if !inserted {
            entries.extend(r);
        }
        Some(RowMatrix {
            field: self.field.clone(),
            ncols: n,
            entries,
        })
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.ncols != other.ncols {
            return Err(Error::Mismatch(format!(
                "{} columns vs {} columns",
                self.ncols, other.ncols
            )));
        }
        if self.field != other.field {
            return Err(Error::Mismatch(format!(
                "{} vs {}",
                self.field.spec(),
                other.field.spec()
            )));
        }
        Ok(())
    }

    /// True iff every row of `other` lies in the row space of `self`.
    pub fn row_space_contains(&self, other: &Self) -> Result<bool> {
        self.check_compatible(other)?;
        let canon;
        let a = if self.is_canonical() {
            self
        } else {
            canon = self.rref();
            &canon
        };
        Ok(other.rows().all(|r| a.contains_vector(r)))
    }

    /// The matrix with `other`'s rows appended.
    pub fn stack(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Ok(RowMatrix {
            field: self.field.clone(),
            ncols: self.ncols,
            entries,
        })
    }
}

impl<F: Field> fmt::Debug for RowMatrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RowMatrix[{}; ", self.field.spec())?;
        f.debug_list().entries(self.rows()).finish()?;
        write!(f, "]")
    }
}

impl<F: Field> fmt::Display for RowMatrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "(")?;
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")?;
        }
        write!(f, "}}")
    }
}
