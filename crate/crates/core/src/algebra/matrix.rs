//! Dense row-major matrices over a prime field.

use std::fmt;
use std::ops::{Index, IndexMut};

use super::field::{Fe, PrimeField};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: PrimeField, size: usize) -> Self {
        let mut m = Matrix::zeros(field, size, size);
        for i in 0..size {
            m[(i, i)] = field.one();
        }
        m
    }

    pub fn from_rows(field: PrimeField, rows: &[Vec<Fe>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "ragged rows: {} vs {cols}",
                    row.len()
                )));
            }
            for &x in row {
                if x.field() != field {
                    return Err(Error::FieldMismatch {
                        left: field.modulus(),
                        right: x.field().modulus(),
                    });
                }
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Convenience constructor from integer rows (values are reduced mod q).
    pub fn from_u64(field: PrimeField, rows: &[&[u64]]) -> Result<Self> {
        let rows: Vec<Vec<Fe>> = rows.iter().map(|r| field.elems(r)).collect();
        Matrix::from_rows(field, &rows)
    }

    pub fn column_vector(field: PrimeField, v: &[Fe]) -> Self {
        Matrix {
            field,
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Fe] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Fe>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Fe> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_u64_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.value() as u64).collect())
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Submatrix formed by the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            field: self.field,
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// Submatrix of columns `start..end`.
    pub fn column_range(&self, start: usize, end: usize) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * (end - start));
        for i in 0..self.rows {
            data.extend_from_slice(&self.row(i)[start..end]);
        }
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: end - start,
            data,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        if self.field != rhs.field {
            return Err(Error::FieldMismatch {
                left: self.field.modulus(),
                right: rhs.field.modulus(),
            });
        }
        let q = self.field.modulus() as u64;
        let mut out = Matrix::zeros(self.field, self.rows, rhs.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..rhs.cols {
                let mut acc = 0u64;
                for (t, x) in a.iter().enumerate() {
                    acc = (acc + x.value() as u64 * rhs[(t, j)].value() as u64) % q;
                }
                out[(i, j)] = self.field.elem(acc);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Fe]) -> Result<Vec<Fe>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip(rhs, |a, b| a - b)
    }

    fn zip(&self, rhs: &Matrix, op: impl Fn(Fe, Fe) -> Fe) -> Result<Matrix> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| op(a, b))
            .collect();
        Ok(Matrix { data, ..*self })
    }

    /// Rank via Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.row_reduce(self.cols)
    }

    /// Inverse of a square matrix.
    pub fn inverse(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "inverse of non-square {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(self.field, n, 2 * n);
        for i in 0..n {
            aug.data[i * 2 * n..i * 2 * n + n].copy_from_slice(self.row(i));
            aug[(i, n + i)] = self.field.one();
        }
        if aug.row_reduce(n) < n {
            return Err(Error::SingularSystem);
        }
        Ok(aug.column_range(n, 2 * n))
    }

    /// Solves `self * x = y` for the unique `x`.
    ///
    /// Overdetermined systems are accepted as long as they are consistent.
    /// Fails with [`Error::SingularSystem`] when the columns are dependent or
    /// the right-hand side is outside the column space.
    pub fn solve(&self, y: &[Fe]) -> Result<Vec<Fe>> {
        match self.solve_any(y)? {
            Some((x, rank)) if rank == self.cols => Ok(x),
            _ => Err(Error::SingularSystem),
        }
    }

    /// Finds some solution of `self * x = y` (free variables set to zero),
    /// returning it with the rank of `self`, or `None` if inconsistent.
    pub fn solve_any(&self, y: &[Fe]) -> Result<Option<(Vec<Fe>, usize)>> {
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "{} equations, right-hand side of length {}",
                self.rows,
                y.len()
            )));
        }
        let (n, c) = (self.rows, self.cols);
        let mut aug = Matrix::zeros(self.field, n, c + 1);
        for i in 0..n {
            aug.data[i * (c + 1)..i * (c + 1) + c].copy_from_slice(self.row(i));
            aug[(i, c)] = y[i];
        }
        let rank = aug.row_reduce(c);
        // Any nonzero right-hand side left below the pivots means no solution.
        if (rank..n).any(|i| !aug[(i, c)].is_zero()) {
            return Ok(None);
        }
        let mut x = vec![self.field.zero(); c];
        for i in 0..rank {
            let pivot = (0..c).find(|&j| !aug[(i, j)].is_zero()).expect("pivot row");
            x[pivot] = aug[(i, c)];
        }
        Ok(Some((x, rank)))
    }

    /// Reduced row echelon form over the first `pivot_cols` columns, in place.
    /// Returns the rank.
    fn row_reduce(&mut self, pivot_cols: usize) -> usize {
        let cols = self.cols;
        let mut rank = 0;
        for c in 0..pivot_cols {
            let Some(pivot) = (rank..self.rows).find(|&r| !self[(r, c)].is_zero()) else {
                continue;
            };
            if pivot != rank {
                for j in 0..cols {
                    self.data.swap(pivot * cols + j, rank * cols + j);
                }
            }
            let inv = self[(rank, c)].inv().expect("nonzero pivot");
            for j in c..cols {
                self[(rank, j)] *= inv;
            }
            for r in 0..self.rows {
                if r == rank || self[(r, c)].is_zero() {
                    continue;
                }
                let factor = self[(r, c)];
                for j in c..cols {
                    let v = self[(rank, j)] * factor;
                    self[(r, j)] -= v;
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }
}

#[inline]
pub fn dot(a: &[Fe], b: &[Fe]) -> Fe {
    debug_assert_eq!(a.len(), b.len());
    let field = match a.first() {
        Some(x) => x.field(),
        None => panic!("dot product of empty vectors"),
    };
    let q = field.modulus() as u64;
    let mut acc = 0u64;
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x.field(), y.field(), "field mismatch in dot product");
        acc = (acc + x.value() as u64 * y.value() as u64) % q;
    }
    field.elem(acc)
}

impl Index<(usize, usize)> for Matrix {
    type Output = Fe;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Fe {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Fe {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f5() -> PrimeField {
        PrimeField::new(5).unwrap()
    }

    fn systematic_psi() -> Matrix {
        Matrix::from_u64(f5(), &[&[1, 0], &[0, 1], &[1, 1], &[1, 2], &[1, 3]]).unwrap()
    }

    #[test]
    fn identity_times_m() {
        let m = Matrix::from_u64(f5(), &[&[1, 2], &[2, 3]]).unwrap();
        assert_eq!(Matrix::identity(f5(), 2).mul(&m).unwrap(), m);
    }

    #[test]
    fn product_over_f5() {
        let m = Matrix::from_u64(f5(), &[&[1, 2], &[2, 3]]).unwrap();
        let c = systematic_psi().mul(&m).unwrap();
        assert_eq!(
            c.to_u64_rows(),
            vec![vec![1, 2], vec![2, 3], vec![3, 0], vec![0, 3], vec![2, 1]]
        );
    }

    #[test]
    fn pairs_have_full_rank() {
        let psi = systematic_psi();
        for a in 0..5 {
            for b in a + 1..5 {
                assert_eq!(psi.select_rows(&[a, b]).rank(), 2, "rows {a},{b}");
            }
        }
    }

    #[test]
    fn dimension_and_singular_errors() {
        let a = Matrix::from_u64(f5(), &[&[1, 2], &[2, 4]]).unwrap();
        let b = Matrix::zeros(f5(), 3, 1);
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch(_))));
        assert_eq!(a.solve(&f5().elems(&[1, 2])), Err(Error::SingularSystem));
        assert_eq!(a.inverse(), Err(Error::SingularSystem));
        // inconsistent overdetermined system
        let tall = Matrix::from_u64(f5(), &[&[1], &[1]]).unwrap();
        assert_eq!(tall.solve(&f5().elems(&[1, 2])), Err(Error::SingularSystem));
        assert_eq!(tall.solve(&f5().elems(&[3, 3])).unwrap(), f5().elems(&[3]));
    }

    #[test]
    fn inverse_round_trip() {
        let f = PrimeField::new(13).unwrap();
        let a = Matrix::from_u64(f, &[&[1, 1, 1], &[1, 3, 9], &[1, 2, 4]]).unwrap();
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(f, 3));
    }

    proptest! {
        #[test]
        fn solve_recovers_vector(
            entries in proptest::collection::vec(0u64..101, 16),
            v in proptest::collection::vec(0u64..101, 4),
        ) {
            let f = PrimeField::new(101).unwrap();
            let rows: Vec<Vec<Fe>> = entries.chunks(4).map(|c| f.elems(c)).collect();
            let a = Matrix::from_rows(f, &rows).unwrap();
            prop_assume!(a.rank() == 4);
            let v = f.elems(&v);
            let y = a.mul_vec(&v).unwrap();
            prop_assert_eq!(a.solve(&y).unwrap(), v);
        }

        #[test]
        fn rank_of_product_is_bounded(
            a in proptest::collection::vec(0u64..7, 12),
            b in proptest::collection::vec(0u64..7, 12),
        ) {
            let f = PrimeField::new(7).unwrap();
            let a = Matrix::from_rows(f, &a.chunks(4).map(|c| f.elems(c)).collect::<Vec<_>>()).unwrap();
            let b = Matrix::from_rows(f, &b.chunks(3).map(|c| f.elems(c)).collect::<Vec<_>>()).unwrap();
            let ab = a.mul(&b).unwrap();
            prop_assert!(ab.rank() <= a.rank().min(b.rank()));
        }
    }
}
