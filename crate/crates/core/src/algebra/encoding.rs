//! Encoding matrices (Ψ) for product-matrix codes.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::field::{Fe, PrimeField};
use super::matrix::Matrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    Vandermonde,
    SystematicMbr,
    Custom,
}

/// An `n x d` encoding matrix. Row `i` is the encoding vector of node `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingMatrix {
    psi: Matrix,
    points: Option<Vec<Fe>>,
    flavor: Flavor,
}

impl EncodingMatrix {
    /// Vandermonde rows `[1, x, ..., x^(d-1)]` with points scanned upward
    /// from 0. With `alpha` set, a point is kept only if `x^alpha` is new.
    pub fn vandermonde(field: PrimeField, n: usize, d: usize, alpha: Option<usize>) -> Result<Self> {
        let mut points = Vec::with_capacity(n);
        let mut seen = std::collections::HashSet::new();
        for x in field.iter() {
            if points.len() == n {
                break;
            }
            if let Some(a) = alpha {
                if !seen.insert(x.pow(a as u64)) {
                    continue;
                }
            }
            points.push(x);
        }
        if points.len() < n {
            return Err(Error::FieldTooSmall {
                q: field.modulus(),
                reason: match alpha {
                    Some(a) => format!("only {} points with distinct {a}-th powers, need {n}", points.len()),
                    None => format!("only {} points, need {n}", points.len()),
                },
            });
        }
        Self::vandermonde_with_points(field, &points, d)
    }

    /// Vandermonde matrix over explicit, pairwise distinct points.
    pub fn vandermonde_with_points(field: PrimeField, points: &[Fe], d: usize) -> Result<Self> {
        if points.iter().any(|x| x.field() != field) {
            return Err(Error::InvalidParams("evaluation point from another field".into()));
        }
        if !points.iter().all_unique() {
            return Err(Error::InvalidParams("evaluation points must be distinct".into()));
        }
        let rows: Vec<Vec<Fe>> = points
            .iter()
            .map(|&x| {
                let mut row = Vec::with_capacity(d);
                let mut acc = field.one();
                for _ in 0..d {
                    row.push(acc);
                    acc *= x;
                }
                row
            })
            .collect();
        Ok(EncodingMatrix {
            psi: Matrix::from_rows(field, &rows)?,
            points: Some(points.to_vec()),
            flavor: Flavor::Vandermonde,
        })
    }

    /// `[I_k 0]` on top of an `(n-k) x d` Cauchy block.
    pub fn systematic_mbr(field: PrimeField, n: usize, k: usize, d: usize) -> Result<Self> {
        if k > d || k > n {
            return Err(Error::InvalidParams(format!("need k <= d and k <= n, got n={n} k={k} d={d}")));
        }
        let needed = (n - k + d) as u64;
        if (field.modulus() as u64) < needed {
            return Err(Error::FieldTooSmall {
                q: field.modulus(),
                reason: format!("a {}x{d} Cauchy block needs {needed} distinct elements", n - k),
            });
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..k {
            let mut row = vec![field.zero(); d];
            row[i] = field.one();
            rows.push(row);
        }
        // x_i = d + i, y_j = j, entries 1 / (x_i - y_j)
        for i in 0..n - k {
            let x = field.elem((d + i) as u64);
            rows.push(
                (0..d)
                    .map(|j| (x - field.elem(j as u64)).inv().expect("distinct Cauchy points"))
                    .collect(),
            );
        }
        Ok(EncodingMatrix {
            psi: Matrix::from_rows(field, &rows)?,
            points: None,
            flavor: Flavor::SystematicMbr,
        })
    }

    /// Arbitrary user-supplied rows. No invariant is checked here; see the
    /// `check_*` methods.
    pub fn custom(psi: Matrix) -> Self {
        EncodingMatrix {
            psi,
            points: None,
            flavor: Flavor::Custom,
        }
    }

    pub fn psi(&self) -> &Matrix {
        &self.psi
    }

    pub fn points(&self) -> Option<&[Fe]> {
        self.points.as_deref()
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn field(&self) -> PrimeField {
        self.psi.field()
    }

    pub fn n(&self) -> usize {
        self.psi.rows()
    }

    pub fn width(&self) -> usize {
        self.psi.cols()
    }

    /// Encoding vector of a 0-based row.
    pub fn row(&self, i: usize) -> &[Fe] {
        self.psi.row(i)
    }

    /// The rows listed (0-based), keeping points aligned.
    pub fn restrict_rows(&self, rows: &[usize]) -> EncodingMatrix {
        EncodingMatrix {
            psi: self.psi.select_rows(rows),
            points: self.points.as_ref().map(|p| rows.iter().map(|&r| p[r]).collect()),
            flavor: self.flavor,
        }
    }

    /// The first `cols` columns. A Vandermonde matrix stays Vandermonde.
    pub fn restrict_cols(&self, cols: usize) -> EncodingMatrix {
        EncodingMatrix {
            psi: self.psi.column_range(0, cols),
            points: self.points.clone(),
            flavor: self.flavor,
        }
    }

    /// True when every `size`-subset of rows, restricted to the first `cols`
    /// columns, is linearly independent. Exhaustive.
    pub fn rows_independent(&self, cols: usize, size: usize) -> bool {
        if size > cols || size > self.n() {
            return size == 0;
        }
        let sub = self.psi.column_range(0, cols);
        (0..self.n())
            .combinations(size)
            .all(|rows| sub.select_rows(&rows).rank() == size)
    }

    /// Any `d` rows independent, i.e. the code generated by Ψ is MDS.
    pub fn check_mds(&self) -> bool {
        self.rows_independent(self.width(), self.width())
    }

    /// Every `size x size` minor of the first `size` columns is nonsingular.
    pub fn check_leading(&self, size: usize) -> bool {
        self.rows_independent(size, size)
    }

    /// The `alpha`-th powers of the points are pairwise distinct.
    pub fn check_alpha_distinct(&self, alpha: usize) -> bool {
        match &self.points {
            Some(p) => p.iter().map(|x| x.pow(alpha as u64)).all_unique(),
            None => false,
        }
    }

    /// λ_i = x_i^alpha for Vandermonde matrices.
    pub fn lambdas(&self, alpha: usize) -> Option<Vec<Fe>> {
        self.points
            .as_ref()
            .map(|p| p.iter().map(|x| x.pow(alpha as u64)).collect())
    }
}
