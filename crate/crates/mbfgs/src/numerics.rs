//! Minimal dense linear-algebra kernel: vectors, symmetric matrices,
//! inner products, norms, and the SPD test used by the solver invariants.
//!
//! Problem dimensions here are tiny (2 or 4 in the benchmark set), so
//! everything is stored dense and computed in plain `f64` loops.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector must have at least one entry")]
    Empty,
    #[error("non-finite entry at index {index}: {value}")]
    NonFinite { index: usize, value: f64 },
    #[error("matrix rows are not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
}

/// An n-dimensional real vector. Entries are finite by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DenseVector {
    entries: Vec<f64>,
}

impl DenseVector {
    pub fn new(entries: Vec<f64>) -> Result<Self, NumericsError> {
        if entries.is_empty() {
            return Err(NumericsError::Empty);
        }
        for (index, &value) in entries.iter().enumerate() {
            if !value.is_finite() {
                return Err(NumericsError::NonFinite { index, value });
            }
        }
        Ok(Self { entries })
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self, NumericsError> {
        Self::new(entries.to_vec())
    }

    /// The zero vector of dimension `dim` (`dim` must be ≥ 1).
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "zero-dimensional vectors are not supported");
        Self {
            entries: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.entries.iter()
    }

    fn check_dim(&self, other: &Self) -> Result<(), NumericsError> {
        if self.dim() != other.dim() {
            return Err(NumericsError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// Euclidean inner product Σ aᵢbᵢ.
    pub fn dot(&self, other: &Self) -> Result<f64, NumericsError> {
        self.check_dim(other)?;
        Ok(self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Euclidean norm; zero iff the vector is zero.
    pub fn norm2(&self) -> f64 {
        self.entries.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// `self + scale * other`, entrywise.
    pub fn add_scaled(&self, scale: f64, other: &Self) -> Result<Self, NumericsError> {
        self.check_dim(other)?;
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a + scale * b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, NumericsError> {
        self.add_scaled(-1.0, other)
    }

    pub fn scale(&self, scale: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|a| a * scale).collect(),
        }
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = NumericsError;

    fn try_from(entries: Vec<f64>) -> Result<Self, NumericsError> {
        Self::new(entries)
    }
}

impl From<DenseVector> for Vec<f64> {
    fn from(v: DenseVector) -> Vec<f64> {
        v.entries
    }
}

impl std::fmt::Display for DenseVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// An n×n symmetric real matrix stored row-major. Symmetry is maintained by
/// construction: writes go through [`SymMatrix::set`], which mirrors, and the
/// symmetric constructors fill the lower triangle and copy it upward.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    order: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn identity(order: usize) -> Self {
        assert!(order >= 1, "zero-order matrices are not supported");
        let mut data = vec![0.0; order * order];
        for i in 0..order {
            data[i * order + i] = 1.0;
        }
        Self { order, data }
    }

    /// Builds the matrix from `f(i, j)`, evaluated only on the lower triangle
    /// (i ≥ j) and mirrored, so the result is symmetric to the last bit.
    pub fn from_fn_lower(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(order >= 1, "zero-order matrices are not supported");
        let mut data = vec![0.0; order * order];
        for i in 0..order {
            for j in 0..=i {
                let v = f(i, j);
                data[i * order + j] = v;
                data[j * order + i] = v;
            }
        }
        Self { order, data }
    }

    /// Validates squareness, exact symmetry, and finiteness of `rows`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NumericsError> {
        let order = rows.len();
        if order == 0 {
            return Err(NumericsError::Empty);
        }
        for row in rows {
            if row.len() != order {
                return Err(NumericsError::DimensionMismatch {
                    expected: order,
                    found: row.len(),
                });
            }
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(NumericsError::NonFinite {
                        index: i * order + j,
                        value: v,
                    });
                }
                if rows[j][i] != v {
                    return Err(NumericsError::NotSymmetric { i, j });
                }
            }
        }
        Ok(Self::from_fn_lower(order, |i, j| rows[i][j]))
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        assert!(!entries.is_empty(), "zero-order matrices are not supported");
        let order = entries.len();
        Self::from_fn_lower(order, |i, j| if i == j { entries[i] } else { 0.0 })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.order + j]
    }

    /// Mirrored write: sets both (i, j) and (j, i).
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.order + j] = value;
        self.data[j * self.order + i] = value;
    }

    /// Standard matrix-vector product `M v`.
    pub fn mat_vec(&self, v: &DenseVector) -> Result<DenseVector, NumericsError> {
        if v.dim() != self.order {
            return Err(NumericsError::DimensionMismatch {
                expected: self.order,
                found: v.dim(),
            });
        }
        let entries = (0..self.order)
            .map(|i| (0..self.order).map(|j| self.get(i, j) * v[j]).sum::<f64>())
            .collect();
        Ok(DenseVector { entries })
    }

    /// True iff Cholesky-style elimination succeeds with every pivot above
    /// `tol · max(1, max diagonal entry)`. The scaling keeps the threshold
    /// meaningful for matrices far from unit scale.
    pub fn is_spd(&self, tol: f64) -> bool {
        let n = self.order;
        let max_diag = (0..n)
            .map(|i| self.get(i, i))
            .fold(f64::NEG_INFINITY, f64::max);
        let threshold = tol * max_diag.max(1.0);
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(sum > threshold) || !sum.is_finite() {
                        return false;
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        true
    }
}
