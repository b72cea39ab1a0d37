//! Operator type with dense or compressed-sparse-row storage.

use crate::error::{CoreError, Result};
use crate::space::Space;
use crate::{tol, C64, SPARSE_DENSITY_MAX, SPARSE_MIN_DIM};
use nalgebra::{DMatrix, DVector};

/// Compressed sparse row matrix over complex entries.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Build from (row, col, value) triplets; duplicate entries are summed.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match merged.last_mut() {
                Some(&mut (lr, lc, ref mut lv)) if lr == r && lc == c => *lv += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; dim + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let (col_idx, values) = merged.into_iter().map(|(_, c, v)| (c, v)).unzip();
        CsrMatrix {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// y = A x
    pub fn matvec(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut y = DVector::from_element(self.dim, C64::new(0.0, 0.0));
        for row in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[row] = acc;
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, C64::new(0.0, 0.0));
        for row in 0..self.dim {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                m[(row, self.col_idx[k])] += self.values[k];
            }
        }
        m
    }

    /// Iterate stored entries as (row, col, value).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |row| {
            (self.row_ptr[row]..self.row_ptr[row + 1])
                .map(move |k| (row, self.col_idx[k], self.values[k]))
        })
    }

    fn scaled(&self, factor: C64) -> CsrMatrix {
        CsrMatrix {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Backing storage for an [`Operator`].
#[derive(Debug, Clone)]
pub enum Storage {
    Dense(DMatrix<C64>),
    Sparse(CsrMatrix),
}

/// A complex square matrix acting on a tagged state space.
///
/// Hermitian-flagged operators are validated on construction; propagation
/// refuses operators without the flag.
#[derive(Debug, Clone)]
pub struct Operator {
    space: Space,
    storage: Storage,
    hermitian: bool,
}

impl Operator {
    /// Wrap a dense matrix. When `hermitian` is set the matrix is checked
    /// against the Hermiticity tolerance.
    pub fn from_dense(space: Space, matrix: DMatrix<C64>, hermitian: bool) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(CoreError::invalid(format!(
                "matrix is {}x{} but space {space} has dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                space.dim()
            )));
        }
        let op = Operator {
            space,
            storage: Storage::Dense(matrix),
            hermitian,
        };
        if hermitian {
            let dev = op.hermiticity_deviation();
            if dev >= tol::HERMITICITY {
                return Err(CoreError::NotHermitian { max_dev: dev });
            }
        }
        Ok(op)
    }

    /// Build from triplets, picking storage by the density policy: sparse when
    /// density < 10% and dim >= 1024, dense otherwise.
    pub fn from_triplets(
        space: Space,
        triplets: Vec<(usize, usize, C64)>,
        hermitian: bool,
    ) -> Result<Self> {
        let dim = space.dim();
        for &(r, c, _) in &triplets {
            if r >= dim || c >= dim {
                return Err(CoreError::IndexOutOfRange {
                    what: "matrix entry",
                    index: r.max(c),
                    bound: dim,
                });
            }
        }
        let csr = CsrMatrix::from_triplets(dim, triplets);
        let density = csr.nnz() as f64 / (dim as f64 * dim as f64);
        let storage = if density < SPARSE_DENSITY_MAX && dim >= SPARSE_MIN_DIM {
            Storage::Sparse(csr)
        } else {
            Storage::Dense(csr.to_dense())
        };
        let op = Operator {
            space,
            storage,
            hermitian,
        };
        if hermitian {
            let dev = op.hermiticity_deviation();
            if dev >= tol::HERMITICITY {
                return Err(CoreError::NotHermitian { max_dev: dev });
            }
        }
        Ok(op)
    }

    /// Identity on a space.
    pub fn identity(space: Space) -> Self {
        let dim = space.dim();
        Operator {
            space,
            storage: Storage::Dense(DMatrix::identity(dim, dim)),
            hermitian: true,
        }
    }

    /// Diagonal Hermitian operator from real diagonal entries.
    pub fn from_real_diagonal(space: Space, diag: &[f64]) -> Result<Self> {
        if diag.len() != space.dim() {
            return Err(CoreError::invalid(format!(
                "diagonal length {} does not match dimension {}",
                diag.len(),
                space.dim()
            )));
        }
        let m = DMatrix::from_fn(diag.len(), diag.len(), |r, c| {
            if r == c {
                C64::new(diag[r], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Operator::from_dense(space, m, true)
    }

    /// Rank-1 outer product c |v><v| (Hermitian for real c).
    pub fn outer(space: Space, coeff: f64, v: &DVector<C64>) -> Result<Self> {
        if v.len() != space.dim() {
            return Err(CoreError::invalid(format!(
                "vector length {} does not match dimension {}",
                v.len(),
                space.dim()
            )));
        }
        let c = C64::new(coeff, 0.0);
        let m = DMatrix::from_fn(v.len(), v.len(), |r, col| c * v[r] * v[col].conj());
        Operator::from_dense(space, m, true)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn is_hermitian_flagged(&self) -> bool {
        self.hermitian
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    /// Max-norm of A - A^dagger.
    pub fn hermiticity_deviation(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => {
                let mut dev: f64 = 0.0;
                for r in 0..m.nrows() {
                    for c in r..m.ncols() {
                        dev = dev.max((m[(r, c)] - m[(c, r)].conj()).norm());
                    }
                }
                dev
            }
            Storage::Sparse(csr) => {
                let adj_minus = {
                    let mut trip: Vec<(usize, usize, C64)> = Vec::with_capacity(2 * csr.nnz());
                    for (r, c, v) in csr.iter() {
                        trip.push((r, c, v));
                        trip.push((c, r, -v.conj()));
                    }
                    CsrMatrix::from_triplets(csr.dim(), trip)
                };
                adj_minus
                    .values
                    .iter()
                    .fold(0.0f64, |acc, v| acc.max(v.norm()))
            }
        }
    }

    /// Apply to a raw amplitude vector: y = A x.
    pub fn apply_vec(&self, x: &DVector<C64>) -> DVector<C64> {
        match &self.storage {
            Storage::Dense(m) => m * x,
            Storage::Sparse(csr) => csr.matvec(x),
        }
    }

    /// Dense copy of the matrix.
    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(csr) => csr.to_dense(),
        }
    }

    /// Adjoint (conjugate transpose).
    pub fn adjoint(&self) -> Operator {
        match &self.storage {
            Storage::Dense(m) => Operator {
                space: self.space,
                storage: Storage::Dense(m.adjoint()),
                hermitian: self.hermitian,
            },
            Storage::Sparse(csr) => {
                let trip = csr.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
                Operator {
                    space: self.space,
                    storage: Storage::Sparse(CsrMatrix::from_triplets(csr.dim(), trip)),
                    hermitian: self.hermitian,
                }
            }
        }
    }

    /// a*self + b*other. Result is Hermitian-flagged when both inputs are and
    /// both coefficients are real.
    pub fn linear_combination(&self, a: C64, other: &Operator, b: C64) -> Result<Operator> {
        if self.space != other.space {
            return Err(CoreError::SpaceMismatch {
                expected: self.space,
                found: other.space,
            });
        }
        let hermitian = self.hermitian && other.hermitian && a.im == 0.0 && b.im == 0.0;
        let storage = match (&self.storage, &other.storage) {
            (Storage::Sparse(x), Storage::Sparse(y)) => {
                let mut trip: Vec<(usize, usize, C64)> = Vec::with_capacity(x.nnz() + y.nnz());
                trip.extend(x.iter().map(|(r, c, v)| (r, c, a * v)));
                trip.extend(y.iter().map(|(r, c, v)| (r, c, b * v)));
                Storage::Sparse(CsrMatrix::from_triplets(x.dim(), trip))
            }
            _ => Storage::Dense(self.to_dense() * a + other.to_dense() * b),
        };
        Ok(Operator {
            space: self.space,
            storage,
            hermitian,
        })
    }

    /// Matrix product self * other (densifies).
    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        if self.space != other.space {
            return Err(CoreError::SpaceMismatch {
                expected: self.space,
                found: other.space,
            });
        }
        Ok(Operator {
            space: self.space,
            storage: Storage::Dense(self.to_dense() * other.to_dense()),
            hermitian: false,
        })
    }

    /// Scale by a real factor, preserving the Hermitian flag.
    pub fn scaled(&self, factor: f64) -> Operator {
        let f = C64::new(factor, 0.0);
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m * f),
            Storage::Sparse(csr) => Storage::Sparse(csr.scaled(f)),
        };
        Operator {
            space: self.space,
            storage,
            hermitian: self.hermitian,
        }
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.iter().fold(0.0f64, |acc, v| acc.max(v.norm())),
            Storage::Sparse(csr) => csr.values.iter().fold(0.0f64, |acc, v| acc.max(v.norm())),
        }
    }

    /// Max-norm of the difference with another operator.
    pub fn max_diff(&self, other: &Operator) -> Result<f64> {
        let d = self.linear_combination(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))?;
        Ok(d.max_abs())
    }

    /// The real diagonal when the operator is exactly diagonal, else None.
    pub fn as_real_diagonal(&self) -> Option<Vec<f64>> {
        let check = |r: usize, c: usize, v: C64| -> bool { r == c || v.norm() == 0.0 };
        match &self.storage {
            Storage::Dense(m) => {
                for r in 0..m.nrows() {
                    for c in 0..m.ncols() {
                        if !check(r, c, m[(r, c)]) {
                            return None;
                        }
                    }
                }
                Some((0..m.nrows()).map(|i| m[(i, i)].re).collect())
            }
            Storage::Sparse(csr) => {
                for (r, c, v) in csr.iter() {
                    if !check(r, c, v) {
                        return None;
                    }
                }
                let mut diag = vec![0.0; csr.dim()];
                for (r, c, v) in csr.iter() {
                    if r == c {
                        diag[r] = v.re;
                    }
                }
                Some(diag)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn csr_matvec_matches_dense() {
        let trip = vec![
            (0, 1, c(1.0, 0.0)),
            (1, 0, c(1.0, 0.0)),
            (2, 2, c(-2.0, 0.0)),
            (0, 1, c(0.5, 0.0)), // duplicate accumulates
        ];
        let csr = CsrMatrix::from_triplets(3, trip);
        assert_eq!(csr.nnz(), 3);
        let x = DVector::from_vec(vec![c(1.0, 0.0), c(2.0, -1.0), c(0.0, 3.0)]);
        let dense = csr.to_dense();
        let y_sparse = csr.matvec(&x);
        let y_dense = &dense * &x;
        assert!((y_sparse - y_dense).norm() < 1e-14);
    }

    #[test]
    fn hermitian_flag_validated() {
        let mut m = DMatrix::from_element(2, 2, c(0.0, 0.0));
        m[(0, 1)] = c(0.0, 1.0);
        m[(1, 0)] = c(0.0, 1.0); // not the conjugate
        let err = Operator::from_dense(Space::Logical(1), m, true).unwrap_err();
        assert!(matches!(err, CoreError::NotHermitian { .. }));
    }

    #[test]
    fn diagonal_detection() {
        let op = Operator::from_real_diagonal(Space::Logical(1), &[1.0, -1.0]).unwrap();
        assert_eq!(op.as_real_diagonal().unwrap(), vec![1.0, -1.0]);
        let v = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let off = Operator::outer(Space::Logical(1), 1.0, &v).unwrap();
        assert!(off.as_real_diagonal().is_none());
    }

    #[test]
    fn storage_policy_small_dims_stay_dense() {
        let trip = vec![(0, 0, c(1.0, 0.0))];
        let op = Operator::from_triplets(Space::Full(2), trip, true).unwrap();
        assert!(!op.is_sparse());
    }
}
