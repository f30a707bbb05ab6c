//! Dense row-major real and quaternion matrices.
//!
//! Only the operations the factorization machinery needs: products,
//! transposition variants, componentwise extraction, Frobenius norms and
//! a small pivoted LU solver for the normal systems. Products never alias
//! their inputs; every operation returns a fresh matrix.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::quat::Quaternion;

/// Errors from matrix shape checks and linear solves.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixError {
    /// Operand shapes do not conform for the named operation.
    DimMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    /// A linear system's coefficient matrix is singular to working precision.
    Singular { context: &'static str },
    /// Construction with inconsistent buffer length.
    BadShape {
        rows: usize,
        cols: usize,
        len: usize,
    },
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixError::DimMismatch { op, lhs, rhs } => write!(
                f,
                "dimension mismatch in {op}: {}x{} vs {}x{}",
                lhs.0, lhs.1, rhs.0, rhs.1
            ),
            MatrixError::Singular { context } => {
                write!(f, "singular matrix in {context}")
            }
            MatrixError::BadShape { rows, cols, len } => write!(
                f,
                "buffer of length {len} cannot form a {rows}x{cols} matrix"
            ),
        }
    }
}

impl std::error::Error for MatrixError {}

// ---------------------------------------------------------------------------
// Real matrices
// ---------------------------------------------------------------------------

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RealMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RealMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        RealMatrix { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::BadShape {
                rows,
                cols,
                len: data.len(),
            });
        }
        Ok(RealMatrix { rows, cols, data })
    }

    /// Row-major 2x2 convenience constructor.
    pub fn from_2x2(m: [[f64; 2]; 2]) -> Self {
        RealMatrix {
            rows: 2,
            cols: 2,
            data: vec![m[0][0], m[0][1], m[1][0], m[1][1]],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        RealMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, rhs: &RealMatrix) -> Result<RealMatrix, MatrixError> {
        if self.cols != rhs.rows {
            return Err(MatrixError::DimMismatch {
                op: "real matmul",
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        let mut out = RealMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for c in 0..rhs.cols {
                let mut acc = 0.0;
                for k in 0..self.cols {
                    acc += self[(r, k)] * rhs[(k, c)];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &RealMatrix) -> Result<RealMatrix, MatrixError> {
        self.zip_with(rhs, "real add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &RealMatrix) -> Result<RealMatrix, MatrixError> {
        self.zip_with(rhs, "real sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        rhs: &RealMatrix,
        op: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<RealMatrix, MatrixError> {
        if self.shape() != rhs.shape() {
            return Err(MatrixError::DimMismatch {
                op,
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| f(*a, *b))
            .collect();
        Ok(RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealMatrix {
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| f(*x)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> RealMatrix {
        self.map(|x| x * s)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.data.iter()
    }

    /// Trace of a square matrix.
    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Pivoted LU factorization. Fails when a pivot falls below working
    /// precision relative to the largest entry.
    pub fn lu(&self, context: &'static str) -> Result<Lu, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::DimMismatch {
                op: "lu",
                lhs: self.shape(),
                rhs: self.shape(),
            });
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = self.max_abs();
        let tol = scale * (n as f64) * f64::EPSILON;
        for col in 0..n {
            let mut pivot_row = col;
            let mut pivot_val = a[col * n + col].abs();
            for r in (col + 1)..n {
                let v = a[r * n + col].abs();
                if v > pivot_val {
                    pivot_val = v;
                    pivot_row = r;
                }
            }
            if pivot_val <= tol {
                return Err(MatrixError::Singular { context });
            }
            if pivot_row != col {
                for c in 0..n {
                    a.swap(col * n + c, pivot_row * n + c);
                }
                perm.swap(col, pivot_row);
            }
            let pivot = a[col * n + col];
            for r in (col + 1)..n {
                let factor = a[r * n + col] / pivot;
                a[r * n + col] = factor;
                for c in (col + 1)..n {
                    a[r * n + c] -= factor * a[col * n + c];
                }
            }
        }
        Ok(Lu { n, lu: a, perm })
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// LU factors of a square real matrix with row permutation.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Solve `A x = b` for one right-hand side.
    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "rhs length must match system size");
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 1..n {
            for c in 0..r {
                x[r] -= self.lu[r * n + c] * x[c];
            }
        }
        for r in (0..n).rev() {
            for c in (r + 1)..n {
                x[r] -= self.lu[r * n + c] * x[c];
            }
            x[r] /= self.lu[r * n + r];
        }
        x
    }

    /// Solve `A X = B` columnwise.
    pub fn solve_mat(&self, b: &RealMatrix) -> Result<RealMatrix, MatrixError> {
        if b.rows() != self.n {
            return Err(MatrixError::DimMismatch {
                op: "lu solve",
                lhs: (self.n, self.n),
                rhs: b.shape(),
            });
        }
        let mut out = RealMatrix::zeros(self.n, b.cols());
        let mut col = vec![0.0; self.n];
        for c in 0..b.cols() {
            for r in 0..self.n {
                col[r] = b[(r, c)];
            }
            let x = self.solve_vec(&col);
            for r in 0..self.n {
                out[(r, c)] = x[r];
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Quaternion matrices
// ---------------------------------------------------------------------------

/// Dense quaternion matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QuaternionMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QuaternionMatrix {
            rows,
            cols,
            data: vec![Quaternion::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QuaternionMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Quaternion::ONE;
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Quaternion,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        QuaternionMatrix { rows, cols, data }
    }

    pub fn from_vec(
        rows: usize,
        cols: usize,
        data: Vec<Quaternion>,
    ) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::BadShape {
                rows,
                cols,
                len: data.len(),
            });
        }
        Ok(QuaternionMatrix { rows, cols, data })
    }

    /// Embed a real matrix as a quaternion matrix with zero imaginary parts.
    pub fn from_real(m: &RealMatrix) -> Self {
        QuaternionMatrix::from_fn(m.rows(), m.cols(), |r, c| Quaternion::from_real(m[(r, c)]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = &Quaternion> {
        self.data.iter()
    }

    /// Entry-wise conjugate `Q̄`.
    pub fn conj(&self) -> Self {
        QuaternionMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|q| q.conj()).collect(),
        }
    }

    /// Plain transpose `Qᵀ` (no conjugation).
    pub fn transpose(&self) -> Self {
        QuaternionMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Conjugate-transpose `Q† = Q̄ᵀ`.
    pub fn dagger(&self) -> Self {
        QuaternionMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    /// Quaternion matrix product; factor order is preserved.
    pub fn matmul(&self, rhs: &QuaternionMatrix) -> Result<QuaternionMatrix, MatrixError> {
        if self.cols != rhs.rows {
            return Err(MatrixError::DimMismatch {
                op: "quaternion matmul",
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        let mut out = QuaternionMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for c in 0..rhs.cols {
                let mut acc = Quaternion::ZERO;
                for k in 0..self.cols {
                    acc += self[(r, k)] * rhs[(k, c)];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(out)
    }

    /// Product with a real matrix on the right (real scalars commute, so
    /// this is the quaternion product with the embedded matrix).
    pub fn matmul_real(&self, rhs: &RealMatrix) -> Result<QuaternionMatrix, MatrixError> {
        if self.cols != rhs.rows() {
            return Err(MatrixError::DimMismatch {
                op: "quaternion-real matmul",
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        let mut out = QuaternionMatrix::zeros(self.rows, rhs.cols());
        for r in 0..self.rows {
            for c in 0..rhs.cols() {
                let mut acc = Quaternion::ZERO;
                for k in 0..self.cols {
                    acc += self[(r, k)].scale(rhs[(k, c)]);
                }
                out[(r, c)] = acc;
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &QuaternionMatrix) -> Result<QuaternionMatrix, MatrixError> {
        self.zip_with(rhs, "quaternion add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &QuaternionMatrix) -> Result<QuaternionMatrix, MatrixError> {
        self.zip_with(rhs, "quaternion sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        rhs: &QuaternionMatrix,
        op: &'static str,
        f: impl Fn(Quaternion, Quaternion) -> Quaternion,
    ) -> Result<QuaternionMatrix, MatrixError> {
        if self.shape() != rhs.shape() {
            return Err(MatrixError::DimMismatch {
                op,
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| f(*a, *b))
            .collect();
        Ok(QuaternionMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn map(&self, f: impl Fn(Quaternion) -> Quaternion) -> QuaternionMatrix {
        QuaternionMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|q| f(*q)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> QuaternionMatrix {
        self.map(|q| q.scale(s))
    }

    /// Real parts as a real matrix.
    pub fn real_part(&self) -> RealMatrix {
        RealMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].re)
    }

    /// Imaginary parts as a pure quaternion matrix.
    pub fn imag_part(&self) -> QuaternionMatrix {
        self.map(|q| q.imag())
    }

    /// The four real component planes in `(re, i, j, k)` order.
    pub fn planes(&self) -> [RealMatrix; 4] {
        [
            RealMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].re),
            RealMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].im_i),
            RealMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].im_j),
            RealMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].im_k),
        ]
    }

    /// Reassemble from component planes.
    pub fn from_planes(planes: &[RealMatrix; 4]) -> Result<QuaternionMatrix, MatrixError> {
        let shape = planes[0].shape();
        for p in planes.iter() {
            if p.shape() != shape {
                return Err(MatrixError::DimMismatch {
                    op: "from_planes",
                    lhs: shape,
                    rhs: p.shape(),
                });
            }
        }
        Ok(QuaternionMatrix::from_fn(shape.0, shape.1, |r, c| {
            Quaternion::new(
                planes[0][(r, c)],
                planes[1][(r, c)],
                planes[2][(r, c)],
                planes[3][(r, c)],
            )
        }))
    }

    /// Sum of squared moduli of all entries.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, q| m.max(q.max_abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|q| q.is_finite())
    }

    pub fn approx_eq(&self, rhs: &QuaternionMatrix, tol: f64) -> bool {
        self.shape() == rhs.shape()
            && self
                .data
                .iter()
                .zip(rhs.data.iter())
                .all(|(a, b)| a.approx_eq(*b, tol))
    }

    /// Column `p` as a vector of entries.
    pub fn column(&self, p: usize) -> Vec<Quaternion> {
        (0..self.rows).map(|r| self[(r, p)]).collect()
    }
}

impl Index<(usize, usize)> for QuaternionMatrix {
    type Output = Quaternion;
    fn index(&self, (r, c): (usize, usize)) -> &Quaternion {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for QuaternionMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Quaternion {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}
