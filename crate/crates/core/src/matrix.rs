//! Small dense square matrices (3×3 and 4×4) stored inline, row-major.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

const CAP: usize = 4;

/// A square matrix of dimension 1..=4 with inline storage.
///
/// Entries outside the active `dim × dim` block are always zero, which lets
/// equality and the elementwise operators work on the whole backing array.
#[derive(Clone, Copy, PartialEq)]
pub struct SquareMatrix<T> {
    dim: usize,
    data: [T; CAP * CAP],
}

impl<T: Real> SquareMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        assert!(
            (1..=CAP).contains(&dim),
            "matrix dimension {dim} out of range"
        );
        Self {
            dim,
            data: [T::zero(); CAP * CAP],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from `dim * dim` row-major entries.
    pub fn from_row_major(dim: usize, entries: &[T]) -> Result<Self> {
        if !(1..=CAP).contains(&dim) {
            return Err(Error::invalid(format!(
                "unsupported matrix dimension {dim}"
            )));
        }
        if entries.len() != dim * dim {
            return Err(Error::invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = entries[r * dim + c];
            }
        }
        Ok(m)
    }

    pub fn from_rows<const N: usize>(rows: [[T; N]; N]) -> Self {
        let mut m = Self::zeros(N);
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                m[(r, c)] = v;
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries of the active block.
    pub fn to_row_major(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.push(self[(r, c)]);
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m[(c, r)] = self[(r, c)];
            }
        }
        m
    }

    pub fn scale(&self, s: T) -> Self {
        let mut m = *self;
        m.data.iter_mut().for_each(|x| *x = *x * s);
        m
    }

    pub fn trace(&self) -> T {
        (0..self.dim).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    /// Frobenius inner product `trace(selfᵀ other)`.
    pub fn frobenius_dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn frobenius_norm(&self) -> T {
        self.frobenius_dot(self).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
    }

    /// Top-left `k × k` block.
    pub fn block(&self, k: usize) -> Self {
        assert!(k <= self.dim);
        let mut m = Self::zeros(k);
        for r in 0..k {
            for c in 0..k {
                m[(r, c)] = self[(r, c)];
            }
        }
        m
    }

    /// Overwrites the top-left block with `blk`.
    pub fn set_block(&mut self, blk: &Self) {
        assert!(blk.dim <= self.dim);
        for r in 0..blk.dim {
            for c in 0..blk.dim {
                self[(r, c)] = blk[(r, c)];
            }
        }
    }

    /// Determinant; only 1×1 through 3×3 are needed.
    pub fn determinant(&self) -> T {
        match self.dim {
            1 => self[(0, 0)],
            2 => self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)],
            3 => {
                let m = self;
                m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                    - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                    + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
            }
            d => unimplemented!("determinant for {d}x{d}"),
        }
    }

    /// Inverse of a 3×3 matrix via the adjugate, or `None` when singular.
    pub fn inverse3(&self) -> Option<Self> {
        assert_eq!(self.dim, 3);
        let det = self.determinant();
        if det.abs() <= T::min_positive_value() {
            return None;
        }
        let m = self;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)]
        };
        let adj = Self::from_rows([
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ]);
        Some(adj.scale(T::one() / det))
    }
}

impl<T> Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.dim && c < self.dim);
        &self.data[r * CAP + c]
    }
}

impl<T> IndexMut<(usize, usize)> for SquareMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.dim && c < self.dim);
        &mut self.data[r * CAP + c]
    }
}

impl<T: Real> Mul for SquareMatrix<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                let mut acc = T::zero();
                for k in 0..n {
                    acc = acc + self[(r, k)] * rhs[(k, c)];
                }
                out[(r, c)] = acc;
            }
        }
        out
    }
}

impl<T: Real> Add for SquareMatrix<T> {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        self.data
            .iter_mut()
            .zip(rhs.data.iter())
            .for_each(|(a, &b)| *a = *a + b);
        self
    }
}

impl<T: Real> Sub for SquareMatrix<T> {
    type Output = Self;

    fn sub(mut self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        self.data
            .iter_mut()
            .zip(rhs.data.iter())
            .for_each(|(a, &b)| *a = *a - b);
        self
    }
}

impl<T: Real> Neg for SquareMatrix<T> {
    type Output = Self;

    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for SquareMatrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut list = f.debug_list();
        for r in 0..self.dim {
            list.entry(&(0..self.dim).map(|c| &self[(r, c)]).collect::<Vec<_>>());
        }
        list.finish()
    }
}
