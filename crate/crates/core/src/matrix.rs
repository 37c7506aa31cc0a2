//! Dense complex matrices in column-major layout.
//!
//! Problem sizes here are small (factors of a tensor decomposition), so the
//! implementation favors clarity over BLAS-grade performance. The real inner
//! product `⟨X, Y⟩ = Re tr(XᴴY)` turns `C^{n×r}` into a real Euclidean space,
//! which is the geometry every gradient in this crate lives in.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Column-major complex matrix: entry (i, j) sits at `data[i + j*rows]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::ONE);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds from a row-major nested slice, as matrices are written on paper.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::InvalidArgument("matrix needs at least one row".into()));
        }
        let c = rows[0].len();
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i + j * self.rows]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i + j * self.rows] = v;
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = v.conj();
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            for k in 0..self.cols {
                let b = other.get(k, j);
                if b == Complex64::ZERO {
                    continue;
                }
                for i in 0..self.rows {
                    let v = out.get(i, j) + self.get(i, k) * b;
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::DimensionMismatch("add: shapes differ".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::DimensionMismatch("sub: shapes differ".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// `‖XᴴX − I‖` — how far the columns are from orthonormal.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut res = 0.0f64;
        for a in 0..self.cols {
            for b in 0..self.cols {
                let mut s = Complex64::ZERO;
                for i in 0..self.rows {
                    s += self.get(i, a).conj() * self.get(i, b);
                }
                if a == b {
                    s -= Complex64::ONE;
                }
                res += s.norm_sqr();
            }
        }
        res.sqrt()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.orthonormality_residual() <= tol
    }

    /// Right-multiplies by the Givens matrix G(i, j, Ψ): columns i and j mix,
    /// everything else is untouched.
    pub fn apply_givens_right(&mut self, i: usize, j: usize, psi: &[Complex64; 4]) {
        // psi = [Ψ11, Ψ21, Ψ12, Ψ22] column-major.
        for row in 0..self.rows {
            let a = self.get(row, i);
            let b = self.get(row, j);
            self.set(row, i, a * psi[0] + b * psi[1]);
            self.set(row, j, a * psi[2] + b * psi[3]);
        }
    }

    /// QR factor with positive real diagonal of R, via modified Gram-Schmidt
    /// with one re-orthogonalization pass.
    pub fn qr_positive(&self) -> Result<ComplexMatrix> {
        let (n, r) = (self.rows, self.cols);
        if r > n {
            return Err(Error::DimensionMismatch("qr: more columns than rows".into()));
        }
        let mut q = self.clone();
        for j in 0..r {
            for _pass in 0..2 {
                for k in 0..j {
                    let mut proj = Complex64::ZERO;
                    for i in 0..n {
                        proj += q.get(i, k).conj() * q.get(i, j);
                    }
                    for i in 0..n {
                        let v = q.get(i, j) - proj * q.get(i, k);
                        q.set(i, j, v);
                    }
                }
            }
            let norm: f64 = (0..n).map(|i| q.get(i, j).norm_sqr()).sum::<f64>().sqrt();
            if norm <= 1e-14 * (1.0 + self.frobenius_norm()) {
                return Err(Error::Numerical(format!("qr: rank-deficient at column {j}")));
            }
            for i in 0..n {
                let v = q.get(i, j) / norm;
                q.set(i, j, v);
            }
            // Fix the phase so that R_jj = q_j^H x_j is real positive.
            let mut diag = Complex64::ZERO;
            for i in 0..n {
                diag += q.get(i, j).conj() * self.get(i, j);
            }
            if diag.norm() > 0.0 {
                let phase = diag / diag.norm();
                for i in 0..n {
                    let v = q.get(i, j) * phase;
                    q.set(i, j, v);
                }
            }
        }
        Ok(q)
    }
}

/// Real inner product `⟨X, Y⟩ = Re tr(XᴴY)`.
pub fn real_inner(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<f64> {
    if !x.same_shape(y) {
        return Err(Error::DimensionMismatch("real_inner: shapes differ".into()));
    }
    Ok(x.data()
        .iter()
        .zip(y.data())
        .map(|(a, b)| (a.conj() * b).re)
        .sum())
}
