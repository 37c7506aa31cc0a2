//! Dense complex tensors of arbitrary order.
//!
//! Storage is a flat array in first-index-fastest order (generalized
//! column-major): entry (q_1, .., q_d) sits at offset
//! `q_1 + q_2*n_1 + q_3*n_1*n_2 + ..` with zero-based indices. Mode-1 fibers
//! are contiguous.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Default absolute tolerance for structural predicates (Hermitian, unitary).
pub const STRUCT_TOL: f64 = 1e-10;

/// Advances a multi-index through the box `bounds`, first index fastest.
/// Returns false after the last index wraps back to all zeros.
pub fn next_index(idx: &mut [usize], bounds: &[usize]) -> bool {
    for (q, n) in idx.iter_mut().zip(bounds) {
        *q += 1;
        if *q < *n {
            return true;
        }
        *q = 0;
    }
    false
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

impl DenseTensor {
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidArgument(
                "tensor dims must be nonempty positive integers".into(),
            ));
        }
        let len = dims.iter().product();
        Ok(DenseTensor {
            dims: dims.to_vec(),
            data: vec![Complex64::ZERO; len],
        })
    }

    pub fn from_data(dims: &[usize], data: Vec<Complex64>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidArgument(
                "tensor dims must be nonempty positive integers".into(),
            ));
        }
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "data length {} does not match dims product {}",
                data.len(),
                expected
            )));
        }
        if data.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("tensor entries must be finite".into()));
        }
        Ok(DenseTensor {
            dims: dims.to_vec(),
            data,
        })
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut off = 0;
        let mut stride = 1;
        for (q, n) in idx.iter().zip(&self.dims) {
            debug_assert!(q < n);
            off += q * stride;
            stride *= n;
        }
        off
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.data[self.offset(idx)]
    }

    #[inline]
    pub fn set(&mut self, idx: &[usize], v: Complex64) {
        let off = self.offset(idx);
        self.data[off] = v;
    }

    /// Entry with all indices equal to `q` except mode `p` which takes `qp`.
    /// These near-diagonal entries drive the Λ fields of the diagonalization
    /// objectives.
    pub fn get_near_diag(&self, p: usize, qp: usize, q: usize) -> Complex64 {
        let mut off = 0;
        let mut stride = 1;
        for (t, n) in self.dims.iter().enumerate() {
            off += if t == p { qp } else { q } * stride;
            stride *= n;
        }
        self.data[off]
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = v.conj();
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch("add: dims differ".into()));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    /// p-mode product: contracts the p-th index with the columns of `x`,
    /// replacing dimension n_p by x.rows. Zero-based mode.
    pub fn mode_product(&self, x: &ComplexMatrix, p: usize) -> Result<Self> {
        if p >= self.order() {
            return Err(Error::InvalidArgument(format!(
                "mode {} out of range for order-{} tensor",
                p,
                self.order()
            )));
        }
        if x.cols() != self.dims[p] {
            return Err(Error::DimensionMismatch(format!(
                "mode-{} product: matrix has {} columns, tensor dimension is {}",
                p,
                x.cols(),
                self.dims[p]
            )));
        }
        let pre: usize = self.dims[..p].iter().product();
        let np = self.dims[p];
        let post: usize = self.dims[p + 1..].iter().product();
        let m = x.rows();

        let mut dims = self.dims.clone();
        dims[p] = m;
        let mut out = vec![Complex64::ZERO; pre * m * post];
        for b in 0..post {
            for q in 0..np {
                let in_base = (b * np + q) * pre;
                for j in 0..m {
                    let w = x.get(j, q);
                    if w == Complex64::ZERO {
                        continue;
                    }
                    let out_base = (b * m + j) * pre;
                    for a in 0..pre {
                        out[out_base + a] += self.data[in_base + a] * w;
                    }
                }
            }
        }
        Ok(DenseTensor { dims, data: out })
    }

    /// Vector of diagonal entries (T_{11..1}, .., T_{nn..n}), n = min dims.
    pub fn diag_vector(&self) -> Vec<Complex64> {
        let n = *self.dims.iter().min().expect("nonempty dims");
        let mut stride_sum = 0usize;
        let mut stride = 1usize;
        for np in &self.dims {
            stride_sum += stride;
            stride *= np;
        }
        (0..n).map(|q| self.data[q * stride_sum]).collect()
    }

    /// Subtensor keeping indices q_p < r_p in every mode, same layout.
    pub fn subtensor(&self, ranks: &[usize]) -> Result<Self> {
        if ranks.len() != self.order() {
            return Err(Error::DimensionMismatch("subtensor: rank list length".into()));
        }
        for (r, n) in ranks.iter().zip(&self.dims) {
            if *r == 0 || r > n {
                return Err(Error::InvalidArgument(format!(
                    "subtensor rank {r} out of range 1..={n}"
                )));
            }
        }
        let mut out = DenseTensor::zeros(ranks)?;
        let mut idx = vec![0usize; self.order()];
        loop {
            out.set(&idx, self.get(&idx));
            // odometer over the rank box
            let mut p = 0;
            loop {
                idx[p] += 1;
                if idx[p] < ranks[p] {
                    break;
                }
                idx[p] = 0;
                p += 1;
                if p == self.order() {
                    return Ok(out);
                }
            }
        }
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Sum of |T_{qq..q}|² over the diagonal.
    pub fn diag_norm_sq(&self) -> f64 {
        self.diag_vector().iter().map(|v| v.norm_sqr()).sum()
    }

    /// Hermitian test for an order-2γ tensor with all dimensions equal:
    /// B_{i_1..i_γ, i_{γ+1}..i_{2γ}} = conj(B_{i_{γ+1}..i_{2γ}, i_1..i_γ}).
    pub fn is_hermitian(&self, gamma: usize, tol: f64) -> Result<bool> {
        if gamma == 0 || self.order() != 2 * gamma {
            return Err(Error::InvalidArgument(format!(
                "Hermitian test needs order 2γ, got order {} with γ = {}",
                self.order(),
                gamma
            )));
        }
        let n = self.dims[0];
        if self.dims.iter().any(|&d| d != n) {
            return Err(Error::InvalidArgument(
                "Hermitian test needs equal mode dimensions".into(),
            ));
        }
        let mut idx = vec![0usize; 2 * gamma];
        let mut swapped = vec![0usize; 2 * gamma];
        loop {
            swapped[..gamma].copy_from_slice(&idx[gamma..]);
            swapped[gamma..].copy_from_slice(&idx[..gamma]);
            let d = self.get(&idx) - self.get(&swapped).conj();
            if d.norm() > tol {
                return Ok(false);
            }
            let mut p = 0;
            loop {
                idx[p] += 1;
                if idx[p] < n {
                    break;
                }
                idx[p] = 0;
                p += 1;
                if p == 2 * gamma {
                    return Ok(true);
                }
            }
        }
    }

    /// In-place 2×2 recombination of the mode-p slices i and j with the
    /// row-major coefficient block r = [r11, r12, r21, r22]:
    /// new_i = r11·old_i + r12·old_j, new_j = r21·old_i + r22·old_j.
    /// This is how a Givens update propagates into a transformed tensor.
    pub fn rotate_mode_pair(&mut self, p: usize, i: usize, j: usize, r: &[Complex64; 4]) {
        let pre: usize = self.dims[..p].iter().product();
        let np = self.dims[p];
        let post: usize = self.dims[p + 1..].iter().product();
        for b in 0..post {
            let base_i = (b * np + i) * pre;
            let base_j = (b * np + j) * pre;
            for a in 0..pre {
                let vi = self.data[base_i + a];
                let vj = self.data[base_j + a];
                self.data[base_i + a] = r[0] * vi + r[1] * vj;
                self.data[base_j + a] = r[2] * vi + r[3] * vj;
            }
        }
    }

    /// Visits the mode-p fiber at every position of the other modes, with
    /// the index of mode t ≠ p ranging over 0..bounds[t]. `bounds[p]` is
    /// ignored.
    pub fn for_each_mode_fiber(
        &self,
        p: usize,
        bounds: &[usize],
        mut visit: impl FnMut(&[Complex64]),
    ) {
        let np = self.dims[p];
        let others: Vec<usize> = (0..self.order()).filter(|&t| t != p).collect();
        let mut fiber = vec![Complex64::ZERO; np];
        let mut idx = vec![0usize; self.order()];
        'outer: loop {
            for q in 0..np {
                idx[p] = q;
                fiber[q] = self.get(&idx);
            }
            visit(&fiber);
            for (pos, &t) in others.iter().enumerate() {
                idx[t] += 1;
                if idx[t] < bounds[t] {
                    continue 'outer;
                }
                idx[t] = 0;
                if pos + 1 == others.len() {
                    return;
                }
            }
            // order-1 tensor: single fiber already visited
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn r(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn mode_product_swaps_rows() {
        // T = [[1,2],[3,4]] (row-major on paper), X = [[0,1],[1,0]], p = 0.
        let t = DenseTensor::from_data(&[2, 2], vec![r(1.0), r(3.0), r(2.0), r(4.0)]).unwrap();
        let x = ComplexMatrix::from_rows(&[vec![r(0.0), r(1.0)], vec![r(1.0), r(0.0)]]).unwrap();
        let out = t.mode_product(&x, 0).unwrap();
        assert_eq!(out.get(&[0, 0]), r(3.0));
        assert_eq!(out.get(&[0, 1]), r(4.0));
        assert_eq!(out.get(&[1, 0]), r(1.0));
        assert_eq!(out.get(&[1, 1]), r(2.0));
    }

    #[test]
    fn mode_product_identity_is_noop() {
        let t = DenseTensor::from_data(
            &[2, 3],
            (0..6).map(|k| c(k as f64, -(k as f64))).collect(),
        )
        .unwrap();
        for p in 0..2 {
            let id = ComplexMatrix::identity(t.dims()[p]);
            assert_eq!(t.mode_product(&id, p).unwrap(), t);
        }
    }

    #[test]
    fn mode_product_rejects_bad_shapes() {
        let t = DenseTensor::zeros(&[2, 3]).unwrap();
        let x = ComplexMatrix::zeros(2, 2);
        assert!(t.mode_product(&x, 1).is_err());
        assert!(t.mode_product(&x, 5).is_err());
    }

    #[test]
    fn diag_uses_min_dimension() {
        let t = DenseTensor::from_data(
            &[2, 3],
            vec![r(1.0), r(4.0), r(2.0), r(5.0), r(3.0), r(6.0)],
        )
        .unwrap();
        assert_eq!(t.diag_vector(), vec![r(1.0), r(5.0)]);
        let eye = DenseTensor::from_data(
            &[3, 3],
            crate::matrix::ComplexMatrix::identity(3).data().to_vec(),
        )
        .unwrap();
        assert_eq!(eye.diag_vector(), vec![r(1.0); 3]);
        assert_eq!(
            eye.subtensor(&[2, 2]).unwrap().data(),
            crate::matrix::ComplexMatrix::identity(2).data()
        );
    }

    #[test]
    fn subtensor_nested_equals_single() {
        let t = DenseTensor::from_data(&[3, 3], (0..9).map(|k| r(k as f64)).collect()).unwrap();
        let a = t.subtensor(&[3, 3]).unwrap();
        assert_eq!(a, t);
        let b = t.subtensor(&[2, 2]).unwrap().subtensor(&[2, 1]).unwrap();
        let direct = t.subtensor(&[2, 1]).unwrap();
        assert_eq!(b, direct);
        assert!(t.subtensor(&[4, 1]).is_err());
    }

    #[test]
    fn hermitian_predicate() {
        let h = DenseTensor::from_data(&[2, 2], vec![r(1.0), c(0.0, -1.0), c(0.0, 1.0), r(2.0)])
            .unwrap();
        assert!(h.is_hermitian(1, STRUCT_TOL).unwrap());
        let nh =
            DenseTensor::from_data(&[2, 2], vec![r(0.0), r(0.0), r(1.0), r(0.0)]).unwrap();
        assert!(!nh.is_hermitian(1, STRUCT_TOL).unwrap());
        assert!(h.is_hermitian(2, STRUCT_TOL).is_err());
    }

    #[test]
    fn finite_check_rejects_nan() {
        assert!(DenseTensor::from_data(&[1], vec![c(f64::NAN, 0.0)]).is_err());
    }
}
