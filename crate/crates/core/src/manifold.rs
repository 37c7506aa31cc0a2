//! Geometry of complex Stiefel manifolds and unitary groups.
//!
//! St(r, n) = {X ∈ C^{n×r} : XᴴX = I}. Under the real inner product
//! Re tr(XᴴY), the tangent projection at X is
//! `Proj_X ξ = (I − XXᴴ)ξ + X·skew(Xᴴξ)` and the Riemannian gradient is the
//! projection of the Euclidean (Wirtinger) gradient. On the unitary group the
//! projection collapses to `grad = U·Λ(U)` with the skew-Hermitian field
//! `Λ(U) = skew(Uᴴ∇)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{real_inner, ComplexMatrix};

/// Residual tolerance used when validating points handed to geometry ops.
/// Looser than construction-time checks: long rotation sequences are allowed
/// to drift up to this before re-orthonormalization.
pub const UNITARY_OP_TOL: f64 = 1e-8;

/// Construction-time orthonormality tolerance.
pub const UNITARY_NEW_TOL: f64 = 1e-10;

/// Point on St(r, n, C).
#[derive(Debug, Clone)]
pub struct StiefelPoint {
    x: ComplexMatrix,
}

impl StiefelPoint {
    pub fn new(x: ComplexMatrix) -> Result<Self> {
        let residual = x.orthonormality_residual();
        if residual > UNITARY_NEW_TOL {
            return Err(Error::NotUnitary {
                residual,
                tol: UNITARY_NEW_TOL,
            });
        }
        Ok(StiefelPoint { x })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.x
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.x
    }
}

/// Tuple of square unitary factors, one per tensor mode.
#[derive(Debug, Clone)]
pub struct UnitaryTuple {
    mats: Vec<ComplexMatrix>,
}

impl UnitaryTuple {
    pub fn new(mats: Vec<ComplexMatrix>) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::InvalidArgument("empty unitary tuple".into()));
        }
        for m in &mats {
            if !m.is_square() {
                return Err(Error::InvalidArgument("unitary factors must be square".into()));
            }
            let residual = m.orthonormality_residual();
            if residual > UNITARY_NEW_TOL {
                return Err(Error::NotUnitary {
                    residual,
                    tol: UNITARY_NEW_TOL,
                });
            }
        }
        Ok(UnitaryTuple { mats })
    }

    pub fn identities(sizes: &[usize]) -> Self {
        UnitaryTuple {
            mats: sizes.iter().map(|&n| ComplexMatrix::identity(n)).collect(),
        }
    }

    /// No orthonormality check; for internal iterates that are re-validated
    /// elsewhere.
    pub fn from_mats_unchecked(mats: Vec<ComplexMatrix>) -> Self {
        UnitaryTuple { mats }
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn mats(&self) -> &[ComplexMatrix] {
        &self.mats
    }

    pub fn mats_mut(&mut self) -> &mut [ComplexMatrix] {
        &mut self.mats
    }

    pub fn factor(&self, p: usize) -> &ComplexMatrix {
        &self.mats[p]
    }

    pub fn max_orthonormality_residual(&self) -> f64 {
        self.mats
            .iter()
            .map(|m| m.orthonormality_residual())
            .fold(0.0, f64::max)
    }

    /// Frobenius distance to another tuple, factors stacked.
    pub fn distance(&self, other: &UnitaryTuple) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch("tuple lengths differ".into()));
        }
        let mut s = 0.0;
        for (a, b) in self.mats.iter().zip(&other.mats) {
            s += a.sub(b)?.frobenius_norm_sq();
        }
        Ok(s.sqrt())
    }
}

/// Skew-Hermitian part: (P − Pᴴ)/2. Errors on non-square input.
pub fn skew(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !p.is_square() {
        return Err(Error::InvalidArgument("skew of a non-square matrix".into()));
    }
    let n = p.rows();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        (p.get(i, j) - p.get(j, i).conj()) * 0.5
    }))
}

/// Hermitian part: (P + Pᴴ)/2.
fn herm(p: &ComplexMatrix) -> ComplexMatrix {
    let n = p.rows();
    ComplexMatrix::from_fn(n, n, |i, j| (p.get(i, j) + p.get(j, i).conj()) * 0.5)
}

/// Orthogonal projection of ξ onto the tangent space at X:
/// (I − XXᴴ)ξ + X·skew(Xᴴξ) = ξ − X·herm(Xᴴξ).
pub fn proj_tangent(x: &StiefelPoint, xi: &ComplexMatrix) -> Result<ComplexMatrix> {
    proj_tangent_raw(x.matrix(), xi)
}

/// Projection formula without the orthonormality check, for iterates that
/// are allowed a little drift.
pub fn proj_tangent_raw(x: &ComplexMatrix, xi: &ComplexMatrix) -> Result<ComplexMatrix> {
    if x.rows() != xi.rows() || x.cols() != xi.cols() {
        return Err(Error::DimensionMismatch("proj_tangent: shapes differ".into()));
    }
    let xh_xi = x.adjoint().mul(xi)?;
    xi.sub(&x.mul(&herm(&xh_xi))?)
}

/// Riemannian gradient on the Stiefel manifold: Proj_X(∇g(X)).
pub fn riemannian_grad_stiefel(
    euclid_grad: &ComplexMatrix,
    x: &StiefelPoint,
) -> Result<ComplexMatrix> {
    proj_tangent(x, euclid_grad)
}

/// Riemannian gradient on the unitary group. Returns (grad, Λ) with
/// Λ = skew(Uᴴ∇) and grad = U·Λ, so ‖grad‖ = ‖Λ‖.
pub fn riemannian_grad_unitary(
    euclid_grad: &ComplexMatrix,
    u: &ComplexMatrix,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !u.is_square() || !u.same_shape(euclid_grad) {
        return Err(Error::DimensionMismatch(
            "riemannian_grad_unitary: U and gradient must be square and congruent".into(),
        ));
    }
    let residual = u.orthonormality_residual();
    if residual > UNITARY_OP_TOL {
        return Err(Error::NotUnitary {
            residual,
            tol: UNITARY_OP_TOL,
        });
    }
    let lambda = skew(&u.adjoint().mul(euclid_grad)?)?;
    let grad = u.mul(&lambda)?;
    Ok((grad, lambda))
}

/// QR retraction: the Q factor of X + ξ with positive real diagonal R.
pub fn qr_retract(x: &StiefelPoint, xi: &ComplexMatrix) -> Result<StiefelPoint> {
    let sum = x.matrix().add(xi)?;
    let q = sum.qr_positive()?;
    StiefelPoint::new(q)
}

/// Skew-Hermitian residual ‖Λ + Λᴴ‖ of a field, for structure checks.
pub fn skew_residual(l: &ComplexMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..l.rows() {
        for j in 0..l.cols() {
            s += (l.get(i, j) + l.get(j, i).conj()).norm_sqr();
        }
    }
    s.sqrt()
}

/// Central finite-difference directional derivative of `f` at `x` along `e`,
/// step h = 1e-6·(1 + ‖x‖).
pub fn central_diff(
    f: &mut dyn FnMut(&ComplexMatrix) -> f64,
    x: &ComplexMatrix,
    e: &ComplexMatrix,
) -> f64 {
    let h = 1e-6 * (1.0 + x.frobenius_norm());
    let plus = x.add(&e.scale(Complex64::new(h, 0.0))).expect("shape");
    let minus = x.sub(&e.scale(Complex64::new(h, 0.0))).expect("shape");
    (f(&plus) - f(&minus)) / (2.0 * h)
}

/// Checks ⟨grad, E⟩ against finite differences of `f` along random-ish basis
/// directions; returns the worst relative error.
pub fn gradient_fd_error(
    f: &mut dyn FnMut(&ComplexMatrix) -> f64,
    grad: &ComplexMatrix,
    x: &ComplexMatrix,
    directions: &[ComplexMatrix],
) -> f64 {
    let scale = 1.0 + grad.frobenius_norm();
    let mut worst = 0.0f64;
    for e in directions {
        let fd = central_diff(f, x, e);
        let an = real_inner(grad, e).expect("shape");
        worst = worst.max((fd - an).abs() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::real_inner;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn test_point() -> StiefelPoint {
        let raw = ComplexMatrix::from_fn(4, 2, |i, j| {
            c((i + 1) as f64 * 0.3 - j as f64, ((i * j) as f64).sin())
        });
        StiefelPoint::new(raw.qr_positive().unwrap()).unwrap()
    }

    #[test]
    fn skew_of_hermitian_is_zero() {
        let p = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 3.0)],
            vec![c(2.0, -3.0), c(-1.0, 0.0)],
        ])
        .unwrap();
        assert!(skew(&p).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn skew_by_definition() {
        let p = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(2.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let s = skew(&p).unwrap();
        assert_eq!(s.get(0, 1), c(1.0, 0.0));
        assert_eq!(s.get(1, 0), c(-1.0, 0.0));
        assert!(skew(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn projection_is_idempotent_and_self_adjoint() {
        let x = test_point();
        let xi = ComplexMatrix::from_fn(4, 2, |i, j| c((i as f64 - 1.2) * 0.7, j as f64 + 0.1));
        let eta = ComplexMatrix::from_fn(4, 2, |i, j| c((j as f64 + 0.4).cos(), i as f64 * 0.2));
        let p_xi = proj_tangent(&x, &xi).unwrap();
        let pp_xi = proj_tangent(&x, &p_xi).unwrap();
        assert!(p_xi.sub(&pp_xi).unwrap().frobenius_norm() < 1e-12);
        // self-adjointness under the real inner product
        let p_eta = proj_tangent(&x, &eta).unwrap();
        let a = real_inner(&p_xi, &eta).unwrap();
        let b = real_inner(&xi, &p_eta).unwrap();
        assert!((a - b).abs() < 1e-12);
        // residual xi − Proj xi is orthogonal to tangent vectors
        let resid = xi.sub(&p_xi).unwrap();
        assert!(real_inner(&resid, &p_eta).unwrap().abs() < 1e-12);
    }

    #[test]
    fn projection_kills_normal_direction() {
        let x = test_point();
        let p_x = proj_tangent(&x, x.matrix()).unwrap();
        assert!(p_x.frobenius_norm() < 1e-12);
    }

    #[test]
    fn unitary_gradient_norm_equals_lambda_norm() {
        let u = ComplexMatrix::from_fn(3, 3, |i, j| {
            c(((2 * i + 3 * j) as f64).sin(), ((i * j) as f64 + 0.4).cos())
        })
        .qr_positive()
        .unwrap();
        let g = ComplexMatrix::from_fn(3, 3, |i, j| c(i as f64 - j as f64, (i * j) as f64 * 0.1));
        let (grad, lambda) = riemannian_grad_unitary(&g, &u).unwrap();
        assert!((grad.frobenius_norm() - lambda.frobenius_norm()).abs() < 1e-12);
        assert!(skew_residual(&lambda) < 1e-12);
        // ∇ = U gives zero gradient
        let (gz, _) = riemannian_grad_unitary(&u, &u).unwrap();
        assert!(gz.frobenius_norm() < 1e-12);
        // non-unitary input is rejected
        let bad = ComplexMatrix::from_fn(3, 3, |i, j| c((i + j) as f64, 0.0));
        assert!(riemannian_grad_unitary(&g, &bad).is_err());
    }

    #[test]
    fn stiefel_gradient_matches_directional_derivatives() {
        // g(X) = Re tr(CᴴX) has Euclidean gradient C
        let x = test_point();
        let cmat = ComplexMatrix::from_fn(4, 2, |i, j| {
            c(((i + 2 * j) as f64).cos(), ((3 * i) as f64 - j as f64).sin())
        });
        let grad = riemannian_grad_stiefel(&cmat, &x).unwrap();
        let g = |m: &ComplexMatrix| real_inner(&cmat, m).unwrap();
        for k in 0..5 {
            let raw = ComplexMatrix::from_fn(4, 2, |i, j| {
                c(
                    ((i * 3 + j + k) as f64).sin(),
                    ((i + j * 2 + k) as f64 * 0.7).cos(),
                )
            });
            let eta = proj_tangent(&x, &raw).unwrap();
            let h = 1e-6 * (1.0 + x.matrix().frobenius_norm());
            let plus = qr_retract(&x, &eta.scale(c(h, 0.0))).unwrap();
            let minus = qr_retract(&x, &eta.scale(c(-h, 0.0))).unwrap();
            let fd = (g(plus.matrix()) - g(minus.matrix())) / (2.0 * h);
            let an = real_inner(&grad, &eta).unwrap();
            assert!(
                (fd - an).abs() <= 1e-6 * (1.0 + an.abs()),
                "direction {k}: fd {fd} vs analytic {an}"
            );
        }
        // ∇g = X projects to zero
        let z = riemannian_grad_stiefel(x.matrix(), &x).unwrap();
        assert!(z.frobenius_norm() < 1e-12);
    }

    #[test]
    fn qr_retract_basics() {
        let x = test_point();
        let zero = ComplexMatrix::zeros(4, 2);
        let back = qr_retract(&x, &zero).unwrap();
        assert!(back.matrix().sub(x.matrix()).unwrap().frobenius_norm() < 1e-12);

        // second-order agreement: dist(R_X(tξ), X + tξ) = O(t²)
        let xi_raw = ComplexMatrix::from_fn(4, 2, |i, j| c((i as f64).sin(), (j as f64) * 0.4));
        let xi = proj_tangent(&x, &xi_raw).unwrap();
        let mut prev_ratio = f64::INFINITY;
        for &t in &[1e-2, 1e-3] {
            let step = xi.scale(c(t, 0.0));
            let r = qr_retract(&x, &step).unwrap();
            let lin = x.matrix().add(&step).unwrap();
            let dist = r.matrix().sub(&lin).unwrap().frobenius_norm();
            let ratio = dist / (t * t);
            assert!(ratio < 10.0 * xi.frobenius_norm_sq().max(1.0));
            assert!(ratio < prev_ratio * 10.0);
            prev_ratio = ratio;
        }
    }
}
