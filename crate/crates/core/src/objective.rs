//! Objective families and their gradients.
//!
//! Four families are supported, all scale invariant:
//!
//! * `TraceMax` — Σ_q B^(q) contracted γ times with conj(u_q) and γ times
//!   with u_q over Hermitian tensors B^(q) of order 2γ (trace maximization
//!   when γ = 1 and the B^(q) coincide),
//! * `JatdS` — joint approximate symmetric tensor diagonalization: one factor
//!   shared across every mode, objective Σ_ℓ α_ℓ ‖diag(W^(ℓ))‖²,
//! * `Jatd` — joint approximate tensor diagonalization with one factor per
//!   mode and a common truncation rank r,
//! * `Jatc` — joint approximate tensor compression with per-mode ranks r_p
//!   and objective Σ_ℓ α_ℓ ‖W^(ℓ) restricted to the rank box‖².
//!
//! Every problem is posed on (products of) unitary groups via the lift that
//! keeps the first r columns; the pair classes C1 = {i < j ≤ r},
//! C2 = {i ≤ r < j}, C3 = {r < i < j} structure the rotation machinery.
//!
//! The dagger flag selects between conjugate-transpose and plain transpose in
//! the multilinear transforms; the ♯ switch derived from it threads through
//! gradients and the skew fields Λ^(p).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::manifold::{self, UnitaryTuple};
use crate::matrix::ComplexMatrix;
use crate::tensor::{DenseTensor, STRUCT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    TraceMax,
    JatdS,
    Jatd,
    Jatc,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::TraceMax => "trace-max",
            Family::JatdS => "jatd-s",
            Family::Jatd => "jatd",
            Family::Jatc => "jatc",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "trace-max" | "tracemax" => Ok(Family::TraceMax),
            "jatd-s" | "jatds" => Ok(Family::JatdS),
            "jatd" => Ok(Family::Jatd),
            "jatc" => Ok(Family::Jatc),
            other => Err(Error::InvalidArgument(format!("unknown family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dagger {
    ConjTranspose,
    Transpose,
}

impl Dagger {
    pub fn as_str(&self) -> &'static str {
        match self {
            Dagger::ConjTranspose => "conj-transpose",
            Dagger::Transpose => "transpose",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "conj-transpose" | "h" | "H" => Ok(Dagger::ConjTranspose),
            "transpose" | "t" | "T" => Ok(Dagger::Transpose),
            other => Err(Error::InvalidArgument(format!("unknown dagger '{other}'"))),
        }
    }
}

/// ♯ as the formulas use it: conjugation when † is the conjugate transpose,
/// identity when † is the plain transpose.
#[inline]
pub fn sharp(z: Complex64, dagger: Dagger) -> Complex64 {
    match dagger {
        Dagger::ConjTranspose => z.conj(),
        Dagger::Transpose => z,
    }
}

/// A fully validated problem instance.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub family: Family,
    pub tensors: Vec<DenseTensor>,
    pub weights: Vec<f64>,
    /// Per-mode ranks for `Jatc`; a single common rank otherwise.
    pub ranks: Vec<usize>,
    pub dagger: Dagger,
    /// Contraction half-order for `TraceMax`; 1 for the other families.
    pub gamma: usize,
    /// Purely informational: inputs were real, so reports may drop the
    /// imaginary parts.
    pub real_data: bool,
}

impl ProblemSpec {
    pub fn new(
        family: Family,
        tensors: Vec<DenseTensor>,
        weights: Vec<f64>,
        ranks: Vec<usize>,
        dagger: Dagger,
        gamma: usize,
    ) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::InvalidArgument("problem needs at least one tensor".into()));
        }
        let weights = if weights.is_empty() {
            vec![1.0; tensors.len()]
        } else {
            weights
        };
        if weights.len() != tensors.len() {
            return Err(Error::DimensionMismatch(
                "one weight per tensor required".into(),
            ));
        }
        if weights.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::InvalidArgument("weights must be strictly positive".into()));
        }
        let dims0 = tensors[0].dims().to_vec();
        if tensors.iter().any(|t| t.dims() != dims0.as_slice()) {
            return Err(Error::DimensionMismatch(
                "all tensors must share the same dimensions".into(),
            ));
        }

        let spec = ProblemSpec {
            family,
            tensors,
            weights,
            ranks,
            dagger,
            gamma,
            real_data: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let dims = self.tensors[0].dims();
        match self.family {
            Family::TraceMax => {
                if self.gamma == 0 || dims.len() != 2 * self.gamma {
                    return Err(Error::InvalidArgument(format!(
                        "trace-max tensors must have order 2γ; got order {} with γ = {}",
                        dims.len(),
                        self.gamma
                    )));
                }
                let n = dims[0];
                if dims.iter().any(|&d| d != n) {
                    return Err(Error::InvalidArgument(
                        "trace-max tensors need equal mode dimensions".into(),
                    ));
                }
                let r = self.common_rank()?;
                if r == 0 || r > n {
                    return Err(Error::InvalidArgument(format!("rank {r} out of 1..={n}")));
                }
                if self.tensors.len() != 1 && self.tensors.len() != r {
                    return Err(Error::InvalidArgument(
                        "trace-max takes one shared tensor or one per kept column".into(),
                    ));
                }
                if self.weights.iter().any(|&a| a != 1.0) {
                    return Err(Error::InvalidArgument(
                        "trace-max does not take weights".into(),
                    ));
                }
                for t in &self.tensors {
                    let residual_ok = t.is_hermitian(self.gamma, STRUCT_TOL)?;
                    if !residual_ok {
                        return Err(Error::NotHermitian {
                            residual: f64::NAN,
                            tol: STRUCT_TOL,
                        });
                    }
                }
            }
            Family::JatdS => {
                if self.gamma != 1 {
                    return Err(Error::InvalidArgument("jatd-s uses γ = 1".into()));
                }
                if dims.len() < 2 {
                    return Err(Error::InvalidArgument("jatd-s needs order ≥ 2".into()));
                }
                let n = dims[0];
                if dims.iter().any(|&d| d != n) {
                    return Err(Error::InvalidArgument(
                        "jatd-s tensors need equal mode dimensions".into(),
                    ));
                }
                let r = self.common_rank()?;
                if r == 0 || r > n {
                    return Err(Error::InvalidArgument(format!("rank {r} out of 1..={n}")));
                }
            }
            Family::Jatd => {
                if self.gamma != 1 {
                    return Err(Error::InvalidArgument("jatd uses γ = 1".into()));
                }
                if dims.len() < 2 {
                    return Err(Error::InvalidArgument("jatd needs order ≥ 2".into()));
                }
                let r = self.common_rank()?;
                let n_min = *dims.iter().min().unwrap();
                if r == 0 || r > n_min {
                    return Err(Error::InvalidArgument(format!(
                        "jatd needs a common rank in 1..={n_min}, got {r}"
                    )));
                }
            }
            Family::Jatc => {
                if self.gamma != 1 {
                    return Err(Error::InvalidArgument("jatc uses γ = 1".into()));
                }
                if self.ranks.len() != dims.len() {
                    return Err(Error::DimensionMismatch(
                        "jatc needs one rank per mode".into(),
                    ));
                }
                for (r, n) in self.ranks.iter().zip(dims) {
                    if *r == 0 || r > n {
                        return Err(Error::InvalidArgument(format!("rank {r} out of 1..={n}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// The single common rank of trace-max / jatd / jatd-s problems.
    /// A rank list is accepted if all entries agree.
    pub fn common_rank(&self) -> Result<usize> {
        match self.ranks.as_slice() {
            [] => Err(Error::InvalidArgument("missing rank".into())),
            [r] => Ok(*r),
            rs => {
                if rs.iter().all(|&r| r == rs[0]) {
                    Ok(rs[0])
                } else {
                    Err(Error::InvalidArgument(
                        "this family takes a single common rank".into(),
                    ))
                }
            }
        }
    }

    pub fn rank_for_mode(&self, p: usize) -> usize {
        match self.family {
            Family::Jatc => self.ranks[p],
            _ => self.ranks[0],
        }
    }

    /// Order of the data tensors.
    pub fn tensor_order(&self) -> usize {
        self.tensors[0].dims().len()
    }

    /// Number of independent unitary factors the iterate carries.
    pub fn factor_count(&self) -> usize {
        match self.family {
            Family::TraceMax | Family::JatdS => 1,
            Family::Jatd | Family::Jatc => self.tensor_order(),
        }
    }

    /// Sizes of the unitary factors.
    pub fn factor_sizes(&self) -> Vec<usize> {
        match self.family {
            Family::TraceMax | Family::JatdS => vec![self.tensors[0].dims()[0]],
            Family::Jatd | Family::Jatc => self.tensors[0].dims().to_vec(),
        }
    }

    pub fn identity_tuple(&self) -> UnitaryTuple {
        UnitaryTuple::identities(&self.factor_sizes())
    }

    /// Factor acting on tensor mode `p` (the shared factor for jatd-s).
    pub fn mode_factor<'a>(&self, upsilon: &'a UnitaryTuple, p: usize) -> &'a ComplexMatrix {
        match self.family {
            Family::JatdS => upsilon.factor(0),
            Family::TraceMax => upsilon.factor(0),
            _ => upsilon.factor(p),
        }
    }

    fn check_tuple(&self, upsilon: &UnitaryTuple) -> Result<()> {
        if upsilon.len() != self.factor_count() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} unitary factors, got {}",
                self.factor_count(),
                upsilon.len()
            )));
        }
        for (m, n) in upsilon.mats().iter().zip(self.factor_sizes()) {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch("factor size mismatch".into()));
            }
        }
        Ok(())
    }
}

fn dagger_apply(u: &ComplexMatrix, dagger: Dagger) -> ComplexMatrix {
    match dagger {
        Dagger::ConjTranspose => u.adjoint(),
        Dagger::Transpose => u.transpose(),
    }
}

/// Transforms every data tensor by the current tuple:
/// W^(ℓ) = A^(ℓ) ×_1 (U^(1))^† ⋯ ×_d (U^(d))^† for the diagonalization and
/// compression families, and W^(q) = B^(q) ×_{t≤γ} Uᴴ ×_{t>γ} Uᵀ for the
/// trace family.
pub fn transformed(spec: &ProblemSpec, upsilon: &UnitaryTuple) -> Result<Vec<DenseTensor>> {
    spec.check_tuple(upsilon)?;
    let mut out = Vec::with_capacity(spec.tensors.len());
    match spec.family {
        Family::TraceMax => {
            let u = upsilon.factor(0);
            let uh = u.adjoint();
            let ut = u.transpose();
            for t in &spec.tensors {
                let mut w = t.clone();
                for p in 0..spec.gamma {
                    w = w.mode_product(&uh, p)?;
                }
                for p in spec.gamma..2 * spec.gamma {
                    w = w.mode_product(&ut, p)?;
                }
                out.push(w);
            }
        }
        _ => {
            for t in &spec.tensors {
                let mut w = t.clone();
                for p in 0..spec.tensor_order() {
                    let f = dagger_apply(spec.mode_factor(upsilon, p), spec.dagger);
                    w = w.mode_product(&f, p)?;
                }
                out.push(w);
            }
        }
    }
    Ok(out)
}

/// Sum of squared moduli over the rank box of a tensor.
fn box_norm_sq(t: &DenseTensor, ranks: &[usize]) -> f64 {
    let mut s = 0.0;
    let mut idx = vec![0usize; t.order()];
    loop {
        s += t.get(&idx).norm_sqr();
        if !crate::tensor::next_index(&mut idx, ranks) {
            return s;
        }
    }
}

/// Sum of |W_{qq..q}|² for q below the common rank.
fn truncated_diag_norm_sq(t: &DenseTensor, r: usize) -> f64 {
    t.diag_vector()
        .iter()
        .take(r)
        .map(|v| v.norm_sqr())
        .sum()
}

/// Objective value from already-transformed tensors.
pub fn objective_from_w(spec: &ProblemSpec, w: &[DenseTensor]) -> f64 {
    match spec.family {
        Family::TraceMax => {
            let r = spec.ranks[0];
            let shared = spec.tensors.len() == 1;
            (0..r)
                .map(|q| {
                    let t = if shared { &w[0] } else { &w[q] };
                    let idx = vec![q; t.order()];
                    t.get(&idx).re
                })
                .sum()
        }
        Family::Jatd | Family::JatdS => {
            let r = spec.ranks[0];
            w.iter()
                .zip(&spec.weights)
                .map(|(t, a)| a * truncated_diag_norm_sq(t, r))
                .sum()
        }
        Family::Jatc => w
            .iter()
            .zip(&spec.weights)
            .map(|(t, a)| a * box_norm_sq(t, &spec.ranks))
            .sum(),
    }
}

/// Evaluates the objective at a tuple.
pub fn evaluate(spec: &ProblemSpec, upsilon: &UnitaryTuple) -> Result<f64> {
    Ok(objective_from_w(spec, &transformed(spec, upsilon)?))
}

/// Transformed tensors together with the objective value.
#[derive(Debug, Clone)]
pub struct ObjectiveState {
    pub w: Vec<DenseTensor>,
    pub value: f64,
}

/// Evaluates a diagonalization objective (jatd or jatd-s).
pub fn eval_jatd(spec: &ProblemSpec, upsilon: &UnitaryTuple) -> Result<ObjectiveState> {
    if spec.family != Family::Jatd && spec.family != Family::JatdS {
        return Err(Error::InvalidArgument("eval_jatd needs a jatd/jatd-s problem".into()));
    }
    let w = transformed(spec, upsilon)?;
    let value = objective_from_w(spec, &w);
    Ok(ObjectiveState { w, value })
}

/// Evaluates a compression objective.
pub fn eval_jatc(spec: &ProblemSpec, upsilon: &UnitaryTuple) -> Result<ObjectiveState> {
    if spec.family != Family::Jatc {
        return Err(Error::InvalidArgument("eval_jatc needs a jatc problem".into()));
    }
    let w = transformed(spec, upsilon)?;
    let value = objective_from_w(spec, &w);
    Ok(ObjectiveState { w, value })
}

/// Evaluates the homogeneous polynomial Σ_q B^(q) ×₁ u_qᴴ ⋯ ×_{2γ} u_qᵀ by
/// direct contraction. The imaginary part vanishes for Hermitian B; the real
/// part is returned.
pub fn eval_hposm(spec: &ProblemSpec, u: &ComplexMatrix) -> Result<f64> {
    if spec.family != Family::TraceMax {
        return Err(Error::InvalidArgument("eval_hposm needs a trace-max problem".into()));
    }
    let gamma = spec.gamma;
    let r = spec.ranks[0];
    let n = spec.tensors[0].dims()[0];
    if u.rows() != n {
        return Err(Error::DimensionMismatch("factor size mismatch".into()));
    }
    let shared = spec.tensors.len() == 1;
    let mut total = Complex64::ZERO;
    let order = 2 * gamma;
    let bounds = vec![n; order];
    for q in 0..r {
        let b = if shared { &spec.tensors[0] } else { &spec.tensors[q] };
        let col = u.col(q);
        let mut idx = vec![0usize; order];
        loop {
            let mut coeff = Complex64::ONE;
            for t in 0..gamma {
                coeff *= col[idx[t]].conj();
            }
            for t in gamma..order {
                coeff *= col[idx[t]];
            }
            total += b.get(&idx) * coeff;
            if !crate::tensor::next_index(&mut idx, &bounds) {
                break;
            }
        }
    }
    Ok(total.re)
}

/// Diagonal concentration Per = Σ|T_{qq..q}|² / ‖T‖².
pub fn per_ratio(t: &DenseTensor) -> Result<f64> {
    let total = t.frobenius_norm_sq();
    if total == 0.0 {
        return Err(Error::InvalidArgument("Per is undefined for the zero tensor".into()));
    }
    Ok(t.diag_norm_sq() / total)
}

/// Value of the mode-p restricted objective with the factor acting on mode
/// p replaced by an arbitrary matrix (the ambient extension the Euclidean
/// gradient differentiates). Other modes keep their current factors.
pub fn eval_mode_replaced(
    spec: &ProblemSpec,
    upsilon: &UnitaryTuple,
    p: usize,
    replacement: &ComplexMatrix,
) -> Result<f64> {
    match spec.family {
        Family::TraceMax => {
            if p != 0 {
                return Err(Error::InvalidArgument("trace-max has a single factor".into()));
            }
            eval_hposm(spec, replacement)
        }
        _ => {
            let d = spec.tensor_order();
            if p >= d {
                return Err(Error::InvalidArgument(format!("mode {p} out of range")));
            }
            let mut w_all = Vec::with_capacity(spec.tensors.len());
            for t in &spec.tensors {
                let mut w = t.clone();
                for mode in 0..d {
                    let factor = if mode == p {
                        replacement
                    } else {
                        spec.mode_factor(upsilon, mode)
                    };
                    let f = dagger_apply(factor, spec.dagger);
                    w = w.mode_product(&f, mode)?;
                }
                w_all.push(w);
            }
            Ok(objective_from_w(spec, &w_all))
        }
    }
}

/// Euclidean (Wirtinger) gradient ∇ = 2 ∂g/∂U^* of the mode-p restricted
/// objective at the tuple. Columns beyond the kept rank are zero for the
/// trace and diagonalization families.
pub fn euclid_grad_mode(
    spec: &ProblemSpec,
    upsilon: &UnitaryTuple,
    p: usize,
) -> Result<ComplexMatrix> {
    spec.check_tuple(upsilon)?;
    match spec.family {
        Family::TraceMax => {
            if p != 0 {
                return Err(Error::InvalidArgument("trace-max has a single factor".into()));
            }
            euclid_grad_tracemax(spec, upsilon.factor(0))
        }
        Family::Jatd | Family::JatdS => euclid_grad_diag(spec, upsilon, p),
        Family::Jatc => euclid_grad_compression(spec, upsilon, p),
    }
}

/// Tensor transformed in every mode except `p`.
fn partial_transform(
    spec: &ProblemSpec,
    upsilon: &UnitaryTuple,
    ell: usize,
    p: usize,
) -> Result<DenseTensor> {
    let mut v = spec.tensors[ell].clone();
    for t in 0..spec.tensor_order() {
        if t == p {
            continue;
        }
        let f = dagger_apply(spec.mode_factor(upsilon, t), spec.dagger);
        v = v.mode_product(&f, t)?;
    }
    Ok(v)
}

fn euclid_grad_diag(
    spec: &ProblemSpec,
    upsilon: &UnitaryTuple,
    p: usize,
) -> Result<ComplexMatrix> {
    let d = spec.tensor_order();
    if p >= d {
        return Err(Error::InvalidArgument(format!("mode {p} out of range")));
    }
    let n_p = spec.tensors[0].dims()[p];
    let r = spec.ranks[0];
    let u_dag = dagger_apply(spec.mode_factor(upsilon, p), spec.dagger);
    let mut grad = ComplexMatrix::zeros(n_p, n_p);
    for (ell, alpha) in spec.weights.iter().enumerate() {
        let v = partial_transform(spec, upsilon, ell, p)?;
        for q in 0..r {
            // mode-p fiber of V at the diagonal position q
            let mut w_qq = Complex64::ZERO;
            let mut fiber = vec![Complex64::ZERO; n_p];
            for m in 0..n_p {
                let val = v.get_near_diag(p, m, q);
                fiber[m] = val;
                w_qq += val * u_dag.get(q, m);
            }
            for m in 0..n_p {
                let contrib = sharp(fiber[m].conj() * w_qq, spec.dagger) * (2.0 * alpha);
                let cur = grad.get(m, q);
                grad.set(m, q, cur + contrib);
            }
        }
    }
    Ok(grad)
}

fn euclid_grad_compression(
    spec: &ProblemSpec,
    upsilon: &UnitaryTuple,
    p: usize,
) -> Result<ComplexMatrix> {
    let d = spec.tensor_order();
    if p >= d {
        return Err(Error::InvalidArgument(format!("mode {p} out of range")));
    }
    let n_p = spec.tensors[0].dims()[p];
    let r_p = spec.ranks[p];
    let u_dag = dagger_apply(spec.mode_factor(upsilon, p), spec.dagger);
    let mut grad = ComplexMatrix::zeros(n_p, n_p);
    let mut bounds = spec.ranks.clone();
    bounds[p] = n_p;
    for (ell, alpha) in spec.weights.iter().enumerate() {
        let v = partial_transform(spec, upsilon, ell, p)?;
        v.for_each_mode_fiber(p, &bounds, |fiber| {
            // mode-p fiber of W at the same position
            let mut w_fiber = vec![Complex64::ZERO; n_p];
            for q in 0..n_p {
                let mut s = Complex64::ZERO;
                for m in 0..n_p {
                    s += fiber[m] * u_dag.get(q, m);
                }
                w_fiber[q] = s;
            }
            for b in 0..r_p {
                for a in 0..n_p {
                    let contrib = sharp(fiber[a].conj() * w_fiber[b], spec.dagger) * (2.0 * alpha);
                    let cur = grad.get(a, b);
                    grad.set(a, b, cur + contrib);
                }
            }
        });
    }
    Ok(grad)
}

fn euclid_grad_tracemax(spec: &ProblemSpec, u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let gamma = spec.gamma;
    let order = 2 * gamma;
    let n = spec.tensors[0].dims()[0];
    let r = spec.ranks[0];
    let shared = spec.tensors.len() == 1;
    let mut grad = ComplexMatrix::zeros(n, n);
    for q in 0..r {
        let b = if shared { &spec.tensors[0] } else { &spec.tensors[q] };
        let col = u.col(q);
        let mut idx = vec![0usize; order];
        let bounds = vec![n; order];
        loop {
            let bval = b.get(&idx);
            if bval != Complex64::ZERO {
                let mut u_part = Complex64::ONE;
                for t in gamma..order {
                    u_part *= col[idx[t]];
                }
                for t in 0..gamma {
                    let mut partial = Complex64::ONE;
                    for s in 0..gamma {
                        if s != t {
                            partial *= col[idx[s]].conj();
                        }
                    }
                    let contrib = bval * partial * u_part * 2.0;
                    let cur = grad.get(idx[t], q);
                    grad.set(idx[t], q, cur + contrib);
                }
            }
            if !crate::tensor::next_index(&mut idx, &bounds) {
                break;
            }
        }
    }
    Ok(grad)
}

/// Skew field Λ^(p) of the mode-p restricted objective computed from the
/// transformed tensors. Satisfies grad g̃_(p)(U) = U Λ^(p) with
/// Λ = skew(Uᴴ∇); exactly zero on the C3 block and the diagonal.
pub fn lambda_from_w(spec: &ProblemSpec, w: &[DenseTensor], p: usize) -> ComplexMatrix {
    match spec.family {
        Family::Jatd | Family::JatdS => lambda_diag(spec, w, p),
        Family::Jatc => lambda_compression(spec, w, p),
        Family::TraceMax => lambda_tracemax(spec, w),
    }
}

fn lambda_diag(spec: &ProblemSpec, w: &[DenseTensor], p: usize) -> ComplexMatrix {
    let n = spec.tensors[0].dims()[p];
    let r = spec.ranks[0];
    let mut l = ComplexMatrix::zeros(n, n);
    for (t, alpha) in w.iter().zip(&spec.weights) {
        let diag = t.diag_vector();
        for j in 1..n {
            for i in 0..j {
                if i >= r {
                    break; // C3: exactly zero
                }
                let w_iji = t.get_near_diag(p, j, i); // index j in mode p, i elsewhere
                let mut entry = -w_iji.conj() * diag[i];
                if j < r {
                    let w_jij = t.get_near_diag(p, i, j);
                    entry += w_jij * diag[j].conj();
                }
                let entry = match spec.dagger {
                    Dagger::ConjTranspose => entry,
                    Dagger::Transpose => entry.conj(),
                } * *alpha;
                let cur = l.get(i, j);
                l.set(i, j, cur + entry);
            }
        }
    }
    fill_skew_lower(&mut l);
    l
}

fn lambda_compression(spec: &ProblemSpec, w: &[DenseTensor], p: usize) -> ComplexMatrix {
    let n = spec.tensors[0].dims()[p];
    let r_p = spec.ranks[p];
    let mut s = ComplexMatrix::zeros(n, n);
    let bounds = spec.ranks.clone();
    for (t, alpha) in w.iter().zip(&spec.weights) {
        t.for_each_mode_fiber(p, &bounds, |fiber| {
            for b in 0..r_p {
                let fb = fiber[b].conj() * *alpha;
                for a in 0..n {
                    let cur = s.get(a, b);
                    s.set(a, b, cur + fiber[a] * fb);
                }
            }
        });
    }
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let v = s.get(i, j) - s.get(j, i).conj();
            l.set(
                i,
                j,
                match spec.dagger {
                    Dagger::ConjTranspose => v,
                    Dagger::Transpose => v.conj(),
                },
            );
        }
    }
    l
}

fn lambda_tracemax(spec: &ProblemSpec, w: &[DenseTensor]) -> ComplexMatrix {
    let gamma = spec.gamma;
    let n = spec.tensors[0].dims()[0];
    let r = spec.ranks[0];
    let shared = spec.tensors.len() == 1;
    // (Uᴴ∇)_{k,m} = 2 Σ_t W^(m) at index (m..k@t..m ; m..m), columns m < r.
    let mut uh_grad = ComplexMatrix::zeros(n, n);
    let mut idx = vec![0usize; 2 * gamma];
    for m in 0..r {
        let t = if shared { &w[0] } else { &w[m] };
        for k in 0..n {
            let mut s = Complex64::ZERO;
            for slot in 0..gamma {
                idx.fill(m);
                idx[slot] = k;
                s += t.get(&idx);
            }
            uh_grad.set(k, m, s * 2.0);
        }
    }
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let v = (uh_grad.get(i, j) - uh_grad.get(j, i).conj()) * 0.5;
            l.set(i, j, v);
        }
    }
    l
}

fn fill_skew_lower(l: &mut ComplexMatrix) {
    let n = l.rows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = -l.get(j, i).conj();
            l.set(i, j, v);
        }
    }
}

/// Skew field of the mode-p restricted objective at a tuple.
pub fn lambda_field(spec: &ProblemSpec, upsilon: &UnitaryTuple, p: usize) -> Result<ComplexMatrix> {
    if p >= spec.tensor_order() && spec.family != Family::TraceMax {
        return Err(Error::InvalidArgument(format!("mode {p} out of range")));
    }
    let w = transformed(spec, upsilon)?;
    Ok(lambda_from_w(spec, &w, p))
}

/// All per-factor skew fields: one per mode for jatd/jatc, the summed field
/// for the tied jatd-s factor, and the single trace-max field.
pub fn lambda_fields_per_factor(
    spec: &ProblemSpec,
    w: &[DenseTensor],
) -> Vec<ComplexMatrix> {
    match spec.family {
        Family::Jatd | Family::Jatc => (0..spec.tensor_order())
            .map(|p| lambda_from_w(spec, w, p))
            .collect(),
        Family::JatdS => {
            let d = spec.tensor_order();
            let mut total = lambda_from_w(spec, w, 0);
            for p in 1..d {
                total = total.add(&lambda_from_w(spec, w, p)).expect("same size");
            }
            vec![total]
        }
        Family::TraceMax => vec![lambda_tracemax(spec, w)],
    }
}

/// ‖grad f̃(υ)‖ over the product of unitary groups, via the Λ fields.
pub fn grad_norm_from_w(spec: &ProblemSpec, w: &[DenseTensor]) -> f64 {
    lambda_fields_per_factor(spec, w)
        .iter()
        .map(|l| l.frobenius_norm_sq())
        .sum::<f64>()
        .sqrt()
}

pub fn grad_norm(spec: &ProblemSpec, upsilon: &UnitaryTuple) -> Result<f64> {
    let w = transformed(spec, upsilon)?;
    Ok(grad_norm_from_w(spec, &w))
}

/// Riemannian gradient norms on the unitary lift and on the underlying
/// Stiefel product (first r columns). Stationary points coincide on the two
/// formulations, which is what these residual pairs let tests verify.
pub fn stationarity_pair_check(
    spec: &ProblemSpec,
    upsilon: &UnitaryTuple,
) -> Result<(f64, f64)> {
    let w = transformed(spec, upsilon)?;
    let res_u = grad_norm_from_w(spec, &w);

    let mut res_x_sq = 0.0;
    match spec.family {
        Family::TraceMax | Family::JatdS => {
            let u = upsilon.factor(0);
            let r = spec.ranks[0];
            let grad = if spec.family == Family::TraceMax {
                euclid_grad_tracemax(spec, u)?
            } else {
                let d = spec.tensor_order();
                let mut g = euclid_grad_mode(spec, upsilon, 0)?;
                for p in 1..d {
                    g = g.add(&euclid_grad_mode(spec, upsilon, p)?)?;
                }
                g
            };
            res_x_sq += stiefel_residual_sq(u, &grad, r)?;
        }
        _ => {
            for p in 0..spec.tensor_order() {
                let u = upsilon.factor(p);
                let grad = euclid_grad_mode(spec, upsilon, p)?;
                res_x_sq += stiefel_residual_sq(u, &grad, spec.rank_for_mode(p))?;
            }
        }
    }
    Ok((res_u, res_x_sq.sqrt()))
}

fn stiefel_residual_sq(u: &ComplexMatrix, grad_full: &ComplexMatrix, r: usize) -> Result<f64> {
    let n = u.rows();
    let x = ComplexMatrix::from_fn(n, r, |i, j| u.get(i, j));
    let gx = ComplexMatrix::from_fn(n, r, |i, j| grad_full.get(i, j));
    let proj = manifold::proj_tangent_raw(&x, &gx)?;
    Ok(proj.frobenius_norm_sq())
}

/// Hermitian lift of a jatd-s instance into a shared-tensor trace-max
/// problem of half-order d: B = Σ_ℓ α_ℓ (A^{(ℓ)*} ⊗ A^{(ℓ)})^♯.
pub fn hposm_lift_jatds(spec: &ProblemSpec) -> Result<ProblemSpec> {
    if spec.family != Family::JatdS {
        return Err(Error::InvalidArgument("lift is defined for jatd-s".into()));
    }
    let d = spec.tensor_order();
    let n = spec.tensors[0].dims()[0];
    let bounds = vec![n; 2 * d];
    let mut b = DenseTensor::zeros(&bounds)?;
    let mut idx = vec![0usize; 2 * d];
    loop {
        let mut v = Complex64::ZERO;
        for (a, alpha) in spec.tensors.iter().zip(&spec.weights) {
            let first = a.get(&idx[..d]).conj();
            let second = a.get(&idx[d..]);
            v += sharp(first * second, spec.dagger) * *alpha;
        }
        b.set(&idx, v);
        if !crate::tensor::next_index(&mut idx, &bounds) {
            break;
        }
    }
    ProblemSpec::new(
        Family::TraceMax,
        vec![b],
        vec![1.0],
        vec![spec.ranks[0]],
        Dagger::ConjTranspose,
        d,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{example_7_1, example_7_1_spec, haar_unitary, random_tensor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag_tensor(dims: &[usize], values: &[f64]) -> DenseTensor {
        let mut t = DenseTensor::zeros(dims).unwrap();
        for (q, v) in values.iter().enumerate() {
            t.set(&vec![q; dims.len()], Complex64::new(*v, 0.0));
        }
        t
    }

    #[test]
    fn hposm_identity_blocks_sum_to_rank() {
        // γ = 1, B^(q) = I_n, U = I: value is the kept rank
        let n = 4;
        let r = 3;
        let eye = DenseTensor::from_data(
            &[n, n],
            ComplexMatrix::identity(n).data().to_vec(),
        )
        .unwrap();
        let spec = ProblemSpec::new(
            Family::TraceMax,
            vec![eye; r],
            vec![1.0; r],
            vec![r],
            Dagger::ConjTranspose,
            1,
        )
        .unwrap();
        let v = eval_hposm(&spec, &ComplexMatrix::identity(n)).unwrap();
        assert!((v - r as f64).abs() < 1e-14);
    }

    #[test]
    fn jatd_identity_value_is_diag_norm() {
        let spec = example_7_1_spec();
        let state = eval_jatd(&spec, &spec.identity_tuple()).unwrap();
        assert!((state.value - 98.0).abs() < 1e-12);
        // diagonal core at identities likewise
        let d = diag_tensor(&[3, 3, 3], &[2.0, -1.0, 0.5]);
        let spec = ProblemSpec::new(
            Family::Jatd,
            vec![d],
            vec![1.0],
            vec![3],
            Dagger::ConjTranspose,
            1,
        )
        .unwrap();
        let v = evaluate(&spec, &spec.identity_tuple()).unwrap();
        assert!((v - (4.0 + 1.0 + 0.25)).abs() < 1e-14);
    }

    #[test]
    fn jatc_full_ranks_are_unitary_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_tensor(&[3, 4, 3], true, &mut rng);
        let norm = a.frobenius_norm_sq();
        let spec = ProblemSpec::new(
            Family::Jatc,
            vec![a],
            vec![2.0],
            vec![3, 4, 3],
            Dagger::ConjTranspose,
            1,
        )
        .unwrap();
        let mats = vec![
            haar_unitary(3, true, &mut rng),
            haar_unitary(4, true, &mut rng),
            haar_unitary(3, true, &mut rng),
        ];
        let v = eval_jatc(&spec, &UnitaryTuple::from_mats_unchecked(mats)).unwrap();
        assert!((v.value - 2.0 * norm).abs() < 1e-10 * (1.0 + norm));
    }

    #[test]
    fn jatc_truncation_matches_subtensor_oracle_and_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_tensor(&[3, 3, 3], true, &mut rng);
        let mk = |ranks: &[usize]| {
            ProblemSpec::new(
                Family::Jatc,
                vec![a.clone()],
                vec![1.0],
                ranks.to_vec(),
                Dagger::ConjTranspose,
                1,
            )
            .unwrap()
        };
        let spec = mk(&[2, 2, 2]);
        let v = evaluate(&spec, &spec.identity_tuple()).unwrap();
        let oracle = a.subtensor(&[2, 2, 2]).unwrap().frobenius_norm_sq();
        assert!((v - oracle).abs() < 1e-12);
        // componentwise larger ranks never decrease the value
        let upsilon = spec.identity_tuple();
        let small = evaluate(&mk(&[2, 1, 2]), &upsilon).unwrap();
        let large = evaluate(&mk(&[2, 2, 3]), &upsilon).unwrap();
        assert!(small <= v + 1e-14 && v <= large + 1e-14);
    }

    #[test]
    fn per_ratio_reference_values() {
        assert!((per_ratio(&example_7_1()).unwrap() - 98.0 / 1215.0).abs() < 1e-15);
        let d = diag_tensor(&[3, 3], &[1.0, -2.0, 0.3]);
        assert!((per_ratio(&d).unwrap() - 1.0).abs() < 1e-15);
        let ones = DenseTensor::from_data(&[2, 2], vec![Complex64::ONE; 4]).unwrap();
        assert!((per_ratio(&ones).unwrap() - 0.5).abs() < 1e-15);
        assert!(per_ratio(&DenseTensor::zeros(&[2, 2]).unwrap()).is_err());
    }

    #[test]
    fn scale_invariance_under_unimodular_diagonals() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_tensor(&[3, 3, 3], true, &mut rng);
        for family in [Family::Jatd, Family::Jatc] {
            let ranks = match family {
                Family::Jatc => vec![2, 3, 2],
                _ => vec![2],
            };
            let spec = ProblemSpec::new(
                family,
                vec![a.clone()],
                vec![1.0],
                ranks,
                Dagger::Transpose,
                1,
            )
            .unwrap();
            let mats: Vec<ComplexMatrix> =
                (0..3).map(|_| haar_unitary(3, true, &mut rng)).collect();
            let base = evaluate(&spec, &UnitaryTuple::from_mats_unchecked(mats.clone())).unwrap();
            // right-multiply one factor by a random unimodular diagonal
            let phases: Vec<f64> = (0..3).map(|k| 0.7 * k as f64 - 1.1).collect();
            let mut scaled = mats;
            for (j, ph) in phases.iter().enumerate() {
                let z = Complex64::from_polar(1.0, *ph);
                for i in 0..3 {
                    let v = scaled[1].get(i, j) * z;
                    scaled[1].set(i, j, v);
                }
            }
            let v = evaluate(&spec, &UnitaryTuple::from_mats_unchecked(scaled)).unwrap();
            assert!(
                (v - base).abs() <= 1e-10 * (1.0 + base.abs()),
                "{family:?} not scale invariant: {base} vs {v}"
            );
        }
    }

    #[test]
    fn hermitian_lift_reproduces_jatds_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for dagger in [Dagger::ConjTranspose, Dagger::Transpose] {
            let tensors = vec![
                random_tensor(&[3, 3], true, &mut rng),
                random_tensor(&[3, 3], true, &mut rng),
            ];
            let spec = ProblemSpec::new(
                Family::JatdS,
                tensors,
                vec![1.0, 0.5],
                vec![2],
                dagger,
                1,
            )
            .unwrap();
            let lifted = hposm_lift_jatds(&spec).unwrap();
            assert!(lifted.tensors[0].is_hermitian(2, 1e-12).unwrap());
            let u = haar_unitary(3, true, &mut rng);
            let tuple = UnitaryTuple::from_mats_unchecked(vec![u.clone()]);
            let direct = evaluate(&spec, &tuple).unwrap();
            let via_lift = eval_hposm(&lifted, &u).unwrap();
            assert!(
                (direct - via_lift).abs() <= 1e-10 * (1.0 + direct.abs()),
                "{dagger:?}: {direct} vs {via_lift}"
            );
        }
    }

    #[test]
    fn hposm_values_are_real_for_hermitian_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = crate::generate::random_hermitian(2, 2, true, &mut rng);
        let spec = ProblemSpec::new(
            Family::TraceMax,
            vec![b],
            vec![1.0],
            vec![2],
            Dagger::ConjTranspose,
            2,
        )
        .unwrap();
        // eval_hposm sums a Hermitian-symmetric contraction; compare against
        // the naive complex total to bound the imaginary part
        let u = haar_unitary(2, true, &mut rng);
        let v1 = eval_hposm(&spec, &u).unwrap();
        let w = transformed(&spec, &UnitaryTuple::from_mats_unchecked(vec![u])).unwrap();
        let diag = w[0].get(&[0, 0, 0, 0]) + w[0].get(&[1, 1, 1, 1]);
        assert!(diag.im.abs() <= 1e-12 * (1.0 + v1.abs()));
        assert!((v1 - diag.re).abs() <= 1e-10 * (1.0 + v1.abs()));
    }

    #[test]
    fn stationary_at_identity_for_diagonal_tensors() {
        let d = diag_tensor(&[3, 3, 3], &[3.0, 2.0, 1.0]);
        let spec = ProblemSpec::new(
            Family::Jatd,
            vec![d],
            vec![1.0],
            vec![3],
            Dagger::ConjTranspose,
            1,
        )
        .unwrap();
        let upsilon = spec.identity_tuple();
        for p in 0..3 {
            let lam = lambda_field(&spec, &upsilon, p).unwrap();
            assert!(lam.frobenius_norm() < 1e-14);
            let grad = euclid_grad_mode(&spec, &upsilon, p).unwrap();
            let (rg, _) =
                crate::manifold::riemannian_grad_unitary(&grad, upsilon.factor(p)).unwrap();
            assert!(rg.frobenius_norm() < 1e-14);
        }
        let (ru, rx) = stationarity_pair_check(&spec, &upsilon).unwrap();
        assert!(ru < 1e-14 && rx < 1e-14);
    }

    #[test]
    fn rejects_invalid_specs() {
        let a = DenseTensor::zeros(&[3, 3, 3]).unwrap();
        // zero weight
        assert!(ProblemSpec::new(
            Family::Jatd,
            vec![a.clone()],
            vec![0.0],
            vec![2],
            Dagger::ConjTranspose,
            1
        )
        .is_err());
        // rank above the smallest dimension
        assert!(ProblemSpec::new(
            Family::Jatd,
            vec![a.clone()],
            vec![1.0],
            vec![4],
            Dagger::ConjTranspose,
            1
        )
        .is_err());
        // jatd with unequal per-mode ranks
        assert!(ProblemSpec::new(
            Family::Jatd,
            vec![a.clone()],
            vec![1.0],
            vec![2, 2, 3],
            Dagger::ConjTranspose,
            1
        )
        .is_err());
        // non-Hermitian trace-max tensor
        let mut nh = DenseTensor::zeros(&[2, 2]).unwrap();
        nh.set(&[0, 1], Complex64::ONE);
        assert!(ProblemSpec::new(
            Family::TraceMax,
            vec![nh],
            vec![1.0],
            vec![1],
            Dagger::ConjTranspose,
            1
        )
        .is_err());
    }
}
