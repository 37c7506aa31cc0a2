//! The elementary rotation subproblem.
//!
//! Restricting the objective to a single Givens rotation
//! `U ← U·G(i, j, Ψ(θ, φ))` turns it into a function of (θ, φ). For every
//! γ = 1 family that function is a quadratic form
//! `h(Ψ) = zᵀMz + C` in `z_{α,β} = (cos αθ, −sin αθ cos βφ, −sin αθ sin βφ)`
//! with a symmetric 3×3 arrow matrix M (zero lower-right block). Maximizing h
//! is an eigenproblem; the proximal variant penalizes by ε‖z − e₁‖² and
//! becomes a sphere-constrained least-squares problem solved through its
//! secular equation.
//!
//! For half-orders γ = 2, 3 the elementary function is a sum of quadratic
//! forms with explicit coefficient matrices M^{(α,β)}; those decompositions
//! are constructed (and verified) here. They collapse back to a single form
//! in z_{2,1} on C1 pairs of the symmetric families, which is what makes the
//! shared-factor solver possible.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::manifold::UnitaryTuple;
use crate::matrix::ComplexMatrix;
use crate::objective::{
    eval_hposm, objective_from_w, sharp, transformed, Dagger, Family, ProblemSpec,
};
use crate::tensor::{next_index, DenseTensor, STRUCT_TOL};

pub type Mat3 = [[f64; 3]; 3];

/// Quadratic-form representation of one elementary subproblem.
#[derive(Debug, Clone)]
pub struct QuadSubproblem {
    pub m: Mat3,
    pub c: f64,
    pub alpha: u32,
    pub beta: u32,
}

impl QuadSubproblem {
    pub fn zero(alpha: u32, beta: u32, c: f64) -> Self {
        QuadSubproblem {
            m: [[0.0; 3]; 3],
            c,
            alpha,
            beta,
        }
    }

    /// Arrow structure: zero lower-right 2×2 block (exact).
    pub fn is_arrow(&self) -> bool {
        self.m[1][1] == 0.0 && self.m[1][2] == 0.0 && self.m[2][1] == 0.0 && self.m[2][2] == 0.0
    }

    pub fn eval_z(&self, z: &[f64; 3]) -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                s += z[a] * self.m[a][b] * z[b];
            }
        }
        s + self.c
    }

    pub fn eval_theta_phi(&self, theta: f64, phi: f64) -> f64 {
        self.eval_z(&z_vector(self.alpha, self.beta, theta, phi))
    }
}

/// z_{α,β}(θ, φ) = (cos αθ, −sin αθ cos βφ, −sin αθ sin βφ).
pub fn z_vector(alpha: u32, beta: u32, theta: f64, phi: f64) -> [f64; 3] {
    let at = alpha as f64 * theta;
    let bp = beta as f64 * phi;
    [at.cos(), -at.sin() * bp.cos(), -at.sin() * bp.sin()]
}

/// Rotation angles for one Givens update. θ lives in [0, π/(2α)] by the
/// branch choice w₁ = cos αθ ≥ 0.
#[derive(Debug, Clone, Copy)]
pub struct GivensParams {
    pub mode: usize,
    pub pair: (usize, usize),
    pub theta: f64,
    pub phi: f64,
}

/// Solved subproblem: angles, the assembled 2×2 rotation, the maximizing
/// unit vector in z-coordinates, and the objective gain the rotation
/// predicts.
#[derive(Debug, Clone)]
pub struct RotationPlan {
    pub params: GivensParams,
    pub psi: ComplexMatrix,
    pub w: [f64; 3],
    pub predicted_gain: f64,
}

/// Ψ(θ, φ) = [[cos θ, −sin θ e^{iφ}], [sin θ e^{−iφ}, cos θ]].
pub fn psi_matrix(theta: f64, phi: f64) -> ComplexMatrix {
    let c = theta.cos();
    let s = theta.sin();
    let e = Complex64::from_polar(1.0, phi);
    let mut m = ComplexMatrix::zeros(2, 2);
    m.set(0, 0, Complex64::new(c, 0.0));
    m.set(0, 1, -s * e);
    m.set(1, 0, s * e.conj());
    m.set(1, 1, Complex64::new(c, 0.0));
    m
}

/// Column-major [Ψ11, Ψ21, Ψ12, Ψ22] for the in-place Givens update.
pub fn psi_flat(theta: f64, phi: f64) -> [Complex64; 4] {
    let m = psi_matrix(theta, phi);
    [m.get(0, 0), m.get(1, 0), m.get(0, 1), m.get(1, 1)]
}

/// Index-pair classes relative to the kept rank r (zero-based pair i < j):
/// C1 both kept, C2 straddling, C3 both dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairClass {
    C1,
    C2,
    C3,
}

pub fn classify_pair(i: usize, j: usize, r: usize) -> PairClass {
    debug_assert!(i < j);
    if j < r {
        PairClass::C1
    } else if i < r {
        PairClass::C2
    } else {
        PairClass::C3
    }
}

fn varrho(dagger: Dagger) -> f64 {
    match dagger {
        Dagger::ConjTranspose => 1.0,
        Dagger::Transpose => -1.0,
    }
}

// ---------------------------------------------------------------------------
// Elementary evaluation (the brute-force oracle for every builder)
// ---------------------------------------------------------------------------

/// Objective value after applying G(i, j, Ψ(θ, φ)) on the right of U^(p),
/// all other factors fixed. For the shared-factor families this rotates the
/// copy acting on mode p only, which is the semantics the per-mode builders
/// represent.
pub fn elementary_eval(
    spec: &ProblemSpec,
    upsilon: &UnitaryTuple,
    p: usize,
    pair: (usize, usize),
    theta: f64,
    phi: f64,
) -> Result<f64> {
    let (i, j) = pair;
    if i >= j {
        return Err(Error::InvalidArgument("pair needs i < j".into()));
    }
    let psi = psi_flat(theta, phi);
    match spec.family {
        Family::TraceMax => {
            if p != 0 {
                return Err(Error::InvalidArgument("trace-max has a single factor".into()));
            }
            let mut u = upsilon.factor(0).clone();
            u.apply_givens_right(i, j, &psi);
            eval_hposm(spec, &u)
        }
        Family::JatdS => {
            let d = spec.tensor_order();
            if p >= d {
                return Err(Error::InvalidArgument(format!("mode {p} out of range")));
            }
            let mut rotated = upsilon.factor(0).clone();
            rotated.apply_givens_right(i, j, &psi);
            let mut w_all = Vec::with_capacity(spec.tensors.len());
            for t in &spec.tensors {
                let mut w = t.clone();
                for mode in 0..d {
                    let f = if mode == p {
                        dagger_of(&rotated, spec.dagger)
                    } else {
                        dagger_of(upsilon.factor(0), spec.dagger)
                    };
                    w = w.mode_product(&f, mode)?;
                }
                w_all.push(w);
            }
            Ok(objective_from_w(spec, &w_all))
        }
        Family::Jatd | Family::Jatc => {
            let d = spec.tensor_order();
            if p >= d {
                return Err(Error::InvalidArgument(format!("mode {p} out of range")));
            }
            let mut mats: Vec<ComplexMatrix> = upsilon.mats().to_vec();
            mats[p].apply_givens_right(i, j, &psi);
            let rotated = UnitaryTuple::from_mats_unchecked(mats);
            let w = transformed(spec, &rotated)?;
            Ok(objective_from_w(spec, &w))
        }
    }
}

/// Objective value after rotating the shared factor of a symmetric family —
/// the rotation hits every mode at once.
pub fn elementary_eval_tied(
    spec: &ProblemSpec,
    upsilon: &UnitaryTuple,
    pair: (usize, usize),
    theta: f64,
    phi: f64,
) -> Result<f64> {
    if spec.factor_count() != 1 {
        return Err(Error::InvalidArgument(
            "tied evaluation needs a single-factor family".into(),
        ));
    }
    let (i, j) = pair;
    let psi = psi_flat(theta, phi);
    let mut u = upsilon.factor(0).clone();
    u.apply_givens_right(i, j, &psi);
    let rotated = UnitaryTuple::from_mats_unchecked(vec![u]);
    match spec.family {
        Family::TraceMax => eval_hposm(spec, rotated.factor(0)),
        _ => {
            let w = transformed(spec, &rotated)?;
            Ok(objective_from_w(spec, &w))
        }
    }
}

fn dagger_of(u: &ComplexMatrix, dagger: Dagger) -> ComplexMatrix {
    match dagger {
        Dagger::ConjTranspose => u.adjoint(),
        Dagger::Transpose => u.transpose(),
    }
}

// ---------------------------------------------------------------------------
// Builders (γ = 1 arrow forms)
// ---------------------------------------------------------------------------

/// Arrow subproblem for the diagonalization families, built from the
/// transformed tensors. `f_current` supplies the constant via C = h(I) − M₁₁.
pub fn build_jatd_from_w(
    spec: &ProblemSpec,
    w: &[DenseTensor],
    f_current: f64,
    p: usize,
    pair: (usize, usize),
) -> Result<QuadSubproblem> {
    if spec.family != Family::Jatd && spec.family != Family::JatdS {
        return Err(Error::InvalidArgument("jatd builder needs jatd/jatd-s".into()));
    }
    let (i, j) = pair;
    let r = spec.ranks[0];
    let rho = varrho(spec.dagger);
    let mut m11 = 0.0;
    let mut m12 = 0.0;
    let mut m13 = 0.0;
    match classify_pair(i, j, r) {
        PairClass::C3 => return Ok(QuadSubproblem::zero(1, 1, f_current)),
        PairClass::C2 => {
            for (t, a) in w.iter().zip(&spec.weights) {
                let w_ii = t.get_near_diag(p, i, i);
                let w_iji = t.get_near_diag(p, j, i);
                let z = w_ii.conj() * w_iji;
                m11 += a * (w_ii.norm_sqr() - w_iji.norm_sqr());
                m12 += a * (-z.re);
                m13 += a * rho * z.im;
            }
        }
        PairClass::C1 => {
            for (t, a) in w.iter().zip(&spec.weights) {
                let w_ii = t.get_near_diag(p, i, i);
                let w_jj = t.get_near_diag(p, j, j);
                let w_iji = t.get_near_diag(p, j, i);
                let w_jij = t.get_near_diag(p, i, j);
                let zi = w_ii.conj() * w_iji;
                let zj = w_jj.conj() * w_jij;
                m11 += a
                    * (w_ii.norm_sqr() + w_jj.norm_sqr()
                        - w_iji.norm_sqr()
                        - w_jij.norm_sqr());
                m12 += a * (zj.re - zi.re);
                m13 += a * rho * (zi.im + zj.im);
            }
        }
    }
    Ok(arrow_subproblem(m11, m12, m13, f_current))
}

/// Arrow subproblem for the compression family.
pub fn build_jatc_from_w(
    spec: &ProblemSpec,
    w: &[DenseTensor],
    f_current: f64,
    p: usize,
    pair: (usize, usize),
) -> Result<QuadSubproblem> {
    if spec.family != Family::Jatc {
        return Err(Error::InvalidArgument("jatc builder needs jatc".into()));
    }
    let (i, j) = pair;
    let r_p = spec.ranks[p];
    match classify_pair(i, j, r_p) {
        // within the kept block or fully outside: the boxed norm is invariant
        PairClass::C1 | PairClass::C3 => Ok(QuadSubproblem::zero(1, 1, f_current)),
        PairClass::C2 => {
            let rho = varrho(spec.dagger);
            let mut m11 = 0.0;
            let mut m12 = 0.0;
            let mut m13 = 0.0;
            for (t, a) in w.iter().zip(&spec.weights) {
                t.for_each_mode_fiber(p, &spec.ranks, |fiber| {
                    let wi = fiber[i];
                    let wj = fiber[j];
                    let z = wi.conj() * wj;
                    m11 += a * (wi.norm_sqr() - wj.norm_sqr());
                    m12 += a * (-z.re);
                    m13 += a * rho * z.im;
                });
            }
            Ok(arrow_subproblem(m11, m12, m13, f_current))
        }
    }
}

/// Arrow subproblem for trace maximization with γ = 1, one quadratic form
/// per kept column; shared half-order 2, 3 tensors fall back to the single
/// surviving z_{2,1} form on C1 pairs.
pub fn build_tracemax_from_w(
    spec: &ProblemSpec,
    w: &[DenseTensor],
    f_current: f64,
    pair: (usize, usize),
) -> Result<QuadSubproblem> {
    if spec.family != Family::TraceMax {
        return Err(Error::InvalidArgument("trace-max builder needs trace-max".into()));
    }
    let (i, j) = pair;
    let r = spec.ranks[0];
    let shared = spec.tensors.len() == 1;
    let class = classify_pair(i, j, r);
    if spec.gamma == 1 {
        let block = |q: usize| -> (f64, f64, Complex64) {
            let t = if shared { &w[0] } else { &w[q] };
            (t.get(&[i, i]).re, t.get(&[j, j]).re, t.get(&[i, j]))
        };
        let (m11, m12, m13) = match class {
            PairClass::C3 => (0.0, 0.0, 0.0),
            PairClass::C2 => {
                let (wii, wjj, wij) = block(i);
                (wii - wjj, -wij.re, -wij.im)
            }
            PairClass::C1 => {
                if shared {
                    // identical forms from columns i and j cancel
                    (0.0, 0.0, 0.0)
                } else {
                    let (aii, ajj, aij) = block(i);
                    let (bii, bjj, bij) = block(j);
                    (aii - ajj - bii + bjj, -aij.re + bij.re, -aij.im + bij.im)
                }
            }
        };
        return Ok(arrow_subproblem(m11, m12, m13, f_current));
    }
    // γ ≥ 2: only the shared-tensor C1 case collapses to one form.
    match class {
        PairClass::C3 => Ok(QuadSubproblem::zero(2, 1, f_current)),
        PairClass::C1 if shared && (spec.gamma == 2 || spec.gamma == 3) => {
            let c = pair_subtensor(&w[0], i, j);
            let c_sym = semisymmetrize(&c, spec.gamma)?;
            let forms = build_quadforms_gamma(&c_sym, spec.gamma)?;
            let m21 = forms
                .terms
                .iter()
                .find(|(a, b, _)| *a == 2 && *b == 1)
                .map(|(_, _, m)| *m)
                .expect("γ ≥ 2 decomposition contains the (2,1) term");
            let mut m = m21;
            for row in &mut m {
                for v in row.iter_mut() {
                    *v *= 2.0;
                }
            }
            let m11 = m[0][0];
            Ok(QuadSubproblem {
                m,
                c: f_current - m11,
                alpha: 2,
                beta: 1,
            })
        }
        _ => Err(Error::Unsupported(format!(
            "trace-max subproblem with γ = {} on a {:?} pair is a sum of quadratic forms",
            spec.gamma, class
        ))),
    }
}

/// Subproblem of the shared-factor diagonalization families when the
/// rotation hits every mode at once. On C1 pairs the odd-α forms of the x-
/// and y-contractions cancel and a single z_{2,1} form survives.
pub fn build_jatds_tied_from_w(
    spec: &ProblemSpec,
    w: &[DenseTensor],
    f_current: f64,
    pair: (usize, usize),
) -> Result<QuadSubproblem> {
    if spec.family != Family::JatdS {
        return Err(Error::InvalidArgument("tied builder needs jatd-s".into()));
    }
    let d = spec.tensor_order();
    let (i, j) = pair;
    let r = spec.ranks[0];
    match classify_pair(i, j, r) {
        PairClass::C3 => Ok(QuadSubproblem::zero(2, 1, f_current)),
        PairClass::C2 => Err(Error::Unsupported(
            "shared-factor subproblem on a C2 pair is a sum of quadratic forms".into(),
        )),
        PairClass::C1 => {
            if d > 3 {
                return Err(Error::Unsupported(format!(
                    "no constructive decomposition for order {d} > 3"
                )));
            }
            let c = c_tensor_tied(spec, w, i, j)?;
            let c_sym = semisymmetrize(&c, d)?;
            let forms = build_quadforms_gamma(&c_sym, d)?;
            let m21 = forms
                .terms
                .iter()
                .find(|(a, b, _)| *a == 2 && *b == 1)
                .map(|(_, _, m)| *m)
                .expect("decomposition contains the (2,1) term");
            let mut m = m21;
            for row in &mut m {
                for v in row.iter_mut() {
                    *v *= 2.0;
                }
            }
            let m11 = m[0][0];
            Ok(QuadSubproblem {
                m,
                c: f_current - m11,
                alpha: 2,
                beta: 1,
            })
        }
    }
}

/// Dispatches to the builder the solver actually uses for each family.
pub fn build_for_solver(
    spec: &ProblemSpec,
    w: &[DenseTensor],
    f_current: f64,
    p: usize,
    pair: (usize, usize),
) -> Result<QuadSubproblem> {
    match spec.family {
        Family::Jatd => build_jatd_from_w(spec, w, f_current, p, pair),
        Family::Jatc => build_jatc_from_w(spec, w, f_current, p, pair),
        Family::TraceMax => build_tracemax_from_w(spec, w, f_current, pair),
        Family::JatdS => build_jatds_tied_from_w(spec, w, f_current, pair),
    }
}

/// Convenience wrappers computing the transform on the spot.
pub fn build_subproblem_jatd(
    spec: &ProblemSpec,
    upsilon: &UnitaryTuple,
    p: usize,
    pair: (usize, usize),
) -> Result<QuadSubproblem> {
    let w = transformed(spec, upsilon)?;
    let f = objective_from_w(spec, &w);
    build_jatd_from_w(spec, &w, f, p, pair)
}

pub fn build_subproblem_jatc(
    spec: &ProblemSpec,
    upsilon: &UnitaryTuple,
    p: usize,
    pair: (usize, usize),
) -> Result<QuadSubproblem> {
    let w = transformed(spec, upsilon)?;
    let f = objective_from_w(spec, &w);
    build_jatc_from_w(spec, &w, f, p, pair)
}

pub fn build_subproblem_tracemax(
    spec: &ProblemSpec,
    upsilon: &UnitaryTuple,
    pair: (usize, usize),
) -> Result<QuadSubproblem> {
    let w = transformed(spec, upsilon)?;
    let f = objective_from_w(spec, &w);
    build_tracemax_from_w(spec, &w, f, pair)
}

pub fn build_subproblem_jatds_tied(
    spec: &ProblemSpec,
    upsilon: &UnitaryTuple,
    pair: (usize, usize),
) -> Result<QuadSubproblem> {
    let w = transformed(spec, upsilon)?;
    let f = objective_from_w(spec, &w);
    build_jatds_tied_from_w(spec, &w, f, pair)
}

fn arrow_subproblem(m11: f64, m12: f64, m13: f64, f_current: f64) -> QuadSubproblem {
    QuadSubproblem {
        m: [[m11, m12, m13], [m12, 0.0, 0.0], [m13, 0.0, 0.0]],
        c: f_current - m11,
        alpha: 1,
        beta: 1,
    }
}

/// 2×..×2 subtensor of `t` restricted to indices {i, j} in every mode.
fn pair_subtensor(t: &DenseTensor, i: usize, j: usize) -> DenseTensor {
    let d = t.order();
    let dims = vec![2usize; d];
    let mut out = DenseTensor::zeros(&dims).expect("valid dims");
    let mut sel = vec![0usize; d];
    let mut full = vec![0usize; d];
    loop {
        for (s, f) in sel.iter().zip(full.iter_mut()) {
            *f = if *s == 0 { i } else { j };
        }
        out.set(&sel, t.get(&full));
        if !next_index(&mut sel, &dims) {
            return out;
        }
    }
}

/// C tensor of the tied rotation: C[a; b] = Σ_ℓ α_ℓ (W^(ℓ)[a]* · W^(ℓ)[b])^♯
/// over multi-indices a, b ∈ {i, j}^d.
fn c_tensor_tied(
    spec: &ProblemSpec,
    w: &[DenseTensor],
    i: usize,
    j: usize,
) -> Result<DenseTensor> {
    let d = spec.tensor_order();
    let dims = vec![2usize; 2 * d];
    let mut out = DenseTensor::zeros(&dims)?;
    let mut sel = vec![0usize; 2 * d];
    let mut ia = vec![0usize; d];
    let mut ib = vec![0usize; d];
    loop {
        for t in 0..d {
            ia[t] = if sel[t] == 0 { i } else { j };
            ib[t] = if sel[d + t] == 0 { i } else { j };
        }
        let mut v = Complex64::ZERO;
        for (t, a) in w.iter().zip(&spec.weights) {
            v += sharp(t.get(&ia).conj() * t.get(&ib), spec.dagger) * *a;
        }
        out.set(&sel, v);
        if !next_index(&mut sel, &dims) {
            return Ok(out);
        }
    }
}

// ---------------------------------------------------------------------------
// γ = 1, 2, 3 quadratic-form decompositions
// ---------------------------------------------------------------------------

/// Sum-of-forms representation of the x- and y-contractions of a 2-dim
/// Hermitian γ-semisymmetric tensor: x-side Σ z_{α,β}ᵀ M^{(α,β)} z + const_x,
/// y-side with signs (−1)^α and const_y.
#[derive(Debug, Clone)]
pub struct GammaDecomposition {
    pub gamma: usize,
    pub terms: Vec<(u32, u32, Mat3)>,
    pub const_x: f64,
    pub const_y: f64,
}

impl GammaDecomposition {
    pub fn eval_x(&self, theta: f64, phi: f64) -> f64 {
        self.terms
            .iter()
            .map(|(a, b, m)| quad_eval(m, &z_vector(*a, *b, theta, phi)))
            .sum::<f64>()
            + self.const_x
    }

    pub fn eval_y(&self, theta: f64, phi: f64) -> f64 {
        self.terms
            .iter()
            .map(|(a, b, m)| {
                let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
                sign * quad_eval(m, &z_vector(*a, *b, theta, phi))
            })
            .sum::<f64>()
            + self.const_y
    }
}

fn quad_eval(m: &Mat3, z: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            s += z[a] * m[a][b] * z[b];
        }
    }
    s
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for t in 0..rest.len() {
            let v = rest.remove(t);
            prefix.push(v);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(t, v);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..k).collect(), &mut out);
    out
}

/// Averages over permutations of the first γ and the last γ indices.
pub fn semisymmetrize(c: &DenseTensor, gamma: usize) -> Result<DenseTensor> {
    if c.order() != 2 * gamma {
        return Err(Error::InvalidArgument("semisymmetrize: order must be 2γ".into()));
    }
    let dims = c.dims().to_vec();
    let perms = permutations(gamma);
    let weight = 1.0 / (perms.len() * perms.len()) as f64;
    let mut out = DenseTensor::zeros(&dims)?;
    let mut idx = vec![0usize; 2 * gamma];
    let mut src = vec![0usize; 2 * gamma];
    loop {
        let mut v = Complex64::ZERO;
        for pa in &perms {
            for pb in &perms {
                for t in 0..gamma {
                    src[t] = idx[pa[t]];
                    src[gamma + t] = idx[gamma + pb[t]];
                }
                v += c.get(&src);
            }
        }
        out.set(&idx, v * weight);
        if !next_index(&mut idx, &dims) {
            return Ok(out);
        }
    }
}

pub fn is_semisymmetric(c: &DenseTensor, gamma: usize, tol: f64) -> Result<bool> {
    let sym = semisymmetrize(c, gamma)?;
    let mut worst = 0.0f64;
    for (a, b) in c.data().iter().zip(sym.data()) {
        worst = worst.max((a - b).norm());
    }
    Ok(worst <= tol)
}

/// Explicit M^{(α,β)} matrices of the x- and y-contractions for γ ∈ {1,2,3}.
/// The input must be 2-dimensional in every mode, Hermitian and
/// γ-semisymmetric.
pub fn build_quadforms_gamma(c: &DenseTensor, gamma: usize) -> Result<GammaDecomposition> {
    if !(1..=3).contains(&gamma) {
        return Err(Error::Unsupported(format!(
            "no constructive decomposition for γ = {gamma}"
        )));
    }
    if c.order() != 2 * gamma || c.dims().iter().any(|&d| d != 2) {
        return Err(Error::InvalidArgument(
            "decomposition needs a 2×⋯×2 tensor of order 2γ".into(),
        ));
    }
    if !c.is_hermitian(gamma, STRUCT_TOL)? {
        return Err(Error::NotHermitian {
            residual: f64::NAN,
            tol: STRUCT_TOL,
        });
    }
    if !is_semisymmetric(c, gamma, STRUCT_TOL)? {
        return Err(Error::InvalidArgument("tensor is not γ-semisymmetric".into()));
    }

    let e = |idx: &[usize]| c.get(idx);
    match gamma {
        1 => {
            let c11 = e(&[0, 0]).re;
            let c22 = e(&[1, 1]).re;
            let c12 = e(&[0, 1]);
            let m11: Mat3 = [
                [c11 - c22, -c12.re, -c12.im],
                [-c12.re, 0.0, 0.0],
                [-c12.im, 0.0, 0.0],
            ];
            Ok(GammaDecomposition {
                gamma,
                terms: vec![(1, 1, m11)],
                const_x: c22,
                const_y: c11,
            })
        }
        2 => {
            let c1111 = e(&[0, 0, 0, 0]).re;
            let c2222 = e(&[1, 1, 1, 1]).re;
            let c1112 = e(&[0, 0, 0, 1]);
            let c1222 = e(&[0, 1, 1, 1]);
            let c1122 = e(&[0, 0, 1, 1]);
            let c1212 = e(&[0, 1, 0, 1]).re;
            let m21: Mat3 = [
                [
                    (c1111 + c2222) / 4.0,
                    (2.0 * c1222.re - 2.0 * c1112.re) / 4.0,
                    (2.0 * c1222.im - 2.0 * c1112.im) / 4.0,
                ],
                [
                    (2.0 * c1222.re - 2.0 * c1112.re) / 4.0,
                    (2.0 * c1122.re + 4.0 * c1212) / 4.0,
                    (2.0 * c1122.im) / 4.0,
                ],
                [
                    (2.0 * c1222.im - 2.0 * c1112.im) / 4.0,
                    (2.0 * c1122.im) / 4.0,
                    (-2.0 * c1122.re + 4.0 * c1212) / 4.0,
                ],
            ];
            let m11: Mat3 = [
                [
                    c1111 - c2222,
                    -c1222.re - c1112.re,
                    -c1222.im - c1112.im,
                ],
                [-c1222.re - c1112.re, 0.0, 0.0],
                [-c1222.im - c1112.im, 0.0, 0.0],
            ];
            Ok(GammaDecomposition {
                gamma,
                terms: vec![(2, 1, m21), (1, 1, m11)],
                const_x: (3.0 * c2222 - c1111) / 4.0,
                const_y: (3.0 * c1111 - c2222) / 4.0,
            })
        }
        3 => {
            // Obtained by expanding the contraction in multiple angles:
            // cᵏs̃ᵐ products of degree 6 resolve into {1, cos 2αθ, sin 2αθ}
            // and e^{±ikφ} into {cos βφ, sin βφ, cos 2φ, sin 2φ} pieces each
            // of which one z_{α,β} form supplies. Checked against direct
            // contraction on a (θ, φ) grid and against the endpoint values
            // F(0, ·) = C₁..₁ and F_y(0, ·) = C₂..₂.
            let d0 = e(&[0, 0, 0, 0, 0, 0]).re;
            let d1 = e(&[0, 0, 1, 0, 0, 1]).re;
            let d2 = e(&[0, 1, 1, 0, 1, 1]).re;
            let d3 = e(&[1, 1, 1, 1, 1, 1]).re;
            let c01 = e(&[0, 0, 0, 0, 0, 1]);
            let c12 = e(&[0, 0, 1, 0, 1, 1]);
            let c23 = e(&[0, 1, 1, 1, 1, 1]);
            let e02 = e(&[0, 0, 0, 0, 1, 1]);
            let e13 = e(&[0, 0, 1, 1, 1, 1]);
            let c03 = e(&[0, 0, 0, 1, 1, 1]);

            let m11: Mat3 = {
                let off_r = -(15.0 * c01.re + 27.0 * c12.re + 15.0 * c23.re) / 16.0;
                let off_i = -(15.0 * c01.im + 27.0 * c12.im + 15.0 * c23.im) / 16.0;
                let dd = -3.0 * (e02.re - e13.re) / 8.0;
                let ee = -3.0 * (e02.im - e13.im) / 8.0;
                [
                    [(15.0 * d0 + 9.0 * d1 - 9.0 * d2 - 15.0 * d3) / 16.0, off_r, off_i],
                    [off_r, dd, ee],
                    [off_i, ee, -dd],
                ]
            };
            let m21: Mat3 = {
                let off_r = -0.75 * (c01.re - c23.re);
                let off_i = -0.75 * (c01.im - c23.im);
                let dd = 0.75 * (e02.re + e13.re);
                let ee = 0.75 * (e02.im + e13.im);
                [
                    [0.375 * (d0 - 3.0 * d1 - 3.0 * d2 + d3), off_r, off_i],
                    [off_r, dd, ee],
                    [off_i, ee, -dd],
                ]
            };
            let m31: Mat3 = {
                let off_r = -3.0 * (c01.re - 3.0 * c12.re + c23.re) / 16.0;
                let off_i = -3.0 * (c01.im - 3.0 * c12.im + c23.im) / 16.0;
                let dd = 3.0 * (e02.re - e13.re) / 8.0;
                let ee = 3.0 * (e02.im - e13.im) / 8.0;
                [
                    [(d0 - 9.0 * d1 + 9.0 * d2 - d3) / 16.0, off_r, off_i],
                    [off_r, dd, ee],
                    [off_i, ee, -dd],
                ]
            };
            let m13: Mat3 = [
                [0.0, -3.0 * c03.re / 16.0, -3.0 * c03.im / 16.0],
                [-3.0 * c03.re / 16.0, 0.0, 0.0],
                [-3.0 * c03.im / 16.0, 0.0, 0.0],
            ];
            let m33: Mat3 = [
                [0.0, c03.re / 16.0, c03.im / 16.0],
                [c03.re / 16.0, 0.0, 0.0],
                [c03.im / 16.0, 0.0, 0.0],
            ];
            Ok(GammaDecomposition {
                gamma,
                terms: vec![(3, 3, m33), (3, 1, m31), (2, 1, m21), (1, 1, m11), (1, 3, m13)],
                const_x: (-3.0 * d0 + 9.0 * d1 + 9.0 * d2 + 5.0 * d3) / 8.0,
                const_y: (5.0 * d0 + 9.0 * d1 + 9.0 * d2 - 3.0 * d3) / 8.0,
            })
        }
        _ => unreachable!(),
    }
}

// ---------------------------------------------------------------------------
// Symmetric 3×3 eigendecomposition
// ---------------------------------------------------------------------------

/// Eigenvalues (descending) and matching eigenvectors of a symmetric 3×3
/// matrix, by cyclic Jacobi rotations to tolerance 1e-14 of the scale.
pub fn sym_eig3(m: &Mat3) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut a = *m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(1e-300);
    for _sweep in 0..64 {
        let off = (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]).sqrt();
        if off <= 1e-14 * scale {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq.abs() <= 1e-300 {
                continue;
            }
            let tau = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = if tau >= 0.0 {
                1.0 / (tau + (1.0 + tau * tau).sqrt())
            } else {
                -1.0 / (-tau + (1.0 + tau * tau).sqrt())
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;
            // A ← JᵀAJ with the rotation in the (p, q) plane
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for k in 0..3 {
                let vkp = v[k][p];
                let vkq = v[k][q];
                v[k][p] = c * vkp - s * vkq;
                v[k][q] = s * vkp + c * vkq;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&x, &y| a[y][y].partial_cmp(&a[x][x]).expect("finite eigenvalues"));
    let vals = [a[order[0]][order[0]], a[order[1]][order[1]], a[order[2]][order[2]]];
    let mut vecs = [[0.0; 3]; 3];
    for (slot, &k) in order.iter().enumerate() {
        for row in 0..3 {
            vecs[slot][row] = v[row][k];
        }
    }
    (vals, vecs)
}

fn normalize3(v: &mut [f64; 3]) -> f64 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n > 0.0 {
        v[0] /= n;
        v[1] /= n;
        v[2] /= n;
    }
    n
}

/// Deterministic sign: first component of nonneglible magnitude positive.
fn fix_sign3(v: &mut [f64; 3]) {
    let tol = 1e-14;
    for k in 0..3 {
        if v[k].abs() > tol {
            if v[k] < 0.0 {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
            return;
        }
    }
}

fn mat3_mul_vec(m: &Mat3, z: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for a in 0..3 {
        for b in 0..3 {
            out[a] += m[a][b] * z[b];
        }
    }
    out
}

fn mat3_norm(m: &Mat3) -> f64 {
    m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// Plain and proximal solves
// ---------------------------------------------------------------------------

/// Maximizes zᵀMz over the unit sphere, returning the branch-fixed
/// maximizer (w₁ ≥ 0), the rotation it encodes, and the exact gain over the
/// identity rotation λ₁ − M₁₁.
pub fn solve_quadratic(q: &QuadSubproblem) -> Result<RotationPlan> {
    let m = &q.m;
    let w = if q.is_arrow() {
        let s2 = m[0][1] * m[0][1] + m[0][2] * m[0][2];
        if s2 == 0.0 {
            if m[0][0] >= 0.0 {
                [1.0, 0.0, 0.0]
            } else {
                // λ₁ = 0 with eigenspace z₁ = 0; the in-plane swap gains −M₁₁
                [0.0, 1.0, 0.0]
            }
        } else {
            let lam1 = 0.5 * (m[0][0] + (m[0][0] * m[0][0] + 4.0 * s2).sqrt());
            let mut w = [lam1, m[0][1], m[0][2]];
            normalize3(&mut w);
            w
        }
    } else {
        let (vals, vecs) = sym_eig3(m);
        let scale = mat3_norm(m).max(1.0);
        // span of the top eigenspace, then the member closest to e₁
        let mut w = [0.0f64; 3];
        for (k, vec) in vecs.iter().enumerate() {
            if vals[0] - vals[k] <= 1e-12 * scale {
                for a in 0..3 {
                    w[a] += vec[0] * vec[a];
                }
            }
        }
        if normalize3(&mut w) < 1e-9 {
            w = vecs[0];
        }
        w
    };
    let mut w = w;
    if w[0] < 0.0 {
        for x in w.iter_mut() {
            *x = -*x;
        }
    }
    if w[0].abs() <= 1e-14 {
        fix_sign3(&mut w);
    }
    plan_from_z(q, w, gain_over_identity(m, &w))
}

/// zᵀMz − M₁₁ evaluated without the cancellation the direct difference
/// suffers for near-identity z: the w₁² − 1 term is rewritten through the
/// unit-norm constraint.
fn gain_over_identity(m: &Mat3, z: &[f64; 3]) -> f64 {
    let t_sq = z[1] * z[1] + z[2] * z[2];
    -m[0][0] * t_sq
        + 2.0 * z[0] * (m[0][1] * z[1] + m[0][2] * z[2])
        + m[1][1] * z[1] * z[1]
        + 2.0 * m[1][2] * z[1] * z[2]
        + m[2][2] * z[2] * z[2]
}

/// Maximizes zᵀMz + 2ε⟨z, e₁⟩ over the unit sphere via the stationarity
/// condition (λI − M)z = εe₁ with λ ≥ λ₁(M), root-found on the secular
/// function; the hard case (e₁ ⊥ top eigenspace) gets the boundary
/// eigenvector correction.
pub fn solve_proximal(q: &QuadSubproblem, epsilon: f64) -> Result<RotationPlan> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("proximal weight must be positive".into()));
    }
    let m = &q.m;
    let (vals, vecs) = sym_eig3(m);
    // components of e₁ in the eigenbasis and gaps below λ₁
    let b = [vecs[0][0], vecs[1][0], vecs[2][0]];
    let lam1 = vals[0];
    let gaps = [0.0, lam1 - vals[1], lam1 - vals[2]];
    let scale = mat3_norm(m).max(epsilon).max(1.0);
    let gap_tol = 1e-12 * scale;

    // Parametrize by μ = λ − λ₁ ≥ 0; the secular function
    // g(μ) = Σ (ε b_k / (μ + gap_k))² − 1 is strictly decreasing with
    // g(ε) ≤ 0, so the root (when e₁ meets the top eigenspace) lies in
    // (0, ε] and plain bisection is exact to rounding.
    let z_of = |mu: f64| -> [f64; 3] {
        let mut z = [0.0f64; 3];
        for k in 0..3 {
            if b[k] != 0.0 {
                let coef = epsilon * b[k] / (mu + gaps[k]);
                for a in 0..3 {
                    z[a] += coef * vecs[k][a];
                }
            }
        }
        z
    };
    let g = |mu: f64| -> f64 {
        (0..3)
            .map(|k| (epsilon * b[k] / (mu + gaps[k])).powi(2))
            .sum::<f64>()
            - 1.0
    };

    let b_top_sq: f64 = (0..3)
        .filter(|&k| gaps[k] <= gap_tol)
        .map(|k| b[k] * b[k])
        .sum();
    let z = if b_top_sq.sqrt() <= 1e-14 {
        // hard case: e₁ ⊥ top eigenspace; fix λ = λ₁ and put the leftover
        // mass on a top eigenvector
        let mut z = [0.0f64; 3];
        let mut perp_sq = 0.0;
        for k in 0..3 {
            if gaps[k] > gap_tol && b[k] != 0.0 {
                let coef = epsilon * b[k] / gaps[k];
                perp_sq += coef * coef;
                for a in 0..3 {
                    z[a] += coef * vecs[k][a];
                }
            }
        }
        let t = (1.0 - perp_sq.min(1.0)).sqrt();
        let mut top = vecs[0];
        fix_sign3(&mut top);
        for a in 0..3 {
            z[a] += t * top[a];
        }
        z
    } else {
        let mut lo = 0.0f64;
        let mut hi = epsilon * (1.0 + 1e-12) + 1e-300;
        let mut mu = 0.5 * hi;
        for _ in 0..200 {
            let gval = g(mu);
            if gval.abs() <= 1e-13 {
                break;
            }
            if gval > 0.0 {
                lo = mu;
            } else {
                hi = mu;
            }
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            mu = mid;
        }
        z_of(mu)
    };

    let mut z = z;
    let n = normalize3(&mut z);
    if (n - 1.0).abs() > 1e-8 {
        return Err(Error::Numerical(format!(
            "proximal solution off the sphere by {:.3e}",
            (n - 1.0).abs()
        )));
    }
    // KKT residual ‖Mz + εe₁ − λz‖ with λ = zᵀMz + ε z₁
    let mz = mat3_mul_vec(m, &z);
    let lam_opt = z[0] * mz[0] + z[1] * mz[1] + z[2] * mz[2] + epsilon * z[0];
    let mut kkt = 0.0f64;
    for a in 0..3 {
        let e1 = if a == 0 { epsilon } else { 0.0 };
        kkt += (mz[a] + e1 - lam_opt * z[a]).powi(2);
    }
    let kkt = kkt.sqrt();
    if kkt > 1e-10 * scale {
        return Err(Error::Numerical(format!(
            "proximal KKT residual {kkt:.3e} exceeds tolerance"
        )));
    }
    if z[0] < 0.0 {
        // never optimal: flipping z raises the linear term
        return Err(Error::Numerical("proximal solution has z₁ < 0".into()));
    }
    plan_from_z(q, z, gain_over_identity(m, &z))
}

fn plan_from_z(q: &QuadSubproblem, z: [f64; 3], gain: f64) -> Result<RotationPlan> {
    let (theta, phi) = w_to_givens(&z, q.alpha, q.beta)?;
    Ok(RotationPlan {
        params: GivensParams {
            mode: 0,
            pair: (0, 0),
            theta,
            phi,
        },
        psi: psi_matrix(theta, phi),
        w: z,
        predicted_gain: gain,
    })
}

/// Inverts z_{α,β}: αθ = arccos(w₁) ∈ [0, π/2], βφ = atan2(−w₃, −w₂), with
/// φ = 0 where the rotation leaves φ undetermined (sin αθ ≈ 0). The angle
/// is recovered as atan2(√(w₂²+w₃²), w₁), which keeps full relative
/// precision for the near-identity rotations the endgame of a sweep
/// consists of.
pub fn w_to_givens(w: &[f64; 3], alpha: u32, beta: u32) -> Result<(f64, f64)> {
    let norm = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "w must be a unit vector, got norm {norm}"
        )));
    }
    if w[0] < -1e-12 {
        return Err(Error::InvalidArgument("w₁ must be nonnegative".into()));
    }
    let sin_at = w[1].hypot(w[2]);
    let at = sin_at.atan2(w[0].max(0.0));
    let theta = at / alpha as f64;
    let phi = if sin_at <= 1e-100 {
        0.0
    } else {
        let mut bp = (-w[2]).atan2(-w[1]);
        if bp <= -std::f64::consts::PI {
            bp = std::f64::consts::PI;
        }
        bp / beta as f64
    };
    Ok((theta, phi))
}

// ---------------------------------------------------------------------------
// Spectral diagnostics for the convergence conditions
// ---------------------------------------------------------------------------

/// Spectral report on M: eigen triple, the (A1) separation ratio
/// (λ₂−λ₃)/(λ₁−λ₃), and whether the first components of the second and third
/// eigenvectors vanish ((A2) and (A3)).
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub lambdas: [f64; 3],
    pub w: [f64; 3],
    pub u: [f64; 3],
    pub v: [f64; 3],
    pub a1_ratio: Option<f64>,
    pub a2: bool,
    pub a3: bool,
    pub degenerate: bool,
}

pub fn condition_diagnostics(q: &QuadSubproblem) -> ConditionReport {
    let (vals, vecs) = sym_eig3(&q.m);
    let scale = mat3_norm(&q.m).max(1.0);
    let tol = 1e-10 * scale;
    let degenerate = (vals[0] - vals[2]).abs() <= tol;
    let a1_ratio = if degenerate {
        None
    } else {
        Some((vals[1] - vals[2]) / (vals[0] - vals[2]))
    };
    ConditionReport {
        lambdas: vals,
        w: vecs[0],
        u: vecs[1],
        v: vecs[2],
        a1_ratio,
        a2: vecs[1][0].abs() <= tol,
        a3: vecs[2][0].abs() <= tol,
        degenerate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eig3_on_example_matrix() {
        // λ = (5, 0, −1) with u₁ = 0
        let m: Mat3 = [[1.0, -2.0, -2.0], [-2.0, 1.5, 1.5], [-2.0, 1.5, 1.5]];
        let (vals, vecs) = sym_eig3(&m);
        assert!((vals[0] - 5.0).abs() < 1e-12);
        assert!(vals[1].abs() < 1e-12);
        assert!((vals[2] + 1.0).abs() < 1e-12);
        assert!(vecs[1][0].abs() < 1e-10);
        let rep = condition_diagnostics(&QuadSubproblem {
            m,
            c: 0.0,
            alpha: 1,
            beta: 1,
        });
        assert!(rep.a2);
        assert!(!rep.degenerate);
        assert!((rep.a1_ratio.unwrap() - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn diagnostics_flags_degenerate() {
        let rep = condition_diagnostics(&QuadSubproblem {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            c: 0.0,
            alpha: 1,
            beta: 1,
        });
        assert!(rep.degenerate);
        assert!(rep.a1_ratio.is_none());
    }

    #[test]
    fn arrow_diagnostics_satisfy_a2() {
        let q = arrow_subproblem(0.7, 0.3, -0.4, 1.0);
        let rep = condition_diagnostics(&q);
        assert!(rep.lambdas[1].abs() < 1e-12);
        assert!(rep.a2);
    }

    #[test]
    fn solve_quadratic_closed_forms() {
        // M₁₂ = M₁₃ = 0 with M₁₁ > 0: identity plan
        let plan = solve_quadratic(&arrow_subproblem(2.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(plan.w, [1.0, 0.0, 0.0]);
        assert_eq!(plan.params.theta, 0.0);
        assert_eq!(plan.predicted_gain, 0.0);

        // M₁₁ = 0, M₁₂ = 1: w = (1,1,0)/√2, θ = π/4, φ = π
        let plan = solve_quadratic(&arrow_subproblem(0.0, 1.0, 0.0, 0.0)).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((plan.w[0] - s).abs() < 1e-14);
        assert!((plan.w[1] - s).abs() < 1e-14);
        assert!(plan.w[2].abs() < 1e-14);
        assert!((plan.params.theta - std::f64::consts::FRAC_PI_4).abs() < 1e-14);
        assert!((plan.params.phi - std::f64::consts::PI).abs() < 1e-14);
        assert!((plan.predicted_gain - 1.0).abs() < 1e-14);
    }

    #[test]
    fn solve_quadratic_monte_carlo_maximality() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let mut m = [[0.0; 3]; 3];
            for a in 0..3 {
                for b in a..3 {
                    let v: f64 = rng.random_range(-2.0..2.0);
                    m[a][b] = v;
                    m[b][a] = v;
                }
            }
            let q = QuadSubproblem {
                m,
                c: 0.0,
                alpha: 1,
                beta: 1,
            };
            let plan = solve_quadratic(&q).unwrap();
            let best = quad_eval(&m, &plan.w);
            for _ in 0..1000 {
                let mut z = [
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ];
                if normalize3(&mut z) == 0.0 {
                    continue;
                }
                assert!(quad_eval(&m, &z) <= best + 1e-9);
            }
        }
    }

    #[test]
    fn givens_roundtrip() {
        for &(alpha, beta) in &[(1u32, 1u32), (2, 1), (3, 3)] {
            for &theta in &[0.05, 0.3, std::f64::consts::FRAC_PI_2 / alpha as f64 * 0.9] {
                for &phi in &[-2.0, -0.4, 0.0, 1.1, 3.0] {
                    let phi = phi / beta as f64;
                    let z = z_vector(alpha, beta, theta, phi);
                    let (t2, p2) = w_to_givens(&z, alpha, beta).unwrap();
                    assert!((t2 - theta).abs() < 1e-12, "theta {theta} vs {t2}");
                    assert!((p2 - phi).abs() < 1e-12, "phi {phi} vs {p2}");
                }
            }
        }
        // w = (0, −1, 0): θ = π/2, φ = 0
        let (t, p) = w_to_givens(&[0.0, -1.0, 0.0], 1, 1).unwrap();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
        assert_eq!(p, 0.0);
        assert!(w_to_givens(&[0.5, 0.5, 0.0], 1, 1).is_err());
    }

    #[test]
    fn proximal_reduces_to_plain_for_small_epsilon() {
        let q = arrow_subproblem(0.8, -0.6, 0.3, 2.0);
        let plain = solve_quadratic(&q).unwrap();
        let prox = solve_proximal(&q, 1e-12).unwrap();
        for a in 0..3 {
            assert!((plain.w[a] - prox.w[a]).abs() < 1e-4);
        }
        // M = 0: proximal picks e₁ exactly
        let z = solve_proximal(&QuadSubproblem::zero(1, 1, 0.0), 1e-3).unwrap();
        assert!((z.w[0] - 1.0).abs() < 1e-12);
        assert_eq!(z.params.theta, 0.0);
    }

    #[test]
    fn proximal_gain_bound_holds() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let eps = 1e-3;
        for _ in 0..100 {
            let mut m = [[0.0; 3]; 3];
            for a in 0..3 {
                for b in a..3 {
                    let v: f64 = rng.random_range(-1.5..1.5);
                    m[a][b] = v;
                    m[b][a] = v;
                }
            }
            let q = QuadSubproblem {
                m,
                c: 0.3,
                alpha: 1,
                beta: 1,
            };
            let plan = solve_proximal(&q, eps).unwrap();
            let z = plan.w;
            let gain = quad_eval(&m, &z) - m[0][0];
            let dist_sq = (z[0] - 1.0).powi(2) + z[1] * z[1] + z[2] * z[2];
            assert!(
                gain >= eps * dist_sq - 1e-10,
                "gain {gain} < ε‖z−e₁‖² = {}",
                eps * dist_sq
            );
            // penalized objective at z beats the identity
            assert!(
                quad_eval(&m, &z) + 2.0 * eps * z[0] >= m[0][0] + 2.0 * eps - 1e-12
            );
        }
    }

    #[test]
    fn proximal_hard_case() {
        // e₁ orthogonal to the top eigenspace: M = diag(-1, 2, 0)
        let m: Mat3 = [[-1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 0.0]];
        let q = QuadSubproblem {
            m,
            c: 0.0,
            alpha: 1,
            beta: 1,
        };
        let eps = 1e-3;
        let plan = solve_proximal(&q, eps).unwrap();
        let z = plan.w;
        // stationarity with λ = λ₁ = 2: (2I−M)z = εe₁ in the e₁ component
        assert!((3.0 * z[0] - eps).abs() < 1e-12);
        assert!((z[0] * z[0] + z[1] * z[1] + z[2] * z[2] - 1.0).abs() < 1e-12);
        assert!(z[1].abs() > 0.9); // boundary eigenvector carries the mass
    }
}
