//! Iteration loops: gradient-selected and cyclic Jacobi rotations, their
//! proximal variants, and a Riemannian steepest-ascent baseline.
//!
//! One iteration updates a single factor by one Givens rotation whose 2×2
//! block solves the elementary subproblem exactly (or its ε-penalized
//! version). The transformed tensors are carried along incrementally — a
//! rotation touches two mode-p slices — and everything is rebuilt from
//! scratch at each periodic re-orthonormalization.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::generate::haar_unitary;
use crate::manifold::UnitaryTuple;
use crate::matrix::ComplexMatrix;
use crate::objective::{
    grad_norm_from_w, lambda_fields_per_factor, objective_from_w, transformed, Dagger, Family,
    ProblemSpec,
};
use crate::subproblem::{build_for_solver, psi_flat, solve_proximal, solve_quadratic};

/// Rotations between QR re-orthonormalizations of the factors.
const RENORM_PERIOD: usize = 64;

/// Line-search floor of the baseline, after which it reports MaxIter.
const MIN_STEP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairStrategy {
    GradientBased,
    Cyclic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    JacobiG,
    JacobiMg,
    JacobiMc,
    JacobiGp,
    JacobiMgp,
    BaselineRsd,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::JacobiG => "jacobi-g",
            Algorithm::JacobiMg => "jacobi-mg",
            Algorithm::JacobiMc => "jacobi-mc",
            Algorithm::JacobiGp => "jacobi-gp",
            Algorithm::JacobiMgp => "jacobi-mgp",
            Algorithm::BaselineRsd => "baseline-rsd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "jacobi-g" => Ok(Algorithm::JacobiG),
            "jacobi-mg" => Ok(Algorithm::JacobiMg),
            "jacobi-mc" => Ok(Algorithm::JacobiMc),
            "jacobi-gp" => Ok(Algorithm::JacobiGp),
            "jacobi-mgp" => Ok(Algorithm::JacobiMgp),
            "baseline-rsd" => Ok(Algorithm::BaselineRsd),
            other => Err(Error::InvalidArgument(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Pair-selection constant; `None` takes the family bound minus 1e-15.
    pub delta: Option<f64>,
    /// Proximal weight; zero solves the plain subproblem.
    pub epsilon: f64,
    pub grad_tol: f64,
    /// Rotation budget (line-search steps for the baseline).
    pub max_iter: usize,
    pub pair_strategy: PairStrategy,
    pub seed: u64,
    /// Start from a seeded Haar-random tuple instead of identities.
    pub random_init: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            delta: None,
            epsilon: 0.0,
            grad_tol: 1e-5,
            max_iter: 1000,
            pair_strategy: PairStrategy::GradientBased,
            seed: 0,
            random_init: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub k: usize,
    pub objective: f64,
    /// Gradient norm at the point the pair was selected (before the step).
    pub grad_norm: f64,
    pub mode: usize,
    pub pair: (usize, usize),
    pub theta: f64,
    pub phi: f64,
    pub step_norm: f64,
    /// Descent-inequality slack: actual gain minus the guaranteed bound.
    pub slack: f64,
    /// Subproblem-predicted objective gain (λ₁ − M₁₁ for plain solves).
    pub predicted_gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    GradConverged,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub tuple: UnitaryTuple,
    pub records: Vec<IterationRecord>,
    pub status: SolveStatus,
    pub final_objective: f64,
    pub final_grad_norm: f64,
    pub rotations: usize,
    pub sweeps: f64,
}

/// Largest admissible pair-selection constant for the problem: √2/n on a
/// single unitary group, √(2/(d·n_max(n_max−1))) on a product.
pub fn delta_bound(spec: &ProblemSpec) -> f64 {
    let sizes = spec.factor_sizes();
    if spec.factor_count() == 1 {
        2f64.sqrt() / sizes[0] as f64
    } else {
        let n_max = *sizes.iter().max().expect("nonempty") as f64;
        (2.0 / (sizes.len() as f64 * n_max * (n_max - 1.0))).sqrt()
    }
}

fn resolve_delta(spec: &ProblemSpec, config: &SolverConfig) -> Result<f64> {
    let bound = delta_bound(spec);
    match config.delta {
        None => Ok(bound - 1e-15),
        Some(d) => {
            if d <= 0.0 || d > bound {
                Err(Error::InvalidArgument(format!(
                    "delta must lie in (0, {bound:.6e}], got {d:.6e}"
                )))
            } else {
                Ok(d)
            }
        }
    }
}

fn initial_tuple(spec: &ProblemSpec, config: &SolverConfig) -> UnitaryTuple {
    if !config.random_init {
        return spec.identity_tuple();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mats = spec
        .factor_sizes()
        .iter()
        .map(|&n| haar_unitary(n, !spec.real_data, &mut rng))
        .collect();
    UnitaryTuple::from_mats_unchecked(mats)
}

/// Rotations per sweep: d·n_max(n_max−1)/2.
pub fn sweep_size(spec: &ProblemSpec) -> usize {
    let sizes = spec.factor_sizes();
    let n_max = *sizes.iter().max().expect("nonempty");
    sizes.len() * n_max * (n_max - 1) / 2
}

// ---------------------------------------------------------------------------
// Iterate state with incrementally maintained transforms
// ---------------------------------------------------------------------------

struct IterState<'a> {
    spec: &'a ProblemSpec,
    mats: Vec<ComplexMatrix>,
    w: Vec<crate::tensor::DenseTensor>,
    f: f64,
    since_renorm: usize,
}

impl<'a> IterState<'a> {
    fn new(spec: &'a ProblemSpec, start: UnitaryTuple) -> Result<Self> {
        let w = transformed(spec, &start)?;
        let f = objective_from_w(spec, &w);
        Ok(IterState {
            spec,
            mats: start.mats().to_vec(),
            w,
            f,
            since_renorm: 0,
        })
    }

    fn tuple(&self) -> UnitaryTuple {
        UnitaryTuple::from_mats_unchecked(self.mats.clone())
    }

    fn lambdas(&self) -> Vec<ComplexMatrix> {
        lambda_fields_per_factor(self.spec, &self.w)
    }

    fn grad_norm(&self) -> f64 {
        grad_norm_from_w(self.spec, &self.w)
    }

    /// Applies G(i, j, Ψ) on the right of the factor owning `mode` and
    /// pushes the rotation into the cached transforms.
    fn apply(&mut self, mode: usize, i: usize, j: usize, theta: f64, phi: f64) -> Result<()> {
        let psi = psi_flat(theta, phi);
        let c = Complex64::new(theta.cos(), 0.0);
        let s = Complex64::from_polar(theta.sin(), phi);
        // Mode-side coefficients: Ψᴴ for a conjugated transform, Ψᵀ otherwise.
        let herm = [c, s, -s.conj(), c];
        let trans = [c, s.conj(), -s, c];
        match self.spec.family {
            Family::Jatd | Family::Jatc => {
                self.mats[mode].apply_givens_right(i, j, &psi);
                let r = match self.spec.dagger {
                    Dagger::ConjTranspose => herm,
                    Dagger::Transpose => trans,
                };
                for t in &mut self.w {
                    t.rotate_mode_pair(mode, i, j, &r);
                }
            }
            Family::JatdS => {
                self.mats[0].apply_givens_right(i, j, &psi);
                let r = match self.spec.dagger {
                    Dagger::ConjTranspose => herm,
                    Dagger::Transpose => trans,
                };
                let d = self.spec.tensor_order();
                for t in &mut self.w {
                    for p in 0..d {
                        t.rotate_mode_pair(p, i, j, &r);
                    }
                }
            }
            Family::TraceMax => {
                self.mats[0].apply_givens_right(i, j, &psi);
                let gamma = self.spec.gamma;
                for t in &mut self.w {
                    for p in 0..gamma {
                        t.rotate_mode_pair(p, i, j, &herm);
                    }
                    for p in gamma..2 * gamma {
                        t.rotate_mode_pair(p, i, j, &trans);
                    }
                }
            }
        }
        self.since_renorm += 1;
        if self.since_renorm >= RENORM_PERIOD {
            self.renorm()?;
        } else {
            self.f = objective_from_w(self.spec, &self.w);
        }
        Ok(())
    }

    /// QR re-orthonormalization plus a full rebuild of the transforms.
    fn renorm(&mut self) -> Result<()> {
        for m in &mut self.mats {
            *m = m.qr_positive()?;
        }
        let tuple = self.tuple();
        self.w = transformed(self.spec, &tuple)?;
        self.f = objective_from_w(self.spec, &self.w);
        self.since_renorm = 0;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Pair selection
// ---------------------------------------------------------------------------

/// Pair maximizing the elementary gradient norm (the 2×2 submatrix of Λ)
/// over all factors and pairs; summing those norms over pairs dominates
/// ‖Λ‖², so the maximizer satisfies the δ-inequality whenever
/// δ ≤ √(2/(d·n_max(n_max−1))). Ties break lexicographically in (p, i, j).
/// Returns None when every field vanishes (stationary point). Fields of
/// scale-invariant objectives have zero diagonal, making this the largest
/// off-diagonal entry.
pub fn select_pair_gradient(lambdas: &[ComplexMatrix]) -> Option<(usize, usize, usize)> {
    let mut best: Option<(usize, usize, usize)> = None;
    let mut best_mag = 0.0f64;
    for (p, l) in lambdas.iter().enumerate() {
        let n = l.rows();
        for i in 0..n {
            for j in (i + 1)..n {
                let mag = pair_grad_norm_sq(l, i, j);
                if mag > best_mag {
                    best_mag = mag;
                    best = Some((p, i, j));
                }
            }
        }
    }
    best
}

/// ‖grad h_{(i,j)}‖² = |Λ_ii|² + |Λ_jj|² + 2|Λ_ij|².
pub fn pair_grad_norm_sq(l: &ComplexMatrix, i: usize, j: usize) -> f64 {
    l.get(i, i).norm_sqr() + l.get(j, j).norm_sqr() + 2.0 * l.get(i, j).norm_sqr()
}

/// Cyclic pair schedule: modes alternate every call, each holding its own
/// pair cursor through (0,1) → (0,2) → .. → (0,n−1) → (1,2) → .. →
/// (n−2,n−1) → wrap.
pub struct CyclicCursor {
    sizes: Vec<usize>,
    pair: Vec<(usize, usize)>,
    mode: usize,
}

impl CyclicCursor {
    pub fn new(sizes: &[usize]) -> Self {
        CyclicCursor {
            sizes: sizes.to_vec(),
            pair: vec![(0, 1); sizes.len()],
            mode: 0,
        }
    }

    /// Next (mode, i, j) in the schedule.
    pub fn next(&mut self) -> (usize, usize, usize) {
        let p = self.mode;
        let (i, j) = self.pair[p];
        let n = self.sizes[p];
        let nxt = if j + 1 < n {
            (i, j + 1)
        } else if i + 2 < n {
            (i + 1, i + 2)
        } else {
            (0, 1)
        };
        self.pair[p] = nxt;
        self.mode = (self.mode + 1) % self.sizes.len();
        (p, i, j)
    }
}

// ---------------------------------------------------------------------------
// Jacobi loops
// ---------------------------------------------------------------------------

fn run_jacobi(
    spec: &ProblemSpec,
    config: &SolverConfig,
    strategy: PairStrategy,
) -> Result<SolveResult> {
    let delta = resolve_delta(spec, config)?;
    let mut state = IterState::new(spec, initial_tuple(spec, config))?;
    let mut cursor = CyclicCursor::new(&spec.factor_sizes());
    // consecutive-skip budget that provably revisits every pair once
    let total_pairs: usize = spec.factor_count()
        * spec
            .factor_sizes()
            .iter()
            .map(|&n| n * (n - 1) / 2)
            .max()
            .unwrap_or(1)
            .max(1);
    let mut records = Vec::new();
    let mut rotations = 0usize;
    let mut skips = 0usize;
    let status;
    loop {
        let grad = state.grad_norm();
        if grad <= config.grad_tol {
            status = SolveStatus::GradConverged;
            break;
        }
        if rotations >= config.max_iter {
            status = SolveStatus::MaxIter;
            break;
        }
        let (p, i, j) = match strategy {
            PairStrategy::GradientBased => {
                let lambdas = state.lambdas();
                match select_pair_gradient(&lambdas) {
                    Some(sel) => sel,
                    None => {
                        status = SolveStatus::GradConverged;
                        break;
                    }
                }
            }
            PairStrategy::Cyclic => cursor.next(),
        };
        let q = build_for_solver(spec, &state.w, state.f, p, (i, j))?;
        let plan = if config.epsilon > 0.0 {
            solve_proximal(&q, config.epsilon)?
        } else {
            solve_quadratic(&q)?
        };
        // void plan: the subproblem is constant at its maximum (C3 pairs,
        // invariant blocks); apply nothing and move on. Tiny positive gains
        // are still applied — past the objective's resolution they keep
        // driving the gradient below the stopping tolerance.
        if plan.predicted_gain <= 0.0 {
            skips += 1;
            let stalled = match strategy {
                // re-selection is deterministic: one void gradient pick is a stall
                PairStrategy::GradientBased => true,
                PairStrategy::Cyclic => skips >= total_pairs,
            };
            if stalled {
                status = SolveStatus::MaxIter;
                break;
            }
            continue;
        }
        skips = 0;
        let f_old = state.f;
        state.apply(p, i, j, plan.params.theta, plan.params.phi)?;
        rotations += 1;
        let gain = state.f - f_old;
        let step_norm = 2.0 * (1.0 - plan.params.theta.cos()).max(0.0).sqrt();
        let slack = if config.epsilon > 0.0 {
            let z = plan.w;
            let dist_sq = (z[0] - 1.0).powi(2) + z[1] * z[1] + z[2] * z[2];
            gain - config.epsilon * dist_sq
        } else {
            let eta = 2f64.sqrt() * delta / (8.0 * q.alpha as f64);
            gain - eta * grad * step_norm
        };
        records.push(IterationRecord {
            k: rotations,
            objective: state.f,
            grad_norm: grad,
            mode: p,
            pair: (i, j),
            theta: plan.params.theta,
            phi: plan.params.phi,
            step_norm,
            slack,
            predicted_gain: plan.predicted_gain,
        });
    }
    let final_grad = state.grad_norm();
    let final_objective = state.f;
    Ok(SolveResult {
        tuple: state.tuple(),
        records,
        status,
        final_objective,
        final_grad_norm: final_grad,
        rotations,
        sweeps: rotations as f64 / sweep_size(spec) as f64,
    })
}

fn require_single_factor(spec: &ProblemSpec) -> Result<()> {
    match spec.family {
        Family::TraceMax | Family::JatdS => Ok(()),
        _ => Err(Error::InvalidArgument(
            "this solver runs single-factor problems (trace-max, jatd-s)".into(),
        )),
    }
}

fn require_multi_factor(spec: &ProblemSpec) -> Result<()> {
    match spec.family {
        Family::Jatd | Family::Jatc => Ok(()),
        _ => Err(Error::InvalidArgument(
            "this solver runs multi-factor problems (jatd, jatc)".into(),
        )),
    }
}

/// Gradient-selected Jacobi rotations on a single unitary group.
pub fn jacobi_g(spec: &ProblemSpec, config: &SolverConfig) -> Result<SolveResult> {
    require_single_factor(spec)?;
    run_jacobi(spec, config, PairStrategy::GradientBased)
}

/// Gradient-selected multi-factor Jacobi rotations.
pub fn jacobi_mg(spec: &ProblemSpec, config: &SolverConfig) -> Result<SolveResult> {
    require_multi_factor(spec)?;
    run_jacobi(spec, config, PairStrategy::GradientBased)
}

/// Cyclic multi-factor Jacobi rotations.
pub fn jacobi_mc(spec: &ProblemSpec, config: &SolverConfig) -> Result<SolveResult> {
    require_multi_factor(spec)?;
    run_jacobi(spec, config, PairStrategy::Cyclic)
}

/// Proximal single-factor variant. ε = 0 degenerates to the plain solver.
pub fn jacobi_gp(spec: &ProblemSpec, config: &SolverConfig) -> Result<SolveResult> {
    require_single_factor(spec)?;
    require_epsilon(config)?;
    run_jacobi(spec, config, PairStrategy::GradientBased)
}

/// Proximal multi-factor variant. ε = 0 degenerates to the plain solver.
pub fn jacobi_mgp(spec: &ProblemSpec, config: &SolverConfig) -> Result<SolveResult> {
    require_multi_factor(spec)?;
    require_epsilon(config)?;
    run_jacobi(spec, config, PairStrategy::GradientBased)
}

fn require_epsilon(config: &SolverConfig) -> Result<()> {
    if config.epsilon >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "proximal weight must be nonnegative".into(),
        ))
    }
}

/// Runs the algorithm named by `alg`.
pub fn solve(spec: &ProblemSpec, config: &SolverConfig, alg: Algorithm) -> Result<SolveResult> {
    match alg {
        Algorithm::JacobiG => jacobi_g(spec, config),
        Algorithm::JacobiMg => jacobi_mg(spec, config),
        Algorithm::JacobiMc => jacobi_mc(spec, config),
        Algorithm::JacobiGp => jacobi_gp(spec, config),
        Algorithm::JacobiMgp => jacobi_mgp(spec, config),
        Algorithm::BaselineRsd => baseline_rsd(spec, config),
    }
}

// ---------------------------------------------------------------------------
// Riemannian steepest-ascent baseline
// ---------------------------------------------------------------------------

/// Steepest ascent with Armijo backtracking and QR retraction per factor.
/// Shares the stopping rule of the Jacobi solvers; a line search that falls
/// below the minimum step reports MaxIter.
pub fn baseline_rsd(spec: &ProblemSpec, config: &SolverConfig) -> Result<SolveResult> {
    const ARMIJO_C1: f64 = 1e-4;
    let mut tuple = initial_tuple(spec, config);
    let mut w = transformed(spec, &tuple)?;
    let mut f = objective_from_w(spec, &w);
    let mut records = Vec::new();
    let mut iter = 0usize;
    let mut t = 1.0f64;
    let status;
    loop {
        let lambdas = lambda_fields_per_factor(spec, &w);
        let grad_sq: f64 = lambdas.iter().map(|l| l.frobenius_norm_sq()).sum();
        let grad = grad_sq.sqrt();
        if grad <= config.grad_tol {
            status = SolveStatus::GradConverged;
            break;
        }
        if iter >= config.max_iter {
            status = SolveStatus::MaxIter;
            break;
        }
        // ascent directions U^(p)·Λ^(p)
        let mut dirs = Vec::with_capacity(tuple.len());
        for (u, l) in tuple.mats().iter().zip(&lambdas) {
            dirs.push(u.mul(l)?);
        }
        let mut accepted = None;
        while t >= MIN_STEP {
            let mut trial = Vec::with_capacity(tuple.len());
            let mut ok = true;
            for (u, d) in tuple.mats().iter().zip(&dirs) {
                let stepped = u.add(&d.scale(Complex64::new(t, 0.0)))?;
                match stepped.qr_positive() {
                    Ok(q) => trial.push(q),
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                let trial_tuple = UnitaryTuple::from_mats_unchecked(trial);
                let w_trial = transformed(spec, &trial_tuple)?;
                let f_trial = objective_from_w(spec, &w_trial);
                if f_trial >= f + ARMIJO_C1 * t * grad_sq {
                    accepted = Some((trial_tuple, w_trial, f_trial));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((new_tuple, new_w, new_f)) = accepted else {
            status = SolveStatus::MaxIter;
            break;
        };
        iter += 1;
        let step_norm = new_tuple.distance(&tuple)?;
        let slack = new_f - f - ARMIJO_C1 * t * grad_sq;
        tuple = new_tuple;
        w = new_w;
        f = new_f;
        records.push(IterationRecord {
            k: iter,
            objective: f,
            grad_norm: grad,
            mode: 0,
            pair: (0, 0),
            theta: 0.0,
            phi: 0.0,
            step_norm,
            slack,
            predicted_gain: 0.0,
        });
        t = (t * 2.0).min(1e6);
    }
    let final_grad = grad_norm_from_w(spec, &w);
    Ok(SolveResult {
        tuple,
        records,
        status,
        final_objective: f,
        final_grad_norm: final_grad,
        rotations: iter,
        sweeps: iter as f64 / sweep_size(spec) as f64,
    })
}
