//! Property-check suites shared by the verification CLI and the acceptance
//! tests. Each suite runs seeded random cases and reports the case count,
//! the worst residual it saw, and one line per failure.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::generate::{
    gen_instance, random_hermitian, random_tensor, random_tuple, GeneratorSpec,
};
use crate::manifold::skew_residual;
use crate::matrix::{real_inner, ComplexMatrix};
use crate::objective::{
    eval_mode_replaced, euclid_grad_mode, lambda_field,
    lambda_fields_per_factor, per_ratio, stationarity_pair_check, transformed, Dagger, Family,
    ProblemSpec,
};
use crate::solver::{
    baseline_rsd, jacobi_mc, jacobi_mg, select_pair_gradient, solve,
    Algorithm, SolveStatus, SolverConfig,
};
use crate::subproblem::{
    build_quadforms_gamma, build_subproblem_jatc,
    build_subproblem_jatd, build_subproblem_jatds_tied, build_subproblem_tracemax,
    classify_pair, elementary_eval, elementary_eval_tied, semisymmetrize, solve_proximal,
    solve_quadratic, sym_eig3, PairClass, QuadSubproblem,
};
use crate::tensor::{next_index, DenseTensor};

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
    pub worst: f64,
}

impl CheckReport {
    pub fn new(name: &str) -> Self {
        CheckReport {
            name: name.to_string(),
            cases: 0,
            failures: Vec::new(),
            worst: 0.0,
        }
    }

    pub fn record(&mut self, residual: f64, tol: f64, context: impl Fn() -> String) {
        self.cases += 1;
        if residual > self.worst || !residual.is_finite() {
            self.worst = residual;
        }
        if !(residual <= tol) {
            self.failures
                .push(format!("{} (residual {residual:.3e} > {tol:.3e})", context()));
        }
    }

    pub fn assert_true(&mut self, ok: bool, context: impl Fn() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(context());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{}: {} — {} cases, {} failures, worst residual {:.3e}",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.cases,
            self.failures.len(),
            self.worst
        )
    }
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

fn random_problem(
    family: Family,
    dims: &[usize],
    ranks: &[usize],
    count: usize,
    dagger: Dagger,
    complex: bool,
    rng: &mut impl Rng,
) -> ProblemSpec {
    let tensors: Vec<DenseTensor> = (0..count)
        .map(|_| random_tensor(dims, complex, rng))
        .collect();
    let weights: Vec<f64> = (0..count).map(|_| rng.random_range(0.5..2.0)).collect();
    let mut spec = ProblemSpec::new(family, tensors, weights, ranks.to_vec(), dagger, 1)
        .expect("random instance dims are valid");
    spec.real_data = !complex;
    spec
}

fn random_tracemax(
    n: usize,
    r: usize,
    gamma: usize,
    shared: bool,
    complex: bool,
    rng: &mut impl Rng,
) -> ProblemSpec {
    let count = if shared { 1 } else { r };
    let tensors: Vec<DenseTensor> = (0..count)
        .map(|_| random_hermitian(n, gamma, complex, rng))
        .collect();
    let mut spec = ProblemSpec::new(
        Family::TraceMax,
        tensors,
        vec![1.0; count],
        vec![r],
        Dagger::ConjTranspose,
        gamma,
    )
    .expect("random Hermitian instance is valid");
    spec.real_data = !complex;
    spec
}

fn random_pair(n: usize, rng: &mut impl Rng) -> (usize, usize) {
    let i = rng.random_range(0..n - 1);
    let j = rng.random_range(i + 1..n);
    (i, j)
}

// ---------------------------------------------------------------------------
// Quadratic-form fidelity
// ---------------------------------------------------------------------------

/// |h(Ψ) − (zᵀMz + C)| ≤ 1e-9(1+|C|) over random instances, pairs, and
/// angles, for every builder.
pub fn check_quadform_fidelity(seed: u64, samples_per_family: usize) -> CheckReport {
    let mut rep = CheckReport::new("quadform-fidelity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let daggers = [Dagger::ConjTranspose, Dagger::Transpose];

    for s in 0..samples_per_family {
        let dagger = daggers[s % 2];
        let theta = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
        let phi = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);

        // jatd, real and complex, mixed dims
        for &complex in &[false, true] {
            let spec = random_problem(Family::Jatd, &[4, 3, 5], &[3], 2, dagger, complex, &mut rng);
            let upsilon = random_tuple(&spec, &mut rng);
            let p = rng.random_range(0..3);
            let pair = random_pair(spec.tensors[0].dims()[p], &mut rng);
            let q = build_subproblem_jatd(&spec, &upsilon, p, pair).expect("builder");
            let direct = elementary_eval(&spec, &upsilon, p, pair, theta, phi).expect("eval");
            let model = q.eval_theta_phi(theta, phi);
            rep.record((direct - model).abs(), 1e-9 * (1.0 + q.c.abs()), || {
                format!("jatd complex={complex} {dagger:?} seed={seed} sample={s} mode={p} pair={pair:?}")
            });
        }

        // jatd-s per-mode form (the tied tuple feeds the same formulas)
        {
            let spec = random_problem(Family::JatdS, &[4, 4, 4], &[3], 2, dagger, true, &mut rng);
            let upsilon = random_tuple(&spec, &mut rng);
            let p = rng.random_range(0..3);
            let pair = random_pair(4, &mut rng);
            let q = build_subproblem_jatd(&spec, &upsilon, p, pair).expect("builder");
            let direct = elementary_eval(&spec, &upsilon, p, pair, theta, phi).expect("eval");
            rep.record(
                (direct - q.eval_theta_phi(theta, phi)).abs(),
                1e-9 * (1.0 + q.c.abs()),
                || format!("jatd-s per-mode {dagger:?} seed={seed} sample={s} mode={p} pair={pair:?}"),
            );
        }

        // jatd-s tied rotation (full-rank, orders 2 and 3)
        for &d in &[2usize, 3] {
            let dims = vec![3usize; d];
            let spec = random_problem(Family::JatdS, &dims, &[3], 2, dagger, true, &mut rng);
            let upsilon = random_tuple(&spec, &mut rng);
            let pair = random_pair(3, &mut rng);
            let q = build_subproblem_jatds_tied(&spec, &upsilon, pair).expect("tied builder");
            let direct = elementary_eval_tied(&spec, &upsilon, pair, theta, phi).expect("eval");
            rep.record(
                (direct - q.eval_theta_phi(theta, phi)).abs(),
                1e-9 * (1.0 + q.c.abs()),
                || format!("jatd-s tied d={d} {dagger:?} seed={seed} sample={s} pair={pair:?}"),
            );
        }

        // jatc, both dagger modes by alternation
        {
            let spec = random_problem(Family::Jatc, &[4, 3, 4], &[2, 2, 3], 2, dagger, true, &mut rng);
            let upsilon = random_tuple(&spec, &mut rng);
            let p = rng.random_range(0..3);
            let pair = random_pair(spec.tensors[0].dims()[p], &mut rng);
            let q = build_subproblem_jatc(&spec, &upsilon, p, pair).expect("builder");
            let direct = elementary_eval(&spec, &upsilon, p, pair, theta, phi).expect("eval");
            rep.record(
                (direct - q.eval_theta_phi(theta, phi)).abs(),
                1e-9 * (1.0 + q.c.abs()),
                || format!("jatc {dagger:?} seed={seed} sample={s} mode={p} pair={pair:?}"),
            );
        }

        // trace-max γ = 1: distinct tensors and the shared degenerate case
        for &shared in &[false, true] {
            let spec = random_tracemax(5, 3, 1, shared, true, &mut rng);
            let upsilon = random_tuple(&spec, &mut rng);
            let pair = random_pair(5, &mut rng);
            let q = build_subproblem_tracemax(&spec, &upsilon, pair).expect("builder");
            let direct = elementary_eval(&spec, &upsilon, 0, pair, theta, phi).expect("eval");
            rep.record(
                (direct - q.eval_theta_phi(theta, phi)).abs(),
                1e-9 * (1.0 + q.c.abs()),
                || format!("trace-max shared={shared} seed={seed} sample={s} pair={pair:?}"),
            );
        }
    }

    // shared trace-max with γ = 2 on C1 pairs (single surviving form)
    for s in 0..samples_per_family.min(20) {
        let spec = random_tracemax(3, 3, 2, true, true, &mut rng);
        let upsilon = random_tuple(&spec, &mut rng);
        let pair = random_pair(3, &mut rng);
        let q = build_subproblem_tracemax(&spec, &upsilon, pair).expect("builder");
        let theta = rng.random_range(0.0..std::f64::consts::FRAC_PI_4);
        let phi = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let direct = elementary_eval(&spec, &upsilon, 0, pair, theta, phi).expect("eval");
        rep.record(
            (direct - q.eval_theta_phi(theta, phi)).abs(),
            1e-9 * (1.0 + q.c.abs()),
            || format!("trace-max γ=2 shared seed={seed} sample={s} pair={pair:?}"),
        );
    }
    rep
}

/// γ = 1, 2, 3 decompositions against direct contraction over a (θ, φ) grid.
pub fn check_gamma_decompositions(seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("gamma-decompositions");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for gamma in 1usize..=3 {
        for rep_idx in 0..4 {
            let raw = random_hermitian(2, gamma, true, &mut rng);
            let c = semisymmetrize(&raw, gamma).expect("2-dim tensor");
            let forms = build_quadforms_gamma(&c, gamma).expect("decomposition");
            let scale = 1.0 + c.frobenius_norm_sq().sqrt();
            for ti in 0..13 {
                for pi in 0..13 {
                    let theta = std::f64::consts::FRAC_PI_2 * ti as f64 / 12.0;
                    let phi = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * pi as f64 / 12.0;
                    let x = contract_power(&c, gamma, theta, phi, false);
                    let y = contract_power(&c, gamma, theta, phi, true);
                    rep.record(
                        (x - forms.eval_x(theta, phi)).abs() / scale,
                        1e-9,
                        || format!("γ={gamma} x-side case={rep_idx} θ={theta:.3} φ={phi:.3}"),
                    );
                    rep.record(
                        (y - forms.eval_y(theta, phi)).abs() / scale,
                        1e-9,
                        || format!("γ={gamma} y-side case={rep_idx} θ={theta:.3} φ={phi:.3}"),
                    );
                }
            }
        }
    }
    rep
}

/// Direct contraction of a 2-dim order-2γ tensor with x (or y) on every
/// mode: conj on the first γ, plain on the last γ.
fn contract_power(c: &DenseTensor, gamma: usize, theta: f64, phi: f64, y_side: bool) -> f64 {
    let e = Complex64::from_polar(1.0, phi);
    let v: [Complex64; 2] = if y_side {
        [-theta.sin() * e, Complex64::new(theta.cos(), 0.0)]
    } else {
        [Complex64::new(theta.cos(), 0.0), theta.sin() * e.conj()]
    };
    let order = 2 * gamma;
    let bounds = vec![2usize; order];
    let mut idx = vec![0usize; order];
    let mut total = Complex64::ZERO;
    loop {
        let mut coeff = Complex64::ONE;
        for t in 0..gamma {
            coeff *= v[idx[t]].conj();
        }
        for t in gamma..order {
            coeff *= v[idx[t]];
        }
        total += c.get(&idx) * coeff;
        if !next_index(&mut idx, &bounds) {
            return total.re;
        }
    }
}

// ---------------------------------------------------------------------------
// Gradient correctness
// ---------------------------------------------------------------------------

/// Euclidean gradients against central finite differences (1e-6 relative)
/// and the algebraic submatrix identities Λ_ij = α(M₁₂ + iM₁₃) (1e-10).
pub fn check_gradients(seed: u64, instances: usize) -> CheckReport {
    let mut rep = CheckReport::new("gradients");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..instances {
        let dagger = if s % 2 == 0 {
            Dagger::ConjTranspose
        } else {
            Dagger::Transpose
        };
        let complex = s % 3 != 0;
        let spec = match s % 4 {
            0 => random_problem(Family::Jatd, &[4, 3, 4], &[3], 2, dagger, complex, &mut rng),
            1 => random_problem(Family::Jatc, &[3, 4, 3], &[2, 3, 2], 2, dagger, complex, &mut rng),
            2 => random_problem(Family::JatdS, &[4, 4, 4], &[3], 2, dagger, complex, &mut rng),
            _ => random_tracemax(4, 3, 1, s % 8 == 3, complex, &mut rng),
        };
        let upsilon = random_tuple(&spec, &mut rng);
        let modes = match spec.family {
            Family::TraceMax => 1,
            _ => spec.tensor_order(),
        };
        for p in 0..modes {
            let grad = euclid_grad_mode(&spec, &upsilon, p).expect("gradient");
            let n = grad.rows();
            let u_p = spec.mode_factor(&upsilon, p).clone();
            let mut worst = 0.0f64;
            for _ in 0..6 {
                let dir = ComplexMatrix::from_fn(n, n, |_, _| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                });
                let h = 1e-6 * (1.0 + u_p.frobenius_norm());
                let plus = u_p.add(&dir.scale(Complex64::new(h, 0.0))).unwrap();
                let minus = u_p.sub(&dir.scale(Complex64::new(h, 0.0))).unwrap();
                let fd = (eval_mode_replaced(&spec, &upsilon, p, &plus).unwrap()
                    - eval_mode_replaced(&spec, &upsilon, p, &minus).unwrap())
                    / (2.0 * h);
                let an = real_inner(&grad, &dir).unwrap();
                worst = worst.max((fd - an).abs() / (1.0 + grad.frobenius_norm()));
            }
            rep.record(worst, 1e-6, || {
                format!("fd {:?} {dagger:?} seed={seed} case={s} mode={p}", spec.family)
            });
        }
        // Λ submatrix vs α(M₁₂ + iM₁₃) for the per-mode forms
        let p = rng.random_range(0..modes);
        let n_p = spec.factor_sizes()[if spec.factor_count() == 1 { 0 } else { p }].min(
            match spec.family {
                Family::TraceMax => spec.factor_sizes()[0],
                _ => spec.tensors[0].dims()[p],
            },
        );
        let pair = random_pair(n_p, &mut rng);
        let (q, lam_ij, alpha) = match spec.family {
            Family::Jatd | Family::JatdS => {
                let q = build_subproblem_jatd(&spec, &upsilon, p, pair).unwrap();
                let l = lambda_field(&spec, &upsilon, p).unwrap();
                (q, l.get(pair.0, pair.1), 1.0)
            }
            Family::Jatc => {
                let q = build_subproblem_jatc(&spec, &upsilon, p, pair).unwrap();
                let l = lambda_field(&spec, &upsilon, p).unwrap();
                (q, l.get(pair.0, pair.1), 1.0)
            }
            Family::TraceMax => {
                let q = build_subproblem_tracemax(&spec, &upsilon, pair).unwrap();
                let w = transformed(&spec, &upsilon).unwrap();
                let l = lambda_fields_per_factor(&spec, &w).pop().unwrap();
                (q, l.get(pair.0, pair.1), 1.0)
            }
        };
        let model = Complex64::new(q.m[0][1], q.m[0][2]) * alpha;
        let scale = 1.0 + lam_ij.norm();
        rep.record((lam_ij - model).norm() / scale, 1e-10, || {
            format!(
                "lambda-submatrix {:?} {dagger:?} seed={seed} case={s} mode={p} pair={pair:?}",
                spec.family
            )
        });
        // tied jatd-s: Λ summed over modes matches the α = 2 form
        if spec.family == Family::JatdS {
            let pair = random_pair(spec.ranks[0], &mut rng);
            if classify_pair(pair.0, pair.1, spec.ranks[0]) == PairClass::C1 {
                let q = build_subproblem_jatds_tied(&spec, &upsilon, pair).unwrap();
                let w = transformed(&spec, &upsilon).unwrap();
                let l = lambda_fields_per_factor(&spec, &w).pop().unwrap();
                let model = Complex64::new(q.m[0][1], q.m[0][2]) * q.alpha as f64;
                let got = l.get(pair.0, pair.1);
                rep.record((got - model).norm() / (1.0 + got.norm()), 1e-10, || {
                    format!("tied lambda identity seed={seed} case={s} pair={pair:?}")
                });
            }
        }
        // Λ agrees with skew(Uᴴ∇) from the euclidean gradient
        for p in 0..modes {
            let grad = euclid_grad_mode(&spec, &upsilon, p).unwrap();
            let u_p = spec.mode_factor(&upsilon, p);
            let (_, lam_ref) =
                crate::manifold::riemannian_grad_unitary(&grad, u_p).expect("unitary");
            let lam = lambda_field(&spec, &upsilon, p).unwrap();
            let diff = lam.sub(&lam_ref).unwrap().frobenius_norm()
                / (1.0 + lam_ref.frobenius_norm());
            rep.record(diff, 1e-10, || {
                format!(
                    "lambda-vs-euclid {:?} {dagger:?} seed={seed} case={s} mode={p}",
                    spec.family
                )
            });
        }
    }
    rep
}

// ---------------------------------------------------------------------------
// Descent inequality and proximal gain
// ---------------------------------------------------------------------------

/// Per-step descent bounds: plain multi-factor steps satisfy
/// gain ≥ (√2 δ / 8)·‖grad f‖·‖step‖, proximal steps gain ≥ ε‖z − e₁‖²,
/// and actual gains match the subproblem prediction.
pub fn check_descent(seed: u64, runs: usize) -> CheckReport {
    let mut rep = CheckReport::new("descent");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..runs {
        let (spec, alg) = match s % 4 {
            0 => {
                let mut g = GeneratorSpec::noisy_diagonal(&[4, 4, 5], 2, true, seed + s as u64);
                g.noise = 0.7;
                (gen_instance(&g).unwrap(), Algorithm::JacobiMg)
            }
            1 => (
                {
                    let mut rng2 = ChaCha8Rng::seed_from_u64(seed ^ (s as u64) << 3);
                    random_problem(
                        Family::Jatc,
                        &[4, 4, 3],
                        &[2, 3, 2],
                        2,
                        Dagger::ConjTranspose,
                        true,
                        &mut rng2,
                    )
                },
                Algorithm::JacobiMg,
            ),
            2 => {
                let mut g = GeneratorSpec::noisy_diagonal(&[4, 4, 4], 1, false, seed + s as u64);
                g.noise = 0.5;
                (gen_instance(&g).unwrap(), Algorithm::JacobiMgp)
            }
            _ => (
                {
                    let mut rng2 = ChaCha8Rng::seed_from_u64(seed ^ (s as u64) << 5);
                    random_problem(
                        Family::Jatd,
                        &[3, 4, 4],
                        &[3],
                        2,
                        Dagger::Transpose,
                        true,
                        &mut rng2,
                    )
                },
                Algorithm::JacobiMg,
            ),
        };
        let config = SolverConfig {
            epsilon: if alg == Algorithm::JacobiMgp { 1e-3 } else { 0.0 },
            max_iter: 400,
            ..SolverConfig::default()
        };
        let result = solve(&spec, &config, alg).expect("solver runs");
        let mut prev = None;
        for r in &result.records {
            let scale = 1.0 + r.objective.abs();
            rep.record(-r.slack, 1e-9 * scale, || {
                format!("slack {:?} seed={seed} run={s} k={}", alg, r.k)
            });
            if let Some(prev_f) = prev {
                let gain: f64 = r.objective - prev_f;
                rep.record((gain - r.predicted_gain).abs(), 1e-9 * scale, || {
                    format!("gain-vs-predicted {:?} seed={seed} run={s} k={}", alg, r.k)
                });
                rep.assert_true(gain >= -1e-9 * scale, || {
                    format!("monotonicity {:?} seed={seed} run={s} k={}", alg, r.k)
                });
            }
            prev = Some(r.objective);
        }
    }
    rep
}

// ---------------------------------------------------------------------------
// Pair selection
// ---------------------------------------------------------------------------

/// The gradient-selected pair satisfies ‖grad h‖ ≥ δ‖grad f‖ at the
/// multi-block bound δ = √(2/(d·n_max(n_max−1))), on random skew fields.
pub fn check_pair_selection(seed: u64, fields: usize) -> CheckReport {
    let mut rep = CheckReport::new("pair-selection");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..fields {
        let d = rng.random_range(1..=4usize);
        let sizes: Vec<usize> = (0..d).map(|_| rng.random_range(3..=8usize)).collect();
        let lambdas: Vec<ComplexMatrix> = sizes
            .iter()
            .map(|&n| {
                let raw = ComplexMatrix::from_fn(n, n, |_, _| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                });
                crate::manifold::skew(&raw).unwrap()
            })
            .collect();
        let total: f64 = lambdas
            .iter()
            .map(|l| l.frobenius_norm_sq())
            .sum::<f64>()
            .sqrt();
        let Some((p, i, j)) = select_pair_gradient(&lambdas) else {
            rep.assert_true(total <= 1e-14, || format!("empty selection seed={seed} case={s}"));
            continue;
        };
        let n_max = *sizes.iter().max().unwrap() as f64;
        let delta = (2.0 / (d as f64 * n_max * (n_max - 1.0))).sqrt();
        let grad_h = crate::solver::pair_grad_norm_sq(&lambdas[p], i, j).sqrt();
        rep.assert_true(grad_h >= delta * total - 1e-12, || {
            format!(
                "δ-inequality seed={seed} case={s}: ‖grad h‖ = {grad_h:.3e} < δ‖grad f‖ = {:.3e}",
                delta * total
            )
        });
    }
    // documented tie-break: equal magnitudes resolve lexicographically
    let mut l = ComplexMatrix::zeros(3, 3);
    l.set(0, 1, Complex64::new(0.5, 0.0));
    l.set(1, 0, Complex64::new(-0.5, 0.0));
    l.set(0, 2, Complex64::new(0.5, 0.0));
    l.set(2, 0, Complex64::new(-0.5, 0.0));
    rep.assert_true(
        select_pair_gradient(&[l]) == Some((0, 0, 1)),
        || "tie-break is not lexicographic".to_string(),
    );
    rep
}

// ---------------------------------------------------------------------------
// Stationarity equivalence
// ---------------------------------------------------------------------------

/// Converged unitary-lift runs have small Stiefel-restricted gradients and
/// conversely non-stationary points are non-stationary on both
/// formulations.
pub fn check_stationarity(seed: u64, runs: usize) -> CheckReport {
    let mut rep = CheckReport::new("stationarity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..runs {
        let spec = match s % 2 {
            0 => {
                let mut g = GeneratorSpec::noisy_diagonal(&[4, 5, 4], 1, true, seed + 31 * s as u64);
                g.noise = 0.3;
                g.ranks = vec![3];
                gen_instance(&g).unwrap()
            }
            _ => random_problem(
                Family::Jatc,
                &[4, 4, 4],
                &[2, 3, 2],
                1,
                Dagger::ConjTranspose,
                true,
                &mut rng,
            ),
        };
        let config = SolverConfig {
            grad_tol: 1e-6,
            max_iter: 60_000,
            ..SolverConfig::default()
        };
        let result = jacobi_mg(&spec, &config).expect("solver runs");
        if result.status != SolveStatus::GradConverged {
            rep.assert_true(false, || {
                format!("run seed={seed} case={s} did not converge (grad {:.3e})", result.final_grad_norm)
            });
            continue;
        }
        let (res_u, res_x) = stationarity_pair_check(&spec, &result.tuple).unwrap();
        rep.assert_true(res_u <= 1e-5, || {
            format!("unitary residual {res_u:.3e} seed={seed} case={s}")
        });
        rep.record(res_x, 1e-4, || {
            format!("stiefel residual at converged point seed={seed} case={s}")
        });
        // non-stationary point: both residuals visibly positive
        let tuple = random_tuple(&spec, &mut rng);
        let (ru, rx) = stationarity_pair_check(&spec, &tuple).unwrap();
        rep.assert_true(rx <= 1e-4 || ru > 1e-5, || {
            format!("stiefel-active but unitary-flat point seed={seed} case={s}: {rx:.3e} vs {ru:.3e}")
        });
        rep.assert_true(ru <= 1e-5 || rx > 1e-5, || {
            format!("unitary-active but stiefel-flat point seed={seed} case={s}: {ru:.3e} vs {rx:.3e}")
        });
    }
    rep
}

// ---------------------------------------------------------------------------
// Proximal solves
// ---------------------------------------------------------------------------

/// KKT residuals, the certified gain bound, the ε → 0 reduction, and the
/// M = 0 identity case.
pub fn check_proximal(seed: u64, cases: usize) -> CheckReport {
    let mut rep = CheckReport::new("proximal");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..cases {
        let mut m = [[0.0f64; 3]; 3];
        for a in 0..3 {
            for b in a..3 {
                let v: f64 = rng.random_range(-2.0..2.0);
                m[a][b] = v;
                m[b][a] = v;
            }
        }
        let q = QuadSubproblem {
            m,
            c: rng.random_range(-1.0..1.0),
            alpha: 1,
            beta: 1,
        };
        let eps = 10f64.powf(rng.random_range(-5.0..-1.0));
        let plan = match solve_proximal(&q, eps) {
            Ok(p) => p,
            Err(e) => {
                rep.assert_true(false, || format!("proximal failed seed={seed} case={s}: {e}"));
                continue;
            }
        };
        let z = plan.w;
        let norm = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
        rep.record((norm - 1.0).abs(), 1e-10, || {
            format!("sphere constraint seed={seed} case={s}")
        });
        let dist_sq = (z[0] - 1.0).powi(2) + z[1] * z[1] + z[2] * z[2];
        let gain = plan.predicted_gain;
        rep.assert_true(gain >= eps * dist_sq - 1e-10, || {
            format!("gain bound seed={seed} case={s}: {gain:.3e} < {:.3e}", eps * dist_sq)
        });
        // reduction: tiny ε tracks the plain maximizer when λ₁ is simple
        let (vals, _) = sym_eig3(&m);
        if vals[0] - vals[1] > 0.2 {
            let plain = solve_quadratic(&q).unwrap();
            let prox = solve_proximal(&q, 1e-11).unwrap();
            let dist = (0..3)
                .map(|a| (plain.w[a] - prox.w[a]).powi(2))
                .sum::<f64>()
                .sqrt();
            rep.record(dist, 1e-6, || format!("ε→0 reduction seed={seed} case={s}"));
        }
    }
    let idplan = solve_proximal(&QuadSubproblem::zero(1, 1, 0.0), 1e-3).unwrap();
    rep.assert_true(idplan.w == [1.0, 0.0, 0.0], || "M = 0 must give e₁".to_string());
    rep
}

// ---------------------------------------------------------------------------
// Structural guarantees
// ---------------------------------------------------------------------------

/// Builder-emitted M are exactly arrow; Λ fields are skew-Hermitian to
/// roundoff with exact C3 zeros; solver outputs stay unitary to 1e-8.
pub fn check_structure(seed: u64, cases: usize) -> CheckReport {
    let mut rep = CheckReport::new("structure");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..cases {
        let dagger = if s % 2 == 0 {
            Dagger::ConjTranspose
        } else {
            Dagger::Transpose
        };
        let spec = match s % 3 {
            0 => random_problem(Family::Jatd, &[4, 3, 4], &[2], 2, dagger, true, &mut rng),
            1 => random_problem(Family::Jatc, &[4, 4, 3], &[2, 3, 2], 1, dagger, true, &mut rng),
            _ => random_tracemax(4, 2, 1, false, true, &mut rng),
        };
        let upsilon = random_tuple(&spec, &mut rng);
        let modes = match spec.family {
            Family::TraceMax => 1,
            _ => spec.tensor_order(),
        };
        for p in 0..modes {
            let n_p = match spec.family {
                Family::TraceMax => spec.factor_sizes()[0],
                _ => spec.tensors[0].dims()[p],
            };
            for i in 0..n_p {
                for j in (i + 1)..n_p {
                    let q = match spec.family {
                        Family::Jatd => build_subproblem_jatd(&spec, &upsilon, p, (i, j)),
                        Family::Jatc => build_subproblem_jatc(&spec, &upsilon, p, (i, j)),
                        Family::TraceMax => build_subproblem_tracemax(&spec, &upsilon, (i, j)),
                        Family::JatdS => unreachable!(),
                    }
                    .unwrap();
                    rep.assert_true(q.is_arrow(), || {
                        format!("non-arrow M {:?} seed={seed} case={s} mode={p} pair=({i},{j})", spec.family)
                    });
                }
            }
            let lam = lambda_field(&spec, &upsilon, p).unwrap();
            rep.record(
                skew_residual(&lam) / (1.0 + lam.frobenius_norm()),
                1e-12,
                || format!("skew residual {:?} seed={seed} case={s} mode={p}", spec.family),
            );
            // exact zeros on the dropped block
            let r_p = spec.rank_for_mode(p.min(spec.ranks.len() - 1));
            let mut c3_ok = true;
            for i in r_p..n_p {
                for j in (i + 1)..n_p {
                    if lam.get(i, j) != Complex64::ZERO {
                        c3_ok = false;
                    }
                }
            }
            rep.assert_true(c3_ok, || {
                format!("C3 block of Λ not exactly zero {:?} seed={seed} case={s} mode={p}", spec.family)
            });
        }
    }
    // factors remain unitary through a long run
    let mut g = GeneratorSpec::noisy_diagonal(&[4, 4, 4], 2, true, seed);
    g.noise = 0.8;
    let spec = gen_instance(&g).unwrap();
    let result = jacobi_mg(
        &spec,
        &SolverConfig {
            max_iter: 2000,
            grad_tol: 1e-9,
            ..SolverConfig::default()
        },
    )
    .unwrap();
    rep.record(result.tuple.max_orthonormality_residual(), 1e-8, || {
        format!("unitarity after {} rotations", result.rotations)
    });
    rep
}

// ---------------------------------------------------------------------------
// Synthetic recovery and the benchmark tensor
// ---------------------------------------------------------------------------

/// Zero-noise planted instances are recovered to Per ≥ 1 − 1e-8; the
/// reference-scale noisy instance reaches Per ≥ 0.99.
pub fn check_synthetic_recovery(seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("synthetic-recovery");

    let mut g = GeneratorSpec::noisy_diagonal(&[4, 4, 5], 1, true, seed);
    g.noise = 0.0;
    let spec = gen_instance(&g).unwrap();
    let config = SolverConfig {
        grad_tol: 1e-9,
        max_iter: 100_000,
        ..SolverConfig::default()
    };
    let result = jacobi_mg(&spec, &config).unwrap();
    let w = transformed(&spec, &result.tuple).unwrap();
    let per = per_ratio(&w[0]).unwrap();
    rep.assert_true(per >= 1.0 - 1e-8, || {
        format!("zero-noise recovery reached Per = {per:.10}")
    });

    let gen_noisy = GeneratorSpec::noisy_diagonal(&[7, 7, 8, 8], 1, true, seed + 1);
    let spec = gen_instance(&gen_noisy).unwrap();
    let config = SolverConfig {
        grad_tol: 1e-5,
        max_iter: 200_000,
        ..SolverConfig::default()
    };
    let result = jacobi_mg(&spec, &config).unwrap();
    let w = transformed(&spec, &result.tuple).unwrap();
    let per0 = per_ratio(&spec.tensors[0]).unwrap();
    let per = per_ratio(&w[0]).unwrap();
    rep.assert_true(per0 < 1e-2, || format!("initial Per {per0:.3e} unexpectedly high"));
    rep.assert_true(per >= 0.99, || format!("noisy recovery reached Per = {per:.6}"));

    // cross-variant agreement on a compression instance
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 2);
    let spec = random_problem(
        Family::Jatc,
        &[5, 5, 5],
        &[3, 3, 4],
        1,
        Dagger::ConjTranspose,
        false,
        &mut rng,
    );
    let config = SolverConfig {
        max_iter: 60_000,
        ..SolverConfig::default()
    };
    let mg = jacobi_mg(&spec, &config).unwrap();
    let mc = jacobi_mc(&spec, &config).unwrap();
    let rel = (mg.final_objective - mc.final_objective).abs()
        / mg.final_objective.abs().max(1.0);
    rep.record(rel, 1e-4, || "cross-variant disagreement jatc 5×5×5".to_string());
    rep
}

/// The printed 3×3×3 benchmark: initial Per 0.0807, final Per 0.9492,
/// residual 61.749, gradient below 1e-5, within 30 sweeps, for both the
/// gradient-selected and cyclic solvers.
pub fn check_example_7_1() -> CheckReport {
    let mut rep = CheckReport::new("example-7-1");
    let spec = crate::generate::example_7_1_spec();
    let per0 = per_ratio(&spec.tensors[0]).unwrap();
    rep.record((per0 - 0.0807).abs(), 5e-5, || "initial Per".to_string());
    for alg in [Algorithm::JacobiMg, Algorithm::JacobiMc] {
        let start = std::time::Instant::now();
        let config = SolverConfig {
            max_iter: 100_000,
            ..SolverConfig::default()
        };
        let result = solve(&spec, &config, alg).unwrap();
        let elapsed = start.elapsed().as_secs_f64();
        let w = transformed(&spec, &result.tuple).unwrap();
        let per = per_ratio(&w[0]).unwrap();
        let residual = 1215.0 - result.final_objective;
        rep.record((per - 0.9492).abs(), 5e-4, || format!("{alg:?} final Per {per:.6}"));
        rep.record((residual - 61.749).abs(), 0.05, || {
            format!("{alg:?} residual {residual:.4}")
        });
        rep.assert_true(result.final_grad_norm <= 1e-5, || {
            format!("{alg:?} final gradient {:.3e}", result.final_grad_norm)
        });
        rep.assert_true(result.sweeps <= 30.0, || {
            format!("{alg:?} took {:.1} sweeps", result.sweeps)
        });
        rep.assert_true(elapsed < 5.0, || format!("{alg:?} took {elapsed:.2}s"));
    }
    rep
}

/// The steepest-ascent baseline reaches the benchmark plateau.
pub fn check_baseline() -> CheckReport {
    let mut rep = CheckReport::new("baseline");
    let spec = crate::generate::example_7_1_spec();
    let config = SolverConfig {
        max_iter: 5000,
        ..SolverConfig::default()
    };
    let result = baseline_rsd(&spec, &config).unwrap();
    let residual = 1215.0 - result.final_objective;
    rep.record((residual - 61.749).abs(), 1e-2, || {
        format!("baseline residual {residual:.4}")
    });
    let mut prev = f64::NEG_INFINITY;
    let mut monotone = true;
    for r in &result.records {
        if r.objective < prev - 1e-10 {
            monotone = false;
        }
        prev = r.objective;
    }
    rep.assert_true(monotone, || "baseline ascent is not monotone".to_string());
    rep
}

/// Runs the named verification suite.
pub fn run_suite(name: &str, seed: u64) -> crate::error::Result<CheckReport> {
    match name {
        "quadform-fidelity" => Ok(check_quadform_fidelity(seed, 100)),
        "gamma" | "gamma-decompositions" => Ok(check_gamma_decompositions(seed)),
        "gradients" => Ok(check_gradients(seed, 20)),
        "descent" => Ok(check_descent(seed, 20)),
        "pair-selection" => Ok(check_pair_selection(seed, 100)),
        "stationarity" => Ok(check_stationarity(seed, 8)),
        "proximal" => Ok(check_proximal(seed, 100)),
        "structure" => Ok(check_structure(seed, 12)),
        "recovery" | "synthetic-recovery" => Ok(check_synthetic_recovery(seed)),
        "example-7-1" => Ok(check_example_7_1()),
        "baseline" => Ok(check_baseline()),
        other => Err(crate::error::Error::InvalidArgument(format!(
            "unknown suite '{other}'"
        ))),
    }
}

/// Names understood by [`run_suite`], in the order the full gate runs them.
pub const SUITES: &[&str] = &[
    "quadform-fidelity",
    "gamma-decompositions",
    "gradients",
    "descent",
    "pair-selection",
    "stationarity",
    "proximal",
    "structure",
    "synthetic-recovery",
    "example-7-1",
    "baseline",
];
