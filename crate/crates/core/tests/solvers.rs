//! Solver-level behavior: convergence targets, monotonicity, determinism,
//! the cyclic schedule, and the algebraic step identities.

use jacobi_tensor::generate::{
    example_7_1_spec, gen_instance, random_hermitian, random_tensor, GeneratorSpec,
};
use jacobi_tensor::manifold::UnitaryTuple;
use jacobi_tensor::objective::{evaluate, per_ratio, transformed};
use jacobi_tensor::solver::{
    baseline_rsd, delta_bound, jacobi_g, jacobi_gp, jacobi_mc, jacobi_mg, jacobi_mgp,
    sweep_size, Algorithm, CyclicCursor, SolveStatus, SolverConfig,
};
use jacobi_tensor::subproblem::psi_flat;
use jacobi_tensor::{Dagger, DenseTensor, Family, ProblemSpec};
use num_complex::Complex64;
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
fn cyclic_schedule_matches_reference_ordering() {
    // single mode of size 3: (1,2) → (1,3) → (2,3) → (1,2) (one-based)
    let mut c = CyclicCursor::new(&[3]);
    assert_eq!(c.next(), (0, 0, 1));
    assert_eq!(c.next(), (0, 0, 2));
    assert_eq!(c.next(), (0, 1, 2));
    assert_eq!(c.next(), (0, 0, 1));
    // two modes: alternation with independent cursors
    let mut c = CyclicCursor::new(&[3, 4]);
    assert_eq!(c.next(), (0, 0, 1));
    assert_eq!(c.next(), (1, 0, 1));
    assert_eq!(c.next(), (0, 0, 2));
    assert_eq!(c.next(), (1, 0, 2));
    assert_eq!(c.next(), (0, 1, 2));
    assert_eq!(c.next(), (1, 0, 3));
}

#[test]
fn already_stationary_start_takes_no_iterations() {
    let spec = ProblemSpec::new(
        Family::Jatd,
        vec![diag_tensor(&[3, 3, 3], &[3.0, 2.0, 1.0])],
        vec![1.0],
        vec![3],
        Dagger::ConjTranspose,
        1,
    )
    .unwrap();
    for alg in [Algorithm::JacobiMg, Algorithm::JacobiMc, Algorithm::BaselineRsd] {
        let r = jacobi_tensor::solver::solve(&spec, &SolverConfig::default(), alg).unwrap();
        assert_eq!(r.rotations, 0, "{alg:?}");
        assert_eq!(r.status, SolveStatus::GradConverged);
        assert!(r.records.is_empty());
    }
}

#[test]
fn jacobi_g_tracemax_converges_with_descent() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let tensors: Vec<DenseTensor> = (0..3).map(|_| random_hermitian(5, 1, true, &mut rng)).collect();
    let spec = ProblemSpec::new(
        Family::TraceMax,
        tensors,
        vec![1.0; 3],
        vec![3],
        Dagger::ConjTranspose,
        1,
    )
    .unwrap();
    let config = SolverConfig {
        max_iter: 20_000,
        ..SolverConfig::default()
    };
    let r = jacobi_g(&spec, &config).unwrap();
    assert_eq!(r.status, SolveStatus::GradConverged);
    assert!(r.final_grad_norm <= 1e-5);
    // per-step descent inequality with η = √2 δ / 8 (α = 1 here)
    let delta = delta_bound(&spec) - 1e-15;
    let eta = 2f64.sqrt() * delta / 8.0;
    let mut prev = evaluate(&spec, &spec.identity_tuple()).unwrap();
    for rec in &r.records {
        let gain = rec.objective - prev;
        assert!(
            gain + 1e-9 * (1.0 + prev.abs()) >= eta * rec.grad_norm * rec.step_norm,
            "k={}: {} < {}",
            rec.k,
            gain,
            eta * rec.grad_norm * rec.step_norm
        );
        prev = rec.objective;
    }
}

#[test]
fn jacobi_g_handles_symmetric_diagonalization() {
    // full-rank jatd-s: the tied rotation subproblem is a single z_{2,1} form
    for d in [2usize, 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + d as u64);
        let dims = vec![4usize; d];
        let tensors: Vec<DenseTensor> = (0..2).map(|_| random_tensor(&dims, true, &mut rng)).collect();
        let spec = ProblemSpec::new(
            Family::JatdS,
            tensors,
            vec![1.0, 1.0],
            vec![4],
            Dagger::ConjTranspose,
            1,
        )
        .unwrap();
        let config = SolverConfig {
            max_iter: 4000,
            grad_tol: 1e-4,
            ..SolverConfig::default()
        };
        let r = jacobi_g(&spec, &config).unwrap();
        // strictly nondecreasing objective with positive progress
        let f0 = evaluate(&spec, &spec.identity_tuple()).unwrap();
        let mut prev = f0;
        for rec in &r.records {
            assert!(rec.objective >= prev - 1e-9 * (1.0 + prev.abs()));
            prev = rec.objective;
        }
        assert!(r.final_objective > f0, "d={d}: no progress over the start");
    }
}

#[test]
fn jacobi_g_rejects_unsupported_shapes() {
    // truncated jatd-s: C2 pairs are sums of quadratic forms
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let spec = ProblemSpec::new(
        Family::JatdS,
        vec![random_tensor(&[4, 4], true, &mut rng)],
        vec![1.0],
        vec![2],
        Dagger::ConjTranspose,
        1,
    )
    .unwrap();
    let err = jacobi_g(&spec, &SolverConfig::default()).unwrap_err();
    assert!(matches!(err, jacobi_tensor::Error::Unsupported(_)));
    // multi-factor family through the single-factor entry point
    let spec = example_7_1_spec();
    assert!(jacobi_g(&spec, &SolverConfig::default()).is_err());
    assert!(jacobi_mg(
        &ProblemSpec::new(
            Family::TraceMax,
            vec![random_hermitian(3, 1, true, &mut ChaCha8Rng::seed_from_u64(1))],
            vec![1.0],
            vec![2],
            Dagger::ConjTranspose,
            1,
        )
        .unwrap(),
        &SolverConfig::default()
    )
    .is_err());
}

#[test]
fn proximal_solvers_converge_and_degenerate_cleanly() {
    // shared-factor joint diagonalization in the reference style:
    // L tensors with constant diagonal cores under one orthogonal factor
    let mut g = GeneratorSpec::noisy_diagonal(&[6, 6, 6], 3, false, 42);
    g.common_factor = true;
    g.symmetrize_noise = true;
    g.noise = 1.0;
    g.family = Family::Jatd;
    let spec = gen_instance(&g).unwrap();
    let config = SolverConfig {
        epsilon: 1e-3,
        max_iter: 60_000,
        ..SolverConfig::default()
    };
    let r = jacobi_mgp(&spec, &config).unwrap();
    assert_eq!(r.status, SolveStatus::GradConverged, "grad {:.3e}", r.final_grad_norm);
    assert!(r.final_grad_norm <= 1e-5);
    // per-step proximal gain certificate
    for rec in &r.records {
        assert!(rec.slack >= -1e-9 * (1.0 + rec.objective.abs()));
    }

    // ε = 0 degenerates to the plain gradient solver, record for record
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let tensors: Vec<DenseTensor> = (0..2).map(|_| random_hermitian(4, 1, true, &mut rng)).collect();
    let tm = ProblemSpec::new(
        Family::TraceMax,
        tensors,
        vec![1.0, 1.0],
        vec![2],
        Dagger::ConjTranspose,
        1,
    )
    .unwrap();
    let plain = jacobi_g(&tm, &SolverConfig::default()).unwrap();
    let prox0 = jacobi_gp(&tm, &SolverConfig::default()).unwrap();
    assert_eq!(plain.records.len(), prox0.records.len());
    for (a, b) in plain.records.iter().zip(&prox0.records) {
        assert_eq!(a.objective, b.objective);
        assert_eq!(a.theta, b.theta);
        assert_eq!(a.mode, b.mode);
        assert_eq!(a.pair, b.pair);
    }
    assert!(jacobi_gp(
        &tm,
        &SolverConfig {
            epsilon: -1.0,
            ..SolverConfig::default()
        }
    )
    .is_err());
}

#[test]
fn step_norm_identity_holds() {
    // ‖υ_k − υ_{k−1}‖ = ‖Ψ − I‖ = 2√(1 − cos θ)
    let spec = example_7_1_spec();
    let config = SolverConfig {
        max_iter: 5,
        ..SolverConfig::default()
    };
    let r = jacobi_mg(&spec, &config).unwrap();
    let mut tuple = spec.identity_tuple();
    for rec in &r.records {
        let before = tuple.clone();
        tuple.mats_mut()[rec.mode].apply_givens_right(
            rec.pair.0,
            rec.pair.1,
            &psi_flat(rec.theta, rec.phi),
        );
        let dist = tuple.distance(&before).unwrap();
        let formula = 2.0 * (1.0 - rec.theta.cos()).max(0.0).sqrt();
        assert!((dist - formula).abs() <= 1e-12 * (1.0 + formula));
        assert!((dist - rec.step_norm).abs() <= 1e-12 * (1.0 + formula));
    }
    // the replayed rotations reproduce the final iterate
    assert!(tuple.distance(&r.tuple).unwrap() < 1e-12);
}

#[test]
fn runs_are_deterministic_in_the_seed() {
    let mut g = GeneratorSpec::noisy_diagonal(&[4, 4, 5], 2, true, 9);
    g.noise = 0.6;
    let spec = gen_instance(&g).unwrap();
    let config = SolverConfig {
        random_init: true,
        seed: 33,
        max_iter: 300,
        ..SolverConfig::default()
    };
    let a = jacobi_mg(&spec, &config).unwrap();
    let b = jacobi_mg(&spec, &config).unwrap();
    assert_eq!(a.records.len(), b.records.len());
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.objective, y.objective);
        assert_eq!(x.theta, y.theta);
    }
    let other = jacobi_mg(
        &spec,
        &SolverConfig {
            seed: 34,
            ..config.clone()
        },
    )
    .unwrap();
    let same_first = a
        .records
        .first()
        .zip(other.records.first())
        .map(|(x, y)| x.objective == y.objective)
        .unwrap_or(false);
    assert!(!same_first, "different seeds should start differently");
}

#[test]
fn mc_and_mg_agree_on_the_compression_benchmark() {
    let mut rng = ChaCha8Rng::seed_from_u64(74);
    let spec = ProblemSpec::new(
        Family::Jatc,
        vec![random_tensor(&[5, 5, 5], false, &mut rng)],
        vec![1.0],
        vec![3, 3, 4],
        Dagger::ConjTranspose,
        1,
    )
    .unwrap();
    let config = SolverConfig {
        max_iter: 60_000,
        ..SolverConfig::default()
    };
    let mg = jacobi_mg(&spec, &config).unwrap();
    let mc = jacobi_mc(&spec, &config).unwrap();
    assert_eq!(mg.status, SolveStatus::GradConverged);
    assert_eq!(mc.status, SolveStatus::GradConverged);
    let rel = (mg.final_objective - mc.final_objective).abs() / mg.final_objective.abs();
    assert!(rel <= 1e-6, "relative disagreement {rel:.3e}");
}

#[test]
fn baseline_handles_stiefel_lift_and_reports_sweeps() {
    let mut g = GeneratorSpec::noisy_diagonal(&[4, 4, 4], 1, true, 3);
    g.noise = 0.4;
    g.ranks = vec![3];
    let spec = gen_instance(&g).unwrap();
    let config = SolverConfig {
        max_iter: 3000,
        ..SolverConfig::default()
    };
    let r = baseline_rsd(&spec, &config).unwrap();
    assert!(r.final_grad_norm <= 1e-5 || r.status == SolveStatus::MaxIter);
    assert!(r.tuple.max_orthonormality_residual() < 1e-10);
    // recovery quality matches the Jacobi answer
    let jac = jacobi_mg(&spec, &SolverConfig { max_iter: 60_000, ..SolverConfig::default() }).unwrap();
    assert!((r.final_objective - jac.final_objective).abs() <= 1e-2 * (1.0 + jac.final_objective.abs()));
    assert_eq!(sweep_size(&spec), 3 * 4 * 3 / 2);
}

#[test]
fn example_7_3_style_shared_factor_instances_recover() {
    // L = 5 real cubes with constant diagonal cores ℓ under a common
    // orthogonal factor plus symmetrized unit noise, solved proximally
    let mut g = GeneratorSpec::noisy_diagonal(&[10, 10, 10], 5, false, 1);
    g.common_factor = true;
    g.symmetrize_noise = true;
    g.family = Family::Jatd;
    let spec = gen_instance(&g).unwrap();
    let config = SolverConfig {
        epsilon: 1e-3,
        max_iter: 400_000,
        ..SolverConfig::default()
    };
    let r = jacobi_mgp(&spec, &config).unwrap();
    assert_eq!(r.status, SolveStatus::GradConverged, "grad {:.3e}", r.final_grad_norm);
    let w = transformed(&spec, &r.tuple).unwrap();
    let per: f64 = {
        let num: f64 = w.iter().map(|t| t.diag_norm_sq()).sum();
        let den: f64 = w.iter().map(|t| t.frobenius_norm_sq()).sum();
        num / den
    };
    assert!(per > 0.95, "joint diagonalization only reached Per = {per:.4}");
    let _ = per_ratio(&w[0]).unwrap();
}

#[test]
fn solve_quadratic_beats_a_dense_angle_grid() {
    // λ₁ + C dominates elementary values over a 181×181 (θ, φ) grid
    use jacobi_tensor::subproblem::{build_subproblem_jatd, elementary_eval, solve_quadratic};
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let spec = ProblemSpec::new(
        Family::Jatd,
        vec![random_tensor(&[3, 3, 3], true, &mut rng), random_tensor(&[3, 3, 3], true, &mut rng)],
        vec![1.0, 0.7],
        vec![3],
        Dagger::ConjTranspose,
        1,
    )
    .unwrap();
    let mats: Vec<_> = (0..3)
        .map(|_| jacobi_tensor::generate::haar_unitary(3, true, &mut rng))
        .collect();
    let upsilon = UnitaryTuple::from_mats_unchecked(mats);
    let q = build_subproblem_jatd(&spec, &upsilon, 1, (0, 2)).unwrap();
    let plan = solve_quadratic(&q).unwrap();
    let best_model = q.eval_theta_phi(plan.params.theta, plan.params.phi);
    let mut grid_max = f64::NEG_INFINITY;
    for ti in 0..=180 {
        for pi in 0..=180 {
            let theta = std::f64::consts::FRAC_PI_2 * ti as f64 / 180.0;
            let phi = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * pi as f64 / 180.0;
            grid_max = grid_max.max(elementary_eval(&spec, &upsilon, 1, (0, 2), theta, phi).unwrap());
        }
    }
    // grid resolution error scales with the form's size
    let scale = q.m.iter().flatten().map(|x| x.abs()).sum::<f64>() + 1.0;
    assert!(best_model >= grid_max - 1e-3 * scale);
    assert!(best_model >= grid_max - 1e-12 * scale || plan.predicted_gain >= 0.0);
    let direct = elementary_eval(&spec, &upsilon, 1, (0, 2), plan.params.theta, plan.params.phi).unwrap();
    assert!((direct - best_model).abs() < 1e-9 * (1.0 + best_model.abs()));
}

#[test]
fn elementary_gradient_at_identity_is_the_lambda_submatrix() {
    // d/dθ h(0, φ) = −2 Re(Λ_ij e^{−iφ}) by the submatrix identity
    use jacobi_tensor::objective::lambda_field;
    use jacobi_tensor::subproblem::elementary_eval;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for dagger in [Dagger::ConjTranspose, Dagger::Transpose] {
        let spec = ProblemSpec::new(
            Family::Jatc,
            vec![random_tensor(&[4, 3, 4], true, &mut rng)],
            vec![1.0],
            vec![2, 2, 3],
            dagger,
            1,
        )
        .unwrap();
        let mats = vec![
            jacobi_tensor::generate::haar_unitary(4, true, &mut rng),
            jacobi_tensor::generate::haar_unitary(3, true, &mut rng),
            jacobi_tensor::generate::haar_unitary(4, true, &mut rng),
        ];
        let upsilon = UnitaryTuple::from_mats_unchecked(mats);
        let lam = lambda_field(&spec, &upsilon, 0).unwrap();
        let (i, j) = (1usize, 3usize);
        let h = 1e-6;
        for phi in [-2.1, 0.0, 0.8, 2.9] {
            let fd = (elementary_eval(&spec, &upsilon, 0, (i, j), h, phi).unwrap()
                - elementary_eval(&spec, &upsilon, 0, (i, j), -h, phi).unwrap())
                / (2.0 * h);
            let e = Complex64::from_polar(1.0, -phi);
            let analytic = -2.0 * (lam.get(i, j) * e).re;
            assert!(
                (fd - analytic).abs() <= 1e-6 * (1.0 + analytic.abs()),
                "φ={phi}: fd {fd} vs {analytic}"
            );
        }
    }
}

#[test]
fn example_7_1_converged_point_is_stationary_on_both_formulations() {
    use jacobi_tensor::objective::stationarity_pair_check;
    let spec = example_7_1_spec();
    let r = jacobi_mg(&spec, &SolverConfig::default()).unwrap();
    let (res_u, res_x) = stationarity_pair_check(&spec, &r.tuple).unwrap();
    assert!(res_u <= 1e-5, "unitary residual {res_u:.3e}");
    assert!(res_x <= 1e-5 * 2f64.sqrt(), "stiefel residual {res_x:.3e}");
}

#[test]
fn delta_outside_the_family_bound_is_rejected() {
    let spec = example_7_1_spec();
    let bound = delta_bound(&spec);
    assert!((bound - (2.0f64 / (3.0 * 3.0 * 2.0)).sqrt()).abs() < 1e-15);
    for bad in [0.0, -0.1, bound * 1.01] {
        let r = jacobi_mg(
            &spec,
            &SolverConfig {
                delta: Some(bad),
                ..SolverConfig::default()
            },
        );
        assert!(r.is_err(), "delta {bad} should be rejected");
    }
    let ok = jacobi_mg(
        &spec,
        &SolverConfig {
            delta: Some(bound * 0.5),
            ..SolverConfig::default()
        },
    );
    assert!(ok.is_ok());
}
