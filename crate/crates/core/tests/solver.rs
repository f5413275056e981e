mod common;

use qtsolve::adjoint::{adjoint_matrix, adjoint_vector, adjoint_vector_inverse};
use qtsolve::pcg::{pcg_solve, solve_system, Identity, PartialSolve};
use qtsolve::quat::qvec as qv;
use qtsolve::signal::model_prediction_system;
use qtsolve::{
    CirculantPreconditioner, Error, PcgError, Preconditioner, ProcessKind, ProcessSpec, Quaternion,
    SolveConfig, SymbolModel,
};

use common::*;

fn exact_system(
    kind: ProcessKind,
    beta: Quaternion,
    n: usize,
) -> (qtsolve::HermitianToeplitz, Vec<Quaternion>) {
    let spec = ProcessSpec::new(kind, beta, 1.0, 0).unwrap();
    qtsolve::signal::prediction_system(&spec, n).unwrap()
}

#[test]
fn ar1_exact_system_reference_row() {
    let (t, w) = exact_system(
        ProcessKind::Ar1,
        Quaternion::new(0.45, -0.01, 0.3, -0.35),
        256,
    );
    let cfg = SolveConfig::absolute(1e-7);
    let (x, rep) = solve_system(&t, &w, Preconditioner::Strang, &cfg).unwrap();
    assert_eq!(rep.iterations, 3);
    assert!(rep.final_error < 1e-13, "{}", rep.final_error);
    // the error is recomputed from the returned iterate
    let direct = qv::norm(&qv::sub(&w, &t.matvec(&x).unwrap()));
    assert_eq!(rep.final_error, direct);
    let (_, rep) = solve_system(&t, &w, Preconditioner::None, &cfg).unwrap();
    assert_eq!(rep.iterations, 41);
    assert!(
        (rep.final_error - 9.35e-8).abs() < 0.01e-8,
        "{}",
        rep.final_error
    );
}

#[test]
fn ma1_exact_system_reference_counts() {
    let (t, w) = exact_system(
        ProcessKind::Ma1,
        Quaternion::new(-0.08, 0.21, -0.8, -0.79),
        512,
    );
    let cfg = SolveConfig::absolute(1e-7);
    let (_, c) = solve_system(&t, &w, Preconditioner::Strang, &cfg).unwrap();
    let (_, i) = solve_system(&t, &w, Preconditioner::None, &cfg).unwrap();
    assert_eq!((c.iterations, i.iterations), (2, 119));
}

#[test]
fn relative_rule_stops_on_the_initial_residual() {
    let (t, w) = exact_system(
        ProcessKind::Ar1,
        Quaternion::new(-0.07, 0.41, 0.29, 0.45),
        256,
    );
    let (_, rep) =
        solve_system(&t, &w, Preconditioner::None, &SolveConfig::with_tol(1e-7)).unwrap();
    let h = &rep.residual_history;
    assert_eq!(h.len(), rep.iterations + 1);
    assert!(h[rep.iterations] <= 1e-7 * h[0]);
    assert!(h[rep.iterations - 1] > 1e-7 * h[0]);
}

#[test]
fn strang_iterations_flat_in_n() {
    for (kind, beta) in [
        (ProcessKind::Ar1, Quaternion::new(0.15, -0.46, 0.34, 0.43)),
        (
            ProcessKind::Ma1,
            Quaternion::new(-0.52, -0.32, -0.01, -1.23),
        ),
    ] {
        let counts: Vec<usize> = [256usize, 512, 1024, 2048]
            .iter()
            .map(|&n| {
                let (t, w) = exact_system(kind, beta, n);
                solve_system(&t, &w, Preconditioner::Strang, &SolveConfig::default())
                    .unwrap()
                    .1
                    .iterations
            })
            .collect();
        assert!(counts.iter().all(|&c| c == counts[0]), "{kind}: {counts:?}");
    }
}

#[test]
fn constant_symbol_converges_in_one_step() {
    let mut r = rng(20);
    let model = SymbolModel::constant(1.0);
    for n in [1usize, 5, 64] {
        let b = qvec(&mut r, n);
        for p in [Preconditioner::None, Preconditioner::Strang] {
            let (x, rep) =
                qtsolve::solve_toeplitz(&model, n, &b, p, &SolveConfig::default()).unwrap();
            assert_eq!(rep.iterations, 1);
            assert!(qv::rel_max_diff(&x, &b) < 1e-15);
        }
    }
}

#[test]
fn single_unknown_takes_one_iteration() {
    for kind in [ProcessKind::Ar1, ProcessKind::Ma1] {
        let (t, w) = exact_system(kind, Quaternion::new(0.3, 0.1, -0.2, 0.4), 1);
        for p in [Preconditioner::None, Preconditioner::Strang] {
            assert_eq!(
                solve_system(&t, &w, p, &SolveConfig::default())
                    .unwrap()
                    .1
                    .iterations,
                1
            );
        }
    }
}

#[test]
fn rejects_indefinite_symbol_unless_overridden() {
    let model = SymbolModel::finite(vec![Quaternion::real(1.0), Quaternion::real(2.0)]).unwrap();
    let b = vec![
        Quaternion::ONE,
        -Quaternion::ONE,
        Quaternion::ZERO,
        Quaternion::ZERO,
    ];
    let err = qtsolve::solve_toeplitz(&model, 4, &b, Preconditioner::None, &SolveConfig::default())
        .unwrap_err();
    assert!(matches!(err, Error::InvalidModel(_)), "{err}");
    let cfg = SolveConfig {
        assume_hpd: true,
        ..SolveConfig::default()
    };
    // b*Tb = -2 for T = tridiag(2, 1, 2), so the first step breaks down
    let err = qtsolve::solve_toeplitz(&model, 4, &b, Preconditioner::None, &cfg).unwrap_err();
    assert!(
        matches!(err, Error::Solve(PcgError::Breakdown { .. })),
        "{err}"
    );
}

fn energy_error(a: &qtsolve::QMatrix, x: &[Quaternion], exact: &[Quaternion]) -> f64 {
    let e = qv::sub(exact, x);
    qv::inner(&a.matvec(&e).unwrap(), &e).a0.sqrt()
}

#[test]
fn energy_norm_error_never_increases() {
    let mut r = rng(21);
    for (n, shift) in [(6usize, 0.5), (12, 0.2), (20, 1.0)] {
        let a = hpd(&mut r, n, shift);
        let b = qvec(&mut r, n);
        let m = adjoint_matrix(&a).unwrap();
        let exact = adjoint_vector_inverse(&m.solve(&adjoint_vector(&b)).unwrap()).unwrap();
        let mut prev = energy_error(&a, &vec![Quaternion::ZERO; n], &exact);
        for k in 1..=n {
            let cfg = SolveConfig {
                tol_rel: 1e-300,
                max_iter: Some(k),
                ..SolveConfig::default()
            };
            let x = match pcg_solve(&a, &Identity(n), &b, &cfg) {
                Ok((x, _)) => x,
                Err(PcgError::MaxIterations(p)) => {
                    let PartialSolve { x, report } = *p;
                    assert_eq!(report.iterations, k);
                    x
                }
                Err(e) => panic!("{e}"),
            };
            let now = energy_error(&a, &x, &exact);
            assert!(
                now <= prev * (1.0 + 1e-10) + 1e-12,
                "n={n} k={k}: {now} > {prev}"
            );
            prev = now;
        }
    }
}

#[test]
fn finite_termination_on_small_systems() {
    let mut r = rng(22);
    for n in 1..=32 {
        let a = hpd(&mut r, n, 1.5 * n as f64);
        let b = qvec(&mut r, n);
        let (x, rep) = pcg_solve(&a, &Identity(n), &b, &SolveConfig::with_tol(1e-13)).unwrap();
        assert!(rep.iterations <= n, "n={n}: {}", rep.iterations);
        assert!(qv::norm(&qv::sub(&b, &a.matvec(&x).unwrap())) <= 1e-12 * qv::norm(&b));
    }
}

#[test]
fn strang_preconditioner_as_operator() {
    let model = SymbolModel::ma1(Quaternion::new(0.9, 0.9, 0.5, 1.3), 1.0);
    let (t, w) = model_prediction_system(&model, 300).unwrap();
    let pre = CirculantPreconditioner::strang(&t).unwrap();
    let (_, with) = pcg_solve(&t, &pre, &w, &SolveConfig::default()).unwrap();
    let (_, without) = pcg_solve(&t, &Identity(300), &w, &SolveConfig::default()).unwrap();
    assert!(with.iterations < without.iterations);
    assert!(with.final_error <= 1e-7 * qv::norm(&w) * 1.01);
}
