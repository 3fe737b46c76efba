mod common;

use std::sync::Arc;

use ckg_core::error::Error;
use ckg_core::geometry::{DomainMesh, Preset, ScalarField};
use ckg_core::operator::{lumped_mass, stiffness_triplets, Problem, SparseSystem};
use ckg_core::solver::linear::relative_residual;
use ckg_core::solver::{
    continuity_solve, continuity_solve_logged, harmonic_extension, linear_solve, newton_solve, SolveStatus,
    SolverOptions,
};
use common::{ambient, cmc_cap, cmc_exact, max_error, radial_exact, radial_minimal, R0};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn flat_problem(preset: Preset, mesh: &Arc<DomainMesh>, h: f64, phi: f64) -> Problem {
    Problem::new(
        ambient(preset),
        Arc::clone(mesh),
        ScalarField::constant(mesh, h),
        ScalarField::constant(mesh, phi),
        SolverOptions::default(),
    )
    .unwrap()
}

fn interior_stiffness(p: &Problem) -> Vec<(usize, usize, f64)> {
    let mesh = p.mesh();
    stiffness_triplets(p)
        .into_iter()
        .filter_map(|(a, b, v)| Some((mesh.interior_index(a)?, mesh.interior_index(b)?, v)))
        .collect()
}

#[test]
fn trivial_problem_stays_trivial() {
    let mesh = Arc::new(DomainMesh::disk(R0, 8).unwrap());
    let p = flat_problem(Preset::KillingFlat, &mesh, 0.0, 0.0);
    let (z, report) = continuity_solve(&p, &SolverOptions::default()).unwrap();
    assert_eq!(report.status, SolveStatus::Converged);
    assert_eq!(report.tau_path, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    assert!(report.newton_history.iter().all(|r| r.iterations == 0));
    assert!(z.values().iter().all(|&v| v == 0.0));
}

#[test]
fn newton_at_tau_zero_is_immediate() {
    for p in [cmc_cap(10), radial_minimal(10)] {
        let zero = ScalarField::constant(p.mesh(), 0.0);
        let res = newton_solve(&p, 0.0, &zero).unwrap();
        assert!(res.iterations <= 1);
    }
}

#[test]
fn linear_solver_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 40;
    let eye: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
    let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x = linear_solve(&SparseSystem::from_triplets(n, &eye, vec![0.0; n]), &rhs).unwrap();
    assert_eq!(x, rhs);
    // Tridiagonal SPD matrix with a random symmetric perturbation.
    let mut trip = Vec::new();
    for i in 0..n {
        trip.push((i, i, 4.0 + rng.random_range(0.0..1.0)));
        if i + 1 < n {
            let e = -1.0 + rng.random_range(-0.1..0.1);
            trip.push((i, i + 1, e));
            trip.push((i + 1, i, e));
        }
    }
    let sys = SparseSystem::from_triplets(n, &trip, vec![0.0; n]);
    let x = linear_solve(&sys, &rhs).unwrap();
    assert!(relative_residual(&sys, &x, &rhs) <= 1e-12);
}

#[test]
fn poisson_on_disk() {
    let mut errs = Vec::new();
    for rings in [8, 16, 32] {
        let mesh = Arc::new(DomainMesh::disk(R0, rings).unwrap());
        let p = flat_problem(Preset::KillingFlat, &mesh, 0.0, 0.0);
        let m = lumped_mass(&p);
        let sys = SparseSystem::from_triplets(mesh.interior_vertices().len(), &interior_stiffness(&p), Vec::new());
        let rhs: Vec<f64> = mesh.interior_vertices().iter().map(|&v| m[v]).collect();
        let x = linear_solve(&sys, &rhs).unwrap();
        let center = mesh.interior_index(0).unwrap();
        assert!((x[center] - R0 * R0 / 4.0).abs() < 2e-3);
        let err = mesh
            .interior_vertices()
            .iter()
            .enumerate()
            .map(|(i, &v)| (x[i] - (R0 * R0 - mesh.vertices()[v].norm_squared()) / 4.0).abs())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    let order = (errs[1] / errs[2]).log2();
    assert!(order > 1.8, "{errs:?}");
}

#[test]
fn continuation_matches_direct_newton() {
    let p = cmc_cap(16);
    let (z, report) = continuity_solve(&p, &SolverOptions::default()).unwrap();
    assert!(report.converged());
    assert_eq!(*report.tau_path.last().unwrap(), 1.0);
    let start = ScalarField::constant(p.mesh(), -(0.84f64).sqrt());
    let direct = newton_solve(&p, 1.0, &start).unwrap();
    let diff = z
        .values()
        .iter()
        .zip(direct.z.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-10, "{diff:e}");
    assert!(max_error(p.mesh(), &z, cmc_exact) < 1e-3);
}

#[test]
fn radial_minimal_from_harmonic_start() {
    let p = radial_minimal(32);
    let start = harmonic_extension(&p, p.phi()).unwrap();
    let res = newton_solve(&p, 1.0, &start).unwrap();
    let err = max_error(p.mesh(), &res.z, radial_exact);
    assert!(err < 1e-3, "{err:e}");
}

#[test]
fn height_estimate_for_expanding_ambient() {
    let mesh = Arc::new(DomainMesh::disk(R0, 12).unwrap());
    let p = flat_problem(Preset::ExampleA, &mesh, 0.2, -0.1);
    let (z, report) = continuity_solve(&p, &SolverOptions::default()).unwrap();
    assert!(report.converged());
    let tol = mesh.h() * mesh.h();
    assert!(z.max() <= -0.1 + tol, "sup z = {}", z.max());
    assert!(report.grad_sup_history.iter().all(|g| g.is_finite()));
    assert!(report.grad_sup_history.windows(2).all(|w| w[1] >= w[0]), "{:?}", report.grad_sup_history);
}

#[test]
fn solves_are_deterministic() {
    let p = radial_minimal(12);
    let mut log1 = Vec::new();
    let (z1, r1) = continuity_solve_logged(&p, &SolverOptions::default(), &mut |l| log1.push(l)).unwrap();
    let mut log2 = Vec::new();
    let (z2, r2) = continuity_solve_logged(&p, &SolverOptions::default(), &mut |l| log2.push(l)).unwrap();
    assert_eq!(r1.tau_path, r2.tau_path);
    assert_eq!(z1.values(), z2.values());
    assert_eq!(log1, log2);
    assert!(!log1.is_empty());
}

#[test]
fn stalled_newton_reports_best_iterate() {
    let p = cmc_cap(10);
    let opts = SolverOptions {
        max_newton_iters: 1,
        newton_tol: 1e-15,
        ..SolverOptions::default()
    };
    let p = p.with_options(opts).unwrap();
    let zero = ScalarField::constant(p.mesh(), 0.0);
    match newton_solve(&p, 1.0, &zero) {
        Err(Error::Stalled { best, .. }) => assert_eq!(best.len(), p.mesh().vertex_count()),
        other => panic!("expected a stall, got {:?}", other.map(|r| r.iterations)),
    }
    let (_, report) = continuity_solve(&p, &opts).unwrap();
    assert_eq!(report.status, SolveStatus::Stalled);
    assert!(report.tau_path.windows(2).all(|w| w[1] > w[0]));
    assert_ne!(report.tau_path.last(), Some(&1.0));
}

#[test]
fn invalid_options_are_rejected() {
    let p = cmc_cap(4);
    let bad = SolverOptions {
        min_tau_step: 0.5,
        initial_tau_step: 0.25,
        ..SolverOptions::default()
    };
    assert!(continuity_solve(&p, &bad).is_err());
}

#[test]
fn continuation_stops_at_the_end_of_the_interval() {
    // A Killing field cut off at t = 0.5; the cap with H = −2 over the disk
    // rises above the boundary data 0.4 by more than 0.1.
    let amb = ckg_core::geometry::AmbientSpace::new(
        "cut",
        ckg_core::geometry::ConformalFactor::Custom(ckg_core::geometry::CustomFactor {
            value: Arc::new(|_| 1.0),
            first: Some(Arc::new(|_| 0.0)),
            second: Some(Arc::new(|_| 0.0)),
            primitive: Some(Arc::new(|t| t)),
            interval_end: 0.5,
        }),
        ckg_core::geometry::Gamma::Constant(1.0),
        ckg_core::geometry::BaseMetric::Flat,
        ckg_core::geometry::CurvatureModel::Flat,
    )
    .unwrap();
    let mesh = Arc::new(DomainMesh::disk(R0, 8).unwrap());
    let p = Problem::new(
        amb,
        Arc::clone(&mesh),
        ScalarField::constant(&mesh, -2.0),
        ScalarField::constant(&mesh, 0.4),
        SolverOptions::default(),
    )
    .unwrap();
    let (z, report) = continuity_solve(&p, &SolverOptions::default()).unwrap();
    assert_eq!(report.status, SolveStatus::LeftInterval);
    assert!(report.tau_path.last().is_some_and(|&t| t < 1.0));
    assert!(z.max() < 0.5);
}
