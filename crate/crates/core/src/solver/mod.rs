//! Newton continuation from the trivial problem at `τ = 0` to `τ = 1`.

pub mod continuation;
pub mod linear;
pub mod newton;
mod options;

pub use continuation::{continuity_solve, continuity_solve_logged, NewtonRecord, SolveReport, SolveStatus};
pub use linear::{linear_solve, LinearSolver};
pub use newton::{newton_solve, newton_solve_with, IterationLog, NewtonResult};
pub use options::SolverOptions;

use crate::error::Result;
use crate::geometry::ScalarField;
use crate::operator::{stiffness_triplets, Problem, SparseSystem};

/// σ-harmonic extension of the boundary values of `boundary`.
pub fn harmonic_extension(problem: &Problem, boundary: &ScalarField) -> Result<ScalarField> {
    boundary.check_mesh(problem.mesh())?;
    let mesh = problem.mesh();
    let n = mesh.interior_vertices().len();
    let mut rhs = vec![0.0; n];
    let mut trip = Vec::new();
    for (a, b, k) in stiffness_triplets(problem) {
        let Some(i) = mesh.interior_index(a) else {
            continue;
        };
        match mesh.interior_index(b) {
            Some(j) => trip.push((i, j, k)),
            None => rhs[i] -= k * boundary.values()[b],
        }
    }
    let system = SparseSystem::from_triplets(n, &trip, vec![0.0; n]);
    let x = linear_solve(&system, &rhs)?;
    let mut out = boundary.clone();
    for (i, &v) in mesh.interior_vertices().iter().enumerate() {
        out.values_mut()[v] = x[i];
    }
    Ok(out)
}
