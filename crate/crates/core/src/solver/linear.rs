//! Sparse direct solves backed by faer's LU factorisation.

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};
use crate::operator::SparseSystem;

/// Relative residual accepted without refinement.
const RESIDUAL_TOL: f64 = 1e-12;

/// LU solver that keeps the symbolic factorisation between calls on systems
/// with the same pattern.
#[derive(Default)]
pub struct LinearSolver {
    symbolic: Option<(usize, usize, SymbolicLu<usize>)>,
}

fn to_faer(system: &SparseSystem) -> Result<SparseColMat<usize, f64>> {
    let n = system.dim();
    let trip: Vec<Triplet<usize, usize, f64>> = system
        .triplets()
        .map(|(i, j, v)| Triplet::new(i, j, v))
        .collect();
    SparseColMat::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::LinearSolver(format!("building sparse matrix: {e:?}")))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl LinearSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Solves `A x = rhs` for the Jacobian `A` of `system`.
    pub fn solve(&mut self, system: &SparseSystem, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = system.dim();
        if rhs.len() != n {
            return Err(Error::LinearSolver(format!(
                "right-hand side has length {}, system has dimension {n}",
                rhs.len()
            )));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let mat = to_faer(system)?;
        let key = (n, system.nnz());
        let symbolic = match &self.symbolic {
            Some((a, b, s)) if (*a, *b) == key => s.clone(),
            _ => {
                let s = SymbolicLu::try_new(mat.symbolic())
                    .map_err(|e| Error::LinearSolver(format!("symbolic factorisation: {e:?}")))?;
                self.symbolic = Some((key.0, key.1, s.clone()));
                s
            }
        };
        let lu = Lu::try_new_with_symbolic(symbolic, mat.as_ref()).map_err(|e| match e {
            LuError::SymbolicSingular { index } => Error::SingularSystem {
                vertex: system.interior_vertices()[index.min(n - 1)],
            },
            LuError::Generic(g) => Error::LinearSolver(format!("{g:?}")),
        })?;
        let b = Mat::from_fn(n, 1, |i, _| rhs[i]);
        let mut x: Vec<f64> = {
            let sol = lu.solve(&b);
            (0..n).map(|i| sol[(i, 0)]).collect()
        };
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::SingularSystem {
                vertex: system.interior_vertices()[i],
            });
        }
        // Iterative refinement if the residual check fails.
        let scale = max_abs(rhs).max(f64::MIN_POSITIVE);
        for _ in 0..3 {
            let ax = system.matvec(&x);
            let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
            if max_abs(&r) <= RESIDUAL_TOL * scale {
                break;
            }
            let rb = Mat::from_fn(n, 1, |i, _| r[i]);
            let dx = lu.solve(&rb);
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += dx[(i, 0)];
            }
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::SingularSystem {
                vertex: system.interior_vertices()[i],
            });
        }
        Ok(x)
    }
}

/// One-shot sparse solve of `A x = rhs` with `A` the Jacobian of `system`.
pub fn linear_solve(system: &SparseSystem, rhs: &[f64]) -> Result<Vec<f64>> {
    LinearSolver::new().solve(system, rhs)
}

/// Relative max-norm residual `‖Ax − b‖∞ / ‖b‖∞`.
pub fn relative_residual(system: &SparseSystem, x: &[f64], rhs: &[f64]) -> f64 {
    let ax = system.matvec(x);
    let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    max_abs(&r) / max_abs(rhs).max(f64::MIN_POSITIVE)
}
