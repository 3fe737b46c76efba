//! Damped Newton iteration for `Q_τ[z] = 0` with `z = τφ` on the boundary.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ScalarField;
use crate::operator::{jacobian_qtau, residual_qtau, Problem};
use crate::solver::linear::LinearSolver;

/// One line of the convergence log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterationLog {
    pub tau: f64,
    pub iter: usize,
    pub residual_norm: f64,
    pub step_norm: f64,
    pub damping_halvings: usize,
}

#[derive(Clone, Debug)]
pub struct NewtonResult {
    pub z: ScalarField,
    pub iterations: usize,
    /// Max-norm of the residual after each iteration, starting with the
    /// initial guess.
    pub residual_history: Vec<f64>,
    /// True if some iterate had to be clamped below the interval end.
    pub clamped: bool,
    /// True if the returned solution touches the clamp ceiling.
    pub clamp_active: bool,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton's method from `z_init`, whose boundary values are replaced by
/// `τφ`.
pub fn newton_solve(problem: &Problem, tau: f64, z_init: &ScalarField) -> Result<NewtonResult> {
    newton_solve_with(problem, tau, z_init, &mut LinearSolver::new(), &mut |_| {})
}

pub fn newton_solve_with(
    problem: &Problem,
    tau: f64,
    z_init: &ScalarField,
    linear: &mut LinearSolver,
    log: &mut dyn FnMut(IterationLog),
) -> Result<NewtonResult> {
    let opts = *problem.options();
    let mesh = problem.mesh();
    let ceiling = problem.ambient().interval_end() - opts.clamp_margin;
    let mut z = problem.impose_boundary(z_init, tau);
    let mut clamped = false;
    let clamp = |z: &mut ScalarField, flag: &mut bool| {
        for &v in mesh.interior_vertices() {
            let x = &mut z.values_mut()[v];
            if *x > ceiling {
                *x = ceiling;
                *flag = true;
            }
        }
    };
    clamp(&mut z, &mut clamped);
    if let Some(v) = mesh.boundary_vertices().find(|&v| !(z.values()[v] < ceiling + opts.clamp_margin)) {
        return Err(Error::OutsideInterval {
            vertex: v,
            value: z.values()[v],
            interval_end: problem.ambient().interval_end(),
        });
    }

    let mut history = Vec::new();
    let mut best = (f64::INFINITY, z.values().to_vec());
    // Vertex and value of the last undamped step that crossed the ceiling.
    let mut overshoot = None;
    for iter in 0..=opts.max_newton_iters {
        let system = jacobian_qtau(problem, &z, tau)?;
        let rnorm = max_norm(&system.residual);
        history.push(rnorm);
        if rnorm < best.0 {
            best = (rnorm, z.values().to_vec());
        }
        if rnorm <= opts.newton_tol {
            let clamp_active = mesh
                .interior_vertices()
                .iter()
                .any(|&v| z.values()[v] >= ceiling);
            return Ok(NewtonResult {
                z,
                iterations: iter,
                residual_history: history,
                clamped,
                clamp_active,
            });
        }
        if iter == opts.max_newton_iters {
            break;
        }
        let rhs: Vec<f64> = system.residual.iter().map(|r| -r).collect();
        let delta = linear.solve(&system, &rhs)?;
        overshoot = system
            .interior_vertices()
            .iter()
            .zip(&delta)
            .map(|(&v, d)| (v, z.values()[v] + d))
            .filter(|&(_, x)| x > ceiling)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let r2 = two_norm(&system.residual);
        let mut alpha = 1.0;
        let mut accepted = None;
        for halvings in 0..=opts.max_halvings {
            let mut trial = z.clone();
            for (i, &v) in system.interior_vertices().iter().enumerate() {
                trial.values_mut()[v] += alpha * delta[i];
            }
            let mut trial_clamped = false;
            clamp(&mut trial, &mut trial_clamped);
            if let Ok(r) = residual_qtau(problem, &trial, tau) {
                if two_norm(&r) < (1.0 - 1e-4 * alpha) * r2 {
                    clamped |= trial_clamped;
                    accepted = Some((trial, halvings));
                    break;
                }
            }
            alpha *= opts.damping;
        }
        let Some((trial, halvings)) = accepted else {
            break;
        };
        log(IterationLog {
            tau,
            iter: iter + 1,
            residual_norm: rnorm,
            step_norm: alpha * max_norm(&delta),
            damping_halvings: halvings,
        });
        z = trial;
    }
    // A stall caused by iterates pressing against the end of the interval is
    // reported as such.
    if let Some((vertex, value)) = overshoot {
        return Err(Error::OutsideInterval {
            vertex,
            value,
            interval_end: problem.ambient().interval_end(),
        });
    }
    Err(Error::Stalled {
        iterations: history.len().saturating_sub(1),
        residual: best.0,
        best: best.1,
    })
}
