//! Continuation in `τ` from the trivial solution `z = 0` at `τ = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ScalarField;
use crate::operator::graph::grad_sup;
use crate::operator::Problem;
use crate::solver::linear::LinearSolver;
use crate::solver::newton::{newton_solve_with, IterationLog};
use crate::solver::{harmonic_extension, SolverOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    Stalled,
    LeftInterval,
}

/// Newton attempt at one value of `τ`.
#[derive(Clone, Debug, Serialize)]
pub struct NewtonRecord {
    pub tau: f64,
    pub accepted: bool,
    pub iterations: usize,
    pub residual_norms: Vec<f64>,
    pub clamped: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub tau_path: Vec<f64>,
    pub newton_history: Vec<NewtonRecord>,
    /// `sup |∇z|_σ` at each accepted `τ`.
    pub grad_sup_history: Vec<f64>,
    pub clamped: bool,
    pub final_residual: f64,
    pub finite_difference_fallbacks: Vec<String>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Solves `Q[z] = 0`, `z = φ` on `Γ`, by continuation in `τ`.
pub fn continuity_solve(problem: &Problem, options: &SolverOptions) -> Result<(ScalarField, SolveReport)> {
    continuity_solve_logged(problem, options, &mut |_| {})
}

pub fn continuity_solve_logged(
    problem: &Problem,
    options: &SolverOptions,
    log: &mut dyn FnMut(IterationLog),
) -> Result<(ScalarField, SolveReport)> {
    options.validate()?;
    let problem = problem.with_options(*options)?;
    let mut linear = LinearSolver::new();
    let mut report = SolveReport {
        status: SolveStatus::Stalled,
        tau_path: Vec::new(),
        newton_history: Vec::new(),
        grad_sup_history: Vec::new(),
        clamped: false,
        final_residual: f64::NAN,
        finite_difference_fallbacks: problem
            .ambient()
            .finite_difference_fallbacks()
            .into_iter()
            .map(String::from)
            .collect(),
    };
    // The boundary increment between two values of τ is carried into the
    // interior by the σ-harmonic extension of φ.
    let lift = harmonic_extension(&problem, problem.phi())?;
    let mut z = ScalarField::constant(problem.mesh(), 0.0);
    let mut tau = 0.0;
    let mut step = options.initial_tau_step;
    let mut first = true;
    loop {
        let target = if first { 0.0 } else { (tau + step).min(1.0) };
        let mut start = z.clone();
        for (s, l) in start.values_mut().iter_mut().zip(lift.values()) {
            *s += (target - tau) * l;
        }
        match newton_solve_with(&problem, target, &start, &mut linear, log) {
            Ok(res) => {
                report.newton_history.push(NewtonRecord {
                    tau: target,
                    accepted: !res.clamp_active,
                    iterations: res.iterations,
                    residual_norms: res.residual_history.clone(),
                    clamped: res.clamped,
                    error: None,
                });
                report.clamped |= res.clamped;
                if res.clamp_active {
                    report.status = SolveStatus::LeftInterval;
                    return Ok((z, report));
                }
                z = res.z;
                tau = target;
                first = false;
                report.tau_path.push(tau);
                report.grad_sup_history.push(grad_sup(&problem, &z));
                report.final_residual = *res.residual_history.last().unwrap();
                if tau >= 1.0 {
                    report.status = SolveStatus::Converged;
                    return Ok((z, report));
                }
            }
            Err(err) => {
                let clamped = matches!(err, Error::OutsideInterval { .. });
                let residual = match &err {
                    Error::Stalled { residual, .. } => vec![*residual],
                    _ => Vec::new(),
                };
                report.newton_history.push(NewtonRecord {
                    tau: target,
                    accepted: false,
                    iterations: 0,
                    residual_norms: residual,
                    clamped,
                    error: Some(err.to_string()),
                });
                if !matches!(
                    err,
                    Error::Stalled { .. } | Error::SingularSystem { .. } | Error::LinearSolver(_) | Error::OutsideInterval { .. }
                ) {
                    return Err(err);
                }
                if first {
                    report.status = if clamped { SolveStatus::LeftInterval } else { SolveStatus::Stalled };
                    return Ok((z, report));
                }
                step *= 0.5;
                if step < options.min_tau_step {
                    report.status = if clamped {
                        SolveStatus::LeftInterval
                    } else {
                        SolveStatus::Stalled
                    };
                    return Ok((z, report));
                }
            }
        }
    }
}
