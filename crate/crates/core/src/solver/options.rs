use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Newton and continuation settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Tolerance on the max-norm of the weak residual.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub initial_tau_step: f64,
    pub min_tau_step: f64,
    /// Backtracking factor of the line search.
    pub damping: f64,
    pub max_halvings: usize,
    /// Iterates are kept at least this far below the end of the flow interval.
    pub clamp_margin: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton_iters: 50,
            initial_tau_step: 0.25,
            min_tau_step: 1e-4,
            damping: 0.5,
            max_halvings: 20,
            clamp_margin: 1e-6,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("newton_tol", self.newton_tol),
            ("initial_tau_step", self.initial_tau_step),
            ("min_tau_step", self.min_tau_step),
            ("damping", self.damping),
            ("clamp_margin", self.clamp_margin),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_newton_iters == 0 {
            return Err(Error::Parameter("max_newton_iters must be positive".into()));
        }
        if !(self.min_tau_step <= self.initial_tau_step && self.initial_tau_step <= 1.0) {
            return Err(Error::Parameter(
                "need min_tau_step <= initial_tau_step <= 1".into(),
            ));
        }
        if self.damping >= 1.0 {
            return Err(Error::Parameter("damping must lie in (0, 1)".into()));
        }
        Ok(())
    }
}
