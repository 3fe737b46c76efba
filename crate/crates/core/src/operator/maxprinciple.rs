use serde::Serialize;

use crate::geometry::{AmbientSpace, ScalarField};
use crate::report::Condition;

/// Default number of samples of the `t`-grid.
pub const DEFAULT_T_SAMPLES: usize = 512;

/// Sign conditions `ρ_t ≥ 0` and `λ_t H ≥ 0` under which `Q` satisfies a
/// maximum principle.
#[derive(Clone, Debug, Serialize)]
pub struct MaxPrincipleReport {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    pub rho_t: Condition,
    pub lambda_t_h: Condition,
    /// Smallest sampled `λ_t`.
    pub min_lambda_t: f64,
}

/// Uniform grid over `[lo, hi]`, dropping points at or beyond the end of the
/// flow interval.
pub fn t_grid(ambient: &AmbientSpace, lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let samples = samples.max(2);
    let end = ambient.interval_end();
    (0..samples)
        .map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64)
        .filter(|&t| t < end)
        .collect()
}

pub fn max_principle_conditions(
    ambient: &AmbientSpace,
    h: &ScalarField,
    t_range: (f64, f64),
    samples: usize,
) -> MaxPrincipleReport {
    let grid = t_grid(ambient, t_range.0, t_range.1, samples);
    let min_rho_t = grid
        .iter()
        .map(|&t| ambient.rho_t_unchecked(t))
        .fold(f64::INFINITY, f64::min);
    let (min_lt, max_lt) = grid.iter().map(|&t| ambient.lambda_t(t)).fold(
        (f64::INFINITY, f64::NEG_INFINITY),
        |(lo, hi), v| (lo.min(v), hi.max(v)),
    );
    let (min_h, max_h) = (h.min(), h.max());
    // λ_t H is bilinear, so its minimum over the sample box sits at a corner.
    let min_product = [min_lt * min_h, min_lt * max_h, max_lt * min_h, max_lt * max_h]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let note = format!("{} samples on [{}, {}]", grid.len(), t_range.0, t_range.1);
    // Round-off of the closed forms can produce tiny negative values of ρ_t
    // where it vanishes identically.
    MaxPrincipleReport {
        t_min: t_range.0,
        t_max: t_range.1,
        samples: grid.len(),
        rho_t: Condition::with_tolerance("rho_t_nonneg", "rho_t >= 0", min_rho_t, 1e-12, note.clone()),
        lambda_t_h: Condition::with_tolerance("lambda_t_H_nonneg", "lambda_t * H >= 0", min_product, 1e-12, note),
        min_lambda_t: min_lt,
    }
}
