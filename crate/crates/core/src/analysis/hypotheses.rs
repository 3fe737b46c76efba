//! Hypotheses of the existence theorem and of its Killing and closed
//! variants, evaluated as margins.

use serde::Serialize;

use crate::geometry::Vec2;
use crate::operator::maxprinciple::{t_grid, DEFAULT_T_SAMPLES};
use crate::operator::Problem;
use crate::report::{Condition, Status};

/// Round-off allowed on conditions that hold with equality in the presets.
const EQUALITY_TOL: f64 = 1e-12;

/// Curvature of the boundary and of the Killing cylinder over it, at `t = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryCurvature {
    pub inf_h_k: f64,
    pub sup_h_k: f64,
    pub inf_h_gamma: f64,
    /// Boundary vertices where the discrete curvature estimate was flagged.
    pub unreliable_vertices: usize,
}

/// `inf_Γ H_K` and `inf_Γ H_Γ` over the boundary vertices.
pub fn boundary_curvature(problem: &Problem) -> BoundaryCurvature {
    let mesh = problem.mesh();
    let amb = problem.ambient();
    let n = problem.n() as f64;
    let mut out = BoundaryCurvature {
        inf_h_k: f64::INFINITY,
        sup_h_k: f64::NEG_INFINITY,
        inf_h_gamma: f64::INFINITY,
        unreliable_vertices: 0,
    };
    for v in mesh.boundary_vertices() {
        let Ok((kappa, reliable)) = mesh.boundary_mean_curvature(v) else {
            continue;
        };
        if !reliable {
            out.unreliable_vertices += 1;
        }
        let h_gamma = kappa / (n - 1.0);
        let u = mesh.vertices()[v];
        let Ok(h_k) = amb.cylinder_mean_curvature(0.0, u, mesh.boundary_normal(v), h_gamma) else {
            continue;
        };
        out.inf_h_k = out.inf_h_k.min(h_k);
        out.sup_h_k = out.sup_h_k.max(h_k);
        out.inf_h_gamma = out.inf_h_gamma.min(h_gamma);
    }
    out
}

/// The three alternative Ricci conditions. Any passing one suffices.
#[derive(Clone, Debug, Serialize)]
pub struct RicciConditions {
    /// `Ric^rad ≥ −n (inf_Γ H_K)²` for the ambient radial Ricci curvature.
    pub simple: Condition,
    /// `Ric^rad + (n k² − √γ k_t)|_{t=0} ≥ −n (inf_Γ H_K)²`.
    pub refined: Condition,
    /// `n Ric_M^rad ≥ −(n − 1)² (inf_Γ H_Γ)²`, for closed fields.
    pub corollary3: Condition,
}

impl RicciConditions {
    pub fn passed(&self) -> bool {
        self.simple.passed() || self.refined.passed() || self.corollary3.passed()
    }

    pub fn evaluable(&self) -> bool {
        [&self.simple, &self.refined, &self.corollary3]
            .iter()
            .any(|c| matches!(c.status, Status::Pass | Status::Fail))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    /// Range of the `t`-grid on which the conditions on `λ` were sampled.
    pub t_range: [f64; 2],
    pub samples: usize,
    pub inf_h_k: f64,
    pub inf_h_gamma: f64,
    pub sup_h: f64,
    pub unreliable_boundary_vertices: usize,
    pub lambda_t_nonneg: Condition,
    pub rho_t_nonneg: Condition,
    pub phi_nonpos: Condition,
    pub h_nonneg: Condition,
    /// Strict Serrin condition `inf_Γ H_K > sup H`.
    pub h_below_inf_hk: Condition,
    /// Non-strict variant `inf_Γ H_K ≥ sup H`, sufficient for Killing fields.
    pub h_le_inf_hk: Condition,
    pub ricci_condition: RicciConditions,
}

impl HypothesisReport {
    /// All hypotheses of the general existence theorem hold.
    pub fn general_passes(&self) -> bool {
        self.lambda_t_nonneg.passed()
            && self.rho_t_nonneg.passed()
            && self.phi_nonpos.passed()
            && self.h_nonneg.passed()
            && self.h_below_inf_hk.passed()
            && self.ricci_condition.passed()
    }

    /// The weaker hypotheses available when the field is Killing.
    pub fn killing_passes(&self) -> bool {
        self.h_le_inf_hk.passed() && self.h_nonneg.passed() && self.ricci_condition.simple.passed()
    }

    /// True if one of the sets of hypotheses holds.
    pub fn passes(&self) -> bool {
        self.general_passes() || self.killing_passes()
    }

    pub fn conditions(&self) -> Vec<&Condition> {
        vec![
            &self.lambda_t_nonneg,
            &self.rho_t_nonneg,
            &self.phi_nonpos,
            &self.h_nonneg,
            &self.h_below_inf_hk,
            &self.h_le_inf_hk,
            &self.ricci_condition.simple,
            &self.ricci_condition.refined,
            &self.ricci_condition.corollary3,
        ]
    }
}

fn boundary_phi_range(problem: &Problem) -> (f64, f64) {
    let phi = problem.phi().values();
    problem
        .mesh()
        .boundary_vertices()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(phi[v]), hi.max(phi[v])))
}

pub fn check_hypotheses(problem: &Problem) -> HypothesisReport {
    let amb = problem.ambient();
    let n = problem.n() as f64;
    let (phi_min, phi_max) = boundary_phi_range(problem);

    let end = amb.interval_end();
    let hi = if end.is_finite() { (0.5 * end).min(0.1) } else { 0.1 };
    let lo = phi_min.min(0.0) - 1.0;
    let grid = t_grid(amb, lo, hi, DEFAULT_T_SAMPLES);
    let grid_note = format!("{} samples on [{lo}, {hi}]", grid.len());
    let min_lt = grid.iter().map(|&t| amb.lambda_t(t)).fold(f64::INFINITY, f64::min);
    let min_rt = grid.iter().map(|&t| amb.rho_t_unchecked(t)).fold(f64::INFINITY, f64::min);

    let lambda_t_nonneg = Condition::with_tolerance(
        "lambda_t_nonneg",
        "lambda_t >= 0",
        min_lt,
        EQUALITY_TOL,
        format!("maximum principle and height estimate; {grid_note}"),
    );
    let rho_t_nonneg = Condition::with_tolerance(
        "rho_t_nonneg",
        "(lambda_t / lambda)_t >= 0",
        min_rt,
        EQUALITY_TOL,
        format!("maximum principle; {grid_note}"),
    );
    let phi_nonpos = Condition::evaluated(
        "phi_nonpos",
        "phi <= 0 on the boundary",
        -phi_max,
        false,
        "height estimate",
    );
    let (h_min, h_max) = (problem.h().min(), problem.h().max());
    let h_nonneg = Condition::evaluated("H_nonneg", "H >= 0", h_min, false, "existence theorem");

    let bc = boundary_curvature(problem);
    let serrin = bc.inf_h_k - h_max;
    let hk_note = format!(
        "inf H_K = {} at t = 0; {} unreliable boundary vertices",
        bc.inf_h_k, bc.unreliable_vertices
    );
    let h_below_inf_hk = Condition::evaluated(
        "H_below_inf_HK",
        "sup H < inf_boundary H_K",
        serrin,
        true,
        format!("existence theorem; {hk_note}"),
    );
    let h_le_inf_hk = if amb.is_killing() {
        Condition::with_tolerance(
            "H_le_inf_HK",
            "sup H <= inf_boundary H_K",
            serrin,
            EQUALITY_TOL,
            format!("Killing field; {hk_note}"),
        )
    } else {
        Condition::not_applicable("H_le_inf_HK", "sup H <= inf_boundary H_K", "only for Killing fields")
    };

    let ricci_condition = ricci_conditions(problem, &bc, n);

    HypothesisReport {
        t_range: [lo, hi],
        samples: grid.len(),
        inf_h_k: bc.inf_h_k,
        inf_h_gamma: bc.inf_h_gamma,
        sup_h: h_max,
        unreliable_boundary_vertices: bc.unreliable_vertices,
        lambda_t_nonneg,
        rho_t_nonneg,
        phi_nonpos,
        h_nonneg,
        h_below_inf_hk,
        h_le_inf_hk,
        ricci_condition,
    }
}

/// Infimum of `Ric_M^rad` over the vertices, if the curvature model can
/// evaluate it.
fn inf_base_ricci(problem: &Problem) -> Option<f64> {
    let model = problem.ambient().curvature_model();
    let n = problem.n();
    problem
        .mesh()
        .vertices()
        .iter()
        .map(|&u| model.radial_ricci(u, n))
        .try_fold(f64::INFINITY, |m, r| r.map(|r| m.min(r)))
}

fn ricci_conditions(problem: &Problem, bc: &BoundaryCurvature, n: f64) -> RicciConditions {
    const SIMPLE: (&str, &str) = ("ricci_simple", "Ric^rad >= -n (inf H_K)^2");
    const REFINED: (&str, &str) = ("ricci_refined", "Ric^rad + (n k^2 - sqrt(gamma) k_t) >= -n (inf H_K)^2 at t = 0");
    const CLOSED: (&str, &str) = ("ricci_corollary3", "n Ric_M^rad >= -(n - 1)^2 (inf H_Gamma)^2");
    let amb = problem.ambient();

    let Some(ric_m) = inf_base_ricci(problem) else {
        let note = "curvature of the base is not available";
        return RicciConditions {
            simple: Condition::not_evaluable(SIMPLE.0, SIMPLE.1, note),
            refined: Condition::not_evaluable(REFINED.0, REFINED.1, note),
            corollary3: Condition::not_evaluable(CLOSED.0, CLOSED.1, note),
        };
    };
    if !amb.has_constant_gamma() {
        let note = "gamma is not constant: no radial direction field is available";
        return RicciConditions {
            simple: Condition::not_evaluable(SIMPLE.0, SIMPLE.1, note),
            refined: Condition::not_evaluable(REFINED.0, REFINED.1, note),
            corollary3: Condition::not_applicable(CLOSED.0, CLOSED.1, "only for closed fields"),
        };
    }

    // γ is constant, so k, k_t and ρ_t at t = 0 do not depend on u.
    let u = Vec2::zeros();
    let gamma = amb.gamma(u);
    let k = amb.leaf_mean_curvature(0.0, u).unwrap_or(f64::NAN);
    let k_t = amb.leaf_mean_curvature_t(0.0, u).unwrap_or(f64::NAN);
    let rho_t = amb.rho_t_unchecked(0.0);
    // Ricci curvature of the ambient space in the radial direction, from the
    // relation between the Ricci tensors of the ambient space and the leaf.
    let ric_ambient = ric_m - n * k * k + gamma.sqrt() * k_t;
    let hk = bc.inf_h_k.max(0.0);
    let hg = bc.inf_h_gamma.max(0.0);
    let simple = Condition::evaluated(
        SIMPLE.0,
        SIMPLE.1,
        ric_ambient + n * hk * hk,
        false,
        format!("Ric^rad = {ric_ambient}"),
    );
    // n k² − √γ k_t = (n − 1) k² + γ ρ_t at t = 0.
    let leaf_term = (n - 1.0) * k * k + gamma * rho_t;
    let refined = Condition::evaluated(
        REFINED.0,
        REFINED.1,
        ric_ambient + leaf_term + n * hk * hk,
        false,
        format!("leaf term = {leaf_term}"),
    );
    let corollary3 = Condition::evaluated(
        CLOSED.0,
        CLOSED.1,
        ric_m + (n - 1.0) * (n - 1.0) / n * hg * hg,
        false,
        format!("Ric_M^rad = {ric_m}; margin divided by n"),
    );
    RicciConditions {
        simple,
        refined,
        corollary3,
    }
}
