//! Existence hypotheses, explicit barriers and the comparison and
//! monotonicity checks that shadow the existence and uniqueness arguments.

pub mod barriers;
pub mod comparison;
pub mod hypotheses;
pub mod probe;

pub use barriers::{
    boundary_barrier, boundary_barrier_search, height_barrier, height_barrier_search, radial_q,
    upper_barrier_check, upper_barrier_search, BarrierCertificate, BarrierKind, BarrierParameters,
    BarrierSearch, OrderingCheck, SearchAttempt,
};
pub use comparison::{comparison_check, ComparisonReport, Direction};
pub use hypotheses::{boundary_curvature, check_hypotheses, BoundaryCurvature, HypothesisReport, RicciConditions};
pub use probe::{cylinder_monotonicity_probe, CurvatureSource, ProbeReport, ProbeRow};

use crate::geometry::DomainMesh;

/// Constant `C` of the tolerance `C·h²` in comparison checks. Calibrated on
/// the disk and cap oracle problems.
pub const COMPARISON_C: f64 = 1.0;

/// Constant `C` of the tolerance `C·h²` when checking a solution against a
/// barrier.
pub const BARRIER_ORDERING_C: f64 = 1.0;

/// `C·h²` with `h` the longest σ-edge of the mesh.
pub fn mesh_tolerance(c: f64, mesh: &DomainMesh) -> f64 {
    c * mesh.h() * mesh.h()
}
