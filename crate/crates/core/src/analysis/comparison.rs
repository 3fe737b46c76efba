//! Pointwise ordering of two discrete solutions with ordered boundary data.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ScalarField;
use crate::operator::Problem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `φ₁ ≤ φ₂`, so `z₁ ≤ z₂` is expected.
    FirstBelow,
    /// `φ₂ ≤ φ₁`, so `z₂ ≤ z₁` is expected.
    SecondBelow,
    /// The boundary data cross; no ordering follows.
    Unordered,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub ordered: bool,
    pub direction: Direction,
    pub tol: f64,
    /// Largest amount by which the expected ordering fails, `0` if it holds
    /// everywhere.
    pub worst_violation: f64,
    pub worst_vertex: Option<usize>,
    pub worst_point: Option<[f64; 2]>,
    /// True if both problems prescribe the same `H`.
    pub same_h: bool,
}

/// Checks `z₁ ≤ z₂ + tol` at every vertex when `φ₁ ≤ φ₂` on `Γ`, or the
/// symmetric statement when `φ₂ ≤ φ₁`.
pub fn comparison_check(
    p1: &Problem,
    p2: &Problem,
    z1: &ScalarField,
    z2: &ScalarField,
    tol: f64,
) -> Result<ComparisonReport> {
    let mesh = p1.mesh();
    if mesh.id() != p2.mesh().id() {
        return Err(Error::FieldMismatch(format!(
            "problems are posed on different meshes ({} and {})",
            mesh.id(),
            p2.mesh().id()
        )));
    }
    z1.check_mesh(mesh)?;
    z2.check_mesh(mesh)?;
    let (f1, f2) = (p1.phi().values(), p2.phi().values());
    let first_below = mesh.boundary_vertices().all(|v| f1[v] <= f2[v]);
    let second_below = mesh.boundary_vertices().all(|v| f2[v] <= f1[v]);
    let direction = if first_below {
        Direction::FirstBelow
    } else if second_below {
        Direction::SecondBelow
    } else {
        Direction::Unordered
    };
    let same_h = p1.h().values() == p2.h().values();
    let mut report = ComparisonReport {
        ordered: false,
        direction,
        tol,
        worst_violation: 0.0,
        worst_vertex: None,
        worst_point: None,
        same_h,
    };
    let (lo, hi) = match direction {
        Direction::FirstBelow => (z1.values(), z2.values()),
        Direction::SecondBelow => (z2.values(), z1.values()),
        Direction::Unordered => return Ok(report),
    };
    let mut worst = f64::NEG_INFINITY;
    for v in 0..mesh.vertex_count() {
        let excess = lo[v] - hi[v];
        if excess > worst {
            worst = excess;
            report.worst_vertex = Some(v);
        }
    }
    report.worst_violation = worst.max(0.0);
    report.worst_point = report.worst_vertex.map(|v| {
        let u = mesh.vertices()[v];
        [u.x, u.y]
    });
    report.ordered = worst <= tol;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{preset_ambient, DomainMesh, Preset, PresetParams};
    use std::sync::Arc;

    fn problem(mesh: &Arc<DomainMesh>, phi: f64) -> Problem {
        let amb = preset_ambient(Preset::KillingFlat, PresetParams::default()).unwrap();
        Problem::new(
            amb,
            Arc::clone(mesh),
            ScalarField::constant(mesh, 0.5),
            ScalarField::constant(mesh, phi),
            Default::default(),
        )
        .unwrap()
    }

    #[test]
    fn identical_fields_are_ordered() {
        let mesh = Arc::new(DomainMesh::disk(0.4, 4).unwrap());
        let p = problem(&mesh, -0.5);
        let z = ScalarField::from_fn(&mesh, |u| -0.5 + u.norm_squared()).unwrap();
        let r = comparison_check(&p, &p, &z, &z, 0.0).unwrap();
        assert!(r.ordered);
        assert_eq!(r.worst_violation, 0.0);
    }

    #[test]
    fn injected_violation_is_located() {
        let mesh = Arc::new(DomainMesh::disk(0.4, 4).unwrap());
        let (p1, p2) = (problem(&mesh, -0.5), problem(&mesh, -0.4));
        let z1 = ScalarField::constant(&mesh, -0.5);
        let mut z1_bad = z1.clone();
        let v = mesh.interior_vertices()[3];
        z1_bad.values_mut()[v] = 0.1;
        let z2 = ScalarField::constant(&mesh, -0.4);
        assert!(comparison_check(&p1, &p2, &z1, &z2, 1e-12).unwrap().ordered);
        let r = comparison_check(&p1, &p2, &z1_bad, &z2, 1e-12).unwrap();
        assert!(!r.ordered);
        assert_eq!(r.worst_vertex, Some(v));
        assert!((r.worst_violation - 0.5).abs() < 1e-15);
        let swapped = comparison_check(&p2, &p1, &z2, &z1_bad, 1e-12).unwrap();
        assert_eq!(swapped.direction, Direction::SecondBelow);
        assert!(!swapped.ordered);
    }

    #[test]
    fn different_meshes_are_rejected() {
        let m1 = Arc::new(DomainMesh::disk(0.4, 4).unwrap());
        let m2 = Arc::new(DomainMesh::disk(0.4, 4).unwrap());
        let (p1, p2) = (problem(&m1, -0.5), problem(&m2, -0.5));
        let z1 = ScalarField::constant(&m1, 0.0);
        let z2 = ScalarField::constant(&m2, 0.0);
        assert!(comparison_check(&p1, &p2, &z1, &z2, 0.0).is_err());
    }
}
