//! Gradient and Hessian recovery for piecewise-linear fields.

use std::collections::BTreeSet;

use nalgebra::{SMatrix, SVector};

use crate::geometry::ambient::{Mat2, Vec2};
use crate::geometry::DomainMesh;

/// Recovered first and second derivatives at a vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecoveredJet {
    /// Chart partials `z_i`.
    pub gradient: Vec2,
    /// Chart second partials `∂_i∂_j z`.
    pub partials: Mat2,
    /// Covariant Hessian `z_{i;j} = ∂_i∂_j z − Γᵏᵢⱼ z_k`.
    pub hessian: Mat2,
    /// Set on boundary vertices and on patches too small or too degenerate
    /// for a reliable fit.
    pub flagged: bool,
}

/// The vertex 2-ring of `v`, excluding `v`.
pub fn two_ring(mesh: &DomainMesh, v: usize) -> Vec<usize> {
    let mut set = BTreeSet::new();
    for &w in mesh.neighbors(v) {
        set.insert(w);
        for &x in mesh.neighbors(w) {
            set.insert(x);
        }
    }
    set.remove(&v);
    set.into_iter().collect()
}

/// Least-squares quadratic fit over the 2-ring of `v`, with the value at `v`
/// held fixed.
pub fn recover_at(mesh: &DomainMesh, values: &[f64], v: usize) -> RecoveredJet {
    let u0 = mesh.vertices()[v];
    let patch = two_ring(mesh, v);
    let scale = patch
        .iter()
        .map(|&w| (mesh.vertices()[w] - u0).norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut ata = SMatrix::<f64, 5, 5>::zeros();
    let mut atb = SVector::<f64, 5>::zeros();
    for &w in &patch {
        let d = (mesh.vertices()[w] - u0) / scale;
        let row = SVector::<f64, 5>::from([d.x, d.y, 0.5 * d.x * d.x, d.x * d.y, 0.5 * d.y * d.y]);
        ata += row * row.transpose();
        atb += row * (values[w] - values[v]);
    }
    let mut flagged = mesh.is_boundary(v) || patch.len() < 5;
    let coef = match ata.cholesky() {
        Some(ch) => {
            let diag_min = ch.l().diagonal().min();
            let diag_max = ch.l().diagonal().max();
            if !(diag_min > 1e-6 * diag_max) {
                flagged = true;
            }
            ch.solve(&atb)
        }
        None => {
            flagged = true;
            SVector::<f64, 5>::zeros()
        }
    };
    let gradient = Vec2::new(coef[0], coef[1]) / scale;
    let partials = Mat2::new(coef[2], coef[3], coef[3], coef[4]) / (scale * scale);
    let gamma = mesh.metric().christoffel(u0);
    let hessian = partials - (gamma[0] * gradient.x + gamma[1] * gradient.y);
    RecoveredJet {
        gradient,
        partials,
        hessian,
        flagged,
    }
}

/// Recovered jets at every vertex.
pub fn recover_all(mesh: &DomainMesh, values: &[f64]) -> Vec<RecoveredJet> {
    use rayon::prelude::*;
    (0..mesh.vertex_count())
        .into_par_iter()
        .map(|v| recover_at(mesh, values, v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratics_are_recovered_exactly() {
        let mesh = DomainMesh::disk(1.0, 6).unwrap();
        let f = |u: Vec2| 0.3 + 1.5 * u.x - 0.7 * u.y + 0.9 * u.x * u.x - 0.4 * u.x * u.y + 2.0 * u.y * u.y;
        let vals: Vec<f64> = mesh.vertices().iter().map(|&u| f(u)).collect();
        for &v in mesh.interior_vertices() {
            let j = recover_at(&mesh, &vals, v);
            let u = mesh.vertices()[v];
            assert!(!j.flagged);
            assert!((j.gradient - Vec2::new(1.5 + 1.8 * u.x - 0.4 * u.y, -0.7 - 0.4 * u.x + 4.0 * u.y)).norm() < 1e-9);
            assert!((j.hessian - Mat2::new(1.8, -0.4, -0.4, 4.0)).norm() < 1e-8);
        }
        let b = mesh.boundary_loops()[0][0];
        assert!(recover_at(&mesh, &vals, b).flagged);
    }
}
