//! Distance to the boundary on generic meshes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::geometry::ambient::{Mat2, Vec2};
use crate::geometry::mesh::DistanceJet;
use crate::geometry::recovery::recover_at;
use crate::geometry::{DomainMesh, ScalarField};

/// σ-distance to `Γ` at every vertex: closed form on preset domains,
/// otherwise Dijkstra on edges refined by one sweep of triangle updates.
pub fn distance_to_boundary(mesh: &DomainMesh) -> Result<ScalarField> {
    ScalarField::new(mesh, mesh.distances().to_vec())
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn edge_length(mesh: &DomainMesh, a: usize, b: usize) -> f64 {
    let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
    mesh.metric().norm(0.5 * (pa + pb), pb - pa)
}

/// Multi-source Dijkstra on the edge graph; returns distances and the
/// settling order.
pub(crate) fn dijkstra(mesh: &DomainMesh, sources: &[usize]) -> (Vec<f64>, Vec<usize>) {
    let n = mesh.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(Item(0.0, s));
    }
    while let Some(Item(d, v)) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        order.push(v);
        for &w in mesh.neighbors(v) {
            let nd = d + edge_length(mesh, v, w);
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Item(nd, w));
            }
        }
    }
    (dist, order)
}

/// Local eikonal solve on a triangle: the value at `c` making the linear
/// interpolant have unit σ-gradient, if the characteristic enters through
/// the opposite edge.
fn triangle_update(pc: Vec2, pa: Vec2, pb: Vec2, da: f64, db: f64, sigma_inv: &Mat2) -> Option<f64> {
    let e = Mat2::from_columns(&[pa - pc, pb - pc]);
    let e_inv = e.try_inverse()?;
    // g = E⁻ᵀ (δ − d_c 1), require gᵀ σ⁻¹ g = 1.
    let q = e_inv * sigma_inv * e_inv.transpose();
    let one = Vec2::new(1.0, 1.0);
    let delta = Vec2::new(da, db);
    let qa = one.dot(&(q * one));
    let qb = -2.0 * one.dot(&(q * delta));
    let qc = delta.dot(&(q * delta)) - 1.0;
    let disc = qb * qb - 4.0 * qa * qc;
    if !(qa > 0.0) || disc < 0.0 {
        return None;
    }
    let dc = (-qb + disc.sqrt()) / (2.0 * qa);
    if dc < da.max(db) {
        return None;
    }
    let g = e_inv.transpose() * (delta - one * dc);
    // The descent direction −σ⁻¹g must point into the cone spanned by the edges.
    let coeff = e_inv * (-(sigma_inv * g));
    (coeff.x >= 0.0 && coeff.y >= 0.0).then_some(dc)
}

pub(crate) fn geodesic_distance(mesh: &DomainMesh) -> Vec<f64> {
    let sources: Vec<usize> = mesh.boundary_vertices().collect();
    let (mut dist, order) = dijkstra(mesh, &sources);
    let mut rank = vec![usize::MAX; mesh.vertex_count()];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    for &c in &order {
        if mesh.is_boundary(c) {
            continue;
        }
        for &t in mesh.vertex_triangles(c) {
            let tri = mesh.triangles()[t];
            let others: Vec<usize> = tri.iter().copied().filter(|&w| w != c).collect();
            let (a, b) = (others[0], others[1]);
            if rank[a] > rank[c] || rank[b] > rank[c] {
                continue;
            }
            let sigma_inv = mesh.metric().inverse(mesh.centroid(t));
            let v = mesh.vertices();
            if let Some(dc) = triangle_update(v[c], v[a], v[b], dist[a], dist[b], &sigma_inv) {
                if dc < dist[c] {
                    dist[c] = dc;
                }
            }
        }
    }
    dist
}

/// Largest edge-graph distance from any boundary vertex. Edge paths are
/// longer than geodesics, so this overestimates the diameter.
pub(crate) fn graph_diameter(mesh: &DomainMesh) -> f64 {
    let sources: Vec<usize> = mesh.boundary_vertices().collect();
    use rayon::prelude::*;
    sources
        .par_iter()
        .map(|&s| dijkstra(mesh, &[s]).0.into_iter().fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

fn barycentric(mesh: &DomainMesh, t: usize, u: Vec2) -> [f64; 3] {
    let [a, b, c] = mesh.triangles()[t];
    let v = mesh.vertices();
    let e = Mat2::from_columns(&[v[b] - v[a], v[c] - v[a]]);
    let l = e.try_inverse().map(|m| m * (u - v[a])).unwrap_or(Vec2::zeros());
    [1.0 - l.x - l.y, l.x, l.y]
}

/// Distance jet from the discrete distance: interpolated value, element
/// gradient, and the recovered σ-Laplacian interpolated from the vertices.
pub(crate) fn discrete_jet(mesh: &DomainMesh, t: usize, u: Vec2) -> DistanceJet {
    let d = mesh.distances();
    let w = barycentric(mesh, t, u);
    let tri = mesh.triangles()[t];
    let mut value = 0.0;
    let mut lap = 0.0;
    for k in 0..3 {
        let v = tri[k];
        value += w[k] * d[v];
        let jet = recover_at(mesh, d, v);
        let p = mesh.vertices()[v];
        let inv = mesh.metric().inverse(p);
        lap += w[k] * (inv.component_mul(&jet.hessian)).sum();
    }
    DistanceJet {
        d: value,
        grad: mesh.element_gradient(t, d),
        laplacian: lap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_update_planar_front() {
        // Front moving in +y from the x-axis.
        let s = Mat2::identity();
        let d = triangle_update(Vec2::new(0.5, 1.0), Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), 0.0, 0.0, &s);
        assert!((d.unwrap() - 1.0).abs() < 1e-14);
        let d = triangle_update(Vec2::new(0.3, 1.0), Vec2::new(0.0, 0.5), Vec2::new(1.0, 0.5), 0.5, 0.5, &s);
        assert!((d.unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn generic_disk_distance_is_close_to_closed_form() {
        let preset = DomainMesh::disk(0.4, 16).unwrap();
        let generic = preset.as_generic().unwrap();
        let err = preset
            .distances()
            .iter()
            .zip(generic.distances())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.02, "err = {err}");
        let diam = graph_diameter(&generic);
        assert!((0.8..0.8 * 1.15).contains(&diam), "{diam}");
    }
}
