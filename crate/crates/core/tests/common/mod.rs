#![allow(dead_code)]

use std::sync::Arc;

use ckg_core::geometry::{preset_ambient, AmbientSpace, DomainMesh, Preset, PresetParams, ScalarField, Vec2};
use ckg_core::operator::Problem;
use ckg_core::solver::SolverOptions;

pub const R0: f64 = 0.4;
pub const THETA0: f64 = 1.0;

pub fn ambient(p: Preset) -> AmbientSpace {
    preset_ambient(p, PresetParams::default()).unwrap()
}

/// Flat disk of radius 0.4 with `H ≡ 1` and `φ ≡ −√0.84`: the graph is the
/// lower half of the unit sphere.
pub fn cmc_cap(rings: usize) -> Problem {
    cmc_cap_on(Arc::new(DomainMesh::disk(R0, rings).unwrap()))
}

pub fn cmc_cap_on(mesh: Arc<DomainMesh>) -> Problem {
    let h = ScalarField::constant(&mesh, 1.0);
    let phi = ScalarField::constant(&mesh, -(1.0 - R0 * R0).sqrt());
    Problem::new(ambient(Preset::KillingFlat), mesh, h, phi, SolverOptions::default()).unwrap()
}

pub fn cmc_exact(u: Vec2) -> f64 {
    -(1.0 - u.norm_squared()).sqrt()
}

/// Polar angle on the unit sphere of a stereographic chart point.
pub fn theta(u: Vec2) -> f64 {
    2.0 * u.norm().atan()
}

/// `z* = −ln cos θ + c₀`, shifted to vanish on the boundary.
pub fn radial_exact(u: Vec2) -> f64 {
    -theta(u).cos().ln() + THETA0.cos().ln()
}

/// Minimal graph over the cap `θ < 1` in Euclidean space written in polar
/// form.
pub fn radial_minimal(rings: usize) -> Problem {
    let mesh = Arc::new(DomainMesh::spherical_cap(THETA0, rings).unwrap());
    let h = ScalarField::constant(&mesh, 0.0);
    let phi = ScalarField::from_fn(&mesh, radial_exact).unwrap();
    Problem::new(ambient(Preset::EuclideanRadial), mesh, h, phi, SolverOptions::default()).unwrap()
}

pub fn max_error(mesh: &DomainMesh, z: &ScalarField, exact: impl Fn(Vec2) -> f64) -> f64 {
    mesh.vertices()
        .iter()
        .zip(z.values())
        .map(|(&u, &v)| (v - exact(u)).abs())
        .fold(0.0, f64::max)
}

/// Flat square `[−a, a]²` split into `n²` cells, each cut along the same
/// diagonal.
pub fn square_mesh(n: usize, a: f64) -> DomainMesh {
    let idx = |i: usize, j: usize| i * (n + 1) + j;
    let step = 2.0 * a / n as f64;
    let mut vertices = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            vertices.push(Vec2::new(-a + step * j as f64, -a + step * i as f64));
        }
    }
    let mut triangles = Vec::new();
    for i in 0..n {
        for j in 0..n {
            triangles.push([idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i + 1, j)]);
        }
    }
    let mut boundary = Vec::new();
    boundary.extend((0..n).map(|j| idx(0, j)));
    boundary.extend((0..n).map(|i| idx(i, n)));
    boundary.extend((1..=n).rev().map(|j| idx(n, j)));
    boundary.extend((1..=n).rev().map(|i| idx(i, 0)));
    DomainMesh::from_parts(vertices, triangles, vec![boundary], ckg_core::geometry::BaseMetric::Flat).unwrap()
}
