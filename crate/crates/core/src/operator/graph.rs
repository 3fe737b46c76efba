//! Extrinsic geometry of a graph `Σ(z)`: normal, induced metric, second
//! fundamental form and mean curvature.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::recovery::{recover_all, recover_at, RecoveredJet};
use crate::geometry::{AmbientSpace, Mat2, ScalarField, Vec2};
use crate::operator::problem::Problem;

/// First-order quantities of a graph at one point.
#[derive(Clone, Copy, Debug)]
pub struct GraphPoint {
    pub t: f64,
    pub u: Vec2,
    /// Chart gradient `z_i`.
    pub dz: Vec2,
    /// `|∇z|²_σ`.
    pub grad_sq: f64,
    /// `W` with `λ²W² = γ + |∇z|²`.
    pub w: f64,
    /// `∇z/√(γ + |∇z|²)` as a chart vector.
    pub flux: Vec2,
}

pub fn graph_point(ambient: &AmbientSpace, t: f64, u: Vec2, dz: Vec2) -> GraphPoint {
    let inv = ambient.metric().inverse(u);
    let up = inv * dz;
    let grad_sq = dz.dot(&up);
    let root = (ambient.gamma(u) + grad_sq).sqrt();
    GraphPoint {
        t,
        u,
        dz,
        grad_sq,
        w: root / ambient.lambda(t),
        flux: up / root,
    }
}

/// Per-element evaluation of a piecewise-linear graph at the centroids.
#[derive(Clone, Debug, Serialize)]
pub struct GraphEvaluation {
    pub grad_sq: Vec<f64>,
    pub w: Vec<f64>,
    pub flux: Vec<[f64; 2]>,
    /// Covariant Hessians recovered at the vertices.
    #[serde(skip)]
    pub hessian: Vec<RecoveredJet>,
}

pub fn evaluate_graph(problem: &Problem, z: &ScalarField) -> Result<GraphEvaluation> {
    z.check_mesh(problem.mesh())?;
    let mesh = problem.mesh();
    let mut grad_sq = Vec::new();
    let mut w = Vec::new();
    let mut flux = Vec::new();
    for t in 0..mesh.triangles().len() {
        let c = mesh.centroid(t);
        let zm = mesh.triangles()[t].iter().map(|&v| z.values()[v]).sum::<f64>() / 3.0;
        problem.ambient().check_t(zm)?;
        let p = graph_point(problem.ambient(), zm, c, mesh.element_gradient(t, z.values()));
        grad_sq.push(p.grad_sq);
        w.push(p.w);
        flux.push([p.flux.x, p.flux.y]);
    }
    Ok(GraphEvaluation {
        grad_sq,
        w,
        flux,
        hessian: recover_all(mesh, z.values()),
    })
}

/// Sup over elements of `|∇z|_σ` at the centroids.
pub fn grad_sup(problem: &Problem, z: &ScalarField) -> f64 {
    let mesh = problem.mesh();
    (0..mesh.triangles().len())
        .map(|t| {
            let c = mesh.centroid(t);
            mesh.metric().covector_norm(c, mesh.element_gradient(t, z.values()))
        })
        .fold(0.0, f64::max)
}

/// Ambient metric at `(t, u)` in the frame `(∂_t, ∂_1, ∂_2)`.
pub fn ambient_metric(ambient: &AmbientSpace, t: f64, u: Vec2) -> Matrix3<f64> {
    let l2 = ambient.lambda(t).powi(2);
    let s = ambient.metric().tensor(u);
    let mut g = Matrix3::zeros();
    g[(0, 0)] = l2 / ambient.gamma(u);
    for i in 0..2 {
        for j in 0..2 {
            g[(i + 1, j + 1)] = l2 * s[(i, j)];
        }
    }
    g
}

/// Unit normal `N = (γ∂_t − z^i∂_i)/(λ²W)` of the graph through `(t, u)`
/// with chart slope `dz`, in the frame `(∂_t, ∂_1, ∂_2)`.
pub fn normal_at(ambient: &AmbientSpace, t: f64, u: Vec2, dz: Vec2) -> Vector3<f64> {
    let p = graph_point(ambient, t, u, dz);
    let up = ambient.metric().inverse(u) * dz;
    let scale = ambient.lambda(t).powi(2) * p.w;
    Vector3::new(ambient.gamma(u), -up.x, -up.y) / scale
}

/// Tangent vectors `X_i = ∂_i + z_i ∂_t`.
pub fn tangents_at(dz: Vec2) -> [Vector3<f64>; 2] {
    [Vector3::new(dz.x, 1.0, 0.0), Vector3::new(dz.y, 0.0, 1.0)]
}

fn locate(problem: &Problem, u: Vec2) -> Result<usize> {
    let mesh = problem.mesh();
    let v = mesh.vertices();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (a, b, c) = (v[tri[0]], v[tri[1]], v[tri[2]]);
        let e = Mat2::from_columns(&[b - a, c - a]);
        if let Some(inv) = e.try_inverse() {
            let l = inv * (u - a);
            let tol = -1e-12;
            if l.x >= tol && l.y >= tol && 1.0 - l.x - l.y >= tol {
                return Ok(t);
            }
        }
    }
    Err(Error::Domain(format!("point ({}, {}) is outside the mesh", u.x, u.y)))
}

fn interpolate(problem: &Problem, t: usize, values: &[f64], u: Vec2) -> f64 {
    let mesh = problem.mesh();
    let tri = mesh.triangles()[t];
    let a = mesh.vertices()[tri[0]];
    values[tri[0]] + mesh.element_gradient(t, values).dot(&(u - a))
}

/// Normal of the discrete graph at chart point `u`.
pub fn graph_normal(problem: &Problem, z: &ScalarField, u: Vec2) -> Result<Vector3<f64>> {
    z.check_mesh(problem.mesh())?;
    let t = locate(problem, u)?;
    let zt = interpolate(problem, t, z.values(), u);
    problem.ambient().check_t(zt)?;
    let dz = problem.mesh().element_gradient(t, z.values());
    Ok(normal_at(problem.ambient(), zt, u, dz))
}

/// Induced metric `g_ij = λ²(σ_ij + z_i z_j/γ)` and its inverse
/// `(σ^ij − z^i z^j/(γ + |∇z|²))/λ²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InducedMetric {
    pub metric: Mat2,
    pub inverse: Mat2,
}

pub fn induced_metric_at(ambient: &AmbientSpace, t: f64, u: Vec2, dz: Vec2) -> InducedMetric {
    let l2 = ambient.lambda(t).powi(2);
    let gamma = ambient.gamma(u);
    let s = ambient.metric().tensor(u);
    let inv = ambient.metric().inverse(u);
    let up = inv * dz;
    let grad_sq = dz.dot(&up);
    InducedMetric {
        metric: (s + dz * dz.transpose() / gamma) * l2,
        inverse: (inv - up * up.transpose() / (gamma + grad_sq)) / l2,
    }
}

/// Induced metric on element `t` at its centroid.
pub fn induced_metric(problem: &Problem, z: &ScalarField, t: usize) -> Result<InducedMetric> {
    z.check_mesh(problem.mesh())?;
    let mesh = problem.mesh();
    let c = mesh.centroid(t);
    let zm = mesh.triangles()[t].iter().map(|&v| z.values()[v]).sum::<f64>() / 3.0;
    problem.ambient().check_t(zm)?;
    Ok(induced_metric_at(problem.ambient(), zm, c, mesh.element_gradient(t, z.values())))
}

/// Second fundamental form `a_ij` and shape operator `a^i_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondFundamentalForm {
    pub a: Mat2,
    pub shape: Mat2,
    /// Mean curvature `tr(a^i_k)/n`.
    pub mean: f64,
    pub flagged: bool,
}

/// Second fundamental form from a 2-jet: `dz` are chart partials and
/// `hess` the covariant Hessian `z_{i;j}`.
pub fn second_fundamental_form_at(ambient: &AmbientSpace, t: f64, u: Vec2, dz: Vec2, hess: Mat2) -> SecondFundamentalForm {
    let gamma = ambient.gamma(u);
    let dg = ambient.grad_gamma(u);
    let rho = ambient.rho_unchecked(t);
    let s = ambient.metric().tensor(u);
    let up = ambient.metric().inverse(u) * dz;
    let p = graph_point(ambient, t, u, dz);
    let gz = dg.dot(&up);
    let mut wa = hess - dz * dz.transpose() * rho - s * (rho * gamma);
    wa -= (dg * dz.transpose() + dz * dg.transpose()) / (2.0 * gamma);
    wa -= dz * dz.transpose() * (gz / (2.0 * gamma * gamma));
    let a = wa / p.w;
    let shape = induced_metric_at(ambient, t, u, dz).inverse * a;
    SecondFundamentalForm {
        a,
        shape,
        mean: shape.trace() / ambient.base_dim() as f64,
        flagged: false,
    }
}

/// Second fundamental form at vertex `v` from the recovered Hessian.
pub fn second_fundamental_form(problem: &Problem, z: &ScalarField, v: usize) -> Result<SecondFundamentalForm> {
    z.check_mesh(problem.mesh())?;
    let jet = recover_at(problem.mesh(), z.values(), v);
    sff_from_jet(problem, z.values()[v], v, &jet)
}

fn sff_from_jet(problem: &Problem, t: f64, v: usize, jet: &RecoveredJet) -> Result<SecondFundamentalForm> {
    problem.ambient().check_t(t)?;
    let u = problem.mesh().vertices()[v];
    let mut s = second_fundamental_form_at(problem.ambient(), t, u, jet.gradient, jet.hessian);
    s.flagged = jet.flagged;
    Ok(s)
}

/// Mean curvature of the graph recovered at every vertex, with the flags of
/// the recovery.
pub fn mean_curvature_of_graph(problem: &Problem, z: &ScalarField) -> Result<(ScalarField, Vec<bool>)> {
    z.check_mesh(problem.mesh())?;
    let jets = recover_all(problem.mesh(), z.values());
    let mut h = Vec::with_capacity(jets.len());
    let mut flags = Vec::with_capacity(jets.len());
    for (v, jet) in jets.iter().enumerate() {
        let s = sff_from_jet(problem, z.values()[v], v, jet)?;
        h.push(s.mean);
        flags.push(s.flagged);
    }
    Ok((ScalarField::new(problem.mesh(), h)?, flags))
}

/// Strong form of `Q` from a 2-jet:
/// `Δz/U − z^iz^jz_{i;j}/U³ − ⟨∇γ,∇z⟩/(2U³) − (⟨∇γ,∇z⟩/(2γ) + nγρ)/U − nλH`.
pub fn strong_q(ambient: &AmbientSpace, t: f64, u: Vec2, dz: Vec2, hess: Mat2, h: f64) -> f64 {
    let n = ambient.base_dim() as f64;
    let gamma = ambient.gamma(u);
    let inv = ambient.metric().inverse(u);
    let up = inv * dz;
    let u2 = gamma + dz.dot(&up);
    let uu = u2.sqrt();
    let gz = ambient.grad_gamma(u).dot(&up);
    let lap = inv.component_mul(&hess).sum();
    let zzh = up.dot(&(hess * up));
    lap / uu - zzh / (uu * u2) - gz / (2.0 * uu * u2) - (gz / (2.0 * gamma) + n * gamma * ambient.rho_unchecked(t)) / uu
        - n * ambient.lambda(t) * h
}
