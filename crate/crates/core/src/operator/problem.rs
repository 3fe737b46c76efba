use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{AmbientSpace, BaseMetric, DomainMesh, Mat2, ScalarField, Vec2};
use crate::solver::SolverOptions;

/// Barycentric coordinates of the three-point rule.
const QUAD_BARY: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];

#[derive(Clone, Debug)]
pub(crate) struct QuadPoint {
    pub bary: [f64; 3],
    pub point: Vec2,
    /// Quadrature weight times the volume density.
    pub weight: f64,
    pub sigma_inv: Mat2,
    pub gamma: f64,
    pub grad_gamma: Vec2,
}

/// Per-element geometric data that does not depend on `z`.
#[derive(Clone, Debug)]
pub(crate) struct ElementData {
    pub verts: [usize; 3],
    pub grads: [Vec2; 3],
    /// Chart area times the volume density at the centroid.
    pub measure: f64,
    pub sigma_inv: Mat2,
    pub gamma: f64,
    pub quad: [QuadPoint; 3],
}

/// A Dirichlet problem `Q[z] = 0` in `Ω`, `z = φ` on `Γ`.
#[derive(Clone, Debug)]
pub struct Problem {
    ambient: AmbientSpace,
    mesh: Arc<DomainMesh>,
    h: ScalarField,
    phi: ScalarField,
    options: SolverOptions,
    elements: Arc<Vec<ElementData>>,
}

fn same_metric_kind(a: &BaseMetric, b: &BaseMetric) -> bool {
    format!("{a:?}") == format!("{b:?}")
}

impl Problem {
    /// Builds a problem. Only the boundary values of `phi` are used; its
    /// interior values are kept as an optional initial extension.
    pub fn new(
        ambient: AmbientSpace,
        mesh: Arc<DomainMesh>,
        h: ScalarField,
        phi: ScalarField,
        options: SolverOptions,
    ) -> Result<Self> {
        h.check_mesh(&mesh)?;
        phi.check_mesh(&mesh)?;
        options.validate()?;
        if !same_metric_kind(ambient.metric(), mesh.metric()) {
            return Err(Error::Mesh(format!(
                "mesh metric {:?} does not match the ambient base metric {:?}",
                mesh.metric(),
                ambient.metric()
            )));
        }
        let end = ambient.interval_end();
        for v in mesh.boundary_vertices() {
            let p = phi.values()[v];
            if !(p < end) {
                return Err(Error::OutsideInterval {
                    vertex: v,
                    value: p,
                    interval_end: end,
                });
            }
        }
        for &u in mesh.vertices() {
            ambient.check_point(u)?;
        }
        let elements = (0..mesh.triangles().len())
            .into_par_iter()
            .map(|t| element_data(&ambient, &mesh, t))
            .collect();
        Ok(Self {
            ambient,
            mesh,
            h,
            phi,
            options,
            elements: Arc::new(elements),
        })
    }

    pub fn ambient(&self) -> &AmbientSpace {
        &self.ambient
    }

    pub fn mesh(&self) -> &DomainMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> Arc<DomainMesh> {
        Arc::clone(&self.mesh)
    }

    /// Prescribed mean curvature.
    pub fn h(&self) -> &ScalarField {
        &self.h
    }

    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn n(&self) -> usize {
        self.ambient.base_dim()
    }

    /// Same problem with other boundary data.
    pub fn with_phi(&self, phi: ScalarField) -> Result<Self> {
        phi.check_mesh(&self.mesh)?;
        let mut p = self.clone();
        p.phi = phi;
        Ok(p)
    }

    /// Same problem with another prescribed mean curvature.
    pub fn with_h(&self, h: ScalarField) -> Result<Self> {
        h.check_mesh(&self.mesh)?;
        let mut p = self.clone();
        p.h = h;
        Ok(p)
    }

    pub fn with_options(&self, options: SolverOptions) -> Result<Self> {
        options.validate()?;
        let mut p = self.clone();
        p.options = options;
        Ok(p)
    }

    pub(crate) fn elements(&self) -> &[ElementData] {
        &self.elements
    }

    /// Field equal to `tau·φ` on `Γ` and to `z` inside.
    pub fn impose_boundary(&self, z: &ScalarField, tau: f64) -> ScalarField {
        let mut out = z.clone();
        for v in self.mesh.boundary_vertices() {
            out.values_mut()[v] = tau * self.phi.values()[v];
        }
        out
    }

    pub fn inf_phi(&self) -> f64 {
        self.mesh
            .boundary_vertices()
            .map(|v| self.phi.values()[v])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn sup_phi(&self) -> f64 {
        self.mesh
            .boundary_vertices()
            .map(|v| self.phi.values()[v])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn element_data(ambient: &AmbientSpace, mesh: &DomainMesh, t: usize) -> ElementData {
    let verts = mesh.triangles()[t];
    let grads = mesh.hat_gradients(t);
    let area = mesh.chart_area(t);
    let c = mesh.centroid(t);
    let metric = ambient.metric();
    let p = mesh.vertices();
    let quad = QUAD_BARY.map(|bary| {
        let point = p[verts[0]] * bary[0] + p[verts[1]] * bary[1] + p[verts[2]] * bary[2];
        QuadPoint {
            bary,
            point,
            weight: area / 3.0 * metric.volume_density(point),
            sigma_inv: metric.inverse(point),
            gamma: ambient.gamma(point),
            grad_gamma: ambient.grad_gamma(point),
        }
    });
    ElementData {
        verts,
        grads,
        measure: area * metric.volume_density(c),
        sigma_inv: metric.inverse(c),
        gamma: ambient.gamma(c),
        quad,
    }
}
