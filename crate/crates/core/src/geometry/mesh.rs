//! Triangulated domains in a single chart of the base leaf.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ambient::{BaseMetric, Vec2};
use crate::geometry::distance;

static NEXT_MESH_ID: AtomicU64 = AtomicU64::new(1);

/// Shape of a mesh built by one of the preset constructors. Presets carry
/// closed forms for the distance to the boundary and the curvature of its
/// parallels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainShape {
    /// Flat disk `|u − c| < radius`.
    Disk { center: [f64; 2], radius: f64 },
    /// Flat annulus `inner < |u − c| < outer`.
    Annulus {
        center: [f64; 2],
        inner: f64,
        outer: f64,
    },
    /// Geodesic cap `θ < theta0` about the north pole of the unit sphere, in
    /// the stereographic chart `|u| = tan(θ/2)`.
    SphericalCap { theta0: f64 },
    Generic,
}

/// Value, chart gradient and σ-Laplacian of the distance to the boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceJet {
    pub d: f64,
    pub grad: Vec2,
    pub laplacian: f64,
}

impl DomainShape {
    fn center(c: [f64; 2]) -> Vec2 {
        Vec2::new(c[0], c[1])
    }

    /// Closed-form distance jet, when the shape has one.
    pub fn distance_jet(&self, u: Vec2) -> Option<DistanceJet> {
        match *self {
            DomainShape::Disk { center, radius } => {
                let x = u - Self::center(center);
                let r = x.norm().max(1e-300);
                Some(DistanceJet {
                    d: radius - r,
                    grad: -x / r,
                    laplacian: -1.0 / r,
                })
            }
            DomainShape::Annulus {
                center,
                inner,
                outer,
            } => {
                let x = u - Self::center(center);
                let r = x.norm().max(1e-300);
                if outer - r <= r - inner {
                    Some(DistanceJet {
                        d: outer - r,
                        grad: -x / r,
                        laplacian: -1.0 / r,
                    })
                } else {
                    Some(DistanceJet {
                        d: r - inner,
                        grad: x / r,
                        laplacian: 1.0 / r,
                    })
                }
            }
            DomainShape::SphericalCap { theta0 } => {
                let s = u.norm().max(1e-300);
                let theta = 2.0 * s.atan();
                Some(DistanceJet {
                    d: theta0 - theta,
                    grad: -(2.0 / (1.0 + s * s)) * u / s,
                    laplacian: -1.0 / theta.tan(),
                })
            }
            DomainShape::Generic => None,
        }
    }

    /// Closed-form distance to the boundary.
    pub fn distance(&self, u: Vec2) -> Option<f64> {
        self.distance_jet(u).map(|j| j.d)
    }

    /// Curvature of each component of the parallel `{d = ε}` with respect to
    /// `∇d`; the boundary itself is `ε = 0`.
    pub fn level_curvature(&self, eps: f64) -> Option<Vec<f64>> {
        match *self {
            DomainShape::Disk { radius, .. } => (eps < radius).then(|| vec![1.0 / (radius - eps)]),
            DomainShape::Annulus { inner, outer, .. } => {
                (2.0 * eps < outer - inner).then(|| vec![1.0 / (outer - eps), -1.0 / (inner + eps)])
            }
            DomainShape::SphericalCap { theta0 } => {
                (eps < theta0).then(|| vec![1.0 / (theta0 - eps).tan()])
            }
            DomainShape::Generic => None,
        }
    }

    /// σ-diameter of the domain.
    pub fn diameter(&self) -> Option<f64> {
        match *self {
            DomainShape::Disk { radius, .. } => Some(2.0 * radius),
            DomainShape::Annulus { outer, .. } => Some(2.0 * outer),
            DomainShape::SphericalCap { theta0 } => Some((2.0 * theta0).min(PI)),
            DomainShape::Generic => None,
        }
    }

    /// Boundary curvature at a boundary chart point.
    fn boundary_curvature(&self, u: Vec2) -> Option<f64> {
        match *self {
            DomainShape::Disk { radius, .. } => Some(1.0 / radius),
            DomainShape::Annulus {
                center,
                inner,
                outer,
            } => {
                let r = (u - Self::center(center)).norm();
                Some(if (r - outer).abs() < (r - inner).abs() {
                    1.0 / outer
                } else {
                    -1.0 / inner
                })
            }
            DomainShape::SphericalCap { theta0 } => Some(1.0 / theta0.tan()),
            DomainShape::Generic => None,
        }
    }
}

/// JSON exchange form of a mesh.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeshJson {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<Vec<usize>>,
}

/// A triangulated bounded domain `Ω` with boundary markers, inward normals
/// and the distance to the boundary.
#[derive(Clone, Debug)]
pub struct DomainMesh {
    id: u64,
    metric: BaseMetric,
    shape: DomainShape,
    vertices: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    boundary_loops: Vec<Vec<usize>>,
    boundary_component: Vec<Option<usize>>,
    boundary_normal: Vec<Vec2>,
    dist: Vec<f64>,
    interior_index: Vec<Option<usize>>,
    interior_vertices: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
    vertex_triangles: Vec<Vec<usize>>,
    h: f64,
}

fn orientation(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).perp(&(c - a))
}

impl DomainMesh {
    /// Builds a mesh from raw parts. Triangles are reoriented to be positive
    /// in the chart; the mesh must be conforming and every boundary edge
    /// must belong to exactly one listed boundary loop.
    pub fn from_parts(
        vertices: Vec<Vec2>,
        triangles: Vec<[usize; 3]>,
        boundary_loops: Vec<Vec<usize>>,
        metric: BaseMetric,
    ) -> Result<Self> {
        Self::assemble(vertices, triangles, boundary_loops, metric, DomainShape::Generic)
    }

    fn assemble(
        vertices: Vec<Vec2>,
        mut triangles: Vec<[usize; 3]>,
        boundary_loops: Vec<Vec<usize>>,
        metric: BaseMetric,
        shape: DomainShape,
    ) -> Result<Self> {
        let nv = vertices.len();
        if nv < 3 || triangles.is_empty() {
            return Err(Error::Mesh("mesh needs at least one triangle".into()));
        }
        if let Some(i) = vertices.iter().position(|v| !(v.x.is_finite() && v.y.is_finite())) {
            return Err(Error::Mesh(format!("vertex {i} has non-finite coordinates")));
        }
        if boundary_loops.is_empty() || boundary_loops.iter().any(|l| l.len() < 3) {
            return Err(Error::Mesh(
                "at least one boundary loop with three or more vertices is required".into(),
            ));
        }
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&i| i >= nv) {
                return Err(Error::Mesh(format!("triangle {t} references a missing vertex")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Mesh(format!("triangle {t} repeats a vertex")));
            }
            let o = orientation(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            let scale = (vertices[tri[1]] - vertices[tri[0]])
                .norm()
                .max((vertices[tri[2]] - vertices[tri[0]]).norm());
            if !(o.abs() > 1e-14 * scale * scale) {
                return Err(Error::Mesh(format!("triangle {t} is degenerate")));
            }
            if o < 0.0 {
                tri.swap(1, 2);
            }
        }

        // Edge incidence.
        let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                edges.entry((a.min(b), a.max(b))).or_default().push(t);
            }
        }
        if let Some((e, _)) = edges.iter().find(|(_, ts)| ts.len() > 2) {
            return Err(Error::Mesh(format!(
                "edge ({}, {}) is shared by more than two triangles",
                e.0, e.1
            )));
        }

        let mut boundary_component = vec![None; nv];
        for (l, lp) in boundary_loops.iter().enumerate() {
            for &v in lp {
                if v >= nv {
                    return Err(Error::Mesh(format!("boundary loop {l} references a missing vertex")));
                }
                if boundary_component[v].is_some() {
                    return Err(Error::Mesh(format!("boundary vertex {v} listed twice")));
                }
                boundary_component[v] = Some(l);
            }
        }
        let mut loop_edges = 0usize;
        for (l, lp) in boundary_loops.iter().enumerate() {
            for k in 0..lp.len() {
                let (a, b) = (lp[k], lp[(k + 1) % lp.len()]);
                match edges.get(&(a.min(b), a.max(b))) {
                    Some(ts) if ts.len() == 1 => loop_edges += 1,
                    _ => {
                        return Err(Error::Mesh(format!(
                            "boundary loop {l}: ({a}, {b}) is not a boundary edge"
                        )))
                    }
                }
            }
        }
        let free_edges = edges.values().filter(|ts| ts.len() == 1).count();
        if free_edges != loop_edges {
            return Err(Error::Mesh(format!(
                "{} boundary edges are not covered by the boundary loops",
                free_edges - loop_edges
            )));
        }

        let mut neighbors = vec![Vec::new(); nv];
        for &(a, b) in edges.keys() {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for n in neighbors.iter_mut() {
            n.sort_unstable();
        }
        let mut vertex_triangles = vec![Vec::new(); nv];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                vertex_triangles[v].push(t);
            }
        }
        if let Some(v) = vertex_triangles.iter().position(|ts| ts.is_empty()) {
            return Err(Error::Mesh(format!("vertex {v} belongs to no triangle")));
        }

        let mut interior_index = vec![None; nv];
        let mut interior_vertices = Vec::new();
        for v in 0..nv {
            if boundary_component[v].is_none() {
                interior_index[v] = Some(interior_vertices.len());
                interior_vertices.push(v);
            }
        }
        if interior_vertices.is_empty() {
            return Err(Error::Mesh("mesh has no interior vertex".into()));
        }

        let h = edges
            .keys()
            .map(|&(a, b)| {
                let mid = 0.5 * (vertices[a] + vertices[b]);
                metric.norm(mid, vertices[b] - vertices[a])
            })
            .fold(0.0, f64::max);

        let mut mesh = Self {
            id: NEXT_MESH_ID.fetch_add(1, Ordering::Relaxed),
            metric,
            shape,
            vertices,
            triangles,
            boundary_loops,
            boundary_component,
            boundary_normal: vec![Vec2::zeros(); nv],
            dist: vec![0.0; nv],
            interior_index,
            interior_vertices,
            neighbors,
            vertex_triangles,
            h,
        };
        mesh.boundary_normal = mesh.compute_normals();
        mesh.dist = match shape {
            DomainShape::Generic => distance::geodesic_distance(&mesh),
            _ => mesh
                .vertices
                .iter()
                .enumerate()
                .map(|(v, &u)| {
                    if mesh.is_boundary(v) {
                        0.0
                    } else {
                        shape.distance(u).unwrap().max(0.0)
                    }
                })
                .collect(),
        };
        if let Some(v) = mesh
            .interior_vertices
            .iter()
            .copied()
            .find(|&v| !(mesh.dist[v] > 0.0))
        {
            return Err(Error::Mesh(format!(
                "interior vertex {v} has non-positive distance to the boundary"
            )));
        }
        Ok(mesh)
    }

    /// Inward σ-unit normals at boundary vertices, zero elsewhere.
    fn compute_normals(&self) -> Vec<Vec2> {
        let mut out = vec![Vec2::zeros(); self.vertices.len()];
        for lp in &self.boundary_loops {
            let m = lp.len();
            for k in 0..m {
                let v = lp[k];
                let u = self.vertices[v];
                if let Some(jet) = self.shape.distance_jet(u) {
                    // ∇d is the inward unit normal; raise the index.
                    let eta = self.metric.inverse(u) * jet.grad;
                    out[v] = eta / self.metric.norm(u, eta);
                    continue;
                }
                let prev = self.vertices[lp[(k + m - 1) % m]];
                let next = self.vertices[lp[(k + 1) % m]];
                let tangent = next - prev;
                // Covector annihilating the tangent, raised by σ.
                let nu = Vec2::new(-tangent.y, tangent.x);
                let mut eta = self.metric.inverse(u) * nu;
                eta /= self.metric.norm(u, eta);
                if eta.dot(&(self.interior_direction(v))) < 0.0 {
                    eta = -eta;
                }
                out[v] = eta;
            }
        }
        out
    }

    /// A chart direction from boundary vertex `v` into the domain: the mean
    /// of the directions to the centroids of its triangles.
    fn interior_direction(&self, v: usize) -> Vec2 {
        let u = self.vertices[v];
        self.vertex_triangles[v]
            .iter()
            .map(|&t| self.centroid(t) - u)
            .fold(Vec2::zeros(), |a, b| a + b)
    }

    /// Flat disk `|u| < radius` meshed by concentric rings of spacing
    /// `radius / rings`, ring `k` carrying `6k` vertices.
    pub fn disk(radius: f64, rings: usize) -> Result<Self> {
        if !(radius > 0.0) || rings == 0 {
            return Err(Error::Parameter("disk needs radius > 0 and rings ≥ 1".into()));
        }
        let radii: Vec<f64> = (0..=rings).map(|k| radius * k as f64 / rings as f64).collect();
        let (vertices, triangles, outer) = ring_mesh(&radii, |r| r);
        Self::assemble(
            vertices,
            triangles,
            vec![outer],
            BaseMetric::Flat,
            DomainShape::Disk {
                center: [0.0, 0.0],
                radius,
            },
        )
    }

    /// Flat disk with ring count chosen for a target mesh size `h`.
    pub fn disk_with_h(radius: f64, h: f64) -> Result<Self> {
        Self::disk(radius, rings_for(radius, h)?)
    }

    /// Flat annulus `inner < |u| < outer`.
    pub fn annulus(inner: f64, outer: f64, h: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) || !(h > 0.0) {
            return Err(Error::Parameter("annulus needs 0 < inner < outer and h > 0".into()));
        }
        let rings = rings_for(outer - inner, h)?;
        let mut vertices = Vec::new();
        let mut ring_idx: Vec<Vec<usize>> = Vec::new();
        for k in 0..=rings {
            let r = inner + (outer - inner) * k as f64 / rings as f64;
            let m = ((2.0 * PI * r / h).ceil() as usize).max(6);
            let offset = if k % 2 == 0 { 0.0 } else { 0.5 };
            let mut idx = Vec::with_capacity(m);
            for j in 0..m {
                let a = 2.0 * PI * (j as f64 + offset) / m as f64;
                idx.push(vertices.len());
                vertices.push(Vec2::new(r * a.cos(), r * a.sin()));
            }
            ring_idx.push(idx);
        }
        let mut triangles = Vec::new();
        for k in 1..=rings {
            zipper(&vertices, &ring_idx[k - 1], &ring_idx[k], &mut triangles);
        }
        let inner_loop = ring_idx[0].clone();
        let outer_loop = ring_idx[rings].clone();
        Self::assemble(
            vertices,
            triangles,
            vec![outer_loop, inner_loop],
            BaseMetric::Flat,
            DomainShape::Annulus {
                center: [0.0, 0.0],
                inner,
                outer,
            },
        )
    }

    /// Geodesic cap `θ < theta0` of the unit sphere in the stereographic
    /// chart, rings uniformly spaced in `θ`.
    pub fn spherical_cap(theta0: f64, rings: usize) -> Result<Self> {
        if !(theta0 > 0.0 && theta0 < PI) || rings == 0 {
            return Err(Error::Parameter("cap needs 0 < theta0 < pi and rings ≥ 1".into()));
        }
        let thetas: Vec<f64> = (0..=rings).map(|k| theta0 * k as f64 / rings as f64).collect();
        let (vertices, triangles, outer) = ring_mesh(&thetas, |t| (0.5 * t).tan());
        Self::assemble(
            vertices,
            triangles,
            vec![outer],
            BaseMetric::RoundSphere,
            DomainShape::SphericalCap { theta0 },
        )
    }

    pub fn spherical_cap_with_h(theta0: f64, h: f64) -> Result<Self> {
        Self::spherical_cap(theta0, rings_for(theta0, h)?)
    }

    /// Same triangulation with the preset closed forms discarded.
    pub fn as_generic(&self) -> Result<Self> {
        Self::from_parts(
            self.vertices.clone(),
            self.triangles.clone(),
            self.boundary_loops.clone(),
            self.metric.clone(),
        )
    }

    pub fn from_json(json: &MeshJson, metric: BaseMetric) -> Result<Self> {
        Self::from_parts(
            json.vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect(),
            json.triangles.clone(),
            json.boundary.clone(),
            metric,
        )
    }

    pub fn to_json(&self) -> MeshJson {
        MeshJson {
            vertices: self.vertices.iter().map(|v| [v.x, v.y]).collect(),
            triangles: self.triangles.clone(),
            boundary: self.boundary_loops.clone(),
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn metric(&self) -> &BaseMetric {
        &self.metric
    }

    pub fn shape(&self) -> DomainShape {
        self.shape
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.boundary_loops
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary_component[v].is_some()
    }

    pub fn boundary_component(&self, v: usize) -> Option<usize> {
        self.boundary_component[v]
    }

    pub fn boundary_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.boundary_loops.iter().flatten().copied()
    }

    /// Inward σ-unit normal at a boundary vertex (zero at interior vertices).
    pub fn boundary_normal(&self, v: usize) -> Vec2 {
        self.boundary_normal[v]
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior_vertices
    }

    pub fn interior_index(&self, v: usize) -> Option<usize> {
        self.interior_index[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn vertex_triangles(&self, v: usize) -> &[usize] {
        &self.vertex_triangles[v]
    }

    /// Longest σ-length of an edge.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn centroid(&self, t: usize) -> Vec2 {
        let [a, b, c] = self.triangles[t];
        (self.vertices[a] + self.vertices[b] + self.vertices[c]) / 3.0
    }

    /// Chart area of triangle `t`.
    pub fn chart_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * orientation(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    /// Chart gradients of the three hat functions on triangle `t`.
    pub fn hat_gradients(&self, t: usize) -> [Vec2; 3] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        let twice = orientation(pa, pb, pc);
        let rot = |e: Vec2| Vec2::new(-e.y, e.x) / twice;
        [rot(pc - pb), rot(pa - pc), rot(pb - pa)]
    }

    /// Chart gradient of the piecewise-linear interpolant of `values` on `t`.
    pub fn element_gradient(&self, t: usize, values: &[f64]) -> Vec2 {
        let g = self.hat_gradients(t);
        let tri = self.triangles[t];
        g[0] * values[tri[0]] + g[1] * values[tri[1]] + g[2] * values[tri[2]]
    }

    /// Distance jet at a chart point inside triangle `t`: closed form for
    /// presets, otherwise the element gradient of the discrete distance and a
    /// recovered Laplacian.
    pub fn distance_jet(&self, t: usize, u: Vec2) -> DistanceJet {
        if let Some(j) = self.shape.distance_jet(u) {
            return j;
        }
        distance::discrete_jet(self, t, u)
    }

    /// Elements where the discrete `|∇d|_σ` deviates from 1 by more than
    /// `10h`, treated as lying near the cut locus.
    pub fn cut_locus_suspects(&self) -> Vec<bool> {
        (0..self.triangles.len())
            .map(|t| {
                let c = self.centroid(t);
                let g = self.element_gradient(t, &self.dist);
                (self.metric.covector_norm(c, g) - 1.0).abs() > 10.0 * self.h
            })
            .collect()
    }

    /// σ-diameter: closed form for presets, otherwise the largest
    /// edge-graph distance between boundary vertices and any vertex.
    pub fn diameter(&self) -> f64 {
        match self.shape.diameter() {
            Some(d) => d,
            None => distance::graph_diameter(self),
        }
    }

    /// Mean curvature of `Γ` at boundary vertex `v` with respect to the
    /// inward normal, and whether the estimate is reliable.
    pub fn boundary_mean_curvature(&self, v: usize) -> Result<(f64, bool)> {
        let comp = self.boundary_component[v].ok_or_else(|| {
            Error::Parameter(format!("vertex {v} is not on the boundary"))
        })?;
        if let Some(k) = self.shape.boundary_curvature(self.vertices[v]) {
            return Ok((k, true));
        }
        let lp = &self.boundary_loops[comp];
        let m = lp.len();
        let k = lp.iter().position(|&w| w == v).unwrap();
        let prev = self.vertices[lp[(k + m - 1) % m]];
        let next = self.vertices[lp[(k + 1) % m]];
        Ok(crate::geometry::boundary::polyline_curvature(
            &self.metric,
            prev,
            self.vertices[v],
            next,
            self.boundary_normal[v],
        ))
    }
}

fn rings_for(length: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && length > 0.0) {
        return Err(Error::Parameter(format!("mesh size must be positive, got {h}")));
    }
    Ok(((length / h).round() as usize).max(1))
}

/// Concentric ring mesh: `params[k]` is the ring parameter mapped to a chart
/// radius by `radius`; ring 0 is the centre.
fn ring_mesh(params: &[f64], radius: impl Fn(f64) -> f64) -> (Vec<Vec2>, Vec<[usize; 3]>, Vec<usize>) {
    let mut vertices = vec![Vec2::zeros()];
    let mut rings: Vec<Vec<usize>> = vec![vec![0]];
    for (k, &p) in params.iter().enumerate().skip(1) {
        let r = radius(p);
        let m = 6 * k;
        let mut idx = Vec::with_capacity(m);
        for j in 0..m {
            let a = 2.0 * PI * j as f64 / m as f64;
            idx.push(vertices.len());
            vertices.push(Vec2::new(r * a.cos(), r * a.sin()));
        }
        rings.push(idx);
    }
    let mut triangles = Vec::new();
    for k in 1..rings.len() {
        zipper(&vertices, &rings[k - 1], &rings[k], &mut triangles);
    }
    let outer = rings.pop().unwrap();
    (vertices, triangles, outer)
}

/// Triangulates the band between two closed rings, each listed in
/// increasing angle.
fn zipper(vertices: &[Vec2], inner: &[usize], outer: &[usize], out: &mut Vec<[usize; 3]>) {
    if inner.len() == 1 {
        let c = inner[0];
        for j in 0..outer.len() {
            push_positive(vertices, [c, outer[j], outer[(j + 1) % outer.len()]], out);
        }
        return;
    }
    let polar = |v: usize| vertices[v].y.atan2(vertices[v].x);
    let base = polar(inner[0]);
    let rel = |v: usize, lo: f64| (polar(v) - base - lo).rem_euclid(2.0 * PI) + lo;
    let a: Vec<f64> = inner.iter().map(|&v| rel(v, -1e-12)).collect();
    let half = PI / outer.len() as f64;
    let mut ring: Vec<(f64, usize)> = outer.iter().map(|&v| (rel(v, -half), v)).collect();
    ring.sort_by(|x, y| x.0.total_cmp(&y.0));
    let b: Vec<f64> = ring.iter().map(|x| x.0).collect();
    let o: Vec<usize> = ring.iter().map(|x| x.1).collect();
    let (m, big) = (a.len(), b.len());
    let next_a = |i: usize| if i + 1 == m { 2.0 * PI } else { a[i + 1] };
    let next_b = |j: usize| if j + 1 == big { b[0] + 2.0 * PI } else { b[j + 1] };
    let (mut i, mut j) = (0usize, 0usize);
    while i < m || j < big {
        if j < big && (i == m || next_b(j) <= next_a(i)) {
            push_positive(vertices, [inner[i % m], o[j], o[(j + 1) % big]], out);
            j += 1;
        } else {
            push_positive(vertices, [inner[i], o[j % big], inner[(i + 1) % m]], out);
            i += 1;
        }
    }
}

fn push_positive(vertices: &[Vec2], mut tri: [usize; 3], out: &mut Vec<[usize; 3]>) {
    if orientation(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) < 0.0 {
        tri.swap(1, 2);
    }
    out.push(tri);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_counts_and_conformity() {
        let m = DomainMesh::disk(0.4, 4).unwrap();
        assert_eq!(m.vertex_count(), 1 + 3 * 4 * 5);
        assert_eq!(m.triangles().len(), 6 * 16);
        assert_eq!(m.boundary_loops()[0].len(), 24);
        let area: f64 = (0..m.triangles().len()).map(|t| m.chart_area(t)).sum();
        assert!(area > 0.0 && area < PI * 0.16);
    }

    #[test]
    fn annulus_builds() {
        let m = DomainMesh::annulus(0.2, 0.5, 0.05).unwrap();
        assert_eq!(m.boundary_loops().len(), 2);
        let area: f64 = (0..m.triangles().len()).map(|t| m.chart_area(t)).sum();
        assert!((area - PI * (0.25 - 0.04)).abs() < 0.02);
    }

    #[test]
    fn cap_distance_and_normals() {
        let m = DomainMesh::spherical_cap(1.0, 6).unwrap();
        assert!((m.distances()[0] - 1.0).abs() < 1e-15);
        for v in m.boundary_vertices() {
            let u = m.vertices()[v];
            let eta = m.boundary_normal(v);
            assert!((m.metric().norm(u, eta) - 1.0).abs() < 1e-12);
            assert!(eta.dot(&u) < 0.0);
        }
    }

    #[test]
    fn rejects_uncovered_boundary() {
        let v = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0)];
        let t = vec![[0, 1, 2], [1, 3, 2]];
        assert!(DomainMesh::from_parts(v.clone(), t.clone(), vec![vec![0, 1, 2]], BaseMetric::Flat).is_err());
        assert!(DomainMesh::from_parts(v, t, vec![vec![0, 1, 3, 2]], BaseMetric::Flat).is_err());
    }
}
