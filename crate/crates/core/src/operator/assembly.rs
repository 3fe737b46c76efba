//! Weak form of `Q_τ` on P1 triangles and its exact linearisation.
//!
//! For a test hat `φ_a`,
//!
//! ```text
//! R_a = −∫ ⟨∇z, ∇φ_a⟩/U − ∫ [ (⟨∇γ,∇z⟩/(2γ) + τnγρ(z))/U + τnλ(z)H ] φ_a,
//! U² = γ + |∇z|²_σ,
//! ```
//!
//! integrated with the σ volume form. The flux term uses the centroid rule,
//! the rest the three-point rule, with `ρ` and `λ` taken at the element mean
//! of `z`. Unknowns are interior vertices; boundary values are imposed.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ScalarField, Vec2};
use crate::operator::problem::{ElementData, Problem};

/// Residual on interior vertices together with the Jacobian in compressed
/// row form. Row and column `i` correspond to interior vertex
/// `interior_vertices[i]`.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub residual: Vec<f64>,
    interior_vertices: Vec<usize>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSystem {
    pub fn dim(&self) -> usize {
        self.interior_vertices.len()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior_vertices
    }

    /// `(row, col, value)` in interior numbering.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim()).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match cols.binary_search(&j) {
            Ok(k) => self.values[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|k| self.values[k] * x[self.col_idx[k]])
                    .sum()
            })
            .collect()
    }

    /// Coordinate-list dump, one `i j value` line per entry, indices being
    /// mesh vertex numbers.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, j, v) in self.triplets() {
            writeln!(out, "{} {} {v:e}", self.interior_vertices[i], self.interior_vertices[j]).unwrap();
        }
        out
    }

    /// A system with the given pattern and entries; used for tests and for
    /// auxiliary linear problems.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)], residual: Vec<f64>) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for &(i, j, v) in triplets {
            rows[i].push((j, v));
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for row in rows.iter_mut() {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for &(j, v) in row.iter() {
                if last == Some(j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            residual,
            interior_vertices: (0..dim).collect(),
            row_ptr,
            col_idx,
            values,
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Local {
    r: [f64; 3],
    j: [[f64; 3]; 3],
}

fn check_state(problem: &Problem, z: &ScalarField, tau: f64) -> Result<()> {
    z.check_mesh(problem.mesh())?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Domain(format!("tau = {tau} is outside [0, 1]")));
    }
    let end = problem.ambient().interval_end();
    if let Some(v) = z.values().iter().position(|&x| !(x < end)) {
        return Err(Error::OutsideInterval {
            vertex: v,
            value: z.values()[v],
            interval_end: end,
        });
    }
    Ok(())
}

fn element_local(problem: &Problem, e: &ElementData, z: &[f64], tau: f64, jac: bool) -> Local {
    let amb = problem.ambient();
    let hv = problem.h().values();
    let n = problem.n() as f64;
    let zl = e.verts.map(|v| z[v]);
    let hl = e.verts.map(|v| hv[v]);
    let g: Vec2 = e.grads[0] * zl[0] + e.grads[1] * zl[1] + e.grads[2] * zl[2];
    let mut out = Local::default();

    // Flux term, centroid rule.
    let sg = e.sigma_inv * g;
    let u = (e.gamma + g.dot(&sg)).sqrt();
    let sga = e.grads.map(|ga| sg.dot(&ga));
    for (r, s) in out.r.iter_mut().zip(&sga) {
        *r -= e.measure * s / u;
    }
    if jac {
        let u3 = u * u * u;
        for a in 0..3 {
            for b in 0..3 {
                let lap = e.grads[a].dot(&(e.sigma_inv * e.grads[b]));
                out.j[a][b] -= e.measure * (lap / u - sga[a] * sga[b] / u3);
            }
        }
    }

    // Lower-order terms, three-point rule.
    let zm = (zl[0] + zl[1] + zl[2]) / 3.0;
    let lam = amb.lambda(zm);
    let rho = amb.rho_unchecked(zm);
    let (lam_t, rho_t) = if jac {
        (amb.lambda_t(zm), amb.rho_t_unchecked(zm))
    } else {
        (0.0, 0.0)
    };
    for q in &e.quad {
        let sgq = q.sigma_inv * g;
        let u = (q.gamma + g.dot(&sgq)).sqrt();
        let gg = q.grad_gamma.dot(&sgq);
        let hq = q.bary[0] * hl[0] + q.bary[1] * hl[1] + q.bary[2] * hl[2];
        let a_term = gg / (2.0 * q.gamma) + tau * n * q.gamma * rho;
        let l = a_term / u + tau * n * lam * hq;
        for a in 0..3 {
            out.r[a] -= q.weight * q.bary[a] * l;
        }
        if jac {
            let dl_dg = q.sigma_inv * q.grad_gamma / (2.0 * q.gamma * u) - sgq * (a_term / (u * u * u));
            let dl_dzm = tau * n * q.gamma * rho_t / u + tau * n * lam_t * hq;
            for b in 0..3 {
                let dlb = dl_dg.dot(&e.grads[b]) + dl_dzm / 3.0;
                for a in 0..3 {
                    out.j[a][b] -= q.weight * q.bary[a] * dlb;
                }
            }
        }
    }
    out
}

fn locals(problem: &Problem, z: &ScalarField, tau: f64, jac: bool) -> Vec<Local> {
    problem
        .elements()
        .par_iter()
        .map(|e| element_local(problem, e, z.values(), tau, jac))
        .collect()
}

/// Weak residual of `Q_τ` at every vertex, boundary rows included.
pub fn residual_all(problem: &Problem, z: &ScalarField, tau: f64) -> Result<Vec<f64>> {
    check_state(problem, z, tau)?;
    let mut r = vec![0.0; problem.mesh().vertex_count()];
    for (e, l) in problem.elements().iter().zip(locals(problem, z, tau, false)) {
        for a in 0..3 {
            r[e.verts[a]] += l.r[a];
        }
    }
    Ok(r)
}

/// Weak residual of `Q_τ` on interior vertices (interior numbering).
pub fn residual_qtau(problem: &Problem, z: &ScalarField, tau: f64) -> Result<Vec<f64>> {
    let all = residual_all(problem, z, tau)?;
    Ok(problem.mesh().interior_vertices().iter().map(|&v| all[v]).collect())
}

/// Weak residual of `Q = Q_1`.
pub fn residual_q(problem: &Problem, z: &ScalarField) -> Result<Vec<f64>> {
    residual_qtau(problem, z, 1.0)
}

/// Residual and exact Jacobian of `Q_τ` with respect to interior values.
pub fn jacobian_qtau(problem: &Problem, z: &ScalarField, tau: f64) -> Result<SparseSystem> {
    check_state(problem, z, tau)?;
    let mesh = problem.mesh();
    let interior = mesh.interior_vertices().to_vec();
    let mut row_ptr = vec![0];
    let mut col_idx = Vec::new();
    for &v in &interior {
        let mut cols: Vec<usize> = std::iter::once(v)
            .chain(mesh.neighbors(v).iter().copied())
            .filter_map(|w| mesh.interior_index(w))
            .collect();
        cols.sort_unstable();
        col_idx.extend(cols);
        row_ptr.push(col_idx.len());
    }
    let mut values = vec![0.0; col_idx.len()];
    let mut residual = vec![0.0; interior.len()];
    for (e, l) in problem.elements().iter().zip(locals(problem, z, tau, true)) {
        for a in 0..3 {
            let Some(i) = mesh.interior_index(e.verts[a]) else {
                continue;
            };
            residual[i] += l.r[a];
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            for b in 0..3 {
                if let Some(j) = mesh.interior_index(e.verts[b]) {
                    let k = cols.binary_search(&j).expect("pattern covers element couplings");
                    values[row_ptr[i] + k] += l.j[a][b];
                }
            }
        }
    }
    Ok(SparseSystem {
        residual,
        interior_vertices: interior,
        row_ptr,
        col_idx,
        values,
    })
}

/// Lumped mass `∫ φ_a dV` of every vertex (three-point rule).
pub fn lumped_mass(problem: &Problem) -> Vec<f64> {
    let mut m = vec![0.0; problem.mesh().vertex_count()];
    for e in problem.elements() {
        for q in &e.quad {
            for a in 0..3 {
                m[e.verts[a]] += q.weight * q.bary[a];
            }
        }
    }
    m
}

/// Interior residual divided by the lumped mass: a pointwise approximation
/// of the strong form `Q_τ[z]`.
pub fn scaled_residual(problem: &Problem, z: &ScalarField, tau: f64) -> Result<Vec<f64>> {
    let all = residual_all(problem, z, tau)?;
    let m = lumped_mass(problem);
    Ok(problem
        .mesh()
        .interior_vertices()
        .iter()
        .map(|&v| all[v] / m[v])
        .collect())
}

/// σ-Laplacian stiffness `∫ ⟨∇φ_a, ∇φ_b⟩ dV` as vertex-indexed triplets.
pub fn stiffness_triplets(problem: &Problem) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::with_capacity(9 * problem.elements().len());
    for e in problem.elements() {
        for a in 0..3 {
            for b in 0..3 {
                let v = e.measure * e.grads[a].dot(&(e.sigma_inv * e.grads[b]));
                out.push((e.verts[a], e.verts[b], v));
            }
        }
    }
    out
}

/// Both sides of the divergence theorem for the discrete flux `∇z/U`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FluxBalance {
    /// Assembled flux residuals summed over all vertices, plus the natural
    /// boundary term; this is the weak divergence tested against 1.
    pub weak_sum: f64,
    /// `∮_Γ ⟨∇z/U, ν⟩` with ν the outward conormal.
    pub boundary_flux: f64,
}

pub fn flux_balance(problem: &Problem, z: &ScalarField) -> Result<FluxBalance> {
    check_state(problem, z, 0.0)?;
    let mesh = problem.mesh();
    let zv = z.values();
    // Flux residual alone: the lower-order terms vanish at τ = 0 when γ is
    // constant, so assemble the flux term directly.
    let mut flux_rows = vec![0.0; mesh.vertex_count()];
    let mut elem_flux = Vec::with_capacity(problem.elements().len());
    for e in problem.elements() {
        let g: Vec2 = e.grads[0] * zv[e.verts[0]] + e.grads[1] * zv[e.verts[1]] + e.grads[2] * zv[e.verts[2]];
        let sg = e.sigma_inv * g;
        let u = (e.gamma + g.dot(&sg)).sqrt();
        for a in 0..3 {
            flux_rows[e.verts[a]] -= e.measure * sg.dot(&e.grads[a]) / u;
        }
        // Flux density √σ F in the chart, constant on the element.
        elem_flux.push(sg / u * (e.measure / mesh.chart_area(elem_flux.len())));
    }
    let mut boundary_term = vec![0.0; mesh.vertex_count()];
    let mut boundary_flux = 0.0;
    for lp in mesh.boundary_loops() {
        for k in 0..lp.len() {
            let (a, b) = (lp[k], lp[(k + 1) % lp.len()]);
            let t = *mesh
                .vertex_triangles(a)
                .iter()
                .find(|t| mesh.triangles()[**t].contains(&b))
                .unwrap();
            let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
            let edge = pb - pa;
            let mut nrm = Vec2::new(edge.y, -edge.x);
            if nrm.dot(&(mesh.centroid(t) - pa)) > 0.0 {
                nrm = -nrm;
            }
            // |nrm| equals the chart edge length.
            let f = elem_flux[t].dot(&nrm);
            boundary_flux += f;
            boundary_term[a] += 0.5 * f;
            boundary_term[b] += 0.5 * f;
        }
    }
    let weak_sum = flux_rows.iter().zip(&boundary_term).map(|(r, b)| r + b).sum();
    Ok(FluxBalance {
        weak_sum,
        boundary_flux,
    })
}
