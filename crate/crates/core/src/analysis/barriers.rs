//! Explicit sub- and supersolutions built from the distance to the boundary,
//! verified pointwise at quadrature points.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::recovery::recover_at;
use crate::geometry::{AmbientSpace, DistanceJet, Mat2, ScalarField, Vec2};
use crate::operator::graph::strong_q;
use crate::operator::Problem;

/// Largest `D·B` tried by the height-barrier search; `e^{DB}` must stay
/// finite.
pub const MAX_HEIGHT_EXPONENT: f64 = 700.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierKind {
    /// `inf_Γ φ + f(d)` with `f = (e^{DB}/D)(e^{−Dd} − 1)`.
    Height,
    /// `w + φ` on the strip `d ≤ ε`, `w = −μ̃ ln(1 + μd)`.
    LowerBoundary,
    /// `−w + φ` on the strip `d ≤ ε`.
    UpperBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BarrierParameters {
    Height { d: f64, b: f64 },
    Boundary { mu: f64, mu_tilde: f64, c: f64, eps: f64 },
}

/// Pointwise comparison of a barrier with boundary data or a solution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderingCheck {
    pub holds: bool,
    pub tol: f64,
    /// Smallest slack in the required direction; negative on violation.
    pub worst_margin: f64,
    pub worst_point: Option<[f64; 2]>,
    pub checked: usize,
}

impl OrderingCheck {
    fn new(tol: f64) -> Self {
        Self {
            holds: true,
            tol,
            worst_margin: f64::INFINITY,
            worst_point: None,
            checked: 0,
        }
    }

    fn push(&mut self, margin: f64, at: Vec2) {
        self.checked += 1;
        if margin < self.worst_margin {
            self.worst_margin = margin;
            self.worst_point = Some([at.x, at.y]);
        }
        if !(margin >= -self.tol) {
            self.holds = false;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierCertificate {
    pub kind: BarrierKind,
    pub parameters: BarrierParameters,
    /// Barrier values at the vertices.
    #[serde(skip)]
    pub values: Vec<f64>,
    /// Vertices where the barrier is defined (all of them for the height
    /// barrier, the strip for boundary barriers).
    #[serde(skip)]
    pub support: Vec<bool>,
    /// Smallest `Q[barrier]` (lower barriers) or `−Q[barrier]` (upper
    /// barriers) over the checked quadrature points.
    pub min_margin: f64,
    pub min_margin_point: Option<[f64; 2]>,
    pub checked_points: usize,
    pub skipped_elements: usize,
    /// Ordering against the data on `Γ` and, for boundary barriers with a
    /// solution supplied, on the inner edge of the strip.
    pub boundary_ordering: OrderingCheck,
    /// Ordering against a solution at every supported vertex.
    pub solution_ordering: Option<OrderingCheck>,
    /// Slope `|f′(0)|` bounding the normal derivative of the solution.
    pub slope_bound: Option<f64>,
    pub valid: bool,
}

impl BarrierCertificate {
    fn finish(mut self) -> Self {
        self.valid = self.min_margin > 0.0
            && self.checked_points > 0
            && self.boundary_ordering.holds
            && self.solution_ordering.as_ref().is_none_or(|o| o.holds);
        self
    }

    fn sign(&self) -> f64 {
        match self.kind {
            BarrierKind::Height | BarrierKind::LowerBoundary => 1.0,
            BarrierKind::UpperBoundary => -1.0,
        }
    }

    /// Checks `z ≥ barrier − tol` (lower barriers) or `z ≤ barrier + tol`
    /// (upper barriers) at every supported vertex.
    pub fn check_solution(&self, problem: &Problem, z: &ScalarField, tol: f64) -> Result<OrderingCheck> {
        z.check_mesh(problem.mesh())?;
        let mut check = OrderingCheck::new(tol);
        let s = self.sign();
        for (v, &u) in problem.mesh().vertices().iter().enumerate() {
            if self.support[v] {
                check.push(s * (z.values()[v] - self.values[v]), u);
            }
        }
        Ok(check)
    }

    /// Records the solution ordering and revalidates.
    pub fn with_solution(mut self, problem: &Problem, z: &ScalarField, tol: f64) -> Result<Self> {
        self.solution_ordering = Some(self.check_solution(problem, z, tol)?);
        Ok(self.finish())
    }
}

/// Strong form of `Q` for `z = c + f(d)` at a point, from the distance jet
/// and `f′`, `f″`. Uses `|∇d| ≡ 1` on the smooth part of `d`, so that
/// `d^i d_{i;j} = 0`. Written in terms of `f′/U` so that large slopes do not
/// overflow.
#[allow(clippy::too_many_arguments)]
pub fn radial_q(
    ambient: &AmbientSpace,
    t: f64,
    u: Vec2,
    jet: &DistanceJet,
    f1: f64,
    f2: f64,
    h: f64,
) -> f64 {
    let n = ambient.base_dim() as f64;
    let gamma = ambient.gamma(u);
    let inv = ambient.metric().inverse(u);
    let up = inv * jet.grad;
    let g2 = jet.grad.dot(&up);
    let uu = gamma.sqrt().hypot(f1 * g2.sqrt());
    let s = f1 / uu;
    let gd = ambient.grad_gamma(u).dot(&up);
    let second = (f2 / uu) * gamma * g2 / uu / uu;
    second + s * jet.laplacian
        - s * gd / (2.0 * uu * uu)
        - s * gd / (2.0 * gamma)
        - n * gamma * ambient.rho_unchecked(t) / uu
        - n * ambient.lambda(t) * h
}

fn interpolate(values: &[f64], verts: [usize; 3], bary: [f64; 3]) -> f64 {
    (0..3).map(|k| bary[k] * values[verts[k]]).sum()
}

/// Smallest margin over quadrature points; elements are reduced in index
/// order so the result is deterministic.
fn min_over_points(
    problem: &Problem,
    include: impl Fn(usize, Vec2, &DistanceJet) -> bool + Sync,
    margin: impl Fn(usize, [f64; 3], Vec2, &DistanceJet) -> f64 + Sync,
) -> (f64, Option<[f64; 2]>, usize, usize) {
    let mesh = problem.mesh();
    let suspects = mesh.cut_locus_suspects();
    let per_element: Vec<(f64, Option<Vec2>, usize, bool)> = problem
        .elements()
        .par_iter()
        .enumerate()
        .map(|(t, el)| {
            if suspects[t] {
                return (f64::INFINITY, None, 0, true);
            }
            let mut best = (f64::INFINITY, None, 0, false);
            for q in &el.quad {
                let jet = mesh.distance_jet(t, q.point);
                if !include(t, q.point, &jet) {
                    continue;
                }
                // An undefined margin counts as a failure.
                let m = margin(t, q.bary, q.point, &jet);
                let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
                best.2 += 1;
                if m < best.0 || best.1.is_none() {
                    best.0 = m;
                    best.1 = Some(q.point);
                }
            }
            best
        })
        .collect();
    let mut out = (f64::INFINITY, None, 0, 0);
    for (m, p, count, skipped) in per_element {
        out.2 += count;
        out.3 += skipped as usize;
        if count > 0 && (m < out.0 || out.1.is_none()) {
            out.0 = m;
            out.1 = p.map(|p| [p.x, p.y]);
        }
    }
    out
}

/// `φ_bar = inf_Γ φ + (e^{DB}/D)(e^{−Dd} − 1)` with the subsolution check
/// `Q[φ_bar] > 0`.
pub fn height_barrier(problem: &Problem, d: f64, b: f64) -> Result<(ScalarField, BarrierCertificate)> {
    let mesh = problem.mesh();
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Parameter(format!("D must be positive, got {d}")));
    }
    let diam = mesh.diameter();
    if !(b > diam) {
        return Err(Error::Parameter(format!("B = {b} must exceed the diameter {diam}")));
    }
    if d * b > MAX_HEIGHT_EXPONENT {
        return Err(Error::Parameter(format!("D·B = {} overflows e^(DB)", d * b)));
    }
    let base = problem.inf_phi();
    let f = |x: f64| ((d * (b - x)).exp() - (d * b).exp()) / d;
    let f1 = |x: f64| -(d * (b - x)).exp();
    let values: Vec<f64> = mesh.distances().iter().map(|&x| base + f(x)).collect();
    let field = ScalarField::new(mesh, values.clone())?;

    let amb = problem.ambient();
    let hv = problem.h().values();
    let (min_margin, point, checked, skipped) = min_over_points(
        problem,
        |_, _, _| true,
        |t, bary, u, jet| {
            let tri = mesh.triangles()[t];
            let h = interpolate(hv, tri, bary);
            let fp = f1(jet.d);
            radial_q(amb, base + f(jet.d), u, jet, fp, -d * fp, h)
        },
    );

    let mut boundary = OrderingCheck::new(0.0);
    let phi = problem.phi().values();
    for v in mesh.boundary_vertices() {
        boundary.push(phi[v] - values[v], mesh.vertices()[v]);
    }
    let cert = BarrierCertificate {
        kind: BarrierKind::Height,
        parameters: BarrierParameters::Height { d, b },
        values,
        support: vec![true; mesh.vertex_count()],
        min_margin,
        min_margin_point: point,
        checked_points: checked,
        skipped_elements: skipped,
        boundary_ordering: boundary,
        solution_ordering: None,
        slope_bound: None,
        valid: false,
    };
    Ok((field, cert.finish()))
}

/// One parameter choice tried by a search.
#[derive(Clone, Debug, Serialize)]
pub struct SearchAttempt {
    pub parameters: BarrierParameters,
    pub min_margin: f64,
    pub valid: bool,
}

/// Outcome of a parameter search: the first valid certificate and the log
/// of all attempts.
#[derive(Clone, Debug, Serialize)]
pub struct BarrierSearch {
    pub certificate: Option<BarrierCertificate>,
    #[serde(skip)]
    pub field: Option<ScalarField>,
    pub attempts: Vec<SearchAttempt>,
}

impl BarrierSearch {
    pub fn found(&self) -> bool {
        self.certificate.is_some()
    }
}

fn record(search: &mut BarrierSearch, out: (ScalarField, BarrierCertificate)) -> bool {
    let (field, cert) = out;
    search.attempts.push(SearchAttempt {
        parameters: cert.parameters,
        min_margin: cert.min_margin,
        valid: cert.valid,
    });
    if cert.valid {
        search.certificate = Some(cert);
        search.field = Some(field);
    }
    search.certificate.is_some()
}

/// Tries `D = 2^j`, `j = 0..=20`, with `B` defaulting to `1.1·diam`.
pub fn height_barrier_search(problem: &Problem, b: Option<f64>) -> Result<BarrierSearch> {
    let b = b.unwrap_or(1.1 * problem.mesh().diameter());
    let mut search = BarrierSearch {
        certificate: None,
        field: None,
        attempts: Vec::new(),
    };
    for j in 0..=20 {
        let d = f64::from(1u32 << j);
        if d * b > MAX_HEIGHT_EXPONENT {
            break;
        }
        if record(&mut search, height_barrier(problem, d, b)?) {
            break;
        }
    }
    Ok(search)
}

/// `φ` extended to the interior constantly along the distance: each vertex
/// takes the value at its closest boundary vertex.
fn extend_phi(problem: &Problem, support: &[bool]) -> Vec<f64> {
    let mesh = problem.mesh();
    let phi = problem.phi().values();
    let boundary: Vec<usize> = mesh.boundary_vertices().collect();
    mesh.vertices()
        .iter()
        .enumerate()
        .map(|(v, &u)| {
            if mesh.is_boundary(v) || !support[v] {
                return phi[v];
            }
            let nearest = boundary
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    let pa = mesh.vertices()[a];
                    let pb = mesh.vertices()[b];
                    let da = mesh.metric().norm(0.5 * (u + pa), pa - u);
                    let db = mesh.metric().norm(0.5 * (u + pb), pb - u);
                    da.total_cmp(&db)
                })
                .unwrap();
            phi[nearest]
        })
        .collect()
}

fn check_strip(problem: &Problem, eps: f64) -> Result<Vec<bool>> {
    let mesh = problem.mesh();
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Parameter(format!("strip width must be positive, got {eps}")));
    }
    let support: Vec<bool> = mesh.distances().iter().map(|&d| d <= eps).collect();
    let interior_in_strip = mesh.interior_vertices().iter().any(|&v| support[v]);
    if !interior_in_strip {
        return Err(Error::Parameter(format!(
            "the strip d <= {eps} contains no interior vertex"
        )));
    }
    Ok(support)
}

/// `w + φ` (sign `1`) or `−w + φ` (sign `−1`) on the strip `d ≤ ε`.
fn boundary_barrier_signed(
    problem: &Problem,
    mu: f64,
    c: f64,
    eps: f64,
    z: Option<&ScalarField>,
    tol: f64,
    sign: f64,
) -> Result<(ScalarField, BarrierCertificate)> {
    if !(mu > 0.0 && mu.is_finite() && c > 0.0 && c.is_finite()) {
        return Err(Error::Parameter(format!("mu and c must be positive, got {mu}, {c}")));
    }
    let support = check_strip(problem, eps)?;
    if let Some(z) = z {
        z.check_mesh(problem.mesh())?;
    }
    let mesh = problem.mesh();
    let amb = problem.ambient();
    let mu_t = c / (1.0 + mu).ln();
    let w = |x: f64| -sign * mu_t * (1.0 + mu * x).ln();
    let w1 = |x: f64| -sign * mu * mu_t / (1.0 + mu * x);
    // w″ = w′²/μ̃ for the lower barrier and −w′²/μ̃ for the upper one.
    let w2 = |x: f64| sign * w1(x).powi(2) / mu_t;

    let phi_ext = extend_phi(problem, &support);
    let values: Vec<f64> = mesh
        .distances()
        .iter()
        .zip(&phi_ext)
        .map(|(&x, &p)| p + w(x))
        .collect();
    let field = ScalarField::new(mesh, values.clone())?;

    let phi_b = problem.phi().values();
    let (lo, hi) = mesh
        .boundary_vertices()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(phi_b[v]), b.max(phi_b[v])));
    let constant_phi = hi - lo <= 1e-14 * (1.0 + lo.abs());
    // Recovered jets of the extension, only needed for non-constant data.
    let strip_jets: Vec<Option<(Vec2, Mat2, Mat2)>> = if constant_phi {
        Vec::new()
    } else {
        (0..mesh.vertex_count())
            .into_par_iter()
            .map(|v| {
                support[v].then(|| {
                    let jp = recover_at(mesh, &phi_ext, v);
                    let jd = recover_at(mesh, mesh.distances(), v);
                    (jp.gradient, jp.hessian, jd.hessian)
                })
            })
            .collect()
    };

    let hv = problem.h().values();
    let (q_min, point, checked, skipped) = min_over_points(
        problem,
        |_, _, jet| jet.d <= eps,
        |t, bary, u, jet| {
            let tri = mesh.triangles()[t];
            let h = interpolate(hv, tri, bary);
            let p = interpolate(&phi_ext, tri, bary);
            let tval = p + w(jet.d);
            let (f1, f2) = (w1(jet.d), w2(jet.d));
            let q = if constant_phi {
                radial_q(amb, tval, u, jet, f1, f2, h)
            } else {
                let mut dphi = Vec2::zeros();
                let mut hphi = Mat2::zeros();
                let mut hd = Mat2::zeros();
                for k in 0..3 {
                    let Some((g, hp, hdd)) = strip_jets[tri[k]] else {
                        return f64::NAN;
                    };
                    dphi += bary[k] * g;
                    hphi += bary[k] * hp;
                    hd += bary[k] * hdd;
                }
                let dz = f1 * jet.grad + dphi;
                let hess = f2 * jet.grad * jet.grad.transpose() + f1 * hd + hphi;
                strong_q(amb, tval, u, dz, hess, h)
            };
            sign * q
        },
    );

    // On Γ the barrier equals φ; on the inner edge of the strip it is
    // compared with z along edges crossing d = ε.
    let mut boundary = OrderingCheck::new(tol);
    for v in mesh.boundary_vertices() {
        boundary.push(sign * (phi_b[v] - values[v]), mesh.vertices()[v]);
    }
    if let Some(z) = z {
        let d = mesh.distances();
        let zv = z.values();
        for tri in mesh.triangles() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if a > b || (d[a] <= eps) == (d[b] <= eps) {
                    continue;
                }
                let s = (eps - d[a]) / (d[b] - d[a]);
                let at = mesh.vertices()[a] * (1.0 - s) + mesh.vertices()[b] * s;
                let zi = zv[a] * (1.0 - s) + zv[b] * s;
                let bi = values[a] * (1.0 - s) + values[b] * s;
                boundary.push(sign * (zi - bi), at);
            }
        }
    }
    let kind = if sign > 0.0 {
        BarrierKind::LowerBoundary
    } else {
        BarrierKind::UpperBoundary
    };
    let mut cert = BarrierCertificate {
        kind,
        parameters: BarrierParameters::Boundary {
            mu,
            mu_tilde: mu_t,
            c,
            eps,
        },
        values,
        support,
        min_margin: q_min,
        min_margin_point: point,
        checked_points: checked,
        skipped_elements: skipped,
        boundary_ordering: boundary,
        solution_ordering: None,
        slope_bound: Some(c * mu / (1.0 + mu).ln()),
        valid: false,
    };
    if let Some(z) = z {
        cert.solution_ordering = Some(cert.check_solution(problem, z, tol)?);
    }
    Ok((field, cert.finish()))
}

/// Lower barrier `w + φ` on `d ≤ ε`, `w = −μ̃ ln(1 + μd)`, `μ̃ = c/ln(1 + μ)`.
/// With `z` supplied, the ordering `w + φ ≤ z` is checked on the inner edge
/// of the strip and at its vertices, up to `tol`.
pub fn boundary_barrier(
    problem: &Problem,
    mu: f64,
    c: f64,
    eps: f64,
    z: Option<&ScalarField>,
    tol: f64,
) -> Result<(ScalarField, BarrierCertificate)> {
    boundary_barrier_signed(problem, mu, c, eps, z, tol, 1.0)
}

/// Upper barrier `−w + φ`: `Q < 0` on the strip and `z ≤ −w + φ`.
pub fn upper_barrier_check(
    problem: &Problem,
    z: &ScalarField,
    mu: f64,
    c: f64,
    eps: f64,
    tol: f64,
) -> Result<BarrierCertificate> {
    boundary_barrier_signed(problem, mu, c, eps, Some(z), tol, -1.0).map(|(_, c)| c)
}

/// Grid of `μ = 2^j`, `j = 0..=20`, and `c = 2^k`, `k = −4..=8`; `μ` in the
/// outer loop.
fn boundary_search(
    problem: &Problem,
    eps: f64,
    z: Option<&ScalarField>,
    tol: f64,
    sign: f64,
) -> Result<BarrierSearch> {
    let mut search = BarrierSearch {
        certificate: None,
        field: None,
        attempts: Vec::new(),
    };
    check_strip(problem, eps)?;
    'outer: for j in 0..=20 {
        let mu = f64::from(1u32 << j);
        for k in -4..=8 {
            let c = 2f64.powi(k);
            let out = boundary_barrier_signed(problem, mu, c, eps, z, tol, sign)?;
            if record(&mut search, out) {
                break 'outer;
            }
        }
    }
    Ok(search)
}

pub fn boundary_barrier_search(
    problem: &Problem,
    eps: f64,
    z: Option<&ScalarField>,
    tol: f64,
) -> Result<BarrierSearch> {
    boundary_search(problem, eps, z, tol, 1.0)
}

pub fn upper_barrier_search(problem: &Problem, eps: f64, z: &ScalarField, tol: f64) -> Result<BarrierSearch> {
    boundary_search(problem, eps, Some(z), tol, -1.0)
}
