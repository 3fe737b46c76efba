//! Conformal data of the ambient space.
//!
//! The ambient manifold is described through the flow of a conformal Killing
//! field `Y` issuing from a base leaf `(M, σ)`: the conformal factor `λ(t)`
//! with `λ(0) = 1`, the weight `γ(u) = 1/|Y(0,u)|²` and the base metric `σ`.
//! In the coordinates `(t, u)` the line element is
//! `λ²(t) (dt²/γ(u) + σ_ij du^i du^j)`.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type FieldFn = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;
pub type TensorFn = Arc<dyn Fn(Vec2) -> Mat2 + Send + Sync>;

/// Step of the finite-difference fallback used when a custom function comes
/// without its derivative.
pub const FD_STEP: f64 = 1e-6;

/// Tolerance on the normalisation `λ(0) = 1`.
pub const LAMBDA_NORMALISATION_TOL: f64 = 1e-12;

/// `q₀ = √2 − 1`, the value of `tanh(R/2)` on the base leaf of the
/// hyperbolic profile (where `sinh R = 1`).
const HYPERBOLIC_Q0: f64 = SQRT_2 - 1.0;

/// A scalar function of `t` together with optional derivative evaluators.
#[derive(Clone)]
pub struct CustomFactor {
    pub value: ScalarFn,
    pub first: Option<ScalarFn>,
    pub second: Option<ScalarFn>,
    /// Closed form of `∫₀ᵗ λ`, if known.
    pub primitive: Option<ScalarFn>,
    pub interval_end: f64,
}

/// The conformal factor `λ(t)` of the flow, `Φ_t^* ḡ = λ²(t) ḡ`.
#[derive(Clone)]
pub enum ConformalFactor {
    /// `λ ≡ 1`: the field is Killing.
    Unit,
    /// `λ = e^{a t}` on `ℝ`.
    Exponential { rate: f64 },
    /// `λ = 1/(1 − t)` on `(−∞, 1)`.
    InverseLinear,
    /// `λ = sinh(2 artanh(q₀ eᵗ))` with `q₀ = √2 − 1`, on `(−∞, ln(1 + √2))`.
    Hyperbolic,
    Custom(CustomFactor),
}

impl fmt::Debug for ConformalFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unit => write!(f, "Unit"),
            Self::Exponential { rate } => write!(f, "Exponential {{ rate: {rate} }}"),
            Self::InverseLinear => write!(f, "InverseLinear"),
            Self::Hyperbolic => write!(f, "Hyperbolic"),
            Self::Custom(c) => write!(f, "Custom {{ interval_end: {} }}", c.interval_end),
        }
    }
}

fn hyperbolic_q(t: f64) -> f64 {
    HYPERBOLIC_Q0 * t.exp()
}

impl ConformalFactor {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Unit => 1.0,
            Self::Exponential { rate } => (rate * t).exp(),
            Self::InverseLinear => 1.0 / (1.0 - t),
            // q₀ is chosen so that λ(0) = 1; return it exactly rather than
            // up to the rounding of q₀.
            Self::Hyperbolic if t == 0.0 => 1.0,
            Self::Hyperbolic => {
                let q = hyperbolic_q(t);
                2.0 * q / (1.0 - q * q)
            }
            Self::Custom(c) => (c.value)(t),
        }
    }

    pub fn first(&self, t: f64) -> f64 {
        match self {
            Self::Unit => 0.0,
            Self::Exponential { rate } => rate * (rate * t).exp(),
            Self::InverseLinear => 1.0 / ((1.0 - t) * (1.0 - t)),
            Self::Hyperbolic => {
                let q = hyperbolic_q(t);
                let w = 1.0 - q * q;
                2.0 * q * (1.0 + q * q) / (w * w)
            }
            Self::Custom(c) => match &c.first {
                Some(d) => d(t),
                None => ((c.value)(t + FD_STEP) - (c.value)(t - FD_STEP)) / (2.0 * FD_STEP),
            },
        }
    }

    pub fn second(&self, t: f64) -> f64 {
        match self {
            Self::Unit => 0.0,
            Self::Exponential { rate } => rate * rate * (rate * t).exp(),
            Self::InverseLinear => 2.0 / (1.0 - t).powi(3),
            Self::Hyperbolic => {
                let q = hyperbolic_q(t);
                let q2 = q * q;
                q * (2.0 + 12.0 * q2 + 2.0 * q2 * q2) / (1.0 - q2).powi(3)
            }
            Self::Custom(c) => match &c.second {
                Some(d) => d(t),
                None => (self.first(t + FD_STEP) - self.first(t - FD_STEP)) / (2.0 * FD_STEP),
            },
        }
    }

    pub fn interval_end(&self) -> f64 {
        match self {
            Self::Unit | Self::Exponential { .. } => f64::INFINITY,
            Self::InverseLinear => 1.0,
            Self::Hyperbolic => (1.0 + SQRT_2).ln(),
            Self::Custom(c) => c.interval_end,
        }
    }

    /// Closed form of `r(t) = ∫₀ᵗ λ` when one is known.
    pub fn primitive(&self, t: f64) -> Option<f64> {
        match self {
            Self::Unit => Some(t),
            Self::Exponential { rate } if *rate == 0.0 => Some(t),
            Self::Exponential { rate } => Some(((rate * t).exp() - 1.0) / rate),
            Self::InverseLinear => Some(-(1.0 - t).ln()),
            Self::Hyperbolic => Some(2.0 * hyperbolic_q(t).atanh() - 1f64.asinh()),
            Self::Custom(c) => c.primitive.as_ref().map(|p| p(t)),
        }
    }

    /// True when `λ` is constant, i.e. `Y` is a Killing field.
    pub fn is_constant(&self) -> bool {
        match self {
            Self::Unit => true,
            Self::Exponential { rate } => *rate == 0.0,
            _ => false,
        }
    }

    fn fallbacks(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if let Self::Custom(c) = self {
            if c.first.is_none() {
                out.push("lambda_t");
            }
            if c.second.is_none() {
                out.push("lambda_tt");
            }
        }
        out
    }
}

/// The weight `γ(u) = 1/|Y(0, u)|²`, equivalently `ψ = 1/√γ`.
#[derive(Clone)]
pub enum Gamma {
    Constant(f64),
    /// `γ = scale · exp(2 ⟨slope, u⟩)` in chart coordinates.
    ExpLinear { scale: f64, slope: Vec2 },
    Custom {
        value: FieldFn,
        gradient: Option<GradientFn>,
    },
}

impl fmt::Debug for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::ExpLinear { scale, slope } => {
                write!(f, "ExpLinear {{ scale: {scale}, slope: [{}, {}] }}", slope.x, slope.y)
            }
            Self::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl Gamma {
    pub fn value(&self, u: Vec2) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::ExpLinear { scale, slope } => scale * (2.0 * slope.dot(&u)).exp(),
            Self::Custom { value, .. } => value(u),
        }
    }

    /// Chart partial derivatives `(∂₁γ, ∂₂γ)`.
    pub fn gradient(&self, u: Vec2) -> Vec2 {
        match self {
            Self::Constant(_) => Vec2::zeros(),
            Self::ExpLinear { slope, .. } => 2.0 * self.value(u) * slope,
            Self::Custom { value, gradient } => match gradient {
                Some(g) => g(u),
                None => central_gradient(value.as_ref(), u),
            },
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Self::Constant(_) => true,
            Self::ExpLinear { slope, .. } => slope.x == 0.0 && slope.y == 0.0,
            Self::Custom { .. } => false,
        }
    }
}

fn central_gradient(f: &(dyn Fn(Vec2) -> f64 + Send + Sync), u: Vec2) -> Vec2 {
    let ex = Vec2::new(FD_STEP, 0.0);
    let ey = Vec2::new(0.0, FD_STEP);
    Vec2::new(
        (f(u + ex) - f(u - ex)) / (2.0 * FD_STEP),
        (f(u + ey) - f(u - ey)) / (2.0 * FD_STEP),
    )
}

/// Christoffel symbols of the base metric; `symbols[k][(i, j)] = Γᵏᵢⱼ`.
pub type Christoffel = [Mat2; 2];

/// The metric `σ` of the base leaf in a single chart.
#[derive(Clone)]
pub enum BaseMetric {
    Flat,
    /// Unit round sphere in the stereographic chart from the south pole:
    /// `σ = 4/(1 + |u|²)² δ`, the north pole at the chart origin.
    RoundSphere,
    /// `σ = e^{2ω(u)} δ`.
    Conformal {
        log_factor: FieldFn,
        gradient: Option<GradientFn>,
    },
    Custom {
        tensor: TensorFn,
        christoffel: Option<Arc<dyn Fn(Vec2) -> Christoffel + Send + Sync>>,
    },
}

impl fmt::Debug for BaseMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Flat => "Flat",
            Self::RoundSphere => "RoundSphere",
            Self::Conformal { .. } => "Conformal",
            Self::Custom { .. } => "Custom",
        };
        write!(f, "{name}")
    }
}

impl BaseMetric {
    /// `ω` and `∇ω` for conformally flat metrics.
    fn conformal_log(&self, u: Vec2) -> Option<(f64, Vec2)> {
        match self {
            Self::Flat => Some((0.0, Vec2::zeros())),
            Self::RoundSphere => {
                let s2 = u.norm_squared();
                Some(((2.0 / (1.0 + s2)).ln(), -2.0 * u / (1.0 + s2)))
            }
            Self::Conformal {
                log_factor,
                gradient,
            } => {
                let g = match gradient {
                    Some(g) => g(u),
                    None => central_gradient(log_factor.as_ref(), u),
                };
                Some((log_factor(u), g))
            }
            Self::Custom { .. } => None,
        }
    }

    pub fn tensor(&self, u: Vec2) -> Mat2 {
        match self {
            Self::Flat => Mat2::identity(),
            Self::Custom { tensor, .. } => tensor(u),
            _ => {
                let (w, _) = self.conformal_log(u).unwrap();
                Mat2::identity() * (2.0 * w).exp()
            }
        }
    }

    pub fn inverse(&self, u: Vec2) -> Mat2 {
        match self {
            Self::Flat => Mat2::identity(),
            Self::Custom { tensor, .. } => tensor(u).try_inverse().unwrap_or(Mat2::zeros()),
            _ => {
                let (w, _) = self.conformal_log(u).unwrap();
                Mat2::identity() * (-2.0 * w).exp()
            }
        }
    }

    /// `√det σ`, the density of the Riemannian volume in the chart.
    pub fn volume_density(&self, u: Vec2) -> f64 {
        match self {
            Self::Flat => 1.0,
            Self::Custom { tensor, .. } => tensor(u).determinant().max(0.0).sqrt(),
            _ => (2.0 * self.conformal_log(u).unwrap().0).exp(),
        }
    }

    pub fn christoffel(&self, u: Vec2) -> Christoffel {
        if let Some((_, dw)) = self.conformal_log(u) {
            // Γᵏᵢⱼ = δᵢₖ ωⱼ + δⱼₖ ωᵢ − δᵢⱼ ωₖ
            let mut out = [Mat2::zeros(); 2];
            for (k, gk) in out.iter_mut().enumerate() {
                for i in 0..2 {
                    for j in 0..2 {
                        let mut v = 0.0;
                        if i == k {
                            v += dw[j];
                        }
                        if j == k {
                            v += dw[i];
                        }
                        if i == j {
                            v -= dw[k];
                        }
                        gk[(i, j)] = v;
                    }
                }
            }
            return out;
        }
        match self {
            Self::Custom {
                christoffel: Some(c),
                ..
            } => c(u),
            Self::Custom { tensor, .. } => {
                let inv = self.inverse(u);
                let step = [Vec2::new(FD_STEP, 0.0), Vec2::new(0.0, FD_STEP)];
                let d: Vec<Mat2> = step
                    .iter()
                    .map(|e| (tensor(u + e) - tensor(u - e)) / (2.0 * FD_STEP))
                    .collect();
                let mut out = [Mat2::zeros(); 2];
                for (k, gk) in out.iter_mut().enumerate() {
                    for i in 0..2 {
                        for j in 0..2 {
                            let mut v = 0.0;
                            for l in 0..2 {
                                v += 0.5
                                    * inv[(k, l)]
                                    * (d[i][(j, l)] + d[j][(i, l)] - d[l][(i, j)]);
                            }
                            gk[(i, j)] = v;
                        }
                    }
                }
                out
            }
            _ => unreachable!(),
        }
    }

    /// σ-length of a chart vector at `u`.
    pub fn norm(&self, u: Vec2, v: Vec2) -> f64 {
        v.dot(&(self.tensor(u) * v)).max(0.0).sqrt()
    }

    /// σ-norm of a covector (for instance a chart gradient) at `u`.
    pub fn covector_norm(&self, u: Vec2, c: Vec2) -> f64 {
        c.dot(&(self.inverse(u) * c)).max(0.0).sqrt()
    }

    fn fallbacks(&self) -> Vec<&'static str> {
        match self {
            Self::Conformal { gradient: None, .. } => vec!["metric_gradient"],
            Self::Custom {
                christoffel: None, ..
            } => vec!["christoffel"],
            _ => Vec::new(),
        }
    }
}

/// How the Ricci curvature of the base leaf is known.
#[derive(Clone)]
pub enum CurvatureModel {
    Flat,
    /// Constant sectional curvature `κ₀`.
    Constant(f64),
    /// Radial Ricci curvature `Ric_M(η, η)` supplied pointwise.
    Supplied(FieldFn),
    Unavailable,
}

impl fmt::Debug for CurvatureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Flat => write!(f, "Flat"),
            Self::Constant(k) => write!(f, "Constant({k})"),
            Self::Supplied(_) => write!(f, "Supplied"),
            Self::Unavailable => write!(f, "Unavailable"),
        }
    }
}

impl CurvatureModel {
    /// `Ric_M^rad` at `u` for a base of dimension `n`, if evaluable.
    pub fn radial_ricci(&self, u: Vec2, n: usize) -> Option<f64> {
        match self {
            Self::Flat => Some(0.0),
            Self::Constant(k) => Some((n as f64 - 1.0) * k),
            Self::Supplied(f) => Some(f(u)),
            Self::Unavailable => None,
        }
    }

    /// True when the radial Ricci curvature does not depend on the direction.
    pub fn is_isotropic(&self) -> bool {
        matches!(self, Self::Flat | Self::Constant(_))
    }
}

/// The conformal structure of the ambient space.
#[derive(Clone, Debug)]
pub struct AmbientSpace {
    name: String,
    lambda: ConformalFactor,
    gamma: Gamma,
    metric: BaseMetric,
    curvature: CurvatureModel,
    base_dim: usize,
}

impl AmbientSpace {
    pub fn new(
        name: impl Into<String>,
        lambda: ConformalFactor,
        gamma: Gamma,
        metric: BaseMetric,
        curvature: CurvatureModel,
    ) -> Result<Self> {
        let l0 = lambda.value(0.0);
        if !((l0 - 1.0).abs() <= LAMBDA_NORMALISATION_TOL) {
            return Err(Error::Ambient(format!("lambda(0) = {l0}, expected 1")));
        }
        let end = lambda.interval_end();
        if !(end > 0.0) {
            return Err(Error::Ambient(format!(
                "interval end must be positive, got {end}"
            )));
        }
        if let Gamma::Constant(c) = gamma {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Ambient(format!("gamma must be positive, got {c}")));
            }
        }
        if let Gamma::ExpLinear { scale, .. } = gamma {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::Ambient(format!(
                    "gamma scale must be positive, got {scale}"
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            lambda,
            gamma,
            metric,
            curvature,
            base_dim: 2,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Dimension `n` of the base leaf; the ambient has dimension `n + 1`.
    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn conformal_factor(&self) -> &ConformalFactor {
        &self.lambda
    }

    pub fn gamma_model(&self) -> &Gamma {
        &self.gamma
    }

    pub fn metric(&self) -> &BaseMetric {
        &self.metric
    }

    pub fn curvature_model(&self) -> &CurvatureModel {
        &self.curvature
    }

    pub fn interval_end(&self) -> f64 {
        self.lambda.interval_end()
    }

    /// Names of derivatives evaluated by finite differences.
    pub fn finite_difference_fallbacks(&self) -> Vec<&'static str> {
        let mut out = self.lambda.fallbacks();
        if let Gamma::Custom { gradient: None, .. } = self.gamma {
            out.push("gamma_gradient");
        }
        out.extend(self.metric.fallbacks());
        out
    }

    pub fn is_killing(&self) -> bool {
        self.lambda.is_constant()
    }

    pub fn has_constant_gamma(&self) -> bool {
        self.gamma.is_constant()
    }

    pub fn check_t(&self, t: f64) -> Result<()> {
        if t.is_finite() && t < self.interval_end() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "t = {t} is outside (-inf, {})",
                self.interval_end()
            )))
        }
    }

    pub fn lambda(&self, t: f64) -> f64 {
        self.lambda.value(t)
    }

    pub fn lambda_t(&self, t: f64) -> f64 {
        self.lambda.first(t)
    }

    pub fn lambda_tt(&self, t: f64) -> f64 {
        self.lambda.second(t)
    }

    /// `ρ = λ_t/λ`, the factor in `£_Y ḡ = 2ρ ḡ`.
    pub fn rho(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.rho_unchecked(t))
    }

    pub(crate) fn rho_unchecked(&self, t: f64) -> f64 {
        self.lambda.first(t) / self.lambda.value(t)
    }

    /// `ρ_t = λ_tt/λ − ρ²`.
    pub fn rho_t(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.rho_t_unchecked(t))
    }

    pub(crate) fn rho_t_unchecked(&self, t: f64) -> f64 {
        let l = self.lambda.value(t);
        let r = self.lambda.first(t) / l;
        self.lambda.second(t) / l - r * r
    }

    pub fn gamma(&self, u: Vec2) -> f64 {
        self.gamma.value(u)
    }

    pub fn grad_gamma(&self, u: Vec2) -> Vec2 {
        self.gamma.gradient(u)
    }

    /// Warping function `ψ = 1/√γ`.
    pub fn psi(&self, u: Vec2) -> f64 {
        1.0 / self.gamma(u).sqrt()
    }

    /// `γ̄(t, u) = γ(u)/λ²(t) = 1/|Y(t, u)|²`.
    pub fn gamma_bar(&self, t: f64, u: Vec2) -> f64 {
        let l = self.lambda(t);
        self.gamma(u) / (l * l)
    }

    /// Mean curvature of the leaf `M_t` with respect to `Y/|Y|`:
    /// `k = −λ_t √γ / λ²`.
    pub fn leaf_mean_curvature(&self, t: f64, u: Vec2) -> Result<f64> {
        self.check_t(t)?;
        let l = self.lambda(t);
        Ok(-self.lambda_t(t) * self.gamma(u).sqrt() / (l * l))
    }

    /// `∂_t k` at `(t, u)` from `√γ̄ k_t = −γ̄ ρ_t + k²`.
    pub fn leaf_mean_curvature_t(&self, t: f64, u: Vec2) -> Result<f64> {
        let k = self.leaf_mean_curvature(t, u)?;
        let gb = self.gamma_bar(t, u);
        Ok((-gb * self.rho_t_unchecked(t) + k * k) / gb.sqrt())
    }

    /// Principal curvature of the Killing cylinder along `∂_t`:
    /// `κ = η(log √γ)/λ` with `η` a σ-unit chart vector.
    pub fn cylinder_kappa(&self, t: f64, u: Vec2, eta: Vec2) -> Result<f64> {
        self.check_t(t)?;
        let dg = self.grad_gamma(u).dot(&eta);
        Ok(dg / (2.0 * self.gamma(u) * self.lambda(t)))
    }

    /// Inward mean curvature of the Killing cylinder:
    /// `n H_K = κ + (n − 1) H_Γ / λ`.
    pub fn cylinder_mean_curvature(&self, t: f64, u: Vec2, eta: Vec2, h_gamma: f64) -> Result<f64> {
        let n = self.base_dim as f64;
        let kappa = self.cylinder_kappa(t, u, eta)?;
        Ok((kappa + (n - 1.0) * h_gamma / self.lambda(t)) / n)
    }

    /// `r(t) = ∫₀ᵗ λ(τ) dτ`, closed form when known, quadrature otherwise.
    pub fn r_of_t(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        if let Some(r) = self.lambda.primitive(t) {
            return Ok(r);
        }
        Ok(self.r_by_quadrature(t))
    }

    pub(crate) fn r_by_quadrature(&self, t: f64) -> f64 {
        let f = |s: f64| self.lambda(s);
        if t == 0.0 {
            return 0.0;
        }
        let (a, b, sign) = if t > 0.0 { (0.0, t, 1.0) } else { (t, 0.0, -1.0) };
        // Split long intervals so the double-exponential rule keeps its accuracy.
        let pieces = ((b - a).abs().ceil() as usize).clamp(1, 4096);
        let width = (b - a) / pieces as f64;
        let total: f64 = (0..pieces)
            .map(|i| {
                let lo = a + width * i as f64;
                quadrature::integrate(f, lo, lo + width, 1e-14).integral
            })
            .sum();
        sign * total
    }

    /// Inverse of [`Self::r_of_t`] by bracketed root finding.
    pub fn t_of_r(&self, r: f64) -> Result<f64> {
        if !r.is_finite() {
            return Err(Error::Domain(format!("r = {r} is not finite")));
        }
        let end = self.interval_end();
        let g = |t: f64| self.r_of_t(t).map(|v| v - r);
        if r == 0.0 {
            return Ok(0.0);
        }
        // Bracket the root by stepping away from t = 0.
        let (mut lo, mut hi);
        if r > 0.0 {
            lo = 0.0;
            hi = if end.is_finite() { 0.5 * end } else { 1.0 };
            loop {
                if g(hi)? >= 0.0 {
                    break;
                }
                lo = hi;
                hi = if end.is_finite() {
                    hi + 0.5 * (end - hi)
                } else {
                    2.0 * hi
                };
                if (end.is_finite() && end - hi < 1e-15 * end.abs().max(1.0)) || hi > 1e6 {
                    return Err(Error::Domain(format!("r = {r} is beyond the range of r(t)")));
                }
            }
        } else {
            hi = 0.0;
            lo = -1.0;
            loop {
                if g(lo)? <= 0.0 {
                    break;
                }
                hi = lo;
                lo *= 2.0;
                if lo < -1e6 || g(lo)?.abs() < f64::EPSILON && g(lo)? > 0.0 {
                    return Err(Error::Domain(format!("r = {r} is below the range of r(t)")));
                }
            }
        }
        let mut conv = roots::SimpleConvergency {
            eps: 1e-15,
            max_iter: 200,
        };
        roots::find_root_brent(lo, hi, |t: f64| self.r_of_t(t).unwrap_or(f64::NAN) - r, &mut conv)
            .map_err(|e| Error::Domain(format!("inverting r(t) at r = {r}: {e:?}")))
    }

    /// Warping function of the twisted-product form, `θ(r) = λ(t(r))`.
    pub fn theta_of_r(&self, r: f64) -> Result<f64> {
        Ok(self.lambda(self.t_of_r(r)?))
    }

    /// Validates `γ > 0` and `σ` positive definite at a chart point.
    pub fn check_point(&self, u: Vec2) -> Result<()> {
        let g = self.gamma(u);
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Ambient(format!(
                "gamma = {g} at ({}, {}) is not positive",
                u.x, u.y
            )));
        }
        let s = self.metric.tensor(u);
        let sym = (s[(0, 1)] - s[(1, 0)]).abs() <= 1e-12 * s.norm().max(1.0);
        if !sym || !(s[(0, 0)] > 0.0) || !(s.determinant() > 0.0) {
            return Err(Error::Ambient(format!(
                "base metric is not symmetric positive definite at ({}, {})",
                u.x, u.y
            )));
        }
        Ok(())
    }

    /// Isometric model of the named examples: `R(t)` and the warping `θ̃(R)`
    /// of `φ² dR² + θ̃(R)² dσ²`.
    pub fn warped_model(&self) -> Option<WarpedModel> {
        match self.lambda {
            ConformalFactor::Exponential { rate: 1.0 } => Some(WarpedModel {
                radial: |t| t.exp(),
                warp: |r| r,
            }),
            ConformalFactor::InverseLinear => Some(WarpedModel {
                radial: |t| -(1.0 - t).ln(),
                warp: |r| r.exp(),
            }),
            ConformalFactor::Hyperbolic => Some(WarpedModel {
                radial: |t| 2.0 * hyperbolic_q(t).atanh(),
                warp: |r| r.sinh(),
            }),
            _ => None,
        }
    }
}

/// An isometric warped-product description `φ² dR² + θ̃(R)² dσ²` of a preset.
#[derive(Clone, Copy, Debug)]
pub struct WarpedModel {
    pub radial: fn(f64) -> f64,
    pub warp: fn(f64) -> f64,
}

/// Named ambient spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// `λ = eᵗ` on `ℝ × M`, isometric to `φ² dr² + r² dσ²`.
    ExampleA,
    /// `λ = 1/(1 − t)` on `(−∞, 1) × M`, isometric to `φ² dr² + e^{2r} dσ²`.
    ExampleB,
    /// `λ = sinh(2 artanh(q₀ eᵗ))`, isometric to `φ² dr² + sinh² r dσ²`.
    ExampleC,
    /// `λ ≡ 1`, `γ ≡ 1`, flat base: Euclidean space with a translation field.
    KillingFlat,
    /// Example (a) over the unit sphere: Euclidean space in polar form.
    EuclideanRadial,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::ExampleA,
        Preset::ExampleB,
        Preset::ExampleC,
        Preset::KillingFlat,
        Preset::EuclideanRadial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::ExampleA => "example_a",
            Preset::ExampleB => "example_b",
            Preset::ExampleC => "example_c",
            Preset::KillingFlat => "killing_flat",
            Preset::EuclideanRadial => "euclidean_radial",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Ambient(format!("unknown preset '{s}'")))
    }
}

/// Optional overrides for [`preset_ambient`].
#[derive(Clone, Default, Debug)]
pub struct PresetParams {
    pub gamma: Option<Gamma>,
    pub metric: Option<BaseMetric>,
    pub curvature: Option<CurvatureModel>,
}

impl PresetParams {
    /// Constant warping `ψ`, i.e. `γ ≡ 1/ψ²`.
    pub fn with_psi(mut self, psi: f64) -> Self {
        self.gamma = Some(Gamma::Constant(1.0 / (psi * psi)));
        self
    }

    pub fn with_metric(mut self, metric: BaseMetric, curvature: CurvatureModel) -> Self {
        self.metric = Some(metric);
        self.curvature = Some(curvature);
        self
    }
}

pub fn preset_ambient(preset: Preset, params: PresetParams) -> Result<AmbientSpace> {
    let (lambda, metric, curvature) = match preset {
        Preset::ExampleA => (
            ConformalFactor::Exponential { rate: 1.0 },
            BaseMetric::Flat,
            CurvatureModel::Flat,
        ),
        Preset::ExampleB => (
            ConformalFactor::InverseLinear,
            BaseMetric::Flat,
            CurvatureModel::Flat,
        ),
        Preset::ExampleC => (ConformalFactor::Hyperbolic, BaseMetric::Flat, CurvatureModel::Flat),
        Preset::KillingFlat => (ConformalFactor::Unit, BaseMetric::Flat, CurvatureModel::Flat),
        Preset::EuclideanRadial => (
            ConformalFactor::Exponential { rate: 1.0 },
            BaseMetric::RoundSphere,
            CurvatureModel::Constant(1.0),
        ),
    };
    let gamma = params.gamma.unwrap_or(Gamma::Constant(1.0));
    let (metric, curvature) = match (params.metric, params.curvature) {
        (Some(m), Some(c)) => (m, c),
        (Some(m), None) => {
            let c = match m {
                BaseMetric::Flat => CurvatureModel::Flat,
                BaseMetric::RoundSphere => CurvatureModel::Constant(1.0),
                _ => CurvatureModel::Unavailable,
            };
            (m, c)
        }
        (None, Some(c)) => (metric, c),
        (None, None) => (metric, curvature),
    };
    AmbientSpace::new(preset.name(), lambda, gamma, metric, curvature)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn flat(lambda: ConformalFactor, gamma: Gamma) -> AmbientSpace {
        AmbientSpace::new("t", lambda, gamma, BaseMetric::Flat, CurvatureModel::Flat).unwrap()
    }

    #[test]
    fn rho_examples() {
        let unit = flat(ConformalFactor::Unit, Gamma::Constant(1.0));
        assert_eq!(unit.rho(0.3).unwrap(), 0.0);
        let e = flat(ConformalFactor::Exponential { rate: 1.0 }, Gamma::Constant(1.0));
        for t in [-3.0, 0.0, 0.7, 5.0] {
            assert_relative_eq!(e.rho(t).unwrap(), 1.0, epsilon = 1e-15);
        }
        let b = flat(ConformalFactor::InverseLinear, Gamma::Constant(1.0));
        assert_relative_eq!(b.rho(0.5).unwrap(), 2.0, epsilon = 1e-14);
        assert_relative_eq!(b.rho_t(0.5).unwrap(), 4.0, epsilon = 1e-12);
        assert!(b.rho(1.0).is_err());
        assert!(b.rho(f64::NAN).is_err());
    }

    #[test]
    fn leaf_curvature_examples() {
        let unit = flat(ConformalFactor::Unit, Gamma::Constant(3.0));
        assert_eq!(unit.leaf_mean_curvature(0.4, Vec2::new(0.1, 0.2)).unwrap(), 0.0);
        let e1 = flat(ConformalFactor::Exponential { rate: 1.0 }, Gamma::Constant(1.0));
        assert_relative_eq!(e1.leaf_mean_curvature(0.0, Vec2::zeros()).unwrap(), -1.0);
        let e4 = flat(ConformalFactor::Exponential { rate: 1.0 }, Gamma::Constant(4.0));
        assert_relative_eq!(e4.leaf_mean_curvature(0.0, Vec2::zeros()).unwrap(), -2.0);
    }

    #[test]
    fn kappa_examples() {
        let slope = Gamma::ExpLinear {
            scale: 1.0,
            slope: Vec2::new(1.0, 0.0),
        };
        let a = flat(ConformalFactor::Unit, slope.clone());
        let eta = Vec2::new(1.0, 0.0);
        let u = Vec2::new(0.0, 0.3);
        assert_relative_eq!(a.cylinder_kappa(0.0, u, eta).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(a.cylinder_kappa(0.0, u, -eta).unwrap(), -1.0, epsilon = 1e-15);
        let b = flat(ConformalFactor::Exponential { rate: 1.0 }, slope);
        assert_relative_eq!(
            b.cylinder_kappa(2f64.ln(), u, eta).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        let c = flat(ConformalFactor::Unit, Gamma::Constant(2.0));
        assert_eq!(c.cylinder_kappa(0.0, u, eta).unwrap(), 0.0);
    }

    #[test]
    fn cylinder_mean_curvature_examples() {
        let a = flat(ConformalFactor::Unit, Gamma::Constant(1.0));
        let u = Vec2::new(1.0, 0.0);
        let eta = -u;
        assert_relative_eq!(a.cylinder_mean_curvature(0.0, u, eta, 1.0).unwrap(), 0.5);
        let b = flat(ConformalFactor::Exponential { rate: 1.0 }, Gamma::Constant(1.0));
        assert_relative_eq!(
            b.cylinder_mean_curvature(2f64.ln(), u, eta, 1.0).unwrap(),
            0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn change_of_variable_examples() {
        let unit = flat(ConformalFactor::Unit, Gamma::Constant(1.0));
        assert_eq!(unit.r_of_t(0.37).unwrap(), 0.37);
        assert_relative_eq!(unit.t_of_r(-2.5).unwrap(), -2.5, epsilon = 1e-12);
        let e = flat(ConformalFactor::Exponential { rate: 1.0 }, Gamma::Constant(1.0));
        assert_relative_eq!(e.r_of_t(2f64.ln()).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(e.r_by_quadrature(2f64.ln()), 1.0, epsilon = 1e-12);
        assert!(e.t_of_r(-1.5).is_err());
        let b = flat(ConformalFactor::InverseLinear, Gamma::Constant(1.0));
        assert!(b.r_of_t(1.2).is_err());
    }

    #[test]
    fn lambda_normalisation_is_enforced() {
        let bad = ConformalFactor::Custom(CustomFactor {
            value: Arc::new(|t: f64| 2.0 + t),
            first: None,
            second: None,
            primitive: None,
            interval_end: f64::INFINITY,
        });
        assert!(AmbientSpace::new("bad", bad, Gamma::Constant(1.0), BaseMetric::Flat, CurvatureModel::Flat).is_err());
    }

    #[test]
    fn finite_difference_fallback_is_flagged_and_close() {
        let custom = ConformalFactor::Custom(CustomFactor {
            value: Arc::new(|t: f64| (0.5 * t).exp()),
            first: None,
            second: None,
            primitive: None,
            interval_end: f64::INFINITY,
        });
        let a = flat(custom, Gamma::Constant(1.0));
        assert_eq!(a.finite_difference_fallbacks(), vec!["lambda_t", "lambda_tt"]);
        assert_relative_eq!(a.lambda_t(0.3), 0.5 * 0.15f64.exp(), epsilon = 1e-9);
        assert_relative_eq!(a.lambda_tt(0.3), 0.25 * 0.15f64.exp(), epsilon = 1e-4);
        assert_relative_eq!(a.r_of_t(1.0).unwrap(), 2.0 * (0.5f64.exp() - 1.0), epsilon = 1e-12);
    }

    #[test]
    fn presets() {
        let a = preset_ambient(Preset::ExampleA, PresetParams::default()).unwrap();
        assert_eq!(a.lambda(0.0), 1.0);
        assert_eq!(a.rho(0.0).unwrap(), 1.0);
        let b = preset_ambient(Preset::ExampleB, PresetParams::default()).unwrap();
        assert_eq!(b.lambda(0.0), 1.0);
        assert_eq!(b.rho(0.0).unwrap(), 1.0);
        let c = preset_ambient(Preset::ExampleC, PresetParams::default()).unwrap();
        assert_relative_eq!(c.lambda(0.0), 1.0, epsilon = 1e-15);
        let k = preset_ambient(Preset::KillingFlat, PresetParams::default()).unwrap();
        assert!(k.interval_end().is_infinite());
        assert!(k.is_killing());
        assert_eq!(k.rho(-4.0).unwrap(), 0.0);
        assert_eq!(k.leaf_mean_curvature(1.0, Vec2::new(0.2, 0.1)).unwrap(), 0.0);
        assert!("nope".parse::<Preset>().is_err());
        assert_eq!("example_c".parse::<Preset>().unwrap(), Preset::ExampleC);
    }

    #[test]
    fn round_sphere_christoffel_matches_finite_differences() {
        let sphere = BaseMetric::RoundSphere;
        let custom = BaseMetric::Custom {
            tensor: Arc::new(|u: Vec2| BaseMetric::RoundSphere.tensor(u)),
            christoffel: None,
        };
        let u = Vec2::new(0.3, -0.2);
        let a = sphere.christoffel(u);
        let b = custom.christoffel(u);
        for k in 0..2 {
            assert!((a[k] - b[k]).norm() < 1e-8);
        }
    }
}
