//! The JSON problem file and its translation into a [`Problem`].

use std::path::{Path, PathBuf};
use std::sync::Arc;

use ckg_core::geometry::{
    preset_ambient, AmbientSpace, BaseMetric, ConformalFactor, CurvatureModel, CustomFactor, DomainMesh, Gamma,
    MeshJson, Preset, PresetParams, ScalarField,
};
use ckg_core::operator::Problem;
use ckg_core::solver::SolverOptions;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::expr::{ChartPoint, Expr, RadialDistance};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub ambient: AmbientSpec,
    pub domain: DomainSpec,
    /// Target ring spacing of generated meshes, in σ-length.
    #[serde(default)]
    pub resolution: Option<f64>,
    #[serde(rename = "H")]
    pub h: FieldSpec,
    pub phi: FieldSpec,
    #[serde(default)]
    pub solver: SolverOptions,
    /// Analyses run after a solve and by `certify`.
    #[serde(default)]
    pub checks: Vec<CheckKind>,
    #[serde(default)]
    pub barriers: BarrierSpec,
    #[serde(default)]
    pub verify: VerifySpec,
}

/// Either a named preset, possibly with overrides, or a custom conformal
/// factor.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientSpec {
    pub preset: Option<String>,
    pub lambda: Option<LambdaSpec>,
    /// `γ` as a constant or an expression in `x, y, r, s`.
    pub gamma: Option<ScalarSpec>,
    /// Constant warping `ψ = 1/√γ`.
    pub psi: Option<f64>,
    pub metric: Option<MetricName>,
    /// Constant sectional curvature of the base.
    pub curvature: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaSpec {
    pub value: String,
    pub first: Option<String>,
    pub second: Option<String>,
    /// `∫₀ᵗ λ`, used for the change of variable `r(t)`.
    pub primitive: Option<String>,
    pub interval_end: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Flat,
    RoundSphere,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ScalarSpec {
    Constant(f64),
    Expression(String),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
    Cap { theta0: f64 },
    /// A mesh in the `mesh.json` format, relative to the problem file.
    Mesh { path: PathBuf },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Constant(f64),
    Expression(String),
    Csv(CsvRef),
}

/// Per-vertex values in the `solution.csv` format, relative to the problem
/// file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvRef {
    pub csv: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    HeightBarrier,
    LowerBarrier,
    UpperBarrier,
    Probe,
}

impl CheckKind {
    pub const BARRIERS: [CheckKind; 3] = [CheckKind::HeightBarrier, CheckKind::LowerBarrier, CheckKind::UpperBarrier];
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BarrierSpec {
    /// `B` of the height barrier; defaults to `1.1·diam`.
    pub height_b: Option<f64>,
    /// Width of the boundary strip.
    pub eps: f64,
    /// Depths of the cylinder monotonicity probe.
    pub probe_depths: Vec<f64>,
}

impl Default for BarrierSpec {
    fn default() -> Self {
        Self {
            height_b: None,
            eps: 0.05,
            probe_depths: vec![0.05, 0.1, 0.15],
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySpec {
    /// Bound on the mean discrepancy of the recovered mean curvature.
    pub tolerance: f64,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self { tolerance: 0.05 }
    }
}

/// A parsed problem file with the problem it describes.
pub struct LoadedProblem {
    pub file: ProblemFile,
    pub problem: Problem,
}

/// `a.b[2]` style paths from the deserializer, as JSON pointers.
fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

pub fn parse_problem_file(text: &str) -> CliResult<ProblemFile> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let ptr = pointer(e.path());
        CliError::input(&ptr, e.into_inner().to_string())
    })
}

pub fn load_problem(path: &Path) -> CliResult<LoadedProblem> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file = parse_problem_file(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let problem = build_problem(&file, &base)?;
    Ok(LoadedProblem { file, problem })
}

fn positive(value: f64, ptr: &str) -> CliResult<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::input(ptr, format!("must be positive, got {value}")))
    }
}

fn radial_of(metric: &BaseMetric) -> RadialDistance {
    match metric {
        BaseMetric::Flat => RadialDistance::Flat,
        BaseMetric::RoundSphere => RadialDistance::Sphere,
        _ => RadialDistance::Unknown,
    }
}

fn base_metric(name: MetricName) -> BaseMetric {
    match name {
        MetricName::Flat => BaseMetric::Flat,
        MetricName::RoundSphere => BaseMetric::RoundSphere,
    }
}

fn gamma_from(spec: &ScalarSpec, radial: RadialDistance) -> CliResult<Gamma> {
    match spec {
        ScalarSpec::Constant(c) => Ok(Gamma::Constant(positive(*c, "/ambient/gamma")?)),
        ScalarSpec::Expression(text) => {
            let e = Expr::chart(text, "/ambient/gamma", radial)?;
            Ok(Gamma::Custom {
                value: Arc::new(move |u| e.at_point(ChartPoint::new(u, radial))),
                gradient: None,
            })
        }
    }
}

fn time_fn(text: &str, ptr: &str) -> CliResult<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
    let e = Expr::time(text, ptr)?;
    Ok(Arc::new(move |t| e.at_time(t)))
}

pub fn build_ambient(spec: &AmbientSpec) -> CliResult<AmbientSpace> {
    if spec.gamma.is_some() && spec.psi.is_some() {
        return Err(CliError::input("/ambient", "give either gamma or psi, not both"));
    }
    let metric = spec.metric.map(base_metric);
    let curvature = spec.curvature.map(CurvatureModel::Constant);
    match (&spec.preset, &spec.lambda) {
        (Some(_), Some(_)) => Err(CliError::input("/ambient", "give either preset or lambda, not both")),
        (None, None) => Err(CliError::input("/ambient", "missing preset or lambda")),
        (Some(name), None) => {
            let preset: Preset = name
                .parse()
                .map_err(|e: ckg_core::Error| CliError::input("/ambient/preset", e.to_string()))?;
            let default_metric = if preset == Preset::EuclideanRadial {
                BaseMetric::RoundSphere
            } else {
                BaseMetric::Flat
            };
            let radial = radial_of(metric.as_ref().unwrap_or(&default_metric));
            let mut params = PresetParams {
                metric,
                curvature,
                ..PresetParams::default()
            };
            if let Some(psi) = spec.psi {
                params = params.with_psi(positive(psi, "/ambient/psi")?);
            }
            if let Some(g) = &spec.gamma {
                params.gamma = Some(gamma_from(g, radial)?);
            }
            preset_ambient(preset, params).map_err(|e| CliError::input("/ambient", e.to_string()))
        }
        (None, Some(l)) => {
            let metric = metric.unwrap_or(BaseMetric::Flat);
            let radial = radial_of(&metric);
            let curvature = curvature.unwrap_or(match metric {
                BaseMetric::RoundSphere => CurvatureModel::Constant(1.0),
                _ => CurvatureModel::Flat,
            });
            let gamma = match (&spec.gamma, spec.psi) {
                (Some(g), _) => gamma_from(g, radial)?,
                (None, Some(psi)) => {
                    let psi = positive(psi, "/ambient/psi")?;
                    Gamma::Constant(1.0 / (psi * psi))
                }
                (None, None) => Gamma::Constant(1.0),
            };
            let factor = CustomFactor {
                value: time_fn(&l.value, "/ambient/lambda/value")?,
                first: l.first.as_deref().map(|s| time_fn(s, "/ambient/lambda/first")).transpose()?,
                second: l.second.as_deref().map(|s| time_fn(s, "/ambient/lambda/second")).transpose()?,
                primitive: l
                    .primitive
                    .as_deref()
                    .map(|s| time_fn(s, "/ambient/lambda/primitive"))
                    .transpose()?,
                interval_end: l.interval_end.unwrap_or(f64::INFINITY),
            };
            AmbientSpace::new("custom", ConformalFactor::Custom(factor), gamma, metric, curvature)
                .map_err(|e| CliError::input("/ambient/lambda", e.to_string()))
        }
    }
}

fn resolution(file: &ProblemFile) -> CliResult<f64> {
    let h = file
        .resolution
        .ok_or_else(|| CliError::input("/resolution", "required for generated domains"))?;
    positive(h, "/resolution")
}

pub fn build_mesh(file: &ProblemFile, ambient: &AmbientSpace, base: &Path) -> CliResult<DomainMesh> {
    let bad = |e: ckg_core::Error| CliError::input("/domain", e.to_string());
    match &file.domain {
        DomainSpec::Disk { radius } => {
            DomainMesh::disk_with_h(positive(*radius, "/domain/radius")?, resolution(file)?).map_err(bad)
        }
        DomainSpec::Annulus { inner, outer } => DomainMesh::annulus(*inner, *outer, resolution(file)?).map_err(bad),
        DomainSpec::Cap { theta0 } => {
            DomainMesh::spherical_cap_with_h(positive(*theta0, "/domain/theta0")?, resolution(file)?).map_err(bad)
        }
        DomainSpec::Mesh { path } => {
            let full = base.join(path);
            let text = std::fs::read_to_string(&full).map_err(|e| CliError::io(&full, e))?;
            let json: MeshJson = serde_json::from_str(&text)
                .map_err(|e| CliError::input("/domain/path", format!("{}: {e}", full.display())))?;
            DomainMesh::from_json(&json, ambient.metric().clone()).map_err(bad)
        }
    }
}

fn build_field(spec: &FieldSpec, ptr: &str, mesh: &DomainMesh, radial: RadialDistance, base: &Path) -> CliResult<ScalarField> {
    let field = match spec {
        FieldSpec::Constant(c) => ScalarField::constant(mesh, *c),
        FieldSpec::Expression(text) => {
            let e = Expr::chart(text, ptr, radial)?;
            ScalarField::from_fn(mesh, |u| e.at_point(ChartPoint::new(u, radial)))?
        }
        FieldSpec::Csv(CsvRef { csv }) => {
            let full = base.join(csv);
            ScalarField::read_csv(mesh, &full).map_err(|e| CliError::input(ptr, format!("{}: {e}", full.display())))?
        }
    };
    if let Some(v) = field.values().iter().position(|x| !x.is_finite()) {
        return Err(CliError::input(ptr, format!("value at vertex {v} is not finite")));
    }
    Ok(field)
}

pub fn build_problem(file: &ProblemFile, base: &Path) -> CliResult<Problem> {
    let ambient = build_ambient(&file.ambient)?;
    let mesh = Arc::new(build_mesh(file, &ambient, base)?);
    let radial = radial_of(ambient.metric());
    let h = build_field(&file.h, "/H", &mesh, radial, base)?;
    let phi = build_field(&file.phi, "/phi", &mesh, radial, base)?;
    file.solver
        .validate()
        .map_err(|e| CliError::input("/solver", e.to_string()))?;
    if !(file.barriers.eps > 0.0) {
        return Err(CliError::input("/barriers/eps", "must be positive"));
    }
    Problem::new(ambient, mesh, h, phi, file.solver).map_err(|e| CliError::input("/", e.to_string()))
}
