//! The four workflows of the binary. Each returns an exit code; JSON reports
//! go to files or standard output, diagnostics to standard error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ckg_core::analysis::{
    boundary_barrier_search, check_hypotheses, cylinder_monotonicity_probe, height_barrier_search, mesh_tolerance,
    upper_barrier_search, BarrierCertificate, BarrierSearch, HypothesisReport, ProbeReport, BARRIER_ORDERING_C,
};
use ckg_core::geometry::{DomainMesh, ScalarField};
use ckg_core::operator::{mean_curvature_of_graph, Problem};
use ckg_core::solver::{continuity_solve_logged, SolveReport, SolveStatus};
use serde::Serialize;

use crate::error::{exit, CliError, CliResult};
use crate::problem_file::{load_problem, CheckKind, LoadedProblem, ProblemFile};

pub const REPORT_FILE: &str = "report.json";
pub const SOLUTION_FILE: &str = "solution.csv";
pub const LOG_FILE: &str = "log.jsonl";
pub const MESH_FILE: &str = "mesh.json";

#[derive(Clone, Debug, Serialize)]
pub struct MeshSummary {
    pub vertices: usize,
    pub triangles: usize,
    pub boundary_vertices: usize,
    /// Longest σ-edge.
    pub h: f64,
    pub diameter: f64,
}

impl MeshSummary {
    pub fn of(mesh: &DomainMesh) -> Self {
        Self {
            vertices: mesh.vertex_count(),
            triangles: mesh.triangles().len(),
            boundary_vertices: mesh.boundary_vertices().count(),
            h: mesh.h(),
            diameter: mesh.diameter(),
        }
    }
}

/// Outcome of one barrier search.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateEntry {
    pub check: CheckKind,
    pub found: bool,
    pub valid: bool,
    pub attempts: usize,
    pub certificate: Option<BarrierCertificate>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Analyses {
    pub certificates: Vec<CertificateEntry>,
    pub probe: Option<ProbeReport>,
}

impl Analyses {
    pub fn all_valid(&self) -> bool {
        self.certificates.iter().all(|c| c.valid) && self.probe.as_ref().is_none_or(|p| p.monotone)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionSummary {
    pub min: f64,
    pub max: f64,
}

/// Contents of `report.json`.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp: String,
    pub problem: String,
    pub status: String,
    pub exit_code: i32,
    pub error: Option<String>,
    pub strict: bool,
    pub mesh: Option<MeshSummary>,
    pub hypotheses: Option<HypothesisReport>,
    pub hypotheses_pass: Option<bool>,
    pub solve: Option<SolveReport>,
    pub solution: Option<SolutionSummary>,
    pub analyses: Option<Analyses>,
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn report_error(err: &CliError) {
    eprintln!("error: {err}");
}

fn print_json<T: Serialize>(value: &T) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(to_json(value).as_bytes());
}

fn failed_conditions(h: &HypothesisReport) -> Vec<String> {
    h.conditions()
        .into_iter()
        .filter(|c| c.status == ckg_core::report::Status::Fail)
        .map(|c| c.name.clone())
        .collect()
}

fn entry(check: CheckKind, search: CliResult<BarrierSearch>, problem: &Problem, z: Option<&ScalarField>) -> CertificateEntry {
    let tol = mesh_tolerance(BARRIER_ORDERING_C, problem.mesh());
    match search {
        Ok(s) => {
            let attempts = s.attempts.len();
            let cert = match (s.certificate, z) {
                (Some(c), Some(z)) if c.solution_ordering.is_none() => Some(c.with_solution(problem, z, tol)),
                (c, _) => c.map(Ok),
            };
            match cert.transpose() {
                Ok(cert) => CertificateEntry {
                    check,
                    found: cert.is_some(),
                    valid: cert.as_ref().is_some_and(|c| c.valid),
                    attempts,
                    certificate: cert,
                    error: None,
                },
                Err(e) => CertificateEntry {
                    check,
                    found: false,
                    valid: false,
                    attempts,
                    certificate: None,
                    error: Some(e.to_string()),
                },
            }
        }
        Err(e) => CertificateEntry {
            check,
            found: false,
            valid: false,
            attempts: 0,
            certificate: None,
            error: Some(e.to_string()),
        },
    }
}

/// Runs the requested barrier searches and the probe. Parameter errors in
/// the barrier settings are returned rather than recorded.
pub fn run_analyses(file: &ProblemFile, problem: &Problem, z: Option<&ScalarField>, checks: &[CheckKind]) -> CliResult<Analyses> {
    let tol = mesh_tolerance(BARRIER_ORDERING_C, problem.mesh());
    let eps = file.barriers.eps;
    let mut out = Analyses::default();
    if let Some(b) = file.barriers.height_b {
        let diam = problem.mesh().diameter();
        if !(b > diam) {
            return Err(CliError::input(
                "/barriers/height_b",
                format!("B = {b} must exceed the domain diameter {diam}"),
            ));
        }
    }
    for &check in checks {
        match check {
            CheckKind::HeightBarrier => {
                let s = height_barrier_search(problem, file.barriers.height_b).map_err(CliError::from);
                out.certificates.push(entry(check, s, problem, z));
            }
            CheckKind::LowerBarrier => {
                let s = boundary_barrier_search(problem, eps, z, tol).map_err(CliError::from);
                out.certificates.push(entry(check, s, problem, z));
            }
            CheckKind::UpperBarrier => {
                let s = match z {
                    Some(z) => upper_barrier_search(problem, eps, z, tol).map_err(CliError::from),
                    None => Err(CliError::input("/checks", "upper_barrier needs a solution")),
                };
                out.certificates.push(entry(check, s, problem, z));
            }
            CheckKind::Probe => {
                out.probe = Some(cylinder_monotonicity_probe(problem, &file.barriers.probe_depths));
            }
        }
    }
    Ok(out)
}

/// `solve <problem.json> --out <dir> [--strict]`.
pub fn cmd_solve(problem_path: &Path, out_dir: &Path, strict: bool) -> i32 {
    if let Err(e) = fs::create_dir_all(out_dir) {
        report_error(&CliError::io(out_dir, e));
        return exit::INPUT;
    }
    let mut report = RunReport {
        tool: "ckg",
        version: env!("CARGO_PKG_VERSION"),
        timestamp: timestamp(),
        problem: file_name(problem_path),
        status: "input_error".into(),
        exit_code: exit::INPUT,
        error: None,
        strict,
        mesh: None,
        hypotheses: None,
        hypotheses_pass: None,
        solve: None,
        solution: None,
        analyses: None,
    };
    let code = match solve_into(problem_path, out_dir, strict, &mut report) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e);
            report.error = Some(e.to_string());
            exit::INPUT
        }
    };
    report.exit_code = code;
    if let Err(e) = write_text(&out_dir.join(REPORT_FILE), &to_json(&report)) {
        report_error(&e);
        return exit::INPUT;
    }
    code
}

fn solve_into(problem_path: &Path, out_dir: &Path, strict: bool, report: &mut RunReport) -> CliResult<i32> {
    let LoadedProblem { file, problem } = load_problem(problem_path)?;
    let mesh = problem.mesh();
    report.mesh = Some(MeshSummary::of(mesh));
    write_text(&out_dir.join(MESH_FILE), &to_json(&mesh.to_json()))?;

    // Strict runs demand the hypotheses of the general existence theorem;
    // otherwise failures are only reported.
    let hyp = check_hypotheses(&problem);
    let passes = if strict { hyp.general_passes() } else { hyp.passes() };
    let failed = failed_conditions(&hyp);
    report.hypotheses_pass = Some(passes);
    report.hypotheses = Some(hyp);
    if !passes {
        let msg = format!("hypotheses not satisfied (failed: {})", failed.join(", "));
        if strict {
            return Err(CliError::input("/", msg));
        }
        eprintln!("warning: {msg}");
    }

    let mut log = String::new();
    let solved = continuity_solve_logged(&problem, problem.options(), &mut |l| {
        log.push_str(&serde_json::to_string(&l).expect("log lines serialize"));
        log.push('\n');
    });
    write_text(&out_dir.join(LOG_FILE), &log)?;
    let (z, solve) = solved?;
    z.write_csv(mesh, &out_dir.join(SOLUTION_FILE))?;
    report.solution = Some(SolutionSummary { min: z.min(), max: z.max() });
    let status = solve.status;
    report.status = serde_json::to_value(status)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    report.solve = Some(solve);
    Ok(match status {
        SolveStatus::Converged => {
            if !file.checks.is_empty() {
                let analyses = run_analyses(&file, &problem, Some(&z), &file.checks)?;
                if !analyses.all_valid() {
                    eprintln!("warning: some requested analyses did not pass");
                }
                report.analyses = Some(analyses);
            }
            exit::OK
        }
        SolveStatus::Stalled => exit::STALLED,
        SolveStatus::LeftInterval => exit::LEFT_INTERVAL,
    })
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    passes: bool,
    general_passes: bool,
    killing_passes: bool,
    failed: Vec<String>,
    #[serde(flatten)]
    report: &'a HypothesisReport,
}

/// `check <problem.json>`: exit 0 iff one of the sets of existence
/// hypotheses holds.
pub fn cmd_check(problem_path: &Path) -> i32 {
    let loaded = match load_problem(problem_path) {
        Ok(l) => l,
        Err(e) => {
            report_error(&e);
            return exit::INPUT;
        }
    };
    let hyp = check_hypotheses(&loaded.problem);
    let out = CheckOutput {
        passes: hyp.passes(),
        general_passes: hyp.general_passes(),
        killing_passes: hyp.killing_passes(),
        failed: failed_conditions(&hyp),
        report: &hyp,
    };
    print_json(&out);
    if out.passes {
        exit::OK
    } else {
        exit::FAILED
    }
}

fn load_with_solution(problem_path: &Path, solution: &Path) -> CliResult<(LoadedProblem, ScalarField)> {
    let loaded = load_problem(problem_path)?;
    let z = ScalarField::read_csv(loaded.problem.mesh(), solution)
        .map_err(|e| CliError::input("solution", format!("{}: {e}", solution.display())))?;
    Ok((loaded, z))
}

#[derive(Serialize)]
struct CertifyOutput {
    valid: bool,
    mesh: MeshSummary,
    #[serde(flatten)]
    analyses: Analyses,
}

/// `certify <problem.json> <solution.csv>`: barrier searches and their
/// ordering against the solution. Without `checks` in the file, all three
/// barriers are requested.
pub fn cmd_certify(problem_path: &Path, solution: &Path, out: Option<&PathBuf>) -> i32 {
    let run = || -> CliResult<CertifyOutput> {
        let (LoadedProblem { file, problem }, z) = load_with_solution(problem_path, solution)?;
        let checks = if file.checks.is_empty() {
            CheckKind::BARRIERS.to_vec()
        } else {
            file.checks.clone()
        };
        let analyses = run_analyses(&file, &problem, Some(&z), &checks)?;
        Ok(CertifyOutput {
            valid: analyses.all_valid(),
            mesh: MeshSummary::of(problem.mesh()),
            analyses,
        })
    };
    match run() {
        Ok(o) => {
            if let Some(path) = out {
                if let Err(e) = write_text(path, &to_json(&o)) {
                    report_error(&e);
                    return exit::INPUT;
                }
            }
            print_json(&o);
            if o.valid {
                exit::OK
            } else {
                exit::FAILED
            }
        }
        Err(e) => {
            report_error(&e);
            exit::INPUT
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyOutput {
    pub passes: bool,
    pub tolerance: f64,
    /// Over interior vertices.
    pub max_discrepancy: f64,
    pub mean_discrepancy: f64,
    pub worst_vertex: Option<usize>,
    pub interior_vertices: usize,
    /// Vertices where the curvature recovery was ill-conditioned.
    pub flagged_vertices: usize,
}

pub fn verify(problem: &Problem, z: &ScalarField, tolerance: f64) -> CliResult<VerifyOutput> {
    let (h, flags) = mean_curvature_of_graph(problem, z)?;
    let prescribed = problem.h().values();
    let mut max = 0.0f64;
    let mut sum = 0.0;
    let mut worst = None;
    let interior = problem.mesh().interior_vertices();
    for &v in interior {
        let d = (h.values()[v] - prescribed[v]).abs();
        sum += d;
        if !(d <= max) {
            max = d;
            worst = Some(v);
        }
    }
    let mean = sum / interior.len().max(1) as f64;
    Ok(VerifyOutput {
        passes: mean <= tolerance,
        tolerance,
        max_discrepancy: max,
        mean_discrepancy: mean,
        worst_vertex: worst,
        interior_vertices: interior.len(),
        flagged_vertices: interior.iter().filter(|&&v| flags[v]).count(),
    })
}

/// `verify <problem.json> <solution.csv>`: recovers the mean curvature of
/// the supplied graph and compares it with `H`.
pub fn cmd_verify(problem_path: &Path, solution: &Path) -> i32 {
    let run = || -> CliResult<VerifyOutput> {
        let (LoadedProblem { file, problem }, z) = load_with_solution(problem_path, solution)?;
        verify(&problem, &z, file.verify.tolerance)
    };
    match run() {
        Ok(o) => {
            print_json(&o);
            if o.passes {
                exit::OK
            } else {
                exit::FAILED
            }
        }
        Err(e) => {
            report_error(&e);
            exit::INPUT
        }
    }
}
