use std::path::{Path, PathBuf};

use cheq_core::eqregion::{render_slice, GrayMapping, MarginField, SliceChart};
use cheq_core::isometry::{classify, finite_order, parse_word, GroupElement, GroupSpec};
use cheq_core::limitset::{
    fixed_point_seed, is_elementary, orbit_accumulate, LimitSetCloud, DEFAULT_GRID_EPS,
    DEFAULT_R_ACC,
};
use cheq_core::linalg::{sup_entry_norm, ComplexMatrix, ComplexVector, C64};
use cheq_core::projective::{project_with, ProjectivePoint};
use cheq_core::quasiproj::{duality_check, qp_limit_lifts, LimitOptions, LimitReport};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{CliError, Failure, EXIT_OK};
use crate::formats::{
    parse_chart, parse_resolution, parse_vector, parse_window, save_cloud_csv, save_pgm,
};
use crate::report::{self, RunReport, Stopwatch};
use crate::specfile::{load_group, GroupSpecFile};

#[derive(Debug, Parser)]
#[command(
    name = "cheq",
    version,
    about = "Limit sets and equicontinuity regions of subgroups of PU(1,n)"
)]
pub struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Add wall-clock timings to the report.
    #[arg(long, global = true)]
    pub timings: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CloudMethod {
    Orbit,
    Fixed,
    Merged,
}

#[derive(Debug, clap::Args)]
pub struct CloudArgs {
    /// Maximal reduced word length.
    #[arg(long, default_value_t = 8)]
    pub depth: usize,

    /// Orbit base point, comma-separated complex coordinates (default: 1,0,...,0).
    #[arg(long, allow_hyphen_values = true)]
    pub base: Option<String>,

    /// Bergman radius beyond which orbit points count as accumulating.
    #[arg(long, default_value_t = DEFAULT_R_ACC)]
    pub r_acc: f64,

    /// Chordal deduplication radius.
    #[arg(long, default_value_t = DEFAULT_GRID_EPS)]
    pub grid: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate and classify the generators.
    Verify {
        spec: PathBuf,
        /// Largest order searched for finite-order generators.
        #[arg(long, default_value_t = 1000)]
        max_order: usize,
    },
    /// Classify a word in the generators, e.g. "A B^-1 A^2".
    Classify {
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
    },
    /// Approximate the limit set and write it as CSV.
    Limitset {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = CloudMethod::Orbit)]
        method: CloudMethod,
        #[command(flatten)]
        cloud: CloudArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Quasi-projective limit of the powers of a word.
    Qplimit {
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        /// Maximal number of powers.
        #[arg(long, default_value_t = 200)]
        powers: usize,
        /// Cauchy tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// On divergence, retry along a clustering subsequence.
        #[arg(long)]
        retry: bool,
    },
    /// Render the margin field on a real 2-dimensional slice as PGM.
    Eqregion {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = CloudMethod::Fixed)]
        method: CloudMethod,
        #[command(flatten)]
        cloud: CloudArgs,
        /// `center;dir_u;dir_v` (default: e0;e1;e2, or e0;e1;i*e1 for n = 1).
        #[arg(long, allow_hyphen_values = true)]
        chart: Option<String>,
        #[arg(long, allow_hyphen_values = true, default_value = "-2,2,-2,2")]
        window: String,
        #[arg(long, default_value = "401x401")]
        res: String,
        #[arg(long, default_value_t = 0.5)]
        m_ref: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// report, if any, with the exit code.
pub fn run_from_args<I, T>(args: I) -> (Option<RunReport>, Result<(), CliError>, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return (None, Ok(()), code);
        }
    };
    let echo = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match run(&cli, echo) {
        Ok(r) => (Some(r), Ok(()), EXIT_OK),
        Err(f) => {
            let code = f.error.exit_code();
            (f.report.map(|r| *r), Err(f.error), code)
        }
    }
}

pub fn run(cli: &Cli, echo: Vec<String>) -> Result<RunReport, Failure> {
    let dispatch = || -> Result<RunReport, Failure> {
        let mut clock = Stopwatch::default();
        let mut out = match &cli.command {
            Command::Verify { spec, max_order } => cmd_verify(spec, *max_order, echo, &mut clock),
            Command::Classify { spec, word } => cmd_classify(spec, word, echo, &mut clock),
            Command::Limitset {
                spec,
                method,
                cloud,
                out,
            } => cmd_limitset(spec, *method, cloud, out, echo, &mut clock),
            Command::Qplimit {
                spec,
                word,
                powers,
                tol,
                retry,
            } => cmd_qplimit(spec, word, *powers, *tol, *retry, echo, &mut clock),
            Command::Eqregion {
                spec,
                method,
                cloud,
                chart,
                window,
                res,
                m_ref,
                gamma,
                out,
            } => {
                let render = RenderArgs {
                    chart: chart.as_deref(),
                    window,
                    res,
                    mapping: GrayMapping {
                        m_ref: *m_ref,
                        gamma: *gamma,
                    },
                };
                cmd_eqregion(spec, *method, cloud, &render, out, echo, &mut clock)
            }
        };
        if cli.timings {
            let laps = clock.into_map();
            match &mut out {
                Ok(r) => r.timings = Some(laps),
                Err(Failure {
                    report: Some(r), ..
                }) => r.timings = Some(laps),
                Err(_) => {}
            }
        }
        out
    };
    match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into()).into()),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Failure::from(CliError::Usage(format!("thread pool: {e}"))))?
            .install(dispatch),
        None => dispatch(),
    }
}

fn kind_name(g: &GroupElement) -> Result<String, cheq_core::Error> {
    Ok(format!("{:?}", classify(g)?.kind))
}

fn element_summary(g: &GroupElement) -> Result<Value, cheq_core::Error> {
    let c = classify(g)?;
    Ok(json!({
        "kind": format!("{:?}", c.kind),
        "eigenvalue_moduli": c.eigenvalue_moduli,
        "boundary_fixed_points": c.boundary_fixed_points.iter().map(report::point).collect::<Vec<_>>(),
        "attracting": c.attracting,
        "interior_fixed_point": c.interior_fixed_point.as_ref().map(report::point),
    }))
}

pub fn cmd_verify(
    spec: &Path,
    max_order: usize,
    echo: Vec<String>,
    clock: &mut Stopwatch,
) -> Result<RunReport, Failure> {
    let file = GroupSpecFile::read(spec)?;
    let tol = file.tolerances();
    let mut items = Vec::new();
    let mut first_error = None;
    clock.time("verify", || {
        for (i, entry) in file.generators.iter().enumerate() {
            match file.element(i) {
                Ok(g) => {
                    let mut item = match element_summary(&g) {
                        Ok(v) => v,
                        Err(e) => {
                            json!({ "kind": Value::Null, "classification_error": e.to_string() })
                        }
                    };
                    item["name"] = json!(entry.name);
                    item["valid"] = json!(true);
                    item["finite_order"] = json!(finite_order(&g, max_order));
                    items.push(item);
                }
                Err(e) => {
                    items.push(json!({
                        "name": entry.name,
                        "valid": false,
                        "error": e.to_string(),
                    }));
                    first_error.get_or_insert(e);
                }
            }
        }
    });
    let results = json!({
        "n": file.n,
        "generators": items,
        "max_order": max_order,
        "all_valid": first_error.is_none(),
    });
    let report = RunReport::new(echo, Some(&tol), results);
    match first_error {
        None => {
            file.group()?;
            Ok(report)
        }
        Some(error) => Err(Failure {
            error,
            report: Some(Box::new(report)),
        }),
    }
}

pub fn cmd_classify(
    spec: &Path,
    word: &str,
    echo: Vec<String>,
    clock: &mut Stopwatch,
) -> Result<RunReport, Failure> {
    let (_, group) = load_group(spec)?;
    let w = parse_word(&group, word)?;
    let g = group.evaluate(&w.reduced());
    let mut item = clock.time("classify", || element_summary(&g))?;
    item["word"] = json!(group.display_word(&w));
    Ok(RunReport::new(echo, Some(group.tolerances()), item))
}

fn base_point(group: &GroupSpec, base: Option<&str>) -> Result<ProjectivePoint, CliError> {
    let v = match base {
        Some(text) => parse_vector(text)?,
        None => ComplexVector::basis(group.dim(), 0),
    };
    if v.dim() != group.dim() {
        return Err(CliError::Usage(format!(
            "base point needs {} coordinates, got {}",
            group.dim(),
            v.dim()
        )));
    }
    Ok(project_with(&v, group.tolerances().null)?)
}

fn build_cloud(
    group: &GroupSpec,
    method: CloudMethod,
    args: &CloudArgs,
) -> Result<LimitSetCloud, CliError> {
    let orbit = || -> Result<LimitSetCloud, CliError> {
        let base = base_point(group, args.base.as_deref())?;
        Ok(orbit_accumulate(
            group, &base, args.depth, args.r_acc, args.grid,
        )?)
    };
    Ok(match method {
        CloudMethod::Orbit => orbit()?,
        CloudMethod::Fixed => fixed_point_seed(group, args.depth, args.grid)?,
        CloudMethod::Merged => orbit()?.merge(&fixed_point_seed(group, args.depth, args.grid)?)?,
    })
}

fn cloud_summary(cloud: &LimitSetCloud, args: &CloudArgs) -> Value {
    let prov = cloud.provenance();
    json!({
        "method": prov.method.as_str(),
        "depth": prov.depth,
        "base": prov.base.as_ref().map(report::point),
        "r_acc": prov.base.as_ref().map(|_| args.r_acc),
        "grid_eps": cloud.grid_eps(),
        "size": cloud.len(),
        "elementary": is_elementary(cloud),
        "diagnostics": cloud.diagnostics(),
    })
}

pub fn cmd_limitset(
    spec: &Path,
    method: CloudMethod,
    args: &CloudArgs,
    out: &Path,
    echo: Vec<String>,
    clock: &mut Stopwatch,
) -> Result<RunReport, Failure> {
    let (_, group) = load_group(spec)?;
    let cloud = clock.time("cloud", || build_cloud(&group, method, args))?;
    clock.time("write", || save_cloud_csv(out, group.dim(), cloud.points()))?;
    let mut results = cloud_summary(&cloud, args);
    results["out"] = json!(out.display().to_string());
    Ok(RunReport::new(echo, Some(group.tolerances()), results))
}

/// Sup-normalized lifts of `g, g^2, ..., g^count`.
fn power_lifts(g: &GroupElement, count: usize) -> impl Iterator<Item = ComplexMatrix> + '_ {
    let step = g.lift().clone();
    std::iter::successors(Some(step.clone()), move |acc: &ComplexMatrix| {
        let next = step.mul(acc);
        let s = sup_entry_norm(&next).ok()?;
        Some(next.scale(C64::new(1.0 / s, 0.0)))
    })
    .take(count)
}

fn limit_summary(r: &LimitReport) -> Value {
    let limit = r.limit.as_ref();
    json!({
        "converged": r.converged,
        "terms_used": r.terms_used,
        "residual": r.residual,
        "residual_trace": r.residual_trace,
        "extrapolated": r.extrapolated,
        "subsequence": r.subsequence,
        "limit": limit.map(|q| report::matrix(q.lift())),
        "kernel_dim": limit.map(|q| q.proj_ker_dim()),
        "image_dim": limit.map(|q| q.proj_im_dim()),
        "ill_conditioned": limit.map(|q| q.ill_conditioned()),
        "image_point": r.boundary_form.as_ref().map(|b| report::point(&b.image_point)),
        "kernel_tangency": r.boundary_form.as_ref().map(|b| report::point(&b.kernel_tangency)),
    })
}

pub fn cmd_qplimit(
    spec: &Path,
    word: &str,
    powers: usize,
    tol: f64,
    retry: bool,
    echo: Vec<String>,
    clock: &mut Stopwatch,
) -> Result<RunReport, Failure> {
    let (_, group) = load_group(spec)?;
    let w = parse_word(&group, word)?;
    let g = group.evaluate(&w.reduced());
    let opts = LimitOptions {
        tol,
        max_terms: powers,
        subsequence_retry: retry,
        ..LimitOptions::default()
    };
    let forward = clock.time("forward", || qp_limit_lifts(power_lifts(&g, powers), &opts))?;
    let mut results = json!({
        "word": group.display_word(&w),
        "kind": kind_name(&g).ok(),
        "powers": powers,
        "tol": tol,
        "forward": limit_summary(&forward),
    });
    if !forward.converged {
        let report = RunReport::new(echo, Some(group.tolerances()), results);
        return Err(Failure {
            error: CliError::Divergence {
                terms: forward.terms_used,
                residual: forward.residual,
                trace: forward.residual_trace.clone(),
            },
            report: Some(Box::new(report)),
        });
    }
    if forward.boundary_form.is_none() {
        results["note"] = json!("stationary limit without boundary form; duality not applicable");
    } else {
        let inv = g.inverse();
        let backward = clock.time("backward", || {
            qp_limit_lifts(power_lifts(&inv, powers), &opts)
        })?;
        results["duality"] = match duality_check(&forward, &backward) {
            Ok(d) => json!({ "d1": d.d1, "d2": d.d2 }),
            Err(e) => json!({ "error": e.to_string() }),
        };
        results["backward"] = limit_summary(&backward);
    }
    Ok(RunReport::new(echo, Some(group.tolerances()), results))
}

pub struct RenderArgs<'a> {
    pub chart: Option<&'a str>,
    pub window: &'a str,
    pub res: &'a str,
    pub mapping: GrayMapping,
}

fn default_chart(dim: usize) -> [ComplexVector; 3] {
    let e = |k| ComplexVector::basis(dim, k);
    if dim >= 3 {
        [e(0), e(1), e(2)]
    } else {
        [e(0), e(1), e(1).scale(C64::new(0.0, 1.0))]
    }
}

pub fn cmd_eqregion(
    spec: &Path,
    method: CloudMethod,
    args: &CloudArgs,
    render: &RenderArgs,
    out: &Path,
    echo: Vec<String>,
    clock: &mut Stopwatch,
) -> Result<RunReport, Failure> {
    let (_, group) = load_group(spec)?;
    let [center, dir_u, dir_v] = match render.chart {
        Some(text) => parse_chart(text)?,
        None => default_chart(group.dim()),
    };
    let chart = SliceChart {
        center,
        dir_u,
        dir_v,
        window: parse_window(render.window)?,
        resolution: parse_resolution(render.res)?,
    };
    let cloud = clock.time("cloud", || build_cloud(&group, method, args))?;
    let mut results = json!({ "cloud": cloud_summary(&cloud, args) });
    if cloud.is_empty() {
        return Err(Failure {
            error: CliError::EmptyCloud,
            report: Some(Box::new(RunReport::new(
                echo,
                Some(group.tolerances()),
                results,
            ))),
        });
    }
    let field = MarginField::new(cloud)?;
    let img = clock.time("render", || render_slice(&chart, &field, &render.mapping))?;
    clock.time("write", || save_pgm(out, &img))?;
    let (x0, x1, y0, y1) = chart.window;
    results["window"] = json!([x0, x1, y0, y1]);
    results["resolution"] = json!([img.width, img.height]);
    results["m_ref"] = json!(render.mapping.m_ref);
    results["gamma"] = json!(render.mapping.gamma);
    results["min_pixel"] = json!(img.pixels.iter().min());
    results["max_pixel"] = json!(img.pixels.iter().max());
    results["out"] = json!(out.display().to_string());
    Ok(RunReport::new(echo, Some(group.tolerances()), results))
}
