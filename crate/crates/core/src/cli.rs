//! `finsler` command-line front end.
//!
//! Every flag can also be given as a key of a flat TOML file passed with
//! `--config`; flags win over file values.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};
use log::{debug, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{
    classify_grid, condition_residuals, Classification, ConditionGrid, GridSpec, VERDICT_TOL,
};
use crate::curvature::{CurvatureReport, Discrepancies, FinslerMetric};
use crate::geometry::ManifoldModel;
use crate::phi::{
    AdmissibleDomain, BerwaldFamilySpec, FitReport, IntegrationConstants, PhiModel, Regularity,
    S_MARGIN,
};
use crate::report::{curvature_dump_csv, phi_table_csv, residual_grid_csv, write_json};
use crate::sampling::{sample_points, Sample};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;

/// Default route tolerance for `verify` and `construct`.
pub const ROUTE_TOL: f64 = 1e-7;
const DEFAULT_D: [f64; 3] = [0.6, 0.5, 0.4];

#[derive(Parser, Debug)]
#[command(
    name = "finsler",
    version,
    about = "Curvature checks for general (α,β)-metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compare every pair of computation routes at random admissible points.
    Verify(Options),
    /// Classify the metric from condition residuals on a (b², s) grid.
    Classify(Options),
    /// Build φ from (varphi, theta), tabulate it and check the Berwald conditions.
    Construct(Options),
    /// Write all routes of every curvature quantity at random points.
    CurvatureDump(Options),
}

/// `N` or `NxM` (`b²` nodes by `s` nodes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSize(pub usize, pub usize);

impl FromStr for GridSize {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad grid size '{s}'"))
        };
        let size = match s.split_once(['x', 'X']) {
            Some((a, b)) => GridSize(parse(a)?, parse(b)?),
            None => {
                let n = parse(s)?;
                GridSize(n, n)
            }
        };
        if size.0 == 0 || size.1 == 0 {
            return Err(format!("grid size must be positive, got '{s}'"));
        }
        Ok(size)
    }
}

impl<'de> Deserialize<'de> for GridSize {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(usize),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => GridSize::from_str(&n.to_string()),
            Raw::S(s) => GridSize::from_str(&s),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(clap::Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
struct Options {
    /// Flat TOML file with any of the options below.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// riemannian, randers, example1, example2, custom or constructed.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// φ expression in b2 and s (model custom).
    #[arg(long)]
    phi: Option<String>,
    /// Profile expression in t (model constructed).
    #[arg(long)]
    varphi: Option<String>,
    /// θ expression in b2 (model constructed).
    #[arg(long)]
    theta: Option<String>,
    /// Fit the integration constants to example1 or example2.
    #[arg(long)]
    fit: Option<String>,
    /// Conformal factor of the flat preset b = c0·x + d.
    #[arg(long, allow_hyphen_values = true)]
    c0: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    /// Comma-separated constant part of b.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    d: Option<Vec<f64>>,
    #[arg(long)]
    b2_min: Option<f64>,
    #[arg(long)]
    b2_max: Option<f64>,
    /// Lower end of s/b.
    #[arg(long, allow_hyphen_values = true)]
    s_min: Option<f64>,
    /// Upper end of s/b.
    #[arg(long, allow_hyphen_values = true)]
    s_max: Option<f64>,
    /// Grid nodes, N or NxM.
    #[arg(long)]
    grid: Option<GridSize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

macro_rules! overlay {
    ($a:ident, $b:ident, $($f:ident),*) => {
        Options { config: $a.config, $($f: $a.$f.or($b.$f)),* }
    };
}

impl Options {
    fn overlay(self, file: Options) -> Options {
        overlay!(
            self, file, model, xi, mu, eps, phi, varphi, theta, fit, c0, dim, d, b2_min, b2_max,
            s_min, s_max, grid, tol, samples, seed, out
        )
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

fn config_err(e: impl fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: impl fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Resolved settings, recorded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub model: String,
    pub xi: Option<f64>,
    pub mu: Option<f64>,
    pub eps: Option<f64>,
    pub phi: Option<String>,
    pub varphi: Option<String>,
    pub theta: Option<String>,
    pub fit: Option<String>,
    pub c0: f64,
    pub dim: usize,
    pub d: Vec<f64>,
    pub domain: AdmissibleDomain,
    pub grid: GridSize,
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
    #[serde(skip)]
    pub out: String,
}

struct Setup {
    config: RunConfig,
    metric: FinslerMetric,
    fit: Option<FitReport>,
    reference: Option<PhiModel>,
    out: PathBuf,
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "--{name} must be positive, got {v}"
        )))
    }
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("--{name} must be finite")))
    }
}

fn reference_model(name: &str, o: &Options) -> Result<PhiModel, CliError> {
    let xi = finite("xi", o.xi.unwrap_or(1.0))?;
    match name {
        "example1" => Ok(PhiModel::example1(xi)),
        "example2" => PhiModel::example2(
            finite("mu", o.mu.unwrap_or(1.0))?,
            xi,
            finite("eps", o.eps.unwrap_or(1.0))?,
        )
        .map_err(config_err),
        other => Err(CliError::Config(format!(
            "--fit expects example1 or example2, got '{other}'"
        ))),
    }
}

fn override_domain(base: AdmissibleDomain, o: &Options) -> Result<AdmissibleDomain, CliError> {
    let d = AdmissibleDomain {
        b0: base.b0,
        b2_min: o.b2_min.unwrap_or(base.b2_min),
        b2_max: o.b2_max.unwrap_or(base.b2_max),
        s_lo: o.s_min.unwrap_or(base.s_lo),
        s_hi: o.s_max.unwrap_or(base.s_hi),
    };
    if !(d.b2_min > 0.0 && d.b2_min <= d.b2_max) {
        return Err(CliError::Config(format!(
            "need 0 < b2_min <= b2_max, got [{}, {}]",
            d.b2_min, d.b2_max
        )));
    }
    if !(-1.0 < d.s_lo && d.s_lo < d.s_hi && d.s_hi < 1.0) {
        return Err(CliError::Config(format!(
            "need -1 < s_min < s_max < 1, got [{}, {}]",
            d.s_lo, d.s_hi
        )));
    }
    if d.b2_min >= d.b0 * d.b0 {
        return Err(CliError::Config(format!(
            "b2_min must stay below b0² = {}",
            d.b0 * d.b0
        )));
    }
    Ok(d)
}

fn build_phi(
    o: &Options,
    command: &str,
) -> Result<(PhiModel, Option<FitReport>, Option<PhiModel>), CliError> {
    let default_model = if command == "construct" {
        "constructed"
    } else {
        "riemannian"
    };
    let model = o.model.as_deref().unwrap_or(default_model);
    if command == "construct" && model != "constructed" {
        return Err(CliError::Config(format!(
            "construct needs --model constructed, got '{model}'"
        )));
    }
    let require = |v: &Option<String>, name: &str| {
        v.clone()
            .ok_or_else(|| CliError::Config(format!("model {model} needs --{name}")))
    };
    let (phi, fit, reference) = match model {
        "riemannian" => (PhiModel::riemannian(), None, None),
        "randers" => (PhiModel::randers(), None, None),
        "example1" | "example2" => (reference_model(model, o)?, None, None),
        "custom" => {
            let dom = AdmissibleDomain::symmetric(f64::INFINITY, 0.5, 1.5, S_MARGIN);
            let phi = PhiModel::custom(&require(&o.phi, "phi")?, dom, Regularity::Regular)
                .map_err(config_err)?;
            (phi, None, None)
        }
        "constructed" => {
            let mut spec = BerwaldFamilySpec::new(
                &require(&o.varphi, "varphi")?,
                &require(&o.theta, "theta")?,
            )
            .map_err(config_err)?;
            let reference = o
                .fit
                .as_deref()
                .map(|f| reference_model(f, o))
                .transpose()?;
            if let Some(r) = &reference {
                spec = spec.with_domain(*r.domain());
            }
            let domain = override_domain(spec.domain, o)?;
            spec = spec.with_domain(domain);
            match &reference {
                Some(r) => {
                    let (fitted, report) = crate::phi::BerwaldFamily::new(spec)
                        .fit_constants(r)
                        .map_err(runtime_err)?;
                    info!(
                        "fitted constants {:?}, residual {:e}",
                        report.constants, report.max_relative_residual
                    );
                    (PhiModel::constructed(fitted), Some(report), reference)
                }
                None => (PhiModel::constructed(spec), None, None),
            }
        }
        other => return Err(CliError::Config(format!("unknown model '{other}'"))),
    };
    let domain = override_domain(*phi.domain(), o)?;
    Ok((phi.with_domain(domain), fit, reference))
}

fn setup(o: Options, command: &str) -> Result<Setup, CliError> {
    let o = match &o.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let file: Options = toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            o.overlay(file)
        }
        None => o,
    };
    let dim = o.dim.unwrap_or(3);
    if dim < 2 {
        return Err(CliError::Config(format!(
            "--dim must be at least 2, got {dim}"
        )));
    }
    let d = match &o.d {
        Some(d) if d.len() != dim => {
            return Err(CliError::Config(format!(
                "--d has {} entries, --dim is {dim}",
                d.len()
            )))
        }
        Some(d) => d.clone(),
        None => (0..dim)
            .map(|i| DEFAULT_D.get(i).copied().unwrap_or(0.0))
            .collect(),
    };
    let c0 = finite("c0", o.c0.unwrap_or(1.0))?;
    let default_tol = if command == "classify" {
        VERDICT_TOL
    } else {
        ROUTE_TOL
    };
    let tol = positive("tol", o.tol.unwrap_or(default_tol))?;
    let samples = o.samples.unwrap_or(100);
    if samples == 0 {
        return Err(CliError::Config("--samples must be positive".into()));
    }
    let (phi, fit, reference) = build_phi(&o, command)?;
    let manifold = ManifoldModel::euclidean_conformal(c0, d.clone()).map_err(config_err)?;
    let out = o
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("finsler-out"));
    let config = RunConfig {
        command: command.into(),
        model: phi.name(),
        xi: o.xi,
        mu: o.mu,
        eps: o.eps,
        phi: o.phi.clone(),
        varphi: o.varphi.clone(),
        theta: o.theta.clone(),
        fit: o.fit.clone(),
        c0,
        dim,
        d,
        domain: *phi.domain(),
        grid: o.grid.unwrap_or(GridSize(40, 40)),
        tol,
        samples,
        seed: o.seed.unwrap_or(42),
        out: out.display().to_string(),
    };
    debug!("{config:?}");
    Ok(Setup {
        config,
        metric: FinslerMetric::new(manifold, phi),
        fit,
        reference,
        out,
    })
}

fn write_out(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| runtime_err(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| runtime_err(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn write_report<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| runtime_err(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    write_json(&path, value).map_err(|e| runtime_err(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn samples_for(s: &Setup) -> Result<Vec<Sample>, CliError> {
    sample_points(&s.metric, s.config.samples, s.config.seed).map_err(config_err)
}

#[derive(Serialize)]
struct PointError {
    point: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    error: String,
}

fn evaluate(
    metric: &FinslerMetric,
    samples: &[Sample],
) -> (Vec<(usize, CurvatureReport)>, Vec<PointError>) {
    let results: Vec<_> = samples
        .par_iter()
        .map(|p| metric.report(&p.x, &p.y))
        .collect();
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for (i, (r, p)) in results.into_iter().zip(samples).enumerate() {
        match r {
            Ok(r) => ok.push((i, r)),
            Err(e) => errors.push(PointError {
                point: i,
                x: p.x.clone(),
                y: p.y.clone(),
                error: e.to_string(),
            }),
        }
    }
    (ok, errors)
}

#[derive(Serialize)]
struct VerifyPoint {
    point: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    b2: f64,
    s: f64,
    max: f64,
    discrepancies: Discrepancies,
}

#[derive(Serialize)]
struct Failure {
    point: usize,
    quantity: &'static str,
    value: f64,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    config: &'a RunConfig,
    pass: bool,
    evaluated: usize,
    max_discrepancy: f64,
    max_discrepancies: Discrepancies,
    failures: Vec<Failure>,
    errors: Vec<PointError>,
    points: Vec<VerifyPoint>,
}

fn cmd_verify(s: Setup) -> Result<i32, CliError> {
    let samples = samples_for(&s)?;
    let (reports, errors) = evaluate(&s.metric, &samples);
    let tol = s.config.tol;
    let mut max_discrepancies = Discrepancies::default();
    let mut failures = Vec::new();
    let mut points = Vec::new();
    for (i, r) in &reports {
        max_discrepancies.merge(&r.discrepancies);
        for (quantity, value) in r.discrepancies.entries() {
            if !(value <= tol) {
                failures.push(Failure {
                    point: *i,
                    quantity,
                    value,
                });
            }
        }
        points.push(VerifyPoint {
            point: *i,
            x: r.x.clone(),
            y: r.y.clone(),
            b2: r.b2,
            s: r.s,
            max: r.discrepancies.max(),
            discrepancies: r.discrepancies.clone(),
        });
    }
    let pass = failures.is_empty() && errors.is_empty();
    let max = max_discrepancies.max();
    for f in &failures {
        eprintln!(
            "FAIL point {}: {} = {:e} > {:e}",
            f.point, f.quantity, f.value, tol
        );
    }
    for e in &errors {
        eprintln!("FAIL point {}: {}", e.point, e.error);
    }
    let report = VerifyReport {
        config: &s.config,
        pass,
        evaluated: reports.len(),
        max_discrepancy: max,
        max_discrepancies,
        failures,
        errors,
        points,
    };
    let path = write_report(&s.out, "verify.json", &report)?;
    println!(
        "verify {}: {} points, max discrepancy {:e} (tol {:e}): {}",
        s.config.model,
        report.evaluated,
        max,
        tol,
        if pass { "pass" } else { "FAIL" }
    );
    info!("wrote {}", path.display());
    Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
}

fn conformal_factor(s: &Setup) -> Result<f64, CliError> {
    let (c, residual) = s
        .metric
        .manifold
        .conformal_factor(&vec![0.0; s.config.dim])
        .map_err(runtime_err)?;
    if residual > crate::geometry::CLOSED_CONFORMAL_TOL {
        return Err(runtime_err(format!(
            "β is not closed conformal (residual {residual:e})"
        )));
    }
    Ok(c)
}

fn grid_for(s: &Setup) -> (GridSpec, ConditionGrid) {
    let spec = GridSpec::for_model(&s.metric.phi, s.config.grid.0, s.config.grid.1);
    let grid = condition_residuals(&s.metric.phi, &spec, s.config.dim);
    (spec, grid)
}

#[derive(Serialize)]
struct ClassifyReport<'a> {
    config: &'a RunConfig,
    summary: String,
    landsberg_equals_weak_landsberg: bool,
    classification: &'a Classification,
    grid: &'a ConditionGrid,
}

fn cmd_classify(s: Setup) -> Result<i32, CliError> {
    let c = conformal_factor(&s)?;
    let (_, grid) = grid_for(&s);
    let class = classify_grid(&grid, c, s.config.tol);
    for d in &class.diagnostics {
        warn!("{d}");
    }
    let summary = class.verdicts.summary();
    let report = ClassifyReport {
        config: &s.config,
        summary: summary.clone(),
        landsberg_equals_weak_landsberg: class.verdicts.is_landsberg
            == class.verdicts.is_weak_landsberg,
        classification: &class,
        grid: &grid,
    };
    write_report(&s.out, "classification.json", &report)?;
    write_out(
        &s.out,
        "residuals.csv",
        residual_grid_csv(&grid).map_err(runtime_err)?,
    )?;
    println!("{summary}");
    Ok(if class.verdicts.any_indeterminate() {
        EXIT_INDETERMINATE
    } else {
        EXIT_PASS
    })
}

#[derive(Serialize)]
struct ConstructSpec {
    varphi: String,
    theta: String,
    u_ref: f64,
    quadrature_tol: f64,
    constants: IntegrationConstants,
}

#[derive(Serialize)]
struct ConstructReport<'a> {
    config: &'a RunConfig,
    spec: ConstructSpec,
    fit: Option<FitReport>,
    reference_max_relative_error: Option<f64>,
    max_e_defect: f64,
    max_h_defect: f64,
    failed_cells: usize,
    pass: bool,
    classification: Classification,
}

fn cmd_construct(s: Setup) -> Result<i32, CliError> {
    let family = s
        .metric
        .phi
        .berwald_family()
        .ok_or_else(|| CliError::Config("construct needs a constructed model".into()))?;
    let spec = family.spec();
    let c = conformal_factor(&s)?;
    let (gspec, grid) = grid_for(&s);
    let nodes = gspec.nodes();
    let mut rows = Vec::with_capacity(grid.cells.len());
    let mut quadrature_failures = 0;
    for cell in &grid.cells {
        match s.metric.phi.partials(cell.b2, cell.s) {
            Ok(p) => rows.push((p, cell.residual.map(|r| (r.e_defect, r.h_defect)))),
            Err(e) => {
                quadrature_failures += 1;
                eprintln!("cell (b2={}, s={}): {e}", cell.b2, cell.s);
            }
        }
    }
    let class = classify_grid(&grid, c, VERDICT_TOL);
    let failed = grid.indeterminate_count();
    for d in &class.diagnostics {
        warn!("{d}");
    }
    let max_e = grid.determinate().map(|r| r.e_defect).fold(0.0, f64::max);
    let max_h = grid.determinate().map(|r| r.h_defect).fold(0.0, f64::max);
    let reference_error = s.reference.as_ref().map(|r| {
        nodes
            .iter()
            .filter_map(|&(b2, sv)| Some((s.metric.phi.value(b2, sv).ok()?, r.value(b2, sv).ok()?)))
            .fold(0.0f64, |m, (a, b)| {
                m.max((a - b).abs() / b.abs().max(1e-300))
            })
    });
    let pass = quadrature_failures == 0 && max_e <= s.config.tol && max_h <= s.config.tol;
    let report = ConstructReport {
        config: &s.config,
        spec: ConstructSpec {
            varphi: spec.varphi.to_string(),
            theta: spec.theta.to_string(),
            u_ref: spec.u_ref,
            quadrature_tol: spec.tol,
            constants: spec.constants,
        },
        fit: s.fit,
        reference_max_relative_error: reference_error,
        max_e_defect: max_e,
        max_h_defect: max_h,
        failed_cells: failed,
        pass,
        classification: class,
    };
    write_report(&s.out, "construct.json", &report)?;
    write_out(
        &s.out,
        "construct.csv",
        phi_table_csv(&rows).map_err(runtime_err)?,
    )?;
    println!(
        "construct {}: max |E - sE2| = {max_e:e}, max |H2 - sH22| = {max_h:e}",
        s.config.model
    );
    if let Some(e) = reference_error {
        println!(
            "max relative deviation from {}: {e:e}",
            s.reference.as_ref().map(|r| r.name()).unwrap_or_default()
        );
    }
    Ok(if !pass {
        EXIT_FAIL
    } else if failed > 0 {
        eprintln!(
            "{failed} of {} grid cells could not be checked",
            grid.cells.len()
        );
        EXIT_INDETERMINATE
    } else {
        EXIT_PASS
    })
}

#[derive(Serialize)]
struct DumpReport<'a> {
    config: &'a RunConfig,
    points: Vec<CurvatureReport>,
    errors: Vec<PointError>,
}

fn cmd_dump(s: Setup) -> Result<i32, CliError> {
    let samples = samples_for(&s)?;
    let (reports, errors) = evaluate(&s.metric, &samples);
    let points: Vec<CurvatureReport> = reports.into_iter().map(|(_, r)| r).collect();
    write_out(
        &s.out,
        "curvature.csv",
        curvature_dump_csv(&points).map_err(runtime_err)?,
    )?;
    for e in &errors {
        eprintln!("point {}: {}", e.point, e.error);
    }
    let failed = !errors.is_empty();
    let n = points.len();
    write_report(
        &s.out,
        "curvature.json",
        &DumpReport {
            config: &s.config,
            points,
            errors,
        },
    )?;
    println!(
        "curvature-dump {}: {n} points written to {}",
        s.config.model,
        s.out.display()
    );
    Ok(if failed { EXIT_FAIL } else { EXIT_PASS })
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("FINSLER_LOG", "warn");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_PASS
            };
        }
    };
    let (name, options) = match cli.command {
        Command::Verify(o) => ("verify", o),
        Command::Classify(o) => ("classify", o),
        Command::Construct(o) => ("construct", o),
        Command::CurvatureDump(o) => ("curvature-dump", o),
    };
    let result = setup(options, name).and_then(|s| match name {
        "verify" => cmd_verify(s),
        "classify" => cmd_classify(s),
        "construct" => cmd_construct(s),
        _ => cmd_dump(s),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Config(_) => EXIT_CONFIG,
                CliError::Runtime(_) => EXIT_FAIL,
            }
        }
    }
}
