//! Command-line surface: dispersion/canonical-function table dumps,
//! verification suites, half-space solvers, and the discrete-ordinates
//! cross-check. All outputs are deterministic: identical invocations produce
//! byte-identical files.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use khs::dispersion::{KineticModel, ModelKind, ThetaTable};
use khs::eigen::DEFAULT_SPECTRAL_NODES;
use khs::halfspace::{
    solve_diffusion, solve_kramers, DiffusionProblem, KramersProblem, Problem, DEFAULT_THETA_GRID,
};
use khs::oracle::{
    compare, convergence_slope, extract_constant, model_for, solve_transport, OracleConfig,
};
use khs::report::{write_csv, write_json, SuiteReport};
use khs::verify::{suite_canonical, suite_closure, suite_theorems, VerifyOptions};
use khs::xfunction::{CanonicalX, GammaWeight, Normalization};
use khs::QuadratureConfig;

#[derive(Parser)]
#[command(
    name = "khs",
    version,
    about = "Singular-eigenfunction machinery and half-space kinetic solvers"
)]
struct Cli {
    /// Optional key=value config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump dispersion boundary values and θ(μ) as CSV.
    Dispersion(DispersionArgs),
    /// Dump canonical-function tables and the identity report.
    Xfunction(XfunctionArgs),
    /// Run verification suites and write a JSON report.
    Verify(VerifyArgs),
    /// Solve a half-space boundary value problem.
    Solve(SolveArgs),
    /// Run the discrete-ordinates solver alone.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Maxwell,
    Cmfp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormalizationArg {
    Unit,
    Oneoverz,
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output rows for table dumps.
    #[arg(long)]
    points: Option<usize>,
    /// θ-grid size of the solver stack.
    #[arg(long)]
    grid: Option<usize>,
    /// Absolute tolerance override for quadrature-backed dumps.
    #[arg(long)]
    tol: Option<f64>,
    /// Table format (tables are CSV; reports are always JSON).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Seed for randomized test-function sampling.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DispersionArgs {
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Collision ratio for the Maxwell model.
    #[arg(long)]
    c: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct XfunctionArgs {
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long)]
    c: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long)]
    c: Option<f64>,
    /// Spectral nodes for expansions.
    #[arg(long)]
    nodes: Option<usize>,
    /// Diagnostic: force the canonical normalization (negative control).
    #[arg(long, value_enum)]
    force_normalization: Option<NormalizationArg>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SolveArgs {
    /// Problem: kramers | diffusion.
    problem: String,
    /// Velocity gradient (slip problem).
    #[arg(long)]
    gv: Option<f64>,
    /// Concentration gradient (diffusion problem).
    #[arg(long)]
    gn: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    nodes: Option<usize>,
    /// Also run the discrete-ordinates solver and compare.
    #[arg(long)]
    oracle: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct OracleArgs {
    /// Problem: kramers | diffusion.
    problem: String,
    #[arg(long)]
    gv: Option<f64>,
    #[arg(long)]
    gn: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    cells: Option<usize>,
    /// Ordinates per half-range.
    #[arg(long)]
    ordinates: Option<usize>,
    /// Domain length in mean free paths.
    #[arg(long)]
    length: Option<f64>,
    /// Also run the nested-refinement convergence study.
    #[arg(long)]
    study: bool,
    #[command(flatten)]
    common: CommonArgs,
}

/// Simple key=value file; flags override entries.
struct FileConfig(HashMap<String, String>);

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self, String> {
        let mut map = HashMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
            for (ln, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| format!("config line {}: expected key=value", ln + 1))?;
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(FileConfig(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| format!("config key {key}: cannot parse {raw:?}")),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match FileConfig::load(cli.config.as_deref()) {
        Ok(f) => f,
        Err(e) => return usage_error(&e),
    };
    let result = match cli.command {
        Command::Dispersion(args) => cmd_dispersion(args, &file),
        Command::Xfunction(args) => cmd_xfunction(args, &file),
        Command::Verify(args) => cmd_verify(args, &file),
        Command::Solve(args) => cmd_solve(args, &file),
        Command::Oracle(args) => cmd_oracle(args, &file),
    };
    match result {
        Ok(code) => code,
        Err(CmdError::Usage(msg)) => usage_error(&msg),
        Err(CmdError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("usage error: {msg}");
    ExitCode::from(2)
}

enum CmdError {
    /// Bad arguments or configuration → exit 2.
    Usage(String),
    /// Numeric or verification failure → exit 1.
    Numeric(String),
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Numeric(format!("io error: {e}"))
    }
}

type CmdResult = Result<ExitCode, CmdError>;

fn resolve_model(
    model: Option<ModelArg>,
    c: Option<f64>,
    file: &FileConfig,
) -> Result<KineticModel, CmdError> {
    let model = match model {
        Some(m) => m,
        None => match file.get::<String>("model").map_err(CmdError::Usage)? {
            Some(s) if s == "maxwell" => ModelArg::Maxwell,
            Some(s) if s == "cmfp" => ModelArg::Cmfp,
            Some(s) => return Err(CmdError::Usage(format!("unknown model {s:?}"))),
            None => ModelArg::Cmfp,
        },
    };
    match model {
        ModelArg::Cmfp => Ok(KineticModel::const_mfp()),
        ModelArg::Maxwell => {
            let c = match c {
                Some(v) => v,
                None => file
                    .get::<f64>("c")
                    .map_err(CmdError::Usage)?
                    .unwrap_or(1.0),
            };
            KineticModel::maxwell(c).map_err(|e| CmdError::Usage(e.to_string()))
        }
    }
}

fn out_dir(common: &CommonArgs, file: &FileConfig) -> Result<PathBuf, CmdError> {
    match &common.out {
        Some(p) => Ok(p.clone()),
        None => Ok(file
            .get::<PathBuf>("out")
            .map_err(CmdError::Usage)?
            .unwrap_or_else(|| PathBuf::from("."))),
    }
}

fn grid_size(common: &CommonArgs, file: &FileConfig) -> Result<usize, CmdError> {
    match common.grid {
        Some(g) => Ok(g),
        None => Ok(file
            .get::<usize>("grid")
            .map_err(CmdError::Usage)?
            .unwrap_or(DEFAULT_THETA_GRID)),
    }
}

fn output_points(
    common: &CommonArgs,
    file: &FileConfig,
    default: usize,
) -> Result<usize, CmdError> {
    let p = match common.points {
        Some(p) => p,
        None => file
            .get::<usize>("points")
            .map_err(CmdError::Usage)?
            .unwrap_or(default),
    };
    if p < 2 {
        return Err(CmdError::Usage(format!("need at least 2 points, got {p}")));
    }
    Ok(p)
}

fn cmd_dispersion(args: DispersionArgs, file: &FileConfig) -> CmdResult {
    let model = resolve_model(args.model, args.c, file)?;
    let points = output_points(&args.common, file, 200)?;
    let grid = grid_size(&args.common, file)?.max(points);
    let out = out_dir(&args.common, file)?;
    let table = ThetaTable::build(&model, grid).map_err(|e| CmdError::Numeric(e.to_string()))?;
    let hi = table.hi();
    let mut rows = Vec::with_capacity(points);
    for j in 0..points {
        let mu = hi * (j as f64 + 0.5) / points as f64;
        let bp = model
            .boundary_values(mu)
            .map_err(|e| CmdError::Numeric(e.to_string()))?;
        rows.push(vec![
            mu,
            bp.lambda_plus.re,
            bp.lambda_plus.im,
            table.theta_at(mu),
        ]);
    }
    write_csv(
        out.join("dispersion.csv"),
        &["mu", "re_lambda_plus", "im_lambda_plus", "theta"],
        &rows,
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct XfunctionReport {
    model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    winding: i32,
    normalization: String,
    identity_residual: f64,
    identity_tolerance: f64,
    gamma_im_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    v1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_moment_0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_moment_1: Option<f64>,
    pass: bool,
}

fn cmd_xfunction(args: XfunctionArgs, file: &FileConfig) -> CmdResult {
    let model = resolve_model(args.model, args.c, file)?;
    let points = output_points(&args.common, file, 200)?;
    let grid = grid_size(&args.common, file)?;
    let out = out_dir(&args.common, file)?;
    let x = Arc::new(
        CanonicalX::build(model.clone(), grid).map_err(|e| CmdError::Numeric(e.to_string()))?,
    );
    let gamma = GammaWeight::new(Arc::clone(&x)).map_err(|e| CmdError::Numeric(e.to_string()))?;

    let hi = x.theta_table().hi();
    let mut rows = Vec::with_capacity(points);
    for j in 0..points {
        let mu = hi * (j as f64 + 0.5) / points as f64;
        rows.push(vec![mu, x.theta_table().theta_at(mu), gamma.gamma_at(mu)]);
    }
    write_csv(
        out.join("xfunction_gamma.csv"),
        &["mu", "theta", "gamma"],
        &rows,
    )?;

    let mut xz_rows = Vec::new();
    for im in [0.5, 1.0, 2.0] {
        for j in 0..=10 {
            let re = -2.0 + 5.0 * j as f64 / 10.0;
            let z = num_complex::Complex64::new(re, im);
            let v = x.x_of_z(z).map_err(|e| CmdError::Numeric(e.to_string()))?;
            xz_rows.push(vec![re, im, v.re, v.im]);
        }
    }
    write_csv(
        out.join("xfunction_x.csv"),
        &["re_z", "im_z", "re_x", "im_x"],
        &xz_rows,
    )?;

    let residual = x
        .identity_residual(&gamma, &x.default_identity_samples())
        .map_err(|e| CmdError::Numeric(e.to_string()))?;
    let (v1, m0, m1) = if model.kind() == ModelKind::ConstMfp {
        let cfg = QuadratureConfig::tight();
        (
            Some(
                x.v1_constant()
                    .map_err(|e| CmdError::Numeric(e.to_string()))?,
            ),
            Some(
                gamma
                    .moment(0, &cfg)
                    .map_err(|e| CmdError::Numeric(e.to_string()))?,
            ),
            Some(
                gamma
                    .moment(1, &cfg)
                    .map_err(|e| CmdError::Numeric(e.to_string()))?,
            ),
        )
    } else {
        (None, None, None)
    };
    let report = XfunctionReport {
        model: model.name().to_string(),
        c: (model.kind() == ModelKind::Maxwell).then(|| model.c()),
        winding: x.theta_table().kappa(),
        normalization: x.normalization().name().to_string(),
        identity_residual: residual,
        identity_tolerance: 1e-6,
        gamma_im_ratio: gamma.max_im_ratio(),
        v1,
        gamma_moment_0: m0,
        gamma_moment_1: m1,
        pass: residual < 1e-6,
    };
    write_json(out.join("xfunction_report.json"), &report)?;
    if report.pass {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(CmdError::Numeric(format!(
            "canonical identity residual {residual:.3e} above 1e-6"
        )))
    }
}

#[derive(Serialize)]
struct VerifyReport {
    suite: String,
    suites: Vec<SuiteReport>,
    pass: bool,
}

fn cmd_verify(args: VerifyArgs, file: &FileConfig) -> CmdResult {
    let suite = args.suite.clone();
    if !["theorems", "canonical", "closure", "all"].contains(&suite.as_str()) {
        return Err(CmdError::Usage(format!(
            "unknown suite {suite:?}; expected theorems|canonical|closure|all"
        )));
    }
    let out = out_dir(&args.common, file)?;
    let opts = VerifyOptions {
        grid: grid_size(&args.common, file)?,
        nodes: match args.nodes {
            Some(n) => n,
            None => file
                .get::<usize>("nodes")
                .map_err(CmdError::Usage)?
                .unwrap_or(DEFAULT_SPECTRAL_NODES),
        },
        seed: match args.common.seed {
            Some(s) => s,
            None => file
                .get::<u64>("seed")
                .map_err(CmdError::Usage)?
                .unwrap_or(0),
        },
        force_normalization: args.force_normalization.map(|n| match n {
            NormalizationArg::Unit => Normalization::UnitAtInfinity,
            NormalizationArg::Oneoverz => Normalization::OneOverZ,
        }),
    };
    // An explicit model runs alone; the default battery covers both models.
    let models: Vec<KineticModel> = if args.model.is_some() || file.0.contains_key("model") {
        vec![resolve_model(args.model, args.c, file)?]
    } else {
        let mut v = vec![KineticModel::const_mfp()];
        for c in [0.3, 0.5, 0.9] {
            v.push(KineticModel::maxwell(c).map_err(|e| CmdError::Usage(e.to_string()))?);
        }
        v
    };

    let mut suites = Vec::new();
    for model in &models {
        if suite == "theorems" || suite == "all" {
            suites
                .push(suite_theorems(model, &opts).map_err(|e| CmdError::Numeric(e.to_string()))?);
        }
        if suite == "canonical" || suite == "all" {
            suites.push(
                suite_canonical(model, &opts).map_err(|e| CmdError::Numeric(e.to_string()))?,
            );
        }
        if suite == "closure" || suite == "all" {
            suites
                .push(suite_closure(model, &opts).map_err(|e| CmdError::Numeric(e.to_string()))?);
        }
    }
    let pass = suites.iter().all(|s| s.pass);
    let report = VerifyReport { suite, suites, pass };
    write_json(out.join("verify_report.json"), &report)?;
    if pass {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(CmdError::Numeric(
            "verification failed; see verify_report.json for residuals".into(),
        ))
    }
}

#[derive(Serialize)]
struct SolutionSummary {
    problem: Problem,
    /// U₀ for the slip problem, G_n/(1-c) for diffusion.
    constant: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    v1: Option<f64>,
    identity_residual: f64,
    route_max_rel: f64,
    coefficient_im_max: f64,
    boundary_residual_sup: f64,
    boundary_residual_scale: f64,
    boundary_pass: bool,
}

fn cmd_solve(args: SolveArgs, file: &FileConfig) -> CmdResult {
    let out = out_dir(&args.common, file)?;
    let grid = grid_size(&args.common, file)?;
    let nodes = match args.nodes {
        Some(n) => n,
        None => file
            .get::<usize>("nodes")
            .map_err(CmdError::Usage)?
            .unwrap_or(DEFAULT_SPECTRAL_NODES),
    };
    let (solution, mu_window) = match args.problem.as_str() {
        "kramers" => {
            let g_v = match args.gv {
                Some(v) => v,
                None => file
                    .get::<f64>("gv")
                    .map_err(CmdError::Usage)?
                    .unwrap_or(1.0),
            };
            let s =
                solve_kramers(&KramersProblem { g_v }, grid, nodes).map_err(solve_err_to_cmd)?;
            (s, (0.05, 0.95))
        }
        "diffusion" => {
            let c = match args.c {
                Some(v) => v,
                None => file
                    .get::<f64>("c")
                    .map_err(CmdError::Usage)?
                    .ok_or_else(|| CmdError::Usage("diffusion requires --c".into()))?,
            };
            let g_n = match args.gn {
                Some(v) => v,
                None => file
                    .get::<f64>("gn")
                    .map_err(CmdError::Usage)?
                    .unwrap_or(1.0),
            };
            let s = solve_diffusion(&DiffusionProblem { c, g_n }, grid, nodes)
                .map_err(solve_err_to_cmd)?;
            (s, (0.1, 3.0))
        }
        other => {
            return Err(CmdError::Usage(format!(
                "unknown problem {other:?}; expected kramers|diffusion"
            )))
        }
    };
    let tag = solution.problem().name();

    let res = solution
        .boundary_residual(mu_window.0, mu_window.1, 41)
        .map_err(solve_err_to_cmd)?;
    let v1 = match solution.problem() {
        Problem::Kramers(p) if p.g_v != 0.0 => Some(solution.constant() / p.g_v),
        _ => None,
    };
    let summary = SolutionSummary {
        problem: *solution.problem(),
        constant: solution.constant(),
        v1,
        identity_residual: solution.identity_residual(),
        route_max_rel: solution.route_max_rel(),
        coefficient_im_max: solution.coefficient_im_max(),
        boundary_residual_sup: res,
        boundary_residual_scale: solution.residual_scale(),
        boundary_pass: res <= 1e-4 * solution.residual_scale().max(1e-300),
    };
    write_json(out.join(format!("solve_{tag}_summary.json")), &summary)?;

    // Coefficient table by both routes.
    let mut a_rows = Vec::new();
    let a = solution.coefficient();
    let interior = &a.grid()[1..a.grid().len() - 1];
    for (j, &eta) in interior.iter().enumerate() {
        a_rows.push(vec![eta, a.values()[j + 1], solution.coefficient_alt()[j]]);
    }
    write_csv(
        out.join(format!("solve_{tag}_a.csv")),
        &["eta", "a", "a_alt"],
        &a_rows,
    )?;

    // Distribution slices.
    let (vlo, vhi) = solution.model().velocity_interval();
    let mut h_rows = Vec::new();
    for &x in &[0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
        for j in 0..41 {
            let mu = vlo + (vhi - vlo) * (j as f64 + 0.5) / 41.0;
            let h = solution.evaluate_h(x, mu).map_err(solve_err_to_cmd)?;
            h_rows.push(vec![x, mu, h]);
        }
    }
    write_csv(
        out.join(format!("solve_{tag}_h.csv")),
        &["x", "mu", "h"],
        &h_rows,
    )?;

    // Moment profile.
    let xs: Vec<f64> = (0..=30).map(|k| k as f64 * 0.5).collect();
    let prof = solution
        .moment_profile(&xs, &QuadratureConfig::with_tolerances(1e-9, 1e-8))
        .map_err(solve_err_to_cmd)?;
    let m_rows: Vec<Vec<f64>> = (0..prof.x.len())
        .map(|i| {
            vec![
                prof.x[i],
                prof.moment[i],
                prof.asymptotic[i],
                prof.defect[i],
            ]
        })
        .collect();
    write_csv(
        out.join(format!("solve_{tag}_moment.csv")),
        &["x", "moment", "asymptotic", "defect"],
        &m_rows,
    )?;

    if args.oracle {
        let cfg = oracle_config_from(file, None, None, None)?;
        let model =
            model_for(solution.problem()).map_err(|e| CmdError::Numeric(e.to_string()))?;
        let numeric = solve_transport(&model, solution.problem(), &cfg)
            .map_err(|e| CmdError::Numeric(e.to_string()))?;
        let report =
            compare(&solution, &numeric).map_err(|e| CmdError::Numeric(e.to_string()))?;
        write_json(out.join(format!("solve_{tag}_oracle.json")), &report)?;
        if !report.pass {
            return Err(CmdError::Numeric(format!(
                "oracle comparison failed: constant gap {:.3e}, profile gap {:.3e} {}",
                report.constant_rel_gap, report.profile_rel_gap, report.diagnosis
            )));
        }
    }
    if !summary.boundary_pass {
        return Err(CmdError::Numeric(format!(
            "wall-condition residual {res:.3e} above 1e-4 of scale"
        )));
    }
    Ok(ExitCode::SUCCESS)
}

fn solve_err_to_cmd(e: khs::halfspace::SolveError) -> CmdError {
    match e {
        khs::halfspace::SolveError::InvalidParameter(m) => CmdError::Usage(m),
        other => CmdError::Numeric(other.to_string()),
    }
}

fn oracle_config_from(
    file: &FileConfig,
    cells: Option<usize>,
    ordinates: Option<usize>,
    length: Option<f64>,
) -> Result<OracleConfig, CmdError> {
    let mut cfg = OracleConfig::default();
    if let Some(v) = cells.or(file.get::<usize>("cells").map_err(CmdError::Usage)?) {
        cfg.cells = v;
    }
    if let Some(v) = ordinates.or(file.get::<usize>("ordinates").map_err(CmdError::Usage)?) {
        cfg.ordinates = v;
    }
    if let Some(v) = length.or(file.get::<f64>("length").map_err(CmdError::Usage)?) {
        cfg.domain_length = v;
    }
    if let Some(v) = file.get::<f64>("sweep_tol").map_err(CmdError::Usage)? {
        cfg.sweep_tol = v;
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct OracleSummary {
    problem: Problem,
    cells: usize,
    ordinates: usize,
    domain_length: f64,
    sweeps: usize,
    spectral_radius: f64,
    balance_residual: f64,
    /// Far-field constant of the defect field.
    constant: f64,
    uncertainty: f64,
    /// Extracted slip constant for the slip problem (constant/2).
    #[serde(skip_serializing_if = "Option::is_none")]
    u0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    study: Option<khs::oracle::ConvergenceStudy>,
}

fn cmd_oracle(args: OracleArgs, file: &FileConfig) -> CmdResult {
    let out = out_dir(&args.common, file)?;
    let problem = match args.problem.as_str() {
        "kramers" => {
            let g_v = match args.gv {
                Some(v) => v,
                None => file
                    .get::<f64>("gv")
                    .map_err(CmdError::Usage)?
                    .unwrap_or(1.0),
            };
            Problem::Kramers(KramersProblem { g_v })
        }
        "diffusion" => {
            let c = match args.c {
                Some(v) => v,
                None => file
                    .get::<f64>("c")
                    .map_err(CmdError::Usage)?
                    .ok_or_else(|| CmdError::Usage("diffusion requires --c".into()))?,
            };
            if !(c > 0.0 && c < 1.0) {
                return Err(CmdError::Usage(format!("c = {c} outside (0, 1)")));
            }
            let g_n = match args.gn {
                Some(v) => v,
                None => file
                    .get::<f64>("gn")
                    .map_err(CmdError::Usage)?
                    .unwrap_or(1.0),
            };
            Problem::Diffusion(DiffusionProblem { c, g_n })
        }
        other => {
            return Err(CmdError::Usage(format!(
                "unknown problem {other:?}; expected kramers|diffusion"
            )))
        }
    };
    let cfg = oracle_config_from(file, args.cells, args.ordinates, args.length)?;
    let model = model_for(&problem).map_err(|e| CmdError::Numeric(e.to_string()))?;
    let sol = match solve_transport(&model, &problem, &cfg) {
        Ok(s) => s,
        Err(khs::oracle::OracleError::InvalidConfig(m)) => return Err(CmdError::Usage(m)),
        Err(e) => return Err(CmdError::Numeric(e.to_string())),
    };
    let (constant, uncertainty) =
        extract_constant(&sol).map_err(|e| CmdError::Numeric(e.to_string()))?;

    // Field dump (x, mu, h), subsampled to at most ~40k rows.
    let n = sol.x_centers().len();
    let nk = sol.n_ordinates();
    let stride = (n * nk * 2 / 40_000).max(1);
    let known = known_asymptotics(&problem);
    let mut rows = Vec::new();
    for i in (0..n).step_by(stride) {
        let x = sol.x_centers()[i];
        for k in 0..nk {
            for (sign, idx) in [(1.0, k), (-1.0, nk + k)] {
                let mu = sign * sol.ordinates()[k];
                let h = sol.defect_at(i, idx) + known(x, mu);
                rows.push(vec![x, mu, h]);
            }
        }
    }
    write_csv(out.join("oracle_field.csv"), &["x", "mu", "h"], &rows)?;

    let study = if args.study {
        let base = OracleConfig { cells: 16, ..cfg };
        Some(
            convergence_slope(&model, &problem, &base, None)
                .map_err(|e| CmdError::Numeric(e.to_string()))?,
        )
    } else {
        None
    };

    let summary = OracleSummary {
        problem,
        cells: cfg.cells,
        ordinates: cfg.ordinates,
        domain_length: cfg.domain_length,
        sweeps: sol.sweeps(),
        spectral_radius: sol.spectral_radius(),
        balance_residual: sol.balance_residual(),
        constant,
        uncertainty,
        u0: match problem {
            Problem::Kramers(_) => Some(constant / 2.0),
            Problem::Diffusion(_) => None,
        },
        study,
    };
    write_json(out.join("oracle_summary.json"), &summary)?;
    Ok(ExitCode::SUCCESS)
}

/// Known part of the asymptotics, added back for the field dump.
fn known_asymptotics(problem: &Problem) -> impl Fn(f64, f64) -> f64 + '_ {
    move |x: f64, mu: f64| match problem {
        Problem::Kramers(p) => 2.0 * p.g_v * (x - mu),
        Problem::Diffusion(p) => p.g_n / (1.0 - p.c),
    }
}
