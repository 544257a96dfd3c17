use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracthermo_core::{
    bounds_row, check_cone, classify, emit_csv, emit_svg, fmt_g17, localize, parse_problem, read_csv,
    read_eigenfunction, render_csv, rho_range, sector_bounds, solve_eigenpair, sweep, verify_eigenfunction,
    write_eigenfunction, BoundsOptions, CaseData, ConeReport, Eigenpair, Error, ProblemSpec, QuadratureRule,
    ResidualReport, SeedProfile, SolveOptions, SweepOptions, Tolerances,
};

mod report;

use report::Report;

#[derive(Parser)]
#[command(
    name = "fracthermo",
    version,
    about = "Eigenpairs and eigenvalue bounds for a nonlocal fractional thermostat problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print thresholds, regime and cone constants
    Classify {
        problem: PathBuf,
        /// interval endpoint b of the cone
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compute one eigenpair with sup-norm rho
    Solve {
        problem: PathBuf,
        #[arg(long)]
        rho: f64,
        #[command(flatten)]
        num: Numerics,
        /// eigenfunction table (`t,u`)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the localization interval [L(rho), U(rho)]
    Bounds {
        problem: PathBuf,
        #[command(flatten)]
        rho: RhoArgs,
        #[command(flatten)]
        num: Numerics,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Bounds (and optionally eigenpairs) over many rho values
    Sweep {
        problem: PathBuf,
        #[command(flatten)]
        rho: RhoArgs,
        #[command(flatten)]
        num: Numerics,
        /// also solve for lambda at each rho
        #[arg(long)]
        solve: bool,
        /// CSV output path (default: stdout)
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// worker threads
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Re-check a stored eigenfunction table against the problem
    Verify {
        problem: PathBuf,
        eigenfunction: PathBuf,
        #[command(flatten)]
        num: Numerics,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Render a sweep CSV as SVG
    Plot {
        csv: PathBuf,
        #[arg(long)]
        svg: PathBuf,
    },
}

#[derive(Args)]
struct RhoArgs {
    #[arg(long)]
    rho: Option<f64>,
    /// comma-separated values
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    rho_list: Option<Vec<f64>>,
    /// START STOP COUNT, linearly spaced
    #[arg(long, num_args = 3, value_names = ["START", "STOP", "COUNT"])]
    rho_range: Option<Vec<String>>,
}

#[derive(Args)]
struct Numerics {
    /// odd grid size, at least 65
    #[arg(long, default_value_t = 1025)]
    grid_n: usize,
    #[arg(long, default_value_t = 32)]
    panels: usize,
    #[arg(long, default_value_t = 8)]
    nodes: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// relaxation factor in (0, 1]
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long)]
    b: Option<f64>,
    /// constant, gamma or sigma
    #[arg(long, default_value = "constant")]
    seed: SeedProfile,
    /// use the cone floor for the lower functional bounds
    #[arg(long)]
    sharpen_eta_lo: bool,
}

/// Process outcome: exit code and a one-line message.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Display) -> Self {
        Failure { code: 2, msg: msg.to_string() }
    }

    fn with_context(path: &Path, e: Error) -> Self {
        let code = exit_code(&e);
        let msg = match e {
            Error::Spec(_) => format!("{}: {e}", path.display()),
            other => other.to_string(),
        };
        Failure { code, msg }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), msg: e.to_string() }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonConvergence(_) => 3,
        Error::HypothesisFail { .. } | Error::BreakdownZeroNorm { .. } => 4,
        Error::Io { .. } => 5,
        _ => 2,
    }
}

type Outcome = Result<(), Failure>;

impl Numerics {
    fn rule(&self) -> Result<QuadratureRule, Failure> {
        Ok(QuadratureRule::new(self.panels, self.nodes, Vec::new())?)
    }

    fn solve_options(&self) -> Result<SolveOptions, Failure> {
        if self.grid_n < 65 || self.grid_n.is_multiple_of(2) {
            return Err(Failure::usage(format!("--grid-n must be odd and at least 65, got {}", self.grid_n)));
        }
        Ok(SolveOptions {
            grid_n: self.grid_n,
            rule: self.rule()?,
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            theta: self.theta,
            b_override: self.b,
            tolerances: Tolerances::default(),
        })
    }

    fn sweep_options(&self) -> Result<SweepOptions, Failure> {
        Ok(SweepOptions {
            solve: self.solve_options()?,
            bounds: BoundsOptions { rule: self.rule()?, sharpen_eta_lo: self.sharpen_eta_lo },
        })
    }
}

impl RhoArgs {
    fn values(&self) -> Result<Vec<f64>, Failure> {
        let given = [self.rho.is_some(), self.rho_list.is_some(), self.rho_range.is_some()];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(Failure::usage("give exactly one of --rho, --rho-list, --rho-range"));
        }
        let values = if let Some(r) = self.rho {
            vec![r]
        } else if let Some(list) = &self.rho_list {
            list.clone()
        } else {
            let r = self.rho_range.as_ref().expect("checked above");
            let num = |s: &str| s.parse::<f64>().map_err(|e| Failure::usage(format!("--rho-range `{s}`: {e}")));
            let count =
                r[2].parse::<usize>().map_err(|e| Failure::usage(format!("--rho-range count `{}`: {e}", r[2])))?;
            rho_range(num(&r[0])?, num(&r[1])?, count)?
        };
        if values.is_empty() || values.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Failure::usage("rho values must be positive and finite"));
        }
        Ok(values)
    }
}

fn load(path: &Path) -> Result<ProblemSpec, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::from(Error::Io { path: path.into(), source: e }))?;
    parse_problem(&text).map_err(|e| Failure::with_context(path, e.into()))
}

fn emit(report: &Report, path: Option<&Path>) -> Outcome {
    print!("{report}");
    if let Some(p) = path {
        std::fs::write(p, report.to_string()).map_err(|e| Failure::from(Error::Io { path: p.into(), source: e }))?;
    }
    Ok(())
}

fn case_lines(r: &mut Report, case: &CaseData) {
    let th = &case.thresholds;
    r.num("beta", case.params.beta);
    r.num("beta_K", th.beta_k);
    r.num("beta_gamma", th.beta_gamma);
    r.num("t_K", th.t_k);
    r.num("t_gamma", th.t_gamma);
    r.num("t_star", th.t_star);
    r.put("case", case.case_id);
    r.num("b", case.b);
    r.num("phi", case.phi);
    r.num("c_K", case.c_k);
    r.num("sigma_gamma", case.sigma_gamma);
    r.num("sigma", case.sigma);
    r.num("tau", case.tau);
}

fn residual_lines(r: &mut Report, res: &ResidualReport) {
    r.num("fp_residual", res.fp);
    r.num("bc1_residual", res.bc1);
    r.num("bc2_residual", res.bc2);
    r.num("ode_residual", res.ode);
    r.num("ode_residual_full", res.ode_full);
    r.put("fp_ok", res.fp_ok());
    r.put("bc1_ok", res.bc1_ok());
    r.put("bc2_ok", res.bc2_ok());
    r.put("ode_ok", res.ode_ok());
}

fn cone_lines(r: &mut Report, cone: &ConeReport) {
    r.num("cone_sigma", cone.sigma);
    r.num("cone_b", cone.b);
    r.num("cone_min_on_0b", cone.min_on_0b);
    r.put("cone_nonneg_on_01", cone.nonneg_on_01);
    r.put("cone_satisfied", cone.satisfied);
}

fn classify_cmd(problem: &Path, b: Option<f64>, report: Option<&Path>) -> Outcome {
    let spec = load(problem)?;
    let case = classify(&spec, b)?;
    let mut r = Report::new();
    r.put("problem", problem.display());
    r.num("alpha", spec.alpha);
    r.num("eta", spec.eta);
    r.put("beta_input", spec.beta);
    case_lines(&mut r, &case);
    emit(&r, report)
}

fn eigen_lines(r: &mut Report, ep: &Eigenpair, case: &CaseData, converged: bool) {
    r.num("rho", ep.rho);
    r.num("lambda", ep.lambda);
    r.put("iterations", ep.iterations);
    r.put("converged", converged);
    residual_lines(r, &ep.residuals);
    cone_lines(r, &check_cone(&ep.u, case));
    r.put("warnings", ep.warnings.len());
}

fn solve_cmd(problem: &Path, rho: f64, num: &Numerics, out: Option<&Path>, report: Option<&Path>) -> Outcome {
    let spec = load(problem)?;
    let opts = num.solve_options()?;
    let case = classify(&spec, opts.b_override)?;
    let (ep, failure) = match solve_eigenpair(&spec, rho, &opts) {
        Ok(ep) => (ep, None),
        Err(Error::NonConvergence(nc)) => {
            let msg = format!("no convergence after {} iterations (last step {:e})", nc.iterations, nc.last_step);
            (nc.eigenpair, Some(Failure { code: 3, msg }))
        }
        Err(e) => return Err(e.into()),
    };
    let mut r = Report::new();
    r.put("problem", problem.display());
    r.put("case", case.case_id);
    r.num("b", case.b);
    eigen_lines(&mut r, &ep, &case, failure.is_none());
    if let Some(p) = out {
        write_eigenfunction(&ep.u, p)?;
        r.put("eigenfunction", p.display());
    }
    emit(&r, report)?;
    failure.map_or(Ok(()), Err)
}

fn bounds_cmd(problem: &Path, rho: &RhoArgs, num: &Numerics, report: Option<&Path>) -> Outcome {
    let spec = load(problem)?;
    let rhos = rho.values()?;
    let opts = num.sweep_options()?;
    let case = classify(&spec, opts.solve.b_override)?;
    let mut r = Report::new();
    r.put("problem", problem.display());
    r.put("case", case.case_id);
    r.num("b", case.b);
    let mut failed = None;
    for rho in rhos {
        let sb = sector_bounds(&spec, rho, &case, &opts.bounds)?;
        let loc = localize(&sb, &case, &opts.bounds.rule)?;
        r.blank();
        r.num("rho", rho);
        r.num("L", loc.l);
        r.num("U", loc.u);
        r.put("delta_lo", sb.delta_lo.provenance());
        r.put("delta_hi", sb.delta_hi.provenance());
        for (name, v, p) in [
            ("eta1_lo", sb.eta1_lo, sb.eta_provenance[0]),
            ("eta1_hi", sb.eta1_hi, sb.eta_provenance[1]),
            ("eta2_lo", sb.eta2_lo, sb.eta_provenance[2]),
            ("eta2_hi", sb.eta2_hi, sb.eta_provenance[3]),
        ] {
            r.put(name, format!("{} ({p})", fmt_g17(v)));
        }
        r.put("hypothesis", if loc.hypothesis_holds() { "ok" } else { "fail" });
        if !loc.hypothesis_holds() && failed.is_none() {
            failed = Some(Failure::from(Error::HypothesisFail { rho, denominator: loc.u_denominator }));
        }
    }
    emit(&r, report)?;
    failed.map_or(Ok(()), Err)
}

fn sweep_cmd(
    problem: &Path,
    rho: &RhoArgs,
    num: &Numerics,
    solve: bool,
    csv: Option<&Path>,
    svg: Option<&Path>,
    jobs: usize,
) -> Outcome {
    let spec = load(problem)?;
    let rhos = rho.values()?;
    let opts = num.sweep_options()?;
    if jobs == 0 {
        return Err(Failure::usage("--jobs must be at least 1"));
    }
    // fail early on an unusable b or spec instead of once per row
    classify(&spec, opts.solve.b_override)?;
    let rows = if rhos.len() == 1 {
        vec![bounds_row(&spec, rhos[0], solve, &opts)]
    } else {
        sweep(&spec, &rhos, solve, &opts, jobs)?
    };
    for row in &rows {
        if let Some(e) = &row.error {
            log::warn!("rho = {}: {e}", fmt_g17(row.rho));
        }
    }
    match csv {
        Some(p) => emit_csv(&rows, p)?,
        None => print!("{}", render_csv(&rows)),
    }
    if let Some(p) = svg {
        emit_svg(&rows, p)?;
    }
    Ok(())
}

fn verify_cmd(problem: &Path, eigenfunction: &Path, num: &Numerics, report: Option<&Path>) -> Outcome {
    let spec = load(problem)?;
    let u = read_eigenfunction(eigenfunction)?;
    let rule = num.rule()?;
    let case = classify(&spec, num.b)?;
    let (rho, lambda, res) = verify_eigenfunction(&u, &spec, &rule, Tolerances::default())?;
    let mut r = Report::new();
    r.put("problem", problem.display());
    r.put("eigenfunction", eigenfunction.display());
    r.put("grid_n", u.len());
    r.put("case", case.case_id);
    r.num("rho", rho);
    r.num("lambda", lambda);
    residual_lines(&mut r, &res);
    cone_lines(&mut r, &check_cone(&u, &case));
    r.put("verified", res.all_ok());
    emit(&r, report)?;
    if res.all_ok() {
        Ok(())
    } else {
        Err(Failure { code: 3, msg: "residuals exceed their tolerances".into() })
    }
}

fn plot_cmd(csv: &Path, svg: &Path) -> Outcome {
    let rows = read_csv(csv)?;
    emit_svg(&rows, svg)?;
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Classify { problem, b, report } => classify_cmd(problem, *b, report.as_deref()),
        Command::Solve { problem, rho, num, out, report } => {
            solve_cmd(problem, *rho, num, out.as_deref(), report.as_deref())
        }
        Command::Bounds { problem, rho, num, report } => bounds_cmd(problem, rho, num, report.as_deref()),
        Command::Sweep { problem, rho, num, solve, csv, svg, jobs } => {
            sweep_cmd(problem, rho, num, *solve, csv.as_deref(), svg.as_deref(), *jobs)
        }
        Command::Verify { problem, eigenfunction, num, report } => {
            verify_cmd(problem, eigenfunction, num, report.as_deref())
        }
        Command::Plot { csv, svg } => plot_cmd(csv, svg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let msg: Vec<&str> = text
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("ERROR 2 {}", msg.join(" ").trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ERROR {} {}", f.code, f.msg.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}
