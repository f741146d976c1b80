use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use kdvlab::ansatz::{derive_conditions, AnsatzFamily};
use kdvlab::error::{KdvError, Result};
use kdvlab::evolve::{
    collision_experiment, evolve, measure_velocity, CollisionSetup, EvolveOptions,
};
use kdvlab::output::{plot_data, render_value, to_json_string};
use kdvlab::solver::{
    solve_cnoidal, solve_soliton, solve_superposition, ConsistencyVerdict, SolutionParams,
};
use kdvlab::verify::{eval_field, residual, volume_mean, GridSpec};

const RESIDUAL_TOLERANCE: f64 = 1e-9;
const VOLUME_TOLERANCE: f64 = 1e-10;

const AFTER_HELP: &str = "\
Exit codes:
  0  success
  1  numerical failure (no convergence, failed measurement, I/O),
     or a `verify` report with status FAIL
  2  usage error (bad or missing flags, unsupported order)
  3  domain error (parameter outside its mathematical domain, e.g. m >= 1)
  4  the requested solution does not exist (verdict \"inconsistent\")

Environment:
  KDVLAB_PRECISION  replaces the pass thresholds of `verify`
                    (residual 1e-9, volume mean 1e-10) for exploratory runs";

#[derive(Parser)]
#[command(
    name = "kdvlab",
    version,
    about = "Traveling waves of KdV, KdV2 and KdV3: conditions, solutions, checks and evolution",
    after_help = AFTER_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exact condition system for an ansatz and equation order
    Derive(DeriveArgs),
    /// Solve the condition system, or certify that it has no solution
    Solve(WaveArgs),
    /// Check a solution: pointwise residual on a grid and period mean
    Verify(VerifyArgs),
    /// Evolve a solution with the spectral integrator
    Evolve(EvolveArgs),
    /// Overtaking collision of two KdV solitons
    Collision(CollisionArgs),
    /// Two-column wave profile for gnuplot
    PlotData(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct DeriveArgs {
    #[arg(long)]
    order: u32,
    #[arg(long, value_parser = parse_family)]
    ansatz: AnsatzFamily,
    /// Output file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Clone)]
struct WaveArgs {
    #[arg(long)]
    order: u32,
    #[arg(long, value_parser = parse_family)]
    ansatz: AnsatzFamily,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    beta: f64,
    /// Elliptic parameter (cnoidal and superposition families)
    #[arg(long, allow_negative_numbers = true)]
    m: Option<f64>,
    /// Amplitude A; required at order 1
    #[arg(long, allow_negative_numbers = true)]
    amplitude: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    /// Solution parameters as JSON (an element of `solutions` from `solve`);
    /// when absent the solution is computed from the wave flags
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    order: Option<u32>,
    #[arg(long, value_parser = parse_family)]
    ansatz: Option<AnsatzFamily>,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, allow_negative_numbers = true)]
    m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    amplitude: Option<f64>,
    #[arg(long, default_value_t = 2048)]
    grid_n: usize,
    /// Domain length; default 32/B for solitons, two periods otherwise
    #[arg(long)]
    domain_l: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `csv` writes the sampled field of the first solution
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    wave: WaveArgs,
    /// Order of the solution used as initial data (default: --order)
    #[arg(long)]
    init_order: Option<u32>,
    #[arg(long, default_value_t = 512)]
    grid_n: usize,
    /// Domain length; default 32/B for solitons, two periods otherwise
    #[arg(long)]
    domain_l: Option<f64>,
    /// Time step; default half the stability bound
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value_t = 20.0)]
    t_final: f64,
    #[arg(long, default_value_t = 11)]
    snapshots: usize,
    /// Directory for snapshot CSV files and manifest.json
    #[arg(long)]
    snapshot_dir: Option<PathBuf>,
}

#[derive(Args)]
struct CollisionArgs {
    #[arg(long, default_value_t = 1)]
    order: u32,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    a1: f64,
    #[arg(long, default_value_t = 0.4)]
    a2: f64,
    /// Initial distance in widths of the smaller pulse
    #[arg(long, default_value_t = 10.0)]
    separation: f64,
    #[arg(long, default_value_t = 4000.0)]
    t_final: f64,
    #[arg(long, default_value_t = 512)]
    grid_n: usize,
    /// Directory for pre- and post-collision CSV profiles
    #[arg(long)]
    snapshot_dir: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    wave: WaveArgs,
    #[arg(long, default_value_t = 512)]
    grid_n: usize,
    #[arg(long)]
    domain_l: Option<f64>,
}

fn parse_family(s: &str) -> std::result::Result<AnsatzFamily, String> {
    s.parse::<AnsatzFamily>().map_err(|e| e.to_string())
}

enum Failure {
    Error(KdvError),
    Inconsistent(String),
    /// A check ran and did not pass; the report has already been written.
    Check(String),
}

impl From<KdvError> for Failure {
    fn from(e: KdvError) -> Self {
        Failure::Error(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json_only(format: Format, cmd: &str) -> Result<()> {
    match format {
        Format::Json => Ok(()),
        Format::Csv => Err(KdvError::Usage(format!("`{cmd}` only writes JSON"))),
    }
}

fn precision() -> Result<Option<f64>> {
    match std::env::var("KDVLAB_PRECISION") {
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(x) if x > 0.0 && x.is_finite() => Ok(Some(x)),
            _ => Err(KdvError::Usage(format!(
                "KDVLAB_PRECISION must be a positive number, got {s:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

fn run_solver(w: &WaveArgs) -> Result<ConsistencyVerdict> {
    let need_m = || {
        w.m.ok_or_else(|| KdvError::Usage(format!("--m is required for the {} ansatz", w.ansatz)))
    };
    match w.ansatz {
        AnsatzFamily::Soliton => solve_soliton(w.order, w.alpha, w.beta, w.amplitude),
        AnsatzFamily::Cnoidal => solve_cnoidal(w.order, w.alpha, w.beta, need_m()?, w.amplitude),
        AnsatzFamily::SuperpositionPlus => {
            solve_superposition(w.order, 1, w.alpha, w.beta, need_m()?, w.amplitude)
        }
        AnsatzFamily::SuperpositionMinus => {
            solve_superposition(w.order, -1, w.alpha, w.beta, need_m()?, w.amplitude)
        }
    }
}

/// The solutions of a verdict, or exit 4 when there are none.
fn solutions_of(v: &ConsistencyVerdict) -> std::result::Result<Vec<SolutionParams>, Failure> {
    let sols: Vec<SolutionParams> = v.solutions().into_iter().cloned().collect();
    if sols.is_empty() {
        return Err(Failure::Inconsistent(format!(
            "the {} ansatz has no admissible solution at order {} (verdict {})",
            v.family,
            v.order,
            v.kind_name()
        )));
    }
    Ok(sols)
}

fn grid_for(sol: &SolutionParams, n: usize, domain_l: Option<f64>) -> Result<GridSpec> {
    match domain_l {
        None => GridSpec::default_for(sol, n),
        Some(l) => {
            let x0 = if sol.family == AnsatzFamily::Soliton {
                -0.5 * l
            } else {
                0.0
            };
            GridSpec::new(n, x0, l)
        }
    }
}

fn cmd_derive(a: &DeriveArgs) -> CmdResult {
    json_only(a.format, "derive")?;
    let sys = derive_conditions(a.ansatz, a.order)?;
    emit(&a.out, &render_value(&sys.to_json()))?;
    Ok(())
}

fn cmd_solve(w: &WaveArgs) -> CmdResult {
    json_only(w.format, "solve")?;
    let verdict = run_solver(w)?;
    emit(&w.out, &to_json_string(&verdict).map_err(Failure::Error)?)?;
    if verdict.certificate().is_some() {
        return Err(Failure::Inconsistent(format!(
            "the {} ansatz is inconsistent at order {}",
            w.ansatz, w.order
        )));
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs) -> CmdResult {
    let sols = match &a.params {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(KdvError::from)?;
            let sol: SolutionParams = serde_json::from_str(&text)
                .map_err(|e| KdvError::Usage(format!("{}: {e}", path.display())))?;
            vec![sol]
        }
        None => {
            let (Some(order), Some(ansatz)) = (a.order, a.ansatz) else {
                return Err(KdvError::Usage(
                    "verify needs --params, or --order and --ansatz".into(),
                )
                .into());
            };
            let w = WaveArgs {
                order,
                ansatz,
                alpha: a.alpha,
                beta: a.beta,
                m: a.m,
                amplitude: a.amplitude,
                out: None,
                format: Format::Json,
            };
            solutions_of(&run_solver(&w)?)?
        }
    };
    let tol = precision()?;
    let res_tol = tol.unwrap_or(RESIDUAL_TOLERANCE);
    let vol_tol = tol.unwrap_or(VOLUME_TOLERANCE);

    if let Format::Csv = a.format {
        let grid = grid_for(&sols[0], a.grid_n, a.domain_l)?;
        let field = eval_field(&sols[0], &grid, 0.0)?;
        let mut buf = Vec::new();
        field.write_csv(&mut buf)?;
        emit(&a.out, &String::from_utf8_lossy(&buf))?;
        return Ok(());
    }

    let mut all_pass = true;
    let mut checks = Vec::new();
    for sol in &sols {
        let grid = grid_for(sol, a.grid_n, a.domain_l)?;
        let r = residual(sol, sol.order, &grid)?;
        let mut pass = r.max_normalized <= res_tol;
        let mut entry = json!({
            "solution": serde_json::to_value(sol).map_err(KdvError::from)?,
            "grid": serde_json::to_value(grid).map_err(KdvError::from)?,
            "residual": serde_json::to_value(r).map_err(KdvError::from)?,
        });
        if sol.family.is_elliptic() {
            let mean = volume_mean(sol)?;
            pass &= mean.abs() <= vol_tol;
            entry["volume_mean"] = json!(mean);
        }
        entry["status"] = json!(if pass { "PASS" } else { "FAIL" });
        all_pass &= pass;
        checks.push(entry);
    }
    let report = json!({
        "checks": checks,
        "residual_tolerance": res_tol,
        "volume_tolerance": vol_tol,
        "status": if all_pass { "PASS" } else { "FAIL" },
    });
    emit(&a.out, &render_value(&report))?;
    if !all_pass {
        return Err(Failure::Check("verification FAILED".into()));
    }
    Ok(())
}

fn cmd_evolve(a: &EvolveArgs) -> CmdResult {
    let init = WaveArgs {
        order: a.init_order.unwrap_or(a.wave.order),
        ..a.wave.clone()
    };
    let verdict = run_solver(&init)?;
    let sol = solutions_of(&verdict)?.pop().expect("nonempty");
    let grid = grid_for(&sol, a.grid_n, a.domain_l)?;
    let initial = eval_field(&sol, &grid, 0.0)?;
    let run = evolve(
        &initial,
        &EvolveOptions {
            dt: a.dt,
            snapshots: a.snapshots,
            ..EvolveOptions::new(a.wave.order, a.wave.alpha, a.wave.beta, a.t_final)
        },
    )?;
    if let Some(dir) = &a.snapshot_dir {
        run.save(dir)?;
    }
    if let Format::Csv = a.wave.format {
        let mut buf = Vec::new();
        run.final_field().write_csv(&mut buf)?;
        emit(&a.wave.out, &String::from_utf8_lossy(&buf))?;
        return Ok(());
    }
    let exact = eval_field(&sol, &grid, a.t_final)?;
    let measured = match measure_velocity(&run) {
        Ok(v) => json!(v),
        Err(e) => json!(e.to_string()),
    };
    let report = json!({
        "initial_solution": serde_json::to_value(&sol).map_err(KdvError::from)?,
        "run": serde_json::to_value(&run).map_err(KdvError::from)?,
        "mass_drift": run.mass_drift(),
        "measured_velocity": measured,
        "predicted_velocity": sol.v,
        "linf_deviation_from_traveling_wave": run.final_field().linf_distance(&exact)?,
    });
    emit(&a.wave.out, &render_value(&report))?;
    Ok(())
}

fn cmd_collision(a: &CollisionArgs) -> CmdResult {
    json_only(a.format, "collision")?;
    let setup = CollisionSetup {
        separation: a.separation,
        t_final: a.t_final,
        n: a.grid_n,
        ..CollisionSetup::new(a.order, a.alpha, a.beta, a.a1, a.a2)
    };
    let report = collision_experiment(&setup)?;
    if let Some(dir) = &a.snapshot_dir {
        std::fs::create_dir_all(dir).map_err(KdvError::from)?;
        report.initial.save_csv(&dir.join("pre.csv"))?;
        if let Some(post) = &report.post {
            post.save_csv(&dir.join("post.csv"))?;
        }
    }
    emit(&a.out, &to_json_string(&report)?)?;
    Ok(())
}

fn cmd_plot(a: &PlotArgs) -> CmdResult {
    let verdict = run_solver(&a.wave)?;
    let sol = solutions_of(&verdict)?.pop().expect("nonempty");
    let grid = grid_for(&sol, a.grid_n, a.domain_l)?;
    let field = eval_field(&sol, &grid, 0.0)?;
    let header = format!(
        "x eta  ({} order {}, A={}, B={}, v={}, D={})",
        sol.family, sol.order, sol.amplitude, sol.inverse_width, sol.v, sol.offset
    );
    let rows = (0..field.len()).map(|i| (field.x(i), field.samples()[i]));
    emit(&a.wave.out, &plot_data(&header, rows))?;
    Ok(())
}

fn exit_code(e: &KdvError) -> u8 {
    match e {
        KdvError::Usage(_) => 2,
        KdvError::Domain(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Derive(a) => cmd_derive(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::Collision(a) => cmd_collision(a),
        Command::PlotData(a) => cmd_plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Inconsistent(msg)) => {
            eprintln!("kdvlab: {msg}");
            ExitCode::from(4)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("kdvlab: {msg}");
            ExitCode::FAILURE
        }
        Err(Failure::Error(e)) => {
            eprintln!("kdvlab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
