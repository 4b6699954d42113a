use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rmhd_core::{
    convergence_study, parse_config, preset, run, to_config, write_convergence_csv, write_csv, Error, Result, RunMode,
    RunOptions, Scenario, StepRecord, StepRule, PRESETS,
};

#[derive(Parser)]
#[command(name = "rmhd", version, about = "Slab radiation-MHD solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Advance one scenario and write CSV frames.
    Run(RunArgs),
    /// Self-convergence study over a list of resolutions.
    Converge(ConvergeArgs),
    /// List the built-in scenarios, or print one as a config file.
    Presets {
        #[arg(long, value_name = "NAME")]
        dump: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// Preset name or path to a config file.
    #[arg(long)]
    scenario: String,
    /// Time step as a multiple of dx.
    #[arg(long, conflicts_with = "dt")]
    cfl: Option<f64>,
    /// Fixed time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Overrides eps of a regime-scaled scenario.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<RunMode>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    nx: usize,
    #[arg(long)]
    t_end: f64,
    /// CSV of the final frame; other frames go next to it as `<stem>_t<time>.csv`.
    #[arg(long)]
    out: PathBuf,
    /// Extra output times.
    #[arg(long, value_delimiter = ',')]
    frames: Vec<f64>,
    /// Per-step record CSV (iterations and Q-constraint norms).
    #[arg(long)]
    steps: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', required = true)]
    nx_list: Vec<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_mode(s: &str) -> std::result::Result<RunMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load(name: &str) -> Result<rmhd_core::ScenarioSpec> {
    if PRESETS.contains(&name) {
        return preset(name);
    }
    let path = Path::new(name);
    if path.is_file() || name.contains(std::path::MAIN_SEPARATOR) {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        return parse_config(&text);
    }
    preset(name)
}

fn scenario(c: &Common) -> Result<(Scenario, RunOptions)> {
    let mut spec = load(&c.scenario)?;
    if let Some(eps) = c.eps {
        spec = spec.with_eps(eps)?;
    }
    let sc = spec.resolve()?;
    let mut opts = RunOptions::new(0);
    opts.mode = c.mode;
    opts.step = match (c.cfl, c.dt) {
        (Some(k), _) => Some(StepRule::Cfl(k)),
        (_, Some(dt)) => Some(StepRule::Fixed(dt / sc.time_unit())),
        _ => None,
    };
    Ok((sc, opts))
}

fn frame_path(out: &Path, time: f64) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    out.with_file_name(format!("{stem}_t{time:?}.{ext}"))
}

fn write_steps(steps: &[StepRecord], path: &Path) -> Result<()> {
    let mut text =
        String::from("step,time,dt,iterations,q_mean_norm,q_flux_norm,j_norm,sweep_q_mean_norm,sweep_q_flux_norm\n");
    for s in steps {
        text.push_str(&format!(
            "{},{:?},{:?},{},{:?},{:?},{:?},{:?},{:?}\n",
            s.step,
            s.time,
            s.dt,
            s.iterations,
            s.q_mean_norm,
            s.q_flux_norm,
            s.j_norm,
            s.sweep_q_mean_norm,
            s.sweep_q_flux_norm
        ));
    }
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.into(), source })
}

fn cmd_run(a: RunArgs) -> Result<serde_json::Value> {
    let (sc, mut opts) = scenario(&a.common)?;
    // command-line times are in the scenario's own units
    let unit = sc.time_unit();
    opts.nx = a.nx;
    opts.t_end = Some(a.t_end / unit);
    opts.frames = a.frames.iter().map(|t| t / unit).collect();
    let out = run(&sc, &opts)?;
    let mut written = Vec::new();
    let last = out.frames.len() - 1;
    for (k, f) in out.frames.iter().enumerate() {
        let shown = a.frames.iter().copied().find(|t| t / unit == f.time).unwrap_or(f.time * unit);
        let path = if k == last { a.out.clone() } else { frame_path(&a.out, shown) };
        write_csv(f, &path)?;
        written.push(path.display().to_string());
    }
    if let Some(p) = &a.steps {
        write_steps(&out.steps, p)?;
    }
    let max_iter = out.steps.iter().map(|s| s.iterations).max().unwrap_or(0);
    Ok(json!({
        "status": "ok",
        "scenario": sc.spec.name,
        "mode": out.mode.as_str(),
        "nx": a.nx,
        "dt": out.dt * unit,
        "steps": out.steps.len(),
        "max_iterations": max_iter,
        "steady_at": out.steady_at.map(|t| t * unit),
        "frames": written,
    }))
}

fn cmd_converge(a: ConvergeArgs) -> Result<serde_json::Value> {
    let (sc, mut opts) = scenario(&a.common)?;
    opts.t_end = a.t_end.map(|t| t / sc.time_unit());
    let rows = convergence_study(&sc, &a.nx_list, &opts)?;
    write_convergence_csv(&rows, &a.out)?;
    let orders: Vec<_> = rows.iter().filter_map(|r| r.orders.map(|o| o.values().to_vec())).collect();
    Ok(json!({
        "status": "ok",
        "scenario": sc.spec.name,
        "nx": a.nx_list,
        "orders": orders,
        "report": a.out.display().to_string(),
    }))
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("RMHD_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("RMHD_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot size the worker pool: {e}")))
}

fn error_line(kind: &str, message: String) -> ExitCode {
    eprintln!("{}", json!({ "status": "error", "kind": kind, "message": message }));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return error_line("usage", e.to_string().trim().to_string()),
    };
    if let Err(e) = configure_threads() {
        return error_line(e.kind(), e.to_string());
    }
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Presets { dump: None } => {
            for p in PRESETS {
                println!("{p}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Presets { dump: Some(name) } => match preset(&name) {
            Ok(spec) => {
                print!("{}", to_config(&spec));
                return ExitCode::SUCCESS;
            }
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::debug!("{e:?}");
            error_line(e.kind(), e.to_string())
        }
    }
}
