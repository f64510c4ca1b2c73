use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use netsdp::cli::{
    bisect_visibility, grid, rows_to_csv, run_solve, scan_grid, RunConfig, SwapAxes, Verdict,
    EPSILON,
};
use netsdp::moment::problem_stats;
use netsdp::par::{configure_threads, Execution};
use netsdp::sdp::write_sdpa;
use netsdp::{Error, LevelSpec, Mode, Scenario};

#[derive(Parser)]
#[command(
    name = "netsdp",
    version,
    about = "Causal compatibility tests for network correlations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Quantum,
    Classical,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Quantum => Mode::Quantum,
            ModeArg::Classical => Mode::Classical,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Scenario file
    #[arg(short = 'c', long = "scenario")]
    scenario: PathBuf,
    /// Level specification file
    #[arg(short = 'l', long = "level")]
    level: PathBuf,
    /// Override the scenario's mode
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Absolute duality-gap tolerance
    #[arg(long, env = "NETSDP_GAP_TOL", default_value_t = 1e-9)]
    gap_tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Incompatibility margin: refuted iff t* < -epsilon
    #[arg(long, default_value_t = EPSILON)]
    epsilon: f64,
    /// Worker threads
    #[arg(long, env = "NETSDP_THREADS")]
    threads: Option<usize>,
    /// Disable data parallelism
    #[arg(long)]
    sequential: bool,
    /// Output file (stdout when absent)
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Single feasibility test; prints a JSON report
    Solve {
        #[command(flatten)]
        common: Common,
        /// Distribution file
        #[arg(short = 'd', long = "distribution")]
        distribution: PathBuf,
        /// Visibility override for the P22 family
        #[arg(long = "v")]
        visibility: Option<f64>,
    },
    /// Bisection on the visibility of the P22 family
    ScanVisibility {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'd', long = "distribution")]
        distribution: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 1.0)]
        hi: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Grid scan over lossy entanglement-swapping parameters; prints CSV
    ScanEfficiency {
        #[command(flatten)]
        common: Common,
        /// Axes file
        #[arg(short = 'g', long = "grid")]
        grid: PathBuf,
    },
    /// Writes the instantiated program in SDPA sparse format
    ExportSdpa {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'd', long = "distribution")]
        distribution: PathBuf,
        #[arg(long = "v")]
        visibility: Option<f64>,
    },
    /// Moment-matrix statistics
    Stats {
        #[command(flatten)]
        common: Common,
    },
}

fn config(common: &Common, distribution: &Path, v: Option<f64>) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::load(
        &common.scenario,
        &common.level,
        distribution,
        common.mode.map(Mode::from),
    )?;
    if let Some(v) = v {
        cfg.distribution = cfg.distribution.with_visibility(v)?;
    }
    cfg.solver.gap_tol = common.gap_tol;
    cfg.solver.max_iter = common.max_iter;
    cfg.solver.exec = exec(common);
    cfg.epsilon = common.epsilon;
    Ok(cfg)
}

fn exec(common: &Common) -> Execution {
    if common.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn emit(common: &Common, text: &str) -> Result<(), Error> {
    match &common.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> Result<String, Error> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Solve {
            common,
            distribution,
            visibility,
        } => {
            configure_threads(common.threads);
            let cfg = config(&common, &distribution, visibility)?;
            let out = run_solve(&cfg)?;
            emit(&common, &pretty(&out)?)?;
            if out.verdict == Verdict::Inconclusive {
                return Ok(ExitCode::from(2));
            }
        }
        Command::ScanVisibility {
            common,
            distribution,
            lo,
            hi,
            tol,
        } => {
            configure_threads(common.threads);
            let cfg = config(&common, &distribution, None)?;
            let program = cfg.program()?;
            let family = |v: f64| cfg.distribution.with_visibility(v)?.build(&cfg.base_dir);
            let b = bisect_visibility(&program, family, lo, hi, tol, &cfg.solver, cfg.epsilon)?;
            let report = json!({
                "threshold": b.threshold,
                "lo": b.lo,
                "hi": b.hi,
                "tol": b.tol,
                "evaluations": b.evaluations,
                "config_echo": cfg.config_echo(),
            });
            emit(&common, &pretty(&report)?)?;
        }
        Command::ScanEfficiency { common, grid: path } => {
            configure_threads(common.threads);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let axes: SwapAxes = serde_json::from_str(&text)?;
            let mut scenario = Scenario::load(&common.scenario)?;
            if let Some(m) = common.mode {
                scenario = scenario.with_mode(m.into());
            }
            let level = LevelSpec::load(&common.level)?;
            let program = netsdp::cli::Program::new(scenario, &level, exec(&common))?;
            let opts = netsdp::SolveOptions {
                gap_tol: common.gap_tol,
                max_iter: common.max_iter,
                exec: exec(&common),
                ..Default::default()
            };
            let rows = scan_grid(&program, &grid(&axes), &opts, common.epsilon, exec(&common));
            emit(&common, &rows_to_csv(&rows)?)?;
        }
        Command::ExportSdpa {
            common,
            distribution,
            visibility,
        } => {
            let cfg = config(&common, &distribution, visibility)?;
            let program = cfg.program()?;
            let problem = program.instantiate(&cfg.distribution()?)?.to_sdp()?;
            emit(&common, &write_sdpa(&problem))?;
        }
        Command::Stats { common } => {
            configure_threads(common.threads);
            let mut scenario = Scenario::load(&common.scenario)?;
            if let Some(m) = common.mode {
                scenario = scenario.with_mode(m.into());
            }
            let level = LevelSpec::load(&common.level)?;
            let program = netsdp::cli::Program::new(scenario, &level, exec(&common))?;
            let s = problem_stats(&program.symbolic);
            let report = json!({
                "dimension": s.dimension,
                "variables": s.variables,
                "structural_zeros": s.structural_zeros,
            });
            emit(&common, &pretty(&report)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Numerical(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
