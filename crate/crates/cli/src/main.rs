use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qbattery::oracle::power_constant;
use qbattery::runner::{read_csv, run_sweep, sweep_rows, write_csv_to, ResultRow, SweepConfig};
use qbattery::{fit_power_law, Error, ModelKind, NumericsConfig, Side};

const EPSILON_SWEEP: [f64; 3] = [1e-4, 1e-3, 1e-2];

#[derive(Parser)]
#[command(name = "qbattery", version, about = "Charger-battery simulations and sweeps")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Output CSV (a manifest is written next to it).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    omega0: Option<f64>,
    /// Polar tilt of classical spins, in radians.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a TOML file.
    Run { config: PathBuf },
    /// Collective advantage at one N.
    Gamma {
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        side: Side,
        #[arg(long = "N")]
        n: usize,
        /// Coupling in units of omega0.
        #[arg(long)]
        g: f64,
    },
    /// Quantum/classical ratio at one N.
    Ratio {
        #[arg(long)]
        model: ModelKind,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        g: f64,
        /// Repeat over epsilon in {1e-4, 1e-3, 1e-2} and report the spread.
        #[arg(long)]
        epsilon_sweep: bool,
    },
    /// Fit gamma = c N^alpha to rows of a results CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        side: Side,
        /// Only use rows at this coupling.
        #[arg(long)]
        g: Option<f64>,
        /// Smallest N entering the fit.
        #[arg(long, default_value_t = 8)]
        min_n: usize,
    },
    /// Print the harmonic power constant.
    Oracle,
}

enum Failure {
    Config(String),
    Rows(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn single_point(global: &Global, models: ModelKind, sides: Vec<Side>, n: usize, g: f64, eps: Vec<f64>) -> SweepConfig {
    SweepConfig {
        models: vec![models],
        sides,
        n: vec![n],
        g: vec![g],
        epsilon: eps,
        omega0: global.omega0.unwrap_or(1.0),
        cutoff: None,
        output: global.out.clone().unwrap_or_default(),
        workers: global.workers,
        record_wall_time: false,
        numerics: NumericsConfig::default(),
    }
}

/// Writes rows to `--out` (with manifest) or stdout.
fn emit(global: &Global, config: &SweepConfig) -> Result<Vec<ResultRow>, Failure> {
    let rows = if global.out.is_some() {
        let report = run_sweep(config)?;
        eprintln!("wrote {} and {}", report.csv_path.display(), report.manifest_path.display());
        report.rows
    } else {
        let rows = sweep_rows(config)?;
        write_csv_to(io::stdout().lock(), &rows)?;
        rows
    };
    let failures = rows.iter().filter(|r| !r.is_ok()).count();
    if failures > 0 {
        return Err(Failure::Rows(failures));
    }
    Ok(rows)
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let global = &cli.global;
    let eps = vec![global.epsilon.unwrap_or(qbattery::model::DEFAULT_EPSILON)];
    match cli.command {
        Command::Run { config } => {
            let mut config = SweepConfig::from_file(&config)?;
            if let Some(out) = &global.out {
                config.output = out.clone();
            }
            if global.workers.is_some() {
                config.workers = global.workers;
            }
            if let Some(w) = global.omega0 {
                config.omega0 = w;
            }
            if let Some(e) = global.epsilon {
                config.epsilon = vec![e];
            }
            config.validate()?;
            let report = run_sweep(&config)?;
            let failures = report.failures();
            println!(
                "{} row(s) -> {} ({} failed)",
                report.rows.len(),
                report.csv_path.display(),
                failures
            );
            if failures > 0 {
                return Err(Failure::Rows(failures));
            }
        }
        Command::Gamma { model, side, n, g } => {
            emit(global, &single_point(global, model, vec![side], n, g, eps))?;
        }
        Command::Ratio { model, n, g, epsilon_sweep } => {
            let eps = if epsilon_sweep { EPSILON_SWEEP.to_vec() } else { eps };
            let sides = vec![Side::Quantum, Side::Classical];
            let rows = emit(global, &single_point(global, model, sides, n, g, eps))?;
            let ratios: Vec<f64> = rows
                .iter()
                .filter(|r| r.side == Side::Quantum)
                .filter_map(|r| r.ratio)
                .collect();
            if epsilon_sweep && !ratios.is_empty() {
                let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                eprintln!("R over epsilon: min {lo} max {hi} spread {}", hi - lo);
            }
        }
        Command::Fit { input, model, side, g, min_n } => {
            let records = read_csv(&input)?;
            let mut points = Vec::new();
            for r in &records {
                let field = |name: &str| {
                    let i = qbattery::runner::CSV_HEADER.iter().position(|h| *h == name).unwrap();
                    r.get(i).unwrap_or("")
                };
                let parse = |name: &str| field(name).parse::<f64>().ok();
                let matches = field("model") == model.name()
                    && field("side") == side.name()
                    && field("status") == "ok"
                    && g.is_none_or(|g| parse("g_over_omega0") == Some(g));
                if let (true, Some(n), Some(gamma)) = (matches, parse("N"), parse("gamma")) {
                    if n >= min_n as f64 {
                        points.push((n, gamma));
                    }
                }
            }
            let fit = fit_power_law(&points)?;
            println!("alpha = {}", fit.alpha);
            println!("prefactor = {}", fit.prefactor);
            println!("rms_residual = {}", fit.rms_residual);
            println!("points = {}", points.len());
        }
        Command::Oracle => {
            let pc = power_constant();
            println!("x_star = {}", pc.x_star);
            println!("Y = {}", pc.y);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("qbattery: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Rows(n)) => {
            eprintln!("{n} row(s) failed");
            ExitCode::from(2)
        }
    }
}
