use clap::{Parser, Subcommand};
use dualhop::cli::{
    cmd_tables, cmd_validate, parse_config, run_sweep, write_csv, MetricKind, ScenarioConfig, SweepMethod, SweepSpec,
    ValidationBudget,
};
use dualhop::Error;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

/// Thread-count override for the worker pool.
const THREADS_ENV: &str = "DUALHOP_THREADS";

#[derive(Parser)]
#[command(name = "dualhop", version, about = "Dual-hop mixed FSO/mmWave relay link analysis")]
struct Cli {
    /// Scenario file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (CSV) or directory (tables); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count override.
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Average SNR in dB (eval point; validate points when repeated).
    #[arg(long = "snr-db", global = true, allow_negative_numbers = true)]
    snr_db: Vec<f64>,
    /// Suppress the run header.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// All configured metrics and methods at one SNR.
    Eval,
    /// The configured SNR sweep.
    Sweep {
        /// Comma-separated metric override (outage,ber,capacity,effcap).
        #[arg(long)]
        metrics: Option<String>,
        /// Comma-separated method override (exact,asymptotic,oracle,mc).
        #[arg(long)]
        methods: Option<String>,
    },
    /// Recompute truncation tables 1, 2 and 3.
    Tables {
        /// Single table to print.
        #[arg(long)]
        which: Option<u8>,
    },
    /// Exact vs oracle vs Monte Carlo consistency report.
    Validate,
}

enum Fail {
    Validation(String),
    Config(String),
    Numerical(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::Parse { .. } | Error::Parameter(_) => Fail::Config(e.to_string()),
            o => Fail::Numerical(o.to_string()),
        }
    }
}

fn load(cli: &Cli) -> Result<ScenarioConfig, Fail> {
    let path = cli.config.as_ref().ok_or_else(|| Fail::Config("--config is required for this command".into()))?;
    let mut cfg = parse_config(path)?;
    if let Some(s) = cli.seed {
        cfg.mc.seed = s;
    }
    if let Some(n) = cli.samples {
        cfg.mc.samples = n;
        cfg.mc.validate().map_err(|e| Fail::Config(format!("--samples: {e}")))?;
    }
    if let Some(&s) = cli.snr_db.first() {
        cfg.snr_db = s;
    }
    if !cli.quiet {
        eprintln!("# dualhop {}", env!("CARGO_PKG_VERSION"));
        eprintln!("# threads = {}", rayon::current_num_threads());
        for line in cfg.describe() {
            eprintln!("# {line}");
        }
    }
    Ok(cfg)
}

fn parse_list<T>(s: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, Fail> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| f(x).ok_or_else(|| Fail::Config(format!("unknown {what} `{x}`"))))
        .collect()
}

fn emit(cli: &Cli, text: &[u8]) -> Result<(), Fail> {
    match &cli.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Fail::Config(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text).map_err(|e| Fail::Numerical(e.to_string())),
    }
}

fn sweep(cli: &Cli, cfg: &ScenarioConfig, spec: &SweepSpec) -> Result<(), Fail> {
    let out = run_sweep(cfg, spec)?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &out.rows)?;
    emit(cli, &buf)?;
    for f in &out.failures {
        eprintln!("error at {} dB, {}/{}: {}", f.snr_db, f.metric, f.method.as_str(), f.error);
    }
    if out.failures.is_empty() {
        Ok(())
    } else {
        Err(Fail::Numerical(format!("{} grid points failed", out.failures.len())))
    }
}

fn run(cli: &Cli) -> Result<(), Fail> {
    match &cli.cmd {
        Cmd::Eval => {
            let cfg = load(cli)?;
            let spec = SweepSpec {
                snr_db_start: cfg.snr_db,
                snr_db_stop: cfg.snr_db + 1.0,
                snr_db_step: 2.0,
                ..cfg.sweep.clone()
            };
            sweep(cli, &cfg, &spec)
        }
        Cmd::Sweep { metrics, methods } => {
            let cfg = load(cli)?;
            let mut spec = cfg.sweep.clone();
            if let Some(m) = metrics {
                spec.metrics = parse_list(m, "metric", MetricKind::parse)?;
            }
            if let Some(m) = methods {
                spec.methods = parse_list(m, "method", SweepMethod::parse)?;
            }
            sweep(cli, &cfg, &spec)
        }
        Cmd::Tables { which } => {
            let list: Vec<u8> = which.map_or(vec![1, 2, 3], |w| vec![w]);
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir).map_err(|e| Fail::Config(format!("{}: {e}", dir.display())))?;
            }
            for w in list {
                let t = cmd_tables(w)?;
                print!("{}", t.render());
                if let Some(dir) = &cli.out {
                    let p = dir.join(format!("table{w}.csv"));
                    std::fs::write(&p, t.to_csv()).map_err(|e| Fail::Config(format!("{}: {e}", p.display())))?;
                }
            }
            Ok(())
        }
        Cmd::Validate => {
            let cfg = load(cli)?;
            let mut budget = ValidationBudget::for_config(&cfg);
            if !cli.snr_db.is_empty() {
                budget.snr_db = cli.snr_db.clone();
            }
            let report = cmd_validate(&cfg, &budget);
            let text = report.render();
            emit(cli, text.as_bytes())?;
            if report.passed() {
                Ok(())
            } else if report.failures().count() > 0 {
                Err(Fail::Validation(format!("{} checks failed", report.failures().count())))
            } else {
                Err(Fail::Numerical(format!("{} evaluations failed", report.errors.len())))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got `{v}`");
                return ExitCode::from(2);
            }
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Validation(m)) => {
            eprintln!("validation failed: {m}");
            ExitCode::from(1)
        }
        Err(Fail::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Fail::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
