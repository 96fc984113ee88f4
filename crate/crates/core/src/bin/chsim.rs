use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chsim::harness::config::parse_kv;
use chsim::harness::{self, emit, ExperimentConfig, ExperimentId, Format, SchemeId};
use chsim::metrics::RhoInterp;
use chsim::ode::Tolerances;
use chsim::{Error, Result};

#[derive(Parser)]
#[command(name = "chsim", version, about = "Camassa-Holm discretizations and convergence sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence sweep and write one row per grid size.
    Run(RunArgs),
    /// Print experiments and the schemes each accepts.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    kmin: Option<u32>,
    #[arg(long)]
    kmax: Option<u32>,
    #[arg(long)]
    abstol: Option<f64>,
    #[arg(long)]
    reltol: Option<f64>,
    #[arg(long)]
    k0: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    shifted_grid: bool,
    /// Density reconstruction for lp2ch: constant or linear.
    #[arg(long)]
    rho_interp: Option<String>,
    /// Timing repetitions (median reported).
    #[arg(long)]
    repeats: Option<usize>,
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| Error::Parse(format!("{key}: {e}")))
}

fn build_config(a: RunArgs) -> Result<ExperimentConfig> {
    let mut file = match &a.config {
        Some(p) => parse_kv(&std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?)?,
        None => Default::default(),
    };
    let mut pick = |key: &str, flag: Option<String>| {
        let from_file = file.remove(key);
        flag.or(from_file)
    };
    let experiment = pick("experiment", a.experiment).ok_or_else(|| Error::Parse("missing --experiment".into()))?;
    let scheme = pick("scheme", a.scheme).ok_or_else(|| Error::Parse("missing --scheme".into()))?;
    let kmin = pick("kmin", a.kmin.map(|v| v.to_string()));
    let kmax = pick("kmax", a.kmax.map(|v| v.to_string()));
    let abstol = pick("abstol", a.abstol.map(|v| v.to_string()));
    let reltol = pick("reltol", a.reltol.map(|v| v.to_string()));
    let k0 = pick("k0", a.k0.map(|v| v.to_string()));
    let out = pick("out", a.out.map(|p| p.display().to_string()));
    let format = pick("format", a.format);
    let shifted = pick("shifted-grid", a.shifted_grid.then(|| "true".to_string()));
    let rho = pick("rho-interp", a.rho_interp);
    let repeats = pick("repeats", a.repeats.map(|v| v.to_string()));
    if let Some(k) = file.keys().next() {
        return Err(Error::Parse(format!("unknown config key '{k}'")));
    }

    let mut cfg = ExperimentConfig::new(experiment.parse::<ExperimentId>()?, scheme.parse::<SchemeId>()?);
    if let Some(v) = kmin {
        cfg.kmin = parse("kmin", &v)?;
    }
    if let Some(v) = kmax {
        cfg.kmax = parse("kmax", &v)?;
    }
    let abs = abstol.map(|v| parse::<f64>("abstol", &v)).transpose()?.unwrap_or(cfg.tol.abs_tol);
    let rel = reltol.map(|v| parse::<f64>("reltol", &v)).transpose()?.unwrap_or(cfg.tol.rel_tol);
    cfg.tol = Tolerances::new(abs, rel)?;
    cfg.k0 = match k0 {
        Some(v) => parse("k0", &v)?,
        None => cfg.kmax + 2,
    };
    cfg.out = Some(PathBuf::from(out.ok_or_else(|| Error::Parse("missing --out".into()))?));
    if let Some(v) = format {
        cfg.format = v.parse::<Format>()?;
    }
    if let Some(v) = shifted {
        cfg.shifted = parse("shifted-grid", &v)?;
    }
    cfg.rho_interp = match rho.as_deref() {
        None => None,
        Some("constant") => Some(RhoInterp::Constant),
        Some("linear") => Some(RhoInterp::Linear),
        Some(other) => return Err(Error::Parse(format!("rho-interp: unknown mode '{other}'"))),
    };
    if let Some(v) = repeats {
        cfg.repeats = parse("repeats", &v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn list() {
    for e in ExperimentId::ALL {
        let schemes: Vec<&str> = e.schemes().into_iter().map(|s| s.as_str()).collect();
        println!("{:<18} {:<34} {}", e.as_str(), schemes.join(","), e.description());
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::List => {
            list();
            ExitCode::SUCCESS
        }
        Command::Run(args) => {
            let cfg = match build_config(args) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("chsim: {e}");
                    return ExitCode::from(1);
                }
            };
            let rows = match harness::run(&cfg) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("chsim: {e}");
                    return ExitCode::from(2);
                }
            };
            let path = cfg.out.as_deref().expect("validated");
            if let Err(e) = emit(&rows, cfg.format, path) {
                eprintln!("chsim: {e}");
                return ExitCode::from(2);
            }
            let failed: Vec<_> = rows.iter().filter(|r| r.failure.is_some()).collect();
            for r in &failed {
                eprintln!("chsim: n = {} failed: {}", r.n, r.failure.as_deref().unwrap_or(""));
            }
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
    }
}
