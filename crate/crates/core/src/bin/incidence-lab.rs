use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use incidence_lab::config::{Experiment, ExperimentConfig};
use incidence_lab::experiments::{report_text, run};
use incidence_lab::sobolev::function_of_kind;
use incidence_lab::LabError;

/// Runs a named incidence / Heisenberg experiment and writes CSV, JSON and a report.
///
/// Exit status: 0 when every check passes, 1 on an invariant violation,
/// 2 on a configuration error. `LAB_THREADS` sets the worker count.
#[derive(Parser, Debug)]
#[command(name = "incidence-lab", version)]
struct Cli {
    /// incidence-sweep, rich-points, duality-check, star-bound, lw-sweep,
    /// tube-volume, sobolev-check, isoperimetric, reduce-pipeline or verify-all
    experiment: String,
    /// INI configuration file; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `[run] out`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root seed (overrides `[run] seed`)
    #[arg(long)]
    seed: Option<u64>,
    /// Cross-check bucketed incidence counts against the naive engine
    #[arg(long)]
    verify: bool,
    /// sobolev-check only: function kind (bump, aniso_bump, sheared_bump, koranyi_bump, smoothed_box)
    #[arg(long, requires = "width")]
    function: Option<String>,
    /// sobolev-check only: width of `--function`
    #[arg(long, requires = "function")]
    width: Option<f64>,
    /// sobolev-check only: grid spacing
    #[arg(long = "h")]
    h: Option<f64>,
}

fn configure(cli: &Cli) -> Result<ExperimentConfig, LabError> {
    let exp = Experiment::parse(&cli.experiment)?;
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path, Some(exp))?,
        None => ExperimentConfig::new(exp),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.verify |= cli.verify;
    if cli.function.is_some() || cli.h.is_some() {
        if exp != Experiment::SobolevCheck {
            return Err(LabError::Config(
                "--function, --width and --h apply to sobolev-check only".into(),
            ));
        }
        let p = cfg.params_mut(Experiment::SobolevCheck);
        if let (Some(kind), Some(width)) = (&cli.function, cli.width) {
            function_of_kind(kind, width).map_err(|e| LabError::Config(e.to_string()))?;
            p.functions = vec![format!("{kind}:{width}")];
        }
        if let Some(h) = cli.h {
            p.hs = vec![h];
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var("LAB_THREADS") {
        match n.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: LAB_THREADS: {e}");
                    return ExitCode::from(2);
                }
            }
            _ => {
                eprintln!("error: LAB_THREADS must be a positive integer, got '{n}'");
                return ExitCode::from(2);
            }
        }
    }
    let cfg = match configure(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(report) => {
            print!("{}", report_text(&cfg, &report.outcomes));
            println!("\nwrote {} files to {}", report.files.len(), cfg.out_dir.display());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e @ LabError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
