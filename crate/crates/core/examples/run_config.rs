//! Runs an experiment from an INI string and prints its report, as the CLI
//! does from a file.

use incidence_lab::config::ExperimentConfig;
use incidence_lab::experiments::{report_text, run_experiments};

const INI: &str = "\
[run]
experiment = star-bound
seed = 3

[star-bound]
epsilons = 2^-4..2^-6
samples = 4
";

fn main() -> incidence_lab::Result<()> {
    let cfg = ExperimentConfig::from_ini_str(INI, None)?;
    let outcomes = run_experiments(&cfg)?;
    print!("{}", report_text(&cfg, &outcomes));
    Ok(())
}
