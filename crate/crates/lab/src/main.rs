use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use holderlab::{emit_report, run_experiment, Experiment, ExperimentConfig, Format, Overrides, SetKind};

/// Runs one experiment and prints its aggregate statistics.
///
/// Exit status: 0 when every banded statistic passes, 1 when one fails,
/// 2 on usage or parameter errors.
#[derive(Debug, Parser)]
#[command(name = "lab", version)]
struct Cli {
    experiment: Experiment,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    paths: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the CSV tables and the JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
    /// JSON file with any configuration field; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum)]
    set: Option<SetKind>,
    #[arg(long)]
    resolution: Option<u32>,
    #[arg(long)]
    compare_n: Option<u32>,
    #[arg(long)]
    cap: Option<u64>,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    window: Option<Vec<f64>>,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            experiment: None,
            seed: self.seed,
            alpha: self.alpha,
            n: self.n,
            paths: self.paths,
            samples: self.samples,
            k: self.k,
            m: self.m,
            beta: self.beta.clone(),
            gamma: self.gamma,
            set: self.set,
            resolution: self.resolution,
            compare_n: self.compare_n,
            cap: self.cap,
            window: self.window.as_ref().map(|w| [w[0], w[1]]),
            threads: self.threads,
            out: self.out.clone(),
            bands: None,
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let file = match &cli.config {
        Some(path) => Overrides::from_file(path)?,
        None => Overrides::default(),
    };
    let cfg = ExperimentConfig::resolve(cli.experiment, &file, &cli.overrides())?;
    let report = run_experiment(&cfg)?;
    print!("{}", String::from_utf8(emit_report(&report, Format::Csv)?)?);
    for name in report.unmatched_bands() {
        eprintln!("warning: band `{name}` matches no statistic");
    }
    eprintln!("{}: {} in {:.2}s", cfg.experiment, if report.pass { "pass" } else { "FAIL" }, report.wall_clock_seconds);
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
