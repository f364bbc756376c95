use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hifie::FactorScheme;
use hifie_cli::{emit_report, run_experiment, write_report, CliError, Example, ExperimentConfig, Format, Oracle, Side};

/// Factor a kernel matrix with rskelf / hifie / hifie_x and report timings,
/// storage, accuracy and preconditioned GMRES iterations.
#[derive(Parser, Debug)]
#[command(name = "hifie", version)]
struct Args {
    /// TOML config file; flags override its values.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// ex1 | ex2 | ex3 | ex5 | ex6 | custom
    #[arg(long)]
    example: Option<Example>,
    /// Points per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    eps: Option<f64>,
    /// rskelf | hifie | hifie_x, comma separated.
    #[arg(long, value_delimiter = ',')]
    scheme: Option<Vec<FactorScheme>>,
    /// dense | fft | none
    #[arg(long)]
    oracle: Option<Oracle>,
    #[arg(long)]
    seed: Option<u64>,
    /// Level tags to skip, e.g. 1/2,3/2.
    #[arg(long, value_delimiter = ',')]
    skip: Option<Vec<String>>,
    /// Output file; defaults to $HIFIE_OUT_DIR/<example>.<format>, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    threads: Option<usize>,
    /// left | right
    #[arg(long)]
    precond_side: Option<Side>,
    /// Target points per leaf box.
    #[arg(long)]
    occupancy: Option<usize>,
    /// Wavelengths across the domain (ex3).
    #[arg(long)]
    kappa: Option<f64>,
    /// Print the merged config as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

impl Args {
    fn into_config(self) -> Result<(ExperimentConfig, bool), CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {$(
                if let Some(v) = self.$field {
                    cfg.$target = v;
                }
            )*};
        }
        set!(example => example, n => n, eps => eps, scheme => schemes, oracle => oracle, seed => seed,
             skip => skip, format => format, precond_side => precond_side, kappa => kappa);
        if self.out.is_some() {
            cfg.out = self.out;
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        if self.occupancy.is_some() {
            cfg.occupancy = self.occupancy;
        }
        Ok((cfg, self.print_config))
    }
}

fn run(args: Args) -> Result<(), CliError> {
    let (cfg, print_only) = args.into_config()?;
    if print_only {
        print!("{}", cfg.to_toml_string());
        return Ok(());
    }
    let rows = run_experiment(&cfg)?;
    match cfg.output_path() {
        Some(path) => {
            emit_report(&rows, cfg.format, &cfg, &path)?;
            log::info!("wrote {}", path.display());
        }
        None => write_report(&rows, cfg.format, &cfg, std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
