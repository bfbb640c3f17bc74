use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use optbench::{experiments, CliError, ConfigFile, Experiment, Overrides, Preset, Settings};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    VerifyConditions,
    DeltaRatio,
    Histograms,
    Matfac,
    SmoothRate,
    Run,
}

impl From<Cmd> for Experiment {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::VerifyConditions => Experiment::VerifyConditions,
            Cmd::DeltaRatio => Experiment::DeltaRatio,
            Cmd::Histograms => Experiment::Histograms,
            Cmd::Matfac => Experiment::Matfac,
            Cmd::SmoothRate => Experiment::SmoothRate,
            Cmd::Run => Experiment::Run,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    Desk,
    Paper,
}

/// Continuized momentum experiments.
#[derive(Debug, Parser)]
#[command(name = "optbench", version)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Cmd,
    /// Flat TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Constant of the A_n event.
    #[arg(long = "C")]
    c: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
}

fn main_inner(args: Args) -> Result<(), CliError> {
    let file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let overrides = Overrides {
        n: args.n,
        trials: args.trials,
        seed: args.seed,
        c: args.c,
        alpha: args.alpha,
        out_dir: args.out_dir,
        preset: args.preset.map(|p| match p {
            PresetArg::Desk => Preset::Desk,
            PresetArg::Paper => Preset::Paper,
        }),
    };
    let settings = Settings::resolve(args.experiment.into(), file, overrides)?;
    let outcome = experiments::execute(&settings)?;
    let paths = outcome.write_all(&settings.out_dir)?;
    for (k, v) in &outcome.summary.entries {
        println!("{k} = {v}");
    }
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match main_inner(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("optbench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
