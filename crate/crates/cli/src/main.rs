use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use turbodetect_cli::{Pipeline, PipelineConfig, PipelineError, Report, Stage};

/// Moving-object detection in turbulent image sequences.
#[derive(Parser)]
#[command(name = "turbodetect", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic turbulent sequence with ground-truth masks.
    Synth(Common),
    /// Estimate frame-to-frame flow.
    Flow(Common),
    /// Split the raw flow into geometric (u) and oscillatory (v) parts.
    Decompose(Common),
    /// Threshold raw and u flows; run the background-subtraction baseline.
    Detect(Common),
    /// Score the masks against ground truth and write the report.
    Evaluate(Common),
    /// All stages end to end.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// key = value configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for synthetic input.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: TURBODETECT_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
    /// Override a configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn config_error(e: turbodetect::Error) -> PipelineError {
    PipelineError { stage: Stage::Config, source: e }
}

fn load_config(c: &Common) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = match &c.config {
        Some(p) => PipelineConfig::from_file(p).map_err(config_error)?,
        None => PipelineConfig::default(),
    };
    for o in &c.overrides {
        cfg.apply_override(o).map_err(config_error)?;
    }
    if let Some(seed) = c.seed {
        cfg.set_seed(seed);
    }
    if let Some(out) = &c.output {
        cfg.output = out.clone();
    }
    Ok(cfg)
}

fn thread_count(c: &Common) -> Result<Option<usize>, PipelineError> {
    if let Some(n) = c.threads {
        return Ok(Some(n));
    }
    match std::env::var("TURBODETECT_THREADS") {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            config_error(turbodetect::Error::Config(format!("TURBODETECT_THREADS must be a count, got '{s}'")))
        }),
        Err(_) => Ok(None),
    }
}

fn print_report(r: &Report) {
    print!("{}", r.to_text());
}

fn execute(command: Command) -> Result<(), PipelineError> {
    let (Command::Synth(c)
    | Command::Flow(c)
    | Command::Decompose(c)
    | Command::Detect(c)
    | Command::Evaluate(c)
    | Command::Run(c)) = &command;
    if let Some(n) = thread_count(c)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| config_error(turbodetect::Error::Config(format!("cannot start {n} threads: {e}"))))?;
    }
    let mut p = Pipeline::new(load_config(c)?)?;
    match command {
        Command::Synth(_) => {
            p.synth()?;
        }
        Command::Flow(_) => {
            p.resume_flow()?;
        }
        Command::Decompose(_) => {
            let d = p.resume_decompose()?;
            println!("iterations = {}\nfinal_delta = {:.6e}", d.report.iterations_run, d.report.final_delta);
        }
        Command::Detect(_) => {
            p.resume_detect()?;
        }
        Command::Evaluate(_) => print_report(&p.resume_evaluate()?),
        Command::Run(_) => print_report(&p.run()?),
    }
    eprintln!("outputs in {}", p.output_dir().display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("turbodetect: {e}");
            ExitCode::FAILURE
        }
    }
}
