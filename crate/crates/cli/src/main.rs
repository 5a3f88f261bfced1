use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use halpern_vr::harness::{self, ExperimentConfig};
use halpern_vr::Error;

const THREADS_VAR: &str = "HALPERN_VR_THREADS";

#[derive(Parser)]
#[command(name = "halpern-vr", version, about = "Variance-reduced Halpern solvers and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one problem for every seed and write a trace CSV.
    Run(Box<RunArgs>),
    /// Plot residual against epochs from one or more trace CSVs.
    Plot {
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` file applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// matrix-game | ouyang-xu | synthetic | synthetic-monotone | synthetic-strongly-monotone
    #[arg(long)]
    problem: Option<String>,
    /// vr-halpern | inexact-halpern | vr-forb | eg
    #[arg(long)]
    algorithm: Option<String>,
    /// Components of a synthetic instance.
    #[arg(long)]
    n: Option<String>,
    /// Size of the matrix game or quadratic program.
    #[arg(long)]
    m: Option<String>,
    /// Dimension of a synthetic instance.
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    /// L of the synthetic cocoercive instance, mu of the strongly monotone one.
    #[arg(long)]
    modulus: Option<String>,
    #[arg(long)]
    problem_seed: Option<String>,
    /// First algorithm seed.
    #[arg(long)]
    seed: Option<String>,
    /// Number of consecutive seeds.
    #[arg(long)]
    seeds: Option<String>,
    /// Oracle budget in epochs.
    #[arg(long)]
    epochs: Option<String>,
    /// Outer step (halpern variants); `none` restores the default.
    #[arg(long)]
    eta: Option<String>,
    /// Inner or extragradient step; `none` restores the default.
    #[arg(long)]
    tau: Option<String>,
    /// uniform | importance
    #[arg(long)]
    sampling: Option<String>,
    /// practical | theoretical
    #[arg(long)]
    inner_schedule: Option<String>,
    #[arg(long)]
    c0: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    log_stride: Option<String>,
    #[arg(long)]
    divergence_factor: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let flags = [
            ("problem", &self.problem),
            ("algorithm", &self.algorithm),
            ("n", &self.n),
            ("m", &self.m),
            ("d", &self.d),
            ("theta", &self.theta),
            ("modulus", &self.modulus),
            ("problem_seed", &self.problem_seed),
            ("seed", &self.seed),
            ("seeds", &self.seeds),
            ("epochs", &self.epochs),
            ("eta", &self.eta),
            ("tau", &self.tau),
            ("sampling", &self.sampling),
            ("inner_schedule", &self.inner_schedule),
            ("c0", &self.c0),
            ("out", &self.out),
            ("log_stride", &self.log_stride),
            ("divergence_factor", &self.divergence_factor),
        ];
        flags.into_iter().filter_map(|(k, v)| v.as_deref().map(|v| (k, v))).collect()
    }

    fn to_config(&self) -> halpern_vr::Result<ExperimentConfig> {
        let mut config = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
                location: path.display().to_string(),
                field: "config".into(),
                message: e.to_string(),
            })?;
            config.apply_file_text(&text, &path.display().to_string())?;
        }
        for (key, value) in self.overrides() {
            config.apply(key, value, &format!("--{}", key.replace('_', "-")))?;
        }
        config.validate()?;
        Ok(config)
    }
}

fn thread_cap() -> halpern_vr::Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config {
                location: "environment".into(),
                field: THREADS_VAR.into(),
                message: format!("expected a positive integer, got {raw:?}"),
            }),
        },
    }
}

fn run(args: &RunArgs) -> halpern_vr::Result<()> {
    let config = args.to_config()?;
    if let Some(threads) = thread_cap()? {
        harness::limit_threads(threads)?;
    }
    let output = harness::execute(&config)?;
    let mut report = String::new();
    for run in &output.runs {
        if let Some(last) = run.records.last() {
            report += &format!(
                "{}: {} records, {:.2} epochs, residual {:.3e}\n",
                run.run_id,
                run.records.len(),
                last.oracle_epochs,
                last.residual
            );
        }
    }
    report += &format!("wrote {}\n", config.out.display());
    say(&report);
    Ok(())
}

/// Writes to stdout, ignoring a closed pipe.
fn say(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. } => 2,
        Error::Divergence { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Plot { inputs, out } => harness::emit_plot(inputs, out).map(|series| {
            say(&format!("wrote {} ({} series)\n", out.display(), series.len()));
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
