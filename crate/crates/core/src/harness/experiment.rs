//! Dispatches a configuration to the selected solver for every seed.

use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::{Algorithm, ExperimentConfig, ProblemKind, ScheduleKind};
use super::csv_io::{emit_csv, format_float, RunTrace};
use super::eg::{default_tau, eg_baseline};
use crate::error::{Error, Result};
use crate::halpern_coco::{self, CocoHalpernConfig};
use crate::inexact_halpern::{self, InnerSchedule, MonotoneHalpernConfig};
use crate::page::default_batch_size;
use crate::problem::FiniteSumProblem;
use crate::problems::{
    synthetic_cocoercive, synthetic_monotone, synthetic_strongly_monotone, MatrixGame, QuadraticProgram, SamplingMode,
};
use crate::trace::{RunControl, TraceMetric};
use crate::vr_forb::{self, forb_params, ForbConfig};

/// Identifies the build in metadata: crate version plus the git revision when
/// it was available at compile time.
pub const BUILD_ID: &str = concat!("halpern-vr ", env!("CARGO_PKG_VERSION"), "+", env!("HALPERN_VR_GIT_REV"));

pub fn build_problem(config: &ExperimentConfig) -> Result<Box<dyn FiniteSumProblem>> {
    if config.sampling == SamplingMode::Importance && config.problem != ProblemKind::MatrixGame {
        return Err(Error::Config {
            location: "validation".into(),
            field: "sampling".into(),
            message: format!("importance sampling is only defined for matrix-game, not {}", config.problem),
        });
    }
    Ok(match config.problem {
        ProblemKind::MatrixGame => {
            Box::new(MatrixGame::policeman_burglar(config.m, config.theta, config.problem_seed, config.sampling)?)
        }
        ProblemKind::OuyangXu => Box::new(QuadraticProgram::new(config.m)?),
        ProblemKind::SyntheticCocoercive => {
            Box::new(synthetic_cocoercive(config.n, config.d, config.modulus, config.problem_seed)?)
        }
        ProblemKind::SyntheticMonotone => Box::new(synthetic_monotone(config.n, config.d, config.problem_seed)?),
        ProblemKind::SyntheticStronglyMonotone => {
            Box::new(synthetic_strongly_monotone(config.n, config.d, config.modulus, config.problem_seed)?)
        }
    })
}

fn control(config: &ExperimentConfig) -> RunControl {
    RunControl {
        epoch_budget: Some(config.epochs),
        log_stride: config.log_stride,
        divergence_factor: config.divergence_factor,
        metric: TraceMetric::Natural,
    }
}

fn inner_schedule(config: &ExperimentConfig) -> InnerSchedule {
    match config.inner_schedule {
        ScheduleKind::Theoretical => InnerSchedule::Theoretical,
        ScheduleKind::Practical => InnerSchedule::Practical { c0: config.c0 },
    }
}

fn strong_modulus(config: &ExperimentConfig) -> f64 {
    if config.problem == ProblemKind::SyntheticStronglyMonotone {
        config.modulus
    } else {
        0.0
    }
}

/// One seed of the configured solver, stopped by the epoch budget.
pub fn run_single(problem: &dyn FiniteSumProblem, config: &ExperimentConfig, seed: u64) -> Result<RunTrace> {
    let u0 = problem.initial_point();
    let lipschitz = problem.constants().lipschitz;
    let control = control(config);
    let records = match config.algorithm {
        Algorithm::VrHalpern => {
            let mut c = CocoHalpernConfig::new(lipschitz, usize::MAX, seed);
            c.eta_override = config.eta;
            c.control = control;
            halpern_coco::run(problem, &u0, &c)?.1
        }
        Algorithm::InexactHalpern => {
            let mut c = MonotoneHalpernConfig::new(lipschitz, usize::MAX, seed);
            c.eta = config.eta;
            c.tau_override = config.tau;
            c.inner_schedule = inner_schedule(config);
            c.control = control;
            inexact_halpern::run(problem, &u0, &c)?.1
        }
        Algorithm::VrForb => {
            let mut c = ForbConfig::new(usize::MAX, seed);
            c.mu = strong_modulus(config);
            c.tau_override = config.tau;
            c.control = control;
            vr_forb::run(problem, &u0, &c)?.1
        }
        Algorithm::Eg => {
            let tau = config.tau.unwrap_or_else(|| default_tau(problem));
            eg_baseline(problem, &u0, tau, usize::MAX, control)?.1
        }
    };
    Ok(RunTrace {
        run_id: format!("{}-{}-s{seed}", config.algorithm, config.problem),
        algorithm: config.algorithm.to_string(),
        problem: config.problem.to_string(),
        seed,
        records,
    })
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub runs: Vec<RunTrace>,
    /// Effective configuration and derived constants, in write order.
    pub metadata: Vec<(String, String)>,
}

fn run_seeds(problem: &dyn FiniteSumProblem, config: &ExperimentConfig) -> Vec<Result<RunTrace>> {
    let seeds = config.seed_list();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        seeds.par_iter().map(|&s| run_single(problem, config, s)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        seeds.iter().map(|&s| run_single(problem, config, s)).collect()
    }
}

/// Caps the worker threads used for seeds. Must be called before the first
/// experiment runs.
#[cfg(feature = "parallel")]
pub fn limit_threads(threads: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

/// Runs every seed (in parallel when the `parallel` feature is on; results
/// keep seed order, so output does not depend on scheduling).
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let problem = build_problem(config)?;
    let runs = run_seeds(problem.as_ref(), config).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ExperimentOutput { runs, metadata: metadata(problem.as_ref(), config) })
}

/// Resolved step sizes and problem constants, appended to the configuration.
pub fn metadata(problem: &dyn FiniteSumProblem, config: &ExperimentConfig) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = config.to_pairs().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let c = problem.constants();
    let n = problem.effective_components();
    let mut push = |k: &str, v: String| out.push((k.to_string(), v));
    push("build_id", BUILD_ID.to_string());
    push("seed_list", config.seed_list().iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","));
    push("dim", problem.dim().to_string());
    push("num_components", problem.num_components().to_string());
    push("effective_components", n.to_string());
    push("lipschitz", format_float(c.lipschitz));
    push("lipschitz_full", format_float(c.lipschitz_full));
    push("component_cost", format_float(c.component_cost));
    push("metric", "natural_residual".to_string());
    match config.algorithm {
        Algorithm::VrHalpern => {
            push("eta_used", format_float(config.eta.unwrap_or(1.0 / (4.0 * c.lipschitz))));
            push("batch_size", default_batch_size(problem).to_string());
        }
        Algorithm::InexactHalpern => {
            let eta = config.eta.unwrap_or((n as f64).sqrt() / c.lipschitz);
            push("eta_used", format_float(eta));
            let inner = forb_params(n, eta * c.lipschitz + 1.0).map(|p| p.tau).unwrap_or(f64::NAN);
            push("tau_used", format_float(config.tau.unwrap_or(inner)));
        }
        Algorithm::VrForb => {
            let tau = forb_params(n, c.lipschitz).map(|p| p.tau).unwrap_or(f64::NAN);
            push("tau_used", format_float(config.tau.unwrap_or(tau)));
        }
        Algorithm::Eg => push("tau_used", format_float(config.tau.unwrap_or_else(|| default_tau(problem)))),
    }
    out
}

/// `<out>.meta` next to the CSV.
pub fn metadata_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

pub fn write_metadata(pairs: &[(String, String)], path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path.display(), e))?;
    for (k, v) in pairs {
        writeln!(file, "{k} = {v}").map_err(|e| Error::io(path.display(), e))?;
    }
    Ok(())
}

/// Runs the experiment and writes the CSV and its metadata file.
pub fn execute(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let output = run_experiment(config)?;
    emit_csv(&output.runs, &config.out)?;
    write_metadata(&output.metadata, &metadata_path(&config.out))?;
    Ok(output)
}
