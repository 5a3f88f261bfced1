//! Experiment configuration: a flat `key = value` file plus overrides, where a
//! later setting wins. Errors name the line or flag and the field.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::problems::SamplingMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    MatrixGame,
    OuyangXu,
    SyntheticCocoercive,
    SyntheticMonotone,
    SyntheticStronglyMonotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    VrHalpern,
    InexactHalpern,
    VrForb,
    Eg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Theoretical,
    Practical,
}

macro_rules! named_enum {
    ($ty:ty, $what:literal, $($variant:path => $name:literal),+ $(,)?) => {
        impl $ty {
            pub fn as_str(&self) -> &'static str {
                match self {
                    $($variant => $name,)+
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($name => Ok($variant),)+
                    _ => Err(format!(
                        concat!("unknown ", $what, " {:?}, expected one of: {}"),
                        s,
                        [$($name),+].join(", ")
                    )),
                }
            }
        }
    };
}

named_enum!(ProblemKind, "problem",
    ProblemKind::MatrixGame => "matrix-game",
    ProblemKind::OuyangXu => "ouyang-xu",
    ProblemKind::SyntheticCocoercive => "synthetic",
    ProblemKind::SyntheticMonotone => "synthetic-monotone",
    ProblemKind::SyntheticStronglyMonotone => "synthetic-strongly-monotone",
);

named_enum!(Algorithm, "algorithm",
    Algorithm::VrHalpern => "vr-halpern",
    Algorithm::InexactHalpern => "inexact-halpern",
    Algorithm::VrForb => "vr-forb",
    Algorithm::Eg => "eg",
);

named_enum!(ScheduleKind, "inner schedule",
    ScheduleKind::Theoretical => "theoretical",
    ScheduleKind::Practical => "practical",
);

fn sampling_name(mode: SamplingMode) -> &'static str {
    match mode {
        SamplingMode::Uniform => "uniform",
        SamplingMode::Importance => "importance",
    }
}

fn parse_sampling(s: &str) -> std::result::Result<SamplingMode, String> {
    match s {
        "uniform" => Ok(SamplingMode::Uniform),
        "importance" => Ok(SamplingMode::Importance),
        _ => Err(format!("unknown sampling {s:?}, expected uniform or importance")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub algorithm: Algorithm,
    /// Components of the synthetic instances.
    pub n: usize,
    /// Size of the matrix game and the quadratic program.
    pub m: usize,
    /// Dimension of the synthetic instances.
    pub d: usize,
    pub theta: f64,
    /// `L` of the synthetic cocoercive instance, `μ` of the strongly monotone one.
    pub modulus: f64,
    pub sampling: SamplingMode,
    /// Seed that draws the instance itself.
    pub problem_seed: u64,
    /// First algorithm seed; runs use `seed, seed+1, …, seed+seeds−1`.
    pub seed: u64,
    pub seeds: usize,
    pub epochs: f64,
    pub eta: Option<f64>,
    pub tau: Option<f64>,
    pub inner_schedule: ScheduleKind,
    pub c0: f64,
    pub out: PathBuf,
    pub log_stride: usize,
    pub divergence_factor: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::MatrixGame,
            algorithm: Algorithm::VrHalpern,
            n: 8,
            m: 100,
            d: 4,
            theta: 0.8,
            modulus: 1.0,
            sampling: SamplingMode::Uniform,
            problem_seed: 0,
            seed: 0,
            seeds: 1,
            epochs: 100.0,
            eta: None,
            tau: None,
            inner_schedule: ScheduleKind::Practical,
            c0: 0.05,
            out: PathBuf::from("trace.csv"),
            log_stride: 1,
            divergence_factor: 1e6,
        }
    }
}

pub const KEYS: &[&str] = &[
    "problem",
    "algorithm",
    "n",
    "m",
    "d",
    "theta",
    "modulus",
    "sampling",
    "problem_seed",
    "seed",
    "seeds",
    "epochs",
    "eta",
    "tau",
    "inner_schedule",
    "c0",
    "out",
    "log_stride",
    "divergence_factor",
];

fn parse<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("cannot parse {value:?}: {e}"))
}

/// `none` clears an optional step.
fn parse_optional(value: &str) -> std::result::Result<Option<f64>, String> {
    if value == "none" {
        Ok(None)
    } else {
        parse(value).map(Some)
    }
}

impl ExperimentConfig {
    /// Sets one field; `location` names where the setting came from.
    pub fn apply(&mut self, key: &str, value: &str, location: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let outcome = match key.as_str() {
            "problem" => value.parse().map(|v| self.problem = v),
            "algorithm" => value.parse().map(|v| self.algorithm = v),
            "n" => parse(value).map(|v| self.n = v),
            "m" => parse(value).map(|v| self.m = v),
            "d" => parse(value).map(|v| self.d = v),
            "theta" => parse(value).map(|v| self.theta = v),
            "modulus" => parse(value).map(|v| self.modulus = v),
            "sampling" => parse_sampling(value).map(|v| self.sampling = v),
            "problem_seed" => parse(value).map(|v| self.problem_seed = v),
            "seed" => parse(value).map(|v| self.seed = v),
            "seeds" => parse(value).map(|v| self.seeds = v),
            "epochs" => parse(value).map(|v| self.epochs = v),
            "eta" => parse_optional(value).map(|v| self.eta = v),
            "tau" => parse_optional(value).map(|v| self.tau = v),
            "inner_schedule" => value.parse().map(|v| self.inner_schedule = v),
            "c0" => parse(value).map(|v| self.c0 = v),
            "out" => {
                self.out = PathBuf::from(value);
                Ok(())
            }
            "log_stride" => parse(value).map(|v| self.log_stride = v),
            "divergence_factor" => parse(value).map(|v| self.divergence_factor = v),
            _ => Err(format!("unknown key, expected one of: {}", KEYS.join(", "))),
        };
        outcome.map_err(|message| Error::Config { location: location.into(), field: key, message })
    }

    /// Applies a `key = value` file. Blank lines and `#` comments are skipped.
    pub fn apply_file_text(&mut self, text: &str, source: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let location = format!("{source}:{}", idx + 1);
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                location: location.clone(),
                field: line.to_string(),
                message: "expected `key = value`".into(),
            })?;
            self.apply(key, value, &location)?;
        }
        Ok(())
    }

    pub fn from_file_text(text: &str, source: &str) -> Result<Self> {
        let mut config = Self::default();
        config.apply_file_text(text, source)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, message: String| {
            Err(Error::Config { location: "validation".into(), field: field.into(), message })
        };
        if !(self.epochs > 0.0 && self.epochs.is_finite()) {
            return fail("epochs", format!("budget {} must be positive", self.epochs));
        }
        if self.seeds < 1 {
            return fail("seeds", "need at least one seed".into());
        }
        if self.seed.checked_add(self.seeds as u64 - 1).is_none() {
            return fail("seeds", "seed range overflows".into());
        }
        if self.log_stride < 1 {
            return fail("log_stride", "stride must be at least 1".into());
        }
        match self.problem {
            ProblemKind::MatrixGame if self.m < 1 => return fail("m", "size must be at least 1".into()),
            ProblemKind::OuyangXu if self.m < 2 => return fail("m", "size must be at least 2".into()),
            ProblemKind::SyntheticCocoercive
            | ProblemKind::SyntheticMonotone
            | ProblemKind::SyntheticStronglyMonotone
                if self.n < 1 || self.d < 1 =>
            {
                return fail("n", "synthetic instances need n, d ≥ 1".into());
            }
            _ => {}
        }
        if !(self.modulus > 0.0 && self.modulus.is_finite()) {
            return fail("modulus", format!("{} must be positive", self.modulus));
        }
        if !self.theta.is_finite() {
            return fail("theta", "must be finite".into());
        }
        for (field, v) in [("eta", self.eta), ("tau", self.tau)] {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    return fail(field, format!("step {x} must be positive"));
                }
            }
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return fail("c0", format!("{} must be positive", self.c0));
        }
        if !(self.divergence_factor > 1.0) {
            return fail("divergence_factor", format!("{} must exceed 1", self.divergence_factor));
        }
        Ok(())
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).map(|k| self.seed + k).collect()
    }

    /// Every effective value as `key = value` pairs, in `KEYS` order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| x.to_string());
        vec![
            ("problem", self.problem.to_string()),
            ("algorithm", self.algorithm.to_string()),
            ("n", self.n.to_string()),
            ("m", self.m.to_string()),
            ("d", self.d.to_string()),
            ("theta", self.theta.to_string()),
            ("modulus", self.modulus.to_string()),
            ("sampling", sampling_name(self.sampling).to_string()),
            ("problem_seed", self.problem_seed.to_string()),
            ("seed", self.seed.to_string()),
            ("seeds", self.seeds.to_string()),
            ("epochs", self.epochs.to_string()),
            ("eta", opt(self.eta)),
            ("tau", opt(self.tau)),
            ("inner_schedule", self.inner_schedule.to_string()),
            ("c0", self.c0.to_string()),
            ("out", self.out.display().to_string()),
            ("log_stride", self.log_stride.to_string()),
            ("divergence_factor", self.divergence_factor.to_string()),
        ]
    }
}
