/// One logged point of a solver run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub oracle_epochs: f64,
    pub residual: f64,
    pub elapsed_ms: f64,
}

/// Wall clock for trace timestamps. `wasm32-unknown-unknown` has no
/// monotonic clock in std, so it reports zero there.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    pub(crate) fn elapsed_ms(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64() * 1e3
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}

/// Which quantity a solver logs as `residual`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceMetric {
    /// The solver's own certified residual `‖F(u) + g‖` with `g ∈ G(u)`
    /// recovered from its last resolvent step.
    #[default]
    Certified,
    /// The problem's natural residual `‖u − J_G(u − F(u))‖` at the current
    /// iterate (gradient mapping for constrained games, `‖F(u)‖` when `G = 0`).
    Natural,
}

/// Budget and logging controls shared by all solver loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunControl {
    /// Stop before the logged epoch count would exceed this.
    pub epoch_budget: Option<f64>,
    /// Log every `log_stride` iterations (the first and last are always logged).
    pub log_stride: usize,
    /// Abort when the residual exceeds this multiple of the first one.
    pub divergence_factor: f64,
    pub metric: TraceMetric,
}

impl Default for RunControl {
    fn default() -> Self {
        Self { epoch_budget: None, log_stride: 1, divergence_factor: 1e6, metric: TraceMetric::Certified }
    }
}

impl RunControl {
    pub(crate) fn over_budget(&self, epochs: f64) -> bool {
        self.epoch_budget.is_some_and(|b| epochs > b)
    }

    pub(crate) fn should_log(&self, iter: usize) -> bool {
        iter.is_multiple_of(self.log_stride.max(1))
    }

    pub(crate) fn check_divergence(&self, iter: usize, first: f64, current: f64) -> crate::Result<()> {
        let limit = self.divergence_factor * first.max(1e-12);
        if !current.is_finite() || current > limit {
            return Err(crate::Error::Divergence { iter, detail: format!("residual {current:e} exceeds {limit:e}") });
        }
        Ok(())
    }
}

/// Residual of `u` under `metric`; `g` is the certified element of `G(u)` when
/// the solver has one. Uncounted.
pub(crate) fn metric_value(
    problem: &dyn crate::FiniteSumProblem,
    metric: TraceMetric,
    u: &crate::Point,
    g: Option<&crate::Point>,
) -> f64 {
    match (metric, g) {
        (TraceMetric::Certified, Some(g)) => (problem.eval_full(u) + g).norm(),
        _ => problem.natural_residual(u),
    }
}

/// Collects records for one run and applies the divergence guard.
pub(crate) struct Tracer {
    control: RunControl,
    watch: Stopwatch,
    records: Vec<TraceRecord>,
    first: Option<f64>,
}

impl Tracer {
    pub(crate) fn new(control: RunControl) -> Self {
        Self { control, watch: Stopwatch::start(), records: Vec::new(), first: None }
    }

    pub(crate) fn control(&self) -> &RunControl {
        &self.control
    }

    pub(crate) fn last_iter(&self) -> Option<usize> {
        self.records.last().map(|r| r.iter)
    }

    pub(crate) fn log(&mut self, iter: usize, oracle_epochs: f64, residual: f64) -> crate::Result<()> {
        let first = *self.first.get_or_insert(residual);
        self.records.push(TraceRecord { iter, oracle_epochs, residual, elapsed_ms: self.watch.elapsed_ms() });
        self.control.check_divergence(iter, first, residual)
    }

    pub(crate) fn finish(self) -> Vec<TraceRecord> {
        self.records
    }
}
