/// Oracle-cost ledger for one solver run.
///
/// One full evaluation of `F` is one epoch; one component call costs
/// `component_cost` epochs (`1/n` unless the problem says otherwise).
/// Resolvent calls are tracked but not priced. Metric evaluations made only
/// for logging never touch the counter.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalCounter {
    component_cost: f64,
    component_calls: u64,
    full_evals: u64,
    resolvent_calls: u64,
}

impl EvalCounter {
    pub fn new(component_cost: f64) -> Self {
        assert!(component_cost.is_finite() && component_cost > 0.0, "component cost must be positive");
        Self { component_cost, component_calls: 0, full_evals: 0, resolvent_calls: 0 }
    }

    pub fn charge_components(&mut self, calls: u64) {
        self.component_calls += calls;
    }

    pub fn charge_full(&mut self) {
        self.full_evals += 1;
    }

    pub fn charge_resolvent(&mut self) {
        self.resolvent_calls += 1;
    }

    pub fn component_cost(&self) -> f64 {
        self.component_cost
    }

    pub fn component_calls(&self) -> u64 {
        self.component_calls
    }

    pub fn full_evals(&self) -> u64 {
        self.full_evals
    }

    pub fn resolvent_calls(&self) -> u64 {
        self.resolvent_calls
    }

    /// Component calls expressed in epochs.
    pub fn component_epochs(&self) -> f64 {
        self.component_calls as f64 * self.component_cost
    }

    pub fn epochs(&self) -> f64 {
        self.component_epochs() + self.full_evals as f64
    }

    /// Adds another phase's charges. Both ledgers must price components alike.
    pub fn absorb(&mut self, other: &EvalCounter) {
        debug_assert!((self.component_cost - other.component_cost).abs() <= f64::EPSILON * self.component_cost);
        self.component_calls += other.component_calls;
        self.full_evals += other.full_evals;
        self.resolvent_calls += other.resolvent_calls;
    }
}
