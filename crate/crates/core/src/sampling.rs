use rand::distributions::{Distribution, WeightedIndex};

use crate::error::{Error, Result};
use crate::rng::RngStream;

const SUM_TOLERANCE: f64 = 1e-12;

/// Categorical law `Q = (q_1, …, q_n)` over component indices.
///
/// `Product` is the law of a pair `(i, j)` with independent marginals, flattened
/// to the index `i * cols.len() + j`. Matrix games sample rows and columns this
/// way without materialising the `m₁ m₂` joint weights.
#[derive(Debug, Clone)]
pub enum SamplingDistribution {
    Uniform { n: usize },
    Weighted { weights: Vec<f64>, index: WeightedIndex<f64> },
    Product { rows: Box<SamplingDistribution>, cols: Box<SamplingDistribution> },
}

impl SamplingDistribution {
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("empty distribution".into()));
        }
        Ok(Self::Uniform { n })
    }

    /// Weights must be nonnegative and sum to one within `1e-12`.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("empty distribution".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, expected 1")));
        }
        let index = WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(format!("bad weights: {e}")))?;
        Ok(Self::Weighted { weights, index })
    }

    /// Normalises `raw` by its sum before validating.
    pub fn from_unnormalized(raw: &[f64]) -> Result<Self> {
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidArgument("weights must have positive finite sum".into()));
        }
        Self::from_weights(raw.iter().map(|w| w / total).collect())
    }

    pub fn product(rows: SamplingDistribution, cols: SamplingDistribution) -> Self {
        Self::Product { rows: Box::new(rows), cols: Box::new(cols) }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Uniform { n } => *n,
            Self::Weighted { weights, .. } => weights.len(),
            Self::Product { rows, cols } => rows.len() * cols.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_uniform(&self) -> bool {
        match self {
            Self::Uniform { .. } => true,
            Self::Weighted { .. } => false,
            Self::Product { rows, cols } => rows.is_uniform() && cols.is_uniform(),
        }
    }

    pub fn prob(&self, i: usize) -> f64 {
        match self {
            Self::Uniform { n } => 1.0 / *n as f64,
            Self::Weighted { weights, .. } => weights[i],
            Self::Product { rows, cols } => {
                let c = cols.len();
                rows.prob(i / c) * cols.prob(i % c)
            }
        }
    }

    /// Importance weight `(n q_i)⁻¹` that makes `A_i` an unbiased draw of `A`.
    pub fn importance_weight(&self, i: usize) -> f64 {
        1.0 / (self.len() as f64 * self.prob(i))
    }

    pub fn sample(&self, rng: &mut RngStream) -> usize {
        match self {
            Self::Uniform { n } => rng.index(*n),
            Self::Weighted { index, .. } => index.sample(rng.generator()),
            Self::Product { rows, cols } => {
                let i = rows.sample(rng);
                let j = cols.sample(rng);
                i * cols.len() + j
            }
        }
    }
}

pub fn sample_categorical(q: &SamplingDistribution, rng: &mut RngStream) -> usize {
    q.sample(rng)
}
