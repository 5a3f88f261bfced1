//! Browser bindings for the demo page in `www/`.
//!
//! Each export takes and returns plain JSON strings or number arrays; the
//! native functions behind them are public so they can be tested off-browser.

use std::collections::BTreeMap;

use halpern_vr::counter::EvalCounter;
use halpern_vr::harness::config::{Algorithm, ExperimentConfig};
use halpern_vr::harness::experiment::{build_problem, metadata};
use halpern_vr::harness::run_single;
use halpern_vr::problems::{project_simplex, synthetic_strongly_monotone};
use halpern_vr::vr_forb::{decay_envelope, forb_params, forb_step, ForbState, ProblemSplit};
use halpern_vr::{FiniteSumProblem, RngStream};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Largest problem size the page accepts, to keep the tab responsive.
pub const MAX_SIZE: usize = 300;

#[derive(Debug, Deserialize)]
pub struct CompareRequest {
    /// Shared `key = value` settings (problem, m, epochs, seed, ...).
    #[serde(default)]
    pub settings: BTreeMap<String, String>,
    /// One entry per curve: the algorithm plus its own step overrides.
    pub runs: Vec<BTreeMap<String, String>>,
}

#[derive(Debug, Serialize)]
pub struct Curve {
    pub algorithm: String,
    pub epochs: Vec<f64>,
    pub residual: Vec<f64>,
    pub metadata: BTreeMap<String, String>,
}

fn configure(
    base: &ExperimentConfig,
    pairs: &BTreeMap<String, String>,
    source: &str,
) -> halpern_vr::Result<ExperimentConfig> {
    let mut config = base.clone();
    for (key, value) in pairs {
        config.apply(key, value, source)?;
    }
    config.validate()?;
    Ok(config)
}

/// Runs each requested algorithm once on the same instance.
pub fn compare_native(request: &CompareRequest) -> Result<Vec<Curve>, String> {
    let base = configure(&ExperimentConfig::default(), &request.settings, "settings").map_err(|e| e.to_string())?;
    if base.m > MAX_SIZE || base.n > MAX_SIZE {
        return Err(format!("sizes above {MAX_SIZE} are disabled in the browser demo"));
    }
    let problem = build_problem(&base).map_err(|e| e.to_string())?;
    let mut curves = Vec::new();
    for (idx, pairs) in request.runs.iter().enumerate() {
        let config = configure(&base, pairs, &format!("runs[{idx}]")).map_err(|e| e.to_string())?;
        let trace = run_single(problem.as_ref(), &config, config.seed).map_err(|e| e.to_string())?;
        curves.push(Curve {
            algorithm: config.algorithm.to_string(),
            epochs: trace.records.iter().map(|r| r.oracle_epochs).collect(),
            residual: trace.records.iter().map(|r| r.residual).collect(),
            metadata: metadata(problem.as_ref(), &config).into_iter().collect(),
        });
    }
    Ok(curves)
}

#[derive(Debug, Serialize)]
pub struct ForbDemo {
    pub iterations: Vec<usize>,
    pub distance_sq: Vec<f64>,
    pub envelope: Vec<f64>,
}

/// Mean squared distance to the solution of VR-FoRB on a random strongly
/// monotone instance, next to its linear-rate envelope.
pub fn forb_native(n: usize, d: usize, mu: f64, steps: usize, seeds: u64) -> Result<ForbDemo, String> {
    if n > MAX_SIZE || d > MAX_SIZE || steps > 100_000 || seeds == 0 || seeds > 100 {
        return Err("parameters out of the demo's range".into());
    }
    let problem = synthetic_strongly_monotone(n, d, mu, 1).map_err(|e| e.to_string())?;
    let solution = problem.known_solution().cloned().ok_or("instance has no known solution")?;
    let v0 = problem.initial_point();
    let dist0_sq = (&v0 - &solution).norm_squared();
    let op = ProblemSplit { problem: &problem, mu };
    let params = forb_params(n, problem.constants().lipschitz).map_err(|e| e.to_string())?;
    let stride = (steps / 200).max(1);
    let mut iterations: Vec<usize> = (0..=steps).step_by(stride).collect();
    if iterations.last() != Some(&steps) {
        iterations.push(steps);
    }
    let mut distance_sq = vec![0.0; iterations.len()];
    for seed in 0..seeds {
        let mut rng = RngStream::new(seed);
        let mut counter = EvalCounter::new(problem.constants().component_cost);
        let mut state = ForbState::new(&op, &v0, &mut counter).map_err(|e| e.to_string())?;
        distance_sq[0] += dist0_sq / seeds as f64;
        let mut slot = 1;
        for k in 1..=steps {
            forb_step(&mut state, &op, &params, &mut rng, &mut counter).map_err(|e| e.to_string())?;
            if slot < iterations.len() && iterations[slot] == k {
                distance_sq[slot] += (&state.v - &solution).norm_squared() / seeds as f64;
                slot += 1;
            }
        }
    }
    let envelope = iterations.iter().map(|&k| decay_envelope(&params, mu, k, dist0_sq)).collect();
    Ok(ForbDemo { iterations, distance_sq, envelope })
}

fn js_err(e: impl ToString) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// `request` is a JSON [`CompareRequest`]; returns a JSON array of curves.
#[wasm_bindgen]
pub fn compare(request: &str) -> Result<String, JsValue> {
    let request: CompareRequest = serde_json::from_str(request).map_err(js_err)?;
    let curves = compare_native(&request).map_err(js_err)?;
    serde_json::to_string(&curves).map_err(js_err)
}

#[wasm_bindgen(js_name = projectSimplex)]
pub fn project_simplex_js(values: Vec<f64>) -> Result<Vec<f64>, JsValue> {
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(js_err("need at least one finite number"));
    }
    Ok(project_simplex(&values))
}

#[wasm_bindgen(js_name = forbContraction)]
pub fn forb_contraction(n: usize, d: usize, mu: f64, steps: usize, seeds: u32) -> Result<String, JsValue> {
    let demo = forb_native(n, d, mu, steps, seeds as u64).map_err(js_err)?;
    serde_json::to_string(&demo).map_err(js_err)
}

/// Algorithms the page offers, in display order.
#[wasm_bindgen]
pub fn algorithms() -> Vec<String> {
    [Algorithm::VrHalpern, Algorithm::InexactHalpern, Algorithm::VrForb, Algorithm::Eg]
        .iter()
        .map(|a| a.to_string())
        .collect()
}
