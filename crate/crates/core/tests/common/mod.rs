#![allow(dead_code)]

use halpern_vr::{Point, RngStream};
use itertools::Itertools;

pub fn gaussian(d: usize, rng: &mut RngStream) -> Point {
    Point::from_fn(d, |_, _| rng.standard_normal())
}

/// Simplex projection by exhaustive support enumeration: for every support
/// `S`, the equality-constrained minimiser is `v_S − (Σ v_S − 1)/|S|`; keep
/// the nonnegative candidate closest to `v`.
pub fn simplex_oracle(v: &[f64]) -> Vec<f64> {
    let m = v.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for size in 1..=m {
        for support in (0..m).combinations(size) {
            let shift = (support.iter().map(|&i| v[i]).sum::<f64>() - 1.0) / size as f64;
            let mut x = vec![0.0; m];
            for &i in &support {
                x[i] = v[i] - shift;
            }
            if x.iter().any(|&xi| xi < -1e-12) {
                continue;
            }
            let dist: f64 = x.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.as_ref().is_none_or(|(d, _)| dist < *d) {
                best = Some((dist, x));
            }
        }
    }
    best.expect("the vertex supports are always feasible").1
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
