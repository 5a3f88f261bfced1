//! Euclidean projection onto the probability simplex `{x ≥ 0, Σ x = 1}`.

use crate::problem::Point;

/// Sort-based projection: find the threshold `τ` such that
/// `Σ max(v_i − τ, 0) = 1`, then clip. `O(m log m)`.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    assert!(!v.is_empty(), "cannot project onto an empty simplex");
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));

    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if s - candidate > 0.0 {
            tau = candidate;
        } else {
            break;
        }
    }

    let mut x: Vec<f64> = v.iter().map(|&vi| (vi - tau).max(0.0)).collect();

    // Push the rounding drift of Σx back onto the support.
    let support = x.iter().filter(|&&xi| xi > 0.0).count();
    if support > 0 {
        let drift = (x.iter().sum::<f64>() - 1.0) / support as f64;
        if drift != 0.0 {
            for xi in x.iter_mut().filter(|xi| **xi > 0.0) {
                *xi = (*xi - drift).max(0.0);
            }
        }
    }
    x
}

pub fn project_simplex_point(v: &Point) -> Point {
    Point::from_vec(project_simplex(v.as_slice()))
}
