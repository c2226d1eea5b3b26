//! Probability vectors over strategies and the grids used to scan them.

use crate::error::{Error, Result};

/// Sum tolerance for a vector to count as a probability distribution.
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;

/// A point on the probability simplex: entries in [0, 1] summing to 1
/// within [`SIMPLEX_SUM_TOL`]. States produced by integration are allowed
/// a looser drift budget; see [`FrequencyVector::with_drift`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyVector {
    probs: Vec<f64>,
}

impl FrequencyVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_drift(probs, SIMPLEX_SUM_TOL)
    }

    /// Accepts entries within `drift_tol` of the simplex in each direction.
    pub fn with_drift(probs: Vec<f64>, drift_tol: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidSimplex("empty vector".into()));
        }
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidSimplex(format!("non-finite entry in {probs:?}")));
        }
        let drift = simplex_drift(&probs);
        if drift > drift_tol {
            return Err(Error::InvalidSimplex(format!(
                "drift {drift:.3e} exceeds {drift_tol:.1e} for {probs:?}"
            )));
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSimplex("empty vector".into()));
        }
        Ok(Self { probs: vec![1.0 / n as f64; n] })
    }

    /// Pure strategy i as a distribution.
    pub fn vertex(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::InvalidArgument(format!("vertex {i} out of range for n={n}")));
        }
        let mut probs = vec![0.0; n];
        probs[i] = 1.0;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn drift(&self) -> f64 {
        simplex_drift(&self.probs)
    }

    /// Largest entrywise difference to another point.
    pub fn max_norm_distance(&self, other: &Self) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Distance from the simplex: combines the sum defect with any excursion
/// of an entry outside [0, 1].
pub fn simplex_drift(probs: &[f64]) -> f64 {
    let sum: f64 = probs.iter().sum();
    let mut drift = (sum - 1.0).abs();
    for &p in probs {
        if p < 0.0 {
            drift = drift.max(-p);
        } else if p > 1.0 {
            drift = drift.max(p - 1.0);
        }
    }
    drift
}

/// All points (k_1/r, ..., k_n/r) with sum k_i = r, in lexicographic order
/// of the probability tuples.
pub fn grid_points(n: usize, resolution: usize) -> Vec<FrequencyVector> {
    assert!(n >= 1 && resolution >= 1);
    let mut out = Vec::new();
    let mut counts = vec![0usize; n];
    fill_grid(&mut out, &mut counts, 0, resolution, resolution);
    out
}

fn fill_grid(
    out: &mut Vec<FrequencyVector>,
    counts: &mut [usize],
    pos: usize,
    remaining: usize,
    resolution: usize,
) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        let probs = counts.iter().map(|&k| k as f64 / resolution as f64).collect();
        out.push(FrequencyVector { probs });
        return;
    }
    for k in 0..=remaining {
        counts[pos] = k;
        fill_grid(out, counts, pos + 1, remaining - k, resolution);
    }
}
