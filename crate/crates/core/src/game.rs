//! Symmetric two-player games: payoff bilinear form, Nash equilibrium and
//! evolutionary stability tests, and a grid scan that enumerates both.

use crate::error::{Error, Result};
use crate::simplex::{grid_points, FrequencyVector};
use nalgebra::DMatrix;

/// Default payoff tie tolerance for equilibrium tests.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

/// Square matrix of payoffs a_ij earned by pure strategy i against pure
/// strategy j.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    entries: DMatrix<f64>,
}

impl PayoffMatrix {
    /// Builds from rows; every row must have the same length as the row count.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArgument("payoff matrix must be at least 1x1".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "payoff matrix row",
                    expected: n,
                    got: row.len(),
                });
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite payoff {bad} in row {i}")));
            }
        }
        let entries = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Ok(Self { entries })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(vec![vec![0.0; n]; n])
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub(crate) fn check_dim(&self, v: &FrequencyVector, context: &'static str) -> Result<()> {
        if v.len() != self.n() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.n(),
                got: v.len(),
            });
        }
        Ok(())
    }
}

/// E(p, q) = sum_ij p_i a_ij q_j, the payoff to a p-player against a
/// q-player. Bilinear in (p, q).
pub fn expected_payoff(p: &FrequencyVector, q: &FrequencyVector, a: &PayoffMatrix) -> Result<f64> {
    a.check_dim(p, "expected_payoff first strategy")?;
    a.check_dim(q, "expected_payoff second strategy")?;
    let mut total = 0.0;
    for (i, &pi) in p.probs().iter().enumerate() {
        let mut row = 0.0;
        for (j, &qj) in q.probs().iter().enumerate() {
            row += a.entry(i, j) * qj;
        }
        total += pi * row;
    }
    Ok(total)
}

/// Nash test by pure-strategy deviations: no e_i earns more than tol above
/// E(p, p) against p. Linearity of E(., p) makes vertex checks sufficient.
pub fn is_nash(p: &FrequencyVector, a: &PayoffMatrix, tol: f64) -> Result<bool> {
    a.check_dim(p, "is_nash strategy")?;
    if tol < 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be >= 0, got {tol}")));
    }
    let own = expected_payoff(p, p, a)?;
    for i in 0..a.n() {
        // E(e_i, p) is row i of A applied to p.
        let mut dev = 0.0;
        for (j, &pj) in p.probs().iter().enumerate() {
            dev += a.entry(i, j) * pj;
        }
        if dev > own + tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Evolutionary stability against a simplex grid of invaders: each probe r
/// must either earn strictly less against p, or tie and lose strictly to p
/// in the post-invasion population r.
pub fn is_ess(
    p: &FrequencyVector,
    a: &PayoffMatrix,
    tol: f64,
    probe_resolution: usize,
) -> Result<bool> {
    a.check_dim(p, "is_ess strategy")?;
    if tol < 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be >= 0, got {tol}")));
    }
    if probe_resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "probe_resolution must be >= 2, got {probe_resolution}"
        )));
    }
    let own = expected_payoff(p, p, a)?;
    // Probes landing within half a grid cell of p are p itself for the
    // purposes of the invasion test.
    let self_cutoff = 0.5 / probe_resolution as f64;
    for r in grid_points(p.len(), probe_resolution) {
        if r.max_norm_distance(p) < self_cutoff {
            continue;
        }
        let against_p = expected_payoff(&r, p, a)?;
        if own > against_p + tol {
            continue;
        }
        if (own - against_p).abs() <= tol {
            let p_in_r = expected_payoff(p, &r, a)?;
            let r_in_r = expected_payoff(&r, &r, a)?;
            if p_in_r > r_in_r + tol {
                continue;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

/// A grid point that passed the Nash test, with its stability annotation.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub strategy: FrequencyVector,
    pub nash: bool,
    pub ess: bool,
}

/// Scans the simplex grid for Nash equilibria and annotates each with its
/// ESS status (probed at the same resolution). Results are lexicographic in
/// the probability tuples; points closer than one grid cell (max-norm) to an
/// already-kept equilibrium are dropped as duplicates.
pub fn enumerate_symmetric_equilibria(
    a: &PayoffMatrix,
    grid_resolution: usize,
    tol: f64,
) -> Result<Vec<Equilibrium>> {
    if grid_resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid_resolution must be >= 2, got {grid_resolution}"
        )));
    }
    // Exact grid spacing is 1/resolution; shave an epsilon so rounding in
    // the float coordinates cannot merge genuine neighbours.
    let dedup_cutoff = (1.0 - 1e-9) / grid_resolution as f64;
    let mut found: Vec<Equilibrium> = Vec::new();
    for point in grid_points(a.n(), grid_resolution) {
        if !is_nash(&point, a, tol)? {
            continue;
        }
        if found.iter().any(|e| e.strategy.max_norm_distance(&point) < dedup_cutoff) {
            continue;
        }
        let ess = is_ess(&point, a, tol, grid_resolution)?;
        found.push(Equilibrium { strategy: point, nash: true, ess });
    }
    Ok(found)
}
