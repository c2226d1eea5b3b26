//! Vector replicator dynamics: fitness bookkeeping, a fixed-step RK4
//! integrator over the simplex, and Shannon entropy with its rate along the
//! flow.

use crate::error::{Error, Result};
use crate::game::PayoffMatrix;
use crate::simplex::{simplex_drift, FrequencyVector};

/// Default integration step.
pub const DEFAULT_DT: f64 = 1e-3;
/// Drift budget for states stored in a trajectory.
pub const TRAJECTORY_DRIFT_TOL: f64 = 1e-8;
/// Drift level at which integration aborts.
pub const ABORT_DRIFT_TOL: f64 = 1e-6;

/// Per-strategy fitness f_i = sum_j a_ij x_j, the population mean
/// <f> = sum_kl a_kl x_k x_l, and the excess U_i = f_i - <f>.
#[derive(Debug, Clone)]
pub struct FitnessReport {
    pub fitness: Vec<f64>,
    pub mean_fitness: f64,
    pub excess: Vec<f64>,
}

pub fn fitness(x: &FrequencyVector, a: &PayoffMatrix) -> Result<FitnessReport> {
    a.check_dim(x, "fitness state")?;
    let probs = x.probs();
    let n = probs.len();
    let mut fitness = vec![0.0; n];
    for i in 0..n {
        for (j, &xj) in probs.iter().enumerate() {
            fitness[i] += a.entry(i, j) * xj;
        }
    }
    let mean_fitness: f64 = fitness.iter().zip(probs).map(|(f, x)| f * x).sum();
    let excess = fitness.iter().map(|f| f - mean_fitness).collect();
    Ok(FitnessReport { fitness, mean_fitness, excess })
}

/// dx_i/dt = [f_i(x) - <f(x)>] x_i. Components sum to zero and vanish on
/// extinct strategies, so simplex faces are invariant.
pub fn replicator_rhs(x: &FrequencyVector, a: &PayoffMatrix) -> Result<Vec<f64>> {
    let report = fitness(x, a)?;
    Ok(rhs_from_parts(x.probs(), &report.excess))
}

fn rhs_from_parts(probs: &[f64], excess: &[f64]) -> Vec<f64> {
    probs.iter().zip(excess).map(|(x, u)| u * x).collect()
}

fn rhs_raw(probs: &[f64], a: &PayoffMatrix) -> Vec<f64> {
    let n = probs.len();
    let mut fit = vec![0.0; n];
    for i in 0..n {
        for (j, &xj) in probs.iter().enumerate() {
            fit[i] += a.entry(i, j) * xj;
        }
    }
    let mean: f64 = fit.iter().zip(probs).map(|(f, x)| f * x).sum();
    probs.iter().zip(&fit).map(|(x, f)| (f - mean) * x).collect()
}

/// Sampled integration output; one entropy value (nats) per state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<FrequencyVector>,
    pub entropies: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &FrequencyVector {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// One RK4 step of size h for the replicator field, evaluated on raw
/// probability slices so intermediate stages are not revalidated.
fn rk4_step(probs: &[f64], a: &PayoffMatrix, h: f64) -> Vec<f64> {
    let n = probs.len();
    let k1 = rhs_raw(probs, a);
    let stage = |base: &[f64], k: &[f64], w: f64| -> Vec<f64> {
        (0..n).map(|i| base[i] + w * k[i]).collect()
    };
    let k2 = rhs_raw(&stage(probs, &k1, h / 2.0), a);
    let k3 = rhs_raw(&stage(probs, &k2, h / 2.0), a);
    let k4 = rhs_raw(&stage(probs, &k3, h), a);
    (0..n)
        .map(|i| probs[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Splits [0, t_end] into full steps of dt plus one shorter closing step
/// when dt does not divide t_end. Returns (full_steps, remainder).
pub(crate) fn step_plan(dt: f64, t_end: f64) -> (usize, f64) {
    let raw = t_end / dt;
    let mut full = raw.floor() as usize;
    // Absorb float noise when t_end is an exact multiple of dt.
    if (raw - raw.round()).abs() < 1e-9 {
        full = raw.round() as usize;
    }
    let remainder = t_end - full as f64 * dt;
    if remainder > dt * 1e-9 {
        (full, remainder)
    } else {
        (full, 0.0)
    }
}

/// Fixed-step RK4 over [0, t_end], sampling every step. The state is never
/// renormalized; simplex drift is measured at each sample and the run aborts
/// once it passes [`ABORT_DRIFT_TOL`].
pub fn integrate(
    x0: &FrequencyVector,
    a: &PayoffMatrix,
    dt: f64,
    t_end: f64,
) -> Result<Trajectory> {
    a.check_dim(x0, "integrate initial state")?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("t_end must be >= 0, got {t_end}")));
    }

    let (full_steps, remainder) = step_plan(dt, t_end);
    let mut times = Vec::with_capacity(full_steps + 2);
    let mut states = Vec::with_capacity(full_steps + 2);
    let mut entropies = Vec::with_capacity(full_steps + 2);

    let mut probs = x0.probs().to_vec();
    let mut record = |t: f64, probs: &[f64], states: &mut Vec<FrequencyVector>| -> Result<()> {
        let drift = simplex_drift(probs);
        // Negated comparison so a NaN state (fully diverged run) also aborts.
        if !(drift <= ABORT_DRIFT_TOL) {
            return Err(Error::DriftExceeded {
                what: "simplex",
                t,
                drift,
                limit: ABORT_DRIFT_TOL,
            });
        }
        let state = FrequencyVector::with_drift(probs.to_vec(), ABORT_DRIFT_TOL)?;
        times.push(t);
        entropies.push(shannon_entropy(&state));
        states.push(state);
        Ok(())
    };

    record(0.0, &probs, &mut states)?;
    for step in 0..full_steps {
        probs = rk4_step(&probs, a, dt);
        record((step + 1) as f64 * dt, &probs, &mut states)?;
    }
    if remainder > 0.0 {
        probs = rk4_step(&probs, a, remainder);
        record(t_end, &probs, &mut states)?;
    }

    Ok(Trajectory { times, states, entropies })
}

/// H = -sum_i x_i ln x_i in nats, with 0 ln 0 = 0.
pub fn shannon_entropy(x: &FrequencyVector) -> f64 {
    shannon_entropy_raw(x.probs())
}

pub(crate) fn shannon_entropy_raw(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
}

/// dH/dt along the replicator flow, as the trace of U(H~ - X) with all three
/// factors diagonal: sum_i U_i (-x_i ln x_i - x_i). The -x_i part cancels
/// because the weighted excess vanishes, leaving sum_i U_i (-x_i ln x_i).
pub fn shannon_entropy_rate(x: &FrequencyVector, a: &PayoffMatrix) -> Result<f64> {
    let report = fitness(x, a)?;
    let rate = x
        .probs()
        .iter()
        .zip(&report.excess)
        .map(|(&xi, &ui)| {
            let h = if xi > 0.0 { -xi * xi.ln() } else { 0.0 };
            ui * (h - xi)
        })
        .sum();
    Ok(rate)
}
