//! Matrix form of the replicator dynamics: the square-root frequency matrix
//! X, the commutator operators driving dX/dt = [Lambda, X], an integrator for
//! the matrix flow, and the trace entropy of X.

use crate::error::{Error, Result};
use crate::game::PayoffMatrix;
use crate::simplex::FrequencyVector;
use nalgebra::DMatrix;

/// Consistency residual allowed between the two constructions of dX/dt.
pub const CROSS_CHECK_TOL: f64 = 1e-8;
/// Invariant drift at which the matrix flow aborts.
pub const MATRIX_ABORT_TOL: f64 = 1e-4;
/// Eigenvalues of X below this are an invalid matrix; above it but below
/// zero they are clamped.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

/// Symmetric rank-1 projector with entries (x_i x_j)^(1/2); diagonal is x
/// itself and the trace is 1.
#[derive(Debug, Clone)]
pub struct FrequencyMatrix {
    entries: DMatrix<f64>,
}

impl FrequencyMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.entries[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Largest violation among symmetry, unit trace, and idempotency.
    pub fn invariant_drift(&self) -> f64 {
        let sym = (&self.entries - self.entries.transpose()).abs().max();
        let tr = (self.entries.trace() - 1.0).abs();
        let idem = (&self.entries * &self.entries - &self.entries).abs().max();
        sym.max(tr).max(idem)
    }

    /// Sorted eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = self
            .entries
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        vals
    }
}

/// x_ij = sqrt(x_i x_j), with the diagonal set to x_i directly so it is
/// bit-exact, and negatives inside the root guarded to 0.
pub fn build_frequency_matrix(x: &FrequencyVector) -> FrequencyMatrix {
    FrequencyMatrix { entries: outer_sqrt(x.probs()) }
}

fn outer_sqrt(probs: &[f64]) -> DMatrix<f64> {
    let n = probs.len();
    let roots: Vec<f64> = probs.iter().map(|&p| p.max(0.0).sqrt()).collect();
    DMatrix::from_fn(n, n, |i, j| if i == j { probs[i] } else { roots[i] * roots[j] })
}

/// The operators of the commutator form at a simplex point: Q carries half
/// the fitness on its diagonal, Lambda = [Q, X] drives the flow, Theta is
/// the resulting velocity [Lambda, X], and G_sym is the same velocity
/// assembled directly from the payoff sums.
#[derive(Debug, Clone)]
pub struct LaxOperators {
    pub g_sym: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub lambda: DMatrix<f64>,
    pub theta: DMatrix<f64>,
}

pub fn lax_operators(x: &FrequencyVector, a: &PayoffMatrix) -> Result<LaxOperators> {
    a.check_dim(x, "lax_operators state")?;
    let ops = lax_operators_raw(x.probs(), a);
    let residual = (&ops.theta - &ops.g_sym).abs().max();
    if residual > CROSS_CHECK_TOL {
        return Err(Error::ConsistencyFailure {
            what: "commutator velocity vs direct velocity",
            residual,
            limit: CROSS_CHECK_TOL,
        });
    }
    Ok(ops)
}

fn lax_operators_raw(probs: &[f64], a: &PayoffMatrix) -> LaxOperators {
    let n = probs.len();
    let x_mat = outer_sqrt(probs);
    let mut fit = vec![0.0; n];
    for i in 0..n {
        for (k, &xk) in probs.iter().enumerate() {
            fit[i] += a.entry(i, k) * xk;
        }
    }
    let mean: f64 = fit.iter().zip(probs).map(|(f, x)| f * x).sum();

    let q = DMatrix::from_fn(n, n, |i, j| if i == j { 0.5 * fit[i] } else { 0.0 });
    // Lambda_ij = (1/2)[f_i x_ij - x_ji f_j]; antisymmetric since X is
    // symmetric.
    let lambda = DMatrix::from_fn(n, n, |i, j| {
        0.5 * (fit[i] * x_mat[(i, j)] - x_mat[(j, i)] * fit[j])
    });
    let theta = &lambda * &x_mat - &x_mat * &lambda;
    // (G+G^T)_ij = (1/2)f_i x_ij + (1/2)f_j x_ji - <f> x_ij
    let g_sym = DMatrix::from_fn(n, n, |i, j| {
        0.5 * fit[i] * x_mat[(i, j)] + 0.5 * fit[j] * x_mat[(j, i)] - mean * x_mat[(i, j)]
    });
    LaxOperators { g_sym, q, lambda, theta }
}

/// RK4 on dX/dt = [Lambda(diag X), X] sampling every step. Lambda is rebuilt
/// from the current diagonal at every stage; nothing is renormalized, and
/// invariant drift past [`MATRIX_ABORT_TOL`] aborts the run.
pub fn integrate_matrix_flow(
    x0: &FrequencyVector,
    a: &PayoffMatrix,
    dt: f64,
    t_end: f64,
) -> Result<Vec<(f64, FrequencyMatrix)>> {
    a.check_dim(x0, "integrate_matrix_flow initial state")?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("t_end must be >= 0, got {t_end}")));
    }

    let rhs = |m: &DMatrix<f64>| -> DMatrix<f64> {
        let diag: Vec<f64> = (0..m.nrows()).map(|i| m[(i, i)]).collect();
        let lambda = lambda_from_diag(&diag, a);
        &lambda * m - m * &lambda
    };

    let (full_steps, remainder) = crate::replicator::step_plan(dt, t_end);
    let mut samples = Vec::with_capacity(full_steps + 2);
    let mut m = outer_sqrt(x0.probs());

    let record = |t: f64, m: &DMatrix<f64>, out: &mut Vec<(f64, FrequencyMatrix)>| -> Result<()> {
        let fm = FrequencyMatrix { entries: m.clone() };
        let drift = fm.invariant_drift();
        if !(drift <= MATRIX_ABORT_TOL) {
            return Err(Error::DriftExceeded { what: "frequency matrix", t, drift, limit: MATRIX_ABORT_TOL });
        }
        out.push((t, fm));
        Ok(())
    };

    record(0.0, &m, &mut samples)?;
    let step_with = |m: &DMatrix<f64>, h: f64| -> DMatrix<f64> {
        let k1 = rhs(m);
        let k2 = rhs(&(m + &k1 * (h / 2.0)));
        let k3 = rhs(&(m + &k2 * (h / 2.0)));
        let k4 = rhs(&(m + &k3 * h));
        m + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
    };
    for step in 0..full_steps {
        m = step_with(&m, dt);
        record((step + 1) as f64 * dt, &m, &mut samples)?;
    }
    if remainder > 0.0 {
        m = step_with(&m, remainder);
        record(t_end, &m, &mut samples)?;
    }
    Ok(samples)
}

fn lambda_from_diag(diag: &[f64], a: &PayoffMatrix) -> DMatrix<f64> {
    let n = diag.len();
    let x_mat = outer_sqrt(diag);
    let mut fit = vec![0.0; n];
    for i in 0..n {
        for (k, &xk) in diag.iter().enumerate() {
            fit[i] += a.entry(i, k) * xk;
        }
    }
    DMatrix::from_fn(n, n, |i, j| 0.5 * (fit[i] * x_mat[(i, j)] - x_mat[(j, i)] * fit[j]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixEntropyMode {
    /// -sum lambda ln lambda over the spectrum of X; identically 0 for an
    /// exact rank-1 projector.
    Eigen,
    /// -sum x_ii ln x_ii over the diagonal, recovering the Shannon entropy
    /// of the underlying frequencies.
    Diagonal,
}

pub fn matrix_entropy(x: &FrequencyMatrix, mode: MatrixEntropyMode) -> Result<f64> {
    let values: Vec<f64> = match mode {
        MatrixEntropyMode::Eigen => x.eigenvalues(),
        MatrixEntropyMode::Diagonal => x.diagonal(),
    };
    let mut h = 0.0;
    for &v in &values {
        if v < EIGENVALUE_FLOOR {
            return Err(Error::InvalidState(format!(
                "matrix entropy input has eigenvalue {v:.3e} below {EIGENVALUE_FLOOR:.1e}"
            )));
        }
        if v > 0.0 {
            h -= v * v.ln();
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replicator;

    fn pd() -> PayoffMatrix {
        PayoffMatrix::new(vec![vec![3.0, 0.0], vec![5.0, 1.0]]).unwrap()
    }

    fn hawk_dove() -> PayoffMatrix {
        PayoffMatrix::new(vec![vec![-1.0, 2.0], vec![0.0, 1.0]]).unwrap()
    }

    fn fv(probs: &[f64]) -> FrequencyVector {
        FrequencyVector::new(probs.to_vec()).unwrap()
    }

    #[test]
    fn vertex_projector() {
        let m = build_frequency_matrix(&fv(&[1.0, 0.0]));
        assert_eq!(m.entry(0, 0), 1.0);
        assert_eq!(m.entry(0, 1), 0.0);
        assert_eq!(m.entry(1, 0), 0.0);
        assert_eq!(m.entry(1, 1), 0.0);
    }

    #[test]
    fn uniform_two_gives_constant_half() {
        let m = build_frequency_matrix(&fv(&[0.5, 0.5]));
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.entry(i, j) - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn off_diagonal_is_geometric_mean() {
        let m = build_frequency_matrix(&fv(&[0.25, 0.75]));
        assert!((m.entry(0, 1) - 0.4330127018922193).abs() < 1e-16);
        assert_eq!(m.diagonal(), vec![0.25, 0.75]);
        assert!(m.invariant_drift() < 1e-12);
    }

    #[test]
    fn frequency_matrix_is_projector() {
        let m = build_frequency_matrix(&fv(&[0.1, 0.2, 0.3, 0.4]));
        assert!(m.invariant_drift() < 1e-12);
        let eig = m.eigenvalues();
        assert!((eig[3] - 1.0).abs() < 1e-12);
        for &l in &eig[..3] {
            assert!(l.abs() < 1e-12);
        }
    }

    #[test]
    fn zero_game_operators_vanish() {
        let z = PayoffMatrix::zero(2).unwrap();
        let ops = lax_operators(&fv(&[0.3, 0.7]), &z).unwrap();
        assert_eq!(ops.q.abs().max(), 0.0);
        assert_eq!(ops.lambda.abs().max(), 0.0);
        assert_eq!(ops.theta.abs().max(), 0.0);
        assert_eq!(ops.g_sym.abs().max(), 0.0);
    }

    #[test]
    fn lambda_matches_hand_evaluation() {
        let ops = lax_operators(&fv(&[0.5, 0.5]), &pd()).unwrap();
        assert!((ops.lambda[(0, 1)] - -0.375).abs() < 1e-15);
        assert!((ops.lambda[(1, 0)] - 0.375).abs() < 1e-15);
        assert_eq!(ops.lambda[(0, 0)], 0.0);
        assert_eq!(ops.lambda[(1, 1)], 0.0);
    }

    #[test]
    fn theta_diagonal_is_replicator_velocity() {
        let x = fv(&[0.5, 0.5]);
        let ops = lax_operators(&x, &pd()).unwrap();
        let rhs = replicator::replicator_rhs(&x, &pd()).unwrap();
        for i in 0..2 {
            assert!((ops.theta[(i, i)] - rhs[i]).abs() < 1e-15);
        }
        assert!((ops.theta[(0, 0)] - -0.375).abs() < 1e-15);
    }

    #[test]
    fn operator_structure_invariants() {
        let x = fv(&[0.2, 0.5, 0.3]);
        let a = PayoffMatrix::new(vec![
            vec![1.0, -2.0, 0.5],
            vec![3.0, 0.0, 1.0],
            vec![-1.0, 2.0, 4.0],
        ])
        .unwrap();
        let ops = lax_operators(&x, &a).unwrap();
        assert!((&ops.lambda + ops.lambda.transpose()).abs().max() < 1e-12);
        assert!((&ops.theta - ops.theta.transpose()).abs().max() < 1e-12);
        assert!(ops.theta.trace().abs() < 1e-12);
        assert!((&ops.theta - &ops.g_sym).abs().max() < 1e-10);
        // double-commutator identity: [[Q,X],X] = [Lambda,X]
        let xm = build_frequency_matrix(&x);
        let qx = &ops.q * xm.as_matrix() - xm.as_matrix() * &ops.q;
        let double = &qx * xm.as_matrix() - xm.as_matrix() * &qx;
        assert!((&double - &ops.theta).abs().max() < 1e-12);
    }

    #[test]
    fn zero_game_matrix_flow_is_constant() {
        let z = PayoffMatrix::zero(2).unwrap();
        let samples = integrate_matrix_flow(&fv(&[0.3, 0.7]), &z, 0.01, 0.5).unwrap();
        assert_eq!(samples.len(), 51);
        let first = samples[0].1.as_matrix().clone();
        for (_, m) in &samples {
            assert_eq!((m.as_matrix() - &first).abs().max(), 0.0);
        }
    }

    #[test]
    fn matrix_flow_diagonal_tracks_vector_flow() {
        let x0 = fv(&[0.9, 0.1]);
        let a = hawk_dove();
        let matrix = integrate_matrix_flow(&x0, &a, 1e-3, 50.0).unwrap();
        let vector = replicator::integrate(&x0, &a, 1e-3, 50.0).unwrap();
        assert_eq!(matrix.len(), vector.len());
        let (_, last) = matrix.last().unwrap();
        let end_diag = last.diagonal();
        assert!((end_diag[0] - 0.5).abs() < 1e-5);
        assert!((end_diag[1] - 0.5).abs() < 1e-5);
        for (k, (t, m)) in matrix.iter().enumerate().step_by(5000) {
            assert!((t - vector.times[k]).abs() < 1e-12);
            let diag = m.diagonal();
            for (i, &xi) in vector.states[k].probs().iter().enumerate() {
                assert!((diag[i] - xi).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn matrix_flow_stays_near_projector() {
        let x0 = fv(&[0.2, 0.5, 0.3]);
        let a = PayoffMatrix::new(vec![
            vec![0.0, 2.0, -1.0],
            vec![-2.0, 0.0, 3.0],
            vec![1.0, -3.0, 0.0],
        ])
        .unwrap();
        let samples = integrate_matrix_flow(&x0, &a, 1e-3, 10.0).unwrap();
        for (_, m) in samples.iter().step_by(500) {
            assert!(m.invariant_drift() < 1e-6);
            let eig = m.eigenvalues();
            assert!((eig[2] - 1.0).abs() < 1e-6);
            assert!(eig[0].abs() < 1e-6 && eig[1].abs() < 1e-6);
        }
    }

    #[test]
    fn entropy_modes() {
        let m = build_frequency_matrix(&fv(&[0.25, 0.75]));
        assert!(matrix_entropy(&m, MatrixEntropyMode::Eigen).unwrap().abs() < 1e-12);
        let d = matrix_entropy(&m, MatrixEntropyMode::Diagonal).unwrap();
        assert!((d - 0.5623351446188083).abs() < 1e-15);
        let u = build_frequency_matrix(&FrequencyVector::uniform(3).unwrap());
        let d3 = matrix_entropy(&u, MatrixEntropyMode::Diagonal).unwrap();
        assert!((d3 - 3.0f64.ln()).abs() < 1e-12);
    }
}
