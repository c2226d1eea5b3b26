//! Density operators for the quantized replicator flow: the pure-state map
//! from frequency vectors, von Neumann evolution under time-dependent
//! Hamiltonians built from the commutator operator, entropy, and the series
//! expansion of its rate.

use crate::error::{Error, Result};
use crate::game::PayoffMatrix;
use crate::lax;
use crate::replicator::{self, Trajectory};
use crate::simplex::FrequencyVector;
use nalgebra::{Complex, DMatrix};

pub type C64 = Complex<f64>;

/// Hermiticity/trace tolerance for construction.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues of a state below this are invalid; in [floor, 0] they clamp to 0.
pub const STATE_EIGENVALUE_FLOOR: f64 = -1e-10;
/// Invariant drift at which von Neumann integration aborts.
pub const DENSITY_ABORT_TOL: f64 = 1e-4;
/// Eigenvalues at or below this sit on the logarithm singularity.
pub const SINGULAR_EIGENVALUE: f64 = 1e-14;
/// Eigenvalue rates below this are treated as zero on singular eigenvalues.
pub const NEGLIGIBLE_RATE: f64 = 1e-12;

fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn trace_re(m: &DMatrix<C64>) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

#[cfg(test)]
fn max_entry_norm(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Hermitian, unit-trace, positive-semidefinite (to tolerance) state.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    entries: DMatrix<C64>,
}

impl DensityOperator {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "density operator must be square and nonempty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let herm = hermitian_defect(&entries);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "density operator hermiticity defect {herm:.3e} exceeds {HERMITIAN_TOL:.1e}"
            )));
        }
        let tr: C64 = (0..entries.nrows()).map(|i| entries[(i, i)]).sum();
        if (tr.re - 1.0).abs() > HERMITIAN_TOL || tr.im.abs() > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("density operator trace {tr} is not 1")));
        }
        let state = Self { entries };
        let low = state.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if low < STATE_EIGENVALUE_FLOOR {
            return Err(Error::InvalidState(format!(
                "density operator eigenvalue {low:.3e} below {STATE_EIGENVALUE_FLOOR:.1e}"
            )));
        }
        Ok(state)
    }

    /// Mixed diagonal state from a probability vector.
    pub fn from_probabilities(x: &FrequencyVector) -> Self {
        let n = x.len();
        let probs = x.probs();
        Self {
            entries: DMatrix::from_fn(n, n, |i, j| {
                if i == j { C64::new(probs[i], 0.0) } else { C64::new(0.0, 0.0) }
            }),
        }
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        let w = 1.0 / n as f64;
        Ok(Self {
            entries: DMatrix::from_fn(n, n, |i, j| {
                if i == j { C64::new(w, 0.0) } else { C64::new(0.0, 0.0) }
            }),
        })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn purity(&self) -> f64 {
        trace_re(&(&self.entries * &self.entries))
    }

    /// Real eigenvalues of the Hermitian matrix, ascending.
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

    /// Largest violation among hermiticity and unit trace.
    pub fn invariant_drift(&self) -> f64 {
        hermitian_defect(&self.entries).max((trace_re(&self.entries) - 1.0).abs())
    }
}

/// ρ_ii = x_i, ρ_ij = sqrt(x_i x_j): the pure projector onto the square-root
/// frequency vector. Entrywise equal to the real frequency matrix.
pub fn quantize(x: &FrequencyVector) -> DensityOperator {
    let real = lax::build_frequency_matrix(x);
    let n = real.n();
    DensityOperator {
        entries: DMatrix::from_fn(n, n, |i, j| C64::new(real.entry(i, j), 0.0)),
    }
}

/// Hermitian generator with its action scale.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    entries: DMatrix<C64>,
    hbar: f64,
}

impl Hamiltonian {
    pub fn new(entries: DMatrix<C64>, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::InvalidArgument(format!("hbar must be positive, got {hbar}")));
        }
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidArgument("Hamiltonian must be square".into()));
        }
        let herm = hermitian_defect(&entries);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "Hamiltonian hermiticity defect {herm:.3e} exceeds {HERMITIAN_TOL:.1e}"
            )));
        }
        Ok(Self { entries, hbar })
    }

    pub fn zero(n: usize, hbar: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(n, n, C64::new(0.0, 0.0)), hbar)
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }
}

/// H = i*hbar*Lambda: antisymmetric real input becomes Hermitian with zero
/// diagonal and purely imaginary off-diagonals.
pub fn hamiltonian_from_lambda(lambda: &DMatrix<f64>, hbar: f64) -> Result<Hamiltonian> {
    if lambda.nrows() != lambda.ncols() {
        return Err(Error::InvalidArgument("Lambda must be square".into()));
    }
    let anti = (lambda + lambda.transpose()).abs().max();
    if anti > 1e-10 {
        return Err(Error::InvalidState(format!(
            "Lambda antisymmetry defect {anti:.3e} exceeds 1e-10"
        )));
    }
    let n = lambda.nrows();
    let entries = DMatrix::from_fn(n, n, |i, j| C64::new(0.0, hbar * lambda[(i, j)]));
    Hamiltonian::new(entries, hbar)
}

/// dρ/dt = (-i/ħ)(Hρ - ρH). Hermitian and traceless whenever the inputs are.
pub fn von_neumann_rhs(rho: &DensityOperator, h: &Hamiltonian) -> Result<DMatrix<C64>> {
    if rho.n() != h.n() {
        return Err(Error::DimensionMismatch {
            context: "von_neumann_rhs Hamiltonian",
            expected: rho.n(),
            got: h.n(),
        });
    }
    Ok(commutator_rhs(rho.as_matrix(), h))
}

fn commutator_rhs(rho: &DMatrix<C64>, h: &Hamiltonian) -> DMatrix<C64> {
    let hm = &h.entries;
    let comm = hm * rho - rho * hm;
    comm * C64::new(0.0, -1.0 / h.hbar)
}

/// Supplies the generator at the stage times requested by the integrator.
pub trait HamiltonianSource {
    fn hamiltonian_at(&self, t: f64) -> Result<Hamiltonian>;
}

/// Fixed generator for autonomous evolution.
pub struct ConstantHamiltonian(pub Hamiltonian);

impl HamiltonianSource for ConstantHamiltonian {
    fn hamiltonian_at(&self, _t: f64) -> Result<Hamiltonian> {
        Ok(self.0.clone())
    }
}

impl<F> HamiltonianSource for F
where
    F: Fn(f64) -> Result<Hamiltonian>,
{
    fn hamiltonian_at(&self, t: f64) -> Result<Hamiltonian> {
        self(t)
    }
}

/// i*hbar*Lambda(x(t)) along a reference replicator trajectory, resolved at
/// half the requested integration step so RK4 midpoints land on stored
/// samples; off-grid times fall back to linear interpolation of the state.
pub struct ReplicatorHamiltonian {
    reference: Trajectory,
    payoff: PayoffMatrix,
    half_dt: f64,
    hbar: f64,
}

impl ReplicatorHamiltonian {
    pub fn new(
        x0: &FrequencyVector,
        a: &PayoffMatrix,
        dt: f64,
        t_end: f64,
        hbar: f64,
    ) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::InvalidArgument(format!("hbar must be positive, got {hbar}")));
        }
        let half_dt = dt / 2.0;
        let reference = replicator::integrate(x0, a, half_dt, t_end)?;
        Ok(Self { reference, payoff: a.clone(), half_dt, hbar })
    }

    pub fn reference(&self) -> &Trajectory {
        &self.reference
    }

    fn state_at(&self, t: f64) -> Result<FrequencyVector> {
        let last_t = *self.reference.times.last().expect("nonempty trajectory");
        if t < -1e-12 || t > last_t + 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "requested Hamiltonian at t={t} outside the reference span [0, {last_t}]"
            )));
        }
        let idx = (t / self.half_dt).round();
        let on_grid = (t - idx * self.half_dt).abs() <= 1e-9 * t.abs().max(1.0);
        if on_grid && (idx as usize) < self.reference.states.len() {
            return Ok(self.reference.states[idx as usize].clone());
        }
        // Between samples: interpolate the frequencies linearly.
        let below = ((t / self.half_dt).floor() as usize).min(self.reference.states.len() - 1);
        let above = (below + 1).min(self.reference.states.len() - 1);
        let t0 = self.reference.times[below];
        let t1 = self.reference.times[above];
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        let lo = self.reference.states[below].probs();
        let hi = self.reference.states[above].probs();
        let probs = lo.iter().zip(hi).map(|(a, b)| a + w * (b - a)).collect();
        FrequencyVector::with_drift(probs, crate::replicator::ABORT_DRIFT_TOL)
    }
}

impl HamiltonianSource for ReplicatorHamiltonian {
    fn hamiltonian_at(&self, t: f64) -> Result<Hamiltonian> {
        let x = self.state_at(t)?;
        let ops = lax::lax_operators(&x, &self.payoff)?;
        hamiltonian_from_lambda(&ops.lambda, self.hbar)
    }
}

/// RK4 for the von Neumann equation with stage-time Hamiltonian evaluation.
/// Samples every step; aborts when hermiticity, trace, or purity drift past
/// [`DENSITY_ABORT_TOL`].
pub fn integrate_von_neumann<S: HamiltonianSource + ?Sized>(
    rho0: &DensityOperator,
    source: &S,
    dt: f64,
    t_end: f64,
) -> Result<Vec<(f64, DensityOperator)>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("t_end must be >= 0, got {t_end}")));
    }

    let purity0 = rho0.purity();
    let (full_steps, remainder) = crate::replicator::step_plan(dt, t_end);
    let mut samples = Vec::with_capacity(full_steps + 2);
    let mut rho = rho0.as_matrix().clone();

    let record = |t: f64,
                  m: &DMatrix<C64>,
                  out: &mut Vec<(f64, DensityOperator)>|
     -> Result<()> {
        let state = DensityOperator { entries: m.clone() };
        let drift = state.invariant_drift().max((state.purity() - purity0).abs());
        if !(drift <= DENSITY_ABORT_TOL) {
            return Err(Error::DriftExceeded { what: "density operator", t, drift, limit: DENSITY_ABORT_TOL });
        }
        out.push((t, state));
        Ok(())
    };

    record(0.0, &rho, &mut samples)?;
    let advance = |rho: &DMatrix<C64>, t: f64, h: f64| -> Result<DMatrix<C64>> {
        let h1 = source.hamiltonian_at(t)?;
        let h2 = source.hamiltonian_at(t + h / 2.0)?;
        let h4 = source.hamiltonian_at(t + h)?;
        for hh in [&h1, &h2, &h4] {
            if hh.n() != rho.nrows() {
                return Err(Error::DimensionMismatch {
                    context: "integrate_von_neumann Hamiltonian",
                    expected: rho.nrows(),
                    got: hh.n(),
                });
            }
        }
        let k1 = commutator_rhs(rho, &h1);
        let k2 = commutator_rhs(&(rho + &k1 * C64::new(h / 2.0, 0.0)), &h2);
        let k3 = commutator_rhs(&(rho + &k2 * C64::new(h / 2.0, 0.0)), &h2);
        let k4 = commutator_rhs(&(rho + &k3 * C64::new(h, 0.0)), &h4);
        let two = C64::new(2.0, 0.0);
        Ok(rho + (k1 + k2 * two + k3 * two + k4) * C64::new(h / 6.0, 0.0))
    };

    for step in 0..full_steps {
        let t = step as f64 * dt;
        rho = advance(&rho, t, dt)?;
        record((step + 1) as f64 * dt, &rho, &mut samples)?;
    }
    if remainder > 0.0 {
        let t = full_steps as f64 * dt;
        rho = advance(&rho, t, remainder)?;
        record(t_end, &rho, &mut samples)?;
    }
    Ok(samples)
}

/// S = -sum lambda ln lambda over the spectrum, clamping the tolerated
/// negative band to zero.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    let mut s = 0.0;
    for lam in rho.eigenvalues() {
        if lam < STATE_EIGENVALUE_FLOOR {
            return Err(Error::InvalidState(format!(
                "eigenvalue {lam:.3e} below {STATE_EIGENVALUE_FLOOR:.1e}"
            )));
        }
        if lam > 0.0 {
            s -= lam * lam.ln();
        }
    }
    Ok(s)
}

/// Entropy rate, both ways: the printed four-sum series truncation and the
/// eigenbasis rate, with zeta their gap. `exact` is absent when an
/// eigenvalue sits on the logarithm singularity while still moving.
#[derive(Debug, Clone)]
pub struct EntropyRateReport {
    pub truncated: f64,
    pub exact: Option<f64>,
    pub zeta: Option<f64>,
}

pub fn entropy_rate_series(
    rho: &DensityOperator,
    rho_dot: &DMatrix<C64>,
) -> Result<EntropyRateReport> {
    if rho_dot.nrows() != rho.n() || rho_dot.ncols() != rho.n() {
        return Err(Error::DimensionMismatch {
            context: "entropy_rate_series rate matrix",
            expected: rho.n(),
            got: rho_dot.nrows(),
        });
    }
    let herm = hermitian_defect(rho_dot);
    if herm > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "rate matrix hermiticity defect {herm:.3e} exceeds 1e-10"
        )));
    }
    let tr = trace_re(rho_dot);
    if tr.abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("rate matrix trace {tr:.3e} is not 0")));
    }

    let r = rho.as_matrix();
    let r2 = r * r;
    let r3 = &r2 * r;
    let t1 = trace_re(rho_dot);
    let t2 = trace_re(&(r * rho_dot));
    let t3 = trace_re(&(&r2 * rho_dot));
    let t4 = trace_re(&(&r3 * rho_dot));
    let truncated = 11.0 / 6.0 * t1 - 6.0 * t2 + 4.5 * t3 - 4.0 / 3.0 * t4;

    let eig = rho.as_matrix().clone().symmetric_eigen();
    let mut exact = Some(0.0);
    for m in 0..rho.n() {
        let v = eig.eigenvectors.column(m);
        let lam = eig.eigenvalues[m];
        // lambda_dot by first-order perturbation: <m|rho_dot|m>
        let mut rate = C64::new(0.0, 0.0);
        for i in 0..rho.n() {
            for j in 0..rho.n() {
                rate += v[i].conj() * rho_dot[(i, j)] * v[j];
            }
        }
        let rate = rate.re;
        if lam <= SINGULAR_EIGENVALUE {
            if rate.abs() > NEGLIGIBLE_RATE {
                exact = None;
                break;
            }
            continue;
        }
        if let Some(total) = exact.as_mut() {
            *total -= rate * (lam.ln() + 1.0);
        }
    }
    let zeta = exact.map(|e| e - truncated);
    Ok(EntropyRateReport { truncated, exact, zeta })
}
