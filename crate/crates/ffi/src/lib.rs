//! C ABI over the entropy-games core: opaque handles, status codes, and a
//! thread-local last-error message. The matching header is generated into
//! `include/entropy_games.h` at build time.
//!
//! Conventions shared by every function here:
//! - Pointers are borrowed for the duration of the call unless the function
//!   hands out a handle; handles are released by the matching `_free`.
//! - Array arguments are caller-allocated with the documented length.
//! - On any status other than `EG_STATUS_OK`, `eg_last_error` returns a
//!   message describing the failure; the pointer stays valid on the calling
//!   thread until its next failed call.
//! - Entropies are in nats except where a function says bits.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use entropy_games::error::Error;
use entropy_games::{game, info, replicator, thermo};
use entropy_games::{FrequencyVector, JointDistribution, PayoffMatrix, Trajectory};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EgStatus {
    /// Success.
    Ok = 0,
    /// Rejected input: bad dimensions, non-simplex state, unreachable target.
    InvalidInput = 1,
    /// A numerical invariant failed mid-computation (drift, consistency).
    Numerical = 2,
    /// A required pointer was null.
    NullPointer = 3,
    /// Internal fault; file a bug.
    Internal = 4,
}

/// Opaque square payoff matrix.
pub struct EgGame {
    payoff: PayoffMatrix,
}

/// Opaque sampled trajectory of a replicator run.
pub struct EgTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: EgStatus, msg: &str) -> EgStatus {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("nul bytes stripped");
    });
    status
}

fn fail_with(err: &Error) -> EgStatus {
    let status = if err.is_numerical() { EgStatus::Numerical } else { EgStatus::InvalidInput };
    fail(status, &err.to_string())
}

fn guarded(body: impl FnOnce() -> EgStatus) -> EgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(EgStatus::Internal, "internal panic"),
    }
}

macro_rules! require {
    ($ptr:expr) => {
        if $ptr.is_null() {
            return fail(EgStatus::NullPointer, concat!(stringify!($ptr), " must not be null"));
        }
    };
}

/// Message for the most recent failure on this thread; empty string if none.
/// Valid until the next failed call on the same thread.
#[no_mangle]
pub extern "C" fn eg_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn simplex_from(ptr: *const f64, n: usize) -> Result<FrequencyVector, Error> {
    FrequencyVector::new(slice::from_raw_parts(ptr, n).to_vec())
}

/// Builds a game from `n * n` row-major payoff entries into `*out`.
///
/// # Safety
/// `payoff` must point to `n * n` doubles; `out` must be a valid location.
#[no_mangle]
pub unsafe extern "C" fn eg_game_new(
    payoff: *const f64,
    n: usize,
    out: *mut *mut EgGame,
) -> EgStatus {
    guarded(|| {
        require!(payoff);
        require!(out);
        let flat = slice::from_raw_parts(payoff, n * n);
        let rows: Vec<Vec<f64>> = (0..n).map(|i| flat[i * n..(i + 1) * n].to_vec()).collect();
        match PayoffMatrix::new(rows) {
            Ok(matrix) => {
                *out = Box::into_raw(Box::new(EgGame { payoff: matrix }));
                EgStatus::Ok
            }
            Err(err) => fail_with(&err),
        }
    })
}

/// Releases a game handle. Null is ignored.
///
/// # Safety
/// `game` must come from [`eg_game_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn eg_game_free(game: *mut EgGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Number of strategies, or 0 for a null handle.
///
/// # Safety
/// `game` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn eg_game_size(game: *const EgGame) -> usize {
    if game.is_null() {
        0
    } else {
        (*game).payoff.n()
    }
}

/// Payoff of mixed strategy `p` against `q`, both of the game's size.
///
/// # Safety
/// `p` and `q` must point to `eg_game_size` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_expected_payoff(
    game: *const EgGame,
    p: *const f64,
    q: *const f64,
    out: *mut f64,
) -> EgStatus {
    guarded(|| {
        require!(game);
        require!(p);
        require!(q);
        require!(out);
        let n = (*game).payoff.n();
        let body = || -> Result<f64, Error> {
            let p = simplex_from(p, n)?;
            let q = simplex_from(q, n)?;
            game::expected_payoff(&p, &q, &(*game).payoff)
        };
        match body() {
            Ok(value) => {
                *out = value;
                EgStatus::Ok
            }
            Err(err) => fail_with(&err),
        }
    })
}

/// Writes whether `p` is a symmetric Nash equilibrium at tolerance `tol`.
///
/// # Safety
/// `p` must point to `eg_game_size` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_is_nash(
    game: *const EgGame,
    p: *const f64,
    tol: f64,
    out: *mut bool,
) -> EgStatus {
    guarded(|| {
        require!(game);
        require!(p);
        require!(out);
        let body = || -> Result<bool, Error> {
            let p = simplex_from(p, (*game).payoff.n())?;
            game::is_nash(&p, &(*game).payoff, tol)
        };
        match body() {
            Ok(value) => {
                *out = value;
                EgStatus::Ok
            }
            Err(err) => fail_with(&err),
        }
    })
}

/// Writes whether `p` is evolutionarily stable, probing invaders on a grid
/// of the given resolution.
///
/// # Safety
/// `p` must point to `eg_game_size` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_is_ess(
    game: *const EgGame,
    p: *const f64,
    tol: f64,
    probe_resolution: usize,
    out: *mut bool,
) -> EgStatus {
    guarded(|| {
        require!(game);
        require!(p);
        require!(out);
        let body = || -> Result<bool, Error> {
            let p = simplex_from(p, (*game).payoff.n())?;
            game::is_ess(&p, &(*game).payoff, tol, probe_resolution)
        };
        match body() {
            Ok(value) => {
                *out = value;
                EgStatus::Ok
            }
            Err(err) => fail_with(&err),
        }
    })
}

/// Writes the replicator velocity at `x` into `out` (`eg_game_size` doubles).
///
/// # Safety
/// `x` and `out` must point to `eg_game_size` doubles.
#[no_mangle]
pub unsafe extern "C" fn eg_replicator_rhs(
    game: *const EgGame,
    x: *const f64,
    out: *mut f64,
) -> EgStatus {
    guarded(|| {
        require!(game);
        require!(x);
        require!(out);
        let n = (*game).payoff.n();
        let body = || -> Result<Vec<f64>, Error> {
            let x = simplex_from(x, n)?;
            replicator::replicator_rhs(&x, &(*game).payoff)
        };
        match body() {
            Ok(rhs) => {
                slice::from_raw_parts_mut(out, n).copy_from_slice(&rhs);
                EgStatus::Ok
            }
            Err(err) => fail_with(&err),
        }
    })
}

/// Shannon entropy rate along the replicator flow at `x`, in nats per time.
///
/// # Safety
/// `x` must point to `eg_game_size` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_shannon_entropy_rate(
    game: *const EgGame,
    x: *const f64,
    out: *mut f64,
) -> EgStatus {
    guarded(|| {
        require!(game);
        require!(x);
        require!(out);
        let body = || -> Result<f64, Error> {
            let x = simplex_from(x, (*game).payoff.n())?;
            replicator::shannon_entropy_rate(&x, &(*game).payoff)
        };
        match body() {
            Ok(rate) => {
                *out = rate;
                EgStatus::Ok
            }
            Err(err) => fail_with(&err),
        }
    })
}

/// Integrates the replicator flow from `x0` and hands out a trajectory
/// handle. Fails with `EG_STATUS_NUMERICAL` if the state drifts off the
/// simplex (step too large for the game).
///
/// # Safety
/// `x0` must point to `eg_game_size` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_integrate(
    game: *const EgGame,
    x0: *const f64,
    dt: f64,
    t_end: f64,
    out: *mut *mut EgTrajectory,
) -> EgStatus {
    guarded(|| {
        require!(game);
        require!(x0);
        require!(out);
        let body = || -> Result<Trajectory, Error> {
            let x0 = simplex_from(x0, (*game).payoff.n())?;
            replicator::integrate(&x0, &(*game).payoff, dt, t_end)
        };
        match body() {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(EgTrajectory { inner }));
                EgStatus::Ok
            }
            Err(err) => fail_with(&err),
        }
    })
}

/// Releases a trajectory handle. Null is ignored.
///
/// # Safety
/// `trajectory` must come from [`eg_integrate`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn eg_trajectory_free(trajectory: *mut EgTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `trajectory` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn eg_trajectory_len(trajectory: *const EgTrajectory) -> usize {
    if trajectory.is_null() {
        0
    } else {
        (*trajectory).inner.len()
    }
}

/// State dimension, or 0 for a null handle.
///
/// # Safety
/// `trajectory` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn eg_trajectory_dim(trajectory: *const EgTrajectory) -> usize {
    if trajectory.is_null() {
        0
    } else {
        (*trajectory).inner.states.first().map_or(0, |x| x.len())
    }
}

/// Copies sample `index` into `t_out`, the state buffer `x_out`
/// (`eg_trajectory_dim` doubles), and `entropy_out` (nats).
///
/// # Safety
/// Output pointers must be valid; `x_out` must hold the state dimension.
#[no_mangle]
pub unsafe extern "C" fn eg_trajectory_sample(
    trajectory: *const EgTrajectory,
    index: usize,
    t_out: *mut f64,
    x_out: *mut f64,
    entropy_out: *mut f64,
) -> EgStatus {
    guarded(|| {
        require!(trajectory);
        require!(t_out);
        require!(x_out);
        require!(entropy_out);
        let inner = &(*trajectory).inner;
        if index >= inner.len() {
            return fail(
                EgStatus::InvalidInput,
                &format!("sample index {index} out of range for {} samples", inner.len()),
            );
        }
        *t_out = inner.times[index];
        let state = inner.states[index].probs();
        slice::from_raw_parts_mut(x_out, state.len()).copy_from_slice(state);
        *entropy_out = inner.entropies[index];
        EgStatus::Ok
    })
}

/// Shannon entropy of a probability vector, in nats.
///
/// # Safety
/// `probs` must point to `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_shannon_entropy(
    probs: *const f64,
    n: usize,
    out: *mut f64,
) -> EgStatus {
    guarded(|| {
        require!(probs);
        require!(out);
        match simplex_from(probs, n) {
            Ok(x) => {
                *out = replicator::shannon_entropy(&x);
                EgStatus::Ok
            }
            Err(err) => fail_with(&err),
        }
    })
}

/// Relative entropy D(x || y) in bits; writes C `INFINITY` when the support
/// of `x` escapes the support of `y`.
///
/// # Safety
/// `x` and `y` must point to `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_relative_entropy(
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut f64,
) -> EgStatus {
    guarded(|| {
        require!(x);
        require!(y);
        require!(out);
        let body = || -> Result<f64, Error> {
            let x = simplex_from(x, n)?;
            let y = simplex_from(y, n)?;
            info::relative_entropy(&x, &y)
        };
        match body() {
            Ok(value) => {
                *out = value;
                EgStatus::Ok
            }
            Err(err) => fail_with(&err),
        }
    })
}

/// Mutual information of a joint distribution (`rows * cols` row-major),
/// in bits.
///
/// # Safety
/// `joint` must point to `rows * cols` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_mutual_information(
    joint: *const f64,
    rows: usize,
    cols: usize,
    out: *mut f64,
) -> EgStatus {
    guarded(|| {
        require!(joint);
        require!(out);
        let flat = slice::from_raw_parts(joint, rows * cols);
        let table: Vec<Vec<f64>> =
            (0..rows).map(|i| flat[i * cols..(i + 1) * cols].to_vec()).collect();
        match JointDistribution::new(table) {
            Ok(j) => {
                *out = info::info_report(&j).i_ab;
                EgStatus::Ok
            }
            Err(err) => fail_with(&err),
        }
    })
}

/// Gibbs entropy S = ln Z + beta <E> of the spectrum at inverse
/// temperature `beta`, in nats.
///
/// # Safety
/// `energies` must point to `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_gibbs_entropy(
    energies: *const f64,
    n: usize,
    beta: f64,
    out: *mut f64,
) -> EgStatus {
    guarded(|| {
        require!(energies);
        require!(out);
        match thermo::gibbs(slice::from_raw_parts(energies, n), beta) {
            Ok(report) => {
                *out = report.s;
                EgStatus::Ok
            }
            Err(err) => fail_with(&err),
        }
    })
}

/// Writes the Gibbs occupation probabilities of the spectrum at `beta`
/// into `out` (`n` doubles).
///
/// # Safety
/// `energies` and `out` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn eg_gibbs_probs(
    energies: *const f64,
    n: usize,
    beta: f64,
    out: *mut f64,
) -> EgStatus {
    guarded(|| {
        require!(energies);
        require!(out);
        match thermo::gibbs(slice::from_raw_parts(energies, n), beta) {
            Ok(report) => {
                slice::from_raw_parts_mut(out, n).copy_from_slice(&report.probs);
                EgStatus::Ok
            }
            Err(err) => fail_with(&err),
        }
    })
}

/// Finds the inverse temperature whose Gibbs mean energy hits
/// `target_mean_e` within `tol`. Fails when the target is outside the open
/// range of the spectrum.
///
/// # Safety
/// `energies` must point to `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn eg_fit_beta(
    energies: *const f64,
    n: usize,
    target_mean_e: f64,
    tol: f64,
    out: *mut f64,
) -> EgStatus {
    guarded(|| {
        require!(energies);
        require!(out);
        match thermo::fit_beta(slice::from_raw_parts(energies, n), target_mean_e, tol) {
            Ok(beta) => {
                *out = beta;
                EgStatus::Ok
            }
            Err(err) => fail_with(&err),
        }
    })
}
