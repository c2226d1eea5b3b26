#ifndef ENTROPY_GAMES_H
#define ENTROPY_GAMES_H

/* Generated by cbindgen from entropy-games-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum EgStatus {
  /**
   * Success.
   */
  EG_STATUS_OK = 0,
  /**
   * Rejected input: bad dimensions, non-simplex state, unreachable target.
   */
  EG_STATUS_INVALID_INPUT = 1,
  /**
   * A numerical invariant failed mid-computation (drift, consistency).
   */
  EG_STATUS_NUMERICAL = 2,
  /**
   * A required pointer was null.
   */
  EG_STATUS_NULL_POINTER = 3,
  /**
   * Internal fault; file a bug.
   */
  EG_STATUS_INTERNAL = 4,
} EgStatus;

/**
 * Opaque square payoff matrix.
 */
typedef struct EgGame EgGame;

/**
 * Opaque sampled trajectory of a replicator run.
 */
typedef struct EgTrajectory EgTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; empty string if none.
 * Valid until the next failed call on the same thread.
 */
const char *eg_last_error(void);

/**
 * Builds a game from `n * n` row-major payoff entries into `*out`.
 *
 * # Safety
 * `payoff` must point to `n * n` doubles; `out` must be a valid location.
 */
enum EgStatus eg_game_new(const double *payoff, size_t n, struct EgGame **out);

/**
 * Releases a game handle. Null is ignored.
 *
 * # Safety
 * `game` must come from [`eg_game_new`] and not be freed twice.
 */
void eg_game_free(struct EgGame *game);

/**
 * Number of strategies, or 0 for a null handle.
 *
 * # Safety
 * `game` must be a live handle or null.
 */
size_t eg_game_size(const struct EgGame *game);

/**
 * Payoff of mixed strategy `p` against `q`, both of the game's size.
 *
 * # Safety
 * `p` and `q` must point to `eg_game_size` doubles; `out` must be valid.
 */
enum EgStatus eg_expected_payoff(const struct EgGame *game,
                                 const double *p,
                                 const double *q,
                                 double *out);

/**
 * Writes whether `p` is a symmetric Nash equilibrium at tolerance `tol`.
 *
 * # Safety
 * `p` must point to `eg_game_size` doubles; `out` must be valid.
 */
enum EgStatus eg_is_nash(const struct EgGame *game, const double *p, double tol, bool *out);

/**
 * Writes whether `p` is evolutionarily stable, probing invaders on a grid
 * of the given resolution.
 *
 * # Safety
 * `p` must point to `eg_game_size` doubles; `out` must be valid.
 */
enum EgStatus eg_is_ess(const struct EgGame *game,
                        const double *p,
                        double tol,
                        size_t probe_resolution,
                        bool *out);

/**
 * Writes the replicator velocity at `x` into `out` (`eg_game_size` doubles).
 *
 * # Safety
 * `x` and `out` must point to `eg_game_size` doubles.
 */
enum EgStatus eg_replicator_rhs(const struct EgGame *game, const double *x, double *out);

/**
 * Shannon entropy rate along the replicator flow at `x`, in nats per time.
 *
 * # Safety
 * `x` must point to `eg_game_size` doubles; `out` must be valid.
 */
enum EgStatus eg_shannon_entropy_rate(const struct EgGame *game, const double *x, double *out);

/**
 * Integrates the replicator flow from `x0` and hands out a trajectory
 * handle. Fails with `EG_STATUS_NUMERICAL` if the state drifts off the
 * simplex (step too large for the game).
 *
 * # Safety
 * `x0` must point to `eg_game_size` doubles; `out` must be valid.
 */
enum EgStatus eg_integrate(const struct EgGame *game,
                           const double *x0,
                           double dt,
                           double t_end,
                           struct EgTrajectory **out);

/**
 * Releases a trajectory handle. Null is ignored.
 *
 * # Safety
 * `trajectory` must come from [`eg_integrate`] and not be freed twice.
 */
void eg_trajectory_free(struct EgTrajectory *trajectory);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `trajectory` must be a live handle or null.
 */
size_t eg_trajectory_len(const struct EgTrajectory *trajectory);

/**
 * State dimension, or 0 for a null handle.
 *
 * # Safety
 * `trajectory` must be a live handle or null.
 */
size_t eg_trajectory_dim(const struct EgTrajectory *trajectory);

/**
 * Copies sample `index` into `t_out`, the state buffer `x_out`
 * (`eg_trajectory_dim` doubles), and `entropy_out` (nats).
 *
 * # Safety
 * Output pointers must be valid; `x_out` must hold the state dimension.
 */
enum EgStatus eg_trajectory_sample(const struct EgTrajectory *trajectory,
                                   size_t index,
                                   double *t_out,
                                   double *x_out,
                                   double *entropy_out);

/**
 * Shannon entropy of a probability vector, in nats.
 *
 * # Safety
 * `probs` must point to `n` doubles; `out` must be valid.
 */
enum EgStatus eg_shannon_entropy(const double *probs, size_t n, double *out);

/**
 * Relative entropy D(x || y) in bits; writes C `INFINITY` when the support
 * of `x` escapes the support of `y`.
 *
 * # Safety
 * `x` and `y` must point to `n` doubles; `out` must be valid.
 */
enum EgStatus eg_relative_entropy(const double *x, const double *y, size_t n, double *out);

/**
 * Mutual information of a joint distribution (`rows * cols` row-major),
 * in bits.
 *
 * # Safety
 * `joint` must point to `rows * cols` doubles; `out` must be valid.
 */
enum EgStatus eg_mutual_information(const double *joint, size_t rows, size_t cols, double *out);

/**
 * Gibbs entropy S = ln Z + beta <E> of the spectrum at inverse
 * temperature `beta`, in nats.
 *
 * # Safety
 * `energies` must point to `n` doubles; `out` must be valid.
 */
enum EgStatus eg_gibbs_entropy(const double *energies, size_t n, double beta, double *out);

/**
 * Writes the Gibbs occupation probabilities of the spectrum at `beta`
 * into `out` (`n` doubles).
 *
 * # Safety
 * `energies` and `out` must point to `n` doubles.
 */
enum EgStatus eg_gibbs_probs(const double *energies, size_t n, double beta, double *out);

/**
 * Finds the inverse temperature whose Gibbs mean energy hits
 * `target_mean_e` within `tol`. Fails when the target is outside the open
 * range of the spectrum.
 *
 * # Safety
 * `energies` must point to `n` doubles; `out` must be valid.
 */
enum EgStatus eg_fit_beta(const double *energies,
                          size_t n,
                          double target_mean_e,
                          double tol,
                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENTROPY_GAMES_H */
