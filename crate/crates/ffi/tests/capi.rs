use std::ffi::CStr;
use std::ptr;

use entropy_games_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(eg_last_error()) }.to_string_lossy().into_owned()
}

unsafe fn make_game(payoff: &[f64], n: usize) -> *mut EgGame {
    let mut game = ptr::null_mut();
    assert_eq!(eg_game_new(payoff.as_ptr(), n, &mut game), EgStatus::Ok);
    assert!(!game.is_null());
    game
}

#[test]
fn game_lifecycle_and_queries() {
    unsafe {
        let game = make_game(&[3.0, 0.0, 5.0, 1.0], 2);
        assert_eq!(eg_game_size(game), 2);

        let p = [0.5, 0.5];
        let q = [0.25, 0.75];
        let mut value = 0.0;
        assert_eq!(eg_expected_payoff(game, p.as_ptr(), q.as_ptr(), &mut value), EgStatus::Ok);
        // 0.5 * (3 * 0.25) + 0.5 * (5 * 0.25 + 1 * 0.75)
        assert!((value - 1.375).abs() < 1e-15);

        let defect = [0.0, 1.0];
        let mut nash = false;
        assert_eq!(eg_is_nash(game, defect.as_ptr(), 1e-9, &mut nash), EgStatus::Ok);
        assert!(nash);
        let mut ess = false;
        assert_eq!(eg_is_ess(game, defect.as_ptr(), 1e-9, 50, &mut ess), EgStatus::Ok);
        assert!(ess);

        let x = [0.5, 0.5];
        let mut rhs = [0.0f64; 2];
        assert_eq!(eg_replicator_rhs(game, x.as_ptr(), rhs.as_mut_ptr()), EgStatus::Ok);
        assert!((rhs[0] - -0.375).abs() < 1e-15);
        assert!((rhs[0] + rhs[1]).abs() < 1e-15);

        let mut rate = 0.0;
        assert_eq!(eg_shannon_entropy_rate(game, x.as_ptr(), &mut rate), EgStatus::Ok);
        assert!(rate.is_finite());

        eg_game_free(game);
    }
}

#[test]
fn trajectory_roundtrip() {
    unsafe {
        // Hawk-Dove: the flow settles at (1/2, 1/2)
        let game = make_game(&[-1.0, 2.0, 0.0, 1.0], 2);
        let x0 = [0.9, 0.1];
        let mut traj = ptr::null_mut();
        assert_eq!(eg_integrate(game, x0.as_ptr(), 1e-3, 50.0, &mut traj), EgStatus::Ok);

        let len = eg_trajectory_len(traj);
        assert_eq!(len, 50_001);
        assert_eq!(eg_trajectory_dim(traj), 2);

        let mut t = 0.0;
        let mut x = [0.0f64; 2];
        let mut entropy = 0.0;
        assert_eq!(
            eg_trajectory_sample(traj, len - 1, &mut t, x.as_mut_ptr(), &mut entropy),
            EgStatus::Ok
        );
        assert_eq!(t, 50.0);
        assert!((x[0] - 0.5).abs() < 1e-6);
        assert!((entropy - 2.0f64.ln()).abs() < 1e-5);

        let status = eg_trajectory_sample(traj, len, &mut t, x.as_mut_ptr(), &mut entropy);
        assert_eq!(status, EgStatus::InvalidInput);
        assert!(last_error().contains("out of range"));

        eg_trajectory_free(traj);
        eg_game_free(game);
    }
}

#[test]
fn numerical_failure_is_distinguished() {
    unsafe {
        // An oversized step on a cyclic game throws the state off the simplex.
        let game = make_game(&[0.0, 12.0, -12.0, 0.0], 2);
        let x0 = [0.95, 0.05];
        let mut traj = ptr::null_mut();
        let status = eg_integrate(game, x0.as_ptr(), 1.0, 5.0, &mut traj);
        assert_eq!(status, EgStatus::Numerical);
        assert!(last_error().contains("reduce the step size"));
        eg_game_free(game);
    }
}

#[test]
fn invalid_inputs_are_reported() {
    unsafe {
        let mut game = ptr::null_mut();
        let bad = [f64::NAN, 0.0, 0.0, 0.0];
        assert_eq!(eg_game_new(bad.as_ptr(), 2, &mut game), EgStatus::InvalidInput);
        assert!(!last_error().is_empty());

        let ok = make_game(&[0.0, 1.0, 1.0, 0.0], 2);
        let not_simplex = [0.9, 0.9];
        let mut value = 0.0;
        assert_eq!(
            eg_expected_payoff(ok, not_simplex.as_ptr(), not_simplex.as_ptr(), &mut value),
            EgStatus::InvalidInput
        );
        eg_game_free(ok);
    }
}

#[test]
fn null_pointers_are_refused() {
    unsafe {
        let mut out = 0.0;
        assert_eq!(eg_shannon_entropy(ptr::null(), 2, &mut out), EgStatus::NullPointer);
        let probs = [0.5, 0.5];
        assert_eq!(eg_shannon_entropy(probs.as_ptr(), 2, ptr::null_mut()), EgStatus::NullPointer);
        let mut game = ptr::null_mut();
        assert_eq!(eg_game_new(ptr::null(), 2, &mut game), EgStatus::NullPointer);
        assert_eq!(eg_game_size(ptr::null()), 0);
        assert_eq!(eg_trajectory_len(ptr::null()), 0);
        eg_game_free(ptr::null_mut());
        eg_trajectory_free(ptr::null_mut());
    }
}

#[test]
fn entropy_and_information_helpers() {
    unsafe {
        let probs = [0.25, 0.75];
        let mut h = 0.0;
        assert_eq!(eg_shannon_entropy(probs.as_ptr(), 2, &mut h), EgStatus::Ok);
        assert!((h - 0.5623351446188083).abs() < 1e-15);

        let x = [0.5, 0.5];
        let y = [0.25, 0.75];
        let mut d = 0.0;
        assert_eq!(eg_relative_entropy(x.as_ptr(), y.as_ptr(), 2, &mut d), EgStatus::Ok);
        assert!((d - 0.20751874963942185).abs() < 1e-12);

        // disjoint supports diverge
        let point = [1.0, 0.0];
        let other = [0.0, 1.0];
        assert_eq!(eg_relative_entropy(point.as_ptr(), other.as_ptr(), 2, &mut d), EgStatus::Ok);
        assert!(d.is_infinite() && d > 0.0);

        // perfectly correlated pair carries one bit
        let joint = [0.5, 0.0, 0.0, 0.5];
        let mut bits = 0.0;
        assert_eq!(eg_mutual_information(joint.as_ptr(), 2, 2, &mut bits), EgStatus::Ok);
        assert!((bits - 1.0).abs() < 1e-12);
    }
}

#[test]
fn thermo_helpers() {
    unsafe {
        let energies = [0.0, 1.0];
        let mut s = 0.0;
        assert_eq!(eg_gibbs_entropy(energies.as_ptr(), 2, 1.0, &mut s), EgStatus::Ok);
        assert!((s - 0.582203108888218).abs() < 1e-14);

        let mut probs = [0.0f64; 2];
        assert_eq!(eg_gibbs_probs(energies.as_ptr(), 2, 1.0, probs.as_mut_ptr()), EgStatus::Ok);
        assert!((probs[0] - 0.7310585786300049).abs() < 1e-15);

        let mut beta = 0.0;
        let target = 1.0 / (1.0 + std::f64::consts::E);
        assert_eq!(eg_fit_beta(energies.as_ptr(), 2, target, 1e-9, &mut beta), EgStatus::Ok);
        assert!((beta - 1.0).abs() < 1e-6);

        assert_eq!(
            eg_fit_beta(energies.as_ptr(), 2, 2.0, 1e-9, &mut beta),
            EgStatus::InvalidInput
        );
        assert!(last_error().contains("outside the reachable"));
    }
}

#[test]
fn generated_header_covers_the_surface() {
    let header = std::fs::read_to_string(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/entropy_games.h"),
    )
    .expect("header generated at build time");
    for symbol in [
        "typedef enum EgStatus",
        "typedef struct EgGame EgGame",
        "typedef struct EgTrajectory EgTrajectory",
        "eg_game_new",
        "eg_integrate",
        "eg_trajectory_sample",
        "eg_mutual_information",
        "eg_fit_beta",
        "eg_last_error",
    ] {
        assert!(header.contains(symbol), "missing {symbol}");
    }
}
