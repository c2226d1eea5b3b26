//! Canonical-ensemble quantities for a fixed energy spectrum with inverse
//! temperature as the sole parameter: Gibbs weights, the entropy identity
//! S = ln Z + beta <E>, its derivatives in both <E> and beta, and the
//! inverse map from a target mean energy back to beta.

use crate::error::{Error, Result};

/// Variance below which the spectrum is treated as flat and the
/// mean-energy derivatives become undefined.
pub const DEGENERATE_VAR: f64 = 1e-14;

/// Energy levels with their inverse temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalEnsemble {
    pub energies: Vec<f64>,
    pub beta: f64,
}

impl CanonicalEnsemble {
    pub fn new(energies: Vec<f64>, beta: f64) -> Result<Self> {
        validate_energies(&energies)?;
        if !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("beta must be finite, got {beta}")));
        }
        Ok(Self { energies, beta })
    }
}

fn validate_energies(energies: &[f64]) -> Result<()> {
    if energies.is_empty() {
        return Err(Error::InvalidArgument("energy list must be nonempty".into()));
    }
    if let Some(bad) = energies.iter().find(|e| !e.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite energy {bad}")));
    }
    Ok(())
}

/// Gibbs state summary at one beta.
#[derive(Debug, Clone)]
pub struct EnsembleReport {
    pub z: f64,
    pub probs: Vec<f64>,
    pub mean_e: f64,
    pub var_e: f64,
    pub s: f64,
    pub tau: f64,
}

struct Moments {
    probs: Vec<f64>,
    ln_z: f64,
    mean: f64,
    var: f64,
    third_central: f64,
}

/// Weights e^(-beta E_i) with the exponent shifted by its maximum, so the
/// largest weight is exactly 1 and nothing overflows.
fn moments(energies: &[f64], beta: f64) -> Moments {
    let shift = energies.iter().map(|e| -beta * e).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = energies.iter().map(|e| (-beta * e - shift).exp()).collect();
    let denom: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / denom).collect();
    let ln_z = shift + denom.ln();
    let mean: f64 = probs.iter().zip(energies).map(|(p, e)| p * e).sum();
    let var: f64 = probs.iter().zip(energies).map(|(p, e)| p * (e - mean).powi(2)).sum();
    let third_central: f64 =
        probs.iter().zip(energies).map(|(p, e)| p * (e - mean).powi(3)).sum();
    Moments { probs, ln_z, mean, var, third_central }
}

pub fn gibbs(energies: &[f64], beta: f64) -> Result<EnsembleReport> {
    validate_energies(energies)?;
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be finite, got {beta}")));
    }
    let m = moments(energies, beta);
    Ok(EnsembleReport {
        z: m.ln_z.exp(),
        s: m.ln_z + beta * m.mean,
        mean_e: m.mean,
        var_e: m.var,
        tau: 1.0 / beta,
        probs: m.probs,
    })
}

/// Entropy derivatives with the spectrum held fixed. The mean-energy pair
/// is undefined on a flat spectrum, where beta no longer moves <E>.
#[derive(Debug, Clone)]
pub struct EntropyDerivatives {
    pub ds_de: Option<f64>,
    pub d2s_de2: Option<f64>,
    pub ds_dbeta: f64,
    pub d2s_dbeta2: f64,
}

pub fn entropy_derivatives(energies: &[f64], beta: f64) -> Result<EntropyDerivatives> {
    validate_energies(energies)?;
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be finite, got {beta}")));
    }
    let m = moments(energies, beta);
    // dS/dbeta = -beta var; differentiating again brings in
    // d<E>/dbeta = -var and d^2<E>/dbeta^2 = third central moment.
    let ds_dbeta = -beta * m.var;
    let d2s_dbeta2 = -m.var + beta * m.third_central;
    let (ds_de, d2s_de2) = if m.var > DEGENERATE_VAR {
        (Some(beta), Some(-1.0 / m.var))
    } else {
        (None, None)
    };
    Ok(EntropyDerivatives { ds_de, d2s_de2, ds_dbeta, d2s_dbeta2 })
}

/// Inverts <E>(beta) by bisection. The map is strictly decreasing, so the
/// bracket [-b, b] is grown by doubling until it straddles the target, then
/// halved until the realized mean is within tol.
pub fn fit_beta(energies: &[f64], target_mean_e: f64, tol: f64) -> Result<f64> {
    validate_energies(energies)?;
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    if !target_mean_e.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target mean energy must be finite, got {target_mean_e}"
        )));
    }
    let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 0.0 {
        return Err(Error::DegenerateSpectrum);
    }
    if !(target_mean_e > lo && target_mean_e < hi) {
        return Err(Error::UnreachableTarget { target: target_mean_e, min: lo, max: hi });
    }

    let mean_at = |beta: f64| moments(energies, beta).mean;
    let mut bracket = 1.0;
    // <E>(-b) climbs toward max(E) and <E>(b) falls toward min(E).
    for _ in 0..70 {
        if mean_at(-bracket) > target_mean_e && mean_at(bracket) < target_mean_e {
            break;
        }
        bracket *= 2.0;
    }
    let (mut lo_b, mut hi_b) = (-bracket, bracket);
    let mut mid = 0.0;
    for _ in 0..400 {
        mid = 0.5 * (lo_b + hi_b);
        let mean = mean_at(mid);
        if (mean - target_mean_e).abs() < tol {
            return Ok(mid);
        }
        if mean > target_mean_e {
            lo_b = mid;
        } else {
            hi_b = mid;
        }
    }
    Ok(mid)
}

#[cfg(test)]
mod tests {
    use super::*;

    const E01: [f64; 2] = [0.0, 1.0];

    #[test]
    fn uniform_at_zero_beta() {
        let rep = gibbs(&E01, 0.0).unwrap();
        assert_eq!(rep.probs, vec![0.5, 0.5]);
        assert_eq!(rep.z, 2.0);
        assert!((rep.s - 2.0f64.ln()).abs() < 1e-15);
        assert!(rep.tau.is_infinite());
        let rep = gibbs(&[3.0; 5], 0.0).unwrap();
        assert_eq!(rep.probs, vec![0.2; 5]);
    }

    #[test]
    fn ground_state_at_large_beta() {
        let rep = gibbs(&E01, 50.0).unwrap();
        assert!(rep.probs[0] >= 1.0 - 1e-15);
        assert!(rep.probs[1] < 1e-20);
        assert!(rep.s < 1e-19);
    }

    #[test]
    fn report_matches_hand_evaluation() {
        let rep = gibbs(&E01, 1.0).unwrap();
        assert!((rep.z - 1.3678794411714423).abs() < 1e-15);
        assert!((rep.probs[0] - 0.7310585786300049).abs() < 1e-15);
        assert!((rep.mean_e - 0.2689414213699951).abs() < 1e-15);
        assert!((rep.var_e - 0.19661193324148185).abs() < 1e-15);
        assert!((rep.s - 0.582203108888218).abs() < 1e-14);
        assert_eq!(rep.tau, 1.0);
        // the identity S = ln Z + beta <E> coincides with the Shannon
        // entropy of the weights
        let shannon: f64 = rep.probs.iter().map(|p| -p * p.ln()).sum();
        assert!((rep.s - shannon).abs() < 1e-14);
    }

    #[test]
    fn overflow_guard_handles_extreme_beta() {
        let rep = gibbs(&[-5.0, 5.0], 140.0).unwrap();
        assert!(rep.probs[0] >= 1.0 - 1e-15);
        assert!(rep.probs.iter().all(|p| p.is_finite()));
        assert!((rep.mean_e - -5.0).abs() < 1e-12);
        let rep = gibbs(&[-5.0, 5.0], -140.0).unwrap();
        assert!((rep.mean_e - 5.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_values() {
        let d = entropy_derivatives(&E01, 0.0).unwrap();
        assert_eq!(d.ds_dbeta, 0.0);
        assert_eq!(d.ds_de, Some(0.0));

        let d = entropy_derivatives(&E01, 1.0).unwrap();
        assert!((d.ds_dbeta - -0.19661193324148185).abs() < 1e-15);
        assert_eq!(d.ds_de, Some(1.0));
        assert!((d.d2s_dbeta2 - -0.10575418556853344).abs() < 1e-15);
        assert!((d.d2s_de2.unwrap() - -5.086161269630487).abs() < 1e-12);
    }

    #[test]
    fn flat_spectrum_flags_mean_energy_derivatives() {
        let d = entropy_derivatives(&[2.0, 2.0, 2.0], 1.3).unwrap();
        assert!(d.ds_de.is_none());
        assert!(d.d2s_de2.is_none());
        assert_eq!(d.ds_dbeta, 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for beta in [-3.0, -0.5, 0.0, 0.7, 2.5] {
            let e = [0.3, -1.2, 2.0, 0.9];
            let d = entropy_derivatives(&e, beta).unwrap();
            let sp = gibbs(&e, beta + h).unwrap().s;
            let sm = gibbs(&e, beta - h).unwrap().s;
            let s0 = gibbs(&e, beta).unwrap().s;
            assert!((d.ds_dbeta - (sp - sm) / (2.0 * h)).abs() < 1e-6);
            assert!((d.d2s_dbeta2 - (sp - 2.0 * s0 + sm) / (h * h)).abs() < 1e-4);
        }
    }

    #[test]
    fn fit_beta_known_points() {
        assert_eq!(fit_beta(&E01, 0.5, 1e-12).unwrap(), 0.0);
        let target = 1.0 / (1.0 + std::f64::consts::E);
        let beta = fit_beta(&E01, target, 1e-9).unwrap();
        assert!((beta - 1.0).abs() < 1e-6);
        // negative-beta side
        let beta = fit_beta(&E01, 1.0 - target, 1e-9).unwrap();
        assert!((beta - -1.0).abs() < 1e-6);
    }

    #[test]
    fn fit_beta_roundtrips_through_gibbs() {
        for beta in [-4.5, -1.0, 0.0, 0.3, 6.0] {
            let e = [0.0, 0.4, 1.7, 3.0];
            let mean = gibbs(&e, beta).unwrap().mean_e;
            let recovered = fit_beta(&e, mean, 1e-12).unwrap();
            let realized = gibbs(&e, recovered).unwrap().mean_e;
            assert!((realized - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_beta_rejects_unreachable_and_degenerate() {
        match fit_beta(&E01, 1.0, 1e-9).unwrap_err() {
            Error::UnreachableTarget { target, min, max } => {
                assert_eq!(target, 1.0);
                assert_eq!((min, max), (0.0, 1.0));
            }
            other => panic!("unexpected error {other}"),
        }
        assert!(fit_beta(&E01, -0.2, 1e-9).is_err());
        assert!(matches!(fit_beta(&[1.0, 1.0], 1.0, 1e-9), Err(Error::DegenerateSpectrum)));
    }

    #[test]
    fn mean_energy_decreases_in_beta() {
        let e = [0.0, 0.5, 2.0];
        let mut prev = f64::INFINITY;
        let mut beta = -8.0;
        while beta <= 8.0 {
            let mean = gibbs(&e, beta).unwrap().mean_e;
            assert!(mean < prev);
            prev = mean;
            beta += 0.25;
        }
    }
}
