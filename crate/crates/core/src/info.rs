//! Base-2 information measures over joint strategy distributions: joint,
//! conditional, mutual, and relative entropies, the Sanov confusion bound,
//! and the data-processing check for Markov chains of strategies.

use crate::error::{Error, Result};
use crate::simplex::FrequencyVector;

/// Joint probability table over strategy pairs (A rows, B columns).
#[derive(Debug, Clone)]
pub struct JointDistribution {
    probs: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        let m = probs.len();
        if m == 0 || probs[0].is_empty() {
            return Err(Error::InvalidArgument("joint distribution must be nonempty".into()));
        }
        let n = probs[0].len();
        let mut total = 0.0;
        for (i, row) in probs.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "joint distribution row",
                    expected: n,
                    got: row.len(),
                });
            }
            for &p in row {
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "joint probability {p} in row {i} is not in [0, 1]"
                    )));
                }
                total += p;
            }
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "joint probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    pub fn rows(&self) -> usize {
        self.probs.len()
    }

    pub fn cols(&self) -> usize {
        self.probs[0].len()
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.probs[i][j]
    }
}

fn entropy_bits<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    probs.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

/// Row-sum and column-sum distributions of the joint.
pub fn marginals(j: &JointDistribution) -> (FrequencyVector, FrequencyVector) {
    let mut a = vec![0.0; j.rows()];
    let mut b = vec![0.0; j.cols()];
    for (i, row) in j.probs.iter().enumerate() {
        for (k, &p) in row.iter().enumerate() {
            a[i] += p;
            b[k] += p;
        }
    }
    // Marginals of a valid joint are valid up to the same 1e-12 budget.
    let a = FrequencyVector::with_drift(a, 1e-9).expect("row marginal on simplex");
    let b = FrequencyVector::with_drift(b, 1e-9).expect("column marginal on simplex");
    (a, b)
}

/// The six §-entropies of a joint distribution, all in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoReport {
    pub h_a: f64,
    pub h_b: f64,
    pub h_ab: f64,
    pub h_a_given_b: f64,
    pub h_b_given_a: f64,
    pub i_ab: f64,
}

pub fn info_report(j: &JointDistribution) -> InfoReport {
    let (a, b) = marginals(j);
    let h_a = entropy_bits(a.probs().iter().copied());
    let h_b = entropy_bits(b.probs().iter().copied());
    let h_ab = entropy_bits(j.probs.iter().flatten().copied());
    InfoReport {
        h_a,
        h_b,
        h_ab,
        h_a_given_b: h_ab - h_b,
        h_b_given_a: h_ab - h_a,
        i_ab: h_a + h_b - h_ab,
    }
}

/// H(x || y) = sum x_i log2(x_i / y_i) in bits; +inf when x puts mass where
/// y has none.
pub fn relative_entropy(x: &FrequencyVector, y: &FrequencyVector) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "relative_entropy second argument",
            expected: x.len(),
            got: y.len(),
        });
    }
    let mut total = 0.0;
    for (&xi, &yi) in x.probs().iter().zip(y.probs()) {
        if xi <= 0.0 {
            continue;
        }
        if yi <= 0.0 {
            return Ok(f64::INFINITY);
        }
        total += xi * (xi / yi).log2();
    }
    // Rounding can leave a tiny negative where x == y entrywise.
    Ok(total.max(0.0))
}

/// 2^(-N * H(x||y)): the probability scale of confusing x for y after N
/// observations. N = 0 always gives 1; an infinite divergence gives 0 for
/// N > 0.
pub fn sanov_confusion_bound(x: &FrequencyVector, y: &FrequencyVector, n: i64) -> Result<f64> {
    if n < 0 {
        return Err(Error::InvalidArgument(format!("sample count must be >= 0, got {n}")));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let kl = relative_entropy(x, y)?;
    if kl.is_infinite() {
        return Ok(0.0);
    }
    Ok((-(n as f64) * kl).exp2())
}

/// Composes J_AB with a row-stochastic kernel B -> C and reports
/// (I(A:B), I(A:C), holds) where holds checks I(A:B) >= I(A:C) and
/// H(A) >= I(A:B), both with a 1e-10 slack.
pub fn markov_data_processing_check(
    j_ab: &JointDistribution,
    kernel_bc: &[Vec<f64>],
) -> Result<(f64, f64, bool)> {
    if kernel_bc.len() != j_ab.cols() {
        return Err(Error::DimensionMismatch {
            context: "kernel row count",
            expected: j_ab.cols(),
            got: kernel_bc.len(),
        });
    }
    let c_dim = kernel_bc[0].len();
    if c_dim == 0 {
        return Err(Error::InvalidArgument("kernel must have at least one column".into()));
    }
    for (b, row) in kernel_bc.iter().enumerate() {
        if row.len() != c_dim {
            return Err(Error::DimensionMismatch {
                context: "kernel row",
                expected: c_dim,
                got: row.len(),
            });
        }
        if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidArgument(format!("kernel row {b} has negative entries")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::NonStochasticKernel { row: b, sum });
        }
    }

    let mut ac = vec![vec![0.0; c_dim]; j_ab.rows()];
    for i in 0..j_ab.rows() {
        for b in 0..j_ab.cols() {
            let p = j_ab.prob(i, b);
            if p == 0.0 {
                continue;
            }
            for (c, &k) in kernel_bc[b].iter().enumerate() {
                ac[i][c] += p * k;
            }
        }
    }
    let j_ac = JointDistribution::new(ac)?;

    let rep_ab = info_report(j_ab);
    let rep_ac = info_report(&j_ac);
    let holds = rep_ab.i_ab >= rep_ac.i_ab - 1e-10 && rep_ab.h_a >= rep_ab.i_ab - 1e-10;
    Ok((rep_ab.i_ab, rep_ac.i_ab, holds))
}

/// Unit conversions between the base-2 measures here and the natural-log
/// measures used by the dynamics modules.
pub fn bits_to_nats(bits: f64) -> f64 {
    bits * std::f64::consts::LN_2
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jd(rows: &[&[f64]]) -> JointDistribution {
        JointDistribution::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn fv(probs: &[f64]) -> FrequencyVector {
        FrequencyVector::new(probs.to_vec()).unwrap()
    }

    #[test]
    fn joint_validation() {
        assert!(JointDistribution::new(vec![]).is_err());
        assert!(JointDistribution::new(vec![vec![0.5, 0.6]]).is_err());
        assert!(JointDistribution::new(vec![vec![0.5, -0.1], vec![0.3, 0.3]]).is_err());
        assert!(JointDistribution::new(vec![vec![0.5, 0.5], vec![0.1]]).is_err());
    }

    #[test]
    fn marginals_of_known_joints() {
        let (a, b) = marginals(&jd(&[&[0.25, 0.25], &[0.25, 0.25]]));
        assert_eq!(a.probs(), &[0.5, 0.5]);
        assert_eq!(b.probs(), &[0.5, 0.5]);

        let (a, b) = marginals(&jd(&[&[0.5, 0.0], &[0.0, 0.5]]));
        assert_eq!(a.probs(), &[0.5, 0.5]);
        assert_eq!(b.probs(), &[0.5, 0.5]);

        let (a, b) = marginals(&jd(&[&[0.1, 0.2], &[0.3, 0.4]]));
        assert!((a.probs()[0] - 0.3).abs() < 1e-15 && (a.probs()[1] - 0.7).abs() < 1e-15);
        assert!((b.probs()[0] - 0.4).abs() < 1e-15 && (b.probs()[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn product_joint_has_zero_mutual_information() {
        let a = [0.3, 0.7];
        let b = [0.4, 0.6];
        let joint = jd(&[
            &[a[0] * b[0], a[0] * b[1]],
            &[a[1] * b[0], a[1] * b[1]],
        ]);
        let rep = info_report(&joint);
        assert!(rep.i_ab.abs() < 1e-12);
    }

    #[test]
    fn perfectly_correlated_pair() {
        let rep = info_report(&jd(&[&[0.5, 0.0], &[0.0, 0.5]]));
        assert!((rep.h_a - 1.0).abs() < 1e-15);
        assert!((rep.h_b - 1.0).abs() < 1e-15);
        assert!((rep.i_ab - 1.0).abs() < 1e-15);
        assert!(rep.h_a_given_b.abs() < 1e-15);
    }

    #[test]
    fn report_matches_hand_evaluation() {
        let rep = info_report(&jd(&[&[0.1, 0.2], &[0.3, 0.4]]));
        assert!((rep.h_a - 0.8812908992306927).abs() < 1e-14);
        assert!((rep.h_b - 0.9709505944546686).abs() < 1e-14);
        assert!((rep.h_ab - 1.8464393446710154).abs() < 1e-14);
        assert!((rep.i_ab - 0.0058021490143458365).abs() < 1e-13);
        assert!((rep.h_a_given_b - 0.8754887502163469).abs() < 1e-13);
        assert!((rep.h_b_given_a - 0.9651484454403227).abs() < 1e-13);
    }

    #[test]
    fn relative_entropy_cases() {
        let x = fv(&[0.5, 0.5]);
        assert_eq!(relative_entropy(&x, &x).unwrap(), 0.0);
        assert_eq!(relative_entropy(&fv(&[1.0, 0.0]), &x).unwrap(), 1.0);
        assert!(relative_entropy(&x, &fv(&[1.0, 0.0])).unwrap().is_infinite());
        let got = relative_entropy(&x, &fv(&[0.25, 0.75])).unwrap();
        assert!((got - 0.20751874963942185).abs() < 1e-15);
    }

    #[test]
    fn sanov_bound_cases() {
        let x = fv(&[1.0, 0.0]);
        let y = fv(&[0.5, 0.5]);
        assert_eq!(sanov_confusion_bound(&x, &y, 0).unwrap(), 1.0);
        assert_eq!(sanov_confusion_bound(&y, &y, 25).unwrap(), 1.0);
        assert!((sanov_confusion_bound(&x, &y, 10).unwrap() - 0.0009765625).abs() < 1e-18);
        assert_eq!(sanov_confusion_bound(&y, &x, 3).unwrap(), 0.0);
        assert!(sanov_confusion_bound(&x, &y, -1).is_err());
        let skew = fv(&[0.75, 0.25]);
        let got = sanov_confusion_bound(&skew, &y, 40).unwrap();
        assert!((got - 0.005340257332066876).abs() < 1e-15);
    }

    #[test]
    fn data_processing_identity_and_collapse_kernels() {
        let j = jd(&[&[0.1, 0.2], &[0.3, 0.4]]);
        let identity = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let (iab, iac, holds) = markov_data_processing_check(&j, &identity).unwrap();
        assert!((iab - iac).abs() < 1e-12);
        assert!(holds);

        let collapse = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let (_, iac, holds) = markov_data_processing_check(&j, &collapse).unwrap();
        assert!(iac.abs() < 1e-12);
        assert!(holds);
    }

    #[test]
    fn rejects_bad_kernels() {
        let j = jd(&[&[0.1, 0.2], &[0.3, 0.4]]);
        let short = vec![vec![1.0]];
        assert!(markov_data_processing_check(&j, &short).is_err());
        let nonstochastic = vec![vec![0.6, 0.6], vec![0.5, 0.5]];
        match markov_data_processing_check(&j, &nonstochastic).unwrap_err() {
            Error::NonStochasticKernel { row, .. } => assert_eq!(row, 0),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn unit_conversions_roundtrip() {
        assert!((bits_to_nats(1.0) - std::f64::consts::LN_2).abs() < 1e-16);
        assert!((nats_to_bits(bits_to_nats(0.73)) - 0.73).abs() < 1e-15);
    }
}
