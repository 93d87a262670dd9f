//! Outcome distributions, relative entropy and predicted selection rates.

use std::cmp::Ordering;
use std::fmt;

use crate::channel::{ImperfectChannel, PointerBasis};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerance on `sum p = 1`.
pub const DISTRIBUTION_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution<T> {
    labels: Vec<String>,
    probs: Vec<T>,
}

impl<T: Real> OutcomeDistribution<T> {
    pub fn new(labels: Vec<String>, probs: Vec<T>) -> Result<Self> {
        if labels.len() != probs.len() || labels.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} probabilities",
                labels.len(),
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(*p >= T::zero() && *p <= T::one() + T::tol(DISTRIBUTION_SUM_TOL))) {
            return Err(Error::InvalidParameter("probabilities must lie in [0, 1]".into()));
        }
        let sum: T = probs.iter().copied().sum();
        if !((sum - T::one()).abs() <= T::tol(DISTRIBUTION_SUM_TOL)) {
            return Err(Error::InvalidParameter(format!("probabilities sum to {sum}")));
        }
        Ok(Self { labels, probs })
    }

    pub(crate) fn from_parts_unchecked(labels: Vec<String>, probs: Vec<T>) -> Self {
        Self { labels, probs }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn prob(&self, label: &str) -> Option<T> {
        self.labels.iter().position(|l| l == label).map(|i| self.probs[i])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// A real number or a signed infinity, kept distinct from large floats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended<T> {
    Finite(T),
    PosInfinity,
    NegInfinity,
}

impl<T: Real> Extended<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<T> {
        match *self {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Lossy view as a float (`±inf` for the infinite variants).
    pub fn to_float(&self) -> T {
        match *self {
            Extended::Finite(v) => v,
            Extended::PosInfinity => T::infinity(),
            Extended::NegInfinity => T::neg_infinity(),
        }
    }

    /// `self - other`; `inf - inf` has no value.
    pub fn checked_sub(self, other: Self) -> Result<Self> {
        use Extended::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Ok(Finite(a - b)),
            (PosInfinity, PosInfinity) | (NegInfinity, NegInfinity) => Err(Error::IndeterminateRate),
            (PosInfinity, _) | (_, NegInfinity) => Ok(PosInfinity),
            (NegInfinity, _) | (_, PosInfinity) => Ok(NegInfinity),
        }
    }
}

impl<T: Real> PartialOrd for Extended<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use Extended::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (PosInfinity, PosInfinity) | (NegInfinity, NegInfinity) => Some(Ordering::Equal),
            (PosInfinity, _) | (_, NegInfinity) => Some(Ordering::Greater),
            (NegInfinity, _) | (_, PosInfinity) => Some(Ordering::Less),
        }
    }
}

impl<T: Real> fmt::Display for Extended<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::PosInfinity => f.write_str("inf"),
            Extended::NegInfinity => f.write_str("-inf"),
        }
    }
}

/// `S(p || q) = sum_i p_i ln(p_i / q_i)`.
pub fn relative_entropy<T: Real>(p: &OutcomeDistribution<T>, q: &OutcomeDistribution<T>) -> Result<Extended<T>> {
    if p.labels() != q.labels() {
        return Err(Error::AlphabetMismatch(format!(
            "{:?} vs {:?}",
            p.labels(),
            q.labels()
        )));
    }
    let mut acc = T::zero();
    for (&pi, &qi) in p.probs().iter().zip(q.probs()) {
        if pi <= T::zero() {
            continue;
        }
        if qi <= T::zero() {
            return Ok(Extended::PosInfinity);
        }
        acc = acc + pi * (pi / qi).ln();
    }
    Ok(Extended::Finite(acc.max(T::zero())))
}

/// Predicted `lim (1/n) ln(qhat_alpha / qhat_upsilon)` for a filter running
/// `ch_est` on outcomes generated by `ch_true` with selected pointer `upsilon`:
/// `S(P_ups || Phat_ups) - S(P_ups || Phat_alpha)`.
pub fn theoretical_rate<T: Real>(
    ch_true: &ImperfectChannel<T>,
    ch_est: &ImperfectChannel<T>,
    basis: &PointerBasis<T>,
    upsilon: usize,
    alpha: usize,
) -> Result<Extended<T>> {
    let p_ups = ch_true.pointer_distribution(basis, upsilon)?;
    let est_ups = ch_est.pointer_distribution(basis, upsilon)?;
    let est_alpha = ch_est.pointer_distribution(basis, alpha)?;
    relative_entropy(&p_ups, &est_ups)?.checked_sub(relative_entropy(&p_ups, &est_alpha)?)
}

impl<T: Real> std::ops::Neg for Extended<T> {
    type Output = Self;

    fn neg(self) -> Self {
        match self {
            Extended::Finite(v) => Extended::Finite(-v),
            Extended::PosInfinity => Extended::NegInfinity,
            Extended::NegInfinity => Extended::PosInfinity,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(p: &[f64]) -> OutcomeDistribution<f64> {
        let labels = (0..p.len()).map(|i| i.to_string()).collect();
        OutcomeDistribution::new(labels, p.to_vec()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let p = d(&[0.2, 0.3, 0.5]);
        assert_eq!(relative_entropy(&p, &p).unwrap(), Extended::Finite(0.0));
        let r = relative_entropy(&d(&[1.0, 0.0]), &d(&[0.5, 0.5])).unwrap();
        assert!((r.finite().unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(relative_entropy(&d(&[0.5, 0.5]), &d(&[1.0, 0.0])).unwrap(), Extended::PosInfinity);
    }

    #[test]
    fn alphabet_mismatch() {
        let a = d(&[0.5, 0.5]);
        let b = OutcomeDistribution::new(vec!["x".into(), "y".into()], vec![0.5, 0.5]).unwrap();
        assert!(matches!(relative_entropy(&a, &b), Err(Error::AlphabetMismatch(_))));
        assert!(relative_entropy(&a, &d(&[0.2, 0.3, 0.5])).is_err());
    }

    #[test]
    fn extended_arithmetic() {
        use Extended::*;
        assert_eq!(Finite(1.0).checked_sub(PosInfinity).unwrap(), NegInfinity);
        assert_eq!(PosInfinity.checked_sub(Finite(3.0)).unwrap(), PosInfinity);
        assert!(matches!(PosInfinity::<f64>.checked_sub(PosInfinity), Err(Error::IndeterminateRate)));
        assert!(Finite(1e300) < PosInfinity);
        assert!(NegInfinity < Finite(-1e300));
    }

    #[test]
    fn distribution_validation() {
        assert!(OutcomeDistribution::new(vec!["a".into()], vec![0.9]).is_err());
        assert!(OutcomeDistribution::new(vec!["a".into(), "b".into()], vec![1.2, -0.2]).is_err());
    }
}
