//! Kraus families, detector correlation matrices and the imperfect-measurement
//! superoperators `Phi_i(rho) = sum_j eta[i][j] V_j rho V_j^dag`.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::analysis::OutcomeDistribution;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix};
use crate::scalar::Real;

/// Completeness tolerance for exact (QND) families.
pub const EXACT_COMPLETENESS_TOL: f64 = 1e-9;
/// Column-sum tolerance for correlation matrices.
pub const COLUMN_SUM_TOL: f64 = 1e-10;
/// Orthonormality tolerance for pointer bases.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// QND certificate tolerance.
pub const QND_TOL: f64 = 1e-9;
/// Pointer distributions closer than this (max norm) count as degenerate.
pub const NONDEGENERACY_TOL: f64 = 1e-9;
/// Total outcome weight below which a state/channel pair is degenerate.
pub const DEGENERATE_WEIGHT: f64 = 1e-12;

/// How strictly `sum_j V_j^dag V_j = I` must hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Completeness<T> {
    /// Within [`EXACT_COMPLETENESS_TOL`]; outcome probabilities used as-is.
    Exact,
    /// Within the given tolerance; outcome probabilities are renormalized.
    Approximate { tolerance: T },
}

impl<T: Real> Completeness<T> {
    pub fn tolerance(&self) -> T {
        match *self {
            Completeness::Exact => T::tol(EXACT_COMPLETENESS_TOL),
            Completeness::Approximate { tolerance } => tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausFamily<T> {
    dim: usize,
    labels: Vec<String>,
    operators: Vec<ComplexMatrix<T>>,
    effects: Vec<ComplexMatrix<T>>,
    completeness: Completeness<T>,
}

impl<T: Real> KrausFamily<T> {
    pub fn new(
        labels: Vec<String>,
        operators: Vec<ComplexMatrix<T>>,
        completeness: Completeness<T>,
    ) -> Result<Self> {
        let dim = operators.first().map(|m| m.rows()).ok_or_else(|| {
            Error::InvalidParameter("Kraus family needs at least one operator".into())
        })?;
        if labels.len() != operators.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} Kraus operators",
                labels.len(),
                operators.len()
            )));
        }
        for op in &operators {
            if op.rows() != dim || op.cols() != dim {
                return Err(Error::Shape {
                    op: "kraus",
                    left: (dim, dim),
                    right: (op.rows(), op.cols()),
                });
            }
        }
        let effects = operators.iter().map(|v| v.adjoint().mul_unchecked(v)).collect();
        let family = Self {
            dim,
            labels,
            operators,
            effects,
            completeness,
        };
        let deviation = family.completeness_deviation();
        let tolerance = completeness.tolerance();
        if !(deviation <= tolerance) {
            return Err(Error::Incomplete {
                deviation: deviation.as_f64(),
                tolerance: tolerance.as_f64(),
            });
        }
        Ok(family)
    }

    /// `max |sum_j V_j^dag V_j - I|`.
    pub fn completeness_deviation(&self) -> T {
        let mut total = ComplexMatrix::zeros(self.dim, self.dim);
        for e in &self.effects {
            total.add_scaled_assign(e, T::one());
        }
        total
            .sub(&ComplexMatrix::identity(self.dim))
            .map(|d| d.max_abs())
            .unwrap_or_else(|_| T::infinity())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn operators(&self) -> &[ComplexMatrix<T>] {
        &self.operators
    }

    /// `V_j^dag V_j` for every operator.
    pub fn effects(&self) -> &[ComplexMatrix<T>] {
        &self.effects
    }

    pub fn completeness(&self) -> Completeness<T> {
        self.completeness
    }
}

/// Column-stochastic detector matrix: `eta[i][j]` is the probability of
/// reading `i` when an ideal detector reports `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix<T> {
    detected: Vec<String>,
    ideal_len: usize,
    entries: Vec<T>,
}

impl<T: Real> CorrelationMatrix<T> {
    /// `rows[i][j]`, one row per detected outcome.
    pub fn new(detected: Vec<String>, rows: Vec<Vec<T>>) -> Result<Self> {
        if detected.is_empty() || detected.len() != rows.len() {
            return Err(Error::InvalidParameter(format!(
                "{} detected labels for {} eta rows",
                detected.len(),
                rows.len()
            )));
        }
        let ideal_len = rows[0].len();
        if ideal_len == 0 || rows.iter().any(|r| r.len() != ideal_len) {
            return Err(Error::InvalidParameter("eta rows must have equal nonzero length".into()));
        }
        let entries: Vec<T> = rows.into_iter().flatten().collect();
        let eta = Self {
            detected,
            ideal_len,
            entries,
        };
        for j in 0..ideal_len {
            for i in 0..eta.detected.len() {
                let v = eta.get(i, j);
                if !(v >= T::zero() && v <= T::one()) {
                    return Err(Error::NotColumnStochastic {
                        column: j,
                        reason: format!("entry ({i}, {j}) = {v} outside [0, 1]"),
                    });
                }
            }
            let sum = eta.column_sum(j);
            if !((sum - T::one()).abs() <= T::tol(COLUMN_SUM_TOL)) {
                return Err(Error::NotColumnStochastic {
                    column: j,
                    reason: format!("column sums to {sum}"),
                });
            }
        }
        Ok(eta)
    }

    /// Perfect detector over `labels`.
    pub fn identity(labels: Vec<String>) -> Self {
        let n = labels.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect();
        Self::new(labels, rows).expect("identity is column-stochastic")
    }

    #[inline]
    pub fn get(&self, detected: usize, ideal: usize) -> T {
        self.entries[detected * self.ideal_len + ideal]
    }

    pub fn column_sum(&self, ideal: usize) -> T {
        (0..self.detected.len()).map(|i| self.get(i, ideal)).sum()
    }

    pub fn detected(&self) -> &[String] {
        &self.detected
    }

    pub fn ideal_len(&self) -> usize {
        self.ideal_len
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.entries.chunks(self.ideal_len).map(|c| c.to_vec()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImperfectChannel<T> {
    kraus: KrausFamily<T>,
    eta: CorrelationMatrix<T>,
}

impl<T: Real> ImperfectChannel<T> {
    pub fn new(kraus: KrausFamily<T>, eta: CorrelationMatrix<T>) -> Result<Self> {
        if eta.ideal_len() != kraus.len() {
            return Err(Error::InvalidParameter(format!(
                "eta has {} ideal columns but the Kraus family has {} operators",
                eta.ideal_len(),
                kraus.len()
            )));
        }
        Ok(Self { kraus, eta })
    }

    pub fn dim(&self) -> usize {
        self.kraus.dim()
    }

    pub fn kraus(&self) -> &KrausFamily<T> {
        &self.kraus
    }

    pub fn eta(&self) -> &CorrelationMatrix<T> {
        &self.eta
    }

    /// Detected alphabet.
    pub fn outcomes(&self) -> &[String] {
        self.eta.detected()
    }

    pub fn is_approximate(&self) -> bool {
        matches!(self.kraus.completeness(), Completeness::Approximate { .. })
    }

    pub fn outcome_index(&self, label: &str) -> Result<usize> {
        self.outcomes()
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownOutcome(label.to_string()))
    }

    fn check_outcome(&self, i: usize) -> Result<()> {
        if i < self.outcomes().len() {
            Ok(())
        } else {
            Err(Error::UnknownOutcome(format!("#{i}")))
        }
    }

    fn check_state(&self, rho: &ComplexMatrix<T>) -> Result<()> {
        if rho.rows() != self.dim() || rho.cols() != self.dim() {
            return Err(Error::Shape {
                op: "channel",
                left: (self.dim(), self.dim()),
                right: (rho.rows(), rho.cols()),
            });
        }
        Ok(())
    }

    /// `tr(V_j rho V_j^dag)` for every ideal outcome `j`.
    pub fn ideal_weights(&self, rho: &ComplexMatrix<T>) -> Vec<T> {
        let d = rho.rows();
        self.kraus
            .effects()
            .iter()
            .map(|e| {
                let mut acc = Complex::<T>::zero();
                for r in 0..d {
                    for c in 0..d {
                        acc = acc + e.get(r, c) * rho.get(c, r);
                    }
                }
                acc.re
            })
            .collect()
    }

    /// `tr(Phi_i(rho))` for every detected outcome, unnormalized.
    pub fn outcome_weights(&self, rho: &ComplexMatrix<T>) -> Result<Vec<T>> {
        self.check_state(rho)?;
        let ideal = self.ideal_weights(rho);
        Ok((0..self.outcomes().len())
            .map(|i| {
                ideal
                    .iter()
                    .enumerate()
                    .map(|(j, w)| self.eta.get(i, j) * *w)
                    .sum::<T>()
                    .max(T::zero())
            })
            .collect())
    }

    /// `Phi_i(rho)` on an arbitrary square matrix, without normalization.
    pub fn phi_matrix(&self, i: usize, m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        self.check_outcome(i)?;
        self.check_state(m)?;
        let mut out = ComplexMatrix::zeros(self.dim(), self.dim());
        for (j, v) in self.kraus.operators().iter().enumerate() {
            let w = self.eta.get(i, j);
            if w.is_zero() {
                continue;
            }
            let branch = v.mul_unchecked(m).mul_unchecked(&v.adjoint());
            out.add_scaled_assign(&branch, w);
        }
        Ok(out)
    }

    /// `(Phi_i(rho), tr Phi_i(rho))`.
    pub fn apply_phi(&self, i: usize, rho: &DensityMatrix<T>) -> Result<(ComplexMatrix<T>, T)> {
        let m = self.phi_matrix(i, rho.matrix())?;
        let w = m.trace().re;
        Ok((m, w))
    }

    pub fn apply_phi_label(&self, label: &str, rho: &DensityMatrix<T>) -> Result<(ComplexMatrix<T>, T)> {
        self.apply_phi(self.outcome_index(label)?, rho)
    }

    /// Outcome law `P(i) = tr Phi_i(rho)`; renormalized in approximate mode.
    pub fn outcome_distribution(&self, rho: &DensityMatrix<T>) -> Result<OutcomeDistribution<T>> {
        let weights = self.outcome_weights(rho.matrix())?;
        self.distribution_from_weights(weights)
    }

    pub(crate) fn distribution_from_weights(&self, mut weights: Vec<T>) -> Result<OutcomeDistribution<T>> {
        let total: T = weights.iter().copied().sum();
        if !(total >= T::lit(DEGENERATE_WEIGHT)) {
            return Err(Error::DegenerateChannel { total: total.as_f64() });
        }
        if self.is_approximate() {
            for w in weights.iter_mut() {
                *w = *w / total;
            }
        }
        Ok(OutcomeDistribution::from_parts_unchecked(self.outcomes().to_vec(), weights))
    }

    /// `p(i | alpha) = tr Phi_i(|alpha><alpha|)`.
    pub fn pointer_distribution(&self, basis: &PointerBasis<T>, alpha: usize) -> Result<OutcomeDistribution<T>> {
        let projector = basis.projector(alpha)?;
        self.outcome_distribution(&projector)
    }

    /// Pointer distributions for the whole basis, in basis order.
    pub fn pointer_distributions(&self, basis: &PointerBasis<T>) -> Result<Vec<OutcomeDistribution<T>>> {
        (0..basis.len()).map(|a| self.pointer_distribution(basis, a)).collect()
    }

    pub fn to_snapshot(&self) -> ChannelSnapshot {
        let to_pairs = |m: &ComplexMatrix<T>| -> Vec<Vec<[f64; 2]>> {
            (0..m.rows())
                .map(|r| {
                    (0..m.cols())
                        .map(|c| {
                            let z = m.get(r, c);
                            [z.re.as_f64(), z.im.as_f64()]
                        })
                        .collect()
                })
                .collect()
        };
        ChannelSnapshot {
            dim: self.dim(),
            ideal_outcomes: self.kraus.labels().to_vec(),
            detected_outcomes: self.outcomes().to_vec(),
            kraus: self.kraus.operators().iter().map(to_pairs).collect(),
            eta: self
                .eta
                .rows()
                .into_iter()
                .map(|r| r.into_iter().map(|v| v.as_f64()).collect())
                .collect(),
            completeness: match self.kraus.completeness() {
                Completeness::Exact => CompletenessSnapshot::Exact,
                Completeness::Approximate { tolerance } => CompletenessSnapshot::Approximate {
                    tolerance: tolerance.as_f64(),
                },
            },
        }
    }

    pub fn from_snapshot(s: &ChannelSnapshot) -> Result<Self> {
        let lit = |x: f64| T::from_f64(x).ok_or_else(|| Error::Snapshot(format!("{x} not representable")));
        let mut operators = Vec::with_capacity(s.kraus.len());
        for (k, rows) in s.kraus.iter().enumerate() {
            if rows.len() != s.dim || rows.iter().any(|r| r.len() != s.dim) {
                return Err(Error::Snapshot(format!("operator {k} is not {0}x{0}", s.dim)));
            }
            let data = rows
                .iter()
                .flatten()
                .map(|[re, im]| Ok(Complex::new(lit(*re)?, lit(*im)?)))
                .collect::<Result<Vec<_>>>()?;
            operators.push(ComplexMatrix::new(s.dim, s.dim, data)?);
        }
        let completeness = match s.completeness {
            CompletenessSnapshot::Exact => Completeness::Exact,
            CompletenessSnapshot::Approximate { tolerance } => Completeness::Approximate {
                tolerance: lit(tolerance)?,
            },
        };
        let kraus = KrausFamily::new(s.ideal_outcomes.clone(), operators, completeness)?;
        let rows = s
            .eta
            .iter()
            .map(|r| r.iter().map(|v| lit(*v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let eta = CorrelationMatrix::new(s.detected_outcomes.clone(), rows)?;
        Self::new(kraus, eta)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_snapshot()).expect("snapshot serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: ChannelSnapshot = serde_json::from_str(text).map_err(|e| Error::Snapshot(e.to_string()))?;
        Self::from_snapshot(&s)
    }
}

/// JSON form of a channel; complex entries are `[re, im]` pairs, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSnapshot {
    pub dim: usize,
    pub ideal_outcomes: Vec<String>,
    pub detected_outcomes: Vec<String>,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
    pub eta: Vec<Vec<f64>>,
    pub completeness: CompletenessSnapshot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CompletenessSnapshot {
    Exact,
    Approximate { tolerance: f64 },
}

/// Ordered orthonormal basis; pointer `alpha` is the `alpha`-th vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerBasis<T> {
    vectors: Vec<Vec<Complex<T>>>,
}

impl<T: Real> PointerBasis<T> {
    pub fn new(vectors: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let d = vectors.len();
        if d == 0 || vectors.iter().any(|v| v.len() != d) {
            return Err(Error::InvalidParameter(
                "pointer basis needs d vectors of length d".into(),
            ));
        }
        let mut deviation = T::zero();
        for a in 0..d {
            for b in 0..d {
                let ip = vectors[a]
                    .iter()
                    .zip(&vectors[b])
                    .fold(Complex::<T>::zero(), |acc, (x, y)| acc + x.conj() * *y);
                let target = if a == b { T::one() } else { T::zero() };
                deviation = deviation.max((ip - Complex::new(target, T::zero())).norm());
            }
        }
        if !(deviation <= T::tol(ORTHONORMAL_TOL)) {
            return Err(Error::NotOrthonormal {
                deviation: deviation.as_f64(),
            });
        }
        Ok(Self { vectors })
    }

    /// Computational (Fock) basis.
    pub fn standard(dim: usize) -> Self {
        let vectors = (0..dim)
            .map(|a| {
                (0..dim)
                    .map(|k| if k == a { Complex::new(T::one(), T::zero()) } else { Complex::zero() })
                    .collect()
            })
            .collect();
        Self { vectors }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, alpha: usize) -> Result<&[Complex<T>]> {
        self.vectors
            .get(alpha)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::UnknownPointer(alpha.to_string()))
    }

    pub fn projector(&self, alpha: usize) -> Result<DensityMatrix<T>> {
        DensityMatrix::pure(self.vector(alpha)?)
    }

    /// `q_alpha = <alpha| rho |alpha>` for every pointer.
    pub fn populations(&self, rho: &DensityMatrix<T>) -> Vec<T> {
        self.vectors.iter().map(|v| rho.expectation_in(v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QndReport<T> {
    pub passed: bool,
    pub worst_deviation: T,
    /// `(operator index, pointer index)` at the worst deviation.
    pub worst_at: Option<(usize, usize)>,
}

/// Checks that every `V_j` maps each pointer projector to a multiple of itself.
pub fn check_qnd<T: Real>(kraus: &KrausFamily<T>, basis: &PointerBasis<T>) -> Result<QndReport<T>> {
    if basis.len() != kraus.dim() {
        return Err(Error::Shape {
            op: "check_qnd",
            left: (kraus.dim(), kraus.dim()),
            right: (basis.len(), basis.len()),
        });
    }
    let mut worst = T::zero();
    let mut worst_at = None;
    for alpha in 0..basis.len() {
        let v = basis.vector(alpha)?;
        let p = ComplexMatrix::outer(v);
        for (j, op) in kraus.operators().iter().enumerate() {
            let image = op.mul_unchecked(&p).mul_unchecked(&op.adjoint());
            let weight = kraus.effects()[j].bra_ket(v, v).re;
            let dev = image.sub(&p.scaled(weight))?.max_abs();
            if dev > worst || worst_at.is_none() {
                worst = worst.max(dev);
                worst_at = Some((j, alpha));
            }
        }
    }
    Ok(QndReport {
        passed: worst <= T::tol(QND_TOL),
        worst_deviation: worst,
        worst_at,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NondegeneracyReport<T> {
    pub passed: bool,
    /// Smallest max-norm gap between two pointer distributions.
    pub min_gap: T,
    /// First pair found whose distributions coincide.
    pub violating: Option<(usize, usize)>,
}

/// Every pair of distinct pointers must have distinguishable outcome laws.
pub fn check_nondegeneracy<T: Real>(
    ch: &ImperfectChannel<T>,
    basis: &PointerBasis<T>,
) -> Result<NondegeneracyReport<T>> {
    let dists = ch.pointer_distributions(basis)?;
    let mut min_gap = T::infinity();
    let mut violating = None;
    for a in 0..dists.len() {
        for b in (a + 1)..dists.len() {
            let gap = dists[a]
                .probs()
                .iter()
                .zip(dists[b].probs())
                .map(|(x, y)| (*x - *y).abs())
                .fold(T::zero(), T::max);
            min_gap = min_gap.min(gap);
            if !(gap > T::tol(NONDEGENERACY_TOL)) && violating.is_none() {
                violating = Some((a, b));
            }
        }
    }
    Ok(NondegeneracyReport {
        passed: violating.is_none(),
        min_gap,
        violating,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn trivial() -> ImperfectChannel<f64> {
        let k = KrausFamily::new(labels(&["x"]), vec![ComplexMatrix::identity(2)], Completeness::Exact).unwrap();
        ImperfectChannel::new(k, CorrelationMatrix::identity(labels(&["x"]))).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn pauli_x() -> ComplexMatrix<f64> {
        ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap()
    }

    #[test]
    fn trivial_channel_leaves_state_alone() {
        let ch = trivial();
        let rho = DensityMatrix::pure(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let (m, w) = ch.apply_phi(0, &rho).unwrap();
        assert!((w - 1.0).abs() < 1e-15);
        assert!(m.max_abs_diff(rho.matrix()).unwrap() < 1e-15);
        let p = ch.outcome_distribution(&rho).unwrap();
        assert_eq!(p.probs(), &[1.0]);
        let basis = PointerBasis::standard(2);
        assert_eq!(ch.pointer_distribution(&basis, 1).unwrap().probs(), &[1.0]);
    }

    #[test]
    fn unknown_outcome_and_pointer() {
        let ch = trivial();
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(matches!(ch.apply_phi(3, &rho), Err(Error::UnknownOutcome(_))));
        assert!(matches!(ch.apply_phi_label("nope", &rho), Err(Error::UnknownOutcome(_))));
        let basis = PointerBasis::standard(2);
        assert!(matches!(ch.pointer_distribution(&basis, 2), Err(Error::UnknownPointer(_))));
    }

    #[test]
    fn uniform_eta_columns_make_distribution_state_independent() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]).scaled(1.0);
        let v1 = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        let k = KrausFamily::new(labels(&["a", "b"]), vec![v0, v1], Completeness::Exact).unwrap();
        let eta = CorrelationMatrix::new(labels(&["u", "v", "w"]), vec![vec![0.2, 0.2], vec![0.5, 0.5], vec![0.3, 0.3]]).unwrap();
        let ch = ImperfectChannel::new(k, eta).unwrap();
        for rho in [
            DensityMatrix::basis_state(2, 0).unwrap(),
            DensityMatrix::pure(&[c(s, 0.0), c(0.0, s)]).unwrap(),
            DensityMatrix::maximally_mixed(2),
        ] {
            let p = ch.outcome_distribution(&rho).unwrap();
            for (got, want) in p.probs().iter().zip([0.2, 0.5, 0.3]) {
                assert!((got - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn incomplete_family_rejected() {
        let v = ComplexMatrix::from_real_diagonal(&[1.0, 0.5]);
        assert!(matches!(
            KrausFamily::new(labels(&["a"]), vec![v], Completeness::Exact),
            Err(Error::Incomplete { .. })
        ));
    }

    #[test]
    fn eta_validation() {
        assert!(matches!(
            CorrelationMatrix::new(labels(&["a", "b"]), vec![vec![0.5], vec![0.6]]),
            Err(Error::NotColumnStochastic { column: 0, .. })
        ));
        assert!(matches!(
            CorrelationMatrix::new(labels(&["a", "b"]), vec![vec![1.5], vec![-0.5]]),
            Err(Error::NotColumnStochastic { .. })
        ));
    }

    #[test]
    fn degenerate_when_every_identity_multiple() {
        // V_j proportional to I: all pointer laws coincide
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = ComplexMatrix::<f64>::identity(3).scaled(h);
        let k = KrausFamily::new(labels(&["a", "b"]), vec![v.clone(), v], Completeness::Exact).unwrap();
        let ch = ImperfectChannel::new(k, CorrelationMatrix::identity(labels(&["a", "b"]))).unwrap();
        let rep = check_nondegeneracy(&ch, &PointerBasis::standard(3)).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.violating, Some((0, 1)));
        // these are trivially QND though
        assert!(check_qnd(ch.kraus(), &PointerBasis::standard(3)).unwrap().passed);
    }

    #[test]
    fn pauli_x_is_not_qnd() {
        let k = KrausFamily::new(labels(&["x"]), vec![pauli_x()], Completeness::Exact).unwrap();
        let rep = check_qnd(&k, &PointerBasis::standard(2)).unwrap();
        assert!(!rep.passed);
        assert!((rep.worst_deviation - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pointer_basis_rejects_non_orthonormal() {
        let v = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]];
        assert!(matches!(PointerBasis::new(v), Err(Error::NotOrthonormal { .. })));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let hadamard = vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]];
        let b = PointerBasis::new(hadamard).unwrap();
        // X is QND in its own eigenbasis
        let k = KrausFamily::new(labels(&["x"]), vec![pauli_x()], Completeness::Exact).unwrap();
        assert!(check_qnd(&k, &b).unwrap().passed);
    }

    #[test]
    fn snapshot_rejects_unknown_fields() {
        let ch = trivial();
        let mut v: serde_json::Value = serde_json::from_str(&ch.to_json()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(matches!(
            ImperfectChannel::<f64>::from_json(&v.to_string()),
            Err(Error::Snapshot(_))
        ));
    }
}
