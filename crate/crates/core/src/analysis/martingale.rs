//! Exact identities satisfied by pointer populations under QND dynamics.

use crate::analysis::OutcomeDistribution;
use crate::channel::{ImperfectChannel, PointerBasis};
use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;
use crate::scalar::Real;

/// Product-form populations switch to log-space accumulation past this step.
pub const LOG_SPACE_AFTER: usize = 50;

/// `|sum_i tr(Phi_i rho) q_alpha(Phi_i rho / tr) - q_alpha(rho)|` for every
/// pointer, by enumerating the whole alphabet.
pub fn martingale_defect<T: Real>(
    ch: &ImperfectChannel<T>,
    basis: &PointerBasis<T>,
    rho: &DensityMatrix<T>,
) -> Result<Vec<T>> {
    let before = basis.populations(rho);
    let mut after = vec![T::zero(); basis.len()];
    for i in 0..ch.outcomes().len() {
        let (m, w) = ch.apply_phi(i, rho)?;
        if w <= T::zero() {
            continue;
        }
        let branch = DensityMatrix::from_unnormalized(m);
        for (acc, q) in after.iter_mut().zip(basis.populations(&branch)) {
            *acc = *acc + w * q;
        }
    }
    Ok(before.iter().zip(&after).map(|(b, a)| (*a - *b).abs()).collect())
}

/// Per step `n`, `max_alpha |q_alpha(n+1) p_n(i_n) - q_alpha(n) p(i_n|alpha)|`,
/// where `p_n(i) = tr Phi_i(rho_n)` is recomputed from the stored states.
pub fn recurrence_residuals<T: Real>(
    ch: &ImperfectChannel<T>,
    basis: &PointerBasis<T>,
    states: &[DensityMatrix<T>],
    outcomes: &[usize],
) -> Result<Vec<T>> {
    if states.len() != outcomes.len() + 1 {
        return Err(Error::InvalidParameter(format!(
            "{} states for {} outcomes",
            states.len(),
            outcomes.len()
        )));
    }
    let pointer = ch.pointer_distributions(basis)?;
    outcomes
        .iter()
        .enumerate()
        .map(|(n, &i)| {
            let p_n = ch.outcome_distribution(&states[n])?.probs()[i];
            let q_now = basis.populations(&states[n]);
            let q_next = basis.populations(&states[n + 1]);
            Ok((0..basis.len())
                .map(|a| (q_next[a] * p_n - q_now[a] * pointer[a].probs()[i]).abs())
                .fold(T::zero(), T::max))
        })
        .collect()
}

/// `q_alpha(n) = q_alpha(0) prod_k p(i_k|alpha) / sum_beta q_beta(0) prod_k p(i_k|beta)`
/// for `n = 0..=outcomes.len()`.
pub fn product_form_populations<T: Real>(
    initial: &[T],
    pointer: &[OutcomeDistribution<T>],
    outcomes: &[usize],
) -> Vec<Vec<T>> {
    let d = initial.len();
    let mut out = Vec::with_capacity(outcomes.len() + 1);
    let mut direct: Vec<T> = initial.to_vec();
    let mut logs: Vec<T> = initial.iter().map(|q| q.ln()).collect();
    let normalise = |w: &[T]| {
        let s: T = w.iter().copied().sum();
        w.iter().map(|x| *x / s).collect::<Vec<T>>()
    };
    out.push(normalise(&direct));
    for (k, &i) in outcomes.iter().enumerate() {
        let n = k + 1;
        for a in 0..d {
            let p = pointer[a].probs()[i];
            direct[a] = direct[a] * p;
            logs[a] = logs[a] + p.ln();
        }
        if n <= LOG_SPACE_AFTER {
            out.push(normalise(&direct));
        } else {
            let m = logs.iter().copied().fold(T::neg_infinity(), T::max);
            let w: Vec<T> = logs.iter().map(|l| (*l - m).exp()).collect();
            out.push(normalise(&w));
        }
    }
    out
}
