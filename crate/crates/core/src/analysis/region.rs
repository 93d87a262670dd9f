//! Stability condition for mismatched filters and its scan over `(phi0, phiR)`.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::analysis::entropy::{relative_entropy, Extended};
use crate::channel::{ImperfectChannel, PointerBasis};
use crate::error::{Error, Result};
use crate::export::format_float;
use crate::scalar::Real;

/// Entropy gaps below this between the best and runner-up minimizer are ties.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// For every `alpha`, `argmin_beta S(P_alpha || Phat_beta)` is `alpha` alone.
    Holds,
    /// `beta != alpha` is the unique minimizer for `alpha`.
    Fails { alpha: usize, beta: usize },
    /// Minimizers `beta` and `beta_alt` for `alpha` are closer than [`TIE_TOL`].
    Tie { alpha: usize, beta: usize, beta_alt: usize },
}

impl Verdict {
    /// CSV code: 1 holds, 0 fails, 2 tie.
    pub fn code(&self) -> u8 {
        match self {
            Verdict::Holds => 1,
            Verdict::Fails { .. } => 0,
            Verdict::Tie { .. } => 2,
        }
    }
}

fn gap_is_tie<T: Real>(best: Extended<T>, second: Extended<T>) -> bool {
    match (best, second) {
        (Extended::Finite(a), Extended::Finite(b)) => b - a < T::tol(TIE_TOL),
        (Extended::PosInfinity, Extended::PosInfinity) => true,
        _ => false,
    }
}

pub fn argmin_condition<T: Real>(
    ch_true: &ImperfectChannel<T>,
    ch_est: &ImperfectChannel<T>,
    basis: &PointerBasis<T>,
) -> Result<Verdict> {
    let truth = ch_true.pointer_distributions(basis)?;
    let est = ch_est.pointer_distributions(basis)?;
    for (alpha, p) in truth.iter().enumerate() {
        let s = est
            .iter()
            .map(|q| relative_entropy(p, q))
            .collect::<Result<Vec<_>>>()?;
        let mut best = 0;
        for b in 1..s.len() {
            if s[b] < s[best] {
                best = b;
            }
        }
        let second = (0..s.len())
            .filter(|&b| b != best)
            .reduce(|x, y| if s[y] < s[x] { y } else { x });
        if let Some(second) = second {
            if gap_is_tie(s[best], s[second]) {
                let (beta, beta_alt) = (best.min(second), best.max(second));
                return Ok(Verdict::Tie { alpha, beta, beta_alt });
            }
        }
        if best != alpha {
            return Ok(Verdict::Fails { alpha, beta: best });
        }
    }
    Ok(Verdict::Holds)
}

/// `n` evenly spaced values from `lo` to `hi` inclusive (`lo` alone when `n == 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange<T> {
    pub lo: T,
    pub hi: T,
    pub n: usize,
}

impl<T: Real> AxisRange<T> {
    pub fn new(lo: T, hi: T, n: usize) -> Self {
        Self { lo, hi, n }
    }

    pub fn values(&self) -> Vec<T> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let span = self.hi - self.lo;
        let denom = T::from_usize(self.n - 1).expect("resolution fits scalar");
        (0..self.n)
            .map(|k| self.lo + span * T::from_usize(k).expect("index fits scalar") / denom)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub phi0: AxisRange<T>,
    pub phi_r: AxisRange<T>,
}

impl Grid<f64> {
    /// 100 x 100 nodes over `[0.5, 1.1] x [-0.8, -0.1]`.
    pub fn default_window() -> Self {
        Self {
            phi0: AxisRange::new(0.5, 1.1, 100),
            phi_r: AxisRange::new(-0.8, -0.1, 100),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanNode<T> {
    pub phi0: T,
    pub phi_r: T,
    /// `Err` carries the factory or evaluation failure at this node.
    pub verdict: std::result::Result<Verdict, String>,
}

/// Nodes are ordered with `phi0` outer, `phiR` inner.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionScanResult<T> {
    pub grid: Grid<T>,
    pub nodes: Vec<ScanNode<T>>,
}

impl<T: Real> RegionScanResult<T> {
    pub fn node(&self, i_phi0: usize, i_phi_r: usize) -> &ScanNode<T> {
        &self.nodes[i_phi0 * self.grid.phi_r.n + i_phi_r]
    }

    pub fn holds_fraction(&self) -> f64 {
        let holds = self
            .nodes
            .iter()
            .filter(|n| matches!(n.verdict, Ok(Verdict::Holds)))
            .count();
        holds as f64 / self.nodes.len() as f64
    }

    /// Columns `phi0_hat, phiR_hat, verdict, fail_alpha, fail_beta`; verdict
    /// codes 1 holds, 0 fails, 2 tie, 3 error.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "phi0_hat,phiR_hat,verdict,fail_alpha,fail_beta")?;
        for node in &self.nodes {
            let (code, a, b) = match node.verdict {
                Ok(Verdict::Holds) => (1, String::new(), String::new()),
                Ok(Verdict::Fails { alpha, beta }) => (0, alpha.to_string(), beta.to_string()),
                Ok(Verdict::Tie { alpha, beta, .. }) => (2, alpha.to_string(), beta.to_string()),
                Err(_) => (3, String::new(), String::new()),
            };
            writeln!(
                w,
                "{},{},{code},{a},{b}",
                format_float(node.phi0.as_f64()),
                format_float(node.phi_r.as_f64())
            )?;
        }
        Ok(())
    }
}

/// Evaluates [`argmin_condition`] at every grid node with `ch_true` fixed;
/// `factory(phi0_hat, phiR_hat)` builds the estimated channel.
pub fn region_scan<T, F>(
    ch_true: &ImperfectChannel<T>,
    basis: &PointerBasis<T>,
    grid: &Grid<T>,
    factory: F,
) -> Result<RegionScanResult<T>>
where
    T: Real,
    F: Fn(T, T) -> Result<ImperfectChannel<T>> + Sync,
{
    if grid.phi0.n == 0 || grid.phi_r.n == 0 {
        return Err(Error::InvalidParameter("grid resolutions must be positive".into()));
    }
    let phi0 = grid.phi0.values();
    let phi_r = grid.phi_r.values();
    let points: Vec<(T, T)> = phi0
        .iter()
        .flat_map(|a| phi_r.iter().map(move |b| (*a, *b)))
        .collect();
    let nodes = points
        .par_iter()
        .map(|&(a, b)| {
            let verdict = factory(a, b)
                .and_then(|est| argmin_condition(ch_true, &est, basis))
                .map_err(|e| e.to_string());
            ScanNode { phi0: a, phi_r: b, verdict }
        })
        .collect();
    Ok(RegionScanResult {
        grid: grid.clone(),
        nodes,
    })
}
