//! Photon-box model: a truncated cavity mode probed by Rydberg-atom samples.
//!
//! Each sample holds zero, one or two atoms (probabilities `p0, p1, p2`); an
//! atom leaves in `g` or `e` with amplitudes `cos phi_N`, `sin phi_N` where
//! `phi_N = (phi0 (N + 1/2) + phiR) / 2`. The detector misses an atom with
//! probability `1 - eps_d` and swaps `e -> g` (`g -> e`) with probability
//! `eta_g` (`eta_e`).
//!
//! Optional cavity decoherence composes every ideal operator with
//! `L_0 = I - eps(1 + 2 n_th) N / 2 - eps n_th I / 2`,
//! `L_+ = sqrt(eps (1 + n_th)) a` and `L_- = sqrt(eps n_th) a^dag`, applied
//! after the atom interaction (`L_d V_j`).

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::channel::{Completeness, CorrelationMatrix, ImperfectChannel, KrausFamily, PointerBasis};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;

/// Ideal outcomes in operator order; `ge` and `eg` are distinct operators.
pub const IDEAL_OUTCOMES: [&str; 7] = ["no", "g", "e", "gg", "ge", "eg", "ee"];
/// Detected outcomes (rows of `eta`).
pub const DETECTED_OUTCOMES: [&str; 6] = ["no", "g", "e", "gg", "ge", "ee"];
/// Upper bound accepted for `eps` and `n_th`.
pub const DECOHERENCE_MAX: f64 = 0.1;
/// Values above this are accepted with a warning.
pub const DECOHERENCE_WARN: f64 = 0.05;

const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhotonBoxParams<T> {
    pub n_max: usize,
    pub p0: T,
    pub p1: T,
    pub p2: T,
    pub phi0: T,
    pub phi_r: T,
    pub eps_d: T,
    pub eta_g: T,
    pub eta_e: T,
}

impl<T: Real> Default for PhotonBoxParams<T> {
    /// Experimental values: `p = (0.9, 0.05, 0.05)`, `phi0 = 0.78`,
    /// `phiR = -0.44`, `eps_d = 0.9`, `eta_g = eta_e = 0.1`, `n_max = 4`.
    fn default() -> Self {
        Self {
            n_max: 4,
            p0: T::lit(0.9),
            p1: T::lit(0.05),
            p2: T::lit(0.05),
            phi0: T::lit(0.78),
            phi_r: T::lit(-0.44),
            eps_d: T::lit(0.9),
            eta_g: T::lit(0.1),
            eta_e: T::lit(0.1),
        }
    }
}

fn unit_interval<T: Real>(name: &str, v: T) -> Result<()> {
    if v >= T::zero() && v <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")))
    }
}

impl<T: Real> PhotonBoxParams<T> {
    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_phases(mut self, phi0: T, phi_r: T) -> Self {
        self.phi0 = phi0;
        self.phi_r = phi_r;
        self
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 1 {
            return Err(Error::InvalidParameter("n_max must be at least 1".into()));
        }
        for (name, v) in [("p0", self.p0), ("p1", self.p1), ("p2", self.p2)] {
            unit_interval(name, v)?;
        }
        let sum = self.p0 + self.p1 + self.p2;
        if !((sum - T::one()).abs() <= T::tol(SUM_TOL)) {
            return Err(Error::InvalidParameter(format!("p0 + p1 + p2 = {sum}, expected 1")));
        }
        for (name, v) in [("eps_d", self.eps_d), ("eta_g", self.eta_g), ("eta_e", self.eta_e)] {
            unit_interval(name, v)?;
        }
        if !(self.phi0.is_finite() && self.phi_r.is_finite()) {
            return Err(Error::InvalidParameter("phases must be finite".into()));
        }
        Ok(())
    }

    /// `phi_n = (phi0 (n + 1/2) + phiR) / 2`.
    pub fn phase(&self, n: usize) -> T {
        let half = T::lit(0.5);
        (self.phi0 * (T::from_usize(n).expect("photon number fits scalar") + half) + self.phi_r) * half
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoherenceParams<T> {
    pub eps: T,
    pub n_th: T,
}

impl<T: Real> Default for DecoherenceParams<T> {
    /// `eps = 0.01`, `n_th = 0.05`.
    fn default() -> Self {
        Self {
            eps: T::lit(0.01),
            n_th: T::lit(0.05),
        }
    }
}

impl<T: Real> DecoherenceParams<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps", self.eps), ("n_th", self.n_th)] {
            if !(v >= T::zero() && v <= T::lit(DECOHERENCE_MAX)) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} outside [0, {DECOHERENCE_MAX}]"
                )));
            }
        }
        Ok(())
    }

    /// Human-readable notes for values that stretch the weak-coupling regime.
    pub fn warnings(&self) -> Vec<String> {
        [("eps", self.eps), ("n_th", self.n_th)]
            .into_iter()
            .filter(|(_, v)| *v > T::lit(DECOHERENCE_WARN))
            .map(|(name, v)| format!("{name} = {v} exceeds {DECOHERENCE_WARN}; first-order expansion is loose"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperators<T> {
    /// `N = diag(0, 1, ..., n_max)`.
    pub number: ComplexMatrix<T>,
    /// `a |n> = sqrt(n) |n - 1>`.
    pub annihilation: ComplexMatrix<T>,
    /// `a^dag`, with `a^dag |n_max> = 0`.
    pub creation: ComplexMatrix<T>,
}

pub fn fock_operators<T: Real>(n_max: usize) -> Result<FockOperators<T>> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let d = n_max + 1;
    let num = |n: usize| T::from_usize(n).expect("photon number fits scalar");
    let number = ComplexMatrix::from_real_diagonal(&(0..d).map(num).collect::<Vec<_>>());
    let annihilation = ComplexMatrix::from_fn(d, d, |r, c| {
        if c == r + 1 {
            Complex::new(num(c).sqrt(), T::zero())
        } else {
            Complex::zero()
        }
    });
    let creation = annihilation.adjoint();
    Ok(FockOperators {
        number,
        annihilation,
        creation,
    })
}

fn labels<const N: usize>(l: [&str; N]) -> Vec<String> {
    l.iter().map(|s| s.to_string()).collect()
}

/// The seven ideal operators, diagonal in the Fock basis, in [`IDEAL_OUTCOMES`] order.
pub fn build_ideal_kraus<T: Real>(params: &PhotonBoxParams<T>) -> Result<KrausFamily<T>> {
    params.validate()?;
    let d = params.dim();
    let (cos, sin): (Vec<T>, Vec<T>) = (0..d).map(|n| {
        let phi = params.phase(n);
        (phi.cos(), phi.sin())
    }).unzip();
    let (s0, s1, s2) = (params.p0.sqrt(), params.p1.sqrt(), params.p2.sqrt());
    let diag = |f: &dyn Fn(usize) -> T| ComplexMatrix::from_real_diagonal(&(0..d).map(f).collect::<Vec<_>>());
    let operators = vec![
        diag(&|_| s0),
        diag(&|n| s1 * cos[n]),
        diag(&|n| s1 * sin[n]),
        diag(&|n| s2 * cos[n] * cos[n]),
        diag(&|n| s2 * cos[n] * sin[n]),
        diag(&|n| s2 * cos[n] * sin[n]),
        diag(&|n| s2 * sin[n] * sin[n]),
    ];
    KrausFamily::new(labels(IDEAL_OUTCOMES), operators, Completeness::Exact)
}

/// Detector table: rows `no, g, e, gg, ge, ee`; columns `no, g, e, gg, (ge or eg), ee`.
fn eta_table<T: Real>(ed: T, eg: T, ee: T) -> [[T; 6]; 6] {
    let one = T::one();
    let two = T::lit(2.0);
    let z = T::zero();
    let miss = one - ed;
    [
        // no
        [one, miss, miss, miss * miss, miss * miss, miss * miss],
        // g
        [
            z,
            ed * (one - eg),
            ed * ee,
            two * ed * miss * (one - eg),
            ed * miss * (one - eg + ee),
            two * ed * miss * ee,
        ],
        // e
        [
            z,
            ed * eg,
            ed * (one - ee),
            two * ed * miss * eg,
            ed * miss * (one - ee + eg),
            two * ed * miss * (one - ee),
        ],
        // gg
        [z, z, z, ed * ed * (one - eg) * (one - eg), ed * ed * ee * (one - eg), ed * ed * ee * ee],
        // ge
        [
            z,
            z,
            z,
            two * ed * ed * eg * (one - eg),
            ed * ed * ((one - eg) * (one - ee) + eg * ee),
            two * ed * ed * ee * (one - ee),
        ],
        // ee
        [z, z, z, ed * ed * eg * eg, ed * ed * eg * (one - ee), ed * ed * (one - ee) * (one - ee)],
    ]
}

/// `6 x 7` correlation matrix; the `ge` and `eg` columns both carry the
/// table's merged `(ge or eg)` column.
pub fn build_eta<T: Real>(params: &PhotonBoxParams<T>) -> Result<CorrelationMatrix<T>> {
    for (name, v) in [("eps_d", params.eps_d), ("eta_g", params.eta_g), ("eta_e", params.eta_e)] {
        unit_interval(name, v)?;
    }
    let table = eta_table(params.eps_d, params.eta_g, params.eta_e);
    // ideal column -> table column
    const COLUMN_OF: [usize; 7] = [0, 1, 2, 3, 4, 4, 5];
    let rows = table
        .iter()
        .map(|row| COLUMN_OF.iter().map(|&c| row[c]).collect())
        .collect();
    CorrelationMatrix::new(labels(DETECTED_OUTCOMES), rows)
}

/// `[L_0, L_+, L_-]` on the truncated space.
pub fn build_decoherence<T: Real>(dec: &DecoherenceParams<T>, n_max: usize) -> Result<[ComplexMatrix<T>; 3]> {
    dec.validate()?;
    let f = fock_operators::<T>(n_max)?;
    let d = n_max + 1;
    let one = T::one();
    let two = T::lit(2.0);
    let l0 = ComplexMatrix::identity(d)
        .sub(&f.number.scaled(dec.eps * (one + two * dec.n_th) / two))?
        .sub(&ComplexMatrix::identity(d).scaled(dec.eps * dec.n_th / two))?;
    let l_plus = f.annihilation.scaled((dec.eps * (one + dec.n_th)).sqrt());
    let l_minus = f.creation.scaled((dec.eps * dec.n_th).sqrt());
    Ok([l0, l_plus, l_minus])
}

/// Without decoherence: 7 ideal operators and the `6 x 7` detector matrix
/// (exact completeness). With it: the 21 operators `L_d V_j` (`d` outer), each
/// inheriting the detector column of `V_j`, with completeness tolerance
/// `max(2 eps, 1e-9)` and renormalized outcome laws.
pub fn build_channel<T: Real>(
    params: &PhotonBoxParams<T>,
    dec: Option<&DecoherenceParams<T>>,
) -> Result<ImperfectChannel<T>> {
    let ideal = build_ideal_kraus(params)?;
    let eta = build_eta(params)?;
    let Some(dec) = dec else {
        return ImperfectChannel::new(ideal, eta);
    };
    let ls = build_decoherence(dec, params.n_max)?;
    let mut ops = Vec::with_capacity(21);
    let mut names = Vec::with_capacity(21);
    for (tag, l) in ["0", "+", "-"].iter().zip(&ls) {
        for (label, v) in ideal.labels().iter().zip(ideal.operators()) {
            ops.push(l.matmul(v)?);
            names.push(format!("{tag}:{label}"));
        }
    }
    let tolerance = (T::lit(2.0) * dec.eps).max(T::tol(1e-9));
    let kraus = KrausFamily::new(names, ops, Completeness::Approximate { tolerance })?;
    let rows = eta
        .rows()
        .into_iter()
        .map(|row| {
            let mut r = Vec::with_capacity(21);
            for _ in 0..3 {
                r.extend_from_slice(&row);
            }
            r
        })
        .collect();
    let eta = CorrelationMatrix::new(labels(DETECTED_OUTCOMES), rows)?;
    ImperfectChannel::new(kraus, eta)
}

/// Fock basis of the model.
pub fn fock_basis<T: Real>(params: &PhotonBoxParams<T>) -> PointerBasis<T> {
    PointerBasis::standard(params.dim())
}

/// Channel factory over estimated phases, for region scans.
pub fn phase_factory<T: Real>(
    params: PhotonBoxParams<T>,
    dec: Option<DecoherenceParams<T>>,
) -> impl Fn(T, T) -> Result<ImperfectChannel<T>> + Sync {
    move |phi0, phi_r| build_channel(&params.with_phases(phi0, phi_r), dec.as_ref())
}
