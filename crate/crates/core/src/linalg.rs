//! Dense complex matrices and Hermitian spectral routines.
//!
//! Sized for small Hilbert spaces (a few dozen levels at most). Storage is
//! row-major `Vec<Complex<T>>`.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::scalar::Real;

/// Max-norm bound on `M - M^dag` for a valid density matrix.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Bound on `|tr(rho) - 1|` for a valid density matrix.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues below `-NEGATIVE_EIGEN_HARD` are rejected outright; those in
/// `[-NEGATIVE_EIGEN_HARD, 0)` are roundoff and get clamped to zero.
pub const NEGATIVE_EIGEN_HARD: f64 = 1e-8;
/// Hermiticity required of inputs to the eigensolver.
pub const EIGEN_INPUT_TOL: f64 = 1e-8;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Shape {
                op: "new",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_real_diagonal(&vec![T::one(); dim])
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |r, c| {
            if r == c {
                Complex::new(diag[r], T::zero())
            } else {
                Complex::zero()
            }
        })
    }

    /// Column vector (`n x 1`).
    pub fn column(v: &[Complex<T>]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// `|v><v|`.
    pub fn outer(v: &[Complex<T>]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |r, c| v[r] * v[c].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[r * self.cols + c] = v;
    }

    /// Entries in row-major order.
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn column_vec(&self, c: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape {
                op: "matmul",
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d = *d + a * *b;
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    /// `K M K^dag`.
    pub fn sandwich(&self, m: &Self) -> Result<Self> {
        let left = self.matmul(m)?;
        left.matmul(&self.adjoint())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Self,
        op: &'static str,
        f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>,
    ) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape {
                op,
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// `self += factor * other`; shapes must agree.
    pub(crate) fn add_scaled_assign(&mut self, other: &Self, factor: T) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + *b * factor;
        }
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| *z * factor).collect(),
        }
    }

    pub fn scaled_complex(&self, factor: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| *z * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i))
            .fold(Complex::zero(), |a, b| a + b)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        Ok(self.sub(other)?.max_abs())
    }

    /// `max |M - M^dag|`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut dev = T::zero();
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        dev
    }

    /// `(M + M^dag) / 2`.
    pub fn hermitized(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self.get(r, c) + self.get(c, r).conj()) * half
        })
    }

    /// `<u| M |v>`.
    pub fn bra_ket(&self, u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
        let mut acc = Complex::zero();
        for r in 0..self.rows {
            let mut row = Complex::zero();
            for c in 0..self.cols {
                row = row + self.get(r, c) * v[c];
            }
            acc = acc + u[r].conj() * row;
        }
        acc
    }
}

/// Spectral decomposition `h = U diag(values) U^dag`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// `U f(diag) U^dag`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.values.len();
        let mapped: Vec<T> = self.values.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |r, c| {
            let mut acc = Complex::zero();
            for k in 0..n {
                acc = acc + self.vectors.get(r, k) * self.vectors.get(c, k).conj() * mapped[k];
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.reconstruct_with(|l| l)
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
pub fn hermitian_eigen<T: Real>(h: &ComplexMatrix<T>) -> Result<HermitianEigen<T>> {
    if !h.is_square() {
        return Err(Error::Shape {
            op: "hermitian_eigen",
            left: (h.rows, h.cols),
            right: (h.cols, h.rows),
        });
    }
    let dev = h.hermitian_deviation();
    if !(dev <= T::tol(EIGEN_INPUT_TOL)) {
        return Err(Error::NotHermitian {
            deviation: dev.as_f64(),
        });
    }
    let n = h.rows;
    let mut a = h.hermitized();
    for i in 0..n {
        let d = a.get(i, i).re;
        a.set(i, i, Complex::new(d, T::zero()));
    }
    let mut v = ComplexMatrix::<T>::identity(n);

    let scale = a.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    let threshold = T::epsilon() * scale;

    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= threshold || off.is_zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q, threshold);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v.get(r, order[c]));
    Ok(HermitianEigen { values, vectors })
}

fn off_diagonal_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    let mut acc = T::zero();
    for r in 0..a.rows {
        for c in 0..a.cols {
            if r != c {
                acc = acc + a.get(r, c).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// One Jacobi rotation zeroing `a[p][q]`: `A <- J^dag A J`, `V <- V J`.
fn rotate<T: Real>(a: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize, threshold: T) {
    let b = a.get(p, q);
    let abs_b = b.norm();
    if abs_b <= threshold * T::lit(1e-3) || abs_b.is_zero() {
        return;
    }
    let phase = b / abs_b;
    let phase_c = phase.conj();
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let theta = (aqq - app) / (abs_b + abs_b);
    let t = if theta.is_zero() {
        T::one()
    } else {
        theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    let n = a.rows;

    // columns: p' = c p - s conj(phase) q ; q' = s p + c conj(phase) q
    for r in 0..n {
        let xp = a.get(r, p);
        let xq = a.get(r, q);
        a.set(r, p, xp * c - phase_c * xq * s);
        a.set(r, q, xp * s + phase_c * xq * c);
        let yp = v.get(r, p);
        let yq = v.get(r, q);
        v.set(r, p, yp * c - phase_c * yq * s);
        v.set(r, q, yp * s + phase_c * yq * c);
    }
    // rows: p' = c p - s phase q ; q' = s p + c phase q
    for col in 0..n {
        let xp = a.get(p, col);
        let xq = a.get(q, col);
        a.set(p, col, xp * c - phase * xq * s);
        a.set(q, col, xp * s + phase * xq * c);
    }
    a.set(p, q, Complex::zero());
    a.set(q, p, Complex::zero());
    let dp = a.get(p, p).re;
    let dq = a.get(q, q).re;
    a.set(p, p, Complex::new(dp, T::zero()));
    a.set(q, q, Complex::new(dq, T::zero()));
}

/// Principal square root of a Hermitian matrix; negative eigenvalues are
/// clamped to zero first.
pub fn psd_sqrt<T: Real>(h: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let eig = hermitian_eigen(h)?;
    Ok(eig.reconstruct_with(|l| l.max(T::zero()).sqrt()))
}

/// A valid quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates all three invariants.
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape {
                op: "density",
                left: (matrix.rows, matrix.cols),
                right: (matrix.cols, matrix.rows),
            });
        }
        let dev = matrix.hermitian_deviation();
        if !(dev <= T::tol(HERMITIAN_TOL)) {
            return Err(Error::NotHermitian {
                deviation: dev.as_f64(),
            });
        }
        let tr = matrix.trace().re;
        if !((tr - T::one()).abs() <= T::tol(TRACE_TOL)) {
            return Err(Error::TraceNotOne { trace: tr.as_f64() });
        }
        let eig = hermitian_eigen(&matrix)?;
        let min = eig.values[0];
        if min < -T::tol(NEGATIVE_EIGEN_HARD) {
            return Err(Error::NotPositive {
                min_eigenvalue: min.as_f64(),
            });
        }
        Ok(Self { matrix })
    }

    /// Re-Hermitizes and trace-normalizes an unnormalized positive map output.
    /// No spectral check: callers pass images of valid states under CP maps.
    pub(crate) fn from_unnormalized(m: ComplexMatrix<T>) -> Self {
        let h = m.hermitized();
        let tr = h.trace().re;
        Self {
            matrix: h.scaled(T::one() / tr),
        }
    }

    /// `|psi><psi|` for a (not necessarily normalized) nonzero vector.
    pub fn pure(psi: &[Complex<T>]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if psi.is_empty() || !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::InvalidParameter("pure state needs a finite nonzero vector".into()));
        }
        let v: Vec<Complex<T>> = psi.iter().map(|z| *z / norm).collect();
        Ok(Self {
            matrix: ComplexMatrix::outer(&v),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = T::one() / T::from_usize(dim).expect("dimension fits scalar");
        Self {
            matrix: ComplexMatrix::from_real_diagonal(&vec![w; dim]),
        }
    }

    /// Basis state `|n><n|` in dimension `dim`.
    pub fn basis_state(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidParameter(format!("basis index {n} outside dimension {dim}")));
        }
        let mut d = vec![T::zero(); dim];
        d[n] = T::one();
        Ok(Self {
            matrix: ComplexMatrix::from_real_diagonal(&d),
        })
    }

    /// Pure state from a vector of standard-normal complex amplitudes
    /// (real then imaginary part per component), normalized.
    pub fn random_pure(dim: usize, rng: &mut RngStream) -> Result<Self> {
        let psi: Vec<Complex<T>> = (0..dim)
            .map(|_| {
                let re = rng.standard_normal();
                let im = rng.standard_normal();
                Complex::new(T::lit(re), T::lit(im))
            })
            .collect();
        Self::pure(&psi)
    }

    /// Diagonal state with the given populations; must sum to one.
    pub fn diagonal(populations: &[T]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diagonal(populations))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    /// `<v| rho |v>`.
    pub fn expectation_in(&self, v: &[Complex<T>]) -> T {
        self.matrix.bra_ket(v, v).re
    }

    /// Diagonal entries (populations in the computational basis).
    pub fn diagonal_entries(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.matrix.get(i, i).re).collect()
    }
}

// Eigenvalues this small are rounding noise; their square roots would not be.
fn rank_cutoff<T: Real>(values: &[T]) -> T {
    let top = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    T::lit(values.len() as f64) * T::epsilon() * top
}

/// `F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`, clamped to [0, 1].
pub fn fidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Shape {
            op: "fidelity",
            left: (rho.dim(), rho.dim()),
            right: (sigma.dim(), sigma.dim()),
        });
    }
    let eig = hermitian_eigen(rho.matrix())?;
    let cut = rank_cutoff(&eig.values);
    let root = eig.reconstruct_with(|l| if l > cut { l.sqrt() } else { T::zero() });
    let inner = root.mul_unchecked(sigma.matrix()).mul_unchecked(&root).hermitized();
    let eig = hermitian_eigen(&inner)?;
    let cut = rank_cutoff(&eig.values);
    let tr: T = eig.values.iter().filter(|&&l| l > cut).map(|&l| l.sqrt()).sum();
    Ok((tr * tr).max(T::zero()).min(T::one()))
}
