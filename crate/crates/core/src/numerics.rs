//! Dense Hermitian matrix backbone.
//!
//! Everything downstream (density operators, POVM elements, channel outputs)
//! is carried as a [`HermitianMatrix`]. Eigendecompositions are delegated to
//! nalgebra's tridiagonal QR solver, which is deterministic for a fixed input,
//! and re-sorted into ascending order.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Absolute Hermiticity tolerance (scaled by the max-norm when that exceeds 1).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Default cutoff below which eigenvalues of a state are treated as zero.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-10;
/// Eigenvalues more negative than this reject a matrix as not PSD.
pub const NOT_PSD_TOL: f64 = 1e-8;

/// A square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let scale = max_abs(&m).max(1.0);
        let asymmetry = hermitian_defect(&m);
        if asymmetry > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(Self::hermitize(m))
    }

    /// Symmetrizes `(m + m†)/2` without checking. Used on products that are
    /// Hermitian in exact arithmetic.
    pub fn hermitize(m: CMatrix) -> Self {
        let adj = m.adjoint();
        HermitianMatrix((m + adj).scale(0.5))
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix(CMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        HermitianMatrix(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// `|v⟩⟨v|`
    pub fn projector(v: &[Complex64]) -> Self {
        let n = v.len();
        HermitianMatrix(CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix(self.0.scale(s))
    }

    /// `self + s·other`
    pub fn add_scaled(&self, other: &HermitianMatrix, s: f64) -> Self {
        HermitianMatrix(&self.0 + other.0.scale(s))
    }

    pub fn max_abs_diff(&self, other: &HermitianMatrix) -> f64 {
        max_abs(&(&self.0 - &other.0))
    }

    /// `Tr(self · other)`, real for Hermitian arguments.
    pub fn trace_product(&self, other: &HermitianMatrix) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.0[(i, j)] * other.0[(j, i)]).re;
            }
        }
        acc
    }

    /// `U · self · U†`
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self::hermitize(u * &self.0 * u.adjoint())
    }

    /// Top-left `dim × dim` block.
    pub fn crop(&self, dim: usize) -> Self {
        HermitianMatrix(self.0.view((0, 0), (dim, dim)).into_owned())
    }

    /// Zero-padded embedding into a larger dimension.
    pub fn pad(&self, dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        let n = self.dim();
        m.view_mut((0, 0), (n, n)).copy_from(&self.0);
        HermitianMatrix(m)
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenSystem {
    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `V f(Λ) V†`
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fj = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        HermitianMatrix::hermitize(scaled * self.eigenvectors.adjoint())
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.map(|x| x)
    }
}

const UNDERFLOW_FLUSH: f64 = 1e-60;

pub fn hermitian_eig(a: &HermitianMatrix) -> EigenSystem {
    let n = a.dim();
    if n == 0 {
        return EigenSystem {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
        };
    }
    // Entries this far below the scale cannot move any eigenvalue at double
    // precision, but they underflow inside the Householder reduction.
    let scale = a.0.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let floor = scale * UNDERFLOW_FLUSH;
    let mut m = a.0.clone();
    m.iter_mut().filter(|z| z.norm() < floor).for_each(|z| *z = Complex64::new(0.0, 0.0));
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    EigenSystem {
        eigenvalues,
        eigenvectors,
    }
}

pub fn min_eigenvalue(a: &HermitianMatrix) -> f64 {
    hermitian_eig(a).min()
}

/// Principal square root of a PSD matrix. Eigenvalues within round-off of
/// zero (either sign) are clipped to zero before the root is taken.
pub fn psd_sqrt(a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = hermitian_eig(a);
    let min = eig.min();
    if min < -NOT_PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    let floor = a.dim() as f64 * f64::EPSILON * eig.max().max(0.0);
    Ok(eig.map(|x| if x > floor { x.sqrt() } else { 0.0 }))
}

pub fn is_psd(a: &HermitianMatrix, tol: f64) -> bool {
    min_eigenvalue(a) >= -tol
}

/// Largest `p ≥ 0` such that `rho − p·rho_c` stays positive semidefinite.
///
/// `rho_c` is projected onto the support of `rho` (eigenvalues above `tol`).
/// Weight of `rho_c` outside that support forces zero. Otherwise the answer is
/// the reciprocal of the top eigenvalue of `rho^{-1/2} rho_c rho^{-1/2}`
/// restricted to the support, clamped to `[0, 1]`.
pub fn max_mixing_weight(rho: &HermitianMatrix, rho_c: &HermitianMatrix, tol: f64) -> Result<f64> {
    if rho.dim() != rho_c.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: rho_c.dim(),
        });
    }
    let eig = hermitian_eig(rho);
    if eig.min() < -NOT_PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min(),
        });
    }
    let target_min = min_eigenvalue(rho_c);
    if target_min < -NOT_PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: target_min,
        });
    }

    // rho_c in the eigenbasis of rho
    let v = &eig.eigenvectors;
    let rotated = v.adjoint() * rho_c.as_matrix() * v;
    let support: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > tol)
        .collect();
    let outside: f64 = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] <= tol)
        .map(|i| rotated[(i, i)].re)
        .sum();
    if support.is_empty() || outside > tol {
        return Ok(0.0);
    }

    let k = support.len();
    let whitened = CMatrix::from_fn(k, k, |a, b| {
        let (i, j) = (support[a], support[b]);
        rotated[(i, j)] / (eig.eigenvalues[i] * eig.eigenvalues[j]).sqrt()
    });
    let top = hermitian_eig(&HermitianMatrix::hermitize(whitened)).max();
    if top <= 0.0 {
        return Ok(1.0);
    }
    Ok((1.0 / top).clamp(0.0, 1.0))
}
