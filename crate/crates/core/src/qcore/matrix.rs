//! Dense complex linear algebra at small dimension.
//!
//! Matrices are plain `nalgebra::DMatrix<Complex64>`; the functions here add
//! the Hermitian-specific pieces the rest of the crate relies on: a sorted
//! eigendecomposition with a reproducible phase convention, support-restricted
//! inverse square roots, and trace norms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::state::PureState;

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

/// Entrywise tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Default relative threshold for support decisions.
pub const RANK_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// Builds a square matrix from row-major entries.
pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<ComplexMatrix> {
    if entries.len() != dim * dim {
        return Err(Error::EntryCount {
            got: entries.len(),
            expected: dim * dim,
        });
    }
    Ok(ComplexMatrix::from_row_slice(dim, dim, entries))
}

pub fn to_row_major(a: &ComplexMatrix) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.nrows() * a.ncols());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out.push(a[(i, j)]);
        }
    }
    out
}

pub fn ensure_square(a: &ComplexMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

/// Largest entrywise modulus of `A - A^dag`.
pub fn hermitian_defect(a: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(A + A^dag) / 2`.
pub fn hermitize(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()) * c(0.5, 0.0)
}

pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

pub fn real_trace(a: &ComplexMatrix) -> f64 {
    a.trace().re
}

/// `tr[A B]` for Hermitian arguments, real part only.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// `|u><v|`.
pub fn outer(u: &DVector<C64>, v: &DVector<C64>) -> ComplexMatrix {
    u * v.adjoint()
}

pub fn projector(v: &DVector<C64>) -> ComplexMatrix {
    outer(v, v)
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, one per eigenvalue.
    pub vectors: Vec<PureState>,
}

impl HermitianEigen {
    /// `sum_i f(lambda_i) |v_i><v_i|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let dim = self.vectors.first().map_or(0, |v| v.dim());
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            let w = f(*lambda);
            if w != 0.0 {
                out += projector(v.amplitudes()) * c(w, 0.0);
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|x| x)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
///
/// Each eigenvector has its first non-negligible component made real and
/// positive so repeated runs produce identical output files.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = ensure_square(a)?;
    let defect = hermitian_defect(a);
    if defect > HERMITIAN_TOL * max_abs(a).max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: vec![],
        });
    }
    let eig = hermitize(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for i in order {
        values.push(eig.eigenvalues[i]);
        let col: DVector<C64> = eig.eigenvectors.column(i).into_owned();
        vectors.push(PureState::from_vector_unchecked(fix_phase(col)));
    }
    Ok(HermitianEigen { values, vectors })
}

/// Normalizes and rotates the global phase so the first component with
/// modulus above 1e-12 is real positive.
pub fn fix_phase(mut v: DVector<C64>) -> DVector<C64> {
    let norm = v.norm();
    if norm > 0.0 {
        v /= c(norm, 0.0);
    }
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let phase = z.conj() / z.norm();
        v *= phase;
    }
    v
}

/// Support-restricted inverse square root and its rank.
///
/// Eigenvalues at or below `rank_tol * lambda_max` are treated as zero and
/// dropped from the inverse.
pub fn pinv_sqrt(a: &ComplexMatrix, rank_tol: f64) -> Result<(ComplexMatrix, usize)> {
    let eig = eig_hermitian(a)?;
    let cut = rank_tol * eig.max().max(0.0);
    let rank = eig.values.iter().filter(|&&l| l > cut && l > 0.0).count();
    let m = eig.map(|l| if l > cut && l > 0.0 { 1.0 / l.sqrt() } else { 0.0 });
    Ok((m, rank))
}

/// Principal square root of a PSD matrix; negative rounding noise is clamped.
pub fn sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(eig_hermitian(a)?.map(|l| l.max(0.0).sqrt()))
}

/// Orthogonal projector onto the support of a PSD matrix.
pub fn support_projector(a: &ComplexMatrix, rank_tol: f64) -> Result<(ComplexMatrix, usize)> {
    let eig = eig_hermitian(a)?;
    let cut = rank_tol * eig.max().max(0.0);
    let rank = eig.values.iter().filter(|&&l| l > cut && l > 0.0).count();
    Ok((eig.map(|l| if l > cut && l > 0.0 { 1.0 } else { 0.0 }), rank))
}

/// Lower Cholesky factor of a Hermitian positive definite matrix, or `None`
/// when a pivot is not strictly positive.
pub fn cholesky_pd(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = a.nrows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)].re;
        for k in 0..j {
            pivot -= l[(j, k)].norm_sqr();
        }
        if !(pivot > 0.0) {
            return None;
        }
        let d = pivot.sqrt();
        l[(j, j)] = c(d, 0.0);
        for i in j + 1..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / d;
        }
    }
    Some(l)
}

/// Trace norm (sum of singular values) of a Hermitian matrix.
pub fn trace_norm_hermitian(a: &ComplexMatrix) -> Result<f64> {
    Ok(eig_hermitian(a)?.values.iter().map(|l| l.abs()).sum())
}

/// Trace norm of an arbitrary square matrix.
pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    a.clone().singular_values().iter().sum()
}

pub fn min_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    Ok(eig_hermitian(a)?.min())
}

pub fn max_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    Ok(eig_hermitian(a)?.max())
}

/// Pauli matrices `[X, Y, Z]`.
pub fn pauli() -> [ComplexMatrix; 3] {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        ComplexMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        ComplexMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        ComplexMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    ]
}
