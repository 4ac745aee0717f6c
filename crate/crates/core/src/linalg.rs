//! Dense complex linear algebra used by the module and form code.
//!
//! Everything here works on `DMatrix<C64>` and handles empty (0×n, n×0)
//! matrices, which show up constantly for zero submodules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative singular-value cutoff for rank decisions.
pub const RANK_RTOL: f64 = 1e-8;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

fn to_faer(m: &CMat) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular values (descending) with both square unitary factors.
pub(crate) struct FullSvd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v: CMat,
}

// nalgebra 0.35's SVD returns wrong factors for many rank-deficient inputs,
// real and complex alike, so every decomposition here goes through faer.
pub(crate) fn full_svd(m: &CMat) -> FullSvd {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return FullSvd {
            u: CMat::identity(rows, rows),
            sigma: Vec::new(),
            v: CMat::identity(cols, cols),
        };
    }
    let svd = to_faer(m).svd().expect("SVD converges");
    let s = svd.S().column_vector();
    FullSvd {
        u: from_faer(svd.U()),
        sigma: (0..rows.min(cols)).map(|i| s[i].re).collect(),
        v: from_faer(svd.V()),
    }
}

/// Singular values, descending.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    to_faer(m).singular_values().expect("SVD converges")
}

/// Largest singular value (0 for empty matrices).
pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Orthonormal basis of the column space, using `cutoff` as an absolute
/// singular-value threshold.
pub(crate) fn range_basis_abs(m: &CMat, cutoff: f64) -> CMat {
    let rows = m.nrows();
    if m.is_empty() {
        return CMat::zeros(rows, 0);
    }
    let FullSvd { u, sigma, .. } = full_svd(m);
    let rank = sigma.iter().take_while(|&&s| s > cutoff).count();
    u.columns(0, rank).into_owned()
}

/// Orthonormal basis of the column space with the default relative cutoff.
pub fn range_basis(m: &CMat) -> CMat {
    let scale = spectral_norm(m);
    range_basis_abs(m, RANK_RTOL * scale)
}

/// Orthonormal basis of the null space, treating singular values at or below
/// `cutoff` as zero.
pub(crate) fn null_basis_abs(m: &CMat, cutoff: f64) -> CMat {
    let cols = m.ncols();
    let FullSvd { sigma, v, .. } = full_svd(m);
    let rank = sigma.iter().take_while(|&&s| s > cutoff).count();
    v.columns(rank, cols - rank).into_owned()
}

/// Orthonormal basis of the complement of span(`basis`) inside ℂⁿ, where the
/// columns of `basis` are orthonormal.
pub(crate) fn orthogonal_complement_basis(basis: &CMat) -> CMat {
    let n = basis.nrows();
    let residual = CMat::identity(n, n) - basis * basis.adjoint();
    range_basis_abs(&residual, 0.5)
}

/// Minimum-norm least-squares solution of `m · X = rhs` via the
/// pseudoinverse with an absolute cutoff.
pub(crate) fn pinv_solve(m: &CMat, rhs: &CMat, cutoff: f64) -> CMat {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return CMat::zeros(cols, rhs.ncols());
    }
    let FullSvd { u, sigma, v } = full_svd(m);
    let rank = sigma.iter().take_while(|&&s| s > cutoff).count();
    let mut coeffs = u.columns(0, rank).adjoint() * rhs;
    for (i, s) in sigma.iter().take(rank).enumerate() {
        coeffs.row_mut(i).unscale_mut(*s);
    }
    v.columns(0, rank) * coeffs
}

/// Eigenvalues of the Hermitian part `(m + m*)/2`, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    to_faer(&hermitian_part(m))
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("eigensolver converges")
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of the Hermitian
/// part of `m`.
pub(crate) fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    if m.is_empty() {
        return (Vec::new(), CMat::zeros(m.nrows(), 0));
    }
    let evd = to_faer(&hermitian_part(m))
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("eigensolver converges");
    let s = evd.S().column_vector();
    let values = (0..m.nrows()).map(|i| s[i].re).collect();
    (values, from_faer(evd.U()))
}

pub(crate) fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest absolute entry of `m − m*`.
pub(crate) fn hermitian_defect(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    (m - m.adjoint()).iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `I_n ⊗ m`: `n` copies of `m` down the diagonal.
pub(crate) fn kron_identity(n: usize, m: &CMat) -> CMat {
    let (r, c) = m.shape();
    let mut out = CMat::zeros(n * r, n * c);
    for i in 0..n {
        out.view_mut((i * r, i * c), (r, c)).copy_from(m);
    }
    out
}

/// Direct sum of square-or-rectangular blocks.
pub(crate) fn block_diag(blocks: &[CMat]) -> CMat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r0, c0), b.shape()).copy_from(b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// `m ⊗ I_n`: entry `m_ij` becomes the block `m_ij · I_n`.
pub(crate) fn kron_outer_identity(m: &CMat, n: usize) -> CMat {
    let (r, c) = m.shape();
    let mut out = CMat::zeros(r * n, c * n);
    for i in 0..r {
        for j in 0..c {
            if m[(i, j)] != ZERO {
                for d in 0..n {
                    out[(i * n + d, j * n + d)] = m[(i, j)];
                }
            }
        }
    }
    out
}
