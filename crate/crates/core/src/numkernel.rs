//! Tolerance-aware dense complex matrix primitives.
//!
//! Every predicate in this crate is tolerance relative: equalities between
//! operators are operator-norm bounds, and rank decisions are eigenvalue
//! cutoffs on Hermitian Gram matrices.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Numerical tolerances shared by every operation.
///
/// `atol` bounds operator-norm residuals, `rank_rtol` is the relative
/// eigenvalue cutoff for rank decisions. The remaining knobs drive the
/// orthogonality verdicts: `ortho_tol` for idempotency defects,
/// `merge_tol` for identifying atoms, and `exhaustive_cap` for the largest
/// measure on which every subset split is checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub atol: f64,
    pub rank_rtol: f64,
    pub ortho_tol: f64,
    pub merge_tol: f64,
    pub exhaustive_cap: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            atol: 1e-8,
            rank_rtol: 1e-10,
            ortho_tol: 1e-7,
            merge_tol: 1e-6,
            exhaustive_cap: 12,
        }
    }
}

impl Tolerance {
    pub fn with_atol(mut self, atol: f64) -> Self {
        self.atol = atol;
        self
    }

    pub fn with_ortho_tol(mut self, ortho_tol: f64) -> Self {
        self.ortho_tol = ortho_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.atol) && ok(self.rank_rtol) && ok(self.ortho_tol) && ok(self.merge_tol) {
            Ok(())
        } else {
            Err(Error::BadParameters(format!("tolerances must be positive: {self:?}")))
        }
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Real matrix from row-major data.
pub fn real_mat(rows: usize, cols: usize, data: &[f64]) -> CMat {
    assert_eq!(data.len(), rows * cols);
    CMat::from_fn(rows, cols, |i, j| c(data[i * cols + j], 0.0))
}

pub fn diag(values: &[f64]) -> CMat {
    let n = values.len();
    CMat::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Matrix unit `E_ij` of size `n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

/// Rank-one projection onto the span of `v`.
pub fn projector(v: &[C64]) -> CMat {
    let n = v.len();
    let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    CMat::from_fn(n, n, |i, j| v[i] * v[j].conj() / norm2)
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest singular value.
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let frob = m.norm();
    if frob == 0.0 {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Operator norm of `a - b`; shapes must agree.
pub fn dist(a: &CMat, b: &CMat) -> f64 {
    op_norm(&(a - b))
}

pub fn hermitian_residual(m: &CMat) -> f64 {
    op_norm(&(m - m.adjoint()))
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().sum()
}

pub fn ensure_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    Ok(m.nrows())
}

pub fn ensure_same_shape(a: &CMat, b: &CMat, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{what}: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Block-diagonal direct sum.
pub fn block_diag(blocks: &[CMat]) -> CMat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let (mut r, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r, c0), b.shape()).copy_from(b);
        r += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// Vertical concatenation of matrices with equal column counts.
pub fn vstack(blocks: &[CMat]) -> CMat {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((r, 0), b.shape()).copy_from(b);
        r += b.nrows();
    }
    out
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: CMat,
}

impl HermEig {
    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Number of eigenvalues above `rank_rtol * max(lambda_max, 0)`.
    pub fn rank(&self, tol: &Tolerance) -> usize {
        let top = self.max();
        if top <= 0.0 {
            return 0;
        }
        let cutoff = tol.rank_rtol * top;
        self.values.iter().filter(|&&v| v > cutoff).count()
    }

    /// Columns `[from, to)` of the eigenvector matrix.
    pub fn columns(&self, from: usize, to: usize) -> CMat {
        self.vectors.columns(from, to - from).into_owned()
    }
}

/// Eigendecomposition `M = Q diag(values) Q*` of a Hermitian matrix.
///
/// The Hermiticity check is scaled by `max(1, ||M||)` so that large Gram
/// matrices are not rejected for round-off.
pub fn herm_eig(m: &CMat, tol: &Tolerance) -> Result<HermEig> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(HermEig { values: vec![], vectors: CMat::zeros(0, 0) });
    }
    if !is_finite(m) {
        return Err(Error::NonFinite("eigensolver input".into()));
    }
    let scale = op_norm(m).max(1.0);
    let res = hermitian_residual(m);
    if res > tol.atol * scale {
        return Err(Error::NotHermitian(res));
    }
    let h = hermitian_part(m);
    let eig = nalgebra::SymmetricEigen::try_new(h, f64::EPSILON, 10_000 * n)
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok(HermEig { values, vectors })
}

/// `true` iff `high - low` is positive semidefinite up to `atol`.
pub fn psd_cone_order(low: &CMat, high: &CMat, tol: &Tolerance) -> Result<bool> {
    Ok(psd_margin(low, high, tol)? >= -tol.atol)
}

/// Smallest eigenvalue of `high - low`.
pub fn psd_margin(low: &CMat, high: &CMat, tol: &Tolerance) -> Result<f64> {
    ensure_square(low)?;
    ensure_same_shape(low, high, "psd_cone_order")?;
    Ok(herm_eig(&(high - low), tol)?.min())
}

/// Orthonormal basis (as columns) of the kernel of `m`.
///
/// Singular values at or below `atol * (1 + ||M||)` count as zero, so every
/// returned column satisfies `||M v|| <= atol * (1 + ||M||)`.
pub fn null_space(m: &CMat, tol: &Tolerance) -> Result<CMat> {
    let cols = m.ncols();
    if cols == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    if !is_finite(m) {
        return Err(Error::NonFinite("null_space input".into()));
    }
    // thin SVD only yields a full right factor when rows >= cols
    let padded = if m.nrows() < cols {
        let mut p = CMat::zeros(cols, cols);
        p.view_mut((0, 0), m.shape()).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::try_new(padded, false, true, f64::EPSILON, 10_000 * cols)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::NumericalFailure("SVD without right factor".into()))?;
    let sigma_max = svd.singular_values.max();
    let cutoff = tol.atol * (1.0 + sigma_max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= cutoff)
        .collect();
    let mut out = CMat::zeros(cols, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        for r in 0..cols {
            out[(r, k)] = v_t[(i, r)].conj();
        }
    }
    Ok(out)
}

/// One cluster of nearly equal eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralCluster {
    pub center: f64,
    /// Orthonormal basis of the eigenspace, as columns.
    pub basis: CMat,
}

impl SpectralCluster {
    pub fn projection(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }
}

/// Single-linkage eigenvalue clustering with gap `max(atol, rank_rtol * ||M||)`.
/// Clusters come back in ascending order of their centers.
pub fn spectral_clusters(m: &CMat, tol: &Tolerance) -> Result<Vec<SpectralCluster>> {
    let eig = herm_eig(m, tol)?;
    let n = eig.values.len();
    if n == 0 {
        return Ok(vec![]);
    }
    let norm = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let gap = tol.atol.max(tol.rank_rtol * norm);
    let mut clusters = Vec::new();
    // walk from the smallest eigenvalue upwards
    let mut end = n;
    while end > 0 {
        let mut start = end - 1;
        while start > 0 && eig.values[start - 1] - eig.values[start] <= gap {
            start -= 1;
        }
        let center = eig.values[start..end].iter().sum::<f64>() / (end - start) as f64;
        clusters.push(SpectralCluster { center, basis: eig.columns(start, end) });
        end = start;
    }
    Ok(clusters)
}

/// `(eigenvalue cluster center, orthogonal projection)` pairs, ascending.
pub fn spectral_projections(m: &CMat, tol: &Tolerance) -> Result<Vec<(f64, CMat)>> {
    Ok(spectral_clusters(m, tol)?
        .into_iter()
        .map(|cl| (cl.center, cl.projection()))
        .collect())
}

/// Nearest orthogonal projection to a Hermitian `t`: eigenvalues at or
/// above one half snap to 1, the rest to 0.
pub fn round_to_projection(t: &CMat, tol: &Tolerance) -> Result<CMat> {
    let eig = herm_eig(t, tol)?;
    let k = eig.values.iter().filter(|&&v| v >= 0.5).count();
    let q = eig.columns(0, k);
    Ok(&q * q.adjoint())
}

/// Moore-Penrose pseudo-inverse of `m` computed from the Hermitian Gram
/// `m m*`: returns `(m*(m m*)^+, rank)`.
pub fn right_pseudo_inverse(m: &CMat, tol: &Tolerance) -> Result<(CMat, usize)> {
    let gram = m * m.adjoint();
    let eig = herm_eig(&gram, tol)?;
    let rank = eig.rank(tol);
    let q = eig.columns(0, rank);
    let inv = CMat::from_fn(rank, rank, |i, j| {
        if i == j {
            c(1.0 / eig.values[i], 0.0)
        } else {
            ZERO
        }
    });
    Ok((m.adjoint() * &q * inv * q.adjoint(), rank))
}

/// Numerical rank of the column span of `m`, via the Gram `m m*`.
pub fn span_rank(m: &CMat, tol: &Tolerance) -> Result<usize> {
    let gram = m * m.adjoint();
    Ok(herm_eig(&gram, tol)?.rank(tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let e = herm_eig(&eye(2), &tol()).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        assert!(dist(&(e.vectors.adjoint() * &e.vectors), &eye(2)) < 1e-12);

        let e = herm_eig(&diag(&[1.0, 3.0]), &tol()).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        // columns are the swapped coordinate axes up to phase
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((e.vectors[(0, 1)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_two_by_two_closed_form() {
        // trace 1, determinant 1/8
        let m = real_mat(2, 2, &[0.75, 0.25, 0.25, 0.25]);
        let e = herm_eig(&m, &tol()).unwrap();
        let s = 0.5f64.sqrt();
        assert!((e.values[0] - (1.0 + s) / 2.0).abs() < 1e-14);
        assert!((e.values[1] - (1.0 - s) / 2.0).abs() < 1e-14);
        assert!((e.values[0] - 0.85355).abs() < 1e-5);
        let lam = diag(&e.values);
        let back = &e.vectors * lam * e.vectors.adjoint();
        assert!(dist(&back, &m) < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = real_mat(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(herm_eig(&m, &tol()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn cone_order_examples() {
        let t = tol();
        assert!(psd_cone_order(&CMat::zeros(2, 2), &eye(2), &t).unwrap());
        assert!(psd_cone_order(&eye(2), &eye(2), &t).unwrap());
        assert!(!psd_cone_order(&diag(&[2.0, 0.0]), &eye(2), &t).unwrap());
        assert!(matches!(
            psd_cone_order(&eye(2), &eye(3), &t),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn null_space_examples() {
        let t = tol();
        assert_eq!(null_space(&CMat::zeros(2, 2), &t).unwrap().ncols(), 2);
        assert_eq!(null_space(&eye(2), &t).unwrap().ncols(), 0);
        let ones = real_mat(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let ns = null_space(&ones, &t).unwrap();
        assert_eq!(ns.ncols(), 1);
        let v = ns.column(0);
        assert!((v[0] + v[1]).norm() < 1e-12);
        assert!((v[0].norm() - 0.5f64.sqrt()).abs() < 1e-12);
        // wide matrix
        let wide = real_mat(1, 3, &[1.0, 0.0, 0.0]);
        assert_eq!(null_space(&wide, &t).unwrap().ncols(), 2);
    }

    #[test]
    fn spectral_projection_examples() {
        let t = tol();
        let p = spectral_projections(&eye(3), &t).unwrap();
        assert_eq!(p.len(), 1);
        assert!(dist(&p[0].1, &eye(3)) < 1e-12);

        let p = spectral_projections(&diag(&[1.0, 1.0, 2.0]), &t).unwrap();
        assert_eq!(p.len(), 2);
        assert!((p[0].0 - 1.0).abs() < 1e-12 && (p[1].0 - 2.0).abs() < 1e-12);
        assert!(dist(&p[0].1, &diag(&[1.0, 1.0, 0.0])) < 1e-12);
        assert!(dist(&p[1].1, &diag(&[0.0, 0.0, 1.0])) < 1e-12);

        let p = spectral_projections(&diag(&[0.0, 1e-12]), &t).unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn rounding_and_pseudo_inverse() {
        let t = tol();
        let p = round_to_projection(&diag(&[0.9, 0.2, 0.6]), &t).unwrap();
        assert!(dist(&p, &diag(&[1.0, 0.0, 1.0])) < 1e-12);

        let m = real_mat(2, 3, &[1.0, 0.0, 1.0, 0.0, 2.0, 0.0]);
        let (pinv, rank) = right_pseudo_inverse(&m, &t).unwrap();
        assert_eq!(rank, 2);
        assert!(dist(&(&m * pinv), &eye(2)) < 1e-12);
    }

    #[test]
    fn block_helpers() {
        let b = block_diag(&[eye(1), diag(&[2.0, 3.0])]);
        assert!(dist(&b, &diag(&[1.0, 2.0, 3.0])) < 1e-15);
        let s = vstack(&[eye(2), eye(2)]);
        assert_eq!(s.shape(), (4, 2));
    }
}
