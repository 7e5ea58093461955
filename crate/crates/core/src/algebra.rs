//! Concrete finite-dimensional *-algebras inside `d x d` matrices, their
//! commutants, and minimal projections of commuting Hermitian families.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numkernel::{
    c, commutator, dist, ensure_square, eye, herm_eig, hermitian_residual, is_finite, null_space,
    op_norm, spectral_clusters, trace, CMat, Tolerance, C64, ONE, ZERO,
};

/// Normalized trace inner product `<x, y> = tr(y* x) / d`.
pub fn trace_inner(x: &CMat, y: &CMat) -> C64 {
    let d = x.nrows() as f64;
    x.iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum::<C64>() / d
}

/// A unital *-subalgebra of `M_d`, with an orthonormal basis under the
/// normalized trace and its structure constants.
#[derive(Debug, Clone)]
pub struct StarAlgebra {
    ambient_dim: usize,
    basis: Vec<CMat>,
    /// `mult[(i * k + j) * k + l]`: coefficient of `b_l` in `b_i b_j`.
    mult: Vec<C64>,
    /// `adj[i * k + l]`: coefficient of `b_l` in `b_i*`.
    adj: Vec<C64>,
    unit: Vec<C64>,
}

impl StarAlgebra {
    /// The full matrix algebra `M_d` with basis `sqrt(d) E_ij` in row-major order.
    pub fn full(d: usize) -> Self {
        assert!(d > 0, "ambient dimension must be positive");
        let s = (d as f64).sqrt();
        let basis = (0..d * d)
            .map(|idx| {
                let mut m = CMat::zeros(d, d);
                m[(idx / d, idx % d)] = c(s, 0.0);
                m
            })
            .collect();
        Self::from_orthonormal_basis(d, basis, &Tolerance::default())
            .expect("matrix units form a closed basis")
    }

    /// Builds the structure tables for a basis that is already orthonormal
    /// and closed under products and adjoints.
    pub fn from_orthonormal_basis(d: usize, basis: Vec<CMat>, tol: &Tolerance) -> Result<Self> {
        let k = basis.len();
        for b in &basis {
            if b.shape() != (d, d) {
                return Err(Error::ShapeMismatch(format!(
                    "basis element {:?}, ambient {d}",
                    b.shape()
                )));
            }
            if !is_finite(b) {
                return Err(Error::NonFinite("algebra basis".into()));
            }
        }
        for i in 0..k {
            for j in 0..k {
                let g = trace_inner(&basis[i], &basis[j]);
                let want = if i == j { ONE } else { ZERO };
                if (g - want).norm() > tol.atol {
                    return Err(Error::StructureResidual((g - want).norm()));
                }
            }
        }
        let coords = |x: &CMat| -> Vec<C64> { basis.iter().map(|b| trace_inner(x, b)).collect() };
        let rebuild = |cs: &[C64]| -> CMat {
            let mut m = CMat::zeros(d, d);
            for (cf, b) in cs.iter().zip(&basis) {
                m += b * *cf;
            }
            m
        };
        let check = |x: &CMat, cs: &[C64]| -> Result<()> {
            let res = dist(x, &rebuild(cs));
            if res > tol.atol * (1.0 + op_norm(x)) {
                Err(Error::StructureResidual(res))
            } else {
                Ok(())
            }
        };

        let mut mult = Vec::with_capacity(k * k * k);
        for bi in &basis {
            for bj in &basis {
                let p = bi * bj;
                let cs = coords(&p);
                check(&p, &cs)?;
                mult.extend(cs);
            }
        }
        let mut adj = Vec::with_capacity(k * k);
        for bi in &basis {
            let a = bi.adjoint();
            let cs = coords(&a);
            check(&a, &cs)?;
            adj.extend(cs);
        }
        let id = eye(d);
        let unit = coords(&id);
        check(&id, &unit)?;
        Ok(Self { ambient_dim: d, basis, mult, adj, unit })
    }

    /// `M_n(A)` realized inside `M_{n d}` with basis `sqrt(n) E_st (x) b_i`,
    /// indexed `(s * n + t) * k + i`.
    pub fn matrix_amplification(&self, n: usize, tol: &Tolerance) -> Result<Self> {
        let s = (n as f64).sqrt();
        let mut basis = Vec::with_capacity(n * n * self.dim());
        for st in 0..n * n {
            let mut e = CMat::zeros(n, n);
            e[(st / n, st % n)] = c(s, 0.0);
            for b in &self.basis {
                basis.push(e.kronecker(b));
            }
        }
        Self::from_orthonormal_basis(n * self.ambient_dim, basis, tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension of the algebra (number of basis elements).
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim * self.ambient_dim
    }

    /// Coordinates of `b_i b_j`.
    pub fn mult(&self, i: usize, j: usize) -> &[C64] {
        let k = self.dim();
        &self.mult[(i * k + j) * k..(i * k + j + 1) * k]
    }

    /// Coordinates of `b_i*`.
    pub fn adj(&self, i: usize) -> &[C64] {
        let k = self.dim();
        &self.adj[i * k..(i + 1) * k]
    }

    /// Coordinates of the identity matrix.
    pub fn unit_coords(&self) -> &[C64] {
        &self.unit
    }

    /// Coordinates of `b_i* b_j`, expanded through the adjoint and
    /// multiplication tables.
    pub fn star_mult(&self, i: usize, j: usize) -> Vec<C64> {
        let k = self.dim();
        let mut out = vec![ZERO; k];
        for (p, &a) in self.adj(i).iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(self.mult(p, j)) {
                *o += a * m;
            }
        }
        out
    }

    /// Orthogonal projection coordinates of an arbitrary `d x d` matrix.
    pub fn coords(&self, x: &CMat) -> Vec<C64> {
        self.basis.iter().map(|b| trace_inner(x, b)).collect()
    }

    pub fn from_coords(&self, cs: &[C64]) -> CMat {
        let d = self.ambient_dim;
        let mut m = CMat::zeros(d, d);
        for (cf, b) in cs.iter().zip(&self.basis) {
            if *cf != ZERO {
                m += b * *cf;
            }
        }
        m
    }

    /// Distance from `x` to the algebra, in operator norm.
    pub fn distance(&self, x: &CMat) -> f64 {
        dist(x, &self.from_coords(&self.coords(x)))
    }

    pub fn same_as(&self, other: &StarAlgebra) -> bool {
        std::ptr::eq(self, other)
            || (self.ambient_dim == other.ambient_dim
                && self.dim() == other.dim()
                && self.basis.iter().zip(&other.basis).all(|(a, b)| a == b))
    }
}

/// Appends `x` to an orthonormal list if it adds a new direction.
/// Two passes of modified Gram-Schmidt under the normalized trace.
fn extend_orthonormal(basis: &mut Vec<CMat>, x: &CMat, tol: &Tolerance) -> bool {
    let scale = trace_inner(x, x).re.sqrt();
    if scale == 0.0 {
        return false;
    }
    let mut v = x.unscale(scale);
    for _ in 0..2 {
        for b in basis.iter() {
            let p = trace_inner(&v, b);
            v -= b * p;
        }
    }
    let n = trace_inner(&v, &v).re.sqrt();
    if n <= tol.atol {
        return false;
    }
    basis.push(v.unscale(n));
    true
}

/// Smallest unital *-subalgebra of `M_d` containing `generators`.
pub fn close_star_algebra(d: usize, generators: &[CMat], tol: &Tolerance) -> Result<StarAlgebra> {
    if d == 0 {
        return Err(Error::BadParameters("ambient dimension must be positive".into()));
    }
    for g in generators {
        if g.shape() != (d, d) {
            return Err(Error::ShapeMismatch(format!("generator {:?}, ambient {d}", g.shape())));
        }
        if !is_finite(g) {
            return Err(Error::NonFinite("generator".into()));
        }
    }
    let cap = d * d;
    let mut basis = Vec::new();
    extend_orthonormal(&mut basis, &eye(d), tol);
    for g in generators {
        extend_orthonormal(&mut basis, g, tol);
        extend_orthonormal(&mut basis, &g.adjoint(), tol);
    }
    loop {
        let before = basis.len();
        let snapshot = basis.clone();
        for a in &snapshot {
            for b in &snapshot {
                extend_orthonormal(&mut basis, &(a * b), tol);
                if basis.len() > cap {
                    return Err(Error::DimensionOverflow(cap));
                }
            }
        }
        if basis.len() == before {
            break;
        }
    }
    StarAlgebra::from_orthonormal_basis(d, basis, tol)
}

/// Orthonormal basis (normalized trace) of `{T : S_i T = T S_i for all i}`.
///
/// The kernel of `T -> S_i T - T S_i` is intersected one operator at a
/// time, restricting each new commutation map to the kernel found so far.
pub fn commutant(operators: &[CMat], dim: usize, tol: &Tolerance) -> Result<Vec<CMat>> {
    for s in operators {
        if s.shape() != (dim, dim) {
            return Err(Error::ShapeMismatch(format!("operator {:?}, expected {dim}", s.shape())));
        }
    }
    let r = dim;
    let n2 = r * r;
    let mut kernel = CMat::identity(n2, n2);
    for s in operators {
        if kernel.ncols() <= 1 {
            break;
        }
        let scalar = s[(0, 0)];
        if dist(s, &(eye(r) * scalar)) == 0.0 {
            continue;
        }
        // column-major vec: vec(S T - T S) = (I (x) S - S^T (x) I) vec(T)
        let ad = eye(r).kronecker(s) - s.transpose().kronecker(&eye(r));
        let restricted = ad * &kernel;
        let ns = null_space(&restricted, tol)?;
        kernel = &kernel * ns;
    }
    let scale = (r as f64).sqrt();
    Ok((0..kernel.ncols())
        .map(|k| CMat::from_column_slice(r, r, kernel.column(k).as_slice()) * c(scale, 0.0))
        .collect())
}

/// An abelian algebra given by its minimal projections.
#[derive(Debug, Clone)]
pub struct AbelianSubalgebra {
    pub ambient_dim: usize,
    pub min_projections: Vec<CMat>,
    /// Atom identifiers aligned with `min_projections`.
    pub labels: Vec<usize>,
}

impl AbelianSubalgebra {
    pub fn new(min_projections: Vec<CMat>, tol: &Tolerance) -> Result<Self> {
        let ambient_dim = min_projections
            .first()
            .map(|p| p.nrows())
            .ok_or_else(|| Error::BadParameters("empty projection family".into()))?;
        let labels = (0..min_projections.len()).collect();
        let b = Self { ambient_dim, min_projections, labels };
        b.validate(tol)?;
        Ok(b)
    }

    pub fn trivial(dim: usize) -> Self {
        Self { ambient_dim: dim, min_projections: vec![eye(dim)], labels: vec![0] }
    }

    /// Largest violation of the projection-family invariants: idempotency,
    /// self-adjointness, mutual orthogonality, and completeness.
    pub fn residual(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut sum = CMat::zeros(self.ambient_dim, self.ambient_dim);
        for (i, p) in self.min_projections.iter().enumerate() {
            worst = worst.max(hermitian_residual(p)).max(dist(&(p * p), p));
            for q in &self.min_projections[i + 1..] {
                worst = worst.max(op_norm(&(p * q)));
            }
            sum += p;
        }
        worst.max(dist(&sum, &eye(self.ambient_dim)))
    }

    pub fn validate(&self, tol: &Tolerance) -> Result<()> {
        for p in &self.min_projections {
            if p.shape() != (self.ambient_dim, self.ambient_dim) {
                return Err(Error::ShapeMismatch(format!("projection {:?}", p.shape())));
            }
        }
        let res = self.residual();
        if res > tol.atol {
            return Err(Error::InvalidMeasure(format!(
                "projections are not an orthogonal resolution of the identity (residual {res:.3e})"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.min_projections.len()
    }
}

/// Joint spectral projections of a commuting Hermitian family.
///
/// A seeded random real combination of the family is diagonalized first;
/// each eigenspace is then split against every member until all members act
/// as scalars, and eigenspaces with identical joint eigenvalues are merged.
pub fn minimal_projections(
    dim: usize,
    family: &[CMat],
    seed: u64,
    tol: &Tolerance,
) -> Result<AbelianSubalgebra> {
    for s in family {
        if s.shape() != (dim, dim) {
            return Err(Error::ShapeMismatch(format!("operator {:?}, expected {dim}", s.shape())));
        }
        let h = hermitian_residual(s);
        if h > tol.atol * op_norm(s).max(1.0) {
            return Err(Error::NotHermitian(h));
        }
    }
    for (i, a) in family.iter().enumerate() {
        for b in &family[i + 1..] {
            let r = op_norm(&commutator(a, b));
            if r > tol.atol * (op_norm(a) * op_norm(b)).max(1.0) {
                return Err(Error::NotCommuting(r));
            }
        }
    }
    if family.is_empty() {
        return Ok(AbelianSubalgebra::trivial(dim));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut generic = CMat::zeros(dim, dim);
    for s in family {
        let g: f64 = StandardNormal.sample(&mut rng);
        generic += s * c(g, 0.0);
    }
    let mut pending: Vec<CMat> = spectral_clusters(&generic, tol)?
        .into_iter()
        .map(|cl| cl.basis)
        .collect();
    let mut done: Vec<(CMat, Vec<f64>)> = Vec::new();
    while let Some(q) = pending.pop() {
        let m = q.ncols();
        let mut split = false;
        let mut signature = Vec::with_capacity(family.len());
        for s in family {
            let comp = q.adjoint() * s * &q;
            let mean = trace(&comp).re / m as f64;
            if dist(&comp, &(eye(m) * c(mean, 0.0))) > tol.atol * op_norm(s).max(1.0) {
                for cl in spectral_clusters(&comp, tol)? {
                    pending.push(&q * cl.basis);
                }
                split = true;
                break;
            }
            signature.push(mean);
        }
        if !split {
            done.push((q, signature));
        }
    }
    // merge eigenspaces on which every member takes the same value
    let mut merged: Vec<(CMat, Vec<f64>)> = Vec::new();
    for (q, sig) in done {
        let close = |other: &[f64]| {
            sig.iter()
                .zip(other)
                .zip(family)
                .all(|((a, b), s)| (a - b).abs() <= tol.atol * op_norm(s).max(1.0))
        };
        if let Some(slot) = merged.iter_mut().find(|(_, s)| close(s)) {
            let cols = slot.0.ncols() + q.ncols();
            let mut joined = CMat::zeros(dim, cols);
            joined.columns_mut(0, slot.0.ncols()).copy_from(&slot.0);
            joined.columns_mut(slot.0.ncols(), q.ncols()).copy_from(&q);
            slot.0 = joined;
        } else {
            merged.push((q, sig));
        }
    }
    // deterministic order: by joint eigenvalue signature
    merged.sort_by(|a, b| {
        a.1.iter()
            .zip(&b.1)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let min_projections: Vec<CMat> = merged.iter().map(|(q, _)| q * q.adjoint()).collect();
    let labels = (0..min_projections.len()).collect();
    Ok(AbelianSubalgebra { ambient_dim: dim, min_projections, labels })
}

/// Result of a span-membership query.
#[derive(Debug, Clone)]
pub struct Membership {
    pub member: bool,
    /// Operator-norm distance from `x` to the span.
    pub distance: f64,
    /// Least-squares coordinates, present when `member`.
    pub coords: Option<Vec<C64>>,
}

/// Is `x` in the linear span of `basis` (up to `atol (1 + ||x||)`)?
pub fn membership(basis: &[CMat], x: &CMat, tol: &Tolerance) -> Result<Membership> {
    for b in basis {
        if b.shape() != x.shape() {
            return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", b.shape(), x.shape())));
        }
    }
    let len = x.len();
    let m = basis.len();
    let (coords, residual) = if m == 0 {
        (vec![], x.clone())
    } else {
        let stacked = CMat::from_fn(len, m, |r, k| basis[k].as_slice()[r]);
        let rhs = CMat::from_column_slice(len, 1, x.as_slice());
        let svd = nalgebra::SVD::new(stacked, true, true);
        let cutoff = svd.singular_values.max() * 1e-12;
        let sol = svd
            .solve(&rhs, cutoff)
            .map_err(|e| Error::NumericalFailure(e.to_string()))?;
        let coords: Vec<C64> = sol.iter().copied().collect();
        let mut approx = CMat::zeros(x.nrows(), x.ncols());
        for (cf, b) in coords.iter().zip(basis) {
            approx += b * *cf;
        }
        (coords, x - approx)
    };
    let distance = op_norm(&residual);
    let member = distance <= tol.atol * (1.0 + op_norm(x));
    Ok(Membership { member, distance, coords: member.then_some(coords) })
}

/// Largest distance from an element of `inner` to `span(outer)`.
pub fn span_excess(inner: &[CMat], outer: &[CMat], tol: &Tolerance) -> Result<f64> {
    let mut worst = 0.0f64;
    for x in inner {
        worst = worst.max(membership(outer, x, tol)?.distance);
    }
    Ok(worst)
}

/// Dimension of the linear span of a list of matrices.
pub fn span_dim(mats: &[CMat], tol: &Tolerance) -> Result<usize> {
    let Some(first) = mats.first() else { return Ok(0) };
    ensure_square(first)?;
    let len = first.len();
    let stacked = CMat::from_fn(len, mats.len(), |r, k| mats[k].as_slice()[r]);
    let gram = stacked.adjoint() * stacked;
    Ok(herm_eig(&gram, tol)?.rank(tol))
}
