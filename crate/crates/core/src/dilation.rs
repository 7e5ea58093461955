//! CP maps on a concrete *-algebra and their minimal Stinespring dilations.
//!
//! A dilation is built by factoring the Gram form of the map on `A (x) C^n`:
//! the vectors `rho(b_j) V e_t` have Gram matrix with `(i, j)` block
//! `phi(b_i* b_j)`, and the support of that matrix is the dilation space.
//! This works for arbitrary *-subalgebras, not just full matrix algebras.

use std::sync::Arc;

use crate::algebra::StarAlgebra;
use crate::error::{Error, Result};
use crate::numkernel::{
    block_diag, c, dist, eye, herm_eig, is_finite, op_norm, right_pseudo_inverse, span_rank,
    vstack, CMat, Tolerance, C64, ZERO,
};

/// A linear map `A -> M_n` given by its images on the algebra basis.
///
/// Used for UCP maps as well as the sub-unital CP pieces that appear in
/// Radon-Nikodym computations.
#[derive(Debug, Clone)]
pub struct CpMap {
    algebra: Arc<StarAlgebra>,
    out_dim: usize,
    images: Vec<CMat>,
}

impl CpMap {
    pub fn new(algebra: Arc<StarAlgebra>, out_dim: usize, images: Vec<CMat>) -> Result<Self> {
        if images.len() != algebra.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} images for an algebra of dimension {}",
                images.len(),
                algebra.dim()
            )));
        }
        for m in &images {
            if m.shape() != (out_dim, out_dim) {
                return Err(Error::ShapeMismatch(format!(
                    "image {:?}, expected {out_dim}x{out_dim}",
                    m.shape()
                )));
            }
            if !is_finite(m) {
                return Err(Error::NonFinite("map image".into()));
            }
        }
        Ok(Self { algebra, out_dim, images })
    }

    /// Map defined by evaluating `f` on each basis element.
    pub fn from_fn(algebra: Arc<StarAlgebra>, out_dim: usize, f: impl Fn(&CMat) -> CMat) -> Self {
        let images = algebra.basis().iter().map(f).collect();
        Self { algebra, out_dim, images }
    }

    /// `a -> sum_l K_l* a K_l` for `d x n` Kraus operators `K_l`.
    pub fn from_kraus(algebra: Arc<StarAlgebra>, kraus: &[CMat]) -> Result<Self> {
        let d = algebra.ambient_dim();
        let n = kraus
            .first()
            .map(|k| k.ncols())
            .ok_or_else(|| Error::BadParameters("empty Kraus family".into()))?;
        for k in kraus {
            if k.shape() != (d, n) {
                return Err(Error::ShapeMismatch(format!(
                    "Kraus operator {:?}, expected {d}x{n}",
                    k.shape()
                )));
            }
        }
        Ok(Self::from_fn(algebra, n, |a| {
            kraus.iter().fold(CMat::zeros(n, n), |acc, k| acc + k.adjoint() * a * k)
        }))
    }

    /// The inclusion `A -> M_d`.
    pub fn identity(algebra: Arc<StarAlgebra>) -> Self {
        let d = algebra.ambient_dim();
        Self::from_fn(algebra, d, |a| a.clone())
    }

    pub fn algebra(&self) -> &Arc<StarAlgebra> {
        &self.algebra
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn images(&self) -> &[CMat] {
        &self.images
    }

    pub fn apply_coords(&self, coords: &[C64]) -> CMat {
        let mut out = CMat::zeros(self.out_dim, self.out_dim);
        for (cf, img) in coords.iter().zip(&self.images) {
            if *cf != ZERO {
                out += img * *cf;
            }
        }
        out
    }

    /// Value on an arbitrary matrix, through its projection onto the algebra.
    pub fn apply(&self, x: &CMat) -> CMat {
        self.apply_coords(&self.algebra.coords(x))
    }

    pub fn unit_image(&self) -> CMat {
        self.apply_coords(self.algebra.unit_coords())
    }

    /// `||phi(1) - I||`.
    pub fn unital_residual(&self) -> f64 {
        dist(&self.unit_image(), &eye(self.out_dim))
    }

    /// `max_i ||phi(b_i*) - phi(b_i)*||`.
    pub fn star_residual(&self) -> f64 {
        (0..self.images.len())
            .map(|i| dist(&self.apply_coords(self.algebra.adj(i)), &self.images[i].adjoint()))
            .fold(0.0, f64::max)
    }

    pub fn is_unital(&self, tol: &Tolerance) -> bool {
        self.unital_residual() <= tol.atol
    }

    pub fn scaled(&self, s: f64) -> Self {
        let images = self.images.iter().map(|m| m * c(s, 0.0)).collect();
        Self { algebra: self.algebra.clone(), out_dim: self.out_dim, images }
    }

    pub fn ensure_compatible(&self, other: &CpMap) -> Result<()> {
        if !self.algebra.same_as(&other.algebra) || self.out_dim != other.out_dim {
            return Err(Error::ShapeMismatch(format!(
                "maps on different algebras or output dimensions ({} vs {})",
                self.out_dim, other.out_dim
            )));
        }
        Ok(())
    }

    pub fn plus(&self, other: &CpMap) -> Result<Self> {
        self.ensure_compatible(other)?;
        let images = self.images.iter().zip(&other.images).map(|(a, b)| a + b).collect();
        Ok(Self { algebra: self.algebra.clone(), out_dim: self.out_dim, images })
    }

    /// `sum_i w_i phi_i`; all maps must be compatible.
    pub fn combination(terms: &[(f64, &CpMap)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::BadParameters("empty combination".into()))?;
        let mut images = vec![CMat::zeros(first.out_dim, first.out_dim); first.images.len()];
        for (w, m) in terms {
            first.ensure_compatible(m)?;
            for (acc, img) in images.iter_mut().zip(&m.images) {
                *acc += img * c(*w, 0.0);
            }
        }
        Ok(Self { algebra: first.algebra.clone(), out_dim: first.out_dim, images })
    }

    /// Max over basis elements of the operator-norm difference of images.
    pub fn distance(&self, other: &CpMap) -> f64 {
        self.images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| dist(a, b))
            .fold(0.0, f64::max)
    }
}

/// The Gram matrix of the CP form: block `(i, j)` is `phi(b_i* b_j)`, so
/// that `w* G w = ||sum_(j,t) w_(j,t) rho(b_j) V e_t||^2`.
pub fn cp_gram(phi: &CpMap, tol: &Tolerance) -> Result<CMat> {
    let alg = phi.algebra();
    let (k, n) = (alg.dim(), phi.out_dim());
    let mut g = CMat::zeros(k * n, k * n);
    for i in 0..k {
        for j in 0..k {
            let block = phi.apply_coords(&alg.star_mult(i, j));
            g.view_mut((i * n, j * n), (n, n)).copy_from(&block);
        }
    }
    let res = op_norm(&(&g - g.adjoint()));
    if res > tol.atol * op_norm(&g).max(1.0) {
        return Err(Error::NotHermitian(res));
    }
    Ok(crate::numkernel::hermitian_part(&g))
}

/// Outcome of a complete-positivity test.
#[derive(Debug, Clone, Copy)]
pub struct CpVerdict {
    pub completely_positive: bool,
    pub min_eigenvalue: f64,
    pub gram_norm: f64,
}

pub fn is_completely_positive(phi: &CpMap, tol: &Tolerance) -> Result<CpVerdict> {
    let g = cp_gram(phi, tol)?;
    let eig = herm_eig(&g, tol)?;
    let gram_norm = eig.max().abs().max(eig.min().abs());
    Ok(CpVerdict {
        completely_positive: eig.min() >= -tol.atol * (1.0 + gram_norm),
        min_eigenvalue: eig.min(),
        gram_norm,
    })
}

/// A Stinespring dilation `phi(a) = V* rho(a) V` with `V: C^n -> C^r`.
#[derive(Debug, Clone)]
pub struct StinespringTriple {
    source: CpMap,
    v: CMat,
    rho_images: Vec<CMat>,
    /// `r x kn`: column `(j, t)` is `rho(b_j) V e_t`.
    coord: CMat,
    /// Right inverse of `coord` (its pseudo-inverse).
    coord_pinv: CMat,
    minimal: bool,
}

fn spanning_matrix(v: &CMat, rho: &[CMat]) -> CMat {
    let (r, n) = v.shape();
    let mut out = CMat::zeros(r, rho.len() * n);
    for (j, rj) in rho.iter().enumerate() {
        out.view_mut((0, j * n), (r, n)).copy_from(&(rj * v));
    }
    out
}

impl StinespringTriple {
    /// Assembles a triple from explicit `V` and `rho` images. Minimality is
    /// detected, not required; nothing else is checked here (see
    /// [`verify_dilation`]).
    pub fn from_parts(
        source: CpMap,
        v: CMat,
        rho_images: Vec<CMat>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let r = v.nrows();
        if v.ncols() != source.out_dim() {
            return Err(Error::ShapeMismatch(format!(
                "V is {:?}, map output dimension {}",
                v.shape(),
                source.out_dim()
            )));
        }
        if rho_images.len() != source.algebra().dim()
            || rho_images.iter().any(|m| m.shape() != (r, r))
        {
            return Err(Error::ShapeMismatch("rho images do not match V".into()));
        }
        let coord = spanning_matrix(&v, &rho_images);
        let (coord_pinv, rank) = right_pseudo_inverse(&coord, tol)?;
        Ok(Self { source, v, rho_images, coord, coord_pinv, minimal: rank == r })
    }

    /// Direct sum of dilations with weights: `V = (+) sqrt(w_i) V_i`,
    /// `rho = (+) rho_i`, dilating `sum_i w_i phi_i`. The result is minimal
    /// only when the summands are mutually orthogonal.
    pub fn direct_sum(parts: &[&StinespringTriple], weights: &[f64], tol: &Tolerance) -> Result<Self> {
        if parts.is_empty() || parts.len() != weights.len() {
            return Err(Error::BadParameters("direct sum needs one weight per part".into()));
        }
        let terms: Vec<(f64, &CpMap)> = weights.iter().copied().zip(parts.iter().map(|p| &p.source)).collect();
        let source = CpMap::combination(&terms)?;
        let vs: Vec<CMat> = parts
            .iter()
            .zip(weights)
            .map(|(p, w)| &p.v * c(w.sqrt(), 0.0))
            .collect();
        let k = source.algebra().dim();
        let rho = (0..k)
            .map(|l| {
                let blocks: Vec<CMat> = parts.iter().map(|p| p.rho_images[l].clone()).collect();
                block_diag(&blocks)
            })
            .collect();
        Self::from_parts(source, vstack(&vs), rho, tol)
    }

    pub fn source(&self) -> &CpMap {
        &self.source
    }

    pub fn algebra(&self) -> &Arc<StarAlgebra> {
        self.source.algebra()
    }

    /// Dimension `r` of the dilation space.
    pub fn dil_dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn v(&self) -> &CMat {
        &self.v
    }

    pub fn rho_images(&self) -> &[CMat] {
        &self.rho_images
    }

    pub fn coordinate_factor(&self) -> &CMat {
        &self.coord
    }

    pub fn coordinate_pinv(&self) -> &CMat {
        &self.coord_pinv
    }

    pub fn is_minimal(&self) -> bool {
        self.minimal
    }

    /// `rho(x)` for an arbitrary algebra element.
    pub fn rho(&self, x: &CMat) -> CMat {
        let r = self.dil_dim();
        let mut out = CMat::zeros(r, r);
        for (cf, m) in self.algebra().coords(x).iter().zip(&self.rho_images) {
            if *cf != ZERO {
                out += m * *cf;
            }
        }
        out
    }

    /// `V* T rho(b_i) V` on every basis element.
    pub fn compress(&self, t: &CMat) -> Vec<CMat> {
        let vt = self.v.adjoint() * t;
        self.rho_images.iter().map(|r| &vt * r * &self.v).collect()
    }

    /// Max commutator norm of `t` against every `rho(b_i)`.
    pub fn commutant_residual(&self, t: &CMat) -> f64 {
        self.rho_images
            .iter()
            .map(|r| op_norm(&(r * t - t * r)))
            .fold(0.0, f64::max)
    }
}

/// Minimal Stinespring dilation of a UCP map from its Gram factorization.
pub fn minimal_stinespring(phi: &CpMap, tol: &Tolerance) -> Result<StinespringTriple> {
    let unital = phi.unital_residual();
    if unital > tol.atol {
        return Err(Error::NotUnital(unital));
    }
    minimal_cp_dilation(phi, tol)
}

/// Same construction without the unitality requirement; `V* V = phi(1)`.
pub fn minimal_cp_dilation(phi: &CpMap, tol: &Tolerance) -> Result<StinespringTriple> {
    let alg = phi.algebra().clone();
    let (k, n) = (alg.dim(), phi.out_dim());
    let gram = cp_gram(phi, tol)?;
    let eig = herm_eig(&gram, tol)?;
    let gram_norm = eig.max().abs().max(eig.min().abs());
    if eig.min() < -tol.atol * (1.0 + gram_norm) {
        return Err(Error::NotCp(eig.min()));
    }
    let r = eig.rank(tol);
    let q = eig.columns(0, r);
    let sqrt: Vec<f64> = eig.values[..r].iter().map(|v| v.sqrt()).collect();
    let coord = CMat::from_fn(r, k * n, |a, b| q[(b, a)].conj() * sqrt[a]);
    let coord_pinv = CMat::from_fn(k * n, r, |a, b| q[(a, b)] / sqrt[b]);

    let eye_n = eye(n);
    let rho_images: Vec<CMat> = (0..k)
        .map(|i| {
            // left multiplication by b_i on A (x) C^n coordinates
            let left = CMat::from_fn(k, k, |l, j| alg.mult(i, j)[l]);
            &coord * left.kronecker(&eye_n) * &coord_pinv
        })
        .collect();
    let unit = CMat::from_column_slice(k, 1, alg.unit_coords());
    let v = &coord * unit.kronecker(&eye_n);

    let hom = homomorphism_residual(&alg, &rho_images);
    if hom > 10.0 * tol.atol {
        return Err(Error::HomomorphismResidual(hom));
    }
    Ok(StinespringTriple { source: phi.clone(), v, rho_images, coord, coord_pinv, minimal: true })
}

fn expand(alg: &StarAlgebra, coords: &[C64], images: &[CMat]) -> CMat {
    let r = images[0].nrows();
    let mut out = CMat::zeros(r, r);
    for (cf, m) in coords.iter().zip(images) {
        if *cf != ZERO {
            out += m * *cf;
        }
    }
    debug_assert_eq!(coords.len(), alg.dim());
    out
}

fn homomorphism_residual(alg: &StarAlgebra, rho: &[CMat]) -> f64 {
    let k = alg.dim();
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let lhs = &rho[i] * &rho[j];
            worst = worst.max(dist(&lhs, &expand(alg, alg.mult(i, j), rho)));
        }
    }
    worst
}

/// Choi matrix `sum_ij E_ij (x) phi(E_ij)` of a map on the full algebra `M_d`.
pub fn choi_matrix(phi: &CpMap) -> Result<CMat> {
    let alg = phi.algebra();
    if !alg.is_full() {
        return Err(Error::NotFullAlgebra);
    }
    let (d, n) = (alg.ambient_dim(), phi.out_dim());
    let mut out = CMat::zeros(d * n, d * n);
    for i in 0..d {
        for j in 0..d {
            let img = phi.apply(&crate::numkernel::matrix_unit(d, i, j));
            out.view_mut((i * n, j * n), (n, n)).copy_from(&img);
        }
    }
    Ok(out)
}

/// Named residuals pinning a dilation.
#[derive(Debug, Clone)]
pub struct DilationReport {
    pub dil_dim: usize,
    /// `||V* V - I||`.
    pub isometry: f64,
    /// `max_i ||V* rho(b_i) V - phi(b_i)||`.
    pub reproduction: f64,
    /// `max_ij ||rho(b_i) rho(b_j) - rho(b_i b_j)||`.
    pub homomorphism: f64,
    /// `max_i ||rho(b_i)* - rho(b_i*)||`.
    pub adjoint: f64,
    /// `||rho(1) - I||`.
    pub unit: f64,
    /// Numerical rank of `{rho(b_i) V e_j}`.
    pub spanning_rank: usize,
    pub passes: bool,
}

impl DilationReport {
    pub fn minimality_deficit(&self) -> usize {
        self.dil_dim - self.spanning_rank.min(self.dil_dim)
    }

    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("isometry", self.isometry),
            ("reproduction", self.reproduction),
            ("homomorphism", self.homomorphism),
            ("adjoint", self.adjoint),
            ("unit", self.unit),
            ("minimality_deficit", self.minimality_deficit() as f64),
        ]
    }
}

pub fn verify_dilation(triple: &StinespringTriple, tol: &Tolerance) -> DilationReport {
    let alg = triple.algebra().clone();
    let rho = triple.rho_images();
    let r = triple.dil_dim();
    let n = triple.source().out_dim();
    let v = triple.v();
    let isometry = dist(&(v.adjoint() * v), &eye(n));
    let reproduction = triple
        .compress(&eye(r))
        .iter()
        .zip(triple.source().images())
        .map(|(a, b)| dist(a, b))
        .fold(0.0, f64::max);
    let homomorphism = homomorphism_residual(&alg, rho);
    let adjoint = (0..alg.dim())
        .map(|i| dist(&rho[i].adjoint(), &expand(&alg, alg.adj(i), rho)))
        .fold(0.0, f64::max);
    let unit = dist(&expand(&alg, alg.unit_coords(), rho), &eye(r));
    let spanning_rank = span_rank(&spanning_matrix(v, rho), tol).unwrap_or(0);
    let bound = 10.0 * tol.atol;
    let passes = [isometry, reproduction, homomorphism, adjoint, unit]
        .iter()
        .all(|&x| x <= bound)
        && spanning_rank == r;
    DilationReport { dil_dim: r, isometry, reproduction, homomorphism, adjoint, unit, spanning_rank, passes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{diag, real_mat};

    fn m2() -> Arc<StarAlgebra> {
        Arc::new(StarAlgebra::full(2))
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn half_trace(alg: Arc<StarAlgebra>) -> CpMap {
        CpMap::from_fn(alg, 1, |a| CMat::from_element(1, 1, crate::numkernel::trace(a) * 0.5))
    }

    fn depolarizing(alg: Arc<StarAlgebra>) -> CpMap {
        CpMap::from_fn(alg, 2, |a| eye(2) * (crate::numkernel::trace(a) * 0.5))
    }

    fn transpose(alg: Arc<StarAlgebra>) -> CpMap {
        CpMap::from_fn(alg, 2, |a| a.transpose())
    }

    fn rank(m: &CMat) -> usize {
        herm_eig(m, &tol()).unwrap().rank(&tol())
    }

    #[test]
    fn gram_ranks() {
        let t = tol();
        assert_eq!(rank(&cp_gram(&CpMap::identity(m2()), &t).unwrap()), 2);
        let g = cp_gram(&half_trace(m2()), &t).unwrap();
        assert_eq!(g.shape(), (4, 4));
        assert_eq!(rank(&g), 4);
        // Hilbert-Schmidt Gram of sqrt2 E_ij under tr/2 is the identity
        assert!(dist(&g, &eye(4)) < 1e-12);
        let e = herm_eig(&cp_gram(&transpose(m2()), &t).unwrap(), &t).unwrap();
        assert!(e.min() <= -t.atol);
    }

    #[test]
    fn cp_checks() {
        let t = tol();
        assert!(is_completely_positive(&CpMap::identity(m2()), &t).unwrap().completely_positive);
        assert!(is_completely_positive(&depolarizing(m2()), &t).unwrap().completely_positive);
        assert!(!is_completely_positive(&transpose(m2()), &t).unwrap().completely_positive);
    }

    #[test]
    fn dilation_of_identity_is_itself() {
        let t = tol();
        let tr = minimal_stinespring(&CpMap::identity(m2()), &t).unwrap();
        assert_eq!(tr.dil_dim(), 2);
        assert!(dist(&(tr.v() * tr.v().adjoint()), &eye(2)) < 1e-10);
        assert!(verify_dilation(&tr, &t).passes);
    }

    #[test]
    fn dilation_dimensions() {
        let t = tol();
        assert_eq!(minimal_stinespring(&depolarizing(m2()), &t).unwrap().dil_dim(), 8);
        let gns = minimal_stinespring(&half_trace(m2()), &t).unwrap();
        assert_eq!(gns.dil_dim(), 4);
        assert!(verify_dilation(&gns, &t).passes);
        assert_eq!(crate::algebra::commutant(gns.rho_images(), 4, &t).unwrap().len(), 4);
    }

    #[test]
    fn dilation_rejects_bad_maps() {
        let t = tol();
        assert!(matches!(minimal_stinespring(&transpose(m2()), &t), Err(Error::NotCp(_))));
        let sub = CpMap::identity(m2()).scaled(0.5);
        assert!(matches!(minimal_stinespring(&sub, &t), Err(Error::NotUnital(_))));
    }

    #[test]
    fn choi_examples() {
        let id = choi_matrix(&CpMap::identity(m2())).unwrap();
        // sum_ij E_ij (x) E_ij = 2 |Omega><Omega| with Omega = (e00 + e11)/sqrt2
        let omega = [c(0.5f64.sqrt(), 0.0), ZERO, ZERO, c(0.5f64.sqrt(), 0.0)];
        assert!(dist(&id, &(crate::numkernel::projector(&omega) * c(2.0, 0.0))) < 1e-12);
        let dep = choi_matrix(&depolarizing(m2())).unwrap();
        assert!(dist(&dep, &(eye(4) * c(0.5, 0.0))) < 1e-12);
        let swap = choi_matrix(&transpose(m2())).unwrap();
        let e = herm_eig(&swap, &tol()).unwrap();
        assert!((e.min() + 1.0).abs() < 1e-12);
        let sub = Arc::new(crate::algebra::close_star_algebra(2, &[diag(&[1.0, 0.0])], &tol()).unwrap());
        assert!(matches!(choi_matrix(&CpMap::identity(sub)), Err(Error::NotFullAlgebra)));
    }

    #[test]
    fn verify_detects_tampering() {
        let t = tol();
        let tr = minimal_stinespring(&half_trace(m2()), &t).unwrap();
        let scaled = StinespringTriple {
            v: tr.v() * c(2.0, 0.0),
            ..tr.clone()
        };
        let rep = verify_dilation(&scaled, &t);
        assert!((rep.isometry - 3.0).abs() < 1e-10);
        assert!(!rep.passes);

        let mut rho = tr.rho_images().to_vec();
        rho[0] = CMat::zeros(4, 4);
        let zeroed = StinespringTriple { rho_images: rho, ..tr.clone() };
        let rep = verify_dilation(&zeroed, &t);
        assert!(rep.reproduction >= op_norm(&tr.source().images()[0]) - 1e-12);
    }

    #[test]
    fn subunital_gram_reproduces_unit_image() {
        // phi(a) = K* a K with K* K = diag(1, 1/2)
        let t = tol();
        let k = real_mat(2, 2, &[1.0, 0.0, 0.0, 0.5f64.sqrt()]);
        let phi = CpMap::from_kraus(m2(), &[k]).unwrap();
        assert!(is_completely_positive(&phi, &t).unwrap().completely_positive);
        assert!(dist(&phi.unit_image(), &diag(&[1.0, 0.5])) < 1e-12);
        assert!(matches!(minimal_stinespring(&phi, &t), Err(Error::NotUnital(_))));
        let tr = minimal_cp_dilation(&phi, &t).unwrap();
        assert!(dist(&(tr.v().adjoint() * tr.v()), &diag(&[1.0, 0.5])) <= 10.0 * t.atol);
        assert_eq!(tr.dil_dim(), 2);
    }
}
