//! Arveson Radon-Nikodym operators: for `theta <= phi` the unique `T` in
//! the commutant of the dilation of `phi` with `0 <= T <= 1` and
//! `theta = V* T rho V`, and the inverse map `T -> phi_T`.

use crate::dilation::{cp_gram, CpMap, StinespringTriple};
use crate::error::{Error, Result};
use crate::numkernel::{dist, herm_eig, hermitian_part, hermitian_residual, op_norm, psd_margin, CMat, Tolerance};

/// A Radon-Nikodym operator together with its audit residuals.
#[derive(Debug, Clone)]
pub struct RnOperator {
    pub t: CMat,
    /// `max_i ||rho(b_i) T - T rho(b_i)||`.
    pub commutant_residual: f64,
    /// How far the spectrum of `T` leaves `[0, 1]`.
    pub interval_residual: f64,
    /// `max_i ||V* T rho(b_i) V - theta(b_i)||`.
    pub reproduction_residual: f64,
    /// Part of the Gram form of `theta` outside the support of the base Gram form.
    pub discarded_mass: f64,
}

fn interval_excess(t: &CMat, tol: &Tolerance) -> Result<f64> {
    let eig = herm_eig(t, tol)?;
    Ok((-eig.min()).max(eig.max() - 1.0).max(0.0))
}

/// Is `theta` in the order interval `[0, phi]` of CP maps?
pub fn in_order_interval(theta: &CpMap, phi: &CpMap, tol: &Tolerance) -> Result<bool> {
    theta.ensure_compatible(phi)?;
    let gt = cp_gram(theta, tol)?;
    let gp = cp_gram(phi, tol)?;
    let zero = CMat::zeros(gt.nrows(), gt.ncols());
    Ok(psd_margin(&zero, &gt, tol)? >= -tol.atol && psd_margin(&gt, &gp, tol)? >= -tol.atol)
}

/// `T = (c+)* G_theta c+`, with `c+` the right inverse of the base
/// coordinate factor.
pub fn rn_operator(theta: &CpMap, base: &StinespringTriple, tol: &Tolerance) -> Result<RnOperator> {
    if !base.is_minimal() {
        return Err(Error::NotMinimal);
    }
    theta.ensure_compatible(base.source())?;
    let gt = cp_gram(theta, tol)?;
    let c = base.coordinate_factor();
    let gp = c.adjoint() * c;
    let zero = CMat::zeros(gt.nrows(), gt.ncols());
    let lower = psd_margin(&zero, &gt, tol)?;
    let upper = psd_margin(&gt, &gp, tol)?;
    if lower < -tol.atol || upper < -tol.atol {
        return Err(Error::NotDominated(lower.min(upper)));
    }
    rn_from_gram(&gt, theta, base, tol)
}

/// The conjugation step of [`rn_operator`] without the order-interval check.
pub(crate) fn rn_from_gram(
    gram: &CMat,
    theta: &CpMap,
    base: &StinespringTriple,
    tol: &Tolerance,
) -> Result<RnOperator> {
    let pinv = base.coordinate_pinv();
    let t = hermitian_part(&(pinv.adjoint() * gram * pinv));
    let support = pinv * base.coordinate_factor();
    let discarded_mass = dist(gram, &(support.adjoint() * gram * &support));
    let reproduction_residual = base
        .compress(&t)
        .iter()
        .zip(theta.images())
        .map(|(a, b)| dist(a, b))
        .fold(0.0, f64::max);
    Ok(RnOperator {
        commutant_residual: base.commutant_residual(&t),
        interval_residual: interval_excess(&t, tol)?,
        reproduction_residual,
        discarded_mass,
        t,
    })
}

/// `phi_T(b_i) = V* T rho(b_i) V`.
pub fn map_from_operator(t: &CMat, base: &StinespringTriple, tol: &Tolerance) -> Result<CpMap> {
    let r = base.dil_dim();
    if t.shape() != (r, r) {
        return Err(Error::ShapeMismatch(format!("T is {:?}, dilation dimension {r}", t.shape())));
    }
    let comm = base.commutant_residual(t);
    if comm > 10.0 * tol.atol * op_norm(t).max(1.0) {
        return Err(Error::NotInCommutant(comm));
    }
    let herm = hermitian_residual(t);
    if herm > tol.atol {
        return Err(Error::NotHermitian(herm));
    }
    let excess = interval_excess(t, tol)?;
    if excess > tol.atol {
        return Err(Error::NotInInterval(excess));
    }
    let src = base.source();
    CpMap::new(src.algebra().clone(), src.out_dim(), base.compress(t))
}
