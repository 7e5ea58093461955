//! Finitely supported barycentric measures on UCP maps.
//!
//! For an atomic measure `mu = sum_i w_i delta_(phi_i)` with barycenter
//! `phi`, each weighted atom is dominated by `phi` and has a Radon-Nikodym
//! operator `T_i` in the commutant of the minimal dilation of `phi`. The
//! measure is orthogonal exactly when the `T_i` are mutually orthogonal
//! projections, when every subset split is an orthogonal pair, and when the
//! disintegration isometry `U_mu` is unitary.

use crate::dilation::{cp_gram, is_completely_positive, minimal_stinespring, CpMap, StinespringTriple};
use crate::error::{Error, Result};
use crate::numkernel::{block_diag, c, dist, eye, op_norm, round_to_projection, vstack, CMat, Tolerance, C64};
use crate::radon_nikodym::{rn_from_gram, rn_operator, RnOperator};

/// Atoms with positive weights summing to one.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    atoms: Vec<CpMap>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Validates without merging: atoms must be UCP, compatible and
    /// pairwise farther apart than `merge_tol`.
    pub fn new(atoms: Vec<CpMap>, weights: Vec<f64>, tol: &Tolerance) -> Result<Self> {
        validate_raw(&atoms, &weights, tol.atol, tol)?;
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tol.atol {
            return Err(Error::WeightSumInvalid(sum));
        }
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                let d = atoms[i].distance(&atoms[j]);
                if d <= tol.merge_tol {
                    return Err(Error::InvalidMeasure(format!(
                        "atoms {i} and {j} coincide (distance {d:.3e})"
                    )));
                }
            }
        }
        Ok(Self { atoms, weights })
    }

    /// The point mass at a UCP map.
    pub fn dirac(phi: CpMap, tol: &Tolerance) -> Result<Self> {
        Self::new(vec![phi], vec![1.0], tol)
    }

    pub fn atoms(&self) -> &[CpMap] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn out_dim(&self) -> usize {
        self.atoms[0].out_dim()
    }

    /// `w_i phi_i`.
    pub fn weighted_atom(&self, i: usize) -> CpMap {
        self.atoms[i].scaled(self.weights[i])
    }
}

fn validate_raw(atoms: &[CpMap], weights: &[f64], unital_tol: f64, tol: &Tolerance) -> Result<()> {
    if atoms.is_empty() {
        return Err(Error::InvalidMeasure("no atoms".into()));
    }
    if atoms.len() != weights.len() {
        return Err(Error::InvalidMeasure(format!(
            "{} atoms but {} weights",
            atoms.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::InvalidMeasure(format!("weight {w} is not positive")));
    }
    for a in atoms {
        atoms[0].ensure_compatible(a)?;
        let u = a.unital_residual();
        if u > unital_tol {
            return Err(Error::NotUnital(u));
        }
        let cp = is_completely_positive(a, tol)?;
        if !cp.completely_positive {
            return Err(Error::NotCp(cp.min_eigenvalue));
        }
    }
    Ok(())
}

/// Merges atoms closer than `merge_tol` (adding their weights) and
/// renormalizes. Returns the measure and, for each merged atom, the raw
/// indices it absorbed.
pub fn canonicalize(
    atoms: &[CpMap],
    weights: &[f64],
    tol: &Tolerance,
) -> Result<(DiscreteMeasure, Vec<Vec<usize>>)> {
    canonicalize_within(atoms, weights, tol.atol, tol)
}

/// [`canonicalize`] with an explicit bound on `|sum w - 1|` and on the
/// unital residual of each atom.
pub(crate) fn canonicalize_within(
    atoms: &[CpMap],
    weights: &[f64],
    slack: f64,
    tol: &Tolerance,
) -> Result<(DiscreteMeasure, Vec<Vec<usize>>)> {
    validate_raw(atoms, weights, slack, tol)?;
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > slack {
        return Err(Error::WeightSumInvalid(sum));
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..atoms.len() {
        match groups
            .iter_mut()
            .find(|g| atoms[g[0]].distance(&atoms[i]) <= tol.merge_tol)
        {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    let mut merged_atoms = Vec::with_capacity(groups.len());
    let mut merged_weights = Vec::with_capacity(groups.len());
    for g in &groups {
        let w: f64 = g.iter().map(|&i| weights[i]).sum();
        let terms: Vec<(f64, &CpMap)> = g.iter().map(|&i| (weights[i] / w, &atoms[i])).collect();
        merged_atoms.push(CpMap::combination(&terms)?);
        merged_weights.push(w / sum);
    }
    Ok((DiscreteMeasure { atoms: merged_atoms, weights: merged_weights }, groups))
}

/// `sum_i w_i phi_i`.
pub fn barycenter(mu: &DiscreteMeasure) -> CpMap {
    let terms: Vec<(f64, &CpMap)> = mu.weights.iter().copied().zip(&mu.atoms).collect();
    CpMap::combination(&terms).expect("atoms of a measure are compatible")
}

/// Orthogonality verdict for a pair `phi1 + phi2`.
#[derive(Debug, Clone)]
pub struct PairVerdict {
    pub orthogonal: bool,
    /// `||T^2 - T||` for the Radon-Nikodym operator of `phi1`.
    pub idempotency_defect: f64,
    pub rn: RnOperator,
    /// Nearest projection to `T`, present when `orthogonal`.
    pub witness: Option<CMat>,
    /// `max_i ||V* P rho(b_i) V - phi1(b_i)||` for the witness.
    pub witness_residual: Option<f64>,
    pub dil_dim: usize,
}

/// Does a projection in the commutant of the dilation of `phi1 + phi2`
/// split it into `phi1` and `phi2`?
pub fn are_orthogonal(phi1: &CpMap, phi2: &CpMap, tol: &Tolerance) -> Result<PairVerdict> {
    for p in [phi1, phi2] {
        let cp = is_completely_positive(p, tol)?;
        if !cp.completely_positive {
            return Err(Error::NotCp(cp.min_eigenvalue));
        }
    }
    let sum = phi1.plus(phi2)?;
    let unital = sum.unital_residual();
    if unital > tol.atol {
        return Err(Error::SumNotUnital(unital));
    }
    let base = minimal_stinespring(&sum, tol)?;
    let rn = rn_operator(phi1, &base, tol)?;
    verdict_from_rn(rn, phi1, &base, tol)
}

fn verdict_from_rn(rn: RnOperator, phi1: &CpMap, base: &StinespringTriple, tol: &Tolerance) -> Result<PairVerdict> {
    let idempotency_defect = dist(&(&rn.t * &rn.t), &rn.t);
    let orthogonal = idempotency_defect <= tol.ortho_tol;
    let (witness, witness_residual) = if orthogonal {
        let p = round_to_projection(&rn.t, tol)?;
        let res = base
            .compress(&p)
            .iter()
            .zip(phi1.images())
            .map(|(a, b)| dist(a, b))
            .fold(0.0, f64::max);
        (Some(p), Some(res))
    } else {
        (None, None)
    };
    Ok(PairVerdict { orthogonal, idempotency_defect, rn, witness, witness_residual, dil_dim: base.dil_dim() })
}

fn ensure_base(mu: &DiscreteMeasure, base: &StinespringTriple, tol: &Tolerance) -> Result<()> {
    let bary = barycenter(mu);
    bary.ensure_compatible(base.source())?;
    let gap = bary.distance(base.source());
    if gap > 10.0 * tol.atol {
        return Err(Error::BaseMismatch(gap));
    }
    Ok(())
}

/// Radon-Nikodym operators `T_i` of the weighted atoms against `base`.
pub fn atom_operators(mu: &DiscreteMeasure, base: &StinespringTriple, tol: &Tolerance) -> Result<Vec<RnOperator>> {
    ensure_base(mu, base, tol)?;
    if !base.is_minimal() {
        return Err(Error::NotMinimal);
    }
    (0..mu.len())
        .map(|i| {
            let theta = mu.weighted_atom(i);
            let g = cp_gram(&theta, tol)?;
            rn_from_gram(&g, &theta, base, tol)
        })
        .collect()
}

/// `k_mu(f) = sum_i f(i) T_i`.
pub fn k_mu(mu: &DiscreteMeasure, f: &[C64], base: &StinespringTriple, tol: &Tolerance) -> Result<CMat> {
    if f.len() != mu.len() {
        return Err(Error::ShapeMismatch(format!("{} values for {} atoms", f.len(), mu.len())));
    }
    let ops = atom_operators(mu, base, tol)?;
    Ok(combine(&ops, f))
}

fn combine(ops: &[RnOperator], f: &[C64]) -> CMat {
    let r = ops[0].t.nrows();
    ops.iter().zip(f).fold(CMat::zeros(r, r), |acc, (op, v)| acc + &op.t * *v)
}

/// Outcome of the subset-split test.
#[derive(Debug, Clone)]
pub struct ExhaustiveVerdict {
    pub orthogonal: bool,
    pub splits: usize,
    pub max_defect: f64,
    /// Atom indices on one side of the worst split, when not orthogonal.
    pub failing_split: Option<Vec<usize>>,
}

/// Certificate for [`is_orthogonal_measure`].
#[derive(Debug, Clone)]
pub struct MeasureCertificate {
    pub orthogonal: bool,
    pub dil_dim: usize,
    pub operators: Vec<CMat>,
    /// `||T_i^2 - T_i||` per atom.
    pub idempotency: Vec<f64>,
    /// `max_(i != j) ||T_i T_j||`.
    pub cross: f64,
    /// `||sum_i T_i - I||`.
    pub completeness: f64,
    pub failing_atoms: Vec<usize>,
    pub exhaustive: Option<ExhaustiveVerdict>,
    pub exhaustive_skipped: bool,
}

impl MeasureCertificate {
    pub fn max_defect(&self) -> f64 {
        self.idempotency.iter().fold(self.cross.max(self.completeness), |a, &b| a.max(b))
    }
}

/// Homomorphism test on `k_mu`, and for at most `exhaustive_cap` atoms the
/// subset-split test as an independent check.
pub fn is_orthogonal_measure(mu: &DiscreteMeasure, tol: &Tolerance) -> Result<MeasureCertificate> {
    let base = minimal_stinespring(&barycenter(mu), tol)?;
    certify_on_base(mu, &base, tol)
}

pub(crate) fn certify_on_base(
    mu: &DiscreteMeasure,
    base: &StinespringTriple,
    tol: &Tolerance,
) -> Result<MeasureCertificate> {
    let ops = atom_operators(mu, base, tol)?;
    let m = ops.len();
    let r = base.dil_dim();
    let idempotency: Vec<f64> = ops.iter().map(|op| dist(&(&op.t * &op.t), &op.t)).collect();
    let mut cross = 0.0f64;
    let mut failing = vec![false; m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let x = op_norm(&(&ops[i].t * &ops[j].t));
                cross = cross.max(x);
                if x > tol.ortho_tol {
                    failing[i] = true;
                }
            }
        }
        if idempotency[i] > tol.ortho_tol {
            failing[i] = true;
        }
    }
    let completeness = dist(&combine(&ops, &vec![c(1.0, 0.0); m]), &eye(r));
    let orthogonal = !failing.iter().any(|&f| f) && completeness <= tol.ortho_tol;
    let failing_atoms = (0..m).filter(|&i| failing[i]).collect();

    let exhaustive_skipped = m > tol.exhaustive_cap;
    let exhaustive = if exhaustive_skipped { None } else { Some(exhaustive_test(mu, base, tol)?) };
    Ok(MeasureCertificate {
        orthogonal,
        dil_dim: r,
        operators: ops.into_iter().map(|op| op.t).collect(),
        idempotency,
        cross,
        completeness,
        failing_atoms,
        exhaustive,
        exhaustive_skipped,
    })
}

/// Every split `E | E^c` with `E` a nonempty subset of the first `m - 1`
/// atoms, tested as a pair on the common base.
fn exhaustive_test(mu: &DiscreteMeasure, base: &StinespringTriple, tol: &Tolerance) -> Result<ExhaustiveVerdict> {
    let m = mu.len();
    let splits = (1usize << (m - 1)) - 1;
    let mut max_defect = 0.0f64;
    let mut worst: Option<Vec<usize>> = None;
    for mask in 1..=splits {
        let side: Vec<usize> = (0..m - 1).filter(|i| mask >> i & 1 == 1).collect();
        let terms: Vec<(f64, &CpMap)> = side.iter().map(|&i| (mu.weights[i], &mu.atoms[i])).collect();
        let phi_e = CpMap::combination(&terms)?;
        let rn = rn_from_gram(&cp_gram(&phi_e, tol)?, &phi_e, base, tol)?;
        let v = verdict_from_rn(rn, &phi_e, base, tol)?;
        if v.idempotency_defect > max_defect {
            max_defect = v.idempotency_defect;
            if !v.orthogonal {
                worst = Some(side);
            }
        }
    }
    Ok(ExhaustiveVerdict { orthogonal: max_defect <= tol.ortho_tol, splits, max_defect, failing_split: worst })
}

/// The disintegration isometry `U_mu: K -> (+)_i K_i`.
#[derive(Debug, Clone)]
pub struct Disintegration {
    pub u: CMat,
    pub block_dims: Vec<usize>,
    /// Minimal dilation of the barycenter.
    pub base: StinespringTriple,
    pub atom_triples: Vec<StinespringTriple>,
    pub weights: Vec<f64>,
    pub is_unitary: bool,
    /// `||U* U - I||`.
    pub isometry_residual: f64,
    /// `||U U* - I||`.
    pub unitarity_residual: f64,
}

impl Disintegration {
    pub fn dil_dim(&self) -> usize {
        self.base.dil_dim()
    }

    pub fn total_block_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }
}

/// Builds `U_mu` from `rho(b_j) V e_s -> (+)_i sqrt(w_i) rho_i(b_j) V_i e_s`.
pub fn build_u_mu(mu: &DiscreteMeasure, tol: &Tolerance) -> Result<Disintegration> {
    let base = minimal_stinespring(&barycenter(mu), tol)?;
    let atom_triples = mu
        .atoms
        .iter()
        .map(|a| minimal_stinespring(a, tol))
        .collect::<Result<Vec<_>>>()?;
    let scaled: Vec<CMat> = atom_triples
        .iter()
        .zip(&mu.weights)
        .map(|(t, w)| t.coordinate_factor() * c(w.sqrt(), 0.0))
        .collect();
    let y = vstack(&scaled);
    let gram = cp_gram(base.source(), tol)?;
    let mismatch = dist(&(y.adjoint() * &y), &gram);
    if mismatch > 10.0 * tol.atol * op_norm(&gram).max(1.0) {
        return Err(Error::BarycenterMismatch(mismatch));
    }
    let u = y * base.coordinate_pinv();
    let r = base.dil_dim();
    let isometry_residual = dist(&(u.adjoint() * &u), &eye(r));
    let unitarity_residual = dist(&(&u * u.adjoint()), &eye(u.nrows()));
    Ok(Disintegration {
        block_dims: atom_triples.iter().map(|t| t.dil_dim()).collect(),
        is_unitary: unitarity_residual <= tol.ortho_tol,
        u,
        base,
        atom_triples,
        weights: mu.weights.clone(),
        isometry_residual,
        unitarity_residual,
    })
}

/// Residuals of the block diagonalization carried out by a unitary `U_mu`.
#[derive(Debug, Clone)]
pub struct DisintegrationReport {
    /// `max_j ||U rho(b_j) U* - (+)_i rho_i(b_j)||`.
    pub representation_residual: f64,
    /// `max_i ||U k_mu(chi_i) U* - Q_i||` with `Q_i` the block projection.
    pub diagonal_residual: f64,
    pub passes: bool,
}

pub fn disintegration_report(
    mu: &DiscreteMeasure,
    result: &Disintegration,
    tol: &Tolerance,
) -> Result<DisintegrationReport> {
    if !result.is_unitary {
        return Err(Error::NotUnitary(result.unitarity_residual));
    }
    let u = &result.u;
    let k = result.base.algebra().dim();
    let mut representation_residual = 0.0f64;
    for j in 0..k {
        let blocks: Vec<CMat> = result.atom_triples.iter().map(|t| t.rho_images()[j].clone()).collect();
        let lhs = u * &result.base.rho_images()[j] * u.adjoint();
        representation_residual = representation_residual.max(dist(&lhs, &block_diag(&blocks)));
    }
    let ops = atom_operators(mu, &result.base, tol)?;
    let total = result.total_block_dim();
    let mut diagonal_residual = 0.0f64;
    let mut offset = 0;
    for (op, &ri) in ops.iter().zip(&result.block_dims) {
        let mut q = CMat::zeros(total, total);
        q.view_mut((offset, offset), (ri, ri)).copy_from(&eye(ri));
        offset += ri;
        diagonal_residual = diagonal_residual.max(dist(&(u * &op.t * u.adjoint()), &q));
    }
    let bound = 10.0 * tol.ortho_tol;
    Ok(DisintegrationReport {
        representation_residual,
        diagonal_residual,
        passes: representation_residual <= bound && diagonal_residual <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::fixtures;
    use crate::numkernel::{herm_eig, trace};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn barycenter_of_two_pure_states() {
        let mu = fixtures::two_pure_measure();
        let bary = barycenter(&mu);
        assert!(bary.distance(&fixtures::skewed_state()) < 1e-14);
        let dirac = DiscreteMeasure::dirac(fixtures::half_trace(), &tol()).unwrap();
        assert!(barycenter(&dirac).distance(&fixtures::half_trace()) == 0.0);
    }

    #[test]
    fn canonicalize_merges_and_checks_weights() {
        let t = tol();
        let phi = fixtures::half_trace();
        let (mu, groups) = canonicalize(&[phi.clone(), phi.clone()], &[0.25, 0.75], &t).unwrap();
        assert_eq!(mu.len(), 1);
        assert_eq!(groups, vec![vec![0, 1]]);
        assert!((mu.weights()[0] - 1.0).abs() < 1e-15);

        let atoms = [fixtures::e1_state(), fixtures::plus_state()];
        let (mu, groups) = canonicalize(&atoms, &[0.5, 0.5], &t).unwrap();
        assert_eq!(mu.len(), 2);
        assert_eq!(groups, vec![vec![0], vec![1]]);

        assert!(matches!(
            canonicalize(&atoms, &[0.45, 0.45], &t),
            Err(Error::WeightSumInvalid(_))
        ));
        assert!(matches!(
            DiscreteMeasure::new(vec![phi.clone(), phi], vec![0.5, 0.5], &t),
            Err(Error::InvalidMeasure(_))
        ));
    }

    #[test]
    fn pair_examples() {
        let t = tol();
        let half = fixtures::skewed_state().scaled(0.5);
        let v = are_orthogonal(&half, &half, &t).unwrap();
        assert!(!v.orthogonal);
        assert!((v.idempotency_defect - 0.25).abs() < 1e-10);

        let v = are_orthogonal(&fixtures::e1_state().scaled(0.5), &fixtures::plus_state().scaled(0.5), &t).unwrap();
        assert!(v.orthogonal);
        let p = v.witness.unwrap();
        assert!((trace(&p).re - 2.0).abs() < 1e-10);
        assert!(v.witness_residual.unwrap() < 1e-10);

        let v = are_orthogonal(&fixtures::e1_state().scaled(0.5), &fixtures::half_trace().scaled(0.5), &t).unwrap();
        assert!(!v.orthogonal);
        assert!((v.idempotency_defect - 2.0 / 9.0).abs() < 1e-9);

        let bad = fixtures::e1_state().scaled(0.6);
        assert!(matches!(
            are_orthogonal(&bad, &fixtures::plus_state().scaled(0.5), &t),
            Err(Error::SumNotUnital(_))
        ));
    }

    #[test]
    fn k_mu_examples() {
        let t = tol();
        let mu = fixtures::pure_mixed_measure();
        let base = minimal_stinespring(&barycenter(&mu), &t).unwrap();
        let one = k_mu(&mu, &[c(1.0, 0.0); 2], &base, &t).unwrap();
        assert!(dist(&one, &eye(4)) < 1e-10);
        let pure = k_mu(&mu, &[c(1.0, 0.0), c(0.0, 0.0)], &base, &t).unwrap();
        let eig = herm_eig(&pure, &t).unwrap();
        let expected = [2.0 / 3.0, 2.0 / 3.0, 0.0, 0.0];
        for (a, b) in eig.values.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10, "{:?}", eig.values);
        }
        let other = minimal_stinespring(&fixtures::half_trace(), &t).unwrap();
        assert!(matches!(
            k_mu(&fixtures::two_pure_measure(), &[c(1.0, 0.0); 2], &other, &t),
            Err(Error::BaseMismatch(_))
        ));
    }

    #[test]
    fn measure_verdicts() {
        let t = tol();
        let dirac = DiscreteMeasure::dirac(fixtures::skewed_state(), &t).unwrap();
        let cert = is_orthogonal_measure(&dirac, &t).unwrap();
        assert!(cert.orthogonal);
        assert_eq!(cert.exhaustive.as_ref().unwrap().splits, 0);

        let cert = is_orthogonal_measure(&fixtures::two_pure_measure(), &t).unwrap();
        assert!(cert.orthogonal);
        assert!(cert.exhaustive.unwrap().orthogonal);

        let cert = is_orthogonal_measure(&fixtures::pure_mixed_measure(), &t).unwrap();
        assert!(!cert.orthogonal);
        assert!((cert.idempotency[0] - 2.0 / 9.0).abs() < 1e-9);
        assert_eq!(cert.failing_atoms, vec![0, 1]);
        let ex = cert.exhaustive.unwrap();
        assert!(!ex.orthogonal);
        assert_eq!(ex.failing_split, Some(vec![0]));
    }

    #[test]
    fn u_mu_dimensions() {
        let t = tol();
        let dirac = DiscreteMeasure::dirac(fixtures::skewed_state(), &t).unwrap();
        let d = build_u_mu(&dirac, &t).unwrap();
        assert!(d.is_unitary);
        assert_eq!(d.u.shape(), (4, 4));
        let rep = disintegration_report(&dirac, &d, &t).unwrap();
        assert!(rep.representation_residual < 1e-10 && rep.diagonal_residual < 1e-10);

        let mu = fixtures::two_pure_measure();
        let d = build_u_mu(&mu, &t).unwrap();
        assert!(d.is_unitary);
        assert_eq!(d.block_dims, vec![2, 2]);
        assert_eq!(d.u.shape(), (4, 4));
        let rep = disintegration_report(&mu, &d, &t).unwrap();
        assert!(rep.passes);

        let mut tampered = d.clone();
        tampered.u.swap_columns(0, 1);
        let rep = disintegration_report(&mu, &tampered, &t).unwrap();
        assert!(rep.representation_residual > 0.1);

        let mu = fixtures::pure_mixed_measure();
        let d = build_u_mu(&mu, &t).unwrap();
        assert!(!d.is_unitary);
        assert_eq!(d.u.shape(), (6, 4));
        assert_eq!(d.block_dims, vec![2, 4]);
        assert!(d.isometry_residual < 1e-10);
        assert!(matches!(disintegration_report(&mu, &d, &t), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn foreign_base_is_rejected() {
        let t = tol();
        let mu = fixtures::two_pure_measure();
        let foreign = minimal_stinespring(&fixtures::half_trace(), &t).unwrap();
        assert!(matches!(atom_operators(&mu, &foreign, &t), Err(Error::BaseMismatch(_))));
    }
}
