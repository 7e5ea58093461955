//! Reference instances and seeded generators.
//!
//! States are UCP maps with one-dimensional output; their minimal dilation
//! is the GNS triple. The entrywise and diagonal examples push a measure on
//! states forward to UCP maps into `M_n`. Random generators are pure
//! functions of their parameters and seed.

use std::sync::Arc;

use nalgebra::QR;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{commutant, AbelianSubalgebra, StarAlgebra};
use crate::correspondence::{measure_from_subalgebra, Classification};
use crate::dilation::{cp_gram, minimal_stinespring, CpMap, StinespringTriple};
use crate::error::{Error, Result};
use crate::measures::{is_orthogonal_measure, DiscreteMeasure};
use crate::numkernel::{c, eye, herm_eig, hermitian_part, spectral_clusters, trace, CMat, Tolerance, C64};

/// A state given by its values on the algebra basis.
pub fn state_from_values(algebra: Arc<StarAlgebra>, values: &[C64], tol: &Tolerance) -> Result<CpMap> {
    let images = values.iter().map(|v| CMat::from_element(1, 1, *v)).collect();
    let omega = CpMap::new(algebra, 1, images)?;
    let unit = omega.unit_image()[(0, 0)];
    if (unit - c(1.0, 0.0)).norm() > tol.atol {
        return Err(Error::NotState(format!("value {unit} at the identity")));
    }
    let g = cp_gram(&omega, tol).map_err(|e| Error::NotState(e.to_string()))?;
    let eig = herm_eig(&g, tol)?;
    if eig.min() < -tol.atol * (1.0 + eig.max().abs()) {
        return Err(Error::NotState(format!("negative on a positive element ({:.3e})", eig.min())));
    }
    Ok(omega)
}

/// `a -> tr(a rho)`.
pub fn state_from_density(algebra: Arc<StarAlgebra>, density: &CMat, tol: &Tolerance) -> Result<CpMap> {
    let d = algebra.ambient_dim();
    if density.shape() != (d, d) {
        return Err(Error::ShapeMismatch(format!("density {:?}, ambient {d}", density.shape())));
    }
    let values: Vec<C64> = algebra.basis().iter().map(|b| trace(&(b * density))).collect();
    state_from_values(algebra, &values, tol)
}

/// `a -> <a v, v>` for a unit vector `v`.
pub fn vector_state(algebra: Arc<StarAlgebra>, v: &[C64], tol: &Tolerance) -> Result<CpMap> {
    let col = CMat::from_column_slice(v.len(), 1, v);
    state_from_density(algebra, &(&col * col.adjoint()), tol)
}

/// GNS triple of `a -> tr(a rho)` realized on `M_d` with the trace inner
/// product: `pi(a) X = a X` and cyclic vector `rho^(1/2)`, in column-major
/// vectorization. Minimal exactly when `rho` is faithful.
pub fn standard_form_gns(algebra: Arc<StarAlgebra>, density: &CMat, tol: &Tolerance) -> Result<StinespringTriple> {
    let omega = state_from_density(algebra.clone(), density, tol)?;
    let d = algebra.ambient_dim();
    let eig = herm_eig(density, tol)?;
    let roots = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        eig.values.iter().map(|v| c(v.max(0.0).sqrt(), 0.0)),
    ));
    let sqrt = &eig.vectors * roots * eig.vectors.adjoint();
    let v = CMat::from_column_slice(d * d, 1, sqrt.as_slice());
    let rho = algebra.basis().iter().map(|b| eye(d).kronecker(b)).collect();
    StinespringTriple::from_parts(omega, v, rho, tol)
}

/// `rho = I_n (x) pi`, `V = I_n (x) V_0`: a dilation of `a -> I_n (x) phi(a)`.
pub fn amplified_dilation(triple: &StinespringTriple, n: usize, tol: &Tolerance) -> Result<StinespringTriple> {
    if n == 0 {
        return Err(Error::BadParameters("amplification factor must be positive".into()));
    }
    let src = triple.source();
    let id = eye(n);
    let source = CpMap::new(
        src.algebra().clone(),
        n * src.out_dim(),
        src.images().iter().map(|m| id.kronecker(m)).collect(),
    )?;
    let rho = triple.rho_images().iter().map(|m| id.kronecker(m)).collect();
    StinespringTriple::from_parts(source, id.kronecker(triple.v()), rho, tol)
}

fn ensure_states(mu: &DiscreteMeasure) -> Result<()> {
    if mu.out_dim() != 1 {
        return Err(Error::NotState(format!("atoms have output dimension {}", mu.out_dim())));
    }
    Ok(())
}

/// Pushes a measure on states of `A` forward along `omega -> omega^n`, the
/// entrywise map `M_n(A) -> M_n`, `[a_st] -> [omega(a_st)]`.
pub fn example_entrywise(mu: &DiscreteMeasure, n: usize, tol: &Tolerance) -> Result<DiscreteMeasure> {
    ensure_states(mu)?;
    if n == 0 {
        return Err(Error::BadParameters("n must be positive".into()));
    }
    let alg = mu.atoms()[0].algebra();
    let big = Arc::new(alg.matrix_amplification(n, tol)?);
    let k = alg.dim();
    let s = (n as f64).sqrt();
    let atoms = mu
        .atoms()
        .iter()
        .map(|omega| {
            let images = (0..n * n * k)
                .map(|idx| {
                    let (st, i) = (idx / k, idx % k);
                    let mut m = CMat::zeros(n, n);
                    m[(st / n, st % n)] = omega.images()[i][(0, 0)] * s;
                    m
                })
                .collect();
            CpMap::new(big.clone(), n, images)
        })
        .collect::<Result<Vec<_>>>()?;
    DiscreteMeasure::new(atoms, mu.weights().to_vec(), tol)
}

/// Pushes a measure on states forward along `omega -> (a -> omega(a) I_n)`.
pub fn example_diagonal(mu: &DiscreteMeasure, n: usize, tol: &Tolerance) -> Result<DiscreteMeasure> {
    ensure_states(mu)?;
    if n == 0 {
        return Err(Error::BadParameters("n must be positive".into()));
    }
    let id = eye(n);
    let atoms = mu
        .atoms()
        .iter()
        .map(|omega| {
            let images = omega.images().iter().map(|m| &id * m[(0, 0)]).collect();
            CpMap::new(omega.algebra().clone(), n, images)
        })
        .collect::<Result<Vec<_>>>()?;
    DiscreteMeasure::new(atoms, mu.weights().to_vec(), tol)
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re * scale, im * scale)
    })
}

/// Random UCP map `M_d -> M_n` with `kraus_rank` Kraus operators.
pub fn random_ucp(d: usize, n: usize, kraus_rank: usize, seed: u64) -> Result<CpMap> {
    if d == 0 {
        return Err(Error::BadParameters("d must be positive".into()));
    }
    random_ucp_on(Arc::new(StarAlgebra::full(d)), n, kraus_rank, seed)
}

/// Random UCP map on an arbitrary `A` in `M_d`: the Kraus operators are
/// the `d x n` blocks of a random isometry `C^n -> C^d (x) C^kraus_rank`.
pub fn random_ucp_on(algebra: Arc<StarAlgebra>, n: usize, kraus_rank: usize, seed: u64) -> Result<CpMap> {
    let d = algebra.ambient_dim();
    if n == 0 || kraus_rank == 0 || kraus_rank > d * n || d * kraus_rank < n {
        return Err(Error::BadParameters(format!(
            "Kraus rank {kraus_rank} for maps M_{d} -> M_{n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian(d * kraus_rank, n, &mut rng);
    let w = QR::new(g).q();
    let kraus: Vec<CMat> = (0..kraus_rank).map(|l| w.rows(l * d, d).into_owned()).collect();
    CpMap::from_kraus(algebra, &kraus)
}

/// `a -> tr(a W) / tr(W)` with `W = G G*` and `G` a `d x rank` Gaussian.
pub fn random_state(algebra: Arc<StarAlgebra>, rank: usize, seed: u64, tol: &Tolerance) -> Result<CpMap> {
    let d = algebra.ambient_dim();
    if rank == 0 || rank > d {
        return Err(Error::BadParameters(format!("state rank {rank} in dimension {d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian(d, rank, &mut rng);
    let w = &g * g.adjoint();
    let density = hermitian_part(&(&w / trace(&w)));
    state_from_density(algebra, &density, tol)
}

/// An orthogonal measure with its source subalgebra.
#[derive(Debug, Clone)]
pub struct GeneratedMeasure {
    pub measure: DiscreteMeasure,
    pub subalgebra: AbelianSubalgebra,
    pub base: StinespringTriple,
}

const RETRY_BUDGET: usize = 8;

/// Draws a random Hermitian element of the commutant of the dilation of
/// `phi`, groups its spectral projections into at most `max_atoms` blocks
/// and reads off the measure. Groupings whose compressions are not scalar
/// are retried with fewer blocks; one block always succeeds with `delta_phi`.
pub fn random_orthogonal_measure(
    phi: &CpMap,
    max_atoms: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<GeneratedMeasure> {
    if max_atoms == 0 {
        return Err(Error::BadParameters("max_atoms must be positive".into()));
    }
    let base = minimal_stinespring(phi, tol)?;
    let r = base.dil_dim();
    let comm = commutant(base.rho_images(), r, tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..RETRY_BUDGET {
        let mut h = CMat::zeros(r, r);
        for x in &comm {
            let g: f64 = StandardNormal.sample(&mut rng);
            h += hermitian_part(x) * c(g, 0.0);
        }
        let clusters = spectral_clusters(&h, tol)?;
        let target = clusters.len().min(max_atoms).saturating_sub(attempt).max(1);
        let cuts = random_cuts(clusters.len(), target, &mut rng);
        let mut projections = Vec::with_capacity(target);
        let mut start = 0;
        for end in cuts {
            let p = clusters[start..end]
                .iter()
                .fold(CMat::zeros(r, r), |acc, cl| acc + cl.projection());
            projections.push(p);
            start = end;
        }
        let b = AbelianSubalgebra::new(projections, tol)?;
        let verdict = measure_from_subalgebra(&b, &base, tol)?;
        if verdict.classification != Classification::Orthogonal {
            continue;
        }
        let measure = verdict.measure.expect("orthogonal verdict carries a measure");
        if is_orthogonal_measure(&measure, tol)?.orthogonal {
            return Ok(GeneratedMeasure { measure, subalgebra: b, base });
        }
    }
    Err(Error::NoSubalgebraFound(RETRY_BUDGET))
}

/// Increasing end points splitting `0..len` into `parts` nonempty runs.
fn random_cuts(len: usize, parts: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut inner: Vec<usize> = (1..len).collect();
    for i in 0..inner.len() {
        let j = rng.random_range(i..inner.len());
        inner.swap(i, j);
    }
    let mut cuts: Vec<usize> = inner.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    cuts.push(len);
    cuts
}

/// A direct-sum dilation over a list of atoms, possibly with repeats, and
/// the subalgebra of its block projections.
#[derive(Debug, Clone)]
pub struct RepeatedAtomInstance {
    pub base: StinespringTriple,
    pub subalgebra: AbelianSubalgebra,
}

pub fn repeated_atom_instance(atoms: &[CpMap], weights: &[f64], tol: &Tolerance) -> Result<RepeatedAtomInstance> {
    let triples = atoms
        .iter()
        .map(|a| minimal_stinespring(a, tol))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&StinespringTriple> = triples.iter().collect();
    let base = StinespringTriple::direct_sum(&refs, weights, tol)?;
    let total = base.dil_dim();
    let mut offset = 0;
    let projections = triples
        .iter()
        .map(|t| {
            let mut p = CMat::zeros(total, total);
            p.view_mut((offset, offset), (t.dil_dim(), t.dil_dim())).fill_with_identity();
            offset += t.dil_dim();
            p
        })
        .collect();
    let subalgebra = AbelianSubalgebra::new(projections, tol)?;
    Ok(RepeatedAtomInstance { base, subalgebra })
}

/// A seeded repeated-atom instance: mutually orthogonal random atoms (their
/// Kraus families jointly independent) with one of them listed twice.
pub fn repeated_atom_case(seed: u64, tol: &Tolerance) -> Result<(Vec<CpMap>, Vec<f64>, RepeatedAtomInstance)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 2 + (rng.random::<u32>() % 2) as usize;
    let n = 1 + (rng.random::<u32>() % 2) as usize;
    let k = n.div_ceil(d);
    let distinct = 1 + (rng.random::<u32>() % 3) as usize;
    let distinct = distinct.min(d * n / k);
    let alg = Arc::new(StarAlgebra::full(d));
    let mut atoms = (0..distinct)
        .map(|_| random_ucp_on(alg.clone(), n, k, rng.random()))
        .collect::<Result<Vec<_>>>()?;
    let repeat = rng.random_range(0..distinct);
    atoms.push(atoms[repeat].clone());
    let weights = random_weights(atoms.len(), &mut rng);
    let inst = repeated_atom_instance(&atoms, &weights, tol)?;
    Ok((atoms, weights, inst))
}

/// Positive weights bounded away from zero, summing to one.
pub fn random_weights(m: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| 0.2 + rng.random::<f64>()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / sum).collect()
}

/// Family of a corpus instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    /// Random orthogonal measure over a faithful state.
    StateSplit,
    /// Mixture of random UCP maps; orthogonal iff the total Kraus count fits.
    KrausMixture,
    /// An orthogonal measure with one atom pulled toward a full-rank map.
    Perturbed,
    /// Mixture of pure states on `M_d`; orthogonal iff at most `d` atoms.
    PureStates,
    /// Diagonal pushforward of a state measure.
    Diagonal,
    /// Entrywise pushforward of a state measure.
    Entrywise,
}

impl CaseKind {
    pub const ALL: [CaseKind; 6] = [
        CaseKind::StateSplit,
        CaseKind::KrausMixture,
        CaseKind::Perturbed,
        CaseKind::PureStates,
        CaseKind::Diagonal,
        CaseKind::Entrywise,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CaseKind::StateSplit => "state-split",
            CaseKind::KrausMixture => "kraus-mixture",
            CaseKind::Perturbed => "perturbed",
            CaseKind::PureStates => "pure-states",
            CaseKind::Diagonal => "diagonal",
            CaseKind::Entrywise => "entrywise",
        }
    }
}

/// One seeded corpus instance.
#[derive(Debug, Clone)]
pub struct MeasureCase {
    pub kind: CaseKind,
    pub seed: u64,
    pub measure: DiscreteMeasure,
    /// Verdict expected for generic draws.
    pub expected_orthogonal: bool,
    /// For pushforward cases, the state measure that was pushed forward.
    pub source: Option<DiscreteMeasure>,
    /// Amplification factor of pushforward cases.
    pub n: usize,
}

/// The instance for `seed`; the kind cycles with `seed`.
pub fn corpus_case(seed: u64, tol: &Tolerance) -> Result<MeasureCase> {
    let kind = CaseKind::ALL[(seed % CaseKind::ALL.len() as u64) as usize];
    case_of_kind(kind, seed, tol)
}

pub fn case_of_kind(kind: CaseKind, seed: u64, tol: &Tolerance) -> Result<MeasureCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6f72_7468_6f6d_6561);
    let mut sub = || rng.random::<u64>();
    let case = |measure, expected_orthogonal| MeasureCase {
        kind,
        seed,
        measure,
        expected_orthogonal,
        source: None,
        n: 1,
    };
    match kind {
        CaseKind::StateSplit => {
            let d = 2 + (sub() % 2) as usize;
            let alg = Arc::new(StarAlgebra::full(d));
            let phi = random_state(alg, d, sub(), tol)?;
            let max_atoms = 2 + (sub() % 4) as usize;
            let g = random_orthogonal_measure(&phi, max_atoms, sub(), tol)?;
            Ok(case(g.measure, true))
        }
        CaseKind::KrausMixture => {
            let (measure, expected) = kraus_mixture(&mut rng, tol)?;
            Ok(case(measure, expected))
        }
        CaseKind::Perturbed => {
            let (measure, _) = kraus_mixture(&mut rng, tol)?;
            let m = measure.len();
            let first = &measure.atoms()[0];
            let (d, n) = (first.algebra().ambient_dim(), first.out_dim());
            let noise = random_ucp_on(first.algebra().clone(), n, d * n, rng.random())?;
            let eps = 0.2 + 0.3 * rng.random::<f64>();
            let mut atoms = measure.atoms().to_vec();
            atoms[0] = CpMap::combination(&[(1.0 - eps, first), (eps, &noise)])?;
            let measure = DiscreteMeasure::new(atoms, measure.weights().to_vec(), tol)?;
            Ok(case(measure, m == 1))
        }
        CaseKind::PureStates => {
            let (measure, expected) = pure_state_mixture(&mut rng, tol)?;
            Ok(case(measure, expected))
        }
        CaseKind::Diagonal | CaseKind::Entrywise => {
            let (source, expected) = if rng.random::<bool>() {
                let d = if kind == CaseKind::Entrywise { 2 } else { 2 + (rng.random::<u32>() % 2) as usize };
                let alg = Arc::new(StarAlgebra::full(d));
                let phi = random_state(alg, d, rng.random(), tol)?;
                let g = random_orthogonal_measure(&phi, 2 + (rng.random::<u32>() % 3) as usize, rng.random(), tol)?;
                (g.measure, true)
            } else {
                pure_state_mixture(&mut rng, tol)?
            };
            let (measure, n) = if kind == CaseKind::Diagonal {
                let n = 2 + (rng.random::<u32>() % 2) as usize;
                (example_diagonal(&source, n, tol)?, n)
            } else {
                (example_entrywise(&source, 2, tol)?, 2)
            };
            Ok(MeasureCase { kind, seed, measure, expected_orthogonal: expected, source: Some(source), n })
        }
    }
}

fn kraus_mixture(rng: &mut ChaCha8Rng, tol: &Tolerance) -> Result<(DiscreteMeasure, bool)> {
    let d = 2 + (rng.random::<u32>() % 2) as usize;
    let n = 1 + (rng.random::<u32>() % 3) as usize;
    let alg = Arc::new(StarAlgebra::full(d));
    let min_rank = n.div_ceil(d);
    let m = 2 + (rng.random::<u32>() % 4) as usize;
    let mut atoms = Vec::with_capacity(m);
    let mut total = 0;
    for _ in 0..m {
        let k = (min_rank + (rng.random::<u32>() % 2) as usize).min(d * n);
        total += k;
        atoms.push(random_ucp_on(alg.clone(), n, k, rng.random())?);
    }
    let weights = random_weights(m, rng);
    Ok((DiscreteMeasure::new(atoms, weights, tol)?, total <= d * n))
}

fn pure_state_mixture(rng: &mut ChaCha8Rng, tol: &Tolerance) -> Result<(DiscreteMeasure, bool)> {
    let d = 2 + (rng.random::<u32>() % 2) as usize;
    let m = 1 + (rng.random::<u32>() % (d as u32 + 2)) as usize;
    let alg = Arc::new(StarAlgebra::full(d));
    let atoms = (0..m)
        .map(|_| random_state(alg.clone(), 1, rng.random(), tol))
        .collect::<Result<Vec<_>>>()?;
    let weights = random_weights(m, rng);
    Ok((DiscreteMeasure::new(atoms, weights, tol)?, m <= d))
}

/// Closed-form instances on `M_2`.
pub mod fixtures {
    use super::*;
    use crate::numkernel::real_mat;

    fn m2() -> Arc<StarAlgebra> {
        Arc::new(StarAlgebra::full(2))
    }

    fn state(density: &[f64]) -> CpMap {
        state_from_density(m2(), &real_mat(2, 2, density), &Tolerance::default()).expect("fixture is a state")
    }

    /// The vector state of `e_1`.
    pub fn e1_state() -> CpMap {
        state(&[1.0, 0.0, 0.0, 0.0])
    }

    /// The vector state of `(e_1 + e_2) / sqrt 2`.
    pub fn plus_state() -> CpMap {
        state(&[0.5, 0.5, 0.5, 0.5])
    }

    /// Density `[[3/4, 1/4], [1/4, 1/4]]`, the barycenter of the two pure states.
    pub fn skewed_state() -> CpMap {
        state(&[0.75, 0.25, 0.25, 0.25])
    }

    /// The normalized trace.
    pub fn half_trace() -> CpMap {
        state(&[0.5, 0.0, 0.0, 0.5])
    }

    /// `1/2 delta_(e_1) + 1/2 delta_(plus)`: orthogonal.
    pub fn two_pure_measure() -> DiscreteMeasure {
        DiscreteMeasure::new(vec![e1_state(), plus_state()], vec![0.5, 0.5], &Tolerance::default())
            .expect("distinct atoms")
    }

    /// `1/2 delta_(e_1) + 1/2 delta_(tr / 2)`: not orthogonal.
    pub fn pure_mixed_measure() -> DiscreteMeasure {
        DiscreteMeasure::new(vec![e1_state(), half_trace()], vec![0.5, 0.5], &Tolerance::default())
            .expect("distinct atoms")
    }

    /// The projection `q = rho^(-1/2) E_11 rho^(-1/2) / 2` for the skewed density.
    pub fn skewed_q() -> CMat {
        let t = Tolerance::default();
        let rho = real_mat(2, 2, &[0.75, 0.25, 0.25, 0.25]);
        let eig = herm_eig(&rho, &t).expect("Hermitian");
        let inv_sqrt = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            2,
            eig.values.iter().map(|v| c(1.0 / v.sqrt(), 0.0)),
        ));
        let r = &eig.vectors * inv_sqrt * eig.vectors.adjoint();
        &r * crate::numkernel::matrix_unit(2, 0, 0) * &r * c(0.5, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::{is_completely_positive, verify_dilation};
    use crate::measures::barycenter;
    use crate::numkernel::{dist, real_mat};
    use crate::radon_nikodym::rn_operator;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn gns_dimensions_of_states() {
        let t = tol();
        assert_eq!(minimal_stinespring(&fixtures::half_trace(), &t).unwrap().dil_dim(), 4);
        assert_eq!(minimal_stinespring(&fixtures::e1_state(), &t).unwrap().dil_dim(), 2);
        let bad = state_from_density(Arc::new(StarAlgebra::full(2)), &real_mat(2, 2, &[0.45, 0.0, 0.0, 0.45]), &t);
        assert!(matches!(bad, Err(Error::NotState(_))));
        let neg = state_from_density(Arc::new(StarAlgebra::full(2)), &real_mat(2, 2, &[1.5, 0.0, 0.0, -0.5]), &t);
        assert!(matches!(neg, Err(Error::NotState(_))));
    }

    #[test]
    fn closed_form_q_is_the_rn_operator_in_standard_form() {
        let t = tol();
        let q = fixtures::skewed_q();
        assert!(dist(&(&q * &q), &q) < 1e-14);
        assert!((trace(&q).re - 1.0).abs() < 1e-14);
        let rho = real_mat(2, 2, &[0.75, 0.25, 0.25, 0.25]);
        let base = standard_form_gns(Arc::new(StarAlgebra::full(2)), &rho, &t).unwrap();
        assert!(base.is_minimal());
        assert!(verify_dilation(&base, &t).passes);
        let rn = rn_operator(&fixtures::e1_state().scaled(0.5), &base, &t).unwrap();
        // right multiplication by q
        assert!(dist(&rn.t, &q.transpose().kronecker(&eye(2))) < 1e-12);
    }

    #[test]
    fn diagonal_example_amplifies_dimensions() {
        let t = tol();
        let mu = DiscreteMeasure::dirac(fixtures::half_trace(), &t).unwrap();
        let out = example_diagonal(&mu, 2, &t).unwrap();
        assert_eq!(minimal_stinespring(&out.atoms()[0], &t).unwrap().dil_dim(), 8);
        let gns = minimal_stinespring(&fixtures::half_trace(), &t).unwrap();
        let amp = amplified_dilation(&gns, 2, &t).unwrap();
        assert!(amp.is_minimal());
        assert!(amp.source().distance(&out.atoms()[0]) < 1e-15);
        assert!(verify_dilation(&amp, &t).passes);

        let ortho = example_diagonal(&fixtures::two_pure_measure(), 2, &t).unwrap();
        assert!(is_orthogonal_measure(&ortho, &t).unwrap().orthogonal);
        let non = example_diagonal(&fixtures::pure_mixed_measure(), 2, &t).unwrap();
        assert!(!is_orthogonal_measure(&non, &t).unwrap().orthogonal);
    }

    #[test]
    fn entrywise_example_preserves_verdicts() {
        let t = tol();
        let mu = DiscreteMeasure::dirac(fixtures::skewed_state(), &t).unwrap();
        let out = example_entrywise(&mu, 2, &t).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out.atoms()[0].unital_residual() < 1e-14);
        assert!(is_completely_positive(&out.atoms()[0], &t).unwrap().completely_positive);

        let ortho = example_entrywise(&fixtures::two_pure_measure(), 2, &t).unwrap();
        assert!(is_orthogonal_measure(&ortho, &t).unwrap().orthogonal);
        let non = example_entrywise(&fixtures::pure_mixed_measure(), 2, &t).unwrap();
        assert!(!is_orthogonal_measure(&non, &t).unwrap().orthogonal);
    }

    #[test]
    fn random_ucp_contract() {
        let t = tol();
        let a = random_ucp(2, 2, 2, 7).unwrap();
        let b = random_ucp(2, 2, 2, 7).unwrap();
        assert_eq!(a.images(), b.images());
        assert!(a.unital_residual() < 1e-12);
        assert!(is_completely_positive(&a, &t).unwrap().completely_positive);
        assert_eq!(minimal_stinespring(&random_ucp(2, 2, 4, 3).unwrap(), &t).unwrap().dil_dim(), 8);
        assert_eq!(minimal_stinespring(&random_ucp(3, 3, 1, 3).unwrap(), &t).unwrap().dil_dim(), 3);
        assert!(matches!(random_ucp(2, 2, 0, 1), Err(Error::BadParameters(_))));
        assert!(matches!(random_ucp(2, 2, 5, 1), Err(Error::BadParameters(_))));
        assert!(matches!(random_ucp(2, 3, 1, 1), Err(Error::BadParameters(_))));
    }

    #[test]
    fn random_orthogonal_measures() {
        let t = tol();
        let id = CpMap::identity(Arc::new(StarAlgebra::full(2)));
        let g = random_orthogonal_measure(&id, 3, 1, &t).unwrap();
        assert_eq!(g.measure.len(), 1);

        let phi = fixtures::skewed_state();
        let g = random_orthogonal_measure(&phi, 2, 11, &t).unwrap();
        assert_eq!(g.measure.len(), 2);
        assert!(barycenter(&g.measure).distance(&phi) < 1e-7);
        let again = random_orthogonal_measure(&phi, 2, 11, &t).unwrap();
        assert_eq!(g.measure.weights(), again.measure.weights());
        assert!(g.measure.atoms()[0].distance(&again.measure.atoms()[0]) == 0.0);
    }

    #[test]
    fn corpus_is_deterministic() {
        let t = tol();
        for seed in 0..12 {
            let a = corpus_case(seed, &t).unwrap();
            let b = corpus_case(seed, &t).unwrap();
            assert_eq!(a.kind, b.kind);
            assert_eq!(a.measure.weights(), b.measure.weights());
            assert!(a.measure.atoms().iter().zip(b.measure.atoms()).all(|(x, y)| x.distance(y) == 0.0));
        }
    }
}
