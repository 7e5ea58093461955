//! Orthogonal measures and abelian subalgebras of the commutant.
//!
//! A measure yields the projections `T_i` of its atoms; an abelian
//! subalgebra with minimal projections `P_i` yields the atoms
//! `V* P_i rho(.) V / w_i` with weights `w_i`, provided each `V* P_i V` is a
//! scalar. When two minimal projections produce the same atom the
//! subalgebra is only sub-orthogonal: the measure round trip recovers a
//! strictly smaller subalgebra.

use crate::algebra::{span_dim, span_excess, AbelianSubalgebra};
use crate::dilation::{CpMap, StinespringTriple};
use crate::error::{Error, Result};
use crate::measures::{atom_operators, canonicalize_within, DiscreteMeasure};
use crate::numkernel::{c, dist, eye, herm_eig, op_norm, round_to_projection, trace, CMat, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Orthogonal,
    SubOrthogonal,
    NotSubOrthogonal,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Orthogonal => "orthogonal",
            Classification::SubOrthogonal => "sub-orthogonal",
            Classification::NotSubOrthogonal => "not-sub-orthogonal",
        }
    }
}

/// Result of reading a measure off an abelian subalgebra.
#[derive(Debug, Clone)]
pub struct SubalgebraVerdict {
    pub classification: Classification,
    pub measure: Option<DiscreteMeasure>,
    /// `w_i` for every kept projection, before merging.
    pub scalar_weights: Option<Vec<f64>>,
    /// First projection whose compression is not scalar, with `V* P V`.
    pub failure_witness: Option<(usize, CMat)>,
    /// Distance of the witness compression to the scalar line.
    pub scalar_defect: f64,
    /// Projection indices absorbed by each atom of `measure`.
    pub merge_groups: Vec<Vec<usize>>,
    /// Indices of the projections with nonzero compression.
    pub kept: Vec<usize>,
    /// `|sum_i w_i - 1|`.
    pub weight_sum_residual: f64,
}

/// The projections `T_i` of an orthogonal measure, labeled by atom.
pub fn subalgebra_from_measure(
    mu: &DiscreteMeasure,
    base: &StinespringTriple,
    tol: &Tolerance,
) -> Result<AbelianSubalgebra> {
    let r = base.dil_dim();
    if mu.len() == 1 {
        let gap = mu.atoms()[0].distance(base.source());
        if gap > 10.0 * tol.atol {
            return Err(Error::BaseMismatch(gap));
        }
        return Ok(AbelianSubalgebra::trivial(r));
    }
    let ops = atom_operators(mu, base, tol)?;
    let mut defect = 0.0f64;
    let mut sum = CMat::zeros(r, r);
    for (i, a) in ops.iter().enumerate() {
        defect = defect.max(dist(&(&a.t * &a.t), &a.t));
        for b in &ops[i + 1..] {
            defect = defect.max(op_norm(&(&a.t * &b.t)));
        }
        sum += &a.t;
    }
    defect = defect.max(dist(&sum, &eye(r)));
    if defect > tol.ortho_tol {
        return Err(Error::NotOrthogonalMeasure(defect));
    }
    let projections = ops
        .iter()
        .map(|op| round_to_projection(&op.t, tol))
        .collect::<Result<Vec<_>>>()?;
    for p in &projections {
        let res = base.commutant_residual(p);
        if res > 10.0 * tol.atol {
            return Err(Error::NotInCommutant(res));
        }
    }
    Ok(AbelianSubalgebra { ambient_dim: r, min_projections: projections, labels: (0..mu.len()).collect() })
}

/// Smallest distance from a Hermitian `w` to the line of scalar matrices,
/// together with the normalized trace.
fn scalar_defect(w: &CMat, tol: &Tolerance) -> Result<(f64, f64)> {
    let n = w.nrows();
    let eig = herm_eig(w, tol)?;
    Ok(((eig.max() - eig.min()) / 2.0, trace(w).re / n as f64))
}

/// Reads the measure `sum_i w_i delta_(phi_i)` off the minimal projections
/// of `b`, where `V* P_i V = w_i I`.
pub fn measure_from_subalgebra(
    b: &AbelianSubalgebra,
    base: &StinespringTriple,
    tol: &Tolerance,
) -> Result<SubalgebraVerdict> {
    let r = base.dil_dim();
    if b.ambient_dim != r {
        return Err(Error::ShapeMismatch(format!(
            "subalgebra acts on dimension {}, dilation has {r}",
            b.ambient_dim
        )));
    }
    b.validate(tol)?;
    for p in &b.min_projections {
        let res = base.commutant_residual(p);
        if res > 10.0 * tol.atol {
            return Err(Error::NotInCommutant(res));
        }
    }
    let v = base.v();
    let src = base.source();
    let mut kept = Vec::new();
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    let mut worst = 0.0f64;
    for (i, p) in b.min_projections.iter().enumerate() {
        let w = v.adjoint() * p * v;
        if op_norm(&w) <= tol.atol {
            continue;
        }
        let (defect, lambda) = scalar_defect(&w, tol)?;
        if defect > tol.atol {
            return Ok(SubalgebraVerdict {
                classification: Classification::NotSubOrthogonal,
                measure: None,
                scalar_weights: None,
                failure_witness: Some((i, w)),
                scalar_defect: defect,
                merge_groups: Vec::new(),
                kept,
                weight_sum_residual: f64::NAN,
            });
        }
        worst = worst.max(defect);
        let images = base.compress(p).into_iter().map(|m| m * c(1.0 / lambda, 0.0)).collect();
        atoms.push(CpMap::new(src.algebra().clone(), src.out_dim(), images)?);
        weights.push(lambda);
        kept.push(i);
    }
    let weight_sum_residual = (weights.iter().sum::<f64>() - 1.0).abs();
    let (measure, groups) = canonicalize_within(&atoms, &weights, 10.0 * tol.atol, tol)?;
    let merge_groups: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| g.iter().map(|&k| kept[k]).collect())
        .collect();
    let classification = if measure.len() < atoms.len() {
        Classification::SubOrthogonal
    } else {
        Classification::Orthogonal
    };
    Ok(SubalgebraVerdict {
        classification,
        measure: Some(measure),
        scalar_weights: Some(weights),
        failure_witness: None,
        scalar_defect: worst,
        merge_groups,
        kept,
        weight_sum_residual,
    })
}

/// Measure -> subalgebra -> measure.
#[derive(Debug, Clone)]
pub struct MeasureRoundtrip {
    pub classification: Classification,
    /// `perm[i]`: index of the recovered atom matched to atom `i`.
    pub permutation: Vec<usize>,
    pub atom_error: f64,
    pub weight_error: f64,
    pub closes: bool,
}

pub fn roundtrip_measure(mu: &DiscreteMeasure, base: &StinespringTriple, tol: &Tolerance) -> Result<MeasureRoundtrip> {
    let b = subalgebra_from_measure(mu, base, tol)?;
    let verdict = measure_from_subalgebra(&b, base, tol)?;
    let Some(back) = verdict.measure else {
        return Ok(MeasureRoundtrip {
            classification: verdict.classification,
            permutation: Vec::new(),
            atom_error: f64::INFINITY,
            weight_error: f64::INFINITY,
            closes: false,
        });
    };
    let mut used = vec![false; back.len()];
    let mut permutation = Vec::with_capacity(mu.len());
    let (mut atom_error, mut weight_error) = (0.0f64, 0.0f64);
    for (i, atom) in mu.atoms().iter().enumerate() {
        let best = (0..back.len())
            .filter(|&j| !used[j])
            .map(|j| (j, atom.distance(&back.atoms()[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((j, d)) => {
                used[j] = true;
                permutation.push(j);
                atom_error = atom_error.max(d);
                weight_error = weight_error.max((mu.weights()[i] - back.weights()[j]).abs());
            }
            None => {
                atom_error = f64::INFINITY;
                weight_error = f64::INFINITY;
            }
        }
    }
    let closes = verdict.classification == Classification::Orthogonal
        && back.len() == mu.len()
        && atom_error <= tol.merge_tol
        && weight_error <= 10.0 * tol.atol;
    Ok(MeasureRoundtrip { classification: verdict.classification, permutation, atom_error, weight_error, closes })
}

/// Subalgebra -> measure -> subalgebra.
#[derive(Debug, Clone)]
pub struct SubalgebraRoundtrip {
    pub classification: Classification,
    pub recovered: AbelianSubalgebra,
    /// Distance of the recovered projections from the span of the original.
    pub containment_excess: f64,
    /// Distance of the original projections from the span of the recovered.
    pub reverse_excess: f64,
    /// `max_G ||V* P_G rho(b_i) V - w_G phi_G(b_i)||` over the recovered atoms.
    pub reproduction_residual: f64,
    pub original_dim: usize,
    pub recovered_dim: usize,
    pub closes: bool,
}

/// On a minimal base with no merging the recovered subalgebra comes from the
/// Radon-Nikodym operators of the recovered measure. Otherwise it is the
/// algebra of functions constant on the merge groups: each recovered
/// projection is the sum of the projections in one group, with projections
/// of zero weight folded into the first group.
pub fn roundtrip_subalgebra(
    b: &AbelianSubalgebra,
    base: &StinespringTriple,
    tol: &Tolerance,
) -> Result<SubalgebraRoundtrip> {
    let verdict = measure_from_subalgebra(b, base, tol)?;
    if let Some((index, _)) = verdict.failure_witness {
        return Err(Error::NotSubOrthogonal { index, defect: verdict.scalar_defect });
    }
    let mu = verdict.measure.expect("measure present when sub-orthogonal");
    let r = b.ambient_dim;
    let recovered = if verdict.classification == Classification::Orthogonal && base.is_minimal() {
        subalgebra_from_measure(&mu, base, tol)?
    } else {
        let mut projections: Vec<CMat> = verdict
            .merge_groups
            .iter()
            .map(|g| g.iter().fold(CMat::zeros(r, r), |acc, &i| acc + &b.min_projections[i]))
            .collect();
        for i in (0..b.dim()).filter(|i| !verdict.kept.contains(i)) {
            projections[0] += &b.min_projections[i];
        }
        AbelianSubalgebra { ambient_dim: r, labels: (0..projections.len()).collect(), min_projections: projections }
    };
    let mut reproduction_residual = 0.0f64;
    for (p, (atom, w)) in recovered.min_projections.iter().zip(mu.atoms().iter().zip(mu.weights())) {
        for (lhs, rhs) in base.compress(p).iter().zip(atom.images()) {
            reproduction_residual = reproduction_residual.max(dist(lhs, &(rhs * c(*w, 0.0))));
        }
    }
    let containment_excess = span_excess(&recovered.min_projections, &b.min_projections, tol)?;
    let reverse_excess = span_excess(&b.min_projections, &recovered.min_projections, tol)?;
    let original_dim = span_dim(&b.min_projections, tol)?;
    let recovered_dim = span_dim(&recovered.min_projections, tol)?;
    let bound = 10.0 * tol.atol;
    let closes = reproduction_residual <= bound
        && containment_excess <= bound
        && match verdict.classification {
            Classification::Orthogonal => reverse_excess <= bound,
            _ => recovered_dim < original_dim,
        };
    Ok(SubalgebraRoundtrip {
        classification: verdict.classification,
        recovered,
        containment_excess,
        reverse_excess,
        reproduction_residual,
        original_dim,
        recovered_dim,
        closes,
    })
}
