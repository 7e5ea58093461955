use std::path::Path;
use std::time::Instant;

use orthomeasure::correspondence::{
    measure_from_subalgebra, roundtrip_measure, roundtrip_subalgebra, Classification,
};
use orthomeasure::dilation::{choi_matrix, is_completely_positive, minimal_stinespring, verify_dilation};
use orthomeasure::gallery::{self, corpus_case, fixtures};
use orthomeasure::measures::{
    are_orthogonal, barycenter, build_u_mu, disintegration_report, is_orthogonal_measure,
};
use orthomeasure::numkernel::herm_eig;
use orthomeasure::radon_nikodym::rn_operator;
use orthomeasure::{CpMap, DiscreteMeasure, Error, Tolerance};
use rayon::prelude::*;
use serde_json::json;

use crate::certificate::Certificate;
use crate::error::CliError;
use crate::instance::{measure_instance, Instance, InstanceFile, ToleranceOverrides};

/// Reads an instance file. Tolerances resolve as defaults, then the file's
/// `tolerance` block, then command-line flags.
pub fn load(path: &Path, tol: &mut Tolerance, cli_overrides: &ToleranceOverrides) -> Result<Instance, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let file: InstanceFile =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("instance file: {e}")))?;
    file.tolerance.apply(tol);
    cli_overrides.apply(tol);
    tol.validate()?;
    Instance::from_file(file, tol)
}

fn ensure_cp(phi: &CpMap, tol: &Tolerance) -> Result<(), CliError> {
    let cp = is_completely_positive(phi, tol)?;
    if !cp.completely_positive {
        return Err(Error::NotCp(cp.min_eigenvalue).into());
    }
    Ok(())
}

pub fn dilate(inst: &Instance, map: &str, cert: &mut Certificate, tol: &Tolerance) -> Result<(), CliError> {
    let phi = inst.map(map, tol)?;
    ensure_cp(&phi, tol)?;
    let triple = minimal_stinespring(&phi, tol)?;
    let rep = verify_dilation(&triple, tol);
    cert.verdict("dilation_valid", rep.passes).verdict("minimal", triple.is_minimal());
    for (k, v) in rep.entries() {
        cert.residual(k, v);
    }
    cert.dim("dil_dim", triple.dil_dim())
        .dim("spanning_rank", rep.spanning_rank)
        .dim("algebra_dim", phi.algebra().dim())
        .dim("out_dim", phi.out_dim());
    if phi.algebra().is_full() {
        let choi = choi_matrix(&phi)?;
        cert.dim("choi_rank", herm_eig(&choi, tol)?.rank(tol));
    }
    cert.witness("v", triple.v()).witness_list("rho", triple.rho_images());
    Ok(())
}

pub fn check_cp(inst: &Instance, map: &str, cert: &mut Certificate, tol: &Tolerance) -> Result<(), CliError> {
    let phi = inst.map(map, tol)?;
    let cp = is_completely_positive(&phi, tol)?;
    cert.verdict("completely_positive", cp.completely_positive)
        .verdict("unital", phi.is_unital(tol))
        .residual("min_gram_eigenvalue", cp.min_eigenvalue)
        .residual("gram_norm", cp.gram_norm)
        .residual("unital_residual", phi.unital_residual())
        .residual("star_residual", phi.star_residual())
        .dim("algebra_dim", phi.algebra().dim())
        .dim("out_dim", phi.out_dim());
    Ok(())
}

pub fn rn(inst: &Instance, map: &str, base: &str, cert: &mut Certificate, tol: &Tolerance) -> Result<(), CliError> {
    let theta = inst.map(map, tol)?;
    let phi = inst.map(base, tol)?;
    ensure_cp(&phi, tol)?;
    let triple = minimal_stinespring(&phi, tol)?;
    let op = rn_operator(&theta, &triple, tol)?;
    let bound = 10.0 * tol.atol;
    cert.verdict("in_commutant", op.commutant_residual <= bound)
        .verdict("in_interval", op.interval_residual <= bound)
        .verdict("reproduces", op.reproduction_residual <= bound)
        .residual("commutant", op.commutant_residual)
        .residual("interval", op.interval_residual)
        .residual("reproduction", op.reproduction_residual)
        .residual("discarded_mass", op.discarded_mass)
        .dim("dil_dim", triple.dil_dim())
        .witness("t", &op.t);
    Ok(())
}

pub fn check_pair(inst: &Instance, first: &str, second: &str, cert: &mut Certificate, tol: &Tolerance) -> Result<(), CliError> {
    let phi1 = inst.map(first, tol)?;
    let phi2 = inst.map(second, tol)?;
    let v = are_orthogonal(&phi1, &phi2, tol)?;
    cert.verdict("orthogonal", v.orthogonal)
        .residual("idempotency_defect", v.idempotency_defect)
        .residual("commutant", v.rn.commutant_residual)
        .dim("dil_dim", v.dil_dim)
        .witness("t", &v.rn.t);
    if let (Some(p), Some(res)) = (&v.witness, v.witness_residual) {
        let base = minimal_stinespring(&phi1.plus(&phi2)?, tol)?;
        cert.residual("witness_reproduction", res)
            .verdict("witness_verified", res <= 10.0 * tol.atol)
            .witness("p", p)
            .witness("v", base.v())
            .witness_list("rho", base.rho_images())
            .witness_list("first_images", phi1.images());
    }
    Ok(())
}

fn measure_dims(cert: &mut Certificate, mu: &DiscreteMeasure, groups: &[Vec<usize>]) {
    cert.dim("atoms", mu.len()).dim("merge_groups", json!(groups));
    cert.verdict("merged", groups.iter().any(|g| g.len() > 1));
}

pub fn check_measure(inst: &Instance, name: &str, cert: &mut Certificate, tol: &Tolerance) -> Result<(), CliError> {
    let (mu, groups) = inst.measure(name, tol)?;
    measure_dims(cert, &mu, &groups);
    certify_measure(&mu, cert, tol)
}

fn certify_measure(mu: &DiscreteMeasure, cert: &mut Certificate, tol: &Tolerance) -> Result<(), CliError> {
    let c = is_orthogonal_measure(mu, tol)?;
    cert.verdict("orthogonal", c.orthogonal)
        .residual("cross", c.cross)
        .residual("completeness", c.completeness)
        .dim("dil_dim", c.dil_dim)
        .dim("failing_atoms", json!(c.failing_atoms))
        .witness_list("rn_operators", &c.operators);
    for (i, d) in c.idempotency.iter().enumerate() {
        cert.residual(&format!("idempotency_{i}"), *d);
    }
    match &c.exhaustive {
        Some(ex) => {
            cert.verdict("exhaustive_orthogonal", ex.orthogonal)
                .verdict("tests_agree", ex.orthogonal == c.orthogonal)
                .residual("exhaustive_max_defect", ex.max_defect)
                .dim("splits", ex.splits);
            if let Some(side) = &ex.failing_split {
                cert.dim("failing_split", json!(side));
            }
        }
        None => {
            cert.verdict("exhaustive_orthogonal", "skipped");
        }
    }
    Ok(())
}

pub fn u_mu(inst: &Instance, name: &str, cert: &mut Certificate, tol: &Tolerance) -> Result<(), CliError> {
    let (mu, groups) = inst.measure(name, tol)?;
    measure_dims(cert, &mu, &groups);
    disintegrate(&mu, cert, tol)
}

fn disintegrate(mu: &DiscreteMeasure, cert: &mut Certificate, tol: &Tolerance) -> Result<(), CliError> {
    let d = build_u_mu(mu, tol)?;
    cert.verdict("unitary", d.is_unitary)
        .verdict("dimension_law", d.is_unitary == (d.dil_dim() == d.total_block_dim()))
        .residual("isometry", d.isometry_residual)
        .residual("unitarity", d.unitarity_residual)
        .dim("dil_dim", d.dil_dim())
        .dim("block_dims", json!(d.block_dims))
        .dim("total_block_dim", d.total_block_dim())
        .witness("u", &d.u);
    if d.is_unitary {
        let rep = disintegration_report(mu, &d, tol)?;
        cert.verdict("block_diagonalizes", rep.passes)
            .residual("representation", rep.representation_residual)
            .residual("diagonal", rep.diagonal_residual);
    }
    Ok(())
}

pub fn from_subalgebra(inst: &Instance, name: &str, seed: u64, cert: &mut Certificate, tol: &Tolerance) -> Result<(), CliError> {
    let spec = inst.subalgebra_spec(name)?;
    let phi = inst.map(&spec.map, tol)?;
    ensure_cp(&phi, tol)?;
    let base = minimal_stinespring(&phi, tol)?;
    let b = inst.subalgebra(spec, &base, seed, tol)?;
    cert.seed = Some(seed);
    let v = measure_from_subalgebra(&b, &base, tol)?;
    cert.verdict("classification", v.classification.as_str())
        .residual("scalar_defect", v.scalar_defect)
        .residual("weight_sum", v.weight_sum_residual)
        .dim("dil_dim", base.dil_dim())
        .dim("projections", b.dim())
        .dim("kept", json!(v.kept))
        .dim("merge_groups", json!(v.merge_groups))
        .witness_list("projections", &b.min_projections);
    if let Some(w) = &v.scalar_weights {
        cert.dim("scalar_weights", json!(w));
    }
    if let Some((i, w)) = &v.failure_witness {
        cert.dim("failure_index", *i).witness("failure_compression", w);
    }
    if let Some(mu) = &v.measure {
        cert.dim("atoms", mu.len()).dim("weights", json!(mu.weights()));
        for (i, a) in mu.atoms().iter().enumerate() {
            cert.witness_list(&format!("atom{i}"), a.images());
        }
        cert.verdict("measure_orthogonal", is_orthogonal_measure(mu, tol)?.orthogonal);
    }
    Ok(())
}

pub fn roundtrip(
    inst: &Instance,
    measure: Option<&str>,
    subalgebra: Option<&str>,
    seed: u64,
    cert: &mut Certificate,
    tol: &Tolerance,
) -> Result<(), CliError> {
    if let Some(name) = measure {
        let (mu, groups) = inst.measure(name, tol)?;
        measure_dims(cert, &mu, &groups);
        let base = minimal_stinespring(&barycenter(&mu), tol)?;
        let rt = roundtrip_measure(&mu, &base, tol)?;
        cert.verdict("closes", rt.closes)
            .verdict("classification", rt.classification.as_str())
            .residual("atom_error", rt.atom_error)
            .residual("weight_error", rt.weight_error)
            .dim("permutation", json!(rt.permutation));
        return Ok(());
    }
    let name = subalgebra.ok_or_else(|| CliError::Input("give --measure or --subalgebra".into()))?;
    let spec = inst.subalgebra_spec(name)?;
    let phi = inst.map(&spec.map, tol)?;
    ensure_cp(&phi, tol)?;
    let base = minimal_stinespring(&phi, tol)?;
    let b = inst.subalgebra(spec, &base, seed, tol)?;
    cert.seed = Some(seed);
    let rt = roundtrip_subalgebra(&b, &base, tol)?;
    cert.verdict("closes", rt.closes)
        .verdict("classification", rt.classification.as_str())
        .residual("containment_excess", rt.containment_excess)
        .residual("reverse_excess", rt.reverse_excess)
        .residual("reproduction", rt.reproduction_residual)
        .dim("original_dim", rt.original_dim)
        .dim("recovered_dim", rt.recovered_dim);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fixture {
    /// Half e_1 state plus half (e_1 + e_2)/sqrt 2 state on M_2.
    TwoPure,
    /// Half e_1 state plus half normalized trace on M_2.
    PureMixed,
    /// Point mass at the normalized trace on M_2.
    HalfTrace,
    /// Two blocks carrying the same e_1 state.
    RepeatedAtom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Pushforward {
    None,
    Diagonal,
    Entrywise,
}

fn fixture_measure(f: Fixture, tol: &Tolerance) -> Result<DiscreteMeasure, CliError> {
    Ok(match f {
        Fixture::TwoPure => fixtures::two_pure_measure(),
        Fixture::PureMixed => fixtures::pure_mixed_measure(),
        Fixture::HalfTrace => DiscreteMeasure::dirac(fixtures::half_trace(), tol)?,
        Fixture::RepeatedAtom => return Err(CliError::Input("repeated-atom is not a measure fixture".into())),
    })
}

pub fn gallery_cmd(
    fixture: Fixture,
    push: Pushforward,
    n: usize,
    emit_instance: bool,
    cert: &mut Certificate,
    tol: &Tolerance,
) -> Result<Option<String>, CliError> {
    if fixture == Fixture::RepeatedAtom {
        if emit_instance {
            return Err(CliError::Input("repeated-atom uses a non-minimal dilation and has no instance form".into()));
        }
        let e1 = fixtures::e1_state();
        let inst = gallery::repeated_atom_instance(&[e1.clone(), e1], &[0.5, 0.5], tol)?;
        let v = measure_from_subalgebra(&inst.subalgebra, &inst.base, tol)?;
        let rt = roundtrip_subalgebra(&inst.subalgebra, &inst.base, tol)?;
        cert.verdict("classification", v.classification.as_str())
            .verdict("closes", rt.closes)
            .verdict("strictly_smaller", rt.recovered_dim < rt.original_dim)
            .dim("original_dim", rt.original_dim)
            .dim("recovered_dim", rt.recovered_dim)
            .dim("merge_groups", json!(v.merge_groups))
            .residual("containment_excess", rt.containment_excess)
            .residual("reproduction", rt.reproduction_residual);
        debug_assert_eq!(v.classification, Classification::SubOrthogonal);
        return Ok(None);
    }
    let base = fixture_measure(fixture, tol)?;
    let mu = match push {
        Pushforward::None => base,
        Pushforward::Diagonal => gallery::example_diagonal(&base, n, tol)?,
        Pushforward::Entrywise => gallery::example_entrywise(&base, n, tol)?,
    };
    if emit_instance {
        let file = measure_instance(&mu)?;
        return Ok(Some(serde_json::to_string_pretty(&file).expect("instance serializes")));
    }
    cert.dim("atoms", mu.len());
    certify_measure(&mu, cert, tol)?;
    disintegrate(&mu, cert, tol)?;
    let dims: Vec<usize> = mu
        .atoms()
        .iter()
        .map(|a| minimal_stinespring(a, tol).map(|t| t.dil_dim()))
        .collect::<Result<_, _>>()?;
    cert.dim("atom_dil_dims", json!(dims));
    Ok(None)
}

/// Certificates for corpus instances `seed, seed + 1, ...`, computed in
/// parallel and returned in index order.
pub fn random_corpus(seed: u64, count: usize, tol: &Tolerance, command: &str) -> Vec<Certificate> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let case_seed = seed.wrapping_add(i as u64);
            let start = Instant::now();
            let mut cert = Certificate::new(format!("{command} [instance {i}]"));
            if let Err(e) = corpus_instance(case_seed, &mut cert, tol) {
                cert = Certificate::failed(format!("{command} [instance {i}]"), &e);
            }
            cert.seed = Some(case_seed);
            cert.wall_clock_ms = start.elapsed().as_secs_f64() * 1e3;
            cert
        })
        .collect()
}

fn corpus_instance(seed: u64, cert: &mut Certificate, tol: &Tolerance) -> Result<(), CliError> {
    let case = corpus_case(seed, tol)?;
    cert.verdict("kind", case.kind.as_str())
        .verdict("expected_orthogonal", case.expected_orthogonal)
        .dim("atoms", case.measure.len())
        .dim("out_dim", case.measure.out_dim())
        .dim("ambient_dim", case.measure.atoms()[0].algebra().ambient_dim());
    certify_measure(&case.measure, cert, tol)?;
    disintegrate(&case.measure, cert, tol)?;
    let get = |k: &str| cert.verdicts.get(k).and_then(|v| v.as_bool());
    let agree = get("orthogonal") == get("exhaustive_orthogonal") && get("orthogonal") == get("unitary");
    cert.verdict("all_agree", agree);
    cert.witnesses.clear();
    Ok(())
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomically(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}
