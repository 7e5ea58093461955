use orthomeasure::correspondence::{
    measure_from_subalgebra, roundtrip_measure, roundtrip_subalgebra, subalgebra_from_measure, Classification,
};
use orthomeasure::algebra::span_excess;
use orthomeasure::dilation::minimal_stinespring;
use orthomeasure::gallery::{self, corpus_case, CaseKind};
use orthomeasure::measures::{
    are_orthogonal, barycenter, build_u_mu, disintegration_report, is_orthogonal_measure, k_mu,
};
use orthomeasure::numkernel::{c, dist, herm_eig, trace};
use orthomeasure::{CpMap, Tolerance, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn three_orthogonality_tests_agree(seed in 0u64..1_000_000) {
        let tol = Tolerance::default();
        let case = corpus_case(seed, &tol).unwrap();
        let cert = is_orthogonal_measure(&case.measure, &tol).unwrap();
        let ex = cert.exhaustive.as_ref().unwrap();
        let u = build_u_mu(&case.measure, &tol).unwrap();
        prop_assert_eq!(cert.orthogonal, ex.orthogonal);
        prop_assert_eq!(cert.orthogonal, u.is_unitary);
        prop_assert_eq!(cert.orthogonal, case.expected_orthogonal, "{:?}", case.kind);
        prop_assert!(u.isometry_residual <= 10.0 * tol.ortho_tol);
        prop_assert_eq!(u.is_unitary, u.dil_dim() == u.total_block_dim());
        prop_assert!(u.dil_dim() <= u.total_block_dim());
        if u.is_unitary {
            prop_assert!(disintegration_report(&case.measure, &u, &tol).unwrap().passes);
        }
    }

    #[test]
    fn k_mu_is_positive_and_contractive(seed in 0u64..1_000_000) {
        let tol = Tolerance::default();
        let case = corpus_case(seed, &tol).unwrap();
        let base = minimal_stinespring(&barycenter(&case.measure), &tol).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<C64> = (0..case.measure.len()).map(|_| c(rng.random(), 0.0)).collect();
        let k = k_mu(&case.measure, &f, &base, &tol).unwrap();
        let eig = herm_eig(&k, &tol).unwrap();
        prop_assert!(eig.min() >= -10.0 * tol.atol && eig.max() <= 1.0 + 10.0 * tol.atol);
    }

    #[test]
    fn k_mu_is_multiplicative_on_orthogonal_measures(seed in 0u64..1_000_000) {
        let tol = Tolerance::default();
        let case = gallery::case_of_kind(CaseKind::StateSplit, seed, &tol).unwrap();
        let mu = &case.measure;
        let base = minimal_stinespring(&barycenter(mu), &tol).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || -> Vec<C64> { (0..mu.len()).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect() };
        let (f, g) = (draw(), draw());
        let fg: Vec<C64> = f.iter().zip(&g).map(|(a, b)| a * b).collect();
        let lhs = k_mu(mu, &fg, &base, &tol).unwrap();
        let rhs = k_mu(mu, &f, &base, &tol).unwrap() * k_mu(mu, &g, &base, &tol).unwrap();
        prop_assert!(dist(&lhs, &rhs) <= 10.0 * tol.ortho_tol);
    }

    #[test]
    fn witness_projection_reproduces_the_state(seed in 0u64..1_000_000) {
        // n = 1: omega_1(b) = <pi(b) Omega, P Omega>
        let tol = Tolerance::default();
        let case = gallery::case_of_kind(CaseKind::StateSplit, seed, &tol).unwrap();
        let mu = &case.measure;
        let omega1 = mu.weighted_atom(0);
        let rest: Vec<(f64, &CpMap)> = (1..mu.len()).map(|i| (mu.weights()[i], &mu.atoms()[i])).collect();
        let omega2 = if rest.is_empty() { omega1.scaled(0.0) } else { CpMap::combination(&rest).unwrap() };
        let v = are_orthogonal(&omega1, &omega2, &tol).unwrap();
        prop_assert!(v.orthogonal);
        let p = v.witness.unwrap();
        let base = minimal_stinespring(&omega1.plus(&omega2).unwrap(), &tol).unwrap();
        let omega = base.v();
        for (rho, val) in base.rho_images().iter().zip(omega1.images()) {
            let inner = (omega.adjoint() * &p * rho * omega)[(0, 0)];
            prop_assert!((inner - val[(0, 0)]).norm() <= 1e-7);
        }
    }

    #[test]
    fn generated_measures_round_trip(seed in 0u64..1_000_000, d in 2usize..=3, max_atoms in 2usize..=4) {
        let tol = Tolerance::default();
        let alg = std::sync::Arc::new(orthomeasure::StarAlgebra::full(d));
        let phi = gallery::random_state(alg, d, seed, &tol).unwrap();
        let g = gallery::random_orthogonal_measure(&phi, max_atoms, seed, &tol).unwrap();
        prop_assert!(barycenter(&g.measure).distance(&phi) <= 10.0 * tol.atol);
        let rt = roundtrip_measure(&g.measure, &g.base, &tol).unwrap();
        prop_assert!(rt.closes, "{:?}", rt);
        prop_assert!(rt.atom_error <= 1e-6 && rt.weight_error <= 1e-7);
        let rs = roundtrip_subalgebra(&g.subalgebra, &g.base, &tol).unwrap();
        prop_assert!(rs.closes, "{:?}", rs);
        prop_assert!(rs.containment_excess <= 1e-6 && rs.reverse_excess <= 1e-6);
        // the measure's own subalgebra is the source subalgebra
        let b = subalgebra_from_measure(&g.measure, &g.base, &tol).unwrap();
        prop_assert!(span_excess(&b.min_projections, &g.subalgebra.min_projections, &tol).unwrap() <= 1e-6);
        prop_assert!(span_excess(&g.subalgebra.min_projections, &b.min_projections, &tol).unwrap() <= 1e-6);
    }

    #[test]
    fn repeated_atoms_are_sub_orthogonal(seed in 0u64..1_000_000) {
        let tol = Tolerance::default();
        let (atoms, _, inst) = gallery::repeated_atom_case(seed, &tol).unwrap();
        let v = measure_from_subalgebra(&inst.subalgebra, &inst.base, &tol).unwrap();
        prop_assert_eq!(v.classification, Classification::SubOrthogonal);
        prop_assert_eq!(v.measure.as_ref().unwrap().len(), atoms.len() - 1);
        prop_assert!(is_orthogonal_measure(v.measure.as_ref().unwrap(), &tol).unwrap().orthogonal);
        let rs = roundtrip_subalgebra(&inst.subalgebra, &inst.base, &tol).unwrap();
        prop_assert!(rs.closes, "{:?}", rs);
        prop_assert!(rs.recovered_dim < rs.original_dim);
        prop_assert!(v.weight_sum_residual <= 10.0 * tol.atol);
    }

    #[test]
    fn pushforwards_preserve_verdicts(seed in 0u64..1_000_000) {
        let tol = Tolerance::default();
        let kind = if seed % 2 == 0 { CaseKind::Diagonal } else { CaseKind::Entrywise };
        let case = gallery::case_of_kind(kind, seed, &tol).unwrap();
        let source = case.source.as_ref().unwrap();
        let before = is_orthogonal_measure(source, &tol).unwrap().orthogonal;
        let after = is_orthogonal_measure(&case.measure, &tol).unwrap().orthogonal;
        prop_assert_eq!(before, after);
        if kind == CaseKind::Diagonal {
            for (a, b) in source.atoms().iter().zip(case.measure.atoms()) {
                let r_in = minimal_stinespring(a, &tol).unwrap().dil_dim();
                let r_out = minimal_stinespring(b, &tol).unwrap().dil_dim();
                prop_assert_eq!(r_out, case.n * r_in);
            }
        }
    }
}

#[test]
fn certificate_operators_sum_to_identity_trace() {
    let tol = Tolerance::default();
    let mu = gallery::fixtures::two_pure_measure();
    let cert = is_orthogonal_measure(&mu, &tol).unwrap();
    let total: f64 = cert.operators.iter().map(|t| trace(t).re).sum();
    assert!((total - cert.dil_dim as f64).abs() < 1e-10);
}
