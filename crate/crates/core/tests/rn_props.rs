use orthomeasure::algebra::commutant;
use orthomeasure::dilation::minimal_stinespring;
use orthomeasure::gallery;
use orthomeasure::numkernel::{c, dist, eye, herm_eig, hermitian_part, psd_margin};
use orthomeasure::radon_nikodym::{in_order_interval, map_from_operator, rn_operator};
use orthomeasure::{CMat, CpMap, Tolerance};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A UCP map with a large commutant: a mixture of `m` random UCP maps.
fn mixture(d: usize, n: usize, m: usize, seed: u64) -> (CpMap, Vec<CpMap>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parts: Vec<CpMap> = (0..m)
        .map(|_| gallery::random_ucp(d, n, n.div_ceil(d), rng.random()).unwrap())
        .collect();
    let w = gallery::random_weights(m, &mut rng);
    let terms: Vec<(f64, &CpMap)> = w.iter().copied().zip(&parts).collect();
    (CpMap::combination(&terms).unwrap(), parts, w)
}

/// Random element of the commutant rescaled to have spectrum exactly `[0, 1]`.
fn random_interval_element(basis: &[CMat], rng: &mut ChaCha8Rng, tol: &Tolerance) -> CMat {
    let r = basis[0].nrows();
    let mut h = CMat::zeros(r, r);
    for b in basis {
        h += hermitian_part(b) * c(rng.random::<f64>() - 0.5, 0.0);
    }
    let eig = herm_eig(&h, tol).unwrap();
    let span = eig.max() - eig.min();
    if span < 1e-6 {
        return eye(r) * c(rng.random::<f64>(), 0.0);
    }
    (h - eye(r) * c(eig.min(), 0.0)) / c(span, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operator_to_map_to_operator(seed in any::<u64>(), d in 2usize..=3, n in 1usize..=2, m in 1usize..=3) {
        let tol = Tolerance::default();
        let (phi, _, _) = mixture(d, n, m, seed);
        let base = minimal_stinespring(&phi, &tol).unwrap();
        let comm = commutant(base.rho_images(), base.dil_dim(), &tol).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let t = random_interval_element(&comm, &mut rng, &tol);
        let theta = map_from_operator(&t, &base, &tol).unwrap();
        let back = rn_operator(&theta, &base, &tol).unwrap();
        prop_assert!(dist(&back.t, &t) <= 1e-6, "{}", dist(&back.t, &t));
    }

    #[test]
    fn map_to_operator_to_map(seed in any::<u64>(), d in 2usize..=3, n in 1usize..=2, m in 1usize..=3) {
        let tol = Tolerance::default();
        let (phi, parts, w) = mixture(d, n, m, seed);
        let base = minimal_stinespring(&phi, &tol).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
        let terms: Vec<(f64, &CpMap)> = parts.iter().zip(&w).map(|(p, wi)| (wi * rng.random::<f64>(), p)).collect();
        let theta = CpMap::combination(&terms).unwrap();
        prop_assert!(in_order_interval(&theta, &phi, &tol).unwrap());
        let rn = rn_operator(&theta, &base, &tol).unwrap();
        prop_assert!(rn.commutant_residual <= 1e-6);
        prop_assert!(rn.interval_residual <= 1e-6);
        prop_assert!(rn.discarded_mass <= 1e-6);
        let back = map_from_operator(&rn.t, &base, &tol).unwrap();
        prop_assert!(back.distance(&theta) <= 1e-6);
    }

    #[test]
    fn affine_and_order_preserving(seed in any::<u64>(), d in 2usize..=3, m in 2usize..=3, a in 0.0f64..=1.0) {
        let tol = Tolerance::default();
        let (phi, parts, w) = mixture(d, 1, m, seed);
        let base = minimal_stinespring(&phi, &tol).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
        let s1: Vec<f64> = (0..m).map(|_| rng.random()).collect();
        // s2 >= s1 coordinatewise, so theta1 <= theta2
        let s2: Vec<f64> = s1.iter().map(|s| s + (1.0 - s) * rng.random::<f64>()).collect();
        let build = |s: &[f64]| {
            let terms: Vec<(f64, &CpMap)> = parts.iter().zip(&w).zip(s).map(|((p, wi), si)| (wi * si, p)).collect();
            CpMap::combination(&terms).unwrap()
        };
        let (th1, th2) = (build(&s1), build(&s2));
        let t1 = rn_operator(&th1, &base, &tol).unwrap().t;
        let t2 = rn_operator(&th2, &base, &tol).unwrap().t;
        let mixed = CpMap::combination(&[(a, &th1), (1.0 - a, &th2)]).unwrap();
        let tm = rn_operator(&mixed, &base, &tol).unwrap().t;
        let affine = &t1 * c(a, 0.0) + &t2 * c(1.0 - a, 0.0);
        prop_assert!(dist(&tm, &affine) <= 1e-6);
        prop_assert!(psd_margin(&t1, &t2, &tol).unwrap() >= -1e-6);
    }
}
