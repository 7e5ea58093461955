use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use orthomeasure::algebra::commutant;
use orthomeasure::dilation::minimal_stinespring;
use orthomeasure::gallery::{self, fixtures, CaseKind};
use orthomeasure::measures::{build_u_mu, is_orthogonal_measure};
use orthomeasure::Tolerance;

fn dilation(c: &mut Criterion) {
    let tol = Tolerance::default();
    let mut group = c.benchmark_group("minimal_stinespring");
    for (d, n, k) in [(2, 2, 2), (3, 3, 3), (3, 3, 9)] {
        let phi = gallery::random_ucp(d, n, k, 1).unwrap();
        group.bench_function(format!("d{d}_n{n}_k{k}"), |b| {
            b.iter(|| minimal_stinespring(black_box(&phi), &tol).unwrap())
        });
    }
    group.finish();
}

fn orthogonality(c: &mut Criterion) {
    let tol = Tolerance::default();
    let mut group = c.benchmark_group("orthogonality");
    let mu = fixtures::pure_mixed_measure();
    group.bench_function("pure_mixed", |b| b.iter(|| is_orthogonal_measure(black_box(&mu), &tol).unwrap()));
    let case = gallery::case_of_kind(CaseKind::KrausMixture, 5, &tol).unwrap();
    group.bench_function("kraus_mixture", |b| {
        b.iter(|| is_orthogonal_measure(black_box(&case.measure), &tol).unwrap())
    });
    group.bench_function("u_mu_kraus_mixture", |b| b.iter(|| build_u_mu(black_box(&case.measure), &tol).unwrap()));
    group.finish();
}

fn commutants(c: &mut Criterion) {
    let tol = Tolerance::default();
    let base = minimal_stinespring(&gallery::random_ucp(3, 3, 3, 2).unwrap(), &tol).unwrap();
    c.bench_function("commutant_r9", |b| {
        b.iter(|| commutant(black_box(base.rho_images()), base.dil_dim(), &tol).unwrap())
    });
}

criterion_group!(benches, dilation, orthogonality, commutants);
criterion_main!(benches);
