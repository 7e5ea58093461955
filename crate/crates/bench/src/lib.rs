//! Criterion benchmarks for the orthomeasure kernels; see `benches/`.
