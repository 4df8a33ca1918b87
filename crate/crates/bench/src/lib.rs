//! Criterion benchmarks for the grid kernels live in `benches/`.
