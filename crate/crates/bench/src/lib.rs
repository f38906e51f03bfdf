//! Criterion benchmarks for the solvers; see `benches/radii.rs`.
