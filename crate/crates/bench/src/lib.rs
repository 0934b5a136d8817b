//! Criterion benchmarks for the delaysync kernels; see `benches/kernels.rs`.
