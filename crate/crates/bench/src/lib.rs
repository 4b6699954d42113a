//! Criterion benchmarks only; see `benches/kernels.rs`.
