//! Criterion benchmarks for proxcd; see `benches/`.
