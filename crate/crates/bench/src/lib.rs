//! Criterion benchmarks for `wehrl-core`; see `benches/`.
