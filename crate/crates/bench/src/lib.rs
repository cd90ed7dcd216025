//! Criterion benchmarks for `latgreen-core`; the benchmark targets live in `benches/`.
