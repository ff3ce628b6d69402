//! Criterion benchmarks for `shrinklab-core`; run with `cargo bench -p shrinklab-bench`.
