//! Benchmark harness, on-disk formats, experiment presets, and report
//! generation around the `cvqe-core` simulation primitives.

pub mod bench;
pub mod formats;
pub mod presets;
pub mod report;
