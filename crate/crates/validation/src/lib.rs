//! Thresholds for the acceptance run in `tests/acceptance.rs`
//! (`cargo test -p vtm-validation --test acceptance`).

pub mod tolerances;
