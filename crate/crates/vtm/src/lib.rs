//! File formats, the parallel scheduler, benchmark sweeps and the command
//! line around [`vtm_core`].
//!
//! - [`mm`]: Matrix Market matrices and vectors
//! - [`netlist`]: line-oriented netlists
//! - [`partition_io`]: partition text files and admittance blocks
//! - [`systems`]: named generated systems and the `meta.json` sidecar
//! - [`parallel`]: rayon scheduler, bit-identical to the sequential one
//! - [`solver`], [`bench`]: single runs, analysis and CSV sweeps
//! - [`cli`]: the `vtm` binary

pub mod bench;
pub mod cli;
pub mod error;
pub mod mm;
pub mod netlist;
pub mod parallel;
pub mod partition_io;
pub mod solver;
pub mod systems;

pub use error::{FormatError, Result};
pub use parallel::Parallel;
