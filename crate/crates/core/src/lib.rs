//! Core algorithms for the virtual transmission method (VTM).
//!
//! A circuit-derived sparse system `Ax = b` is torn into subdomains by
//! splitting interfacial nodes into twin nodes joined by virtual lossless
//! transmission lines. Each subdomain is solved locally and the line
//! equations exchange boundary voltages and currents with a one-tick delay
//! until the twins agree.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the
//! parallel scheduler and the command line live in the `vtm` crate.
//!
//! Module map:
//!
//! - [`sparse`], [`dense`], [`factor`], [`eigen`]: linear algebra foundation
//! - [`netgen`]: resistor networks, netlist assembly and the op-amp ring
//! - [`tearing`]: interface selection, wire tearing and reassembly
//! - [`vtm`]: preconditioners and the iteration engine
//! - [`baselines`]: classical stationary methods for comparison
//! - [`analysis`]: Schur complements, reflection matrices, convergence factor
//!
//! ```
//! use vtm_core::netgen::grid2d;
//! use vtm_core::tearing::{select_interface, wire_tear, SplitWeights, Strategy};
//! use vtm_core::vtm::{build_preconditioner, vtm_solve, PreconditionerSpec};
//! use vtm_core::{relative_residual, Sequential};
//!
//! let sys = grid2d(20, 20, 1.0, 0.1, 7).unwrap();
//! let labels = select_interface(&sys.a, 2, Strategy::Geometric { dims: [20, 20, 1] }).unwrap();
//! let part = wire_tear(&sys, &labels, &SplitWeights::Equal).unwrap();
//! let w = build_preconditioner(&PreconditionerSpec::OverlappedBlock, &part).unwrap();
//! let sol = vtm_solve(&part, &w, 1e-8, 1000, &Sequential).unwrap();
//! assert!(relative_residual(&sys.a, &sol.x, &sys.b) <= 1e-8);
//! ```

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod baselines;
pub mod dense;
pub mod eigen;
pub mod error;
pub mod factor;
pub mod graph;
pub mod netgen;
pub mod ordering;
pub mod report;
pub mod rng;
pub mod schedule;
pub mod sparse;
pub mod tearing;
pub mod vtm;

mod math;

pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use factor::{factor_solve, Factorization, SolverHint};
pub use netgen::LinearSystem;
pub use report::{Solution, SolveError, SolveReport, StopReason};
pub use schedule::{Scheduler, Sequential};
pub use sparse::CsrMatrix;

/// Euclidean norm.
pub fn norm2(x: &[f64]) -> f64 {
    math::sqrt(x.iter().map(|v| v * v).sum())
}

/// Relative residual `‖Ax − b‖₂ / ‖b‖₂`, falling back to the absolute
/// residual when `b = 0`.
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let mut r = a.mul_vec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri -= bi;
    }
    let nb = norm2(b);
    let nr = norm2(&r);
    if nb > 0.0 {
        nr / nb
    } else {
        nr
    }
}
