//! Iteration reports shared by the VTM engine and the classical baselines.

use alloc::vec::Vec;

/// Why an iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StopReason {
    Converged,
    Diverged,
    MaxIterations,
}

/// Divergence threshold on the relative residual.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Default convergence tolerance.
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    pub stop: StopReason,
    /// Relative global residual after each iteration.
    pub residual_history: Vec<f64>,
    /// Final max `|u_a − u_b|` over wires (zero for the baselines).
    pub twin_mismatch: f64,
    /// Twin mismatch after each iteration.
    pub mismatch_history: Vec<f64>,
    pub cf_estimate: Option<f64>,
    /// Filled in by callers that time the run.
    pub wall_seconds: f64,
}

impl SolveReport {
    pub(crate) fn new() -> Self {
        Self {
            iterations: 0,
            converged: false,
            stop: StopReason::MaxIterations,
            residual_history: Vec::new(),
            twin_mismatch: 0.0,
            mismatch_history: Vec::new(),
            cf_estimate: None,
            wall_seconds: 0.0,
        }
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }

    /// Records one iteration and classifies it.
    pub(crate) fn push(&mut self, residual: f64, mismatch: f64, tol: f64) -> Option<StopReason> {
        self.iterations += 1;
        self.residual_history.push(residual);
        self.mismatch_history.push(mismatch);
        self.twin_mismatch = mismatch;
        if !residual.is_finite() || residual > DIVERGENCE_THRESHOLD {
            self.stop = StopReason::Diverged;
            return Some(StopReason::Diverged);
        }
        if residual <= tol {
            self.converged = true;
            self.stop = StopReason::Converged;
            return Some(StopReason::Converged);
        }
        None
    }
}

/// A converged iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub report: SolveReport,
}

/// Failure of an iterative solve. Iteration failures carry the report and
/// the last iterate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("diverged at iteration {iteration}")]
    Diverged { iteration: usize, x: Vec<f64>, report: SolveReport },
    #[error("no convergence within {} iterations", report.iterations)]
    MaxIterations { x: Vec<f64>, report: SolveReport },
    #[error(transparent)]
    Setup(#[from] crate::error::Error),
}

impl SolveError {
    pub fn report(&self) -> Option<&SolveReport> {
        match self {
            Self::Diverged { report, .. } | Self::MaxIterations { report, .. } => Some(report),
            Self::Setup(_) => None,
        }
    }
}

/// Turns a finished iteration into the public result.
pub(crate) fn finish(x: Vec<f64>, report: SolveReport) -> core::result::Result<Solution, SolveError> {
    match report.stop {
        StopReason::Converged => Ok(Solution { x, report }),
        StopReason::Diverged => Err(SolveError::Diverged { iteration: report.iterations, x, report }),
        StopReason::MaxIterations => Err(SolveError::MaxIterations { x, report }),
    }
}
