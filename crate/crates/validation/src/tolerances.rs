//! Thresholds used by the acceptance run. Each constant is pinned to the
//! criterion it serves; nothing in the acceptance run compares against a bare
//! literal.

// op-amp ring with hand-picked wire admittances

/// Relative residual at which the op-amp VTM run stops.
pub const OPAMP_TOL: f64 = 1e-8;
/// Relative error against the direct solve.
pub const OPAMP_ERROR: f64 = 1e-6;
pub const OPAMP_MAX_ITER: usize = 500;
/// Every point method must cross the divergence threshold this early.
pub const OPAMP_DIVERGE_WITHIN: usize = 200;
pub const OPAMP_SECONDS: f64 = 1.0;
/// Wire admittances at (0-based) nodes 1 and 2.
pub const OPAMP_WIRE_W: [(usize, f64); 2] = [(1, 0.5), (2, 20000.0)];

// convergence on SPD systems

pub const THEOREM1_SYSTEMS: usize = 200;
pub const THEOREM1_MAX_N: usize = 500;
/// Stopping tolerance of each verification solve.
pub const THEOREM1_TOL: f64 = 1e-8;
pub const THEOREM1_MAX_ITER: usize = 50_000;
/// Allowed distance between the solved interface values and `(S1+S2)⁻¹r`.
pub const THEOREM1_FIXED_POINT: f64 = 1e-5;
pub const THEOREM1_SECONDS: f64 = 120.0;

// observed rate against the two-tick spectral radius

pub const RATE_INSTANCES: usize = 30;
/// Minimum relative gap `(|λ1| − |λ2|)/|λ1|` of `T1·T2`.
pub const RATE_MIN_GAP: f64 = 0.05;
/// Allowed relative distance between the tail rate and `ρ(T1·T2)`.
pub const RATE_REL: f64 = 0.15;
pub const RATE_WINDOW: usize = 10;
/// Run long enough for the tail to settle.
pub const RATE_TOL: f64 = 1e-11;
pub const RATE_MIN_TICKS: usize = 4;
/// Decay of the runner-up mode, relative to the leading one, required
/// before the measurement window starts.
pub const RATE_SETTLE: f64 = 100.0;

// exact Schur admittance

pub const EXACT_INSTANCES: usize = 20;
pub const EXACT_TICKS: usize = 2;
/// Residual that counts as the fixed point.
pub const EXACT_RESIDUAL: f64 = 1e-10;

// interface fixed point against the direct solve

pub const FIXED_POINT_INSTANCES: usize = 50;
pub const FIXED_POINT_REL: f64 = 1e-9;

// dominance, Schur complement, square root and similarity identities

pub const DOMINANCE_INSTANCES: usize = 200;
pub const DOMINANCE_MAX_N: usize = 200;
pub const SCHUR_SPD_INSTANCES: usize = 500;
pub const SQRT_INSTANCES: usize = 100;
/// `‖RᵀR − Z‖_F / ‖Z‖_F`.
pub const SQRT_RESIDUAL: f64 = 1e-9;
pub const SIMILARITY_INSTANCES: usize = 100;
/// Eigenvalue agreement; `lemma6_check` applies the same relative bound.
pub const SIMILARITY_REL: f64 = 1e-8;

// method ordering on the large grids

pub const ORDERING_TOL: f64 = 1e-6;
pub const ORDERING_MAX_ITER: usize = 20_000;
pub const WOB_ALPHAS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
pub const SCA_DEPTH: usize = 2;
pub const SCA_DROP: f64 = 0.01;
/// `|VTM_OB − OBJ|` allowed by stopping granularity.
pub const OB_OBJ_SLACK: usize = 1;
pub const ORDERING_SECONDS: f64 = 600.0;

// scaling with the number of subdomains

pub const SCALING_PARTS: [usize; 4] = [2, 4, 8, 16];
pub const SCALING_MAX_RATIO: f64 = 2.0;

// determinism

pub const PARALLEL_CONFIGS: usize = 20;
pub const PARALLEL_THREADS: usize = 4;
pub const ROUND_TRIP_SYSTEMS: usize = 100;
