//! One solve or analysis run, as driven by `vtm solve`, `vtm analyze` and
//! the benchmark sweep.

use std::time::Instant;

use serde::Serialize;
use vtm_core::analysis::{self, Theorem1Options};
use vtm_core::baselines::{overlapped_blocks, stationary_solve_with, BaselineSpec};
use vtm_core::report::{SolveError, SolveReport, StopReason};
use vtm_core::tearing::{
    labels_from_interface, select_interface, wire_tear, Partition, PartitionLabels, SplitWeights, Strategy,
};
use vtm_core::vtm::{build_preconditioner_with, vtm_solve, Pairing, PreconditionerSpec};
use vtm_core::{Error, LinearSystem, Scheduler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Vtm,
    Jacobi,
    Gs,
    Sgs,
    Sor,
    Ssor,
    Bj,
    Obj,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Vtm => "vtm",
            Self::Jacobi => "jacobi",
            Self::Gs => "gs",
            Self::Sgs => "sgs",
            Self::Sor => "sor",
            Self::Ssor => "ssor",
            Self::Bj => "bj",
            Self::Obj => "obj",
        }
    }

    /// Whether the method works on a partition.
    pub fn partitioned(&self) -> bool {
        matches!(self, Self::Vtm | Self::Bj | Self::Obj)
    }
}

/// How interfacial nodes are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterfaceChoice {
    /// Coordinate bisection for grids, breadth-first bisection otherwise.
    #[default]
    Auto,
    Bfs,
    Geometric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub method: Method,
    pub parts: usize,
    pub precond: PreconditionerSpec,
    pub pairing: Pairing,
    pub omega: f64,
    /// OBJ overlap beyond the shared interface, in graph layers.
    pub overlap: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub interface_choice: InterfaceChoice,
    /// Explicit interfacial nodes (0-based); overrides `interface_choice`.
    pub interface: Vec<usize>,
    /// Manual per-node wire admittances (0-based nodes); each node is
    /// added to the interface.
    pub wire_w: Vec<(usize, f64)>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            method: Method::Vtm,
            parts: 2,
            precond: PreconditionerSpec::OverlappedBlock,
            pairing: Pairing::Matched,
            omega: vtm_core::baselines::DEFAULT_OMEGA,
            overlap: 0,
            tol: vtm_core::report::DEFAULT_TOL,
            max_iter: 10_000,
            interface_choice: InterfaceChoice::Auto,
            interface: Vec::new(),
            wire_w: Vec::new(),
        }
    }
}

impl SolveConfig {
    /// Preconditioner column of reports: empty for the baselines.
    pub fn precond_name(&self) -> &'static str {
        if self.method == Method::Vtm {
            self.precond.name()
        } else {
            ""
        }
    }
}

/// Interface labels for `cfg`.
pub fn labels_for(sys: &LinearSystem, cfg: &SolveConfig) -> Result<PartitionLabels, Error> {
    let mut iface: Vec<usize> = cfg.interface.iter().copied().chain(cfg.wire_w.iter().map(|&(v, _)| v)).collect();
    iface.sort_unstable();
    iface.dedup();
    if !iface.is_empty() {
        let l = labels_from_interface(&sys.a, &iface)?;
        if l.n_parts() != cfg.parts {
            return Err(Error::InvalidArgument(format!(
                "the given interface splits the system into {} parts, not {}",
                l.n_parts(),
                cfg.parts
            )));
        }
        return Ok(l);
    }
    let strategy = match (cfg.interface_choice, sys.grid_dims) {
        (InterfaceChoice::Bfs, _) | (InterfaceChoice::Auto, None) => Strategy::BfsGrow,
        (_, Some(dims)) => Strategy::Geometric { dims },
        (InterfaceChoice::Geometric, None) => {
            return Err(Error::InvalidArgument("geometric bisection needs grid dimensions".into()));
        }
    };
    select_interface(&sys.a, cfg.parts, strategy)
}

pub fn partition_for(sys: &LinearSystem, cfg: &SolveConfig) -> Result<Partition, Error> {
    wire_tear(sys, &labels_for(sys, cfg)?, &SplitWeights::Equal)
}

/// Baseline corresponding to `cfg`, given its partition for block methods.
pub fn baseline_spec(sys: &LinearSystem, cfg: &SolveConfig, p: Option<&Partition>) -> Result<BaselineSpec, Error> {
    Ok(match cfg.method {
        Method::Vtm => return Err(Error::InvalidArgument("vtm is not a baseline".into())),
        Method::Jacobi => BaselineSpec::Jacobi,
        Method::Gs => BaselineSpec::GaussSeidel,
        Method::Sgs => BaselineSpec::SymmetricGaussSeidel,
        Method::Sor => BaselineSpec::Sor { omega: cfg.omega },
        Method::Ssor => BaselineSpec::Ssor { omega: cfg.omega },
        Method::Bj => BaselineSpec::BlockJacobi { labels: p.expect("partition").labels.clone() },
        Method::Obj => {
            let p = p.expect("partition");
            if cfg.overlap == 0 {
                // subdomains overlap exactly on the interface
                BaselineSpec::Blocks { blocks: (0..p.n_parts()).map(|k| p.subdomain_nodes(k)).collect() }
            } else {
                BaselineSpec::Blocks { blocks: overlapped_blocks(&p.labels, &sys.a, cfg.overlap)? }
            }
        }
    })
}

/// Result of one run, converged or not.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub system: String,
    pub n: usize,
    pub method: Method,
    pub precond: String,
    pub pairing: &'static str,
    pub parts: usize,
    pub interface_size: usize,
    pub stop: StopReason,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub twin_mismatch: f64,
    pub seconds: f64,
    pub residual_history: Vec<f64>,
    #[serde(skip)]
    pub x: Vec<f64>,
}

/// Runs `cfg` on `sys`. Setup failures are errors; divergence and the
/// iteration limit are reported in the outcome.
pub fn run<S: Scheduler>(sys: &LinearSystem, cfg: &SolveConfig, sched: &S) -> Result<Outcome, Error> {
    run_with(sys, cfg, None, sched)
}

/// [`run`] with a partition prepared by the caller, used instead of the
/// one `cfg` describes.
pub fn run_with<S: Scheduler>(
    sys: &LinearSystem,
    cfg: &SolveConfig,
    partition: Option<Partition>,
    sched: &S,
) -> Result<Outcome, Error> {
    let start = Instant::now();
    let partition = match partition {
        Some(p) if cfg.method.partitioned() => Some(p),
        _ if cfg.method.partitioned() => Some(partition_for(sys, cfg)?),
        _ => None,
    };
    let result = match cfg.method {
        Method::Vtm => {
            let p = partition.as_ref().expect("vtm is partitioned");
            let prec = build_preconditioner_with(&cfg.precond, cfg.pairing, p)?.with_overrides(p, &cfg.wire_w)?;
            vtm_solve(p, &prec, cfg.tol, cfg.max_iter, sched)
        }
        _ => stationary_solve_with(sys, &baseline_spec(sys, cfg, partition.as_ref())?, cfg.tol, cfg.max_iter, sched),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (x, report) = match result {
        Ok(sol) => (sol.x, sol.report),
        Err(SolveError::Diverged { x, report, .. } | SolveError::MaxIterations { x, report }) => (x, report),
        Err(SolveError::Setup(e)) => return Err(e),
    };
    Ok(outcome(sys, cfg, partition.as_ref(), x, report, seconds))
}

fn outcome(
    sys: &LinearSystem,
    cfg: &SolveConfig,
    p: Option<&Partition>,
    x: Vec<f64>,
    report: SolveReport,
    seconds: f64,
) -> Outcome {
    Outcome {
        system: sys.tag.clone(),
        n: sys.n(),
        method: cfg.method,
        precond: cfg.precond_name().into(),
        pairing: if cfg.method == Method::Vtm { cfg.pairing.name() } else { "" },
        parts: p.map_or(1, |p| p.n_parts()),
        interface_size: p.map_or(0, |p| p.interface().len()),
        stop: report.stop,
        iterations: report.iterations,
        converged: report.converged,
        residual: report.final_residual(),
        twin_mismatch: report.twin_mismatch,
        seconds,
        residual_history: report.residual_history,
        x,
    }
}

/// Ticks used for the observed tail rate.
pub const TAIL_WINDOW: usize = 10;

/// Convergence analysis of a 2-part VTM configuration.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub system: String,
    pub precond: String,
    pub pairing: &'static str,
    pub interface_size: usize,
    pub system_spd: bool,
    pub s_spd: [bool; 2],
    pub s_snnd: [bool; 2],
    pub w_spd: [bool; 2],
    pub rho_t1: f64,
    pub rho_t2: f64,
    pub rho_t1t2: f64,
    pub cf: f64,
    pub product_bound: Option<bool>,
    pub predicted_tail_rate: f64,
    pub observed_tail_rate: Option<f64>,
    pub converged: Option<bool>,
    pub iterations: usize,
    pub fixed_point_error: Option<f64>,
    pub failures: Vec<String>,
}

pub fn analyze(sys: &LinearSystem, cfg: &SolveConfig) -> Result<AnalyzeReport, Error> {
    if cfg.parts != 2 {
        return Err(Error::InvalidArgument("analysis needs --parts 2".into()));
    }
    let p = partition_for(sys, cfg)?;
    let prec = build_preconditioner_with(&cfg.precond, cfg.pairing, &p)?.with_overrides(&p, &cfg.wire_w)?;
    let rep = analysis::verify_theorem1(
        &p,
        &prec,
        &Theorem1Options { tol: cfg.tol, max_iter: cfg.max_iter, ..Default::default() },
    )?;
    let observed = if rep.converged.is_some() {
        match vtm_solve(&p, &prec, cfg.tol, cfg.max_iter, &vtm_core::Sequential) {
            Ok(s) => analysis::tail_rate(&s.report.residual_history, true, TAIL_WINDOW),
            Err(e) => e.report().and_then(|r| analysis::tail_rate(&r.residual_history, false, TAIL_WINDOW)),
        }
    } else {
        None
    };
    Ok(AnalyzeReport {
        system: sys.tag.clone(),
        precond: cfg.precond.name().into(),
        pairing: cfg.pairing.name(),
        interface_size: p.interface().len(),
        system_spd: rep.system_spd,
        s_spd: rep.s_spd,
        s_snnd: rep.s_snnd,
        w_spd: rep.w_spd,
        rho_t1: rep.rho_t[0],
        rho_t2: rep.rho_t[1],
        rho_t1t2: rep.rho,
        cf: rep.cf,
        product_bound: rep.product_bound,
        predicted_tail_rate: rep.rho,
        observed_tail_rate: observed,
        converged: rep.converged,
        iterations: rep.iterations,
        fixed_point_error: rep.fixed_point_error,
        failures: rep.failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use vtm_core::netgen;
    use vtm_core::Sequential;

    #[test]
    fn opamp_with_manual_wires() {
        let sys = netgen::opamp_ring_default();
        let cfg = SolveConfig {
            precond: PreconditionerSpec::ScalarIdentity { alpha: 1.0 },
            wire_w: vec![(1, 0.5), (2, 20000.0)],
            tol: 1e-8,
            max_iter: 500,
            ..Default::default()
        };
        let out = run(&sys, &cfg, &Sequential).unwrap();
        assert!(out.converged, "{:?}", out.stop);
        assert_eq!(out.interface_size, 2);
        let jac = run(&sys, &SolveConfig { method: Method::Jacobi, ..cfg.clone() }, &Sequential).unwrap();
        assert_eq!(jac.stop, StopReason::Diverged);
        assert_eq!(jac.parts, 1);
        let bad = SolveConfig { parts: 3, ..cfg };
        assert!(run(&sys, &bad, &Sequential).is_err());
    }

    #[test]
    fn obj_matches_vtm_ob_on_a_grid() {
        let sys = netgen::grid2d(20, 20, 1.0, 0.1, 1).unwrap();
        let vtm = run(&sys, &SolveConfig::default(), &Sequential).unwrap();
        let obj = run(&sys, &SolveConfig { method: Method::Obj, ..Default::default() }, &Sequential).unwrap();
        assert!(vtm.iterations.abs_diff(obj.iterations) <= 1, "{} {}", vtm.iterations, obj.iterations);
    }

    #[test]
    fn analysis_report() {
        let sys = netgen::grid2d(8, 8, 1.0, 0.1, 1).unwrap();
        let cfg = SolveConfig { precond: PreconditionerSpec::Diagonal, tol: 1e-12, ..Default::default() };
        let r = analyze(&sys, &cfg).unwrap();
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        assert!(r.rho_t1t2 < 1.0 && r.product_bound == Some(true));
        let obs = r.observed_tail_rate.unwrap();
        assert!((obs - r.rho_t1t2).abs() <= 0.15 * r.rho_t1t2, "{obs} {}", r.rho_t1t2);
        assert!(analyze(&sys, &SolveConfig { parts: 3, ..cfg }).is_err());
    }
}
