//! Method × preconditioner × part-count sweeps, one CSV row per cell.

use rayon::prelude::*;
use serde::Serialize;
use vtm_core::vtm::PreconditionerSpec;
use vtm_core::{LinearSystem, Sequential};

use crate::solver::{self, Method, SolveConfig};

pub const CSV_HEADER: &str = "matrix,method,precond,parts,iterations,converged,residual,cf,seconds";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub matrix: String,
    pub method: String,
    pub precond: String,
    pub parts: usize,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub cf: Option<f64>,
    pub seconds: f64,
}

/// Default method list: every VTM preconditioner except the scalar one,
/// then the block and point baselines.
pub fn default_cells(base: &SolveConfig, alpha: f64, depth: usize, drop: f64) -> Vec<SolveConfig> {
    let vtm = [
        PreconditionerSpec::Diagonal,
        PreconditionerSpec::OverlappedBlock,
        PreconditionerSpec::WeightedOverlappedBlock { alpha },
        PreconditionerSpec::SchurApprox { depth, drop },
    ];
    let mut cells: Vec<SolveConfig> =
        vtm.into_iter().map(|precond| SolveConfig { method: Method::Vtm, precond, ..base.clone() }).collect();
    for method in [Method::Bj, Method::Obj, Method::Jacobi, Method::Gs, Method::Sgs, Method::Sor, Method::Ssor] {
        cells.push(SolveConfig { method, ..base.clone() });
    }
    cells
}

#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub cells: Vec<SolveConfig>,
    pub parts: Vec<usize>,
    /// Compute `CF` for 2-part VTM rows.
    pub cf: bool,
    /// Record wall time; off gives byte-identical CSV across runs.
    pub timing: bool,
}

/// Expands the plan for one system: partitioned methods once per part count,
/// the point methods once.
pub fn expand(plan: &BenchPlan) -> Vec<SolveConfig> {
    let mut out = Vec::new();
    for (k, &parts) in plan.parts.iter().enumerate() {
        for c in &plan.cells {
            if c.method.partitioned() {
                out.push(SolveConfig { parts, ..c.clone() });
            } else if k == 0 {
                out.push(c.clone());
            }
        }
    }
    out
}

fn row(sys: &LinearSystem, cfg: &SolveConfig, plan: &BenchPlan) -> BenchRow {
    let fail = |e: vtm_core::Error| {
        log::warn!("{} {} {}: {e}", sys.tag, cfg.method.name(), cfg.precond_name());
        BenchRow {
            matrix: sys.tag.clone(),
            method: cfg.method.name().into(),
            precond: cfg.precond_name().into(),
            parts: if cfg.method.partitioned() { cfg.parts } else { 1 },
            iterations: 0,
            converged: false,
            residual: f64::NAN,
            cf: None,
            seconds: 0.0,
        }
    };
    let out = match solver::run(sys, cfg, &Sequential) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let cf = (plan.cf && cfg.method == Method::Vtm && out.parts == 2)
        .then(|| {
            let p = solver::partition_for(sys, cfg).ok()?;
            let w = vtm_core::vtm::build_preconditioner_with(&cfg.precond, cfg.pairing, &p).ok()?;
            vtm_core::analysis::convergence_factor(&p, &w).ok()
        })
        .flatten();
    log::info!(
        "{} {} {} N={}: {} iterations ({:?})",
        sys.tag,
        cfg.method.name(),
        cfg.precond_name(),
        out.parts,
        out.iterations,
        out.stop
    );
    BenchRow {
        matrix: sys.tag.clone(),
        method: cfg.method.name().into(),
        precond: out.precond,
        parts: out.parts,
        iterations: out.iterations,
        converged: out.converged,
        residual: out.residual,
        cf,
        seconds: if plan.timing { out.seconds } else { 0.0 },
    }
}

/// Runs every cell, `jobs` cells at a time. Rows come back in plan order.
pub fn run(
    systems: &[LinearSystem],
    plan: &BenchPlan,
    jobs: usize,
) -> Result<Vec<BenchRow>, rayon::ThreadPoolBuildError> {
    let work: Vec<(usize, SolveConfig)> =
        (0..systems.len()).flat_map(|s| expand(plan).into_iter().map(move |c| (s, c))).collect();
    if jobs <= 1 {
        return Ok(work.iter().map(|(s, c)| row(&systems[*s], c, plan)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    Ok(pool.install(|| work.par_iter().map(|(s, c)| row(&systems[*s], c, plan)).collect()))
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use vtm_core::netgen;

    fn plan() -> BenchPlan {
        BenchPlan {
            cells: default_cells(&SolveConfig::default(), 0.5, 2, 0.01),
            parts: vec![2, 4],
            cf: true,
            timing: false,
        }
    }

    #[test]
    fn csv_layout() {
        let sys = netgen::grid2d(12, 12, 1.0, 0.1, 0).unwrap();
        let rows = run(&[sys], &plan(), 1).unwrap();
        assert_eq!(rows.len(), 6 * 2 + 5);
        let csv = to_csv(&rows);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert!(rows.iter().filter(|r| r.method == "vtm" && r.parts == 2).all(|r| r.cf.is_some()));
        assert!(rows.iter().filter(|r| r.parts == 4).all(|r| r.cf.is_none()));
        assert!(rows.iter().filter(|r| r.converged).all(|r| r.iterations >= 1));
    }

    #[test]
    fn jobs_do_not_change_rows() {
        let systems = [netgen::grid2d(10, 9, 1.0, 0.1, 0).unwrap(), netgen::opamp_ring_default()];
        let a = to_csv(&run(&systems, &plan(), 1).unwrap());
        let b = to_csv(&run(&systems, &plan(), 4).unwrap());
        assert_eq!(a, b);
    }
}
