//! Classical stationary iterations used as comparison points.
//!
//! One iteration updates every unknown once (a forward plus backward sweep
//! for the symmetric variants). Stopping follows the VTM engine: relative
//! residual of the global system after each iteration.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::factor::{Factorization, SolverHint};
use crate::graph::Graph;
use crate::netgen::LinearSystem;
use crate::report::{finish, Solution, SolveError, SolveReport};
use crate::schedule::{Scheduler, Sequential};
use crate::sparse::CsrMatrix;
use crate::tearing::PartitionLabels;

/// Default relaxation factor for SOR and SSOR.
pub const DEFAULT_OMEGA: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub enum BaselineSpec {
    Jacobi,
    GaussSeidel,
    SymmetricGaussSeidel,
    Sor {
        omega: f64,
    },
    Ssor {
        omega: f64,
    },
    /// One block per part of `labels` (interface nodes go with their part).
    BlockJacobi {
        labels: PartitionLabels,
    },
    /// Parts grown by `overlap` graph layers.
    OverlappedBlockJacobi {
        labels: PartitionLabels,
        overlap: usize,
    },
    /// Arbitrary covering blocks, overlapping values averaged.
    Blocks {
        blocks: Vec<Vec<usize>>,
    },
}

impl BaselineSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Jacobi => "jacobi",
            Self::GaussSeidel => "gs",
            Self::SymmetricGaussSeidel => "sgs",
            Self::Sor { .. } => "sor",
            Self::Ssor { .. } => "ssor",
            Self::BlockJacobi { .. } => "bj",
            Self::OverlappedBlockJacobi { .. } | Self::Blocks { .. } => "obj",
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            Self::Sor { omega } | Self::Ssor { omega } => {
                if !(*omega > 0.0 && *omega < 2.0) {
                    return Err(Error::InvalidArgument(format!("omega must be in (0, 2), got {omega}")));
                }
            }
            Self::BlockJacobi { labels } | Self::OverlappedBlockJacobi { labels, .. } => {
                if labels.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: labels.len() });
                }
            }
            Self::Blocks { blocks } => {
                let mut seen = vec![false; n];
                for &v in blocks.iter().flatten() {
                    if v >= n {
                        return Err(Error::InvalidArgument(format!("block node {v} out of range")));
                    }
                    seen[v] = true;
                }
                if let Some(v) = seen.iter().position(|&s| !s) {
                    return Err(Error::InvalidArgument(format!("node {v} is in no block")));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// One block per part, in part order.
pub fn label_blocks(labels: &PartitionLabels) -> Vec<Vec<usize>> {
    let mut blocks = vec![Vec::new(); labels.n_parts()];
    for (v, &p) in labels.part_of().iter().enumerate() {
        blocks[p].push(v);
    }
    blocks
}

/// Each part grown by `o ≥ 1` breadth-first layers in the graph of `a`.
pub fn overlapped_blocks(labels: &PartitionLabels, a: &CsrMatrix, o: usize) -> Result<Vec<Vec<usize>>> {
    if o == 0 {
        return Err(Error::InvalidArgument("overlap depth must be at least 1".into()));
    }
    if labels.len() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: labels.len() });
    }
    let g = Graph::from_matrix(a);
    Ok(label_blocks(labels)
        .into_iter()
        .map(|base| {
            let dist = g.multi_source_distances(&base, o, |_| true);
            (0..a.nrows()).filter(|&v| dist[v] != usize::MAX).collect()
        })
        .collect())
}

/// Jacobi iteration matrix `−D⁻¹(L + U)`.
pub fn jacobi_iteration_matrix(a: &CsrMatrix) -> Result<DenseMatrix> {
    let d = checked_diagonal(a)?;
    let mut m = DenseMatrix::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.triplets() {
        if i != j {
            m[(i, j)] = -v / d[i];
        }
    }
    Ok(m)
}

fn checked_diagonal(a: &CsrMatrix) -> Result<Vec<f64>> {
    let d = a.diagonal();
    match d.iter().position(|&v| v == 0.0) {
        Some(row) => Err(Error::ZeroDiagonal { row }),
        None => Ok(d),
    }
}

struct Block {
    nodes: Vec<usize>,
    factor: Factorization,
    /// Rows of the block, columns outside it (global numbering).
    outside: CsrMatrix,
}

/// Factored blocks of a block Jacobi iteration.
pub struct BlockSplitting {
    blocks: Vec<Block>,
    cover: Vec<f64>,
}

impl BlockSplitting {
    pub fn new(a: &CsrMatrix, blocks: &[Vec<usize>]) -> Result<Self> {
        let n = a.nrows();
        let mut cover = vec![0.0; n];
        let mut pos = vec![usize::MAX; n];
        let mut out = Vec::with_capacity(blocks.len());
        for (k, nodes) in blocks.iter().enumerate() {
            let mut nodes = nodes.clone();
            nodes.sort_unstable();
            nodes.dedup();
            for (l, &v) in nodes.iter().enumerate() {
                pos[v] = l;
                cover[v] += 1.0;
            }
            let mut t = Vec::new();
            for (l, &v) in nodes.iter().enumerate() {
                let (cols, vals) = a.row(v);
                t.extend(cols.iter().zip(vals).filter(|(c, _)| pos[**c] == usize::MAX).map(|(&c, &x)| (l, c, x)));
            }
            let outside = CsrMatrix::from_triplets(nodes.len(), n, &t)?;
            let local = a.submatrix(&nodes, &nodes);
            let hint = if local.is_symmetric(0.0) { SolverHint::Spd } else { SolverHint::General };
            let factor = Factorization::new(&local, hint).map_err(|_| Error::SingularBlock { block: k })?;
            for &v in &nodes {
                pos[v] = usize::MAX;
            }
            out.push(Block { nodes, factor, outside });
        }
        if let Some(v) = cover.iter().position(|&c| c == 0.0) {
            return Err(Error::InvalidArgument(format!("node {v} is in no block")));
        }
        Ok(Self { blocks: out, cover })
    }

    /// One iteration; block results are combined in block order.
    pub fn step<S: Scheduler>(&self, b: &[f64], x: &[f64], sched: &S) -> Result<Vec<f64>> {
        let ys: Vec<Result<Vec<f64>>> = sched.map(self.blocks.len(), |k| {
            let blk = &self.blocks[k];
            let mut rhs = blk.outside.mul_vec(x);
            for (r, &v) in rhs.iter_mut().zip(&blk.nodes) {
                *r = b[v] - *r;
            }
            blk.factor.solve(&rhs).map_err(|_| Error::SingularBlock { block: k })
        });
        let mut next = vec![0.0; x.len()];
        for (blk, y) in self.blocks.iter().zip(ys) {
            for (&v, yv) in blk.nodes.iter().zip(y?) {
                next[v] += yv;
            }
        }
        for (xv, c) in next.iter_mut().zip(&self.cover) {
            *xv /= c;
        }
        Ok(next)
    }
}

fn row_sweep(a: &CsrMatrix, b: &[f64], d: &[f64], x: &mut [f64], i: usize, omega: f64) {
    let (cols, vals) = a.row(i);
    let mut s = b[i];
    for (&j, &v) in cols.iter().zip(vals) {
        if j != i {
            s -= v * x[j];
        }
    }
    x[i] = (1.0 - omega) * x[i] + omega * s / d[i];
}

/// Runs a baseline on the calling thread.
pub fn stationary_solve(
    sys: &LinearSystem,
    spec: &BaselineSpec,
    tol: f64,
    max_iter: usize,
) -> core::result::Result<Solution, SolveError> {
    stationary_solve_with(sys, spec, tol, max_iter, &Sequential)
}

/// Runs a baseline; block solves within an iteration go through `sched`.
pub fn stationary_solve_with<S: Scheduler>(
    sys: &LinearSystem,
    spec: &BaselineSpec,
    tol: f64,
    max_iter: usize,
    sched: &S,
) -> core::result::Result<Solution, SolveError> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")).into());
    }
    let a = &sys.a;
    let n = sys.n();
    spec.validate(n)?;
    let blocks = match spec {
        BaselineSpec::BlockJacobi { labels } => Some(label_blocks(labels)),
        BaselineSpec::OverlappedBlockJacobi { labels, overlap } => Some(overlapped_blocks(labels, a, *overlap)?),
        BaselineSpec::Blocks { blocks } => Some(blocks.clone()),
        _ => None,
    };
    let splitting = blocks.map(|bl| BlockSplitting::new(a, &bl)).transpose()?;
    let d = if splitting.is_none() { checked_diagonal(a)? } else { Vec::new() };

    let mut x = vec![0.0; n];
    let mut report = SolveReport::new();
    while report.iterations < max_iter {
        match spec {
            BaselineSpec::Jacobi => {
                let ax = a.mul_vec(&x);
                x = (0..n).map(|i| x[i] + (sys.b[i] - ax[i]) / d[i]).collect();
            }
            BaselineSpec::GaussSeidel => (0..n).for_each(|i| row_sweep(a, &sys.b, &d, &mut x, i, 1.0)),
            BaselineSpec::Sor { omega } => (0..n).for_each(|i| row_sweep(a, &sys.b, &d, &mut x, i, *omega)),
            BaselineSpec::SymmetricGaussSeidel | BaselineSpec::Ssor { .. } => {
                let omega = if let BaselineSpec::Ssor { omega } = spec { *omega } else { 1.0 };
                (0..n).for_each(|i| row_sweep(a, &sys.b, &d, &mut x, i, omega));
                (0..n).rev().for_each(|i| row_sweep(a, &sys.b, &d, &mut x, i, omega));
            }
            _ => x = splitting.as_ref().expect("block method").step(&sys.b, &x, sched)?,
        }
        let r = crate::relative_residual(a, &x, &sys.b);
        if report.push(r, 0.0, tol).is_some() {
            break;
        }
    }
    finish(x, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen;
    use crate::netgen;
    use crate::report::StopReason;
    use crate::tearing::{select_interface, Strategy};

    fn sys_of(rows: &[&[f64]], b: &[f64]) -> LinearSystem {
        let a = CsrMatrix::from_dense(&DenseMatrix::from_rows(rows).unwrap());
        LinearSystem::new(a, b.to_vec(), "t").unwrap()
    }

    #[test]
    fn jacobi_on_diagonal() {
        let s = sys_of(&[&[2.0, 0.0], &[0.0, 4.0]], &[2.0, 4.0]);
        let sol = stationary_solve(&s, &BaselineSpec::Jacobi, 1e-12, 10).unwrap();
        assert_eq!(sol.x, std::vec![1.0, 1.0]);
        assert_eq!(sol.report.iterations, 1);
    }

    #[test]
    fn gs_on_two_by_two() {
        let s = sys_of(&[&[2.0, -1.0], &[-1.0, 2.0]], &[1.0, 1.0]);
        let sol = stationary_solve(&s, &BaselineSpec::GaussSeidel, 1e-10, 200).unwrap();
        for v in sol.x {
            assert!((v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn opamp_defeats_point_methods() {
        let s = netgen::opamp_ring_default();
        for spec in [
            BaselineSpec::Jacobi,
            BaselineSpec::GaussSeidel,
            BaselineSpec::SymmetricGaussSeidel,
            BaselineSpec::Sor { omega: 1.0 },
            BaselineSpec::Sor { omega: 1.5 },
            BaselineSpec::Ssor { omega: 1.5 },
        ] {
            match stationary_solve(&s, &spec, 1e-8, 200) {
                Err(SolveError::Diverged { iteration, .. }) => assert!(iteration <= 200),
                other => panic!("{spec:?}: {other:?}"),
            }
        }
        let rho = eigen::spectral_radius(&jacobi_iteration_matrix(&s.a).unwrap());
        assert!(rho >= 1.0);
    }

    #[test]
    fn zero_diagonal_and_bad_omega() {
        let s = sys_of(&[&[0.0, 1.0], &[1.0, 2.0]], &[1.0, 1.0]);
        assert!(matches!(
            stationary_solve(&s, &BaselineSpec::GaussSeidel, 1e-8, 5),
            Err(SolveError::Setup(Error::ZeroDiagonal { row: 0 }))
        ));
        assert!(stationary_solve(&s, &BaselineSpec::Sor { omega: 2.0 }, 1e-8, 5).is_err());
    }

    #[test]
    fn singular_block() {
        let s = sys_of(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 0.0, 1.0]], &[1.0; 3]);
        let labels = PartitionLabels::new(2, std::vec![0, 0, 1], &[]).unwrap();
        let r = stationary_solve(&s, &BaselineSpec::BlockJacobi { labels }, 1e-8, 5);
        assert!(matches!(r, Err(SolveError::Setup(Error::SingularBlock { block: 0 }))));
    }

    #[test]
    fn path_overlap() {
        let s = sys_of(&[&[2.0, -1.0, 0.0], &[-1.0, 2.0, -1.0], &[0.0, -1.0, 2.0]], &[1.0; 3]);
        let labels = PartitionLabels::new(2, std::vec![0, 0, 1], &[]).unwrap();
        let b = overlapped_blocks(&labels, &s.a, 1).unwrap();
        assert_eq!(b, std::vec![std::vec![0, 1, 2], std::vec![1, 2]]);
        assert!(overlapped_blocks(&labels, &s.a, 0).is_err());
    }

    #[test]
    fn grid_overlap_sizes() {
        let s = netgen::grid2d(6, 6, 1.0, 0.1, 0).unwrap();
        let part_of = (0..36).map(|v| usize::from(netgen::grid_coords([6, 6, 1], v)[0] >= 3)).collect();
        let labels = PartitionLabels::new(2, part_of, &[]).unwrap();
        for blk in overlapped_blocks(&labels, &s.a, 1).unwrap() {
            assert!(blk.len() >= 24);
        }
    }

    #[test]
    fn one_block_is_direct() {
        let s = netgen::grid2d(7, 7, 1.0, 0.1, 3).unwrap();
        let sol =
            stationary_solve(&s, &BaselineSpec::BlockJacobi { labels: PartitionLabels::single(49) }, 1e-10, 5).unwrap();
        assert_eq!(sol.report.iterations, 1);
    }

    #[test]
    fn grid_ordering_of_baselines() {
        let s = netgen::grid2d(12, 12, 1.0, 0.1, 1).unwrap();
        let labels = select_interface(&s.a, 2, Strategy::Geometric { dims: [12, 12, 1] }).unwrap();
        let it = |spec: BaselineSpec| stationary_solve(&s, &spec, 1e-6, 5000).unwrap().report.iterations;
        let jac = it(BaselineSpec::Jacobi);
        let gs = it(BaselineSpec::GaussSeidel);
        let bj = it(BaselineSpec::BlockJacobi { labels: labels.clone() });
        let obj = it(BaselineSpec::OverlappedBlockJacobi { labels, overlap: 1 });
        assert!(gs < jac);
        assert!(bj < gs);
        assert!(obj < bj);
    }

    #[test]
    fn max_iterations_reported() {
        let s = netgen::grid2d(10, 10, 1.0, 0.01, 0).unwrap();
        match stationary_solve(&s, &BaselineSpec::Jacobi, 1e-12, 3) {
            Err(SolveError::MaxIterations { report, .. }) => {
                assert_eq!(report.iterations, 3);
                assert_eq!(report.stop, StopReason::MaxIterations);
            }
            other => panic!("{other:?}"),
        }
    }
}
