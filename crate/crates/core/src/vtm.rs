//! The VTM iteration engine and its preconditioners.
//!
//! Every wire end `e` in subdomain `p` obeys the line equation
//! `i_e^k + W_e u_e^k = W_e u_opp^{k−τ} − i_opp^{k−τ}`, where `opp` is the
//! other end. Substituting it into the subdomain equations gives the
//! augmented local system `[[C_p + Σ W_e, E_p], [F_p, D_p]]`, factored
//! once and solved every tick with boundary data from tick `k − τ` only.
//!
//! Admittance blocks are built per bundle (all wires between one pair of
//! subdomains `p < q`) from the data of `q`, the far end seen from `p`.
//! Both ends of a bundle share the block, so each bundle is a lossless
//! line with a single symmetric admittance. [`Pairing::PerEnd`] instead
//! gives each end the block of the subdomain across from it.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::eigen;
use crate::error::{Error, Result};
use crate::factor::{FactorKind, Factorization, SolverHint};
use crate::graph::Graph;
use crate::report::{finish, Solution, SolveError, SolveReport};
use crate::schedule::Scheduler;
use crate::sparse::CsrMatrix;
use crate::tearing::{Partition, Subdomain};

/// Choice of characteristic admittance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PreconditionerSpec {
    /// `W = α·I`.
    ScalarIdentity { alpha: f64 },
    /// Diagonal of the far subdomain's twin block.
    Diagonal,
    /// The far subdomain's twin block `C_q`.
    OverlappedBlock,
    /// `α·C_q`.
    WeightedOverlappedBlock { alpha: f64 },
    /// Schur complement of the far subdomain over the inner nodes
    /// within graph distance `depth` of its twins, with small fill dropped.
    /// `depth = usize::MAX` and `drop = 0` give the exact complement.
    SchurApprox { depth: usize, drop: f64 },
}

impl PreconditionerSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::ScalarIdentity { alpha } | Self::WeightedOverlappedBlock { alpha } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
                }
            }
            Self::SchurApprox { depth, drop } => {
                if depth == 0 {
                    return Err(Error::InvalidArgument("SCA depth must be at least 1".into()));
                }
                if !(0.0..1.0).contains(&drop) {
                    return Err(Error::InvalidArgument(format!("SCA drop must be in [0, 1), got {drop}")));
                }
            }
            Self::Diagonal | Self::OverlappedBlock => {}
        }
        Ok(())
    }

    /// Short name used in reports and CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            Self::ScalarIdentity { .. } => "scalar",
            Self::Diagonal => "diag",
            Self::OverlappedBlock => "ob",
            Self::WeightedOverlappedBlock { .. } => "wob",
            Self::SchurApprox { .. } => "sca",
        }
    }
}

/// Per-bundle admittance blocks. `blocks[b][s]` is used by the end of
/// bundle `b` on side `s` (0 = `bundle.p`, 1 = `bundle.q`) and is indexed
/// by the bundle's node order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Preconditioner {
    pub blocks: Vec<[CsrMatrix; 2]>,
}

impl Preconditioner {
    /// True when both ends of every bundle use the same block.
    pub fn is_matched(&self) -> bool {
        self.blocks.iter().all(|[a, b]| a == b)
    }

    /// Replaces the admittance of a node's wires by a scalar on both ends,
    /// decoupling it from the other wires of its bundles.
    pub fn override_node(&mut self, partition: &Partition, node: usize, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidArgument(format!("wire admittance {value} must be positive")));
        }
        let mut hit = false;
        for (b, bundle) in partition.bundles.iter().enumerate() {
            let Some(k) = bundle.nodes.iter().position(|&v| v == node) else { continue };
            hit = true;
            for side in 0..2 {
                let w = &self.blocks[b][side];
                let mut t: Vec<_> = w.triplets().filter(|&(i, j, _)| i != k && j != k).collect();
                t.push((k, k, value));
                self.blocks[b][side] = CsrMatrix::from_triplets(w.nrows(), w.ncols(), &t)?;
            }
        }
        if !hit {
            return Err(Error::InvalidArgument(format!("node {node} has no wire")));
        }
        Ok(())
    }

    /// Applies several overrides.
    pub fn with_overrides(mut self, partition: &Partition, overrides: &[(usize, f64)]) -> Result<Self> {
        for &(v, w) in overrides {
            self.override_node(partition, v, w)?;
        }
        Ok(self)
    }
}

fn diag_only(m: &CsrMatrix) -> CsrMatrix {
    CsrMatrix::from_diagonal(&m.diagonal())
}

/// How the two ends of a bundle share admittance blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Pairing {
    /// One block per bundle, built from `q`.
    #[default]
    Matched,
    /// Each end uses the block built from the subdomain on the other end.
    /// Exact Schur blocks then cancel both reflections; in general the
    /// iteration is not covered by the two-part theory.
    PerEnd,
}

impl Pairing {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Matched => "matched",
            Self::PerEnd => "per-end",
        }
    }
}

/// Builds matched admittance blocks for every bundle.
pub fn build_preconditioner(spec: &PreconditionerSpec, p: &Partition) -> Result<Preconditioner> {
    build_preconditioner_with(spec, Pairing::Matched, p)
}

/// Builds the admittance blocks of every bundle.
pub fn build_preconditioner_with(spec: &PreconditionerSpec, pairing: Pairing, p: &Partition) -> Result<Preconditioner> {
    spec.validate()?;
    let mut sca_cache: BTreeMap<usize, SchurApproxData> = BTreeMap::new();
    let mut blocks = Vec::with_capacity(p.bundles.len());
    for bundle in &p.bundles {
        // block built from the data of the subdomain on `side`
        let mut make = |side: usize| -> Result<CsrMatrix> {
            let q = bundle.subdomain(side);
            let idx = bundle.local(side);
            let sub = &p.subdomains[q];
            let cq = sub.c.submatrix(idx, idx);
            Ok(match *spec {
                PreconditionerSpec::ScalarIdentity { alpha } => CsrMatrix::from_diagonal(&vec![alpha; idx.len()]),
                PreconditionerSpec::Diagonal => diag_only(&cq),
                PreconditionerSpec::OverlappedBlock => cq,
                PreconditionerSpec::WeightedOverlappedBlock { alpha } => cq.scaled(alpha),
                PreconditionerSpec::SchurApprox { depth, drop } => {
                    if let alloc::collections::btree_map::Entry::Vacant(e) = sca_cache.entry(q) {
                        e.insert(SchurApproxData::new(p, q, depth)?);
                    }
                    let s = sca_cache[&q].block(sub, idx)?;
                    repair_spd(sparsify(&s, &cq, drop))?
                }
            })
        };
        let far = make(1)?;
        let pair = match pairing {
            Pairing::Matched => [far.clone(), far],
            Pairing::PerEnd => [far, make(0)?],
        };
        blocks.push(pair);
    }
    Ok(Preconditioner { blocks })
}

/// Factored inner block of a subdomain restricted to nodes near its twins.
struct SchurApproxData {
    /// Local inner indices kept.
    sel: Vec<usize>,
    factor: Option<Factorization>,
}

impl SchurApproxData {
    fn new(p: &Partition, q: usize, depth: usize) -> Result<Self> {
        let sub = &p.subdomains[q];
        let sys = &p.system;
        let g = Graph::from_matrix(&sys.a);
        let labels = &p.labels;
        let dist = g.multi_source_distances(&sub.twins, depth, |u| !labels.is_interface(u) && labels.part_of()[u] == q);
        let sel: Vec<usize> = (0..sub.n_inner()).filter(|&k| dist[sub.inner[k]] != usize::MAX).collect();
        let factor = if sel.is_empty() {
            None
        } else {
            let dt = sub.d.submatrix(&sel, &sel);
            let hint = if sys.symmetric { SolverHint::Spd } else { SolverHint::General };
            Some(Factorization::new(&dt, hint).map_err(|_| Error::SingularInner { subdomain: q })?)
        };
        Ok(Self { sel, factor })
    }

    /// `C[idx, idx] − Ẽ[idx, :]·D̃⁻¹·F̃[:, idx]` as a dense block.
    fn block(&self, sub: &Subdomain, idx: &[usize]) -> Result<DenseMatrix> {
        let mut s = sub.c.submatrix(idx, idx).to_dense();
        let Some(factor) = &self.factor else { return Ok(s) };
        let et = sub.e.submatrix(idx, &self.sel);
        let ft = sub.f.submatrix(&self.sel, idx).to_dense();
        for j in 0..idx.len() {
            let z = factor.solve(&ft.column(j))?;
            let ez = et.mul_vec(&z);
            for i in 0..idx.len() {
                s[(i, j)] -= ez[i];
            }
        }
        Ok(s)
    }
}

/// Drops `|w_ij| < δ·max_j |w_ij|` outside the pattern of `c`, then
/// symmetrizes.
fn sparsify(s: &DenseMatrix, c: &CsrMatrix, drop: f64) -> DenseMatrix {
    let n = s.nrows();
    let mut w = s.clone();
    for i in 0..n {
        let rmax = s.row(i).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for j in 0..n {
            if i != j && s[(i, j)].abs() < drop * rmax && !c.contains(i, j) {
                w[(i, j)] = 0.0;
            }
        }
    }
    w.symmetric_part()
}

/// Shifts a symmetric matrix by `μI`, `μ = |λ_min| + 1e-8·trace/n`, when it
/// is not SPD.
fn repair_spd(w: DenseMatrix) -> Result<CsrMatrix> {
    let sparse = CsrMatrix::from_dense(&w);
    let n = w.nrows();
    if n == 0 {
        return Ok(sparse);
    }
    if let Ok(f) = Factorization::new(&sparse, SolverHint::Spd) {
        if f.kind() == FactorKind::Cholesky {
            return Ok(sparse);
        }
    }
    let ev = eigen::sym_eigenvalues(&w).map_err(|e| Error::PreconditionerFailure(format!("{e}")))?;
    let mu = ev[0].abs() + 1e-8 * w.trace().abs() / n as f64;
    let mut shifted = w;
    for i in 0..n {
        shifted[(i, i)] += mu;
    }
    if !eigen::is_spd(&shifted) {
        return Err(Error::PreconditionerFailure("admittance block is not SPD after shifting".into()));
    }
    Ok(CsrMatrix::from_dense(&shifted))
}

/// Delayed boundary values of one wire end, a ring of depth `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EndHistory {
    u: Vec<Vec<f64>>,
    i: Vec<Vec<f64>>,
    head: usize,
}

impl EndHistory {
    fn new(len: usize, tau: usize) -> Self {
        Self { u: vec![vec![0.0; len]; tau], i: vec![vec![0.0; len]; tau], head: 0 }
    }

    pub fn tau(&self) -> usize {
        self.u.len()
    }

    /// Values written `τ` ticks ago.
    pub fn delayed(&self) -> (&[f64], &[f64]) {
        (&self.u[self.head], &self.i[self.head])
    }

    fn push(&mut self, u: Vec<f64>, i: Vec<f64>) {
        self.u[self.head] = u;
        self.i[self.head] = i;
        self.head = (self.head + 1) % self.u.len();
    }
}

/// Voltages and inflow currents of every wire end, zero-initialized.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryState {
    pub ends: Vec<[EndHistory; 2]>,
}

impl BoundaryState {
    pub fn new(p: &Partition) -> Result<Self> {
        let mut ends = Vec::with_capacity(p.bundles.len());
        for b in &p.bundles {
            let tau = p.wires[b.wires[0]].tau;
            if tau == 0 || b.wires.iter().any(|&w| p.wires[w].tau != tau) {
                return Err(Error::InvalidArgument(format!(
                    "wires between subdomains {} and {} need one common positive delay",
                    b.p, b.q
                )));
            }
            ends.push([EndHistory::new(b.len(), tau), EndHistory::new(b.len(), tau)]);
        }
        Ok(Self { ends })
    }
}

/// Output of one local solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOutput {
    /// Local solution, twins then inner nodes.
    pub x: Vec<f64>,
    /// `(bundle, side, u, i)` for each wire end of the subdomain.
    pub ends: Vec<(usize, usize, Vec<f64>, Vec<f64>)>,
}

/// Factored augmented system of one subdomain.
#[derive(Debug, Clone)]
pub struct LocalSolver {
    pub subdomain: usize,
    factor: Factorization,
    rhs: Vec<f64>,
    /// `(bundle, side)` of every end in this subdomain.
    ends: Vec<(usize, usize)>,
}

impl LocalSolver {
    pub fn new(p: &Partition, prec: &Preconditioner, id: usize) -> Result<Self> {
        let sub = &p.subdomains[id];
        let t = sub.n_twins();
        let mut extra = Vec::new();
        let mut ends = Vec::new();
        for (b, bundle) in p.bundles.iter().enumerate() {
            for side in 0..2 {
                if bundle.subdomain(side) != id {
                    continue;
                }
                let idx = bundle.local(side);
                let w = &prec.blocks[b][side];
                if w.nrows() != idx.len() || w.ncols() != idx.len() {
                    return Err(Error::DimensionMismatch { expected: idx.len(), found: w.nrows() });
                }
                extra.extend(w.triplets().map(|(i, j, v)| (idx[i], idx[j], v)));
                ends.push((b, side));
            }
        }
        let extra = CsrMatrix::from_triplets(t, t, &extra)?;
        let k = sub.stitched(Some(&extra));
        let hint = if k.is_symmetric(0.0) { SolverHint::Spd } else { SolverHint::General };
        let factor = Factorization::new(&k, hint).map_err(|_| Error::LocalSingular { subdomain: id })?;
        Ok(Self { subdomain: id, factor, rhs: sub.local_rhs(), ends })
    }

    /// Solves with boundary values read from `state` and returns the new
    /// local solution and outgoing end values.
    pub fn solve(&self, p: &Partition, prec: &Preconditioner, state: &BoundaryState) -> Result<LocalOutput> {
        let mut rhs = self.rhs.clone();
        let mut contribs = Vec::with_capacity(self.ends.len());
        for &(b, side) in &self.ends {
            let (u_opp, i_opp) = state.ends[b][1 - side].delayed();
            let mut c = prec.blocks[b][side].mul_vec(u_opp);
            for (ck, ik) in c.iter_mut().zip(i_opp) {
                *ck -= ik;
            }
            for (k, &l) in p.bundles[b].local(side).iter().enumerate() {
                rhs[l] += c[k];
            }
            contribs.push(c);
        }
        let x = self.factor.solve(&rhs).map_err(|_| Error::LocalSingular { subdomain: self.subdomain })?;
        let mut ends = Vec::with_capacity(self.ends.len());
        for (&(b, side), c) in self.ends.iter().zip(contribs) {
            let u: Vec<f64> = p.bundles[b].local(side).iter().map(|&l| x[l]).collect();
            let wu = prec.blocks[b][side].mul_vec(&u);
            let i: Vec<f64> = c.iter().zip(&wu).map(|(ck, wk)| ck - wk).collect();
            ends.push((b, side, u, i));
        }
        Ok(LocalOutput { x, ends })
    }
}

/// A VTM iteration in progress.
#[derive(Debug, Clone)]
pub struct VtmRun<'a> {
    partition: &'a Partition,
    prec: &'a Preconditioner,
    locals: Vec<LocalSolver>,
    state: BoundaryState,
    tick: usize,
}

/// Result of one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Tick {
    pub x: Vec<f64>,
    pub local: Vec<Vec<f64>>,
    pub residual: f64,
    pub mismatch: f64,
}

impl<'a> VtmRun<'a> {
    pub fn new<S: Scheduler>(partition: &'a Partition, prec: &'a Preconditioner, sched: &S) -> Result<Self> {
        if prec.blocks.len() != partition.bundles.len() {
            return Err(Error::DimensionMismatch { expected: partition.bundles.len(), found: prec.blocks.len() });
        }
        let locals: Vec<Result<LocalSolver>> =
            sched.map(partition.n_parts(), |id| LocalSolver::new(partition, prec, id));
        let locals = locals.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(Self { partition, prec, locals, state: BoundaryState::new(partition)?, tick: 0 })
    }

    pub fn tick(&self) -> usize {
        self.tick
    }

    pub fn state(&self) -> &BoundaryState {
        &self.state
    }

    /// One simultaneous update of every subdomain followed by the exchange.
    pub fn step<S: Scheduler>(&mut self, sched: &S) -> Result<Tick> {
        let (p, prec, state) = (self.partition, self.prec, &self.state);
        let locals = &self.locals;
        let outs: Vec<Result<LocalOutput>> = sched.map(locals.len(), |k| locals[k].solve(p, prec, state));
        let outs = outs.into_iter().collect::<Result<Vec<_>>>()?;
        let mut local = Vec::with_capacity(outs.len());
        for out in outs {
            for (b, side, u, i) in out.ends {
                self.state.ends[b][side].push(u, i);
            }
            local.push(out.x);
        }
        self.tick += 1;
        let (x, mismatch) = p.assemble_solution(&local);
        let residual = crate::relative_residual(&p.system.a, &x, &p.system.b);
        Ok(Tick { x, local, residual, mismatch })
    }
}

/// Iterates until the assembled relative residual drops to `tol`.
pub fn vtm_solve<S: Scheduler>(
    partition: &Partition,
    prec: &Preconditioner,
    tol: f64,
    max_iter: usize,
    sched: &S,
) -> core::result::Result<Solution, SolveError> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")).into());
    }
    let mut run = VtmRun::new(partition, prec, sched)?;
    let mut report = SolveReport::new();
    let mut x = vec![0.0; partition.n()];
    while report.iterations < max_iter {
        let t = run.step(sched)?;
        x = t.x;
        if report.push(t.residual, t.mismatch, tol).is_some() {
            break;
        }
    }
    finish(x, report)
}

/// Builds the preconditioner and solves.
pub fn vtm_solve_spec<S: Scheduler>(
    partition: &Partition,
    spec: &PreconditionerSpec,
    overrides: &[(usize, f64)],
    tol: f64,
    max_iter: usize,
    sched: &S,
) -> core::result::Result<Solution, SolveError> {
    let prec = build_preconditioner(spec, partition)?.with_overrides(partition, overrides)?;
    vtm_solve(partition, &prec, tol, max_iter, sched)
}
