//! Wire tearing.
//!
//! Interfacial nodes are split into one twin copy per adjacent subdomain.
//! Each twin carries the branch conductances of the couplings that went to
//! its subdomain plus a weighted share of the node's shunt (ground)
//! conductance and injection. Twins of the same node are chained by wires.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::netgen::{grid_coords, LinearSystem};
use crate::sparse::CsrMatrix;

/// Node-to-part labels plus the interfacial node set.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PartitionLabels {
    n_parts: usize,
    part_of: Vec<usize>,
    is_interface: Vec<bool>,
}

impl PartitionLabels {
    pub fn new(n_parts: usize, part_of: Vec<usize>, interface: &[usize]) -> Result<Self> {
        if n_parts == 0 {
            return Err(Error::InvalidLabels("at least one part is required".into()));
        }
        if let Some(v) = part_of.iter().position(|&p| p >= n_parts) {
            return Err(Error::InvalidLabels(format!("node {v} has part {} >= {n_parts}", part_of[v])));
        }
        let mut is_interface = vec![false; part_of.len()];
        for &v in interface {
            if v >= part_of.len() {
                return Err(Error::InvalidLabels(format!("interface node {v} out of range")));
            }
            is_interface[v] = true;
        }
        Ok(Self { n_parts, part_of, is_interface })
    }

    /// Everything in part 0, no interface.
    pub fn single(n: usize) -> Self {
        Self { n_parts: 1, part_of: vec![0; n], is_interface: vec![false; n] }
    }

    pub fn n_parts(&self) -> usize {
        self.n_parts
    }

    pub fn len(&self) -> usize {
        self.part_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.part_of.is_empty()
    }

    pub fn part_of(&self) -> &[usize] {
        &self.part_of
    }

    pub fn is_interface(&self, v: usize) -> bool {
        self.is_interface[v]
    }

    /// Interfacial nodes in increasing order.
    pub fn interface(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.is_interface[v]).collect()
    }

    /// Node count per part, interfacial nodes included.
    pub fn part_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_parts];
        for &p in &self.part_of {
            s[p] += 1;
        }
        s
    }

    /// Checks that interfacial nodes separate the parts of `a`'s graph.
    pub fn validate(&self, a: &CsrMatrix) -> Result<()> {
        if a.nrows() != self.len() || !a.is_square() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: self.len() });
        }
        for (i, j, _) in a.triplets() {
            if i != j && !self.is_interface[i] && !self.is_interface[j] && self.part_of[i] != self.part_of[j] {
                return Err(Error::InvalidLabels(format!(
                    "inner nodes {i} (part {}) and {j} (part {}) are coupled",
                    self.part_of[i], self.part_of[j]
                )));
            }
        }
        Ok(())
    }
}

/// How [`select_interface`] splits the node set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Strategy {
    /// Recursive coordinate bisection of a structured grid whose node index
    /// is `x + nx·(y + ny·z)`.
    Geometric { dims: [usize; 3] },
    /// Recursive bisection of breadth-first orderings.
    BfsGrow,
}

/// Splits the graph of `a` into `n_parts` balanced parts and turns the edge
/// cut into a vertex separator.
///
/// For every cut edge with no interfacial endpoint yet, the endpoint in the
/// larger part becomes interfacial (the lower node id on ties). Interfacial
/// nodes whose couplings all reach a single part are then folded into it.
pub fn select_interface(a: &CsrMatrix, n_parts: usize, strategy: Strategy) -> Result<PartitionLabels> {
    let n = a.nrows();
    if n_parts == 0 || n_parts > n {
        return Err(Error::InvalidArgument(format!("cannot split {n} nodes into {n_parts} parts")));
    }
    let g = Graph::from_matrix(a);
    let mut part_of = vec![0usize; n];
    let nodes: Vec<usize> = (0..n).collect();
    match strategy {
        Strategy::Geometric { dims } => {
            if dims.iter().product::<usize>() != n {
                return Err(Error::InvalidArgument(format!("grid dims {dims:?} do not match {n} nodes")));
            }
            bisect_geometric(dims, nodes, 0, n_parts, &mut part_of);
        }
        Strategy::BfsGrow => {
            let mut member = vec![false; n];
            let mut scratch = vec![usize::MAX; n];
            bisect_bfs(&g, nodes, 0, n_parts, &mut part_of, &mut member, &mut scratch);
        }
    }
    let sizes = {
        let mut s = vec![0usize; n_parts];
        for &p in &part_of {
            s[p] += 1;
        }
        s
    };
    let mut is_interface = vec![false; n];
    for u in 0..n {
        for &v in g.neighbors(u) {
            if v <= u || part_of[u] == part_of[v] || is_interface[u] || is_interface[v] {
                continue;
            }
            let (su, sv) = (sizes[part_of[u]], sizes[part_of[v]]);
            let pick = if su > sv {
                u
            } else if sv > su {
                v
            } else {
                u
            };
            is_interface[pick] = true;
        }
    }
    // an interfacial node coupled to one part only would leave a twin with
    // no couplings, so it moves into that part as an inner node
    let mut counts = sizes;
    loop {
        let mut changed = false;
        for v in 0..n {
            if !is_interface[v] {
                continue;
            }
            let s = sharing_parts(&g, &is_interface, &part_of, v);
            if s.len() == 1 && (s[0] == part_of[v] || counts[part_of[v]] > 1) {
                counts[part_of[v]] -= 1;
                counts[s[0]] += 1;
                part_of[v] = s[0];
                is_interface[v] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let labels = PartitionLabels { n_parts, part_of, is_interface };
    labels.validate(a)?;
    Ok(labels)
}

/// Parts that receive a coupling of interfacial node `v`: the part of each
/// inner neighbour, and for an interfacial neighbour the part of the lower id.
fn sharing_parts(g: &Graph, is_interface: &[bool], part_of: &[usize], v: usize) -> Vec<usize> {
    let mut s: Vec<usize> =
        g.neighbors(v).iter().map(|&u| if is_interface[u] { part_of[u.min(v)] } else { part_of[u] }).collect();
    if s.is_empty() {
        s.push(part_of[v]);
    }
    s.sort_unstable();
    s.dedup();
    s
}

fn take_left(len: usize, k: usize) -> (usize, usize) {
    let kl = k / 2;
    let left = (len * kl + k / 2) / k;
    (kl, left.clamp(1, len - 1))
}

fn bisect_geometric(dims: [usize; 3], mut nodes: Vec<usize>, first: usize, k: usize, part_of: &mut [usize]) {
    if k == 1 {
        for v in nodes {
            part_of[v] = first;
        }
        return;
    }
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    for &v in &nodes {
        let c = grid_coords(dims, v);
        for d in 0..3 {
            lo[d] = lo[d].min(c[d]);
            hi[d] = hi[d].max(c[d]);
        }
    }
    let dim = (0..3).max_by_key(|&d| (hi[d] - lo[d], usize::MAX - d)).unwrap();
    nodes.sort_by_key(|&v| (grid_coords(dims, v)[dim], v));
    let (kl, left) = take_left(nodes.len(), k);
    let right = nodes.split_off(left);
    bisect_geometric(dims, nodes, first, kl, part_of);
    bisect_geometric(dims, right, first + kl, k - kl, part_of);
}

fn bisect_bfs(
    g: &Graph,
    nodes: Vec<usize>,
    first: usize,
    k: usize,
    part_of: &mut [usize],
    member: &mut [bool],
    scratch: &mut [usize],
) {
    if k == 1 {
        for v in nodes {
            part_of[v] = first;
        }
        return;
    }
    for &v in &nodes {
        member[v] = true;
    }
    let mut order = Vec::with_capacity(nodes.len());
    for comp in g.components_within(&nodes, member) {
        let root = g.pseudo_peripheral(comp[0], member, scratch);
        for lvl in g.level_structure(root, member, scratch) {
            order.extend(lvl);
        }
    }
    for &v in &nodes {
        member[v] = false;
    }
    let (kl, left) = take_left(order.len(), k);
    let right = order.split_off(left);
    bisect_bfs(g, order, first, kl, part_of, member, scratch);
    bisect_bfs(g, right, first + kl, k - kl, part_of, member, scratch);
}

/// Labels induced by a given interface: the parts are the connected
/// components of the graph with the interface removed, numbered by their
/// smallest node. An interfacial node is labelled with the smallest part
/// among its neighbours.
pub fn labels_from_interface(a: &CsrMatrix, interface: &[usize]) -> Result<PartitionLabels> {
    let n = a.nrows();
    let g = Graph::from_matrix(a);
    let mut is_interface = vec![false; n];
    for &v in interface {
        if v >= n {
            return Err(Error::InvalidLabels(format!("interface node {v} out of range")));
        }
        is_interface[v] = true;
    }
    let inner: Vec<usize> = (0..n).filter(|&v| !is_interface[v]).collect();
    if inner.is_empty() {
        return Err(Error::InvalidLabels("every node is interfacial".into()));
    }
    let member: Vec<bool> = is_interface.iter().map(|&b| !b).collect();
    let comps = g.components_within(&inner, &member);
    let mut part_of = vec![usize::MAX; n];
    for (p, c) in comps.iter().enumerate() {
        for &v in c {
            part_of[v] = p;
        }
    }
    // interfacial nodes take the smallest adjacent part, spreading through
    // interface-only neighbourhoods if needed
    loop {
        let mut changed = false;
        for &v in interface {
            if part_of[v] != usize::MAX {
                continue;
            }
            let best = g.neighbors(v).iter().map(|&u| part_of[u]).filter(|&p| p != usize::MAX).min();
            if let Some(p) = best {
                part_of[v] = p;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for p in part_of.iter_mut() {
        if *p == usize::MAX {
            *p = 0;
        }
    }
    let labels = PartitionLabels { n_parts: comps.len(), part_of, is_interface };
    labels.validate(a)?;
    Ok(labels)
}

/// Split weights for the shunt conductance and injection of interfacial
/// nodes.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SplitWeights {
    /// `1/k` for a node shared by `k` subdomains.
    #[default]
    Equal,
    /// `(node, part, w)` entries; every part adjacent to a listed node must
    /// appear, weights positive and summing to one.
    Custom(Vec<(usize, usize, f64)>),
}

/// One subdomain of a torn system, in local order: twins first, then inner
/// nodes, each sorted by global id.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Subdomain {
    pub id: usize,
    /// Global ids of the twin copies held by this subdomain.
    pub twins: Vec<usize>,
    /// Global ids of the inner nodes.
    pub inner: Vec<usize>,
    /// Twin–twin block.
    pub c: CsrMatrix,
    /// Twin rows, inner columns.
    pub e: CsrMatrix,
    /// Inner rows, twin columns.
    pub f: CsrMatrix,
    /// Inner–inner block.
    pub d: CsrMatrix,
    /// Twin right-hand side shares.
    pub f_rhs: Vec<f64>,
    pub g_rhs: Vec<f64>,
}

impl Subdomain {
    pub fn n_twins(&self) -> usize {
        self.twins.len()
    }

    pub fn n_inner(&self) -> usize {
        self.inner.len()
    }

    pub fn len(&self) -> usize {
        self.twins.len() + self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Global ids in local order.
    pub fn nodes(&self) -> Vec<usize> {
        let mut v = self.twins.clone();
        v.extend_from_slice(&self.inner);
        v
    }

    /// `[[C, E], [F, D]]`.
    pub fn local_matrix(&self) -> CsrMatrix {
        self.stitched(None)
    }

    /// `[[C + extra, E], [F, D]]`, where `extra` is twin-sized.
    pub fn stitched(&self, extra: Option<&CsrMatrix>) -> CsrMatrix {
        let t = self.n_twins();
        let n = self.len();
        let mut trip: Vec<(usize, usize, f64)> = self.c.triplets().collect();
        if let Some(w) = extra {
            trip.extend(w.triplets());
        }
        trip.extend(self.e.triplets().map(|(i, j, v)| (i, t + j, v)));
        trip.extend(self.f.triplets().map(|(i, j, v)| (t + i, j, v)));
        trip.extend(self.d.triplets().map(|(i, j, v)| (t + i, t + j, v)));
        CsrMatrix::from_triplets(n, n, &trip).expect("blocks fit")
    }

    pub fn local_rhs(&self) -> Vec<f64> {
        let mut r = self.f_rhs.clone();
        r.extend_from_slice(&self.g_rhs);
        r
    }

    /// Local twin index of global node `v`.
    pub fn twin_index(&self, v: usize) -> Option<usize> {
        self.twins.binary_search(&v).ok()
    }
}

/// Copies of one interfacial node.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwinSet {
    pub node: usize,
    /// `(subdomain, local twin index)`, by increasing subdomain.
    pub copies: Vec<(usize, usize)>,
    /// Split weight per copy.
    pub weights: Vec<f64>,
}

/// A virtual transmission line between two twin copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Wire {
    pub id: usize,
    /// Global interfacial node.
    pub node: usize,
    /// `(subdomain, local twin index)` of each end, `end_a.0 < end_b.0`.
    pub end_a: (usize, usize),
    pub end_b: (usize, usize),
    /// Delay in ticks.
    pub tau: usize,
}

/// All wires between one pair of subdomains, sorted by node id. Coupled
/// admittance blocks are defined per bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bundle {
    pub p: usize,
    pub q: usize,
    pub wires: Vec<usize>,
    pub nodes: Vec<usize>,
    /// Local twin indices in `p` and in `q`, aligned with `nodes`.
    pub local_p: Vec<usize>,
    pub local_q: Vec<usize>,
}

impl Bundle {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Local indices at end `side` (0 = `p`, 1 = `q`).
    pub fn local(&self, side: usize) -> &[usize] {
        if side == 0 {
            &self.local_p
        } else {
            &self.local_q
        }
    }

    pub fn subdomain(&self, side: usize) -> usize {
        if side == 0 {
            self.p
        } else {
            self.q
        }
    }
}

/// Result of wire tearing.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Partition {
    /// The untorn system.
    pub system: LinearSystem,
    pub labels: PartitionLabels,
    pub subdomains: Vec<Subdomain>,
    pub twin_map: Vec<TwinSet>,
    pub wires: Vec<Wire>,
    pub bundles: Vec<Bundle>,
}

impl Partition {
    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn n_parts(&self) -> usize {
        self.subdomains.len()
    }

    /// Global ids covered by subdomain `p` (twins, then inner nodes).
    pub fn subdomain_nodes(&self, p: usize) -> Vec<usize> {
        self.subdomains[p].nodes()
    }

    /// Interfacial nodes in increasing order.
    pub fn interface(&self) -> Vec<usize> {
        self.twin_map.iter().map(|t| t.node).collect()
    }

    /// Twin sets with a copy in every subdomain (always true for two-part
    /// tearings produced by [`select_interface`]).
    pub fn all_twins_shared(&self) -> bool {
        self.twin_map.iter().all(|t| t.copies.len() == self.n_parts())
    }

    /// Assembles a global vector from local solutions: inner nodes copied,
    /// interfacial nodes averaged over their copies. Also returns the
    /// largest twin mismatch.
    pub fn assemble_solution(&self, local: &[Vec<f64>]) -> (Vec<f64>, f64) {
        let mut x = vec![0.0; self.n()];
        for (sub, xl) in self.subdomains.iter().zip(local) {
            let t = sub.n_twins();
            for (k, &v) in sub.inner.iter().enumerate() {
                x[v] = xl[t + k];
            }
        }
        let mut mismatch: f64 = 0.0;
        for ts in &self.twin_map {
            let mut sum = 0.0;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &(p, l) in &ts.copies {
                let u = local[p][l];
                sum += u;
                lo = lo.min(u);
                hi = hi.max(u);
            }
            x[ts.node] = sum / ts.copies.len() as f64;
            let spread = hi - lo;
            mismatch = if spread.is_nan() { f64::NAN } else { mismatch.max(spread) };
        }
        (x, mismatch)
    }
}

/// Shares of `total` whose left-to-right floating-point sum is exactly
/// `total`. The last share absorbs the rounding.
fn exact_shares(total: f64, mut shares: Vec<f64>) -> Vec<f64> {
    let k = shares.len();
    if k == 1 {
        shares[0] = total;
        return shares;
    }
    // The remainder slot alone cannot always hit `total` (its ulp may be
    // as coarse as the total's), so the first slot is nudged when needed.
    let first = shares[0];
    for attempt in 0..64u32 {
        let step = (attempt + 1) / 2;
        let mut s0 = first;
        for _ in 0..step {
            s0 = if attempt % 2 == 1 { s0.next_up() } else { s0.next_down() };
        }
        shares[0] = s0;
        let partial = shares[1..k - 1].iter().fold(s0, |a, &s| a + s);
        let mut last = total - partial;
        for _ in 0..4 {
            let s = partial + last;
            if s == total {
                shares[k - 1] = last;
                return shares;
            }
            last = if s < total { last.next_up() } else { last.next_down() };
        }
    }
    shares[0] = first;
    shares[k - 1] = total - shares[..k - 1].iter().sum::<f64>();
    shares
}

/// Tears `sys` along `labels`.
pub fn wire_tear(sys: &LinearSystem, labels: &PartitionLabels, weights: &SplitWeights) -> Result<Partition> {
    let a = &sys.a;
    let n = a.nrows();
    labels.validate(a)?;
    let g = Graph::from_matrix(a);
    let np = labels.n_parts;
    let part_of = &labels.part_of;

    // subdomains receiving a coupling of each interfacial node; a copy
    // without couplings would be a floating node
    let mut shared: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in labels.interface() {
        shared.insert(v, sharing_parts(&g, &labels.is_interface, part_of, v));
    }

    let mut twins: Vec<Vec<usize>> = vec![Vec::new(); np];
    let mut inner: Vec<Vec<usize>> = vec![Vec::new(); np];
    for v in 0..n {
        if labels.is_interface[v] {
            for &p in &shared[&v] {
                twins[p].push(v);
            }
        } else {
            inner[part_of[v]].push(v);
        }
    }
    // local position of an inner node / of a twin copy
    let mut inner_local = vec![usize::MAX; n];
    for list in &inner {
        for (k, &v) in list.iter().enumerate() {
            inner_local[v] = k;
        }
    }
    let twin_local = |p: usize, v: usize| twins[p].binary_search(&v).expect("twin present");

    // split weights
    let mut weight_of: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    match weights {
        SplitWeights::Equal => {
            for (&v, s) in &shared {
                weight_of.insert(v, vec![1.0 / s.len() as f64; s.len()]);
            }
        }
        SplitWeights::Custom(list) => {
            for (&v, s) in &shared {
                weight_of.insert(v, vec![f64::NAN; s.len()]);
            }
            for &(v, p, w) in list {
                let s = shared
                    .get(&v)
                    .ok_or_else(|| Error::InvalidArgument(format!("weight given for non-interfacial node {v}")))?;
                let k = s
                    .iter()
                    .position(|&x| x == p)
                    .ok_or_else(|| Error::InvalidArgument(format!("node {v} has no copy in part {p}")))?;
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::InvalidArgument(format!("weight {w} for node {v} must be positive")));
                }
                weight_of.get_mut(&v).unwrap()[k] = w;
            }
            for (&v, ws) in &weight_of {
                let sum: f64 = ws.iter().sum();
                if ws.iter().any(|w| w.is_nan()) || (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "weights of node {v} must cover every copy and sum to 1"
                    )));
                }
            }
        }
    }

    let mut c_t: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); np];
    let mut e_t = c_t.clone();
    let mut f_t = c_t.clone();
    let mut d_t = c_t.clone();
    let mut f_rhs: Vec<Vec<f64>> = twins.iter().map(|t| vec![0.0; t.len()]).collect();
    let mut g_rhs: Vec<Vec<f64>> = inner.iter().map(|t| vec![0.0; t.len()]).collect();
    let mut twin_map = Vec::with_capacity(shared.len());

    for i in 0..n {
        let (cols, vals) = a.row(i);
        if labels.is_interface[i] {
            let s = &shared[&i];
            let mut branch = vec![0.0; s.len()];
            let mut branch_total = 0.0;
            let mut diag = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                if j == i {
                    diag = v;
                    continue;
                }
                let target = if labels.is_interface[j] { part_of[i.min(j)] } else { part_of[j] };
                let ri = twin_local(target, i);
                if labels.is_interface[j] {
                    c_t[target].push((ri, twin_local(target, j), v));
                } else {
                    e_t[target].push((ri, inner_local[j], v));
                }
                if v < 0.0 && a.get(j, i) == v {
                    let k = s.iter().position(|&p| p == target).expect("target adjacent");
                    branch[k] -= v;
                    branch_total -= v;
                }
            }
            let ws = &weight_of[&i];
            let shunt = diag - branch_total;
            let shares: Vec<f64> = branch.iter().zip(ws).map(|(&br, &w)| br + w * shunt).collect();
            let shares = exact_shares(diag, shares);
            let rhs = exact_shares(sys.b[i], ws.iter().map(|&w| w * sys.b[i]).collect());
            let mut copies = Vec::with_capacity(s.len());
            for (k, &p) in s.iter().enumerate() {
                let l = twin_local(p, i);
                if a.contains(i, i) {
                    c_t[p].push((l, l, shares[k]));
                }
                f_rhs[p][l] = rhs[k];
                copies.push((p, l));
            }
            twin_map.push(TwinSet { node: i, copies, weights: ws.clone() });
        } else {
            let p = part_of[i];
            let li = inner_local[i];
            g_rhs[p][li] = sys.b[i];
            for (&j, &v) in cols.iter().zip(vals) {
                if labels.is_interface[j] {
                    f_t[p].push((li, twin_local(p, j), v));
                } else {
                    debug_assert_eq!(part_of[j], p);
                    d_t[p].push((li, inner_local[j], v));
                }
            }
        }
    }

    let mut subdomains = Vec::with_capacity(np);
    for p in 0..np {
        let (t, m) = (twins[p].len(), inner[p].len());
        subdomains.push(Subdomain {
            id: p,
            c: CsrMatrix::from_triplets(t, t, &c_t[p])?,
            e: CsrMatrix::from_triplets(t, m, &e_t[p])?,
            f: CsrMatrix::from_triplets(m, t, &f_t[p])?,
            d: CsrMatrix::from_triplets(m, m, &d_t[p])?,
            twins: core::mem::take(&mut twins[p]),
            inner: core::mem::take(&mut inner[p]),
            f_rhs: core::mem::take(&mut f_rhs[p]),
            g_rhs: core::mem::take(&mut g_rhs[p]),
        });
    }

    // chain of wires per node, grouped into bundles per subdomain pair
    let mut wires = Vec::new();
    let mut bundle_of: BTreeMap<(usize, usize), Bundle> = BTreeMap::new();
    for ts in &twin_map {
        for pair in ts.copies.windows(2) {
            let (a_end, b_end) = (pair[0], pair[1]);
            let id = wires.len();
            wires.push(Wire { id, node: ts.node, end_a: a_end, end_b: b_end, tau: 1 });
            let b = bundle_of.entry((a_end.0, b_end.0)).or_insert_with(|| Bundle {
                p: a_end.0,
                q: b_end.0,
                wires: Vec::new(),
                nodes: Vec::new(),
                local_p: Vec::new(),
                local_q: Vec::new(),
            });
            b.wires.push(id);
            b.nodes.push(ts.node);
            b.local_p.push(a_end.1);
            b.local_q.push(b_end.1);
        }
    }
    let bundles = bundle_of.into_values().collect();

    Ok(Partition { system: sys.clone(), labels: labels.clone(), subdomains, twin_map, wires, bundles })
}

/// Collapses twin copies back into single nodes.
pub fn reassemble(p: &Partition) -> Result<LinearSystem> {
    let n = p.labels.len();
    for ts in &p.twin_map {
        for &(s, l) in &ts.copies {
            let ok = p.subdomains.get(s).and_then(|sub| sub.twins.get(l)).is_some_and(|&v| v == ts.node);
            if !ok {
                return Err(Error::InconsistentPartition(format!("copy ({s}, {l}) of node {}", ts.node)));
            }
        }
    }
    let mut trip = Vec::new();
    let mut b = vec![0.0; n];
    let mut seen_b = vec![false; n];
    for sub in &p.subdomains {
        let glob = sub.nodes();
        let t = sub.n_twins();
        if glob.iter().any(|&v| v >= n) {
            return Err(Error::InconsistentPartition(format!("subdomain {} references a node out of range", sub.id)));
        }
        trip.extend(sub.local_matrix().triplets().map(|(i, j, v)| (glob[i], glob[j], v)));
        for (k, &v) in sub.f_rhs.iter().enumerate() {
            let g = glob[k];
            b[g] = if seen_b[g] { b[g] + v } else { v };
            seen_b[g] = true;
        }
        for (k, &v) in sub.g_rhs.iter().enumerate() {
            b[glob[t + k]] = v;
        }
    }
    let a = CsrMatrix::from_triplets(n, n, &trip)?;
    let mut sys = LinearSystem::new(a, b, p.system.tag.clone())?;
    sys.grid_dims = p.system.grid_dims;
    Ok(sys)
}
