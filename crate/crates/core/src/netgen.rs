//! Test systems: nodal analysis of netlists, resistor grids and the
//! four-node op-amp ring.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::sparse::CsrMatrix;

/// Default branch conductance of generated grids.
pub const DEFAULT_BRANCH_G: f64 = 1.0;
/// Default ground conductance at every grid node.
pub const DEFAULT_GROUND_G: f64 = 0.1;

/// `Ax = b` plus where it came from.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearSystem {
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    pub symmetric: bool,
    pub tag: String,
    /// `[nx, ny, nz]` for generated grids (`nz = 1` in 2D).
    pub grid_dims: Option<[usize; 3]>,
}

impl LinearSystem {
    pub fn new(a: CsrMatrix, b: Vec<f64>, tag: impl Into<String>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
        }
        if b.len() != a.nrows() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.len() });
        }
        if let Some(i) = b.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let symmetric = a.is_symmetric(0.0);
        Ok(Self { a, b, symmetric, tag: tag.into(), grid_dims: None })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
}

/// Resistors, ground resistors, current injections and voltage-controlled
/// current sources over `node_count` nodes.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Netlist {
    pub node_count: usize,
    /// `(a, b, g)` with `g > 0`.
    pub branches: Vec<(usize, usize, f64)>,
    /// `(node, g)` with `g > 0`.
    pub grounds: Vec<(usize, f64)>,
    /// `(node, current)`.
    pub injections: Vec<(usize, f64)>,
    /// `(out, ctrl, gm)`: current `gm·u_ctrl` drawn from `out`.
    pub vccs: Vec<(usize, usize, f64)>,
}

impl Netlist {
    pub fn new(node_count: usize) -> Self {
        Self { node_count, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.node_count;
        let check = |v: usize| {
            if v >= n {
                Err(Error::InvalidArgument(format!("node {v} out of range (n = {n})")))
            } else {
                Ok(())
            }
        };
        for &(a, b, g) in &self.branches {
            check(a)?;
            check(b)?;
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop branch at node {a}")));
            }
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidArgument(format!("branch {a}-{b} has conductance {g}")));
            }
        }
        for &(v, g) in &self.grounds {
            check(v)?;
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidArgument(format!("ground at node {v} has conductance {g}")));
            }
        }
        for &(v, i) in &self.injections {
            check(v)?;
            if !i.is_finite() {
                return Err(Error::NonFinite(v));
            }
        }
        for &(o, c, gm) in &self.vccs {
            check(o)?;
            check(c)?;
            if !gm.is_finite() {
                return Err(Error::NonFinite(o));
            }
        }
        Ok(())
    }
}

/// Nodal analysis: stamps every element into `A` and `b`.
pub fn assemble(net: &Netlist) -> Result<LinearSystem> {
    net.validate()?;
    let n = net.node_count;
    let mut t = Vec::with_capacity(4 * net.branches.len() + net.grounds.len() + net.vccs.len());
    for &(a, b, g) in &net.branches {
        t.push((a, a, g));
        t.push((b, b, g));
        t.push((a, b, -g));
        t.push((b, a, -g));
    }
    for &(v, g) in &net.grounds {
        t.push((v, v, g));
    }
    for &(o, c, gm) in &net.vccs {
        t.push((o, c, gm));
    }
    let mut b = vec![0.0; n];
    for &(v, i) in &net.injections {
        b[v] += i;
    }
    let a = CsrMatrix::from_triplets(n, n, &t)?;
    LinearSystem::new(a, b, "netlist")
}

/// Deterministic right-hand side in `[0, 1)`.
pub fn seeded_rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    (0..n).map(|_| rng.next_f64()).collect()
}

/// Node index of grid point `(x, y, z)`.
#[inline]
pub fn grid_index(dims: [usize; 3], x: usize, y: usize, z: usize) -> usize {
    x + dims[0] * (y + dims[1] * z)
}

/// Coordinates of a grid node index.
#[inline]
pub fn grid_coords(dims: [usize; 3], v: usize) -> [usize; 3] {
    [v % dims[0], (v / dims[0]) % dims[1], v / (dims[0] * dims[1])]
}

fn grid(dims: [usize; 3], branch_g: f64, ground_g: f64, rhs_seed: u64, tag: String) -> Result<LinearSystem> {
    if !(branch_g > 0.0 && branch_g.is_finite() && ground_g > 0.0 && ground_g.is_finite()) {
        return Err(Error::InvalidArgument("conductances must be positive".into()));
    }
    let [nx, ny, nz] = dims;
    let n = nx * ny * nz;
    let mut t = Vec::with_capacity(7 * n);
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let v = grid_index(dims, x, y, z);
                let mut deg = 0usize;
                let mut push = |u: usize, t: &mut Vec<(usize, usize, f64)>| {
                    t.push((v, u, -branch_g));
                    deg += 1;
                };
                let mut row = Vec::with_capacity(6);
                if z > 0 {
                    push(grid_index(dims, x, y, z - 1), &mut row);
                }
                if y > 0 {
                    push(grid_index(dims, x, y - 1, z), &mut row);
                }
                if x > 0 {
                    push(grid_index(dims, x - 1, y, z), &mut row);
                }
                if x + 1 < nx {
                    push(grid_index(dims, x + 1, y, z), &mut row);
                }
                if y + 1 < ny {
                    push(grid_index(dims, x, y + 1, z), &mut row);
                }
                if z + 1 < nz {
                    push(grid_index(dims, x, y, z + 1), &mut row);
                }
                t.extend(row);
                t.push((v, v, deg as f64 * branch_g + ground_g));
            }
        }
    }
    let a = CsrMatrix::from_triplets(n, n, &t)?;
    let mut sys = LinearSystem::new(a, seeded_rhs(n, rhs_seed), tag)?;
    sys.grid_dims = Some(dims);
    Ok(sys)
}

/// `nx × ny` resistor mesh with a ground resistor at every node.
pub fn grid2d(nx: usize, ny: usize, branch_g: f64, ground_g: f64, rhs_seed: u64) -> Result<LinearSystem> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidArgument(format!("grid2d needs nx, ny >= 2 (got {nx} x {ny})")));
    }
    grid([nx, ny, 1], branch_g, ground_g, rhs_seed, format!("grid2d_{nx}x{ny}"))
}

/// `nx × ny × nz` resistor lattice with a ground resistor at every node.
pub fn grid3d(nx: usize, ny: usize, nz: usize, branch_g: f64, ground_g: f64, rhs_seed: u64) -> Result<LinearSystem> {
    if nx < 2 || ny < 2 || nz < 2 {
        return Err(Error::InvalidArgument(format!("grid3d needs nx, ny, nz >= 2 (got {nx} x {ny} x {nz})")));
    }
    grid([nx, ny, nz], branch_g, ground_g, rhs_seed, format!("grid3d_{nx}x{ny}x{nz}"))
}

/// Random connected resistor network.
///
/// A random spanning tree plus about `extra_per_node · n` chords, branch
/// conductances in `[0.1, 10)`, and ground resistors in `[0.01, 1)` on
/// roughly a quarter of the nodes (node 0 always grounded).
pub fn random_resistor_network(n: usize, extra_per_node: f64, seed: u64) -> Result<LinearSystem> {
    if n == 0 {
        return Err(Error::InvalidArgument("network needs at least one node".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let mut net = Netlist::new(n);
    let mut seen = alloc::collections::BTreeSet::new();
    for v in 1..n {
        let u = rng.below(v as u64) as usize;
        seen.insert((u, v));
        net.branches.push((u, v, rng.uniform(0.1, 10.0)));
    }
    let chords = (extra_per_node * n as f64) as usize;
    for _ in 0..chords {
        let a = rng.below(n as u64) as usize;
        let b = rng.below(n as u64) as usize;
        let key = (a.min(b), a.max(b));
        if a != b && seen.insert(key) {
            net.branches.push((key.0, key.1, rng.uniform(0.1, 10.0)));
        }
    }
    for v in 0..n {
        if v == 0 || rng.below(4) == 0 {
            net.grounds.push((v, rng.uniform(0.01, 1.0)));
        }
    }
    for v in 0..n {
        net.injections.push((v, rng.next_f64()));
    }
    let mut sys = assemble(&net)?;
    sys.tag = format!("resnet_{n}_{seed}");
    Ok(sys)
}

/// Parameters of the four-node op-amp ring.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OpampParams {
    /// Self conductances `g1..g4`.
    pub g: [f64; 4],
    pub g13: f64,
    pub g34: f64,
    pub g42: f64,
    pub g21: f64,
    /// Injections `I1..I4`.
    pub currents: [f64; 4],
}

impl Default for OpampParams {
    fn default() -> Self {
        Self { g: [1.0; 4], g13: 10.0, g34: 10.0, g42: 10.0, g21: -10.0, currents: [1.0; 4] }
    }
}

/// The unsymmetric op-amp ring system.
///
/// Rows (1-based nodes): `g1 u1 + g21 u2`, `g2 u2 + g42 u4`,
/// `g13 u1 + g3 u3`, `g34 u3 + g4 u4`.
pub fn opamp_ring(p: &OpampParams) -> Result<LinearSystem> {
    let t = [
        (0, 0, p.g[0]),
        (0, 1, p.g21),
        (1, 1, p.g[1]),
        (1, 3, p.g42),
        (2, 0, p.g13),
        (2, 2, p.g[2]),
        (3, 2, p.g34),
        (3, 3, p.g[3]),
    ];
    let kept: Vec<_> = t.iter().copied().filter(|&(i, j, v)| i == j || v != 0.0).collect();
    let a = CsrMatrix::from_triplets(4, 4, &kept)?;
    LinearSystem::new(a, p.currents.to_vec(), "opamp_ring")
}

pub fn opamp_ring_default() -> LinearSystem {
    opamp_ring(&OpampParams::default()).expect("default parameters are valid")
}

/// Loop gain `g13·g34·g42·g21 / (g1·g2·g3·g4)`.
pub fn loop_gain(p: &OpampParams) -> Result<f64> {
    if let Some(i) = p.g.iter().position(|&g| g == 0.0) {
        return Err(Error::InvalidArgument(format!("g{} is zero", i + 1)));
    }
    Ok(p.g13 * p.g34 * p.g42 * p.g21 / (p.g[0] * p.g[1] * p.g[2] * p.g[3]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{is_diagonally_dominant, Dominance};

    #[test]
    fn two_node_stamp() {
        let mut net = Netlist::new(2);
        net.branches.push((0, 1, 1.0));
        net.grounds.extend([(0, 1.0), (1, 1.0)]);
        net.injections.push((0, 1.0));
        let sys = assemble(&net).unwrap();
        assert_eq!(sys.a.to_dense().as_slice(), &[2.0, -1.0, -1.0, 2.0]);
        assert_eq!(sys.b, std::vec![1.0, 0.0]);
        assert!(sys.symmetric);
    }

    #[test]
    fn single_node() {
        let mut net = Netlist::new(1);
        net.grounds.push((0, 2.0));
        net.injections.push((0, 4.0));
        let sys = assemble(&net).unwrap();
        let x = crate::factor_solve(&sys.a, &sys.b, crate::SolverHint::General).unwrap();
        assert_eq!(x, std::vec![2.0]);
    }

    #[test]
    fn invalid_netlists() {
        let mut net = Netlist::new(2);
        net.branches.push((0, 0, 1.0));
        assert!(assemble(&net).is_err());
        let mut net = Netlist::new(2);
        net.grounds.push((1, -1.0));
        assert!(assemble(&net).is_err());
        let mut net = Netlist::new(2);
        net.branches.push((0, 2, 1.0));
        assert!(assemble(&net).is_err());
    }

    #[test]
    fn small_grids() {
        let g = grid2d(2, 2, 1.0, 1.0, 0).unwrap();
        assert_eq!(g.a.diagonal(), std::vec![3.0; 4]);
        assert_eq!(g.a.get(0, 1), -1.0);
        assert_eq!(g.a.get(0, 2), -1.0);
        assert_eq!(g.a.get(0, 3), 0.0);
        let g = grid3d(2, 2, 2, 1.5, 0.25, 0).unwrap();
        assert!(g.a.diagonal().iter().all(|&d| d == 3.0 * 1.5 + 0.25));
        assert!(g.symmetric);
        assert!(grid2d(1, 5, 1.0, 0.1, 0).is_err());
    }

    #[test]
    fn table_sizes() {
        assert_eq!(grid2d(100, 100, 1.0, 0.1, 1).unwrap().n(), 10_000);
        assert_eq!(grid3d(30, 30, 30, 1.0, 0.1, 1).unwrap().n(), 27_000);
    }

    #[test]
    fn grids_are_deterministic_and_strict() {
        let a = grid2d(7, 5, 1.0, 0.1, 9).unwrap();
        let b = grid2d(7, 5, 1.0, 0.1, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(is_diagonally_dominant(&a.a).unwrap(), Dominance::Strict);
        assert_eq!(is_diagonally_dominant(&grid3d(3, 4, 2, 1.0, 0.1, 0).unwrap().a).unwrap(), Dominance::Strict);
        assert!(a.b.iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn opamp_defaults() {
        let sys = opamp_ring_default();
        let want = [1.0, -10.0, 0.0, 0.0, 0.0, 1.0, 0.0, 10.0, 10.0, 0.0, 1.0, 0.0, 0.0, 0.0, 10.0, 1.0];
        assert_eq!(sys.a.to_dense().as_slice(), &want);
        assert!(!sys.symmetric);
        assert_eq!(loop_gain(&OpampParams::default()).unwrap(), -1e4);
    }

    #[test]
    fn opamp_variants() {
        let p = OpampParams { g13: 0.0, g34: 0.0, g42: 0.0, g21: 0.0, ..Default::default() };
        assert_eq!(opamp_ring(&p).unwrap().a, CsrMatrix::identity(4));
        assert_eq!(loop_gain(&p).unwrap(), 0.0);
        let p = OpampParams { g13: 2.0, g34: 3.0, g42: 4.0, g21: 5.0, ..Default::default() };
        assert_eq!(loop_gain(&p).unwrap(), 120.0);
        let p = OpampParams { g: [1.0, 0.0, 1.0, 1.0], ..Default::default() };
        assert!(loop_gain(&p).is_err());
    }

    #[test]
    fn random_networks_are_weakly_dominant_spd() {
        for seed in 0..10 {
            let sys = random_resistor_network(60, 1.0, seed).unwrap();
            assert!(sys.symmetric);
            assert_ne!(is_diagonally_dominant(&sys.a).unwrap(), Dominance::No);
            let ev = crate::eigen::sym_eigenvalues(&sys.a.to_dense()).unwrap();
            assert!(ev[0] > 0.0);
        }
    }
}
