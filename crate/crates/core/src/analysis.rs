//! Dense convergence theory for torn systems: input admittances (Schur
//! complements of the subdomains onto their twins), reflection matrices,
//! the convergence factor and executable checks of the 2-part theory.
//!
//! Everything here is dense and meant for interfaces up to about a
//! thousand nodes.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::eigen::{self, Eigenvalue};
use crate::error::{Error, Result};
use crate::factor::{FactorKind, Factorization, SolverHint};
use crate::schedule::Sequential;
use crate::tearing::{Partition, Subdomain};
use crate::vtm::{vtm_solve, Preconditioner};

/// `S_p = C_p − E_p D_p⁻¹ F_p` and `r_p = f_p − E_p D_p⁻¹ g_p` over the
/// twins of `sub`.
pub fn schur_complement(sub: &Subdomain) -> Result<(DenseMatrix, Vec<f64>)> {
    let mut s = sub.c.to_dense();
    let mut r = sub.f_rhs.clone();
    if sub.n_inner() == 0 {
        return Ok((s, r));
    }
    let hint = if sub.d.is_symmetric(0.0) { SolverHint::Spd } else { SolverHint::General };
    let singular = |_| Error::SingularInner { subdomain: sub.id };
    let fd = Factorization::new(&sub.d, hint).map_err(singular)?;
    let fdense = sub.f.to_dense();
    for j in 0..sub.n_twins() {
        let z = fd.solve(&fdense.column(j)).map_err(singular)?;
        let ez = sub.e.mul_vec(&z);
        for i in 0..sub.n_twins() {
            s[(i, j)] -= ez[i];
        }
    }
    let z = fd.solve(&sub.g_rhs).map_err(singular)?;
    for (ri, ez) in r.iter_mut().zip(sub.e.mul_vec(&z)) {
        *ri -= ez;
    }
    Ok((s, r))
}

/// Schur data of every subdomain plus their sum over the interface.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurData {
    pub s: Vec<DenseMatrix>,
    pub r: Vec<Vec<f64>>,
    /// Sorted interface nodes; index space of `total_s` and `total_r`.
    pub interface: Vec<usize>,
    pub total_s: DenseMatrix,
    pub total_r: Vec<f64>,
}

pub fn schur_data(p: &Partition) -> Result<SchurData> {
    let interface = p.interface();
    let m = interface.len();
    let mut total_s = DenseMatrix::zeros(m, m);
    let mut total_r = vec![0.0; m];
    let (mut s_all, mut r_all) = (Vec::new(), Vec::new());
    for sub in &p.subdomains {
        let (s, r) = schur_complement(sub)?;
        let at: Vec<usize> = sub.twins.iter().map(|v| interface.binary_search(v).expect("twin on interface")).collect();
        for (i, &gi) in at.iter().enumerate() {
            total_r[gi] += r[i];
            for (j, &gj) in at.iter().enumerate() {
                total_s[(gi, gj)] += s[(i, j)];
            }
        }
        s_all.push(s);
        r_all.push(r);
    }
    Ok(SchurData { s: s_all, r: r_all, interface, total_s, total_r })
}

/// `u∞ = (Σ S_p)⁻¹ Σ r_p` on the sorted interface.
pub fn interface_fixed_point(p: &Partition) -> Result<Vec<f64>> {
    let d = schur_data(p)?;
    d.total_s.lu().and_then(|lu| lu.solve(&d.total_r)).map_err(|_| Error::SingularSchurSum)
}

/// `T = (W − S)(W + S)⁻¹`.
pub fn reflection_matrix(w: &DenseMatrix, s: &DenseMatrix) -> Result<DenseMatrix> {
    // Tᵀ = (W + S)⁻ᵀ (W − S)ᵀ
    let lut = w.add(s)?.transpose().lu().map_err(|_| Error::SingularSum)?;
    Ok(lut.solve_matrix(&w.sub(s)?.transpose())?.transpose())
}

/// Blocks of a 2-part partition restricted to its single bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPart {
    /// `S_1`, `S_2` in bundle order.
    pub s: [DenseMatrix; 2],
    /// Admittance used by each end.
    pub w: [DenseMatrix; 2],
}

impl TwoPart {
    pub fn new(p: &Partition, prec: &Preconditioner) -> Result<Self> {
        if p.n_parts() != 2 || p.bundles.len() != 1 {
            return Err(Error::InvalidArgument("analysis needs a 2-part partition with one bundle".into()));
        }
        if !p.all_twins_shared() {
            return Err(Error::InvalidArgument("every interface node must be wired".into()));
        }
        let b = &p.bundles[0];
        let s0 = schur_complement(&p.subdomains[b.p])?.0;
        let s1 = schur_complement(&p.subdomains[b.q])?.0;
        Ok(Self {
            s: [s0.submatrix(&b.local_p, &b.local_p), s1.submatrix(&b.local_q, &b.local_q)],
            w: [prec.blocks[0][0].to_dense(), prec.blocks[0][1].to_dense()],
        })
    }

    pub fn matched(&self) -> bool {
        self.w[0] == self.w[1]
    }

    /// Reflection at each side: `R_1 = (W_2 − S_1)(W_1 + S_1)⁻¹` and
    /// symmetrically; with equal admittances these are `T_1`, `T_2`.
    pub fn reflections(&self) -> Result<[DenseMatrix; 2]> {
        let r = |me: usize| -> Result<DenseMatrix> {
            let other = 1 - me;
            let sum = self.w[me].add(&self.s[me])?;
            let diff = self.w[other].sub(&self.s[me])?;
            let lut = sum.transpose().lu().map_err(|_| Error::SingularSum)?;
            Ok(lut.solve_matrix(&diff.transpose())?.transpose())
        };
        Ok([r(0)?, r(1)?])
    }

    /// Two-tick error propagator of side 0:
    /// `(W_1 + S_1)⁻¹(W_1 − S_2)(W_2 + S_2)⁻¹(W_2 − S_1)`.
    pub fn two_tick_operator(&self) -> Result<DenseMatrix> {
        let half = |me: usize| -> Result<DenseMatrix> {
            let other = 1 - me;
            let lu = self.w[me].add(&self.s[me])?.lu().map_err(|_| Error::SingularSum)?;
            lu.solve_matrix(&self.w[me].sub(&self.s[other])?)
        };
        half(0)?.matmul(&half(1)?)
    }
}

/// `ρ` of the two-tick propagator; equals `ρ(T_1 T_2)`.
pub fn two_tick_radius(p: &Partition, prec: &Preconditioner) -> Result<f64> {
    Ok(eigen::spectral_radius(&TwoPart::new(p, prec)?.two_tick_operator()?))
}

/// `CF = √ρ(T_1 T_2)`.
pub fn convergence_factor(p: &Partition, prec: &Preconditioner) -> Result<f64> {
    Ok(libm::sqrt(two_tick_radius(p, prec)?))
}

/// `√ρ(T_1 T_2)` for a common admittance `w`.
pub fn convergence_factor_dense(w: &DenseMatrix, s1: &DenseMatrix, s2: &DenseMatrix) -> Result<f64> {
    let t = reflection_matrix(w, s1)?.matmul(&reflection_matrix(w, s2)?)?;
    Ok(libm::sqrt(eigen::spectral_radius(&t)))
}

/// Eigenvalues of `m` sorted by decreasing modulus.
pub fn spectrum_by_modulus(m: &DenseMatrix) -> Result<Vec<Eigenvalue>> {
    let mut ev = eigen::eigenvalues(m)?;
    ev.sort_by(|a, b| b.modulus().total_cmp(&a.modulus()));
    Ok(ev)
}

/// Relative gap `(|λ_1| − |λ_2|)/|λ_1|` between the two largest distinct
/// moduli; a conjugate pair counts once.
pub fn spectral_gap(m: &DenseMatrix) -> Result<f64> {
    let ev = spectrum_by_modulus(m)?;
    let Some(top) = ev.first() else { return Ok(0.0) };
    let r1 = top.modulus();
    if r1 == 0.0 {
        return Ok(0.0);
    }
    let skip = if top.im != 0.0 { 2 } else { 1 };
    Ok(ev.get(skip).map_or(1.0, |e| (r1 - e.modulus()) / r1))
}

/// Options for [`verify_theorem1`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Options {
    pub tol: f64,
    pub max_iter: usize,
    /// Allowed relative gap between the converged interface values and `u∞`.
    pub fixed_point_tol: f64,
}

impl Default for Theorem1Options {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 20_000, fixed_point_tol: 1e-6 }
    }
}

/// Outcome of the 2-part convergence checks.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Theorem1Report {
    pub system_spd: bool,
    pub s_spd: [bool; 2],
    /// Semidefinite input admittances, as left by a subdomain with a piece
    /// that has no path to ground.
    pub s_snnd: [bool; 2],
    pub w_spd: [bool; 2],
    /// Both ends of the bundle use the same admittance.
    pub matched: bool,
    pub rho_t: [f64; 2],
    pub rho: f64,
    pub cf: f64,
    /// `ρ(T_1 T_2) ≤ ρ(T_1)ρ(T_2)`, checked only for equal admittances.
    pub product_bound: Option<bool>,
    pub converged: Option<bool>,
    pub iterations: usize,
    pub fixed_point_error: Option<f64>,
    pub failures: Vec<String>,
}

impl Theorem1Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// The system and `W` are SPD, and either both `S_p` are SPD or, with a
    /// matched `W`, one is SPD and the other semidefinite.
    pub fn prechecks_hold(&self) -> bool {
        let s_ok = self.s_spd.iter().all(|&b| b)
            || (self.matched && self.s_spd.iter().any(|&b| b) && self.s_snnd.iter().all(|&b| b));
        self.system_spd && self.w_spd.iter().all(|&b| b) && s_ok
    }
}

/// Checks definiteness of the input admittances and of `W`, `ρ(T_1 T_2) < 1`,
/// the product bound, convergence of [`vtm_solve`] and the interface fixed
/// point. When a precheck fails no convergence is claimed and the solve
/// is skipped.
pub fn verify_theorem1(p: &Partition, prec: &Preconditioner, opts: &Theorem1Options) -> Result<Theorem1Report> {
    let tp = TwoPart::new(p, prec)?;
    let sym = |m: &DenseMatrix| m.is_symmetric(eigen::SYMMETRY_TOL) && eigen::is_spd(m);
    let system_spd = p.system.symmetric
        && Factorization::new(&p.system.a, SolverHint::Spd).is_ok_and(|f| f.kind() == FactorKind::Cholesky);
    let s_spd = [sym(&tp.s[0]), sym(&tp.s[1])];
    let snnd = |m: &DenseMatrix| m.is_symmetric(eigen::SYMMETRY_TOL) && eigen::is_snnd(m);
    let s_snnd = [snnd(&tp.s[0]), snnd(&tp.s[1])];
    let w_spd = [sym(&tp.w[0]), sym(&tp.w[1])];
    let [r1, r2] = tp.reflections()?;
    let rho_t = [eigen::spectral_radius(&r1), eigen::spectral_radius(&r2)];
    let rho = eigen::spectral_radius(&tp.two_tick_operator()?);
    let mut rep = Theorem1Report {
        system_spd,
        s_spd,
        s_snnd,
        w_spd,
        matched: tp.matched(),
        rho_t,
        rho,
        cf: libm::sqrt(rho),
        product_bound: None,
        converged: None,
        iterations: 0,
        fixed_point_error: None,
        failures: Vec::new(),
    };
    if !rep.prechecks_hold() {
        rep.failures.push(format!(
            "precheck: system SPD {system_spd}, S SPD {s_spd:?}, W SPD {w_spd:?}; convergence not claimed"
        ));
        return Ok(rep);
    }
    if !(rho < 1.0) {
        rep.failures.push(format!("rho(T1 T2) = {rho:e} is not below 1"));
    }
    if tp.matched() {
        let ok = rho <= rho_t[0] * rho_t[1] * (1.0 + 1e-9) + 1e-14;
        rep.product_bound = Some(ok);
        if !ok {
            rep.failures.push(format!("rho(T1 T2) = {rho:e} exceeds rho(T1) rho(T2) = {:e}", rho_t[0] * rho_t[1]));
        }
    }
    match vtm_solve(p, prec, opts.tol, opts.max_iter, &Sequential) {
        Ok(sol) => {
            rep.converged = Some(true);
            rep.iterations = sol.report.iterations;
            let u = interface_fixed_point(p)?;
            let d = schur_data(p)?;
            let diff: Vec<f64> = d.interface.iter().zip(&u).map(|(&v, uv)| sol.x[v] - uv).collect();
            let err = crate::norm2(&diff) / crate::norm2(&u).max(f64::MIN_POSITIVE);
            rep.fixed_point_error = Some(err);
            if !(err <= opts.fixed_point_tol) {
                rep.failures.push(format!("interface values differ from (S1+S2)^-1 r by {err:e}"));
            }
        }
        Err(e) => {
            rep.converged = Some(false);
            rep.iterations = e.report().map_or(0, |r| r.iterations);
            rep.failures.push(format!("vtm_solve did not converge: {e}"));
        }
    }
    Ok(rep)
}

fn close_sorted(a: &mut [f64], b: &mut [f64], rel: f64, floor: f64) -> bool {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= floor.max(rel * x.abs().max(y.abs())))
}

/// Real parts of the eigenvalues, failing if any is visibly complex.
fn real_spectrum(m: &DenseMatrix) -> Result<Vec<f64>> {
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    eigen::eigenvalues(m)?
        .into_iter()
        .map(|e| {
            if e.im.abs() <= 1e-8 * scale {
                Ok(e.re)
            } else {
                Err(Error::InvalidArgument(format!("eigenvalue {} + {}i is not real", e.re, e.im)))
            }
        })
        .collect()
}

/// Compares the spectra of `Z·S` and `√Z·S·√Zᵀ` (`R = √Z` with `RᵀR = Z`,
/// so the similar symmetric form is `R·S·Rᵀ`).
pub fn lemma6_check(z: &DenseMatrix, s: &DenseMatrix) -> Result<bool> {
    if z.nrows() != s.nrows() || !z.is_square() || !s.is_square() {
        return Err(Error::DimensionMismatch { expected: z.nrows(), found: s.nrows() });
    }
    let r = eigen::matrix_sqrt(z)?;
    let sym = r.matmul(s)?.matmul(&r.transpose())?.symmetric_part();
    let mut a = real_spectrum(&z.matmul(s)?)?;
    let mut b = eigen::sym_eigenvalues(&sym)?;
    Ok(close_sorted(&mut a, &mut b, 1e-8, 1e-12))
}

/// Eigenvalues of `T = (W − S)(W + S)⁻¹` next to `(1 − λ)/(1 + λ)` for the
/// eigenvalues `λ` of `W⁻¹·S`, both sorted.
pub fn reflection_diagonalization(w: &DenseMatrix, s: &DenseMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = reflection_matrix(w, s)?;
    let zs = w.lu()?.solve_matrix(s)?;
    let mut a = real_spectrum(&t)?;
    let mut b: Vec<f64> = real_spectrum(&zs)?.into_iter().map(|l| (1.0 - l) / (1.0 + l)).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Ok((a, b))
}

/// Diagonal dominance against the spectrum of a symmetric matrix: strict
/// dominance with a positive diagonal must give only positive eigenvalues,
/// weak dominance only non-negative ones (to `1e-10` relative).
pub fn dominance_consistent(a: &crate::sparse::CsrMatrix) -> Result<bool> {
    use crate::sparse::{is_diagonally_dominant, Dominance};
    let dense = a.to_dense();
    if !dense.is_symmetric(0.0) || a.diagonal().iter().any(|&d| d <= 0.0) {
        return Ok(true);
    }
    let ev = eigen::sym_eigenvalues(&dense)?;
    let scale = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(match is_diagonally_dominant(a)? {
        Dominance::Strict => ev[0] > 0.0,
        Dominance::Weak => ev[0] >= -1e-10 * scale,
        Dominance::No => true,
    })
}

/// Observed two-tick contraction: geometric mean of `r_{k+2} / r_k` over
/// the last `window` ticks before convergence. The converged tick itself is
/// left out. `None` when the history is too short or hits zero.
pub fn tail_rate(history: &[f64], converged: bool, window: usize) -> Option<f64> {
    let h = if converged && !history.is_empty() { &history[..history.len() - 1] } else { history };
    if window == 0 || h.len() < window + 2 {
        return None;
    }
    let start = h.len() - window - 2;
    let mut log_sum = 0.0;
    for k in start..start + window {
        if !(h[k] > 0.0 && h[k + 2] > 0.0) {
            return None;
        }
        log_sum += libm::log(h[k + 2] / h[k]);
    }
    Some(libm::exp(log_sum / window as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen;
    use crate::rng::SplitMix64;
    use crate::sparse::CsrMatrix;
    use crate::tearing::{select_interface, wire_tear, SplitWeights, Strategy};
    use crate::vtm::{build_preconditioner, build_preconditioner_with, Pairing, PreconditionerSpec};

    fn d(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    fn random_spd(n: usize, rng: &mut SplitMix64) -> DenseMatrix {
        let g = DenseMatrix::new(n, n, (0..n * n).map(|_| rng.next_f64() - 0.5).collect()).unwrap();
        let mut m = g.matmul(&g.transpose()).unwrap();
        for i in 0..n {
            m[(i, i)] += 0.5;
        }
        m
    }

    fn grid_part(nx: usize, ny: usize, seed: u64) -> Partition {
        let sys = netgen::grid2d(nx, ny, 1.0, 0.1, seed).unwrap();
        let l = select_interface(&sys.a, 2, Strategy::Geometric { dims: [nx, ny, 1] }).unwrap();
        wire_tear(&sys, &l, &SplitWeights::Equal).unwrap()
    }

    #[test]
    fn two_by_two_schur() {
        let sys =
            netgen::LinearSystem::new(CsrMatrix::from_dense(&d(&[&[2.0, 1.0], &[1.0, 2.0]])), std::vec![1.0, 1.0], "t")
                .unwrap();
        let l = crate::tearing::PartitionLabels::new(1, std::vec![0, 0], &[0]).unwrap();
        let p = wire_tear(&sys, &l, &SplitWeights::Equal).unwrap();
        let (s, r) = schur_complement(&p.subdomains[0]).unwrap();
        assert!((s[(0, 0)] - 1.5).abs() < 1e-15);
        assert!((r[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn no_inner_nodes() {
        let sys = netgen::opamp_ring_default();
        let l = crate::tearing::PartitionLabels::new(2, std::vec![0, 0, 1, 1], &[0, 1, 2, 3]).unwrap();
        let p = wire_tear(&sys, &l, &SplitWeights::Equal).unwrap();
        for sub in &p.subdomains {
            let (s, r) = schur_complement(sub).unwrap();
            assert_eq!(s, sub.c.to_dense());
            assert_eq!(r, sub.f_rhs);
        }
    }

    #[test]
    fn schur_sum_matches_untorn() {
        let p = grid_part(5, 5, 3);
        let data = schur_data(&p).unwrap();
        let a = p.system.a.to_dense();
        let g = &data.interface;
        let inner: Vec<usize> = (0..25).filter(|v| g.binary_search(v).is_err()).collect();
        let dinv = a.submatrix(&inner, &inner).inverse().unwrap();
        let s = a
            .submatrix(g, g)
            .sub(&a.submatrix(g, &inner).matmul(&dinv).unwrap().matmul(&a.submatrix(&inner, g)).unwrap())
            .unwrap();
        assert!(data.total_s.sub(&s).unwrap().max_abs() <= 1e-10);
    }

    #[test]
    fn scalar_reflections() {
        let one = d(&[&[1.0]]);
        assert_eq!(reflection_matrix(&one, &one).unwrap()[(0, 0)], 0.0);
        assert!((reflection_matrix(&d(&[&[3.0]]), &one).unwrap()[(0, 0)] - 0.5).abs() < 1e-15);
        let cf = convergence_factor_dense(&one, &d(&[&[3.0]]), &d(&[&[1.0 / 3.0]])).unwrap();
        assert!((cf - 0.5).abs() < 1e-15);
        let mut rng = SplitMix64::new(7);
        for _ in 0..50 {
            let (w, s1, s2) = (rng.next_f64() * 5.0 + 0.01, rng.next_f64() * 5.0 + 0.01, rng.next_f64() * 5.0 + 0.01);
            let cf = convergence_factor_dense(&d(&[&[w]]), &d(&[&[s1]]), &d(&[&[s2]])).unwrap();
            let direct = libm::sqrt(((w - s1) * (w - s2) / ((w + s1) * (w + s2))).abs());
            assert!((cf - direct).abs() <= 1e-14);
        }
    }

    #[test]
    fn matched_reflection_vanishes() {
        let mut rng = SplitMix64::new(1);
        let s = random_spd(5, &mut rng);
        assert!(reflection_matrix(&s, &s).unwrap().max_abs() <= 1e-12);
        assert_eq!(convergence_factor_dense(&s, &s, &random_spd(5, &mut rng)).unwrap(), 0.0);
    }

    #[test]
    fn exact_schur_gives_zero_cf() {
        let sys = netgen::random_resistor_network(20, 1.0, 9).unwrap();
        let l = select_interface(&sys.a, 2, Strategy::BfsGrow).unwrap();
        let p = wire_tear(&sys, &l, &SplitWeights::Equal).unwrap();
        let w = build_preconditioner(&PreconditionerSpec::SchurApprox { depth: usize::MAX, drop: 0.0 }, &p).unwrap();
        assert!(two_tick_radius(&p, &w).unwrap() <= 1e-10);
    }

    #[test]
    fn theorem_on_small_grid() {
        let p = grid_part(6, 6, 0);
        let w = build_preconditioner(&PreconditionerSpec::Diagonal, &p).unwrap();
        let rep = verify_theorem1(&p, &w, &Theorem1Options::default()).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.rho < 1.0);
    }

    #[test]
    fn one_floating_side_is_allowed_when_matched() {
        let sys = netgen::random_resistor_network(20, 1.0, 1091).unwrap();
        let l = select_interface(&sys.a, 2, Strategy::BfsGrow).unwrap();
        let p = wire_tear(&sys, &l, &SplitWeights::Equal).unwrap();
        let spec = PreconditionerSpec::ScalarIdentity { alpha: 0.1 };
        let w = build_preconditioner(&spec, &p).unwrap();
        let rep = verify_theorem1(&p, &w, &Theorem1Options { tol: 1e-8, ..Default::default() }).unwrap();
        assert_eq!(rep.s_spd.iter().filter(|&&b| b).count(), 1, "{rep:?}");
        assert!(rep.s_snnd.iter().all(|&b| b));
        assert!(rep.passed(), "{rep:?}");
        let w = build_preconditioner_with(&spec, Pairing::PerEnd, &p).unwrap();
        let rep = verify_theorem1(&p, &w, &Theorem1Options::default()).unwrap();
        assert_eq!(rep.prechecks_hold(), rep.matched);
    }

    #[test]
    fn negative_admittance_fails_precheck() {
        let p = grid_part(6, 6, 0);
        let mut w = build_preconditioner(&PreconditionerSpec::Diagonal, &p).unwrap();
        for side in 0..2 {
            let b = &w.blocks[0][side];
            let t: Vec<_> = b.triplets().map(|(i, j, v)| (i, j, if i == 0 && j == 0 { -v } else { v })).collect();
            w.blocks[0][side] = CsrMatrix::from_triplets(b.nrows(), b.ncols(), &t).unwrap();
        }
        let rep = verify_theorem1(&p, &w, &Theorem1Options::default()).unwrap();
        assert!(!rep.prechecks_hold());
        assert_eq!(rep.converged, None);
    }

    #[test]
    fn fixed_point_matches_direct() {
        let p = grid_part(5, 5, 1);
        let u = interface_fixed_point(&p).unwrap();
        let x = crate::factor_solve(&p.system.a, &p.system.b, SolverHint::Spd).unwrap();
        for (k, v) in p.interface().into_iter().enumerate() {
            assert!((u[k] - x[v]).abs() <= 1e-12);
        }
    }

    #[test]
    fn fixed_point_without_inner_nodes() {
        // two copies of a 1-node interface with C_p = I and f_p = 2
        let sys = netgen::LinearSystem::new(CsrMatrix::from_diagonal(&[2.0]), std::vec![4.0], "t").unwrap();
        let l = crate::tearing::PartitionLabels::new(1, std::vec![0], &[0]).unwrap();
        let p = wire_tear(&sys, &l, &SplitWeights::Equal).unwrap();
        assert_eq!(interface_fixed_point(&p).unwrap(), std::vec![2.0]);
    }

    #[test]
    fn lemma6_cases() {
        let mut rng = SplitMix64::new(3);
        let s = random_spd(6, &mut rng);
        assert!(lemma6_check(&DenseMatrix::identity(6), &s).unwrap());
        assert!(lemma6_check(&DenseMatrix::identity(6).scaled(4.0), &s).unwrap());
        for _ in 0..10 {
            assert!(lemma6_check(&random_spd(12, &mut rng), &random_spd(12, &mut rng)).unwrap());
        }
        assert!(lemma6_check(&DenseMatrix::identity(3), &s).is_err());
    }

    #[test]
    fn diagonalization_identity() {
        let mut rng = SplitMix64::new(4);
        for n in [1, 5, 20] {
            let (w, s) = (random_spd(n, &mut rng), random_spd(n, &mut rng));
            let (a, b) = reflection_diagonalization(&w, &s).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-9, "{a:?} {b:?}");
                assert!(x.abs() < 1.0);
            }
        }
    }

    #[test]
    fn gap_of_diagonal() {
        let m = DenseMatrix::from_diagonal(&[0.5, -0.25, 0.1]);
        assert!((spectral_gap(&m).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dominance_and_spectrum() {
        let s = netgen::grid2d(6, 6, 1.0, 0.1, 0).unwrap();
        assert!(dominance_consistent(&s.a).unwrap());
        let floating = d(&[&[1.0, -1.0, 0.0], &[-1.0, 2.0, -1.0], &[0.0, -1.0, 1.0]]);
        assert!(dominance_consistent(&CsrMatrix::from_dense(&floating)).unwrap());
    }

    #[test]
    fn tail_rate_of_a_geometric_sequence() {
        let h: Vec<f64> = (0..30).map(|k| 0.9f64.powi(k)).collect();
        let r = tail_rate(&h, true, 10).unwrap();
        assert!((r - 0.81).abs() < 1e-12);
        assert_eq!(tail_rate(&h[..11], false, 10), None);
        assert_eq!(tail_rate(&[1.0, 0.0, 0.0, 0.0], false, 2), None);
    }
}
