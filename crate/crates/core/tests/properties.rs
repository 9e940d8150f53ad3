use proptest::prelude::*;

use vtm_core::analysis::{
    convergence_factor_dense, lemma6_check, reflection_diagonalization, schur_complement, verify_theorem1,
    Theorem1Options,
};
use vtm_core::baselines::{stationary_solve, BaselineSpec};
use vtm_core::eigen::{is_spd, matrix_sqrt, spectral_radius, sym_eigenvalues};
use vtm_core::netgen::{self, assemble, Netlist};
use vtm_core::rng::SplitMix64;
use vtm_core::sparse::{is_diagonally_dominant, Dominance};
use vtm_core::tearing::{reassemble, select_interface, wire_tear, PartitionLabels, SplitWeights, Strategy};
use vtm_core::vtm::{build_preconditioner, vtm_solve, PreconditionerSpec, VtmRun};
use vtm_core::{CsrMatrix, DenseMatrix, LinearSystem, Sequential};

fn random_spd(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = SplitMix64::new(seed);
    let g = DenseMatrix::new(n, n, (0..n * n).map(|_| rng.next_f64() - 0.5).collect()).unwrap();
    let mut m = g.matmul(&g.transpose()).unwrap();
    for i in 0..n {
        m[(i, i)] += 0.1 + rng.next_f64();
    }
    m
}

fn netlist(n: usize, seed: u64, grounded: bool) -> Netlist {
    let mut rng = SplitMix64::new(seed);
    let mut net = Netlist::new(n);
    for v in 1..n {
        let u = rng.below(v as u64) as usize;
        net.branches.push((u, v, rng.uniform(0.1, 5.0)));
    }
    for _ in 0..n {
        let (u, v) = (rng.below(n as u64) as usize, rng.below(n as u64) as usize);
        if u != v {
            net.branches.push((u, v, rng.uniform(0.1, 5.0)));
        }
    }
    if grounded {
        net.grounds.push((rng.below(n as u64) as usize, rng.uniform(0.05, 1.0)));
    }
    for v in 0..n {
        net.injections.push((v, rng.uniform(-1.0, 1.0)));
    }
    net
}

fn network(n: usize, seed: u64) -> LinearSystem {
    assemble(&netlist(n, seed, true)).unwrap()
}

/// Every connected component of every stitched subdomain carries a shunt,
/// judged from the graph and row sums alone.
fn all_components_grounded(p: &vtm_core::tearing::Partition) -> bool {
    p.subdomains.iter().all(|sub| {
        let m = sub.local_matrix();
        let n = m.nrows();
        let mut comp: Vec<usize> = (0..n).collect();
        fn root(c: &mut [usize], mut v: usize) -> usize {
            while c[v] != v {
                c[v] = c[c[v]];
                v = c[v];
            }
            v
        }
        let mut excess = vec![0.0f64; n];
        for (i, j, v) in m.triplets() {
            excess[i] += v;
            if i != j && v != 0.0 {
                let (a, b) = (root(&mut comp, i), root(&mut comp, j));
                comp[a] = b;
            }
        }
        let mut grounded = vec![false; n];
        for v in 0..n {
            let d = m.get(v, v);
            if excess[v] > 1e-12 * d {
                let r = root(&mut comp, v);
                grounded[r] = true;
            }
        }
        (0..n).all(|v| grounded[root(&mut comp, v)])
    })
}

fn strategy_for(sys: &LinearSystem, geometric: bool) -> Strategy {
    match (geometric, sys.grid_dims) {
        (true, Some(dims)) => Strategy::Geometric { dims },
        _ => Strategy::BfsGrow,
    }
}

fn spd_instance(kind: u8, size: usize, seed: u64) -> LinearSystem {
    match kind % 3 {
        0 => netgen::grid2d(3 + size % 12, 3 + size / 12 % 10, 1.0, 0.1, seed).unwrap(),
        1 => netgen::random_resistor_network(10 + size % 120, 1.0, seed).unwrap(),
        _ => network(8 + size % 80, seed),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sqrt_identity(n in 1usize..16, seed in any::<u64>()) {
        let z = random_spd(n, seed);
        let r = matrix_sqrt(&z).unwrap();
        let err = r.transpose().matmul(&r).unwrap().sub(&z).unwrap().frobenius_norm();
        prop_assert!(err <= 1e-9 * z.frobenius_norm());
    }

    #[test]
    fn strict_symmetric_dominance_is_spd(n in 1usize..40, seed in any::<u64>()) {
        let sys = assemble(&netlist(n, seed, true)).unwrap();
        prop_assert_ne!(is_diagonally_dominant(&sys.a).unwrap(), Dominance::No);
        let a = sys.a.to_dense();
        let ev = sym_eigenvalues(&a).unwrap();
        if is_diagonally_dominant(&sys.a).unwrap() == Dominance::Strict {
            prop_assert!(ev[0] > 0.0);
        }
    }

    #[test]
    fn floating_networks_are_weak_and_semidefinite(n in 2usize..40, seed in any::<u64>()) {
        let sys = assemble(&netlist(n, seed, false)).unwrap();
        prop_assert!(sys.symmetric);
        prop_assert_eq!(is_diagonally_dominant(&sys.a).unwrap(), Dominance::Weak);
        let ev = sym_eigenvalues(&sys.a.to_dense()).unwrap();
        let scale = ev[ev.len() - 1];
        prop_assert!(ev[0] >= -1e-10 * scale);
    }

    #[test]
    fn tear_round_trip_is_bitwise(kind in 0u8..3, size in 0usize..200, seed in any::<u64>(), parts in prop::sample::select(vec![2usize, 3, 4, 8])) {
        let sys = spd_instance(kind, size, seed);
        prop_assume!(parts <= sys.n() / 2);
        let labels = select_interface(&sys.a, parts, strategy_for(&sys, seed % 2 == 0)).unwrap();
        let p = wire_tear(&sys, &labels, &SplitWeights::Equal).unwrap();
        prop_assert_eq!(reassemble(&p).unwrap(), sys);
    }

    #[test]
    fn stitched_subdomains_are_spd(kind in 0u8..3, size in 0usize..200, seed in any::<u64>()) {
        let sys = spd_instance(kind, size, seed);
        let labels = select_interface(&sys.a, 2, strategy_for(&sys, true)).unwrap();
        let p = wire_tear(&sys, &labels, &SplitWeights::Equal).unwrap();
        let grounded = all_components_grounded(&p);
        let mut spd = true;
        for sub in &p.subdomains {
            prop_assert!(sub.c.is_symmetric(0.0));
            spd &= is_spd(&sub.local_matrix().to_dense());
        }
        prop_assert_eq!(spd, grounded);
    }

    #[test]
    fn twin_blocks_sum_to_interface_block(kind in 0u8..3, size in 0usize..200, seed in any::<u64>()) {
        let sys = spd_instance(kind, size, seed);
        let labels = select_interface(&sys.a, 3.min(sys.n() / 2), strategy_for(&sys, false)).unwrap();
        let p = wire_tear(&sys, &labels, &SplitWeights::Equal).unwrap();
        let iface = p.interface();
        let pos = |v: usize| iface.binary_search(&v).unwrap();
        let mut c = DenseMatrix::zeros(iface.len(), iface.len());
        let mut f = vec![0.0; iface.len()];
        for sub in &p.subdomains {
            for (i, j, v) in sub.c.triplets() {
                c[(pos(sub.twins[i]), pos(sub.twins[j]))] += v;
            }
            for (k, &v) in sub.f_rhs.iter().enumerate() {
                f[pos(sub.twins[k])] += v;
            }
        }
        prop_assert_eq!(c, sys.a.to_dense().submatrix(&iface, &iface));
        let b: Vec<f64> = iface.iter().map(|&v| sys.b[v]).collect();
        prop_assert_eq!(f, b);
    }

    #[test]
    fn inner_blocks_never_cross(kind in 0u8..3, size in 0usize..200, seed in any::<u64>()) {
        let sys = spd_instance(kind, size, seed);
        let labels = select_interface(&sys.a, 2, strategy_for(&sys, true)).unwrap();
        for (i, j, _) in sys.a.triplets() {
            if !labels.is_interface(i) && !labels.is_interface(j) {
                prop_assert_eq!(labels.part_of()[i], labels.part_of()[j]);
            }
        }
    }

    #[test]
    fn schur_complements_are_spd(n in 6usize..60, seed in any::<u64>(), pick in any::<u64>()) {
        let sys = network(n, seed);
        let mut rng = SplitMix64::new(pick);
        let iface: Vec<usize> = (0..n).filter(|_| rng.next_f64() < 0.3).collect();
        prop_assume!(!iface.is_empty() && iface.len() < n);
        let labels = PartitionLabels::new(1, vec![0; n], &iface).unwrap();
        let p = wire_tear(&sys, &labels, &SplitWeights::Equal).unwrap();
        let (s, _) = schur_complement(&p.subdomains[0]).unwrap();
        prop_assert!(is_spd(&s.symmetric_part()));
    }

    #[test]
    fn lemma6_on_random_pairs(n in 1usize..14, seed in any::<u64>()) {
        prop_assert!(lemma6_check(&random_spd(n, seed), &random_spd(n, seed ^ 0x9e37)).unwrap());
    }

    #[test]
    fn reflection_eigenvalues_diagonalize(n in 1usize..30, seed in any::<u64>()) {
        let (w, s) = (random_spd(n, seed), random_spd(n, seed.wrapping_add(1)));
        let (t, formula) = reflection_diagonalization(&w, &s).unwrap();
        for (a, b) in t.iter().zip(&formula) {
            prop_assert!((a - b).abs() <= 1e-8);
            prop_assert!(a.abs() < 1.0);
        }
    }

    #[test]
    fn scalar_cf_formula(w in 0.01f64..10.0, s1 in 0.01f64..10.0, s2 in 0.01f64..10.0) {
        let d = |x: f64| DenseMatrix::from_diagonal(&[x]);
        let cf = convergence_factor_dense(&d(w), &d(s1), &d(s2)).unwrap();
        let direct = (((w - s1) * (w - s2)) / ((w + s1) * (w + s2))).abs().sqrt();
        prop_assert!((cf - direct).abs() <= 1e-14);
        prop_assert!(cf < 1.0);
    }

    #[test]
    fn product_bound_holds(n in 1usize..12, seed in any::<u64>()) {
        let (w, s1, s2) = (random_spd(n, seed), random_spd(n, seed ^ 1), random_spd(n, seed ^ 2));
        let t1 = vtm_core::analysis::reflection_matrix(&w, &s1).unwrap();
        let t2 = vtm_core::analysis::reflection_matrix(&w, &s2).unwrap();
        let r = spectral_radius(&t1.matmul(&t2).unwrap());
        prop_assert!(r <= spectral_radius(&t1) * spectral_radius(&t2) * (1.0 + 1e-9) + 1e-14);
        prop_assert!(r < 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spd_systems_converge_for_spd_admittances(
        kind in 0u8..3,
        size in 0usize..200,
        seed in any::<u64>(),
        parts in 2usize..5,
        which in 0usize..5,
    ) {
        let sys = spd_instance(kind, size, seed);
        prop_assume!(parts <= sys.n() / 3);
        let labels = select_interface(&sys.a, parts, strategy_for(&sys, seed % 2 == 1)).unwrap();
        let p = wire_tear(&sys, &labels, &SplitWeights::Equal).unwrap();
        prop_assume!(all_components_grounded(&p));
        let spec = [
            PreconditionerSpec::ScalarIdentity { alpha: 1.0 },
            PreconditionerSpec::Diagonal,
            PreconditionerSpec::OverlappedBlock,
            PreconditionerSpec::WeightedOverlappedBlock { alpha: 0.5 },
            PreconditionerSpec::SchurApprox { depth: 2, drop: 0.01 },
        ][which];
        let w = build_preconditioner(&spec, &p).unwrap();
        let sol = vtm_solve(&p, &w, 1e-10, 50_000, &Sequential);
        prop_assert!(sol.is_ok(), "{:?}", sol.err());
        let x = sol.unwrap().x;
        let direct = vtm_core::factor_solve(&sys.a, &sys.b, vtm_core::SolverHint::Spd).unwrap();
        let err: f64 = x.iter().zip(&direct).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-6 * vtm_core::norm2(&direct));
    }

    #[test]
    fn theorem1_on_two_parts(kind in 0u8..3, size in 0usize..200, seed in any::<u64>(), which in 0usize..3) {
        let sys = spd_instance(kind, size, seed);
        let labels = select_interface(&sys.a, 2, strategy_for(&sys, true)).unwrap();
        let p = wire_tear(&sys, &labels, &SplitWeights::Equal).unwrap();
        prop_assume!(p.all_twins_shared() && all_components_grounded(&p));
        let spec = [
            PreconditionerSpec::ScalarIdentity { alpha: 10.0 },
            PreconditionerSpec::Diagonal,
            PreconditionerSpec::OverlappedBlock,
        ][which];
        let w = build_preconditioner(&spec, &p).unwrap();
        let rep = verify_theorem1(&p, &w, &Theorem1Options::default()).unwrap();
        prop_assert!(rep.passed(), "{:?}", rep);
    }

    #[test]
    fn stagnated_iterates_solve_the_system(kind in 0u8..3, size in 0usize..200, seed in any::<u64>()) {
        let sys = spd_instance(kind, size, seed);
        let labels = select_interface(&sys.a, 2, strategy_for(&sys, true)).unwrap();
        let p = wire_tear(&sys, &labels, &SplitWeights::Equal).unwrap();
        prop_assume!(all_components_grounded(&p));
        let w = build_preconditioner(&PreconditionerSpec::OverlappedBlock, &p).unwrap();
        let mut run = VtmRun::new(&p, &w, &Sequential).unwrap();
        let mut prev = run.step(&Sequential).unwrap();
        for _ in 0..20_000 {
            let t = run.step(&Sequential).unwrap();
            let du = t.x.iter().zip(&prev.x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            prev = t;
            if du <= 1e-14 {
                break;
            }
        }
        prop_assert!(prev.residual <= 1e-10, "{}", prev.residual);
    }

    #[test]
    fn one_block_jacobi_is_direct(kind in 0u8..3, size in 0usize..200, seed in any::<u64>()) {
        let sys = spd_instance(kind, size, seed);
        let spec = BaselineSpec::BlockJacobi { labels: PartitionLabels::single(sys.n()) };
        let sol = stationary_solve(&sys, &spec, 1e-10, 3).unwrap();
        prop_assert_eq!(sol.report.iterations, 1);
    }

    #[test]
    fn runs_are_repeatable(kind in 0u8..3, size in 0usize..200, seed in any::<u64>()) {
        let sys = spd_instance(kind, size, seed);
        let labels = select_interface(&sys.a, 3.min(sys.n() / 3), strategy_for(&sys, false)).unwrap();
        let p = wire_tear(&sys, &labels, &SplitWeights::Equal).unwrap();
        prop_assume!(all_components_grounded(&p));
        let w = build_preconditioner(&PreconditionerSpec::Diagonal, &p).unwrap();
        let run = || {
            let mut r = VtmRun::new(&p, &w, &Sequential).unwrap();
            (0..40).map(|_| r.step(&Sequential).unwrap()).map(|t| (t.x, t.residual)).collect::<Vec<_>>()
        };
        prop_assert_eq!(run(), run());
    }
}

#[test]
fn sparse_matches_dense_products() {
    let mut rng = SplitMix64::new(11);
    for _ in 0..20 {
        let n = 1 + rng.below(30) as usize;
        let t: Vec<_> = (0..3 * n)
            .map(|_| (rng.below(n as u64) as usize, rng.below(n as u64) as usize, rng.uniform(-1.0, 1.0)))
            .collect();
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let y = a.to_dense().matvec(&x).unwrap();
        for (u, v) in a.mul_vec(&x).iter().zip(&y) {
            assert!((u - v).abs() <= 1e-14);
        }
    }
}
