use proptest::prelude::*;

use vtm::mm::{self, Symmetry};
use vtm::netlist::{parse_netlist, write_netlist};
use vtm::partition_io::{load_partition, parse_partition, write_partition};
use vtm_core::netgen::{self, Netlist};
use vtm_core::tearing::{select_interface, wire_tear, SplitWeights, Strategy as Split};
use vtm_core::CsrMatrix;

fn sparse() -> impl Strategy<Value = CsrMatrix> {
    (1usize..30, 1usize..30).prop_flat_map(|(r, c)| {
        prop::collection::vec((0..r, 0..c, -1e6f64..1e6), 0..80)
            .prop_map(move |t| CsrMatrix::from_triplets(r, c, &t).unwrap())
    })
}

fn symmetric() -> impl Strategy<Value = CsrMatrix> {
    (1usize..30).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, -1e3f64..1e3), 0..60).prop_map(move |t| {
            let lower: Vec<_> = t.into_iter().map(|(i, j, v)| (i.max(j), i.min(j), v)).collect();
            let lower = CsrMatrix::from_triplets(n, n, &lower).unwrap();
            let mut all: Vec<_> = lower.triplets().collect();
            all.extend(lower.triplets().filter(|(i, j, _)| i != j).map(|(i, j, v)| (j, i, v)));
            CsrMatrix::from_triplets(n, n, &all).unwrap()
        })
    })
}

fn netlist() -> impl Strategy<Value = Netlist> {
    (2usize..20).prop_flat_map(|n| {
        (
            prop::collection::vec((0..n, 0..n, 1e-3f64..1e3), 1..40),
            prop::collection::vec((0..n, 1e-3f64..1e3), 0..5),
            prop::collection::vec((0..n, -10f64..10.0), 0..5),
            prop::collection::vec((0..n, 0..n, -10f64..10.0), 0..3),
        )
            .prop_map(move |(br, gr, inj, vccs)| {
                let mut net = Netlist::new(n);
                net.branches = br.into_iter().filter(|(a, b, _)| a != b).collect();
                net.branches.push((0, n - 1, 1.0));
                net.grounds = gr;
                net.injections = inj;
                net.vccs = vccs;
                net
            })
    })
}

proptest! {
    #[test]
    fn general_matrix_round_trip(m in sparse()) {
        prop_assert_eq!(mm::read_matrix(&mm::write_matrix(&m, Symmetry::General)).unwrap(), m);
    }

    #[test]
    fn symmetric_matrix_round_trip(m in symmetric()) {
        prop_assert_eq!(&mm::read_matrix(&mm::write_matrix(&m, Symmetry::Symmetric)).unwrap(), &m);
        prop_assert_eq!(mm::read_matrix(&mm::write_matrix(&m, Symmetry::General)).unwrap(), m);
    }

    #[test]
    fn vector_round_trip(v in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..50)) {
        prop_assert_eq!(mm::read_vector(&mm::write_vector(&v)).unwrap(), v);
    }

    #[test]
    fn netlist_round_trip(net in netlist()) {
        let back = parse_netlist(&write_netlist(&net)).unwrap();
        prop_assert_eq!(netgen::assemble(&back).unwrap().a, netgen::assemble(&net).unwrap().a);
        prop_assert_eq!(back, net);
    }

    #[test]
    fn partition_round_trip(n in 12usize..150, seed in any::<u64>(), parts in 2usize..6) {
        let sys = netgen::random_resistor_network(n, 1.0, seed).unwrap();
        let l = select_interface(&sys.a, parts, Split::BfsGrow).unwrap();
        let p = wire_tear(&sys, &l, &SplitWeights::Equal).unwrap();
        let q = load_partition(&sys, &parse_partition(&write_partition(&p)).unwrap()).unwrap();
        prop_assert_eq!(q, p);
    }
}

#[test]
fn custom_weights_survive() {
    let sys = netgen::grid2d(6, 5, 1.0, 0.1, 9).unwrap();
    let l = select_interface(&sys.a, 2, Split::Geometric { dims: sys.grid_dims.unwrap() }).unwrap();
    let w: Vec<_> = l.interface().into_iter().flat_map(|v| [(v, 0, 0.3), (v, 1, 0.7)]).collect();
    let p = wire_tear(&sys, &l, &SplitWeights::Custom(w)).unwrap();
    let q = load_partition(&sys, &parse_partition(&write_partition(&p)).unwrap()).unwrap();
    assert_eq!(q, p);
}
