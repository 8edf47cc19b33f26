use num_integer::Integer;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use sft_core::generate::{random_gk3, random_normal_form};
use sft_core::gk3::{bezout_positive, pointed_structure_anchored, rotate_source, trail_class, trail_signature};
use sft_core::{apply_trace, gk_dimension, is_gk3, is_normal_form, pointed_structure, to_normal_form, GkDimension};

proptest! {
    #[test]
    fn normal_form_is_reached_and_replays(seed in any::<u64>()) {
        let g = random_gk3(&mut StdRng::seed_from_u64(seed), 12);
        let (nf, trace) = to_normal_form(&g).unwrap();
        prop_assert!(is_normal_form(&nf));
        prop_assert!(pointed_structure(&nf).unwrap().is_normal_form());
        prop_assert_eq!(apply_trace(&g, &trace).unwrap(), nf.clone());
        prop_assert_eq!(gk_dimension(&nf), GkDimension::Finite(3));
        let (again, rest) = to_normal_form(&nf).unwrap();
        prop_assert!(rest.is_empty());
        prop_assert_eq!(again, nf);
    }

    #[test]
    fn structure_partitions_the_graph(seed in any::<u64>()) {
        let g = random_gk3(&mut StdRng::seed_from_u64(seed), 12);
        prop_assert!(is_gk3(&g));
        let p = pointed_structure(&g).unwrap();
        let on_cycles: usize = p.sources.iter().chain(&p.sinks).map(|c| c.len()).sum();
        let interior = (0..g.vertex_count()).filter(|&v| p.is_interior(v)).count();
        prop_assert_eq!(on_cycles + interior, g.vertex_count());
        let trail_edges: usize = p.trails.iter().map(|t| t.len()).sum();
        prop_assert!(on_cycles + trail_edges >= g.edge_count());
        for (k, t) in p.trails.iter().enumerate() {
            let c = trail_class(&p, k);
            prop_assert_eq!(c.modulus, p.p(t.source).gcd(&p.q(t.sink)));
            prop_assert!(c.f < c.modulus);
        }
    }

    #[test]
    fn bezout_coefficients_are_positive(p in 1usize..=12, q in 1usize..=12) {
        let (pt, qt) = bezout_positive(p, q);
        prop_assert!(pt >= 1 && qt >= 1);
        prop_assert_eq!(pt * p - qt * q, p.gcd(&q));
    }

    #[test]
    fn rotating_a_source_moves_its_ranges_back(seed in any::<u64>()) {
        let g = random_normal_form(&mut StdRng::seed_from_u64(seed), 4);
        let p = pointed_structure(&g).unwrap();
        let (h, trace) = rotate_source(&p, 0).unwrap();
        prop_assert_eq!(apply_trace(&g, &trace).unwrap(), h.clone());
        prop_assert!(is_normal_form(&h));
        let anchors = p.anchors();
        let moved: Vec<String> = anchors.iter().map(|a| trace.track_vertex(a)).collect();
        let after = pointed_structure_anchored(&h, &moved).unwrap();
        let mut expected: Vec<_> = trail_signature(&p)
            .into_iter()
            .map(|(i, a, j, b, len)| if i == 0 { (i, a, j, (b + p.q(j) - 1) % p.q(j), len) } else { (i, a, j, b, len) })
            .collect();
        expected.sort_unstable();
        // the new trail source is the predecessor, so `a` is measured from there
        let relabelled: Vec<_> = trail_signature(&after).into_iter().map(|(i, _, j, b, len)| (i, j, b, len)).collect();
        let expected: Vec<_> = expected.into_iter().map(|(i, _, j, b, len)| (i, j, b, len)).collect();
        prop_assert_eq!(relabelled, expected);
    }
}
