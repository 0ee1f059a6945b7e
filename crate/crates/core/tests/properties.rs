use proptest::prelude::*;

use sbm_vips::metrics::{hard_labels, l1_to_truth, l1_to_truth_general, nmi};
use sbm_vips::pairing::random_pairing;

fn membership_and_truth() -> impl Strategy<Value = (Vec<f64>, Vec<usize>)> {
    (1usize..60).prop_flat_map(|n| (prop::collection::vec(0.0f64..=1.0, n), prop::collection::vec(0usize..2, n)))
}

proptest! {
    #[test]
    fn l1_is_invariant_under_label_swap((u, z) in membership_and_truth()) {
        let swapped: Vec<usize> = z.iter().map(|&x| 1 - x).collect();
        let a = l1_to_truth(&u, &z).unwrap();
        let b = l1_to_truth(&u, &swapped).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!(a >= 0.0 && a <= u.len() as f64 / 2.0 + 1e-9);
    }

    #[test]
    fn general_l1_matches_binary_at_two_classes((u, z) in membership_and_truth()) {
        let rows: Vec<Vec<f64>> = u.iter().map(|&x| vec![1.0 - x, x]).collect();
        let a = l1_to_truth(&u, &z).unwrap();
        let b = l1_to_truth_general(&rows, &z, 2).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn nmi_ignores_label_names(
        labels in prop::collection::vec((0usize..4, 0usize..4), 2..80),
        perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let a: Vec<usize> = labels.iter().map(|x| x.0).collect();
        let b: Vec<usize> = labels.iter().map(|x| x.1).collect();
        let renamed: Vec<usize> = b.iter().map(|&x| perm[x] + 10).collect();
        let base = nmi(&a, &b).unwrap();
        prop_assert!((base - nmi(&a, &renamed).unwrap()).abs() < 1e-12);
        prop_assert!((base - nmi(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&base));
    }

    #[test]
    fn exact_membership_has_zero_error_and_unit_nmi(z in prop::collection::vec(0usize..2, 2..80)) {
        prop_assume!(z.contains(&0) && z.contains(&1));
        let u: Vec<f64> = z.iter().map(|&x| x as f64).collect();
        prop_assert_eq!(l1_to_truth(&u, &z).unwrap(), 0.0);
        prop_assert!((nmi(&hard_labels(&u), &z).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pairing_orders_round_trip(m in 1usize..100, seed in any::<u64>()) {
        let pairing = random_pairing(2 * m, seed).unwrap();
        let x: Vec<usize> = (0..2 * m).map(|i| i * 7 + 1).collect();
        prop_assert_eq!(pairing.to_node_order(&pairing.to_pairing_order(&x)), x);
        for (pos, &node) in pairing.node_order().iter().enumerate() {
            let (side, k) = pairing.locate(node);
            prop_assert_eq!(k, pos % m);
            prop_assert_eq!(side == sbm_vips::pairing::Side::First, pos < m);
        }
    }
}
