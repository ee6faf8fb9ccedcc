use assertsec::netlist::random::{random_netlist, RandomParams};
use assertsec::pathcheck::{brute_force_reach, sensitize, PathQuery, PathStatus};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small() -> RandomParams {
    RandomParams { max_inputs: 4, max_dffs: 3, max_cells: 16, reset_probability: 0.3 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn solver_agrees_with_enumeration(seed in any::<u64>(), bound in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = random_netlist(&mut rng, small());
        let nodes = n.list_nodes();
        for &dest in n.primary_outputs().iter().chain(nodes.last()) {
            for &origin in &nodes {
                let q = PathQuery::new(&n, origin, dest, bound).unwrap();
                let v = sensitize(&n, &q, None);
                let expected = brute_force_reach(&n, &q).unwrap();
                prop_assert_eq!(v.status.is_reachable(), expected, "{} -> {}", n.net_name(origin), n.net_name(dest));
                if let PathStatus::Reachable { witness } = &v.status {
                    prop_assert!(witness.replay(&n, &q));
                }
            }
        }
    }
}

#[test]
fn both_outcomes_are_exercised() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut yes, mut no_at_bound) = (0, 0);
    for _ in 0..60 {
        let n = random_netlist(&mut rng, RandomParams { max_inputs: 6, max_dffs: 5, max_cells: 30, reset_probability: 0.4 });
        let dest = n.primary_outputs()[0];
        for origin in n.list_nodes() {
            let q = PathQuery::new(&n, origin, dest, 3).unwrap();
            let v = sensitize(&n, &q, None);
            assert_eq!(v.status.is_reachable(), brute_force_reach(&n, &q).unwrap());
            match v.status {
                PathStatus::Reachable { .. } => yes += 1,
                PathStatus::UnreachableAtBound { .. } => no_at_bound += 1,
                _ => {}
            }
        }
    }
    assert!(yes > 50 && no_at_bound > 5, "reachable {yes}, unreachable at bound {no_at_bound}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(80))]

    #[test]
    fn reachability_grows_with_the_bound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = random_netlist(&mut rng, RandomParams::default());
        let dest = n.primary_outputs()[0];
        for origin in n.list_nodes() {
            let mut was = false;
            for k in 1..=5 {
                let q = PathQuery::new(&n, origin, dest, k).unwrap();
                let v = sensitize(&n, &q, None);
                let now = v.status.is_reachable();
                prop_assert!(!was || now, "{} reachable at a smaller bound but not at {k}", n.net_name(origin));
                if now {
                    prop_assert!(n.structural_reach(origin, dest));
                }
                was = now;
            }
        }
    }
}
