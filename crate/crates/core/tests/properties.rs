mod common;

use std::collections::VecDeque;

use common::{random_point, small_instance};
use labelcut_core::io::{parse_instance, write_instance};
use labelcut_core::separation::{SeparationMethod, Separator};
use labelcut_core::{Instance, LabelSet, LiftMode, NodeId};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mask_set(mask: u32, k: usize) -> LabelSet {
    (0..k as u32).filter(|l| mask >> l & 1 == 1).collect()
}

fn instance_strategy() -> impl Strategy<Value = Instance> {
    (0u64..10_000).prop_map(|s| small_instance(s, 50))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reach_shrinks_as_more_labels_are_blocked(inst in instance_strategy(), a in any::<u32>(), b in any::<u32>()) {
        let k = inst.label_count();
        let small = mask_set(a, k);
        let large = mask_set(a | b, k);
        for w in 0..inst.scenario_count() {
            let r_small = inst.reach_set(w, &small).unwrap();
            let r_large = inst.reach_set(w, &large).unwrap();
            prop_assert!(r_large.iter().all(|v| r_small.binary_search(v).is_ok()));
        }
    }

    #[test]
    fn objective_between_seed_count_and_unblocked(inst in instance_strategy(), a in any::<u32>()) {
        let blocked = mask_set(a, inst.label_count());
        let f = inst.eval_objective(&blocked);
        let seeds = num_rational::Ratio::from_integer(inst.seeds().len() as u64);
        prop_assert!(f >= seeds);
        prop_assert!(f <= inst.eval_objective(&LabelSet::new()));
    }

    #[test]
    fn closure_is_idempotent_and_reach_preserving(inst in instance_strategy(), a in any::<u32>()) {
        let closed = inst.pure_label_path_closure();
        let blocked = mask_set(a, inst.label_count());
        for (w, g) in closed.iter().enumerate() {
            prop_assert_eq!(&g.with_pure_label_shortcuts(inst.seeds()), g);
            prop_assert_eq!(
                g.reach(inst.seeds(), &blocked),
                inst.scenario_graph(w).reach(inst.seeds(), &blocked)
            );
        }
    }

    #[test]
    fn extended_seeds_match_plain_search(inst in instance_strategy()) {
        let ext = inst.extended_seed_sets();
        for w in 0..inst.scenario_count() {
            let g = inst.scenario_graph(w);
            let mut seen = vec![false; inst.node_count()];
            let mut queue: VecDeque<NodeId> = inst.seeds().iter().copied().collect();
            for &s in inst.seeds() {
                seen[s as usize] = true;
            }
            while let Some(u) = queue.pop_front() {
                for slot in g.out_range(u) {
                    let v = g.head(slot);
                    if inst.is_unblockable(g.label(slot)) && !seen[v as usize] {
                        seen[v as usize] = true;
                        queue.push_back(v);
                    }
                }
            }
            let expect: Vec<NodeId> = (0..inst.node_count() as NodeId).filter(|&v| seen[v as usize]).collect();
            prop_assert_eq!(ext.get(w), &expect[..]);
        }
    }

    #[test]
    fn cuts_never_overestimate_spread(inst in instance_strategy(), seed in any::<u64>(), ext in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_point(&mut rng, inst.label_count());
        let k = inst.label_count();
        let probes: Vec<LabelSet> = (0..32u32).map(|i| mask_set(i.wrapping_mul(2654435761) ^ seed as u32, k)).collect();
        for lift in [LiftMode::N, LiftMode::P, LiftMode::H] {
            let sep = Separator::new(&inst, SeparationMethod::Combinatorial(lift), ext);
            for w in 0..inst.scenario_count() {
                let cut = sep.cut(w, &x).unwrap();
                let base = sep.seed_sets().get(w).len() as i64;
                for blocked in &probes {
                    if blocked.iter().any(|l| inst.is_unblockable(l)) {
                        continue;
                    }
                    let spread = inst.eval_spread(w, blocked).unwrap() as i64 - base;
                    prop_assert!(cut.rhs_binary(blocked) <= spread, "{lift} w={w}");
                }
            }
        }
    }

    #[test]
    fn lift_p_is_coefficientwise_below_lift_n(inst in instance_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_point(&mut rng, inst.label_count());
        let n = Separator::new(&inst, SeparationMethod::Combinatorial(LiftMode::N), true);
        let p = Separator::new(&inst, SeparationMethod::Combinatorial(LiftMode::P), true);
        for w in 0..inst.scenario_count() {
            let (cn, cp) = (n.cut(w, &x).unwrap(), p.cut(w, &x).unwrap());
            prop_assert_eq!(cn.constant, cp.constant);
            for l in 0..inst.label_count() as u32 {
                prop_assert!(cp.coefficient(l) <= cn.coefficient(l));
                prop_assert!(cp.coefficient(l) <= cp.constant);
            }
        }
    }

    #[test]
    fn binary_points_give_exact_cuts(inst in instance_strategy(), a in any::<u32>()) {
        let blocked: LabelSet = mask_set(a, inst.label_count())
            .iter()
            .filter(|&l| !inst.is_unblockable(l))
            .collect();
        for lift in [LiftMode::N, LiftMode::P] {
            let sep = Separator::new(&inst, SeparationMethod::Combinatorial(lift), true);
            for w in 0..inst.scenario_count() {
                let cut = sep.cut_at(w, &blocked).unwrap();
                let spread = inst.eval_spread(w, &blocked).unwrap() as i64;
                prop_assert_eq!(cut.rhs_binary(&blocked), spread - sep.seed_sets().get(w).len() as i64);
            }
        }
    }

    #[test]
    fn instance_text_round_trips(inst in instance_strategy()) {
        let text = write_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(write_instance(&back), text);
    }
}
