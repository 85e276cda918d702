use leafglue::block_gluing::{model_from_delta, reconstruct_leaf};
use leafglue::circle_diffeo::{circle_offset, perturb_to_match, BumpFlow, DensePointFamily, DiffeoChain};
use leafglue::surface_assembly::{
    assemble_from_schedule, handle_surgery, oracle_check, permute_boundaries, schedule_gluing, truncate_pieces,
    GluingSchedule, Truncation,
};
use leafglue::tree_codec::{check_conditions, parse_tree_spec, unroll, Side, TreeAutomaton};
use proptest::prelude::*;

/// Small automata where every state has one or two children. The first child
/// of state i is i+1, which keeps every state reachable.
fn automaton() -> impl Strategy<Value = TreeAutomaton> {
    (1usize..=4)
        .prop_flat_map(|n| {
            proptest::collection::vec((any::<bool>(), any::<bool>(), 0..n, 0..n), n)
        })
        .prop_map(|states| {
            let name = |i: usize| format!("s{i}");
            let mut text = String::new();
            let n = states.len();
            for (i, &(color, two, a, b)) in states.iter().enumerate() {
                let a = if i + 1 < n { i + 1 } else { a };
                let children = if two {
                    format!("left {} right {}", name(a), name(b))
                } else {
                    format!("only {}", name(a))
                };
                text.push_str(&format!("state {} color {} children {children}; ", name(i), u8::from(color)));
            }
            text.push_str("start s0");
            parse_tree_spec(&text).expect("generated spec parses")
        })
}

fn star_automaton() -> impl Strategy<Value = TreeAutomaton> {
    automaton().prop_filter("(★) holds", |a| check_conditions(a).star)
}

fn shuffled(n: u32) -> impl Strategy<Value = Vec<u32>> {
    Just((1..=n).collect::<Vec<u32>>()).prop_shuffle()
}

fn fixed_n(s: &GluingSchedule) -> u32 {
    s.entries.iter().map(|e| e.lhs_index.max(e.rhs_index)).max().unwrap_or(1)
}

fn bumpy_chain(rotation: f64, bumps: &[(f64, f64, bool)]) -> DiffeoChain {
    bumps.iter().fold(DiffeoChain::rotation(rotation), |c, &(center, radius, up)| {
        let h = if up { 0.05 } else { -0.05 };
        c.then(BumpFlow::new(center, radius, h, 1.0).unwrap())
    })
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn pipelines_agree_on_genus_and_components(aut in star_automaton(), depth in 0usize..=5) {
        let o = oracle_check(&aut, depth).unwrap();
        prop_assert!(o.matches, "{o:?}");
        prop_assert_eq!(o.tree.genus, o.assembly.genus);
        prop_assert_eq!(o.tree.component_count, o.assembly.component_count);
    }

    #[test]
    fn schedule_jsonl_roundtrip(aut in star_automaton(), depth in 0usize..=5) {
        let s = schedule_gluing(&aut, depth).unwrap();
        let back = GluingSchedule::from_jsonl(&s.to_jsonl()).unwrap();
        prop_assert_eq!(&back.entries, &s.entries);
        let inv = |s: &GluingSchedule| assemble_from_schedule(s, Truncation::Watermark).unwrap().invariants().unwrap();
        prop_assert_eq!(inv(&back), inv(&s));
    }

    #[test]
    fn schedules_are_deterministic(aut in star_automaton(), depth in 0usize..=5) {
        prop_assert_eq!(schedule_gluing(&aut, depth).unwrap(), schedule_gluing(&aut, depth).unwrap());
    }

    #[test]
    fn renumbering_is_a_relabeling(
        (s, perm) in (star_automaton(), 1usize..=4)
            .prop_map(|(a, d)| schedule_gluing(&a, d).unwrap())
            .prop_flat_map(|s| { let n = fixed_n(&s); (Just(s), shuffled(n)) })
    ) {
        let n = fixed_n(&s);
        let p = permute_boundaries(&s, &perm).unwrap();
        let before = assemble_from_schedule(&s, Truncation::Fixed(n)).unwrap().invariants().unwrap();
        let after = assemble_from_schedule(&p, Truncation::Fixed(n)).unwrap().invariants().unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn surgery_adds_one_handle_per_piece(aut in automaton(), depth in 0usize..=4, pick in any::<u64>()) {
        let k = truncate_pieces(&unroll(&aut, depth).unwrap());
        let pieces: Vec<usize> = (0..k.pieces.len()).filter(|i| (pick >> (i % 64)) & 1 == 1).collect();
        let h = handle_surgery(&k, &pieces).unwrap();
        let (a, b) = (k.invariants().unwrap(), h.invariants().unwrap());
        prop_assert_eq!(b.genus, a.genus + pieces.len() as u64);
        prop_assert_eq!(b.component_count, a.component_count);
        prop_assert_eq!(b.boundary_count, a.boundary_count);
    }

    #[test]
    fn chains_preserve_orientation_and_invert(
        rotation in 0.0f64..1.0,
        bumps in proptest::collection::vec((0.0f64..1.0, 0.05f64..0.2, any::<bool>()), 0..4),
        x in 0.0f64..1.0,
    ) {
        let c = bumpy_chain(rotation, &bumps);
        prop_assert!(c.is_orientation_preserving(1 << 12));
        prop_assert!(circle_offset(c.inverse(c.eval(x)), x).abs() < 1e-9);
    }

    #[test]
    fn perturbation_pins_and_matches(
        rotation in 0.0f64..1.0,
        bumps in proptest::collection::vec((0.0f64..1.0, 0.05f64..0.2, any::<bool>()), 0..3),
        x in 0.0f64..1.0,
        pinned in proptest::collection::vec(0.0f64..1.0, 0..5),
        offset in 0.0f64..1.0,
        k in 0usize..=3,
    ) {
        let phi = bumpy_chain(rotation, &bumps);
        let pinned: Vec<f64> =
            pinned.into_iter().filter(|&p| circle_offset(phi.eval(p), phi.eval(x)).abs() > 1e-6).collect();
        let y = DensePointFamily::new(3, 0.618_033_988_749_894_8, offset).unwrap();
        let p = perturb_to_match(&phi, x, &y, &pinned, 0.1, k).unwrap();
        for &q in &pinned {
            prop_assert!(circle_offset(p.chain.eval(q), phi.eval(q)).abs() <= 1e-12);
        }
        prop_assert!(circle_offset(p.chain.eval(x), p.y).abs() <= 1e-9);
        prop_assert!(p.estimate < 0.1);
    }
}

proptest! {
    #![proptest_config(config(6))]

    #[test]
    fn reconstruction_ignores_model_seed(seed_a in any::<u64>(), seed_b in any::<u64>()) {
        let s = schedule_gluing(&leafglue::corpus::jacobs_ladder(), 3).unwrap();
        let inv = |seed| {
            let m = model_from_delta(&s.delta(), 4, seed).unwrap();
            reconstruct_leaf(&m, (Side::Right, 1), 4).unwrap().invariants().unwrap()
        };
        prop_assert_eq!(inv(seed_a), inv(seed_b));
    }
}
