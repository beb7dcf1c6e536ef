use std::collections::BTreeMap;

use ktriv::covering::IntervalSet;
use ktriv::dyadic::Dyadic;
use ktriv::game::{apply_move, audit, replay, run, Action, AuditOptions, GameState, Move, Player, Trace, Variant};
use ktriv::ledger::{LedgerKind, WeightLedger};
use ktriv::node::Node;
use ktriv::pool::LengthPool;
use ktriv::strategy::opponents::Blind;
use ktriv::strategy::triviality::Solovay;
use num_bigint::BigUint;
use num_rational::BigRational;
use proptest::prelude::*;

fn dyadic() -> impl Strategy<Value = Dyadic> {
    (0u64..1 << 20, 0u32..24).prop_map(|(m, e)| Dyadic::from_parts(m, e))
}

fn node(max: usize) -> impl Strategy<Value = Node> {
    prop::collection::vec(any::<bool>(), 0..=max).prop_map(|b| Node::from_bits(&b))
}

fn ratio(d: &Dyadic) -> BigRational {
    d.to_ratio()
}

fn existence_trace(seed: u64, slots: usize) -> Trace {
    let mut us = Solovay::new();
    let mut them = Blind::new(seed, slots);
    run(
        &Variant::Existence,
        Dyadic::from_int(2),
        Dyadic::one(),
        &mut us,
        &mut them,
        4 * slots as u64,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dyadic_arithmetic_is_exact(a in dyadic(), b in dyadic()) {
        prop_assert_eq!(ratio(&(&a + &b)), ratio(&a) + ratio(&b));
        prop_assert_eq!(ratio(&(&a * &b)), ratio(&a) * ratio(&b));
        match a.checked_sub(&b) {
            Ok(diff) => prop_assert_eq!(ratio(&diff), ratio(&a) - ratio(&b)),
            Err(_) => prop_assert!(a < b),
        }
        prop_assert_eq!(a.cmp(&b), ratio(&a).cmp(&ratio(&b)));
        let text = a.to_string();
        prop_assert_eq!(text.parse::<Dyadic>().unwrap(), a);
    }

    #[test]
    fn ledgers_only_grow(deltas in prop::collection::vec((0u64..8, dyadic()), 1..40)) {
        let budget = Dyadic::from_int(4);
        let mut ledger: WeightLedger<u64> = WeightLedger::new(LedgerKind::Lengths, budget.clone());
        for (step, (key, delta)) in deltas.into_iter().enumerate() {
            let before = ledger.clone();
            let fits = before.total() + &delta <= budget;
            match ledger.increase(step as u64, key, delta.clone()) {
                Ok(()) => {
                    prop_assert!(fits);
                    prop_assert_eq!(ledger.get(&key), &before.get(&key) + &delta);
                    for (k, w) in before.entries() {
                        prop_assert!(ledger.get(k) >= *w);
                    }
                }
                Err(_) => {
                    prop_assert!(!fits);
                    prop_assert_eq!(&ledger, &before);
                }
            }
            let sum: Dyadic = ledger.entries().values().sum();
            prop_assert_eq!(&sum, ledger.total());
            prop_assert!(ledger.total() <= &budget);
        }
    }

    #[test]
    fn gamma_parts_are_disjoint_subpools(offset in 0u64..50, stride in 1u64..6, a in 1u64..40, b in 1u64..40) {
        let pool = LengthPool::new(offset, stride).unwrap();
        let pa = pool.gamma_part(a).unwrap();
        let pb = pool.gamma_part(b).unwrap();
        prop_assert!(pa.is_subpool_of(&pool));
        let first: Vec<u64> = pa.iter().take(64).collect();
        prop_assert!(first.iter().all(|&x| pool.contains(x)));
        if a != b {
            prop_assert!(!pa.intersects(&pb));
            prop_assert!(first.iter().all(|&x| !pb.contains(x)));
        }
    }

    #[test]
    fn interval_measure_matches_count(prefixes in prop::collection::vec(node(10), 0..8)) {
        let u = IntervalSet::new(prefixes.clone());
        let depth = 12;
        let count = Node::all_of_length(depth)
            .filter(|x| prefixes.iter().any(|p| p.is_prefix_of(x)))
            .count();
        prop_assert_eq!(u.measure(), Dyadic::new(BigUint::from(count), depth));
        // [x] lies in the union when every depth-12 extension does
        for x in Node::all_of_length(6) {
            let covered = Node::all_of_length(6)
                .all(|tail| prefixes.iter().any(|p| p.is_prefix_of(&x.concat(&tail))));
            prop_assert_eq!(u.contains_prefix_of(&x), covered);
        }
        prop_assert_eq!(IntervalSet::parse(&u.to_text()).unwrap(), u);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn runs_are_deterministic(seed in any::<u64>(), slots in 1usize..200) {
        let a = existence_trace(seed, slots);
        let b = existence_trace(seed, slots);
        prop_assert_eq!(&a, &b);
        prop_assert!(a.end.violation.is_none());
        let (state, v) = replay(&a, &Variant::Existence);
        prop_assert!(v.is_none());
        prop_assert_eq!(state.opponent_lengths.entries().len() as u64, Blind::LENGTHS);
    }

    #[test]
    fn traces_round_trip(seed in any::<u64>(), slots in 1usize..100) {
        let t = existence_trace(seed, slots);
        let text = t.to_jsonl();
        let back = Trace::from_jsonl(&text).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(back.to_jsonl(), text);
    }

    #[test]
    fn audit_survives_tampering(seed in any::<u64>(), edits in prop::collection::vec((any::<prop::sample::Index>(), 0u8..4, dyadic()), 1..6)) {
        let mut t = existence_trace(seed, 50);
        for (at, kind, delta) in edits {
            let i = at.index(t.moves.len());
            let mv = &mut t.moves[i];
            match kind {
                0 => mv.actions.clear(),
                1 => mv.actions.push(Action::Length { length: 3, delta }.into()),
                2 => mv.actions.push(Action::Node { node: "101".parse().unwrap(), delta }.into()),
                _ => mv.player = mv.player.other(),
            }
        }
        // either a report or a structured error, never a panic
        let _ = audit(&t, &Variant::Existence, &AuditOptions::default());
        let text = t.to_jsonl();
        let _ = Trace::from_jsonl(&text);
    }

    #[test]
    fn budgets_are_never_exceeded(moves in prop::collection::vec((0u64..16, dyadic()), 1..60)) {
        let v = Variant::Existence;
        let mut state = GameState::new(&v, Dyadic::from_int(2), Dyadic::one());
        let mut spent: BTreeMap<bool, Dyadic> = BTreeMap::new();
        for (len, delta) in moves {
            let player = Player::to_move(state.step);
            let action = if player == Player::Opponent {
                Action::Length { length: len, delta: delta.clone() }
            } else {
                Action::Node { node: Node::from_ones(len, []), delta: delta.clone() }
            };
            let mv = Move { player, actions: vec![action.into()] };
            let before = state.clone();
            let ok = apply_move(&mut state, &v, &mv).is_ok();
            if !ok {
                prop_assert_eq!(&state, &before);
                continue;
            }
            *spent.entry(player == Player::Opponent).or_insert_with(Dyadic::zero) += &delta;
            prop_assert!(state.opponent_lengths.total() <= &Dyadic::one());
            prop_assert!(state.our_nodes.total() <= &Dyadic::from_int(2));
        }
        let theirs = spent.get(&true).cloned().unwrap_or_else(Dyadic::zero);
        prop_assert_eq!(state.opponent_lengths.total(), &theirs);
    }
}
