//! Our side of the existence game: build a simple set `A` while keeping,
//! for every length `n`, at least the opponent's weight `μ(n)` on the
//! `n`-bit prefix of `A`'s characteristic sequence.

use std::collections::{BTreeMap, BTreeSet};

use crate::dyadic::Dyadic;
use crate::game::{Action, GameState, Note, TaggedAction};
use crate::node::Node;

use super::{Strategy, View};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Add,
    Skip,
}

/// Total weight we hold on prefixes of the current sequence of length at
/// least `u`: what would be lost if `u` entered `A`.
pub fn cost(state: &GameState, u: u64) -> Dyadic {
    state
        .our_nodes
        .entries()
        .iter()
        .filter(|(v, _)| v.len() >= u && state.path.extends(v))
        .map(|(_, w)| w)
        .sum()
}

#[derive(Debug, Clone, Default)]
pub struct Solovay {
    handled: BTreeSet<u64>,
    a: BTreeSet<u64>,
    /// Our weight on the current prefix of each length.
    on_path: BTreeMap<u64, Dyadic>,
}

impl Solovay {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn handled(&self) -> &BTreeSet<u64> {
        &self.handled
    }

    pub fn set(&self) -> &BTreeSet<u64> {
        &self.a
    }

    fn prefix(&self, len: u64) -> Node {
        Node::from_ones(len, self.a.range(..len).copied())
    }

    fn current_cost(&self, u: u64) -> Dyadic {
        self.on_path.range(u..).map(|(_, w)| w).sum()
    }

    /// Whether `u`, just enumerated into `W_n`, should join `A`.
    pub fn consider(&self, n: u64, u: u64, cost: &Dyadic) -> Decision {
        let cheap = n < u64::from(u32::MAX) && cost < &Dyadic::pow2_neg(n as u32);
        if !self.handled.contains(&n) && u > 2 * n && cheap {
            Decision::Add
        } else {
            Decision::Skip
        }
    }

    /// Tops up every length whose current prefix holds less than `μ`.
    fn replicate(&mut self, mu: &BTreeMap<u64, Dyadic>, out: &mut Vec<TaggedAction>) {
        for (&len, want) in mu {
            let have = self.on_path.entry(len).or_insert_with(Dyadic::zero);
            if *have < *want {
                let delta = want.checked_sub(have).expect("checked above");
                *have = want.clone();
                out.push(
                    Action::Node {
                        node: Node::from_ones(len, self.a.range(..len).copied()),
                        delta,
                    }
                    .into(),
                );
            }
        }
    }
}

impl Strategy for Solovay {
    fn name(&self) -> String {
        "solovay".into()
    }

    fn next_move(&mut self, view: &View<'_>) -> Vec<TaggedAction> {
        let mu = view.state.opponent_lengths.entries();
        let mut out = Vec::new();
        self.replicate(mu, &mut out);
        let mut candidates: Vec<(u64, u64)> = view
            .last_other
            .iter()
            .filter_map(|t| match t.action {
                Action::Enumerate { set, element } => Some((set, element)),
                _ => None,
            })
            .collect();
        candidates.sort_unstable();
        for (n, u) in candidates {
            if self.consider(n, u, &self.current_cost(u)) == Decision::Skip {
                continue;
            }
            self.handled.insert(n);
            if self.a.insert(u) {
                out.push(Action::Flip { index: u }.into());
                // prefixes longer than u are fresh nodes
                self.on_path.retain(|&len, _| len <= u);
            }
            out.push(Action::Note(Note::Handle { n, u }).into());
            self.replicate(mu, &mut out);
        }
        debug_assert!(self.a.iter().all(|&u| self.prefix(u + 1).bit(u)));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{apply_move, Move, Player, Variant};

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn play(state: &mut GameState, s: &mut Solovay, opp: Vec<Action>) -> Vec<TaggedAction> {
        let v = Variant::Existence;
        let opp_move = Move {
            player: Player::Opponent,
            actions: opp.into_iter().map(Into::into).collect(),
        };
        apply_move(state, &v, &opp_move).unwrap();
        let view = View {
            variant: &v,
            state,
            last_other: &opp_move.actions,
            me: Player::Us,
        };
        let actions = s.next_move(&view);
        let mv = Move {
            player: Player::Us,
            actions: actions.clone(),
        };
        apply_move(state, &v, &mv).unwrap();
        actions
    }

    fn fresh() -> GameState {
        GameState::new(&Variant::Existence, Dyadic::from_int(2), Dyadic::one())
    }

    #[test]
    fn replicates_on_all_zero_path() {
        let mut st = fresh();
        let mut s = Solovay::new();
        let acts = play(
            &mut st,
            &mut s,
            vec![Action::Length {
                length: 3,
                delta: d("1/8"),
            }],
        );
        assert_eq!(
            acts,
            vec![TaggedAction::from(Action::Node {
                node: "000".parse().unwrap(),
                delta: d("1/8")
            })]
        );
    }

    #[test]
    fn replicates_along_characteristic_prefix() {
        let mut st = fresh();
        let mut s = Solovay::new();
        play(&mut st, &mut s, vec![Action::Enumerate { set: 1, element: 0 }]);
        // 0 is not above 2·1, so A stays empty
        assert!(s.set().is_empty());
        s.a.insert(0);
        st.path.flip(0, 0);
        play(
            &mut st,
            &mut s,
            vec![Action::Length {
                length: 2,
                delta: d("1/4"),
            }],
        );
        assert_eq!(st.our_nodes.get(&"10".parse().unwrap()), d("1/4"));
    }

    #[test]
    fn cost_sums_tail_of_path() {
        let mut st = fresh();
        st.our_nodes.increase(0, "00000".parse().unwrap(), d("1/8")).unwrap();
        st.our_nodes.increase(0, "0000000".parse().unwrap(), d("1/16")).unwrap();
        st.our_nodes.increase(0, "1000000".parse().unwrap(), d("1/2")).unwrap();
        assert_eq!(cost(&st, 5), d("3/16"));
        assert_eq!(cost(&st, 8), Dyadic::zero());
        assert_eq!(cost(&fresh(), 0), Dyadic::zero());
    }

    #[test]
    fn consider_boundaries() {
        let s = Solovay::new();
        assert_eq!(s.consider(2, 5, &Dyadic::zero()), Decision::Add);
        assert_eq!(s.consider(2, 4, &Dyadic::zero()), Decision::Skip);
        assert_eq!(s.consider(3, 10, &d("1/4")), Decision::Skip);
        assert_eq!(s.consider(3, 10, &d("1/16")), Decision::Add);
    }

    #[test]
    fn drip_feed_total_matches_sum() {
        let mut st = fresh();
        let mut s = Solovay::new();
        let mut oracle = Dyadic::zero();
        for n in 0..64u32 {
            let mu = Dyadic::pow2_neg(n + 1);
            oracle += &mu;
            play(
                &mut st,
                &mut s,
                vec![Action::Length {
                    length: u64::from(n),
                    delta: mu,
                }],
            );
        }
        assert_eq!(st.our_nodes.total(), &oracle);
    }

    #[test]
    fn adding_moves_weight_to_new_path() {
        let mut st = fresh();
        let mut s = Solovay::new();
        play(
            &mut st,
            &mut s,
            vec![Action::Length {
                length: 9,
                delta: d("1/1024"),
            }],
        );
        play(&mut st, &mut s, vec![Action::Enumerate { set: 2, element: 5 }]);
        assert!(s.set().contains(&5) && s.handled().contains(&2));
        assert_eq!(st.our_nodes.get(&"000001000".parse().unwrap()), d("1/1024"));
        assert_eq!(st.our_nodes.total(), &d("1/512"));
        // handled requirements ignore later elements
        play(&mut st, &mut s, vec![Action::Enumerate { set: 2, element: 7 }]);
        assert!(!s.set().contains(&7));
    }
}
