//! Exhaustive negamax reference for small games, used as an independent
//! ground truth when checking search quality. Only practical for games the
//! size of Tic-Tac-Toe.

use crate::game::{Action, Cell, GameState, Player, Rules};
use std::collections::HashMap;

type Key = (Vec<Cell>, Player);

/// Memoized exact game values, from the mover's perspective.
#[derive(Default)]
pub struct MinimaxCache {
    values: HashMap<Key, i8>,
}

impl MinimaxCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn key(state: &GameState) -> Key {
    (state.cells.clone(), state.mover)
}

/// Exact value of `state` for the player to move: 1 win, 0 draw, -1 loss.
pub fn minimax_value(rules: &dyn Rules, state: &GameState, cache: &mut MinimaxCache) -> i8 {
    if let Some(o) = state.outcome {
        return o.utility_for(state.mover) as i8;
    }
    let k = key(state);
    if let Some(&v) = cache.values.get(&k) {
        return v;
    }
    let mut best = i8::MIN;
    for a in rules.legal_actions(state).expect("non-terminal") {
        let next = rules.apply(state, a).expect("legal");
        let v = -minimax_value(rules, &next, cache);
        if v > best {
            best = v;
        }
        if best == 1 {
            break;
        }
    }
    cache.values.insert(k, best);
    best
}

/// All actions achieving the minimax value.
pub fn optimal_actions(
    rules: &dyn Rules,
    state: &GameState,
    cache: &mut MinimaxCache,
) -> Vec<Action> {
    let best = minimax_value(rules, state, cache);
    rules
        .legal_actions(state)
        .expect("non-terminal")
        .into_iter()
        .filter(|&a| {
            let next = rules.apply(state, a).expect("legal");
            -minimax_value(rules, &next, cache) == best
        })
        .collect()
}

/// Whether the mover has an immediately winning action.
pub fn has_win_in_one(rules: &dyn Rules, state: &GameState) -> bool {
    rules
        .legal_actions(state)
        .expect("non-terminal")
        .into_iter()
        .any(|a| {
            let next = rules.apply(state, a).expect("legal");
            next.outcome
                .map(|o| o.utility_for(state.mover) > 0.0)
                .unwrap_or(false)
        })
}

/// Every distinct non-terminal state reachable from the initial position
/// (breadth-first, deduplicated by board + mover).
pub fn reachable_nonterminal_states(rules: &dyn Rules) -> Vec<GameState> {
    let mut seen: HashMap<Key, ()> = HashMap::new();
    let mut queue = vec![rules.initial()];
    let mut out = Vec::new();
    while let Some(s) = queue.pop() {
        if s.is_terminal() || seen.insert(key(&s), ()).is_some() {
            continue;
        }
        for a in rules.legal_actions(&s).expect("non-terminal") {
            queue.push(rules.apply(&s, a).expect("legal"));
        }
        out.push(s);
    }
    out
}
