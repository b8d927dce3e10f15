//! Tic-Tac-Toe on a 3x3 board. Small enough to solve exactly, which makes it
//! the oracle game for search and policy tests.

use super::{run_length, Action, Cell, GameError, GameState, Outcome, Rules};
use crate::geometry::{Geometry, SQUARE_AXES};

pub struct TicTacToe {
    geom: Geometry,
}

impl TicTacToe {
    pub fn new() -> Self {
        TicTacToe {
            geom: Geometry::square(3, 3),
        }
    }
}

impl Default for TicTacToe {
    fn default() -> Self {
        Self::new()
    }
}

impl Rules for TicTacToe {
    fn id(&self) -> &'static str {
        "tictactoe"
    }

    fn geometry(&self) -> &Geometry {
        &self.geom
    }

    fn initial(&self) -> GameState {
        GameState::initial(self.geom.cell_count())
    }

    fn legal_actions(&self, state: &GameState) -> Result<Vec<Action>, GameError> {
        if state.is_terminal() {
            return Err(GameError::TerminalState);
        }
        Ok(state
            .cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == Cell::Empty)
            .map(|(i, _)| Action::Place(i))
            .collect())
    }

    fn apply(&self, state: &GameState, action: Action) -> Result<GameState, GameError> {
        if state.is_terminal() {
            return Err(GameError::TerminalState);
        }
        let i = match action {
            Action::Place(i) if i < state.cells.len() && state.cells[i] == Cell::Empty => i,
            other => return Err(GameError::IllegalAction(other)),
        };
        let mover = state.mover;
        let mut cells = state.cells.clone();
        cells[i] = Cell::Piece(mover);
        let at = self.geom.coord_of(i);
        let won = SQUARE_AXES
            .iter()
            .any(|&axis| run_length(&self.geom, &cells, at, axis, mover) >= 3);
        let full = cells.iter().all(|&c| c != Cell::Empty);
        let outcome = if won {
            Some(Outcome::win(mover))
        } else if full {
            Some(Outcome::draw())
        } else {
            None
        };
        Ok(GameState {
            cells,
            mover: mover.opponent(),
            move_count: state.move_count + 1,
            outcome,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Player;

    #[test]
    fn empty_board_has_nine_actions() {
        let g = TicTacToe::new();
        assert_eq!(g.legal_actions(&g.initial()).unwrap().len(), 9);
    }

    #[test]
    fn completing_a_line_wins() {
        let g = TicTacToe::new();
        let mut s = g.initial();
        // X: 0, 1, 2 across the bottom row; O: 3, 4.
        for &i in &[0, 3, 1, 4, 2] {
            s = g.apply(&s, Action::Place(i)).unwrap();
        }
        let o = s.outcome.expect("line of three ends the game");
        assert_eq!(o.utility_p1, 1.0);
        assert_eq!(o.utility_p2, -1.0);
        assert_eq!(s.move_count, 5);
    }

    #[test]
    fn full_board_without_line_is_a_draw() {
        let g = TicTacToe::new();
        let mut s = g.initial();
        // Ends as O X X / X O O / X O X (rows bottom-up): no line for anyone.
        for &i in &[1, 0, 2, 4, 3, 5, 6, 7, 8] {
            s = g.apply(&s, Action::Place(i)).unwrap();
        }
        assert_eq!(s.outcome, Some(Outcome::draw()));
    }

    #[test]
    fn illegal_and_terminal_calls_error() {
        let g = TicTacToe::new();
        let s = g.initial();
        let s1 = g.apply(&s, Action::Place(4)).unwrap();
        assert!(matches!(
            g.apply(&s1, Action::Place(4)),
            Err(GameError::IllegalAction(_))
        ));
        assert_eq!(s1.mover, Player::P2);
        let mut t = g.initial();
        for &i in &[0, 3, 1, 4, 2] {
            t = g.apply(&t, Action::Place(i)).unwrap();
        }
        assert!(matches!(g.legal_actions(&t), Err(GameError::TerminalState)));
    }
}
