//! Connect 4 on the standard 6x7 board (7 columns, 6 rows). Pieces drop to
//! the lowest empty cell of a column; four in a row wins.

use super::{run_length, Action, Cell, GameError, GameState, Outcome, Rules};
use crate::geometry::{Coord, Geometry, SQUARE_AXES};

const COLS: i32 = 7;
const ROWS: i32 = 6;

pub struct Connect4 {
    geom: Geometry,
}

impl Connect4 {
    pub fn new() -> Self {
        Connect4 {
            geom: Geometry::square(COLS, ROWS),
        }
    }

    fn drop_cell(&self, state: &GameState, col: i32) -> Option<usize> {
        for y in 0..ROWS {
            let i = self.geom.index_of(Coord::new(col, y)).unwrap();
            if state.cells[i] == Cell::Empty {
                return Some(i);
            }
        }
        None
    }
}

impl Default for Connect4 {
    fn default() -> Self {
        Self::new()
    }
}

impl Rules for Connect4 {
    fn id(&self) -> &'static str {
        "connect4"
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
        Ok((0..COLS)
            .filter_map(|col| self.drop_cell(state, col))
            .map(Action::Place)
            .collect())
    }

    fn apply(&self, state: &GameState, action: Action) -> Result<GameState, GameError> {
        if state.is_terminal() {
            return Err(GameError::TerminalState);
        }
        let i = match action {
            Action::Place(i) if i < state.cells.len() => i,
            other => return Err(GameError::IllegalAction(other)),
        };
        let at = self.geom.coord_of(i);
        if self.drop_cell(state, at.x) != Some(i) {
            return Err(GameError::IllegalAction(action));
        }
        let mover = state.mover;
        let mut cells = state.cells.clone();
        cells[i] = Cell::Piece(mover);
        let won = SQUARE_AXES
            .iter()
            .any(|&axis| run_length(&self.geom, &cells, at, axis, mover) >= 4);
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

    fn place_col(g: &Connect4, s: &GameState, col: i32) -> GameState {
        let i = g.drop_cell(s, col).unwrap();
        g.apply(s, Action::Place(i)).unwrap()
    }

    #[test]
    fn empty_board_has_seven_actions() {
        let g = Connect4::new();
        assert_eq!(g.legal_actions(&g.initial()).unwrap().len(), 7);
    }

    #[test]
    fn full_column_is_excluded() {
        let g = Connect4::new();
        let mut s = g.initial();
        for _ in 0..6 {
            s = place_col(&g, &s, 3);
        }
        let actions = g.legal_actions(&s).unwrap();
        assert_eq!(actions.len(), 6);
        for a in actions {
            assert_ne!(g.geom.coord_of(a.target()).x, 3);
        }
    }

    #[test]
    fn vertical_four_wins() {
        let g = Connect4::new();
        let mut s = g.initial();
        for _ in 0..3 {
            s = place_col(&g, &s, 0); // P1
            s = place_col(&g, &s, 1); // P2
        }
        s = place_col(&g, &s, 0); // P1 completes the column
        assert_eq!(s.outcome.unwrap().utility_p1, 1.0);
    }

    #[test]
    fn diagonal_four_wins() {
        let g = Connect4::new();
        let mut s = g.initial();
        // Build a staircase so P1 lands 4 on the / diagonal.
        for &col in &[0, 1, 1, 2, 2, 3, 2, 3, 3, 5, 3] {
            s = place_col(&g, &s, col);
        }
        assert_eq!(s.outcome.unwrap().utility_p1, 1.0);
    }
}
