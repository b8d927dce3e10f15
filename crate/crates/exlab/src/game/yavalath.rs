//! Yavalath (two-player) on a hexagonal board of side 5 (61 cells).
//! Completing a line of four or more of your own pieces wins; completing a
//! line of exactly three without a simultaneous four loses. A full board is
//! a draw.

use super::{run_length, Action, Cell, GameError, GameState, Outcome, Rules};
use crate::geometry::{Geometry, HEX_AXES};

pub struct Yavalath {
    geom: Geometry,
}

impl Yavalath {
    pub fn new() -> Self {
        Yavalath {
            geom: Geometry::hex_hexagon(5),
        }
    }
}

impl Default for Yavalath {
    fn default() -> Self {
        Self::new()
    }
}

impl Rules for Yavalath {
    fn id(&self) -> &'static str {
        "yavalath"
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
        let mut best = 0;
        for &axis in HEX_AXES {
            best = best.max(run_length(&self.geom, &cells, at, axis, mover));
        }
        let full = cells.iter().all(|&c| c != Cell::Empty);
        // A four takes precedence over a simultaneously created three.
        let outcome = if best >= 4 {
            Some(Outcome::win(mover))
        } else if best == 3 {
            Some(Outcome::win(mover.opponent()))
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
