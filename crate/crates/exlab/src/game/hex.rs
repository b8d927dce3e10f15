//! The game of Hex on a rhombic board with configurable side length (5-11).
//! P1 connects the two rows r = 0 and r = side-1; P2 connects the two
//! columns q = 0 and q = side-1. Hex admits no draws, and the swap rule is
//! not used.

use super::{Action, Cell, GameError, GameState, Outcome, Player, Rules};
use crate::geometry::Geometry;

pub struct HexGame {
    geom: Geometry,
    side: i32,
}

impl HexGame {
    pub fn new(side: i32) -> Result<Self, GameError> {
        if !(5..=11).contains(&side) {
            return Err(GameError::InvalidParameter(format!(
                "hex side length must be in 5..=11, got {side}"
            )));
        }
        Ok(HexGame {
            geom: Geometry::hex_rhombus(side),
            side,
        })
    }

    pub fn side(&self) -> i32 {
        self.side
    }

    /// True when the `player` group containing `start` touches both of that
    /// player's edges.
    fn connects(&self, cells: &[Cell], player: Player, start: usize) -> bool {
        let mut seen = vec![false; cells.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let (mut low, mut high) = (false, false);
        while let Some(i) = stack.pop() {
            let c = self.geom.coord_of(i);
            let lane = match player {
                Player::P1 => c.y,
                Player::P2 => c.x,
            };
            if lane == 0 {
                low = true;
            }
            if lane == self.side - 1 {
                high = true;
            }
            if low && high {
                return true;
            }
            for &d in self.geom.adjacency_offsets() {
                if let Some(j) = self.geom.index_of(c.add(d)) {
                    if !seen[j] && cells[j] == Cell::Piece(player) {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        false
    }
}

impl Rules for HexGame {
    fn id(&self) -> &'static str {
        "hex"
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
        let outcome = if self.connects(&cells, mover, i) {
            Some(Outcome::win(mover))
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
