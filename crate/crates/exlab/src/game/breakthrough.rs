//! Breakthrough on an 8x8 board. Each side starts with two full rows of
//! pawns. Pawns move one step straight or diagonally forward; captures are
//! diagonal only. A player wins by reaching the opponent's home rank or by
//! capturing every opposing pawn; a player with no legal move loses.

use super::{Action, Cell, GameError, GameState, Outcome, Player, Rules};
use crate::geometry::{Coord, Geometry};

const SIZE: i32 = 8;

pub struct Breakthrough {
    geom: Geometry,
}

impl Breakthrough {
    pub fn new() -> Self {
        Breakthrough {
            geom: Geometry::square(SIZE, SIZE),
        }
    }

    fn forward(player: Player) -> i32 {
        match player {
            Player::P1 => 1,
            Player::P2 => -1,
        }
    }

    fn home_rank(player: Player) -> i32 {
        match player {
            Player::P1 => 0,
            Player::P2 => SIZE - 1,
        }
    }

    fn moves_for(&self, cells: &[Cell], player: Player) -> Vec<Action> {
        let dy = Self::forward(player);
        let mut actions = Vec::new();
        for (i, &cell) in cells.iter().enumerate() {
            if cell != Cell::Piece(player) {
                continue;
            }
            let from = self.geom.coord_of(i);
            for dx in [-1, 0, 1] {
                let to = Coord::new(from.x + dx, from.y + dy);
                let Some(j) = self.geom.index_of(to) else {
                    continue;
                };
                let ok = match cells[j] {
                    Cell::Empty => true,
                    // captures only on the diagonals
                    Cell::Piece(p) => p != player && dx != 0,
                };
                if ok {
                    actions.push(Action::Move { from: i, to: j });
                }
            }
        }
        actions
    }
}

impl Default for Breakthrough {
    fn default() -> Self {
        Self::new()
    }
}

impl Rules for Breakthrough {
    fn id(&self) -> &'static str {
        "breakthrough"
    }

    fn geometry(&self) -> &Geometry {
        &self.geom
    }

    fn initial(&self) -> GameState {
        let mut state = GameState::initial(self.geom.cell_count());
        for x in 0..SIZE {
            for y in [0, 1] {
                let i = self.geom.index_of(Coord::new(x, y)).unwrap();
                state.cells[i] = Cell::Piece(Player::P1);
            }
            for y in [SIZE - 2, SIZE - 1] {
                let i = self.geom.index_of(Coord::new(x, y)).unwrap();
                state.cells[i] = Cell::Piece(Player::P2);
            }
        }
        state
    }

    fn legal_actions(&self, state: &GameState) -> Result<Vec<Action>, GameError> {
        if state.is_terminal() {
            return Err(GameError::TerminalState);
        }
        Ok(self.moves_for(&state.cells, state.mover))
    }

    fn apply(&self, state: &GameState, action: Action) -> Result<GameState, GameError> {
        if state.is_terminal() {
            return Err(GameError::TerminalState);
        }
        let (from, to) = match action {
            Action::Move { from, to } if from < state.cells.len() && to < state.cells.len() => {
                (from, to)
            }
            other => return Err(GameError::IllegalAction(other)),
        };
        if !self.moves_for(&state.cells, state.mover).contains(&action) {
            return Err(GameError::IllegalAction(action));
        }
        let mover = state.mover;
        let opponent = mover.opponent();
        let mut cells = state.cells.clone();
        cells[from] = Cell::Empty;
        cells[to] = Cell::Piece(mover);

        let reached = self.geom.coord_of(to).y == Self::home_rank(opponent);
        let opponent_alive = cells.iter().any(|&c| c == Cell::Piece(opponent));
        let outcome = if reached || !opponent_alive {
            Some(Outcome::win(mover))
        } else if self.moves_for(&cells, opponent).is_empty() {
            // stalemated side loses; keeps "terminal iff no legal actions"
            Some(Outcome::win(mover))
        } else {
            None
        };
        Ok(GameState {
            cells,
            mover: opponent,
            move_count: state.move_count + 1,
            outcome,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_position_counts() {
        let g = Breakthrough::new();
        let s = g.initial();
        let p1 = s.cells.iter().filter(|&&c| c == Cell::Piece(Player::P1)).count();
        assert_eq!(p1, 16);
        // front-rank pawns: 8 straight + 14 diagonal moves
        assert_eq!(g.legal_actions(&s).unwrap().len(), 22);
    }

    #[test]
    fn straight_moves_cannot_capture() {
        let g = Breakthrough::new();
        let mut cells = vec![Cell::Empty; 64];
        let from = g.geom.index_of(Coord::new(3, 3)).unwrap();
        let block = g.geom.index_of(Coord::new(3, 4)).unwrap();
        let diag = g.geom.index_of(Coord::new(4, 4)).unwrap();
        cells[from] = Cell::Piece(Player::P1);
        cells[block] = Cell::Piece(Player::P2);
        cells[diag] = Cell::Piece(Player::P2);
        let moves = g.moves_for(&cells, Player::P1);
        assert!(!moves.contains(&Action::Move { from, to: block }));
        assert!(moves.contains(&Action::Move { from, to: diag }));
    }

    #[test]
    fn reaching_last_rank_wins() {
        let g = Breakthrough::new();
        let mut s = g.initial();
        s.cells = vec![Cell::Empty; 64];
        let from = g.geom.index_of(Coord::new(2, 6)).unwrap();
        let opp = g.geom.index_of(Coord::new(7, 7)).unwrap();
        s.cells[from] = Cell::Piece(Player::P1);
        s.cells[opp] = Cell::Piece(Player::P2);
        let to = g.geom.index_of(Coord::new(2, 7)).unwrap();
        let s2 = g.apply(&s, Action::Move { from, to }).unwrap();
        assert_eq!(s2.outcome.unwrap().utility_p1, 1.0);
    }

    #[test]
    fn capturing_last_pawn_wins() {
        let g = Breakthrough::new();
        let mut s = g.initial();
        s.cells = vec![Cell::Empty; 64];
        let from = g.geom.index_of(Coord::new(2, 2)).unwrap();
        let prey = g.geom.index_of(Coord::new(3, 3)).unwrap();
        s.cells[from] = Cell::Piece(Player::P1);
        s.cells[prey] = Cell::Piece(Player::P2);
        let s2 = g.apply(&s, Action::Move { from, to: prey }).unwrap();
        assert_eq!(s2.outcome.unwrap().utility_p1, 1.0);
    }
}
