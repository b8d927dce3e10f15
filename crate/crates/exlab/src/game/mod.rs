//! Two-player, deterministic, perfect-information game engine.
//!
//! Games are implemented behind the [`Rules`] trait over a shared
//! [`GameState`] representation (a flat cell array plus mover, move counter
//! and terminal status). States are immutable values: `apply` returns a new
//! state and never mutates its input.

mod breakthrough;
mod connect4;
mod hex;
mod tictactoe;
mod yavalath;

pub use breakthrough::Breakthrough;
pub use connect4::Connect4;
pub use hex::HexGame;
pub use tictactoe::TicTacToe;
pub use yavalath::Yavalath;

use crate::geometry::{Coord, Geometry};
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Player {
    P1,
    P2,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::P1 => Player::P2,
            Player::P2 => Player::P1,
        }
    }
}

/// Zero-sum terminal utilities in {-1, 0, 1} for each player.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Outcome {
    pub utility_p1: f64,
    pub utility_p2: f64,
}

impl Outcome {
    pub fn win(winner: Player) -> Outcome {
        match winner {
            Player::P1 => Outcome {
                utility_p1: 1.0,
                utility_p2: -1.0,
            },
            Player::P2 => Outcome {
                utility_p1: -1.0,
                utility_p2: 1.0,
            },
        }
    }

    pub fn draw() -> Outcome {
        Outcome {
            utility_p1: 0.0,
            utility_p2: 0.0,
        }
    }

    pub fn utility_for(&self, p: Player) -> f64 {
        match p {
            Player::P1 => self.utility_p1,
            Player::P2 => self.utility_p2,
        }
    }

    pub fn winner(&self) -> Option<Player> {
        if self.utility_p1 > 0.0 {
            Some(Player::P1)
        } else if self.utility_p2 > 0.0 {
            Some(Player::P2)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Cell {
    Empty,
    Piece(Player),
}

/// A move descriptor. Only meaningful relative to the state it was
/// generated from.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Action {
    Place(usize),
    Move { from: usize, to: usize },
}

impl Action {
    /// Cell the action acts upon (placement target or movement destination).
    pub fn target(&self) -> usize {
        match *self {
            Action::Place(i) => i,
            Action::Move { to, .. } => to,
        }
    }

    pub fn source(&self) -> Option<usize> {
        match *self {
            Action::Place(_) => None,
            Action::Move { from, .. } => Some(from),
        }
    }
}

/// Immutable position snapshot.
#[derive(Clone, PartialEq, Debug)]
pub struct GameState {
    pub cells: Vec<Cell>,
    pub mover: Player,
    pub move_count: u32,
    pub outcome: Option<Outcome>,
}

impl GameState {
    pub fn initial(cell_count: usize) -> GameState {
        GameState {
            cells: vec![Cell::Empty; cell_count],
            mover: Player::P1,
            move_count: 0,
            outcome: None,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.outcome.is_some()
    }
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error("operation requires a non-terminal state")]
    TerminalState,
    #[error("illegal action {0:?}")]
    IllegalAction(Action),
    #[error("unknown game id `{0}`")]
    UnknownGame(String),
    #[error("invalid board parameter: {0}")]
    InvalidParameter(String),
}

/// Rules of a concrete game. All operations are pure.
pub trait Rules: Send + Sync {
    fn id(&self) -> &'static str;

    fn geometry(&self) -> &Geometry;

    fn initial(&self) -> GameState;

    /// Legal actions in canonical board-scan order. Errors on terminal states.
    fn legal_actions(&self, state: &GameState) -> Result<Vec<Action>, GameError>;

    /// Apply a legal action, returning the successor state.
    fn apply(&self, state: &GameState, action: Action) -> Result<GameState, GameError>;

    /// Canonical ASCII board diagram, one row per line.
    fn ascii(&self, state: &GameState) -> String {
        render_board(self.geometry(), state)
    }
}

/// Terminal outcome of a state, if any.
pub fn outcome(state: &GameState) -> Option<Outcome> {
    state.outcome
}

/// Look up a game by its identifier string. `hex_side` only applies to Hex.
pub fn rules_for(id: &str, hex_side: i32) -> Result<Box<dyn Rules>, GameError> {
    match id {
        "tictactoe" => Ok(Box::new(TicTacToe::new())),
        "connect4" => Ok(Box::new(Connect4::new())),
        "breakthrough" => Ok(Box::new(Breakthrough::new())),
        "hex" => Ok(Box::new(HexGame::new(hex_side)?)),
        "yavalath" => Ok(Box::new(Yavalath::new())),
        other => Err(GameError::UnknownGame(other.to_string())),
    }
}

pub const GAME_IDS: &[&str] = &["tictactoe", "connect4", "breakthrough", "hex", "yavalath"];

fn cell_char(cell: Cell) -> char {
    match cell {
        Cell::Empty => '.',
        Cell::Piece(Player::P1) => 'X',
        Cell::Piece(Player::P2) => 'O',
    }
}

fn render_board(geom: &Geometry, state: &GameState) -> String {
    let mut out = String::new();
    if let Some((cols, rows)) = geom.square_dims() {
        // square boards print with row 0 at the bottom
        for y in (0..rows).rev() {
            for x in 0..cols {
                if x > 0 {
                    out.push(' ');
                }
                let i = geom.index_of(Coord::new(x, y)).unwrap();
                out.push(cell_char(state.cells[i]));
            }
            out.push('\n');
        }
        return out;
    }
    let coords = geom.coords();
    let min_y = coords.iter().map(|c| c.y).min().unwrap_or(0);
    let max_y = coords.iter().map(|c| c.y).max().unwrap_or(0);
    for y in min_y..=max_y {
        let mut row: Vec<(Coord, usize)> = coords
            .iter()
            .enumerate()
            .filter(|(_, c)| c.y == y)
            .map(|(i, &c)| (c, i))
            .collect();
        row.sort();
        // hex rows indent with r to suggest the axial skew
        for _ in min_y..y {
            out.push(' ');
        }
        for (k, (_, i)) in row.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            out.push(cell_char(state.cells[*i]));
        }
        out.push('\n');
    }
    out
}

/// Longest run of `player` pieces through `at` along `axis` (both directions),
/// counting `at` itself as occupied by `player`.
pub(crate) fn run_length(
    geom: &Geometry,
    cells: &[Cell],
    at: Coord,
    axis: Coord,
    player: Player,
) -> u32 {
    let mut len = 1;
    for dir in [axis, Coord::new(-axis.x, -axis.y)] {
        let mut c = at.add(dir);
        while let Some(i) = geom.index_of(c) {
            if cells[i] != Cell::Piece(player) {
                break;
            }
            len += 1;
            c = c.add(dir);
        }
    }
    len
}
