//! Key-value run configuration files. Every key has a default matching the
//! reference training protocol, so an empty file is a valid full
//! configuration; unknown keys are rejected with their line number.

use crate::training::{PlayoutPolicy, TrainConfig};
use std::fmt::Write as _;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

/// Fully resolved run settings: training hyperparameters plus the agent
/// pairing and output location used by evaluation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub out: PathBuf,
    pub agent_a: String,
    pub agent_b: String,
    pub eval_games: u32,
    pub entropy_bins: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            // game id intentionally blank: it must come from the file or a
            // flag, everything else has a protocol default
            train: TrainConfig::defaults(""),
            out: PathBuf::from("out"),
            agent_a: "tspg".into(),
            agent_b: "ce".into(),
            eval_games: 40,
            entropy_bins: 20,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            let Some((key, value)) = stripped.split_once('=') else {
                return Err(ConfigError::Malformed {
                    line,
                    text: raw.to_string(),
                });
            };
            self.set(key.trim(), value.trim(), line)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
        };
        let t = &mut self.train;
        match key {
            "game" => t.game = value.to_string(),
            "hex_side" => t.hex_side = value.parse().map_err(|_| bad())?,
            "seed" => t.seed = value.parse().map_err(|_| bad())?,
            "games" => t.games = value.parse().map_err(|_| bad())?,
            "mcts_iterations" => t.mcts_iterations = value.parse().map_err(|_| bad())?,
            "exploration_constant" => {
                t.exploration_constant = value.parse().map_err(|_| bad())?
            }
            "batch_size" => t.batch_size = value.parse().map_err(|_| bad())?,
            "learning_rate" => t.learning_rate = value.parse().map_err(|_| bad())?,
            "rms_decay" => t.rms_decay = value.parse().map_err(|_| bad())?,
            "momentum" => t.momentum = value.parse().map_err(|_| bad())?,
            "epsilon" => t.epsilon = value.parse().map_err(|_| bad())?,
            "buffer_capacity" => t.buffer_capacity = value.parse().map_err(|_| bad())?,
            "move_cap" => t.move_cap = value.parse().map_err(|_| bad())?,
            "playout_cap" => t.playout_cap = value.parse().map_err(|_| bad())?,
            "gamma" => t.gamma = value.parse().map_err(|_| bad())?,
            "checkpoints" => {
                t.checkpoints = value
                    .split(',')
                    .map(|s| s.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad())?;
            }
            "train_tspg" => t.train_tspg = value.parse().map_err(|_| bad())?,
            "train_ce_double" => t.train_ce_double = value.parse().map_err(|_| bad())?,
            "playout_policy" => {
                t.playout_policy = PlayoutPolicy::from_name(value).ok_or_else(bad)?
            }
            "out" => self.out = PathBuf::from(value),
            "agent_a" => self.agent_a = value.to_string(),
            "agent_b" => self.agent_b = value.to_string(),
            "eval_games" => self.eval_games = value.parse().map_err(|_| bad())?,
            "entropy_bins" => self.entropy_bins = value.parse().map_err(|_| bad())?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    pub fn require_game(&self) -> Result<(), ConfigError> {
        if self.train.game.is_empty() {
            return Err(ConfigError::MissingKey("game"));
        }
        Ok(())
    }

    /// Dump every resolved key so any run is reproducible from its log.
    pub fn resolved(&self) -> String {
        let t = &self.train;
        let mut out = String::new();
        let checkpoints = t
            .checkpoints
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let _ = write!(
            out,
            "game = {}\nhex_side = {}\nseed = {}\ngames = {}\nmcts_iterations = {}\n\
             exploration_constant = {}\nbatch_size = {}\nlearning_rate = {}\nrms_decay = {}\n\
             momentum = {}\nepsilon = {}\nbuffer_capacity = {}\nmove_cap = {}\n\
             playout_cap = {}\ngamma = {}\ncheckpoints = {}\ntrain_tspg = {}\n\
             train_ce_double = {}\nplayout_policy = {}\nout = {}\nagent_a = {}\n\
             agent_b = {}\neval_games = {}\nentropy_bins = {}\n",
            t.game,
            t.hex_side,
            t.seed,
            t.games,
            t.mcts_iterations,
            t.exploration_constant,
            t.batch_size,
            t.learning_rate,
            t.rms_decay,
            t.momentum,
            t.epsilon,
            t.buffer_capacity,
            t.move_cap,
            t.playout_cap,
            t.gamma,
            checkpoints,
            t.train_tspg,
            t.train_ce_double,
            t.playout_policy.name(),
            self.out.display(),
            self.agent_a,
            self.agent_b,
            self.eval_games,
            self.entropy_bins,
        );
        out
    }
}
