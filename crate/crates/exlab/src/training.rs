//! The self-play Expert Iteration driver: experience generation through
//! policy-biased MCTS, a FIFO replay buffer, per-turn gradient updates with
//! centered RMSProp, feature growth after every game, and checkpointing.
//!
//! Three parameter vectors can be trained: the cross-entropy base weights,
//! an offset trained on the same cross-entropy loss against boosted logits
//! (a second, independently specialised policy used for play-outs), and an
//! offset trained on the value-estimate policy-gradient objective.

use crate::features::{atomic_features, extract, grow, parse_spec, FeatureSet, SparseFeatureVector};
use crate::game::{rules_for, GameError, GameState, Rules};
use crate::optim::{OptimError, RmsProp, RmsPropConfig};
use crate::policy::{
    ce_gradient, sample_action, tspg_gradient, ActionDistribution, ParameterVector, PolicyError,
    PolicySpec,
};
use crate::search::{run_search, SearchConfig, SearchContext, SearchNode, SelectionRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid checkpoint: {0}")]
    Format(String),
    #[error("invalid config: {0}")]
    Config(String),
}

/// One stored search result: the state, per-action features frozen at
/// collection time, the visit-count distribution, and per-action value
/// estimates.
#[derive(Clone, Debug)]
pub struct ExperienceEntry {
    pub state: GameState,
    pub features_per_action: Vec<SparseFeatureVector>,
    pub visit_distribution: ActionDistribution,
    pub q_values: Vec<f64>,
    pub feature_version: u32,
}

/// FIFO replay buffer; insertion beyond capacity evicts the oldest entry.
pub struct ReplayBuffer {
    entries: VecDeque<ExperienceEntry>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer {
            entries: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, entry: ExperienceEntry) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(entry);
    }

    pub fn iter(&self) -> impl Iterator<Item = &ExperienceEntry> {
        self.entries.iter()
    }

    /// Uniform sample of min(k, len) distinct entries (partial Fisher-Yates
    /// over the index range).
    pub fn sample<R: Rng>(&self, k: usize, rng: &mut R) -> Vec<&ExperienceEntry> {
        let n = self.entries.len();
        let k = k.min(n);
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.random_range(i..n);
            idx.swap(i, j);
        }
        idx[..k].iter().map(|&i| &self.entries[i]).collect()
    }
}

/// Which play-out policy drives self-play simulations.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PlayoutPolicy {
    Uniform,
    Ce,
    CeDouble,
    Tspg,
}

impl PlayoutPolicy {
    pub fn name(self) -> &'static str {
        match self {
            PlayoutPolicy::Uniform => "uniform",
            PlayoutPolicy::Ce => "ce",
            PlayoutPolicy::CeDouble => "ce_double",
            PlayoutPolicy::Tspg => "tspg",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "uniform" => Some(PlayoutPolicy::Uniform),
            "ce" => Some(PlayoutPolicy::Ce),
            "ce_double" => Some(PlayoutPolicy::CeDouble),
            "tspg" => Some(PlayoutPolicy::Tspg),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub game: String,
    pub hex_side: i32,
    pub games: u32,
    pub mcts_iterations: u32,
    pub exploration_constant: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub rms_decay: f64,
    pub momentum: f64,
    pub epsilon: f64,
    pub buffer_capacity: usize,
    pub move_cap: u32,
    pub playout_cap: u32,
    pub gamma: f64,
    pub checkpoints: Vec<u32>,
    pub train_tspg: bool,
    pub train_ce_double: bool,
    pub playout_policy: PlayoutPolicy,
    pub seed: u64,
}

impl TrainConfig {
    pub fn defaults(game: &str) -> Self {
        TrainConfig {
            game: game.to_string(),
            hex_side: 7,
            games: 200,
            mcts_iterations: 1600,
            exploration_constant: 2.5,
            batch_size: 30,
            learning_rate: 0.005,
            rms_decay: 0.9,
            momentum: 0.9,
            epsilon: 1e-8,
            buffer_capacity: 400,
            move_cap: 150,
            playout_cap: 200,
            gamma: 1.0,
            checkpoints: vec![1, 25, 50, 100, 200],
            train_tspg: true,
            train_ce_double: true,
            playout_policy: PlayoutPolicy::Ce,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let positive = [
            ("games", self.games as f64),
            ("mcts_iterations", self.mcts_iterations as f64),
            ("batch_size", self.batch_size as f64),
            ("learning_rate", self.learning_rate),
            ("rms_decay", self.rms_decay),
            ("momentum", self.momentum),
            ("epsilon", self.epsilon),
            ("buffer_capacity", self.buffer_capacity as f64),
            ("move_cap", self.move_cap as f64),
            ("playout_cap", self.playout_cap as f64),
            ("gamma", self.gamma),
        ];
        for (name, v) in positive {
            if v <= 0.0 {
                return Err(TrainError::Config(format!("{name} must be positive")));
            }
        }
        for &c in &self.checkpoints {
            if c < 1 || c > self.games {
                return Err(TrainError::Config(format!(
                    "checkpoint index {c} outside 1..={}",
                    self.games
                )));
            }
        }
        Ok(())
    }

    fn rmsprop(&self) -> RmsPropConfig {
        RmsPropConfig {
            learning_rate: self.learning_rate,
            decay: self.rms_decay,
            momentum: self.momentum,
            epsilon: self.epsilon,
        }
    }
}

/// Per-game training log row.
#[derive(Clone, Debug)]
pub struct GameRecord {
    pub game_index: u32,
    pub length: u32,
    pub utility_p1: f64,
    pub buffer_size: usize,
    pub feature_count: usize,
    pub mean_grad_ce: f64,
    pub mean_grad_ce_double: f64,
    pub mean_grad_tspg: f64,
}

pub fn log_header() -> &'static str {
    "game,length,result,buffer_size,feature_count,mean_grad_ce,mean_grad_ce_double,mean_grad_tspg"
}

pub fn log_row(r: &GameRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        r.game_index,
        r.length,
        r.utility_p1,
        r.buffer_size,
        r.feature_count,
        r.mean_grad_ce,
        r.mean_grad_ce_double,
        r.mean_grad_tspg
    )
}

/// A saved training state: game identity, feature set, all weight vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub game: String,
    pub hex_side: i32,
    pub game_index: u32,
    pub step: u64,
    pub features: FeatureSet,
    pub theta_ce: ParameterVector,
    pub theta_tspg: ParameterVector,
    pub theta_ce_double: ParameterVector,
}

impl Checkpoint {
    pub fn rules(&self) -> Result<Box<dyn Rules>, GameError> {
        rules_for(&self.game, self.hex_side)
    }

    pub fn pi_ce(&self) -> PolicySpec {
        PolicySpec::base_only(self.theta_ce.clone())
    }

    pub fn pi_tspg(&self) -> PolicySpec {
        PolicySpec::boosted(self.theta_ce.clone(), self.theta_tspg.clone())
    }

    pub fn pi_ce_double(&self) -> PolicySpec {
        PolicySpec::boosted(self.theta_ce.clone(), self.theta_ce_double.clone())
    }

    /// Line-text serialization; floating-point values use Rust's shortest
    /// round-trip formatting, so save/load is bit-exact.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "exlab-checkpoint 1");
        let _ = writeln!(out, "game {}", self.game);
        let _ = writeln!(out, "hex_side {}", self.hex_side);
        let _ = writeln!(out, "game_index {}", self.game_index);
        let _ = writeln!(out, "step {}", self.step);
        let _ = writeln!(out, "feature_version {}", self.features.version());
        let _ = writeln!(out, "features {}", self.features.len());
        for spec in self.features.specs() {
            let _ = writeln!(out, "{spec}");
        }
        for (label, vec) in [
            ("theta_ce", &self.theta_ce),
            ("theta_tspg", &self.theta_tspg),
            ("theta_ce_double", &self.theta_ce_double),
        ] {
            let _ = writeln!(out, "{label} {}", vec.len());
            for v in vec.as_slice() {
                let _ = writeln!(out, "{v}");
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Checkpoint, TrainError> {
        let mut lines = text.lines();
        let mut field = |key: &str| -> Result<String, TrainError> {
            let line = lines
                .next()
                .ok_or_else(|| TrainError::Format(format!("missing {key} line")))?;
            line.strip_prefix(key)
                .map(|rest| rest.trim().to_string())
                .ok_or_else(|| TrainError::Format(format!("expected `{key}`, got `{line}`")))
        };
        let version = field("exlab-checkpoint")?;
        if version != "1" {
            return Err(TrainError::Format(format!(
                "unsupported checkpoint version {version}"
            )));
        }
        let game = field("game")?;
        let bad = |key: &str| TrainError::Format(format!("bad {key} value"));
        let hex_side: i32 = field("hex_side")?.parse().map_err(|_| bad("hex_side"))?;
        let game_index: u32 = field("game_index")?
            .parse()
            .map_err(|_| bad("game_index"))?;
        let step: u64 = field("step")?.parse().map_err(|_| bad("step"))?;
        let feature_version: u32 = field("feature_version")?
            .parse()
            .map_err(|_| bad("feature_version"))?;
        let n_specs: usize = field("features")?.parse().map_err(|_| bad("features"))?;
        let kind = rules_for(&game, hex_side)?.geometry().kind();
        let mut specs = Vec::with_capacity(n_specs);
        for _ in 0..n_specs {
            let line = lines
                .next()
                .ok_or_else(|| TrainError::Format("truncated feature list".into()))?;
            specs.push(
                parse_spec(line)
                    .ok_or_else(|| TrainError::Format(format!("bad feature spec `{line}`")))?,
            );
        }
        let features = FeatureSet::from_specs(kind, specs, feature_version);
        let mut vectors = Vec::new();
        for label in ["theta_ce", "theta_tspg", "theta_ce_double"] {
            let line = lines
                .next()
                .ok_or_else(|| TrainError::Format(format!("missing {label} header")))?;
            let n: usize = line
                .strip_prefix(label)
                .and_then(|rest| rest.trim().parse().ok())
                .ok_or_else(|| TrainError::Format(format!("bad {label} header `{line}`")))?;
            let mut values = Vec::with_capacity(n);
            for _ in 0..n {
                let v = lines
                    .next()
                    .ok_or_else(|| TrainError::Format(format!("truncated {label}")))?;
                values.push(
                    v.parse()
                        .map_err(|_| TrainError::Format(format!("bad value `{v}` in {label}")))?,
                );
            }
            vectors.push(ParameterVector(values));
        }
        let theta_ce_double = vectors.pop().unwrap();
        let theta_tspg = vectors.pop().unwrap();
        let theta_ce = vectors.pop().unwrap();
        Ok(Checkpoint {
            game,
            hex_side,
            game_index,
            step,
            features,
            theta_ce,
            theta_tspg,
            theta_ce_double,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), TrainError> {
        Ok(std::fs::write(path, self.serialize())?)
    }

    pub fn load(path: &Path) -> Result<Checkpoint, TrainError> {
        Checkpoint::parse(&std::fs::read_to_string(path)?)
    }
}

/// Owns all mutable training state and runs the sequential self-play loop.
pub struct Trainer {
    pub cfg: TrainConfig,
    rules: Box<dyn Rules>,
    pub features: FeatureSet,
    pub theta_ce: ParameterVector,
    pub theta_tspg: ParameterVector,
    pub theta_ce_double: ParameterVector,
    opt_ce: RmsProp,
    opt_tspg: RmsProp,
    opt_ce_double: RmsProp,
    pub buffer: ReplayBuffer,
    rng: ChaCha8Rng,
    step: u64,
    games_played: u32,
}

impl Trainer {
    pub fn new(cfg: TrainConfig) -> Result<Trainer, TrainError> {
        cfg.validate()?;
        let rules = rules_for(&cfg.game, cfg.hex_side)?;
        let features = atomic_features(rules.as_ref());
        let dim = features.len();
        let opt = cfg.rmsprop();
        let buffer = ReplayBuffer::new(cfg.buffer_capacity);
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Trainer {
            cfg,
            rules,
            features,
            theta_ce: ParameterVector::zeros(dim),
            theta_tspg: ParameterVector::zeros(dim),
            theta_ce_double: ParameterVector::zeros(dim),
            opt_ce: RmsProp::new(opt, dim),
            opt_tspg: RmsProp::new(opt, dim),
            opt_ce_double: RmsProp::new(opt, dim),
            buffer,
            rng,
            step: 0,
            games_played: 0,
        })
    }

    pub fn games_played(&self) -> u32 {
        self.games_played
    }

    fn playout_spec(&self) -> Option<PolicySpec> {
        match self.cfg.playout_policy {
            PlayoutPolicy::Uniform => None,
            PlayoutPolicy::Ce => Some(PolicySpec::base_only(self.theta_ce.clone())),
            PlayoutPolicy::CeDouble => Some(PolicySpec::boosted(
                self.theta_ce.clone(),
                self.theta_ce_double.clone(),
            )),
            PlayoutPolicy::Tspg => Some(PolicySpec::boosted(
                self.theta_ce.clone(),
                self.theta_tspg.clone(),
            )),
        }
    }

    /// One per-turn update pass over a shared mini-batch: cross-entropy
    /// vectors first, then the policy-gradient offset (which reads the
    /// already-updated base weights). Returns mean |g| per objective.
    fn update(&mut self) -> Result<(f64, f64, f64), TrainError> {
        if self.buffer.is_empty() {
            return Ok((0.0, 0.0, 0.0));
        }
        let dim = self.theta_ce.len();
        let batch = self.buffer.sample(self.cfg.batch_size, &mut self.rng);
        let scale = 1.0 / batch.len() as f64;

        let ce_spec = PolicySpec::base_only(self.theta_ce.clone());
        let mut g_ce = vec![0.0; dim];
        for entry in &batch {
            let g = ce_gradient(&ce_spec, entry, dim)?;
            for (acc, gi) in g_ce.iter_mut().zip(&g) {
                *acc += gi * scale;
            }
        }
        self.opt_ce.step(&mut self.theta_ce, &g_ce)?;
        let mean_ce = mean_abs(&g_ce);

        let mut mean_double = 0.0;
        if self.cfg.train_ce_double {
            // boosted logits; the gradient with respect to the offset equals
            // the gradient with respect to the effective weights
            let spec = PolicySpec::boosted(self.theta_ce.clone(), self.theta_ce_double.clone());
            let mut g = vec![0.0; dim];
            for entry in &batch {
                let ge = ce_gradient(&spec, entry, dim)?;
                for (acc, gi) in g.iter_mut().zip(&ge) {
                    *acc += gi * scale;
                }
            }
            self.opt_ce_double.step(&mut self.theta_ce_double, &g)?;
            mean_double = mean_abs(&g);
        }

        let mut mean_tspg = 0.0;
        if self.cfg.train_tspg {
            let spec = PolicySpec::boosted(self.theta_ce.clone(), self.theta_tspg.clone());
            let ascent = tspg_gradient(&spec, &batch, dim)?;
            let descent: Vec<f64> = ascent.iter().map(|g| -g).collect();
            self.opt_tspg.step(&mut self.theta_tspg, &descent)?;
            mean_tspg = mean_abs(&ascent);
        }
        self.step += 1;
        Ok((mean_ce, mean_double, mean_tspg))
    }

    /// Play one self-play game: per turn, search with the current policy,
    /// store the result, update parameters, sample the move from the visit
    /// distribution, and rebase the shared tree. After the game, grow the
    /// feature set by one feature and zero-extend all vectors.
    pub fn self_play_game(&mut self) -> Result<GameRecord, TrainError> {
        let mut state = self.rules.initial();
        let mut tree: Option<Box<SearchNode>> = None;
        let mut game_entries: Vec<ExperienceEntry> = Vec::new();
        let mut grads = (0.0, 0.0, 0.0);
        let mut turns = 0u32;

        let cfg = SearchConfig {
            iterations: self.cfg.mcts_iterations,
            exploration_constant: self.cfg.exploration_constant,
            playout_cap: self.cfg.playout_cap,
            selection: SelectionRule::Puct,
            tree_reuse: true,
            random_tie_break: false,
        };

        while !state.is_terminal() && turns < self.cfg.move_cap {
            let prior = PolicySpec::base_only(self.theta_ce.clone());
            let playout = self.playout_spec();
            let ctx = SearchContext {
                rules: self.rules.as_ref(),
                features: &self.features,
                prior: Some(&prior),
                playout: playout.as_ref(),
            };
            let result = run_search(&state, &ctx, &cfg, tree.take(), &mut self.rng)
                .expect("non-terminal root");

            let features_per_action: Vec<SparseFeatureVector> = result
                .actions
                .iter()
                .map(|&a| extract(self.rules.as_ref(), &state, a, &self.features))
                .collect();
            let entry = ExperienceEntry {
                state: state.clone(),
                features_per_action,
                visit_distribution: result.visit_distribution.clone(),
                q_values: result.q_estimates.clone(),
                feature_version: self.features.version(),
            };
            self.buffer.push(entry.clone());
            game_entries.push(entry);

            let (a, b, c) = self.update()?;
            grads.0 += a;
            grads.1 += b;
            grads.2 += c;

            let pick = sample_action(&result.visit_distribution, &mut self.rng);
            let action = result.actions[pick];
            state = self.rules.apply(&state, action)?;
            let mut root = result.tree;
            tree = root.take_child(action);
            turns += 1;
        }

        // move-cap games count as ties (outcome 0 for both players)
        let utility_p1 = state.outcome.map_or(0.0, |o| o.utility_p1);

        let grown = grow(&self.features, &game_entries);
        if grown.len() > self.features.len() {
            self.features = grown;
            let dim = self.features.len();
            self.theta_ce.extend_to(dim);
            self.theta_tspg.extend_to(dim);
            self.theta_ce_double.extend_to(dim);
            self.opt_ce.extend_to(dim);
            self.opt_tspg.extend_to(dim);
            self.opt_ce_double.extend_to(dim);
        }
        self.games_played += 1;

        let n = turns.max(1) as f64;
        Ok(GameRecord {
            game_index: self.games_played,
            length: turns,
            utility_p1,
            buffer_size: self.buffer.len(),
            feature_count: self.features.len(),
            mean_grad_ce: grads.0 / n,
            mean_grad_ce_double: grads.1 / n,
            mean_grad_tspg: grads.2 / n,
        })
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            game: self.cfg.game.clone(),
            hex_side: self.cfg.hex_side,
            game_index: self.games_played,
            step: self.step,
            features: self.features.clone(),
            theta_ce: self.theta_ce.clone(),
            theta_tspg: self.theta_tspg.clone(),
            theta_ce_double: self.theta_ce_double.clone(),
        }
    }

    /// Run the configured number of sequential self-play games, invoking
    /// `on_game` after each, and return the configured checkpoints.
    pub fn train_with<F>(&mut self, mut on_game: F) -> Result<Vec<Checkpoint>, TrainError>
    where
        F: FnMut(&GameRecord),
    {
        let mut checkpoints = Vec::new();
        for _ in 0..self.cfg.games {
            let record = self.self_play_game()?;
            on_game(&record);
            if self.cfg.checkpoints.contains(&self.games_played) {
                checkpoints.push(self.checkpoint());
            }
        }
        Ok(checkpoints)
    }

    pub fn train(&mut self) -> Result<Vec<Checkpoint>, TrainError> {
        self.train_with(|_| {})
    }
}

fn mean_abs(g: &[f64]) -> f64 {
    if g.is_empty() {
        return 0.0;
    }
    g.iter().map(|x| x.abs()).sum::<f64>() / g.len() as f64
}
