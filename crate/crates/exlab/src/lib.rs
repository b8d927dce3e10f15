//! A self-play Expert Iteration laboratory: five board games, sparse
//! binary pattern features that grow during self-play, softmax linear
//! policies trained against MCTS visit counts (cross-entropy) or MCTS value
//! estimates (a tree-search policy gradient with boosted logits), and the
//! evaluation tooling to compare the resulting players.

pub mod config;
pub mod eval;
pub mod features;
pub mod game;
pub mod geometry;
pub mod optim;
pub mod oracle;
pub mod policy;
pub mod search;
pub mod training;
