//! Monte Carlo tree search with policy-prior-biased selection (the AlphaGo
//! Zero PUCT rule), a plain UCB1 baseline, policy-driven play-outs, tree
//! reuse across turns, and extraction of visit-count distributions and
//! per-action value estimates.
//!
//! All values are in [-1, 1] and stored from the perspective of the node's
//! mover; backups flip sign at every level. Priors of reused nodes are
//! recomputed from the current policy the first time a node is traversed in
//! a new search, so parameter updates between turns take effect immediately.

use crate::features::{extract, FeatureSet, SparseFeatureVector};
use crate::game::{Action, GameState, Rules};
use crate::policy::{sample_action, softmax, PolicySpec};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("search requires a non-terminal root")]
    TerminalRoot,
    #[error("node has no recorded visits")]
    NoVisits,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SelectionRule {
    Puct,
    Ucb1,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub iterations: u32,
    pub exploration_constant: f64,
    pub playout_cap: u32,
    pub selection: SelectionRule,
    pub tree_reuse: bool,
    /// Break argmax ties at random instead of by canonical action order.
    pub random_tie_break: bool,
}

impl SearchConfig {
    pub fn puct(iterations: u32, exploration_constant: f64) -> Self {
        SearchConfig {
            iterations,
            exploration_constant,
            playout_cap: 200,
            selection: SelectionRule::Puct,
            tree_reuse: true,
            random_tie_break: false,
        }
    }

    pub fn uct(iterations: u32) -> Self {
        SearchConfig {
            iterations,
            exploration_constant: std::f64::consts::SQRT_2,
            playout_cap: 200,
            selection: SelectionRule::Ucb1,
            tree_reuse: true,
            random_tie_break: false,
        }
    }
}

/// Policies feeding the search: selection priors and the play-out policy.
/// `None` means uniform.
#[derive(Clone, Copy)]
pub struct SearchContext<'a> {
    pub rules: &'a dyn Rules,
    pub features: &'a FeatureSet,
    pub prior: Option<&'a PolicySpec>,
    pub playout: Option<&'a PolicySpec>,
}

impl<'a> SearchContext<'a> {
    pub fn uniform(rules: &'a dyn Rules, features: &'a FeatureSet) -> Self {
        SearchContext {
            rules,
            features,
            prior: None,
            playout: None,
        }
    }
}

/// One node of the search tree. Edge statistics (visits, summed value,
/// prior) are stored per legal action, aligned with canonical action order.
pub struct SearchNode {
    pub state: GameState,
    pub actions: Vec<Action>,
    pub priors: Vec<f64>,
    pub edge_visits: Vec<u32>,
    pub edge_values: Vec<f64>,
    pub children: Vec<Option<Box<SearchNode>>>,
    /// Total visits, equal to 1 (creation) + sum of edge visits.
    pub visits: u32,
    /// Value backed up when the node was created (play-out or exact
    /// terminal outcome), from this node's mover perspective.
    creation_value: f64,
    prior_gen: u32,
}

impl SearchNode {
    fn new(state: GameState, ctx: &SearchContext, gen: u32) -> SearchNode {
        let actions = if state.is_terminal() {
            Vec::new()
        } else {
            ctx.rules
                .legal_actions(&state)
                .expect("non-terminal state has actions")
        };
        let n = actions.len();
        let mut node = SearchNode {
            state,
            actions,
            priors: vec![0.0; n],
            edge_visits: vec![0; n],
            edge_values: vec![0.0; n],
            children: (0..n).map(|_| None).collect(),
            visits: 0,
            creation_value: 0.0,
            prior_gen: gen.wrapping_sub(1),
        };
        node.refresh_priors(ctx, gen);
        node
    }

    fn refresh_priors(&mut self, ctx: &SearchContext, gen: u32) {
        if self.prior_gen == gen || self.actions.is_empty() {
            self.prior_gen = gen;
            return;
        }
        match ctx.prior {
            None => {
                let u = 1.0 / self.actions.len() as f64;
                self.priors.iter_mut().for_each(|p| *p = u);
            }
            Some(policy) => {
                let logits: Vec<f64> = self
                    .actions
                    .iter()
                    .map(|&a| {
                        let f = extract(ctx.rules, &self.state, a, ctx.features);
                        feature_logit(policy, &f)
                    })
                    .collect();
                self.priors = softmax(&logits);
            }
        }
        self.prior_gen = gen;
    }

    /// Mean backed-up value from this node's mover perspective: the mean of
    /// the edge values when any edge was visited, otherwise the creation
    /// value (0 for a root that was never expanded).
    pub fn value_estimate(&self) -> f64 {
        let total: u32 = self.edge_visits.iter().sum();
        if total == 0 {
            self.creation_value
        } else {
            self.edge_values.iter().sum::<f64>() / total as f64
        }
    }

    pub fn edge_visit_total(&self) -> u32 {
        self.edge_visits.iter().sum()
    }

    /// Detach the child reached by `action`, preserving its statistics.
    pub fn take_child(&mut self, action: Action) -> Option<Box<SearchNode>> {
        let idx = self.actions.iter().position(|&a| a == action)?;
        self.children[idx].take()
    }
}

/// Root-level result of one search.
pub struct SearchResult {
    pub actions: Vec<Action>,
    pub visit_distribution: crate::policy::ActionDistribution,
    pub q_estimates: Vec<f64>,
    pub root_value: f64,
    pub tree: Box<SearchNode>,
}

#[inline]
fn feature_logit(policy: &PolicySpec, f: &SparseFeatureVector) -> f64 {
    let base = policy.base.as_slice();
    match &policy.offset {
        None => f.active.iter().map(|&i| base[i as usize]).sum(),
        Some(off) => {
            let off = off.as_slice();
            f.active
                .iter()
                .map(|&i| base[i as usize] + off[i as usize])
                .sum()
        }
    }
}

/// Visit-count distribution over a node's actions.
pub fn visit_distribution(
    node: &SearchNode,
) -> Result<crate::policy::ActionDistribution, SearchError> {
    let total = node.edge_visit_total();
    if total == 0 {
        return Err(SearchError::NoVisits);
    }
    let probs: Vec<f64> = node
        .edge_visits
        .iter()
        .map(|&n| n as f64 / total as f64)
        .collect();
    Ok(crate::policy::ActionDistribution::new(probs).expect("visit counts normalise"))
}

/// Per-action mean values; unvisited actions inherit the node's estimate.
pub fn q_estimates(node: &SearchNode) -> Vec<f64> {
    let v = node.value_estimate();
    node.edge_visits
        .iter()
        .zip(&node.edge_values)
        .map(|(&n, &w)| if n > 0 { w / n as f64 } else { v })
        .collect()
}

fn puct_scores(node: &SearchNode, c: f64) -> Vec<f64> {
    let v = node.value_estimate();
    let total = node.edge_visit_total();
    // at a freshly expanded node all edges are unvisited; let the priors
    // decide rather than zeroing the exploration term
    let sqrt_total = if total == 0 { 1.0 } else { (total as f64).sqrt() };
    node.edge_visits
        .iter()
        .zip(&node.edge_values)
        .zip(&node.priors)
        .map(|((&n, &w), &p)| {
            let q = if n > 0 { w / n as f64 } else { v };
            q + c * p * sqrt_total / (1.0 + n as f64)
        })
        .collect()
}

fn ucb1_scores(node: &SearchNode, c: f64) -> Vec<f64> {
    let total = node.edge_visit_total();
    node.edge_visits
        .iter()
        .zip(&node.edge_values)
        .map(|(&n, &w)| {
            if n == 0 {
                // unvisited actions come first
                f64::INFINITY
            } else {
                w / n as f64 + c * ((total as f64).ln() / n as f64).sqrt()
            }
        })
        .collect()
}

fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn argmax_random_tie<R: Rng>(scores: &[f64], rng: &mut R) -> usize {
    let best = scores[argmax_first(scores)];
    let ties: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s == best)
        .map(|(i, _)| i)
        .collect();
    ties[rng.random_range(0..ties.len())]
}

/// PUCT selection at an expanded, non-terminal node.
pub fn puct_select(node: &SearchNode, c: f64) -> Action {
    node.actions[argmax_first(&puct_scores(node, c))]
}

/// UCB1 selection at an expanded, non-terminal node.
pub fn ucb1_select(node: &SearchNode, c: f64) -> Action {
    node.actions[argmax_first(&ucb1_scores(node, c))]
}

/// Play out from `state` using the context's play-out policy (uniform when
/// absent) until a terminal state or `cap` moves; returns the outcome from
/// the perspective of `state`'s mover, with a capped play-out scored 0.
pub fn playout<R: Rng>(
    state: &GameState,
    ctx: &SearchContext,
    cap: u32,
    rng: &mut R,
) -> f64 {
    let me = state.mover;
    let mut s = state.clone();
    let mut moves = 0;
    loop {
        if let Some(o) = s.outcome {
            return o.utility_for(me);
        }
        if moves >= cap {
            return 0.0;
        }
        let actions = ctx.rules.legal_actions(&s).expect("non-terminal");
        let idx = match ctx.playout {
            None => rng.random_range(0..actions.len()),
            Some(policy) => {
                let logits: Vec<f64> = actions
                    .iter()
                    .map(|&a| feature_logit(policy, &extract(ctx.rules, &s, a, ctx.features)))
                    .collect();
                let dist = crate::policy::ActionDistribution::new(softmax(&logits))
                    .expect("softmax normalises");
                sample_action(&dist, rng)
            }
        };
        s = ctx.rules.apply(&s, actions[idx]).expect("legal action");
        moves += 1;
    }
}

fn simulate<R: Rng>(
    node: &mut SearchNode,
    ctx: &SearchContext,
    cfg: &SearchConfig,
    rng: &mut R,
    gen: u32,
) -> f64 {
    if let Some(o) = node.state.outcome {
        // terminal nodes back up their exact outcome, no play-out
        node.visits += 1;
        return o.utility_for(node.state.mover);
    }
    node.refresh_priors(ctx, gen);
    let scores = match cfg.selection {
        SelectionRule::Puct => puct_scores(node, cfg.exploration_constant),
        SelectionRule::Ucb1 => ucb1_scores(node, cfg.exploration_constant),
    };
    let idx = if cfg.random_tie_break {
        argmax_random_tie(&scores, rng)
    } else {
        argmax_first(&scores)
    };
    let v_child = match &mut node.children[idx] {
        Some(child) => simulate(child, ctx, cfg, rng, gen),
        None => {
            let next = ctx
                .rules
                .apply(&node.state, node.actions[idx])
                .expect("selected action is legal");
            let mut child = SearchNode::new(next, ctx, gen);
            let v0 = match child.state.outcome {
                Some(o) => o.utility_for(child.state.mover),
                None => playout(&child.state, ctx, cfg.playout_cap, rng),
            };
            child.creation_value = v0;
            child.visits = 1;
            node.children[idx] = Some(Box::new(child));
            v0
        }
    };
    let v = -v_child;
    node.edge_visits[idx] += 1;
    node.edge_values[idx] += v;
    node.visits += 1;
    v
}

/// Run `cfg.iterations` select/expand/play-out/backpropagate iterations from
/// `root_state`, on top of `reused_tree`'s statistics when it matches.
pub fn run_search<R: Rng>(
    root_state: &GameState,
    ctx: &SearchContext,
    cfg: &SearchConfig,
    reused_tree: Option<Box<SearchNode>>,
    rng: &mut R,
) -> Result<SearchResult, SearchError> {
    if root_state.is_terminal() {
        return Err(SearchError::TerminalRoot);
    }
    let mut root = match reused_tree {
        Some(t) if cfg.tree_reuse && t.state == *root_state => {
            let mut t = t;
            // force prior recomputation throughout the reused subtree
            t.prior_gen = t.prior_gen.wrapping_add(1);
            t
        }
        _ => {
            let mut fresh = Box::new(SearchNode::new(root_state.clone(), ctx, 0));
            fresh.visits = 1;
            fresh
        }
    };
    let gen = root.prior_gen.wrapping_add(1);
    root.refresh_priors(ctx, gen);
    for _ in 0..cfg.iterations {
        simulate(&mut root, ctx, cfg, rng, gen);
    }
    let visit_distribution = visit_distribution(&root)?;
    let q = q_estimates(&root);
    Ok(SearchResult {
        actions: root.actions.clone(),
        visit_distribution,
        q_estimates: q,
        root_value: root.value_estimate(),
        tree: root,
    })
}

/// Subtree reached by playing `own_action` then `opponent_action` from the
/// searched root, with statistics intact; `None` if never expanded.
pub fn rebase_tree(
    result: SearchResult,
    own_action: Action,
    opponent_action: Action,
) -> Option<Box<SearchNode>> {
    let mut tree = result.tree;
    let mut child = tree.take_child(own_action)?;
    child.take_child(opponent_action)
}
