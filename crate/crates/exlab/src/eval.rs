//! Head-to-head match play between agents, bootstrap confidence intervals,
//! entropy profiling across game time, and weight-distribution export.

use crate::features::FeatureSet;
use crate::game::{Action, GameState, Player, Rules};
use crate::policy::{greedy_action, sample_action, ActionDistribution, PolicySpec};
use crate::search::{run_search, SearchConfig, SearchContext, SearchNode};
use crate::training::Checkpoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

/// A playing agent. Raw policies act on their softmax distribution (greedy
/// argmax by default); search agents pick the root action with maximal
/// visit count.
pub enum AgentSpec {
    RawPolicy {
        policy: PolicySpec,
        features: FeatureSet,
        sample: bool,
    },
    BiasedMcts {
        prior: PolicySpec,
        playout: PolicySpec,
        features: FeatureSet,
        search: SearchConfig,
    },
    Uct {
        search: SearchConfig,
    },
}

impl AgentSpec {
    pub fn label(&self) -> &'static str {
        match self {
            AgentSpec::RawPolicy { .. } => "raw_policy",
            AgentSpec::BiasedMcts { .. } => "biased_mcts",
            AgentSpec::Uct { .. } => "uct",
        }
    }
}

/// Which of the two match participants acted.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AgentId {
    A,
    B,
}

#[derive(Clone, Debug)]
pub struct MoveTrace {
    pub agent: AgentId,
    pub turn: u32,
    pub distribution: ActionDistribution,
}

#[derive(Clone, Debug)]
pub struct GameTrace {
    pub index: u32,
    pub a_is_p1: bool,
    pub length: u32,
    pub winner: Option<Player>,
    pub moves: Vec<MoveTrace>,
}

impl GameTrace {
    /// Winner in terms of match participants rather than seats.
    pub fn winning_agent(&self) -> Option<AgentId> {
        self.winner.map(|p| {
            if (p == Player::P1) == self.a_is_p1 {
                AgentId::A
            } else {
                AgentId::B
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct MatchResult {
    pub games: u32,
    pub wins_a: u32,
    pub wins_b: u32,
    pub draws: u32,
    pub traces: Vec<GameTrace>,
}

impl MatchResult {
    /// Win percentage for agent a, draws counting half.
    pub fn win_percentage_a(&self) -> f64 {
        100.0 * (self.wins_a as f64 + 0.5 * self.draws as f64) / self.games as f64
    }
}

/// Per-game runtime state of one agent: its reusable search tree plus the
/// action it committed to last turn.
struct AgentState<'a> {
    spec: &'a AgentSpec,
    tree: Option<Box<SearchNode>>,
    own_last: Option<Action>,
}

impl<'a> AgentState<'a> {
    fn new(spec: &'a AgentSpec) -> Self {
        AgentState {
            spec,
            tree: None,
            own_last: None,
        }
    }

    fn act(
        &mut self,
        rules: &dyn Rules,
        empty_features: &FeatureSet,
        state: &GameState,
        opponent_last: Option<Action>,
        rng: &mut ChaCha8Rng,
    ) -> (Action, ActionDistribution) {
        match self.spec {
            AgentSpec::RawPolicy {
                policy,
                features,
                sample,
            } => {
                let actions = rules.legal_actions(state).expect("non-terminal");
                let dist = policy
                    .distribution(rules, state, &actions, features)
                    .expect("policy evaluates");
                let idx = if *sample {
                    sample_action(&dist, rng)
                } else {
                    greedy_action(&dist)
                };
                (actions[idx], dist)
            }
            AgentSpec::BiasedMcts {
                prior,
                playout,
                features,
                search,
            } => self.search_move(
                rules,
                features,
                Some(prior),
                Some(playout),
                search,
                state,
                opponent_last,
                rng,
            ),
            AgentSpec::Uct { search } => self.search_move(
                rules,
                empty_features,
                None,
                None,
                search,
                state,
                opponent_last,
                rng,
            ),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn search_move(
        &mut self,
        rules: &dyn Rules,
        features: &FeatureSet,
        prior: Option<&PolicySpec>,
        playout: Option<&PolicySpec>,
        cfg: &SearchConfig,
        state: &GameState,
        opponent_last: Option<Action>,
        rng: &mut ChaCha8Rng,
    ) -> (Action, ActionDistribution) {
        // rebase the kept tree through our previous move and the
        // opponent's reply
        let reuse = match (self.tree.take(), self.own_last, opponent_last) {
            (Some(mut t), Some(own), Some(opp)) => {
                t.take_child(own).and_then(|mut c| c.take_child(opp))
            }
            (t, _, _) => t,
        };
        let ctx = SearchContext {
            rules,
            features,
            prior,
            playout,
        };
        let result = run_search(state, &ctx, cfg, reuse, rng).expect("non-terminal root");
        let best = greedy_action(&result.visit_distribution);
        let action = result.actions[best];
        let dist = result.visit_distribution.clone();
        self.tree = Some(result.tree);
        self.own_last = Some(action);
        (action, dist)
    }
}

fn play_game(
    rules: &dyn Rules,
    a: &AgentSpec,
    b: &AgentSpec,
    index: u32,
    a_is_p1: bool,
    rng: &mut ChaCha8Rng,
) -> GameTrace {
    let empty = FeatureSet::empty(rules.geometry().kind());
    let mut agents = [AgentState::new(a), AgentState::new(b)];
    let mut state = rules.initial();
    let mut moves = Vec::new();
    let mut last_action: Option<Action> = None;
    let mut turn = 0u32;
    while !state.is_terminal() {
        let acting = if (state.mover == Player::P1) == a_is_p1 {
            0
        } else {
            1
        };
        let (action, dist) = agents[acting].act(rules, &empty, &state, last_action, rng);
        moves.push(MoveTrace {
            agent: if acting == 0 { AgentId::A } else { AgentId::B },
            turn,
            distribution: dist,
        });
        state = rules.apply(&state, action).expect("agent plays legally");
        last_action = Some(action);
        turn += 1;
    }
    GameTrace {
        index,
        a_is_p1,
        length: turn,
        winner: state.outcome.and_then(|o| o.winner()),
        moves,
    }
}

/// Play `n_games` games between `a` and `b`, alternating seats (a is P1 in
/// even-indexed games). Each seat-swapped pair of games shares one RNG
/// stream derived from the match seed, so an agent playing itself scores
/// exactly 50% over an even game count.
pub fn play_match(
    a: &AgentSpec,
    b: &AgentSpec,
    rules: &dyn Rules,
    n_games: u32,
    seed: u64,
) -> MatchResult {
    let mut traces = Vec::with_capacity(n_games as usize);
    let (mut wins_a, mut wins_b, mut draws) = (0, 0, 0);
    for g in 0..n_games {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add((g / 2) as u64));
        let a_is_p1 = g % 2 == 0;
        let trace = play_game(rules, a, b, g, a_is_p1, &mut rng);
        match trace.winning_agent() {
            Some(AgentId::A) => wins_a += 1,
            Some(AgentId::B) => wins_b += 1,
            None => draws += 1,
        }
        traces.push(trace);
    }
    MatchResult {
        games: n_games,
        wins_a,
        wins_b,
        draws,
        traces,
    }
}

/// Percentile bootstrap interval for the mean of `estimates`.
pub fn bootstrap_ci<R: Rng>(
    estimates: &[f64],
    confidence: f64,
    resamples: u32,
    rng: &mut R,
) -> (f64, f64) {
    assert!(!estimates.is_empty(), "bootstrap needs estimates");
    let n = estimates.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            (0..n)
                .map(|_| estimates[rng.random_range(0..n)])
                .sum::<f64>()
                / n as f64
        })
        .collect();
    means.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let alpha = (1.0 - confidence) / 2.0;
    (percentile(&means, alpha), percentile(&means, 1.0 - alpha))
}

/// Linear-interpolation percentile of a sorted sample.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[derive(Clone, Copy, Debug)]
pub struct EntropyBin {
    pub center: f64,
    pub mean: f64,
    pub std: f64,
    pub count: u32,
}

#[derive(Clone, Debug)]
pub struct EntropyProfile {
    pub bins: Vec<EntropyBin>,
}

/// Bin one agent's per-move normalized entropies by game time t/T.
pub fn entropy_profile(games: &[GameTrace], agent: AgentId, bins: usize) -> EntropyProfile {
    let samples: Vec<(f64, f64)> = games
        .iter()
        .filter(|g| g.length > 0)
        .flat_map(|g| {
            g.moves
                .iter()
                .filter(move |mv| mv.agent == agent)
                .map(move |mv| {
                    (
                        mv.turn as f64 / g.length as f64,
                        mv.distribution.normalized_entropy(),
                    )
                })
        })
        .collect();
    entropy_profile_from_samples(&samples, bins)
}

/// Bin pre-computed (game-time, normalized entropy) samples.
pub fn entropy_profile_from_samples(points: &[(f64, f64)], bins: usize) -> EntropyProfile {
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); bins];
    for &(t, entropy) in points {
        let bin = ((t * bins as f64) as usize).min(bins - 1);
        samples[bin].push(entropy);
    }
    let bins = samples
        .iter()
        .enumerate()
        .map(|(i, xs)| {
            let count = xs.len() as u32;
            let mean = if xs.is_empty() {
                0.0
            } else {
                xs.iter().sum::<f64>() / xs.len() as f64
            };
            let var = if xs.len() < 2 {
                0.0
            } else {
                xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64
            };
            EntropyBin {
                center: (i as f64 + 0.5) / samples.len() as f64,
                mean,
                std: var.sqrt(),
                count,
            }
        })
        .collect();
    EntropyProfile { bins }
}

#[derive(Clone, Copy, Debug)]
pub struct WeightStats {
    pub mean: f64,
    pub std: f64,
    pub frac_near_zero: f64,
}

fn weight_stats(values: &[f64]) -> WeightStats {
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let near = values.iter().filter(|v| v.abs() < 0.01).count() as f64 / n;
    WeightStats {
        mean,
        std: var.sqrt(),
        frac_near_zero: near,
    }
}

#[derive(Clone, Debug)]
pub struct WeightExport {
    /// (value, objective label) rows: base weights and boosted sums.
    pub rows: Vec<(f64, &'static str)>,
    pub ce: WeightStats,
    pub boosted: WeightStats,
}

/// Export θ_ce and θ_ce + θ_tspg values with summary statistics.
pub fn weight_distribution_export(cp: &Checkpoint) -> WeightExport {
    let ce: Vec<f64> = cp.theta_ce.as_slice().to_vec();
    let boosted: Vec<f64> = cp
        .theta_ce
        .as_slice()
        .iter()
        .zip(cp.theta_tspg.as_slice())
        .map(|(a, b)| a + b)
        .collect();
    let mut rows = Vec::with_capacity(2 * ce.len());
    rows.extend(ce.iter().map(|&v| (v, "ce")));
    rows.extend(boosted.iter().map(|&v| (v, "ce_plus_tspg")));
    WeightExport {
        ce: weight_stats(&ce),
        boosted: weight_stats(&boosted),
        rows,
    }
}

/// 9-significant-digit float formatting for CSV outputs.
pub fn fmt_sig(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn match_csv(result: &MatchResult) -> String {
    let mut out = String::from("game,a_is_p1,length,winner\n");
    for t in &result.traces {
        let winner = match t.winning_agent() {
            Some(AgentId::A) => "a",
            Some(AgentId::B) => "b",
            None => "draw",
        };
        let _ = writeln!(out, "{},{},{},{}", t.index, t.a_is_p1, t.length, winner);
    }
    out
}

pub fn entropy_csv(profiles: &[(&str, &EntropyProfile)]) -> String {
    let mut out = String::from("agent,bin_center,mean_entropy,std_entropy,count\n");
    for (label, profile) in profiles {
        for b in &profile.bins {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                label,
                fmt_sig(b.center),
                fmt_sig(b.mean),
                fmt_sig(b.std),
                b.count
            );
        }
    }
    out
}

pub fn weights_csv(export: &WeightExport) -> String {
    let mut out = String::from("value,objective\n");
    for (v, label) in &export.rows {
        let _ = writeln!(out, "{},{}", fmt_sig(*v), label);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::atomic_features;
    use crate::game::rules_for;
    use crate::oracle::{optimal_actions, MinimaxCache};
    use crate::policy::ParameterVector;

    /// Wraps the exact-minimax move choice as a deterministic opponent for
    /// match-play tests.
    fn play_oracle_match(n_games: u32, seed: u64) -> MatchResult {
        let rules = rules_for("tictactoe", 7).unwrap();
        let mut cache = MinimaxCache::new();
        let mut traces = Vec::new();
        let (mut wins_a, mut wins_b, mut draws) = (0, 0, 0);
        for g in 0..n_games {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add((g / 2) as u64));
            let a_is_p1 = g % 2 == 0;
            let mut state = rules.initial();
            let mut turn = 0;
            while !state.is_terminal() {
                let oracle_turn = (state.mover == Player::P1) == a_is_p1;
                let action = if oracle_turn {
                    optimal_actions(rules.as_ref(), &state, &mut cache)[0]
                } else {
                    let actions = rules.legal_actions(&state).unwrap();
                    actions[rng.random_range(0..actions.len())]
                };
                state = rules.apply(&state, action).unwrap();
                turn += 1;
            }
            let trace = GameTrace {
                index: g,
                a_is_p1,
                length: turn,
                winner: state.outcome.and_then(|o| o.winner()),
                moves: Vec::new(),
            };
            match trace.winning_agent() {
                Some(AgentId::A) => wins_a += 1,
                Some(AgentId::B) => wins_b += 1,
                None => draws += 1,
            }
            traces.push(trace);
        }
        MatchResult {
            games: n_games,
            wins_a,
            wins_b,
            draws,
            traces,
        }
    }

    #[test]
    fn oracle_never_loses_to_random() {
        let m = play_oracle_match(200, 17);
        assert_eq!(m.wins_b, 0);
        assert!(m.win_percentage_a() >= 50.0);
        assert_eq!(m.wins_a + m.wins_b + m.draws, m.games);
    }

    #[test]
    fn self_play_match_is_an_exact_tie() {
        let rules = rules_for("tictactoe", 7).unwrap();
        let fs = atomic_features(rules.as_ref());
        let make = || AgentSpec::RawPolicy {
            policy: PolicySpec::base_only(ParameterVector::zeros(fs.len())),
            features: fs.clone(),
            sample: true,
        };
        let (a, b) = (make(), make());
        let m = play_match(&a, &b, rules.as_ref(), 20, 99);
        assert_eq!(m.wins_a, m.wins_b);
        assert!((m.win_percentage_a() - 50.0).abs() < 1e-12);
        // seat alternation exact: a is P1 in exactly half the games
        let p1_count = m.traces.iter().filter(|t| t.a_is_p1).count();
        assert_eq!(p1_count, 10);
    }

    #[test]
    fn single_game_totals_sum() {
        let rules = rules_for("tictactoe", 7).unwrap();
        let a = AgentSpec::Uct {
            search: SearchConfig::uct(20),
        };
        let b = AgentSpec::Uct {
            search: SearchConfig::uct(20),
        };
        let m = play_match(&a, &b, rules.as_ref(), 1, 5);
        assert_eq!(m.wins_a + m.wins_b + m.draws, 1);
        assert_eq!(m.traces[0].moves.len() as u32, m.traces[0].length);
    }

    #[test]
    fn bootstrap_hand_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (lo, hi) = bootstrap_ci(&[74.0; 5], 0.95, 1000, &mut rng);
        assert_eq!((lo, hi), (74.0, 74.0));

        let (lo, hi) = bootstrap_ci(&[0.0, 100.0], 0.95, 5000, &mut rng);
        assert!(lo >= 0.0 && hi <= 100.0 && lo < hi);

        let estimates = [70.0, 72.0, 74.0, 76.0, 78.0];
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let (lo, hi) = bootstrap_ci(&estimates, 0.95, 10_000, &mut r1);
        assert!(lo < 74.0 && 74.0 < hi);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(bootstrap_ci(&estimates, 0.95, 10_000, &mut r2), (lo, hi));

        // widening the confidence never narrows the interval on the same
        // resample stream
        let mut r3 = ChaCha8Rng::seed_from_u64(7);
        let (lo99, hi99) = bootstrap_ci(&estimates, 0.99, 10_000, &mut r3);
        assert!(lo99 <= lo && hi99 >= hi);
    }

    #[test]
    fn entropy_profile_hand_cases() {
        let uniform = ActionDistribution::new(vec![0.25; 4]).unwrap();
        let onehot = ActionDistribution::new(vec![1.0, 0.0, 0.0]).unwrap();
        let half = ActionDistribution::new(vec![0.5, 0.5, 0.0]).unwrap();
        assert!((uniform.normalized_entropy() - 1.0).abs() < 1e-12);
        assert_eq!(onehot.normalized_entropy(), 0.0);
        let expected = 2.0_f64.ln() / 3.0_f64.ln();
        assert!((half.normalized_entropy() - expected).abs() < 1e-4);

        let game = GameTrace {
            index: 0,
            a_is_p1: true,
            length: 4,
            winner: None,
            moves: vec![
                MoveTrace {
                    agent: AgentId::A,
                    turn: 0,
                    distribution: uniform.clone(),
                },
                MoveTrace {
                    agent: AgentId::B,
                    turn: 1,
                    distribution: onehot.clone(),
                },
                MoveTrace {
                    agent: AgentId::A,
                    turn: 2,
                    distribution: onehot.clone(),
                },
                MoveTrace {
                    agent: AgentId::B,
                    turn: 3,
                    distribution: half.clone(),
                },
            ],
        };
        let profile = entropy_profile(&[game.clone()], AgentId::A, 2);
        assert_eq!(profile.bins.len(), 2);
        assert_eq!(profile.bins[0].count, 1);
        assert!((profile.bins[0].mean - 1.0).abs() < 1e-12);
        assert_eq!(profile.bins[1].mean, 0.0);
        for b in &profile.bins {
            assert!(b.mean >= 0.0 && b.mean <= 1.0);
            assert!((0.0..=1.0).contains(&b.center));
        }
        let b_profile = entropy_profile(&[game], AgentId::B, 2);
        assert_eq!(b_profile.bins[1].count, 1);
    }

    #[test]
    fn weight_export_cases() {
        let rules = rules_for("tictactoe", 7).unwrap();
        let fs = atomic_features(rules.as_ref());
        let dim = fs.len();
        let untrained = Checkpoint {
            game: "tictactoe".into(),
            hex_side: 7,
            game_index: 0,
            step: 0,
            features: fs.clone(),
            theta_ce: ParameterVector::zeros(dim),
            theta_tspg: ParameterVector::zeros(dim),
            theta_ce_double: ParameterVector::zeros(dim),
        };
        let export = weight_distribution_export(&untrained);
        assert_eq!(export.ce.std, 0.0);
        assert_eq!(export.boosted.std, 0.0);
        assert_eq!(export.rows.len(), 2 * dim);

        // zero offsets -> both exported distributions identical
        let mut trained = untrained.clone();
        trained.theta_ce = ParameterVector((0..dim).map(|i| i as f64 * 0.1).collect());
        let e2 = weight_distribution_export(&trained);
        let ce_vals: Vec<f64> = e2.rows.iter().filter(|r| r.1 == "ce").map(|r| r.0).collect();
        let boosted: Vec<f64> = e2
            .rows
            .iter()
            .filter(|r| r.1 == "ce_plus_tspg")
            .map(|r| r.0)
            .collect();
        assert_eq!(ce_vals, boosted);

        let csv = weights_csv(&e2);
        assert_eq!(csv.lines().count(), 1 + 2 * dim);
    }

    #[test]
    fn csv_floats_use_nine_significant_digits() {
        assert_eq!(fmt_sig(1.0 / 3.0), "3.33333333e-1");
        assert_eq!(fmt_sig(0.0), "0.00000000e0");
    }
}
