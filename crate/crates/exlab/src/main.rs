//! Command-line entry point: `train` runs the self-play loop and writes
//! checkpoints, `evaluate` plays head-to-head matches between agents built
//! from checkpoints, `analyze` turns match records and checkpoints into
//! entropy and weight-distribution CSVs.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

use clap::{Args, Parser, Subcommand};
use exlab::config::{ConfigError, RunConfig};
use exlab::eval::{
    bootstrap_ci, entropy_csv, entropy_profile_from_samples, fmt_sig, match_csv, play_match,
    weight_distribution_export, weights_csv, AgentId, AgentSpec, MatchResult,
};
use exlab::game::{rules_for, Rules};
use exlab::search::SearchConfig;
use exlab::training::{log_header, log_row, Checkpoint, Trainer};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "exlab", about = "Self-play expert iteration laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run self-play training and write checkpoints plus a training log
    Train(TrainArgs),
    /// Play evaluation matches between two agents
    Evaluate(EvaluateArgs),
    /// Produce entropy and weight-distribution CSVs from existing outputs
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Key-value configuration file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    game: Option<String>,
    #[arg(long)]
    games: Option<u32>,
    /// MCTS iterations per self-play move
    #[arg(long)]
    iterations: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    hex_side: Option<i32>,
    /// Checkpoint game indices, comma-separated
    #[arg(long)]
    checkpoints: Option<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Agent kind for side a: ce, ce_sample, tspg, tspg_sample, ce_double,
    /// biased_mcts, uct
    #[arg(long)]
    agent_a: String,
    #[arg(long)]
    agent_b: String,
    /// Repetition checkpoints backing agent a (one match per repetition)
    #[arg(long)]
    ckpt_a: Vec<PathBuf>,
    #[arg(long)]
    ckpt_b: Vec<PathBuf>,
    /// Games per repetition pairing
    #[arg(long, default_value_t = 40)]
    games: u32,
    /// MCTS iterations for search-based agents
    #[arg(long, default_value_t = 1600)]
    iterations: u32,
    #[arg(long, default_value_t = 2.5)]
    exploration: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Game id; required when neither agent carries a checkpoint
    #[arg(long)]
    game: Option<String>,
    #[arg(long, default_value_t = 7)]
    hex_side: i32,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Directory holding moves.csv from a previous evaluate run
    #[arg(long)]
    match_dir: Option<PathBuf>,
    /// Checkpoints to export weight distributions for
    #[arg(long)]
    checkpoint: Vec<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    bins: usize,
}

enum AppError {
    Usage(String),
    Runtime(String),
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io(io) => AppError::Runtime(io.to_string()),
            other => AppError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Runtime(e.to_string())
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Analyze(args) => cmd_analyze(args),
    };
    match result {
        Ok(()) => {}
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
        Err(AppError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}

fn cmd_train(args: TrainArgs) -> Result<(), AppError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(game) = args.game {
        cfg.set("game", &game, 0)?;
    }
    if let Some(games) = args.games {
        cfg.set("games", &games.to_string(), 0)?;
    }
    if let Some(iters) = args.iterations {
        cfg.set("mcts_iterations", &iters.to_string(), 0)?;
    }
    if let Some(seed) = args.seed {
        cfg.set("seed", &seed.to_string(), 0)?;
    }
    if let Some(side) = args.hex_side {
        cfg.set("hex_side", &side.to_string(), 0)?;
    }
    if let Some(cps) = args.checkpoints {
        cfg.set("checkpoints", &cps, 0)?;
    } else if cfg.train.checkpoints.iter().any(|&c| c > cfg.train.games) {
        // clip the protocol's default schedule to short runs
        cfg.train.checkpoints.retain(|&c| c <= cfg.train.games);
        if !cfg.train.checkpoints.contains(&cfg.train.games) {
            cfg.train.checkpoints.push(cfg.train.games);
        }
    }
    if let Some(out) = args.out {
        cfg.out = out;
    }
    cfg.require_game()?;

    let mut trainer =
        Trainer::new(cfg.train.clone()).map_err(|e| AppError::Usage(e.to_string()))?;
    std::fs::create_dir_all(&cfg.out)?;
    std::fs::write(cfg.out.join("config.txt"), cfg.resolved())?;

    let mut log = String::from(log_header());
    log.push('\n');
    let checkpoints = trainer
        .train_with(|record| {
            log.push_str(&log_row(record));
            log.push('\n');
        })
        .map_err(|e| AppError::Runtime(e.to_string()))?;
    std::fs::write(cfg.out.join("log.csv"), &log)?;
    for cp in &checkpoints {
        cp.save(&cfg.out.join(format!("{}.ckpt", cp.game_index)))
            .map_err(|e| AppError::Runtime(e.to_string()))?;
    }
    println!(
        "trained {} games of {}, wrote {} checkpoints to {}",
        cfg.train.games,
        cfg.train.game,
        checkpoints.len(),
        cfg.out.display()
    );
    Ok(())
}

fn needs_checkpoint(kind: &str) -> Result<bool, AppError> {
    match kind {
        "ce" | "ce_sample" | "tspg" | "tspg_sample" | "ce_double" | "biased_mcts" => Ok(true),
        "uct" => Ok(false),
        other => Err(AppError::Usage(format!("unknown agent kind `{other}`"))),
    }
}

fn build_agent(
    kind: &str,
    ckpt: Option<&Checkpoint>,
    iterations: u32,
    exploration: f64,
) -> Result<AgentSpec, AppError> {
    let cp = |()| -> Result<&Checkpoint, AppError> {
        ckpt.ok_or_else(|| AppError::Usage(format!("agent kind `{kind}` needs a checkpoint")))
    };
    Ok(match kind {
        "ce" | "ce_sample" => AgentSpec::RawPolicy {
            policy: cp(())?.pi_ce(),
            features: cp(())?.features.clone(),
            sample: kind == "ce_sample",
        },
        "tspg" | "tspg_sample" => AgentSpec::RawPolicy {
            policy: cp(())?.pi_tspg(),
            features: cp(())?.features.clone(),
            sample: kind == "tspg_sample",
        },
        "ce_double" => AgentSpec::RawPolicy {
            policy: cp(())?.pi_ce_double(),
            features: cp(())?.features.clone(),
            sample: false,
        },
        "biased_mcts" => AgentSpec::BiasedMcts {
            prior: cp(())?.pi_ce(),
            playout: cp(())?.pi_ce_double(),
            features: cp(())?.features.clone(),
            search: SearchConfig::puct(iterations, exploration),
        },
        "uct" => AgentSpec::Uct {
            search: SearchConfig::uct(iterations),
        },
        other => return Err(AppError::Usage(format!("unknown agent kind `{other}`"))),
    })
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), AppError> {
    if args.games == 0 {
        return Err(AppError::Usage("--games must be at least 1".into()));
    }
    let a_needs = needs_checkpoint(&args.agent_a)?;
    let b_needs = needs_checkpoint(&args.agent_b)?;
    if a_needs && args.ckpt_a.is_empty() {
        return Err(AppError::Usage(format!(
            "agent kind `{}` needs --ckpt-a",
            args.agent_a
        )));
    }
    if b_needs && args.ckpt_b.is_empty() {
        return Err(AppError::Usage(format!(
            "agent kind `{}` needs --ckpt-b",
            args.agent_b
        )));
    }
    let pairs = args.ckpt_a.len().max(args.ckpt_b.len()).max(1);
    for (needs, list, flag) in [
        (a_needs, &args.ckpt_a, "--ckpt-a"),
        (b_needs, &args.ckpt_b, "--ckpt-b"),
    ] {
        if needs && list.len() != pairs {
            return Err(AppError::Usage(format!(
                "{flag} must list {pairs} checkpoints to pair repetitions"
            )));
        }
    }

    let load = |path: &Path| -> Result<Checkpoint, AppError> {
        Checkpoint::load(path).map_err(|e| AppError::Runtime(format!("{}: {e}", path.display())))
    };
    let mut results: Vec<MatchResult> = Vec::new();
    let mut rules: Option<Box<dyn Rules>> = None;
    let mut match_rows = String::from("pair,game,a_is_p1,length,winner\n");
    let mut move_rows = String::from("pair,game,agent,turn,length,entropy\n");
    for pair in 0..pairs {
        let cp_a = if a_needs {
            Some(load(&args.ckpt_a[pair])?)
        } else {
            None
        };
        let cp_b = if b_needs {
            Some(load(&args.ckpt_b[pair])?)
        } else {
            None
        };
        if rules.is_none() {
            rules = Some(match (&cp_a, &cp_b, &args.game) {
                (Some(cp), _, _) | (None, Some(cp), _) => cp
                    .rules()
                    .map_err(|e| AppError::Runtime(e.to_string()))?,
                (None, None, Some(game)) => rules_for(game, args.hex_side)
                    .map_err(|e| AppError::Usage(e.to_string()))?,
                (None, None, None) => {
                    return Err(AppError::Usage(
                        "--game is required when no checkpoints are given".into(),
                    ))
                }
            });
        }
        let rules = rules.as_deref().unwrap();
        let a = build_agent(&args.agent_a, cp_a.as_ref(), args.iterations, args.exploration)?;
        let b = build_agent(&args.agent_b, cp_b.as_ref(), args.iterations, args.exploration)?;
        let seed = args.seed.wrapping_add(1_000_003u64.wrapping_mul(pair as u64));
        let result = play_match(&a, &b, rules, args.games, seed);
        for line in match_csv(&result).lines().skip(1) {
            let _ = writeln!(match_rows, "{pair},{line}");
        }
        for trace in &result.traces {
            for mv in &trace.moves {
                let agent = if mv.agent == AgentId::A { "a" } else { "b" };
                let _ = writeln!(
                    move_rows,
                    "{pair},{},{agent},{},{},{}",
                    trace.index,
                    mv.turn,
                    trace.length,
                    fmt_sig(mv.distribution.normalized_entropy())
                );
            }
        }
        results.push(result);
    }

    let per_pair: Vec<f64> = results.iter().map(|r| r.win_percentage_a()).collect();
    let mean = per_pair.iter().sum::<f64>() / per_pair.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed ^ 0xB007_5EED);
    let (lo, hi) = bootstrap_ci(&per_pair, 0.95, 10_000, &mut rng);
    let total_games: u32 = results.iter().map(|r| r.games).sum();
    let mut summary = String::new();
    let _ = writeln!(summary, "agent_a = {}", args.agent_a);
    let _ = writeln!(summary, "agent_b = {}", args.agent_b);
    let _ = writeln!(summary, "pairs = {pairs}");
    let _ = writeln!(summary, "total_games = {total_games}");
    for (i, wp) in per_pair.iter().enumerate() {
        let _ = writeln!(summary, "win_pct_a_pair_{i} = {}", fmt_sig(*wp));
    }
    let _ = writeln!(summary, "win_pct_a_mean = {}", fmt_sig(mean));
    let _ = writeln!(summary, "win_pct_a_ci95 = ({}, {})", fmt_sig(lo), fmt_sig(hi));

    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("match.csv"), match_rows)?;
    std::fs::write(args.out.join("moves.csv"), move_rows)?;
    std::fs::write(args.out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), AppError> {
    let mut wrote_anything = false;
    std::fs::create_dir_all(&args.out)?;

    if let Some(dir) = &args.match_dir {
        let moves_path = dir.join("moves.csv");
        let text = std::fs::read_to_string(&moves_path).map_err(|e| {
            AppError::Runtime(format!("no match records at {}: {e}", moves_path.display()))
        })?;
        // agent -> (game time, entropy) samples
        let mut samples: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(AppError::Runtime(format!(
                    "{}: malformed row on line {}",
                    moves_path.display(),
                    i + 1
                )));
            }
            let parse_f = |s: &str| -> Result<f64, AppError> {
                s.parse()
                    .map_err(|_| AppError::Runtime(format!("bad number `{s}` in moves.csv")))
            };
            let turn = parse_f(fields[3])?;
            let length = parse_f(fields[4])?;
            let entropy = parse_f(fields[5])?;
            if length > 0.0 {
                samples
                    .entry(fields[2].to_string())
                    .or_default()
                    .push((turn / length, entropy));
            }
        }
        if samples.is_empty() {
            return Err(AppError::Runtime(format!(
                "{} holds no move records",
                moves_path.display()
            )));
        }
        let profiles: Vec<(String, _)> = samples
            .iter()
            .map(|(agent, pts)| (agent.clone(), entropy_profile_from_samples(pts, args.bins)))
            .collect();
        let borrowed: Vec<(&str, _)> = profiles.iter().map(|(a, p)| (a.as_str(), p)).collect();
        std::fs::write(args.out.join("entropy.csv"), entropy_csv(&borrowed))?;
        wrote_anything = true;
    }

    if !args.checkpoint.is_empty() {
        let mut all_rows = String::from("checkpoint,value,objective\n");
        let mut summary = String::new();
        for path in &args.checkpoint {
            let cp = Checkpoint::load(path)
                .map_err(|e| AppError::Runtime(format!("{}: {e}", path.display())))?;
            let export = weight_distribution_export(&cp);
            for line in weights_csv(&export).lines().skip(1) {
                let _ = writeln!(all_rows, "{},{line}", path.display());
            }
            let _ = writeln!(
                summary,
                "{}: ce std {} frac_near_zero {} | ce+tspg std {} frac_near_zero {}",
                path.display(),
                fmt_sig(export.ce.std),
                fmt_sig(export.ce.frac_near_zero),
                fmt_sig(export.boosted.std),
                fmt_sig(export.boosted.frac_near_zero)
            );
        }
        std::fs::write(args.out.join("weights.csv"), all_rows)?;
        std::fs::write(args.out.join("weights_summary.txt"), &summary)?;
        print!("{summary}");
        wrote_anything = true;
    }

    if !wrote_anything {
        return Err(AppError::Usage(
            "nothing to analyze: pass --match-dir and/or --checkpoint".into(),
        ));
    }
    Ok(())
}
