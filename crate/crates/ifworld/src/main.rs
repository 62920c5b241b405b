use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use ifworld::config::RunConfig;
use ifworld::files::{self, RunError};
use ifworld::games::{self, LoadError};
use ifworld::play::{self, Session};
use ifworld::report::{BenchmarkReport, ReportRow, TrainSummary};
use ifworld::stepper::Threaded;
use ifworld_core::agents::{AgentError, AgentKind};
use ifworld_core::bench::{reference, Aggregation};
use ifworld_core::env::{Env, Handicaps};
use ifworld_core::grammar::{action_space_size, free_form_space_size};
use ifworld_core::world::{verify_walkthrough, Game};

/// Like `println!`, but a closed stdout (e.g. piped into `head`) is not an
/// error.
macro_rules! outln {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "ifworld", version, about = "Text-adventure environments and agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a game interactively or from a script.
    Play {
        /// Game file or bundled game name.
        game: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Read commands from this file instead of stdin.
        #[arg(long)]
        script: Option<PathBuf>,
    },
    /// Train agents and write curves, checkpoints and a summary.
    Train(RunArgs),
    /// Play episodes from a checkpoint without learning.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        episodes: Option<u64>,
    },
    /// List the valid actions at the start (or after some commands).
    ValidActions {
        game: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Commands to run first, separated by `;`.
        #[arg(long, default_value = "")]
        after: String,
    },
    /// Print a game's templates, vocabulary and action-space sizes.
    Templates { game: String },
    /// Aggregate normalized completion into a JSON report.
    Bench {
        /// `summary.json` files written by `train`.
        summaries: Vec<PathBuf>,
        /// Use the published scores bundled with the crate instead.
        #[arg(long)]
        published: bool,
        /// Keep negative scores instead of clipping them to zero.
        #[arg(long)]
        raw: bool,
        /// Measure progress from each game's starting score.
        #[arg(long)]
        subtract_baseline: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay the walkthroughs of games (all bundled games by default).
    Verify { games: Vec<String> },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    game: Option<String>,
    #[arg(long)]
    agent: Option<AgentKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<u32>,
    /// Environment-step budget per run.
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Any configuration key, e.g. `--set train.lr=0.0005`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

/// Exit code 2: the input could not be used. Exit code 1: a run failed.
enum Failure {
    Input(String),
    Run(String),
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Agent(AgentError::Config(_) | AgentError::Checkpoint(_)) | RunError::Checkpoint { .. } => {
                Failure::Input(e.to_string())
            }
            RunError::Io { .. } | RunError::Agent(_) => Failure::Run(e.to_string()),
        }
    }
}

fn input(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn run_failure(e: impl std::fmt::Display) -> Failure {
    Failure::Run(e.to_string())
}

fn seed_or_log(seed: Option<u64>, fallback: u64) -> u64 {
    seed.unwrap_or_else(|| {
        eprintln!("no --seed given; using seed {fallback}");
        fallback
    })
}

impl RunArgs {
    fn resolve(&self) -> Result<(RunConfig, Arc<Game>), Failure> {
        let mut sets = Vec::new();
        if let Some(g) = &self.game {
            sets.push(format!("game={}", toml_str(g)));
        }
        if let Some(a) = self.agent {
            sets.push(format!("agent=\"{a}\""));
        }
        if let Some(s) = self.seed {
            sets.push(format!("train.seed={s}"));
        }
        if let Some(r) = self.runs {
            sets.push(format!("runs={r}"));
        }
        if let Some(n) = self.steps {
            sets.push(format!("train.env_steps={n}"));
        }
        if let Some(o) = &self.out {
            sets.push(format!("out_dir={}", toml_str(&o.display().to_string())));
        }
        sets.extend(self.set.iter().cloned());
        let cfg = RunConfig::resolve(self.config.as_deref(), &sets).map_err(input)?;
        if self.seed.is_none() && !self.set.iter().any(|s| s.trim_start().starts_with("train.seed")) {
            eprintln!("no --seed given; using seed {} from the configuration", cfg.train.seed);
        }
        let game = games::resolve(cfg.game.as_deref().ok_or_else(|| input("no game given (set `game` or pass --game)"))?)?;
        Ok((cfg, game))
    }
}

fn toml_str(s: &str) -> String {
    toml::Value::String(s.into()).to_string()
}

fn stepper(cfg: &RunConfig) -> Threaded {
    if cfg.threads == 0 {
        Threaded::available()
    } else {
        Threaded::new(cfg.threads)
    }
}

fn cmd_play(game: &str, seed: Option<u64>, script: Option<&Path>) -> Result<(), Failure> {
    let game = games::resolve(game)?;
    let seed = seed_or_log(seed, 0);
    let mut session = Session::new(game, seed).map_err(run_failure)?;
    let stdout = std::io::stdout().lock();
    match script {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
            play::run(&mut session, std::io::BufReader::new(file), stdout, true).map_err(run_failure)
        }
        None => play::run(&mut session, std::io::stdin().lock(), stdout, false).map_err(run_failure),
    }
}

fn cmd_train(args: &RunArgs) -> Result<(), Failure> {
    let (cfg, game) = args.resolve()?;
    let out = cfg.out_dir.join(format!("{}-{}", game.title(), cfg.agent));
    files::write(&out.join("config.toml"), cfg.to_toml())?;
    let mut st = stepper(&cfg);
    let (summary, _) = files::train_runs(&game, &cfg, &mut st, &out, &mut |line| eprintln!("{line}"))?;
    outln!(
        "{} on {}: final score {:.2} ± {:.2} of {} over {} runs ({:.1}%)",
        summary.agent,
        summary.game,
        summary.final_score.mean,
        summary.final_score.std,
        summary.max_score,
        summary.final_scores.len(),
        100.0 * summary.normalized
    );
    outln!("artifacts in {}", out.display());
    Ok(())
}

fn cmd_eval(args: &RunArgs, checkpoint: &Path, episodes: Option<u64>) -> Result<(), Failure> {
    let (cfg, game) = args.resolve()?;
    let ck = files::load_checkpoint(checkpoint)?;
    let episodes = episodes.unwrap_or(cfg.eval_episodes);
    let (eps, stats) = files::eval_checkpoint(&game, &cfg, &ck, episodes, cfg.train.seed)?;
    outln!(
        "{} on {}: mean score {:.2} ± {:.2} of {} over {} episodes",
        ck.kind,
        game.title(),
        stats.mean,
        stats.std,
        game.max_score(),
        eps.len()
    );
    Ok(())
}

fn cmd_valid(game: &str, seed: Option<u64>, after: &str) -> Result<(), Failure> {
    let game = games::resolve(game)?;
    let seed = seed_or_log(seed, 0);
    let mut env = Env::new(game, Handicaps::ALL, seed).map_err(run_failure)?;
    env.reset(Some(seed)).map_err(run_failure)?;
    for cmd in after.split(';').map(str::trim).filter(|c| !c.is_empty()) {
        env.step(cmd).map_err(run_failure)?;
    }
    let objects = env.interactive_objects();
    let valid = env.identify_valid_actions(&objects).map_err(run_failure)?;
    outln!("objects: {}", objects.join(", "));
    for a in valid.surfaces() {
        outln!("{a}");
    }
    Ok(())
}

fn cmd_templates(game: &str) -> Result<(), Failure> {
    let game = games::resolve(game)?;
    let (t, v) = (game.templates(), game.vocabulary());
    outln!("{} templates, {} vocabulary words", t.len(), v.len());
    for tpl in t {
        outln!("  {}", tpl.surface);
    }
    outln!("vocabulary: {}", v.words().join(" "));
    let n = v.len() as u64;
    match (action_space_size(t, n), free_form_space_size(n, 4)) {
        (Ok(size), Ok(free)) => {
            outln!("filled actions: {}", size.exact);
            outln!("template bound |T|*|V|^2: {}", size.upper_bound);
            outln!("free-form 4-word commands: {free}");
        }
        _ => outln!("action-space sizes overflow"),
    }
    Ok(())
}

fn cmd_bench(summaries: &[PathBuf], published: bool, agg: Aggregation, out: Option<&Path>) -> Result<(), Failure> {
    let rows: Vec<ReportRow> = if published {
        let columns: [(AgentKind, fn(&reference::Published) -> f64); 3] =
            [(AgentKind::Random, |g| g.random), (AgentKind::Tdqn, |g| g.tdqn), (AgentKind::Drrn, |g| g.drrn)];
        columns
            .iter()
            .flat_map(|(agent, col)| {
                reference::TABLE.iter().map(move |g| ReportRow {
                    game: g.game.into(),
                    agent: *agent,
                    score: col(g),
                    score_std: 0.0,
                    runs: 5,
                    max_score: g.max_score,
                    baseline: g.baseline,
                    handicaps: agent.handicaps().iter().collect(),
                })
            })
            .collect()
    } else {
        if summaries.is_empty() {
            return Err(input("give summary.json files or --published"));
        }
        let mut rows = Vec::new();
        for p in summaries {
            let text = std::fs::read_to_string(p).map_err(|e| input(format!("{}: {e}", p.display())))?;
            let s: TrainSummary = serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", p.display())))?;
            rows.push(s.row());
        }
        rows
    };
    let report = BenchmarkReport::new(rows, agg).map_err(input)?;
    for (agent, pct) in &report.normalized_completion {
        eprintln!("{agent}: {pct:.2}% normalized completion");
    }
    match out {
        Some(p) => files::write(p, report.to_json())?,
        None => outln!("{}", report.to_json()),
    }
    Ok(())
}

fn cmd_verify(names: &[String]) -> Result<(), Failure> {
    let names: Vec<String> =
        if names.is_empty() { games::bundled_names().map(String::from).collect() } else { names.to_vec() };
    let mut failed = 0;
    for name in &names {
        let game = games::resolve(name)?;
        match verify_walkthrough(&game, 0) {
            Ok(r) => outln!(
                "{}: ok, {} steps, score {}/{}, {:.1} steps per reward",
                game.title(),
                r.rewards.len(),
                r.final_score,
                game.max_score(),
                r.steps_per_reward
            ),
            Err(e) => {
                failed += 1;
                outln!("{}: FAILED: {e}", game.title());
            }
        }
    }
    if failed > 0 {
        return Err(Failure::Run(format!("{failed} walkthrough(s) failed")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Play { game, seed, script } => cmd_play(game, *seed, script.as_deref()),
        Command::Train(args) => cmd_train(args),
        Command::Eval { run, checkpoint, episodes } => cmd_eval(run, checkpoint, *episodes),
        Command::ValidActions { game, seed, after } => cmd_valid(game, *seed, after),
        Command::Templates { game } => cmd_templates(game),
        Command::Bench { summaries, published, raw, subtract_baseline, out } => {
            let agg = Aggregation { clip_negatives: !raw, subtract_baseline: *subtract_baseline };
            cmd_bench(summaries, *published, agg, out.as_deref())
        }
        Command::Verify { games } => cmd_verify(games),
    };
    let _ = std::io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
