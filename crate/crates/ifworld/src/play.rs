//! Line-oriented play session with debugging meta-commands.
//!
//! Game commands print the response and a `Reward<t>: r, Score s, Done b`
//! line. Meta-commands start with `:`:
//! `:tree`, `:valid`, `:save [file]`, `:load [file]`, `:restart`,
//! `:transcript <file>`, `:help`. `quit` (or `:quit`) ends the session
//! with a final `Score` line.

use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use ifworld_core::env::{Env, EnvError, Handicaps, Transcript, TranscriptStep};
use ifworld_core::world::{Game, ObjectId, Snapshot, WorldState};

const HELP: &str = "meta-commands: :tree :valid :save [file] :load [file] :restart :transcript <file> :help; quit to leave";

pub struct Session {
    env: Env,
    seed: u64,
    slot: Option<Snapshot>,
    transcript: Transcript,
    pending_obs: String,
}

impl Session {
    pub fn new(game: Arc<Game>, seed: u64) -> Result<Session, EnvError> {
        let mut env = Env::new(game, Handicaps::ALL, seed)?;
        let (obs, _) = env.reset(Some(seed))?;
        Ok(Session { env, seed, slot: None, transcript: Transcript::new(), pending_obs: obs.narrative })
    }

    /// Text shown before the first command.
    pub fn intro(&self) -> String {
        let title = self.env.game().title();
        let look = self.env.world_state().map(WorldState::render_look).unwrap_or_default();
        format!("{title}\n{}\n\n{look}", self.pending_obs)
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn score_line(&self) -> String {
        let moves = self.env.world_state().map(WorldState::moves).unwrap_or(0);
        format!("Score: {} of {} in {} moves", self.env.score(), self.env.game().max_score(), moves)
    }

    /// Handles one input line. `None` means the session is over.
    pub fn handle(&mut self, line: &str) -> Option<String> {
        let line = line.trim();
        match line {
            "" => Some(String::new()),
            "quit" | ":quit" | ":q" => None,
            ":help" => Some(HELP.into()),
            ":tree" => Some(self.tree()),
            ":valid" => Some(self.valid()),
            ":restart" => Some(self.restart()),
            _ if line.starts_with(':') => Some(self.meta(line)),
            _ => Some(self.command(line)),
        }
    }

    fn command(&mut self, line: &str) -> String {
        if self.env.episode_over() {
            return "The episode is over. Type :restart or quit.".into();
        }
        let t = self.transcript.len();
        match self.env.step(line) {
            Ok(r) => {
                self.transcript.push(TranscriptStep {
                    observation: std::mem::replace(&mut self.pending_obs, r.observation.clone()),
                    action: line.into(),
                    reward: r.reward,
                    score: r.score,
                    done: r.done,
                    ..Default::default()
                });
                let done = if r.done { "True" } else { "False" };
                let mut out = format!("{}\nReward{t}: {}, Score {}, Done {done}", r.observation, r.reward, r.score);
                if r.truncated {
                    out.push_str("\n[step limit reached]");
                }
                out
            }
            Err(e) => format!("error: {e}"),
        }
    }

    fn meta(&mut self, line: &str) -> String {
        let (cmd, arg) = match line.split_once(char::is_whitespace) {
            Some((c, a)) => (c, Some(a.trim())),
            None => (line, None),
        };
        match (cmd, arg) {
            (":save", None) => match self.env.save() {
                Ok(s) => {
                    self.slot = Some(s);
                    "Saved.".into()
                }
                Err(e) => format!("error: {e}"),
            },
            (":save", Some(path)) => match self.env.save().map(|s| std::fs::write(path, s.as_bytes())) {
                Ok(Ok(())) => format!("Saved to {path}."),
                Ok(Err(e)) => format!("error: {path}: {e}"),
                Err(e) => format!("error: {e}"),
            },
            (":load", None) => match self.slot.clone() {
                Some(s) => self.restore(&s),
                None => "Nothing saved yet.".into(),
            },
            (":load", Some(path)) => match std::fs::read(path) {
                Ok(bytes) => self.restore(&Snapshot::from_bytes(&bytes)),
                Err(e) => format!("error: {path}: {e}"),
            },
            (":transcript", Some(path)) => match std::fs::write(path, self.transcript.render()) {
                Ok(()) => format!("Wrote {} steps to {path}.", self.transcript.len()),
                Err(e) => format!("error: {path}: {e}"),
            },
            _ => format!("unknown meta-command `{line}`; {HELP}"),
        }
    }

    fn restore(&mut self, s: &Snapshot) -> String {
        match self.env.load(s) {
            Ok(()) => {
                let look = self.env.world_state().map(WorldState::render_look).unwrap_or_default();
                self.pending_obs = look.clone();
                format!("Restored.\n{look}")
            }
            Err(e) => format!("error: {e}"),
        }
    }

    fn restart(&mut self) -> String {
        match self.env.reset(Some(self.seed)) {
            Ok((obs, _)) => {
                self.pending_obs = obs.narrative;
                self.intro()
            }
            Err(e) => format!("error: {e}"),
        }
    }

    fn valid(&mut self) -> String {
        if self.env.episode_over() {
            return "The episode is over.".into();
        }
        let objects = self.env.interactive_objects();
        match self.env.identify_valid_actions(&objects) {
            Ok(v) => {
                let mut out = format!("{} valid action(s):", v.len());
                for a in v.surfaces() {
                    out.push_str("\n  ");
                    out.push_str(a);
                }
                out
            }
            Err(e) => format!("error: {e}"),
        }
    }

    fn tree(&self) -> String {
        let Ok(state) = self.env.world_state() else { return "object tree unavailable".into() };
        let mut out = String::new();
        render_tree(state, ObjectId::UNIVERSE, 0, &mut out);
        out.pop();
        out
    }
}

fn render_tree(state: &WorldState, id: ObjectId, depth: usize, out: &mut String) {
    for child in state.children_of(id) {
        let node = state.game().object(child).expect("tree nodes exist in the game");
        let attrs: Vec<&str> = state.attributes(child).into_iter().flat_map(|a| a.iter()).map(|a| a.name()).collect();
        out.push_str(&"  ".repeat(depth));
        out.push_str(&format!("{child} {}", node.display()));
        if !attrs.is_empty() {
            out.push_str(&format!(" [{}]", attrs.join(" ")));
        }
        out.push('\n');
        render_tree(state, child, depth + 1, out);
    }
}

/// Drives a session from `input`. With `echo`, each input line is printed
/// after a `> ` prompt so a scripted run reads like a transcript.
pub fn run(session: &mut Session, input: impl BufRead, mut output: impl Write, echo: bool) -> std::io::Result<()> {
    writeln!(output, "{}", session.intro())?;
    for line in input.lines() {
        let line = line?;
        if echo {
            writeln!(output, "\n> {line}")?;
        } else {
            writeln!(output)?;
        }
        match session.handle(&line) {
            Some(text) => writeln!(output, "{text}")?,
            None => break,
        }
        output.flush()?;
    }
    writeln!(output, "{}", session.score_line())
}

pub fn run_script(session: &mut Session, script: &Path, output: impl Write) -> std::io::Result<()> {
    let file = std::fs::File::open(script)?;
    run(session, std::io::BufReader::new(file), output, true)
}
