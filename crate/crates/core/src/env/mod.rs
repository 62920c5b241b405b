//! Agent-facing environment over a [`Game`], with capability gating,
//! world-change detection and valid-action identification.

mod handicaps;
mod transcript;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use thiserror::Error;

pub use handicaps::{Handicap, Handicaps};
pub use transcript::{Transcript, TranscriptStep};

use crate::grammar::{command_words, enumerate_candidates, ActionCandidate, PairMode, ParseOutcome, Template, Vocabulary};
use crate::rng::SplitMix64;
use crate::world::{Game, ObjectTree, Snapshot, SnapshotError, WorldState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("operation requires the `{0}` handicap")]
    MissingHandicap(Handicap),
    #[error("valid_action_detection requires load_save")]
    InconsistentHandicaps,
    #[error("the episode is over; call reset")]
    EpisodeOver,
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
}

/// Per-episode step limits. Only valid steps count toward `valid_steps`;
/// `total_steps` bounds every command, valid or not.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EpisodeLimits {
    pub valid_steps: u32,
    pub total_steps: Option<u32>,
}

impl Default for EpisodeLimits {
    fn default() -> Self {
        EpisodeLimits { valid_steps: 100, total_steps: None }
    }
}

/// Which changes count as a world change.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Detector {
    /// Object tree only: parents and attributes.
    #[default]
    Tree,
    /// Tree, globals, score and the done flag.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepResult {
    pub observation: String,
    pub reward: i64,
    pub score: i64,
    pub done: bool,
    pub moves: u64,
    pub parse: ParseOutcome,
    /// Tree channel changed.
    pub world_changed: bool,
    /// Tree, globals, score or done changed.
    pub exact_changed: bool,
    /// Counted against the valid-step budget.
    pub valid: bool,
    /// The episode hit a step limit without the game ending.
    pub truncated: bool,
}

impl StepResult {
    pub fn episode_over(&self) -> bool {
        self.done || self.truncated
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AugmentedObservation {
    pub narrative: String,
    pub inventory: String,
    pub description: String,
    pub prev_action: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResetInfo {
    pub seed: u64,
    /// The seed came from the caller rather than the entropy source.
    pub fixed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidActionSet {
    pub actions: Vec<ActionCandidate>,
    /// `Diff::digest` of each action's effect, parallel to `actions`.
    pub diffs: Vec<u64>,
}

impl ValidActionSet {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.actions.iter().map(|a| a.surface.as_str())
    }
}

/// Nouns of `game` mentioned in `text`, sorted and de-duplicated.
pub fn extract_nouns(game: &Game, text: &str) -> Vec<String> {
    let mut out: Vec<String> = command_words(text).into_iter().filter(|w| game.is_noun(w)).collect();
    out.sort();
    out.dedup();
    out
}

/// One environment instance. Instances share only the immutable [`Game`].
#[derive(Clone, Debug)]
pub struct Env {
    game: Arc<Game>,
    handicaps: Handicaps,
    limits: EpisodeLimits,
    dedup_by_diff: bool,
    entropy: SplitMix64,
    state: WorldState,
    seed: u64,
    last_observation: String,
    prev_action: String,
    valid_steps: u32,
    total_steps: u32,
    truncated: bool,
}

impl Env {
    /// `entropy` seeds the generator that supplies seeds for unseeded resets.
    pub fn new(game: Arc<Game>, handicaps: Handicaps, entropy: u64) -> Result<Env, EnvError> {
        if !handicaps.is_consistent() {
            return Err(EnvError::InconsistentHandicaps);
        }
        let mut entropy = SplitMix64::new(entropy);
        let seed = entropy.next_u64();
        let state = WorldState::new(game.clone(), seed);
        Ok(Env {
            game,
            handicaps,
            limits: EpisodeLimits::default(),
            dedup_by_diff: false,
            entropy,
            state,
            seed,
            last_observation: String::new(),
            prev_action: String::new(),
            valid_steps: 0,
            total_steps: 0,
            truncated: false,
        })
    }

    pub fn with_limits(mut self, limits: EpisodeLimits) -> Self {
        self.limits = limits;
        self
    }

    /// Collapse valid actions with identical effects, keeping the
    /// lexicographically first surface.
    pub fn with_dedup_by_diff(mut self, on: bool) -> Self {
        self.dedup_by_diff = on;
        self
    }

    pub fn game(&self) -> &Arc<Game> {
        &self.game
    }

    pub fn handicaps(&self) -> Handicaps {
        self.handicaps
    }

    pub fn limits(&self) -> EpisodeLimits {
        self.limits
    }

    fn require(&self, h: Handicap) -> Result<(), EnvError> {
        if self.handicaps.contains(h) {
            Ok(())
        } else {
            Err(EnvError::MissingHandicap(h))
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn score(&self) -> i64 {
        self.state.score()
    }

    pub fn done(&self) -> bool {
        self.state.done()
    }

    pub fn episode_over(&self) -> bool {
        self.state.done() || self.truncated
    }

    pub fn valid_steps(&self) -> u32 {
        self.valid_steps
    }

    pub fn total_steps(&self) -> u32 {
        self.total_steps
    }

    pub fn last_observation(&self) -> &str {
        &self.last_observation
    }

    /// Hash of the full game state. Always available: it reveals nothing
    /// beyond equality.
    pub fn state_hash(&self) -> u64 {
        self.state.state_hash()
    }

    /// State hash ignoring the move counter.
    pub fn position_hash(&self) -> u64 {
        self.state.position_hash()
    }

    /// Starts a new episode. A caller-supplied seed needs `fixed_seed`;
    /// without one the seed is drawn from the entropy source.
    pub fn reset(&mut self, seed: Option<u64>) -> Result<(AugmentedObservation, ResetInfo), EnvError> {
        let fixed = seed.is_some();
        if fixed {
            self.require(Handicap::FixedSeed)?;
        }
        let seed = seed.unwrap_or_else(|| self.entropy.next_u64());
        self.seed = seed;
        self.state = WorldState::new(self.game.clone(), seed);
        self.valid_steps = 0;
        self.total_steps = 0;
        self.truncated = false;
        self.prev_action.clear();
        let intro = self.game.def().intro_text.clone();
        self.last_observation = intro.clone();
        let obs = AugmentedObservation {
            narrative: intro,
            inventory: self.state.render_inventory(),
            description: self.state.render_look(),
            prev_action: String::new(),
        };
        Ok((obs, ResetInfo { seed, fixed }))
    }

    pub fn step(&mut self, action: &str) -> Result<StepResult, EnvError> {
        if self.episode_over() {
            return Err(EnvError::EpisodeOver);
        }
        let before = self.state.clone();
        let out = self.state.step(action).map_err(|_| EnvError::EpisodeOver)?;
        let world_changed = self.state.tree_differs(&before);
        let exact_changed = self.state.exact_differs(&before);
        let valid = out.parse.is_resolved() && exact_changed;
        self.total_steps += 1;
        if valid {
            self.valid_steps += 1;
        }
        let limit_hit = self.valid_steps >= self.limits.valid_steps
            || self.limits.total_steps.is_some_and(|t| self.total_steps >= t);
        self.truncated = limit_hit && !self.state.done();
        self.last_observation = out.text.clone();
        self.prev_action = action.into();
        Ok(StepResult {
            observation: out.text,
            reward: self.state.score() - before.score(),
            score: self.state.score(),
            done: self.state.done(),
            moves: self.state.moves(),
            parse: out.parse,
            world_changed,
            exact_changed,
            valid,
            truncated: self.truncated,
        })
    }

    pub fn save(&self) -> Result<Snapshot, EnvError> {
        self.require(Handicap::LoadSave)?;
        Ok(self.state.snapshot())
    }

    /// Restores a saved state. Episode counters are left alone.
    pub fn load(&mut self, snapshot: &Snapshot) -> Result<(), EnvError> {
        self.require(Handicap::LoadSave)?;
        self.state = WorldState::restore(&self.game, snapshot)?;
        Ok(())
    }

    /// Whether the current state differs from `before` under `detector`.
    pub fn world_changed(&self, before: &Snapshot, detector: Detector) -> Result<bool, EnvError> {
        self.require(Handicap::LoadSave)?;
        let prev = WorldState::restore(&self.game, before)?;
        Ok(match detector {
            Detector::Tree => self.state.tree_differs(&prev),
            Detector::Exact => self.state.exact_differs(&prev),
        })
    }

    pub fn templates(&self) -> Result<&[Template], EnvError> {
        self.require(Handicap::TemplatesVocab)?;
        Ok(self.game.templates())
    }

    pub fn vocabulary(&self) -> Result<&Vocabulary, EnvError> {
        self.require(Handicap::TemplatesVocab)?;
        Ok(self.game.vocabulary())
    }

    pub fn world_state(&self) -> Result<&WorldState, EnvError> {
        self.require(Handicap::ObjectTree)?;
        Ok(&self.state)
    }

    pub fn object_tree(&self) -> Result<&ObjectTree, EnvError> {
        self.require(Handicap::ObjectTree)?;
        Ok(self.state.tree())
    }

    /// Names of objects the player can interact with: from the object tree
    /// when permitted, otherwise the game's nouns found in the last
    /// observation.
    pub fn interactive_objects(&self) -> Vec<String> {
        if self.handicaps.contains(Handicap::ObjectTree) {
            self.state.visible_names()
        } else {
            extract_nouns(&self.game, &self.last_observation)
        }
    }

    /// Runs `look` and `inventory` from a saved copy of the current state,
    /// then restores it.
    pub fn gather_augmented_observation(&mut self) -> Result<AugmentedObservation, EnvError> {
        self.require(Handicap::LoadSave)?;
        let saved = self.state.snapshot();
        let description = self.probe_text("look", |s| s.render_look());
        self.state = WorldState::restore(&self.game, &saved)?;
        let inventory = self.probe_text("inventory", |s| s.render_inventory());
        self.state = WorldState::restore(&self.game, &saved)?;
        Ok(AugmentedObservation {
            narrative: self.last_observation.clone(),
            inventory,
            description,
            prev_action: self.prev_action.clone(),
        })
    }

    fn probe_text(&mut self, command: &str, fallback: fn(&WorldState) -> String) -> String {
        if self.state.done() {
            return fallback(&self.state);
        }
        match self.state.step(command) {
            Ok(out) if out.accepted => out.text,
            _ => fallback(&self.state),
        }
    }

    /// Every filling of every template with `objects` whose execution from
    /// the current state changes the object tree. The state is saved once
    /// and restored after every probe; probes do not count as steps.
    pub fn identify_valid_actions(&mut self, objects: &[String]) -> Result<ValidActionSet, EnvError> {
        self.require(Handicap::ValidActionDetection)?;
        self.require(Handicap::LoadSave)?;
        if self.episode_over() {
            return Err(EnvError::EpisodeOver);
        }
        let saved = self.state.snapshot();
        let base = WorldState::restore(&self.game, &saved)?;
        let candidates = enumerate_candidates(self.game.templates(), objects, PairMode::Distinct);
        let mut found = ValidActionSet::default();
        for cand in candidates {
            let accepted = matches!(self.state.step(&cand.surface), Ok(o) if o.accepted);
            if accepted && self.state.tree_differs(&base) {
                let digest = crate::world::state_diff(&base, &self.state).digest();
                found.actions.push(cand);
                found.diffs.push(digest);
            }
            self.state = WorldState::restore(&self.game, &saved)?;
        }
        debug_assert_eq!(self.state.state_hash(), base.state_hash());
        if self.dedup_by_diff {
            found = dedup(found);
        }
        Ok(found)
    }
}

fn dedup(set: ValidActionSet) -> ValidActionSet {
    let mut first: BTreeMap<u64, ActionCandidate> = BTreeMap::new();
    for (a, d) in set.actions.into_iter().zip(set.diffs) {
        match first.get(&d) {
            Some(kept) if kept.surface <= a.surface => {}
            _ => {
                first.insert(d, a);
            }
        }
    }
    let mut pairs: Vec<(ActionCandidate, u64)> = first.into_iter().map(|(d, a)| (a, d)).collect();
    pairs.sort_by(|x, y| (x.0.template, &x.0.fillers).cmp(&(y.0.template, &y.0.fillers)));
    let (actions, diffs) = pairs.into_iter().unzip();
    ValidActionSet { actions, diffs }
}

#[cfg(test)]
mod tests;
