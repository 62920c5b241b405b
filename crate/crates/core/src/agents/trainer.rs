//! Episode collection and the update loop for all three agent kinds.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamConfig};
use super::checkpoint::{Checkpoint, ModelSpec};
use super::drrn::{Drrn, DrrnTransition};
use super::encoder::ObsTokens;
use super::params::ParamStore;
use super::random::{RandomAgent, CANONICAL_ACTIONS};
use super::replay::{PrioritizedReplay, ReplayConfig};
use super::select::{self, softmax_select};
use super::tdqn::{select_action, BceTargets, Tdqn, TdqnTransition};
use super::tokenizer::Tokenizer;
use super::AgentError;
use crate::env::{AugmentedObservation, EpisodeLimits, Env, Handicap, Handicaps};
use crate::grammar::{ActionCandidate, Template, Vocabulary};
use crate::rng::SplitMix64;
use crate::world::Game;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Random,
    Drrn,
    Tdqn,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Random => "random",
            AgentKind::Drrn => "drrn",
            AgentKind::Tdqn => "tdqn",
        }
    }

    /// Environment capabilities the agent is trained with.
    pub fn handicaps(self) -> Handicaps {
        let base = Handicaps::NONE.with(Handicap::FixedSeed);
        match self {
            AgentKind::Random => base,
            AgentKind::Drrn => base
                .with(Handicap::LoadSave)
                .with(Handicap::ObjectTree)
                .with(Handicap::ValidActionDetection),
            AgentKind::Tdqn => base
                .with(Handicap::LoadSave)
                .with(Handicap::TemplatesVocab)
                .with(Handicap::ObjectTree)
                .with(Handicap::ValidActionDetection),
        }
    }

    fn code(self) -> u8 {
        self as u8
    }

    pub(crate) fn from_code(c: u8) -> Option<Self> {
        [AgentKind::Random, AgentKind::Drrn, AgentKind::Tdqn].get(c as usize).copied()
    }

    pub(crate) fn to_code(self) -> u8 {
        self.code()
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "random" | "rand" => Ok(AgentKind::Random),
            "drrn" => Ok(AgentKind::Drrn),
            "tdqn" => Ok(AgentKind::Tdqn),
            other => Err(alloc::format!("unknown agent `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub seed: u64,
    pub gamma: f64,
    pub lr: f64,
    pub batch_size: usize,
    /// Softmax temperature for DRRN action sampling.
    pub temperature: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Environment steps over which TDQN's epsilon is annealed.
    pub epsilon_steps: u64,
    /// Weight of the supervised term in TDQN's loss.
    pub lambda: f64,
    pub valid_step_cap: u32,
    /// Bound on all commands per episode, valid or not.
    pub total_step_cap: Option<u32>,
    /// Parallel environments (DRRN and the random agent; TDQN uses one).
    pub env_count: usize,
    /// Budget of environment steps, summed over environments.
    pub env_steps: u64,
    /// Environment steps per gradient update.
    pub update_every: u64,
    pub learning_starts: usize,
    /// Copy online parameters into the target every this many updates.
    /// `None` bootstraps from the online parameters.
    pub target_sync: Option<u64>,
    pub checkpoint_every: Option<u64>,
    /// Stop once the mean score of the last 100 episodes reaches this.
    pub stop_at_score: Option<f64>,
    pub embed_dim: usize,
    pub hidden: usize,
    pub max_len: usize,
    pub replay_capacity: usize,
    pub alpha: f64,
    pub beta_start: f64,
    pub beta_end: f64,
    pub priority_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 0,
            gamma: 0.9,
            lr: 1e-3,
            batch_size: 32,
            temperature: 1.0,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_steps: 50_000,
            lambda: 0.5,
            valid_step_cap: 100,
            total_step_cap: Some(1000),
            env_count: 1,
            env_steps: 100_000,
            update_every: 4,
            learning_starts: 256,
            target_sync: Some(100),
            checkpoint_every: None,
            stop_at_score: None,
            embed_dim: 32,
            hidden: 64,
            max_len: 48,
            replay_capacity: 100_000,
            alpha: 0.6,
            beta_start: 0.4,
            beta_end: 1.0,
            priority_eps: 1e-3,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: &str| Err(AgentError::Config(m.into()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must be in (0, 1]");
        }
        if !(self.temperature > 0.0) {
            return bad("temperature must be positive");
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad("lambda must be in [0, 1]");
        }
        if self.batch_size == 0 || self.env_count == 0 || self.update_every == 0 || self.valid_step_cap == 0 {
            return bad("batch_size, env_count, update_every and valid_step_cap must be positive");
        }
        if self.embed_dim == 0 || self.hidden == 0 || self.max_len == 0 {
            return bad("embed_dim, hidden and max_len must be positive");
        }
        if self.replay_capacity < self.batch_size {
            return bad("replay_capacity is smaller than batch_size");
        }
        if self.target_sync == Some(0) || self.checkpoint_every == Some(0) {
            return bad("target_sync and checkpoint_every must be positive when set");
        }
        Ok(())
    }

    fn limits(&self) -> EpisodeLimits {
        EpisodeLimits { valid_steps: self.valid_step_cap, total_steps: self.total_step_cap }
    }

    fn replay(&self) -> ReplayConfig {
        let updates = (self.env_steps / self.update_every).max(1);
        ReplayConfig {
            capacity: self.replay_capacity,
            alpha: self.alpha,
            beta_start: self.beta_start,
            beta_end: self.beta_end,
            beta_steps: updates,
            eps: self.priority_eps,
        }
    }

    fn epsilon(&self) -> select::Linear {
        select::Linear { start: self.epsilon_start, end: self.epsilon_end, steps: self.epsilon_steps }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: u64,
    /// Environment steps taken so far, over all environments.
    pub steps: u64,
    #[serde(rename = "return")]
    pub ret: f64,
    pub score: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub update: u64,
    pub td: f64,
    pub bce: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub kind: AgentKind,
    pub handicaps: Handicaps,
    pub curve: Vec<EpisodeRecord>,
    pub losses: Vec<LossRecord>,
    pub env_steps: u64,
    pub updates: u64,
}

impl TrainReport {
    /// Mean score of the last 100 episodes.
    pub fn final_score(&self) -> f64 {
        let scores: Vec<f64> = self.curve.iter().map(|e| e.score as f64).collect();
        rolling_mean(&scores, 100).last().copied().unwrap_or(0.0)
    }

    /// Best 100-episode mean score reached during training.
    pub fn best_score(&self) -> f64 {
        let scores: Vec<f64> = self.curve.iter().map(|e| e.score as f64).collect();
        rolling_mean(&scores, 100).into_iter().fold(0.0, f64::max)
    }

    /// `episode,steps,return,score` lines with a header.
    pub fn curve_csv(&self) -> String {
        use core::fmt::Write;
        let mut out = String::from("episode,steps,return,score\n");
        for e in &self.curve {
            let _ = writeln!(out, "{},{},{},{}", e.episode, e.steps, e.ret, e.score);
        }
        out
    }
}

/// Trailing mean over up to `window` values, one entry per position.
pub fn rolling_mean(values: &[f64], window: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for (i, v) in values.iter().enumerate() {
        sum += v;
        if i >= window {
            sum -= values[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

/// What one environment reports after a command.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkerStep {
    pub reward: f64,
    pub score: i64,
    pub done: bool,
    pub episode_over: bool,
    pub valid: bool,
    pub episode_return: f64,
}

/// One environment with its current observation and valid actions.
#[derive(Clone, Debug)]
pub struct Worker {
    env: Env,
    need_valid: bool,
    obs: AugmentedObservation,
    valid: Vec<ActionCandidate>,
    cache: BTreeMap<(u64, Vec<String>), Vec<ActionCandidate>>,
    episode_return: f64,
}

impl Worker {
    pub fn new(env: Env, need_valid: bool) -> Self {
        Worker {
            env,
            need_valid,
            obs: AugmentedObservation::default(),
            valid: Vec::new(),
            cache: BTreeMap::new(),
            episode_return: 0.0,
        }
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn observation(&self) -> &AugmentedObservation {
        &self.obs
    }

    /// Valid actions at the current state; empty when not requested or
    /// once the episode is over.
    pub fn valid(&self) -> &[ActionCandidate] {
        &self.valid
    }

    pub fn reset(&mut self, seed: u64) -> Result<(), AgentError> {
        let (obs, _) = self.env.reset(Some(seed))?;
        self.obs = obs;
        self.episode_return = 0.0;
        self.refresh_valid()
    }

    fn refresh_valid(&mut self) -> Result<(), AgentError> {
        self.valid.clear();
        if !self.need_valid || self.env.episode_over() {
            return Ok(());
        }
        let objects = self.env.interactive_objects();
        let key = (self.env.position_hash(), objects);
        if let Some(v) = self.cache.get(&key) {
            self.valid.clone_from(v);
            return Ok(());
        }
        let found = self.env.identify_valid_actions(&key.1)?.actions;
        self.valid.clone_from(&found);
        self.cache.insert(key, found);
        Ok(())
    }

    pub fn step(&mut self, action: &str) -> Result<WorkerStep, AgentError> {
        let r = self.env.step(action)?;
        self.episode_return += r.reward as f64;
        self.obs = if self.env.handicaps().contains(Handicap::LoadSave) {
            self.env.gather_augmented_observation()?
        } else {
            AugmentedObservation { narrative: r.observation.clone(), prev_action: action.into(), ..Default::default() }
        };
        self.refresh_valid()?;
        Ok(WorkerStep {
            reward: r.reward as f64,
            score: r.score,
            done: r.done,
            episode_over: r.episode_over(),
            valid: r.valid,
            episode_return: self.episode_return,
        })
    }
}

/// Steps a set of workers, one command each. Results are in worker order.
pub trait BatchStepper {
    fn step_all(&mut self, workers: &mut [Worker], actions: &[String]) -> Vec<Result<WorkerStep, AgentError>>;
}

/// Steps workers one after another on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl BatchStepper for Sequential {
    fn step_all(&mut self, workers: &mut [Worker], actions: &[String]) -> Vec<Result<WorkerStep, AgentError>> {
        workers.iter_mut().zip(actions).map(|(w, a)| w.step(a)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Model {
    Random,
    Drrn(Drrn),
    Tdqn(Tdqn),
}

fn build(kind: AgentKind, spec: &ModelSpec, rng: &mut SplitMix64) -> (ParamStore, Model) {
    let mut p = ParamStore::new();
    let model = match kind {
        AgentKind::Random => Model::Random,
        AgentKind::Drrn => Model::Drrn(Drrn::new(&mut p, spec.tokens, spec.embed_dim, spec.hidden, rng)),
        AgentKind::Tdqn => Model::Tdqn(Tdqn::new(
            &mut p,
            spec.tokens,
            spec.templates,
            spec.words,
            spec.embed_dim,
            spec.hidden,
            rng,
        )),
    };
    (p, model)
}

pub struct Trainer {
    game: Arc<Game>,
    kind: AgentKind,
    config: TrainConfig,
    tokenizer: Tokenizer,
    templates: Vec<Template>,
    vocab: Vocabulary,
    model: Model,
    params: ParamStore,
    target: ParamStore,
    adam: Adam,
    rng: SplitMix64,
    updates: u64,
}

impl Trainer {
    pub fn new(game: Arc<Game>, kind: AgentKind, config: TrainConfig) -> Result<Self, AgentError> {
        config.validate()?;
        let tokenizer = Tokenizer::for_game(&game, config.max_len);
        let spec = ModelSpec {
            tokens: tokenizer.len(),
            embed_dim: config.embed_dim,
            hidden: config.hidden,
            templates: game.templates().len(),
            words: game.vocabulary().len(),
            max_len: config.max_len,
        };
        let mut rng = SplitMix64::new(config.seed);
        let (params, model) = build(kind, &spec, &mut rng);
        Self::assemble(game, kind, config, tokenizer, model, params, rng)
    }

    fn assemble(
        game: Arc<Game>,
        kind: AgentKind,
        config: TrainConfig,
        tokenizer: Tokenizer,
        model: Model,
        params: ParamStore,
        rng: SplitMix64,
    ) -> Result<Self, AgentError> {
        // templates and vocabulary are read through the gated accessors so
        // an agent only sees what its handicaps allow
        let probe = Env::new(game.clone(), kind.handicaps(), 0)?;
        let templates = probe.templates().map(<[Template]>::to_vec).unwrap_or_else(|_| game.templates().to_vec());
        let vocab = probe.vocabulary().cloned().unwrap_or_default();
        let adam = Adam::new(AdamConfig { lr: config.lr, ..AdamConfig::default() }, params.len());
        Ok(Trainer {
            target: params.clone(),
            game,
            kind,
            config,
            tokenizer,
            templates,
            vocab,
            model,
            params,
            adam,
            rng,
            updates: 0,
        })
    }

    /// Restores parameters, optimiser and generator state. The model shape
    /// is taken from the checkpoint; `config` supplies everything else.
    pub fn from_checkpoint(game: Arc<Game>, mut config: TrainConfig, ck: &Checkpoint) -> Result<Self, AgentError> {
        config.embed_dim = ck.spec.embed_dim;
        config.hidden = ck.spec.hidden;
        config.max_len = ck.spec.max_len;
        config.validate()?;
        let tokenizer = Tokenizer::for_game(&game, config.max_len);
        let expect = ModelSpec {
            tokens: tokenizer.len(),
            templates: game.templates().len(),
            words: game.vocabulary().len(),
            ..ck.spec
        };
        if expect != ck.spec {
            return Err(super::CheckpointError::Mismatch("model shape does not fit this game").into());
        }
        let (fresh, model) = build(ck.kind, &ck.spec, &mut SplitMix64::new(0));
        if !fresh.same_layout(&ck.params) {
            return Err(super::CheckpointError::Mismatch("tensor layout differs").into());
        }
        let mut t = Self::assemble(game, ck.kind, config, tokenizer, model, ck.params.clone(), SplitMix64::new(ck.rng))?;
        t.target.data.clone_from(&ck.target);
        t.adam = ck.adam.clone();
        t.updates = ck.updates;
        Ok(t)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            kind: self.kind,
            spec: ModelSpec {
                tokens: self.tokenizer.len(),
                embed_dim: self.config.embed_dim,
                hidden: self.config.hidden,
                templates: self.game.templates().len(),
                words: self.game.vocabulary().len(),
                max_len: self.config.max_len,
            },
            params: self.params.clone(),
            target: self.target.data.clone(),
            adam: self.adam.clone(),
            rng: self.rng.state(),
            updates: self.updates,
        }
    }

    pub fn kind(&self) -> AgentKind {
        self.kind
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn tokenizer(&self) -> &Tokenizer {
        &self.tokenizer
    }

    fn workers(&self, rng: &mut SplitMix64, count: usize) -> Result<Vec<Worker>, AgentError> {
        let need_valid = self.kind != AgentKind::Random;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let env = Env::new(self.game.clone(), self.kind.handicaps(), rng.next_u64())?.with_limits(self.config.limits());
            let mut w = Worker::new(env, need_valid);
            w.reset(rng.next_u64())?;
            if need_valid && w.valid().is_empty() {
                return Err(AgentError::NoValidActionsAtReset { game: self.game.title().into() });
            }
            out.push(w);
        }
        Ok(out)
    }

    fn obs_tokens(&self, w: &Worker) -> ObsTokens {
        ObsTokens::new(&self.tokenizer, w.observation())
    }

    fn action_tokens(&self, valid: &[ActionCandidate]) -> Vec<Vec<u32>> {
        valid.iter().map(|a| self.tokenizer.encode(&a.surface)).collect()
    }

    /// Runs until the step budget is spent or the score target is met.
    pub fn train(
        &mut self,
        stepper: &mut dyn BatchStepper,
        on_checkpoint: &mut dyn FnMut(&Checkpoint),
    ) -> Result<TrainReport, AgentError> {
        match self.model {
            Model::Random => self.run_random(stepper),
            Model::Drrn(m) => self.run_drrn(m, stepper, on_checkpoint),
            Model::Tdqn(m) => self.run_tdqn(m, stepper, on_checkpoint),
        }
    }

    fn report(&self, curve: Vec<EpisodeRecord>, losses: Vec<LossRecord>, env_steps: u64) -> TrainReport {
        TrainReport { kind: self.kind, handicaps: self.kind.handicaps(), curve, losses, env_steps, updates: self.updates }
    }

    fn reached_target(&self, curve: &[EpisodeRecord]) -> bool {
        let Some(goal) = self.config.stop_at_score else { return false };
        if curve.len() < 100 {
            return false;
        }
        let last = &curve[curve.len() - 100..];
        last.iter().map(|e| e.score as f64).sum::<f64>() / 100.0 >= goal
    }

    /// Bookkeeping shared by all loops: records finished episodes and
    /// resets their environments.
    fn finish_episodes(
        &mut self,
        workers: &mut [Worker],
        steps: &[WorkerStep],
        env_steps: u64,
        curve: &mut Vec<EpisodeRecord>,
    ) -> Result<(), AgentError> {
        for (w, s) in workers.iter_mut().zip(steps) {
            if s.episode_over {
                curve.push(EpisodeRecord { episode: curve.len() as u64, steps: env_steps, ret: s.episode_return, score: s.score });
                w.reset(self.rng.next_u64())?;
            }
        }
        Ok(())
    }

    fn run_random(&mut self, stepper: &mut dyn BatchStepper) -> Result<TrainReport, AgentError> {
        let mut rng = self.rng.fork();
        let mut workers = self.workers(&mut rng, self.config.env_count)?;
        let mut agent = RandomAgent::new(self.rng.next_u64());
        let mut curve = Vec::new();
        let mut env_steps = 0;
        while env_steps < self.config.env_steps {
            let actions: Vec<String> = workers.iter().map(|_| agent.act().into()).collect();
            let steps = collect(stepper.step_all(&mut workers, &actions))?;
            env_steps += steps.len() as u64;
            self.finish_episodes(&mut workers, &steps, env_steps, &mut curve)?;
        }
        Ok(self.report(curve, Vec::new(), env_steps))
    }

    fn sync_and_checkpoint(&mut self, on_checkpoint: &mut dyn FnMut(&Checkpoint)) {
        if self.config.target_sync.is_some_and(|k| self.updates.is_multiple_of(k)) {
            self.target.data.clone_from(&self.params.data);
        }
        if self.config.checkpoint_every.is_some_and(|k| self.updates.is_multiple_of(k)) {
            on_checkpoint(&self.checkpoint());
        }
    }

    fn run_drrn(
        &mut self,
        m: Drrn,
        stepper: &mut dyn BatchStepper,
        on_checkpoint: &mut dyn FnMut(&Checkpoint),
    ) -> Result<TrainReport, AgentError> {
        let cfg = self.config.clone();
        let mut rng = self.rng.fork();
        let mut workers = self.workers(&mut rng, cfg.env_count)?;
        let mut replay: PrioritizedReplay<DrrnTransition> = PrioritizedReplay::new(cfg.replay());
        let (mut curve, mut losses) = (Vec::new(), Vec::new());
        let (mut env_steps, mut since_update) = (0u64, 0u64);
        while env_steps < cfg.env_steps && !self.reached_target(&curve) {
            let mut obs = Vec::with_capacity(workers.len());
            let mut chosen = Vec::with_capacity(workers.len());
            let mut texts = Vec::with_capacity(workers.len());
            for w in &workers {
                let o = self.obs_tokens(w);
                let text: String = if w.valid().is_empty() {
                    CANONICAL_ACTIONS[self.rng.below(CANONICAL_ACTIONS.len())].into()
                } else {
                    let acts = self.action_tokens(w.valid());
                    let q = m.q_values(&self.params.data, &o, &acts)?;
                    w.valid()[softmax_select(&q, cfg.temperature, &mut self.rng)].surface.clone()
                };
                chosen.push(self.tokenizer.encode(&text));
                texts.push(text);
                obs.push(o);
            }
            let steps = collect(stepper.step_all(&mut workers, &texts))?;
            for (i, s) in steps.iter().enumerate() {
                let w = &workers[i];
                replay.push(DrrnTransition {
                    obs: core::mem::take(&mut obs[i]),
                    action: core::mem::take(&mut chosen[i]),
                    reward: s.reward,
                    next_obs: self.obs_tokens(w),
                    next_actions: self.action_tokens(w.valid()),
                    done: s.done,
                });
            }
            env_steps += steps.len() as u64;
            since_update += steps.len() as u64;
            self.finish_episodes(&mut workers, &steps, env_steps, &mut curve)?;
            while since_update >= cfg.update_every && replay.len() >= cfg.learning_starts.max(cfg.batch_size) {
                since_update -= cfg.update_every;
                let batch = replay.sample(cfg.batch_size, replay.beta(self.updates), &mut self.rng)?;
                let refs: Vec<&DrrnTransition> = batch.indices.iter().map(|&i| replay.get(i)).collect();
                let mut grad = self.params.zeros_like();
                let target = if cfg.target_sync.is_some() { &self.target.data } else { &self.params.data };
                let loss = m.loss_and_grad(&self.params.data, target, &refs, &batch.weights, cfg.gamma, &mut grad);
                self.adam.step(&mut self.params, &grad)?;
                replay.update_priorities(&batch.indices, &loss.td_errors);
                self.updates += 1;
                losses.push(LossRecord { update: self.updates, td: loss.loss, bce: 0.0, total: loss.loss });
                self.sync_and_checkpoint(on_checkpoint);
            }
            if since_update >= cfg.update_every {
                since_update = 0;
            }
        }
        Ok(self.report(curve, losses, env_steps))
    }

    fn run_tdqn(
        &mut self,
        m: Tdqn,
        stepper: &mut dyn BatchStepper,
        on_checkpoint: &mut dyn FnMut(&Checkpoint),
    ) -> Result<TrainReport, AgentError> {
        let cfg = self.config.clone();
        let eps = cfg.epsilon();
        let mut rng = self.rng.fork();
        let mut workers = self.workers(&mut rng, 1)?;
        let mut replay: PrioritizedReplay<TdqnTransition> = PrioritizedReplay::new(cfg.replay());
        let (mut curve, mut losses) = (Vec::new(), Vec::new());
        let (mut env_steps, mut since_update) = (0u64, 0u64);
        while env_steps < cfg.env_steps && !self.reached_target(&curve) {
            let w = &workers[0];
            let o = self.obs_tokens(w);
            let targets = BceTargets::from_valid(&self.vocab, w.valid());
            let q = m.q_heads(&self.params.data, &o);
            let a = select_action(&q, &self.templates, eps.at(env_steps), &mut self.rng);
            let text = a.text(&self.templates, &self.vocab);
            let steps = collect(stepper.step_all(&mut workers, &[text]))?;
            let s = &steps[0];
            replay.push(TdqnTransition {
                obs: o,
                action: a,
                reward: s.reward,
                next_obs: self.obs_tokens(&workers[0]),
                done: s.done,
                targets,
            });
            env_steps += 1;
            since_update += 1;
            self.finish_episodes(&mut workers, &steps, env_steps, &mut curve)?;
            if since_update >= cfg.update_every {
                since_update = 0;
                if replay.len() < cfg.learning_starts.max(cfg.batch_size) {
                    continue;
                }
                let batch = replay.sample(cfg.batch_size, replay.beta(self.updates), &mut self.rng)?;
                let refs: Vec<&TdqnTransition> = batch.indices.iter().map(|&i| replay.get(i)).collect();
                let mut grad = self.params.zeros_like();
                let target = if cfg.target_sync.is_some() { &self.target.data } else { &self.params.data };
                let loss = m.loss_and_grad(&self.params.data, target, &refs, &batch.weights, cfg.gamma, cfg.lambda, &mut grad);
                self.adam.step(&mut self.params, &grad)?;
                replay.update_priorities(&batch.indices, &loss.td_errors);
                self.updates += 1;
                losses.push(LossRecord { update: self.updates, td: loss.td, bce: loss.bce, total: loss.total });
                self.sync_and_checkpoint(on_checkpoint);
            }
        }
        Ok(self.report(curve, losses, env_steps))
    }

    /// Plays `episodes` episodes with the current parameters and no
    /// learning. DRRN samples from its softmax; TDQN acts epsilon-greedily
    /// with the final epsilon.
    pub fn evaluate(&self, episodes: u64, seed: u64) -> Result<Vec<EpisodeRecord>, AgentError> {
        let mut rng = SplitMix64::new(seed);
        let mut workers = self.workers(&mut rng, 1)?;
        let mut agent = RandomAgent::new(rng.next_u64());
        let mut curve = Vec::new();
        let mut env_steps = 0;
        while (curve.len() as u64) < episodes {
            let w = &mut workers[0];
            let o = ObsTokens::new(&self.tokenizer, w.observation());
            let text: String = match self.model {
                Model::Random => agent.act().into(),
                Model::Drrn(m) if !w.valid().is_empty() => {
                    let acts = self.action_tokens(w.valid());
                    let q = m.q_values(&self.params.data, &o, &acts)?;
                    w.valid()[softmax_select(&q, self.config.temperature, &mut rng)].surface.clone()
                }
                Model::Drrn(_) => CANONICAL_ACTIONS[rng.below(CANONICAL_ACTIONS.len())].into(),
                Model::Tdqn(m) => {
                    let q = m.q_heads(&self.params.data, &o);
                    select_action(&q, &self.templates, self.config.epsilon_end, &mut rng).text(&self.templates, &self.vocab)
                }
            };
            let s = w.step(&text)?;
            env_steps += 1;
            if s.episode_over {
                curve.push(EpisodeRecord { episode: curve.len() as u64, steps: env_steps, ret: s.episode_return, score: s.score });
                w.reset(rng.next_u64())?;
            }
        }
        Ok(curve)
    }
}

fn collect(results: Vec<Result<WorkerStep, AgentError>>) -> Result<Vec<WorkerStep>, AgentError> {
    results.into_iter().collect()
}
