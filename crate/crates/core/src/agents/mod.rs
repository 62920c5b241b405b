//! Learning agents: a random baseline, a valid-action scorer (DRRN) and a
//! template/word Q-learner (TDQN), with the replay, optimiser and training
//! loop they share.

use alloc::string::String;

use thiserror::Error;

use crate::env::EnvError;

pub mod adam;
pub mod checkpoint;
pub mod drrn;
pub mod encoder;
pub mod nn;
pub mod params;
pub mod random;
pub mod replay;
pub mod select;
pub mod tdqn;
pub mod tokenizer;
pub mod trainer;

#[cfg(test)]
mod gradcheck;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::{Checkpoint, CheckpointError, ModelSpec, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use drrn::{Drrn, DrrnLoss, DrrnTransition};
pub use encoder::{Encoder, ObsTokens};
pub use params::{ParamStore, Tensor};
pub use random::{RandomAgent, CANONICAL_ACTIONS};
pub use replay::{Batch, PrioritizedReplay, ReplayConfig};
pub use select::{argmax, softmax_probs, softmax_select, td_error};
pub use tdqn::{bce, greedy_action, select_action, BceTargets, QHeads, Tdqn, TdqnAction, TdqnLoss, TdqnTransition};
pub use tokenizer::Tokenizer;
pub use trainer::{
    rolling_mean, AgentKind, BatchStepper, EpisodeRecord, LossRecord, Sequential, TrainConfig, TrainReport, Trainer, Worker,
    WorkerStep,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("no actions to score")]
    EmptyActions,
    #[error("replay holds {have} transition(s), batch needs {need}")]
    UnderfullReplay { have: usize, need: usize },
    #[error("non-finite gradient in `{tensor}` at index {index}")]
    NonFiniteGradient { tensor: String, index: usize },
    #[error("no valid action at reset of `{game}`; the start state is a dead end")]
    NoValidActionsAtReset { game: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}
