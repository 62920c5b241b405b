//! Replaying a game's bundled walkthrough.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use thiserror::Error;

use super::game::Game;
use super::state::{WorldError, WorldState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WalkthroughError {
    #[error("step {step} `{command}` was rejected: {text}")]
    Rejected { step: usize, command: String, text: String },
    #[error("step {step} `{command}`: {source}")]
    World { step: usize, command: String, source: WorldError },
    #[error("walkthrough ends with score {score} of {max}")]
    Incomplete { score: i64, max: i64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkthroughReport {
    /// Reward after each command.
    pub rewards: Vec<i64>,
    pub final_score: i64,
    pub done: bool,
    /// Average number of commands per positive reward.
    pub steps_per_reward: f64,
}

/// Plays the walkthrough from a fresh state. Every command must be accepted
/// and the final score must reach the maximum.
pub fn verify_walkthrough(game: &Arc<Game>, seed: u64) -> Result<WalkthroughReport, WalkthroughError> {
    let mut s = WorldState::new(game.clone(), seed);
    let mut rewards = Vec::new();
    for (step, cmd) in game.def().walkthrough.iter().enumerate() {
        let before = s.score();
        let out = s
            .step(cmd)
            .map_err(|source| WalkthroughError::World { step, command: cmd.clone(), source })?;
        if !out.accepted {
            return Err(WalkthroughError::Rejected { step, command: cmd.clone(), text: out.text });
        }
        rewards.push(s.score() - before);
    }
    if s.score() < game.max_score() {
        return Err(WalkthroughError::Incomplete { score: s.score(), max: game.max_score() });
    }
    let positive = rewards.iter().filter(|r| **r > 0).count().max(1);
    Ok(WalkthroughReport {
        steps_per_reward: rewards.len() as f64 / positive as f64,
        rewards,
        final_score: s.score(),
        done: s.done(),
    })
}
