//! Training runs and their artifacts on disk.
//!
//! A run directory holds `run<k>.csv` learning curves, `run<k>.ckpt`
//! checkpoints, `run<k>.losses.csv` and `summary.json`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use ifworld_core::agents::{AgentError, BatchStepper, Checkpoint, CheckpointError, EpisodeRecord, TrainReport, Trainer};
use ifworld_core::world::Game;
use thiserror::Error;

use crate::config::RunConfig;
use crate::report::{MeanStd, TrainSummary};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Checkpoint { path: PathBuf, source: CheckpointError },
    #[error(transparent)]
    Agent(#[from] AgentError),
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.into(), source }
}

pub fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), RunError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
    }
    std::fs::write(path, contents).map_err(io(path))
}

pub fn save_checkpoint(path: &Path, ck: &Checkpoint) -> Result<(), RunError> {
    write(path, ck.to_bytes())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, RunError> {
    let bytes = std::fs::read(path).map_err(io(path))?;
    Checkpoint::from_bytes(&bytes).map_err(|source| RunError::Checkpoint { path: path.into(), source })
}

pub fn losses_csv(report: &TrainReport) -> String {
    let mut out = String::from("update,td,bce,total\n");
    for l in &report.losses {
        out.push_str(&format!("{},{},{},{}\n", l.update, l.td, l.bce, l.total));
    }
    out
}

/// Trains `cfg.runs` independent agents with seeds `train.seed + k`,
/// writing each run's artifacts under `out`. `log` receives one line per
/// finished run.
pub fn train_runs(
    game: &Arc<Game>,
    cfg: &RunConfig,
    stepper: &mut dyn BatchStepper,
    out: &Path,
    log: &mut dyn FnMut(&str),
) -> Result<(TrainSummary, Vec<TrainReport>), RunError> {
    let mut reports = Vec::new();
    let mut seeds = Vec::new();
    for k in 0..cfg.runs {
        let seed = cfg.train.seed.wrapping_add(k as u64);
        let mut tc = cfg.train.clone();
        tc.seed = seed;
        let mut trainer = Trainer::new(game.clone(), cfg.agent, tc)?;
        let ck_path = out.join(format!("run{k}.ckpt"));
        let mut ck_err = None;
        let report = trainer.train(stepper, &mut |ck| {
            if let Err(e) = save_checkpoint(&ck_path, ck) {
                ck_err.get_or_insert(e);
            }
        })?;
        if let Some(e) = ck_err {
            return Err(e);
        }
        save_checkpoint(&ck_path, &trainer.checkpoint())?;
        write(&out.join(format!("run{k}.csv")), report.curve_csv())?;
        if !report.losses.is_empty() {
            write(&out.join(format!("run{k}.losses.csv")), losses_csv(&report))?;
        }
        log(&format!(
            "run {k} seed {seed}: {} episodes, {} env steps, final score {:.2}",
            report.curve.len(),
            report.env_steps,
            report.final_score()
        ));
        seeds.push(seed);
        reports.push(report);
    }
    let summary = TrainSummary::new(game.title(), game.max_score(), seeds, &reports);
    write(&out.join("summary.json"), serde_json::to_string_pretty(&summary).expect("summary serializes"))?;
    Ok((summary, reports))
}

/// Plays `episodes` episodes from a saved checkpoint without learning.
pub fn eval_checkpoint(
    game: &Arc<Game>,
    cfg: &RunConfig,
    ck: &Checkpoint,
    episodes: u64,
    seed: u64,
) -> Result<(Vec<EpisodeRecord>, MeanStd), RunError> {
    let trainer = Trainer::from_checkpoint(game.clone(), cfg.train.clone(), ck)?;
    let eps = trainer.evaluate(episodes, seed)?;
    let scores: Vec<f64> = eps.iter().map(|e| e.score as f64).collect();
    Ok((eps, MeanStd::of(&scores)))
}
