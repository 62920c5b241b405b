//! Training summaries and the JSON benchmark report.

use ifworld_core::agents::{AgentKind, TrainReport};
use ifworld_core::bench::{compute_normalized_completion, Aggregation, BenchError, Row};
use ifworld_core::env::Handicap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report row {row} ({game}) lists no handicaps")]
    MissingHandicaps { row: usize, game: String },
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("malformed report: {0}")]
    Json(#[from] serde_json::Error),
}

/// Sample mean and standard deviation (n - 1 denominator; 0 for n < 2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl MeanStd {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return MeanStd { mean: 0.0, std: 0.0, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        MeanStd { mean, std: var.sqrt(), n }
    }
}

/// One (game, agent) entry. `handicaps` has no default, so a row without
/// it does not parse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRow {
    pub game: String,
    pub agent: AgentKind,
    /// Mean over runs of each run's final 100-episode score.
    pub score: f64,
    pub score_std: f64,
    pub runs: usize,
    pub max_score: f64,
    #[serde(default)]
    pub baseline: f64,
    pub handicaps: Vec<Handicap>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkReport {
    pub aggregation: Aggregation,
    pub rows: Vec<ReportRow>,
    /// Percentage per agent, in the order agents first appear in `rows`.
    pub normalized_completion: Vec<(AgentKind, f64)>,
}

impl BenchmarkReport {
    pub fn new(rows: Vec<ReportRow>, aggregation: Aggregation) -> Result<Self, ReportError> {
        check_handicaps(&rows)?;
        let mut agents: Vec<AgentKind> = Vec::new();
        for r in &rows {
            if !agents.contains(&r.agent) {
                agents.push(r.agent);
            }
        }
        let mut normalized = Vec::new();
        for a in agents {
            let rs: Vec<Row> = rows
                .iter()
                .filter(|r| r.agent == a)
                .map(|r| Row { score: r.score, max_score: r.max_score, baseline: r.baseline })
                .collect();
            normalized.push((a, compute_normalized_completion(&rs, aggregation)?));
        }
        Ok(BenchmarkReport { aggregation, rows, normalized_completion: normalized })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report always serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let r: BenchmarkReport = serde_json::from_str(text)?;
        check_handicaps(&r.rows)?;
        Ok(r)
    }
}

fn check_handicaps(rows: &[ReportRow]) -> Result<(), ReportError> {
    match rows.iter().position(|r| r.handicaps.is_empty()) {
        Some(row) => Err(ReportError::MissingHandicaps { row, game: rows[row].game.clone() }),
        None => Ok(()),
    }
}

/// Per-run results of training one agent on one game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub game: String,
    pub agent: AgentKind,
    pub max_score: i64,
    pub handicaps: Vec<Handicap>,
    pub seeds: Vec<u64>,
    /// Final 100-episode mean score of each run.
    pub final_scores: Vec<f64>,
    pub env_steps: Vec<u64>,
    pub final_score: MeanStd,
    /// `final_score.mean / max_score`.
    pub normalized: f64,
}

impl TrainSummary {
    pub fn new(game: &str, max_score: i64, seeds: Vec<u64>, reports: &[TrainReport]) -> Self {
        let agent = reports.first().map_or(AgentKind::Random, |r| r.kind);
        let handicaps = reports.first().map(|r| r.handicaps.iter().collect()).unwrap_or_default();
        let final_scores: Vec<f64> = reports.iter().map(TrainReport::final_score).collect();
        let stats = MeanStd::of(&final_scores);
        TrainSummary {
            game: game.into(),
            agent,
            max_score,
            handicaps,
            seeds,
            env_steps: reports.iter().map(|r| r.env_steps).collect(),
            normalized: stats.mean / max_score as f64,
            final_score: stats,
            final_scores,
        }
    }

    pub fn row(&self) -> ReportRow {
        ReportRow {
            game: self.game.clone(),
            agent: self.agent,
            score: self.final_score.mean,
            score_std: self.final_score.std,
            runs: self.final_scores.len(),
            max_score: self.max_score as f64,
            baseline: 0.0,
            handicaps: self.handicaps.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(game: &str, agent: AgentKind, score: f64, max: f64) -> ReportRow {
        ReportRow {
            game: game.into(),
            agent,
            score,
            score_std: 0.0,
            runs: 1,
            max_score: max,
            baseline: 0.0,
            handicaps: agent.handicaps().iter().collect(),
        }
    }

    #[test]
    fn mean_std() {
        let s = MeanStd::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(s.mean, 5.0);
        assert!((s.std - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(MeanStd::of(&[3.0]).std, 0.0);
    }

    #[test]
    fn aggregates_per_agent() {
        let rows = vec![
            row("a", AgentKind::Drrn, 5.0, 5.0),
            row("b", AgentKind::Drrn, 0.0, 6.0),
            row("a", AgentKind::Random, 1.0, 5.0),
        ];
        let r = BenchmarkReport::new(rows, Aggregation::default()).unwrap();
        assert_eq!(r.normalized_completion[0], (AgentKind::Drrn, 50.0));
        assert!((r.normalized_completion[1].1 - 20.0).abs() < 1e-12);
        assert_eq!(BenchmarkReport::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn handicaps_are_mandatory() {
        let mut rows = vec![row("a", AgentKind::Drrn, 1.0, 5.0)];
        rows[0].handicaps.clear();
        assert!(matches!(BenchmarkReport::new(rows.clone(), Aggregation::RAW), Err(ReportError::MissingHandicaps { row: 0, .. })));
        let json = r#"{"aggregation":{"clip_negatives":true,"subtract_baseline":false},
            "rows":[{"game":"a","agent":"drrn","score":1,"score_std":0,"runs":1,"max_score":5}],
            "normalized_completion":[]}"#;
        assert!(matches!(BenchmarkReport::from_json(json), Err(ReportError::Json(_))));
    }
}
