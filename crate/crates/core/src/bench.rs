//! Normalized completion: agent score over maximum score, averaged over
//! games, as a percentage.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("no rows to aggregate")]
    Empty,
    #[error("row {0} has a non-positive maximum score")]
    BadMax(usize),
}

/// How raw scores become per-game fractions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Aggregation {
    /// Treat negative scores as zero.
    pub clip_negatives: bool,
    /// Subtract each game's starting score from both the score and the
    /// maximum before dividing.
    pub subtract_baseline: bool,
}

impl Default for Aggregation {
    fn default() -> Self {
        Aggregation { clip_negatives: true, subtract_baseline: false }
    }
}

impl Aggregation {
    pub const RAW: Aggregation = Aggregation { clip_negatives: false, subtract_baseline: false };
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub score: f64,
    pub max_score: f64,
    /// Score at the start of the game.
    #[serde(default)]
    pub baseline: f64,
}

impl Row {
    pub fn new(score: f64, max_score: f64) -> Self {
        Row { score, max_score, baseline: 0.0 }
    }
}

/// `100 * mean(score_i / max_i)` under `agg`.
pub fn compute_normalized_completion(rows: &[Row], agg: Aggregation) -> Result<f64, BenchError> {
    if rows.is_empty() {
        return Err(BenchError::Empty);
    }
    let mut sum = 0.0;
    for (i, r) in rows.iter().enumerate() {
        let (mut score, mut max) = (r.score, r.max_score);
        if agg.subtract_baseline {
            score -= r.baseline;
            max -= r.baseline;
        }
        if !(max > 0.0) {
            return Err(BenchError::BadMax(i));
        }
        if agg.clip_negatives {
            score = score.max(0.0);
        }
        sum += score / max;
    }
    Ok(100.0 * sum / rows.len() as f64)
}

/// Published raw scores on the commercial and community benchmark games.
/// Columns: game, templates, vocabulary, random, NAIL, TDQN, DRRN, max.
pub mod reference {
    use super::Row;
    use alloc::vec::Vec;

    #[derive(Clone, Copy, Debug, PartialEq)]
    pub struct Published {
        pub game: &'static str,
        pub templates: u32,
        pub vocabulary: u32,
        pub random: f64,
        pub nail: f64,
        pub tdqn: f64,
        pub drrn: f64,
        pub max_score: f64,
        /// Starting score.
        pub baseline: f64,
    }

    const fn p(game: &'static str, t: u32, v: u32, s: [f64; 5]) -> Published {
        Published {
            game,
            templates: t,
            vocabulary: v,
            random: s[0],
            nail: s[1],
            tdqn: s[2],
            drrn: s[3],
            max_score: s[4],
            baseline: 0.0,
        }
    }

    pub const TABLE: [Published; 33] = [
        p("905", 82, 296, [0.0, 0.0, 0.0, 0.0, 1.0]),
        p("acorncourt", 151, 343, [0.0, 0.0, 1.6, 10.0, 30.0]),
        Published { baseline: 36.0, ..p("advent", 189, 786, [36.0, 36.0, 36.0, 36.0, 350.0]) },
        p("adventureland", 156, 398, [0.0, 0.0, 0.0, 20.6, 100.0]),
        p("afflicted", 146, 762, [0.0, 0.0, 1.3, 2.6, 75.0]),
        p("anchor", 260, 2257, [0.0, 0.0, 0.0, 0.0, 100.0]),
        p("awaken", 159, 505, [0.0, 0.0, 0.0, 0.0, 50.0]),
        p("balances", 156, 452, [0.0, 10.0, 4.8, 10.0, 51.0]),
        p("deephome", 173, 760, [1.0, 13.3, 1.0, 1.0, 300.0]),
        p("detective", 197, 344, [113.7, 136.9, 169.0, 197.8, 360.0]),
        p("dragon", 177, 1049, [0.0, 0.6, -5.3, -3.5, 25.0]),
        p("enchanter", 290, 722, [0.0, 0.0, 8.6, 20.0, 400.0]),
        p("gold", 200, 728, [0.0, 3.0, 4.1, 0.0, 100.0]),
        p("inhumane", 141, 409, [0.0, 0.6, 0.7, 0.0, 90.0]),
        p("jewel", 161, 657, [0.0, 1.6, 0.0, 1.6, 90.0]),
        p("karn", 178, 615, [0.0, 1.2, 0.7, 2.1, 170.0]),
        p("library", 173, 510, [0.0, 0.9, 6.3, 17.0, 30.0]),
        p("ludicorp", 187, 503, [13.2, 8.4, 6.0, 13.8, 150.0]),
        p("moonlit", 166, 669, [0.0, 0.0, 0.0, 0.0, 1.0]),
        p("omniquest", 207, 460, [0.0, 5.6, 16.8, 5.0, 50.0]),
        p("pentari", 155, 472, [0.0, 0.0, 17.4, 27.2, 70.0]),
        p("reverb", 183, 526, [0.0, 0.0, 0.3, 8.2, 50.0]),
        p("snacktime", 201, 468, [0.0, 0.0, 9.7, 0.0, 50.0]),
        p("sorcerer", 288, 1013, [5.0, 5.0, 5.0, 20.8, 400.0]),
        p("spellbrkr", 333, 844, [25.0, 40.0, 18.7, 37.8, 600.0]),
        p("spirit", 169, 1112, [2.4, 1.0, 0.6, 0.8, 250.0]),
        p("temple", 175, 622, [0.0, 7.3, 7.9, 7.4, 35.0]),
        p("tryst205", 197, 871, [0.0, 2.0, 0.0, 9.6, 350.0]),
        p("yomomma", 141, 619, [0.0, 0.0, 0.0, 0.4, 35.0]),
        p("zenon", 149, 401, [0.0, 0.0, 0.0, 0.0, 20.0]),
        p("zork1", 237, 697, [0.0, 10.3, 9.9, 32.6, 350.0]),
        p("zork3", 214, 564, [0.2, 1.8, 0.0, 0.5, 7.0]),
        p("ztuu", 186, 607, [0.0, 0.0, 4.9, 21.6, 100.0]),
    ];

    /// Rows for one agent column.
    pub fn rows(column: fn(&Published) -> f64) -> Vec<Row> {
        TABLE.iter().map(|g| Row { score: column(g), max_score: g.max_score, baseline: g.baseline }).collect()
    }
}
