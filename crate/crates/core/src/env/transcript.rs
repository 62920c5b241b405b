//! Plain-text episode logs, one block per step:
//!
//! ```text
//! Obs0: <narrative>[ Inv: <inventory> Desc: <description>]
//! Action0: <command>[, Q-Value <q>]
//! [Q-Values: 1)<q> <command> 2)...]
//! Reward0: <r>, Score <s>, Done True|False
//! ```

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TranscriptStep {
    pub observation: String,
    pub inventory: Option<String>,
    pub description: Option<String>,
    pub action: String,
    pub q_value: Option<f64>,
    /// Ranked alternatives, highest first.
    pub q_values: Vec<(f64, String)>,
    pub reward: i64,
    pub score: i64,
    pub done: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Transcript {
    pub steps: Vec<TranscriptStep>,
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, step: TranscriptStep) {
        self.steps.push(step);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// UTF-8 text with LF line endings.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (t, s) in self.steps.iter().enumerate() {
            let _ = write!(out, "Obs{t}: {}", one_line(&s.observation));
            if let Some(inv) = &s.inventory {
                let _ = write!(out, " Inv: {}", one_line(inv));
            }
            if let Some(desc) = &s.description {
                let _ = write!(out, " Desc: {}", one_line(desc));
            }
            let _ = write!(out, "\nAction{t}: {}", one_line(&s.action));
            if let Some(q) = s.q_value {
                let _ = write!(out, ", Q-Value {q:.2}");
            }
            out.push('\n');
            if !s.q_values.is_empty() {
                out.push_str("Q-Values:");
                for (k, (q, a)) in s.q_values.iter().enumerate() {
                    let _ = write!(out, " {}){q:.2} {}", k + 1, one_line(a));
                }
                out.push('\n');
            }
            let done = if s.done { "True" } else { "False" };
            let _ = writeln!(out, "Reward{t}: {}, Score {}, Done {done}", s.reward, s.score);
        }
        out
    }
}
