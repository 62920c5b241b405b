use alloc::string::String;
use alloc::vec::Vec;

use super::rule::PatternToken;
use crate::world::def::ObjectId;
use crate::world::tree::NodeIdx;
use crate::world::WorldState;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseOutcome {
    /// A rule matched and every slot bound to a visible object.
    Resolved { rule: usize, objects: Vec<ObjectId> },
    /// No pattern matches the words.
    Unparseable,
    /// A pattern matched but `noun` names nothing in scope.
    Unresolved { noun: String },
}

impl ParseOutcome {
    pub fn is_resolved(&self) -> bool {
        matches!(self, ParseOutcome::Resolved { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            ParseOutcome::Resolved { .. } => "resolved",
            ParseOutcome::Unparseable => "unparseable",
            ParseOutcome::Unresolved { .. } => "unresolved",
        }
    }
}

const ARTICLES: [&str; 3] = ["the", "a", "an"];

/// Lowercase words with punctuation stripped and articles dropped.
pub fn command_words(text: &str) -> Vec<String> {
    text.split(|c: char| c.is_whitespace() || c == ',' || c == '.' || c == '!' || c == '?' || c == ';')
        .map(|w| {
            w.chars()
                .filter(|c| c.is_alphanumeric() || *c == '-')
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|w| !w.is_empty() && !ARTICLES.contains(&w.as_str()))
        .collect()
}

pub(crate) struct Parsed {
    pub outcome: ParseOutcome,
    pub bound: [Option<NodeIdx>; 2],
}

fn resolve_noun(state: &WorldState, visible: &[NodeIdx], word: &str) -> Option<NodeIdx> {
    let named = state.game().objects_named(word);
    visible.iter().copied().find(|v| named.contains(v))
}

pub(crate) fn parse(state: &WorldState, text: &str) -> Parsed {
    let words = command_words(text);
    let game = state.game().clone();
    let mut visible: Option<Vec<NodeIdx>> = None;
    let mut unresolved: Option<String> = None;
    let mut fallback: Option<(usize, [Option<NodeIdx>; 2])> = None;

    for (ri, rule) in game.rules.iter().enumerate() {
        if rule.pattern.len() != words.len() {
            continue;
        }
        let mut slot_words: Vec<&str> = Vec::new();
        let matched = rule.pattern.iter().zip(&words).all(|(p, w)| match p {
            PatternToken::Word(lit) => lit == w,
            PatternToken::Slot => {
                slot_words.push(w);
                true
            }
        });
        if !matched {
            continue;
        }
        let vis = visible.get_or_insert_with(|| state.visible_idx());
        let mut bound = [None, None];
        let mut ok = true;
        for (k, w) in slot_words.iter().enumerate() {
            match resolve_noun(state, vis, w) {
                Some(o) => bound[k] = Some(o),
                None => {
                    if unresolved.is_none() {
                        unresolved = Some((*w).into());
                    }
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let def_rule = &game.def().grammar[ri];
        if def_rule.when.iter().all(|c| state.check(c, &bound)) {
            return Parsed { outcome: resolved(state, ri, &bound), bound };
        }
        if fallback.is_none() {
            fallback = Some((ri, bound));
        }
    }

    if let Some((ri, bound)) = fallback {
        return Parsed { outcome: resolved(state, ri, &bound), bound };
    }
    let outcome = match unresolved {
        Some(noun) => ParseOutcome::Unresolved { noun },
        None => ParseOutcome::Unparseable,
    };
    Parsed { outcome, bound: [None, None] }
}

fn resolved(state: &WorldState, rule: usize, bound: &[Option<NodeIdx>; 2]) -> ParseOutcome {
    ParseOutcome::Resolved {
        rule,
        objects: bound.iter().flatten().map(|i| state.game().id_of(*i)).collect(),
    }
}

/// Parses `text` against the game's grammar in the context of `state`.
/// Several rules may share a pattern; the first whose conditions hold wins,
/// otherwise the first that resolved.
pub fn parse_command(state: &WorldState, text: &str) -> ParseOutcome {
    parse(state, text).outcome
}
